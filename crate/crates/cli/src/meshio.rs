//! Plain-text mesh formats.
//!
//! 2D triangulations:
//! ```text
//! mesh2d <n_nodes> <n_tris>
//! x y            (n_nodes lines)
//! i j k          (n_tris lines, 0-based, counterclockwise)
//! ```
//! Closed surface triangulations use the header `mesh3d-surface` and
//! three coordinates per node line.

use std::fmt::Write as _;
use std::path::Path;

use lamecouple_core::mesh::{Mesh, MeshError, SurfaceMesh3};

#[derive(Debug)]
pub enum MeshIoError {
    Io(std::io::Error),
    Format(String),
    Invalid(MeshError),
}

impl std::fmt::Display for MeshIoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshIoError::Io(e) => write!(f, "mesh io: {e}"),
            MeshIoError::Format(m) => write!(f, "mesh format: {m}"),
            MeshIoError::Invalid(e) => write!(f, "mesh invalid: {e}"),
        }
    }
}

impl std::error::Error for MeshIoError {}

impl From<std::io::Error> for MeshIoError {
    fn from(e: std::io::Error) -> Self {
        MeshIoError::Io(e)
    }
}

fn bad(msg: impl Into<String>) -> MeshIoError {
    MeshIoError::Format(msg.into())
}

struct Tokens<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines(),
            line_no: 0,
        }
    }

    fn next_line(&mut self) -> Result<Vec<&'a str>, MeshIoError> {
        for line in self.lines.by_ref() {
            self.line_no += 1;
            let trimmed = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            }
            .trim();
            if !trimmed.is_empty() {
                return Ok(trimmed.split_whitespace().collect());
            }
        }
        Err(bad("unexpected end of file"))
    }
}

pub fn write_mesh2d(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mesh2d {} {}", mesh.node_count(), mesh.triangle_count());
    for p in &mesh.nodes {
        let _ = writeln!(out, "{:.17e} {:.17e}", p[0], p[1]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    out
}

pub fn read_mesh2d(text: &str) -> Result<Mesh, MeshIoError> {
    let mut tok = Tokens::new(text);
    let header = tok.next_line()?;
    if header.len() != 3 || header[0] != "mesh2d" {
        return Err(bad("expected header `mesh2d <n_nodes> <n_tris>`"));
    }
    let n: usize = header[1].parse().map_err(|_| bad("bad node count"))?;
    let t: usize = header[2].parse().map_err(|_| bad("bad triangle count"))?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let parts = tok.next_line()?;
        if parts.len() != 2 {
            return Err(bad("node line must have 2 coordinates"));
        }
        let x: f64 = parts[0].parse().map_err(|_| bad("bad coordinate"))?;
        let y: f64 = parts[1].parse().map_err(|_| bad("bad coordinate"))?;
        nodes.push([x, y]);
    }
    let mut tris = Vec::with_capacity(t);
    for _ in 0..t {
        let parts = tok.next_line()?;
        if parts.len() != 3 {
            return Err(bad("triangle line must have 3 indices"));
        }
        let mut idx = [0usize; 3];
        for (slot, p) in idx.iter_mut().zip(parts.iter()) {
            *slot = p.parse().map_err(|_| bad("bad index"))?;
        }
        tris.push(idx);
    }
    Mesh::from_triangles(nodes, tris).map_err(MeshIoError::Invalid)
}

pub fn write_surface3(mesh: &SurfaceMesh3) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "mesh3d-surface {} {}",
        mesh.nodes.len(),
        mesh.triangles.len()
    );
    for p in &mesh.nodes {
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", p[0], p[1], p[2]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    out
}

pub fn read_surface3(text: &str) -> Result<SurfaceMesh3, MeshIoError> {
    let mut tok = Tokens::new(text);
    let header = tok.next_line()?;
    if header.len() != 3 || header[0] != "mesh3d-surface" {
        return Err(bad("expected header `mesh3d-surface <n_nodes> <n_tris>`"));
    }
    let n: usize = header[1].parse().map_err(|_| bad("bad node count"))?;
    let t: usize = header[2].parse().map_err(|_| bad("bad triangle count"))?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let parts = tok.next_line()?;
        if parts.len() != 3 {
            return Err(bad("node line must have 3 coordinates"));
        }
        let mut p = [0.0f64; 3];
        for (slot, s) in p.iter_mut().zip(parts.iter()) {
            *slot = s.parse().map_err(|_| bad("bad coordinate"))?;
        }
        nodes.push(p);
    }
    let mut tris = Vec::with_capacity(t);
    for _ in 0..t {
        let parts = tok.next_line()?;
        if parts.len() != 3 {
            return Err(bad("triangle line must have 3 indices"));
        }
        let mut idx = [0usize; 3];
        for (slot, p) in idx.iter_mut().zip(parts.iter()) {
            *slot = p.parse().map_err(|_| bad("bad index"))?;
        }
        tris.push(idx);
    }
    Ok(SurfaceMesh3 {
        nodes,
        triangles: tris,
    })
}

pub fn load_surface3(path: &Path) -> Result<SurfaceMesh3, MeshIoError> {
    let text = std::fs::read_to_string(path)?;
    read_surface3(&text)
}
