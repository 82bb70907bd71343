//! Conforming 2D triangulations with oriented boundary edge meshes, plus
//! abstract closed surface triangulations in 3D.
//!
//! Conventions:
//! - triangles are counterclockwise, boundary edges are the directed
//!   triangle edges without a partner and therefore wind counterclockwise
//!   around the domain;
//! - `boundary_edges` is stored loop-contiguous: consecutive entries chain
//!   head-to-tail, so the cyclic order of boundary nodes can be read off
//!   directly;
//! - `target_h` in [`build_polygon_mesh`] bounds the boundary edge pitch;
//!   right-angled grid cells then have diameter at most sqrt(2) * target_h.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::num;

pub type Point2 = [f64; 2];
pub type Point3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshError {
    TooFewVertices,
    NonSimplePolygon,
    NotCounterClockwise,
    CollinearVertices,
    NonPositiveTarget,
    DegenerateMesh,
    InvalidTopology,
}

impl core::fmt::Display for MeshError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MeshError::TooFewVertices => write!(f, "polygon needs at least 3 vertices"),
            MeshError::NonSimplePolygon => write!(f, "polygon is not simple"),
            MeshError::NotCounterClockwise => write!(f, "polygon is not counterclockwise"),
            MeshError::CollinearVertices => {
                write!(f, "polygon has collinear consecutive vertices")
            }
            MeshError::NonPositiveTarget => write!(f, "target mesh width must be positive"),
            MeshError::DegenerateMesh => write!(f, "mesh has zero diameter"),
            MeshError::InvalidTopology => write!(f, "triangle connectivity is not a valid mesh"),
        }
    }
}

/// A violation found by [`Mesh::validate_regularity`]. Violations are data,
/// not errors: an invalid mesh still yields a report.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonPositiveArea { triangle: usize, area: f64 },
    NonManifoldEdge { a: usize, b: usize, count: usize },
    InconsistentOrientation { a: usize, b: usize },
    BoundaryNotClosed { node: usize },
    BoundaryMismatch { detail: String },
    DuplicateNodeInTriangle { triangle: usize },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::NonPositiveArea { triangle, area } => {
                write!(f, "triangle {triangle} has non-positive area {area}")
            }
            Violation::NonManifoldEdge { a, b, count } => {
                write!(f, "edge ({a},{b}) is shared by {count} triangles")
            }
            Violation::InconsistentOrientation { a, b } => {
                write!(f, "edge ({a},{b}) appears twice with the same direction")
            }
            Violation::BoundaryNotClosed { node } => {
                write!(f, "boundary node {node} does not have in/out degree 1")
            }
            Violation::BoundaryMismatch { detail } => {
                write!(f, "stored boundary differs from topological boundary: {detail}")
            }
            Violation::DuplicateNodeInTriangle { triangle } => {
                write!(f, "triangle {triangle} repeats a node")
            }
        }
    }
}

/// Record of the similarity map applied by [`scale_to_unit`]:
/// `x_scaled = factor * (x - center)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleRecord {
    pub factor: f64,
    pub center: Point2,
}

impl ScaleRecord {
    pub fn identity() -> Self {
        Self {
            factor: 1.0,
            center: [0.0, 0.0],
        }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        [
            self.factor * (p[0] - self.center[0]),
            self.factor * (p[1] - self.center[1]),
        ]
    }

    pub fn invert(&self, p: Point2) -> Point2 {
        [
            p[0] / self.factor + self.center[0],
            p[1] / self.factor + self.center[1],
        ]
    }
}

/// Conforming triangulation of a polygonal domain.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub nodes: Vec<Point2>,
    /// Counterclockwise node-index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Directed boundary edges in counterclockwise loop order.
    pub boundary_edges: Vec<[usize; 2]>,
    /// Undirected edge (min, max) -> incident triangles.
    pub edge_to_triangle: BTreeMap<(usize, usize), (usize, Option<usize>)>,
}

pub fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: Point2, b: Point2) -> f64 {
    num::hypot(b[0] - a[0], b[1] - a[1])
}

impl Mesh {
    /// Builds a mesh from nodes and CCW triangles, deriving boundary edges
    /// and edge adjacency. Fails if the connectivity is not edge-manifold.
    pub fn from_triangles(nodes: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mut edge_to_triangle: BTreeMap<(usize, usize), (usize, Option<usize>)> = BTreeMap::new();
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                if a >= nodes.len() || b >= nodes.len() || a == b {
                    return Err(MeshError::InvalidTopology);
                }
                *directed.entry((a, b)).or_insert(0) += 1;
                let key = (a.min(b), a.max(b));
                match edge_to_triangle.get_mut(&key) {
                    None => {
                        edge_to_triangle.insert(key, (t, None));
                    }
                    Some((_, second @ None)) => *second = Some(t),
                    Some(_) => return Err(MeshError::InvalidTopology),
                }
            }
        }
        // Boundary: directed edges whose reverse never occurs.
        let mut outgoing: BTreeMap<usize, usize> = BTreeMap::new();
        for (&(a, b), &n) in directed.iter() {
            if n != 1 {
                return Err(MeshError::InvalidTopology);
            }
            if !directed.contains_key(&(b, a)) {
                if outgoing.insert(a, b).is_some() {
                    return Err(MeshError::InvalidTopology);
                }
            }
        }
        // Chain into loops so consecutive entries share a node.
        let mut boundary_edges = Vec::new();
        let mut visited: BTreeMap<usize, bool> = BTreeMap::new();
        let starts: Vec<usize> = outgoing.keys().copied().collect();
        for start in starts {
            if visited.get(&start).copied().unwrap_or(false) {
                continue;
            }
            let mut a = start;
            loop {
                let b = *outgoing.get(&a).ok_or(MeshError::InvalidTopology)?;
                boundary_edges.push([a, b]);
                visited.insert(a, true);
                a = b;
                if a == start {
                    break;
                }
                if visited.get(&a).copied().unwrap_or(false) {
                    return Err(MeshError::InvalidTopology);
                }
            }
        }
        Ok(Self {
            nodes,
            triangles,
            boundary_edges,
            edge_to_triangle,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn triangle_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        num::max(dist(pa, pb), num::max(dist(pb, pc), dist(pc, pa)))
    }

    /// Mesh width h = max element diameter.
    pub fn max_diameter(&self) -> f64 {
        (0..self.triangles.len()).fold(0.0, |m, t| num::max(m, self.triangle_diameter(t)))
    }

    pub fn domain_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Boundary nodes in counterclockwise cyclic order (single loop assumed
    /// contiguous in `boundary_edges`).
    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.boundary_edges.iter().map(|e| e[0]).collect()
    }

    /// Checks every structural invariant and reports violations.
    pub fn validate_regularity(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut undirected: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                report.push(Violation::DuplicateNodeInTriangle { triangle: t });
                continue;
            }
            let area = self.triangle_area(t);
            if area <= 0.0 || area.is_nan() {
                report.push(Violation::NonPositiveArea { triangle: t, area });
            }
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                *directed.entry((a, b)).or_insert(0) += 1;
                *undirected.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        for (&(a, b), &n) in directed.iter() {
            if n > 1 {
                report.push(Violation::InconsistentOrientation { a, b });
            }
        }
        for (&(a, b), &n) in undirected.iter() {
            if n > 2 {
                report.push(Violation::NonManifoldEdge { a, b, count: n });
            }
        }
        // Topological boundary vs stored boundary.
        let mut expected: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        for (&(a, b), _) in directed.iter() {
            if !directed.contains_key(&(b, a)) {
                expected.insert((a, b), ());
            }
        }
        let mut stored: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        for e in &self.boundary_edges {
            stored.insert((e[0], e[1]), ());
        }
        if stored != expected {
            report.push(Violation::BoundaryMismatch {
                detail: alloc::format!(
                    "stored {} edges, topological boundary has {}",
                    stored.len(),
                    expected.len()
                ),
            });
        }
        // Closed simple loops: in/out degree one on the stored boundary.
        let mut outdeg: BTreeMap<usize, usize> = BTreeMap::new();
        let mut indeg: BTreeMap<usize, usize> = BTreeMap::new();
        for e in &self.boundary_edges {
            *outdeg.entry(e[0]).or_insert(0) += 1;
            *indeg.entry(e[1]).or_insert(0) += 1;
        }
        for (&node, &d) in outdeg.iter() {
            if d != 1 || indeg.get(&node).copied().unwrap_or(0) != 1 {
                report.push(Violation::BoundaryNotClosed { node });
            }
        }
        report
    }
}

/// Regular 1:4 (red) refinement: every triangle is split into four similar
/// children through its edge midpoints; boundary edges are bisected.
pub fn refine_uniform(m: &Mesh) -> Mesh {
    let mut nodes = m.nodes.clone();
    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point2>| -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&idx) = midpoint.get(&key) {
            return idx;
        }
        let p = [
            0.5 * (nodes[a][0] + nodes[b][0]),
            0.5 * (nodes[a][1] + nodes[b][1]),
        ];
        nodes.push(p);
        let idx = nodes.len() - 1;
        midpoint.insert(key, idx);
        idx
    };
    let mut triangles = Vec::with_capacity(4 * m.triangles.len());
    for tri in &m.triangles {
        let [a, b, c] = *tri;
        let ab = mid(a, b, &mut nodes);
        let bc = mid(b, c, &mut nodes);
        let ca = mid(c, a, &mut nodes);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    Mesh::from_triangles(nodes, triangles).expect("red refinement preserves mesh validity")
}

/// Translates and shrinks the mesh so it fits in a disc of diameter 1/2
/// centered at the origin. Already-admissible meshes are returned unchanged
/// with an identity record.
pub fn scale_to_unit(m: &Mesh) -> Result<(Mesh, ScaleRecord), MeshError> {
    if m.nodes.is_empty() {
        return Err(MeshError::DegenerateMesh);
    }
    let radius_about_origin = m
        .nodes
        .iter()
        .fold(0.0, |r, p| num::max(r, num::hypot(p[0], p[1])));
    if radius_about_origin <= 0.25 {
        return Ok((m.clone(), ScaleRecord::identity()));
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &m.nodes {
        for d in 0..2 {
            lo[d] = num::min(lo[d], p[d]);
            hi[d] = num::max(hi[d], p[d]);
        }
    }
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let radius = m.nodes.iter().fold(0.0, |r, p| {
        num::max(r, num::hypot(p[0] - center[0], p[1] - center[1]))
    });
    if radius == 0.0 {
        return Err(MeshError::DegenerateMesh);
    }
    let record = ScaleRecord {
        factor: num::min(1.0, 0.25 / radius),
        center,
    };
    let mut scaled = m.clone();
    for p in scaled.nodes.iter_mut() {
        *p = record.apply(*p);
    }
    Ok((scaled, record))
}

fn polygon_signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

fn segments_properly_intersect(p: Point2, q: Point2, r: Point2, s: Point2) -> bool {
    let d1 = signed_area(r, s, p);
    let d2 = signed_area(r, s, q);
    let d3 = signed_area(p, q, r);
    let d4 = signed_area(p, q, s);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn check_simple_ccw(poly: &[Point2]) -> Result<(), MeshError> {
    let n = poly.len();
    if n < 3 {
        return Err(MeshError::TooFewVertices);
    }
    if polygon_signed_area(poly) <= 0.0 {
        return Err(MeshError::NotCounterClockwise);
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if dist(a, b) == 0.0 {
            return Err(MeshError::NonSimplePolygon);
        }
        for j in (i + 1)..n {
            // skip adjacent edges
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let c = poly[j];
            let d = poly[(j + 1) % n];
            if segments_properly_intersect(a, b, c, d) {
                return Err(MeshError::NonSimplePolygon);
            }
        }
    }
    Ok(())
}

fn is_rectilinear(poly: &[Point2]) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        a[0] == b[0] || a[1] == b[1]
    })
}

fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Builds a triangulation of a simple counterclockwise polygon whose
/// boundary edge pitch does not exceed `target_h`.
///
/// Axis-aligned rectilinear polygons are meshed on a uniform grid whose
/// pitch is the largest value <= `target_h` aligned with all vertices; each
/// cell is split into two triangles. Other polygons are ear-clipped and
/// red-refined until the element diameter drops below sqrt(2) * target_h.
pub fn build_polygon_mesh(polygon: &[Point2], target_h: f64) -> Result<Mesh, MeshError> {
    if target_h <= 0.0 || target_h.is_nan() {
        return Err(MeshError::NonPositiveTarget);
    }
    check_simple_ccw(polygon)?;
    let n = polygon.len();
    for i in 0..n {
        let a = polygon[(i + n - 1) % n];
        let b = polygon[i];
        let c = polygon[(i + 1) % n];
        if num::abs(signed_area(a, b, c)) < 1e-14 {
            return Err(MeshError::CollinearVertices);
        }
    }
    if is_rectilinear(polygon) {
        if let Some(mesh) = grid_mesh(polygon, target_h) {
            return Ok(mesh);
        }
    }
    let mut mesh = ear_clip(polygon)?;
    let limit = num::sqrt(2.0) * target_h;
    while mesh.max_diameter() > limit {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

/// Largest pitch <= target aligned to every vertex coordinate, if one exists.
fn grid_pitch(polygon: &[Point2], target_h: f64) -> Option<f64> {
    let min_edge = {
        let n = polygon.len();
        (0..n).fold(f64::INFINITY, |m, i| {
            num::min(m, dist(polygon[i], polygon[(i + 1) % n]))
        })
    };
    let mut pitch = min_edge;
    for _ in 0..60 {
        let aligned = polygon.iter().all(|p| {
            let fx = p[0] / pitch;
            let fy = p[1] / pitch;
            num::abs(fx - libm::round(fx)) < 1e-9 && num::abs(fy - libm::round(fy)) < 1e-9
        });
        if aligned {
            while pitch > target_h {
                pitch *= 0.5;
            }
            return Some(pitch);
        }
        pitch *= 0.5;
        if pitch < 1e-9 * min_edge {
            return None;
        }
    }
    None
}

fn grid_mesh(polygon: &[Point2], target_h: f64) -> Option<Mesh> {
    let pitch = grid_pitch(polygon, target_h)?;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in polygon {
        for d in 0..2 {
            lo[d] = num::min(lo[d], p[d]);
            hi[d] = num::max(hi[d], p[d]);
        }
    }
    let nx = libm::round((hi[0] - lo[0]) / pitch) as i64;
    let ny = libm::round((hi[1] - lo[1]) / pitch) as i64;
    if nx <= 0 || ny <= 0 || nx * ny > 4_000_000 {
        return None;
    }
    let mut node_of: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut nodes: Vec<Point2> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut get_node = |i: i64, j: i64, nodes: &mut Vec<Point2>| -> usize {
        *node_of.entry((i, j)).or_insert_with(|| {
            nodes.push([lo[0] + i as f64 * pitch, lo[1] + j as f64 * pitch]);
            nodes.len() - 1
        })
    };
    for j in 0..ny {
        for i in 0..nx {
            let cx = lo[0] + (i as f64 + 0.5) * pitch;
            let cy = lo[1] + (j as f64 + 0.5) * pitch;
            if !point_in_polygon([cx, cy], polygon) {
                continue;
            }
            let bl = get_node(i, j, &mut nodes);
            let br = get_node(i + 1, j, &mut nodes);
            let tr = get_node(i + 1, j + 1, &mut nodes);
            let tl = get_node(i, j + 1, &mut nodes);
            triangles.push([bl, br, tr]);
            triangles.push([bl, tr, tl]);
        }
    }
    if triangles.is_empty() {
        return None;
    }
    let mesh = Mesh::from_triangles(nodes, triangles).ok()?;
    // The covered cells must reproduce the polygon exactly.
    if num::abs(mesh.domain_area() - polygon_signed_area(polygon)) > 1e-9 * polygon_signed_area(polygon) {
        return None;
    }
    Some(mesh)
}

fn ear_clip(polygon: &[Point2]) -> Result<Mesh, MeshError> {
    let nodes: Vec<Point2> = polygon.to_vec();
    let mut ring: Vec<usize> = (0..polygon.len()).collect();
    let mut triangles = Vec::new();
    let mut guard = 0;
    while ring.len() > 3 {
        guard += 1;
        if guard > 10_000 {
            return Err(MeshError::NonSimplePolygon);
        }
        let m = ring.len();
        let mut clipped = false;
        for k in 0..m {
            let ia = ring[(k + m - 1) % m];
            let ib = ring[k];
            let ic = ring[(k + 1) % m];
            let (a, b, c) = (nodes[ia], nodes[ib], nodes[ic]);
            if signed_area(a, b, c) <= 1e-14 {
                continue;
            }
            let mut contains = false;
            for &other in &ring {
                if other == ia || other == ib || other == ic {
                    continue;
                }
                let p = nodes[other];
                let s1 = signed_area(a, b, p);
                let s2 = signed_area(b, c, p);
                let s3 = signed_area(c, a, p);
                if s1 >= -1e-14 && s2 >= -1e-14 && s3 >= -1e-14 {
                    contains = true;
                    break;
                }
            }
            if contains {
                continue;
            }
            triangles.push([ia, ib, ic]);
            ring.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            return Err(MeshError::NonSimplePolygon);
        }
    }
    triangles.push([ring[0], ring[1], ring[2]]);
    Mesh::from_triangles(nodes, triangles).map_err(|_| MeshError::NonSimplePolygon)
}

/// Closed triangulated surface in 3D. Only the combinatorics and node
/// positions are stored; it exists for the rigid-body and centroid checkers.
#[derive(Clone, Debug)]
pub struct SurfaceMesh3 {
    pub nodes: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
}

fn cross3(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub3(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm3(a: Point3) -> f64 {
    num::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
}

impl SurfaceMesh3 {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let u = sub3(self.nodes[b], self.nodes[a]);
        let v = sub3(self.nodes[c], self.nodes[a]);
        0.5 * norm3(cross3(u, v))
    }

    pub fn centroid(&self, t: usize) -> Point3 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
            (pa[2] + pb[2] + pc[2]) / 3.0,
        ]
    }

    /// True iff every edge is shared by exactly two triangles with opposite
    /// orientation and no triangle is degenerate.
    pub fn is_closed_surface(&self) -> bool {
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in &self.triangles {
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return false;
            }
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                *directed.entry((a, b)).or_insert(0) += 1;
            }
        }
        let scale = self
            .nodes
            .iter()
            .fold(0.0, |m, p| num::max(m, norm3(*p)));
        for (t, _) in self.triangles.iter().enumerate() {
            if self.triangle_area(t) <= 1e-14 * scale * scale {
                return false;
            }
        }
        directed
            .iter()
            .all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1))
    }

    /// Red refinement through edge midpoints; closed surfaces stay closed.
    pub fn refine(&self) -> SurfaceMesh3 {
        let mut nodes = self.nodes.clone();
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point3>| -> usize {
            let key = (a.min(b), a.max(b));
            if let Some(&idx) = midpoint.get(&key) {
                return idx;
            }
            let p = [
                0.5 * (nodes[a][0] + nodes[b][0]),
                0.5 * (nodes[a][1] + nodes[b][1]),
                0.5 * (nodes[a][2] + nodes[b][2]),
            ];
            nodes.push(p);
            let idx = nodes.len() - 1;
            midpoint.insert(key, idx);
            idx
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for tri in &self.triangles {
            let [a, b, c] = *tri;
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        SurfaceMesh3 { nodes, triangles }
    }

    /// Random node displacement of at most `relative` times the shortest
    /// incident edge, seeded and deterministic. Topology is untouched.
    pub fn jitter(&self, relative: f64, seed: u64) -> SurfaceMesh3 {
        let mut shortest = vec![f64::INFINITY; self.nodes.len()];
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let d = norm3(sub3(self.nodes[a], self.nodes[b]));
                shortest[a] = num::min(shortest[a], d);
                shortest[b] = num::min(shortest[b], d);
            }
        }
        let mut rng = crate::num::Rng::new(seed);
        let mut nodes = self.nodes.clone();
        for (i, p) in nodes.iter_mut().enumerate() {
            let r = relative * shortest[i];
            for coord in p.iter_mut() {
                *coord += r * rng.symmetric();
            }
        }
        SurfaceMesh3 {
            nodes,
            triangles: self.triangles.clone(),
        }
    }
}

/// Boundary of a regular tetrahedron.
pub fn tetrahedron_surface() -> SurfaceMesh3 {
    let nodes = vec![
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    let triangles = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    SurfaceMesh3 { nodes, triangles }
}

/// Boundary of the unit cube, 12 triangles.
pub fn cube_surface() -> SurfaceMesh3 {
    let nodes = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ];
    let quads: [[usize; 4]; 6] = [
        [0, 3, 2, 1], // bottom, outward normal -z
        [4, 5, 6, 7], // top
        [0, 1, 5, 4], // front y=0
        [2, 3, 7, 6], // back y=1
        [1, 2, 6, 5], // right x=1
        [3, 0, 4, 7], // left x=0
    ];
    let mut triangles = Vec::new();
    for q in quads {
        triangles.push([q[0], q[1], q[2]]);
        triangles.push([q[0], q[2], q[3]]);
    }
    SurfaceMesh3 { nodes, triangles }
}

/// Regular icosahedron surface.
pub fn icosahedron_surface() -> SurfaceMesh3 {
    let phi = (1.0 + num::sqrt(5.0)) / 2.0;
    let nodes = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let triangles = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    SurfaceMesh3 { nodes, triangles }
}

/// Convenience: the unit square (0,1)^2 as a CCW polygon.
pub fn unit_square_polygon() -> Vec<Point2> {
    vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
}

/// The L-shape (0,1)^2 minus its closed upper-right quarter, CCW.
pub fn lshape_polygon() -> Vec<Point2> {
    vec![
        [0.0, 0.0],
        [1.0, 0.0],
        [1.0, 0.5],
        [0.5, 0.5],
        [0.5, 1.0],
        [0.0, 1.0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_coarse_is_two_triangles() {
        let m = build_polygon_mesh(&unit_square_polygon(), 1.0).unwrap();
        assert_eq!(m.triangle_count(), 2);
        assert_eq!(m.boundary_edges.len(), 4);
        assert!(m.validate_regularity().is_empty());
    }

    #[test]
    fn unit_square_half_pitch_is_refinement() {
        let m = build_polygon_mesh(&unit_square_polygon(), 0.5).unwrap();
        assert_eq!(m.triangle_count(), 8);
        assert_eq!(m.boundary_edges.len(), 8);
        assert!(m.validate_regularity().is_empty());
    }

    #[test]
    fn lshape_coarse_has_eight_boundary_edges() {
        let m = build_polygon_mesh(&lshape_polygon(), 1.0).unwrap();
        assert_eq!(m.boundary_edges.len(), 8);
        assert_eq!(m.triangle_count(), 6);
        assert!(m.validate_regularity().is_empty());
        assert!((m.domain_area() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn non_simple_polygon_is_rejected() {
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            build_polygon_mesh(&bowtie, 1.0),
            Err(MeshError::NonSimplePolygon) | Err(MeshError::NotCounterClockwise)
        ));
    }

    #[test]
    fn refine_multiplies_triangles_by_four() {
        let m = build_polygon_mesh(&unit_square_polygon(), 1.0).unwrap();
        let nodes_before = m.node_count();
        let edges_before = m.edge_to_triangle.len();
        let r = refine_uniform(&m);
        assert_eq!(r.triangle_count(), 4 * m.triangle_count());
        assert_eq!(r.boundary_edges.len(), 2 * m.boundary_edges.len());
        assert_eq!(r.node_count(), nodes_before + edges_before);
        assert!((r.max_diameter() - 0.5 * m.max_diameter()).abs() < 1e-14);
        assert!(r.validate_regularity().is_empty());
    }

    #[test]
    fn refinement_preserves_regularity_over_levels() {
        let mut m = build_polygon_mesh(&lshape_polygon(), 1.0).unwrap();
        for _ in 0..3 {
            m = refine_uniform(&m);
            assert!(m.validate_regularity().is_empty());
        }
    }

    #[test]
    fn scale_to_unit_square() {
        let m = build_polygon_mesh(&unit_square_polygon(), 0.5).unwrap();
        let (scaled, record) = scale_to_unit(&m).unwrap();
        assert!(record.factor <= 1.0 / (2.0 * 2.0f64.sqrt()) + 1e-12);
        let max_r = scaled
            .nodes
            .iter()
            .fold(0.0f64, |r, p| r.max((p[0] * p[0] + p[1] * p[1]).sqrt()));
        assert!(max_r <= 0.25 + 1e-12);
        // round trip
        for (orig, s) in m.nodes.iter().zip(scaled.nodes.iter()) {
            let back = record.invert(*s);
            assert!((back[0] - orig[0]).abs() < 1e-14);
            assert!((back[1] - orig[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn small_centered_mesh_is_left_alone() {
        let poly: Vec<Point2> = vec![[-0.1, -0.1], [0.1, -0.1], [0.1, 0.1], [-0.1, 0.1]];
        let m = build_polygon_mesh(&poly, 0.2).unwrap();
        let (_, record) = scale_to_unit(&m).unwrap();
        assert_eq!(record.factor, 1.0);
    }

    #[test]
    fn flipped_triangle_is_reported() {
        let m = build_polygon_mesh(&unit_square_polygon(), 1.0).unwrap();
        let mut bad = m.clone();
        bad.triangles[0].swap(0, 1);
        let report = bad.validate_regularity();
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::NonPositiveArea { .. })));
    }

    #[test]
    fn nonmanifold_edge_is_reported() {
        // Two triangles on the same edge from the same side plus the original.
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 1.5]];
        let triangles = vec![[0, 1, 2], [1, 3, 2], [1, 4, 2]];
        let m = Mesh {
            nodes,
            triangles,
            boundary_edges: vec![],
            edge_to_triangle: BTreeMap::new(),
        };
        let report = m.validate_regularity();
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::NonManifoldEdge { count: 3, .. })));
    }

    #[test]
    fn boundary_edges_wind_counterclockwise() {
        let m = build_polygon_mesh(&unit_square_polygon(), 0.5).unwrap();
        // Sum of cross products along the loop equals twice the enclosed area.
        let mut twice_area = 0.0;
        for e in &m.boundary_edges {
            let a = m.nodes[e[0]];
            let b = m.nodes[e[1]];
            twice_area += a[0] * b[1] - b[0] * a[1];
        }
        assert!((twice_area - 2.0).abs() < 1e-12);
        // loop-contiguous
        for w in m.boundary_edges.windows(2) {
            assert_eq!(w[0][1], w[1][0]);
        }
    }

    #[test]
    fn closed_surfaces_pass_invariant() {
        assert!(tetrahedron_surface().is_closed_surface());
        assert!(cube_surface().is_closed_surface());
        assert!(icosahedron_surface().is_closed_surface());
        assert!(icosahedron_surface().refine().is_closed_surface());
    }

    #[test]
    fn open_surface_fails_invariant() {
        let mut open = tetrahedron_surface();
        open.triangles.pop();
        assert!(!open.is_closed_surface());
    }

    #[test]
    fn jitter_keeps_surface_closed() {
        let s = icosahedron_surface().refine();
        for seed in 0..5 {
            assert!(s.jitter(0.1, seed).is_closed_surface());
        }
    }
}
