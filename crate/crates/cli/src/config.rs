//! Flat key-value experiment configuration: one `section.key = value` per
//! line, `#` starts a comment. No nesting, no quoting — the format is
//! deliberately trivial to parse and to generate.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use lamecouple_core::material::{MaterialLaw, MuTilde};
use lamecouple_core::mesh::Point2;
use lamecouple_core::solver::{SolveMethod, SolveOptions};
use lamecouple_core::{CouplingMethod, XiChoice};

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: None,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Experiment {
    Solve,
    Verify,
    Converge,
    Contraction,
    RbmCheck,
    CentroidCheck,
}

#[derive(Clone, Debug)]
pub enum Geometry {
    Square,
    LShape,
    Polygon(Vec<Point2>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceKind {
    Tetrahedron,
    Cube,
    Icosahedron,
    File(String),
}

/// Parsed experiment description.
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub geometry: Geometry,
    pub levels: usize,
    pub base_h: f64,
    pub problem: String,
    pub material: MaterialLaw,
    pub coupling_method: CouplingMethod,
    pub stabilize: bool,
    pub xi: XiChoice,
    pub lambda_ext: f64,
    pub mu_ext: f64,
    pub solver: SolveOptions,
    pub surface: SurfaceKind,
}

/// Raw key-value view, used to detect unknown keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                line: Some(idx + 1),
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "geometry",
    "levels",
    "base_h",
    "problem",
    "surface",
    "material.kind",
    "material.lambda",
    "material.mu",
    "material.K",
    "material.mu_tilde",
    "material.alpha",
    "material.beta",
    "exterior.lambda",
    "exterior.mu",
    "coupling.method",
    "coupling.stabilize",
    "coupling.xi",
    "solver.method",
    "solver.tol",
    "solver.max_iter",
    "solver.theta",
];

fn get_f64(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64, ConfigError> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| err(format!("{key}: expected a number, got `{v}`"))),
    }
}

fn get_usize(map: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize, ConfigError> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| err(format!("{key}: expected an integer, got `{v}`"))),
    }
}

fn get_bool(map: &BTreeMap<String, String>, key: &str, default: bool) -> Result<bool, ConfigError> {
    match map.get(key).map(|s| s.as_str()) {
        None => Ok(default),
        Some("true") | Some("1") | Some("yes") => Ok(true),
        Some("false") | Some("0") | Some("no") => Ok(false),
        Some(v) => Err(err(format!("{key}: expected true/false, got `{v}`"))),
    }
}

/// `name(a,b,...)` helper for the mu_tilde profiles.
fn parse_profile(text: &str) -> Result<MuTilde, ConfigError> {
    let (name, args) = match text.find('(') {
        Some(p) if text.ends_with(')') => {
            let name = &text[..p];
            let inner = &text[p + 1..text.len() - 1];
            let args: Result<Vec<f64>, _> = inner
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect();
            (
                name.trim(),
                args.map_err(|_| err(format!("mu_tilde: bad arguments in `{text}`")))?,
            )
        }
        _ => (text.trim(), Vec::new()),
    };
    match (name, args.as_slice()) {
        ("const", [c]) => Ok(MuTilde::Const(*c)),
        ("arctan", [a, b]) => Ok(MuTilde::Arctan { a: *a, b: *b }),
        ("invshift", [a, b]) => Ok(MuTilde::InvShift { a: *a, b: *b }),
        _ => Err(err(format!(
            "material.mu_tilde: unknown profile `{text}` (use const(c), arctan(a,b), invshift(a,b))"
        ))),
    }
}

fn parse_polygon(text: &str) -> Result<Vec<Point2>, ConfigError> {
    let mut pts = Vec::new();
    for part in text.split(';') {
        let part = part.trim().trim_start_matches('(').trim_end_matches(')');
        let Some((x, y)) = part.split_once(',') else {
            return Err(err(format!("geometry: bad vertex `{part}`")));
        };
        let x: f64 = x
            .trim()
            .parse()
            .map_err(|_| err(format!("geometry: bad coordinate `{x}`")))?;
        let y: f64 = y
            .trim()
            .parse()
            .map_err(|_| err(format!("geometry: bad coordinate `{y}`")))?;
        pts.push([x, y]);
    }
    if pts.len() < 3 {
        return Err(err("geometry: polygon needs at least 3 vertices"));
    }
    Ok(pts)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let map = parse_pairs(text)?;
    for key in map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(err(format!("unknown key `{key}`")));
        }
    }

    let experiment = match map.get("experiment").map(|s| s.as_str()) {
        Some("solve") => Experiment::Solve,
        Some("verify") => Experiment::Verify,
        Some("converge") => Experiment::Converge,
        Some("contraction") => Experiment::Contraction,
        Some("rbm-check") => Experiment::RbmCheck,
        Some("centroid-check") => Experiment::CentroidCheck,
        Some(v) => return Err(err(format!("unknown experiment `{v}`"))),
        None => return Err(err("missing key `experiment`")),
    };

    let geometry = match map.get("geometry").map(|s| s.as_str()) {
        None | Some("square") => Geometry::Square,
        Some("lshape") => Geometry::LShape,
        Some(other) => match other.strip_prefix("polygon:") {
            Some(rest) => Geometry::Polygon(parse_polygon(rest)?),
            None => return Err(err(format!("unknown geometry `{other}`"))),
        },
    };

    let levels = get_usize(&map, "levels", 3)?;
    if levels < 1 {
        return Err(err("levels must be at least 1"));
    }
    let base_h = get_f64(&map, "base_h", 1.0)?;

    let lambda = get_f64(&map, "material.lambda", 1.0)?;
    let mu = get_f64(&map, "material.mu", 1.0)?;
    let material = match map.get("material.kind").map(|s| s.as_str()) {
        None | Some("linear") => MaterialLaw::linear(lambda, mu)
            .map_err(|e| err(format!("material: {e}")))?,
        Some("hencky") => {
            let bulk = get_f64(&map, "material.K", 5.0)?;
            let profile = parse_profile(
                map.get("material.mu_tilde")
                    .map(|s| s.as_str())
                    .unwrap_or("invshift(2,1)"),
            )?;
            let alpha = get_f64(&map, "material.alpha", profile.inf_value())?;
            let beta = get_f64(&map, "material.beta", 1.0)?;
            MaterialLaw::hencky(bulk, profile, alpha, beta)
                .map_err(|e| err(format!("material: {e}")))?
        }
        Some(v) => return Err(err(format!("unknown material.kind `{v}`"))),
    };

    let coupling_method = match map.get("coupling.method").map(|s| s.as_str()) {
        None | Some("symmetric") => CouplingMethod::Symmetric,
        Some("jn") => CouplingMethod::JohnsonNedelec,
        Some("bmc") => CouplingMethod::BielakMacCamy,
        Some(v) => return Err(err(format!("unknown coupling.method `{v}`"))),
    };
    let stabilize = get_bool(&map, "coupling.stabilize", false)?;
    let xi = match map.get("coupling.xi").map(|s| s.as_str()) {
        None | Some("p0-projected") => XiChoice::P0Projected,
        Some("p1-rigid") => XiChoice::P1Rigid,
        Some(v) => return Err(err(format!("unknown coupling.xi `{v}`"))),
    };

    let tol = get_f64(&map, "solver.tol", 1e-10)?;
    if tol <= 0.0 {
        return Err(err("solver.tol must be positive"));
    }
    let max_iter = get_usize(&map, "solver.max_iter", 200)?;
    let theta = match map.get("solver.theta") {
        None => None,
        Some(v) => Some(
            v.parse::<f64>()
                .map_err(|_| err(format!("solver.theta: bad number `{v}`")))?,
        ),
    };
    let solver_method = match map.get("solver.method").map(|s| s.as_str()) {
        None | Some("newton") => SolveMethod::Newton,
        Some("direct") => SolveMethod::Direct,
        Some("picard") => SolveMethod::Picard { theta },
        Some(v) => return Err(err(format!("unknown solver.method `{v}`"))),
    };

    let surface = match map.get("surface").map(|s| s.as_str()) {
        None | Some("tetra") => SurfaceKind::Tetrahedron,
        Some("cube") => SurfaceKind::Cube,
        Some("icosahedron") => SurfaceKind::Icosahedron,
        Some(path) => SurfaceKind::File(path.to_string()),
    };

    Ok(ExperimentConfig {
        experiment,
        geometry,
        levels,
        base_h,
        problem: map
            .get("problem")
            .cloned()
            .unwrap_or_else(|| "linear-patch".to_string()),
        material,
        coupling_method,
        stabilize,
        xi,
        lambda_ext: get_f64(&map, "exterior.lambda", 1.0)?,
        mu_ext: get_f64(&map, "exterior.mu", 1.0)?,
        solver: SolveOptions {
            method: solver_method,
            tol,
            max_iter,
        },
        surface,
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = parse_config("experiment = solve\n").unwrap();
        assert_eq!(cfg.experiment, Experiment::Solve);
        assert_eq!(cfg.levels, 3);
        assert!(matches!(cfg.geometry, Geometry::Square));
    }

    #[test]
    fn parses_full_config_with_comments() {
        let text = "\
# full example
experiment = converge
geometry = lshape
levels = 4
problem = kelvin-exterior
material.kind = hencky
material.K = 5
material.mu_tilde = invshift(2, 1)
material.alpha = 2
material.beta = 2
exterior.lambda = 1.5
exterior.mu = 0.5
coupling.method = jn       # one-equation
coupling.stabilize = true
coupling.xi = p1-rigid
solver.method = picard
solver.tol = 1e-9
solver.max_iter = 77
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.experiment, Experiment::Converge);
        assert!(matches!(cfg.geometry, Geometry::LShape));
        assert_eq!(cfg.levels, 4);
        assert!(matches!(cfg.material, MaterialLaw::Hencky { .. }));
        assert_eq!(cfg.coupling_method, CouplingMethod::JohnsonNedelec);
        assert!(cfg.stabilize);
        assert_eq!(cfg.xi, XiChoice::P1Rigid);
        assert_eq!(cfg.solver.max_iter, 77);
        assert_eq!(cfg.lambda_ext, 1.5);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(parse_config("experiment = solve\nbogus.key = 1\n").is_err());
        assert!(parse_config("experiment = dance\n").is_err());
        assert!(parse_config("experiment = solve\nlevels = -2\n").is_err());
        assert!(parse_config("experiment = solve\nsolver.tol = -1\n").is_err());
        assert!(parse_config("no equals sign here\n").is_err());
    }

    #[test]
    fn parses_polygon_geometry() {
        let cfg =
            parse_config("experiment = solve\ngeometry = polygon:(0,0);(2,0);(2,1);(0,1)\n")
                .unwrap();
        match cfg.geometry {
            Geometry::Polygon(p) => assert_eq!(p.len(), 4),
            _ => panic!("expected polygon"),
        }
    }
}
