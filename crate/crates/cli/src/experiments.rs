//! Experiment driver: builds the geometry, dispatches the configured
//! experiment, and writes `results.csv` / `verify.csv` into the output
//! directory. All runs are deterministic: fixed seeds, no threads, no
//! wall-clock dependence; identical configs produce byte-identical CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lamecouple_core::analysis::{
    check_jn_condition, check_rbm_independence_2d, check_rbm_independence_3d, convergence_study,
    estimate_contraction_constant, find_noncollinear_centroids, strain_error, JnConditionVariant,
    LevelRow, Manufactured, VerificationReport,
};
use lamecouple_core::bem::{rigid_trace_vectors, BoundarySpace};
use lamecouple_core::coupling::assemble_system;
use lamecouple_core::fem::FemSpace;
use lamecouple_core::linalg::{sym_eigen, Mat};
use lamecouple_core::mesh::{
    build_polygon_mesh, cube_surface, icosahedron_surface, lshape_polygon, refine_uniform,
    scale_to_unit, tetrahedron_surface, unit_square_polygon, Mesh, SurfaceMesh3,
};
use lamecouple_core::solver::{solve, solution_distance, SolveMethod, SolveOptions};
use lamecouple_core::{CouplingMethod, MaterialLaw};

use crate::config::{Experiment, ExperimentConfig, Geometry, SurfaceKind};
use crate::manufactured::build_manufactured;
use crate::meshio::load_surface3;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Solver(String),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Solver(m) => write!(f, "solver error: {m}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

pub struct RunFlags {
    pub out_dir: PathBuf,
    pub dump_matrices: bool,
    pub verbose: bool,
}

/// Outcome of a run: `pass` decides the process exit code.
pub struct RunSummary {
    pub pass: bool,
    pub messages: Vec<String>,
}

/// Scientific notation with 16 significant digits.
pub fn fmt_sci(v: f64) -> String {
    format!("{v:.15e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn results_csv(rows: &[LevelRow]) -> String {
    let mut out = String::from("level,h,dofs,err_eps,err_phi,rate_eps,rate_phi,iters\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.level,
            fmt_sci(r.h),
            r.dofs,
            fmt_sci(r.err_eps),
            fmt_sci(r.err_phi),
            fmt_sci(r.rate_eps),
            fmt_sci(r.rate_phi),
            r.iters
        );
    }
    out
}

fn verify_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from("check,pass,certificates\n");
    for r in reports {
        let certs: Vec<String> = r
            .certificates
            .iter()
            .map(|(k, v)| format!("{k}={}", fmt_sci(*v)))
            .collect();
        let _ = writeln!(out, "{},{},{}", r.name, r.pass, certs.join(";"));
    }
    out
}

fn matrix_csv(m: &Mat) -> String {
    let mut out = String::new();
    for i in 0..m.rows {
        let row: Vec<String> = m.row(i).iter().map(|v| fmt_sci(*v)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Base mesh of the configured geometry: polygon meshed at `base_h`, then
/// scaled for single-layer ellipticity. The problems are posed in the
/// scaled coordinates.
pub fn base_mesh(cfg: &ExperimentConfig) -> Result<Mesh, RunError> {
    let polygon = match &cfg.geometry {
        Geometry::Square => unit_square_polygon(),
        Geometry::LShape => lshape_polygon(),
        Geometry::Polygon(p) => p.clone(),
    };
    let mesh = build_polygon_mesh(&polygon, cfg.base_h)
        .map_err(|e| RunError::Config(format!("geometry: {e}")))?;
    let (scaled, _) = scale_to_unit(&mesh).map_err(|e| RunError::Config(format!("{e}")))?;
    Ok(scaled)
}

fn surface(cfg: &ExperimentConfig) -> Result<SurfaceMesh3, RunError> {
    match &cfg.surface {
        SurfaceKind::Tetrahedron => Ok(tetrahedron_surface()),
        SurfaceKind::Cube => Ok(cube_surface()),
        SurfaceKind::Icosahedron => Ok(icosahedron_surface()),
        SurfaceKind::File(path) => {
            load_surface3(Path::new(path)).map_err(|e| RunError::Config(format!("{e}")))
        }
    }
}

fn refined(base: &Mesh, times: usize) -> Mesh {
    let mut m = base.clone();
    for _ in 0..times {
        m = refine_uniform(&m);
    }
    m
}

fn problem(cfg: &ExperimentConfig) -> Result<(Manufactured, bool), RunError> {
    if !matches!(cfg.material, MaterialLaw::LinearLame { .. })
        && cfg.problem != "linear-patch"
        && cfg.problem != "rotational-force"
    {
        return Err(RunError::Config(format!(
            "problem `{}` has a closed-form solution only for the linear law",
            cfg.problem
        )));
    }
    if cfg.problem == "rotational-force" {
        // data-only problem without a closed-form solution
        let mf = Manufactured {
            data: lamecouple_core::coupling::ProblemData {
                f: Box::new(|p| [50.0 * p[1], -50.0 * p[0]]),
                u0: Box::new(|_| [0.0, 0.0]),
                phi0: Box::new(|_, _| [0.0, 0.0]),
                lambda_ext: cfg.lambda_ext,
                mu_ext: cfg.mu_ext,
                material: cfg.material,
            },
            exact_u: Box::new(|_| [0.0, 0.0]),
            exact_grad_u: Box::new(|_| [[0.0; 2]; 2]),
            exact_phi: Box::new(|_, _| [0.0, 0.0]),
        };
        return Ok((mf, false));
    }
    let mf = build_manufactured(&cfg.problem, cfg.material, cfg.lambda_ext, cfg.mu_ext)
        .map_err(|e| RunError::Config(e.to_string()))?;
    Ok((mf, true))
}

/// Picks a solver appropriate for the system when the configured one
/// cannot apply (direct solve of a nonlinear material).
fn effective_solver(cfg: &ExperimentConfig) -> SolveOptions {
    let mut opts = cfg.solver;
    if !matches!(cfg.material, MaterialLaw::LinearLame { .. })
        && matches!(opts.method, SolveMethod::Direct)
    {
        opts.method = SolveMethod::Newton;
    }
    opts
}

pub fn run(cfg: &ExperimentConfig, flags: &RunFlags) -> Result<RunSummary, RunError> {
    match cfg.experiment {
        Experiment::Solve => run_solve(cfg, flags),
        Experiment::Converge => run_converge(cfg, flags),
        Experiment::Contraction => run_contraction(cfg, flags),
        Experiment::RbmCheck => run_rbm_check(cfg, flags),
        Experiment::CentroidCheck => run_centroid_check(cfg, flags),
        Experiment::Verify => run_verify(cfg, flags),
    }
}

fn run_solve(cfg: &ExperimentConfig, flags: &RunFlags) -> Result<RunSummary, RunError> {
    let base = base_mesh(cfg)?;
    let mesh = refined(&base, cfg.levels - 1);
    let (mf, has_exact) = problem(cfg)?;
    let sp = FemSpace::new(&mesh);
    let bs = BoundarySpace::from_mesh(&mesh).map_err(|e| RunError::Config(format!("{e}")))?;
    let sys = assemble_system(cfg.coupling_method, &sp, &bs, &mf.data, cfg.stabilize, cfg.xi)
        .map_err(|e| RunError::Config(format!("{e}")))?;
    if flags.dump_matrices {
        write_file(&flags.out_dir.join("matrix_v.csv"), &matrix_csv(&sys.layers.v))?;
        write_file(&flags.out_dir.join("matrix_k.csv"), &matrix_csv(&sys.layers.k))?;
        write_file(&flags.out_dir.join("matrix_m.csv"), &matrix_csv(&sys.layers.m))?;
        write_file(&flags.out_dir.join("matrix_w.csv"), &matrix_csv(&sys.layers.w))?;
        let full = sys.tangent(&vec![0.0; sys.dim()]);
        write_file(&flags.out_dir.join("matrix_full.csv"), &matrix_csv(&full))?;
    }
    let opts = effective_solver(cfg);
    let (sol, trace) = solve(&sys, &opts).map_err(|e| RunError::Solver(e.to_string()))?;
    let (err_eps, err_phi) = if has_exact {
        (
            strain_error(&sp, &sol.u, &mf),
            lamecouple_core::analysis::phi_error(&bs, &sys.layers.v, &sol.phi, &mf),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    let row = LevelRow {
        level: cfg.levels - 1,
        h: mesh.max_diameter(),
        dofs: sys.dim(),
        err_eps,
        err_phi,
        rate_eps: f64::NAN,
        rate_phi: f64::NAN,
        iters: trace.iterations.max(1),
    };
    write_file(&flags.out_dir.join("results.csv"), &results_csv(&[row]))?;
    let mut messages = vec![format!(
        "solved {} dofs in {} iterations (residual {})",
        sys.dim(),
        trace.iterations.max(1),
        fmt_sci(*trace.residual_norms.last().unwrap())
    )];
    if has_exact {
        messages.push(format!(
            "errors: strain {} density {}",
            fmt_sci(err_eps),
            fmt_sci(err_phi)
        ));
    }
    Ok(RunSummary {
        pass: trace.converged,
        messages,
    })
}

fn run_converge(cfg: &ExperimentConfig, flags: &RunFlags) -> Result<RunSummary, RunError> {
    let base = base_mesh(cfg)?;
    let (mf, has_exact) = problem(cfg)?;
    if !has_exact {
        return Err(RunError::Config(
            "convergence studies need a problem with a closed-form solution".into(),
        ));
    }
    let opts = effective_solver(cfg);
    let rows = convergence_study(&base, &mf, cfg.coupling_method, cfg.levels, &opts, cfg.stabilize)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    write_file(&flags.out_dir.join("results.csv"), &results_csv(&rows))?;
    // errors decrease level to level; problems reproduced exactly by the
    // discrete space only produce round-off noise, which is not monotone
    let monotone = rows
        .windows(2)
        .all(|w| w[1].err_eps <= w[0].err_eps || w[1].err_eps <= 1e-8);
    let mut messages = Vec::new();
    for r in &rows {
        messages.push(format!(
            "level {}: h={} dofs={} err_eps={} rate={}",
            r.level,
            fmt_sci(r.h),
            r.dofs,
            fmt_sci(r.err_eps),
            fmt_sci(r.rate_eps)
        ));
    }
    Ok(RunSummary {
        pass: monotone,
        messages,
    })
}

fn run_contraction(cfg: &ExperimentConfig, flags: &RunFlags) -> Result<RunSummary, RunError> {
    let base = base_mesh(cfg)?;
    let mut reports = Vec::new();
    let mut previous: Option<f64> = None;
    for level in 0..cfg.levels {
        let mesh = refined(&base, level);
        let est = estimate_contraction_constant(&mesh, cfg.lambda_ext, cfg.mu_ext)
            .map_err(|e| RunError::Solver(e.to_string()))?;
        let nondecreasing = previous.map(|p| est.c_k >= p - 1e-3).unwrap_or(true);
        previous = Some(est.c_k);
        reports.push(VerificationReport {
            name: format!("contraction_level_{level}"),
            pass: est.c_k > 0.4 && est.c_k < 1.0 && nondecreasing,
            certificates: vec![
                ("c_k".into(), est.c_k),
                ("trace_dofs".into(), est.trace_dofs as f64),
            ],
        });
    }
    write_file(&flags.out_dir.join("verify.csv"), &verify_csv(&reports))?;
    Ok(RunSummary {
        pass: reports.iter().all(|r| r.pass),
        messages: reports
            .iter()
            .map(|r| format!("{}: c_K = {}", r.name, fmt_sci(r.certificate("c_k").unwrap())))
            .collect(),
    })
}

fn run_rbm_check(cfg: &ExperimentConfig, flags: &RunFlags) -> Result<RunSummary, RunError> {
    let base = base_mesh(cfg)?;
    let mesh = refined(&base, cfg.levels - 1);
    let bs = BoundarySpace::from_mesh(&mesh).map_err(|e| RunError::Config(format!("{e}")))?;
    let mut reports = vec![check_rbm_independence_2d(&bs)];
    let sm = surface(cfg)?;
    reports.push(check_rbm_independence_3d(&sm));
    write_file(&flags.out_dir.join("verify.csv"), &verify_csv(&reports))?;
    Ok(RunSummary {
        pass: reports.iter().all(|r| r.pass),
        messages: reports
            .iter()
            .map(|r| {
                format!(
                    "{}: {} (sigma_min = {})",
                    r.name,
                    if r.pass { "pass" } else { "FAIL" },
                    fmt_sci(r.certificate("sigma_min").unwrap())
                )
            })
            .collect(),
    })
}

fn run_centroid_check(cfg: &ExperimentConfig, flags: &RunFlags) -> Result<RunSummary, RunError> {
    let sm = surface(cfg)?;
    let closed = sm.is_closed_surface();
    let found = find_noncollinear_centroids(&sm);
    let report = VerificationReport {
        name: "noncollinear_centroids".into(),
        pass: found.is_ok(),
        certificates: vec![
            ("closed_surface".into(), if closed { 1.0 } else { 0.0 }),
            ("triangles".into(), sm.triangles.len() as f64),
        ],
    };
    write_file(&flags.out_dir.join("verify.csv"), &verify_csv(&[report]))?;
    match found {
        Ok(idx) => Ok(RunSummary {
            pass: true,
            messages: vec![format!(
                "noncollinear centroids at triangles {} {} {}",
                idx[0], idx[1], idx[2]
            )],
        }),
        Err(e) => Ok(RunSummary {
            pass: false,
            messages: vec![format!("centroid search failed: {e}")],
        }),
    }
}

/// Aggregates every structural check on the configured geometry; any
/// violation makes the run fail.
fn run_verify(cfg: &ExperimentConfig, flags: &RunFlags) -> Result<RunSummary, RunError> {
    let base = base_mesh(cfg)?;
    let mesh = refined(&base, cfg.levels - 1);
    let bs = BoundarySpace::from_mesh(&mesh).map_err(|e| RunError::Config(format!("{e}")))?;
    let mut reports: Vec<VerificationReport> = Vec::new();

    // projected rigid motions: 2D boundary and the shipped surfaces
    reports.push(check_rbm_independence_2d(&bs));
    for (name, sm) in [
        ("tetrahedron", tetrahedron_surface()),
        ("cube", cube_surface()),
        ("icosahedron", icosahedron_surface()),
    ] {
        let mut r = check_rbm_independence_3d(&sm);
        r.name = format!("rbm_independence_3d_{name}");
        reports.push(r);
        let centroids_ok = find_noncollinear_centroids(&sm).is_ok();
        reports.push(VerificationReport {
            name: format!("noncollinear_centroids_{name}"),
            pass: centroids_ok,
            certificates: vec![("triangles".into(), sm.triangles.len() as f64)],
        });
    }
    // randomized icosahedron refinements
    let refined_icosa = icosahedron_surface().refine();
    let mut jitter_pass = true;
    for seed in 0..20 {
        let jittered = refined_icosa.jitter(0.1, seed);
        if !jittered.is_closed_surface() || find_noncollinear_centroids(&jittered).is_err() {
            jitter_pass = false;
        }
    }
    reports.push(VerificationReport {
        name: "noncollinear_centroids_randomized".into(),
        pass: jitter_pass,
        certificates: vec![("instances".into(), 20.0)],
    });

    // layer operator certificates at the finest level
    let lm = lamecouple_core::bem::assemble_layer_matrices(&bs, cfg.lambda_ext, cfg.mu_ext)
        .map_err(|e| RunError::Solver(format!("{e}")))?;
    let v_eig = sym_eigen(&lm.v).map_err(|e| RunError::Solver(format!("{e}")))?;
    reports.push(VerificationReport {
        name: "single_layer_spd".into(),
        pass: v_eig.values[0] > 0.0 && lm.v.asymmetry() <= 1e-12,
        certificates: vec![
            ("min_eig".into(), v_eig.values[0]),
            ("asymmetry".into(), lm.v.asymmetry()),
        ],
    });
    let mut kernel_worst = 0.0f64;
    let mut w_worst = 0.0f64;
    for r in rigid_trace_vectors(&bs) {
        let mut res = lm.k.matvec(&r);
        let mr = lm.m.matvec(&r);
        for (a, b) in res.iter_mut().zip(mr.iter()) {
            *a += 0.5 * b;
        }
        kernel_worst = kernel_worst.max(res.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let wr = lm.w.matvec(&r);
        w_worst = w_worst.max(wr.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    reports.push(VerificationReport {
        name: "double_layer_rigid_kernel".into(),
        pass: kernel_worst <= 1e-8,
        certificates: vec![("max_residual".into(), kernel_worst)],
    });
    reports.push(VerificationReport {
        name: "hypersingular_rigid_kernel".into(),
        pass: w_worst <= 1e-8,
        certificates: vec![("max_residual".into(), w_worst)],
    });
    let w_eig = sym_eigen(&lm.w).map_err(|e| RunError::Solver(format!("{e}")))?;
    reports.push(VerificationReport {
        name: "hypersingular_semidefinite".into(),
        pass: w_eig.values[0] >= -1e-10 * w_eig.values.last().unwrap().max(1.0),
        certificates: vec![("min_eig".into(), w_eig.values[0])],
    });

    // contraction constant over the levels
    let mut previous = None;
    for level in 0..cfg.levels {
        let m_l = refined(&base, level);
        let est = estimate_contraction_constant(&m_l, cfg.lambda_ext, cfg.mu_ext)
            .map_err(|e| RunError::Solver(e.to_string()))?;
        let nondecreasing = previous.map(|p: f64| est.c_k >= p - 1e-3).unwrap_or(true);
        previous = Some(est.c_k);
        reports.push(VerificationReport {
            name: format!("contraction_level_{level}"),
            pass: est.c_k > 0.4 && est.c_k < 1.0 && nondecreasing,
            certificates: vec![("c_k".into(), est.c_k)],
        });
    }

    // one-equation parameter conditions: worked arithmetic examples
    reports.push(check_jn_condition(
        JnConditionVariant::Monotonicity { c_a: 3.0 },
        1.0,
        1.0,
        0.9,
    ));
    reports.push(check_jn_condition(
        JnConditionVariant::LinearRatio {
            lambda_int: 1.0,
            mu_int: 1.0,
        },
        1.0,
        1.0,
        0.99,
    ));

    // stabilization equivalence on the finest level for all three methods
    let (mf, _) = problem(cfg)?;
    let opts = effective_solver(cfg);
    for method in [
        CouplingMethod::Symmetric,
        CouplingMethod::JohnsonNedelec,
        CouplingMethod::BielakMacCamy,
    ] {
        let sp = FemSpace::new(&mesh);
        let plain = assemble_system(method, &sp, &bs, &mf.data, false, cfg.xi)
            .map_err(|e| RunError::Config(format!("{e}")))?;
        let stab = assemble_system(method, &sp, &bs, &mf.data, true, cfg.xi)
            .map_err(|e| RunError::Config(format!("{e}")))?;
        let (sol_plain, _) = solve(&plain, &opts).map_err(|e| RunError::Solver(e.to_string()))?;
        let (sol_stab, _) = solve(&stab, &opts).map_err(|e| RunError::Solver(e.to_string()))?;
        let dist = solution_distance(&sol_stab, &sol_plain);
        reports.push(VerificationReport {
            name: format!("stabilization_equivalence_{method:?}"),
            pass: dist <= 1e-8,
            certificates: vec![("relative_distance".into(), dist)],
        });
    }

    // compatibility of the configured data
    let sp = FemSpace::new(&mesh);
    let res = mf.data.compatibility_residuals(&sp, &bs);
    reports.push(VerificationReport {
        name: "compatibility_residuals".into(),
        pass: res[0].abs() <= 1e-10 && res[1].abs() <= 1e-10,
        certificates: vec![("res_x".into(), res[0]), ("res_y".into(), res[1])],
    });

    write_file(&flags.out_dir.join("verify.csv"), &verify_csv(&reports))?;
    let pass = reports.iter().all(|r| r.pass);
    let messages = reports
        .iter()
        .map(|r| format!("{}: {}", r.name, if r.pass { "pass" } else { "FAIL" }))
        .collect();
    Ok(RunSummary { pass, messages })
}
