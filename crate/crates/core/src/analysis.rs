//! Executable certificates for the structural properties the couplings
//! rely on: linear independence of the projected rigid body motions,
//! existence of non-collinear surface centroids, the contraction constant
//! of the double-layer operator in the discrete V^{-1} energy, parameter
//! conditions for the one-equation couplings, and convergence studies
//! against manufactured solutions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bem::{assemble_layer_matrices, BoundarySpace};
use crate::coupling::{
    assemble_system, CoupledSolution, CouplingMethod, Field, NormalField, ProblemData, XiChoice,
};
use crate::fem::FemSpace;
use crate::linalg::{dot, generalized_sym_eigen, singular_values, Lu, Mat};
use crate::mesh::{refine_uniform, Mesh, Point2, Point3, SurfaceMesh3};
use crate::num;
use crate::solver::{solve, SolveError, SolveOptions};

/// Outcome of one structural check: the verdict plus the certificate
/// scalars that justify it.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub name: String,
    pub pass: bool,
    pub certificates: Vec<(String, f64)>,
}

impl VerificationReport {
    pub fn certificate(&self, key: &str) -> Option<f64> {
        self.certificates
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }
}

/// Relative threshold for rank decisions on Gram matrices.
const INDEPENDENCE_TOL: f64 = 1e-12;

/// Gram matrix of the projected rigid body motions over 2D boundary
/// segments given as (midpoint, length) pairs.
pub fn rbm_gram_2d(segments: &[(Point2, f64)]) -> Mat {
    let mut gram = Mat::zeros(3, 3);
    for &(mid, len) in segments {
        let xi = [[1.0, 0.0], [0.0, 1.0], [-mid[1], mid[0]]];
        for i in 0..3 {
            for j in 0..3 {
                gram[(i, j)] += len * (xi[i][0] * xi[j][0] + xi[i][1] * xi[j][1]);
            }
        }
    }
    gram
}

/// Gram matrix of the projected rigid body motions over 3D surface faces
/// given as (centroid, area) pairs; the projections of the six rigid
/// motions onto face-constants take their centroid values.
pub fn rbm_gram_3d(faces: &[(Point3, f64)]) -> Mat {
    let mut gram = Mat::zeros(6, 6);
    for &(s, area) in faces {
        let xi: [[f64; 3]; 6] = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [-s[1], s[0], 0.0],
            [0.0, -s[2], s[1]],
            [s[2], 0.0, -s[0]],
        ];
        for i in 0..6 {
            for j in 0..6 {
                gram[(i, j)] +=
                    area * (xi[i][0] * xi[j][0] + xi[i][1] * xi[j][1] + xi[i][2] * xi[j][2]);
            }
        }
    }
    gram
}

fn independence_report(name: &str, gram: &Mat) -> VerificationReport {
    let sv = singular_values(gram);
    let sigma_max = sv[0];
    let sigma_min = *sv.last().unwrap();
    VerificationReport {
        name: String::from(name),
        pass: sigma_min > INDEPENDENCE_TOL * sigma_max,
        certificates: vec![
            (String::from("sigma_min"), sigma_min),
            (String::from("sigma_max"), sigma_max),
            (String::from("ratio"), sigma_min / sigma_max),
        ],
    }
}

/// Certifies that the L2 projections of the rigid body motions onto the
/// piecewise constants of a 2D boundary mesh are linearly independent.
pub fn check_rbm_independence_2d(bs: &BoundarySpace) -> VerificationReport {
    let segments: Vec<(Point2, f64)> = bs
        .edges
        .iter()
        .map(|e| (e.geom.midpoint(), e.geom.len))
        .collect();
    independence_report("rbm_independence_2d", &rbm_gram_2d(&segments))
}

/// Same certificate from raw segments, for adversarial geometries that do
/// not form a valid boundary.
pub fn check_rbm_independence_segments(segments: &[(Point2, f64)]) -> VerificationReport {
    independence_report("rbm_independence_2d", &rbm_gram_2d(segments))
}

/// Certifies rigid-motion projection independence on a closed surface
/// triangulation (six rigid motions).
pub fn check_rbm_independence_3d(sm: &SurfaceMesh3) -> VerificationReport {
    let faces: Vec<(Point3, f64)> = (0..sm.triangles.len())
        .map(|t| (sm.centroid(t), sm.triangle_area(t)))
        .collect();
    independence_report("rbm_independence_3d", &rbm_gram_3d(&faces))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CentroidError {
    TooFewTriangles,
    AllCollinear,
}

impl core::fmt::Display for CentroidError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CentroidError::TooFewTriangles => write!(f, "fewer than three triangles"),
            CentroidError::AllCollinear => write!(f, "all face centroids lie on one line"),
        }
    }
}

/// Finds three triangles of a surface mesh whose centroids span a
/// nondegenerate triangle. Closed regular triangulations always contain
/// such a triple; failure certifies the input is not one.
pub fn find_noncollinear_centroids(sm: &SurfaceMesh3) -> Result<[usize; 3], CentroidError> {
    let n = sm.triangles.len();
    if n < 3 {
        return Err(CentroidError::TooFewTriangles);
    }
    let centroids: Vec<Point3> = (0..n).map(|t| sm.centroid(t)).collect();
    // geometric scale: largest centroid separation from the first
    let a = centroids[0];
    let dist = |p: Point3, q: Point3| {
        num::sqrt(
            (p[0] - q[0]) * (p[0] - q[0])
                + (p[1] - q[1]) * (p[1] - q[1])
                + (p[2] - q[2]) * (p[2] - q[2]),
        )
    };
    let scale = centroids
        .iter()
        .fold(0.0, |m, &c| num::max(m, dist(a, c)));
    if scale == 0.0 {
        return Err(CentroidError::AllCollinear);
    }
    // second point: farthest from the first
    let b_idx = (1..n)
        .max_by(|&i, &j| {
            dist(a, centroids[i])
                .partial_cmp(&dist(a, centroids[j]))
                .unwrap()
        })
        .unwrap();
    let b = centroids[b_idx];
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let tol = 1e-12;
    for (c_idx, &c) in centroids.iter().enumerate() {
        if c_idx == 0 || c_idx == b_idx {
            continue;
        }
        let ac = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let cross = [
            ab[1] * ac[2] - ab[2] * ac[1],
            ab[2] * ac[0] - ab[0] * ac[2],
            ab[0] * ac[1] - ab[1] * ac[0],
        ];
        let cross_norm =
            num::sqrt(cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]);
        if cross_norm > tol * scale * scale {
            return Ok([0, b_idx, c_idx]);
        }
    }
    Err(CentroidError::AllCollinear)
}

/// Discrete contraction constant of the double-layer operator in the
/// V^{-1} energy norm.
#[derive(Clone, Copy, Debug)]
pub struct ContractionEstimate {
    pub c_k: f64,
    pub trace_dofs: usize,
    pub lambda_ext: f64,
    pub mu_ext: f64,
}

#[derive(Debug)]
pub enum AnalysisError {
    Linalg(crate::linalg::LinalgError),
    Bem(crate::bem::BemError),
    Solve(SolveError),
}

impl core::fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AnalysisError::Linalg(e) => write!(f, "linear algebra failure: {e}"),
            AnalysisError::Bem(e) => write!(f, "boundary assembly failure: {e}"),
            AnalysisError::Solve(e) => write!(f, "solver failure: {e}"),
        }
    }
}

impl From<crate::linalg::LinalgError> for AnalysisError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        AnalysisError::Linalg(e)
    }
}

impl From<crate::bem::BemError> for AnalysisError {
    fn from(e: crate::bem::BemError) -> Self {
        AnalysisError::Bem(e)
    }
}

impl From<SolveError> for AnalysisError {
    fn from(e: SolveError) -> Self {
        AnalysisError::Solve(e)
    }
}

/// Estimates c_K as the largest generalized eigenvalue of
///   (M/2 + K)^T V^{-1} (M/2 + K) x = c_K^2  M^T V^{-1} M x
/// over the P1 trace coefficients of `mesh`, with the operators assembled
/// on the once-refined boundary. The refinement matters: against the
/// same-mesh P0 space the moment matrix M annihilates the alternating
/// trace (the pairing is not inf-sup stable) and the raw pencil diverges
/// under refinement; with the density space one level finer the moment map
/// is injective and the estimate settles inside the theoretical range
/// [1/2, 1).
pub fn estimate_contraction_constant(
    mesh: &Mesh,
    lambda_ext: f64,
    mu_ext: f64,
) -> Result<ContractionEstimate, AnalysisError> {
    let coarse = BoundarySpace::from_mesh(mesh)?;
    let fine_mesh = refine_uniform(mesh);
    let fine = BoundarySpace::from_mesh(&fine_mesh)?;
    let lm = assemble_layer_matrices(&fine, lambda_ext, mu_ext)?;

    // prolongation from coarse P1 traces to fine P1 traces: fine boundary
    // nodes alternate between coarse nodes and edge midpoints along the loop
    let coarse_pos: alloc::collections::BTreeMap<usize, usize> = coarse
        .node_order
        .iter()
        .enumerate()
        .map(|(p, &n)| (n, p))
        .collect();
    let nf = fine.node_count();
    let nc = coarse.node_count();
    let mut prolong = Mat::zeros(2 * nf, 2 * nc);
    for (p, &node) in fine.node_order.iter().enumerate() {
        if let Some(&cp) = coarse_pos.get(&node) {
            for a in 0..2 {
                prolong[(2 * p + a, 2 * cp + a)] = 1.0;
            }
        } else {
            // midpoint: parents are the cyclic neighbors in the fine loop
            let prev = fine.node_order[(p + nf - 1) % nf];
            let next = fine.node_order[(p + 1) % nf];
            let cp_prev = coarse_pos[&prev];
            let cp_next = coarse_pos[&next];
            for a in 0..2 {
                prolong[(2 * p + a, 2 * cp_prev + a)] = 0.5;
                prolong[(2 * p + a, 2 * cp_next + a)] = 0.5;
            }
        }
    }

    let m_bar = lm.m.matmul(&prolong);
    let mut x_plus = lm.k.matmul(&prolong);
    x_plus.add_scaled(&m_bar, 0.5);
    let lu = Lu::factor(&lm.v)?;
    let a = x_plus.transpose().matmul(&lu.solve_mat(&x_plus));
    let b = m_bar.transpose().matmul(&lu.solve_mat(&m_bar));
    let eigs = generalized_sym_eigen(&a.symmetric_part(), &b.symmetric_part(), 1e-10)?;
    let max = eigs.last().copied().unwrap_or(0.0);
    Ok(ContractionEstimate {
        c_k: num::sqrt(num::max(max, 0.0)),
        trace_dofs: coarse.trace_dof_count(),
        lambda_ext,
        mu_ext,
    })
}

/// Parameter condition variants for the one-equation couplings.
#[derive(Clone, Copy, Debug)]
pub enum JnConditionVariant {
    /// 2 c_A > c_K (3 lambda_ext + 2 mu_ext)
    Monotonicity { c_a: f64 },
    /// min(lambda_int/lambda_ext, mu_int/mu_ext) > c_K / 4
    LinearRatio { lambda_int: f64, mu_int: f64 },
    /// min(inf(K - mu_tilde)/lambda_ext, inf(mu_tilde)/mu_ext) > c_K / 4
    HenckyRatio {
        bulk: f64,
        mu_tilde_inf: f64,
        mu_tilde_sup: f64,
    },
}

/// Evaluates the selected solvability condition and reports the margin by
/// which it holds (negative margin = fail; the inequalities are strict).
pub fn check_jn_condition(
    variant: JnConditionVariant,
    lambda_ext: f64,
    mu_ext: f64,
    c_k: f64,
) -> VerificationReport {
    let (name, lhs, rhs) = match variant {
        JnConditionVariant::Monotonicity { c_a } => (
            "jn_condition_monotonicity",
            2.0 * c_a,
            c_k * (3.0 * lambda_ext + 2.0 * mu_ext),
        ),
        JnConditionVariant::LinearRatio { lambda_int, mu_int } => (
            "jn_condition_linear_ratio",
            num::min(lambda_int / lambda_ext, mu_int / mu_ext),
            c_k / 4.0,
        ),
        JnConditionVariant::HenckyRatio {
            bulk,
            mu_tilde_inf,
            mu_tilde_sup,
        } => (
            "jn_condition_hencky_ratio",
            num::min((bulk - mu_tilde_sup) / lambda_ext, mu_tilde_inf / mu_ext),
            c_k / 4.0,
        ),
    };
    VerificationReport {
        name: String::from(name),
        pass: lhs > rhs,
        certificates: vec![
            (String::from("lhs"), lhs),
            (String::from("rhs"), rhs),
            (String::from("margin"), lhs - rhs),
        ],
    }
}

/// A manufactured problem: transmission data together with the exact
/// interior solution and the exact boundary density for error measurement.
pub struct Manufactured {
    pub data: ProblemData,
    pub exact_u: Field,
    /// Row-major Jacobian of the exact displacement.
    pub exact_grad_u: alloc::boxed::Box<dyn Fn(Point2) -> [[f64; 2]; 2]>,
    /// Exact boundary density (exterior traction), given point and normal.
    pub exact_phi: NormalField,
}

/// One row of a convergence table.
#[derive(Clone, Debug)]
pub struct LevelRow {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub err_eps: f64,
    pub err_phi: f64,
    pub rate_eps: f64,
    pub rate_phi: f64,
    pub iters: usize,
}

/// Degree-4 quadrature on the reference triangle (6 points).
const TRI_QUAD: [(f64, f64, f64); 6] = [
    (0.445948490915965, 0.445948490915965, 0.223381589678011),
    (0.445948490915965, 0.108103018168070, 0.223381589678011),
    (0.108103018168070, 0.445948490915965, 0.223381589678011),
    (0.091576213509771, 0.091576213509771, 0.109951743655322),
    (0.091576213509771, 0.816847572980459, 0.109951743655322),
    (0.816847572980459, 0.091576213509771, 0.109951743655322),
];

/// ||eps(u_exact - u_h)||_{L2} by elementwise quadrature against the
/// constant discrete strain.
pub fn strain_error(sp: &FemSpace, sol_u: &crate::fem::CoefVector, mf: &Manufactured) -> f64 {
    let mut acc = 0.0;
    for (t, tri) in sp.mesh.triangles.iter().enumerate() {
        let eh = sp.strain_at(sol_u, t);
        let p0 = sp.mesh.nodes[tri[0]];
        let p1 = sp.mesh.nodes[tri[1]];
        let p2 = sp.mesh.nodes[tri[2]];
        let area = sp.element_area(t);
        for &(l1, l2, w) in TRI_QUAD.iter() {
            let l0 = 1.0 - l1 - l2;
            let x = [
                l0 * p0[0] + l1 * p1[0] + l2 * p2[0],
                l0 * p0[1] + l1 * p1[1] + l2 * p2[1],
            ];
            let g = (mf.exact_grad_u)(x);
            let exx = g[0][0] - eh.xx;
            let eyy = g[1][1] - eh.yy;
            let exy = 0.5 * (g[0][1] + g[1][0]) - eh.xy;
            acc += w * area * (exx * exx + eyy * eyy + 2.0 * exy * exy);
        }
    }
    num::sqrt(acc)
}

/// Error of the density in the discrete V-energy norm, the computable
/// equivalent of the negative-order trace norm: the exact density enters
/// through its P0 midpoint interpolant.
pub fn phi_error(
    bs: &BoundarySpace,
    v: &Mat,
    sol_phi: &crate::fem::CoefVector,
    mf: &Manufactured,
) -> f64 {
    let exact = bs.interpolate_density_with_normal(&*mf.exact_phi);
    let diff: Vec<f64> = exact
        .iter()
        .zip(sol_phi.values.iter())
        .map(|(a, b)| a - b)
        .collect();
    num::sqrt(num::max(dot(&v.matvec(&diff), &diff), 0.0))
}

/// Runs a refinement study of one coupling on a manufactured problem.
/// The base mesh must already be scaled for single-layer ellipticity.
pub fn convergence_study(
    base: &Mesh,
    mf: &Manufactured,
    method: CouplingMethod,
    levels: usize,
    opts: &SolveOptions,
    stabilize: bool,
) -> Result<Vec<LevelRow>, AnalysisError> {
    let mut rows: Vec<LevelRow> = Vec::new();
    let mut mesh = base.clone();
    for level in 0..levels {
        if level > 0 {
            mesh = refine_uniform(&mesh);
        }
        let sp = FemSpace::new(&mesh);
        let bs = BoundarySpace::from_mesh(&mesh)?;
        let sys = assemble_system(method, &sp, &bs, &mf.data, stabilize, XiChoice::default())
            .map_err(|e| match e {
                crate::coupling::CouplingError::Bem(b) => AnalysisError::Bem(b),
                _ => AnalysisError::Bem(crate::bem::BemError::EmptyBoundary),
            })?;
        let (sol, trace) = solve(&sys, opts)?;
        let err_eps = strain_error(&sp, &sol.u, mf);
        let err_phi = phi_error(&bs, &sys.layers.v, &sol.phi, mf);
        let (rate_eps, rate_phi) = match rows.last() {
            Some(prev) => (
                num::ln(prev.err_eps / err_eps) / num::ln(2.0),
                num::ln(prev.err_phi / err_phi) / num::ln(2.0),
            ),
            None => (f64::NAN, f64::NAN),
        };
        rows.push(LevelRow {
            level,
            h: mesh.max_diameter(),
            dofs: sys.dim(),
            err_eps,
            err_phi,
            rate_eps,
            rate_phi,
            iters: trace.iterations.max(1),
        });
    }
    Ok(rows)
}

/// Solves one manufactured problem on one mesh; convenience used by the
/// cross-method consistency checks.
pub fn solve_on_mesh(
    mesh: &Mesh,
    mf: &Manufactured,
    method: CouplingMethod,
    opts: &SolveOptions,
    stabilize: bool,
) -> Result<(FemSpace, CoupledSolution), AnalysisError> {
    let sp = FemSpace::new(mesh);
    let bs = BoundarySpace::from_mesh(mesh)?;
    let sys = assemble_system(method, &sp, &bs, &mf.data, stabilize, XiChoice::default())
        .map_err(|e| match e {
            crate::coupling::CouplingError::Bem(b) => AnalysisError::Bem(b),
            _ => AnalysisError::Bem(crate::bem::BemError::EmptyBoundary),
        })?;
    let (sol, _) = solve(&sys, opts)?;
    Ok((sp, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{
        build_polygon_mesh, cube_surface, icosahedron_surface, lshape_polygon, refine_uniform,
        scale_to_unit, tetrahedron_surface, unit_square_polygon,
    };

    fn boundary(levels: usize, poly: &[Point2]) -> BoundarySpace {
        let mut m = build_polygon_mesh(poly, 1.0).unwrap();
        for _ in 0..levels {
            m = refine_uniform(&m);
        }
        let (m, _) = scale_to_unit(&m).unwrap();
        BoundarySpace::from_mesh(&m).unwrap()
    }

    #[test]
    fn unit_square_gram_matches_hand_value() {
        // Gram of the projected rigid motions on the unit square boundary:
        // eigenvalues 4 and (7 +- sqrt(33))/2; smallest = (7 - sqrt(33))/2.
        let m = build_polygon_mesh(&unit_square_polygon(), 1.0).unwrap();
        let bs = BoundarySpace::from_mesh(&m).unwrap();
        let report = check_rbm_independence_2d(&bs);
        assert!(report.pass);
        let expected = (7.0 - 33.0f64.sqrt()) / 2.0;
        let got = report.certificate("sigma_min").unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn square_and_lshape_boundaries_pass() {
        for poly in [unit_square_polygon(), lshape_polygon()] {
            for levels in 0..3 {
                let bs = boundary(levels, &poly);
                assert!(check_rbm_independence_2d(&bs).pass);
            }
        }
    }

    #[test]
    fn surface_meshes_pass_with_six_motions() {
        for sm in [tetrahedron_surface(), cube_surface(), icosahedron_surface()] {
            let report = check_rbm_independence_3d(&sm);
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn nested_collinear_segments_fail() {
        // two collinear segments sharing their midpoint: the projected
        // rotation vanishes identically and the Gram drops rank
        let segments = vec![([0.0, 0.0], 2.0), ([0.0, 0.0], 4.0)];
        let report = check_rbm_independence_segments(&segments);
        assert!(!report.pass);
    }

    #[test]
    fn verdict_invariant_under_rigid_motion_of_mesh() {
        let m = build_polygon_mesh(&unit_square_polygon(), 0.5).unwrap();
        let bs = BoundarySpace::from_mesh(&m).unwrap();
        let base = check_rbm_independence_2d(&bs);
        // rotate and translate the mesh
        let mut rotated = m.clone();
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        for p in rotated.nodes.iter_mut() {
            let q = [p[0] * c - p[1] * s + 0.3, p[0] * s + p[1] * c - 0.7];
            *p = q;
        }
        let bs2 = BoundarySpace::from_mesh(&rotated).unwrap();
        let moved = check_rbm_independence_2d(&bs2);
        assert_eq!(base.pass, moved.pass);
    }

    #[test]
    fn centroid_search_succeeds_on_closed_surfaces() {
        for sm in [tetrahedron_surface(), cube_surface(), icosahedron_surface()] {
            let idx = find_noncollinear_centroids(&sm).unwrap();
            assert!(idx[0] != idx[1] && idx[1] != idx[2] && idx[0] != idx[2]);
        }
        // randomized refinements keep the property
        let refined = icosahedron_surface().refine();
        for seed in 0..20 {
            let jittered = refined.jitter(0.1, seed);
            assert!(jittered.is_closed_surface());
            assert!(find_noncollinear_centroids(&jittered).is_ok());
        }
    }

    #[test]
    fn flat_strip_fails_centroid_search() {
        // two coplanar triangles: only two centroids exist
        let strip = SurfaceMesh3 {
            nodes: vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [1.0, 1.0, 0.0],
            ],
            triangles: vec![[0, 1, 2], [1, 3, 2]],
        };
        assert!(!strip.is_closed_surface());
        assert!(matches!(
            find_noncollinear_centroids(&strip),
            Err(CentroidError::TooFewTriangles)
        ));
    }

    #[test]
    fn contraction_constant_in_expected_range() {
        for poly in [unit_square_polygon(), lshape_polygon()] {
            let mut previous: Option<f64> = None;
            for levels in 1..4 {
                let mut m = build_polygon_mesh(&poly, 1.0).unwrap();
                for _ in 0..levels {
                    m = refine_uniform(&m);
                }
                let (m, _) = scale_to_unit(&m).unwrap();
                let est = estimate_contraction_constant(&m, 1.0, 1.0).unwrap();
                std::println!("c_K level {levels}: {}", est.c_k);
                assert!(
                    est.c_k > 0.4 && est.c_k < 1.0,
                    "c_K = {} at level {levels}",
                    est.c_k
                );
                if let Some(prev) = previous {
                    assert!(
                        est.c_k >= prev - 1e-3,
                        "c_K not nondecreasing: {prev} -> {}",
                        est.c_k
                    );
                }
                previous = Some(est.c_k);
            }
        }
    }

    #[test]
    fn verdict_invariant_under_uniform_scaling() {
        let m = build_polygon_mesh(&unit_square_polygon(), 0.5).unwrap();
        let base = check_rbm_independence_2d(&BoundarySpace::from_mesh(&m).unwrap());
        let mut scaled = m.clone();
        for p in scaled.nodes.iter_mut() {
            *p = [7.3 * p[0], 7.3 * p[1]];
        }
        let big = check_rbm_independence_2d(&BoundarySpace::from_mesh(&scaled).unwrap());
        assert_eq!(base.pass, big.pass);
        // the translation block scales linearly with the perimeter while
        // the rotation block picks up two extra powers of the scale
        assert!(big.certificate("sigma_max").unwrap() > base.certificate("sigma_max").unwrap());
    }

    #[test]
    fn methods_agree_under_refinement() {
        // all three couplings discretize the same transmission problem, so
        // their solutions approach each other as the mesh is refined
        use crate::solver::{SolveMethod, SolveOptions};
        let mk_problem = || {
            let field = |p: Point2| -> [f64; 2] { [-p[1] + 0.3 * p[0], p[0]] };
            Manufactured {
                data: ProblemData {
                    f: alloc::boxed::Box::new(|p| [30.0 * p[1], -30.0 * p[0]]),
                    u0: alloc::boxed::Box::new(field),
                    phi0: alloc::boxed::Box::new(|_, _| [0.0, 0.0]),
                    lambda_ext: 1.0,
                    mu_ext: 1.0,
                    material: crate::material::MaterialLaw::linear(1.0, 1.0).unwrap(),
                },
                exact_u: alloc::boxed::Box::new(field),
                exact_grad_u: alloc::boxed::Box::new(|_| [[0.3, -1.0], [1.0, 0.0]]),
                exact_phi: alloc::boxed::Box::new(|_, _| [0.0, 0.0]),
            }
        };
        let opts = SolveOptions {
            method: SolveMethod::Direct,
            tol: 1e-10,
            max_iter: 100,
        };
        let mut m = build_polygon_mesh(&unit_square_polygon(), 1.0).unwrap();
        m = refine_uniform(&m);
        let (mut mesh, _) = scale_to_unit(&m).unwrap();
        let mut prev_gap: Option<f64> = None;
        for _ in 0..3 {
            let mf = mk_problem();
            let sp = FemSpace::new(&mesh);
            let sols: Vec<CoupledSolution> = [
                CouplingMethod::Symmetric,
                CouplingMethod::JohnsonNedelec,
                CouplingMethod::BielakMacCamy,
            ]
            .iter()
            .map(|&method| solve_on_mesh(&mesh, &mf, method, &opts, false).unwrap().1)
            .collect();
            let mut gap = 0.0f64;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let diff = crate::fem::CoefVector {
                        values: sols[i]
                            .u
                            .values
                            .iter()
                            .zip(&sols[j].u.values)
                            .map(|(a, b)| a - b)
                            .collect(),
                    };
                    gap = num::max(gap, sp.h1_seminorm(&diff));
                }
            }
            if let Some(p) = prev_gap {
                assert!(gap < p, "method gap did not shrink: {p} -> {gap}");
            }
            prev_gap = Some(gap);
            mesh = refine_uniform(&mesh);
        }
    }

    #[test]
    fn jn_condition_worked_examples() {
        // 2 c_A = 6 > c_K (3 lam + 2 mu) = 4.5
        let r = check_jn_condition(
            JnConditionVariant::Monotonicity { c_a: 3.0 },
            1.0,
            1.0,
            0.9,
        );
        assert!(r.pass);
        assert!((r.certificate("margin").unwrap() - 1.5).abs() < 1e-15);

        // eta = 1 > 0.2475
        let r = check_jn_condition(
            JnConditionVariant::LinearRatio {
                lambda_int: 1.0,
                mu_int: 1.0,
            },
            1.0,
            1.0,
            0.99,
        );
        assert!(r.pass);
        assert!((r.certificate("lhs").unwrap() - 1.0).abs() < 1e-15);
        assert!((r.certificate("rhs").unwrap() - 0.2475).abs() < 1e-15);

        // boundary case: equality must fail (strict inequality required)
        let r = check_jn_condition(
            JnConditionVariant::Monotonicity { c_a: 2.25 },
            1.0,
            1.0,
            0.9,
        );
        assert!(!r.pass);
        assert!(r.certificate("margin").unwrap().abs() < 1e-15);
    }
}
