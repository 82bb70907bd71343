//! Boundary integral operators for 2D elastostatics on polygonal
//! boundaries: the Kelvin fundamental solution, Galerkin matrices of the
//! single-layer operator V (piecewise-constant densities), the double-layer
//! operator K tested against piecewise constants and applied to continuous
//! piecewise-linear traces, the corresponding mass matrix, and the
//! hypersingular operator W realized through the Calderon composite
//! W = (1/2 - K') V^{-1} (1/2 + K).
//!
//! All operators are taken with respect to the exterior Lame constants.
//! Ellipticity of V in 2D requires the domain to be scaled small (see
//! `mesh::scale_to_unit`); assembling on an unscaled domain only raises a
//! warning flag since every matrix identity tested here is scale-covariant.

pub mod quad;

use alloc::vec::Vec;

use crate::linalg::{Lu, Mat};
use crate::mesh::{Mesh, Point2};
use crate::num;

use quad::{
    kelvin_inner_moments, kelvin_same_panel, traction_inner_moments, traction_same_panel,
    EdgeGeom, KernelConsts, PairKind, PanelRule,
};

/// Gauss order for the outer (test) integration of regular panel pairs.
const OUTER_GAUSS_ORDER: usize = 8;

/// The 2D Kelvin tensor
/// G_ab(z) = kappa ( -b ln|z| delta_ab + z_a z_b / |z|^2 ),
/// kappa = (lambda+mu) / (4 pi mu (lambda+2mu)), b = (lambda+3mu)/(lambda+mu).
pub fn kelvin_tensor(z: Point2, lambda: f64, mu: f64) -> Result<[[f64; 2]; 2], BemError> {
    let q = z[0] * z[0] + z[1] * z[1];
    if q == 0.0 {
        return Err(BemError::SingularEvaluation);
    }
    let kc = KernelConsts::new(lambda, mu);
    let log_part = -kc.b_ratio * 0.5 * num::ln(q);
    let mut g = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let delta = if a == b { log_part } else { 0.0 };
            g[a][b] = kc.kappa * (delta + z[a] * z[b] / q);
        }
    }
    Ok(g)
}

/// Double-layer kernel T_ab(x, y) of the Somigliana identity, with
/// z = x - y and outward normal n at y: row a is the observation component,
/// column b contracts the density. Componentwise
/// T_ab = kappa mu [ beta (h d_ab + n_a z_b - z_a n_b) + 4 z_a z_b h/|z|^2 ] / |z|^2,
/// i.e. T_ab = [traction at y of the Kelvin column field G(. - y) e_a]_b.
pub fn kelvin_traction(
    z: Point2,
    n: [f64; 2],
    lambda: f64,
    mu: f64,
) -> Result<[[f64; 2]; 2], BemError> {
    let q = z[0] * z[0] + z[1] * z[1];
    if q == 0.0 {
        return Err(BemError::SingularEvaluation);
    }
    let kc = KernelConsts::new(lambda, mu);
    let h = z[0] * n[0] + z[1] * n[1];
    let km = kc.kappa * kc.mu;
    let mut t = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let delta = if a == b { h } else { 0.0 };
            t[a][b] = km / q
                * (kc.beta * (delta + n[a] * z[b] - z[a] * n[b]) + 4.0 * z[a] * z[b] * h / q);
        }
    }
    Ok(t)
}

/// Gradient of the Kelvin tensor: `d[i][j][k]` = dG_ij/dz_k. Used to form
/// stresses of Kelvin-type exterior fields in closed form.
pub fn kelvin_gradient(z: Point2, lambda: f64, mu: f64) -> Result<[[[f64; 2]; 2]; 2], BemError> {
    let q = z[0] * z[0] + z[1] * z[1];
    if q == 0.0 {
        return Err(BemError::SingularEvaluation);
    }
    let kc = KernelConsts::new(lambda, mu);
    let mut d = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut v = -2.0 * z[i] * z[j] * z[k] / q;
                if i == j {
                    v -= kc.b_ratio * z[k];
                }
                if i == k {
                    v += z[j];
                }
                if j == k {
                    v += z[i];
                }
                d[i][j][k] = kc.kappa * v / q;
            }
        }
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BemError {
    SingularEvaluation,
    SingularSingleLayer,
    EmptyBoundary,
}

impl core::fmt::Display for BemError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BemError::SingularEvaluation => write!(f, "kernel evaluated at z = 0"),
            BemError::SingularSingleLayer => {
                write!(f, "single-layer matrix is numerically singular")
            }
            BemError::EmptyBoundary => write!(f, "boundary mesh has no edges"),
        }
    }
}

/// One boundary panel: geometry plus the positions of its endpoints in the
/// cyclic boundary-node ordering.
#[derive(Clone, Debug)]
pub struct BoundaryEdge {
    pub geom: EdgeGeom,
    pub start_node: usize,
    pub end_node: usize,
    pub start_pos: usize,
    pub end_pos: usize,
}

/// Discrete boundary spaces on the trace of a triangulation: P0 densities
/// (two dofs per edge) and P1 traces (two dofs per boundary node).
#[derive(Clone, Debug)]
pub struct BoundarySpace {
    pub edges: Vec<BoundaryEdge>,
    /// Boundary nodes (mesh ids) in counterclockwise cyclic order.
    pub node_order: Vec<usize>,
}

impl BoundarySpace {
    pub fn from_mesh(mesh: &Mesh) -> Result<Self, BemError> {
        if mesh.boundary_edges.is_empty() {
            return Err(BemError::EmptyBoundary);
        }
        let node_order = mesh.boundary_nodes();
        let mut pos_of = alloc::collections::BTreeMap::new();
        for (p, &n) in node_order.iter().enumerate() {
            pos_of.insert(n, p);
        }
        let edges = mesh
            .boundary_edges
            .iter()
            .map(|e| BoundaryEdge {
                geom: EdgeGeom::new(mesh.nodes[e[0]], mesh.nodes[e[1]]),
                start_node: e[0],
                end_node: e[1],
                start_pos: pos_of[&e[0]],
                end_pos: pos_of[&e[1]],
            })
            .collect();
        Ok(Self { edges, node_order })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_order.len()
    }

    /// P0 density dofs: two per edge.
    pub fn density_dof_count(&self) -> usize {
        2 * self.edges.len()
    }

    /// P1 trace dofs: two per boundary node.
    pub fn trace_dof_count(&self) -> usize {
        2 * self.node_order.len()
    }

    /// Largest distance between boundary nodes.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Point2> = self.edges.iter().map(|e| e.geom.start).collect();
        let mut d = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                d = num::max(d, num::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]));
            }
        }
        d
    }

    /// P0 interpolation (edge midpoint values) of a vector field.
    pub fn interpolate_density(&self, f: &dyn Fn(Point2) -> [f64; 2]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.density_dof_count());
        for e in &self.edges {
            let v = f(e.geom.midpoint());
            out.push(v[0]);
            out.push(v[1]);
        }
        out
    }

    /// P0 interpolation of a field that depends on the outward normal.
    pub fn interpolate_density_with_normal(
        &self,
        f: &dyn Fn(Point2, [f64; 2]) -> [f64; 2],
    ) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.density_dof_count());
        for e in &self.edges {
            let v = f(e.geom.midpoint(), e.geom.normal);
            out.push(v[0]);
            out.push(v[1]);
        }
        out
    }

    /// P1 trace interpolation (boundary node values) of a vector field,
    /// indexed like the trace dofs of the coupled system.
    pub fn interpolate_trace(&self, f: &dyn Fn(Point2) -> [f64; 2]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.trace_dof_count());
        for e in &self.edges {
            // node_order[k] is the start node of edge k
            let v = f(e.geom.start);
            out.push(v[0]);
            out.push(v[1]);
        }
        out
    }

    fn pair_kind(&self, test: usize, trial: usize) -> PairKind {
        let te = &self.edges[test];
        let tr = &self.edges[trial];
        if te.start_node == tr.start_node || te.start_node == tr.end_node {
            PairKind::Touching { test_param: 0.0 }
        } else if te.end_node == tr.start_node || te.end_node == tr.end_node {
            PairKind::Touching { test_param: 1.0 }
        } else {
            PairKind::Disjoint
        }
    }
}

/// Assembled Galerkin matrices of the layer operators.
pub struct LayerMatrices {
    /// Single layer, P0 x P0, symmetric (2E x 2E).
    pub v: Mat,
    /// Double layer tested with P0, applied to P1 traces (2E x 2N).
    pub k: Mat,
    /// P0 x P1 mass matrix (2E x 2N).
    pub m: Mat,
    /// Hypersingular Calderon composite on P1 traces (2N x 2N), symmetrized.
    pub w: Mat,
    /// Set when the boundary diameter exceeds 1/2 and 2D single-layer
    /// ellipticity is therefore not guaranteed.
    pub ellipticity_warning: bool,
}

/// P0 x P0 Galerkin matrix of a Kelvin-type kernel (log plus zhat x zhat).
fn assemble_kelvin_type(bs: &BoundarySpace, kc: &KernelConsts) -> Mat {
    let rule = PanelRule::new(OUTER_GAUSS_ORDER);
    let ne = bs.edge_count();
    let mut v = Mat::zeros(2 * ne, 2 * ne);
    for k in 0..ne {
        // same panel: closed form
        let blk = kelvin_same_panel(&bs.edges[k].geom, kc);
        for a in 0..2 {
            for b in 0..2 {
                v[(2 * k + a, 2 * k + b)] = blk[a][b];
            }
        }
        // distinct panels: integrate once, mirror (the kernel is symmetric
        // and even, so the exact integral is symmetric in the pair)
        for j in (k + 1)..ne {
            let kind = bs.pair_kind(k, j);
            let trial = bs.edges[j].geom;
            let moments = rule.integrate_pair(&bs.edges[k].geom, &trial, kind, &|x| {
                kelvin_inner_moments(x, &trial, kc)
            });
            for a in 0..2 {
                for b in 0..2 {
                    let val = moments[0][0][a][b];
                    v[(2 * k + a, 2 * j + b)] = val;
                    v[(2 * j + b, 2 * k + a)] = val;
                }
            }
        }
    }
    v
}

/// Single-layer Galerkin matrix <psi_k, V psi_j> on P0 densities.
pub fn assemble_v(bs: &BoundarySpace, lambda_ext: f64, mu_ext: f64) -> Mat {
    assemble_kelvin_type(bs, &KernelConsts::new(lambda_ext, mu_ext))
}

/// Arclength-derivative map: P1 traces to edgewise-constant derivative
/// densities, (D u)|_E = (u(end) - u(start)) / |E| per component.
pub fn derivative_map(bs: &BoundarySpace) -> Mat {
    let ne = bs.edge_count();
    let nn = bs.node_count();
    let mut d = Mat::zeros(2 * ne, 2 * nn);
    for (e, edge) in bs.edges.iter().enumerate() {
        let inv_len = 1.0 / edge.geom.len;
        for a in 0..2 {
            d[(2 * e + a, 2 * edge.start_pos + a)] -= inv_len;
            d[(2 * e + a, 2 * edge.end_pos + a)] += inv_len;
        }
    }
    d
}

/// Double-layer matrix <psi_k, K u_m> (P0 rows, P1-trace columns) and the
/// P0 x P1 mass matrix, assembled together since the couplings only use
/// the combinations (1/2 M +- K).
pub fn assemble_k_and_m(bs: &BoundarySpace, lambda_ext: f64, mu_ext: f64) -> (Mat, Mat) {
    let kc = KernelConsts::new(lambda_ext, mu_ext);
    let rule = PanelRule::new(OUTER_GAUSS_ORDER);
    let ne = bs.edge_count();
    let nn = bs.node_count();
    let mut kmat = Mat::zeros(2 * ne, 2 * nn);
    let mut mmat = Mat::zeros(2 * ne, 2 * nn);
    for k in 0..ne {
        let ek = bs.edges[k].clone();
        // mass: int_E hat = L/2 at both endpoints, per component
        for a in 0..2 {
            mmat[(2 * k + a, 2 * ek.start_pos + a)] += 0.5 * ek.geom.len;
            mmat[(2 * k + a, 2 * ek.end_pos + a)] += 0.5 * ek.geom.len;
        }
        for j in 0..ne {
            let ej = bs.edges[j].clone();
            if j == k {
                let same = traction_same_panel(&ek.geom, &kc);
                for a in 0..2 {
                    for b in 0..2 {
                        kmat[(2 * k + a, 2 * ej.start_pos + b)] += same[0][0][a][b];
                        kmat[(2 * k + a, 2 * ej.end_pos + b)] += same[0][1][a][b];
                    }
                }
                continue;
            }
            let kind = bs.pair_kind(k, j);
            let trial = ej.geom;
            let moments = rule.integrate_pair(&ek.geom, &trial, kind, &|x| {
                traction_inner_moments(x, &trial, &kc)
            });
            // trial hats: start hat = m0 - m1, end hat = m1
            for a in 0..2 {
                for b in 0..2 {
                    let m0 = moments[0][0][a][b];
                    let m1 = moments[0][1][a][b];
                    kmat[(2 * k + a, 2 * ej.start_pos + b)] += m0 - m1;
                    kmat[(2 * k + a, 2 * ej.end_pos + b)] += m1;
                }
            }
        }
    }
    (kmat, mmat)
}

/// Hypersingular Galerkin matrix on P1 traces via the regularized
/// (twice integrated by parts) bilinear form: W = D^T V_B D with V_B the
/// P0 Galerkin matrix of B(z) = c_w (-ln|z| I + zhat zhat^T) and D the
/// arclength-derivative map. This is the exact Galerkin matrix of the
/// hypersingular operator, so the rigid body motions are annihilated to
/// quadrature precision: translations exactly (their derivative vanishes),
/// the rotation through the cancellation of the log and zhat parts.
pub fn assemble_w(bs: &BoundarySpace, lambda_ext: f64, mu_ext: f64) -> Mat {
    let vb = assemble_kelvin_type(bs, &KernelConsts::hypersingular(lambda_ext, mu_ext));
    let d = derivative_map(bs);
    d.transpose().matmul(&vb.matmul(&d)).symmetric_part()
}

/// Hypersingular matrix through the Calderon composite
/// sym( (1/2 M - K)^T V^{-1} (1/2 M + K) ). Kept as an independent route
/// for cross-checking [`assemble_w`]: the two agree up to discretization
/// error, but the composite only annihilates rigid motions at O(h) and is
/// therefore not used in the couplings.
pub fn assemble_w_calderon(v: &Mat, kmat: &Mat, mmat: &Mat) -> Result<Mat, BemError> {
    let lu = Lu::factor(v).map_err(|_| BemError::SingularSingleLayer)?;
    let mut x_plus = kmat.clone();
    x_plus.add_scaled(mmat, 0.5);
    let mut y_minus = kmat.clone();
    y_minus.scale(-1.0);
    y_minus.add_scaled(mmat, 0.5);
    let z = lu.solve_mat(&x_plus);
    let w0 = y_minus.transpose().matmul(&z);
    Ok(w0.symmetric_part())
}

/// Assembles all layer matrices for the exterior medium.
pub fn assemble_layer_matrices(
    bs: &BoundarySpace,
    lambda_ext: f64,
    mu_ext: f64,
) -> Result<LayerMatrices, BemError> {
    let v = assemble_v(bs, lambda_ext, mu_ext);
    let (k, m) = assemble_k_and_m(bs, lambda_ext, mu_ext);
    let w = assemble_w(bs, lambda_ext, mu_ext);
    Ok(LayerMatrices {
        v,
        k,
        m,
        w,
        ellipticity_warning: bs.diameter() > 0.5 + 1e-12,
    })
}

/// P1-tested operators needed when the stabilization functionals are built
/// from the rigid body motion traces directly (affine test densities)
/// instead of their P0 projections: <hat, V psi> (2N x 2E), <hat, K hat>
/// (2N x 2N), and the P1 x P1 boundary mass matrix (2N x 2N).
pub struct P1TestedOps {
    pub v_p1: Mat,
    pub k_p1: Mat,
    pub m_p1: Mat,
}

pub fn assemble_p1_tested(bs: &BoundarySpace, lambda_ext: f64, mu_ext: f64) -> P1TestedOps {
    let kc = KernelConsts::new(lambda_ext, mu_ext);
    let rule = PanelRule::new(OUTER_GAUSS_ORDER);
    let ne = bs.edge_count();
    let nn = bs.node_count();
    let mut v_p1 = Mat::zeros(2 * nn, 2 * ne);
    let mut k_p1 = Mat::zeros(2 * nn, 2 * nn);
    let mut m_p1 = Mat::zeros(2 * nn, 2 * nn);
    for k in 0..ne {
        let ek = bs.edges[k].clone();
        let l = ek.geom.len;
        // P1 x P1 mass on one edge: [[L/3, L/6], [L/6, L/3]] per component
        for a in 0..2 {
            m_p1[(2 * ek.start_pos + a, 2 * ek.start_pos + a)] += l / 3.0;
            m_p1[(2 * ek.start_pos + a, 2 * ek.end_pos + a)] += l / 6.0;
            m_p1[(2 * ek.end_pos + a, 2 * ek.start_pos + a)] += l / 6.0;
            m_p1[(2 * ek.end_pos + a, 2 * ek.end_pos + a)] += l / 3.0;
        }
        for j in 0..ne {
            let ej = bs.edges[j].clone();
            if j == k {
                let vsame = kelvin_same_panel(&ek.geom, &kc);
                // each test hat carries exactly half by symmetry
                for a in 0..2 {
                    for b in 0..2 {
                        v_p1[(2 * ek.start_pos + a, 2 * k + b)] += 0.5 * vsame[a][b];
                        v_p1[(2 * ek.end_pos + a, 2 * k + b)] += 0.5 * vsame[a][b];
                    }
                }
                let tsame = traction_same_panel(&ek.geom, &kc);
                let test_pos = [ek.start_pos, ek.end_pos];
                let trial_pos = [ej.start_pos, ej.end_pos];
                for (i, &tp) in test_pos.iter().enumerate() {
                    for (jj, &qp) in trial_pos.iter().enumerate() {
                        for a in 0..2 {
                            for b in 0..2 {
                                k_p1[(2 * tp + a, 2 * qp + b)] += tsame[i + 1][jj][a][b];
                            }
                        }
                    }
                }
                continue;
            }
            let kind = bs.pair_kind(k, j);
            let trial = ej.geom;
            let vm = rule.integrate_pair(&ek.geom, &trial, kind, &|x| {
                kelvin_inner_moments(x, &trial, &kc)
            });
            let tm = rule.integrate_pair(&ek.geom, &trial, kind, &|x| {
                traction_inner_moments(x, &trial, &kc)
            });
            for a in 0..2 {
                for b in 0..2 {
                    // test hats from outer moments: start = p0 - p1, end = p1
                    let v_start = vm[0][0][a][b] - vm[1][0][a][b];
                    let v_end = vm[1][0][a][b];
                    v_p1[(2 * ek.start_pos + a, 2 * j + b)] += v_start;
                    v_p1[(2 * ek.end_pos + a, 2 * j + b)] += v_end;
                    // trial hats from inner moments, test hats from outer
                    let m00 = tm[0][0][a][b];
                    let m01 = tm[0][1][a][b];
                    let m10 = tm[1][0][a][b];
                    let m11 = tm[1][1][a][b];
                    let trial_start = (m00 - m01, m10 - m11);
                    let trial_end = (m01, m11);
                    for (pos, (p0, p1)) in [(ej.start_pos, trial_start), (ej.end_pos, trial_end)]
                    {
                        k_p1[(2 * ek.start_pos + a, 2 * pos + b)] += p0 - p1;
                        k_p1[(2 * ek.end_pos + a, 2 * pos + b)] += p1;
                    }
                }
            }
        }
    }
    P1TestedOps { v_p1, k_p1, m_p1 }
}

/// P0 coefficient vectors of the rigid body motion traces projected onto
/// the density space: translations map to themselves, the rotation to its
/// edge-midpoint values.
pub fn project_rbm(bs: &BoundarySpace) -> [Vec<f64>; 3] {
    let ne = bs.edge_count();
    let mut xi1 = Vec::with_capacity(2 * ne);
    let mut xi2 = Vec::with_capacity(2 * ne);
    let mut xi3 = Vec::with_capacity(2 * ne);
    for e in &bs.edges {
        let s = e.geom.midpoint();
        xi1.extend_from_slice(&[1.0, 0.0]);
        xi2.extend_from_slice(&[0.0, 1.0]);
        xi3.extend_from_slice(&[-s[1], s[0]]);
    }
    [xi1, xi2, xi3]
}

/// P1 trace coefficient vectors of the rigid body motions.
pub fn rigid_trace_vectors(bs: &BoundarySpace) -> [Vec<f64>; 3] {
    let nn = bs.node_count();
    let mut r1 = Vec::with_capacity(2 * nn);
    let mut r2 = Vec::with_capacity(2 * nn);
    let mut r3 = Vec::with_capacity(2 * nn);
    for e in &bs.edges {
        let p = e.geom.start;
        r1.extend_from_slice(&[1.0, 0.0]);
        r2.extend_from_slice(&[0.0, 1.0]);
        r3.extend_from_slice(&[-p[1], p[0]]);
    }
    [r1, r2, r3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, sym_eigen};
    use crate::mesh::{build_polygon_mesh, refine_uniform, scale_to_unit, unit_square_polygon};
    use crate::num::Rng;

    fn scaled_square_boundary(levels: usize) -> BoundarySpace {
        let mut m = build_polygon_mesh(&unit_square_polygon(), 1.0).unwrap();
        for _ in 0..levels {
            m = refine_uniform(&m);
        }
        let (m, _) = scale_to_unit(&m).unwrap();
        BoundarySpace::from_mesh(&m).unwrap()
    }

    #[test]
    fn kelvin_tensor_value_on_unit_circle() {
        // lambda = mu = 1: kappa = 1/(6 pi); at |z| = 1 the log part drops out
        let g = kelvin_tensor([1.0, 0.0], 1.0, 1.0).unwrap();
        let expected = 1.0 / (6.0 * core::f64::consts::PI);
        assert!((g[0][0] - expected).abs() < 1e-15);
        assert!(g[0][1].abs() < 1e-15);
        assert!(g[1][0].abs() < 1e-15);
        assert!(g[1][1].abs() < 1e-15);
    }

    #[test]
    fn kelvin_tensor_even_and_symmetric() {
        let mut rng = Rng::new(4);
        for _ in 0..50 {
            let z = [rng.symmetric() + 1.5, rng.symmetric()];
            let g = kelvin_tensor(z, 1.7, 0.6).unwrap();
            let gm = kelvin_tensor([-z[0], -z[1]], 1.7, 0.6).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    assert!((g[a][b] - gm[a][b]).abs() < 1e-15);
                }
            }
            assert!((g[0][1] - g[1][0]).abs() < 1e-15);
        }
    }

    #[test]
    fn kelvin_gradient_matches_finite_differences() {
        let (lambda, mu) = (2.2, 0.9);
        let z = [0.4, -0.7];
        let d = kelvin_gradient(z, lambda, mu).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let mut zp = z;
            zp[k] += h;
            let mut zm = z;
            zm[k] -= h;
            let gp = kelvin_tensor(zp, lambda, mu).unwrap();
            let gm = kelvin_tensor(zm, lambda, mu).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let fd = (gp[i][j] - gm[i][j]) / (2.0 * h);
                    assert!(
                        (d[i][j][k] - fd).abs() < 1e-8,
                        "gradient ({i},{j},{k}): {} vs fd {fd}",
                        d[i][j][k]
                    );
                }
            }
        }
    }

    #[test]
    fn kelvin_rejects_origin() {
        assert!(matches!(
            kelvin_tensor([0.0, 0.0], 1.0, 1.0),
            Err(BemError::SingularEvaluation)
        ));
    }

    #[test]
    fn traction_kernel_matches_finite_differences() {
        // Row a of T is the traction of the Kelvin column field
        // w^a(y) = G(x - y) e_a: T_ab = [sigma(w^a) n]_b.
        let (lambda, mu) = (1.3, 0.8);
        let x = [0.9, -0.4];
        let y = [0.1, 0.2];
        let n = [0.6, 0.8];
        let z = [x[0] - y[0], x[1] - y[1]];
        let t = kelvin_traction(z, n, lambda, mu).unwrap();
        let h = 1e-6;
        for b in 0..2 {
            // jacobian J[i][k] = d w_i / d y_k by central differences
            let mut jac = [[0.0; 2]; 2];
            for k in 0..2 {
                let mut yp = y;
                yp[k] += h;
                let mut ym = y;
                ym[k] -= h;
                let gp = kelvin_tensor([x[0] - yp[0], x[1] - yp[1]], lambda, mu).unwrap();
                let gm = kelvin_tensor([x[0] - ym[0], x[1] - ym[1]], lambda, mu).unwrap();
                for i in 0..2 {
                    jac[i][k] = (gp[i][b] - gm[i][b]) / (2.0 * h);
                }
            }
            let div = jac[0][0] + jac[1][1];
            let eps = [
                [jac[0][0], 0.5 * (jac[0][1] + jac[1][0])],
                [0.5 * (jac[0][1] + jac[1][0]), jac[1][1]],
            ];
            for a in 0..2 {
                let mut trac = 0.0;
                for k in 0..2 {
                    let sigma_ak =
                        lambda * div * if a == k { 1.0 } else { 0.0 } + 2.0 * mu * eps[a][k];
                    trac += sigma_ak * n[k];
                }
                assert!(
                    (t[b][a] - trac).abs() < 1e-7,
                    "traction ({b},{a}): {} vs fd {}",
                    t[b][a],
                    trac
                );
            }
        }
    }

    #[test]
    fn v_is_symmetric_and_positive_definite_after_scaling() {
        let bs = scaled_square_boundary(2);
        let v = assemble_v(&bs, 1.0, 1.0);
        assert!(v.asymmetry() <= 1e-12, "asymmetry {}", v.asymmetry());
        let eig = sym_eigen(&v).unwrap();
        assert!(
            eig.values[0] > 0.0,
            "single layer not positive definite: min eig {}",
            eig.values[0]
        );
    }

    #[test]
    fn single_v_entry_matches_high_order_tensor_gauss() {
        let bs = scaled_square_boundary(2);
        let v = assemble_v(&bs, 1.0, 1.0);
        let rule = quad::gauss_legendre(32);
        let mut rng = Rng::new(9);
        let mut checked = 0;
        while checked < 10 {
            let k = rng.index(bs.edge_count());
            let j = rng.index(bs.edge_count());
            if k == j || !matches!(bs.pair_kind(k, j), PairKind::Disjoint) {
                continue;
            }
            let (ek, ej) = (&bs.edges[k].geom, &bs.edges[j].geom);
            for a in 0..2 {
                for b in 0..2 {
                    let mut brute = 0.0;
                    for &(s, ws) in &rule {
                        let x = ek.point(s);
                        for &(t, wt) in &rule {
                            let y = ej.point(t);
                            let g = kelvin_tensor([x[0] - y[0], x[1] - y[1]], 1.0, 1.0).unwrap();
                            brute += ws * wt * ek.len * ej.len * g[a][b];
                        }
                    }
                    let got = v[(2 * k + a, 2 * j + b)];
                    let denom = brute.abs().max(1e-10);
                    assert!(
                        ((got - brute) / denom).abs() < 1e-8,
                        "V entry ({k},{j},{a},{b}): {got} vs oracle {brute}"
                    );
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn mass_row_sums_are_edge_lengths() {
        let bs = scaled_square_boundary(1);
        let (_k, m) = assemble_k_and_m(&bs, 1.0, 1.0);
        for (k, e) in bs.edges.iter().enumerate() {
            for a in 0..2 {
                let sum: f64 = (0..bs.node_count()).map(|j| m[(2 * k + a, 2 * j + a)]).sum();
                assert!((sum - e.geom.len).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rigid_motion_kernel_identity() {
        // ker(1/2 + K) contains the rigid body motions: (1/2 M + K) r = 0.
        let bs = scaled_square_boundary(3);
        let (kmat, mmat) = assemble_k_and_m(&bs, 1.0, 1.0);
        for r in rigid_trace_vectors(&bs) {
            let mut res = kmat.matvec(&r);
            let mr = mmat.matvec(&r);
            for (a, b) in res.iter_mut().zip(mr.iter()) {
                *a += 0.5 * b;
            }
            let max = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max <= 1e-8, "(M/2 + K) r residual {max}");
        }
    }

    #[test]
    fn rigid_motion_residual_decreases_under_refinement() {
        let mut worst = Vec::new();
        for levels in [2usize, 3] {
            let bs = scaled_square_boundary(levels);
            let (kmat, mmat) = assemble_k_and_m(&bs, 1.0, 1.0);
            let mut level_worst = 0.0f64;
            for r in rigid_trace_vectors(&bs) {
                let mut res = kmat.matvec(&r);
                let mr = mmat.matvec(&r);
                for (a, b) in res.iter_mut().zip(mr.iter()) {
                    *a += 0.5 * b;
                }
                level_worst = level_worst.max(res.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            }
            worst.push(level_worst);
        }
        assert!(
            worst[1] <= worst[0] || worst[1] <= 1e-12,
            "residuals {worst:?}"
        );
    }

    #[test]
    fn hypersingular_kernel_and_semidefiniteness() {
        let bs = scaled_square_boundary(3);
        let lm = assemble_layer_matrices(&bs, 1.0, 1.0).unwrap();
        assert!(!lm.ellipticity_warning);
        assert!(lm.w.asymmetry() <= 1e-14);
        for r in rigid_trace_vectors(&bs) {
            let wr = lm.w.matvec(&r);
            let max = wr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max <= 1e-10, "W r residual {max}");
        }
        let eig = sym_eigen(&lm.w).unwrap();
        let scale = eig.values.last().unwrap();
        assert!(
            eig.values[0] >= -1e-10 * scale.max(1.0),
            "W min eigenvalue {}",
            eig.values[0]
        );
        // quadratic form nonnegative on random vectors
        let mut rng = Rng::new(12);
        for _ in 0..100 {
            let x: Vec<f64> = (0..lm.w.rows).map(|_| rng.symmetric()).collect();
            let q = crate::linalg::dot(&lm.w.matvec(&x), &x);
            assert!(q >= -1e-10 * norm2(&x) * norm2(&x));
        }
    }

    #[test]
    fn calderon_composite_approaches_direct_w() {
        // The Calderon composite is a consistent but inexact realization of
        // the hypersingular matrix. Quadratic forms on a fixed smooth trace
        // field must approach the direct (regularized) assembly under
        // refinement.
        let smooth = |p: [f64; 2]| {
            [
                (7.0 * p[0]).sin() * (5.0 * p[1] + 1.0).cos(),
                p[0] * p[0] - 0.3 * p[1],
            ]
        };
        let mut diffs = Vec::new();
        for levels in [2usize, 3] {
            let bs = scaled_square_boundary(levels);
            let v = assemble_v(&bs, 1.0, 1.0);
            let (kmat, mmat) = assemble_k_and_m(&bs, 1.0, 1.0);
            let composite = assemble_w_calderon(&v, &kmat, &mmat).unwrap();
            let direct = assemble_w(&bs, 1.0, 1.0);
            let u = bs.interpolate_trace(&smooth);
            let qc = crate::linalg::dot(&composite.matvec(&u), &u);
            let qd = crate::linalg::dot(&direct.matvec(&u), &u);
            diffs.push((qc - qd).abs() / qd.abs());
        }
        assert!(
            diffs[1] < diffs[0] && diffs[1] < 0.05,
            "composite should approach the direct assembly: {diffs:?}"
        );
    }

    #[test]
    fn p1_tested_operators_are_consistent() {
        let bs = scaled_square_boundary(2);
        let ops = assemble_p1_tested(&bs, 1.0, 1.0);
        // P1 mass total = boundary length per component
        let perimeter: f64 = bs.edges.iter().map(|e| e.geom.len).sum();
        for a in 0..2 {
            let mut total = 0.0;
            for i in 0..bs.node_count() {
                for j in 0..bs.node_count() {
                    total += ops.m_p1[(2 * i + a, 2 * j + a)];
                }
            }
            assert!((total - perimeter).abs() < 1e-12);
        }
        // (1/2 M_p1 + K_p1) r = 0 for rigid traces
        for r in rigid_trace_vectors(&bs) {
            let mut res = ops.k_p1.matvec(&r);
            let mr = ops.m_p1.matvec(&r);
            for (x, y) in res.iter_mut().zip(mr.iter()) {
                *x += 0.5 * y;
            }
            let max = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max <= 1e-8, "(M/2 + K) P1-tested residual {max}");
        }
    }

    #[test]
    fn projected_rigid_motions() {
        let bs = scaled_square_boundary(0);
        let xi = project_rbm(&bs);
        for (e, edge) in bs.edges.iter().enumerate() {
            assert_eq!(xi[0][2 * e], 1.0);
            assert_eq!(xi[0][2 * e + 1], 0.0);
            let s = edge.geom.midpoint();
            assert!((xi[2][2 * e] + s[1]).abs() < 1e-15);
            assert!((xi[2][2 * e + 1] - s[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn projected_rotation_on_reference_edge() {
        // edge from (0,0) to (1,0): midpoint (1/2, 0), projected rotation (0, 1/2)
        let edge = EdgeGeom::new([0.0, 0.0], [1.0, 0.0]);
        let s = edge.midpoint();
        assert_eq!([-s[1], s[0]], [0.0, 0.5]);
    }
}
