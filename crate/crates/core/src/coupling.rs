//! The three coupled formulations linking the interior finite element
//! problem to the exterior boundary integral operators: the symmetric
//! coupling (all four layer operators), the Johnson-Nedelec one-equation
//! coupling (V and K only), and the Bielak-MacCamy one-equation coupling
//! (V and the adjoint K'). Adjoint actions are realized by transposition
//! of the assembled blocks, which is exact at the Galerkin level.
//!
//! Block layout of the coupled vector x = (u, phi): the displacement
//! coefficients (two per mesh node) followed by the P0 boundary density
//! coefficients (two per boundary edge).
//!
//! None of the formulations is elliptic: the block quadratic form
//! annihilates rigid-body vectors (r, 0). An optional rank-3 stabilization
//! built from the second (boundary) equation restores ellipticity without
//! changing the solution; it is off by default and exists to certify that
//! equivalence and to precondition the nonlinear iterations.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::bem::{
    assemble_layer_matrices, assemble_p1_tested, project_rbm, rigid_trace_vectors, BemError,
    BoundarySpace,
};
use crate::fem::{CoefVector, FemSpace};
use crate::linalg::{dot, Mat};
use crate::material::MaterialLaw;
use crate::mesh::Point2;

/// Vector field callable.
pub type Field = Box<dyn Fn(Point2) -> [f64; 2]>;
/// Field that may depend on the outward normal (traction-type data).
pub type NormalField = Box<dyn Fn(Point2, [f64; 2]) -> [f64; 2]>;

/// Data of the transmission problem: interior volume force, jump of the
/// displacement and of the traction across the coupling boundary, and the
/// exterior Lame constants.
pub struct ProblemData {
    pub f: Field,
    pub u0: Field,
    pub phi0: NormalField,
    pub lambda_ext: f64,
    pub mu_ext: f64,
    pub material: MaterialLaw,
}

impl ProblemData {
    /// The two compatibility residuals <f, e_j>_Omega + <phi0, e_j>_Gamma.
    /// In 2D the transmission problem is uniquely solvable when both vanish.
    pub fn compatibility_residuals(&self, sp: &FemSpace, bs: &BoundarySpace) -> [f64; 2] {
        let load = sp.assemble_load(&*self.f);
        let mut res = [0.0; 2];
        for c in 0..2 {
            res[c] = load.values.iter().skip(c).step_by(2).sum();
        }
        // boundary term with the edge-midpoint rule (exact for P0 data)
        for e in &bs.edges {
            let v = (self.phi0)(e.geom.midpoint(), e.geom.normal);
            res[0] += e.geom.len * v[0];
            res[1] += e.geom.len * v[1];
        }
        res
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingMethod {
    Symmetric,
    JohnsonNedelec,
    BielakMacCamy,
}

/// Choice of the stabilization functionals' test densities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum XiChoice {
    /// L2 projections of the rigid body motions onto the P0 density space.
    #[default]
    P0Projected,
    /// The rigid body motion traces themselves as affine test densities.
    P1Rigid,
}

#[derive(Debug)]
pub enum CouplingError {
    Bem(BemError),
    DependentXi,
    SpacesMismatch,
}

impl core::fmt::Display for CouplingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CouplingError::Bem(e) => write!(f, "boundary operator assembly failed: {e}"),
            CouplingError::DependentXi => {
                write!(f, "stabilization densities are linearly dependent")
            }
            CouplingError::SpacesMismatch => write!(f, "trace spaces are incompatible"),
        }
    }
}

impl From<BemError> for CouplingError {
    fn from(e: BemError) -> Self {
        CouplingError::Bem(e)
    }
}

/// Rank-D stabilization stored in factored form: the residual gains
/// G^T (G x - s), the right-hand side is realized through s, and the
/// tangent gains G^T G. Never folded into the unstabilized blocks so the
/// equivalence of the two formulations can be tested on genuinely
/// different systems.
pub struct Stabilization {
    /// D x N functional matrix; row j is g_j in block coordinates.
    pub g: Mat,
    /// Data values s_j = g_j evaluated on the boundary datum.
    pub s: Vec<f64>,
}

/// One assembled coupling formulation.
pub struct CoupledSystem {
    pub method: CouplingMethod,
    pub space: FemSpace,
    pub boundary: BoundarySpace,
    pub layers: crate::bem::LayerMatrices,
    pub material: MaterialLaw,
    pub rhs: Vec<f64>,
    pub stabilization: Option<Stabilization>,
    /// global dof indices of the trace dofs, cached
    trace_map: Vec<usize>,
}

/// Solution coefficients: interior displacement and boundary density.
#[derive(Clone, Debug)]
pub struct CoupledSolution {
    pub u: CoefVector,
    pub phi: CoefVector,
}

impl CoupledSystem {
    pub fn n_u(&self) -> usize {
        self.space.dof_count()
    }

    pub fn n_phi(&self) -> usize {
        self.boundary.density_dof_count()
    }

    pub fn dim(&self) -> usize {
        self.n_u() + self.n_phi()
    }

    pub fn split(&self, x: &[f64]) -> CoupledSolution {
        CoupledSolution {
            u: CoefVector {
                values: x[..self.n_u()].to_vec(),
            },
            phi: CoefVector {
                values: x[self.n_u()..].to_vec(),
            },
        }
    }

    /// Trace part of the u-block, ordered like the boundary space dofs.
    fn trace_of(&self, u: &[f64]) -> Vec<f64> {
        self.trace_map.iter().map(|&g| u[g]).collect()
    }

    fn scatter_trace(&self, t: &[f64], out: &mut [f64]) {
        for (k, &g) in self.trace_map.iter().enumerate() {
            out[g] += t[k];
        }
    }

    /// Residual of the unstabilized formulation, R(x); the system solved is
    /// R(x) = rhs (plus the stabilization terms when attached).
    pub fn residual_raw(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let (xu, xphi) = x.split_at(self.n_u());
        let u = CoefVector {
            values: xu.to_vec(),
        };
        let mut out = vec![0.0; self.dim()];
        // interior nonlinear form into u-rows
        let fem_res = self.space.assemble_nonlinear_form(&self.material, &u);
        out[..self.n_u()].copy_from_slice(&fem_res.values);

        let tr = self.trace_of(xu);
        let lm = &self.layers;
        let half_m_minus_k = |v: &[f64]| -> Vec<f64> {
            let mut r = lm.m.matvec(v);
            let kv = lm.k.matvec(v);
            for (a, b) in r.iter_mut().zip(kv.iter()) {
                *a = 0.5 * *a - b;
            }
            r
        };
        match self.method {
            CouplingMethod::Symmetric => {
                // u-rows: + W u + (K' - 1/2) phi = W u + (K - 1/2 M)^T-action
                let wu = lm.w.matvec(&tr);
                let mut urows = wu;
                let mut kphi = lm.k.matvec_t(xphi); // (K^T phi) on trace dofs
                let mphi = lm.m.matvec_t(xphi);
                for (a, b) in kphi.iter_mut().zip(mphi.iter()) {
                    *a -= 0.5 * b;
                }
                for (a, b) in urows.iter_mut().zip(kphi.iter()) {
                    *a += b;
                }
                self.scatter_trace(&urows, &mut out[..]);
                // psi-rows: (1/2 M - K) u + V phi
                let mut psi = half_m_minus_k(&tr);
                let vphi = lm.v.matvec(xphi);
                for (a, b) in psi.iter_mut().zip(vphi.iter()) {
                    *a += b;
                }
                out[self.n_u()..].copy_from_slice(&psi);
            }
            CouplingMethod::JohnsonNedelec => {
                // u-rows: - <phi, v> = - M^T phi
                let mphi = lm.m.matvec_t(xphi);
                let mut urows = mphi;
                for a in urows.iter_mut() {
                    *a = -*a;
                }
                self.scatter_trace(&urows, &mut out[..]);
                let mut psi = half_m_minus_k(&tr);
                let vphi = lm.v.matvec(xphi);
                for (a, b) in psi.iter_mut().zip(vphi.iter()) {
                    *a += b;
                }
                out[self.n_u()..].copy_from_slice(&psi);
            }
            CouplingMethod::BielakMacCamy => {
                // u-rows: <(1/2 - K') phi, v> = (1/2 M - K)^T phi
                let mut kphi = lm.k.matvec_t(xphi);
                let mphi = lm.m.matvec_t(xphi);
                for (a, b) in kphi.iter_mut().zip(mphi.iter()) {
                    *a = 0.5 * b - *a;
                }
                self.scatter_trace(&kphi, &mut out[..]);
                // psi-rows: V phi - M u
                let mut psi = lm.v.matvec(xphi);
                let mu_ = lm.m.matvec(&tr);
                for (a, b) in psi.iter_mut().zip(mu_.iter()) {
                    *a -= b;
                }
                out[self.n_u()..].copy_from_slice(&psi);
            }
        }
        out
    }

    /// Residual including the stabilization terms: R(x) + G^T (G x) - rhs_eff
    /// is what the solver drives to zero; this returns R~(x) so that the
    /// solved equation reads residual(x) = rhs_effective().
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.residual_raw(x);
        if let Some(st) = &self.stabilization {
            let gx = st.g.matvec(x);
            let correction = st.g.matvec_t(&gx);
            for (a, b) in r.iter_mut().zip(correction.iter()) {
                *a += b;
            }
        }
        r
    }

    /// Effective right-hand side (gains G^T s when stabilized).
    pub fn rhs_effective(&self) -> Vec<f64> {
        let mut rhs = self.rhs.clone();
        if let Some(st) = &self.stabilization {
            let gs = st.g.matvec_t(&st.s);
            for (a, b) in rhs.iter_mut().zip(gs.iter()) {
                *a += b;
            }
        }
        rhs
    }

    /// Residual of the solved system: residual(x) - rhs_effective().
    pub fn system_residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.residual(x);
        for (a, b) in r.iter_mut().zip(self.rhs_effective().iter()) {
            *a -= b;
        }
        r
    }

    /// Tangent (Jacobian) of the residual at x, including stabilization.
    pub fn tangent(&self, x: &[f64]) -> Mat {
        let mut a = self.tangent_raw(x);
        if let Some(st) = &self.stabilization {
            let gtg = st.g.transpose().matmul(&st.g);
            a.add_scaled(&gtg, 1.0);
        }
        a
    }

    /// Tangent of the unstabilized formulation.
    pub fn tangent_raw(&self, x: &[f64]) -> Mat {
        let (xu, _) = x.split_at(self.n_u());
        let u = CoefVector {
            values: xu.to_vec(),
        };
        let n = self.dim();
        let nu = self.n_u();
        let mut a = Mat::zeros(n, n);
        let fem_tan = self.space.assemble_tangent_matrix(&self.material, &u);
        for i in 0..nu {
            for j in 0..nu {
                let v = fem_tan[(i, j)];
                if v != 0.0 {
                    a[(i, j)] = v;
                }
            }
        }
        let lm = &self.layers;
        let tm = &self.trace_map;
        let nt = tm.len();
        match self.method {
            CouplingMethod::Symmetric => {
                for i in 0..nt {
                    for j in 0..nt {
                        a[(tm[i], tm[j])] += lm.w[(i, j)];
                    }
                }
                for p in 0..self.n_phi() {
                    for i in 0..nt {
                        // (K - 1/2 M)^T phi into u-rows
                        a[(tm[i], nu + p)] += lm.k[(p, i)] - 0.5 * lm.m[(p, i)];
                        // (1/2 M - K) u into psi-rows
                        a[(nu + p, tm[i])] += 0.5 * lm.m[(p, i)] - lm.k[(p, i)];
                    }
                }
                for p in 0..self.n_phi() {
                    for q in 0..self.n_phi() {
                        a[(nu + p, nu + q)] += lm.v[(p, q)];
                    }
                }
            }
            CouplingMethod::JohnsonNedelec => {
                for p in 0..self.n_phi() {
                    for i in 0..nt {
                        a[(tm[i], nu + p)] -= lm.m[(p, i)];
                        a[(nu + p, tm[i])] += 0.5 * lm.m[(p, i)] - lm.k[(p, i)];
                    }
                }
                for p in 0..self.n_phi() {
                    for q in 0..self.n_phi() {
                        a[(nu + p, nu + q)] += lm.v[(p, q)];
                    }
                }
            }
            CouplingMethod::BielakMacCamy => {
                for p in 0..self.n_phi() {
                    for i in 0..nt {
                        a[(tm[i], nu + p)] += 0.5 * lm.m[(p, i)] - lm.k[(p, i)];
                        a[(nu + p, tm[i])] -= lm.m[(p, i)];
                    }
                }
                for p in 0..self.n_phi() {
                    for q in 0..self.n_phi() {
                        a[(nu + p, nu + q)] += lm.v[(p, q)];
                    }
                }
            }
        }
        a
    }

    /// Energy norm squared |||(u, phi)|||^2 = ||eps(u)||^2 + <phi, V phi>
    /// + sum_j g_j(u, phi)^2. Requires the stabilization functionals.
    pub fn energy_norm_sq(&self, x: &[f64]) -> f64 {
        let (xu, xphi) = x.split_at(self.n_u());
        let u = CoefVector {
            values: xu.to_vec(),
        };
        let strain = {
            let s = self.space.h1_seminorm(&u);
            s * s
        };
        let vphi = dot(&self.layers.v.matvec(xphi), xphi);
        let g_part = match &self.stabilization {
            Some(st) => {
                let gx = st.g.matvec(x);
                dot(&gx, &gx)
            }
            None => 0.0,
        };
        strain + vphi + g_part
    }

    /// Gram matrix of the energy norm on the block space.
    pub fn energy_gram(&self) -> Mat {
        let n = self.dim();
        let nu = self.n_u();
        let mut gram = Mat::zeros(n, n);
        let s = self.space.assemble_strain_gram();
        for i in 0..nu {
            for j in 0..nu {
                gram[(i, j)] = s[(i, j)];
            }
        }
        for p in 0..self.n_phi() {
            for q in 0..self.n_phi() {
                gram[(nu + p, nu + q)] = self.layers.v[(p, q)];
            }
        }
        if let Some(st) = &self.stabilization {
            let gtg = st.g.transpose().matmul(&st.g);
            gram.add_scaled(&gtg, 1.0);
        }
        gram
    }
}

/// The L2 projections xi_j of the rigid body motions onto the density
/// space, as block coordinates are needed by `add_stabilization`.
pub fn rbm_density_projections(bs: &BoundarySpace) -> [Vec<f64>; 3] {
    project_rbm(bs)
}

/// Assembles the chosen coupling formulation.
pub fn assemble_system(
    method: CouplingMethod,
    sp: &FemSpace,
    bs: &BoundarySpace,
    data: &ProblemData,
    stabilize: bool,
    xi: XiChoice,
) -> Result<CoupledSystem, CouplingError> {
    // trace conformity: boundary node order must match between spaces
    if sp.boundary_nodes != bs.node_order {
        return Err(CouplingError::SpacesMismatch);
    }
    let layers = assemble_layer_matrices(bs, data.lambda_ext, data.mu_ext)?;
    let trace_map = sp.trace_map();
    let mut sys = CoupledSystem {
        method,
        space: sp.clone(),
        boundary: bs.clone(),
        layers,
        material: data.material,
        rhs: Vec::new(),
        stabilization: None,
        trace_map,
    };
    sys.rhs = assemble_rhs(&sys, data);
    if stabilize {
        add_stabilization(&mut sys, data, xi)?;
    }
    Ok(sys)
}

/// Method-specific right-hand side functional in block coordinates.
/// The displacement jump u0 enters through its P1 trace interpolant, the
/// traction jump phi0 through its P0 midpoint interpolant.
pub fn assemble_rhs(sys: &CoupledSystem, data: &ProblemData) -> Vec<f64> {
    let sp = &sys.space;
    let bs = &sys.boundary;
    let lm = &sys.layers;
    let nu = sys.n_u();
    let mut rhs = vec![0.0; sys.dim()];

    // <f, v> over the domain
    let load = sp.assemble_load(&*data.f);
    rhs[..nu].copy_from_slice(&load.values);

    // <phi0, v> over the boundary: P0 interpolant against P1 test traces
    let phi0 = bs.interpolate_density_with_normal(&*data.phi0);
    let mphi0 = lm.m.matvec_t(&phi0);
    sys.scatter_trace(&mphi0, &mut rhs[..]);

    let u0 = bs.interpolate_trace(&*data.u0);
    match sys.method {
        CouplingMethod::Symmetric => {
            // + <W u0, v>
            let wu0 = lm.w.matvec(&u0);
            sys.scatter_trace(&wu0, &mut rhs[..]);
            // psi-rows: <psi, (1/2 - K) u0>
            let mut psi = lm.m.matvec(&u0);
            let ku0 = lm.k.matvec(&u0);
            for (a, b) in psi.iter_mut().zip(ku0.iter()) {
                *a = 0.5 * *a - b;
            }
            rhs[nu..].copy_from_slice(&psi);
        }
        CouplingMethod::JohnsonNedelec => {
            let mut psi = lm.m.matvec(&u0);
            let ku0 = lm.k.matvec(&u0);
            for (a, b) in psi.iter_mut().zip(ku0.iter()) {
                *a = 0.5 * *a - b;
            }
            rhs[nu..].copy_from_slice(&psi);
        }
        CouplingMethod::BielakMacCamy => {
            // psi-rows: -<psi, u0>
            let mu0 = lm.m.matvec(&u0);
            for (slot, v) in rhs[nu..].iter_mut().zip(mu0.iter()) {
                *slot = -v;
            }
        }
    }
    rhs
}

/// Attaches the rank-3 stabilization to an assembled system. The
/// functionals are
///   g_j(v, psi) = <xi_j, (1/2 - K) v + V psi>   (symmetric / JN)
///   g_j(v, psi) = <xi_j, V psi - v>             (Bielak-MacCamy)
/// and the data values
///   s_j = <xi_j, (1/2 - K) u0>   resp.   s_j = -<xi_j, u0>.
pub fn add_stabilization(
    sys: &mut CoupledSystem,
    data: &ProblemData,
    xi: XiChoice,
) -> Result<(), CouplingError> {
    let bs = &sys.boundary;
    let lm = &sys.layers;
    let nu = sys.n_u();
    let n = sys.dim();
    let u0 = bs.interpolate_trace(&*data.u0);

    let mut g = Mat::zeros(3, n);
    let mut s = vec![0.0; 3];

    match xi {
        XiChoice::P0Projected => {
            let xis = project_rbm(bs);
            // Gram regularity check in L2(Gamma)
            let mut gram = Mat::zeros(3, 3);
            for (i, xi_i) in xis.iter().enumerate() {
                for (j, xi_j) in xis.iter().enumerate() {
                    let mut acc = 0.0;
                    for (e, edge) in bs.edges.iter().enumerate() {
                        acc += edge.geom.len
                            * (xi_i[2 * e] * xi_j[2 * e] + xi_i[2 * e + 1] * xi_j[2 * e + 1]);
                    }
                    gram[(i, j)] = acc;
                }
            }
            let sv = crate::linalg::singular_values(&gram);
            if sv[2] <= 1e-12 * sv[0] {
                return Err(CouplingError::DependentXi);
            }
            for (j, xi_j) in xis.iter().enumerate() {
                match sys.method {
                    CouplingMethod::Symmetric | CouplingMethod::JohnsonNedelec => {
                        // row over u-dofs: xi^T (1/2 M - K) on trace dofs
                        let mut row_u = lm.m.matvec_t(xi_j);
                        let krow = lm.k.matvec_t(xi_j);
                        for (a, b) in row_u.iter_mut().zip(krow.iter()) {
                            *a = 0.5 * *a - b;
                        }
                        for (k, &gdof) in sys.trace_map.iter().enumerate() {
                            g[(j, gdof)] += row_u[k];
                        }
                        // row over phi-dofs: xi^T V
                        let vrow = lm.v.matvec(xi_j);
                        for (p, v) in vrow.iter().enumerate() {
                            g[(j, nu + p)] += v;
                        }
                        // data value
                        let mut mu0 = lm.m.matvec(&u0);
                        let ku0 = lm.k.matvec(&u0);
                        for (a, b) in mu0.iter_mut().zip(ku0.iter()) {
                            *a = 0.5 * *a - b;
                        }
                        s[j] = dot(xi_j, &mu0);
                    }
                    CouplingMethod::BielakMacCamy => {
                        // g_j(v, psi) = <xi_j, V psi - v>
                        let mrow = lm.m.matvec_t(xi_j);
                        for (k, &gdof) in sys.trace_map.iter().enumerate() {
                            g[(j, gdof)] -= mrow[k];
                        }
                        let vrow = lm.v.matvec(xi_j);
                        for (p, v) in vrow.iter().enumerate() {
                            g[(j, nu + p)] += v;
                        }
                        s[j] = -dot(xi_j, &lm.m.matvec(&u0));
                    }
                }
            }
        }
        XiChoice::P1Rigid => {
            // xi = r directly: affine test densities, realized through the
            // P1-tested operator assemblies.
            let ops = assemble_p1_tested(bs, data.lambda_ext, data.mu_ext);
            let rs = rigid_trace_vectors(bs);
            for (j, r) in rs.iter().enumerate() {
                match sys.method {
                    CouplingMethod::Symmetric | CouplingMethod::JohnsonNedelec => {
                        // <r, (1/2 - K) v>: 1/2 M_p1 r - K_p1^T r over trace dofs
                        let mut row_u = ops.m_p1.matvec(r);
                        let krow = ops.k_p1.matvec_t(r);
                        for (a, b) in row_u.iter_mut().zip(krow.iter()) {
                            *a = 0.5 * *a - b;
                        }
                        for (k, &gdof) in sys.trace_map.iter().enumerate() {
                            g[(j, gdof)] += row_u[k];
                        }
                        // <r, V psi>: rows of V with affine test density
                        let vrow = ops.v_p1.matvec_t(r);
                        for (p, v) in vrow.iter().enumerate() {
                            g[(j, nu + p)] += v;
                        }
                        let mut val = dot(r, &ops.m_p1.matvec(&u0)) * 0.5;
                        val -= dot(r, &ops.k_p1.matvec(&u0));
                        s[j] = val;
                    }
                    CouplingMethod::BielakMacCamy => {
                        let mrow = ops.m_p1.matvec(r);
                        for (k, &gdof) in sys.trace_map.iter().enumerate() {
                            g[(j, gdof)] -= mrow[k];
                        }
                        let vrow = ops.v_p1.matvec_t(r);
                        for (p, v) in vrow.iter().enumerate() {
                            g[(j, nu + p)] += v;
                        }
                        s[j] = -dot(r, &ops.m_p1.matvec(&u0));
                    }
                }
            }
        }
    }

    sys.stabilization = Some(Stabilization { g, s });
    Ok(())
}

/// The functionals g_j evaluated at a block vector; zero when the system
/// carries no stabilization.
pub fn stabilization_values(sys: &CoupledSystem, x: &[f64]) -> Vec<f64> {
    match &sys.stabilization {
        Some(st) => st.g.matvec(x),
        None => vec![0.0; 3],
    }
}

/// Zero-data problem with the given material and exterior constants;
/// useful for the structural tests.
pub fn homogeneous_data(material: MaterialLaw, lambda_ext: f64, mu_ext: f64) -> ProblemData {
    ProblemData {
        f: Box::new(|_| [0.0, 0.0]),
        u0: Box::new(|_| [0.0, 0.0]),
        phi0: Box::new(|_, _| [0.0, 0.0]),
        lambda_ext,
        mu_ext,
        material,
    }
}
