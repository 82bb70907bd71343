//! Solvers for the coupled block systems: a dense direct solve for linear
//! materials, damped Picard (Zarantonello) iteration for the strongly
//! monotone stabilized operator, and Newton with exact tangents.
//!
//! Everything is dense: the meshes this crate targets stay at desk scale,
//! where LU with partial pivoting is faster and more predictable than any
//! iterative scheme, and keeps the structural certificates free of
//! iterative-solver confounders.

use alloc::vec;
use alloc::vec::Vec;

use crate::coupling::{CoupledSolution, CoupledSystem, CouplingMethod};
use crate::linalg::{axpy, dot, norm2, LinalgError, Lu};
use crate::material::MaterialLaw;
use crate::num;
use crate::num::Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveMethod {
    /// One LU solve of the (affine) system; linear materials only.
    Direct,
    /// Damped successive substitution x <- x - theta J0^{-1}(R(x) - b) with
    /// the tangent at the initial iterate factored once: the Zarantonello
    /// iteration applied to the preconditioned operator, whose monotonicity
    /// and Lipschitz constants are both near one for mildly nonlinear
    /// material laws. Requires the strongly monotone (stabilized) operator;
    /// `None` samples the damping theta = c/L^2 from local quotients.
    Picard { theta: Option<f64> },
    /// Newton iteration with exact tangent and full steps.
    Newton,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub method: SolveMethod,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::Newton,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// Convergence record of one solve.
#[derive(Clone, Debug)]
pub struct SolveTrace {
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Infinity-norm condition estimate of the last factored matrix.
    pub cond_estimate: f64,
    /// Damping actually used by Picard.
    pub theta: f64,
}

#[derive(Debug)]
pub enum SolveError {
    Linalg(LinalgError),
    NotConverged(SolveTrace),
    PicardNeedsStabilization,
    DirectNeedsLinearMaterial,
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::Linalg(e) => write!(f, "linear algebra failure: {e}"),
            SolveError::NotConverged(t) => write!(
                f,
                "no convergence within {} iterations (residual {:.3e})",
                t.iterations,
                t.residual_norms.last().copied().unwrap_or(f64::NAN)
            ),
            SolveError::PicardNeedsStabilization => {
                write!(f, "Picard iteration requires the stabilized system")
            }
            SolveError::DirectNeedsLinearMaterial => {
                write!(f, "direct solve requires a linear material law")
            }
        }
    }
}

impl From<LinalgError> for SolveError {
    fn from(e: LinalgError) -> Self {
        SolveError::Linalg(e)
    }
}

pub fn solve(sys: &CoupledSystem, opts: &SolveOptions) -> Result<(CoupledSolution, SolveTrace), SolveError> {
    match opts.method {
        SolveMethod::Direct => solve_direct(sys, opts),
        SolveMethod::Newton => solve_newton(sys, opts),
        SolveMethod::Picard { theta } => solve_picard(sys, opts, theta),
    }
}

fn is_linear(law: &MaterialLaw) -> bool {
    matches!(law, MaterialLaw::LinearLame { .. })
}

fn solve_direct(
    sys: &CoupledSystem,
    opts: &SolveOptions,
) -> Result<(CoupledSolution, SolveTrace), SolveError> {
    if !is_linear(&sys.material) {
        return Err(SolveError::DirectNeedsLinearMaterial);
    }
    let n = sys.dim();
    let a = sys.tangent(&vec![0.0; n]);
    let lu = Lu::factor(&a)?;
    let b = sys.rhs_effective();
    let x = lu.solve(&b);
    let res = norm2(&sys.system_residual(&x));
    let trace = SolveTrace {
        residual_norms: vec![res],
        iterations: 1,
        converged: res <= opts.tol * (1.0 + norm2(&b)),
        cond_estimate: lu.cond_estimate(&a),
        theta: 1.0,
    };
    Ok((sys.split(&x), trace))
}

fn solve_newton(
    sys: &CoupledSystem,
    opts: &SolveOptions,
) -> Result<(CoupledSolution, SolveTrace), SolveError> {
    let n = sys.dim();
    let mut x = vec![0.0; n];
    let mut norms = Vec::new();
    let mut cond = 0.0;
    for it in 0..opts.max_iter {
        let r = sys.system_residual(&x);
        let rn = norm2(&r);
        norms.push(rn);
        if rn <= opts.tol {
            return Ok((
                sys.split(&x),
                SolveTrace {
                    residual_norms: norms,
                    iterations: it,
                    converged: true,
                    cond_estimate: cond,
                    theta: 1.0,
                },
            ));
        }
        let a = sys.tangent(&x);
        let lu = Lu::factor(&a)?;
        cond = lu.cond_estimate(&a);
        let dx = lu.solve(&r);
        axpy(&mut x, -1.0, &dx);
    }
    let r = norm2(&sys.system_residual(&x));
    norms.push(r);
    let trace = SolveTrace {
        residual_norms: norms,
        iterations: opts.max_iter,
        converged: r <= opts.tol,
        cond_estimate: cond,
        theta: 1.0,
    };
    if trace.converged {
        Ok((sys.split(&x), trace))
    } else {
        Err(SolveError::NotConverged(trace))
    }
}

/// Samples monotonicity and Lipschitz quotients of the preconditioned
/// operator Phi(x) = J0^{-1} R(x) around a base point, in the energy inner
/// product of P = sym(J0):
///   c = min <dPhi, dx>_P / |dx|_P^2,   L = max |dPhi|_P / |dx|_P.
/// The damped substitution x <- x - theta Phi-residual contracts in the
/// P-norm for theta in (0, 2c/L^2); theta = c/L^2 is the classical choice
/// and both constants are near one for mildly nonlinear laws.
fn sampled_constants(
    sys: &CoupledSystem,
    p: &crate::linalg::Mat,
    lu_j0: &Lu,
    base: &[f64],
    scale: f64,
    samples: usize,
) -> (f64, f64) {
    let n = sys.dim();
    let mut rng = Rng::new(0x5eed);
    let mut c_mon = f64::INFINITY;
    let mut c_lip = 0.0f64;
    for _ in 0..samples {
        let mut x = base.to_vec();
        let mut y = base.to_vec();
        for i in 0..n {
            x[i] += scale * rng.symmetric();
            y[i] += scale * rng.symmetric();
        }
        let dx: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let dr: Vec<f64> = sys
            .residual(&x)
            .iter()
            .zip(sys.residual(&y).iter())
            .map(|(a, b)| a - b)
            .collect();
        let dphi = lu_j0.solve(&dr);
        let p_energy = dot(&p.matvec(&dx), &dx);
        if p_energy <= 1e-28 {
            continue;
        }
        c_mon = num::min(c_mon, dot(&p.matvec(&dphi), &dx) / p_energy);
        c_lip = num::max(
            c_lip,
            num::sqrt(num::max(dot(&p.matvec(&dphi), &dphi), 0.0) / p_energy),
        );
    }
    (c_mon, c_lip)
}

fn solve_picard(
    sys: &CoupledSystem,
    opts: &SolveOptions,
    theta_opt: Option<f64>,
) -> Result<(CoupledSolution, SolveTrace), SolveError> {
    if sys.stabilization.is_none() {
        return Err(SolveError::PicardNeedsStabilization);
    }
    let n = sys.dim();
    let b = sys.rhs_effective();
    // frozen linearization at the initial iterate, factored once
    let j0 = sys.tangent(&vec![0.0; n]);
    let lu = Lu::factor(&j0)?;
    let p = j0.symmetric_part();
    let theta = match theta_opt {
        Some(t) => t,
        None => {
            let scale = 0.1 + norm2(&lu.solve(&b));
            let (c_mon, c_lip) = sampled_constants(sys, &p, &lu, &vec![0.0; n], 0.05 * scale, 24);
            let t = c_mon / (c_lip * c_lip);
            num::min(num::max(t, 1e-3), 1.0)
        }
    };
    let mut x = vec![0.0; n];
    let mut norms = Vec::new();
    for it in 0..opts.max_iter {
        let r = sys.system_residual(&x);
        let rn = norm2(&r);
        norms.push(rn);
        if rn <= opts.tol {
            return Ok((
                sys.split(&x),
                SolveTrace {
                    residual_norms: norms,
                    iterations: it,
                    converged: true,
                    cond_estimate: lu.cond_estimate(&j0),
                    theta,
                },
            ));
        }
        let step = lu.solve(&r);
        axpy(&mut x, -theta, &step);
    }
    let rn = norm2(&sys.system_residual(&x));
    norms.push(rn);
    let trace = SolveTrace {
        residual_norms: norms,
        iterations: opts.max_iter,
        converged: rn <= opts.tol,
        cond_estimate: lu.cond_estimate(&j0),
        theta,
    };
    if trace.converged {
        Ok((sys.split(&x), trace))
    } else {
        Err(SolveError::NotConverged(trace))
    }
}

/// Relative block-vector distance between two solutions.
pub fn solution_distance(a: &CoupledSolution, b: &CoupledSolution) -> f64 {
    let mut num_acc = 0.0;
    let mut den_acc = 0.0;
    for (x, y) in a
        .u
        .values
        .iter()
        .chain(a.phi.values.iter())
        .zip(b.u.values.iter().chain(b.phi.values.iter()))
    {
        num_acc += (x - y) * (x - y);
        den_acc += y * y;
    }
    num::sqrt(num_acc) / num::max(num::sqrt(den_acc), 1e-300)
}

/// Checks whether a coupling method/material pair satisfies the contraction
/// prerequisites of the one-equation couplings (informational only; the
/// symmetric coupling is unconditional).
pub fn one_equation_condition_met(method: CouplingMethod, c_a: f64, c_k: f64, lambda_ext: f64, mu_ext: f64) -> bool {
    match method {
        CouplingMethod::Symmetric => true,
        _ => 2.0 * c_a > c_k * (3.0 * lambda_ext + 2.0 * mu_ext),
    }
}
