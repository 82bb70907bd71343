//! Interior material laws: linear isotropic elasticity and the nonlinear
//! Hencky-von Mises law, together with their tangents and the strong
//! monotonicity / Lipschitz constants used by the solver and the coupling
//! condition checkers.
//!
//! Symmetric 2x2 tensors are stored as three components (xx, yy, xy) with
//! the off-diagonal kept once; the Frobenius product carries the factor 2
//! on the shear component.

use alloc::vec::Vec;

use crate::num;
use crate::num::Rng;

/// Symmetric 2x2 tensor, shear stored once.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymTensor2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2 {
        xx: 0.0,
        yy: 0.0,
        xy: 0.0,
    };

    pub fn new(xx: f64, yy: f64, xy: f64) -> Self {
        Self { xx, yy, xy }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 1.0, 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Deviatoric part e - (tr e / 2) I.
    pub fn dev(&self) -> SymTensor2 {
        let m = 0.5 * self.trace();
        SymTensor2::new(self.xx - m, self.yy - m, self.xy)
    }

    /// Frobenius product a : b with the shear counted twice.
    pub fn frob(&self, other: &SymTensor2) -> f64 {
        self.xx * other.xx + self.yy * other.yy + 2.0 * self.xy * other.xy
    }

    pub fn norm(&self) -> f64 {
        num::sqrt(self.frob(self))
    }

    pub fn scaled(&self, s: f64) -> SymTensor2 {
        SymTensor2::new(s * self.xx, s * self.yy, s * self.xy)
    }

    pub fn add(&self, other: &SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.xx + other.xx, self.yy + other.yy, self.xy + other.xy)
    }

    pub fn sub(&self, other: &SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.xx - other.xx, self.yy - other.yy, self.xy - other.xy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaterialError {
    NonPositiveModulus,
    ShearFunctionOutOfBounds,
}

impl core::fmt::Display for MaterialError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MaterialError::NonPositiveModulus => write!(f, "moduli must be positive"),
            MaterialError::ShearFunctionOutOfBounds => write!(
                f,
                "shear function violates alpha <= mu_tilde(x) <= K*d/2 - beta on the sample grid"
            ),
        }
    }
}

/// Scalar shear modulus function x -> mu_tilde(x) for the Hencky law,
/// with closed-form derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MuTilde {
    /// mu_tilde(x) = c.
    Const(f64),
    /// mu_tilde(x) = a + b * atan(x).
    Arctan { a: f64, b: f64 },
    /// mu_tilde(x) = a + b / (1 + x).
    InvShift { a: f64, b: f64 },
}

impl MuTilde {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            MuTilde::Const(c) => c,
            MuTilde::Arctan { a, b } => a + b * num::atan(x),
            MuTilde::InvShift { a, b } => a + b / (1.0 + x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            MuTilde::Const(_) => 0.0,
            MuTilde::Arctan { a: _, b } => b / (1.0 + x * x),
            MuTilde::InvShift { a: _, b } => -b / ((1.0 + x) * (1.0 + x)),
        }
    }

    /// sup over x >= 0 of mu_tilde(x).
    pub fn sup_value(&self) -> f64 {
        match *self {
            MuTilde::Const(c) => c,
            MuTilde::Arctan { a, b } => {
                if b >= 0.0 {
                    a + b * core::f64::consts::FRAC_PI_2
                } else {
                    a
                }
            }
            MuTilde::InvShift { a, b } => {
                if b >= 0.0 {
                    a + b
                } else {
                    a
                }
            }
        }
    }

    /// inf over x >= 0 of mu_tilde(x).
    pub fn inf_value(&self) -> f64 {
        match *self {
            MuTilde::Const(c) => c,
            MuTilde::Arctan { a, b } => {
                if b >= 0.0 {
                    a
                } else {
                    a + b * core::f64::consts::FRAC_PI_2
                }
            }
            MuTilde::InvShift { a, b } => {
                if b >= 0.0 {
                    a
                } else {
                    a + b
                }
            }
        }
    }

    /// inf over x >= 0 of d/dx [mu_tilde(x^?) ...] in the combination
    /// mu_tilde(x) + 2 x mu_tilde'(x), which controls the monotonicity of
    /// the deviatoric response.
    pub fn inf_radial_slope(&self) -> f64 {
        match *self {
            MuTilde::Const(c) => c,
            // atan: a + b(atan x + 2x/(1+x^2)) >= a for b >= 0.
            MuTilde::Arctan { a, b } => {
                if b >= 0.0 {
                    a
                } else {
                    a + b * (core::f64::consts::FRAC_PI_2 + 1.0)
                }
            }
            // a + b (1 - x)/(1 + x)^2 has its minimum at x = 3 for b > 0.
            MuTilde::InvShift { a, b } => {
                if b >= 0.0 {
                    a - b / 8.0
                } else {
                    a + b
                }
            }
        }
    }

    /// sup over x >= 0 of x |mu_tilde'(x)|.
    pub fn sup_slope_moment(&self) -> f64 {
        match *self {
            MuTilde::Const(_) => 0.0,
            MuTilde::Arctan { a: _, b } => num::abs(b) * 0.5,
            MuTilde::InvShift { a: _, b } => num::abs(b) * 0.25,
        }
    }
}

/// Interior stress-strain law A.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaterialLaw {
    /// sigma(e) = lambda tr(e) I + 2 mu e.
    LinearLame { lambda: f64, mu: f64 },
    /// Hencky-von Mises: sigma(e) = (K - mu_tilde(gamma)) tr(e) I
    /// + 2 mu_tilde(gamma) e with gamma = dev(e) : dev(e) in 2D.
    Hencky {
        bulk: f64,
        mu_tilde: MuTilde,
        alpha: f64,
        beta: f64,
    },
}

const DIM: f64 = 2.0;

impl MaterialLaw {
    pub fn linear(lambda: f64, mu: f64) -> Result<Self, MaterialError> {
        if lambda <= 0.0 || mu <= 0.0 {
            return Err(MaterialError::NonPositiveModulus);
        }
        Ok(MaterialLaw::LinearLame { lambda, mu })
    }

    /// Validates alpha <= mu_tilde <= K*d/2 - beta on a sample grid before
    /// accepting the law.
    pub fn hencky(bulk: f64, mu_tilde: MuTilde, alpha: f64, beta: f64) -> Result<Self, MaterialError> {
        if bulk <= 0.0 || alpha <= 0.0 || beta <= 0.0 {
            return Err(MaterialError::NonPositiveModulus);
        }
        let cap = bulk * DIM / 2.0 - beta;
        let mut x = 0.0;
        for k in 0..200 {
            let v = mu_tilde.value(x);
            if v < alpha - 1e-12 || v > cap + 1e-12 {
                return Err(MaterialError::ShearFunctionOutOfBounds);
            }
            x = 0.05 * num::powi(1.12, k);
        }
        if mu_tilde.inf_value() < alpha - 1e-12 || mu_tilde.sup_value() > cap + 1e-12 {
            return Err(MaterialError::ShearFunctionOutOfBounds);
        }
        Ok(MaterialLaw::Hencky {
            bulk,
            mu_tilde,
            alpha,
            beta,
        })
    }

    /// Evaluates the stress A(e).
    pub fn eval_stress(&self, e: &SymTensor2) -> SymTensor2 {
        match *self {
            MaterialLaw::LinearLame { lambda, mu } => {
                let t = lambda * e.trace();
                SymTensor2::new(t + 2.0 * mu * e.xx, t + 2.0 * mu * e.yy, 2.0 * mu * e.xy)
            }
            MaterialLaw::Hencky { bulk, mu_tilde, .. } => {
                let dev = e.dev();
                let gamma = dev.frob(&dev);
                let mt = mu_tilde.value(gamma);
                let t = (bulk - (2.0 / DIM) * mt) * e.trace();
                SymTensor2::new(t + 2.0 * mt * e.xx, t + 2.0 * mt * e.yy, 2.0 * mt * e.xy)
            }
        }
    }

    /// Directional derivative dA(e)[delta].
    pub fn eval_tangent(&self, e: &SymTensor2, delta: &SymTensor2) -> SymTensor2 {
        match *self {
            MaterialLaw::LinearLame { .. } => self.eval_stress(delta),
            MaterialLaw::Hencky { bulk, mu_tilde, .. } => {
                let dev_e = e.dev();
                let gamma = dev_e.frob(&dev_e);
                let mt = mu_tilde.value(gamma);
                let dmt = mu_tilde.derivative(gamma);
                let t = (bulk - mt) * delta.trace();
                let mut out =
                    SymTensor2::new(t + 2.0 * mt * delta.xx, t + 2.0 * mt * delta.yy, 2.0 * mt * delta.xy);
                // chain rule through gamma: d gamma = 2 dev(e) : dev(delta)
                let coupling = 4.0 * dmt * dev_e.frob(&delta.dev());
                out = out.add(&dev_e.scaled(coupling));
                out
            }
        }
    }

    /// The tangent as a 3x3 matrix acting on (xx, yy, xy) component vectors.
    pub fn tangent_matrix(&self, e: &SymTensor2) -> [[f64; 3]; 3] {
        let basis = [
            SymTensor2::new(1.0, 0.0, 0.0),
            SymTensor2::new(0.0, 1.0, 0.0),
            SymTensor2::new(0.0, 0.0, 1.0),
        ];
        let mut m = [[0.0; 3]; 3];
        for (j, b) in basis.iter().enumerate() {
            let col = self.eval_tangent(e, b);
            m[0][j] = col.xx;
            m[1][j] = col.yy;
            m[2][j] = col.xy;
        }
        m
    }

    /// Strong monotonicity and Lipschitz constants (c_A, L_A) of the
    /// pointwise tensor map.
    ///
    /// For the linear law these are the classical 2 mu and 6 lambda + 4 mu.
    /// For the Hencky law the bulk response is linear with modulus d*K and
    /// the deviatoric response is governed by mu_tilde and its radial slope;
    /// the returned bounds are conservative per-profile constants, audited
    /// by the sampled quotient tests.
    pub fn monotonicity_constants(&self) -> (f64, f64) {
        match *self {
            MaterialLaw::LinearLame { lambda, mu } => (2.0 * mu, 6.0 * lambda + 4.0 * mu),
            MaterialLaw::Hencky {
                bulk,
                mu_tilde,
                alpha,
                ..
            } => {
                let c_dev = 2.0 * num::min(alpha, mu_tilde.inf_radial_slope());
                let c_a = num::min(DIM * bulk, c_dev);
                let l_dev = 2.0 * (mu_tilde.sup_value() + 2.0 * mu_tilde.sup_slope_moment());
                let l_a = num::max(DIM * bulk, l_dev);
                (c_a, l_a)
            }
        }
    }

    /// Smallest sampled quotient <A(e1)-A(e2), e1-e2> / |e1-e2|^2 over
    /// `samples` random tensor pairs with entries in [-scale, scale].
    pub fn sampled_monotonicity(&self, samples: usize, scale: f64, seed: u64) -> f64 {
        let mut rng = Rng::new(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let e1 = random_tensor(&mut rng, scale);
            let e2 = random_tensor(&mut rng, scale);
            let d = e1.sub(&e2);
            let dn = d.frob(&d);
            if dn < 1e-24 {
                continue;
            }
            let ds = self.eval_stress(&e1).sub(&self.eval_stress(&e2));
            worst = num::min(worst, ds.frob(&d) / dn);
        }
        worst
    }

    /// Largest sampled quotient |A(e1)-A(e2)| / |e1-e2|.
    pub fn sampled_lipschitz(&self, samples: usize, scale: f64, seed: u64) -> f64 {
        let mut rng = Rng::new(seed);
        let mut worst = 0.0;
        for _ in 0..samples {
            let e1 = random_tensor(&mut rng, scale);
            let e2 = random_tensor(&mut rng, scale);
            let d = e1.sub(&e2);
            let dn = d.norm();
            if dn < 1e-12 {
                continue;
            }
            let ds = self.eval_stress(&e1).sub(&self.eval_stress(&e2));
            worst = num::max(worst, ds.norm() / dn);
        }
        worst
    }
}

fn random_tensor(rng: &mut Rng, scale: f64) -> SymTensor2 {
    SymTensor2::new(
        scale * rng.symmetric(),
        scale * rng.symmetric(),
        scale * rng.symmetric(),
    )
}

/// Collects sampled tensors where the audit failed; empty means the
/// constants passed on every sample.
pub fn audit_constants(law: &MaterialLaw, samples: usize, scale: f64, seed: u64) -> Vec<(f64, f64)> {
    let (c_a, l_a) = law.monotonicity_constants();
    let mut rng = Rng::new(seed);
    let mut failures = Vec::new();
    for _ in 0..samples {
        let e1 = random_tensor(&mut rng, scale);
        let e2 = random_tensor(&mut rng, scale);
        let d = e1.sub(&e2);
        let dn2 = d.frob(&d);
        if dn2 < 1e-24 {
            continue;
        }
        let ds = self_stress_diff(law, &e1, &e2);
        let mono = ds.frob(&d) / dn2;
        let lip = ds.norm() / num::sqrt(dn2);
        if mono < c_a - 1e-10 || lip > l_a + 1e-10 {
            failures.push((mono, lip));
        }
    }
    failures
}

fn self_stress_diff(law: &MaterialLaw, e1: &SymTensor2, e2: &SymTensor2) -> SymTensor2 {
    law.eval_stress(e1).sub(&law.eval_stress(e2))
}
