//! Built-in manufactured transmission problems with closed-form exact
//! solutions, posed directly on the scaled geometry (the scaling needed
//! for 2D single-layer ellipticity is applied to the mesh before the data
//! are evaluated, so all fields below live in scaled coordinates).
//!
//! All three problems are point-symmetric about the origin. On the
//! centrally symmetric preset meshes this makes the discrete compatibility
//! sums vanish to round-off, not just up to quadrature error.

use lamecouple_core::analysis::Manufactured;
use lamecouple_core::bem::{kelvin_gradient, kelvin_tensor};
use lamecouple_core::coupling::ProblemData;
use lamecouple_core::material::MaterialLaw;
use lamecouple_core::mesh::Point2;
use lamecouple_core::SymTensor2;

#[derive(Debug)]
pub struct UnknownProblem(pub String);

impl std::fmt::Display for UnknownProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "unknown manufactured problem `{}` (use linear-patch, smooth-biharmonic-free, kelvin-exterior)",
            self.0
        )
    }
}

impl std::error::Error for UnknownProblem {}

/// Linear-law stress from a displacement Jacobian.
fn linear_stress(grad: [[f64; 2]; 2], lambda: f64, mu: f64) -> [[f64; 2]; 2] {
    let div = grad[0][0] + grad[1][1];
    let exy = 0.5 * (grad[0][1] + grad[1][0]);
    [
        [lambda * div + 2.0 * mu * grad[0][0], 2.0 * mu * exy],
        [2.0 * mu * exy, lambda * div + 2.0 * mu * grad[1][1]],
    ]
}

/// Interior displacement with zero exterior field: the exact solution is
/// globally linear and hence reproduced exactly by the P1 space, for any
/// material law (constant strain makes the stress constant and f = 0).
fn linear_patch(material: MaterialLaw, lambda_ext: f64, mu_ext: f64) -> Manufactured {
    // strain-bearing linear field, point-symmetric
    let grad = [[0.35, 0.15], [-0.05, -0.2]];
    let u = move |p: Point2| -> [f64; 2] {
        [
            grad[0][0] * p[0] + grad[0][1] * p[1],
            grad[1][0] * p[0] + grad[1][1] * p[1],
        ]
    };
    let stress_of = move |law: &MaterialLaw| -> [[f64; 2]; 2] {
        let e = SymTensor2::new(grad[0][0], grad[1][1], 0.5 * (grad[0][1] + grad[1][0]));
        let s = law.eval_stress(&e);
        [[s.xx, s.xy], [s.xy, s.yy]]
    };
    let sigma = stress_of(&material);
    Manufactured {
        data: ProblemData {
            f: Box::new(|_| [0.0, 0.0]),
            u0: Box::new(u),
            phi0: Box::new(move |_, n| {
                [
                    sigma[0][0] * n[0] + sigma[0][1] * n[1],
                    sigma[1][0] * n[0] + sigma[1][1] * n[1],
                ]
            }),
            lambda_ext,
            mu_ext,
            material,
        },
        exact_u: Box::new(u),
        exact_grad_u: Box::new(move |_| grad),
        exact_phi: Box::new(|_, _| [0.0, 0.0]),
    }
}

/// Smooth interior displacement, zero exterior field. Only meaningful for
/// the linear law (the volume force is derived from it in closed form).
/// u = alpha (sin(ax) cos(by), cos(ax) sin(by)), odd under p -> -p.
struct SmoothField {
    a: f64,
    b: f64,
    alpha: f64,
}

impl SmoothField {
    fn value(&self, p: Point2) -> [f64; 2] {
        let (a, b, al) = (self.a, self.b, self.alpha);
        [
            al * (a * p[0]).sin() * (b * p[1]).cos(),
            al * (a * p[0]).cos() * (b * p[1]).sin(),
        ]
    }

    fn grad(&self, p: Point2) -> [[f64; 2]; 2] {
        let (a, b, al) = (self.a, self.b, self.alpha);
        let (sx, cx) = (a * p[0]).sin_cos();
        let (sy, cy) = (b * p[1]).sin_cos();
        [
            [al * a * cx * cy, -al * b * sx * sy],
            [-al * a * sx * sy, al * b * cx * cy],
        ]
    }

    /// f = -div sigma(u) for the linear law.
    fn force(&self, p: Point2, lambda: f64, mu: f64) -> [f64; 2] {
        let (a, b, al) = (self.a, self.b, self.alpha);
        let (sx, cx) = (a * p[0]).sin_cos();
        let (sy, cy) = (b * p[1]).sin_cos();
        // laplacian u = -(a^2 + b^2) u; grad div u = (a+b)(-a sx cy, -b cx sy) alpha
        let u = self.value(p);
        let lap = [-(a * a + b * b) * u[0], -(a * a + b * b) * u[1]];
        let gd = [
            -al * (a + b) * a * sx * cy,
            -al * (a + b) * b * cx * sy,
        ];
        [
            -(mu * lap[0] + (lambda + mu) * gd[0]),
            -(mu * lap[1] + (lambda + mu) * gd[1]),
        ]
    }
}

fn smooth_biharmonic_free(material: MaterialLaw, lambda_ext: f64, mu_ext: f64) -> Manufactured {
    let (lam_int, mu_int) = match material {
        MaterialLaw::LinearLame { lambda, mu } => (lambda, mu),
        // the closed-form force assumes the linear law
        _ => (1.0, 1.0),
    };
    let field = SmoothField {
        a: 6.0,
        b: 5.0,
        alpha: 0.4,
    };
    let f2 = SmoothField { ..field };
    let f3 = SmoothField { ..field };
    let f4 = SmoothField { ..field };
    let f5 = SmoothField { ..field };
    Manufactured {
        data: ProblemData {
            f: Box::new(move |p| f2.force(p, lam_int, mu_int)),
            u0: Box::new(move |p| f3.value(p)),
            phi0: Box::new(move |p, n| {
                let s = linear_stress(f4.grad(p), lam_int, mu_int);
                [s[0][0] * n[0] + s[0][1] * n[1], s[1][0] * n[0] + s[1][1] * n[1]]
            }),
            lambda_ext,
            mu_ext,
            material,
        },
        exact_u: Box::new(move |p| field.value(p)),
        exact_grad_u: Box::new(move |p| f5.grad(p)),
        exact_phi: Box::new(|_, _| [0.0, 0.0]),
    }
}

/// Exterior field from two opposite Kelvin point forces inside the domain
/// (zero net flux, O(1/|x|) decay), smooth interior field. The exact
/// density is the exterior traction of the dipole field.
struct KelvinDipole {
    source: Point2,
    force: [f64; 2],
    lambda: f64,
    mu: f64,
}

impl KelvinDipole {
    fn value(&self, p: Point2) -> [f64; 2] {
        let eval = |s: Point2, sign: f64| -> [f64; 2] {
            let z = [p[0] - s[0], p[1] - s[1]];
            let g = kelvin_tensor(z, self.lambda, self.mu).expect("source on boundary");
            [
                sign * (g[0][0] * self.force[0] + g[0][1] * self.force[1]),
                sign * (g[1][0] * self.force[0] + g[1][1] * self.force[1]),
            ]
        };
        let plus = eval(self.source, 1.0);
        let minus = eval([-self.source[0], -self.source[1]], -1.0);
        [plus[0] + minus[0], plus[1] + minus[1]]
    }

    fn grad(&self, p: Point2) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for (s, sign) in [
            (self.source, 1.0),
            ([-self.source[0], -self.source[1]], -1.0),
        ] {
            let z = [p[0] - s[0], p[1] - s[1]];
            let d = kelvin_gradient(z, self.lambda, self.mu).expect("source on boundary");
            for i in 0..2 {
                for k in 0..2 {
                    for j in 0..2 {
                        out[i][k] += sign * d[i][j][k] * self.force[j];
                    }
                }
            }
        }
        out
    }

    fn traction(&self, p: Point2, n: [f64; 2]) -> [f64; 2] {
        let s = linear_stress(self.grad(p), self.lambda, self.mu);
        [s[0][0] * n[0] + s[0][1] * n[1], s[1][0] * n[0] + s[1][1] * n[1]]
    }
}

fn kelvin_exterior(material: MaterialLaw, lambda_ext: f64, mu_ext: f64) -> Manufactured {
    let (lam_int, mu_int) = match material {
        MaterialLaw::LinearLame { lambda, mu } => (lambda, mu),
        _ => (1.0, 1.0),
    };
    let interior = SmoothField {
        a: 6.0,
        b: 5.0,
        alpha: 0.3,
    };
    let i2 = SmoothField { ..interior };
    let i3 = SmoothField { ..interior };
    let i4 = SmoothField { ..interior };
    let i5 = SmoothField { ..interior };
    let dipole = || KelvinDipole {
        source: [0.05, 0.02],
        force: [0.3, -0.2],
        lambda: lambda_ext,
        mu: mu_ext,
    };
    let d1 = dipole();
    let d2 = dipole();
    let d3 = dipole();
    Manufactured {
        data: ProblemData {
            f: Box::new(move |p| i2.force(p, lam_int, mu_int)),
            // u0 = (u - u_ext)|_Gamma
            u0: Box::new(move |p| {
                let ui = i3.value(p);
                let ue = d1.value(p);
                [ui[0] - ue[0], ui[1] - ue[1]]
            }),
            // phi0 = (sigma(u) - sigma_ext(u_ext)) n
            phi0: Box::new(move |p, n| {
                let si = linear_stress(i4.grad(p), lam_int, mu_int);
                let te = d2.traction(p, n);
                [
                    si[0][0] * n[0] + si[0][1] * n[1] - te[0],
                    si[1][0] * n[0] + si[1][1] * n[1] - te[1],
                ]
            }),
            lambda_ext,
            mu_ext,
            material,
        },
        exact_u: Box::new(move |p| interior.value(p)),
        exact_grad_u: Box::new(move |p| i5.grad(p)),
        exact_phi: Box::new(move |p, n| d3.traction(p, n)),
    }
}

/// Builds one of the named manufactured problems.
pub fn build_manufactured(
    name: &str,
    material: MaterialLaw,
    lambda_ext: f64,
    mu_ext: f64,
) -> Result<Manufactured, UnknownProblem> {
    match name {
        "linear-patch" => Ok(linear_patch(material, lambda_ext, mu_ext)),
        "smooth-biharmonic-free" | "smooth" => {
            Ok(smooth_biharmonic_free(material, lambda_ext, mu_ext))
        }
        "kelvin-exterior" => Ok(kelvin_exterior(material, lambda_ext, mu_ext)),
        other => Err(UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lamecouple_core::bem::BoundarySpace;
    use lamecouple_core::fem::FemSpace;
    use lamecouple_core::mesh::{
        build_polygon_mesh, refine_uniform, scale_to_unit, unit_square_polygon,
    };

    fn scaled_square(levels: usize) -> lamecouple_core::Mesh {
        let mut m = build_polygon_mesh(&unit_square_polygon(), 1.0).unwrap();
        for _ in 0..levels {
            m = refine_uniform(&m);
        }
        scale_to_unit(&m).unwrap().0
    }

    #[test]
    fn compatibility_of_all_shipped_problems() {
        let m = scaled_square(3);
        let sp = FemSpace::new(&m);
        let bs = BoundarySpace::from_mesh(&m).unwrap();
        for name in ["linear-patch", "smooth-biharmonic-free", "kelvin-exterior"] {
            let mf = build_manufactured(name, MaterialLaw::linear(1.0, 1.0).unwrap(), 1.0, 1.0)
                .unwrap();
            let res = mf.data.compatibility_residuals(&sp, &bs);
            assert!(
                res[0].abs() < 1e-12 && res[1].abs() < 1e-12,
                "{name}: compatibility residuals {res:?}"
            );
        }
    }

    #[test]
    fn smooth_force_matches_finite_differences() {
        // f = -div sigma(u) checked against second differences of u
        let field = SmoothField {
            a: 6.0,
            b: 5.0,
            alpha: 0.4,
        };
        let (lambda, mu) = (1.3, 0.7);
        let p = [0.08, -0.11];
        let h = 1e-5;
        let mut divsigma = [0.0f64; 2];
        for k in 0..2 {
            let mut pp = p;
            pp[k] += h;
            let mut pm = p;
            pm[k] -= h;
            let sp = linear_stress(field.grad(pp), lambda, mu);
            let sm = linear_stress(field.grad(pm), lambda, mu);
            for i in 0..2 {
                divsigma[i] += (sp[i][k] - sm[i][k]) / (2.0 * h);
            }
        }
        let f = field.force(p, lambda, mu);
        for i in 0..2 {
            assert!(
                (f[i] + divsigma[i]).abs() < 1e-6,
                "force component {i}: {} vs fd {}",
                f[i],
                -divsigma[i]
            );
        }
    }

    #[test]
    fn dipole_solves_homogeneous_lame_equations() {
        // the exterior field must satisfy div sigma = 0 away from sources
        let d = KelvinDipole {
            source: [0.05, 0.02],
            force: [0.3, -0.2],
            lambda: 1.0,
            mu: 1.0,
        };
        let p = [0.4, 0.3];
        let h = 1e-5;
        for i in 0..2 {
            let mut acc = 0.0;
            for k in 0..2 {
                let mut pp = p;
                pp[k] += h;
                let mut pm = p;
                pm[k] -= h;
                let sp = linear_stress(d.grad(pp), 1.0, 1.0);
                let sm = linear_stress(d.grad(pm), 1.0, 1.0);
                acc += (sp[i][k] - sm[i][k]) / (2.0 * h);
            }
            assert!(acc.abs() < 1e-6, "div sigma component {i}: {acc}");
        }
    }

    #[test]
    fn dipole_decays_like_inverse_distance() {
        // opposite forces cancel the logarithmic far field; |u_ext| = O(1/r)
        let d = KelvinDipole {
            source: [0.05, 0.02],
            force: [0.3, -0.2],
            lambda: 1.0,
            mu: 1.0,
        };
        let dir = [0.6, 0.8];
        let norm_at = |r: f64| {
            let v = d.value([r * dir[0], r * dir[1]]);
            (v[0] * v[0] + v[1] * v[1]).sqrt()
        };
        let n1 = norm_at(50.0);
        let n2 = norm_at(100.0);
        let rate = (n1 / n2).log2();
        assert!(
            (rate - 1.0).abs() < 0.15,
            "decay rate {rate} (expected about 1)"
        );
    }

    #[test]
    fn unknown_problem_is_rejected() {
        assert!(build_manufactured("mystery", MaterialLaw::linear(1.0, 1.0).unwrap(), 1.0, 1.0)
            .is_err());
    }
}
