//! Panel integration for the boundary integral operators.
//!
//! Strategy: the inner (trial) integral of every kernel over a straight
//! panel is evaluated in closed form from the rational and logarithmic
//! primitives of q(t) = |x - y(t)|^2, so only the outer (test) integral is
//! done numerically. Disjoint pairs use a single Gauss rule, close pairs a
//! distance-graded subdivision of the test panel, touching pairs a deep
//! geometric grading toward the shared vertex, and identical panels the
//! fully analytic formulas (the Cauchy-type part of the double layer is a
//! principal value there; its closed form is used).

use alloc::vec::Vec;

use crate::mesh::Point2;
use crate::num;

/// Gauss-Legendre rule on [0, 1] via Newton iteration on the Legendre
/// polynomial. Deterministic and accurate to machine precision.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // initial guess on [-1, 1]
        let mut x = num::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if num::abs(dx) < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((0.5 * (x + 1.0), 0.5 * w));
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Geometry of one straight boundary panel. `tangent` points from start to
/// end; `normal` is the outward normal of a counterclockwise boundary,
/// i.e. the tangent rotated by -90 degrees.
#[derive(Clone, Copy, Debug)]
pub struct EdgeGeom {
    pub start: Point2,
    pub end: Point2,
    pub dir: [f64; 2],
    pub len: f64,
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
}

impl EdgeGeom {
    pub fn new(start: Point2, end: Point2) -> Self {
        let dir = [end[0] - start[0], end[1] - start[1]];
        let len = num::hypot(dir[0], dir[1]);
        let tangent = [dir[0] / len, dir[1] / len];
        Self {
            start,
            end,
            dir,
            len,
            tangent,
            normal: [tangent[1], -tangent[0]],
        }
    }

    pub fn point(&self, t: f64) -> Point2 {
        [self.start[0] + t * self.dir[0], self.start[1] + t * self.dir[1]]
    }

    pub fn midpoint(&self) -> Point2 {
        self.point(0.5)
    }
}

/// Distance between two segments (zero if they touch or cross).
pub fn segment_distance(a: &EdgeGeom, b: &EdgeGeom) -> f64 {
    fn point_seg(p: Point2, e: &EdgeGeom) -> f64 {
        let w = [p[0] - e.start[0], p[1] - e.start[1]];
        let t = (w[0] * e.dir[0] + w[1] * e.dir[1]) / (e.len * e.len);
        let t = num::max(0.0, num::min(1.0, t));
        let q = e.point(t);
        num::hypot(p[0] - q[0], p[1] - q[1])
    }
    if segments_cross(a, b) {
        return 0.0;
    }
    let mut d = f64::INFINITY;
    d = num::min(d, point_seg(a.start, b));
    d = num::min(d, point_seg(a.end, b));
    d = num::min(d, point_seg(b.start, a));
    d = num::min(d, point_seg(b.end, a));
    d
}

fn segments_cross(a: &EdgeGeom, b: &EdgeGeom) -> bool {
    let area = |p: Point2, q: Point2, r: Point2| -> f64 {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let d1 = area(b.start, b.end, a.start);
    let d2 = area(b.start, b.end, a.end);
    let d3 = area(a.start, a.end, b.start);
    let d4 = area(a.start, a.end, b.end);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Rational and logarithmic primitives over the trial parameter t in [0,1]
/// for q(t) = A t^2 + B t + C:
/// j[k] = int t^k / q dt, h[k] = int t^k / q^2 dt, lam[k] = int t^k ln q dt.
#[derive(Clone, Copy, Debug)]
pub struct Primitives {
    pub j: [f64; 4],
    pub h: [f64; 4],
    pub lam: [f64; 2],
}

/// atan(u) - atan(v) for u >= v without cancellation for large arguments.
fn atan_diff(u: f64, v: f64) -> f64 {
    let prod = u * v;
    let w = (u - v) / (1.0 + prod);
    if prod > -1.0 {
        num::atan(w)
    } else {
        num::atan(w) + core::f64::consts::PI
    }
}

pub fn primitives(a: f64, b: f64, c: f64) -> Primitives {
    let q0 = c;
    let q1 = a + b + c;
    let disc = 4.0 * a * c - b * b;
    // Write q = a [ (t - t0)^2 + s2 ]: s2 = disc / (4 a^2) measures the
    // viewing angle of the panel from x. When x looks at the panel nearly
    // edge-on (s2 tiny relative to the distance to the closer root offset)
    // the atan formulas cancel catastrophically and a series in s2 is used
    // instead; the root t0 then lies outside [0,1] since q > 0 on the panel.
    let t0 = -b / (2.0 * a);
    let s2 = num::max(disc / (4.0 * a * a), 0.0);
    let u0 = -t0;
    let u1 = 1.0 - t0;
    let edge_on = s2 <= 1e-2 * num::min(u0 * u0, u1 * u1) && u0 * u1 > 0.0;
    let (j0, h0) = if edge_on {
        let mut j0 = 0.0;
        let mut h0 = 0.0;
        let mut s2k = 1.0;
        let mut sign = -1.0;
        for k in 0..9 {
            let p1 = 2 * k + 1;
            let p3 = 2 * k + 3;
            let d1 = num::powi(u1, -p1) - num::powi(u0, -p1);
            let d3 = num::powi(u1, -p3) - num::powi(u0, -p3);
            j0 += sign * s2k * d1 / f64::from(p1);
            h0 += sign * f64::from(k + 1) * s2k * d3 / f64::from(p3);
            s2k *= s2;
            sign = -sign;
        }
        (j0 / a, h0 / (a * a))
    } else {
        let sq = num::sqrt(num::max(disc, 0.0));
        let ad = atan_diff((2.0 * a + b) / sq, b / sq);
        let j0 = 2.0 / sq * ad;
        let h0 = (2.0 * a + b) / (disc * q1) - b / (disc * q0) + 2.0 * a / disc * j0;
        (j0, h0)
    };
    let ln_ratio = num::ln(q1 / q0);
    let j1 = 0.5 / a * ln_ratio - 0.5 * b / a * j0;
    let j2 = (1.0 - b * j1 - c * j0) / a;
    let j3 = (0.5 - b * j2 - c * j1) / a;
    let h1 = -0.5 / a * (1.0 / q1 - 1.0 / q0) - 0.5 * b / a * h0;
    let h2 = (j0 - b * h1 - c * h0) / a;
    let h3 = (j1 - b * h2 - c * h1) / a;
    let lam0 = num::ln(q1) - 2.0 * a * j2 - b * j1;
    let lam1 = 0.5 * num::ln(q1) - a * j3 - 0.5 * b * j2;
    Primitives {
        j: [j0, j1, j2, j3],
        h: [h0, h1, h2, h3],
        lam: [lam0, lam1],
    }
}

/// Lame-dependent kernel constants for the exterior medium.
#[derive(Clone, Copy, Debug)]
pub struct KernelConsts {
    pub lambda: f64,
    pub mu: f64,
    /// kappa = (lambda + mu) / (4 pi mu (lambda + 2 mu))
    pub kappa: f64,
    /// b = (lambda + 3 mu) / (lambda + mu)
    pub b_ratio: f64,
    /// beta = b - 1 = 2 mu / (lambda + mu)
    pub beta: f64,
    /// c0 = kappa mu beta = mu / (2 pi (lambda + 2 mu)); strength of the
    /// Cauchy part of the double-layer kernel on a straight panel
    pub c0: f64,
}

impl KernelConsts {
    pub fn new(lambda: f64, mu: f64) -> Self {
        let kappa = (lambda + mu) / (4.0 * core::f64::consts::PI * mu * (lambda + 2.0 * mu));
        let b_ratio = (lambda + 3.0 * mu) / (lambda + mu);
        let beta = b_ratio - 1.0;
        Self {
            lambda,
            mu,
            kappa,
            b_ratio,
            beta,
            c0: kappa * mu * beta,
        }
    }

    /// Constants for the regularized hypersingular kernel
    /// B(z) = c_w (-ln|z| I + zhat zhat^T), c_w = mu (lambda+mu) / (pi (lambda+2mu)),
    /// which shares the single-layer kernel's functional form. Twice
    /// integrating the double-layer kernel by parts along the boundary
    /// turns <W u, v> into the pairing of B against the arclength
    /// derivatives of u and v.
    pub fn hypersingular(lambda: f64, mu: f64) -> Self {
        let c_w = mu * (lambda + mu) / (core::f64::consts::PI * (lambda + 2.0 * mu));
        Self {
            lambda,
            mu,
            kappa: c_w,
            b_ratio: 1.0,
            beta: 0.0,
            c0: 0.0,
        }
    }
}

/// Inner moments of a kernel over a trial panel: `m[k][a][b]` is
/// int_0^1 t^k Kernel_ab(x - y(t)) |dir| dt for k = 0, 1.
pub type InnerMoments = [[[f64; 2]; 2]; 2];

/// Trial-panel frame anchored at the endpoint nearest to x. Anchoring
/// there keeps the coefficients of q(t) accurate when x grazes a vertex:
/// the small offsets are then formed by exact subtraction instead of being
/// absorbed into O(len^2) terms. `flipped` records whether the moments have
/// to be mapped back through t -> 1 - t.
struct TrialFrame {
    e: [f64; 2],
    d: [f64; 2],
    flipped: bool,
}

fn trial_frame(x: Point2, trial: &EdgeGeom) -> TrialFrame {
    let e_start = [x[0] - trial.start[0], x[1] - trial.start[1]];
    let e_end = [x[0] - trial.end[0], x[1] - trial.end[1]];
    let d_start = e_start[0] * e_start[0] + e_start[1] * e_start[1];
    let d_end = e_end[0] * e_end[0] + e_end[1] * e_end[1];
    if d_end < d_start {
        TrialFrame {
            e: e_end,
            d: [-trial.dir[0], -trial.dir[1]],
            flipped: true,
        }
    } else {
        TrialFrame {
            e: e_start,
            d: trial.dir,
            flipped: false,
        }
    }
}

/// Converts moments taken in a flipped frame back to the original
/// parametrization: m0 is invariant, m1 -> m0 - m1.
fn unflip(moments: &mut InnerMoments) {
    for a in 0..2 {
        for b in 0..2 {
            moments[1][a][b] = moments[0][a][b] - moments[1][a][b];
        }
    }
}

/// Closed-form trial integral of the Kelvin (single-layer) kernel
/// G_ab(z) = kappa (-b ln|z| d_ab + z_a z_b / |z|^2).
pub fn kelvin_inner_moments(x: Point2, trial: &EdgeGeom, kc: &KernelConsts) -> InnerMoments {
    let frame = trial_frame(x, trial);
    let e = frame.e;
    let d = frame.d;
    let a = d[0] * d[0] + d[1] * d[1];
    let b = -2.0 * (e[0] * d[0] + e[1] * d[1]);
    let c = e[0] * e[0] + e[1] * e[1];
    let pr = primitives(a, b, c);
    let mut out = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        // z_a z_b / q moments: z(t) = e - t d
        let j0 = pr.j[k];
        let j1 = pr.j[k + 1];
        let j2 = pr.j[k + 2];
        for p in 0..2 {
            for q in 0..2 {
                let zz = e[p] * e[q] * j0 - (e[p] * d[q] + e[q] * d[p]) * j1 + d[p] * d[q] * j2;
                let log_part = if p == q {
                    // ln|z| = 0.5 ln q
                    -kc.b_ratio * 0.5 * pr.lam[k]
                } else {
                    0.0
                };
                out[k][p][q] = kc.kappa * (log_part + zz) * trial.len;
            }
        }
    }
    if frame.flipped {
        unflip(&mut out);
    }
    out
}

/// Closed-form trial integral of the double-layer (traction) kernel
/// T_ab(x, y) = kappa mu [ beta (h d_ab + n_a z_b - z_a n_b) + 4 z_a z_b h / q ] / q
/// with z = x - y, h = z . n, n the outward normal of the trial panel.
pub fn traction_inner_moments(x: Point2, trial: &EdgeGeom, kc: &KernelConsts) -> InnerMoments {
    let frame = trial_frame(x, trial);
    let e = frame.e;
    let d = frame.d;
    // the outward normal of the panel is orientation-fixed
    let n = trial.normal;
    let a = d[0] * d[0] + d[1] * d[1];
    let b = -2.0 * (e[0] * d[0] + e[1] * d[1]);
    let c = e[0] * e[0] + e[1] * e[1];
    let pr = primitives(a, b, c);
    // d is orthogonal to n, so h = z . n = e . n independent of t
    let h = e[0] * n[0] + e[1] * n[1];
    let km = kc.kappa * kc.mu;
    let mut out = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        let j0 = pr.j[k];
        let j1 = pr.j[k + 1];
        let h0 = pr.h[k];
        let h1 = pr.h[k + 1];
        let h2 = pr.h[k + 2];
        for p in 0..2 {
            for q in 0..2 {
                // (n_a z_b - z_a n_b)/q moments
                let zn = (n[p] * e[q] - e[p] * n[q]) * j0 - (n[p] * d[q] - d[p] * n[q]) * j1;
                let delta = if p == q { h * j0 } else { 0.0 };
                // z_a z_b h / q^2 moments
                let zzh =
                    h * (e[p] * e[q] * h0 - (e[p] * d[q] + e[q] * d[p]) * h1 + d[p] * d[q] * h2);
                out[k][p][q] = km * (kc.beta * (delta + zn) + 4.0 * zzh) * trial.len;
            }
        }
    }
    if frame.flipped {
        unflip(&mut out);
    }
    out
}

/// Outer-by-inner quadrature result: `m[p][k][a][b]` carries the test
/// moment s^p against the trial moment t^k of the kernel block.
pub type PairMoments = [[[[f64; 2]; 2]; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairKind {
    Disjoint,
    /// Panels share one point at the given test-side parameter (0 or 1).
    Touching { test_param: f64 },
}

/// Grading depth toward a shared vertex; 2^-36 leaves the unresolved corner
/// neighborhood far below the kernel-identity tolerances.
const TOUCH_LEVELS: usize = 36;
/// Grading depth for close but non-touching pairs.
const NEAR_LEVELS: usize = 4;
/// Pairs closer than this multiple of the larger panel are "near".
const NEAR_FACTOR: f64 = 1.0;

pub struct PanelRule {
    gauss: Vec<(f64, f64)>,
}

impl PanelRule {
    pub fn new(order: usize) -> Self {
        Self {
            gauss: gauss_legendre(order),
        }
    }

    /// Integrates one kernel over a panel pair, routing by geometry.
    /// `inner` evaluates the closed-form trial integral at a test point.
    pub fn integrate_pair(
        &self,
        test: &EdgeGeom,
        trial: &EdgeGeom,
        kind: PairKind,
        inner: &dyn Fn(Point2) -> InnerMoments,
    ) -> PairMoments {
        let mut out = [[[[0.0; 2]; 2]; 2]; 2];
        match kind {
            PairKind::Disjoint => {
                let dist = segment_distance(test, trial);
                if dist >= NEAR_FACTOR * num::max(test.len, trial.len) {
                    self.accumulate(test, 0.0, 1.0, inner, &mut out);
                } else {
                    // split at the closest approach and grade into both sides
                    let s_star = closest_param(test, trial);
                    for (lo, hi) in graded_intervals(s_star, NEAR_LEVELS) {
                        self.accumulate(test, lo, hi, inner, &mut out);
                    }
                }
            }
            PairKind::Touching { test_param } => {
                for (lo, hi) in graded_intervals(test_param, TOUCH_LEVELS) {
                    self.accumulate(test, lo, hi, inner, &mut out);
                }
            }
        }
        out
    }

    fn accumulate(
        &self,
        test: &EdgeGeom,
        lo: f64,
        hi: f64,
        inner: &dyn Fn(Point2) -> InnerMoments,
        out: &mut PairMoments,
    ) {
        let width = hi - lo;
        if width <= 0.0 {
            return;
        }
        for &(xg, wg) in &self.gauss {
            let s = lo + width * xg;
            let w = wg * width * test.len;
            let m = inner(test.point(s));
            for k in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let v = m[k][a][b];
                        out[0][k][a][b] += w * v;
                        out[1][k][a][b] += w * s * v;
                    }
                }
            }
        }
    }
}

/// Test-side parameter of the closest approach to the trial panel.
fn closest_param(test: &EdgeGeom, trial: &EdgeGeom) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    let samples = 33;
    for i in 0..=samples {
        let s = i as f64 / samples as f64;
        let p = test.point(s);
        let w = [p[0] - trial.start[0], p[1] - trial.start[1]];
        let t = ((w[0] * trial.dir[0] + w[1] * trial.dir[1]) / (trial.len * trial.len))
            .clamp(0.0, 1.0);
        let q = trial.point(t);
        let d = num::hypot(p[0] - q[0], p[1] - q[1]);
        if d < best.0 {
            best = (d, s);
        }
    }
    best.1
}

/// Geometric grading of [0,1] toward `target` (0, 1, or interior split).
fn graded_intervals(target: f64, levels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if target <= 0.0 || target >= 1.0 {
        let toward_zero = target <= 0.0;
        let mut hi = 1.0;
        for _ in 0..levels {
            let lo = hi * 0.5;
            if toward_zero {
                out.push((lo, hi));
            } else {
                out.push((1.0 - hi, 1.0 - lo));
            }
            hi = lo;
        }
        if toward_zero {
            out.push((0.0, hi));
        } else {
            out.push((1.0 - hi, 1.0));
        }
    } else {
        for (lo, hi) in graded_intervals(1.0, levels) {
            out.push((lo * target, hi * target));
        }
        for (lo, hi) in graded_intervals(0.0, levels) {
            out.push((target + lo * (1.0 - target), target + hi * (1.0 - target)));
        }
    }
    out
}

/// int_0^L int_0^L ln|s - t| ds dt = L^2 (ln L - 3/2), the classical
/// coincident-panel logarithmic integral.
pub fn log_log_identical(len: f64) -> f64 {
    len * len * (num::ln(len) - 1.5)
}

/// Same-panel single-layer block: fully analytic.
/// [a][b] entry of int_E int_E G_ab, plus the P1-test variants (each hat
/// carries exactly half by the s -> L - s symmetry).
pub fn kelvin_same_panel(edge: &EdgeGeom, kc: &KernelConsts) -> [[f64; 2]; 2] {
    let ilog = log_log_identical(edge.len);
    let t = edge.tangent;
    let mut out = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let log_part = if a == b { -kc.b_ratio * ilog } else { 0.0 };
            out[a][b] = kc.kappa * (log_part + t[a] * t[b] * edge.len * edge.len);
        }
    }
    out
}

/// Same-panel double-layer moments. On a straight panel the kernel reduces
/// to the Cauchy part c0 (n_a z_b - z_a n_b)/|z|^2 and the principal-value
/// double integrals against the trial hats have closed forms:
/// returns `m[i][j][a][b]` where i indexes the test shape (0 = constant,
/// 1 = hat at start, 2 = hat at end) and j the trial hat (0 = start, 1 = end).
pub fn traction_same_panel(edge: &EdgeGeom, kc: &KernelConsts) -> [[[[f64; 2]; 2]; 2]; 3] {
    let t = edge.tangent;
    let n = edge.normal;
    let l = edge.len;
    let mut antisym = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            antisym[a][b] = kc.c0 * (n[a] * t[b] - t[a] * n[b]);
        }
    }
    // PV integrals of hat_j(t)/(s - t) against the test shapes:
    //   constant test:   start hat +L/2, end hat -L/2
    //   start-hat test:  [0, -L/2]
    //   end-hat test:    [L/2, 0]
    let weights: [[f64; 2]; 3] = [[0.5 * l, -0.5 * l], [0.0, -0.5 * l], [0.5 * l, 0.0]];
    let mut out = [[[[0.0; 2]; 2]; 2]; 3];
    for (i, wrow) in weights.iter().enumerate() {
        for (j, &w) in wrow.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    out[i][j][a][b] = w * antisym[a][b];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let rule = gauss_legendre(8);
        assert_eq!(rule.len(), 8);
        for k in 0..16 {
            let exact = 1.0 / (k as f64 + 1.0);
            let approx: f64 = rule.iter().map(|(x, w)| w * x.powi(k)).sum();
            assert!((approx - exact).abs() < 1e-14, "degree {k}");
        }
        let wsum: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((wsum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn primitives_match_numeric_quadrature() {
        let rule = gauss_legendre(64);
        for &(a, b, c) in &[(1.0, 0.5, 2.0), (4.0, -3.0, 1.0), (0.25, 0.4, 0.9)] {
            let pr = primitives(a, b, c);
            for k in 0..4 {
                let jn: f64 = rule
                    .iter()
                    .map(|&(x, w)| w * x.powi(k as i32) / (a * x * x + b * x + c))
                    .sum();
                assert!((pr.j[k] - jn).abs() < 1e-12, "j[{k}] for ({a},{b},{c})");
                let hn: f64 = rule
                    .iter()
                    .map(|&(x, w)| {
                        let q = a * x * x + b * x + c;
                        w * x.powi(k as i32) / (q * q)
                    })
                    .sum();
                assert!((pr.h[k] - hn).abs() < 1e-11, "h[{k}] for ({a},{b},{c})");
            }
            for k in 0..2 {
                let ln_: f64 = rule
                    .iter()
                    .map(|&(x, w)| w * x.powi(k as i32) * (a * x * x + b * x + c).ln())
                    .sum();
                assert!((pr.lam[k] - ln_).abs() < 1e-12, "lam[{k}]");
            }
        }
    }

    #[test]
    fn primitives_degenerate_discriminant() {
        // q = (t + 1)^2: A=1, B=2, C=1, disc = 0
        let pr = primitives(1.0, 2.0, 1.0);
        // int 1/(t+1)^2 = 1/2, int 1/(t+1)^4 = 7/24
        assert!((pr.j[0] - 0.5).abs() < 1e-12);
        assert!((pr.h[0] - 7.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn identical_panel_log_integral() {
        // unit panel: int int ln|s-t| = -3/2
        assert!((log_log_identical(1.0) + 1.5).abs() < 1e-15);
        // oracle: symmetric substitution u = s - t renders the integral
        // int_0^1 2 (1-u) ln u du; integrate with geometric grading toward
        // the logarithmic endpoint
        let rule = gauss_legendre(30);
        let mut oracle = 0.0;
        let mut hi = 1.0;
        for _ in 0..60 {
            let lo = 0.5 * hi;
            for &(x, w) in &rule {
                let u = lo + (hi - lo) * x;
                oracle += w * (hi - lo) * 2.0 * (1.0 - u) * u.ln();
            }
            hi = lo;
        }
        assert!((log_log_identical(1.0) - oracle).abs() < 1e-10);
    }

    #[test]
    fn kelvin_inner_matches_brute_force() {
        let kc = KernelConsts::new(1.0, 1.0);
        let trial = EdgeGeom::new([0.2, -0.1], [0.7, 0.4]);
        let x = [1.5, 0.9];
        let rule = gauss_legendre(64);
        let moments = kelvin_inner_moments(x, &trial, &kc);
        for k in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let brute: f64 = rule
                        .iter()
                        .map(|&(t, w)| {
                            let y = trial.point(t);
                            let z = [x[0] - y[0], x[1] - y[1]];
                            let q = z[0] * z[0] + z[1] * z[1];
                            let g = kc.kappa
                                * (if a == b { -kc.b_ratio * 0.5 * q.ln() } else { 0.0 }
                                    + z[a] * z[b] / q);
                            w * t.powi(k as i32) * g * trial.len
                        })
                        .sum();
                    assert!(
                        (moments[k][a][b] - brute).abs() < 1e-12,
                        "kelvin moment ({k},{a},{b})"
                    );
                }
            }
        }
    }

    #[test]
    fn traction_inner_matches_brute_force() {
        let kc = KernelConsts::new(2.0, 0.5);
        let trial = EdgeGeom::new([0.0, 0.0], [0.6, 0.1]);
        let x = [0.4, 0.8];
        let rule = gauss_legendre(64);
        let moments = traction_inner_moments(x, &trial, &kc);
        let n = trial.normal;
        for k in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let brute: f64 = rule
                        .iter()
                        .map(|&(t, w)| {
                            let y = trial.point(t);
                            let z = [x[0] - y[0], x[1] - y[1]];
                            let q = z[0] * z[0] + z[1] * z[1];
                            let h = z[0] * n[0] + z[1] * n[1];
                            let delta = if a == b { h } else { 0.0 };
                            let tker = kc.kappa * kc.mu / q
                                * (kc.beta * (delta + n[a] * z[b] - z[a] * n[b])
                                    + 4.0 * z[a] * z[b] * h / q);
                            w * t.powi(k as i32) * tker * trial.len
                        })
                        .sum();
                    assert!(
                        (moments[k][a][b] - brute).abs() < 1e-12,
                        "traction moment ({k},{a},{b})"
                    );
                }
            }
        }
    }

    #[test]
    fn same_panel_pv_closed_forms_match_antisymmetrized_oracle() {
        // PV int int f(s) g(t) / (s-t) equals
        // 1/2 int int (f(s) g(t) - f(t) g(s)) / (s - t), whose integrand is
        // regular; evaluate the latter with plain Gauss. Different orders
        // for the two variables keep the nodes off the diagonal.
        let rule_s = gauss_legendre(200);
        let rule_t = gauss_legendre(201);
        let l = 0.73;
        let hat0 = |t: f64| 1.0 - t / l;
        let hat1 = |t: f64| t / l;
        let shapes: [(&dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64, f64); 4] = [
            (&|_s| 1.0, &hat0, 0.5 * l),
            (&|_s| 1.0, &hat1, -0.5 * l),
            (&hat0, &hat1, -0.5 * l),
            (&hat1, &hat0, 0.5 * l),
        ];
        for (f, g, expected) in shapes {
            let mut acc = 0.0;
            for &(xs, ws) in &rule_s {
                let s = xs * l;
                for &(xt, wt) in &rule_t {
                    let t = xt * l;
                    acc += ws * wt * l * l * 0.5 * (f(s) * g(t) - f(t) * g(s)) / (s - t);
                }
            }
            assert!((acc - expected).abs() < 1e-6, "pv {acc} vs {expected}");
        }
    }

    #[test]
    fn graded_intervals_cover_unit_interval() {
        for target in [0.0, 1.0, 0.3] {
            let iv = graded_intervals(target, 12);
            let total: f64 = iv.iter().map(|(lo, hi)| hi - lo).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
