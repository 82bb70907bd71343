//! Dense linear algebra backend: LU with partial pivoting, symmetric
//! eigendecomposition (Householder tridiagonalization + implicit QL),
//! generalized symmetric-definite eigenproblems, and a one-sided Jacobi SVD.
//!
//! Everything is dense and column-free (row-major `Vec<f64>`): the systems
//! assembled by this crate stay at desk scale, where O(n^3) direct methods
//! are both fast enough and free of iterative-solver confounders.

use alloc::vec;
use alloc::vec::Vec;

use crate::num;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinalgError {
    SingularMatrix,
    NotPositiveDefinite,
    NoConvergence,
    DimensionMismatch,
}

impl core::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinalgError::SingularMatrix => write!(f, "matrix is numerically singular"),
            LinalgError::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            LinalgError::NoConvergence => write!(f, "eigenvalue iteration did not converge"),
            LinalgError::DimensionMismatch => write!(f, "dimension mismatch"),
        }
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// y = A^T x without forming the transpose.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x[i];
            for j in 0..self.cols {
                y[j] += row[j] * xi;
            }
        }
        y
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut c = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                let brow = other.row(k);
                let crow = &mut c.data[i * other.cols..(i + 1) * other.cols];
                for j in 0..other.cols {
                    crow[j] += aik * brow[j];
                }
            }
        }
        c
    }

    pub fn add_scaled(&mut self, other: &Mat, s: f64) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    /// 0.5 (A + A^T).
    pub fn symmetric_part(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut s = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                s[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        s
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| num::max(m, num::abs(v)))
    }

    /// max_ij |A_ij - A_ji|, a symmetry certificate.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = num::max(worst, num::abs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }

    pub fn infinity_norm(&self) -> f64 {
        (0..self.rows).fold(0.0, |m, i| {
            num::max(m, self.row(i).iter().map(|v| num::abs(*v)).sum())
        })
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    num::sqrt(dot(a, a))
}

pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: Mat,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn factor(a: &Mat) -> Result<Lu, LinalgError> {
        if a.rows != a.cols {
            return Err(LinalgError::DimensionMismatch);
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = num::abs(lu[(k, k)]);
            for i in (k + 1)..n {
                let v = num::abs(lu[(i, k)]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                if m != 0.0 {
                    for j in (k + 1)..n {
                        lu[(i, j)] -= m * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // forward: L y = Pb
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    pub fn solve_mat(&self, b: &Mat) -> Mat {
        let n = self.lu.rows;
        assert_eq!(b.rows, n);
        let mut out = Mat::zeros(n, b.cols);
        let mut col = vec![0.0; n];
        for j in 0..b.cols {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.lu.rows {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Rough 1-norm condition estimate via a few transpose-free probes.
    pub fn cond_estimate(&self, a: &Mat) -> f64 {
        let n = self.lu.rows;
        if n == 0 {
            return 1.0;
        }
        // ||A^{-1}||_1 >= ||A^{-1} v||_1 / ||v||_1 for any v; probe with the
        // classical all-ones vector plus the alternating one.
        let mut best = 0.0;
        for pattern in 0..2 {
            let v: Vec<f64> = (0..n)
                .map(|i| if pattern == 0 || i % 2 == 0 { 1.0 } else { -1.0 })
                .collect();
            let x = self.solve(&v);
            let nx: f64 = x.iter().map(|v| num::abs(*v)).sum::<f64>() / n as f64;
            best = num::max(best, nx);
        }
        best * a.infinity_norm()
    }
}

/// Eigenvalues and orthonormal eigenvectors of a symmetric matrix,
/// ascending order. Householder tridiagonalization followed by implicit QL,
/// the classical tred2/tql2 pair.
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column j of `vectors` is the eigenvector for `values[j]`.
    pub vectors: Mat,
}

pub fn sym_eigen(a: &Mat) -> Result<SymEigen, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::DimensionMismatch);
    }
    let n = a.rows;
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let mut v = a.symmetric_part();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    Ok(SymEigen {
        values: d,
        vectors: v,
    })
}

fn tred2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += num::abs(*item);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = num::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..(n - 1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<(), LinalgError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = num::max(tst1, num::abs(d[l]) + num::abs(e[l]));
        let mut m = l;
        while m < n {
            if num::abs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(LinalgError::NoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = num::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = num::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if num::abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Sort ascending, carrying eigenvectors along.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                let tmp = v[(r, i)];
                v[(r, i)] = v[(r, k)];
                v[(r, k)] = tmp;
            }
        }
    }
    Ok(())
}

/// Eigenvalues of the pencil A x = lambda B x with A, B symmetric and B
/// positive semidefinite. Directions where B is (numerically) singular are
/// deflated away: B is eigendecomposed, modes below `tol_rel` times its
/// largest eigenvalue are dropped, and the problem is solved on the
/// complement. Returns ascending eigenvalues of the deflated problem.
pub fn generalized_sym_eigen(a: &Mat, b: &Mat, tol_rel: f64) -> Result<Vec<f64>, LinalgError> {
    if a.rows != a.cols || b.rows != b.cols || a.rows != b.rows {
        return Err(LinalgError::DimensionMismatch);
    }
    let eb = sym_eigen(b)?;
    let n = a.rows;
    let lam_max = eb.values.iter().fold(0.0, |m, &v| num::max(m, num::abs(v)));
    if lam_max == 0.0 {
        return Err(LinalgError::NotPositiveDefinite);
    }
    let keep: Vec<usize> = (0..n)
        .filter(|&i| eb.values[i] > tol_rel * lam_max)
        .collect();
    if keep.is_empty() {
        return Err(LinalgError::NotPositiveDefinite);
    }
    // S = Q_keep diag(lambda^{-1/2}); reduced problem S^T A S (symmetric).
    let m = keep.len();
    let mut s = Mat::zeros(n, m);
    for (jj, &j) in keep.iter().enumerate() {
        let inv_sqrt = 1.0 / num::sqrt(eb.values[j]);
        for i in 0..n {
            s[(i, jj)] = eb.vectors[(i, j)] * inv_sqrt;
        }
    }
    let asr = a.matmul(&s);
    let reduced = s.transpose().matmul(&asr);
    let er = sym_eigen(&reduced)?;
    Ok(er.values)
}

/// Singular values (descending) of an arbitrary matrix via one-sided Jacobi.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    // Work on the taller orientation so columns outnumber-or-match rows.
    let mut w = if a.rows >= a.cols {
        a.clone()
    } else {
        a.transpose()
    };
    let n = w.cols;
    let mut off = 1.0f64;
    let mut sweeps = 0;
    while off > 1e-28 && sweeps < 60 {
        off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..w.rows {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if num::abs(apq) <= 1e-300 {
                    continue;
                }
                let denom = app * aqq;
                if denom > 0.0 {
                    off = num::max(off, apq * apq / denom);
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + num::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + num::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..w.rows {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
            }
        }
        sweeps += 1;
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for i in 0..w.rows {
                acc += w[(i, j)] * w[(i, j)];
            }
            num::sqrt(acc)
        })
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Rng;

    fn random_mat(n: usize, rng: &mut Rng) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = rng.symmetric();
            }
        }
        m
    }

    #[test]
    fn identity_eigenvalues_are_one() {
        let eig = sym_eigen(&Mat::identity(6)).unwrap();
        for v in eig.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn generalized_diag_against_identity() {
        let mut a = Mat::zeros(2, 2);
        a[(0, 0)] = 2.0;
        a[(1, 1)] = 3.0;
        let b = Mat::identity(2);
        let vals = generalized_sym_eigen(&a, &b, 1e-12).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-13);
        assert!((vals[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn lu_solves_random_spd_system() {
        let mut rng = Rng::new(1);
        let g = random_mat(25, &mut rng);
        // SPD: G^T G + I
        let mut a = g.transpose().matmul(&g);
        for i in 0..25 {
            a[(i, i)] += 1.0;
        }
        let x_true: Vec<f64> = (0..25).map(|i| (i as f64).sin()).collect();
        let b = a.matvec(&x_true);
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve(&b);
        let r = a.matvec(&x);
        let res: f64 = r
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        assert!(res <= 1e-12 * norm2(&b), "residual {res}");
    }

    #[test]
    fn lu_rejects_singular() {
        let mut a = Mat::zeros(3, 3);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = 1.0;
        // third row zero
        assert!(matches!(Lu::factor(&a), Err(LinalgError::SingularMatrix)));
    }

    #[test]
    fn sym_eigen_reconstructs_matrix() {
        let mut rng = Rng::new(2);
        let g = random_mat(12, &mut rng);
        let a = g.symmetric_part();
        let eig = sym_eigen(&a).unwrap();
        // A v_j = lambda_j v_j
        for j in 0..12 {
            let mut v = vec![0.0; 12];
            for i in 0..12 {
                v[i] = eig.vectors[(i, j)];
            }
            let av = a.matvec(&v);
            for i in 0..12 {
                assert!(
                    (av[i] - eig.values[j] * v[i]).abs() < 1e-10,
                    "eigenpair {j} residual"
                );
            }
        }
        // ascending order
        for j in 1..12 {
            assert!(eig.values[j] >= eig.values[j - 1]);
        }
    }

    #[test]
    fn generalized_handles_singular_b_by_deflation() {
        // B has a null direction; the pencil restricted to the complement
        // is diag(2,3) vs diag(1,1).
        let mut a = Mat::zeros(3, 3);
        a[(0, 0)] = 2.0;
        a[(1, 1)] = 3.0;
        a[(2, 2)] = 7.0;
        let mut b = Mat::identity(3);
        b[(2, 2)] = 0.0;
        let vals = generalized_sym_eigen(&a, &b, 1e-12).unwrap();
        assert_eq!(vals.len(), 2);
        assert!((vals[0] - 2.0).abs() < 1e-13);
        assert!((vals[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn singular_values_of_diag() {
        let mut a = Mat::zeros(3, 2);
        a[(0, 0)] = 3.0;
        a[(1, 1)] = 4.0;
        let sv = singular_values(&a);
        assert!((sv[0] - 4.0).abs() < 1e-12);
        assert!((sv[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_match_eigenvalues_for_spd() {
        let mut rng = Rng::new(3);
        let g = random_mat(8, &mut rng);
        let mut a = g.transpose().matmul(&g);
        for i in 0..8 {
            a[(i, i)] += 0.5;
        }
        let sv = singular_values(&a);
        let mut ev = sym_eigen(&a).unwrap().values;
        ev.reverse();
        for (s, e) in sv.iter().zip(ev.iter()) {
            assert!((s - e).abs() < 1e-9 * ev[0].abs());
        }
    }
}
