//! Small dense complex linear algebra.
//!
//! Fiber dimensions in this crate are at most 3, so eigenvalues come from
//! closed-form characteristic roots (polished by Newton), singular values from
//! the Hermitian eigenvalues of `A* A` (cyclic Jacobi), and Jordan structure
//! from explicit kernel chains. The only routine that sees larger matrices is
//! the pivoted LU used by the homological solver, whose systems stay dense and
//! small (a few hundred unknowns).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMat { rows: r, cols: c, data }
    }

    /// Real entries convenience constructor, row-major.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        CMat {
            rows,
            cols,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_columns(cols: &[Vec<Complex64>]) -> Self {
        let c = cols.len();
        let r = if c == 0 { 0 } else { cols[0].len() };
        let mut m = CMat::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for i in 0..r {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "inner dimensions");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self^n` by repeated multiplication; exponents here are tiny.
    pub fn pow(&self, n: usize) -> CMat {
        assert!(self.is_square());
        let mut out = CMat::identity(self.rows);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// LU with partial pivoting. Returns (combined LU, row permutation,
    /// permutation sign). Fails on a pivot below `PIVOT_FLOOR` times the
    /// matrix scale.
    fn lu(&self) -> Result<(CMat, Vec<usize>, f64)> {
        assert!(self.is_square());
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = self.max_abs().max(1.0);
        const PIVOT_FLOOR: f64 = 1e-300;
        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, lu[(r, col)].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if pivot_abs < PIVOT_FLOOR * scale {
                return Err(Error::SingularMatrix { pivot: pivot_abs });
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(col, pivot_row);
                sign = -sign;
            }
            let pivot = lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                for j in col + 1..n {
                    let sub = factor * lu[(col, j)];
                    lu[(r, j)] -= sub;
                }
            }
        }
        Ok((lu, perm, sign))
    }

    /// Solves `self * x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        assert_eq!(self.rows, b.len());
        let (lu, perm, _) = self.lu()?;
        let n = self.rows;
        let mut x: Vec<Complex64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let sub = lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = lu[(i, j)] * x[j];
                x[i] -= sub;
            }
            x[i] /= lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMat> {
        let n = self.rows;
        let (lu, perm, _) = self.lu()?;
        let mut inv = CMat::zeros(n, n);
        for col in 0..n {
            let mut x = vec![ZERO; n];
            for (i, &p) in perm.iter().enumerate() {
                x[i] = if p == col { ONE } else { ZERO };
            }
            for i in 0..n {
                for j in 0..i {
                    let sub = lu[(i, j)] * x[j];
                    x[i] -= sub;
                }
            }
            for i in (0..n).rev() {
                for j in i + 1..n {
                    let sub = lu[(i, j)] * x[j];
                    x[i] -= sub;
                }
                x[i] /= lu[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> Complex64 {
        match self.lu() {
            Ok((lu, _, sign)) => {
                let mut d = Complex64::new(sign, 0.0);
                for i in 0..self.rows {
                    d *= lu[(i, i)];
                }
                d
            }
            Err(_) => ZERO,
        }
    }

    /// Eigenvalues of the Hermitian matrix `self` by cyclic Jacobi, returned
    /// descending. The caller guarantees `self` is (numerically) Hermitian.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.is_square());
        let n = self.rows;
        let mut h = self.clone();
        let scale = h.fro_norm().max(1e-300);
        for _sweep in 0..60 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += h[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() < 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let g = h[(p, q)];
                    let gn = g.norm();
                    if gn < 1e-18 * scale {
                        continue;
                    }
                    let alpha = h[(p, p)].re;
                    let beta = h[(q, q)].re;
                    let tau = (beta - alpha) / (2.0 * gn);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let phase = g / gn;
                    let s = phase * (t * c);
                    // Columns p, q of the rotation are (c, -conj(s)) and (s, c).
                    for i in 0..n {
                        let hip = h[(i, p)];
                        let hiq = h[(i, q)];
                        h[(i, p)] = hip * c - hiq * s.conj();
                        h[(i, q)] = hip * s + hiq * c;
                    }
                    for j in 0..n {
                        let hpj = h[(p, j)];
                        let hqj = h[(q, j)];
                        h[(p, j)] = hpj * c - hqj * s;
                        h[(q, j)] = hpj * s.conj() + hqj * c;
                    }
                }
            }
        }
        let mut eigs: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();
        eigs.sort_by(|a, b| b.total_cmp(a));
        eigs
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let h = self.adjoint().mul(self);
        h.hermitian_eigenvalues()
            .into_iter()
            .map(|ev| ev.max(0.0).sqrt())
            .collect()
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Norm of the s-th exterior power: product of the s largest singular
    /// values. `s = 0` gives 1.
    pub fn exterior_norm(&self, s: usize) -> f64 {
        let sv = self.singular_values();
        assert!(s <= sv.len(), "exterior power order exceeds rank bound");
        sv.iter().take(s).product()
    }

    /// Eigenvalues with algebraic multiplicity for n <= 3, from closed-form
    /// characteristic roots polished by Newton on the characteristic
    /// polynomial. Order is unspecified.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        assert!(self.is_square());
        let n = self.rows;
        assert!(n >= 1 && n <= 3, "closed-form eigenvalues need n <= 3");
        let mut roots = match n {
            1 => vec![self[(0, 0)]],
            2 => {
                let tr = self[(0, 0)] + self[(1, 1)];
                let det = self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)];
                quadratic_roots(tr, det)
            }
            _ => {
                let c2 = self[(0, 0)] + self[(1, 1)] + self[(2, 2)];
                let minor = |i: usize, j: usize| {
                    self[(i, i)] * self[(j, j)] - self[(i, j)] * self[(j, i)]
                };
                let c1 = minor(0, 1) + minor(0, 2) + minor(1, 2);
                let c0 = self.det();
                cubic_roots(c2, c1, c0)
            }
        };
        // Newton polish on p(x) = det(self - x I) via its coefficients.
        let (c2, c1, c0) = match n {
            1 => (ZERO, ZERO, ZERO),
            2 => (ZERO, ZERO, ZERO),
            _ => {
                let c2 = self[(0, 0)] + self[(1, 1)] + self[(2, 2)];
                let minor = |i: usize, j: usize| {
                    self[(i, i)] * self[(j, j)] - self[(i, j)] * self[(j, i)]
                };
                (c2, minor(0, 1) + minor(0, 2) + minor(1, 2), self.det())
            }
        };
        if n == 3 {
            for r in roots.iter_mut() {
                for _ in 0..4 {
                    let p = ((*r - c2) * *r + c1) * *r - c0;
                    let dp = (Complex64::new(3.0, 0.0) * *r - c2 - c2) * *r + c1;
                    if dp.norm() < 1e-14 {
                        break;
                    }
                    *r -= p / dp;
                }
            }
        }
        roots
    }

    /// Basis of the (numerical) kernel at relative tolerance `tol`, by
    /// Gaussian elimination with full pivoting. Vectors are normalized.
    pub fn null_space(&self, tol: f64) -> Vec<Vec<Complex64>> {
        let mut a = self.clone();
        let n_rows = a.rows;
        let n_cols = a.cols;
        let scale = a.max_abs().max(1e-300);
        let mut col_perm: Vec<usize> = (0..n_cols).collect();
        let mut rank = 0;
        for step in 0..n_rows.min(n_cols) {
            let mut best = (step, step, 0.0);
            for i in step..n_rows {
                for j in step..n_cols {
                    let v = a[(i, j)].norm();
                    if v > best.2 {
                        best = (i, j, v);
                    }
                }
            }
            if best.2 <= tol * scale {
                break;
            }
            let (pi, pj, _) = best;
            if pi != step {
                for j in 0..n_cols {
                    let tmp = a[(step, j)];
                    a[(step, j)] = a[(pi, j)];
                    a[(pi, j)] = tmp;
                }
            }
            if pj != step {
                for i in 0..n_rows {
                    let tmp = a[(i, step)];
                    a[(i, step)] = a[(i, pj)];
                    a[(i, pj)] = tmp;
                }
                col_perm.swap(step, pj);
            }
            let pivot = a[(step, step)];
            for i in step + 1..n_rows {
                let f = a[(i, step)] / pivot;
                for j in step..n_cols {
                    let sub = f * a[(step, j)];
                    a[(i, j)] -= sub;
                }
            }
            rank += 1;
        }
        let mut basis = Vec::new();
        for free in rank..n_cols {
            let mut x = vec![ZERO; n_cols];
            x[free] = ONE;
            for i in (0..rank).rev() {
                let mut s = a[(i, free)];
                for j in i + 1..rank {
                    s += a[(i, j)] * x[j];
                }
                x[i] = -s / a[(i, i)];
            }
            let mut v = vec![ZERO; n_cols];
            for (pos, &orig) in col_perm.iter().enumerate() {
                v[orig] = x[pos];
            }
            let nrm = vec_norm(&v);
            if nrm > 0.0 {
                for e in v.iter_mut() {
                    *e /= Complex64::new(nrm, 0.0);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// A particular solution of `self * x = b` when the system is consistent,
    /// tolerating rank deficiency (free variables set to zero). Returns None
    /// when inconsistent at tolerance `tol`.
    pub fn solve_consistent(&self, b: &[Complex64], tol: f64) -> Option<Vec<Complex64>> {
        assert_eq!(self.rows, b.len());
        let n_rows = self.rows;
        let n_cols = self.cols;
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        let scale = a.max_abs().max(vec_norm(&rhs)).max(1e-300);
        let mut col_perm: Vec<usize> = (0..n_cols).collect();
        let mut rank = 0;
        for step in 0..n_rows.min(n_cols) {
            let mut best = (step, step, 0.0);
            for i in step..n_rows {
                for j in step..n_cols {
                    let v = a[(i, j)].norm();
                    if v > best.2 {
                        best = (i, j, v);
                    }
                }
            }
            if best.2 <= tol * scale {
                break;
            }
            let (pi, pj, _) = best;
            if pi != step {
                for j in 0..n_cols {
                    let tmp = a[(step, j)];
                    a[(step, j)] = a[(pi, j)];
                    a[(pi, j)] = tmp;
                }
                rhs.swap(step, pi);
            }
            if pj != step {
                for i in 0..n_rows {
                    let tmp = a[(i, step)];
                    a[(i, step)] = a[(i, pj)];
                    a[(i, pj)] = tmp;
                }
                col_perm.swap(step, pj);
            }
            let pivot = a[(step, step)];
            for i in step + 1..n_rows {
                let f = a[(i, step)] / pivot;
                for j in step..n_cols {
                    let sub = f * a[(step, j)];
                    a[(i, j)] -= sub;
                }
                let sub = f * rhs[step];
                rhs[i] -= sub;
            }
            rank += 1;
        }
        for i in rank..n_rows {
            if rhs[i].norm() > tol * scale * 10.0 {
                return None;
            }
        }
        let mut x = vec![ZERO; n_cols];
        for i in (0..rank).rev() {
            let mut s = rhs[i];
            for j in i + 1..rank {
                s -= a[(i, j)] * x[j];
            }
            x[i] = s / a[(i, i)];
        }
        let mut out = vec![ZERO; n_cols];
        for (pos, &orig) in col_perm.iter().enumerate() {
            out[orig] = x[pos];
        }
        Some(out)
    }

    /// Monic characteristic polynomial and its derivative at `z`, for
    /// matrices up to 3x3.
    pub fn char_eval(&self, z: Complex64) -> (Complex64, Complex64) {
        assert!(self.is_square() && self.rows <= 3);
        match self.rows {
            1 => (z - self[(0, 0)], ONE),
            2 => {
                let tr = self[(0, 0)] + self[(1, 1)];
                let det = self.det();
                ((z - tr) * z + det, z + z - tr)
            }
            _ => {
                let c2 = self[(0, 0)] + self[(1, 1)] + self[(2, 2)];
                let minor =
                    |i: usize, j: usize| self[(i, i)] * self[(j, j)] - self[(i, j)] * self[(j, i)];
                let c1 = minor(0, 1) + minor(0, 2) + minor(1, 2);
                let c0 = self.det();
                let p = ((z - c2) * z + c1) * z - c0;
                let dp = (Complex64::new(3.0, 0.0) * z - c2 - c2) * z + c1;
                (p, dp)
            }
        }
    }

    /// Copy of the `nr x nc` block with upper-left corner (r0, c0).
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> CMat {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        CMat::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

fn quadratic_roots(tr: Complex64, det: Complex64) -> Vec<Complex64> {
    let disc = (tr * tr - Complex64::new(4.0, 0.0) * det).sqrt();
    // Pick the sign that avoids cancellation in tr +- disc.
    let s = if (tr + disc).norm() >= (tr - disc).norm() { disc } else { -disc };
    let r1 = (tr + s) / 2.0;
    let r2 = if r1.norm() > 1e-300 { det / r1 } else { (tr - s) / 2.0 };
    vec![r1, r2]
}

/// Roots of x^3 - c2 x^2 + c1 x - c0 (complex Cardano).
fn cubic_roots(c2: Complex64, c1: Complex64, c0: Complex64) -> Vec<Complex64> {
    let third = Complex64::new(1.0 / 3.0, 0.0);
    let shift = c2 * third;
    let p = c1 - c2 * c2 * third;
    let q = c2 * c2 * c2 * Complex64::new(-2.0 / 27.0, 0.0) + c1 * c2 * third - c0;
    // t^3 + p t + q = 0
    let half_q = q / 2.0;
    let disc = (half_q * half_q + (p / 3.0).powu(3)).sqrt();
    let mut u3 = -half_q + disc;
    if u3.norm() < 1e-30 {
        u3 = -half_q - disc;
    }
    if u3.norm() < 1e-300 {
        // p and q both ~ 0: triple root at the shift.
        return vec![shift, shift, shift];
    }
    let u = u3.cbrt();
    let v = -p / (u * 3.0);
    let omega = Complex64::new(-0.5, 0.75f64.sqrt());
    let omega_bar = omega.conj();
    let mut roots = Vec::with_capacity(3);
    let mut uw = u;
    let mut vw = v;
    for _ in 0..3 {
        roots.push(uw + vw + shift);
        uw *= omega;
        vw *= omega_bar;
    }
    roots
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Hermitian inner product <a, b> = sum conj(a_i) b_i.
pub fn vec_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_normalize(v: &mut [Complex64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for e in v.iter_mut() {
            *e /= Complex64::new(n, 0.0);
        }
    }
}

/// Neumaier compensated sum; the cycle averages add up to ~d^k*n terms of
/// mixed magnitude and plain summation loses digits the acceptance bounds
/// care about.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            comp += (s - t) + v;
        } else {
            comp += (v - t) + s;
        }
        s = t;
    }
    s + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_and_inverse_roundtrip() {
        let a = CMat::from_rows(&[
            &[c(2.0, 1.0), c(0.5, 0.0), c(0.0, -1.0)],
            &[c(0.0, 0.0), c(1.5, -0.5), c(2.0, 0.0)],
            &[c(1.0, 0.0), c(0.0, 2.0), c(3.0, 1.0)],
        ]);
        let b = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)];
        let x = a.solve(&b).unwrap();
        let bx = a.mul_vec(&x);
        for (u, v) in bx.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
        let inv = a.inverse().unwrap();
        let id = a.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { ONE } else { ZERO };
                assert!((id[(i, j)] - target).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_values_antidiagonal() {
        // [[0,2],[1,0]]: singular values {2,1}; exterior norms 2 and 2.
        let m = CMat::from_real(2, 2, &[0.0, 2.0, 1.0, 0.0]);
        let sv = m.singular_values();
        assert!((sv[0] - 2.0).abs() < 1e-12);
        assert!((sv[1] - 1.0).abs() < 1e-12);
        assert!((m.exterior_norm(1) - 2.0).abs() < 1e-12);
        assert!((m.exterior_norm(2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_match_known_spectra() {
        let m = CMat::from_real(2, 2, &[0.5, 1.0, 0.0, 0.25]);
        let mut eigs: Vec<f64> = m.eigenvalues().iter().map(|z| z.re).collect();
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] - 0.25).abs() < 1e-12);
        assert!((eigs[1] - 0.5).abs() < 1e-12);

        // Rotation by 90 degrees: eigenvalues +-i.
        let r = CMat::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let eigs = r.eigenvalues();
        let mut ims: Vec<f64> = eigs.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-12 && (ims[1] - 1.0).abs() < 1e-12);
        for e in &eigs {
            assert!(e.re.abs() < 1e-12);
        }

        let m3 = CMat::from_rows(&[
            &[c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            &[c(0.0, 0.0), c(0.3, 0.4), c(2.0, 0.0)],
            &[c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)],
        ]);
        let mut mods: Vec<f64> = m3.eigenvalues().iter().map(|z| z.norm()).collect();
        mods.sort_by(f64::total_cmp);
        assert!((mods[0] - 0.2).abs() < 1e-10);
        assert!((mods[1] - 0.5).abs() < 1e-10);
        assert!((mods[2] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn cubic_with_triple_root() {
        let m = CMat::from_rows(&[
            &[c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            &[c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        ]);
        for e in m.eigenvalues() {
            assert!((e - c(0.5, 0.0)).norm() < 1e-5);
        }
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = CMat::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let ns = m.null_space(1e-12);
        assert_eq!(ns.len(), 1);
        let img = m.mul_vec(&ns[0]);
        assert!(vec_norm(&img) < 1e-12);
    }

    #[test]
    fn consistent_singular_solve() {
        // (A - 0.5 I) v = e1 with A the 2x2 Jordan block at 0.5.
        let m = CMat::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let x = m.solve_consistent(&[ONE, ZERO], 1e-12).unwrap();
        let r = m.mul_vec(&x);
        assert!((r[0] - ONE).norm() < 1e-12 && r[1].norm() < 1e-12);
        assert!(m.solve_consistent(&[ZERO, ONE], 1e-12).is_none());
    }

    #[test]
    fn compensated_sum_catches_cancellation() {
        let vals = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(vals.iter().copied()), 2.0);
    }
}
