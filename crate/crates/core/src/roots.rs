//! Polynomial root finding by the Ehrlich-Aberth iteration.
//!
//! The iteration needs only the Newton ratio p/p' at the current
//! estimates, so fixed-point polynomials of iterated maps can be solved
//! without ever forming their coefficients: the ratio comes from running
//! the iteration and its derivative with a shared rescaling, which leaves
//! p/p' invariant. Dense coefficient polynomials use Horner evaluation
//! through the same driver.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ZERO;

pub(crate) const GOLDEN_ANGLE: f64 = 2.399963229728653;

/// Deterministic start points on a logarithmic spiral spanning the
/// annulus [r_lo, r_hi]. Distinct radii and golden-angle arguments avoid
/// the symmetric stalls that plague circle starts on symmetric polynomials.
pub fn spiral_init(n: usize, r_lo: f64, r_hi: f64) -> Vec<Complex64> {
    let lo = r_lo.max(1e-12);
    let hi = r_hi.max(lo * (1.0 + 1e-9));
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            let r = lo * (hi / lo).powf(t);
            let th = GOLDEN_ANGLE * i as f64 + 0.3;
            Complex64::new(r * th.cos(), r * th.sin())
        })
        .collect()
}

fn reset_point(i: usize, sweep: usize, init: &[Complex64]) -> Complex64 {
    let n = init.len();
    let base = init[(i * 31 + sweep * 17 + 7) % n];
    let th = GOLDEN_ANGLE * (sweep as f64 + 1.0);
    base * Complex64::new(th.cos(), th.sin()) * 1.1
}

/// Ehrlich-Aberth with Gauss-Seidel updates. `ratio` evaluates p/p';
/// `init` fixes the root count. Estimates lock once their correction or
/// ratio is below `tol` relative; the run is accepted when every estimate
/// sits on a (possibly multiple) root.
pub fn aberth<F: Fn(Complex64) -> Complex64>(
    ratio: F,
    init: &[Complex64],
    max_sweeps: usize,
    tol: f64,
) -> Result<Vec<Complex64>> {
    let n = init.len();
    let mut z: Vec<Complex64> = init.to_vec();
    if n == 0 {
        return Ok(z);
    }
    let mut locked = vec![false; n];
    let mut sweeps = 0;
    for sweep in 0..max_sweeps {
        sweeps = sweep + 1;
        let mut active = 0usize;
        for i in 0..n {
            if locked[i] {
                continue;
            }
            active += 1;
            let zi = z[i];
            let r = ratio(zi);
            if !r.re.is_finite() || !r.im.is_finite() {
                z[i] = zi * Complex64::new(1.0 + 1e-6, 1e-6) + Complex64::new(1e-9, 1e-9);
                continue;
            }
            if r.norm() <= 1e-15 * (1.0 + zi.norm()) {
                locked[i] = true;
                continue;
            }
            let mut sre = 0.0f64;
            let mut sim = 0.0f64;
            for (j, zj) in z.iter().enumerate() {
                if j == i {
                    continue;
                }
                let dre = zi.re - zj.re;
                let dim = zi.im - zj.im;
                let d2 = dre * dre + dim * dim;
                if d2 < 1e-300 {
                    continue;
                }
                let inv = 1.0 / d2;
                sre += dre * inv;
                sim -= dim * inv;
            }
            let denom = Complex64::new(1.0, 0.0) - r * Complex64::new(sre, sim);
            let w = if denom.norm() < 1e-12 { r } else { r / denom };
            let mut znew = zi - w;
            if !znew.re.is_finite() || !znew.im.is_finite() || znew.norm() > 1e9 {
                znew = reset_point(i, sweep, init);
            } else if w.norm() <= tol * (0.1 + znew.norm()) {
                locked[i] = true;
            }
            z[i] = znew;
        }
        if active == 0 {
            break;
        }
    }
    // Newton polish; kept only when it does not degrade the residual
    // (multiple roots can bounce).
    for zi in z.iter_mut() {
        for _ in 0..2 {
            let r = ratio(*zi);
            if !r.re.is_finite() || !r.im.is_finite() {
                break;
            }
            let cand = *zi - r;
            let rc = ratio(cand);
            if rc.re.is_finite() && rc.im.is_finite() && rc.norm() <= r.norm() {
                *zi = cand;
            } else {
                break;
            }
        }
    }
    let mut worst = 0.0f64;
    for &zi in &z {
        let rn = ratio(zi).norm() / (1.0 + zi.norm());
        if rn.is_finite() {
            worst = worst.max(rn);
        } else {
            worst = f64::INFINITY;
        }
    }
    if worst <= 1e-6 {
        Ok(z)
    } else {
        Err(Error::NoConvergence { iterations: sweeps, residual: worst })
    }
}

/// Newton ratio p/p' of a dense polynomial, coefficients ascending.
pub fn dense_ratio(coeffs: &[Complex64]) -> impl Fn(Complex64) -> Complex64 + '_ {
    move |z| {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        p / dp
    }
}

/// All complex roots of the dense polynomial (coefficients ascending,
/// exact-zero leading coefficients trimmed), each repeated per
/// multiplicity, sorted by (re, im). Degrees one and two are closed-form;
/// the rest run through `aberth` from a spiral in the Cauchy annulus.
pub fn roots_of_poly(coeffs: &[Complex64], max_sweeps: usize, tol: f64) -> Result<Vec<Complex64>> {
    let mut deg = coeffs.len().saturating_sub(1);
    while deg > 0 && coeffs[deg] == ZERO {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let c = &coeffs[..=deg];
    let mut m0 = 0;
    while m0 < deg && c[m0] == ZERO {
        m0 += 1;
    }
    let mut out = vec![ZERO; m0];
    let c = &c[m0..];
    let d = deg - m0;
    match d {
        0 => {}
        1 => out.push(-c[0] / c[1]),
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let mut sq = (b * b - 4.0 * a * cc).sqrt();
            if (b.conj() * sq).re < 0.0 {
                sq = -sq;
            }
            let q = -(b + sq) * 0.5;
            out.push(q / a);
            out.push(cc / q);
        }
        _ => {
            let an = c[d].norm();
            let hi = 1.0 + c[..d].iter().map(|x| x.norm()).fold(0.0, f64::max) / an;
            let others = c[1..].iter().map(|x| x.norm()).fold(0.0, f64::max);
            let lo = (c[0].norm() / (c[0].norm() + others)).max(hi * 1e-9);
            let init = spiral_init(d, lo, hi);
            out.extend(aberth(dense_ratio(c), &init, max_sweeps, tol)?);
        }
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}
