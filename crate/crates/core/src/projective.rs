//! Holomorphic endomorphisms of complex projective space, dim <= 2.
//!
//! A map is stored through its homogeneous components: k+1 homogeneous
//! polynomials of the same degree d >= 2 in k+1 variables with no common
//! zero besides the origin. Everything downstream (periodic points,
//! multipliers, inverse branches) works through affine charts: pick the
//! coordinate patch where the center has its largest entry, translate the
//! center to the origin, and read the map off as a polynomial jet there.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jets::{MultiIndex, PolyMapJet, ScalarPoly};
use crate::linalg::{CMat, ONE, ZERO};

/// Largest affine root count we are willing to hand to the root engine.
pub const MAX_ROOT_COUNT: usize = 16384;

#[derive(Clone, Debug)]
pub struct ProjectiveEndomorphism {
    k: usize,
    degree: usize,
    comps: Vec<ScalarPoly>,
    crit: ScalarPoly,
    /// Set when the map is a coordinatewise product of two one-variable
    /// polynomial maps on the plane; the factors then carry the exact
    /// periodic-point enumeration.
    factors: Option<(Box<ProjectiveEndomorphism>, Box<ProjectiveEndomorphism>)>,
}

impl ProjectiveEndomorphism {
    pub fn new(k: usize, degree: usize, comps: Vec<ScalarPoly>) -> Result<Self> {
        if k == 0 || k > 2 {
            return Err(Error::InvalidEndomorphism(alloc::format!(
                "dimension {k} not supported (need 1 or 2)"
            )));
        }
        if degree < 2 {
            return Err(Error::InvalidEndomorphism(alloc::format!(
                "algebraic degree {degree} below 2"
            )));
        }
        if comps.len() != k + 1 {
            return Err(Error::DimensionMismatch { expected: k + 1, got: comps.len() });
        }
        for c in &comps {
            if c.dim() != k + 1 {
                return Err(Error::DimensionMismatch { expected: k + 1, got: c.dim() });
            }
            for (mi, _) in c.terms() {
                if mi.order() != degree {
                    return Err(Error::InvalidEndomorphism(alloc::format!(
                        "component term of order {} in a degree-{} map",
                        mi.order(),
                        degree
                    )));
                }
            }
        }
        let crit = jacobian_determinant(&comps, k, degree);
        let f = ProjectiveEndomorphism { k, degree, comps, crit, factors: None };
        f.check_nondegenerate()?;
        Ok(f)
    }

    /// Build a dim-1 map from affine numerator/denominator coefficients
    /// (ascending order). The common degree is max(deg p, deg q) and both
    /// are homogenized to it, so `p = z^2` is `[0,0,1], [1]`.
    pub fn from_affine_one_var(p: &[Complex64], q: &[Complex64]) -> Result<Self> {
        let dp = trim_len(p);
        let dq = trim_len(q);
        if dp == 0 && dq == 0 {
            return Err(Error::InvalidEndomorphism("zero rational map".into()));
        }
        let d = dp.max(dq).saturating_sub(1);
        let mut top = ScalarPoly::zero(2);
        for (j, &c) in p.iter().enumerate().take(dp) {
            if c != ZERO {
                top.add_term(MultiIndex::new(&[j, d - j]).expect("exponent in range"), c);
            }
        }
        let mut bot = ScalarPoly::zero(2);
        for (j, &c) in q.iter().enumerate().take(dq) {
            if c != ZERO {
                bot.add_term(MultiIndex::new(&[j, d - j]).expect("exponent in range"), c);
            }
        }
        ProjectiveEndomorphism::new(1, d, vec![top, bot])
    }

    /// Coordinatewise product of two one-variable polynomial maps of the
    /// same degree: (z, w) -> (p1(z), p2(w)) extended to the plane.
    pub fn product(f1: &ProjectiveEndomorphism, f2: &ProjectiveEndomorphism) -> Result<Self> {
        if f1.k != 1 || f2.k != 1 {
            return Err(Error::InvalidEndomorphism("product factors must have dim 1".into()));
        }
        if f1.degree != f2.degree {
            return Err(Error::InvalidEndomorphism(alloc::format!(
                "product factors of degrees {} and {}",
                f1.degree, f2.degree
            )));
        }
        let d = f1.degree;
        let f1n = f1.normalized_polynomial()?;
        let f2n = f2.normalized_polynomial()?;
        // Variables: Z = 0, W = 1, T = 2. Factor variables map as
        // (z, w) -> (Z, T) for f1 and (W, T) for f2.
        let lift = |p: &ScalarPoly, var: usize| {
            let mut out = ScalarPoly::zero(3);
            for (mi, &c) in p.terms() {
                let mut e = [0usize; 3];
                e[var] = mi.entry(0);
                e[2] = mi.entry(1);
                out.add_term(MultiIndex::new(&e).expect("exponent in range"), c);
            }
            out
        };
        let mut t_pow = ScalarPoly::zero(3);
        t_pow.add_term(MultiIndex::new(&[0, 0, d]).expect("exponent in range"), ONE);
        let comps =
            vec![lift(&f1n.comps[0], 0), lift(&f2n.comps[0], 1), t_pow];
        let mut f = ProjectiveEndomorphism::new(2, d, comps)?;
        f.factors = Some((Box::new(f1n), Box::new(f2n)));
        Ok(f)
    }

    /// Rescale so the denominator component is exactly W^d; errors when the
    /// map is not a polynomial (denominator not a W^d multiple).
    fn normalized_polynomial(&self) -> Result<ProjectiveEndomorphism> {
        let wd = MultiIndex::new(&[0, self.degree]).expect("exponent in range");
        let c = self.comps[1].coeff(&wd);
        if self.comps[1].num_terms() != 1 || c == ZERO {
            return Err(Error::InvalidEndomorphism(
                "product factors must be polynomial maps".into(),
            ));
        }
        let inv = ONE / c;
        ProjectiveEndomorphism::new(
            1,
            self.degree,
            self.comps.iter().map(|p| p.scale(inv)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// d_t = d^k, the generic fiber cardinality.
    pub fn topological_degree(&self) -> usize {
        self.degree.pow(self.k as u32)
    }

    pub fn components(&self) -> &[ScalarPoly] {
        &self.comps
    }

    pub fn factors(&self) -> Option<(&ProjectiveEndomorphism, &ProjectiveEndomorphism)> {
        self.factors.as_ref().map(|(a, b)| (a.as_ref(), b.as_ref()))
    }

    /// Jacobian determinant of the homogeneous lift; its zero set is the
    /// critical set (plus the exceptional fixed-locus factor in dim 1,
    /// harmless for the "stay away from it" checks we run).
    pub fn critical_polynomial(&self) -> &ScalarPoly {
        &self.crit
    }

    pub fn critical_value_at(&self, x: &[Complex64]) -> f64 {
        let xn = normalize_rep(x);
        self.crit.evaluate(&xn).norm()
    }

    /// One application in homogeneous coordinates, no normalization.
    pub fn eval_raw(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.comps.iter().map(|c| c.evaluate(x)).collect()
    }

    /// One application followed by canonical normalization.
    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        normalize_rep(&self.eval_raw(x))
    }

    pub fn eval_n(&self, x: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut p = normalize_rep(x);
        for _ in 0..n {
            p = self.eval(&p);
        }
        p
    }

    /// No common zero away from the origin. Dim 1 uses the resultant of
    /// the two binary forms; dim 2 falls back to dense sphere sampling
    /// with a minimum-modulus threshold.
    fn check_nondegenerate(&self) -> Result<()> {
        let scale = self
            .comps
            .iter()
            .map(|c| c.max_coeff_norm())
            .fold(0.0f64, f64::max);
        if scale == 0.0 {
            return Err(Error::InvalidEndomorphism("all components zero".into()));
        }
        if self.k == 1 {
            let inv = Complex64::new(1.0 / scale, 0.0);
            let res = binary_resultant(
                &self.comps[0].scale(inv),
                &self.comps[1].scale(inv),
                self.degree,
            )?;
            if res.norm() < 1e-12 {
                return Err(Error::InvalidEndomorphism(alloc::format!(
                    "components share a root (resultant {:.3e})",
                    res.norm()
                )));
            }
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x70726f6a);
        let mut min_val = f64::INFINITY;
        for _ in 0..400 {
            let x = random_sphere_point(self.k + 1, &mut rng);
            let val = self
                .eval_raw(&x)
                .iter()
                .map(|v| v.norm())
                .fold(0.0f64, f64::max);
            min_val = min_val.min(val / scale);
        }
        if min_val < 1e-7 {
            return Err(Error::InvalidEndomorphism(alloc::format!(
                "components nearly vanish together (min sampled modulus {min_val:.3e})"
            )));
        }
        Ok(())
    }
}

fn trim_len(c: &[Complex64]) -> usize {
    let mut n = c.len();
    while n > 0 && c[n - 1] == ZERO {
        n -= 1;
    }
    n
}

/// Coefficient of Z^i W^(d-i) read off a binary form.
fn binary_coeff(p: &ScalarPoly, d: usize, i: usize) -> Complex64 {
    p.coeff(&MultiIndex::new(&[i, d - i]).expect("exponent in range"))
}

/// Sylvester resultant of two binary forms of common degree d.
fn binary_resultant(p: &ScalarPoly, q: &ScalarPoly, d: usize) -> Result<Complex64> {
    let n = 2 * d;
    let mut m = CMat::zeros(n, n);
    for row in 0..d {
        for i in 0..=d {
            // p row: descending coefficients shifted right by `row`.
            m[(row, row + i)] = binary_coeff(p, d, d - i);
            m[(row + d, row + i)] = binary_coeff(q, d, d - i);
        }
    }
    Ok(m.det())
}

/// 2x2 or 3x3 polynomial Jacobian determinant of the homogeneous lift.
fn jacobian_determinant(comps: &[ScalarPoly], k: usize, degree: usize) -> ScalarPoly {
    let n = k + 1;
    let max_deg = n * degree;
    let d = |i: usize, j: usize| comps[i].derivative(j);
    if n == 2 {
        return d(0, 0)
            .mul_truncated(&d(1, 1), max_deg)
            .sub(&d(0, 1).mul_truncated(&d(1, 0), max_deg));
    }
    let mut det = ScalarPoly::zero(n);
    let sign = [1.0, -1.0, 1.0];
    for c in 0..3 {
        let minor = d(1, (c + 1) % 3)
            .mul_truncated(&d(2, (c + 2) % 3), max_deg)
            .sub(&d(1, (c + 2) % 3).mul_truncated(&d(2, (c + 1) % 3), max_deg));
        det = det.add(
            &d(0, c)
                .mul_truncated(&minor, max_deg)
                .scale(Complex64::new(sign[c], 0.0)),
        );
    }
    det
}

pub fn random_sphere_point(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
            .collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.iter().map(|z| z / n).collect();
        }
    }
}

/// Canonical unit representative: unit hermitian norm and the largest
/// coordinate rotated to the positive real axis. Two representatives of the
/// same point map to (nearly) identical vectors, which makes deduplication
/// and orbit comparison plain componentwise arithmetic.
pub fn normalize_rep(x: &[Complex64]) -> Vec<Complex64> {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut best = 0;
    for i in 1..x.len() {
        if x[i].norm() > x[best].norm() {
            best = i;
        }
    }
    let pivot = x[best];
    if norm == 0.0 || pivot == ZERO {
        return x.to_vec();
    }
    let phase = pivot / pivot.norm();
    let scale = phase.conj() / norm;
    x.iter().map(|z| z * scale).collect()
}

/// sin of the Fubini-Study angle: |x ^ y| / (|x| |y|). Zero iff the points
/// coincide, symmetric, and representative-independent.
pub fn proj_distance(x: &[Complex64], y: &[Complex64]) -> f64 {
    let mut wedge = 0.0f64;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            wedge += (x[i] * y[j] - x[j] * y[i]).norm_sqr();
        }
    }
    let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let ny = y.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if nx == 0.0 || ny == 0.0 {
        return 0.0;
    }
    (wedge / (nx * ny)).sqrt()
}

/// Affine chart at a center: the patch is the coordinate of largest
/// modulus, the remaining coordinates (in increasing index order) are the
/// chart directions, and the center sits at the chart origin.
#[derive(Clone, Debug)]
pub struct Chart {
    center: Vec<Complex64>,
    patch: usize,
}

impl Chart {
    pub fn at(center: &[Complex64]) -> Chart {
        let center = normalize_rep(center);
        let mut patch = 0;
        for i in 1..center.len() {
            if center[i].norm() > center[patch].norm() {
                patch = i;
            }
        }
        Chart { center, patch }
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn patch(&self) -> usize {
        self.patch
    }

    pub fn dim(&self) -> usize {
        self.center.len() - 1
    }

    /// Chart directions: the coordinate indices other than the patch.
    pub fn axes(&self) -> Vec<usize> {
        (0..self.center.len()).filter(|&i| i != self.patch).collect()
    }

    /// Center in patch-affine coordinates (center / center[patch]).
    fn affine_center(&self) -> Vec<Complex64> {
        let inv = ONE / self.center[self.patch];
        self.center.iter().map(|z| z * inv).collect()
    }

    /// Homogeneous representative of the point with chart coordinates w.
    pub fn point(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut x = self.affine_center();
        for (j, &axis) in self.axes().iter().enumerate() {
            x[axis] += w[j];
        }
        x
    }

    /// Chart coordinates of a projective point near the center.
    pub fn coords(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let xp = x[self.patch];
        let scale = x.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if xp.norm() < 1e-9 * scale {
            return Err(Error::InvalidEndomorphism(
                "point on the chart's excluded hyperplane".into(),
            ));
        }
        let a = self.affine_center();
        let inv = ONE / xp;
        Ok(self.axes().iter().map(|&i| x[i] * inv - a[i]).collect())
    }

    /// Largest sampled radius (from m0, shrinking by 0.7) on which the
    /// chart is a 2-bi-Lipschitz embedding into the projective metric:
    /// |w1 - w2| / 2 <= d(point(w1), point(w2)) <= 2 |w1 - w2|.
    pub fn distortion_radius(&self, m0: f64) -> Result<f64> {
        let mut r = m0;
        let k = self.dim();
        // At w = 0 the ratio d_proj / |dw| lies in [1/(k+1), 1] because the
        // patch coordinate is the largest one; allow another factor 2 for
        // curvature before declaring the radius too big.
        let lo = 0.5 / (k as f64 + 1.0);
        'shrink: while r >= 1e-6 {
            let mut rng = ChaCha8Rng::seed_from_u64(0x63686172);
            for _ in 0..160 {
                let w1 = random_ball_point(k, r, &mut rng);
                let w2 = random_ball_point(k, r, &mut rng);
                let dw = dist(&w1, &w2);
                if dw < 1e-12 {
                    continue;
                }
                let dp = proj_distance(&self.point(&w1), &self.point(&w2));
                if dp < lo * dw || dp > 2.0 * dw {
                    r *= 0.7;
                    continue 'shrink;
                }
            }
            return Ok(r);
        }
        Err(Error::RadiusCollapse { floor: 1e-6 })
    }
}

pub fn random_ball_point(dim: usize, radius: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
            .collect();
        if v.iter().map(|z| z.norm_sqr()).sum::<f64>() <= 1.0 {
            return v.iter().map(|z| z * radius).collect();
        }
    }
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Substitute chart-coordinate polynomials into a homogeneous component.
fn substitute(poly: &ScalarPoly, args: &[ScalarPoly], out_dim: usize, max_deg: usize) -> ScalarPoly {
    let mut powers: Vec<Vec<ScalarPoly>> = Vec::with_capacity(args.len());
    for (j, arg) in args.iter().enumerate() {
        let mut needed = 0;
        for (mi, _) in poly.terms() {
            needed = needed.max(mi.entry(j));
        }
        let mut pw = vec![ScalarPoly::constant(out_dim, ONE)];
        for e in 1..=needed {
            let next = pw[e - 1].mul_truncated(arg, max_deg);
            pw.push(next);
        }
        powers.push(pw);
    }
    let mut out = ScalarPoly::zero(out_dim);
    for (mi, &c) in poly.terms() {
        let mut term = ScalarPoly::constant(out_dim, c);
        for (j, e) in mi.entries().enumerate() {
            if e > 0 {
                term = term.mul_truncated(&powers[j][e], max_deg);
            }
        }
        out = out.add(&term);
    }
    out
}

impl ProjectiveEndomorphism {
    /// Germ of the map between two given charts as a polynomial jet fixing
    /// the origin: from.center must map to to.center (within roundoff; the
    /// residual constant term is measured, checked, and removed).
    pub fn chart_germ(&self, from: &Chart, to: &Chart, degree: usize) -> Result<PolyMapJet> {
        let k = self.k;
        let a = from.affine_center();
        let axes = from.axes();
        // X(w): homogeneous representative of the chart point, entries are
        // degree-<=1 polynomials in the k chart coordinates.
        let x_polys: Vec<ScalarPoly> = (0..=k)
            .map(|i| {
                let mut p = ScalarPoly::constant(k, a[i]);
                if let Some(j) = axes.iter().position(|&ax| ax == i) {
                    p = p.add(&ScalarPoly::variable(k, j));
                }
                p
            })
            .collect();
        let y_polys: Vec<ScalarPoly> = self
            .comps
            .iter()
            .map(|c| substitute(c, &x_polys, k, degree))
            .collect();
        let y_patch = &y_polys[to.patch()];
        let y0 = y_patch.coeff(&MultiIndex::zero(k));
        let y_scale = y_polys
            .iter()
            .map(|p| p.max_coeff_norm())
            .fold(0.0f64, f64::max);
        if y0.norm() < 1e-9 * y_scale {
            return Err(Error::InvalidEndomorphism(
                "image center on the target chart's excluded hyperplane".into(),
            ));
        }
        let recip = y_patch.recip_truncated(degree)?;
        let a_to = to.affine_center();
        let mut comps_out = Vec::with_capacity(k);
        for &i in &to.axes() {
            let g = y_polys[i].mul_truncated(&recip, degree);
            let c0 = g.coeff(&MultiIndex::zero(k)) - a_to[i];
            if c0.norm() > 1e-7 * (1.0 + g.max_coeff_norm()) {
                return Err(Error::InvalidEndomorphism(alloc::format!(
                    "chart centers are not consecutive (offset {:.3e})",
                    c0.norm()
                )));
            }
            // Dropping every order-0 term subtracts a_to[i] and the tiny
            // roundoff offset in one stroke, so the germ fixes the origin
            // exactly.
            let mut clean = ScalarPoly::zero(k);
            for (mi, &c) in g.terms() {
                if mi.order() > 0 {
                    clean.add_term(*mi, c);
                }
            }
            comps_out.push(clean);
        }
        PolyMapJet::from_components(&comps_out, degree)
    }

    /// Derivative of the chart germ at the chart origin, with the charts it
    /// connects. Closed-form quotient rule on the homogeneous Jacobian; no
    /// jet is built.
    pub fn chart_derivative(&self, x: &[Complex64]) -> Result<(CMat, Chart, Chart)> {
        let from = Chart::at(x);
        let y_raw = self.eval_raw(&normalize_rep(x));
        let to = Chart::at(&y_raw);
        let d = self.chart_derivative_between(&from, &to)?;
        Ok((d, from, to))
    }

    /// Same, with both charts pinned by the caller (orbit chains need the
    /// target chart of one step to be the source chart of the next).
    pub fn chart_derivative_between(&self, from: &Chart, to: &Chart) -> Result<CMat> {
        let k = self.k;
        let xa = from.affine_center();
        let y: Vec<Complex64> = self.comps.iter().map(|c| c.evaluate(&xa)).collect();
        let yp = y[to.patch()];
        let y_scale = y.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if yp.norm() < 1e-9 * y_scale {
            return Err(Error::InvalidEndomorphism(
                "image center on the target chart's excluded hyperplane".into(),
            ));
        }
        let axes_from = from.axes();
        let axes_to = to.axes();
        // Homogeneous Jacobian columns restricted to the chart directions.
        let mut dy = CMat::zeros(k + 1, k);
        for (col, &ax) in axes_from.iter().enumerate() {
            for i in 0..=k {
                dy[(i, col)] = self.comps[i].derivative(ax).evaluate(&xa);
            }
        }
        let inv_yp = ONE / yp;
        let mut out = CMat::zeros(k, k);
        for (row, &i) in axes_to.iter().enumerate() {
            for col in 0..k {
                out[(row, col)] =
                    (dy[(i, col)] * yp - y[i] * dy[(to.patch(), col)]) * inv_yp * inv_yp;
            }
        }
        Ok(out)
    }
}
