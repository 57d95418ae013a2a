//! Degree-by-degree normalization of germ cocycles and the renormalization
//! limit.
//!
//! After the linear reduction every germ in the cocycle has the same block
//! diagonal contracting linear part A. The homological equation at degree m,
//!
//!   Q_(i+1) o A - A o Q_i = -(non-resonant part of M_i),
//!
//! removes the non-resonant degree-m coefficients; resonant coefficients are
//! untouchable and survive into the normal form. Because A is block
//! diagonal, the equation decouples over classes indexed by the target block
//! and the per-block degree profile of the monomial, and each class is a
//! finite cyclic linear system. Degrees above the resonance bound q are
//! uniformly sub-resonant, and the renormalization limit
//! T_i = lim (N^n)^(-1) o F^n removes that entire tail at once with
//! geometric convergence.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::cocycle::{oseledec_reduce, PeriodicGermCocycle, ReductionResult};
use crate::error::{Error, Result};
use crate::jets::{multi_indices_of_order, MultiIndex, PolyMapJet, ScalarPoly};
use crate::linalg::{CMat, ONE, ZERO};
use crate::spectrum::{build_table, project, JetPart, ResonanceTable};

/// Per-block total degrees of a monomial: entry b is the sum of the
/// exponents over the variables of block b.
fn block_profile(alpha: &MultiIndex, table: &ResonanceTable) -> MultiIndex {
    let spec = table.spec();
    let mut entries = vec![0usize; spec.num_blocks()];
    for (i, a) in alpha.entries().enumerate() {
        entries[spec.block_of_component(i) - 1] += a;
    }
    MultiIndex::new(&entries).unwrap()
}

/// Checks that every linear part is block diagonal for the table's block
/// structure; the class decoupling of the homological equation depends on
/// it. The table alone decides which classes are resonant, so rate bounds
/// are the caller's concern (the reduction stage enforces them).
fn check_linear_parts(a: &[CMat], table: &ResonanceTable) -> Result<()> {
    let spec = table.spec();
    for ai in a {
        if !ai.is_square() || ai.rows() != spec.dim() {
            return Err(Error::DimensionMismatch { expected: spec.dim(), got: ai.rows() });
        }
        let scale = ai.max_abs().max(1e-300);
        for r in 0..spec.dim() {
            for c in 0..spec.dim() {
                if spec.block_of_component(r) != spec.block_of_component(c)
                    && ai[(r, c)].norm() > 1e-10 * scale
                {
                    return Err(Error::InvalidCocycle(
                        "linear part is not block diagonal for the spectrum".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Solves the degree-m homological equation for the periodic chain:
/// returns homogeneous Q_i with Q_(i+1) o A_i - A_i o Q_i equal to minus
/// the non-resonant part of M_i, and zero resonant coefficients.
///
/// `a` holds the per-point linear parts and `parts` the degree-m
/// homogeneous parts of the germs, one each per orbit point.
pub fn solve_homological(
    a: &[CMat],
    table: &ResonanceTable,
    parts: &[PolyMapJet],
    m: usize,
) -> Result<Vec<PolyMapJet>> {
    if m < 2 {
        return Err(Error::InvalidJet("homological degrees start at 2".into()));
    }
    check_linear_parts(a, table)?;
    let spec = table.spec();
    let k = spec.dim();
    let l = spec.num_blocks();
    let p = parts.len();
    if p == 0 || a.len() != p {
        return Err(Error::InvalidCocycle(
            "need one linear part and one homogeneous part per orbit point".into(),
        ));
    }
    for part in parts {
        if part.dim() != k {
            return Err(Error::DimensionMismatch { expected: k, got: part.dim() });
        }
        if !part.is_homogeneous(m) {
            return Err(Error::NotHomogeneous { expected: m });
        }
    }

    let monomials = multi_indices_of_order(k, m);
    let mut q: Vec<PolyMapJet> = (0..p).map(|_| PolyMapJet::new(k, m).unwrap()).collect();

    for profile in multi_indices_of_order(l, m) {
        let monos: Vec<MultiIndex> = monomials
            .iter()
            .filter(|alpha| block_profile(alpha, table) == profile)
            .copied()
            .collect();
        if monos.is_empty() {
            continue;
        }
        // Substitution matrices of Q -> Q o A_i on this profile, identical
        // for every component: entry (r, c) is the z^monos[r] coefficient
        // of (A_i z)^monos[c]. Block diagonality keeps the profile closed.
        let smats: Vec<CMat> = a.iter().map(|ai| substitution_matrix(ai, &monos, m)).collect();
        let profile_weight: f64 = profile
            .entries()
            .enumerate()
            .map(|(b, e)| e as f64 * spec.rate(b + 1))
            .sum();
        for bj in 1..=l {
            let gap = profile_weight - spec.rate(bj);
            if gap.abs() <= table.delta_res() {
                // Resonant class: no correction exists; the coefficients
                // stay in the normal form.
                continue;
            }
            let start = spec.block_start(bj);
            let comps: Vec<usize> =
                (start..start + spec.blocks()[bj - 1].multiplicity).collect();
            let dsz = comps.len() * monos.len();
            let nn = p * dsz;
            let slot = |i: usize, ci: usize, t: usize| i * dsz + ci * monos.len() + t;
            let mut big = CMat::zeros(nn, nn);
            let mut rhs = vec![ZERO; nn];
            let mut rhs_zero = true;
            for i in 0..p {
                let next = (i + 1) % p;
                for ci in 0..comps.len() {
                    // -(A_i o Q_i): couples components within the block.
                    for cj in 0..comps.len() {
                        let aij = a[i][(comps[ci], comps[cj])];
                        if aij != ZERO {
                            for t in 0..monos.len() {
                                big[(slot(i, ci, t), slot(i, cj, t))] -= aij;
                            }
                        }
                    }
                    // +(Q_(i+1) o A_i): couples monomials within the profile.
                    for r in 0..monos.len() {
                        for c2 in 0..monos.len() {
                            if smats[i][(r, c2)] != ZERO {
                                big[(slot(i, ci, r), slot(next, ci, c2))] += smats[i][(r, c2)];
                            }
                        }
                    }
                    for (t, alpha) in monos.iter().enumerate() {
                        let v = parts[i].coeff(comps[ci], alpha);
                        if v != ZERO {
                            rhs[slot(i, ci, t)] = -v;
                            rhs_zero = false;
                        }
                    }
                }
            }
            if rhs_zero {
                continue;
            }
            let x = big.solve(&rhs)?;
            for i in 0..p {
                for (ci, &comp) in comps.iter().enumerate() {
                    for (t, alpha) in monos.iter().enumerate() {
                        q[i].set_coeff(comp, *alpha, x[slot(i, ci, t)])?;
                    }
                }
            }
        }
    }
    Ok(q)
}

/// Entry (r, c) is the z^monos[r] coefficient of (A z)^monos[c].
fn substitution_matrix(a: &CMat, monos: &[MultiIndex], m: usize) -> CMat {
    let k = a.rows();
    let a_rows: Vec<ScalarPoly> = (0..k)
        .map(|v| {
            let mut row = ScalarPoly::zero(k);
            for w in 0..k {
                row.add_term(MultiIndex::unit(k, w), a[(v, w)]);
            }
            row
        })
        .collect();
    let mut smat = CMat::zeros(monos.len(), monos.len());
    for (col, ac) in monos.iter().enumerate() {
        let mut prod = ScalarPoly::constant(k, ONE);
        for (v, row_poly) in a_rows.iter().enumerate() {
            for _ in 0..ac.entry(v) {
                prod = prod.mul_truncated(row_poly, m);
            }
        }
        for (row, ar) in monos.iter().enumerate() {
            smat[(row, col)] = prod.coeff(ar);
        }
    }
    smat
}

/// Max coefficient magnitude of M_i + Q_(i+1) o A_i - A_i o Q_i minus the
/// resonant part of M_i, over the whole chain: the defining identity of
/// the homological solution.
pub fn homological_residual(
    a: &[CMat],
    table: &ResonanceTable,
    parts: &[PolyMapJet],
    q: &[PolyMapJet],
    m: usize,
) -> Result<f64> {
    let p = parts.len();
    let mut worst = 0.0f64;
    for i in 0..p {
        let a_jet = PolyMapJet::from_linear(&a[i], m)?;
        let left = q[(i + 1) % p].compose(&a_jet)?;
        let right = a_jet.compose(&q[i])?;
        let res_part = project(&parts[i], table, JetPart::Resonant)?;
        let total = parts[i].add(&left)?.sub(&right)?.sub(&res_part)?;
        worst = worst.max(total.max_coeff_distance(&PolyMapJet::new(parts[i].dim(), m)?));
    }
    Ok(worst)
}

/// The same solution by the convergent series instead of the linear
/// systems, with P(i, n) = A_(i+n-1) ... A_i the n-step products:
/// sub-resonant coefficients by sum_n P(i, n+1)^-1 o M_(i+n) o P(i, n),
/// super-resonant by -sum_n B(i, n) o M_(i-n-1) o B(i, n+1)^-1 where
/// B(i, n) = A_(i-1) ... A_(i-n). Slower but independent; kept public as a
/// cross-check.
pub fn series_homological(
    a: &[CMat],
    table: &ResonanceTable,
    parts: &[PolyMapJet],
    m: usize,
    max_terms: usize,
    tol: f64,
) -> Result<Vec<PolyMapJet>> {
    if m < 2 {
        return Err(Error::InvalidJet("homological degrees start at 2".into()));
    }
    check_linear_parts(a, table)?;
    let k = table.spec().dim();
    let p = parts.len();
    if p == 0 || a.len() != p {
        return Err(Error::InvalidCocycle(
            "need one linear part and one homogeneous part per orbit point".into(),
        ));
    }
    for part in parts {
        if !part.is_homogeneous(m) {
            return Err(Error::NotHomogeneous { expected: m });
        }
    }
    let scale = parts
        .iter()
        .map(|f| f.iter().map(|(_, _, c)| c.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
        .max(1.0);
    let a_inv: Vec<CMat> = a.iter().map(|ai| ai.inverse()).collect::<Result<_>>()?;
    let subs: Vec<PolyMapJet> = parts
        .iter()
        .map(|f| project(&f.truncated(m)?, table, JetPart::Sub))
        .collect::<Result<_>>()?;
    let sups: Vec<PolyMapJet> = parts
        .iter()
        .map(|f| project(&f.truncated(m)?, table, JetPart::Super))
        .collect::<Result<_>>()?;
    let any_sub = subs.iter().any(|f| f.num_coeffs() > 0);
    let any_sup = sups.iter().any(|f| f.num_coeffs() > 0);
    let mut q: Vec<PolyMapJet> = (0..p).map(|_| PolyMapJet::new(k, m).unwrap()).collect();

    // Per base point: fwd = P(i, n), fwd_inv = P(i, n+1)^-1, bwd = B(i, n),
    // bwd_inv = B(i, n+1)^-1, all advanced together with n.
    let mut fwd: Vec<CMat> = (0..p).map(|_| CMat::identity(k)).collect();
    let mut fwd_inv: Vec<CMat> = (0..p).map(|i| a_inv[i].clone()).collect();
    let mut bwd: Vec<CMat> = (0..p).map(|_| CMat::identity(k)).collect();
    let mut bwd_inv: Vec<CMat> = (0..p).map(|i| a_inv[(i + p - 1) % p].clone()).collect();
    let mut done_sub = !any_sub;
    let mut done_sup = !any_sup;
    for n in 0..=max_terms {
        if !done_sub {
            let mut term_max = 0.0f64;
            for i in 0..p {
                let outer = PolyMapJet::from_linear(&fwd_inv[i], m)?;
                let inner = PolyMapJet::from_linear(&fwd[i], m)?;
                let term = outer.compose(&subs[(i + n) % p])?.compose(&inner)?;
                term_max = term_max.max(term.max_coeff_distance(&PolyMapJet::new(k, m)?));
                q[i] = q[i].add(&term)?;
            }
            if term_max < tol * scale {
                done_sub = true;
            }
        }
        if !done_sup {
            let mut term_max = 0.0f64;
            for i in 0..p {
                let outer = PolyMapJet::from_linear(&bwd[i], m)?;
                let inner = PolyMapJet::from_linear(&bwd_inv[i], m)?;
                let src = (i + p - 1 - (n % p)) % p;
                let term = outer.compose(&sups[src])?.compose(&inner)?;
                term_max = term_max.max(term.max_coeff_distance(&PolyMapJet::new(k, m)?));
                q[i] = q[i].sub(&term)?;
            }
            if term_max < tol * scale {
                done_sup = true;
            }
        }
        if done_sub && done_sup {
            return Ok(q);
        }
        for i in 0..p {
            fwd[i] = a[(i + n) % p].mul(&fwd[i]);
            fwd_inv[i] = fwd_inv[i].mul(&a_inv[(i + n + 1) % p]);
            bwd[i] = bwd[i].mul(&a[(i + 2 * p - ((n + 1) % p)) % p]);
            bwd_inv[i] = a_inv[(i + 2 * p - ((n + 2) % p)) % p].mul(&bwd_inv[i]);
        }
    }
    Err(Error::NoConvergence { iterations: max_terms, residual: f64::NAN })
}

/// One normalization step: kills the non-resonant degree-m coefficients of
/// every germ via tangent-to-identity changes Phi_i = id + Q_i. Returns the
/// conjugated cocycle and the Phi_i. Degrees below m are untouched.
pub fn normalize_step(
    coc: &PeriodicGermCocycle,
    table: &ResonanceTable,
    m: usize,
) -> Result<(PeriodicGermCocycle, Vec<PolyMapJet>)> {
    let d = coc.degree();
    if m < 2 || m > d {
        return Err(Error::InvalidJet("degree outside the jet's range".into()));
    }
    let p = coc.period();
    let a: Vec<CMat> = (0..p).map(|i| coc.germ(i).linear_part()).collect();
    let parts: Vec<PolyMapJet> = (0..p)
        .map(|i| coc.germ(i).homogeneous_part(m).truncated(m))
        .collect::<Result<_>>()?;
    let qs = solve_homological(&a, table, &parts, m)?;
    let ident = PolyMapJet::identity(coc.dim(), d);
    let phis: Vec<PolyMapJet> = qs
        .iter()
        .map(|q| ident.add(&q.extended(d)))
        .collect::<Result<_>>()?;
    let mut new_germs = Vec::with_capacity(p);
    for i in 0..p {
        let inv = phis[i].formal_inverse()?;
        new_germs.push(phis[(i + 1) % p].compose(coc.germ(i))?.compose(&inv)?);
    }
    Ok((PeriodicGermCocycle::new(new_germs)?, phis))
}

/// Chains normalization steps for m = 2..=through_degree. Returns the
/// normalized cocycle and the accumulated changes U_i (tangent to the
/// identity).
pub fn normalize(
    coc: &PeriodicGermCocycle,
    table: &ResonanceTable,
    through_degree: usize,
) -> Result<(PeriodicGermCocycle, Vec<PolyMapJet>)> {
    let p = coc.period();
    let mut cur = coc.clone();
    let mut us: Vec<PolyMapJet> =
        (0..p).map(|_| PolyMapJet::identity(coc.dim(), coc.degree())).collect();
    for m in 2..=through_degree.min(coc.degree()) {
        let (next, phis) = normalize_step(&cur, table, m)?;
        cur = next;
        for i in 0..p {
            us[i] = phis[i].compose(&us[i])?;
        }
    }
    Ok((cur, us))
}

/// Convergence record of the renormalization limit.
#[derive(Clone, Debug)]
pub struct RenormDiagnostics {
    /// Successive max-coefficient differences between iterates.
    pub deltas: Vec<f64>,
    /// Observed geometric rate over the trailing window.
    pub ratio: f64,
    /// A priori rate bound e^((q+1)(L1 + eps) - (L_l - eps)) from the
    /// spectrum: the worst sub-resonant contraction beyond the resonance
    /// degree bound.
    pub ratio_bound: f64,
    pub iterations: usize,
}

/// The renormalization limit T_i = lim_n (N^(n))^(-1) o F^(n) based at each
/// orbit point, computed by the recurrence T_i <- N_i^(-1) o T_(i+1) o F_i
/// from T_i = id. The iterates converge geometrically, so once the step
/// ratio stabilizes the geometric tail is summed in closed form and the
/// corrected estimate is returned; convergence is declared when either the
/// raw step or the correction's step falls under `tol`.
///
/// Hypotheses checked: `n` carries only linear and resonant coefficients,
/// and `f` agrees with `n` through the resonance degree bound, so the
/// mismatch is entirely sub-resonant and the recurrence contracts. The
/// returned T_i satisfy N_i o T_i = T_(i+1) o F_i and are tangent to the
/// identity through degree q.
pub fn renormalize_limit(
    f: &PeriodicGermCocycle,
    n: &PeriodicGermCocycle,
    table: &ResonanceTable,
    max_iter: usize,
    tol: f64,
) -> Result<(Vec<PolyMapJet>, RenormDiagnostics)> {
    let p = f.period();
    let k = f.dim();
    let d = f.degree();
    if n.period() != p || n.dim() != k || n.degree() != d {
        return Err(Error::RenormalizationHypothesis(
            "cocycle and normal target must share period, dimension and degree".into(),
        ));
    }
    let spec = table.spec();
    let q = spec.q_tilde();
    let scale = (0..p)
        .map(|i| f.germ(i).iter().map(|(_, _, c)| c.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
        .max(1.0);
    for i in 0..p {
        for (comp, alpha, c) in n.germ(i).iter() {
            if alpha.order() >= 2
                && !table.is_resonant_coeff(comp, &alpha)
                && c.norm() > 1e-12 * scale
            {
                return Err(Error::RenormalizationHypothesis(
                    "normal target carries non-resonant coefficients".into(),
                ));
            }
        }
        let low_f = f.germ(i).truncated(q.max(1).min(d))?;
        let low_n = n.germ(i).truncated(q.max(1).min(d))?;
        if low_f.max_coeff_distance(&low_n) > 1e-9 * scale {
            return Err(Error::RenormalizationHypothesis(
                "maps must agree through the resonance degree bound".into(),
            ));
        }
    }
    let eps = spec.epsilon();
    let l1 = spec.rate(1);
    let ll = spec.rate(spec.num_blocks());
    let ratio_bound = ((q as f64 + 1.0) * (l1 + eps) - (ll - eps)).exp();

    let n_inv: Vec<PolyMapJet> =
        (0..p).map(|i| n.germ(i).formal_inverse()).collect::<Result<_>>()?;
    let mut t: Vec<PolyMapJet> = (0..p).map(|_| PolyMapJet::identity(k, d)).collect();
    let mut deltas = Vec::new();
    let mut refined_prev: Option<Vec<PolyMapJet>> = None;
    let mut result: Option<Vec<PolyMapJet>> = None;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        let mut t_new = Vec::with_capacity(p);
        let mut delta = 0.0f64;
        for i in 0..p {
            let cand = n_inv[i].compose(&t[(i + 1) % p])?.compose(f.germ(i))?;
            delta = delta.max(cand.max_coeff_distance(&t[i]));
            t_new.push(cand);
        }
        deltas.push(delta);
        iterations = it;
        // Once the step ratio stabilizes, the remaining tail is close to
        // geometric in that ratio, and T + (T_new - T) r / (1 - r) sums it.
        // The true limit is tracked through this corrected estimate; the
        // raw operator deltas stay in the diagnostics.
        let m = deltas.len();
        let rate = if m >= 6 && deltas[m - 2] > 0.0 && deltas[m - 3] > 0.0 {
            let r1 = deltas[m - 1] / deltas[m - 2];
            let r2 = deltas[m - 2] / deltas[m - 3];
            if r1 > 0.02 && r1 < 0.9 && (r1 - r2).abs() <= 0.1 * r1 {
                Some(r1)
            } else {
                None
            }
        } else {
            None
        };
        let refined = match rate {
            Some(r) => {
                let gain = Complex64::new(r / (1.0 - r), 0.0);
                let mut rs = Vec::with_capacity(p);
                for i in 0..p {
                    rs.push(t_new[i].add(&t_new[i].sub(&t[i])?.scale(gain))?);
                }
                rs
            }
            None => t_new.clone(),
        };
        let refined_delta = match &refined_prev {
            Some(prev) => refined
                .iter()
                .zip(prev)
                .map(|(a, b)| a.max_coeff_distance(b))
                .fold(0.0f64, f64::max),
            None => f64::INFINITY,
        };
        t = t_new;
        if delta < tol * scale || refined_delta < tol * scale {
            converged = true;
            result = Some(refined);
            break;
        }
        refined_prev = Some(refined);
    }
    let t = match result {
        Some(r) => r,
        None => t,
    };
    if !converged {
        return Err(Error::NoConvergence {
            iterations,
            residual: deltas.last().copied().unwrap_or(f64::NAN),
        });
    }
    // Geometric rate over the last few informative steps.
    let usable: Vec<f64> = deltas.iter().copied().filter(|&d| d > tol * scale).collect();
    let w = usable.len().min(9);
    let ratio = if w >= 2 {
        let tail = &usable[usable.len() - w..];
        (tail[w - 1] / tail[0]).powf(1.0 / (w as f64 - 1.0))
    } else {
        0.0
    };
    Ok((t, RenormDiagnostics { deltas, ratio, ratio_bound, iterations }))
}

/// Everything at once: linear reduction, polynomial normalization through
/// the resonance degree bound, and the renormalization limit for the
/// sub-resonant tail.
#[derive(Clone, Debug)]
pub struct NormalFormResult {
    pub reduction: ReductionResult,
    pub table: ResonanceTable,
    /// The normal form N_i: the common linear part plus resonant terms.
    pub normal: PeriodicGermCocycle,
    /// Full conjugacies V_i with N_i o V_i = V_(i+1) o F_i.
    pub changes: Vec<PolyMapJet>,
    pub renorm: RenormDiagnostics,
    /// Relative max-coefficient defect of the conjugacy identities.
    pub conjugacy_residual: f64,
}

pub fn full_normal_form(coc: &PeriodicGermCocycle, epsilon: f64) -> Result<NormalFormResult> {
    let p = coc.period();
    let d = coc.degree();
    let lin = coc.linear()?;
    let red = oseledec_reduce(&lin, epsilon)?;
    let f1 = snap_linear(&coc.conjugate(&red.changes)?, &red.normal_linear)?;
    let table = build_table(&red.spectrum)?;
    let q = red.spectrum.q_tilde();
    let (f2, us) = normalize(&f1, &table, q)?;
    let mut n_germs = Vec::with_capacity(p);
    for i in 0..p {
        let lin_part = project(f2.germ(i), &table, JetPart::Linear)?;
        let res_part = project(f2.germ(i), &table, JetPart::Resonant)?;
        n_germs.push(lin_part.add(&res_part)?);
    }
    let normal = PeriodicGermCocycle::new(n_germs)?;
    let (ts, renorm) = renormalize_limit(&f2, &normal, &table, 5000, 1e-13)?;

    let mut changes = Vec::with_capacity(p);
    for i in 0..p {
        let cjet = PolyMapJet::from_linear(&red.changes[i], d)?;
        changes.push(ts[i].compose(&us[i])?.compose(&cjet)?);
    }
    let mut defect = 0.0f64;
    let mut scale = 1e-300f64;
    for i in 0..p {
        let lhs = changes[(i + 1) % p].compose(coc.germ(i))?;
        let rhs = normal.germ(i).compose(&changes[i])?;
        defect = defect.max(lhs.max_coeff_distance(&rhs));
        scale = scale.max(rhs.max_coeff_distance(&PolyMapJet::new(coc.dim(), d)?));
    }
    Ok(NormalFormResult {
        reduction: red,
        table,
        normal,
        changes,
        renorm,
        conjugacy_residual: defect / scale,
    })
}

/// Replaces each germ's linear part with `a` after checking they already
/// agree to reduction accuracy; the snap removes the eigen-solver noise so
/// later stages see the constant matrix exactly.
fn snap_linear(coc: &PeriodicGermCocycle, a: &CMat) -> Result<PeriodicGermCocycle> {
    let k = coc.dim();
    let scale = a.max_abs().max(1e-300);
    let mut germs = Vec::with_capacity(coc.period());
    for g in coc.germs() {
        if g.linear_part().sub(a).max_abs() > 1e-8 * scale {
            return Err(Error::InvalidCocycle(
                "conjugated linear part strays from the reduced form".into(),
            ));
        }
        let mut out = PolyMapJet::new(k, g.degree())?;
        for (i, alpha, c) in g.iter() {
            if alpha.order() >= 2 {
                out.set_coeff(i, alpha, c)?;
            }
        }
        for col in 0..k {
            let mi = MultiIndex::unit(k, col);
            for row in 0..k {
                out.set_coeff(row, mi, a[(row, col)])?;
            }
        }
        germs.push(out);
    }
    PeriodicGermCocycle::new(germs)
}

/// Composes `steps` germs of a resonant normal form cocycle starting at
/// `start`. Resonant supports are closed under composition and never exceed
/// the resonance degree bound, so the result is exact, not truncated.
pub fn iterate_resonant(
    coc: &PeriodicGermCocycle,
    table: &ResonanceTable,
    start: usize,
    steps: usize,
) -> Result<PolyMapJet> {
    let q = table.spec().q_tilde();
    if coc.degree() < q {
        return Err(Error::InvalidJet(
            "jet degree below the resonance degree bound loses resonant terms".into(),
        ));
    }
    for g in coc.germs() {
        for (comp, alpha, c) in g.iter() {
            if alpha.order() >= 2 && c != ZERO && !table.is_resonant_coeff(comp, &alpha) {
                return Err(Error::NotResonant { component: comp });
            }
        }
    }
    coc.compose_steps(start, steps)
}

/// Least-squares fit of ln v = intercept + slope * n + log_weight * ln n.
/// The ln n regressor absorbs the polynomial factors that resonant blocks
/// produce, leaving the pure exponential rate in `slope`.
#[derive(Clone, Copy, Debug)]
pub struct GrowthFit {
    pub intercept: f64,
    pub slope: f64,
    pub log_weight: f64,
}

pub fn fit_log_growth(samples: &[(f64, f64)]) -> GrowthFit {
    assert!(samples.len() >= 3, "three regressors need at least three samples");
    let mut xtx = CMat::zeros(3, 3);
    let mut xty = vec![ZERO; 3];
    for &(n, y) in samples {
        let row = [1.0, n, n.ln()];
        for i in 0..3 {
            for j in 0..3 {
                xtx[(i, j)] += Complex64::new(row[i] * row[j], 0.0);
            }
            xty[i] += Complex64::new(row[i] * y, 0.0);
        }
    }
    let beta = xtx.solve(&xty).expect("growth fit normal equations");
    GrowthFit { intercept: beta[0].re, slope: beta[1].re, log_weight: beta[2].re }
}

/// Largest coefficient magnitude of the n-fold composition, per block, for
/// n = 1..=n_max, fitted against a + b n + c ln n. The slopes recover the
/// block rates.
pub fn resonant_norm_growth(
    coc: &PeriodicGermCocycle,
    table: &ResonanceTable,
    n_max: usize,
) -> Result<Vec<GrowthFit>> {
    let spec = table.spec();
    let l = spec.num_blocks();
    let mut samples: Vec<Vec<(f64, f64)>> = vec![Vec::new(); l];
    let mut cur = iterate_resonant(coc, table, 0, 1)?;
    for n in 1..=n_max {
        if n > 1 {
            cur = coc.germ(n - 1).compose(&cur)?;
        }
        for (bj, sample) in samples.iter_mut().enumerate() {
            let mut v = 0.0f64;
            for (comp, _, c) in cur.iter() {
                if spec.block_of_component(comp) == bj + 1 {
                    v = v.max(c.norm());
                }
            }
            if v > 0.0 {
                sample.push((n as f64, v.ln()));
            }
        }
    }
    for s in &samples {
        if s.len() < 3 {
            return Err(Error::NoConvergence { iterations: n_max, residual: f64::NAN });
        }
    }
    Ok(samples.iter().map(|s| fit_log_growth(s)).collect())
}

/// ln of the s-th exterior power norm of the n-step derivative along the
/// orbit of `z0`, for n = 1..=n_max: the chain rule product of step
/// Jacobians, rescaled along the way so deep products stay representable.
pub fn derivative_growth(
    coc: &PeriodicGermCocycle,
    start: usize,
    z0: &[Complex64],
    s: usize,
    n_max: usize,
) -> Result<Vec<(f64, f64)>> {
    let k = coc.dim();
    if z0.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: z0.len() });
    }
    if s == 0 || s > k {
        return Err(Error::InvalidJet("exterior power order must be 1..=dim".into()));
    }
    let mut z = z0.to_vec();
    let mut prod = CMat::identity(k);
    let mut log_acc = 0.0f64;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let g = coc.germ(start + n - 1);
        let jac = g.derivative_at(&z)?;
        prod = jac.mul(&prod);
        let sc = prod.max_abs();
        if sc == 0.0 {
            return Err(Error::CriticalOrbit { value: 0.0 });
        }
        prod = prod.scale(Complex64::new(1.0 / sc, 0.0));
        log_acc += sc.ln();
        let xs = prod.exterior_norm(s);
        if xs == 0.0 {
            return Err(Error::CriticalOrbit { value: 0.0 });
        }
        out.push((n as f64, s as f64 * log_acc + xs.ln()));
        z = g.evaluate(&z)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{classify_degree, ContractionSpectrum, ResonanceClass};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mi(e: &[usize]) -> MultiIndex {
        MultiIndex::new(e).unwrap()
    }

    fn scalar_table(lambda: f64, eps: f64) -> ResonanceTable {
        build_table(&ContractionSpectrum::single(lambda.ln(), 1, eps).unwrap()).unwrap()
    }

    fn two_block_table(l1: f64, l2: f64, eps: f64) -> ResonanceTable {
        use crate::spectrum::SpectralBlock;
        build_table(
            &ContractionSpectrum::new(
                vec![
                    SpectralBlock { rate: l1.ln(), multiplicity: 1 },
                    SpectralBlock { rate: l2.ln(), multiplicity: 1 },
                ],
                eps,
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn scalar_jet(coeffs: &[(usize, f64)], degree: usize) -> PolyMapJet {
        let mut f = PolyMapJet::new(1, degree).unwrap();
        for &(ord, v) in coeffs {
            f.set_coeff(0, mi(&[ord]), c(v)).unwrap();
        }
        f
    }

    #[test]
    fn scalar_sub_resonant_coefficient() {
        // q (lambda^2 - lambda) = -1 at lambda = 1/2 gives q = 4.
        let table = scalar_table(0.5, 0.05);
        let a = vec![CMat::from_real(1, 1, &[0.5])];
        let m_part = scalar_jet(&[(2, 1.0)], 2);
        let q = solve_homological(&a, &table, &[m_part.clone()], 2).unwrap();
        assert!((q[0].coeff(0, &mi(&[2])) - c(4.0)).norm() < 1e-13);
        assert!(homological_residual(&a, &table, &[m_part.clone()], &q, 2).unwrap() < 1e-13);
        let via_series = series_homological(&a, &table, &[m_part], 2, 10_000, 1e-16).unwrap();
        assert!((via_series[0].coeff(0, &mi(&[2])) - c(4.0)).norm() < 1e-12);
    }

    #[test]
    fn periodic_sub_resonant_varying_linear_parts() {
        // a_0 = 0.5, a_1 = 0.4, M_i = z^2 each:
        //   0.25 q_1 - 0.5 q_0 = -1,  0.16 q_0 - 0.4 q_1 = -1
        // so q_0 = 4.0625, q_1 = 4.125.
        let geo = (0.5f64 * 0.4).sqrt();
        let table = scalar_table(geo, 0.08);
        let a = vec![CMat::from_real(1, 1, &[0.5]), CMat::from_real(1, 1, &[0.4])];
        let parts = vec![scalar_jet(&[(2, 1.0)], 2), scalar_jet(&[(2, 1.0)], 2)];
        let q = solve_homological(&a, &table, &parts, 2).unwrap();
        assert!((q[0].coeff(0, &mi(&[2])) - c(4.0625)).norm() < 1e-13);
        assert!((q[1].coeff(0, &mi(&[2])) - c(4.125)).norm() < 1e-13);
        assert!(homological_residual(&a, &table, &parts, &q, 2).unwrap() < 1e-13);
        let vs = series_homological(&a, &table, &parts, 2, 10_000, 1e-16).unwrap();
        assert!((vs[0].coeff(0, &mi(&[2])) - c(4.0625)).norm() < 1e-12);
        assert!((vs[1].coeff(0, &mi(&[2])) - c(4.125)).norm() < 1e-12);
    }

    #[test]
    fn periodic_super_resonant_varying_linear_parts() {
        // Blocks near 0.5 and 0.2, per-point linear parts diag(0.5, 0.2)
        // and diag(0.52, 0.19); M_0 = z1^2 e2, M_1 = 2 z1^2 e2:
        //   0.25 q_1 - 0.2 q_0 = -1,  0.2704 q_0 - 0.19 q_1 = -2
        // so q_0 = -1725/74, q_1 = -838/37.
        let table = two_block_table(0.5, 0.2, 0.04);
        let a = vec![
            CMat::from_real(2, 2, &[0.5, 0.0, 0.0, 0.2]),
            CMat::from_real(2, 2, &[0.52, 0.0, 0.0, 0.19]),
        ];
        let mut m0 = PolyMapJet::new(2, 2).unwrap();
        m0.set_coeff(1, mi(&[2, 0]), c(1.0)).unwrap();
        let mut m1 = PolyMapJet::new(2, 2).unwrap();
        m1.set_coeff(1, mi(&[2, 0]), c(2.0)).unwrap();
        let parts = vec![m0, m1];
        let q = solve_homological(&a, &table, &parts, 2).unwrap();
        assert!((q[0].coeff(1, &mi(&[2, 0])) - c(-1725.0 / 74.0)).norm() < 1e-11);
        assert!((q[1].coeff(1, &mi(&[2, 0])) - c(-838.0 / 37.0)).norm() < 1e-11);
        assert!(homological_residual(&a, &table, &parts, &q, 2).unwrap() < 1e-12);
        let vs = series_homological(&a, &table, &parts, 2, 10_000, 1e-16).unwrap();
        assert!((vs[0].coeff(1, &mi(&[2, 0])) - c(-1725.0 / 74.0)).norm() < 1e-10);
        assert!((vs[1].coeff(1, &mi(&[2, 0])) - c(-838.0 / 37.0)).norm() < 1e-10);
    }

    #[test]
    fn super_resonant_series_matches_solver() {
        // Blocks at 0.5 and 0.2: the (2,0) degree over block 2 is
        // super-resonant, q (lambda1^2 - lambda2) = -1 gives q = -20.
        let table = two_block_table(0.5, 0.2, 0.05);
        let a = vec![CMat::from_real(2, 2, &[0.5, 0.0, 0.0, 0.2])];
        let mut m_part = PolyMapJet::new(2, 2).unwrap();
        m_part.set_coeff(1, mi(&[2, 0]), c(1.0)).unwrap();
        assert_eq!(
            classify_degree(table.spec(), 2, &mi(&[2, 0])).class,
            ResonanceClass::Super
        );
        let q = solve_homological(&a, &table, &[m_part.clone()], 2).unwrap();
        assert!((q[0].coeff(1, &mi(&[2, 0])) - c(-20.0)).norm() < 1e-12);
        let via_series = series_homological(&a, &table, &[m_part], 2, 10_000, 1e-16).unwrap();
        assert!((via_series[0].coeff(1, &mi(&[2, 0])) - c(-20.0)).norm() < 1e-11);
    }

    #[test]
    fn period_two_cyclic_system() {
        // lambda = 1/2, M_0 = z^2, M_1 = 3 z^2:
        //   q_1/4 - q_0/2 = -1,  q_0/4 - q_1/2 = -3
        // so q_0 = 20/3, q_1 = 28/3.
        let table = scalar_table(0.5, 0.05);
        let a = vec![CMat::from_real(1, 1, &[0.5]), CMat::from_real(1, 1, &[0.5])];
        let parts = vec![scalar_jet(&[(2, 1.0)], 2), scalar_jet(&[(2, 3.0)], 2)];
        let q = solve_homological(&a, &table, &parts, 2).unwrap();
        assert!((q[0].coeff(0, &mi(&[2])) - c(20.0 / 3.0)).norm() < 1e-12);
        assert!((q[1].coeff(0, &mi(&[2])) - c(28.0 / 3.0)).norm() < 1e-12);
        let vs = series_homological(&a, &table, &parts, 2, 10_000, 1e-16).unwrap();
        assert!((vs[0].coeff(0, &mi(&[2])) - c(20.0 / 3.0)).norm() < 1e-11);
        assert!((vs[1].coeff(0, &mi(&[2])) - c(28.0 / 3.0)).norm() < 1e-11);
    }

    #[test]
    fn resonant_coefficients_stay() {
        let table = two_block_table(0.5, 0.25, 0.05);
        let a = vec![CMat::from_real(2, 2, &[0.5, 0.0, 0.0, 0.25])];
        let mut m_part = PolyMapJet::new(2, 2).unwrap();
        m_part.set_coeff(1, mi(&[2, 0]), c(1.0)).unwrap();
        let q = solve_homological(&a, &table, &[m_part], 2).unwrap();
        assert_eq!(q[0].num_coeffs(), 0);
    }

    #[test]
    fn koenigs_step_kills_degree_two() {
        // f = z/2 + z^2 at degree 3: the m = 2 step yields z/2 + 4 z^3.
        let table = scalar_table(0.5, 0.05);
        let f = scalar_jet(&[(1, 0.5), (2, 1.0)], 3);
        let coc = PeriodicGermCocycle::new(vec![f]).unwrap();
        let (stepped, phis) = normalize_step(&coc, &table, 2).unwrap();
        let g = stepped.germ(0);
        assert!((g.coeff(0, &mi(&[1])) - c(0.5)).norm() < 1e-14);
        assert!(g.coeff(0, &mi(&[2])).norm() < 1e-13);
        assert!((g.coeff(0, &mi(&[3])) - c(4.0)).norm() < 1e-12);
        assert!((phis[0].coeff(0, &mi(&[2])) - c(4.0)).norm() < 1e-13);
    }

    #[test]
    fn koenigs_full_normal_form() {
        // Full pipeline on f = z/2 + z^2: the normal form is the pure
        // linear map and the conjugacy carries t2 = 4, t3 = 32/3.
        let f = scalar_jet(&[(1, 0.5), (2, 1.0)], 3);
        let coc = PeriodicGermCocycle::new(vec![f]).unwrap();
        let nf = full_normal_form(&coc, 0.05).unwrap();
        let n = nf.normal.germ(0);
        assert!((n.coeff(0, &mi(&[1])) - c(0.5)).norm() < 1e-12);
        assert!(n.coeff(0, &mi(&[2])).norm() < 1e-12);
        assert!(n.coeff(0, &mi(&[3])).norm() < 1e-12);
        let v = &nf.changes[0];
        assert!((v.coeff(0, &mi(&[2])) - c(4.0)).norm() < 1e-10);
        assert!((v.coeff(0, &mi(&[3])) - c(32.0 / 3.0)).norm() < 1e-9);
        assert!(nf.conjugacy_residual < 1e-10);
        assert!(nf.renorm.ratio <= nf.renorm.ratio_bound + 1e-9);
        assert!(nf.renorm.ratio > 0.4 && nf.renorm.ratio < 0.56, "{}", nf.renorm.ratio);
    }

    #[test]
    fn renormalize_limit_koenigs_coefficients() {
        let table = scalar_table(0.5, 0.05);
        let f = scalar_jet(&[(1, 0.5), (2, 1.0)], 3);
        let n = scalar_jet(&[(1, 0.5)], 3);
        let fc = PeriodicGermCocycle::new(vec![f]).unwrap();
        let nc = PeriodicGermCocycle::new(vec![n]).unwrap();
        let (t, diag) = renormalize_limit(&fc, &nc, &table, 2000, 1e-14).unwrap();
        assert!((t[0].coeff(0, &mi(&[2])) - c(4.0)).norm() < 1e-11);
        assert!((t[0].coeff(0, &mi(&[3])) - c(32.0 / 3.0)).norm() < 1e-10);
        assert!(diag.iterations < 200);
        // Dominant contraction is |lambda| = 1/2 once the degree-2
        // coefficient dominates the tail.
        assert!((diag.ratio - 0.5).abs() < 0.05, "ratio {}", diag.ratio);
    }

    #[test]
    fn renormalize_rejects_resonant_mismatch() {
        let table = two_block_table(0.5, 0.25, 0.05);
        let mut f = PolyMapJet::new(2, 3).unwrap();
        f.set_coeff(0, mi(&[1, 0]), c(0.5)).unwrap();
        f.set_coeff(1, mi(&[0, 1]), c(0.25)).unwrap();
        f.set_coeff(1, mi(&[2, 0]), c(1.0)).unwrap();
        let mut n = PolyMapJet::new(2, 3).unwrap();
        n.set_coeff(0, mi(&[1, 0]), c(0.5)).unwrap();
        n.set_coeff(1, mi(&[0, 1]), c(0.25)).unwrap();
        let fc = PeriodicGermCocycle::new(vec![f]).unwrap();
        let nc = PeriodicGermCocycle::new(vec![n]).unwrap();
        match renormalize_limit(&fc, &nc, &table, 100, 1e-12) {
            Err(Error::RenormalizationHypothesis(_)) => {}
            other => panic!("expected hypothesis rejection, got {other:?}"),
        }
    }

    #[test]
    fn renormalize_rejects_nonresonant_target() {
        let table = two_block_table(0.5, 0.25, 0.05);
        let mut n = PolyMapJet::new(2, 3).unwrap();
        n.set_coeff(0, mi(&[1, 0]), c(0.5)).unwrap();
        n.set_coeff(1, mi(&[0, 1]), c(0.25)).unwrap();
        n.set_coeff(0, mi(&[0, 2]), c(1.0)).unwrap();
        let fc = PeriodicGermCocycle::new(vec![n.clone()]).unwrap();
        let nc = PeriodicGermCocycle::new(vec![n]).unwrap();
        match renormalize_limit(&fc, &nc, &table, 100, 1e-12) {
            Err(Error::RenormalizationHypothesis(_)) => {}
            other => panic!("expected hypothesis rejection, got {other:?}"),
        }
    }

    #[test]
    fn two_dim_full_pipeline() {
        // G = (z1/2 + z2^2, z2/4 + z1^2 + z2^2): only the z1^2 coefficient
        // of the second component is resonant and survives.
        let mut g = PolyMapJet::new(2, 4).unwrap();
        g.set_coeff(0, mi(&[1, 0]), c(0.5)).unwrap();
        g.set_coeff(1, mi(&[0, 1]), c(0.25)).unwrap();
        g.set_coeff(0, mi(&[0, 2]), c(1.0)).unwrap();
        g.set_coeff(1, mi(&[2, 0]), c(1.0)).unwrap();
        g.set_coeff(1, mi(&[0, 2]), c(1.0)).unwrap();
        let coc = PeriodicGermCocycle::new(vec![g.clone()]).unwrap();
        let nf = full_normal_form(&coc, 0.05).unwrap();
        let n = nf.normal.germ(0);
        assert!((n.coeff(0, &mi(&[1, 0])) - c(0.5)).norm() < 1e-12);
        assert!((n.coeff(1, &mi(&[0, 1])) - c(0.25)).norm() < 1e-12);
        assert!((n.coeff(1, &mi(&[2, 0])) - c(1.0)).norm() < 1e-10);
        // Nothing else survives.
        for (comp, alpha, v) in n.iter() {
            let keep = alpha.order() == 1 || (comp == 1 && alpha == mi(&[2, 0]));
            assert!(keep || v.norm() < 1e-10, "stray coefficient {comp} {alpha:?} {v}");
        }
        assert!(nf.conjugacy_residual < 1e-9, "residual {}", nf.conjugacy_residual);
        // The conjugacy identity against the original germ.
        let v0 = &nf.changes[0];
        let lhs = v0.compose(&g).unwrap();
        let rhs = nf.normal.germ(0).compose(v0).unwrap();
        assert!(lhs.max_coeff_distance(&rhs) < 1e-9);
    }

    #[test]
    fn iterate_resonant_exact_pair() {
        // N = (z1/4, z2/16 + z1^2/2): N^2 = (z1/16, z2/256 + z1^2/16).
        let table = two_block_table(0.25, 0.0625, 0.1);
        let mut n = PolyMapJet::new(2, 2).unwrap();
        n.set_coeff(0, mi(&[1, 0]), c(0.25)).unwrap();
        n.set_coeff(1, mi(&[0, 1]), c(0.0625)).unwrap();
        n.set_coeff(1, mi(&[2, 0]), c(0.5)).unwrap();
        let coc = PeriodicGermCocycle::new(vec![n]).unwrap();
        let n2 = iterate_resonant(&coc, &table, 0, 2).unwrap();
        assert!((n2.coeff(0, &mi(&[1, 0])) - c(0.0625)).norm() < 1e-15);
        assert!((n2.coeff(1, &mi(&[0, 1])) - c(1.0 / 256.0)).norm() < 1e-15);
        assert!((n2.coeff(1, &mi(&[2, 0])) - c(0.0625)).norm() < 1e-15);
        assert_eq!(n2.num_coeffs(), 3);
        // Still resonant-only, so the closure property holds.
        for (comp, alpha, _) in n2.iter() {
            assert!(alpha.order() == 1 || table.is_resonant_coeff(comp, &alpha));
        }
    }

    #[test]
    fn iterate_resonant_rejects_stray_terms() {
        let table = two_block_table(0.25, 0.0625, 0.1);
        let mut n = PolyMapJet::new(2, 2).unwrap();
        n.set_coeff(0, mi(&[1, 0]), c(0.25)).unwrap();
        n.set_coeff(1, mi(&[0, 1]), c(0.0625)).unwrap();
        n.set_coeff(0, mi(&[0, 2]), c(1.0)).unwrap();
        let coc = PeriodicGermCocycle::new(vec![n]).unwrap();
        match iterate_resonant(&coc, &table, 0, 2) {
            Err(Error::NotResonant { component }) => assert_eq!(component, 0),
            other => panic!("expected NotResonant, got {other:?}"),
        }
    }

    #[test]
    fn growth_fit_recovers_exact_model() {
        // ln v = 1.5 - 0.7 n + 2 ln n exactly.
        let samples: Vec<(f64, f64)> =
            (1..=40).map(|n| (n as f64, 1.5 - 0.7 * n as f64 + 2.0 * (n as f64).ln())).collect();
        let fit = fit_log_growth(&samples);
        assert!((fit.intercept - 1.5).abs() < 1e-9);
        assert!((fit.slope + 0.7).abs() < 1e-10);
        assert!((fit.log_weight - 2.0).abs() < 1e-9);
    }

    #[test]
    fn norm_growth_slopes_match_rates() {
        let table = two_block_table(0.25, 0.0625, 0.1);
        let mut n = PolyMapJet::new(2, 2).unwrap();
        n.set_coeff(0, mi(&[1, 0]), c(0.25)).unwrap();
        n.set_coeff(1, mi(&[0, 1]), c(0.0625)).unwrap();
        n.set_coeff(1, mi(&[2, 0]), c(0.5)).unwrap();
        let coc = PeriodicGermCocycle::new(vec![n]).unwrap();
        let fits = resonant_norm_growth(&coc, &table, 40).unwrap();
        assert!((fits[0].slope - 0.25f64.ln()).abs() < 1e-8, "slope {}", fits[0].slope);
        assert!((fits[1].slope - 0.0625f64.ln()).abs() < 1e-8, "slope {}", fits[1].slope);
        // The resonant block carries the n-fold polynomial factor; the top
        // block is purely exponential.
        assert!(fits[0].log_weight.abs() < 1e-6);
        assert!((fits[1].log_weight - 1.0).abs() < 1e-6);
    }

    #[test]
    fn derivative_growth_sums_exponents() {
        let mut n = PolyMapJet::new(2, 2).unwrap();
        n.set_coeff(0, mi(&[1, 0]), c(0.25)).unwrap();
        n.set_coeff(1, mi(&[0, 1]), c(0.0625)).unwrap();
        n.set_coeff(1, mi(&[2, 0]), c(0.5)).unwrap();
        let coc = PeriodicGermCocycle::new(vec![n]).unwrap();
        let z0 = [c(0.3), c(0.2)];
        // The off-diagonal chain entry decays like n/4^n relative to the
        // top diagonal; fit past the transient.
        let s1 = derivative_growth(&coc, 0, &z0, 1, 40).unwrap();
        let fit1 = fit_log_growth(&s1[14..]);
        assert!((fit1.slope - 0.25f64.ln()).abs() < 1e-8, "slope {}", fit1.slope);
        // s = 2 is the determinant: exactly (1/4)^n (1/16)^n.
        let s2 = derivative_growth(&coc, 0, &z0, 2, 40).unwrap();
        let fit2 = fit_log_growth(&s2);
        let expect = 0.25f64.ln() + 0.0625f64.ln();
        assert!((fit2.slope - expect).abs() < 1e-9, "slope {}", fit2.slope);
    }

    #[test]
    fn solver_rejects_mixed_orders() {
        let table = scalar_table(0.5, 0.05);
        let a = vec![CMat::from_real(1, 1, &[0.5])];
        let bad = scalar_jet(&[(2, 1.0), (3, 1.0)], 3);
        match solve_homological(&a, &table, &[bad], 2) {
            Err(Error::NotHomogeneous { expected }) => assert_eq!(expected, 2),
            other => panic!("expected NotHomogeneous, got {other:?}"),
        }
    }
}
