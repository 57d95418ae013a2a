//! One function per subcommand. Each reads only the config sections it
//! declares, writes fixed-name outputs into --out and finishes with the
//! manifest. All sampled computation takes its seed from the config, so a
//! rerun with the same file reproduces every byte.

use std::fs;
use std::path::Path;

use dulac::cocycle::oseledec_reduce;
use dulac::dynamics::{
    birkhoff_lyapunov_oracle, cycle_estimate_from, cycle_lyapunov_estimate, find_periodic_points,
    find_periodic_points_with, gamma_bound, repelling_density_check, verify_nt, GridParams,
    PeriodicPointRecord,
};
use dulac::normalform::{full_normal_form, renormalize_limit};
use dulac::projective::proj_distance;
use dulac::spectrum::ContractionSpectrum;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{at_least, positive, require, ExperimentConfig, VerifyNtParams};
use crate::emit::{csv_bytes, jets_text, matrices_csv, sig, Outputs};
use crate::error::CliError;
use crate::model::{build_cocycle, build_linear_cocycle, build_map, build_resonance_table};

#[derive(Clone, Copy, Debug)]
pub enum Sub {
    Resonance,
    Normalize,
    Renorm,
    Reduce,
    Cycles,
    Birkhoff,
    VerifyNt,
    Density,
}

impl Sub {
    fn name(self) -> &'static str {
        match self {
            Sub::Resonance => "resonance",
            Sub::Normalize => "normalize",
            Sub::Renorm => "renorm",
            Sub::Reduce => "reduce",
            Sub::Cycles => "cycles",
            Sub::Birkhoff => "birkhoff",
            Sub::VerifyNt => "verify-nt",
            Sub::Density => "density",
        }
    }
}

pub fn run(sub: Sub, config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let config_text = fs::read_to_string(config_path)
        .map_err(|e| CliError::io(&format!("reading config {}", config_path.display()), e))?;
    let cfg = ExperimentConfig::parse(&config_text)?;
    let mut out = Outputs::create(out_dir)?;
    let seed = match sub {
        Sub::Resonance => run_resonance(&cfg, &mut out)?,
        Sub::Normalize => run_normalize(&cfg, &mut out)?,
        Sub::Renorm => run_renorm(&cfg, &mut out)?,
        Sub::Reduce => run_reduce(&cfg, &mut out)?,
        Sub::Cycles => run_cycles(&cfg, &mut out)?,
        Sub::Birkhoff => run_birkhoff(&cfg, &mut out)?,
        Sub::VerifyNt => run_verify_nt(&cfg, &mut out)?,
        Sub::Density => run_density(&cfg, &mut out)?,
    };
    out.finish(sub.name(), &config_text, seed)
}

fn alpha_str(mi: &dulac::jets::MultiIndex) -> String {
    let parts: Vec<String> = mi.entries().map(|e| e.to_string()).collect();
    parts.join(" ")
}

fn spectrum_json(spec: &ContractionSpectrum) -> Value {
    let rates: Vec<Value> = spec.blocks().iter().map(|b| Value::String(sig(b.rate))).collect();
    let mults: Vec<Value> =
        spec.blocks().iter().map(|b| Value::Number(b.multiplicity.into())).collect();
    json!({
        "dim": spec.dim(),
        "num_blocks": spec.num_blocks(),
        "rates": rates,
        "multiplicities": mults,
        "epsilon": sig(spec.epsilon()),
        "q_tilde": spec.q_tilde(),
    })
}

fn run_resonance(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Option<u64>, CliError> {
    let sc = require(&cfg.spectrum, "spectrum", "resonance")?;
    positive(sc.epsilon, "spectrum.epsilon")?;
    if let Some(d) = sc.delta_res {
        positive(d, "spectrum.delta_res")?;
    }
    let table = build_resonance_table(sc)?;

    let header =
        ["block", "alpha", "order", "class", "gap", "near_resonance"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = table
        .entries()
        .iter()
        .map(|e| {
            vec![
                e.block.to_string(),
                alpha_str(&e.alpha),
                e.alpha.order().to_string(),
                e.class.to_string(),
                sig(e.gap),
                e.near_resonance.to_string(),
            ]
        })
        .collect();
    out.write("table.csv", &csv_bytes(&header, &rows)?)?;

    let resonant = table.resonant_entries().count();
    let near = table.near_resonant_entries().count();
    let summary = json!({
        "spectrum": spectrum_json(table.spec()),
        "delta_res": sig(table.delta_res()),
        "zeta": sig(table.zeta()),
        "entries": table.entries().len(),
        "resonant_count": resonant,
        "near_resonant_count": near,
    });
    out.write_json("summary.json", &summary)?;
    Ok(None)
}

fn run_normalize(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Option<u64>, CliError> {
    let cc = require(&cfg.cocycle, "cocycle", "normalize")?;
    let p = require(&cfg.normalize, "normalize", "normalize")?;
    positive(p.epsilon, "normalize.epsilon")?;
    let coc = build_cocycle(cc)?;
    let res = full_normal_form(&coc, p.epsilon)?;

    out.write("normal.jets", jets_text(res.normal.germs()).as_bytes())?;
    out.write("changes.jets", jets_text(&res.changes).as_bytes())?;

    let summary = json!({
        "period": res.normal.period(),
        "degree": res.normal.degree(),
        "spectrum": spectrum_json(&res.reduction.spectrum),
        "epsilon_used": sig(res.reduction.epsilon_used),
        "reduction_residual": sig(res.reduction.residual),
        "distortion": sig(res.reduction.distortion),
        "zeta": sig(res.table.zeta()),
        "resonant_count": res.table.resonant_entries().count(),
        "renorm": {
            "iterations": res.renorm.iterations,
            "ratio": sig(res.renorm.ratio),
            "ratio_bound": sig(res.renorm.ratio_bound),
        },
        "conjugacy_residual": sig(res.conjugacy_residual),
    });
    out.write_json("summary.json", &summary)?;
    Ok(None)
}

fn run_renorm(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Option<u64>, CliError> {
    let fc = require(&cfg.cocycle, "cocycle", "renorm")?;
    let nc = require(&cfg.target, "target", "renorm")?;
    let sc = require(&cfg.spectrum, "spectrum", "renorm")?;
    let p = require(&cfg.renorm, "renorm", "renorm")?;
    at_least(p.max_iter, 1, "renorm.max_iter")?;
    positive(p.tol, "renorm.tol")?;
    let f = build_cocycle(fc)?;
    let n = build_cocycle(nc)?;
    let table = build_resonance_table(sc)?;

    let (t, diag) = renormalize_limit(&f, &n, &table, p.max_iter, p.tol)?;
    out.write("transform.jets", jets_text(&t).as_bytes())?;

    let header = ["iteration", "delta"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = diag
        .deltas
        .iter()
        .enumerate()
        .map(|(i, d)| vec![(i + 1).to_string(), sig(*d)])
        .collect();
    out.write("deltas.csv", &csv_bytes(&header, &rows)?)?;

    let summary = json!({
        "iterations": diag.iterations,
        "ratio": sig(diag.ratio),
        "ratio_bound": sig(diag.ratio_bound),
        "final_delta": sig(diag.deltas.last().copied().unwrap_or(0.0)),
        "max_iter": p.max_iter,
        "tol": sig(p.tol),
    });
    out.write_json("summary.json", &summary)?;
    Ok(None)
}

fn run_reduce(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Option<u64>, CliError> {
    let lc = require(&cfg.linear, "linear", "reduce")?;
    let p = require(&cfg.reduce, "reduce", "reduce")?;
    positive(p.epsilon, "reduce.epsilon")?;
    let coc = build_linear_cocycle(lc)?;
    let red = oseledec_reduce(&coc, p.epsilon)?;

    out.write("normal_linear.csv", &matrices_csv(core::slice::from_ref(&red.normal_linear))?)?;
    out.write("changes.csv", &matrices_csv(&red.changes)?)?;
    out.write("changes_inv.csv", &matrices_csv(&red.changes_inv)?)?;

    let summary = json!({
        "period": coc.period(),
        "spectrum": spectrum_json(&red.spectrum),
        "epsilon_used": sig(red.epsilon_used),
        "residual": sig(red.residual),
        "distortion": sig(red.distortion),
    });
    out.write_json("summary.json", &summary)?;
    Ok(None)
}

fn run_cycles(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Option<u64>, CliError> {
    let mc = require(&cfg.map, "map", "cycles")?;
    let p = require(&cfg.cycles, "cycles", "cycles")?;
    let n_min = at_least(p.n_min.unwrap_or(1), 1, "cycles.n_min")?;
    let n_max = at_least(p.n_max, n_min, "cycles.n_max")?;
    let gamma_samples = at_least(p.gamma_samples.unwrap_or(200), 1, "cycles.gamma_samples")?;
    let f = build_map(mc)?;
    let k = f.dim();

    let mut header =
        ["n", "expected", "card_rn", "card_rn_star", "exhaustive"].map(String::from).to_vec();
    for s in 1..=k {
        header.push(format!("estimate_s{s}"));
    }
    for s in 1..=k {
        header.push(format!("estimate_star_s{s}"));
    }
    header.push("jacobian_average".into());
    header.push("gamma".into());

    let mut rows = Vec::new();
    for n in n_min..=n_max {
        let search = match &p.grid {
            Some(g) => find_periodic_points_with(
                &f,
                n,
                GridParams { samples: g.samples, max_iter: g.max_iter, seed: p.seed },
            )?,
            None => find_periodic_points(&f, n)?,
        };
        let est = cycle_estimate_from(&f, &search)?;
        let gamma = gamma_bound(&f, &search, gamma_samples, p.seed);
        let mut row = vec![
            n.to_string(),
            search.expected.to_string(),
            est.card_rn.to_string(),
            est.card_rn_star.to_string(),
            est.exhaustive.to_string(),
        ];
        row.extend(est.estimates_rn.iter().map(|v| sig(*v)));
        row.extend(est.estimates_rn_star.iter().map(|v| sig(*v)));
        row.push(sig(est.jacobian_average));
        row.push(sig(gamma));
        rows.push(row);
    }
    out.write("cycles.csv", &csv_bytes(&header, &rows)?)?;

    let summary = json!({
        "dim": k,
        "degree": f.degree(),
        "topological_degree": f.topological_degree(),
        "n_min": n_min,
        "n_max": n_max,
        "gamma_samples": gamma_samples,
        "rows": rows.len(),
    });
    out.write_json("summary.json", &summary)?;
    Ok(Some(p.seed))
}

fn run_birkhoff(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Option<u64>, CliError> {
    let mc = require(&cfg.map, "map", "birkhoff")?;
    let p = require(&cfg.birkhoff, "birkhoff", "birkhoff")?;
    at_least(p.s, 1, "birkhoff.s")?;
    at_least(p.average, 1, "birkhoff.average")?;
    at_least(p.samples, 1, "birkhoff.samples")?;
    let f = build_map(mc)?;
    let est = birkhoff_lyapunov_oracle(&f, p.s, p.transient, p.average, p.samples, p.seed)?;

    let summary = json!({
        "s": p.s,
        "transient": p.transient,
        "average": p.average,
        "samples_requested": p.samples,
        "samples_used": est.samples,
        "value": sig(est.value),
        "stderr": sig(est.stderr),
        "critical_hits": est.critical_hits,
    });
    out.write_json("summary.json", &summary)?;
    Ok(Some(p.seed))
}

/// Finds the searched-for cycle among the period-n records: nearest in the
/// projective metric, required to be unambiguously close.
fn match_record<'a>(
    records: &'a [PeriodicPointRecord],
    params: &VerifyNtParams,
    dim: usize,
) -> Result<&'a PeriodicPointRecord, CliError> {
    let mut pt: Vec<Complex64> = params.point.iter().map(|c| c.to_complex()).collect();
    if pt.len() == dim {
        pt.push(Complex64::new(1.0, 0.0));
    } else if pt.len() != dim + 1 {
        return Err(CliError::Config(format!(
            "config: verify_nt.point needs {dim} (affine) or {} (homogeneous) entries, got {}",
            dim + 1,
            pt.len()
        )));
    }
    let best = records
        .iter()
        .map(|r| (proj_distance(&r.point, &pt), r))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((d, r)) if d < 1e-6 => Ok(r),
        Some((d, _)) => Err(CliError::Config(format!(
            "config: verify_nt.point matches no period-{} point (nearest at projective distance {:.3e})",
            params.period, d
        ))),
        None => Err(CliError::Config(format!(
            "config: no periodic points of period {} were found",
            params.period
        ))),
    }
}

fn run_verify_nt(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Option<u64>, CliError> {
    let mc = require(&cfg.map, "map", "verify-nt")?;
    let p = require(&cfg.verify_nt, "verify_nt", "verify-nt")?;
    at_least(p.period, 1, "verify_nt.period")?;
    at_least(p.n_max, 2, "verify_nt.n_max")?;
    let degree = at_least(p.degree.unwrap_or(8), 2, "verify_nt.degree")?;
    let f = build_map(mc)?;

    let search = find_periodic_points(&f, p.period)?;
    let rec = match_record(&search.records, p, f.dim())?;
    if !rec.repulsive {
        return Err(CliError::Config(
            "config: verify_nt.point is a periodic point but not a repelling one".into(),
        ));
    }

    let chi1 = rec.eigenvalue_moduli.last().copied().unwrap_or(1.0).ln() / rec.period as f64;
    let eps = match (p.eps, p.eps_fraction) {
        (Some(e), None) => positive(e, "verify_nt.eps")?,
        (None, Some(fr)) => {
            positive(fr, "verify_nt.eps_fraction")?;
            fr * chi1
        }
        _ => {
            return Err(CliError::Config(
                "config: verify_nt needs exactly one of eps / eps_fraction".into(),
            ))
        }
    };

    let report = verify_nt(&f, rec, p.n_max, eps, degree)?;
    let point_json: Vec<Value> =
        rec.point.iter().flat_map(|z| [Value::String(sig(z.re)), Value::String(sig(z.im))]).collect();
    let summary = json!({
        "period": rec.period,
        "primitive": rec.primitive,
        "point": point_json,
        "n_max": p.n_max,
        "degree": degree,
        "chi1": sig(report.chi1),
        "eps": sig(report.eps),
        "m0": sig(report.m0),
        "branch_radius": sig(report.branch_radius),
        "containment_ok": report.containment_ok,
        "lip_slope": sig(report.lip_slope),
        "fitted_l": sig(report.fitted_l),
        "lip_ok": report.lip_ok,
        "alpha": sig(report.alpha),
        "alpha_ok": report.alpha_ok,
        "fitted_t": sig(report.fitted_t),
        "exterior_ok": report.exterior_ok,
        "passes": report.passes,
    });
    out.write_json("summary.json", &summary)?;
    Ok(None)
}

fn run_density(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Option<u64>, CliError> {
    let mc = require(&cfg.map, "map", "density")?;
    let p = require(&cfg.density, "density", "density")?;
    let n_min = at_least(p.n_min.unwrap_or(1), 1, "density.n_min")?;
    let n_max = at_least(p.n_max, n_min, "density.n_max")?;
    positive(p.eps, "density.eps")?;
    let f = build_map(mc)?;
    if p.s < 1 || p.s > f.dim() {
        return Err(CliError::Config(format!(
            "config: density.s must lie in 1..={}, got {}",
            f.dim(),
            p.s
        )));
    }

    let sigma_ref = match (p.sigma_ref, p.sigma_from_n) {
        (Some(v), None) => v,
        (None, Some(n0)) => {
            at_least(n0, 1, "density.sigma_from_n")?;
            cycle_lyapunov_estimate(&f, n0)?.estimates_rn[p.s - 1]
        }
        _ => {
            return Err(CliError::Config(
                "config: density needs exactly one of sigma_ref / sigma_from_n".into(),
            ))
        }
    };

    let header = ["n", "card_rn", "card_rn_eps", "fraction", "lower_ok", "upper_ok"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        let rep = repelling_density_check(&f, n, p.eps, p.s, sigma_ref)?;
        rows.push(vec![
            n.to_string(),
            rep.card_rn.to_string(),
            rep.card_rn_eps.to_string(),
            sig(rep.fraction),
            rep.lower_ok.to_string(),
            rep.upper_ok.to_string(),
        ]);
    }
    out.write("density.csv", &csv_bytes(&header, &rows)?)?;

    let summary = json!({
        "s": p.s,
        "eps": sig(p.eps),
        "sigma_ref": sig(sigma_ref),
        "n_min": n_min,
        "n_max": n_max,
    });
    out.write_json("summary.json", &summary)?;
    Ok(None)
}
