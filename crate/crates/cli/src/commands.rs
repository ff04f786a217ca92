use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use serde::Deserialize;
use serde_json::{json, Value};
use smollision_core::divergences::{
    conditional_entropy, d2_smooth_measured, dh_threshold, dmax, dmax_smooth_measured, dmax_smooth_purified,
    dmax_smooth_trace, hockey_stick, measured_collision, measured_renyi_lower_bound, quantum_renyi, DivergenceValue,
    EntropyKind, EntropySpec, RenyiFamily, Variant, Witness,
};
use smollision_core::hashing::{universality_check, FamilyKind, FamilySpec, HashFamily};
use smollision_core::linalg::HermitianOperator;
use smollision_core::protocols::{
    correlated_qubit_source, cq_reports_with, decoupling_bench, inequality_harness, iid_trend_report, BoundReport,
    HarnessGrid, Suite, Summary, UnitaryEnsemble,
};
use smollision_core::sdp::{
    export_sdpa, formulate_d2_smooth, formulate_dmax_smooth, import_sdpa, solve, solve_d2_smooth,
    solve_hypothesis_testing, Certificate, SdpSettings, Side,
};

use crate::args::*;
use crate::io::{fmt, load_cq, load_state, num, read_json, reports_csv, round_floats, to_json_string};

/// Everything a command prints on stdout, written in one piece.
pub struct Outcome {
    pub stdout: String,
    pub failed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, failed: false }
    }

    fn reports(reports: &[BoundReport], unit: Unit) -> Result<Self> {
        Ok(Self { stdout: reports_csv(reports, unit)?, failed: reports.iter().any(|r| !r.passed()) })
    }
}

pub fn settings(c: &Common) -> SdpSettings {
    SdpSettings { tol: c.tol, max_iter: c.max_iter, ..SdpSettings::default() }
}

fn side(s: SideArg) -> Side {
    match s {
        SideArg::Primal => Side::Primal,
        SideArg::Dual => Side::Dual,
    }
}

fn value_json(v: DivergenceValue, unit: Unit, extra: Value) -> Result<Value> {
    let mut out = json!({
        "unit": unit.name(),
        "value": num(unit.from_nats(v.nats)),
        "value_nats": num(v.nats),
        "value_bits": num(v.bits()),
        "certificate": round_floats(serde_json::to_value(&v.certificate)?),
    });
    if let (Value::Object(o), Value::Object(e)) = (&mut out, extra) {
        o.extend(e);
    }
    Ok(out)
}

fn name(v: impl ValueEnum) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn need_alpha(alpha: Option<f64>) -> Result<f64> {
    alpha.ok_or_else(|| anyhow!("--alpha is required for this kind"))
}

fn from_sdp_test(value: f64, cert: Certificate) -> DivergenceValue {
    let witness = match cert {
        Certificate::Test(w) => Some(Witness::Test(w)),
        Certificate::Smoothed(r) => Some(Witness::Smoothed(r)),
        _ => None,
    };
    DivergenceValue { nats: value, certificate: witness }
}

pub fn divergence(a: &DivergenceArgs, c: &Common) -> Result<Outcome> {
    if a.states.len() != 2 {
        bail!("give exactly two --state files (ρ then σ), got {}", a.states.len());
    }
    let rho = load_state(&a.states[0])?.into_operator();
    let sigma = load_state(&a.states[1])?.into_operator();
    let s = settings(c);
    if let Some(path) = &a.export_sdpa {
        let problem = match a.kind {
            DivergenceKind::D2SmoothMeasured => formulate_d2_smooth(&rho, &sigma, a.eps, side(a.side))?,
            DivergenceKind::DmaxSmoothMeasured => formulate_dmax_smooth(&rho, &sigma, a.eps, side(a.side))?,
            k => bail!("--export-sdpa is available for d2-smooth-measured and dmax-smooth-measured, not {k:?}"),
        };
        std::fs::write(path, export_sdpa(&problem)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let extra = json!({
        "kind": name(a.kind),
        "eps": a.eps,
        "alpha": a.alpha,
    });
    let v = match a.kind {
        DivergenceKind::HockeyStick => {
            let gamma = a.gamma.ok_or_else(|| anyhow!("--gamma is required for hockey-stick"))?;
            let v = hockey_stick(&rho, &sigma, gamma)?;
            let out = json!({ "kind": name(a.kind), "gamma": num(gamma), "value": num(v) });
            return Ok(Outcome::ok(to_json_string(&out)));
        }
        DivergenceKind::Umegaki => quantum_renyi(&rho, &sigma, 1.0, RenyiFamily::Sandwiched)?,
        DivergenceKind::Sandwiched => quantum_renyi(&rho, &sigma, need_alpha(a.alpha)?, RenyiFamily::Sandwiched)?,
        DivergenceKind::Petz => quantum_renyi(&rho, &sigma, need_alpha(a.alpha)?, RenyiFamily::Petz)?,
        DivergenceKind::Dmax => dmax(&rho, &sigma)?,
        DivergenceKind::DmaxSmoothMeasured => dmax_smooth_measured(&rho, &sigma, a.eps)?,
        DivergenceKind::DmaxSmoothPurified => dmax_smooth_purified(&rho, &sigma, a.eps, &s)?,
        DivergenceKind::DmaxSmoothTrace => dmax_smooth_trace(&rho, &sigma, a.eps, &s)?,
        DivergenceKind::D2Measured => measured_collision(&rho, &sigma)?,
        DivergenceKind::D2SmoothMeasured => match a.side {
            SideArg::Dual => d2_smooth_measured(&rho, &sigma, a.eps, &s)?,
            SideArg::Primal => {
                let v = solve_d2_smooth(&rho, &sigma, a.eps, Side::Primal, &s)?;
                from_sdp_test(v.value.ln(), v.certificate)
            }
        },
        DivergenceKind::Dh => dh_threshold(&rho, &sigma, a.eps)?,
        DivergenceKind::DhSdp => {
            let v = solve_hypothesis_testing(&rho, &sigma, a.eps, &s)?;
            from_sdp_test(-v.value.ln(), v.certificate)
        }
        DivergenceKind::MeasuredRenyiLb => {
            measured_renyi_lower_bound(&rho, &sigma, need_alpha(a.alpha)?, a.budget, c.seed)?
        }
    };
    Ok(Outcome::ok(to_json_string(&value_json(v, c.unit(), extra)?)))
}

pub fn entropy(a: &EntropyArgs, c: &Common) -> Result<Outcome> {
    let state = load_cq(&a.state)?;
    let kind = match a.kind {
        EntropyKindArg::Dmax => EntropyKind::Dmax,
        EntropyKindArg::DmaxSmoothMeasured => EntropyKind::DmaxSmoothMeasured,
        EntropyKindArg::DmaxSmoothPurified => EntropyKind::DmaxSmoothPurified,
        EntropyKindArg::D2Measured => EntropyKind::D2Measured,
        EntropyKindArg::D2SmoothMeasured => EntropyKind::D2SmoothMeasured,
        EntropyKindArg::H2Classicalized => EntropyKind::H2Classicalized,
        EntropyKindArg::Sandwiched => EntropyKind::Sandwiched(need_alpha(a.alpha)?),
        EntropyKindArg::Petz => EntropyKind::Petz(need_alpha(a.alpha)?),
    };
    let variant = match a.variant {
        VariantArg::Up => Variant::Up,
        VariantArg::Down => Variant::Down,
    };
    let v = conditional_entropy(&state, &EntropySpec { kind, variant, eps: a.eps }, &settings(c))?;
    let extra = json!({
        "kind": name(a.kind),
        "variant": name(a.variant),
        "eps": a.eps,
        "alpha": a.alpha,
    });
    Ok(Outcome::ok(to_json_string(&value_json(v, c.unit(), extra)?)))
}

pub fn pa_sim(a: &PaSimArgs, c: &Common) -> Result<Outcome> {
    let state = load_cq(&a.state)?;
    let x = state.x_dim();
    let family = match a.family {
        FamilyArg::Toeplitz => {
            if !x.is_power_of_two() || x < 2 {
                bail!("toeplitz hashing needs |X| a power of two, got {x}");
            }
            HashFamily::toeplitz(x.trailing_zeros(), a.k)?
        }
        FamilyArg::Exhaustive => HashFamily::exhaustive(x, 1usize << a.k)?,
    };
    let grid = HarnessGrid {
        cq_eps: a.eps.clone(),
        alphas: a.alpha.clone(),
        mu_fraction: a.mu_fraction,
        delta_fraction: a.delta_fraction,
        k: a.converse_k,
        settings: settings(c),
        ..HarnessGrid::default()
    };
    Outcome::reports(&cq_reports_with(&state, &grid, &[family])?, c.unit())
}

pub fn decouple_sim(a: &DecoupleArgs, c: &Common) -> Result<Outcome> {
    let rho = load_state(&a.state)?.into_operator();
    let [a1, a2] = a.split[..] else {
        bail!("--split takes two dimensions, as in --split 2,1");
    };
    let da = a1 * a2;
    if da == 0 || rho.dim() % da != 0 {
        bail!("state dimension {} is not a multiple of |A1||A2| = {da}", rho.dim());
    }
    let de = rho.dim() / da;
    let sigma: HermitianOperator = match &a.sigma {
        Some(p) => load_state(p)?.into_operator(),
        None => rho.partial_trace(&[da, de], &[1])?,
    };
    let ens = match a.ensemble {
        EnsembleArg::Clifford1q => UnitaryEnsemble::clifford_1q(),
        EnsembleArg::Clifford2q => UnitaryEnsemble::clifford_2q(),
        EnsembleArg::Haar => UnitaryEnsemble::haar(da, a.samples, c.seed),
    };
    let r = decoupling_bench(&rho, &sigma, (a1, a2), a.eps, &ens, &settings(c))?;
    eprintln!(
        "mean distance {} (standard error {}, {} unitaries)",
        fmt(r.mean_distance),
        fmt(r.standard_error),
        r.samples
    );
    Outcome::reports(&[r.smoothed, r.bures, r.coefficient], c.unit())
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ExperimentConfig {
    grid: HarnessGrid,
    seed: Option<u64>,
}

pub fn verify(a: &VerifyArgs, c: &Common, seed_given: bool) -> Result<(Outcome, u64)> {
    let cfg: ExperimentConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => ExperimentConfig::default(),
    };
    let mut grid = cfg.grid;
    if let Some(s) = a.suite {
        grid.suite = match s {
            SuiteArg::Pair => Suite::Pair,
            SuiteArg::Cq => Suite::Cq,
            SuiteArg::Decoupling => Suite::Decoupling,
            SuiteArg::All => Suite::All,
        };
    }
    if let Some(n) = a.instances {
        grid.instances = n;
    }
    if a.config.is_none() || c.tol != SdpSettings::default().tol {
        grid.settings.tol = c.tol;
    }
    let seed = if seed_given { c.seed } else { cfg.seed.unwrap_or(c.seed) };
    let reports = inequality_harness(seed, &grid);
    let summary = Summary::of(&reports);
    let summary_json = to_json_string(&json!({
        "pass": summary.pass,
        "fail": summary.fail,
        "worst_slack": num(summary.worst_slack),
        "seed": seed,
    }));
    if let Some(path) = &a.out {
        let body = if path.extension().is_some_and(|e| e == "json") {
            to_json_string(&round_floats(serde_json::to_value(&reports)?))
        } else {
            reports_csv(&reports, c.unit())?
        };
        std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.summary {
        std::fs::write(path, &summary_json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok((Outcome { stdout: summary_json, failed: summary.fail > 0 }, seed))
}

pub fn iid_trend(a: &IidArgs, c: &Common) -> Result<Outcome> {
    let state = match &a.state {
        Some(p) => load_cq(p)?,
        None => correlated_qubit_source(a.theta)?,
    };
    let rep = iid_trend_report(&state, a.eps, a.n)?;
    let u = c.unit();
    eprintln!("H = {} {}, V = {} nats^2", fmt(u.from_nats(rep.entropy)), u.name(), fmt(rep.variance));
    Ok(Outcome::ok(rep.to_csv(c.unit() == Unit::Bits)))
}

pub fn sdp_solve(a: &SdpSolveArgs, c: &Common) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let problem = import_sdpa(&text).map_err(|e| anyhow!("{}: {e}", a.file.display()))?;
    let sol = solve(&problem, &settings(c))?;
    let out = json!({
        "status": sol.status,
        "primal_objective": num(sol.primal_objective),
        "dual_objective": num(sol.dual_objective),
        "value": num(sol.value()),
        "relative_gap": num(sol.relative_gap),
        "primal_infeasibility": num(sol.primal_infeasibility),
        "dual_infeasibility": num(sol.dual_infeasibility),
        "iterations": sol.iterations,
        "y": sol.y.iter().map(|&v| num(v)).collect::<Vec<_>>(),
    });
    Ok(Outcome::ok(to_json_string(&out)))
}

pub fn hash_audit(a: &HashAuditArgs) -> Result<Outcome> {
    let kind = match a.family {
        FamilyArg::Toeplitz => FamilyKind::Toeplitz,
        FamilyArg::Exhaustive => FamilyKind::ExhaustiveAllFunctions,
    };
    let spec = FamilySpec { kind, m: a.m, k: a.k };
    let family = spec.build()?;
    let report = universality_check(&family)?;
    let worst = report.worst().map(|w| {
        json!({ "x": w.x, "x_prime": w.x_prime, "probability": w.probability.to_string() })
    });
    let mut out = json!({
        "family": spec,
        "inputs": family.inputs(),
        "outputs": family.outputs(),
        "members": family.member_count().to_string(),
        "target": report.target.to_string(),
        "worst": worst,
        "passes": report.passes,
    });
    if a.dump {
        let members = family
            .enumerate()?
            .map(|(f, w)| json!({ "index": f.provenance.index, "weight": num(w), "table": f.table }))
            .collect::<Vec<_>>();
        out["dump"] = Value::Array(members);
    }
    Ok(Outcome { stdout: to_json_string(&out), failed: !report.passes })
}
