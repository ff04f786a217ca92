//! Seeded randomized runs of every one-shot inequality.
//!
//! Instances are independent; each gets its own seed derived from the run
//! seed, and results come back in (suite, instance) order regardless of
//! how the work was scheduled.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decoupling::{decoupling_bench, twirl_average, UnitaryEnsemble};
use super::privacy::{
    achievability_bound_smooth, achievability_entropy_bounds, achievability_purified_bound, achievable_size,
    converse_reports, extractable_randomness_exhaustive, leftover_bound_bures, lhs_expected_distance,
    renyi_achievability_bound,
};
use super::report::{BoundReport, Parameters, ANALYTIC_TOL, SDP_TOL};
use crate::divergences::{
    conditional_entropy, dh_threshold, dmax_smooth_measured, dmax_smooth_purified, dmax_smooth_trace,
    measured_collision, quantum_renyi, EntropyKind, EntropySpec, RenyiFamily, Variant, Witness,
};
use crate::error::{check_dim, Error, Result};
use crate::hashing::HashFamily;
use crate::linalg::{bures_seminorm_sq, HermitianOperator, RANK_CUTOFF};
use crate::sdp::{solve_d2_smooth, SdpSettings, Side};
use crate::states::{embed_cq, random_cq, random_density, random_hermitian, seeded_rng, CQState, Channel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Inequalities between divergences of a pair `(ρ, σ)`.
    Pair,
    /// Privacy amplification bounds on CQ states.
    Cq,
    /// Exact single-qubit decoupling and twirling.
    Decoupling,
    All,
}

impl Suite {
    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Pair, Suite::Cq, Suite::Decoupling],
            s => vec![s],
        }
    }

    fn tag(self) -> u64 {
        match self {
            Suite::Pair => 1,
            Suite::Cq => 2,
            Suite::Decoupling => 3,
            Suite::All => 0,
        }
    }
}

/// What to sample and which parameters to sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessGrid {
    pub suite: Suite,
    /// Instances per suite.
    pub instances: usize,
    /// Dimensions for the pair suite.
    pub dims: Vec<usize>,
    pub pair_eps: Vec<f64>,
    pub cq_eps: Vec<f64>,
    pub x_dims: Vec<usize>,
    pub e_dims: Vec<usize>,
    pub alphas: Vec<f64>,
    /// `μ = mu_fraction · ε`.
    pub mu_fraction: f64,
    /// `δ = delta_fraction · ε`.
    pub delta_fraction: f64,
    pub k: f64,
    /// Random channels per pair instance for data processing.
    pub channels: usize,
    pub settings: SdpSettings,
}

impl Default for HarnessGrid {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            instances: 100,
            dims: vec![2, 3, 4],
            pair_eps: vec![0.05, 0.2, 0.5],
            cq_eps: vec![0.0, 0.1, 0.3],
            x_dims: vec![2, 3, 4],
            e_dims: vec![2, 3],
            alphas: vec![1.25, 1.5, 2.0],
            mu_fraction: 0.5,
            delta_fraction: 0.5,
            k: 2.0,
            channels: 1,
            settings: SdpSettings::default(),
        }
    }
}

/// SplitMix64 finalizer; decorrelates the per-instance seeds.
pub fn derive_seed(seed: u64, suite: Suite, instance: usize) -> u64 {
    let mut z = seed ^ suite.tag().wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (instance as u64).wrapping_mul(0xd1b5_4a32_d192_ed03);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs every inequality of the selected suites on `grid.instances`
/// random instances each. Errors inside an instance become failing
/// reports; the run always completes.
pub fn inequality_harness(seed: u64, grid: &HarnessGrid) -> Vec<BoundReport> {
    let clifford = UnitaryEnsemble::clifford_1q();
    let mut out = Vec::new();
    for suite in grid.suite.members() {
        let batches: Vec<Vec<BoundReport>> = (0..grid.instances)
            .into_par_iter()
            .map(|i| {
                let s = derive_seed(seed, suite, i);
                let result = match suite {
                    Suite::Pair => pair_suite(s, i, grid),
                    Suite::Cq => cq_suite(s, grid),
                    Suite::Decoupling => decoupling_suite(s, grid, &clifford),
                    Suite::All => unreachable!("expanded above"),
                };
                let reports = result.unwrap_or_else(|e| {
                    vec![BoundReport::new(format!("{suite:?}_error").to_lowercase(), f64::INFINITY, 0.0, 0.0, "harness")
                        .with_note(e.to_string())]
                });
                reports
                    .into_iter()
                    .map(|mut r| {
                        r.parameters.instance = Some(i);
                        r.parameters.seed = Some(s);
                        r
                    })
                    .collect()
            })
            .collect();
        out.extend(batches.into_iter().flatten());
    }
    out
}

/// `Σ wᵢ vᵢ`, skipping zero weights so that `0 · ∞` does not appear.
fn affine(terms: &[(f64, f64)]) -> f64 {
    terms.iter().filter(|(w, _)| *w != 0.0).map(|(w, v)| w * v).sum()
}

/// Prefixes solver errors with the quantity being computed.
fn named<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Solver(m) => Error::Solver(format!("{what}: {m}")),
        other => other,
    })
}

fn pick<T: Copy>(xs: &[T], rng: &mut impl Rng) -> T {
    xs[rng.gen_range(0..xs.len())]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairKind {
    Generic,
    Equal,
    RankDeficient,
}

/// `D₀^{ε}(p‖q)` for distributions: the best `-log q(S)` over outcome sets
/// keeping at least `1 - ε` of `p`.
pub fn classical_d0_smooth(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let n = p.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << n) {
        let (mut ps, mut qs) = (0.0, 0.0);
        for i in (0..n).filter(|i| mask >> i & 1 == 1) {
            ps += p[i];
            qs += q[i];
        }
        if ps >= 1.0 - eps - 1e-12 {
            best = best.max(if qs > 0.0 { -qs.ln() } else { f64::INFINITY });
        }
    }
    best
}

fn outcome_distributions(rho: &HermitianOperator, sigma: &HermitianOperator, povm: &[HermitianOperator]) -> (Vec<f64>, Vec<f64>) {
    // weights below the rank cutoff are kernel leakage from rounding
    let probs = |s: &HermitianOperator| povm.iter().map(|m| m.inner(s)).map(|v| if v > RANK_CUTOFF { v } else { 0.0 }).collect();
    (probs(rho), probs(sigma))
}

fn pair_suite(seed: u64, index: usize, grid: &HarnessGrid) -> Result<Vec<BoundReport>> {
    let mut rng = seeded_rng(seed);
    let d = pick(&grid.dims, &mut rng);
    let eps = pick(&grid.pair_eps, &mut rng);
    let kind = match index % 10 {
        0 => PairKind::Equal,
        1 | 2 => PairKind::RankDeficient,
        _ => PairKind::Generic,
    };
    let (rho, sigma) = match kind {
        PairKind::Equal => {
            let r = random_density(d, rng.gen_range(1..=d), &mut rng);
            (r.clone(), r)
        }
        PairKind::RankDeficient => (random_density(d, d, &mut rng), random_density(d, d - 1, &mut rng)),
        PairKind::Generic => (random_density(d, rng.gen_range(1..=d), &mut rng), random_density(d, d, &mut rng)),
    };
    let delta = (grid.delta_fraction * eps).min(0.5 * (1.0 - eps));
    let s = &grid.settings;
    let params = Parameters { eps: Some(eps), delta: Some(delta), dims: vec![d], ..Default::default() };
    let mut out = Vec::new();
    let mut push = |r: BoundReport| out.push(r.with_parameters(params.clone()));

    let d2 = named("collision dual", solve_d2_smooth(&rho, &sigma, eps, Side::Dual, s))?.value.ln();
    let dm = dmax_smooth_measured(&rho, &sigma, eps)?.nats;
    let dm_wide = dmax_smooth_measured(&rho, &sigma, eps + delta)?.nats;
    let dh_comp = dh_threshold(&rho, &sigma, 1.0 - eps)?.nats;
    let dh_wide = dh_threshold(&rho, &sigma, 1.0 - eps - delta)?.nats;
    let inv = |x: f64| (1.0 / x).ln();

    push(BoundReport::new("bounds1_collision_vs_max", d2, dm - inv(1.0 - eps), SDP_TOL, "second-order equivalence, first bound"));
    push(BoundReport::new(
        "bounds1_max_vs_hypothesis",
        dm - inv(1.0 - eps),
        dh_comp - inv(eps * (1.0 - eps).powi(2)),
        ANALYTIC_TOL,
        "second-order equivalence, first bound",
    ));
    push(BoundReport::new("bounds2_hypothesis_vs_collision", dh_wide - inv(delta * delta), d2, SDP_TOL, "second-order equivalence, second bound"));
    push(BoundReport::new("bounds3_max_vs_collision", dm_wide - ((1.0 - delta) / delta).ln(), d2, SDP_TOL, "second-order equivalence, third bound"));

    for &alpha in &grid.alphas {
        let dt = quantum_renyi(&rho, &sigma, alpha, RenyiFamily::Sandwiched)?.nats;
        let mid = affine(&[(alpha - 1.0, dt), (2.0 - alpha, dm)]);
        let upper = affine(&[(1.0, dt), ((2.0 - alpha) / (alpha - 1.0), inv(eps)), (-(2.0 - alpha), inv(1.0 - eps))]);
        let p = Parameters { alpha: Some(alpha), ..params.clone() };
        let note = "sandwiched divergence in place of the measured one";
        out.push(
            BoundReport::new("upper_exponent_interpolation", d2, mid, SDP_TOL, "collision upper exponent bound")
                .with_parameters(p.clone())
                .with_note(note),
        );
        out.push(
            BoundReport::new("upper_exponent_explicit", mid, upper, ANALYTIC_TOL, "collision upper exponent bound")
                .with_parameters(p.clone())
                .with_note(note),
        );
        if alpha == 2.0 {
            let dmeas = measured_collision(&rho, &sigma)?.nats;
            out.push(
                BoundReport::new("upper_exponent_measured", d2, dmeas, SDP_TOL, "collision upper exponent bound")
                    .with_parameters(p)
                    .with_note("exact measured collision divergence"),
            );
        }
    }
    let mut push = |r: BoundReport| out.push(r.with_parameters(params.clone()));

    let proj = sigma.eig().support_projector();
    let h = random_hermitian(d, &mut rng).conjugate_by(proj.matrix());
    push(BoundReport::new(
        "variance_lemma",
        h.trace_norm(),
        (bures_seminorm_sq(&sigma, &h)? * sigma.trace()).sqrt(),
        ANALYTIC_TOL,
        "trace norm against Bures norm",
    ));

    let dt_eps = named("trace-smoothed max", dmax_smooth_trace(&rho, &sigma, eps, s))?.nats;
    let dp = named("purified max", dmax_smooth_purified(&rho, &sigma, eps.sqrt(), s))?.nats;
    push(BoundReport::new("smoothing_measured_vs_trace", dm, dt_eps, SDP_TOL, "smoothing comparison (i)"));
    push(BoundReport::new("smoothing_purified_vs_measured", dp, dm + inv(1.0 - eps), SDP_TOL, "smoothing comparison (ii)"));
    push(BoundReport::new(
        "smoothing_measured_vs_purified",
        dm_wide,
        dp + ((eps + delta) * (1.0 - eps - delta) / delta).ln(),
        SDP_TOL,
        "smoothing comparison (iii)",
    ));

    // hypothesis testing as the order-zero measured divergence
    let dh = dh_threshold(&rho, &sigma, eps)?;
    if let Some(Witness::Test(m)) = &dh.certificate {
        let binary = [m.clone(), &HermitianOperator::identity(d) - m];
        let (p, q) = outcome_distributions(&rho, &sigma, &binary);
        push(BoundReport::equality(
            "hypothesis_as_order_zero",
            classical_d0_smooth(&p, &q, eps),
            dh.nats,
            ANALYTIC_TOL,
            "hypothesis testing as order-zero divergence",
        ));
    }
    let basis = (&rho - &sigma).eig();
    let projective: Vec<HermitianOperator> =
        (0..d).map(|i| HermitianOperator::outer(&basis.vectors.column(i).into_owned())).collect();
    let (p, q) = outcome_distributions(&rho, &sigma, &projective);
    push(BoundReport::new(
        "order_zero_projective_restriction",
        classical_d0_smooth(&p, &q, eps),
        dh.nats,
        ANALYTIC_TOL,
        "hypothesis testing as order-zero divergence",
    ));

    if kind == PairKind::Equal {
        push(BoundReport::equality("collision_identical_states", d2, 2.0 * (1.0 - eps).ln(), SDP_TOL, "second-order equivalence, first bound"));
    }
    if kind == PairKind::RankDeficient {
        let leak = sigma.eig().kernel_projector().inner(&rho);
        if (leak - eps).abs() > 1e-6 {
            let expect = leak > eps;
            let primal = named("collision primal", solve_d2_smooth(&rho, &sigma, eps, Side::Primal, s))?.value;
            let mismatches = [d2, primal, dm, dh_comp].iter().filter(|v| v.is_infinite() != expect).count();
            push(
                BoundReport::equality("finiteness_classification", mismatches as f64, 0.0, 0.0, "diverging case")
                    .with_note(format!("kernel weight {leak:.6}, {}", if expect { "infinite" } else { "finite" })),
            );
        }
    }

    for _ in 0..grid.channels {
        let ch = Channel::random(d, rng.gen_range(1..=d), &mut rng);
        let (nr, ns) = (ch.apply(&rho)?, ch.apply(&sigma)?);
        push(BoundReport::new(
            "data_processing_collision",
            named("processed collision", solve_d2_smooth(&nr, &ns, eps, Side::Dual, s))?.value.ln(),
            d2,
            SDP_TOL,
            "data processing",
        ));
        push(BoundReport::new("data_processing_max", dmax_smooth_measured(&nr, &ns, eps)?.nats, dm, ANALYTIC_TOL, "data processing"));
        push(BoundReport::new("data_processing_hypothesis", dh_threshold(&nr, &ns, eps)?.nats, dh.nats, ANALYTIC_TOL, "data processing"));
    }
    Ok(out)
}

/// Hash families that act on `x_dim` inputs: all functions to two
/// outputs, plus Toeplitz families when `x_dim` is a power of two.
pub fn default_families(x_dim: usize) -> Result<Vec<HashFamily>> {
    let mut fams = vec![HashFamily::exhaustive(x_dim, 2)?];
    if x_dim.is_power_of_two() && x_dim > 1 {
        let m = x_dim.trailing_zeros() as usize;
        for k in 1..=m.min(2) {
            fams.push(HashFamily::toeplitz(m as u32, k as u32)?);
        }
    }
    Ok(fams)
}

fn cq_suite(seed: u64, grid: &HarnessGrid) -> Result<Vec<BoundReport>> {
    let mut rng = seeded_rng(seed);
    let x = pick(&grid.x_dims, &mut rng);
    let e = pick(&grid.e_dims, &mut rng);
    let state = random_cq(x, e, &mut rng);
    cq_reports(&state, grid)
}

/// Every privacy-amplification report for one CQ state.
pub fn cq_reports(state: &CQState, grid: &HarnessGrid) -> Result<Vec<BoundReport>> {
    cq_reports_with(state, grid, &default_families(state.x_dim())?)
}

/// As [`cq_reports`] with explicit hash families (at least one).
pub fn cq_reports_with(state: &CQState, grid: &HarnessGrid, families: &[HashFamily]) -> Result<Vec<BoundReport>> {
    if families.is_empty() {
        return Err(Error::InvalidInput("no hash family given".into()));
    }
    for f in families {
        check_dim(state.x_dim(), f.inputs())?;
    }
    let s = &grid.settings;
    let rho_e = state.marginal_e();
    let base = Parameters { dims: vec![state.x_dim(), state.e_dim()], ..Default::default() };
    let mut out = Vec::new();
    let mut ells: Vec<(f64, f64)> = Vec::new();
    for &eps in &grid.cq_eps {
        let p_eps = Parameters { eps: Some(eps), ..base.clone() };
        for fam in families {
            out.push(achievability_bound_smooth(state, &rho_e, eps, fam, s)?);
        }
        if eps == 0.0 {
            let blocks = state.weighted_blocks();
            let rho = embed_cq(state).into_op();
            let sigma = HermitianOperator::identity(state.x_dim()).kron(&rho_e);
            let q_sandwiched = quantum_renyi(&rho, &sigma, 2.0, RenyiFamily::Sandwiched)?.nats.exp();
            for fam in families {
                let z = fam.outputs();
                let bures = leftover_bound_bures(&blocks, &rho_e, z)?;
                let p = Parameters { z: Some(z), ..p_eps.clone() };
                out.push(
                    BoundReport::new("leftover_bures", lhs_expected_distance(state, fam)?, bures, ANALYTIC_TOL, "tightened leftover hash lemma")
                        .with_parameters(p.clone()),
                );
                out.push(
                    BoundReport::new(
                        "leftover_relaxation",
                        bures,
                        0.5 * ((z as f64 - 1.0) * q_sandwiched).sqrt(),
                        ANALYTIC_TOL,
                        "measured collision below sandwiched collision",
                    )
                    .with_parameters(p),
                );
            }
            continue;
        }
        let ell = extractable_randomness_exhaustive(state, eps)?.ell;
        ells.push((eps, ell));
        if grid.k * eps < 1.0 {
            out.extend(converse_reports(state, eps, grid.k, ell, s)?);
        }
        let mu = grid.mu_fraction * eps;
        let delta = (grid.delta_fraction * eps).min(0.5 * (1.0 - eps));
        let (h2_form, hmin_form) = achievability_entropy_bounds(state, eps, mu, s)?;
        let purified = achievability_purified_bound(state, eps, mu, s)?;
        let p_mu = Parameters { mu: Some(mu), delta: Some(delta), ..p_eps.clone() };
        let note = "achievable sizes are integers: the bound guarantees log floor(exp(bound))";
        for (name, bound) in
            [("achievability_collision", h2_form), ("achievability_min_entropy", hmin_form), ("achievability_purified", purified)]
        {
            out.push(
                BoundReport::new(name, achievable_size(bound), ell, ANALYTIC_TOL, "entropic achievability")
                    .with_parameters(p_mu.clone())
                    .with_note(note),
            );
        }
        let converse = conditional_entropy(
            state,
            &EntropySpec { kind: EntropyKind::DmaxSmoothMeasured, variant: Variant::Down, eps: eps + delta },
            s,
        )?
        .nats + ((eps + delta) / delta).ln();
        out.push(
            BoundReport::new("sandwich_consistency", h2_form, converse, ANALYTIC_TOL, "achievability against converse")
                .with_parameters(p_mu.clone()),
        );
        out.push(
            BoundReport::new("sandwich_consistency_min_entropy", hmin_form, converse, ANALYTIC_TOL, "achievability against converse")
                .with_parameters(p_mu),
        );
    }
    for w in ells.windows(2) {
        out.push(
            BoundReport::new("extractable_monotone", w[0].1, w[1].1, 0.0, "extractable randomness grows with error")
                .with_parameters(Parameters { eps: Some(w[1].0), ..base.clone() }),
        );
    }
    for &alpha in &grid.alphas {
        out.extend(renyi_achievability_bound(state, alpha, &families[0], s)?);
    }
    Ok(out)
}

fn decoupling_suite(seed: u64, grid: &HarnessGrid, clifford: &UnitaryEnsemble) -> Result<Vec<BoundReport>> {
    let mut rng = seeded_rng(seed);
    let e = rng.gen_range(1..=2);
    let eps = pick(&grid.cq_eps, &mut rng);
    let rho = random_density(2 * e, rng.gen_range(1..=2 * e), &mut rng);
    let rho_e = rho.partial_trace(&[2, e], &[1])?;
    let r = decoupling_bench(&rho, &rho_e, (2, 1), eps, clifford, &grid.settings)?;
    let k = random_hermitian(4 * e * e, &mut rng);
    let t = twirl_average(&k, e, clifford)?;
    let twirl = BoundReport::equality("twirl_identity", t.average.max_abs_diff(&t.analytic), 0.0, 1e-12, "unitary twirl")
        .with_parameters(Parameters { dims: vec![2, e], ..Default::default() });
    Ok(vec![r.smoothed, r.bures, r.coefficient, twirl])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::Summary;

    #[test]
    fn order_zero_of_distributions() {
        let p = [0.5, 0.3, 0.2];
        let q = [0.2, 0.3, 0.5];
        // keep {0,1}: q = 0.5
        assert!((classical_d0_smooth(&p, &q, 0.2) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(classical_d0_smooth(&p, &q, 0.0), 0.0);
        assert_eq!(classical_d0_smooth(&[1.0, 0.0], &[0.0, 1.0], 0.1), f64::INFINITY);
    }

    #[test]
    fn seeds_differ_across_suites_and_instances() {
        let a = derive_seed(7, Suite::Pair, 0);
        assert_ne!(a, derive_seed(7, Suite::Cq, 0));
        assert_ne!(a, derive_seed(7, Suite::Pair, 1));
        assert_ne!(a, derive_seed(8, Suite::Pair, 0));
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let grid = HarnessGrid { instances: 4, ..Default::default() };
        let a = inequality_harness(3, &grid);
        let b = inequality_harness(3, &grid);
        assert_eq!(a, b);
        let failed: Vec<_> = a.iter().filter(|r| !r.passed()).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert_eq!(Summary::of(&a).fail, 0);
    }
}
