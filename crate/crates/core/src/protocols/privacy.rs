//! Privacy amplification: exact expected distances of hashed sources, the
//! achievability and converse bounds, and extractable randomness by
//! exhaustive search over functions.

use serde::Serialize;

use super::report::{BoundReport, Parameters, ANALYTIC_TOL, SDP_TOL};
use crate::divergences::{conditional_entropy, EntropyKind, EntropySpec, Variant};
use crate::error::{Error, Result};
use crate::hashing::{extraction_map, HashFamily, HashFunction};
use crate::linalg::{bures_seminorm_sq, HermitianOperator};
use crate::sdp::{solve_cq_d2_smooth, SdpSettings};
use crate::states::CQState;

/// `‖R^f_ZE - I_Z/|Z| ⊗ R_E‖₊` for one function.
pub fn hashed_distance(blocks: &[HermitianOperator], f: &HashFunction) -> Result<f64> {
    let hashed = extraction_map(blocks, f)?;
    let r_e = hashed.iter().skip(1).fold(hashed[0].clone(), |acc, b| &acc + b);
    let shift = r_e.scale(1.0 / f.outputs as f64);
    let (mut tr, mut norm) = (0.0, 0.0);
    for b in &hashed {
        let d = b - &shift;
        tr += d.trace();
        norm += d.trace_norm();
    }
    Ok(0.5 * tr.abs() + 0.5 * norm)
}

/// `E_f ‖R^f_ZE - I_Z/|Z| ⊗ R_E‖₊`, summed exactly over the family.
pub fn expected_distance(blocks: &[HermitianOperator], family: &HashFamily) -> Result<f64> {
    let mut total = 0.0;
    for (f, w) in family.enumerate()? {
        if w > 0.0 {
            total += w * hashed_distance(blocks, &f)?;
        }
    }
    Ok(total)
}

/// Expected distance from uniform-and-independent after hashing a CQ state.
pub fn lhs_expected_distance(state: &CQState, family: &HashFamily) -> Result<f64> {
    expected_distance(&state.weighted_blocks(), family)
}

/// `½ √(|Z| - 1) ‖R_XE‖_{B, I ⊗ σ_E}`, evaluated blockwise; `+∞` when a
/// block leaves the support of `σ_E`.
pub fn leftover_bound_bures(blocks: &[HermitianOperator], sigma: &HermitianOperator, outputs: usize) -> Result<f64> {
    let mut sq = 0.0;
    for b in blocks {
        sq += bures_seminorm_sq(sigma, b)?;
    }
    Ok(0.5 * ((outputs as f64 - 1.0) * sq).sqrt())
}

fn cq_params(state: &CQState) -> Parameters {
    Parameters { dims: vec![state.x_dim(), state.e_dim()], ..Default::default() }
}

/// `E_f ½‖ρ^f_ZE - π_Z ⊗ ρ_E‖₁ ≤ ε + ½ √((|Z| - 1) Q₂^{ε,M}(ρ_XE ‖ I ⊗ σ_E))`.
pub fn achievability_bound_smooth(
    state: &CQState,
    sigma: &HermitianOperator,
    eps: f64,
    family: &HashFamily,
    settings: &SdpSettings,
) -> Result<BoundReport> {
    let lhs = lhs_expected_distance(state, family)?;
    let q = solve_cq_d2_smooth(state, Some(sigma), eps, settings)?.value;
    let z = family.outputs();
    let rhs = eps + 0.5 * ((z as f64 - 1.0) * q).sqrt();
    Ok(BoundReport::new("leftover_hash_smoothed", lhs, rhs, SDP_TOL, "smoothed leftover hash lemma")
        .with_parameters(Parameters { eps: Some(eps), z: Some(z), ..cq_params(state) }))
}

/// Lower bounds on `ℓ_ε` in nats: the collision-entropy form
/// `H₂^{ε-μ,M,↑} - log 1/(4μ²)` and the min-entropy form
/// `H_min^{ε-μ,M,↑} - log (1-ε+μ)/(4μ²)`.
pub fn achievability_entropy_bounds(state: &CQState, eps: f64, mu: f64, settings: &SdpSettings) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu < eps && eps < 1.0) {
        return Err(Error::InvalidInput(format!("need 0 < μ < ε < 1, got μ={mu}, ε={eps}")));
    }
    let smoothing = eps - mu;
    let h2 = conditional_entropy(
        state,
        &EntropySpec { kind: EntropyKind::D2SmoothMeasured, variant: Variant::Up, eps: smoothing },
        settings,
    )?
    .nats;
    let hmin = conditional_entropy(
        state,
        &EntropySpec { kind: EntropyKind::DmaxSmoothMeasured, variant: Variant::Up, eps: smoothing },
        settings,
    )?
    .nats;
    let four_mu2 = 4.0 * mu * mu;
    Ok((h2 + four_mu2.ln(), hmin - ((1.0 - smoothing) / four_mu2).ln()))
}

/// `H_min^{√(ε-μ),P,↑} - log 1/(4μ³)`, a lower bound on `ℓ_ε` in nats.
pub fn achievability_purified_bound(state: &CQState, eps: f64, mu: f64, settings: &SdpSettings) -> Result<f64> {
    if !(mu > 0.0 && mu < eps && eps < 1.0) {
        return Err(Error::InvalidInput(format!("need 0 < μ < ε < 1, got μ={mu}, ε={eps}")));
    }
    let h = conditional_entropy(
        state,
        &EntropySpec { kind: EntropyKind::DmaxSmoothPurified, variant: Variant::Up, eps: (eps - mu).sqrt() },
        settings,
    )?
    .nats;
    Ok(h + (4.0 * mu.powi(3)).ln())
}

/// `log ⌊exp(bound)⌋`: the largest integer output size a real-valued
/// achievability bound guarantees.
pub fn achievable_size(bound_nats: f64) -> f64 {
    let z = bound_nats.exp().floor();
    if z >= 1.0 {
        z.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// One row of the exhaustive search: the best function to `z` outputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeRow {
    pub z: usize,
    pub min_distance: f64,
    pub argmin: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractableRandomness {
    /// `ℓ_ε` in nats.
    pub ell: f64,
    pub z: usize,
    pub rows: Vec<SizeRow>,
}

/// Set partitions of `0..n` as block labels in restricted-growth form.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for label in 0..=max + 1 {
            prefix.push(label);
            grow(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    grow(&mut vec![0], 0, n, &mut out);
    out
}

/// `ℓ_ε(ρ_XE)` from the minimum over all functions `X → Z` for each size
/// `|Z|` with `|Z|^{|X|} ≤ 2^20`.
///
/// The distance of `f` depends only on the partition of `X` into nonempty
/// preimages; each unused output adds `1/(2|Z|)`. This reduces the search
/// to the set partitions of `X`.
pub fn extractable_randomness_exhaustive(state: &CQState, eps: f64) -> Result<ExtractableRandomness> {
    let n = state.x_dim();
    if n > 8 {
        return Err(Error::TooLarge(format!("exhaustive extraction needs |X| ≤ 8, got {n}")));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidInput(format!("error {eps} must lie in [0, 1)")));
    }
    let mut zmax = 1usize;
    while ((zmax + 1) as f64).powi(n as i32) <= (1u64 << 20) as f64 {
        zmax += 1;
    }
    if eps < 0.5 {
        // with |Z| > |X|/(1-2ε), unused outputs alone exceed ε
        zmax = zmax.min((n as f64 / (1.0 - 2.0 * eps)).floor() as usize);
    }
    let blocks = state.weighted_blocks();
    let rho_e = state.marginal_e();
    let subsets = 1usize << n;
    let sums: Vec<HermitianOperator> = (0..subsets)
        .map(|mask| {
            (0..n).filter(|&x| mask >> x & 1 == 1).fold(HermitianOperator::zeros(state.e_dim()), |acc, x| &acc + &blocks[x])
        })
        .collect();
    let partitions = set_partitions(n);
    let masks: Vec<Vec<usize>> = partitions
        .iter()
        .map(|labels| {
            let b = labels.iter().max().map_or(0, |m| m + 1);
            let mut m = vec![0usize; b];
            for (x, &l) in labels.iter().enumerate() {
                m[l] |= 1 << x;
            }
            m
        })
        .collect();
    let mut rows = Vec::with_capacity(zmax);
    for z in 1..=zmax {
        let shift = rho_e.scale(1.0 / z as f64);
        let mut norms = vec![f64::NAN; subsets];
        let mut best = (f64::INFINITY, 0usize);
        for (p, ms) in masks.iter().enumerate() {
            if ms.len() > z {
                continue;
            }
            let mut d = (z - ms.len()) as f64 / (2.0 * z as f64);
            for &m in ms {
                if norms[m].is_nan() {
                    norms[m] = (&sums[m] - &shift).trace_norm();
                }
                d += 0.5 * norms[m];
            }
            if d < best.0 {
                best = (d, p);
            }
        }
        rows.push(SizeRow { z, min_distance: best.0, argmin: partitions[best.1].clone() });
    }
    let best = rows.iter().filter(|r| r.min_distance <= eps + 1e-12).map(|r| r.z).max().unwrap_or(1);
    Ok(ExtractableRandomness { ell: (best as f64).ln(), z: best, rows })
}

/// `H_min + log k/(k-1)`.
pub fn converse_rhs(hmin_nats: f64, k: f64) -> f64 {
    hmin_nats + (k / (k - 1.0)).ln()
}

/// Both converse bounds against a precomputed `ℓ_ε`:
/// `ℓ_ε ≤ H_min^{√ε,P,↓} + log 1/(1-ε)` and `ℓ_ε ≤ H_min^{kε,M,↓} + log k/(k-1)`.
pub fn converse_reports(
    state: &CQState,
    eps: f64,
    k: f64,
    ell: f64,
    settings: &SdpSettings,
) -> Result<Vec<BoundReport>> {
    if !(eps > 0.0 && eps < 1.0 && k > 1.0 && k * eps < 1.0) {
        return Err(Error::InvalidInput(format!("need 0 < ε < 1 and 1 < k < 1/ε, got ε={eps}, k={k}")));
    }
    let hp = conditional_entropy(
        state,
        &EntropySpec { kind: EntropyKind::DmaxSmoothPurified, variant: Variant::Down, eps: eps.sqrt() },
        settings,
    )?
    .nats;
    let hm = conditional_entropy(
        state,
        &EntropySpec { kind: EntropyKind::DmaxSmoothMeasured, variant: Variant::Down, eps: k * eps },
        settings,
    )?
    .nats;
    let params = Parameters { eps: Some(eps), k: Some(k), ..cq_params(state) };
    Ok(vec![
        BoundReport::new("converse_purified", ell, hp - (1.0 - eps).ln(), SDP_TOL, "one-shot converse, purified form")
            .with_parameters(params.clone()),
        BoundReport::new("converse_measured", ell, converse_rhs(hm, k), ANALYTIC_TOL, "one-shot converse, measured form")
            .with_parameters(params),
    ])
}

/// Extractable randomness against both converse bounds.
pub fn converse_bound(state: &CQState, eps: f64, k: f64, settings: &SdpSettings) -> Result<Vec<BoundReport>> {
    let ell = extractable_randomness_exhaustive(state, eps)?.ell;
    converse_reports(state, eps, k, ell, settings)
}

/// `E_f ½‖ρ^f_ZE - π_Z ⊗ ρ_E‖₁ ≤ (3/2) exp(-((α-1)/α)(H_α^↑ - log|Z|))`
/// with the sandwiched entropy in place of the measured one, plus the
/// exact measured form at `α = 2`.
pub fn renyi_achievability_bound(
    state: &CQState,
    alpha: f64,
    family: &HashFamily,
    settings: &SdpSettings,
) -> Result<Vec<BoundReport>> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::InvalidInput(format!("order {alpha} must lie in (1, 2]")));
    }
    let lhs = lhs_expected_distance(state, family)?;
    let z = family.outputs() as f64;
    let rhs = |h: f64| 1.5 * (-(alpha - 1.0) / alpha * (h - z.ln())).exp();
    let params = Parameters { alpha: Some(alpha), z: Some(family.outputs()), ..cq_params(state) };
    let h = conditional_entropy(
        state,
        &EntropySpec { kind: EntropyKind::Sandwiched(alpha), variant: Variant::Up, eps: 0.0 },
        settings,
    )?
    .nats;
    let mut out = vec![BoundReport::new("renyi_achievability_sandwiched", lhs, rhs(h), ANALYTIC_TOL, "Renyi leftover hashing")
        .with_parameters(params.clone())
        .with_note("sandwiched entropy relaxes the measured one; reference state optimized numerically")];
    if alpha == 2.0 {
        let h2 = conditional_entropy(
            state,
            &EntropySpec { kind: EntropyKind::D2Measured, variant: Variant::Up, eps: 0.0 },
            settings,
        )?
        .nats;
        out.push(
            BoundReport::new("renyi_achievability_measured", lhs, rhs(h2), SDP_TOL, "Renyi leftover hashing")
                .with_parameters(params)
                .with_note("exact measured collision entropy"),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_cq, seeded_rng};
    use approx::assert_abs_diff_eq;

    fn deterministic() -> CQState {
        CQState::classical(vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn uniform_source_under_toeplitz() {
        let st = CQState::classical(vec![0.25; 4]).unwrap();
        let fam = HashFamily::toeplitz(2, 1).unwrap();
        // the all-zero seed is constant (distance ½); the other three members are balanced
        assert_abs_diff_eq!(lhs_expected_distance(&st, &fam).unwrap(), 0.125, epsilon = 1e-15);
        let one = HermitianOperator::identity(1);
        assert_abs_diff_eq!(leftover_bound_bures(&st.weighted_blocks(), &one, 2).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn deterministic_source_is_tight() {
        let st = deterministic();
        let fam = HashFamily::exhaustive(2, 2).unwrap();
        assert_abs_diff_eq!(lhs_expected_distance(&st, &fam).unwrap(), 0.5, epsilon = 1e-15);
        let r = achievability_bound_smooth(&st, &HermitianOperator::identity(1), 0.0, &fam, &SdpSettings::default()).unwrap();
        assert_abs_diff_eq!(r.rhs, 0.5, epsilon = 1e-7);
        assert!(r.passed());
    }

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(n).len(), b);
        }
    }

    #[test]
    fn extractable_randomness_examples() {
        let st = CQState::classical(vec![0.25; 4]).unwrap();
        let r = extractable_randomness_exhaustive(&st, 0.0).unwrap();
        assert_abs_diff_eq!(r.ell, 4f64.ln(), epsilon = 1e-15);
        let r = extractable_randomness_exhaustive(&deterministic(), 0.4).unwrap();
        assert_eq!(r.ell, 0.0);
    }

    #[test]
    fn partition_search_matches_all_functions() {
        let st = random_cq(3, 2, &mut seeded_rng(5));
        let r = extractable_randomness_exhaustive(&st, 0.3).unwrap();
        for row in r.rows.iter().take(4) {
            let fam = HashFamily::exhaustive(3, row.z).unwrap();
            let brute = fam
                .enumerate()
                .unwrap()
                .map(|(f, _)| hashed_distance(&st.weighted_blocks(), &f).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(row.min_distance, brute, epsilon = 1e-12);
        }
    }

    #[test]
    fn converse_arithmetic() {
        assert_abs_diff_eq!(converse_rhs(2.0, 2.0), 2.0 + 2f64.ln(), epsilon = 1e-15);
        let st = CQState::classical(vec![0.5, 0.5]).unwrap();
        let s = SdpSettings::default();
        let reports = converse_bound(&st, 0.1, 2.0, &s).unwrap();
        for r in &reports {
            assert_abs_diff_eq!(r.lhs, 2f64.ln(), epsilon = 1e-15);
            assert!(r.rhs >= 2f64.ln() && r.passed(), "{r:?}");
        }
    }

    #[test]
    fn renyi_bound_on_uniform_bit() {
        let st = CQState::classical(vec![0.5, 0.5]).unwrap();
        let fam = HashFamily::toeplitz(1, 1).unwrap();
        let reports = renyi_achievability_bound(&st, 2.0, &fam, &SdpSettings::default()).unwrap();
        assert_eq!(reports.len(), 2);
        for r in reports {
            // the zero matrix is a member, so half the seeds output a constant
            assert_abs_diff_eq!(r.lhs, 0.25, epsilon = 1e-15);
            assert_abs_diff_eq!(r.rhs, 1.5, epsilon = 1e-6);
        }
    }
}
