//! Smooth min-entropy of `n` i.i.d. copies against the second-order
//! expansion `nH + √(nV) Φ⁻¹(ε)`. Reporting only.

use std::fmt::Write as _;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::divergences::relative_entropy_and_variance;
use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;
use crate::states::{embed_cq, CQState};

/// Largest block length handled.
pub const MAX_COPIES: usize = 6;

/// Header line of every CSV file written by this crate.
pub const CSV_HEADER: &str = "# smollision-v1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub n: usize,
    /// `H_min^{ε,M,↓}(Xⁿ|Eⁿ)` in nats.
    pub hmin: f64,
    /// `nH + √(nV) Φ⁻¹(ε)` in nats.
    pub reference: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendReport {
    pub eps: f64,
    /// `H(X|E) = -D(ρ_XE ‖ I ⊗ ρ_E)`.
    pub entropy: f64,
    /// `V(ρ_XE ‖ I ⊗ ρ_E)`.
    pub variance: f64,
    pub rows: Vec<TrendRow>,
}

impl TrendReport {
    /// CSV with the version header, 12 significant digits; values in bits
    /// when `bits` is set.
    pub fn to_csv(&self, bits: bool) -> String {
        let (scale, unit) = if bits { (std::f64::consts::LOG2_E, "bits") } else { (1.0, "nats") };
        let mut s = format!("{CSV_HEADER}\nn,hmin_{unit},reference_{unit},residual_{unit}\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:.11e},{:.11e},{:.11e}", r.n, r.hmin * scale, r.reference * scale, r.residual * scale);
        }
        s
    }
}

/// Compositions of `n` into `parts` nonnegative counts.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn multinomial(counts: &[usize]) -> f64 {
    let mut coef = 1.0;
    let mut total = 0;
    for &c in counts {
        for j in 1..=c {
            total += 1;
            coef *= total as f64 / j as f64;
        }
    }
    coef
}

fn tensor_power(op: &HermitianOperator, n: usize) -> HermitianOperator {
    (1..n).fold(op.clone(), |acc, _| acc.kron(op))
}

/// `Σ_types count · Tr(p^{⊗n}ρ_type - γ ρ_E^{⊗n})₊` over the blocks of
/// `ρ^{⊗n}`; permuted sequences give unitarily equivalent blocks.
struct TypeClasses {
    classes: Vec<(f64, HermitianOperator)>,
    sigma: HermitianOperator,
}

impl TypeClasses {
    fn new(state: &CQState, n: usize) -> Self {
        let weighted = state.weighted_blocks();
        let classes = compositions(n, state.x_dim())
            .into_iter()
            .map(|counts| {
                let mut block: Option<HermitianOperator> = None;
                for (x, &c) in counts.iter().enumerate() {
                    for _ in 0..c {
                        block = Some(match block {
                            None => weighted[x].clone(),
                            Some(b) => b.kron(&weighted[x]),
                        });
                    }
                }
                (multinomial(&counts), block.expect("n ≥ 1"))
            })
            .collect();
        Self { classes, sigma: tensor_power(&state.marginal_e(), n) }
    }

    fn excess(&self, gamma: f64) -> f64 {
        let shift = self.sigma.scale(gamma);
        self.classes
            .iter()
            .map(|(c, b)| c * (b - &shift).eig().values.iter().filter(|&&l| l > 0.0).sum::<f64>())
            .sum()
    }
}

/// `H_min^{ε,M,↓}(Xⁿ|Eⁿ)` for `n ≤ 6` by bisection on the hockey-stick
/// divergence of `ρ^{⊗n}` against `I ⊗ ρ_E^{⊗n}`.
pub fn iid_smooth_min_entropy(state: &CQState, eps: f64, n: usize) -> Result<f64> {
    if n == 0 || n > MAX_COPIES {
        return Err(Error::TooLarge(format!("{n} copies (supported: 1 to {MAX_COPIES})")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("smoothing {eps} must lie in (0, 1)")));
    }
    let tc = TypeClasses::new(state, n);
    // every block sits below ρ_E^{⊗n}, so γ = 1 already gives zero excess
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if tc.excess(mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(-hi.ln())
}

/// The trend table for `n = 1..=n_max`.
pub fn iid_trend_report(state: &CQState, eps: f64, n_max: usize) -> Result<TrendReport> {
    if n_max > MAX_COPIES {
        return Err(Error::TooLarge(format!("{n_max} copies (supported up to {MAX_COPIES})")));
    }
    let rho = embed_cq(state).into_op();
    let sigma = HermitianOperator::identity(state.x_dim()).kron(&state.marginal_e());
    let (d, v) = relative_entropy_and_variance(&rho, &sigma)?;
    let h = -d;
    let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(eps);
    let rows = (1..=n_max)
        .map(|n| {
            let hmin = iid_smooth_min_entropy(state, eps, n)?;
            let nf = n as f64;
            let reference = nf * h + (nf * v).sqrt() * z;
            Ok(TrendRow { n, hmin, reference, residual: hmin - reference })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrendReport { eps, entropy: h, variance: v, rows })
}

/// Uniform bit encoded in `|0⟩` or `cos θ|0⟩ + sin θ|1⟩` on a qubit.
pub fn correlated_qubit_source(theta: f64) -> Result<CQState> {
    let zero = HermitianOperator::basis_projector(2, 0);
    let v = nalgebra::DVector::from_vec(vec![
        num_complex::Complex64::new(theta.cos(), 0.0),
        num_complex::Complex64::new(theta.sin(), 0.0),
    ]);
    CQState::new(vec![0.5, 0.5], vec![zero, HermitianOperator::outer(&v)])
}
