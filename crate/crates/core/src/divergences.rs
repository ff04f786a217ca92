//! Classical and quantum divergences, their smoothed variants, and the
//! conditional entropies of classical-quantum states built from them.
//!
//! Values are in nats; `+∞` and `-∞` are represented by the IEEE
//! infinities. Entropies are returned as the negated divergence against
//! `I_X ⊗ σ_E`.

use std::f64::consts::LN_2;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    bures_seminorm_sq, lyapunov_solve, psd_log, psd_power, CMat, HermitianOperator, Spectrum, RANK_CUTOFF,
};
use crate::sdp::{self, Certificate, ConditionalProgram, SdpSettings, Side};
use crate::states::{random_hermitian, seeded_rng, CQState};

/// A divergence or entropy value with whatever witnessed it.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceValue {
    pub nats: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Threshold `γ` of a hockey-stick divergence.
    Threshold(f64),
    /// A test operator `0 ⪯ M ⪯ I`.
    Test(HermitianOperator),
    /// One test per classical value.
    BlockTests(Vec<HermitianOperator>),
    /// A smoothed (sub)normalized operator.
    Smoothed(HermitianOperator),
    /// Smoothed blocks per classical value.
    BlockSmoothed(Vec<HermitianOperator>),
    /// A smoothed classical distribution.
    Distribution(Vec<f64>),
    /// Rank-one projectors of a measurement.
    Measurement(Vec<HermitianOperator>),
    /// The reference state `σ_E` that attains the value.
    Reference(HermitianOperator),
}

impl DivergenceValue {
    pub fn new(nats: f64) -> Self {
        Self { nats, certificate: None }
    }

    pub fn with(nats: f64, certificate: Witness) -> Self {
        Self { nats, certificate: Some(certificate) }
    }

    pub fn bits(&self) -> f64 {
        self.nats / LN_2
    }

    fn negate(mut self) -> Self {
        self.nats = -self.nats;
        self
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidInput(format!("smoothing parameter {eps} must lie in [0, 1)")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("order {alpha} must be nonnegative")));
    }
    Ok(())
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Classical Rényi divergence `(1/(α-1)) log Σ p^α q^{1-α}` with the limits
/// `α = 0` (`-log Σ_{p>0} q`), `α = 1` (Kullback-Leibler) and `α = ∞`.
pub fn renyi_classical(p: &[f64], q: &[f64], alpha: f64) -> Result<DivergenceValue> {
    check_dim(p.len(), q.len())?;
    check_distribution(p)?;
    check_distribution(q)?;
    check_alpha(alpha)?;
    let pairs = || p.iter().zip(q).filter(|(&a, _)| a > 0.0);
    let leaks = pairs().any(|(_, &b)| b == 0.0);
    let v = if alpha == 0.0 {
        -pairs().map(|(_, &b)| b).sum::<f64>().ln()
    } else if alpha == 1.0 {
        if leaks {
            f64::INFINITY
        } else {
            pairs().map(|(&a, &b)| a * (a / b).ln()).sum()
        }
    } else if alpha.is_infinite() {
        if leaks {
            f64::INFINITY
        } else {
            pairs().map(|(&a, &b)| a / b).fold(0.0, f64::max).ln()
        }
    } else if alpha > 1.0 && leaks {
        f64::INFINITY
    } else {
        let s: f64 = pairs().filter(|(_, &b)| b > 0.0).map(|(&a, &b)| a.powf(alpha) * b.powf(1.0 - alpha)).sum();
        s.ln() / (alpha - 1.0)
    };
    Ok(DivergenceValue::new(v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenyiFamily {
    Petz,
    Sandwiched,
}

/// Weight of `rho` on the kernel of a spectrum.
fn kernel_weight(rho: &HermitianOperator, spec: &Spectrum) -> f64 {
    rho.inner(&spec.kernel_projector())
}

fn leaks(rho: &HermitianOperator, sigma_spec: &Spectrum) -> bool {
    kernel_weight(rho, sigma_spec) > RANK_CUTOFF * rho.trace().abs().max(1.0)
}

/// `Tr ρ (log ρ - log σ)` and `Tr ρ (log ρ - log σ)² - D²`.
pub fn relative_entropy_and_variance(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<(f64, f64)> {
    check_dim(rho.dim(), sigma.dim())?;
    let ss = sigma.eig();
    if leaks(rho, &ss) {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let l = &psd_log(rho) - &ss.map_support(f64::ln);
    let rl = rho.matrix() * l.matrix();
    let d: f64 = rl.diagonal().iter().map(|z| z.re).sum();
    let v: f64 = crate::linalg::trace_product(&rl, l.matrix()).re - d * d;
    Ok((d, v.max(0.0)))
}

/// Quantum Rényi divergence of the given family. `α = 1` gives the
/// Umegaki relative entropy; `α = ∞` gives the max-divergence for the
/// sandwiched family and `log max r_i/s_j` over overlapping eigenvectors
/// for the Petz family.
pub fn quantum_renyi(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    family: RenyiFamily,
) -> Result<DivergenceValue> {
    check_dim(rho.dim(), sigma.dim())?;
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(Error::InvalidInput("order must be positive".into()));
    }
    if alpha == 1.0 {
        return Ok(DivergenceValue::new(relative_entropy_and_variance(rho, sigma)?.0));
    }
    let ss = sigma.eig();
    if alpha > 1.0 && leaks(rho, &ss) {
        return Ok(DivergenceValue::new(f64::INFINITY));
    }
    if alpha.is_infinite() {
        return match family {
            RenyiFamily::Sandwiched => dmax(rho, sigma),
            RenyiFamily::Petz => {
                let rs = rho.eig();
                let (rt, st) = (rs.threshold(), ss.threshold());
                let overlap = rs.vectors.adjoint() * &ss.vectors;
                let mut best: f64 = 0.0;
                for (i, &r) in rs.values.iter().enumerate() {
                    for (j, &s) in ss.values.iter().enumerate() {
                        if r > rt && s > st && overlap[(i, j)].norm_sqr() > 1e-12 {
                            best = best.max(r / s);
                        }
                    }
                }
                Ok(DivergenceValue::new(best.ln()))
            }
        };
    }
    let q = match family {
        RenyiFamily::Petz => {
            let a = psd_power(rho, alpha);
            let b = ss.map_support(|l| l.powf(1.0 - alpha));
            a.inner(&b)
        }
        RenyiFamily::Sandwiched => {
            let g = ss.map_support(|l| l.powf((1.0 - alpha) / (2.0 * alpha)));
            let inner = rho.conjugate_by(g.matrix());
            inner.eig().values.iter().map(|&l| l.max(0.0).powf(alpha)).sum()
        }
    };
    let v = if q <= 0.0 {
        if alpha < 1.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        q.ln() / (alpha - 1.0)
    };
    Ok(DivergenceValue::new(v))
}

/// `log inf{λ ≥ 0 : A ⪯ λB}` for Hermitian `A` and positive `B`.
pub fn dmax(a: &HermitianOperator, b: &HermitianOperator) -> Result<DivergenceValue> {
    check_dim(a.dim(), b.dim())?;
    b.check_psd()?;
    let spec = b.eig();
    let r = spec.rank();
    let n = b.dim();
    let scale = a.frobenius_norm().max(1.0);
    let v = spec.support_basis();
    let inv_sqrt = HermitianOperator::from_diagonal(&spec.values[..r].iter().map(|l| 1.0 / l.sqrt()).collect::<Vec<_>>());
    let a11 = a.compress(&v);
    let mut effective = a11;
    if r < n {
        let w = spec.vectors.columns(r, n - r).into_owned();
        let a22 = a.compress(&w);
        let a12 = v.adjoint() * a.matrix() * &w;
        let s22 = a22.eig();
        if s22.values[0] > RANK_CUTOFF * scale {
            return Ok(DivergenceValue::new(f64::INFINITY));
        }
        // λB₁ - A₁₁ ⪰ A₁₂ (-A₂₂)⁺ A₂₁, with A₁₂ supported on the range of -A₂₂.
        let neg = -&a22;
        let ns = neg.eig();
        let nthr = RANK_CUTOFF * scale;
        let pinv = ns.map(|l| if l > nthr { 1.0 / l } else { 0.0 });
        let ker = ns.map(|l| if l > nthr { 0.0 } else { 1.0 });
        if (&a12 * ker.matrix()).norm() > 1e-9 * scale {
            return Ok(DivergenceValue::new(f64::INFINITY));
        }
        let corr = HermitianOperator::new(&a12 * pinv.matrix() * a12.adjoint())?;
        effective = &effective + &corr;
    }
    if r == 0 {
        return Ok(DivergenceValue::new(f64::NEG_INFINITY));
    }
    let m = effective.conjugate_by(inv_sqrt.matrix());
    let lmax = m.max_eigenvalue();
    Ok(DivergenceValue::new(if lmax > 0.0 { lmax.ln() } else { f64::NEG_INFINITY }))
}

/// `E_γ(ρ‖σ) = Tr(ρ - γσ)₊`.
pub fn hockey_stick(rho: &HermitianOperator, sigma: &HermitianOperator, gamma: f64) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    if !(gamma >= 0.0) {
        return Err(Error::InvalidInput(format!("threshold {gamma} must be nonnegative")));
    }
    Ok(positive_sum(&(rho - &sigma.scale(gamma))))
}

fn positive_sum(h: &HermitianOperator) -> f64 {
    h.eig().values.iter().filter(|&&l| l > 0.0).sum()
}

/// Smallest `γ` with `f(γ) ≤ eps` for a non-increasing `f` with `f(0) > eps`,
/// or `None` if none exists below `1e12`.
fn smallest_threshold(f: impl Fn(f64) -> f64, start_hi: Option<f64>, eps: f64) -> Option<f64> {
    let mut lo = 0.0;
    let mut hi = match start_hi {
        Some(h) if h.is_finite() && f(h) <= eps => h,
        _ => {
            let mut h: f64 = start_hi.filter(|h| h.is_finite() && *h > 0.0).unwrap_or(1.0);
            while f(h) > eps {
                lo = h;
                h *= 2.0;
                if h > 1e12 {
                    return None;
                }
            }
            h
        }
    };
    for _ in 0..300 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `D_max^{ε,M}(ρ‖σ) = log inf{γ : E_γ(ρ‖σ) ≤ ε}`, with the threshold as
/// certificate.
pub fn dmax_smooth_measured(rho: &HermitianOperator, sigma: &HermitianOperator, eps: f64) -> Result<DivergenceValue> {
    check_dim(rho.dim(), sigma.dim())?;
    check_eps(eps)?;
    if positive_sum(rho) <= eps {
        return Ok(DivergenceValue::with(f64::NEG_INFINITY, Witness::Threshold(0.0)));
    }
    let ss = sigma.eig();
    if kernel_weight(rho, &ss) >= eps - RANK_CUTOFF && leaks(rho, &ss) {
        return Ok(DivergenceValue::new(f64::INFINITY));
    }
    let start = dmax(rho, sigma)?.nats.exp();
    let f = |g: f64| positive_sum(&(rho - &sigma.scale(g)));
    Ok(match smallest_threshold(f, Some(start), eps) {
        Some(g) => DivergenceValue::with(g.ln(), Witness::Threshold(g)),
        None => DivergenceValue::new(f64::INFINITY),
    })
}

/// Blockwise version for `ρ_XE` against `I_X ⊗ σ_E`.
fn cq_dmax_smooth_measured(blocks: &[HermitianOperator], sigma: &HermitianOperator, eps: f64) -> Result<DivergenceValue> {
    check_eps(eps)?;
    let f = |g: f64| blocks.iter().map(|b| positive_sum(&(b - &sigma.scale(g)))).sum::<f64>();
    if f(0.0) <= eps {
        return Ok(DivergenceValue::with(f64::NEG_INFINITY, Witness::Threshold(0.0)));
    }
    let ss = sigma.eig();
    let leak: f64 = blocks.iter().map(|b| kernel_weight(b, &ss)).sum();
    if leak > RANK_CUTOFF && leak >= eps - RANK_CUTOFF {
        return Ok(DivergenceValue::new(f64::INFINITY));
    }
    let mut start: f64 = 0.0;
    for b in blocks {
        start = start.max(dmax(b, sigma)?.nats.exp());
    }
    Ok(match smallest_threshold(f, Some(start), eps) {
        Some(g) => DivergenceValue::with(g.ln(), Witness::Threshold(g)),
        None => DivergenceValue::new(f64::INFINITY),
    })
}

/// `Tr ρ P` for the projector onto the positive eigenspace of `ρ - sσ`.
fn np_test(rho: &HermitianOperator, sigma: &HermitianOperator, s: f64) -> (HermitianOperator, f64) {
    let p = (rho - &sigma.scale(s)).eig().map(|l| if l > 0.0 { 1.0 } else { 0.0 });
    let w = p.inner(rho);
    (p, w)
}

/// `D_H^ε(ρ‖σ) = -log min{Tr Mσ : 0 ⪯ M ⪯ I, Tr Mρ ≥ 1 - ε}` via the
/// Neyman-Pearson test. The returned test has `Tr Mρ = 1 - ε`; weight on
/// a tied eigenspace is split uniformly.
pub fn dh_threshold(rho: &HermitianOperator, sigma: &HermitianOperator, eps: f64) -> Result<DivergenceValue> {
    check_dim(rho.dim(), sigma.dim())?;
    check_eps(eps)?;
    let target = 1.0 - eps;
    if rho.trace() < target - 1e-12 {
        return Err(Error::InvalidInput(format!(
            "first argument has trace {} below the required acceptance {target}",
            rho.trace()
        )));
    }
    let ss = sigma.eig();
    let ker = ss.kernel_projector();
    let leak = ker.inner(rho);
    if leak >= target {
        return Ok(DivergenceValue::with(f64::INFINITY, Witness::Test(ker.scale(target / leak))));
    }
    let (mut lo, mut hi) = (0.0, dmax(rho, sigma)?.nats.exp());
    let (mut m_lo, mut g_lo) = np_test(rho, sigma, lo);
    if !hi.is_finite() || hi <= 0.0 {
        hi = 1.0;
    }
    hi *= 1.0 + 1e-9;
    let (mut m_hi, mut g_hi) = np_test(rho, sigma, hi);
    while g_hi > target {
        lo = hi;
        m_lo = m_hi;
        g_lo = g_hi;
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::Solver("no threshold separates the hypotheses".into()));
        }
        (m_hi, g_hi) = np_test(rho, sigma, hi);
    }
    for _ in 0..300 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (m, g) = np_test(rho, sigma, mid);
        if g >= target {
            lo = mid;
            m_lo = m;
            g_lo = g;
        } else {
            hi = mid;
            m_hi = m;
            g_hi = g;
        }
    }
    let c = if g_lo > g_hi { ((target - g_hi) / (g_lo - g_hi)).clamp(0.0, 1.0) } else { 0.0 };
    let test = &m_hi.scale(1.0 - c) + &m_lo.scale(c);
    let beta = test.inner(sigma);
    let nats = if beta > 0.0 { -beta.ln() } else { f64::INFINITY };
    Ok(DivergenceValue::with(nats, Witness::Test(test)))
}

/// `D₂^{ε,T}(p‖q) = log Σ p'²/q` with `p' = min(p, γq)` and `γ` chosen so
/// that `Σ (p - γq)₊ = ε`.
pub fn classical_smooth_collision(p: &[f64], q: &[f64], eps: f64) -> Result<DivergenceValue> {
    check_dim(p.len(), q.len())?;
    check_distribution(p)?;
    check_distribution(q)?;
    check_eps(eps)?;
    let leak: f64 = p.iter().zip(q).filter(|(_, &b)| b == 0.0).map(|(&a, _)| a).sum();
    if leak > eps + 1e-12 {
        return Ok(DivergenceValue::new(f64::INFINITY));
    }
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| q[i] > 0.0 && p[i] > 0.0).collect();
    order.sort_by(|&i, &j| (p[i] / q[i]).total_cmp(&(p[j] / q[j])));
    let mut a: f64 = order.iter().map(|&i| p[i]).sum();
    let mut b: f64 = order.iter().map(|&i| q[i]).sum();
    let mut gamma = 0.0;
    if leak + a > eps {
        for &k in &order {
            let r = p[k] / q[k];
            if leak + a - r * b <= eps {
                gamma = (leak + a - eps) / b;
                break;
            }
            a -= p[k];
            b -= q[k];
            gamma = r;
        }
    }
    let smoothed: Vec<f64> =
        p.iter().zip(q).map(|(&a, &b)| if b > 0.0 { a.min(gamma * b) } else { 0.0 }).collect();
    let total: f64 = smoothed.iter().zip(q).filter(|(_, &b)| b > 0.0).map(|(&a, &b)| a * a / b).sum();
    Ok(DivergenceValue::with(total.ln(), Witness::Distribution(smoothed)))
}

/// `D₂^M(ρ‖σ) = log ‖ρ‖²_{B,σ}`.
pub fn measured_collision(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<DivergenceValue> {
    let v = bures_seminorm_sq(sigma, rho)?;
    Ok(DivergenceValue::new(if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }))
}

/// `D₂^{ε,M}(ρ‖σ)` from the test-side semidefinite program.
pub fn d2_smooth_measured(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    settings: &SdpSettings,
) -> Result<DivergenceValue> {
    let v = sdp::solve_d2_smooth(rho, sigma, eps, Side::Dual, settings)?;
    Ok(from_sdp(v.value.ln(), v.certificate))
}

/// `D_max^{ε,P}(ρ‖σ)` by semidefinite programming.
pub fn dmax_smooth_purified(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    settings: &SdpSettings,
) -> Result<DivergenceValue> {
    let v = sdp::solve_dmax_smooth_purified(rho, sigma, eps, settings)?;
    Ok(from_sdp(v.value.ln(), v.certificate))
}

/// `D_max^{ε,T}(ρ‖σ)` by semidefinite programming.
pub fn dmax_smooth_trace(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    settings: &SdpSettings,
) -> Result<DivergenceValue> {
    let v = sdp::solve_dmax_smooth_trace(rho, sigma, eps, settings)?;
    Ok(from_sdp(v.value.ln(), v.certificate))
}

fn from_sdp(nats: f64, cert: Certificate) -> DivergenceValue {
    let witness = match cert {
        Certificate::None => None,
        Certificate::Test(w) => Some(Witness::Test(w)),
        Certificate::Smoothed(r) => Some(Witness::Smoothed(r)),
        Certificate::BlockTests(w) => Some(Witness::BlockTests(w)),
        Certificate::BlockSmoothed(r, _) => Some(Witness::BlockSmoothed(r)),
    };
    DivergenceValue { nats, certificate: witness }
}

/// Outcome distributions of a rank-one projective measurement.
fn measure(rho: &HermitianOperator, sigma: &HermitianOperator, u: &CMat) -> (Vec<f64>, Vec<f64>) {
    let pr = u.adjoint() * rho.matrix() * u;
    let ps = u.adjoint() * sigma.matrix() * u;
    let n = u.ncols();
    (
        (0..n).map(|i| pr[(i, i)].re.max(0.0)).collect(),
        (0..n).map(|i| ps[(i, i)].re.max(0.0)).collect(),
    )
}

fn unitary_exp(h: &HermitianOperator, step: f64) -> CMat {
    let spec = h.eig();
    let phases = DVector::from_iterator(
        spec.dim(),
        spec.values.iter().map(|&l| Complex64::new(0.0, step * l).exp()),
    );
    &spec.vectors * CMat::from_diagonal(&phases) * spec.vectors.adjoint()
}

/// Lower bound on the measured Rényi divergence from projective
/// measurements: eigenbases of `ρ`, `σ`, `ρ - tσ` and (for `α = 2`) the
/// optimal collision basis, refined by `budget` random local moves.
pub fn measured_renyi_lower_bound(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    budget: usize,
    seed: u64,
) -> Result<DivergenceValue> {
    check_dim(rho.dim(), sigma.dim())?;
    check_alpha(alpha)?;
    let mut candidates: Vec<CMat> = vec![rho.eig().vectors, sigma.eig().vectors];
    for k in -6..=6 {
        let t = 10f64.powf(k as f64 / 2.0);
        candidates.push((rho - &sigma.scale(t)).eig().vectors);
    }
    if let Ok(z) = lyapunov_solve(sigma, rho) {
        candidates.push(z.eig().vectors);
    }
    let score = |u: &CMat| -> f64 {
        let (p, q) = measure(rho, sigma, u);
        renyi_classical(&p, &q, alpha).map(|v| v.nats).unwrap_or(f64::NEG_INFINITY)
    };
    let mut best_u = candidates[0].clone();
    let mut best = f64::NEG_INFINITY;
    for u in candidates {
        let s = score(&u);
        if s > best {
            best = s;
            best_u = u;
        }
    }
    let mut rng = seeded_rng(seed);
    let mut step = 0.3;
    for _ in 0..budget {
        if best.is_infinite() {
            break;
        }
        let h = random_hermitian(rho.dim(), &mut rng);
        let cand = &best_u * unitary_exp(&h, step * rng.gen::<f64>());
        let s = score(&cand);
        if s > best {
            best = s;
            best_u = cand;
            step = (step * 1.2).min(1.0);
        } else {
            step = (step * 0.97).max(1e-6);
        }
    }
    let projectors = (0..best_u.ncols())
        .map(|i| HermitianOperator::outer(&best_u.column(i).into_owned()))
        .collect();
    Ok(DivergenceValue::with(best, Witness::Measurement(projectors)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "alpha")]
pub enum EntropyKind {
    /// Min-entropy from the max-divergence.
    Dmax,
    /// Smooth min-entropy with measured smoothing.
    DmaxSmoothMeasured,
    /// Smooth min-entropy with purified-distance smoothing.
    DmaxSmoothPurified,
    /// Collision entropy from the measured collision divergence.
    D2Measured,
    /// Smooth collision entropy with measured smoothing.
    D2SmoothMeasured,
    /// Smooth collision entropy of a source with commuting (diagonal)
    /// side information, from the classical formula.
    H2Classicalized,
    Sandwiched(f64),
    Petz(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Optimized over the reference state `σ_E`.
    Up,
    /// Reference fixed to the marginal `ρ_E`.
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySpec {
    pub kind: EntropyKind,
    pub variant: Variant,
    pub eps: f64,
}

fn sdp_entropy(state: &CQState, which: ConditionalProgram, eps: f64, settings: &SdpSettings) -> Result<DivergenceValue> {
    let v = sdp::solve_conditional(state, which, eps, settings)?;
    Ok(from_sdp(-v.value.ln(), v.certificate))
}

/// `-D(ρ_XE ‖ I_X ⊗ σ_E)` for a fixed reference, blockwise where possible.
pub fn conditional_divergence(
    state: &CQState,
    sigma: &HermitianOperator,
    kind: EntropyKind,
    eps: f64,
    settings: &SdpSettings,
) -> Result<DivergenceValue> {
    check_dim(state.e_dim(), sigma.dim())?;
    check_eps(eps)?;
    let blocks = state.weighted_blocks();
    let full_sigma = || HermitianOperator::identity(state.x_dim()).kron(sigma);
    let full_rho = || crate::states::embed_cq(state).into_op();
    let v = match kind {
        EntropyKind::Dmax => {
            let mut best = f64::NEG_INFINITY;
            for b in &blocks {
                best = best.max(dmax(b, sigma)?.nats);
            }
            DivergenceValue::new(best)
        }
        EntropyKind::DmaxSmoothMeasured => cq_dmax_smooth_measured(&blocks, sigma, eps)?,
        EntropyKind::DmaxSmoothPurified => {
            let v = sdp::solve_cq_dmax_purified(state, Some(sigma), eps, settings)?;
            from_sdp(v.value.ln(), v.certificate)
        }
        EntropyKind::D2Measured => {
            let mut total = 0.0;
            for b in &blocks {
                total += bures_seminorm_sq(sigma, b)?;
            }
            DivergenceValue::new(total.ln())
        }
        EntropyKind::D2SmoothMeasured => {
            let v = sdp::solve_cq_d2_smooth(state, Some(sigma), eps, settings)?;
            from_sdp(v.value.ln(), v.certificate)
        }
        EntropyKind::H2Classicalized => {
            let (p, q) = classical_joint(state, sigma)?;
            classical_smooth_collision(&p, &q, eps)?
        }
        EntropyKind::Sandwiched(a) => quantum_renyi(&full_rho(), &full_sigma(), a, RenyiFamily::Sandwiched)?,
        EntropyKind::Petz(a) => quantum_renyi(&full_rho(), &full_sigma(), a, RenyiFamily::Petz)?,
    };
    Ok(v.negate())
}

/// Joint distribution `p(x) ⟨e|ρ_{E,x}|e⟩` and `⟨e|σ|e⟩`, for diagonal blocks.
fn classical_joint(state: &CQState, sigma: &HermitianOperator) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = state.e_dim();
    let mut worst: f64 = 0.0;
    for b in state.blocks().iter().chain(std::iter::once(sigma)) {
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    worst = worst.max(b.matrix()[(i, j)].norm());
                }
            }
        }
    }
    if worst > 1e-10 {
        return Err(Error::NotBlockDiagonal(worst));
    }
    let mut p = Vec::with_capacity(state.x_dim() * d);
    let mut q = Vec::with_capacity(state.x_dim() * d);
    for (px, b) in state.p().iter().zip(state.blocks()) {
        for e in 0..d {
            p.push(px * b.matrix()[(e, e)].re);
            q.push(sigma.matrix()[(e, e)].re);
        }
    }
    Ok((p, q))
}

/// Conditional entropy `H(X|E)` of a classical-quantum state.
pub fn conditional_entropy(state: &CQState, spec: &EntropySpec, settings: &SdpSettings) -> Result<DivergenceValue> {
    check_eps(spec.eps)?;
    let rho_e = state.marginal_e();
    match spec.variant {
        Variant::Down => conditional_divergence(state, &rho_e, spec.kind, spec.eps, settings),
        Variant::Up => match spec.kind {
            EntropyKind::Dmax => sdp_entropy(state, ConditionalProgram::HminUp, 0.0, settings),
            EntropyKind::DmaxSmoothMeasured => sdp_entropy(state, ConditionalProgram::HminUp, spec.eps, settings),
            EntropyKind::D2Measured => sdp_entropy(state, ConditionalProgram::H2Up, 0.0, settings),
            EntropyKind::D2SmoothMeasured | EntropyKind::H2Classicalized => {
                if spec.kind == EntropyKind::H2Classicalized {
                    classical_joint(state, &rho_e)?;
                }
                sdp_entropy(state, ConditionalProgram::H2Up, spec.eps, settings)
            }
            EntropyKind::DmaxSmoothPurified => {
                let v = sdp::solve_cq_dmax_purified(state, None, spec.eps, settings)?;
                let reference = match &v.certificate {
                    Certificate::BlockSmoothed(_, Some(s)) => Some(Witness::Reference(s.clone())),
                    _ => None,
                };
                Ok(DivergenceValue { nats: -v.value.ln(), certificate: reference })
            }
            EntropyKind::Petz(a) => petz_up(state, a),
            EntropyKind::Sandwiched(a) => sandwiched_up(state, a),
        },
    }
}

/// `H↑_α = α/(1-α) log Tr (Tr_X ρ_XE^α)^{1/α}` for the Petz family.
fn petz_up(state: &CQState, alpha: f64) -> Result<DivergenceValue> {
    if !(alpha > 0.0) || alpha == 1.0 || alpha.is_infinite() {
        return Err(Error::InvalidInput(format!("order {alpha} not supported for the optimized Petz entropy")));
    }
    let d = state.e_dim();
    let mut acc = HermitianOperator::zeros(d);
    for b in state.weighted_blocks() {
        acc = &acc + &psd_power(&b, alpha);
    }
    let t: f64 = acc.eig().values.iter().map(|&l| l.max(0.0).powf(1.0 / alpha)).sum();
    let sigma = psd_power(&acc, 1.0 / alpha);
    let tr = sigma.trace();
    let nats = alpha / (1.0 - alpha) * t.ln();
    Ok(DivergenceValue::with(nats, Witness::Reference(sigma.scale(1.0 / tr))))
}

/// `σ = G G† / Tr(G G†)` from a real parameter vector.
fn state_from_params(x: &[f64], d: usize) -> HermitianOperator {
    let g = CMat::from_fn(d, d, |i, j| Complex64::new(x[2 * (i * d + j)], x[2 * (i * d + j) + 1]));
    let h = HermitianOperator::hermitian_part(&(&g * g.adjoint()));
    let t = h.trace();
    h.scale(1.0 / t)
}

fn params_from_state(s: &HermitianOperator) -> Vec<f64> {
    let r = crate::linalg::psd_sqrt(s);
    r.matrix().iter().enumerate().fold(vec![0.0; 2 * s.dim() * s.dim()], |mut acc, (k, z)| {
        // nalgebra iterates column-major; the square root is Hermitian, so
        // reading it transposed only conjugates the parametrization
        let d = s.dim();
        let (i, j) = (k % d, k / d);
        acc[2 * (i * d + j)] = z.re;
        acc[2 * (i * d + j) + 1] = z.im;
        acc
    })
}

/// Nelder-Mead minimization on a box-free parameter space.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], scale: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= 1e-13 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            (0..n).map(|k| centroid[k] + t * (simplex[n].0[k] - centroid[k])).collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < simplex[n].1 { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = (0..n).map(|k| best[k] + 0.5 * (s.0[k] - best[k])).collect();
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Sandwiched `H↑_α`, maximized over `σ_E` numerically. Any reference gives
/// a valid lower bound on the optimum, which is what bounds built on it need.
fn sandwiched_up(state: &CQState, alpha: f64) -> Result<DivergenceValue> {
    let d = state.e_dim();
    let rho = crate::states::embed_cq(state).into_op();
    let nx = state.x_dim();
    let objective = |s: &HermitianOperator| -> f64 {
        let full = HermitianOperator::identity(nx).kron(s);
        quantum_renyi(&rho, &full, alpha, RenyiFamily::Sandwiched).map(|v| v.nats).unwrap_or(f64::INFINITY)
    };
    let mut starts = vec![state.marginal_e(), HermitianOperator::identity(d).scale(1.0 / d as f64)];
    if alpha > 0.0 && alpha != 1.0 && alpha.is_finite() {
        if let Ok(DivergenceValue { certificate: Some(Witness::Reference(s)), .. }) = petz_up(state, alpha) {
            starts.push(s);
        }
    }
    let mut best_sigma = starts[0].clone();
    let mut best = f64::INFINITY;
    for s in &starts {
        // mix in a little of the identity so the parametrization is interior
        let s = &s.scale(0.999) + &HermitianOperator::identity(d).scale(0.001 / d as f64);
        let v = objective(&s);
        if v < best {
            best = v;
            best_sigma = s;
        }
    }
    if d > 1 {
        let f = |x: &[f64]| objective(&state_from_params(x, d));
        let (x, v) = nelder_mead(&f, &params_from_state(&best_sigma), 0.05, 400 * d * d);
        let (x, v2) = nelder_mead(&f, &x, 0.01, 400 * d * d);
        if v.min(v2) < best {
            best = v.min(v2);
            best_sigma = state_from_params(&x, d);
        }
    }
    Ok(DivergenceValue::with(-best, Witness::Reference(best_sigma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_cq, random_density};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn plus() -> HermitianOperator {
        HermitianOperator::from_parts(2, &[0.5, 0.5, 0.5, 0.5], &[0.0; 4]).unwrap()
    }

    fn zero() -> HermitianOperator {
        HermitianOperator::basis_projector(2, 0)
    }

    fn mixed(d: usize) -> HermitianOperator {
        HermitianOperator::identity(d).scale(1.0 / d as f64)
    }

    #[test]
    fn classical_renyi_limits() {
        let p = [0.75, 0.25];
        let q = [0.5, 0.5];
        let kl = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert_abs_diff_eq!(renyi_classical(&p, &q, 1.0).unwrap().nats, kl, epsilon = 1e-15);
        assert_abs_diff_eq!(renyi_classical(&p, &q, f64::INFINITY).unwrap().nats, 1.5f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(renyi_classical(&p, &q, 0.0).unwrap().nats, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            renyi_classical(&p, &q, 2.0).unwrap().nats,
            (0.5625f64 / 0.5 + 0.0625 / 0.5).ln(),
            epsilon = 1e-15
        );
        assert_eq!(renyi_classical(&[0.5, 0.5], &[1.0, 0.0], 2.0).unwrap().nats, f64::INFINITY);
        assert_abs_diff_eq!(renyi_classical(&[1.0, 0.0], &[0.5, 0.5], 0.0).unwrap().nats, 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn sandwiched_pure_against_mixed() {
        let v = quantum_renyi(&zero(), &mixed(2), 2.0, RenyiFamily::Sandwiched).unwrap();
        assert_abs_diff_eq!(v.nats, 2f64.ln(), epsilon = 1e-12);
        let v = quantum_renyi(&zero(), &mixed(2), f64::INFINITY, RenyiFamily::Sandwiched).unwrap();
        assert_abs_diff_eq!(v.nats, 2f64.ln(), epsilon = 1e-12);
        let v = quantum_renyi(&zero(), &mixed(2), f64::INFINITY, RenyiFamily::Petz).unwrap();
        assert_abs_diff_eq!(v.nats, 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn umegaki_and_variance() {
        let rho = HermitianOperator::from_diagonal(&[0.75, 0.25]);
        let (d, v) = relative_entropy_and_variance(&rho, &mixed(2)).unwrap();
        let l = [1.5f64.ln(), 0.5f64.ln()];
        let de = 0.75 * l[0] + 0.25 * l[1];
        assert_abs_diff_eq!(d, de, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 0.75 * l[0] * l[0] + 0.25 * l[1] * l[1] - de * de, epsilon = 1e-14);
        let (d, v) = relative_entropy_and_variance(&zero(), &mixed(2)).unwrap();
        assert_abs_diff_eq!(d, 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dmax_against_two_by_two_generalized_eigenvalue() {
        // det(A - λB) = 0 for A = |+⟩⟨+|, B = diag(2/3, 1/3)
        let b = HermitianOperator::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]);
        let (a11, a12, a22, b1, b2): (f64, f64, f64, f64, f64) = (0.5, 0.5, 0.5, 2.0 / 3.0, 1.0 / 3.0);
        // (a11 - λ b1)(a22 - λ b2) - a12² = 0
        let qa = b1 * b2;
        let qb = -(a11 * b2 + a22 * b1);
        let qc = a11 * a22 - a12 * a12;
        let lam = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
        assert_abs_diff_eq!(dmax(&plus(), &b).unwrap().nats, lam.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(lam, 2.25, epsilon = 1e-12);
        assert_eq!(dmax(&plus(), &zero()).unwrap().nats, f64::INFINITY);
        let neg = HermitianOperator::from_diagonal(&[0.5, -1.0]);
        assert_abs_diff_eq!(dmax(&neg, &zero()).unwrap().nats, 0.5f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn hockey_stick_closed_form() {
        let g = 2.4;
        let expect = ((1.0 - g) + (g * g + 1.0f64).sqrt()) / 2.0;
        assert_abs_diff_eq!(hockey_stick(&plus(), &zero(), g).unwrap(), expect, epsilon = 1e-14);
        assert_abs_diff_eq!(expect, 0.6, epsilon = 1e-14);
    }

    #[test]
    fn smooth_max_divergence_examples() {
        let rho = random_density(3, 3, &mut seeded_rng(1));
        for eps in [0.0, 0.1, 0.5] {
            let v = dmax_smooth_measured(&rho, &rho, eps).unwrap();
            assert_abs_diff_eq!(v.nats, (1.0 - eps).ln(), epsilon = 1e-10);
        }
        let v = dmax_smooth_measured(&plus(), &zero(), 0.6).unwrap();
        assert_abs_diff_eq!(v.nats, 2.4f64.ln(), epsilon = 1e-10);
        let v = dmax_smooth_measured(&mixed(2), &HermitianOperator::identity(2), 0.3).unwrap();
        assert_abs_diff_eq!(v.nats, (0.7f64 / 2.0).ln(), epsilon = 1e-10);
        assert_eq!(dmax_smooth_measured(&plus(), &zero(), 0.4).unwrap().nats, f64::INFINITY);
    }

    #[test]
    fn hypothesis_testing_examples() {
        let rho = random_density(3, 2, &mut seeded_rng(4));
        for eps in [0.0, 0.2, 0.7] {
            let v = dh_threshold(&rho, &rho, eps).unwrap();
            assert_abs_diff_eq!(v.nats, -(1.0 - eps).ln(), epsilon = 1e-9);
        }
        let d = HermitianOperator::from_diagonal(&[1.0, 0.0]);
        assert_abs_diff_eq!(dh_threshold(&d, &mixed(2), 0.0).unwrap().nats, 2f64.ln(), epsilon = 1e-12);
        let v = dh_threshold(&d, &mixed(2), 0.5).unwrap();
        assert_abs_diff_eq!(v.nats, 4f64.ln(), epsilon = 1e-12);
        let Some(Witness::Test(m)) = v.certificate else { panic!("no test") };
        assert_abs_diff_eq!(m.inner(&d), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn classical_smoothing_example() {
        let v = classical_smooth_collision(&[0.75, 0.25], &[0.5, 0.5], 0.25).unwrap();
        assert_abs_diff_eq!(v.nats, (5.0f64 / 8.0).ln(), epsilon = 1e-15);
        let Some(Witness::Distribution(p)) = v.certificate else { panic!("no distribution") };
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.25, epsilon = 1e-15);
        for eps in [0.0, 0.3, 0.9] {
            let v = classical_smooth_collision(&[0.25; 4], &[0.25; 4], eps).unwrap();
            assert_abs_diff_eq!(v.nats, 2.0 * (1.0 - eps).ln(), epsilon = 1e-14);
        }
    }

    #[test]
    fn measured_collision_example() {
        let sigma = HermitianOperator::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]);
        assert_abs_diff_eq!(measured_collision(&plus(), &sigma).unwrap().nats, (17.0f64 / 8.0).ln(), epsilon = 1e-13);
    }

    #[test]
    fn measured_renyi_bound_reaches_collision_value() {
        let mut rng = seeded_rng(8);
        let rho = random_density(3, 3, &mut rng);
        let sigma = random_density(3, 3, &mut rng);
        let lb = measured_renyi_lower_bound(&rho, &sigma, 2.0, 50, 1).unwrap().nats;
        let exact = measured_collision(&rho, &sigma).unwrap().nats;
        let sandwiched = quantum_renyi(&rho, &sigma, 2.0, RenyiFamily::Sandwiched).unwrap().nats;
        assert!(lb <= exact + 1e-9 && exact <= sandwiched + 1e-9);
        assert_abs_diff_eq!(lb, exact, epsilon = 1e-9);
    }

    #[test]
    fn entropy_examples() {
        let s = SdpSettings::default();
        let uniform = CQState::classical(vec![0.5, 0.5]).unwrap();
        let spec = EntropySpec { kind: EntropyKind::Dmax, variant: Variant::Up, eps: 0.0 };
        assert_abs_diff_eq!(conditional_entropy(&uniform, &spec, &s).unwrap().nats, 2f64.ln(), epsilon = 1e-7);
        let eps = 0.2;
        for variant in [Variant::Up, Variant::Down] {
            let spec = EntropySpec { kind: EntropyKind::DmaxSmoothMeasured, variant, eps };
            let h = conditional_entropy(&uniform, &spec, &s).unwrap().nats;
            assert_abs_diff_eq!(h, 2f64.ln() - (1.0 - eps).ln(), epsilon = 1e-7);
        }
        // perfectly correlated side information
        let corr = CQState::new(vec![0.5, 0.5], vec![zero(), HermitianOperator::basis_projector(2, 1)]).unwrap();
        for variant in [Variant::Up, Variant::Down] {
            let spec = EntropySpec { kind: EntropyKind::Dmax, variant, eps: 0.0 };
            assert_abs_diff_eq!(conditional_entropy(&corr, &spec, &s).unwrap().nats, 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn optimized_entropies_dominate_marginal_ones() {
        let s = SdpSettings::default();
        let st = random_cq(2, 2, &mut seeded_rng(12));
        for kind in [EntropyKind::D2Measured, EntropyKind::Sandwiched(1.5), EntropyKind::Petz(1.5)] {
            let up = conditional_entropy(&st, &EntropySpec { kind, variant: Variant::Up, eps: 0.0 }, &s).unwrap();
            let down = conditional_entropy(&st, &EntropySpec { kind, variant: Variant::Down, eps: 0.0 }, &s).unwrap();
            assert!(up.nats >= down.nats - 1e-7, "{kind:?}: {} < {}", up.nats, down.nats);
        }
    }

    #[test]
    fn petz_up_matches_numeric_optimum() {
        let st = random_cq(2, 2, &mut seeded_rng(21));
        let rho = crate::states::embed_cq(&st).into_op();
        let closed = petz_up(&st, 1.5).unwrap();
        let Some(Witness::Reference(sigma)) = &closed.certificate else { panic!("no reference") };
        let full = HermitianOperator::identity(2).kron(sigma);
        let direct = -quantum_renyi(&rho, &full, 1.5, RenyiFamily::Petz).unwrap().nats;
        assert_abs_diff_eq!(closed.nats, direct, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn hockey_stick_is_nonincreasing(seed in 0u64..500, g in 0.0f64..5.0, dg in 0.0f64..1.0) {
            let mut rng = seeded_rng(seed);
            let rho = random_density(3, 3, &mut rng);
            let sigma = random_density(3, 2, &mut rng);
            prop_assert!(hockey_stick(&rho, &sigma, g + dg).unwrap() <= hockey_stick(&rho, &sigma, g).unwrap() + 1e-12);
        }

        #[test]
        fn smooth_max_divergence_hits_target(seed in 0u64..500, eps in 0.01f64..0.9) {
            let mut rng = seeded_rng(seed);
            let rho = random_density(3, 3, &mut rng);
            let sigma = random_density(3, 3, &mut rng);
            let v = dmax_smooth_measured(&rho, &sigma, eps).unwrap();
            let Some(Witness::Threshold(g)) = v.certificate else { panic!("no threshold") };
            prop_assert!((hockey_stick(&rho, &sigma, g).unwrap() - eps).abs() < 1e-9);
        }

        #[test]
        fn neyman_pearson_test_is_exact(seed in 0u64..500, eps in 0.0f64..0.95) {
            let mut rng = seeded_rng(seed);
            let rho = random_density(3, 3, &mut rng);
            let sigma = random_density(3, 2, &mut rng);
            let v = dh_threshold(&rho, &sigma, eps).unwrap();
            let Some(Witness::Test(m)) = v.certificate else { panic!("no test") };
            prop_assert!((m.inner(&rho) - (1.0 - eps)).abs() < 1e-9);
            prop_assert!(m.min_eigenvalue() > -1e-12 && m.max_eigenvalue() < 1.0 + 1e-12);
        }

        #[test]
        fn sandwiched_below_petz(seed in 0u64..500, alpha in 1.05f64..3.0) {
            let mut rng = seeded_rng(seed);
            let rho = random_density(3, 3, &mut rng);
            let sigma = random_density(3, 3, &mut rng);
            let s = quantum_renyi(&rho, &sigma, alpha, RenyiFamily::Sandwiched).unwrap().nats;
            let p = quantum_renyi(&rho, &sigma, alpha, RenyiFamily::Petz).unwrap().nats;
            let m = measured_renyi_lower_bound(&rho, &sigma, alpha, 0, 0).unwrap().nats;
            prop_assert!(m <= s + 1e-9 && s <= p + 1e-9);
        }
    }
}
