//! Semidefinite programs for smoothed collision and max-divergences and
//! for the related conditional entropies of classical-quantum states.
//!
//! Every program comes in a build step (returning the compiled standard
//! form) and a solve step that also handles the support conditions under
//! which the divergence is infinite, reduces to the support of the second
//! argument when that is exact, and extracts a certificate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::{MatExpr, Model, ModelSolution, ScalarExpr, Sense};
use super::solver::{SdpProblem, SdpSettings, SdpStatus};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{CMat, HermitianOperator, RANK_CUTOFF};
use crate::states::CQState;

/// Which of the two mutually dual programs to build.
///
/// `Primal` is the minimization over smoothed operators, `Dual` the
/// maximization over tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Primal,
    Dual,
}

#[derive(Clone, Debug)]
pub enum Certificate {
    None,
    /// A test `0 ⪯ W ⪯ I`.
    Test(HermitianOperator),
    /// A smoothed operator (`R` or `ρ'`).
    Smoothed(HermitianOperator),
    /// Tests for each classical value.
    BlockTests(Vec<HermitianOperator>),
    /// Smoothed blocks for each classical value, plus the optimizing `σ_E`
    /// when it was a variable.
    BlockSmoothed(Vec<HermitianOperator>, Option<HermitianOperator>),
}

/// Optimal value of one of the programs below.
#[derive(Clone, Debug)]
pub struct SdpValue {
    /// Objective at the returned solution; `+∞` when the divergence is infinite.
    pub value: f64,
    /// Objective bound carried by the multipliers.
    pub bound: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub certificate: Certificate,
}

impl SdpValue {
    fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            bound: f64::INFINITY,
            status: SdpStatus::Infeasible,
            iterations: 0,
            certificate: Certificate::None,
        }
    }

    fn from_solution(sol: &ModelSolution, certificate: Certificate) -> Self {
        Self { value: sol.value, bound: sol.bound, status: sol.status, iterations: sol.raw.iterations, certificate }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self.status, SdpStatus::Optimal | SdpStatus::NearOptimal)
    }
}

fn require_optimal(sol: &ModelSolution) -> Result<()> {
    match sol.status {
        SdpStatus::Optimal | SdpStatus::NearOptimal => Ok(()),
        s => Err(Error::Solver(format!(
            "status {s:?} (gap {:.2e}, infeasibility {:.2e}/{:.2e})",
            sol.raw.relative_gap, sol.raw.primal_infeasibility, sol.raw.dual_infeasibility
        ))),
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidInput(format!("smoothing parameter {eps} must lie in [0, 1)")));
    }
    Ok(())
}

/// How the second argument's kernel interacts with the first.
pub(crate) enum Reduction {
    /// The first argument lives in the support; both are compressed to it.
    Compressed(HermitianOperator, HermitianOperator),
    /// Weight `w > 0` on the kernel; the programs are solved unreduced.
    Leaking(f64),
}

pub(crate) fn reduce(rho: &HermitianOperator, sigma: &HermitianOperator) -> Reduction {
    let spec = sigma.eig();
    let leak = rho.inner(&spec.kernel_projector());
    if leak <= RANK_CUTOFF * rho.trace().max(1.0) {
        let basis = spec.support_basis();
        Reduction::Compressed(rho.compress(&basis), sigma.compress(&basis))
    } else {
        Reduction::Leaking(leak)
    }
}

fn e(h: &HermitianOperator) -> MatExpr {
    MatExpr::from_op(h)
}

fn ident(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// With `support = Some(V)`, the reference is singular and `Z = V Z'` is
/// parametrized on its support (`sigma` is then `V†σV`).
fn d2_model(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    support: Option<&CMat>,
    eps: f64,
    side: Side,
) -> (Model, MatExpr, ScalarExpr) {
    let d = rho.dim();
    match side {
        Side::Dual => {
            let full_sigma = match support {
                Some(v) => sigma.conjugate_by(v),
                None => sigma.clone(),
            };
            let mut m = Model::new(Sense::Maximize);
            let b = m.hermitian(d);
            let c = m.hermitian(d);
            let t = m.scalar();
            m.set_objective(
                b.re_inner(rho.matrix()).scale(2.0).sub(&t.scale(2.0 * eps)).sub(&c.re_inner(full_sigma.matrix())),
            );
            m.psd(b.clone());
            m.psd(c.clone());
            m.psd(MatExpr::from_scalar(&t, &ident(d)).sub(&b));
            m.psd(MatExpr::blocks(&[vec![&c, &b], vec![&b, &MatExpr::identity(d)]]));
            (m, b, t)
        }
        Side::Primal => {
            let mut m = Model::new(Sense::Minimize);
            let z = m.general(sigma.dim(), d, false);
            let t = m.hermitian(d);
            let r = match support {
                Some(v) => z.left_mul(v).hermitian_part(),
                None => z.hermitian_part(),
            };
            m.set_objective(t.re_trace());
            let zd = z.adjoint();
            m.psd(MatExpr::blocks(&[vec![&e(sigma), &z], vec![&zd, &t]]));
            m.psd(e(rho).sub(&r));
            m.nonneg(r.re_trace().plus(eps - rho.trace()));
            (m, r, ScalarExpr::constant(1.0))
        }
    }
}

/// Standard form of the program for `exp D₂^{ε,M}(ρ‖σ)`.
pub fn formulate_d2_smooth(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    side: Side,
) -> Result<SdpProblem> {
    check_dim(rho.dim(), sigma.dim())?;
    check_eps(eps)?;
    Ok(d2_model(rho, sigma, None, eps, side).0.compile())
}

/// `exp D₂^{ε,M}(ρ‖σ)` by semidefinite programming.
///
/// The certificate is the test `W = B/t` on the dual side and the smoothed
/// operator `R` on the primal side, both expressed in the original space.
pub fn solve_d2_smooth(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    side: Side,
    settings: &SdpSettings,
) -> Result<SdpValue> {
    check_dim(rho.dim(), sigma.dim())?;
    check_eps(eps)?;
    let spec = sigma.eig();
    let (r, s, basis, support) = match reduce(rho, sigma) {
        Reduction::Compressed(r, s) => (r, s, Some(spec.support_basis()), None),
        Reduction::Leaking(w) if w > eps + RANK_CUTOFF => return Ok(SdpValue::infinite()),
        Reduction::Leaking(_) => {
            let v = spec.support_basis();
            (rho.clone(), sigma.compress(&v), None, Some(v))
        }
    };
    if r.dim() == 0 || s.dim() == 0 {
        return Ok(SdpValue::infinite());
    }
    let (model, handle, t) = d2_model(&r, &s, support.as_ref(), eps, side);
    let sol = model.solve(settings)?;
    require_optimal(&sol)?;
    let lift = |h: HermitianOperator| match &basis {
        Some(v) => h.conjugate_by(v),
        None => h,
    };
    let op = handle.eval_hermitian(&sol.y);
    let cert = match side {
        Side::Dual => {
            let tv = t.eval(&sol.y);
            if tv > 0.0 {
                Certificate::Test(lift(op.scale(1.0 / tv)))
            } else {
                Certificate::None
            }
        }
        Side::Primal => Certificate::Smoothed(lift(op)),
    };
    Ok(SdpValue::from_solution(&sol, cert))
}

fn dmax_model(rho: &HermitianOperator, sigma: &HermitianOperator, eps: f64, side: Side) -> (Model, MatExpr, ScalarExpr) {
    let d = rho.dim();
    match side {
        Side::Primal => {
            let mut m = Model::new(Sense::Minimize);
            let lambda = m.scalar();
            let r = m.hermitian(d);
            m.set_objective(lambda.clone());
            m.psd(MatExpr::from_scalar(&lambda, sigma.matrix()).sub(&r));
            m.psd(e(rho).sub(&r));
            m.nonneg(r.re_trace().plus(eps - rho.trace()));
            (m, r, ScalarExpr::constant(1.0))
        }
        Side::Dual => {
            let mut m = Model::new(Sense::Maximize);
            let b = m.hermitian(d);
            let t = m.scalar();
            m.set_objective(b.re_inner(rho.matrix()).sub(&t.scale(eps)));
            m.psd(b.clone());
            m.psd(MatExpr::from_scalar(&t, &ident(d)).sub(&b));
            m.nonneg(b.re_inner(sigma.matrix()).scale(-1.0).plus(1.0));
            (m, b, t)
        }
    }
}

pub fn formulate_dmax_smooth(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    side: Side,
) -> Result<SdpProblem> {
    check_dim(rho.dim(), sigma.dim())?;
    check_eps(eps)?;
    Ok(dmax_model(rho, sigma, eps, side).0.compile())
}

/// `exp D_max^{ε,M}(ρ‖σ)` by semidefinite programming.
pub fn solve_dmax_smooth(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    side: Side,
    settings: &SdpSettings,
) -> Result<SdpValue> {
    check_dim(rho.dim(), sigma.dim())?;
    check_eps(eps)?;
    let spec = sigma.eig();
    let (r, s, basis) = match reduce(rho, sigma) {
        Reduction::Compressed(r, s) => (r, s, Some(spec.support_basis())),
        Reduction::Leaking(w) if w >= eps - RANK_CUTOFF => return Ok(SdpValue::infinite()),
        Reduction::Leaking(_) => (rho.clone(), sigma.clone(), None),
    };
    if r.dim() == 0 {
        return Ok(SdpValue::infinite());
    }
    let (model, handle, t) = dmax_model(&r, &s, eps, side);
    let sol = model.solve(settings)?;
    require_optimal(&sol)?;
    let lift = |h: HermitianOperator| match &basis {
        Some(v) => h.conjugate_by(v),
        None => h,
    };
    let op = handle.eval_hermitian(&sol.y);
    let cert = match side {
        Side::Dual => {
            let tv = t.eval(&sol.y);
            if tv > 0.0 {
                Certificate::Test(lift(op.scale(1.0 / tv)))
            } else {
                Certificate::None
            }
        }
        Side::Primal => Certificate::Smoothed(lift(op)),
    };
    Ok(SdpValue::from_solution(&sol, cert))
}

/// `min Tr Mσ` over tests `0 ⪯ M ⪯ I` with `Tr Mρ ≥ 1 - ε`.
pub fn solve_hypothesis_testing(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    settings: &SdpSettings,
) -> Result<SdpValue> {
    check_dim(rho.dim(), sigma.dim())?;
    check_eps(eps)?;
    let d = rho.dim();
    let mut m = Model::new(Sense::Minimize);
    let test = m.hermitian(d);
    m.set_objective(test.re_inner(sigma.matrix()));
    m.psd(test.clone());
    m.psd(MatExpr::identity(d).sub(&test));
    m.nonneg(test.re_inner(rho.matrix()).plus(eps - 1.0));
    let sol = m.solve(settings)?;
    require_optimal(&sol)?;
    let cert = Certificate::Test(test.eval_hermitian(&sol.y));
    Ok(SdpValue::from_solution(&sol, cert))
}

/// First argument and reference for the max-divergence programs, with the
/// smoothed operator restricted to `supp σ` (it must satisfy `ρ' ⪯ λσ`).
/// `embed` maps the support into the space of `rho`; it is `None` when
/// `rho` itself was compressed.
struct SupportRestricted {
    rho: HermitianOperator,
    sigma: HermitianOperator,
    embed: Option<CMat>,
    basis: CMat,
}

fn restrict_to_support(rho: &HermitianOperator, sigma: &HermitianOperator) -> (SupportRestricted, f64) {
    let basis = sigma.eig().support_basis();
    let s = sigma.compress(&basis);
    match reduce(rho, sigma) {
        Reduction::Compressed(r, _) => (SupportRestricted { rho: r, sigma: s, embed: None, basis }, 0.0),
        Reduction::Leaking(w) => {
            (SupportRestricted { rho: rho.clone(), sigma: s, embed: Some(basis.clone()), basis }, w)
        }
    }
}

impl SupportRestricted {
    fn lift(&self, x: &MatExpr) -> MatExpr {
        match &self.embed {
            Some(v) => x.congruence(v),
            None => x.clone(),
        }
    }
}

/// `exp D_max^{ε,T}(ρ‖σ)`: smoothing over subnormalized `ρ'` with
/// `‖ρ - ρ'‖₊ ≤ ε`.
pub fn solve_dmax_smooth_trace(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    settings: &SdpSettings,
) -> Result<SdpValue> {
    check_dim(rho.dim(), sigma.dim())?;
    check_eps(eps)?;
    let (sr, leak) = restrict_to_support(rho, sigma);
    if leak > 0.0 && leak >= eps - RANK_CUTOFF {
        return Ok(SdpValue::infinite());
    }
    let (d, k) = (sr.rho.dim(), sr.sigma.dim());
    let mut m = Model::new(Sense::Minimize);
    let lambda = m.scalar();
    let rp = m.hermitian(k);
    let p = m.hermitian(d);
    m.set_objective(lambda.clone());
    m.psd(MatExpr::from_scalar(&lambda, sr.sigma.matrix()).sub(&rp));
    m.psd(rp.clone());
    m.nonneg(rp.re_trace().scale(-1.0).plus(1.0));
    m.psd(p.clone());
    m.psd(p.sub(&e(&sr.rho)).add(&sr.lift(&rp)));
    m.nonneg(p.re_trace().scale(-1.0).plus(eps));
    let sol = m.solve(settings)?;
    // coherences between the support and the kernel can keep every ρ' on
    // the support outside the ball even when the kernel weight is below ε
    if sr.embed.is_some() && sol.status == SdpStatus::Infeasible {
        return Ok(SdpValue::infinite());
    }
    require_optimal(&sol)?;
    let smoothed = rp.eval_hermitian(&sol.y).conjugate_by(&sr.basis);
    Ok(SdpValue::from_solution(&sol, Certificate::Smoothed(smoothed)))
}

/// `exp D_max^{ε,P}(ρ‖σ)`: smoothing over subnormalized `ρ'` with purified
/// distance at most `ε`, using `√F(ρ, ρ') = max{Re Tr Z : [[ρ, Z], [Z†, ρ']] ⪰ 0}`.
pub fn solve_dmax_smooth_purified(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    eps: f64,
    settings: &SdpSettings,
) -> Result<SdpValue> {
    check_dim(rho.dim(), sigma.dim())?;
    check_eps(eps)?;
    // Purified-distance balls cannot escape a kernel that carries weight
    // more than ε² of fidelity.
    let (sr, leak) = restrict_to_support(rho, sigma);
    if leak > 0.0 && leak >= eps * eps - RANK_CUTOFF {
        return Ok(SdpValue::infinite());
    }
    // With ρ = W ρ_c W† on its own support and ρ' = E r E†, feasible
    // off-diagonal blocks are Z = W Y E†, so the program runs on (ρ_c, r)
    // and keeps a strictly feasible point.
    let w = sr.rho.eig().support_basis();
    let rho_c = sr.rho.compress(&w);
    let cross = match &sr.embed {
        Some(v) => v.adjoint() * &w,
        None => w.clone(),
    };
    let (d, k) = (rho_c.dim(), sr.sigma.dim());
    let mut m = Model::new(Sense::Minimize);
    let lambda = m.scalar();
    let rp = m.hermitian(k);
    let y = m.general(d, k, false);
    m.set_objective(lambda.clone());
    m.psd(MatExpr::from_scalar(&lambda, sr.sigma.matrix()).sub(&rp));
    let yd = y.adjoint();
    m.psd(MatExpr::blocks(&[vec![&e(&rho_c), &y], vec![&yd, &rp]]));
    m.nonneg(rp.re_trace().scale(-1.0).plus(1.0));
    m.nonneg(y.re_inner(&cross).plus(-(1.0 - eps * eps).sqrt()));
    let sol = m.solve(settings)?;
    if sr.embed.is_some() && sol.status == SdpStatus::Infeasible {
        return Ok(SdpValue::infinite());
    }
    require_optimal(&sol)?;
    let smoothed = rp.eval_hermitian(&sol.y).conjugate_by(&sr.basis);
    Ok(SdpValue::from_solution(&sol, Certificate::Smoothed(smoothed)))
}

/// Which conditional entropy program to build for a classical-quantum state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalProgram {
    /// `exp(-H₂^{ε,M,↑})`, optimized over `σ_E`.
    H2Up,
    /// `exp(-H₂^{ε,M,↓})`, with `σ_E = ρ_E`.
    H2Down,
    /// `exp(-H_min^{ε,M,↑})`.
    HminUp,
    /// `exp(-H_min^{ε,M,↓})`.
    HminDown,
}

/// Blocks `p(x) ρ_{E,x}` and the reference compressed to `supp ρ_E`.
struct CqReduced {
    blocks: Vec<HermitianOperator>,
    sigma: Option<HermitianOperator>,
    basis: CMat,
}

fn reduce_cq(state: &CQState, sigma: Option<&HermitianOperator>) -> Result<Option<CqReduced>> {
    let rho_e = state.marginal_e();
    let mut basis = rho_e.eig().support_basis();
    let mut reduced_sigma = None;
    if let Some(s) = sigma {
        check_dim(state.e_dim(), s.dim())?;
        // Compress to supp σ_E when it contains supp ρ_E; otherwise the
        // reference misses weight and the caller's support check applies.
        match reduce(&rho_e, s) {
            Reduction::Compressed(_, _) => {
                basis = s.eig().support_basis();
                reduced_sigma = Some(s.compress(&basis));
            }
            Reduction::Leaking(_) => return Ok(None),
        }
    }
    let blocks = state.weighted_blocks().iter().map(|b| b.compress(&basis)).collect();
    Ok(Some(CqReduced { blocks, sigma: reduced_sigma, basis }))
}

/// Weight of `ρ_XE` outside the support of `I ⊗ σ_E`.
pub(crate) fn cq_leak(state: &CQState, sigma: &HermitianOperator) -> f64 {
    let ker = sigma.eig().kernel_projector();
    state.marginal_e().inner(&ker)
}

fn check_reference(state: &CQState, sigma: Option<&HermitianOperator>) -> Result<()> {
    if let Some(s) = sigma {
        check_dim(state.e_dim(), s.dim())?;
        s.check_psd()?;
    }
    Ok(())
}

/// `exp D₂^{ε,M}(ρ_XE ‖ I_X ⊗ σ_E)` by the blockwise program, or its
/// minimum over states `σ_E` when `sigma` is `None`.
pub fn solve_cq_d2_smooth(
    state: &CQState,
    sigma: Option<&HermitianOperator>,
    eps: f64,
    settings: &SdpSettings,
) -> Result<SdpValue> {
    check_eps(eps)?;
    check_reference(state, sigma)?;
    let Some(red) = reduce_cq(state, sigma)? else {
        let leak = cq_leak(state, sigma.expect("reduction only fails with a reference"));
        if leak > eps + RANK_CUTOFF {
            return Ok(SdpValue::infinite());
        }
        let rho = crate::states::embed_cq(state).into_op();
        let full_sigma = HermitianOperator::identity(state.x_dim()).kron(sigma.expect("reference"));
        return solve_d2_smooth(&rho, &full_sigma, eps, Side::Dual, settings);
    };
    let d = red.basis.ncols();
    let mut m = Model::new(Sense::Maximize);
    let t = m.scalar();
    let k = if red.sigma.is_none() { Some(m.scalar()) } else { None };
    let mut obj = t.scale(-2.0 * eps);
    let mut c_sum = MatExpr::zeros(d, d);
    let mut tests = Vec::new();
    for blk in &red.blocks {
        let b = m.hermitian(d);
        let c = m.hermitian(d);
        obj = obj.add(&b.re_inner(blk.matrix()).scale(2.0));
        match &red.sigma {
            Some(s) => obj = obj.sub(&c.re_inner(s.matrix())),
            None => c_sum = c_sum.add(&c),
        }
        m.psd(b.clone());
        m.psd(c.clone());
        m.psd(MatExpr::from_scalar(&t, &ident(d)).sub(&b));
        m.psd(MatExpr::blocks(&[vec![&c, &b], vec![&b, &MatExpr::identity(d)]]));
        tests.push(b);
    }
    if let Some(k) = &k {
        obj = obj.sub(k);
        m.psd(MatExpr::from_scalar(k, &ident(d)).sub(&c_sum));
    }
    m.set_objective(obj);
    let sol = m.solve(settings)?;
    require_optimal(&sol)?;
    let tv = t.eval(&sol.y);
    let cert = if tv > 0.0 {
        Certificate::BlockTests(
            tests.iter().map(|b| b.eval_hermitian(&sol.y).scale(1.0 / tv).conjugate_by(&red.basis)).collect(),
        )
    } else {
        Certificate::None
    };
    Ok(SdpValue::from_solution(&sol, cert))
}

/// `exp D_max^{ε,M}(ρ_XE ‖ I_X ⊗ σ_E)` by the blockwise test program, or
/// its minimum over states `σ_E` when `sigma` is `None`.
pub fn solve_cq_dmax_smooth(
    state: &CQState,
    sigma: Option<&HermitianOperator>,
    eps: f64,
    settings: &SdpSettings,
) -> Result<SdpValue> {
    check_eps(eps)?;
    check_reference(state, sigma)?;
    let Some(red) = reduce_cq(state, sigma)? else {
        let s = sigma.expect("reduction only fails with a reference");
        if cq_leak(state, s) >= eps - RANK_CUTOFF {
            return Ok(SdpValue::infinite());
        }
        let rho = crate::states::embed_cq(state).into_op();
        let full_sigma = HermitianOperator::identity(state.x_dim()).kron(s);
        return solve_dmax_smooth(&rho, &full_sigma, eps, Side::Dual, settings);
    };
    let d = red.basis.ncols();
    let mut m = Model::new(Sense::Maximize);
    let t = m.scalar();
    let mut obj = t.scale(-eps);
    let mut w_sum = MatExpr::zeros(d, d);
    let mut tests = Vec::new();
    for blk in &red.blocks {
        let w = m.hermitian(d);
        obj = obj.add(&w.re_inner(blk.matrix()));
        m.psd(w.clone());
        m.psd(MatExpr::from_scalar(&t, &ident(d)).sub(&w));
        w_sum = w_sum.add(&w);
        tests.push(w);
    }
    match &red.sigma {
        Some(s) => m.nonneg(w_sum.re_inner(s.matrix()).scale(-1.0).plus(1.0)),
        None => m.psd(MatExpr::identity(d).sub(&w_sum)),
    }
    m.set_objective(obj);
    let sol = m.solve(settings)?;
    require_optimal(&sol)?;
    let cert = Certificate::BlockTests(
        tests.iter().map(|w| w.eval_hermitian(&sol.y).conjugate_by(&red.basis)).collect(),
    );
    Ok(SdpValue::from_solution(&sol, cert))
}

/// Builds the blockwise program for one of the conditional entropies. The
/// optimal value is `exp(-H)`.
pub fn formulate_conditional_smooth(state: &CQState, which: ConditionalProgram, eps: f64) -> Result<SdpProblem> {
    check_eps(eps)?;
    let rho_e = state.marginal_e();
    let blocks = state.weighted_blocks();
    let d = state.e_dim();
    let mut m = Model::new(Sense::Maximize);
    let t = m.scalar();
    match which {
        ConditionalProgram::H2Up | ConditionalProgram::H2Down => {
            let k = (which == ConditionalProgram::H2Up).then(|| m.scalar());
            let mut obj = t.scale(-2.0 * eps);
            let mut c_sum = MatExpr::zeros(d, d);
            for blk in &blocks {
                let b = m.hermitian(d);
                let c = m.hermitian(d);
                obj = obj.add(&b.re_inner(blk.matrix()).scale(2.0));
                if k.is_none() {
                    obj = obj.sub(&c.re_inner(rho_e.matrix()));
                }
                c_sum = c_sum.add(&c);
                m.psd(b.clone());
                m.psd(c.clone());
                m.psd(MatExpr::from_scalar(&t, &ident(d)).sub(&b));
                m.psd(MatExpr::blocks(&[vec![&c, &b], vec![&b, &MatExpr::identity(d)]]));
            }
            if let Some(k) = k {
                obj = obj.sub(&k);
                m.psd(MatExpr::from_scalar(&k, &ident(d)).sub(&c_sum));
            }
            m.set_objective(obj);
        }
        ConditionalProgram::HminUp | ConditionalProgram::HminDown => {
            let mut obj = t.scale(-eps);
            let mut w_sum = MatExpr::zeros(d, d);
            for blk in &blocks {
                let w = m.hermitian(d);
                obj = obj.add(&w.re_inner(blk.matrix()));
                m.psd(w.clone());
                m.psd(MatExpr::from_scalar(&t, &ident(d)).sub(&w));
                w_sum = w_sum.add(&w);
            }
            if which == ConditionalProgram::HminUp {
                m.psd(MatExpr::identity(d).sub(&w_sum));
            } else {
                m.nonneg(w_sum.re_inner(rho_e.matrix()).scale(-1.0).plus(1.0));
            }
            m.set_objective(obj);
        }
    }
    Ok(m.compile())
}

/// Solves a conditional entropy program; the value is `exp(-H)`.
pub fn solve_conditional(
    state: &CQState,
    which: ConditionalProgram,
    eps: f64,
    settings: &SdpSettings,
) -> Result<SdpValue> {
    let rho_e = state.marginal_e();
    match which {
        ConditionalProgram::H2Up => solve_cq_d2_smooth(state, None, eps, settings),
        ConditionalProgram::H2Down => solve_cq_d2_smooth(state, Some(&rho_e), eps, settings),
        ConditionalProgram::HminUp => solve_cq_dmax_smooth(state, None, eps, settings),
        ConditionalProgram::HminDown => solve_cq_dmax_smooth(state, Some(&rho_e), eps, settings),
    }
}

/// `exp(-H₂^{ε,M,↑})` by the full-size program on `X ⊗ E`, with the
/// reference optimized through `k I_E ⪰ Tr_X C`.
pub fn solve_h2_up_full(state: &CQState, eps: f64, settings: &SdpSettings) -> Result<SdpValue> {
    check_eps(eps)?;
    let rho = crate::states::embed_cq(state).into_op();
    let (nx, d) = (state.x_dim(), state.e_dim());
    let n = nx * d;
    let mut m = Model::new(Sense::Maximize);
    let b = m.hermitian(n);
    let c = m.hermitian(n);
    let t = m.scalar();
    let k = m.scalar();
    m.set_objective(b.re_inner(rho.matrix()).scale(2.0).sub(&t.scale(2.0 * eps)).sub(&k));
    m.psd(b.clone());
    m.psd(c.clone());
    m.psd(MatExpr::from_scalar(&t, &ident(n)).sub(&b));
    m.psd(MatExpr::blocks(&[vec![&c, &b], vec![&b, &MatExpr::identity(n)]]));
    m.psd(MatExpr::from_scalar(&k, &ident(d)).sub(&c.partial_trace(&[nx, d], &[1])?));
    let sol = m.solve(settings)?;
    require_optimal(&sol)?;
    Ok(SdpValue::from_solution(&sol, Certificate::None))
}

/// `sup Σ_x p(x) Tr M_x ρ_{E,x}` over `0 ⪯ M_x ⪯ t I` with `Σ_x M_x ⪯ I`.
pub fn guessing_probability(state: &CQState, t: f64, settings: &SdpSettings) -> Result<SdpValue> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("threshold {t} must be finite and nonnegative")));
    }
    let red = reduce_cq(state, None)?.expect("no reference");
    let d = red.basis.ncols();
    let mut m = Model::new(Sense::Maximize);
    let mut obj = ScalarExpr::constant(0.0);
    let mut sum = MatExpr::zeros(d, d);
    let mut tests = Vec::new();
    for blk in &red.blocks {
        let w = m.hermitian(d);
        obj = obj.add(&w.re_inner(blk.matrix()));
        m.psd(w.clone());
        m.psd(MatExpr::constant(ident(d) * Complex64::new(t, 0.0)).sub(&w));
        sum = sum.add(&w);
        tests.push(w);
    }
    m.psd(MatExpr::identity(d).sub(&sum));
    m.set_objective(obj);
    let sol = m.solve(settings)?;
    require_optimal(&sol)?;
    let cert = Certificate::BlockTests(
        tests.iter().map(|w| w.eval_hermitian(&sol.y).conjugate_by(&red.basis)).collect(),
    );
    Ok(SdpValue::from_solution(&sol, cert))
}

/// `sup_{t ∈ [0,1]} [p′_guess(t) - εt]` and the maximizing `t`.
///
/// The objective is concave in `t`, so the best of `points` grid values is
/// refined by golden-section search on the neighbouring cells.
pub fn smoothed_guessing_sup(state: &CQState, eps: f64, points: usize, settings: &SdpSettings) -> Result<(f64, f64)> {
    check_eps(eps)?;
    if points < 2 {
        return Err(Error::InvalidInput("the t-grid needs at least two points".into()));
    }
    let f = |t: f64| guessing_probability(state, t, settings).map(|v| v.value - eps * t);
    let step = 1.0 / (points - 1) as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..points {
        let t = i as f64 * step;
        let v = f(t)?;
        if v > best.0 {
            best = (v, t);
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best.1 - step).max(0.0), (best.1 + step).min(1.0));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-9 {
        if fc >= fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    for (v, t) in [(fc, c), (fd, d)] {
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// `exp D_max^{ε,P}(ρ_XE ‖ I_X ⊗ σ_E)` with blockwise smoothing, minimized
/// over states `σ_E` when `sigma` is `None`.
pub fn solve_cq_dmax_purified(
    state: &CQState,
    sigma: Option<&HermitianOperator>,
    eps: f64,
    settings: &SdpSettings,
) -> Result<SdpValue> {
    check_eps(eps)?;
    check_reference(state, sigma)?;
    let Some(red) = reduce_cq(state, sigma)? else {
        let s = sigma.expect("reduction only fails with a reference");
        let rho = crate::states::embed_cq(state).into_op();
        let full_sigma = HermitianOperator::identity(state.x_dim()).kron(s);
        return solve_dmax_smooth_purified(&rho, &full_sigma, eps, settings);
    };
    let d = red.basis.ncols();
    let mut m = Model::new(Sense::Minimize);
    let (scaled, objective) = match &red.sigma {
        Some(s) => {
            let lambda = m.scalar();
            (MatExpr::from_scalar(&lambda, s.matrix()), lambda)
        }
        None => {
            let s = m.hermitian(d);
            let tr = s.re_trace();
            (s, tr)
        }
    };
    m.set_objective(objective);
    let mut tr_sum = ScalarExpr::constant(0.0);
    let mut fid_sum = ScalarExpr::constant(0.0);
    let mut smoothed = Vec::new();
    for blk in &red.blocks {
        let rp = m.hermitian(d);
        let z = m.general(d, d, false);
        m.psd(scaled.sub(&rp));
        let zd = z.adjoint();
        m.psd(MatExpr::blocks(&[vec![&e(blk), &z], vec![&zd, &rp]]));
        tr_sum = tr_sum.add(&rp.re_trace());
        fid_sum = fid_sum.add(&z.re_trace());
        smoothed.push(rp);
    }
    m.nonneg(tr_sum.scale(-1.0).plus(1.0));
    m.nonneg(fid_sum.plus(-(1.0 - eps * eps).sqrt()));
    let sol = m.solve(settings)?;
    require_optimal(&sol)?;
    let sigma_opt = if red.sigma.is_none() {
        let s = scaled.eval_hermitian(&sol.y);
        let tr = s.trace();
        (tr > 0.0).then(|| s.scale(1.0 / tr).conjugate_by(&red.basis))
    } else {
        None
    };
    let cert = Certificate::BlockSmoothed(
        smoothed.iter().map(|r| r.eval_hermitian(&sol.y).conjugate_by(&red.basis)).collect(),
        sigma_opt,
    );
    Ok(SdpValue::from_solution(&sol, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::bures_seminorm_sq;

    fn plus() -> HermitianOperator {
        HermitianOperator::from_parts(2, &[0.5, 0.5, 0.5, 0.5], &[0.0; 4]).unwrap()
    }

    #[test]
    fn d2_at_zero_smoothing_is_bures_value() {
        let sigma = HermitianOperator::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]);
        let s = SdpSettings::default();
        for side in [Side::Dual, Side::Primal] {
            let v = solve_d2_smooth(&plus(), &sigma, 0.0, side, &s).unwrap();
            assert!((v.value - 17.0 / 8.0).abs() < 1e-6, "{side:?}: {}", v.value);
        }
    }

    #[test]
    fn d2_certificates_reevaluate() {
        let sigma = HermitianOperator::from_diagonal(&[0.6, 0.4]);
        let eps = 0.2;
        let s = SdpSettings::default();
        let dual = solve_d2_smooth(&plus(), &sigma, eps, Side::Dual, &s).unwrap();
        let primal = solve_d2_smooth(&plus(), &sigma, eps, Side::Primal, &s).unwrap();
        assert!((dual.value - primal.value).abs() < 1e-6);
        let Certificate::Test(w) = &dual.certificate else { panic!("no test") };
        let a = (w.inner(&plus()) - eps).max(0.0);
        let w2 = HermitianOperator::new(w.matrix() * w.matrix()).unwrap();
        assert!((a * a / w2.inner(&sigma) - dual.value).abs() < 1e-6);
        let Certificate::Smoothed(r) = &primal.certificate else { panic!("no smoothed operator") };
        assert!((bures_seminorm_sq(&sigma, r).unwrap() - primal.value).abs() < 1e-6);
    }

    #[test]
    fn kernel_weight_beyond_smoothing_diverges() {
        let rho = HermitianOperator::basis_projector(2, 1);
        let sigma = HermitianOperator::basis_projector(2, 0);
        let s = SdpSettings::default();
        assert_eq!(solve_d2_smooth(&rho, &sigma, 0.1, Side::Dual, &s).unwrap().value, f64::INFINITY);
        assert_eq!(solve_dmax_smooth(&rho, &sigma, 0.1, Side::Primal, &s).unwrap().value, f64::INFINITY);
    }

    #[test]
    fn dmax_sides_agree() {
        let sigma = HermitianOperator::from_diagonal(&[0.7, 0.3]);
        let s = SdpSettings::default();
        let p = solve_dmax_smooth(&plus(), &sigma, 0.1, Side::Primal, &s).unwrap();
        let d = solve_dmax_smooth(&plus(), &sigma, 0.1, Side::Dual, &s).unwrap();
        assert!((p.value - d.value).abs() < 1e-6, "{} {}", p.value, d.value);
    }

    #[test]
    fn uniform_bit_min_entropy() {
        let st = CQState::classical(vec![0.5, 0.5]).unwrap();
        let s = SdpSettings::default();
        let v = solve_conditional(&st, ConditionalProgram::HminUp, 0.0, &s).unwrap();
        assert!((v.value - 0.5).abs() < 1e-7);
        let eps = 0.2;
        let v = solve_conditional(&st, ConditionalProgram::HminUp, eps, &s).unwrap();
        assert!((v.value - (1.0 - eps) / 2.0).abs() < 1e-7);
    }

    #[test]
    fn guessing_at_unit_threshold() {
        let st = CQState::classical(vec![0.2, 0.5, 0.3]).unwrap();
        let v = guessing_probability(&st, 1.0, &SdpSettings::default()).unwrap();
        assert!((v.value - 0.5).abs() < 1e-7);
        let v = guessing_probability(&st, 0.25, &SdpSettings::default()).unwrap();
        // capped at t per outcome and at Σ M_x ≤ 1 overall
        assert!((v.value - (0.2 * 0.25 + 0.5 * 0.25 + 0.3 * 0.25)).abs() < 1e-7);
    }

    #[test]
    fn smoothed_guessing_of_uniform_bit() {
        // p′(t) = t up to t = ½, so the supremum is (1 - ε)/2 at t = ½
        let st = CQState::classical(vec![0.5, 0.5]).unwrap();
        let s = SdpSettings::default();
        let v = guessing_probability(&st, 0.3, &s).unwrap();
        assert!((v.value - 0.3).abs() < 1e-7);
        let (sup, t) = smoothed_guessing_sup(&st, 0.2, 11, &s).unwrap();
        assert!((sup - 0.4).abs() < 1e-7 && (t - 0.5).abs() < 1e-6);
    }

    mod properties {
        use super::*;
        use crate::sdp::solve;
        use crate::states::{random_density, seeded_rng};
        use proptest::prelude::*;

        fn pair(seed: u64, d: usize) -> (HermitianOperator, HermitianOperator) {
            let mut rng = seeded_rng(seed);
            (random_density(d, d, &mut rng), random_density(d, d, &mut rng))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn optimal_status_meets_tolerance(seed in 0u64..1000, d in 2usize..4, eps in 0.0f64..0.6, dual in any::<bool>()) {
                let (rho, sigma) = pair(seed, d);
                let side = if dual { Side::Dual } else { Side::Primal };
                let s = SdpSettings::default();
                let sol = solve(&formulate_d2_smooth(&rho, &sigma, eps, side).unwrap(), &s).unwrap();
                if sol.status == SdpStatus::Optimal {
                    prop_assert!(sol.relative_gap <= s.tol);
                    prop_assert!(sol.primal_infeasibility <= s.tol);
                }
            }

            #[test]
            fn smoothing_never_increases_the_value(seed in 0u64..1000, d in 2usize..4, e1 in 0.0f64..0.5, de in 0.0f64..0.4) {
                let (rho, sigma) = pair(seed, d);
                let s = SdpSettings::default();
                let a = solve_d2_smooth(&rho, &sigma, e1, Side::Dual, &s).unwrap().value;
                let b = solve_d2_smooth(&rho, &sigma, e1 + de, Side::Dual, &s).unwrap().value;
                prop_assert!(b.ln() <= a.ln() + 1e-6);
            }

            #[test]
            fn test_certificate_reevaluates(seed in 0u64..1000, d in 2usize..4, eps in 0.0f64..0.6) {
                let (rho, sigma) = pair(seed, d);
                let v = solve_d2_smooth(&rho, &sigma, eps, Side::Dual, &SdpSettings::default()).unwrap();
                let Certificate::Test(w) = &v.certificate else { panic!("no test") };
                let a = (w.inner(&rho) - eps).max(0.0);
                let w2 = HermitianOperator::new(w.matrix() * w.matrix()).unwrap();
                prop_assert!(((a * a / w2.inner(&sigma)).ln() - v.value.ln()).abs() <= 1e-7);
            }

            #[test]
            fn blockwise_matches_full_size(seed in 0u64..1000, x in 2usize..4, e in 2usize..3, eps in 0.0f64..0.5) {
                let mut rng = seeded_rng(seed);
                let state = crate::states::random_cq(x, e, &mut rng);
                let sigma = random_density(e, e, &mut rng);
                let s = SdpSettings::default();
                let full_rho = crate::states::embed_cq(&state).into_op();
                let full_sigma = HermitianOperator::identity(x).kron(&sigma);
                let full = solve_d2_smooth(&full_rho, &full_sigma, eps, Side::Dual, &s).unwrap().value;
                let blocks = solve_cq_d2_smooth(&state, Some(&sigma), eps, &s).unwrap().value;
                prop_assert!((full.ln() - blocks.ln()).abs() <= 1e-6);
                let up_full = solve_h2_up_full(&state, eps, &s).unwrap().value;
                let up_blocks = solve_conditional(&state, ConditionalProgram::H2Up, eps, &s).unwrap().value;
                prop_assert!((up_full.ln() - up_blocks.ln()).abs() <= 1e-6);
            }

            #[test]
            fn smoothed_max_sides_agree(seed in 0u64..1000, d in 2usize..4, eps in 0.01f64..0.6) {
                let (rho, sigma) = pair(seed, d);
                let s = SdpSettings::default();
                let p = solve_dmax_smooth(&rho, &sigma, eps, Side::Primal, &s).unwrap().value;
                let q = solve_dmax_smooth(&rho, &sigma, eps, Side::Dual, &s).unwrap().value;
                prop_assert!((p.ln() - q.ln()).abs() <= 1e-6);
            }
        }
    }
}
