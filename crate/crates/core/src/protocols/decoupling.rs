//! Unitary 2-designs, the twirl identity, and the decoupling bench.

use std::collections::{HashSet, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::report::{BoundReport, Parameters, ANALYTIC_TOL, SDP_TOL};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{bures_seminorm_sq, partial_trace, swap_operator, CMat, HermitianOperator, C0, C1};
use crate::sdp::{solve_d2_smooth, SdpSettings, Side};
use crate::states::{random_unitary, seeded_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Clifford1qExact,
    Clifford2qExact,
    HaarSample,
}

/// A finite, uniformly weighted list of unitaries on `A`.
#[derive(Clone, Debug)]
pub struct UnitaryEnsemble {
    kind: EnsembleKind,
    dim: usize,
    members: Vec<CMat>,
    seed: Option<u64>,
}

fn hadamard() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[h, h, h, -h].map(|x| Complex64::new(x, 0.0)))
}

fn phase_gate() -> CMat {
    CMat::from_row_slice(2, 2, &[C1, C0, C0, Complex64::i()])
}

fn cnot() -> CMat {
    let mut m = CMat::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, c)] = C1;
    }
    m
}

/// Rounded entries after removing the phase of the first nonzero entry.
fn phase_key(u: &CMat) -> (CMat, Vec<(i64, i64)>) {
    let pivot = *u.iter().find(|z| z.norm() > 1e-6).expect("unitary has a nonzero entry");
    let fixed = u / (pivot / pivot.norm());
    let key = fixed.iter().map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)).collect();
    (fixed, key)
}

/// The group generated by `gens`, modulo global phase.
fn closure(gens: &[CMat]) -> Vec<CMat> {
    let d = gens[0].nrows();
    let (id, key) = phase_key(&CMat::identity(d, d));
    let mut seen = HashSet::from([key]);
    let mut queue = VecDeque::from([id.clone()]);
    let mut out = vec![id];
    while let Some(u) = queue.pop_front() {
        for g in gens {
            let (v, key) = phase_key(&(g * &u));
            if seen.insert(key) {
                out.push(v.clone());
                queue.push_back(v);
            }
        }
    }
    out
}

impl UnitaryEnsemble {
    /// The 24 single-qubit Cliffords modulo phase.
    pub fn clifford_1q() -> Self {
        let members = closure(&[hadamard(), phase_gate()]);
        Self { kind: EnsembleKind::Clifford1qExact, dim: 2, members, seed: None }
    }

    /// The 11520 two-qubit Cliffords modulo phase.
    pub fn clifford_2q() -> Self {
        let id = CMat::identity(2, 2);
        let gens = [
            hadamard().kronecker(&id),
            id.kronecker(&hadamard()),
            phase_gate().kronecker(&id),
            id.kronecker(&phase_gate()),
            cnot(),
        ];
        Self { kind: EnsembleKind::Clifford2qExact, dim: 4, members: closure(&gens), seed: None }
    }

    /// `samples` Haar-random unitaries.
    pub fn haar(dim: usize, samples: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let members = (0..samples).map(|_| random_unitary(dim, &mut rng)).collect();
        Self { kind: EnsembleKind::HaarSample, dim, members, seed: Some(seed) }
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[CMat] {
        &self.members
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Exact ensembles average without sampling error.
    pub fn is_exact(&self) -> bool {
        self.kind != EnsembleKind::HaarSample
    }
}

/// Mean and standard error of the mean; the error is zero for exact ensembles.
fn mean_and_error(values: &[f64], exact: bool) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if exact || values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug)]
pub struct Twirl {
    /// `E_U (U†)^{⊗2} K U^{⊗2}` over the ensemble.
    pub average: HermitianOperator,
    pub alpha: HermitianOperator,
    pub beta: HermitianOperator,
    /// `I_{AA'} ⊗ α + F_{AA'} ⊗ β`.
    pub analytic: HermitianOperator,
    /// Entrywise standard error of `average`; zero for exact ensembles.
    pub standard_error: DMatrix<f64>,
}

/// Twirls `K` on `A ⊗ A' ⊗ E ⊗ E'` (in that order) over the ensemble and
/// evaluates the closed form of the Haar twirl.
pub fn twirl_average(k: &HermitianOperator, e_dim: usize, ens: &UnitaryEnsemble) -> Result<Twirl> {
    let da = ens.dim();
    if da < 2 {
        return Err(Error::InvalidInput("twirling needs |A| ≥ 2".into()));
    }
    let n = da * da * e_dim * e_dim;
    check_dim(n, k.dim())?;
    let id_e = CMat::identity(e_dim * e_dim, e_dim * e_dim);
    let mut sum = CMat::zeros(n, n);
    let mut sq_re = DMatrix::<f64>::zeros(n, n);
    let mut sq_im = DMatrix::<f64>::zeros(n, n);
    for u in ens.members() {
        let w = u.kronecker(u).kronecker(&id_e);
        let t = w.adjoint() * k.matrix() * &w;
        if !ens.is_exact() {
            sq_re += t.map(|z| z.re * z.re);
            sq_im += t.map(|z| z.im * z.im);
        }
        sum += t;
    }
    let m = ens.members().len() as f64;
    let average = HermitianOperator::hermitian_part(&(sum / Complex64::new(m, 0.0)));
    let standard_error = if ens.is_exact() {
        DMatrix::zeros(n, n)
    } else {
        DMatrix::from_fn(n, n, |i, j| {
            let z = average.matrix()[(i, j)];
            let var = (sq_re[(i, j)] / m - z.re * z.re) + (sq_im[(i, j)] / m - z.im * z.im);
            (var.max(0.0) * m / (m - 1.0) / m).sqrt()
        })
    };
    let dims = [da, da, e_dim, e_dim];
    let f = swap_operator(da).kronecker(&id_e);
    let tr_k = partial_trace(k.matrix(), &dims, &[2, 3])?;
    let tr_fk = partial_trace(&(&f * k.matrix()), &dims, &[2, 3])?;
    let a = da as f64;
    let c = |x: f64| Complex64::new(x, 0.0);
    let alpha = HermitianOperator::hermitian_part(&((&tr_k - &tr_fk * c(1.0 / a)) * c(1.0 / (a * a - 1.0))));
    let beta = HermitianOperator::hermitian_part(&((&tr_fk * c(a) - &tr_k) * c(1.0 / (a * (a * a - 1.0)))));
    let id_aa = CMat::identity(da * da, da * da);
    let analytic = HermitianOperator::hermitian_part(
        &(id_aa.kronecker(alpha.matrix()) + swap_operator(da).kronecker(beta.matrix())),
    );
    Ok(Twirl { average, alpha, beta, analytic, standard_error })
}

/// Hermitian basis of operators on a space of dimension `d`.
pub fn hermitian_basis(d: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in i..d {
            let mut m = CMat::zeros(d, d);
            if i == j {
                m[(i, i)] = C1;
                out.push(HermitianOperator::hermitian_part(&m));
            } else {
                m[(i, j)] = C1;
                m[(j, i)] = C1;
                out.push(HermitianOperator::hermitian_part(&m));
                let mut m = CMat::zeros(d, d);
                m[(i, j)] = -Complex64::i();
                m[(j, i)] = Complex64::i();
                out.push(HermitianOperator::hermitian_part(&m));
            }
        }
    }
    out
}

/// Largest entrywise gap between the ensemble twirl and the Haar twirl over
/// a Hermitian basis of operators on `A ⊗ A'`.
pub fn design_deviation(ens: &UnitaryEnsemble) -> Result<f64> {
    let d = ens.dim();
    let mut worst: f64 = 0.0;
    for m in hermitian_basis(d * d) {
        let t = twirl_average(&m, 1, ens)?;
        worst = worst.max(t.average.max_abs_diff(&t.analytic));
    }
    Ok(worst)
}

/// `|A₂|(|A₁|² - 1)/(|A|² - 1)`, the factor relating the expected Bures
/// norm after decoupling to the Bures norm before.
pub fn decoupling_coefficient(a1: usize, a2: usize) -> f64 {
    let (a1, a2) = (a1 as f64, a2 as f64);
    let a = a1 * a2;
    a2 * (a1 * a1 - 1.0) / (a * a - 1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecouplingReport {
    /// Against `ε + ½√((|A₁|/|A₂|) Q₂^{ε,M}(ρ_AE ‖ I_A ⊗ σ_E))`; the left side
    /// includes three standard errors for sampled ensembles.
    pub smoothed: BoundReport,
    /// Against `½ √(|A|(|A₁|² - 1)/(|A|² - 1)) ‖Z_AE‖_{B, I_A ⊗ σ_E}`.
    pub bures: BoundReport,
    /// Expected Bures norm after decoupling against the coefficient times
    /// the norm before.
    pub coefficient: BoundReport,
    pub mean_distance: f64,
    pub standard_error: f64,
    pub samples: usize,
}

/// Decoupling of `A₁` from `E` after a random unitary on `A = A₁A₂` and
/// discarding `A₂`, with `ρ_AE` ordered as `A₁ ⊗ A₂ ⊗ E`.
pub fn decoupling_bench(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    split: (usize, usize),
    eps: f64,
    ens: &UnitaryEnsemble,
    settings: &SdpSettings,
) -> Result<DecouplingReport> {
    let (a1, a2) = split;
    let da = a1 * a2;
    let de = sigma.dim();
    check_dim(ens.dim(), da)?;
    check_dim(da * de, rho.dim())?;
    let rho_e = rho.partial_trace(&[da, de], &[1])?;
    let pi_a = HermitianOperator::identity(da).scale(1.0 / da as f64);
    let pi_a1 = HermitianOperator::identity(a1).scale(1.0 / a1 as f64);
    let z = rho - &pi_a.kron(&rho_e);
    let target = pi_a1.kron(&rho_e);
    let sigma_a1 = HermitianOperator::identity(a1).kron(sigma);
    let id_e = CMat::identity(de, de);
    let mut dist = Vec::with_capacity(ens.members().len());
    let mut norms = Vec::with_capacity(ens.members().len());
    for u in ens.members() {
        let v = u.kronecker(&id_e);
        let rotated = rho.conjugate_by(&v);
        let reduced = rotated.partial_trace(&[a1, a2, de], &[0, 2])?;
        let x = &reduced - &target;
        dist.push(0.5 * x.trace_norm());
        norms.push(bures_seminorm_sq(&sigma_a1, &x)?);
    }
    let exact = ens.is_exact();
    let (mean, se) = mean_and_error(&dist, exact);
    let (norm_mean, norm_se) = mean_and_error(&norms, exact);
    let sigma_a = HermitianOperator::identity(da).kron(sigma);
    let z_norm = bures_seminorm_sq(&sigma_a, &z)?;
    let q = solve_d2_smooth(rho, &sigma_a, eps, Side::Dual, settings)?.value;
    let params = Parameters {
        eps: Some(eps),
        dims: vec![a1, a2, de],
        seed: ens.seed(),
        ..Default::default()
    };
    let lhs = mean + 3.0 * se;
    let note = if exact { "exact ensemble average" } else { "sampled ensemble; left side includes 3 standard errors" };
    let smoothed = BoundReport::new(
        "decoupling_smoothed",
        lhs,
        eps + 0.5 * (a1 as f64 / a2 as f64 * q).sqrt(),
        SDP_TOL,
        "smoothed one-shot decoupling",
    )
    .with_parameters(params.clone())
    .with_note(note);
    let a = da as f64;
    let bures = BoundReport::new(
        "decoupling_bures",
        lhs,
        0.5 * (a * ((a1 * a1) as f64 - 1.0) / (a * a - 1.0) * z_norm).sqrt(),
        ANALYTIC_TOL,
        "one-shot decoupling in Bures norm",
    )
    .with_parameters(params.clone())
    .with_note(note);
    let predicted = decoupling_coefficient(a1, a2) * z_norm;
    let tolerance = if exact { 1e-9 * predicted.max(1.0) } else { 3.0 * norm_se };
    let coefficient =
        BoundReport::equality("decoupling_coefficient", norm_mean, predicted, tolerance, "expected Bures norm after twirling")
            .with_parameters(params)
            .with_note(note);
    Ok(DecouplingReport { smoothed, bures, coefficient, mean_distance: mean, standard_error: se, samples: dist.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_density, random_hermitian, random_pure};
    use approx::assert_abs_diff_eq;

    #[test]
    fn clifford_group_orders() {
        let c1 = UnitaryEnsemble::clifford_1q();
        assert_eq!(c1.members().len(), 24);
        for u in c1.members() {
            assert!((u.adjoint() * u - CMat::identity(2, 2)).norm() < 1e-12);
        }
        assert_eq!(UnitaryEnsemble::clifford_2q().members().len(), 11520);
    }

    #[test]
    fn twirl_of_identity_and_swap() {
        let ens = UnitaryEnsemble::clifford_1q();
        let t = twirl_average(&HermitianOperator::identity(4), 1, &ens).unwrap();
        assert_abs_diff_eq!(t.alpha.matrix()[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.beta.matrix()[(0, 0)].re, 0.0, epsilon = 1e-14);
        assert!(t.average.max_abs_diff(&HermitianOperator::identity(4)) < 1e-12);
        let f = HermitianOperator::new(swap_operator(2)).unwrap();
        let t = twirl_average(&f, 1, &ens).unwrap();
        assert_abs_diff_eq!(t.alpha.matrix()[(0, 0)].re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.beta.matrix()[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert!(t.average.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn cliffords_form_a_two_design() {
        assert!(design_deviation(&UnitaryEnsemble::clifford_1q()).unwrap() < 1e-12);
        // the Paulis alone are only a 1-design
        let mut paulis = UnitaryEnsemble::clifford_1q();
        paulis.members.retain(|u| {
            let d = (u.adjoint() * CMat::from_diagonal_element(2, 2, C1) * u).iter().map(|z| z.norm()).sum::<f64>();
            d > 0.0 && u.iter().filter(|z| z.norm() > 1e-9).count() == 2 && (u[(0, 0)].norm() > 0.9 || u[(0, 1)].norm() > 0.9)
        });
        assert_eq!(paulis.members.len(), 8);
        assert!(design_deviation(&paulis).unwrap() > 1e-3);
    }

    #[test]
    fn random_twirl_with_side_system() {
        let mut rng = seeded_rng(2);
        let k = random_hermitian(16, &mut rng);
        let t = twirl_average(&k, 2, &UnitaryEnsemble::clifford_1q()).unwrap();
        assert!(t.average.max_abs_diff(&t.analytic) < 1e-12);
    }

    #[test]
    fn decoupled_input_gives_zero() {
        let mut rng = seeded_rng(4);
        let rho_e = random_density(2, 2, &mut rng);
        let rho = HermitianOperator::identity(2).scale(0.5).kron(&rho_e);
        let r = decoupling_bench(&rho, &rho_e, (2, 1), 0.0, &UnitaryEnsemble::clifford_1q(), &SdpSettings::default())
            .unwrap();
        assert_abs_diff_eq!(r.mean_distance, 0.0, epsilon = 1e-12);
        assert!(r.smoothed.passed() && r.bures.passed() && r.coefficient.passed());
    }

    #[test]
    fn pure_qubit_exact_bench() {
        let mut rng = seeded_rng(6);
        let rho = random_pure(2, &mut rng);
        let one = HermitianOperator::identity(1);
        let r = decoupling_bench(&rho, &one, (2, 1), 0.0, &UnitaryEnsemble::clifford_1q(), &SdpSettings::default())
            .unwrap();
        // ‖ρ - π‖_B² with σ = I is Tr(ρ - π)² = ½, and the coefficient is 1
        let z_norm: f64 = 0.5;
        assert_abs_diff_eq!(r.bures.rhs, 0.5 * (2.0 * z_norm).sqrt(), epsilon = 1e-12);
        // every Clifford keeps a pure state pure: ½‖ψ - π‖₁ = ½
        assert_abs_diff_eq!(r.mean_distance, 0.5, epsilon = 1e-12);
        assert!(r.bures.passed() && r.smoothed.passed() && r.coefficient.passed(), "{r:?}");
    }
}
