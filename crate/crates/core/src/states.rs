//! States, classical-quantum states, channels and seeded sampling.
//!
//! Random objects are drawn from a ChaCha20 stream seeded with an explicit
//! 64-bit seed, so every sample is reproducible across platforms.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{CMat, HermitianOperator, C0, C1, INPUT_TOL};

/// Deterministic generator for a given seed.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A positive operator with trace one (or at most one when subnormalized).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOperator", into = "HermitianOperator")]
pub struct DensityMatrix {
    op: HermitianOperator,
    normalized: bool,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        op.check_psd()?;
        let tr = op.trace();
        if (tr - 1.0).abs() > INPUT_TOL {
            return Err(Error::NotNormalized(tr));
        }
        Ok(Self { op, normalized: true })
    }

    pub fn subnormalized(op: HermitianOperator) -> Result<Self> {
        op.check_psd()?;
        let tr = op.trace();
        if tr > 1.0 + INPUT_TOL {
            return Err(Error::NotNormalized(tr));
        }
        let normalized = (tr - 1.0).abs() <= INPUT_TOL;
        Ok(Self { op, normalized })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim).scale(1.0 / dim as f64), normalized: true }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector `ψ`.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidInput("state vector must be nonzero".into()));
        }
        Self::new(HermitianOperator::outer(&(psi / Complex64::new(n, 0.0))))
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

impl TryFrom<HermitianOperator> for DensityMatrix {
    type Error = Error;
    fn try_from(op: HermitianOperator) -> Result<Self> {
        Self::subnormalized(op)
    }
}

impl From<DensityMatrix> for HermitianOperator {
    fn from(d: DensityMatrix) -> Self {
        d.op
    }
}

impl AsRef<HermitianOperator> for DensityMatrix {
    fn as_ref(&self) -> &HermitianOperator {
        &self.op
    }
}

/// `Σ_x p(x) |x⟩⟨x| ⊗ ρ_{E,x}`, stored as the distribution and the
/// normalized conditional states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CqJson", into = "CqJson")]
pub struct CQState {
    p: Vec<f64>,
    blocks: Vec<HermitianOperator>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CqJson {
    p: Vec<f64>,
    blocks: Vec<HermitianOperator>,
}

impl TryFrom<CqJson> for CQState {
    type Error = Error;
    fn try_from(j: CqJson) -> Result<Self> {
        CQState::new(j.p, j.blocks)
    }
}

impl From<CQState> for CqJson {
    fn from(s: CQState) -> Self {
        CqJson { p: s.p, blocks: s.blocks }
    }
}

impl CQState {
    pub fn new(p: Vec<f64>, blocks: Vec<HermitianOperator>) -> Result<Self> {
        check_dim(p.len(), blocks.len())?;
        if p.is_empty() {
            return Err(Error::InvalidInput("empty classical alphabet".into()));
        }
        if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidInput("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > INPUT_TOL {
            return Err(Error::NotNormalized(total));
        }
        let d = blocks[0].dim();
        for b in &blocks {
            check_dim(d, b.dim())?;
            b.check_psd()?;
            if (b.trace() - 1.0).abs() > INPUT_TOL {
                return Err(Error::NotNormalized(b.trace()));
            }
        }
        Ok(Self { p, blocks })
    }

    /// Classical source with trivial side information.
    pub fn classical(p: Vec<f64>) -> Result<Self> {
        let blocks = vec![HermitianOperator::identity(1); p.len()];
        Self::new(p, blocks)
    }

    /// Builds the state from unnormalized blocks `R_x = p(x) ρ_{E,x}`.
    pub fn from_weighted_blocks(blocks: &[HermitianOperator]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("empty classical alphabet".into()));
        }
        let d = blocks[0].dim();
        let mut p = Vec::with_capacity(blocks.len());
        let mut normed = Vec::with_capacity(blocks.len());
        for b in blocks {
            check_dim(d, b.dim())?;
            let t = b.trace();
            if t > INPUT_TOL {
                p.push(t);
                normed.push(b.scale(1.0 / t));
            } else {
                p.push(0.0);
                normed.push(HermitianOperator::identity(d).scale(1.0 / d as f64));
            }
        }
        Self::new(p, normed)
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn blocks(&self) -> &[HermitianOperator] {
        &self.blocks
    }

    pub fn x_dim(&self) -> usize {
        self.p.len()
    }

    pub fn e_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    /// Unnormalized blocks `p(x) ρ_{E,x}`.
    pub fn weighted_blocks(&self) -> Vec<HermitianOperator> {
        self.p.iter().zip(&self.blocks).map(|(&p, b)| b.scale(p)).collect()
    }

    /// The marginal `ρ_E`.
    pub fn marginal_e(&self) -> HermitianOperator {
        let mut acc = HermitianOperator::zeros(self.e_dim());
        for (p, b) in self.p.iter().zip(&self.blocks) {
            acc = &acc + &b.scale(*p);
        }
        acc
    }

    /// `n` independent copies, with `x` indices in lexicographic order.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        let size = (self.x_dim() as f64).powi(n as i32) * (self.e_dim() as f64).powi(2 * n as i32);
        if size > 1e8 {
            return Err(Error::TooLarge(format!("{n} copies")));
        }
        let mut p = vec![1.0];
        let mut blocks = vec![HermitianOperator::identity(1)];
        for _ in 0..n {
            let mut np = Vec::with_capacity(p.len() * self.x_dim());
            let mut nb = Vec::with_capacity(p.len() * self.x_dim());
            for (q, b) in p.iter().zip(&blocks) {
                for (r, c) in self.p.iter().zip(&self.blocks) {
                    np.push(q * r);
                    nb.push(b.kron(c));
                }
            }
            p = np;
            blocks = nb;
        }
        Ok(Self { p, blocks })
    }
}

/// The block-diagonal operator on `X ⊗ E`, with basis index `x * d_E + e`.
pub fn embed_cq(state: &CQState) -> DensityMatrix {
    let op = embed_blocks(&state.weighted_blocks());
    DensityMatrix { op, normalized: true }
}

/// Direct sum of equally sized Hermitian blocks.
pub fn embed_blocks(blocks: &[HermitianOperator]) -> HermitianOperator {
    let d = blocks.first().map_or(0, HermitianOperator::dim);
    let n = blocks.len() * d;
    let mut m = CMat::zeros(n, n);
    for (x, b) in blocks.iter().enumerate() {
        m.view_mut((x * d, x * d), (d, d)).copy_from(b.matrix());
    }
    HermitianOperator::hermitian_part(&m)
}

/// Largest entry of `rho` outside the diagonal `d_E × d_E` blocks.
pub fn off_block_magnitude(rho: &HermitianOperator, x_dim: usize, e_dim: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..x_dim * e_dim {
        for j in 0..x_dim * e_dim {
            if i / e_dim != j / e_dim {
                worst = worst.max(rho.matrix()[(i, j)].norm());
            }
        }
    }
    worst
}

/// Inverse of [`embed_cq`]; rejects operators with off-block entries above `1e-10`.
pub fn extract_cq(rho: &HermitianOperator, x_dim: usize, e_dim: usize) -> Result<CQState> {
    check_dim(x_dim * e_dim, rho.dim())?;
    let off = off_block_magnitude(rho, x_dim, e_dim);
    if off > 1e-10 {
        return Err(Error::NotBlockDiagonal(off));
    }
    let blocks: Vec<HermitianOperator> = (0..x_dim)
        .map(|x| {
            let b = rho.matrix().view((x * e_dim, x * e_dim), (e_dim, e_dim)).into_owned();
            HermitianOperator::hermitian_part(&b)
        })
        .collect();
    CQState::from_weighted_blocks(&blocks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Keep {
    A,
    B,
}

/// Partial trace on `A ⊗ B`.
pub fn partial_trace(rho: &HermitianOperator, dims: (usize, usize), keep: Keep) -> Result<HermitianOperator> {
    let k = match keep {
        Keep::A => 0,
        Keep::B => 1,
    };
    rho.partial_trace(&[dims.0, dims.1], &[k])
}

/// A completely positive, trace non-increasing map in Kraus form.
#[derive(Clone, Debug)]
pub struct Channel {
    kraus: Vec<CMat>,
    trace_preserving: bool,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidInput("no Kraus operators".into()))?;
        let (out_dim, in_dim) = first.shape();
        let mut sum = CMat::zeros(in_dim, in_dim);
        for k in &kraus {
            if k.shape() != (out_dim, in_dim) {
                return Err(Error::InvalidInput("Kraus operators differ in shape".into()));
            }
            sum += k.adjoint() * k;
        }
        let gap = HermitianOperator::hermitian_part(&(CMat::identity(in_dim, in_dim) - &sum));
        let min = gap.min_eigenvalue();
        if min < -1e-9 {
            return Err(Error::InvalidInput(format!("Kraus sum exceeds identity by {}", -min)));
        }
        let trace_preserving = gap.frobenius_norm() <= 1e-9;
        Ok(Self { kraus, trace_preserving })
    }

    pub fn identity(dim: usize) -> Self {
        Self { kraus: vec![CMat::identity(dim, dim)], trace_preserving: true }
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Pinching `Σ_x (|x⟩⟨x| ⊗ I) · (|x⟩⟨x| ⊗ I)` on `X ⊗ E`.
    pub fn dephasing(x_dim: usize, e_dim: usize) -> Self {
        let n = x_dim * e_dim;
        let kraus = (0..x_dim)
            .map(|x| {
                let mut k = CMat::zeros(n, n);
                for e in 0..e_dim {
                    k[(x * e_dim + e, x * e_dim + e)] = C1;
                }
                k
            })
            .collect();
        Self { kraus, trace_preserving: true }
    }

    /// Measurement in the orthonormal basis given by the columns of `u`,
    /// with the outcome recorded in a classical register.
    pub fn measure(u: &CMat) -> Self {
        let d = u.nrows();
        let kraus = (0..u.ncols())
            .map(|i| {
                let mut k = CMat::zeros(u.ncols(), d);
                for j in 0..d {
                    k[(i, j)] = u[(j, i)].conj();
                }
                k
            })
            .collect();
        Self { kraus, trace_preserving: u.ncols() == d }
    }

    /// Stinespring dilation by a Haar-random isometry into `dim · env`,
    /// followed by tracing out the environment.
    pub fn random(dim: usize, env: usize, rng: &mut impl Rng) -> Self {
        let v = random_isometry(dim * env, dim, rng);
        let kraus = (0..env)
            .map(|j| CMat::from_fn(dim, dim, |a, b| v[(a * env + j, b)]))
            .collect();
        Self { kraus, trace_preserving: true }
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn apply(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        check_dim(self.in_dim(), rho.dim())?;
        let mut out = CMat::zeros(self.out_dim(), self.out_dim());
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(HermitianOperator::hermitian_part(&out))
    }
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Complex Ginibre matrix with standard normal entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random isometry `C^cols → C^rows` (QR of a Ginibre matrix with
/// the phases of `R`'s diagonal removed).
pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C1 };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMat {
    random_isometry(dim, dim, rng)
}

/// `G G† / Tr(G G†)` for a `dim × rank` Ginibre matrix.
pub fn random_density(dim: usize, rank: usize, rng: &mut impl Rng) -> HermitianOperator {
    let g = ginibre(dim, rank.max(1), rng);
    let h = HermitianOperator::hermitian_part(&(&g * g.adjoint()));
    let t = h.trace();
    h.scale(1.0 / t)
}

pub fn random_pure(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    random_density(dim, 1, rng)
}

/// `(G + G†)/2` for a Ginibre `G`.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    HermitianOperator::hermitian_part(&ginibre(dim, dim, rng))
}

/// Flat Dirichlet weights.
pub fn random_distribution(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_cq(x_dim: usize, e_dim: usize, rng: &mut impl Rng) -> CQState {
    let p = random_distribution(x_dim, rng);
    let blocks = (0..x_dim).map(|_| random_density(e_dim, e_dim, rng)).collect();
    CQState { p, blocks }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    DensityGinibre,
    Cq,
    Pure,
    Hermitian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampledState {
    Operator(HermitianOperator),
    Cq(CQState),
}

/// Samples a state of the given kind. `dims` is `[d]`, or `[|X|, d_E]` for
/// classical-quantum states.
pub fn sample_state(kind: StateKind, dims: &[usize], seed: u64) -> Result<SampledState> {
    let mut rng = seeded_rng(seed);
    let need = if kind == StateKind::Cq { 2 } else { 1 };
    check_dim(need, dims.len())?;
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidInput("dimensions must be positive".into()));
    }
    Ok(match kind {
        StateKind::DensityGinibre => SampledState::Operator(random_density(dims[0], dims[0], &mut rng)),
        StateKind::Pure => SampledState::Operator(random_pure(dims[0], &mut rng)),
        StateKind::Hermitian => SampledState::Operator(random_hermitian(dims[0], &mut rng)),
        StateKind::Cq => SampledState::Cq(random_cq(dims[0], dims[1], &mut rng)),
    })
}

/// `|0⟩⟨0| ⊗ ...` style computational basis vector.
pub fn basis_vector(dim: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(dim, C0);
    v[i] = C1;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn embed_extract_round_trip() {
        let mut rng = seeded_rng(3);
        let s = random_cq(3, 2, &mut rng);
        let full = embed_cq(&s);
        assert_eq!(full.dim(), 6);
        assert!((full.op().trace() - 1.0).abs() < 1e-12);
        let back = extract_cq(full.op(), 3, 2).unwrap();
        for (a, b) in back.blocks().iter().zip(s.blocks()) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
        for (a, b) in back.p().iter().zip(s.p()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn extract_rejects_coherence() {
        let mut m = CMat::identity(4, 4).scale(0.25);
        m[(0, 2)] = Complex64::new(0.1, 0.0);
        m[(2, 0)] = Complex64::new(0.1, 0.0);
        let h = HermitianOperator::new(m).unwrap();
        assert!(matches!(extract_cq(&h, 2, 2), Err(Error::NotBlockDiagonal(_))));
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let mut v = DVector::from_element(4, C0);
        v[0] = C1;
        v[3] = C1;
        let bell = DensityMatrix::pure(&v).unwrap();
        for keep in [Keep::A, Keep::B] {
            let r = partial_trace(bell.op(), (2, 2), keep).unwrap();
            assert!(r.max_abs_diff(&HermitianOperator::identity(2).scale(0.5)) < 1e-15);
        }
    }

    #[test]
    fn dephasing_keeps_cq_states() {
        let mut rng = seeded_rng(5);
        let s = embed_cq(&random_cq(2, 3, &mut rng));
        let out = Channel::dephasing(2, 3).apply(s.op()).unwrap();
        assert!(out.max_abs_diff(s.op()) < 1e-15);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_state(StateKind::Cq, &[2, 2], 11).unwrap();
        let b = sample_state(StateKind::Cq, &[2, 2], 11).unwrap();
        assert_eq!(a, b);
        assert!(sample_state(StateKind::Pure, &[2, 2], 1).is_err());
    }

    #[test]
    fn cq_json_round_trip() {
        let s = random_cq(2, 2, &mut seeded_rng(9));
        let text = serde_json::to_string(&s).unwrap();
        let back: CQState = serde_json::from_str(&text).unwrap();
        assert_eq!(back.p(), s.p());
    }

    #[test]
    fn tensor_power_matches_kron() {
        let s = CQState::classical(vec![0.25, 0.75]).unwrap();
        let t = s.tensor_power(2).unwrap();
        assert_eq!(t.p(), &[0.0625, 0.1875, 0.1875, 0.5625]);
    }

    proptest! {
        #[test]
        fn random_channels_are_trace_preserving(seed in 0u64..1000, dim in 1usize..5, env in 1usize..3) {
            let mut rng = seeded_rng(seed);
            let ch = Channel::random(dim, env, &mut rng);
            prop_assert!(Channel::new(ch.kraus().to_vec()).unwrap().is_trace_preserving());
            let rho = random_density(dim, dim, &mut rng);
            let out = ch.apply(&rho).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-12);
            prop_assert!(out.min_eigenvalue() > -1e-12);
        }

        #[test]
        fn sampled_states_are_valid(seed in 0u64..1000, dim in 1usize..6) {
            let rho = random_density(dim, dim, &mut seeded_rng(seed));
            prop_assert!(DensityMatrix::new(rho).is_ok());
            let u = random_unitary(dim, &mut seeded_rng(seed));
            prop_assert!((u.adjoint() * &u - CMat::identity(dim, dim)).norm() < 1e-12);
        }
    }
}
