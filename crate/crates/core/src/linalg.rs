//! Dense Hermitian linear algebra.
//!
//! Everything here works on small dense complex matrices. Eigenvalues are
//! sorted in descending order and an eigenvalue counts as zero when it is at
//! most [`RANK_CUTOFF`]` * max(1, λ_max)`. Matrix functions of positive
//! operators (powers, logarithms) act on the support only.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Relative threshold below which an eigenvalue is treated as zero.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Tolerance used when checking unit trace and positivity of inputs.
pub const INPUT_TOL: f64 = 1e-9;

pub(crate) const C0: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Zero threshold for a spectrum with largest eigenvalue `lambda_max`.
pub fn zero_threshold(lambda_max: f64) -> f64 {
    RANK_CUTOFF * lambda_max.max(1.0)
}

/// A dense self-adjoint operator on `C^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianOperator {
    mat: CMat,
}

impl HermitianOperator {
    /// Wraps a square matrix, replacing it by its Hermitian part `(A + A†)/2`.
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, expected square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self::hermitian_part(&mat))
    }

    pub(crate) fn hermitian_part(mat: &CMat) -> Self {
        let mat = (mat + mat.adjoint()).scale(0.5);
        Self { mat }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: CMat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CMat::identity(dim, dim) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self { mat: CMat::from_diagonal(&d) }
    }

    /// Row-major real and imaginary parts.
    pub fn from_parts(dim: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        check_dim(dim * dim, re.len())?;
        check_dim(dim * dim, im.len())?;
        let mat = CMat::from_fn(dim, dim, |i, j| Complex64::new(re[i * dim + j], im[i * dim + j]));
        Self::new(mat)
    }

    /// The rank-one operator `|v⟩⟨v|`.
    pub fn outer(v: &DVector<Complex64>) -> Self {
        Self { mat: v * v.adjoint() }
    }

    /// `|i⟩⟨i|` in dimension `dim`.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut mat = CMat::zeros(dim, dim);
        mat[(i, i)] = C1;
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Re Tr(A B)`, the Hilbert-Schmidt inner product of two Hermitian operators.
    pub fn inner(&self, other: &Self) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace_norm(&self) -> f64 {
        self.eig().values.iter().map(|l| l.abs()).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { mat: self.mat.map(|z| z * s) }
    }

    pub fn eig(&self) -> Spectrum {
        eig_hermitian(self)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig().values[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eig().values.last().expect("empty operator")
    }

    /// `A H A†` for an arbitrary (possibly rectangular) `A`.
    pub fn conjugate_by(&self, a: &CMat) -> Self {
        Self::hermitian_part(&(a * &self.mat * a.adjoint()))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { mat: self.mat.kronecker(&other.mat) }
    }

    /// Compression `P H P` onto the span of the orthonormal columns of `basis`,
    /// expressed in that basis.
    pub fn compress(&self, basis: &CMat) -> Self {
        Self::hermitian_part(&(basis.adjoint() * &self.mat * basis))
    }

    /// Partial trace over the subsystems not listed in `keep`.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        Ok(Self::hermitian_part(&partial_trace(&self.mat, dims, keep)?))
    }

    /// Checks positivity up to `INPUT_TOL` relative to the largest eigenvalue.
    pub fn check_psd(&self) -> Result<()> {
        let spec = self.eig();
        let min = *spec.values.last().unwrap_or(&0.0);
        if min < -INPUT_TOL * spec.values[0].abs().max(1.0) {
            Err(Error::NotPositive(min))
        } else {
            Ok(())
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: &self.mat - &rhs.mat }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        HermitianOperator { mat: -&self.mat }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

/// Wire format for matrices: `re` and `im` as `d × d` row arrays. Flat
/// row-major arrays of length `d²` are accepted on input.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Entries,
    pub im: Entries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entries {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl Entries {
    fn flatten(self, dim: usize) -> Result<Vec<f64>> {
        match self {
            Entries::Flat(v) => Ok(v),
            Entries::Rows(rows) => {
                check_dim(dim, rows.len())?;
                for r in &rows {
                    check_dim(dim, r.len())?;
                }
                Ok(rows.into_iter().flatten().collect())
            }
        }
    }
}

impl TryFrom<MatrixJson> for HermitianOperator {
    type Error = Error;
    fn try_from(m: MatrixJson) -> Result<Self> {
        let re = m.re.flatten(m.dim)?;
        let im = m.im.flatten(m.dim)?;
        Self::from_parts(m.dim, &re, &im)
    }
}

impl From<HermitianOperator> for MatrixJson {
    fn from(h: HermitianOperator) -> Self {
        let dim = h.dim();
        let part = |f: fn(&Complex64) -> f64| {
            Entries::Rows((0..dim).map(|i| (0..dim).map(|j| f(&h.mat[(i, j)])).collect()).collect())
        };
        MatrixJson { dim, re: part(|z| z.re), im: part(|z| z.im) }
    }
}

/// Eigendecomposition `H = Σ λ_i |v_i⟩⟨v_i|` with `λ` descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, each with its first nonzero entry real positive.
    pub vectors: CMat,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.values[0]
    }

    pub fn threshold(&self) -> f64 {
        zero_threshold(self.lambda_max())
    }

    /// Number of eigenvalues above the zero threshold.
    pub fn rank(&self) -> usize {
        let thr = self.threshold();
        self.values.iter().filter(|&&l| l > thr).count()
    }

    /// `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        HermitianOperator::hermitian_part(&(scaled * self.vectors.adjoint()))
    }

    /// Applies `f` to eigenvalues above the zero threshold and maps the rest to 0.
    pub fn map_support(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let thr = self.threshold();
        self.map(|l| if l > thr { f(l) } else { 0.0 })
    }

    pub fn support_projector(&self) -> HermitianOperator {
        self.map_support(|_| 1.0)
    }

    pub fn kernel_projector(&self) -> HermitianOperator {
        let thr = self.threshold();
        self.map(|l| if l > thr { 0.0 } else { 1.0 })
    }

    /// Orthonormal basis of the support, as columns.
    pub fn support_basis(&self) -> CMat {
        let r = self.rank();
        self.vectors.columns(0, r).into_owned()
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.map(|l| l)
    }
}

/// Eigendecomposition of a Hermitian operator.
///
/// ```
/// use smollision_core::linalg::{eig_hermitian, HermitianOperator};
/// let h = HermitianOperator::from_parts(2, &[-0.5, 0.5, 0.5, 0.5], &[0.0; 4]).unwrap();
/// let s = eig_hermitian(&h);
/// assert!((s.values[0] - 0.5f64.sqrt()).abs() < 1e-12);
/// assert!((s.values[1] + 0.5f64.sqrt()).abs() < 1e-12);
/// ```
pub fn eig_hermitian(h: &HermitianOperator) -> Spectrum {
    let n = h.dim();
    if n == 0 {
        return Spectrum { values: vec![], vectors: CMat::zeros(0, 0) };
    }
    let eig = SymmetricEigen::new(h.mat.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        let lead = col.iter().copied().find(|z| z.norm() > 1e-12).unwrap_or(C1);
        let phase = lead.conj() / lead.norm();
        for i in 0..n {
            vectors[(i, j)] = col[i] * phase;
        }
    }
    Spectrum { values, vectors }
}

/// Positive part `H₊` and its trace.
pub fn positive_part(h: &HermitianOperator) -> (HermitianOperator, f64) {
    let spec = h.eig();
    let thr = spec.threshold();
    let tr = spec.values.iter().filter(|&&l| l > thr).sum();
    (spec.map(|l| if l > thr { l } else { 0.0 }), tr)
}

/// `Tr H₊`.
pub fn trace_positive(h: &HermitianOperator) -> f64 {
    positive_part(h).1
}

/// `‖X‖₊ = ½|Tr X| + ½‖X‖₁`.
pub fn plus_norm(x: &HermitianOperator) -> f64 {
    let spec = x.eig();
    let tr: f64 = spec.values.iter().sum();
    let l1: f64 = spec.values.iter().map(|l| l.abs()).sum();
    0.5 * tr.abs() + 0.5 * l1
}

/// `A^p` on the support of a positive operator.
pub fn psd_power(a: &HermitianOperator, p: f64) -> HermitianOperator {
    a.eig().map_support(|l| l.powf(p))
}

/// `log A` on the support of a positive operator (zero on the kernel).
pub fn psd_log(a: &HermitianOperator) -> HermitianOperator {
    a.eig().map_support(f64::ln)
}

pub fn psd_sqrt(a: &HermitianOperator) -> HermitianOperator {
    a.eig().map_support(f64::sqrt)
}

/// Fidelity and purified distance between a state and a subnormalized state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    pub fidelity: f64,
    pub purified_distance: f64,
}

/// `F = (Tr √(√ρ ρ' √ρ))²` and `P = √(1 - F)`, for `Tr ρ' ≤ Tr ρ = 1`.
pub fn fidelity_purified(rho: &HermitianOperator, rho_p: &HermitianOperator) -> Result<Fidelity> {
    check_dim(rho.dim(), rho_p.dim())?;
    rho.check_psd()?;
    rho_p.check_psd()?;
    let tr = rho.trace();
    if (tr - 1.0).abs() > INPUT_TOL {
        return Err(Error::NotNormalized(tr));
    }
    if rho_p.trace() > tr + INPUT_TOL {
        return Err(Error::InvalidInput(format!(
            "second argument has trace {} > 1",
            rho_p.trace()
        )));
    }
    let s = psd_sqrt(rho);
    let m = rho_p.conjugate_by(s.matrix());
    let root: f64 = m.eig().values.iter().map(|l| l.max(0.0).sqrt()).sum();
    let fidelity = root * root;
    Ok(Fidelity { fidelity, purified_distance: (1.0 - fidelity).max(0.0).sqrt() })
}

/// Solves `(σZ + Zσ)/2 = X` for `Z` on the support of `σ`.
///
/// Fails with [`Error::Range`] when `X` has a component on the kernel of `σ`
/// that cannot be represented, i.e. `Π⊥ X Π⊥ ≠ 0`.
pub fn lyapunov_solve(sigma: &HermitianOperator, x: &HermitianOperator) -> Result<HermitianOperator> {
    check_dim(sigma.dim(), x.dim())?;
    let spec = sigma.eig();
    let thr = spec.threshold();
    let u = &spec.vectors;
    let y = u.adjoint() * x.matrix() * u;
    let n = sigma.dim();
    let tol = RANK_CUTOFF * x.frobenius_norm().max(1.0);
    let s: Vec<f64> = spec.values.iter().map(|&l| if l > thr { l } else { 0.0 }).collect();
    let mut z = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = s[i] + s[j];
            if d > 0.0 {
                z[(i, j)] = y[(i, j)] * (2.0 / d);
            } else if y[(i, j)].norm() > tol {
                return Err(Error::Range);
            }
        }
    }
    Ok(HermitianOperator::hermitian_part(&(u * z * u.adjoint())))
}

/// `‖X‖²_{B,σ} = Tr X 𝒥_σ⁻¹(X)`, or `+∞` when `X` leaves the range of `σ`.
pub fn bures_seminorm_sq(sigma: &HermitianOperator, x: &HermitianOperator) -> Result<f64> {
    match lyapunov_solve(sigma, x) {
        Ok(z) => Ok(x.inner(&z)),
        Err(Error::Range) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Partial trace of a square matrix on a tensor product with local `dims`,
/// keeping the subsystems in `keep` (in increasing order).
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    check_dim(total, m.nrows())?;
    check_dim(total, m.ncols())?;
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidInput("kept subsystems must be increasing and in range".into()));
    }
    let kept: usize = keep.iter().map(|&k| dims[k]).product();
    let mut kidx = vec![0usize; total];
    let mut tidx = vec![0usize; total];
    for (idx, (ki, ti)) in kidx.iter_mut().zip(tidx.iter_mut()).enumerate() {
        let mut rem = idx;
        let (mut kv, mut kstride, mut tv, mut tstride) = (0, 1, 0, 1);
        for s in (0..dims.len()).rev() {
            let digit = rem % dims[s];
            rem /= dims[s];
            if keep.contains(&s) {
                kv += digit * kstride;
                kstride *= dims[s];
            } else {
                tv += digit * tstride;
                tstride *= dims[s];
            }
        }
        *ki = kv;
        *ti = tv;
    }
    let mut out = CMat::zeros(kept, kept);
    for i in 0..total {
        for j in 0..total {
            if tidx[i] == tidx[j] {
                out[(kidx[i], kidx[j])] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// The swap operator on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> CMat {
    let mut f = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = C1;
        }
    }
    f
}

/// `Tr(A B)` for general square matrices.
pub(crate) fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let mut acc = C0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn op(dim: usize, re: &[f64], im: &[f64]) -> HermitianOperator {
        HermitianOperator::from_parts(dim, re, im).unwrap()
    }

    fn plus() -> HermitianOperator {
        op(2, &[0.5, 0.5, 0.5, 0.5], &[0.0; 4])
    }

    fn random_herm(entries: &[f64], dim: usize) -> HermitianOperator {
        let mat = CMat::from_fn(dim, dim, |i, j| {
            Complex64::new(entries[2 * (i * dim + j)], entries[2 * (i * dim + j) + 1])
        });
        HermitianOperator::new(mat).unwrap()
    }

    fn random_psd(entries: &[f64], dim: usize) -> HermitianOperator {
        let g = CMat::from_fn(dim, dim, |i, j| {
            Complex64::new(entries[2 * (i * dim + j)], entries[2 * (i * dim + j) + 1])
        });
        HermitianOperator::new(&g * g.adjoint()).unwrap()
    }

    fn normalized(h: HermitianOperator) -> HermitianOperator {
        let t = h.trace();
        h.scale(1.0 / t)
    }

    #[test]
    fn constructor_symmetrizes_and_rejects_nan() {
        let h = op(2, &[1.0, 2.0, 0.0, 1.0], &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(h.matrix()[(0, 1)], Complex64::new(1.0, 0.5));
        assert_eq!(h.matrix()[(1, 0)], Complex64::new(1.0, -0.5));
        assert!(matches!(
            HermitianOperator::from_parts(1, &[f64::NAN], &[0.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(HermitianOperator::new(CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn eigen_of_reflection() {
        let s = op(2, &[-0.5, 0.5, 0.5, 0.5], &[0.0; 4]).eig();
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(s.values[0], r, epsilon = 1e-14);
        assert_abs_diff_eq!(s.values[1], -r, epsilon = 1e-14);
        for j in 0..2 {
            let lead = s.vectors.column(j).iter().copied().find(|z| z.norm() > 1e-12).unwrap();
            assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        }
    }

    #[test]
    fn positive_part_and_plus_norm() {
        let h = HermitianOperator::from_diagonal(&[0.7, -0.2, 0.1]);
        let (p, tr) = positive_part(&h);
        assert_abs_diff_eq!(tr, 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(p.matrix()[(1, 1)].re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(plus_norm(&h), 0.5 * 0.6 + 0.5 * 1.0, epsilon = 1e-14);
        // traceless case reduces to half the trace norm
        let d = HermitianOperator::from_diagonal(&[0.25, -0.25]);
        assert_abs_diff_eq!(plus_norm(&d), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn lyapunov_example() {
        let sigma = HermitianOperator::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]);
        let z = lyapunov_solve(&sigma, &plus()).unwrap();
        assert_abs_diff_eq!(z.matrix()[(0, 0)].re, 0.75, epsilon = 1e-13);
        assert_abs_diff_eq!(z.matrix()[(0, 1)].re, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(z.matrix()[(1, 1)].re, 1.5, epsilon = 1e-13);
        assert_abs_diff_eq!(bures_seminorm_sq(&sigma, &plus()).unwrap(), 17.0 / 8.0, epsilon = 1e-13);
    }

    #[test]
    fn lyapunov_range_error() {
        let sigma = HermitianOperator::from_diagonal(&[1.0, 0.0]);
        let x = HermitianOperator::from_diagonal(&[0.0, 1.0]);
        assert!(matches!(lyapunov_solve(&sigma, &x), Err(Error::Range)));
        assert_eq!(bures_seminorm_sq(&sigma, &x).unwrap(), f64::INFINITY);
        // off-diagonal coupling into the kernel is representable
        let y = op(2, &[0.0, 1.0, 1.0, 0.0], &[0.0; 4]);
        let z = lyapunov_solve(&sigma, &y).unwrap();
        assert_abs_diff_eq!(z.matrix()[(0, 1)].re, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn fidelity_pure_vs_mixed() {
        let zero = HermitianOperator::basis_projector(2, 0);
        let mixed = HermitianOperator::identity(2).scale(0.5);
        let f = fidelity_purified(&zero, &mixed).unwrap();
        assert_abs_diff_eq!(f.fidelity, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f.purified_distance, 0.5f64.sqrt(), epsilon = 1e-14);
        assert!(fidelity_purified(&mixed.scale(2.0), &zero).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let a = HermitianOperator::from_diagonal(&[0.25, 0.75]);
        let b = plus();
        let ab = a.kron(&b);
        let ta = ab.partial_trace(&[2, 2], &[0]).unwrap();
        let tb = ab.partial_trace(&[2, 2], &[1]).unwrap();
        assert!(ta.max_abs_diff(&a) < 1e-15);
        assert!(tb.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let h = op(2, &[0.1, 0.2, 0.2, 1.0 / 3.0], &[0.0, -0.7, 0.7, 0.0]);
        let s = serde_json::to_string(&h).unwrap();
        let back: HermitianOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(h, back);
        assert!(s.contains("\"re\":[[0.1,0.2],[0.2,"));
    }

    #[test]
    fn flat_entries_are_accepted() {
        let s = r#"{"dim":2,"re":[0.5,0,0,0.5],"im":[0,0,0,0]}"#;
        let h: HermitianOperator = serde_json::from_str(s).unwrap();
        assert_eq!(h, HermitianOperator::identity(2).scale(0.5));
        let bad = r#"{"dim":2,"re":[[0.5,0],[0,0.5,1]],"im":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<HermitianOperator>(bad).is_err());
    }

    proptest! {
        #[test]
        fn eigen_reconstructs(entries in proptest::collection::vec(-1.0f64..1.0, 32), dim in 1usize..5) {
            let h = random_herm(&entries, dim);
            let s = h.eig();
            let err = (s.reconstruct().matrix() - h.matrix()).norm();
            prop_assert!(err <= 1e-9 * (1.0 + h.frobenius_norm()));
            prop_assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn trace_norm_bounded_by_bures_norm(
            x in proptest::collection::vec(-1.0f64..1.0, 32),
            g in proptest::collection::vec(-1.0f64..1.0, 32),
            dim in 1usize..5,
        ) {
            let h = random_herm(&x, dim);
            let sigma = random_psd(&g, dim);
            let b = bures_seminorm_sq(&sigma, &h).unwrap();
            prop_assume!(b.is_finite());
            prop_assert!(h.trace_norm() <= (b * sigma.trace()).sqrt() * (1.0 + 1e-9) + 1e-12);
        }

        #[test]
        fn plus_norm_below_purified_distance(
            a in proptest::collection::vec(-1.0f64..1.0, 32),
            b in proptest::collection::vec(-1.0f64..1.0, 32),
            shrink in 0.0f64..1.0,
            dim in 1usize..5,
        ) {
            let rho = normalized(random_psd(&a, dim));
            let rho_p = normalized(random_psd(&b, dim)).scale(shrink);
            let p = fidelity_purified(&rho, &rho_p).unwrap().purified_distance;
            prop_assert!(plus_norm(&(&rho - &rho_p)) <= p + 1e-9);
        }

        #[test]
        fn lyapunov_solution_satisfies_equation(
            x in proptest::collection::vec(-1.0f64..1.0, 32),
            g in proptest::collection::vec(-1.0f64..1.0, 32),
            dim in 1usize..5,
        ) {
            let h = random_herm(&x, dim);
            let sigma = random_psd(&g, dim);
            prop_assume!(sigma.min_eigenvalue() > 1e-3);
            let z = lyapunov_solve(&sigma, &h).unwrap();
            let lhs = (sigma.matrix() * z.matrix() + z.matrix() * sigma.matrix()).scale(0.5);
            prop_assert!((lhs - h.matrix()).norm() < 1e-8 * (1.0 + h.frobenius_norm()));
        }
    }
}
