//! Affine matrix expressions over real scalar variables, compiled to the
//! standard form of [`super::solver`].
//!
//! A model maximizes a linear objective over free real variables `y`
//! subject to Hermitian linear matrix inequalities `F(y) ⪰ 0` and scalar
//! inequalities `a(y) ≥ 0`. This is the `(D)` side of the standard form, so
//! the optimal `y` carries the model variables and the solver's `X` carries
//! the Lagrange multipliers. Complex blocks are embedded as
//! `A + iB ↦ [[A, -B], [B, A]]`, which preserves positivity exactly.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::solver::{solve, BlockKind, BlockSpec, Constraint, SdpProblem, SdpSettings, SdpSolution, SdpStatus, SymSparse};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, CMat, HermitianOperator, C0, C1};

/// `constant + Σ coeff · y_var`.
#[derive(Clone, Debug, Default)]
pub struct ScalarExpr {
    pub constant: f64,
    pub terms: BTreeMap<usize, f64>,
}

impl ScalarExpr {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: BTreeMap::new() }
    }

    pub fn var(v: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(v, 1.0);
        Self { constant: 0.0, terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant += other.constant;
        for (&v, &c) in &other.terms {
            *out.terms.entry(v).or_insert(0.0) += c;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            constant: self.constant * s,
            terms: self.terms.iter().map(|(&v, &c)| (v, c * s)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn plus(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(&v, &c)| c * y[v]).sum::<f64>()
    }
}

/// `constant + Σ y_var · coeff` with complex matrix coefficients.
#[derive(Clone, Debug)]
pub struct MatExpr {
    pub rows: usize,
    pub cols: usize,
    pub constant: CMat,
    pub terms: BTreeMap<usize, CMat>,
}

impl MatExpr {
    pub fn constant(m: CMat) -> Self {
        Self { rows: m.nrows(), cols: m.ncols(), constant: m, terms: BTreeMap::new() }
    }

    pub fn from_op(h: &HermitianOperator) -> Self {
        Self::constant(h.matrix().clone())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::constant(CMat::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(CMat::identity(n, n))
    }

    fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        let constant = f(&self.constant);
        Self {
            rows: constant.nrows(),
            cols: constant.ncols(),
            terms: self.terms.iter().map(|(&v, m)| (v, f(m))).collect(),
            constant,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in expression");
        let mut out = self.clone();
        out.constant += &other.constant;
        for (&v, m) in &other.terms {
            match out.terms.get_mut(&v) {
                Some(t) => *t += m,
                None => {
                    out.terms.insert(v, m.clone());
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|m| m * Complex64::new(s, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn adjoint(&self) -> Self {
        self.map(|m| m.adjoint())
    }

    /// `(X + X†)/2`.
    pub fn hermitian_part(&self) -> Self {
        self.map(|m| (m + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `A ⊗ X`.
    pub fn kron_left(&self, a: &CMat) -> Self {
        self.map(|m| a.kronecker(m))
    }

    /// `X ⊗ A`.
    pub fn kron_right(&self, a: &CMat) -> Self {
        self.map(|m| m.kronecker(a))
    }

    /// `A X`.
    pub fn left_mul(&self, a: &CMat) -> Self {
        self.map(|m| a * m)
    }

    /// `A X A†`.
    pub fn congruence(&self, a: &CMat) -> Self {
        self.map(|m| a * m * a.adjoint())
    }

    /// `s · X` for a scalar expression `s` times a constant matrix.
    pub fn from_scalar(s: &ScalarExpr, m: &CMat) -> Self {
        let mut out = Self::constant(m * Complex64::new(s.constant, 0.0));
        for (&v, &c) in &s.terms {
            out.terms.insert(v, m * Complex64::new(c, 0.0));
        }
        out
    }

    /// `Re Tr(K X)`.
    pub fn re_inner(&self, k: &CMat) -> ScalarExpr {
        let f = |m: &CMat| crate::linalg::trace_product(k, m).re;
        ScalarExpr {
            constant: f(&self.constant),
            terms: self.terms.iter().map(|(&v, m)| (v, f(m))).collect(),
        }
    }

    /// `Re Tr X`.
    pub fn re_trace(&self) -> ScalarExpr {
        let f = |m: &CMat| m.diagonal().iter().map(|z| z.re).sum::<f64>();
        ScalarExpr {
            constant: f(&self.constant),
            terms: self.terms.iter().map(|(&v, m)| (v, f(m))).collect(),
        }
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let constant = partial_trace(&self.constant, dims, keep)?;
        let mut terms = BTreeMap::new();
        for (&v, m) in &self.terms {
            terms.insert(v, partial_trace(m, dims, keep)?);
        }
        Ok(Self { rows: constant.nrows(), cols: constant.ncols(), constant, terms })
    }

    /// Block matrix from a grid of expressions; rows of the grid must agree
    /// in height and columns in width.
    pub fn blocks(grid: &[Vec<&MatExpr>]) -> Self {
        let heights: Vec<usize> = grid.iter().map(|row| row[0].rows).collect();
        let widths: Vec<usize> = grid[0].iter().map(|e| e.cols).collect();
        let (rows, cols) = (heights.iter().sum(), widths.iter().sum());
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, e) in row.iter().enumerate() {
                assert_eq!((e.rows, e.cols), (heights[bi], widths[bj]), "block shape mismatch");
                out.constant.view_mut((r0, c0), (e.rows, e.cols)).copy_from(&e.constant);
                for (&v, m) in &e.terms {
                    let t = out.terms.entry(v).or_insert_with(|| CMat::zeros(rows, cols));
                    t.view_mut((r0, c0), (e.rows, e.cols)).copy_from(m);
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        out
    }

    /// Direct sum of square expressions.
    pub fn direct_sum(parts: &[MatExpr]) -> Self {
        let n = parts.len();
        let zero_cache: Vec<Vec<MatExpr>> = (0..n)
            .map(|i| (0..n).map(|j| MatExpr::zeros(parts[i].rows, parts[j].cols)).collect())
            .collect();
        let grid: Vec<Vec<&MatExpr>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { &parts[i] } else { &zero_cache[i][j] }).collect())
            .collect();
        Self::blocks(&grid)
    }

    pub fn eval(&self, y: &[f64]) -> CMat {
        let mut out = self.constant.clone();
        for (&v, m) in &self.terms {
            out += m * Complex64::new(y[v], 0.0);
        }
        out
    }

    pub fn eval_hermitian(&self, y: &[f64]) -> HermitianOperator {
        HermitianOperator::new(self.eval(y)).expect("finite solver output")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// A conic program over free real variables.
#[derive(Clone, Debug)]
pub struct Model {
    n_vars: usize,
    sense: Sense,
    objective: ScalarExpr,
    psd: Vec<MatExpr>,
    nonneg: Vec<ScalarExpr>,
}

#[derive(Clone, Debug)]
pub struct ModelSolution {
    pub status: SdpStatus,
    /// Objective at the returned variables, in the model's own sense.
    pub value: f64,
    /// Objective bound from the multipliers (upper bound when maximizing).
    pub bound: f64,
    pub y: Vec<f64>,
    pub raw: SdpSolution,
}

impl Model {
    pub fn new(sense: Sense) -> Self {
        Self { n_vars: 0, sense, objective: ScalarExpr::default(), psd: Vec::new(), nonneg: Vec::new() }
    }

    pub fn scalar(&mut self) -> ScalarExpr {
        self.n_vars += 1;
        ScalarExpr::var(self.n_vars - 1)
    }

    /// A Hermitian `d × d` variable with `d²` real parameters.
    pub fn hermitian(&mut self, d: usize) -> MatExpr {
        let mut e = MatExpr::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let mut re = CMat::zeros(d, d);
                re[(i, j)] = C1;
                re[(j, i)] = C1;
                e.terms.insert(self.n_vars, re);
                self.n_vars += 1;
                if i != j {
                    let mut im = CMat::zeros(d, d);
                    im[(i, j)] = Complex64::new(0.0, 1.0);
                    im[(j, i)] = Complex64::new(0.0, -1.0);
                    e.terms.insert(self.n_vars, im);
                    self.n_vars += 1;
                }
            }
        }
        e
    }

    /// A real symmetric `d × d` variable.
    pub fn symmetric(&mut self, d: usize) -> MatExpr {
        let mut e = MatExpr::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let mut re = CMat::zeros(d, d);
                re[(i, j)] = C1;
                re[(j, i)] = C1;
                e.terms.insert(self.n_vars, re);
                self.n_vars += 1;
            }
        }
        e
    }

    /// A general complex `rows × cols` variable, or a real one when `real`.
    pub fn general(&mut self, rows: usize, cols: usize, real: bool) -> MatExpr {
        let mut e = MatExpr::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let mut re = CMat::zeros(rows, cols);
                re[(i, j)] = C1;
                e.terms.insert(self.n_vars, re);
                self.n_vars += 1;
                if !real {
                    let mut im = CMat::zeros(rows, cols);
                    im[(i, j)] = Complex64::new(0.0, 1.0);
                    e.terms.insert(self.n_vars, im);
                    self.n_vars += 1;
                }
            }
        }
        e
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn set_objective(&mut self, obj: ScalarExpr) {
        self.objective = obj;
    }

    /// Requires the (Hermitian) expression to be positive semidefinite.
    pub fn psd(&mut self, e: MatExpr) {
        assert_eq!(e.rows, e.cols, "matrix inequality must be square");
        self.psd.push(e);
    }

    /// Requires `e ≥ 0`.
    pub fn nonneg(&mut self, e: ScalarExpr) {
        self.nonneg.push(e);
    }

    /// Compiles to the standard form; the solver's dual objective `bᵀy`
    /// equals the model objective up to the constant offset and sign.
    pub fn compile(&self) -> SdpProblem {
        let sign = match self.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        let mut blocks = Vec::new();
        let mut objective = Vec::new();
        let mut coeffs: Vec<Vec<(usize, SymSparse)>> = vec![Vec::new(); self.n_vars];
        let tol = 0.0;
        for e in &self.psd {
            let real = e.constant.iter().all(|z| z.im == 0.0)
                && e.terms.values().all(|m| m.iter().all(|z| z.im == 0.0));
            let k = blocks.len();
            let size = if real { e.rows } else { 2 * e.rows };
            blocks.push(BlockSpec { kind: BlockKind::Psd, size });
            objective.push(embed(&e.constant, real, 1.0, tol));
            for (&v, m) in &e.terms {
                let s = embed(m, real, -1.0, tol);
                if !s.is_empty() {
                    coeffs[v].push((k, s));
                }
            }
        }
        if !self.nonneg.is_empty() {
            let k = blocks.len();
            blocks.push(BlockSpec { kind: BlockKind::Diagonal, size: self.nonneg.len() });
            let mut c = SymSparse::default();
            for (l, e) in self.nonneg.iter().enumerate() {
                c.push(l, l, e.constant);
                for (&v, &a) in &e.terms {
                    if a != 0.0 {
                        match coeffs[v].last_mut() {
                            Some((kk, s)) if *kk == k => s.push(l, l, -a),
                            _ => {
                                let mut s = SymSparse::default();
                                s.push(l, l, -a);
                                coeffs[v].push((k, s));
                            }
                        }
                    }
                }
            }
            objective.push(c);
        }
        let constraints = coeffs
            .into_iter()
            .enumerate()
            .map(|(v, coeffs)| Constraint {
                coeffs,
                rhs: sign * self.objective.terms.get(&v).copied().unwrap_or(0.0),
            })
            .collect();
        SdpProblem { blocks, objective, constraints }
    }

    pub fn solve(&self, settings: &SdpSettings) -> Result<ModelSolution> {
        let problem = self.compile();
        let raw = solve(&problem, settings)?;
        let offset = self.objective.constant;
        let (value, bound) = match self.sense {
            Sense::Maximize => (raw.dual_objective + offset, raw.primal_objective + offset),
            Sense::Minimize => (-raw.dual_objective + offset, -raw.primal_objective + offset),
        };
        if raw.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite iterate".into()));
        }
        Ok(ModelSolution { status: raw.status, value, bound, y: raw.y.clone(), raw })
    }
}

/// Real embedding of a Hermitian coefficient, upper triangle only.
fn embed(m: &CMat, real: bool, scale: f64, tol: f64) -> SymSparse {
    let n = m.nrows();
    let mut s = SymSparse::default();
    let mut put = |i: usize, j: usize, v: f64| {
        if v.abs() > tol {
            s.push(i, j, scale * v);
        }
    };
    for i in 0..n {
        for j in i..n {
            let z = if i == j { Complex64::new(m[(i, i)].re, 0.0) } else { m[(i, j)] };
            put(i, j, z.re);
            if !real {
                put(n + i, n + j, z.re);
                // lower-left block holds B, upper-right holds -B = Bᵀ
                put(i, n + j, -z.im);
                if i != j {
                    put(j, n + i, z.im);
                }
            }
        }
    }
    s.canonicalize();
    s
}

/// `|i⟩⟨j|` in dimension `n`.
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::from_element(n, n, C0);
    m[(i, j)] = C1;
    m
}
