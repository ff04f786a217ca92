//! Primal-dual interior-point method for block-diagonal real SDPs.
//!
//! Standard form:
//!
//! ```text
//! (P)  min ⟨C, X⟩   s.t. ⟨A_i, X⟩ = b_i,  X ⪰ 0
//! (D)  max bᵀy      s.t. S = C - Σ y_i A_i ⪰ 0
//! ```
//!
//! `X` and `S` are block diagonal; a block is either a dense symmetric cone
//! or a diagonal (nonnegative orthant) block. Search directions use the
//! HKM scaling with a Mehrotra predictor-corrector step, started from an
//! infeasible interior point.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Psd,
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub size: usize,
}

/// Sparse symmetric matrix stored as its upper triangle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymSparse {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    /// Adds `v` at `(i, j)` and, implicitly, at `(j, i)`.
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.entries.push((i.min(j), i.max(j), v));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merges repeated positions and drops zeros.
    pub fn canonicalize(&mut self) {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out.retain(|e| e.2 != 0.0);
        self.entries = out;
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        m
    }

    /// Both triangles, as `(row, col, value)`.
    fn full(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for &(i, j, v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        out
    }
}

/// One linear equality `Σ_k ⟨A_k, X_k⟩ = rhs`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, SymSparse)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<BlockSpec>,
    /// Cost matrix per block.
    pub objective: Vec<SymSparse>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.blocks.len() {
            return Err(Error::InvalidInput("one cost matrix per block is required".into()));
        }
        let check = |k: usize, s: &SymSparse| -> Result<()> {
            let spec = self
                .blocks
                .get(k)
                .ok_or_else(|| Error::InvalidInput(format!("block {k} does not exist")))?;
            for &(i, j, v) in &s.entries {
                if i >= spec.size || j >= spec.size || !v.is_finite() {
                    return Err(Error::InvalidInput(format!("bad entry ({i}, {j}) in block {k}")));
                }
                if spec.kind == BlockKind::Diagonal && i != j {
                    return Err(Error::InvalidInput(format!("off-diagonal entry in diagonal block {k}")));
                }
            }
            Ok(())
        };
        for (k, s) in self.objective.iter().enumerate() {
            check(k, s)?;
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(Error::InvalidInput("non-finite right-hand side".into()));
            }
            for (k, s) in &c.coeffs {
                check(*k, s)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSettings {
    pub tol: f64,
    pub step_fraction: f64,
    pub max_iter: usize,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self { tol: 1e-8, step_fraction: 0.98, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    /// No `y` makes `S ⪰ 0`; a primal ray certifies it.
    Infeasible,
    /// `bᵀy` is unbounded above over the feasible `y`.
    Unbounded,
    /// Stalled before `tol` but with gap and residuals below `1000 · tol`.
    NearOptimal,
    MaxIter,
}

/// Per-block iterate, dense or diagonal.
#[derive(Clone, Debug)]
pub enum BlockValue {
    Dense(DMatrix<f64>),
    Diagonal(DVector<f64>),
}

impl BlockValue {
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Diagonal(d) => DMatrix::from_diagonal(d),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// `⟨C, X⟩`.
    pub primal_objective: f64,
    /// `bᵀy`.
    pub dual_objective: f64,
    pub x: Vec<BlockValue>,
    pub y: Vec<f64>,
    pub s: Vec<BlockValue>,
    pub iterations: usize,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

impl SdpSolution {
    /// Midpoint of the primal and dual objectives.
    pub fn value(&self) -> f64 {
        0.5 * (self.primal_objective + self.dual_objective)
    }
}

struct DenseData {
    c: DMatrix<f64>,
    /// `(constraint, full entry list)` for constraints touching the block.
    a: Vec<(usize, Vec<(usize, usize, f64)>)>,
}

struct DiagData {
    c: DVector<f64>,
    /// For each index, the `(constraint, coefficient)` pairs.
    a: Vec<Vec<(usize, f64)>>,
}

enum Data {
    Dense(DenseData),
    Diag(DiagData),
}

struct Prepared {
    blocks: Vec<Data>,
    b: DVector<f64>,
    m: usize,
    cone_dim: f64,
}

fn prepare(p: &SdpProblem) -> Prepared {
    let m = p.constraints.len();
    let mut blocks: Vec<Data> = p
        .blocks
        .iter()
        .zip(&p.objective)
        .map(|(spec, c)| match spec.kind {
            BlockKind::Psd => Data::Dense(DenseData { c: c.to_dense(spec.size), a: Vec::new() }),
            BlockKind::Diagonal => {
                let mut cv = DVector::zeros(spec.size);
                for &(i, _, v) in &c.entries {
                    cv[i] += v;
                }
                Data::Diag(DiagData { c: cv, a: vec![Vec::new(); spec.size] })
            }
        })
        .collect();
    for (i, con) in p.constraints.iter().enumerate() {
        for (k, s) in &con.coeffs {
            let mut s = s.clone();
            s.canonicalize();
            match &mut blocks[*k] {
                Data::Dense(d) => {
                    if !s.is_empty() {
                        d.a.push((i, s.full()));
                    }
                }
                Data::Diag(d) => {
                    for &(l, _, v) in &s.entries {
                        d.a[l].push((i, v));
                    }
                }
            }
        }
    }
    let b = DVector::from_iterator(m, p.constraints.iter().map(|c| c.rhs));
    let cone_dim = p.blocks.iter().map(|b| b.size as f64).sum();
    Prepared { blocks, b, m, cone_dim }
}

impl Prepared {
    /// `A(X)`.
    fn apply_a(&self, x: &[BlockValue]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (data, xv) in self.blocks.iter().zip(x) {
            match (data, xv) {
                (Data::Dense(d), BlockValue::Dense(xm)) => {
                    for (i, ent) in &d.a {
                        out[*i] += ent.iter().map(|&(p, q, v)| v * xm[(q, p)]).sum::<f64>();
                    }
                }
                (Data::Diag(d), BlockValue::Diagonal(xd)) => {
                    for (l, list) in d.a.iter().enumerate() {
                        for &(i, v) in list {
                            out[i] += v * xd[l];
                        }
                    }
                }
                _ => unreachable!("block kinds are fixed at preparation"),
            }
        }
        out
    }

    /// `Σ y_i A_i`.
    fn apply_at(&self, y: &DVector<f64>) -> Vec<BlockValue> {
        self.blocks
            .iter()
            .map(|data| match data {
                Data::Dense(d) => {
                    let n = d.c.nrows();
                    let mut m = DMatrix::zeros(n, n);
                    for (i, ent) in &d.a {
                        for &(p, q, v) in ent {
                            m[(p, q)] += y[*i] * v;
                        }
                    }
                    BlockValue::Dense(m)
                }
                Data::Diag(d) => BlockValue::Diagonal(DVector::from_iterator(
                    d.a.len(),
                    d.a.iter().map(|list| list.iter().map(|&(i, v)| y[i] * v).sum::<f64>()),
                )),
            })
            .collect()
    }

    fn c_blocks(&self) -> Vec<BlockValue> {
        self.blocks
            .iter()
            .map(|d| match d {
                Data::Dense(d) => BlockValue::Dense(d.c.clone()),
                Data::Diag(d) => BlockValue::Diagonal(d.c.clone()),
            })
            .collect()
    }

    /// Schur complement `M_ij = Σ_k Tr(A_i X A_j S⁻¹)`.
    fn schur(&self, x: &[BlockValue], z: &[BlockValue]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.m, self.m);
        for ((data, xv), zv) in self.blocks.iter().zip(x).zip(z) {
            match (data, xv, zv) {
                (Data::Dense(d), BlockValue::Dense(xm), BlockValue::Dense(zm)) => {
                    let n = xm.nrows();
                    for (a, (i, ai)) in d.a.iter().enumerate() {
                        let mut g = DMatrix::<f64>::zeros(n, n);
                        for &(p, q, v) in ai {
                            for c in 0..n {
                                let xv = v * xm[(q, c)];
                                if xv != 0.0 {
                                    for r in 0..n {
                                        g[(r, c)] += zm[(r, p)] * xv;
                                    }
                                }
                            }
                        }
                        for (j, aj) in &d.a[a..] {
                            let val: f64 = aj.iter().map(|&(r, s, w)| w * g[(s, r)]).sum();
                            m[(*i, *j)] += val;
                            if i != j {
                                m[(*j, *i)] += val;
                            }
                        }
                    }
                }
                (Data::Diag(d), BlockValue::Diagonal(xd), BlockValue::Diagonal(zd)) => {
                    for (l, list) in d.a.iter().enumerate() {
                        let w = xd[l] * zd[l];
                        for &(i, a) in list {
                            for &(j, b) in list {
                                m[(i, j)] += w * a * b;
                            }
                        }
                    }
                }
                _ => unreachable!("block kinds are fixed at preparation"),
            }
        }
        m
    }
}

fn inner(a: &[BlockValue], b: &[BlockValue]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (BlockValue::Dense(p), BlockValue::Dense(q)) => p.dot(q),
            (BlockValue::Diagonal(p), BlockValue::Diagonal(q)) => p.dot(q),
            _ => unreachable!("block kinds are fixed at preparation"),
        })
        .sum()
}

fn norm(a: &[BlockValue]) -> f64 {
    inner(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[BlockValue], y: &mut [BlockValue]) {
    for (xv, yv) in x.iter().zip(y.iter_mut()) {
        match (xv, yv) {
            (BlockValue::Dense(p), BlockValue::Dense(q)) => *q += p * alpha,
            (BlockValue::Diagonal(p), BlockValue::Diagonal(q)) => *q += p * alpha,
            _ => unreachable!("block kinds are fixed at preparation"),
        }
    }
}

fn lin(a: f64, x: &[BlockValue], b: f64, y: &[BlockValue]) -> Vec<BlockValue> {
    let mut out: Vec<BlockValue> = x
        .iter()
        .map(|v| match v {
            BlockValue::Dense(m) => BlockValue::Dense(m * a),
            BlockValue::Diagonal(d) => BlockValue::Diagonal(d * a),
        })
        .collect();
    axpy(b, y, &mut out);
    out
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn inverse_pd(s: &[BlockValue]) -> Option<Vec<BlockValue>> {
    s.iter()
        .map(|v| match v {
            BlockValue::Dense(m) => Cholesky::new(m.clone()).map(|c| BlockValue::Dense(sym(c.inverse()))),
            BlockValue::Diagonal(d) => {
                if d.iter().all(|&x| x > 0.0) {
                    Some(BlockValue::Diagonal(d.map(|x| 1.0 / x)))
                } else {
                    None
                }
            }
        })
        .collect()
}

/// Largest `α` with `X + α dX ⪰ 0`, or infinity.
fn max_step(x: &[BlockValue], dx: &[BlockValue]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xv, dv) in x.iter().zip(dx) {
        match (xv, dv) {
            (BlockValue::Dense(xm), BlockValue::Dense(dm)) => {
                let Some(ch) = Cholesky::new(xm.clone()) else {
                    return 0.0;
                };
                let l = ch.l();
                let Some(linv) = l.clone().try_inverse() else {
                    return 0.0;
                };
                let w = sym(&linv * dm * linv.transpose());
                let lmin = SymmetricEigen::new(w).eigenvalues.min();
                if lmin < 0.0 {
                    alpha = alpha.min(-1.0 / lmin);
                }
            }
            (BlockValue::Diagonal(xd), BlockValue::Diagonal(dd)) => {
                for (a, b) in xd.iter().zip(dd.iter()) {
                    if *b < 0.0 {
                        alpha = alpha.min(-a / b);
                    }
                }
            }
            _ => unreachable!("block kinds are fixed at preparation"),
        }
    }
    alpha
}

fn solve_linear(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        let sol = c.solve(rhs);
        if sol.iter().all(|v| v.is_finite()) {
            return Some(sol);
        }
    }
    let scale = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let mut reg = m.clone();
    for i in 0..m.nrows() {
        reg[(i, i)] += 1e-14 * scale;
    }
    let sol = reg.full_piv_lu().solve(rhs)?;
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}

struct Direction {
    dx: Vec<BlockValue>,
    dy: DVector<f64>,
    ds: Vec<BlockValue>,
}

/// Solves the problem in standard form.
pub fn solve(problem: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    problem.validate()?;
    if !(settings.tol > 0.0) || settings.tol < 1e-14 {
        return Err(Error::InvalidInput(format!("tolerance {} is out of range", settings.tol)));
    }
    if !(settings.step_fraction > 0.0 && settings.step_fraction < 1.0) {
        return Err(Error::InvalidInput("step fraction must lie in (0, 1)".into()));
    }
    let pr = prepare(problem);
    let c = pr.c_blocks();
    let norm_b = pr.b.norm();
    let norm_c = norm(&c);

    let mut x: Vec<BlockValue> = Vec::with_capacity(pr.blocks.len());
    let mut s: Vec<BlockValue> = Vec::with_capacity(pr.blocks.len());
    for data in &pr.blocks {
        let (n, a_norms, c_norm): (usize, Vec<(usize, f64)>, f64) = match data {
            Data::Dense(d) => (
                d.c.nrows(),
                d.a.iter().map(|(i, e)| (*i, e.iter().map(|t| t.2 * t.2).sum::<f64>().sqrt())).collect(),
                d.c.norm(),
            ),
            Data::Diag(d) => {
                let mut per: Vec<f64> = vec![0.0; pr.m];
                for list in &d.a {
                    for &(i, v) in list {
                        per[i] += v * v;
                    }
                }
                (
                    d.c.len(),
                    per.iter().enumerate().filter(|p| *p.1 > 0.0).map(|(i, v)| (i, v.sqrt())).collect(),
                    d.c.norm(),
                )
            }
        };
        let nf = n as f64;
        let mut xi: f64 = 10.0f64.max(nf.sqrt());
        let mut eta: f64 = 10.0f64.max(nf.sqrt()).max(c_norm);
        for &(i, an) in &a_norms {
            xi = xi.max(nf.sqrt() * (1.0 + pr.b[i].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        match data {
            Data::Dense(_) => {
                x.push(BlockValue::Dense(DMatrix::identity(n, n) * xi));
                s.push(BlockValue::Dense(DMatrix::identity(n, n) * eta));
            }
            Data::Diag(_) => {
                x.push(BlockValue::Diagonal(DVector::from_element(n, xi)));
                s.push(BlockValue::Diagonal(DVector::from_element(n, eta)));
            }
        }
    }
    let mut y = DVector::zeros(pr.m);
    let x0_norm = norm(&x);

    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut best: Option<(f64, Vec<BlockValue>, DVector<f64>, Vec<BlockValue>)> = None;
    let mut small_steps = 0;
    for iter in 0..settings.max_iter {
        iterations = iter;
        let ax = pr.apply_a(&x);
        let rp = &pr.b - &ax;
        let aty = pr.apply_at(&y);
        let mut rd = lin(1.0, &c, -1.0, &s);
        axpy(-1.0, &aty, &mut rd);
        let pobj = inner(&c, &x);
        let dobj = pr.b.dot(&y);
        let gap = inner(&x, &s);
        let mu = gap / pr.cone_dim;
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.norm() / (1.0 + norm_b);
        let dinf = norm(&rd) / (1.0 + norm_c);
        let merit = rel_gap.max(pinf).max(dinf);
        if best.as_ref().map_or(true, |b| merit < b.0) {
            best = Some((merit, x.clone(), y.clone(), s.clone()));
        }
        if merit <= settings.tol {
            status = SdpStatus::Optimal;
            break;
        }
        // Rays: a primal X with A(X) ≈ 0 and ⟨C,X⟩ < 0 shows S ⪰ 0 is infeasible;
        // a dual y growing along a direction with bᵀy > 0 shows unboundedness.
        let x_ratio = norm(&x) / (1.0 + x0_norm);
        if pobj < 0.0 && x_ratio > 1e8 && ax.norm() <= 1e-6 * (-pobj) {
            status = SdpStatus::Infeasible;
            break;
        }
        let cm_rd = norm(&lin(1.0, &c, -1.0, &rd));
        if dobj > 0.0 && y.norm() > 1e8 * (1.0 + norm_c) && cm_rd <= 1e-6 * dobj.max(0.0) + 1e-300 {
            status = SdpStatus::Unbounded;
            break;
        }
        let Some(z) = inverse_pd(&s) else {
            break;
        };
        let schur = pr.schur(&x, &z);
        // A(X Rd Z) and A(Z) are shared by predictor and corrector.
        let x_rd_z: Vec<BlockValue> = x
            .iter()
            .zip(&rd)
            .zip(&z)
            .map(|((xv, rv), zv)| match (xv, rv, zv) {
                (BlockValue::Dense(a), BlockValue::Dense(b), BlockValue::Dense(c)) => {
                    BlockValue::Dense(sym(a * b * c))
                }
                (BlockValue::Diagonal(a), BlockValue::Diagonal(b), BlockValue::Diagonal(c)) => {
                    BlockValue::Diagonal(a.component_mul(b).component_mul(c))
                }
                _ => unreachable!("block kinds are fixed at preparation"),
            })
            .collect();
        let a_xrdz = pr.apply_a(&x_rd_z);
        let a_z = pr.apply_a(&z);

        let direction = |sigma_mu: f64, corr: Option<&Direction>| -> Option<Direction> {
            let mut rhs = &pr.b + &a_xrdz - &a_z * sigma_mu;
            let corr_z: Option<Vec<BlockValue>> = corr.map(|cd| {
                cd.dx
                    .iter()
                    .zip(&cd.ds)
                    .zip(&z)
                    .map(|((a, b), c)| match (a, b, c) {
                        (BlockValue::Dense(a), BlockValue::Dense(b), BlockValue::Dense(c)) => {
                            BlockValue::Dense(a * b * c)
                        }
                        (BlockValue::Diagonal(a), BlockValue::Diagonal(b), BlockValue::Diagonal(c)) => {
                            BlockValue::Diagonal(a.component_mul(b).component_mul(c))
                        }
                        _ => unreachable!("block kinds are fixed at preparation"),
                    })
                    .collect()
            });
            if let Some(cz) = &corr_z {
                let symmetric: Vec<BlockValue> = cz
                    .iter()
                    .map(|v| match v {
                        BlockValue::Dense(m) => BlockValue::Dense(sym(m.clone())),
                        d => d.clone(),
                    })
                    .collect();
                rhs += pr.apply_a(&symmetric);
            }
            let dy = solve_linear(&schur, &rhs)?;
            let mut ds = rd.clone();
            axpy(-1.0, &pr.apply_at(&dy), &mut ds);
            let dx: Vec<BlockValue> = x
                .iter()
                .zip(&ds)
                .zip(&z)
                .enumerate()
                .map(|(k, ((xv, dsv), zv))| match (xv, dsv, zv) {
                    (BlockValue::Dense(xm), BlockValue::Dense(dsm), BlockValue::Dense(zm)) => {
                        let mut h = zm * sigma_mu - xm - xm * dsm * zm;
                        if let Some(cz) = &corr_z {
                            if let BlockValue::Dense(c) = &cz[k] {
                                h -= c;
                            }
                        }
                        BlockValue::Dense(sym(h))
                    }
                    (BlockValue::Diagonal(xd), BlockValue::Diagonal(dsd), BlockValue::Diagonal(zd)) => {
                        let mut h = zd * sigma_mu - xd - xd.component_mul(dsd).component_mul(zd);
                        if let Some(cz) = &corr_z {
                            if let BlockValue::Diagonal(c) = &cz[k] {
                                h -= c;
                            }
                        }
                        BlockValue::Diagonal(h)
                    }
                    _ => unreachable!("block kinds are fixed at preparation"),
                })
                .collect();
            Some(Direction { dx, dy, ds })
        };

        let Some(pred) = direction(0.0, None) else {
            break;
        };
        let ap = max_step(&x, &pred.dx).min(1.0);
        let ad = max_step(&s, &pred.ds).min(1.0);
        let mu_aff = inner(&lin(1.0, &x, ap, &pred.dx), &lin(1.0, &s, ad, &pred.ds)) / pr.cone_dim;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let Some(dir) = direction(sigma * mu, Some(&pred)) else {
            break;
        };
        let ap = (settings.step_fraction * max_step(&x, &dir.dx)).min(1.0);
        let ad = (settings.step_fraction * max_step(&s, &dir.ds)).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            small_steps += 1;
            if small_steps > 3 {
                break;
            }
        }
        axpy(ap, &dir.dx, &mut x);
        y += &dir.dy * ad;
        axpy(ad, &dir.ds, &mut s);
        iterations = iter + 1;
    }
    if status == SdpStatus::MaxIter {
        if let Some((merit, bx, by, bs)) = best.take() {
            x = bx;
            y = by;
            s = bs;
            if merit <= settings.tol {
                status = SdpStatus::Optimal;
            } else if merit <= 1e3 * settings.tol {
                status = SdpStatus::NearOptimal;
            }
        }
    }
    let rp = &pr.b - pr.apply_a(&x);
    let mut rd = lin(1.0, &c, -1.0, &s);
    axpy(-1.0, &pr.apply_at(&y), &mut rd);
    let primal_objective = inner(&c, &x);
    let dual_objective = pr.b.dot(&y);
    Ok(SdpSolution {
        status,
        primal_objective,
        dual_objective,
        relative_gap: (primal_objective - dual_objective).abs()
            / (1.0 + primal_objective.abs() + dual_objective.abs()),
        primal_infeasibility: rp.norm() / (1.0 + norm_b),
        dual_infeasibility: norm(&rd) / (1.0 + norm_c),
        x,
        y: y.iter().copied().collect(),
        s,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse(entries: &[(usize, usize, f64)]) -> SymSparse {
        SymSparse { entries: entries.to_vec() }
    }

    /// min ⟨C, X⟩ over 2x2 X ⪰ 0 with Tr X = 1: the smallest eigenvalue of C.
    #[test]
    fn smallest_eigenvalue_program() {
        let p = SdpProblem {
            blocks: vec![BlockSpec { kind: BlockKind::Psd, size: 2 }],
            objective: vec![sparse(&[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 3.0)])],
            constraints: vec![Constraint { coeffs: vec![(0, sparse(&[(0, 0, 1.0), (1, 1, 1.0)]))], rhs: 1.0 }],
        };
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let expect = 2.5 - 0.5 * 5.0f64.sqrt();
        assert!((sol.primal_objective - expect).abs() < 1e-7, "{}", sol.primal_objective);
        assert!((sol.dual_objective - expect).abs() < 1e-7);
    }

    /// A small LP: min x1 + 2 x2 s.t. x1 + x2 = 1, x ≥ 0.
    #[test]
    fn linear_program() {
        let p = SdpProblem {
            blocks: vec![BlockSpec { kind: BlockKind::Diagonal, size: 2 }],
            objective: vec![sparse(&[(0, 0, 1.0), (1, 1, 2.0)])],
            constraints: vec![Constraint { coeffs: vec![(0, sparse(&[(0, 0, 1.0), (1, 1, 1.0)]))], rhs: 1.0 }],
        };
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value() - 1.0).abs() < 1e-7);
    }

    /// max y s.t. -y ≥ 0 and y - 1 ≥ 0 has no feasible point.
    #[test]
    fn detects_infeasible_lmi() {
        let p = SdpProblem {
            blocks: vec![BlockSpec { kind: BlockKind::Diagonal, size: 2 }],
            objective: vec![sparse(&[(1, 1, -1.0)])],
            constraints: vec![Constraint { coeffs: vec![(0, sparse(&[(0, 0, 1.0), (1, 1, -1.0)]))], rhs: 1.0 }],
        };
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    /// max y s.t. 1 + y ≥ 0 is unbounded.
    #[test]
    fn detects_unbounded() {
        let p = SdpProblem {
            blocks: vec![BlockSpec { kind: BlockKind::Diagonal, size: 1 }],
            objective: vec![sparse(&[(0, 0, 1.0)])],
            constraints: vec![Constraint { coeffs: vec![(0, sparse(&[(0, 0, -1.0)]))], rhs: 1.0 }],
        };
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Unbounded);
    }
}
