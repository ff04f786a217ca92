//! Reading and writing the SDPA sparse (`.dat-s`) format.
//!
//! SDPA states its primal as `min cᵀx s.t. Σ F_i x_i - F_0 ⪰ 0`. Our dual
//! side `max bᵀy s.t. C - Σ y_i A_i ⪰ 0` maps onto it with `x = y`,
//! `c = -b`, `F_i = -A_i` and `F_0 = -C`, so SDPA optimal values are the
//! negatives of ours.

use std::fmt::Write as _;

use super::solver::{BlockKind, BlockSpec, Constraint, SdpProblem, SymSparse};
use crate::error::{Error, Result};

pub fn export_sdpa(problem: &SdpProblem) -> Result<String> {
    problem.validate()?;
    let mut out = String::new();
    let m = problem.constraints.len();
    let _ = writeln!(out, "\"exported by smollision");
    let _ = writeln!(out, "{m}");
    let _ = writeln!(out, "{}", problem.blocks.len());
    let sizes: Vec<String> = problem
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Psd => format!("{}", b.size),
            BlockKind::Diagonal => format!("-{}", b.size),
        })
        .collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let costs: Vec<String> = problem.constraints.iter().map(|c| format!("{:e}", -c.rhs)).collect();
    let _ = writeln!(out, "{}", costs.join(" "));
    let mut emit = |mat: usize, block: usize, s: &SymSparse| {
        let mut s = s.clone();
        s.canonicalize();
        for &(i, j, v) in &s.entries {
            let _ = writeln!(out, "{mat} {} {} {} {:e}", block + 1, i + 1, j + 1, -v);
        }
    };
    for (k, c) in problem.objective.iter().enumerate() {
        emit(0, k, c);
    }
    for (i, con) in problem.constraints.iter().enumerate() {
        for (k, s) in &con.coeffs {
            emit(i + 1, *k, s);
        }
    }
    Ok(out)
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let trimmed = line.trim_start();
            if trimmed.starts_with('"') || trimmed.starts_with('*') {
                continue;
            }
            for tok in line.split(|c: char| c.is_whitespace() || "{}(),".contains(c)) {
                if !tok.is_empty() {
                    items.push((n + 1, tok));
                }
            }
        }
        Self { items, pos: 0 }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).or(self.items.last()).map_or(1, |t| t.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let line = self.line();
        let t = self.items.get(self.pos).copied().ok_or_else(|| Error::Parse {
            line,
            message: format!("unexpected end of input, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn int(&mut self, what: &str) -> Result<i64> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| Error::Parse { line, message: format!("expected {what}, found {t:?}") })
    }

    fn float(&mut self, what: &str) -> Result<f64> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| Error::Parse { line, message: format!("expected {what}, found {t:?}") })
    }

    fn done(&self) -> bool {
        self.pos >= self.items.len()
    }
}

pub fn import_sdpa(text: &str) -> Result<SdpProblem> {
    let mut tk = Tokens::new(text);
    let m = usize::try_from(tk.int("number of variables")?)
        .map_err(|_| Error::Parse { line: tk.line(), message: "negative variable count".into() })?;
    let nb = usize::try_from(tk.int("number of blocks")?)
        .map_err(|_| Error::Parse { line: tk.line(), message: "negative block count".into() })?;
    let mut blocks = Vec::with_capacity(nb);
    for _ in 0..nb {
        let s = tk.int("block size")?;
        blocks.push(if s < 0 {
            BlockSpec { kind: BlockKind::Diagonal, size: (-s) as usize }
        } else {
            BlockSpec { kind: BlockKind::Psd, size: s as usize }
        });
    }
    let mut constraints: Vec<Constraint> =
        (0..m).map(|_| Constraint { coeffs: Vec::new(), rhs: 0.0 }).collect();
    for c in constraints.iter_mut() {
        c.rhs = -tk.float("objective coefficient")?;
    }
    let mut objective = vec![SymSparse::default(); nb];
    while !tk.done() {
        let line = tk.line();
        let mat = tk.int("matrix number")?;
        let blk = tk.int("block number")?;
        let i = tk.int("row index")?;
        let j = tk.int("column index")?;
        let v = tk.float("entry value")?;
        let bad = |message: String| Error::Parse { line, message };
        if mat < 0 || mat as usize > m {
            return Err(bad(format!("matrix number {mat} out of range")));
        }
        if blk < 1 || blk as usize > nb {
            return Err(bad(format!("block number {blk} out of range")));
        }
        let k = blk as usize - 1;
        let size = blocks[k].size as i64;
        if i < 1 || j < 1 || i > size || j > size {
            return Err(bad(format!("index ({i}, {j}) out of range for block {blk}")));
        }
        if blocks[k].kind == BlockKind::Diagonal && i != j {
            return Err(bad(format!("off-diagonal entry in diagonal block {blk}")));
        }
        let (i, j) = (i as usize - 1, j as usize - 1);
        if mat == 0 {
            objective[k].push(i, j, -v);
        } else {
            let con = &mut constraints[mat as usize - 1];
            match con.coeffs.iter_mut().find(|(kk, _)| *kk == k) {
                Some((_, s)) => s.push(i, j, -v),
                None => {
                    let mut s = SymSparse::default();
                    s.push(i, j, -v);
                    con.coeffs.push((k, s));
                }
            }
        }
    }
    for s in objective.iter_mut() {
        s.canonicalize();
    }
    for c in constraints.iter_mut() {
        for (_, s) in c.coeffs.iter_mut() {
            s.canonicalize();
        }
    }
    let p = SdpProblem { blocks, objective, constraints };
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermitianOperator;
    use crate::sdp::{formulate_d2_smooth, solve, SdpSettings, Side};

    fn canonical(mut p: SdpProblem) -> SdpProblem {
        for s in p.objective.iter_mut() {
            s.canonicalize();
        }
        for c in p.constraints.iter_mut() {
            for (_, s) in c.coeffs.iter_mut() {
                s.canonicalize();
            }
            c.coeffs.sort_by_key(|x| x.0);
        }
        p
    }

    #[test]
    fn round_trip_is_exact() {
        let rho = HermitianOperator::from_parts(2, &[0.7, 0.2, 0.2, 0.3], &[0.0, 0.1, -0.1, 0.0]).unwrap();
        let sigma = HermitianOperator::from_diagonal(&[0.5, 0.5]);
        let p = formulate_d2_smooth(&rho, &sigma, 0.1, Side::Primal).unwrap();
        let text = export_sdpa(&p).unwrap();
        let back = import_sdpa(&text).unwrap();
        assert_eq!(canonical(p.clone()), canonical(back.clone()));
        let a = solve(&p, &SdpSettings::default()).unwrap();
        let b = solve(&back, &SdpSettings::default()).unwrap();
        assert_eq!(a.dual_objective, b.dual_objective);
    }

    #[test]
    fn reports_parse_location() {
        let text = "2\n1\n2\n1.0 2.0\n0 1 1 1 x\n";
        match import_sdpa(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn accepts_punctuation_and_comments() {
        let text = "\"a comment\n* another\n1 =mDIM\n1\n{-2}\n(1.0)\n0 1 1 1 -1.0\n1 1 1 1 1.0\n1 1 2 2 1.0\n";
        let p = import_sdpa(text.replace("=mDIM", "").as_str()).unwrap();
        assert_eq!(p.blocks[0], BlockSpec { kind: BlockKind::Diagonal, size: 2 });
        assert_eq!(p.constraints[0].rhs, -1.0);
    }
}
