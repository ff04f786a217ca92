//! Finite hash families `X → Z` and the extraction map `ρ_XE ↦ ρ^f_ZE`.
//!
//! Inputs are integers `x = (x_{m-1} … x_0)` in binary. A Toeplitz member is
//! indexed by an `(m + k - 1)`-bit seed whose bit `j` fills the diagonal
//! `col - row = j - (k - 1)` of the `k × m` matrix over GF(2).

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;

/// Families with more members than this are not enumerated.
pub const MAX_MEMBERS: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Toeplitz,
    #[serde(alias = "exhaustive")]
    ExhaustiveAllFunctions,
    Singleton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weights {
    Uniform,
    Explicit(Vec<f64>),
}

/// Family description as it appears in configuration files: `{kind, m, k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub m: u32,
    pub k: u32,
}

impl FamilySpec {
    pub fn build(&self) -> Result<HashFamily> {
        match self.kind {
            FamilyKind::Toeplitz => HashFamily::toeplitz(self.m, self.k),
            FamilyKind::ExhaustiveAllFunctions => HashFamily::exhaustive(1 << self.m, 1 << self.k),
            FamilyKind::Singleton => HashFamily::singleton(vec![0; 1 << self.m], 1 << self.k),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HashFamily {
    kind: FamilyKind,
    inputs: usize,
    outputs: usize,
    /// Bit lengths, meaningful for Toeplitz families.
    m: u32,
    k: u32,
    weights: Weights,
    /// The only member of a singleton family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: FamilyKind,
    pub index: u64,
}

/// A materialized function `X → Z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashFunction {
    pub table: Vec<usize>,
    pub outputs: usize,
    pub provenance: Provenance,
}

impl HashFunction {
    pub fn new(table: Vec<usize>, outputs: usize, provenance: Provenance) -> Result<Self> {
        if let Some(&z) = table.iter().find(|&&z| z >= outputs) {
            return Err(Error::InvalidInput(format!("hash output {z} out of range 0..{outputs}")));
        }
        Ok(Self { table, outputs, provenance })
    }

    pub fn inputs(&self) -> usize {
        self.table.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }
}

impl HashFamily {
    /// The `2^{m+k-1}` Toeplitz matrices mapping `m` bits to `k` bits.
    pub fn toeplitz(m: u32, k: u32) -> Result<Self> {
        if m == 0 || k == 0 || m + k - 1 > 40 {
            return Err(Error::InvalidInput(format!("Toeplitz family needs positive, small m and k, got m={m}, k={k}")));
        }
        Ok(Self { kind: FamilyKind::Toeplitz, inputs: 1 << m, outputs: 1 << k, m, k, weights: Weights::Uniform, table: None })
    }

    /// Every function from `inputs` values to `outputs` values.
    pub fn exhaustive(inputs: usize, outputs: usize) -> Result<Self> {
        if inputs == 0 || outputs == 0 || outputs > 8 {
            return Err(Error::InvalidInput(format!("exhaustive family needs inputs ≥ 1 and 1 ≤ outputs ≤ 8, got {inputs} → {outputs}")));
        }
        Ok(Self {
            kind: FamilyKind::ExhaustiveAllFunctions,
            inputs,
            outputs,
            m: bits(inputs),
            k: bits(outputs),
            weights: Weights::Uniform,
            table: None,
        })
    }

    /// A family containing only the given function.
    pub fn singleton(table: Vec<usize>, outputs: usize) -> Result<Self> {
        let f = HashFunction::new(table, outputs, Provenance { kind: FamilyKind::Singleton, index: 0 })?;
        Ok(Self {
            kind: FamilyKind::Singleton,
            inputs: f.inputs(),
            outputs,
            m: bits(f.inputs()),
            k: bits(outputs),
            weights: Weights::Uniform,
            table: Some(f.table),
        })
    }

    /// Replaces the uniform weights by an explicit distribution over members.
    pub fn with_weights(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() as u128 != self.member_count() {
            return Err(Error::DimensionMismatch { expected: self.member_count() as usize, found: w.len() });
        }
        if w.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidInput("member weights must be nonnegative".into()));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(total));
        }
        self.weights = Weights::Explicit(w);
        Ok(self)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn member_count(&self) -> u128 {
        match self.kind {
            FamilyKind::Toeplitz => 1u128 << (self.m + self.k - 1),
            FamilyKind::ExhaustiveAllFunctions => (self.outputs as u128).checked_pow(self.inputs as u32).unwrap_or(u128::MAX),
            FamilyKind::Singleton => 1,
        }
    }

    fn weight(&self, index: u64) -> f64 {
        match &self.weights {
            Weights::Uniform => 1.0 / self.member_count() as f64,
            Weights::Explicit(w) => w[index as usize],
        }
    }

    /// Member `index`, computed without touching any other member.
    pub fn member(&self, index: u64) -> Result<HashFunction> {
        if index as u128 >= self.member_count() {
            return Err(Error::InvalidInput(format!("member {index} out of range")));
        }
        let provenance = Provenance { kind: self.kind, index };
        let table = match self.kind {
            FamilyKind::Toeplitz => {
                let (m, k) = (self.m as i64, self.k as i64);
                (0..self.inputs)
                    .map(|x| {
                        let mut z = 0;
                        for i in 0..k {
                            let mut bit = 0;
                            for j in 0..m {
                                let seed_bit = (index >> (j - i + k - 1)) & 1;
                                bit ^= seed_bit as usize & ((x >> j) & 1);
                            }
                            z |= bit << i;
                        }
                        z
                    })
                    .collect()
            }
            FamilyKind::ExhaustiveAllFunctions => {
                // base-|Z| digits of the index, least significant digit for x = 0
                let mut rest = index as usize;
                (0..self.inputs)
                    .map(|_| {
                        let z = rest % self.outputs;
                        rest /= self.outputs;
                        z
                    })
                    .collect()
            }
            FamilyKind::Singleton => self.table.clone().expect("singleton family stores its table"),
        };
        Ok(HashFunction { table, outputs: self.outputs, provenance })
    }

    /// All members with their weights, in index order.
    pub fn enumerate(&self) -> Result<impl Iterator<Item = (HashFunction, f64)> + '_> {
        let n = self.member_count();
        if n > MAX_MEMBERS {
            return Err(Error::TooLarge(format!(
                "family has {n} members, more than the {MAX_MEMBERS} that are enumerated; sample members instead"
            )));
        }
        Ok((0..n as u64).map(move |i| (self.member(i).expect("index in range"), self.weight(i))))
    }

    /// A member drawn according to the family weights.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<HashFunction> {
        let index = match &self.weights {
            Weights::Uniform => {
                let n = self.member_count();
                if n > u64::MAX as u128 {
                    return Err(Error::TooLarge(format!("family has {n} members")));
                }
                rng.gen_range(0..n as u64)
            }
            Weights::Explicit(w) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                w.iter().position(|&p| {
                    acc += p;
                    u < acc
                })
                .unwrap_or(w.len() - 1) as u64
            }
        };
        self.member(index)
    }
}

fn bits(n: usize) -> u32 {
    n.next_power_of_two().trailing_zeros()
}

/// Collision probability of one input pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairCollision {
    pub x: usize,
    pub x_prime: usize,
    pub probability: Ratio<i128>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniversalityReport {
    pub target: Ratio<i128>,
    pub pairs: Vec<PairCollision>,
    pub passes: bool,
}

impl UniversalityReport {
    pub fn worst(&self) -> Option<&PairCollision> {
        self.pairs.iter().max_by(|a, b| a.probability.cmp(&b.probability))
    }
}

/// Exact collision probabilities `Pr_f[f(x) = f(x')]` for every pair
/// `x < x'`. Explicit weights are converted to the nearest small rational.
pub fn universality_check(family: &HashFamily) -> Result<UniversalityReport> {
    let n = family.inputs();
    let weight = |i: u64| -> Result<Ratio<i128>> {
        Ok(match family.weights() {
            Weights::Uniform => Ratio::new(1, family.member_count() as i128),
            Weights::Explicit(w) => Ratio::approximate_float(w[i as usize])
                .ok_or_else(|| Error::InvalidInput(format!("weight {} has no rational form", w[i as usize])))?,
        })
    };
    let mut pairs: Vec<PairCollision> = (0..n)
        .flat_map(|x| (x + 1..n).map(move |y| PairCollision { x, x_prime: y, probability: Ratio::from_integer(0) }))
        .collect();
    for (i, (f, _)) in family.enumerate()?.enumerate() {
        let w = weight(i as u64)?;
        for pc in pairs.iter_mut() {
            if f.apply(pc.x) == f.apply(pc.x_prime) {
                pc.probability += w;
            }
        }
    }
    let target = Ratio::new(1, family.outputs() as i128);
    let passes = pairs.iter().all(|p| p.probability == target);
    Ok(UniversalityReport { target, pairs, passes })
}

/// `R^f_{E,z} = Σ_{x : f(x) = z} R_{E,x}` for a list of blocks indexed by `x`.
pub fn extraction_map(blocks: &[HermitianOperator], f: &HashFunction) -> Result<Vec<HermitianOperator>> {
    if blocks.len() != f.inputs() {
        return Err(Error::DimensionMismatch { expected: f.inputs(), found: blocks.len() });
    }
    let d = blocks.first().map_or(1, HermitianOperator::dim);
    let mut out = vec![HermitianOperator::zeros(d); f.outputs];
    for (x, b) in blocks.iter().enumerate() {
        if b.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: b.dim() });
        }
        let z = f.apply(x);
        out[z] = &out[z] + b;
    }
    Ok(out)
}
