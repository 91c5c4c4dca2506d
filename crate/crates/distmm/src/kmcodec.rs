//! Operational Monte-Carlo realization of the (n, eps)-coding scheme:
//! random linear syndrome encoders at both sources and an exact maximum-
//! likelihood decoder for the modulo-q sum sequence.
//!
//! Codes are nested: the k-row code is the first k rows of a master n x n
//! matrix drawn once from the seed, so adding syndrome rows shrinks every
//! decoding coset and the per-trial error indicator is monotone in k.
//! Decoding enumerates the affine solution coset exactly (desk scale makes
//! exact ML cheaper than tuning a typical-set decoder).

use crate::entropy::{pushforward, EntropyError};
use crate::field::PrimeModulus;
use crate::schemes::{ip_encode, Side};
use crate::sources::{JointSourceModel, ModelError};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Exhaustive-decode block-length limits per field size.
pub const MAX_N_BINARY: usize = 24;
pub const MAX_N_TERNARY: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("syndrome length k = {k} must satisfy 1 <= k <= n = {n}")]
    BadSyndromeLength { k: usize, n: usize },
    #[error("block length {n} exceeds the exhaustive-decode limit {limit} for q = {q}")]
    BlockTooLong { n: usize, limit: usize, q: u32 },
    #[error("word length {0} does not match block length {1}")]
    LengthMismatch(usize, usize),
    #[error("syndrome is not in the image of the code")]
    InfeasibleSyndrome,
    #[error("symbol model: {0}")]
    BadModel(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

fn exhaustive_limit(q: PrimeModulus) -> usize {
    if q.value() == 2 {
        MAX_N_BINARY
    } else {
        MAX_N_TERNARY
    }
}

/// Per-symbol distribution of one coordinate of Z, i.i.d. across the block.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolModel {
    q: PrimeModulus,
    probs: Vec<f64>,
    log2_probs: Vec<f64>,
}

impl SymbolModel {
    pub fn new(q: PrimeModulus, probs: Vec<f64>) -> Result<Self, CodecError> {
        if probs.len() != q.value() as usize {
            return Err(CodecError::BadModel(format!(
                "{} probabilities for q = {}",
                probs.len(),
                q.value()
            )));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > 1e-9 {
            return Err(CodecError::BadModel(format!(
                "probabilities sum to {total}"
            )));
        }
        let log2_probs = probs
            .iter()
            .map(|&p| if p > 0.0 { p.log2() } else { f64::NEG_INFINITY })
            .collect();
        Ok(Self {
            q,
            probs,
            log2_probs,
        })
    }

    pub fn bernoulli(p: f64) -> Result<Self, CodecError> {
        let q = PrimeModulus::new(2).expect("2 is prime");
        Self::new(q, vec![1.0 - p, p])
    }

    pub fn q(&self) -> PrimeModulus {
        self.q
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn entropy_bits(&self) -> f64 {
        crate::entropy::entropy_bits(&self.probs)
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (sym, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return sym as u32;
            }
        }
        (self.probs.len() - 1) as u32
    }

    /// Log-probability of a word, computed from symbol counts so that words
    /// with equal counts score bitwise-identically (float-stable ties).
    fn score(&self, counts: &[u32]) -> f64 {
        let mut s = 0.0;
        for (sym, &c) in counts.iter().enumerate() {
            if c > 0 {
                s += c as f64 * self.log2_probs[sym];
            }
        }
        s
    }
}

/// A k x n syndrome code over F_q, the k-row prefix of a seeded master matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCode {
    q: PrimeModulus,
    n: usize,
    k: usize,
    rows: Vec<Vec<u32>>,
    seed: u64,
}

/// Uniform seeded matrix; deterministic given (n, k, q, seed), and the k-row
/// code is a prefix of the (k+1)-row code with the same seed.
pub fn gen_code(n: usize, k: usize, q: PrimeModulus, seed: u64) -> Result<LinearCode, CodecError> {
    if k == 0 || k > n {
        return Err(CodecError::BadSyndromeLength { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(0..q.value())).collect())
        .collect();
    Ok(LinearCode {
        q,
        n,
        k,
        rows: rows.into_iter().take(k).collect(),
        seed,
    })
}

impl LinearCode {
    /// Explicit matrix, mainly for tests and the k = n identity case.
    pub fn from_rows(rows: Vec<Vec<u32>>, q: PrimeModulus) -> Result<Self, CodecError> {
        let k = rows.len();
        let n = rows.first().map(|r| r.len()).unwrap_or(0);
        if k == 0 || n == 0 || k > n || rows.iter().any(|r| r.len() != n) {
            return Err(CodecError::BadSyndromeLength { k, n });
        }
        Ok(Self {
            q,
            n,
            k,
            rows,
            seed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> PrimeModulus {
        self.q
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Rank of C over F_q.
    pub fn rank(&self) -> usize {
        let zeros = vec![0u32; self.k];
        let (_, basis) = self
            .solve(&zeros)
            .expect("homogeneous system is consistent");
        self.n - basis.len()
    }

    /// C z over F_q.
    pub fn syndrome(&self, z: &[u32]) -> Result<Vec<u32>, CodecError> {
        if z.len() != self.n {
            return Err(CodecError::LengthMismatch(z.len(), self.n));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let acc: u64 = row.iter().zip(z).map(|(&c, &x)| c as u64 * x as u64).sum();
                self.q.reduce(acc)
            })
            .collect())
    }

    /// Row-reduces C and returns (pivot columns, particular solution, null
    /// basis) for C z = s, or None when the system is inconsistent.
    fn solve(&self, s: &[u32]) -> Option<(Vec<u32>, Vec<Vec<u32>>)> {
        let q = self.q;
        let n = self.n;
        let mut aug: Vec<Vec<u32>> = self
            .rows
            .iter()
            .zip(s)
            .map(|(row, &si)| {
                let mut r = row.clone();
                r.push(si);
                r
            })
            .collect();
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(pivot_row) = (rank..aug.len()).find(|&r| aug[r][col] != 0) else {
                continue;
            };
            aug.swap(rank, pivot_row);
            let inv = q.inverse(aug[rank][col]).expect("nonzero pivot");
            for x in aug[rank].iter_mut() {
                *x = q.mul(*x, inv);
            }
            for r in 0..aug.len() {
                if r != rank && aug[r][col] != 0 {
                    let factor = aug[r][col];
                    for c in 0..=n {
                        let sub = q.mul(factor, aug[rank][c]);
                        aug[r][c] = q.sub(aug[r][c], sub);
                    }
                }
            }
            pivot_cols.push(col);
            rank += 1;
            if rank == aug.len() {
                break;
            }
        }
        // inconsistent when a zero row has nonzero rhs
        for row in &aug[rank..] {
            if row[n] != 0 {
                return None;
            }
        }
        let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
        let mut particular = vec![0u32; n];
        for (r, &col) in pivot_cols.iter().enumerate() {
            particular[col] = aug[r][n];
        }
        let basis: Vec<Vec<u32>> = free_cols
            .iter()
            .map(|&fc| {
                let mut v = vec![0u32; n];
                v[fc] = 1;
                for (r, &pc) in pivot_cols.iter().enumerate() {
                    v[pc] = q.neg(aug[r][fc]);
                }
                v
            })
            .collect();
        Some((particular, basis))
    }

    /// Exact ML decoding: the most probable word in the solution coset of
    /// C z = s under the i.i.d. symbol model, ties broken lexicographically.
    pub fn ml_decode(&self, s: &[u32], model: &SymbolModel) -> Result<Vec<u32>, CodecError> {
        if s.len() != self.k {
            return Err(CodecError::LengthMismatch(s.len(), self.k));
        }
        let limit = exhaustive_limit(self.q);
        if self.n > limit {
            return Err(CodecError::BlockTooLong {
                n: self.n,
                limit,
                q: self.q.value(),
            });
        }
        let (particular, basis) = self.solve(s).ok_or(CodecError::InfeasibleSyndrome)?;
        let q = self.q;
        let qv = q.value() as usize;
        let dim = basis.len();

        let mut current = particular;
        let mut counts = vec![0u32; qv];
        for &sym in &current {
            counts[sym as usize] += 1;
        }
        let mut best = current.clone();
        let mut best_score = model.score(&counts);

        // walk the coset with a mixed-radix odometer; a digit stepping from
        // c to c+1 adds its basis vector once, and a wrap adds it once more
        // (q additions in total, i.e. none)
        let mut digits = vec![0u32; dim];
        let total: u64 = (qv as u64).checked_pow(dim as u32).expect("within limits");
        let add_vec = |z: &mut Vec<u32>, counts: &mut Vec<u32>, v: &[u32]| {
            for (slot, &inc) in z.iter_mut().zip(v) {
                if inc != 0 {
                    counts[*slot as usize] -= 1;
                    *slot = q.add(*slot, inc);
                    counts[*slot as usize] += 1;
                }
            }
        };
        for _ in 1..total {
            let mut d = 0;
            loop {
                add_vec(&mut current, &mut counts, &basis[d]);
                digits[d] += 1;
                if digits[d] < qv as u32 {
                    break;
                }
                digits[d] = 0;
                d += 1;
            }
            let score = model.score(&counts);
            if score > best_score || (score == best_score && current < best) {
                best_score = score;
                best = current.clone();
            }
        }
        debug_assert_eq!(self.syndrome(&best)?, s);
        Ok(best)
    }
}

/// Aggregated result of a Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub trials: u64,
    pub decode_errors: u64,
    pub empirical_error_rate: f64,
    pub elapsed: Duration,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // stream 0 is reserved for code generation
    rng.set_stream(trial + 1);
    rng
}

/// Samples Z^n i.i.d. from the symbol model, encodes with the seeded nested
/// code, ML-decodes, and counts block errors. Deterministic given the seed;
/// trial t draws from the stream derived from (seed, t).
pub fn run_trials(
    model: &SymbolModel,
    n: usize,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<TrialReport, CodecError> {
    let code = gen_code(n, k, model.q(), seed)?;
    let start = Instant::now();
    let decode_errors = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let z: Vec<u32> = (0..n).map(|_| model.sample(&mut rng)).collect();
            let s = code.syndrome(&z).expect("length matches");
            let decoded = code.ml_decode(&s, model).expect("generated syndrome");
            u64::from(decoded != z)
        })
        .sum();
    Ok(TrialReport {
        n,
        k,
        q: model.q().value(),
        trials,
        decode_errors,
        empirical_error_rate: decode_errors as f64 / trials as f64,
        elapsed: start.elapsed(),
    })
}

/// Full-pipeline variant: Z is the stacked (m+1)-row inner-product message of
/// a vector source model, serialized coordinate by coordinate. Each of the
/// m+1 coordinate streams is decoded independently against its exact marginal
/// (the coordinates are treated as independent even though W depends on U, V;
/// a joint decoder could only do better). A trial errs if any coordinate
/// stream decodes wrongly.
pub fn run_joint_trials(
    source: &JointSourceModel,
    n: usize,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<TrialReport, CodecError> {
    let q = source.q();
    let code = gen_code(n, k, q, seed)?;
    let coords = source.m() + 1;
    // exact per-coordinate marginals of the stacked message
    let marginals: Vec<SymbolModel> = (0..coords)
        .map(|c| {
            let table = pushforward(source, |a, b| {
                let z = ip_encode(a, Side::A)
                    .expect("vector model")
                    .add(&ip_encode(b, Side::B).expect("vector model"))
                    .expect("same shape");
                z.get(c, 0)
            })?;
            let mut probs = vec![0.0; q.value() as usize];
            for (&sym, p) in table.iter() {
                probs[sym as usize] += p;
            }
            SymbolModel::new(q, probs)
        })
        .collect::<Result<_, CodecError>>()?;

    let start = Instant::now();
    let decode_errors = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            // n block positions, each an (m+1)-vector Z
            let mut streams: Vec<Vec<u32>> = vec![Vec::with_capacity(n); coords];
            for _ in 0..n {
                let (a, b) = source.sample_with(&mut rng);
                let z = ip_encode(&a, Side::A)
                    .expect("vector model")
                    .add(&ip_encode(&b, Side::B).expect("vector model"))
                    .expect("same shape");
                for (c, stream) in streams.iter_mut().enumerate() {
                    stream.push(z.get(c, 0));
                }
            }
            let err = streams.iter().zip(&marginals).any(|(stream, marginal)| {
                let s = code.syndrome(stream).expect("length matches");
                code.ml_decode(&s, marginal).expect("generated syndrome") != *stream
            });
            u64::from(err)
        })
        .sum();
    Ok(TrialReport {
        n,
        k,
        q: q.value(),
        trials,
        decode_errors,
        empirical_error_rate: decode_errors as f64 / trials as f64,
        elapsed: start.elapsed(),
    })
}
