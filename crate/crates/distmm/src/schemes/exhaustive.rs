//! Exhaustive decoding-identity verifiers.
//!
//! Each verifier walks every source pair of a given shape (or the
//! constraint-satisfying subset), runs encode -> combine -> decode, and counts
//! mismatches against the directly computed product. Work is partitioned
//! across threads by pair index.

use super::*;
use crate::field::mat_mul;
use rayon::prelude::*;

/// Outcome of one exhaustive sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub scheme: String,
    pub checked: u64,
    pub failures: u64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn pair_from_index(
    idx: u64,
    rows: usize,
    cols: usize,
    q: PrimeModulus,
) -> (FieldMatrix, FieldMatrix) {
    let per = (q.value() as u64).pow((rows * cols) as u32);
    let a = FieldMatrix::from_index(idx % per, rows, cols, q).expect("shape");
    let b = FieldMatrix::from_index(idx / per, rows, cols, q).expect("shape");
    (a, b)
}

fn sweep<F>(scheme: &str, q: PrimeModulus, rows: usize, cols: usize, check: F) -> VerifyReport
where
    F: Fn(&FieldMatrix, &FieldMatrix) -> Option<bool> + Sync,
{
    let per = (q.value() as u64).pow((rows * cols) as u32);
    let total = per * per;
    let (checked, failures) = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = pair_from_index(idx, rows, cols, q);
            match check(&a, &b) {
                None => (0u64, 0u64), // pair filtered out
                Some(true) => (1, 0),
                Some(false) => (1, 1),
            }
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    VerifyReport {
        scheme: scheme.to_string(),
        checked,
        failures,
    }
}

/// Inner-product scheme over all pairs in F_q^{m x 1} x F_q^{m x 1}.
pub fn verify_inner(q: PrimeModulus, m: usize) -> Result<VerifyReport, SchemeError> {
    if m == 0 || m % 2 != 0 {
        return Err(SchemeError::OddRows(m));
    }
    Ok(sweep("inner", q, m, 1, |a, b| {
        let msg = ip_message(a, b).expect("even m");
        let truth = mat_mul(&a.transpose(), b).expect("conformable").get(0, 0);
        Some(ip_decode(&msg) == truth)
    }))
}

/// Vector-wise embedding scheme over all pairs in F_q^{m x 1} x F_q^{m x 1}.
pub fn verify_embedding(q: PrimeModulus, m: usize) -> Result<VerifyReport, SchemeError> {
    if m == 0 {
        return Err(SchemeError::OddRows(m));
    }
    Ok(sweep("embedding", q, m, 1, |a, b| {
        let msg = emb_message(a, b).expect("valid vectors");
        let truth = mat_mul(&a.transpose(), b).expect("conformable").get(0, 0);
        Some(emb_decode(&msg) == truth)
    }))
}

/// Symmetric scheme over all pairs of F_q^{m x l} whose true product is
/// symmetric (the rest are skipped, not counted).
pub fn verify_symmetric(q: PrimeModulus, m: usize, l: usize) -> Result<VerifyReport, SchemeError> {
    if !q.is_odd() {
        return Err(SchemeError::BinaryUnsupported);
    }
    if m == 0 || m % 2 != 0 {
        return Err(SchemeError::OddRows(m));
    }
    Ok(sweep("sym", q, m, l, |a, b| {
        let truth = mat_mul(&a.transpose(), b).expect("conformable");
        if !truth.is_symmetric() {
            return None;
        }
        let d = sym_decode(&sym_message(a, b).expect("valid")).expect("odd q");
        Some(d == truth)
    }))
}

/// Constrained binary scheme over the pairs surviving rejection filtering.
pub fn verify_symmetric_binary(m: usize, l: usize) -> Result<VerifyReport, SchemeError> {
    if m == 0 || m % 2 != 0 {
        return Err(SchemeError::OddRows(m));
    }
    let q = PrimeModulus::new(2).expect("2 is prime");
    Ok(sweep("sym-binary", q, m, l, |a, b| {
        if !binary_constraints_hold(a, b).expect("even m") {
            return None;
        }
        let half = m / 2;
        let u = a
            .row_block(half, m)
            .unwrap()
            .add(&b.row_block(0, half).unwrap())
            .unwrap();
        let v = a
            .row_block(0, half)
            .unwrap()
            .add(&b.row_block(half, m).unwrap())
            .unwrap();
        let d = sym_binary_constrained_decode(&u, &v).expect("conformable");
        Some(d == mat_mul(&a.transpose(), b).expect("conformable"))
    }))
}

/// Square scheme over all pairs in F_q^{m x l} x F_q^{m x l}.
pub fn verify_square(q: PrimeModulus, m: usize, l: usize) -> Result<VerifyReport, SchemeError> {
    if !q.is_odd() {
        return Err(SchemeError::BinaryUnsupported);
    }
    if l < 2 {
        return Err(SchemeError::WidthTooSmall(l));
    }
    if m == 0 {
        return Err(SchemeError::OddRows(m));
    }
    Ok(sweep("square", q, m, l, |a, b| {
        let d = sq_decode(&sq_message(a, b).expect("valid")).expect("encoding pair");
        Some(d == mat_mul(&a.transpose(), b).expect("conformable"))
    }))
}

/// Entry-wise embedding baseline: all four binary pairs carried in F_3.
pub fn verify_entrywise() -> VerifyReport {
    let mut failures = 0;
    for a in 0..2u32 {
        for b in 0..2u32 {
            if entrywise_embed_decode((a + b) % 3) != a * b {
                failures += 1;
            }
        }
    }
    VerifyReport {
        scheme: "entrywise".to_string(),
        checked: 4,
        failures,
    }
}
