//! The structured encode/decode constructions.
//!
//! Four schemes plus the entry-wise embedding baseline. Each follows the same
//! shape: both sources apply a (generally nonlinear) mapping to their matrix,
//! the receiver obtains only the modulo-q sum of the two mapped values, and a
//! deterministic reconstruction recovers the target product from that sum.
//!
//! Block convention throughout: A = [A_1; A_2] stacks the first m/2 rows as
//! A_1 and the last m/2 rows as A_2.

use crate::field::{FieldError, FieldMatrix, PrimeModulus, ResidueScalar};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("row count {0} must be even")]
    OddRows(usize),
    #[error("expected a column vector, got {0} columns")]
    NotVector(usize),
    #[error("scheme requires q > 2")]
    BinaryUnsupported,
    #[error("scheme requires l >= 2, got {0}")]
    WidthTooSmall(usize),
    #[error("malformed message: off-diagonal consistency check failed at ({0}, {1})")]
    Inconsistent(usize, usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Which source a mapping half came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

// ---------------------------------------------------------------------------
// Inner products (l = 1) and symmetric matrix products (l >= 1) share the
// stacked mapping X_1 = [A_2; A_1; A_2^T A_1], X_2 = [B_1; B_2; B_1^T B_2].
// ---------------------------------------------------------------------------

/// Receiver view for the inner-product scheme: U, V in F_q^{m/2 x 1}, scalar W.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProductMessage {
    pub u: FieldMatrix,
    pub v: FieldMatrix,
    pub w: u32,
}

/// Receiver view for the symmetric scheme: matrix blocks of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMessage {
    pub u: FieldMatrix,
    pub v: FieldMatrix,
    pub w: FieldMatrix,
}

fn split_halves(x: &FieldMatrix) -> Result<(FieldMatrix, FieldMatrix), SchemeError> {
    let m = x.rows();
    if m % 2 != 0 {
        return Err(SchemeError::OddRows(m));
    }
    Ok((x.row_block(0, m / 2)?, x.row_block(m / 2, m)?))
}

/// Stacked source mapping for the symmetric scheme ((m+l) x l output).
/// Side A sends [A_2; A_1; A_2^T A_1]; side B sends [B_1; B_2; B_1^T B_2].
pub fn sym_encode(x: &FieldMatrix, side: Side) -> Result<FieldMatrix, SchemeError> {
    if !x.modulus().is_odd() {
        return Err(SchemeError::BinaryUnsupported);
    }
    stacked_encode(x, side)
}

/// Stacked source mapping for the inner-product scheme ((m+1) x 1 output).
/// Same construction as `sym_encode` with l = 1, but q = 2 is allowed.
pub fn ip_encode(x: &FieldMatrix, side: Side) -> Result<FieldMatrix, SchemeError> {
    if x.cols() != 1 {
        return Err(SchemeError::NotVector(x.cols()));
    }
    stacked_encode(x, side)
}

fn stacked_encode(x: &FieldMatrix, side: Side) -> Result<FieldMatrix, SchemeError> {
    let (x1, x2) = split_halves(x)?;
    let stacked = match side {
        Side::A => x2.vstack(&x1)?.vstack(&x2.transpose().mul(&x1)?)?,
        Side::B => x1.vstack(&x2)?.vstack(&x1.transpose().mul(&x2)?)?,
    };
    Ok(stacked)
}

fn split_message(z: &FieldMatrix) -> Result<SymmetricMessage, SchemeError> {
    let l = z.cols();
    let m = z.rows() - l; // stacked shape is (m + l) x l
    if m == 0 || m % 2 != 0 {
        return Err(SchemeError::OddRows(m));
    }
    Ok(SymmetricMessage {
        u: z.row_block(0, m / 2)?,
        v: z.row_block(m / 2, m)?,
        w: z.row_block(m, m + l)?,
    })
}

/// Combines the two stacked halves into (U, V, W) for l = 1.
pub fn ip_combine(x1: &FieldMatrix, x2: &FieldMatrix) -> Result<InnerProductMessage, SchemeError> {
    if x1.cols() != 1 {
        return Err(SchemeError::NotVector(x1.cols()));
    }
    let msg = split_message(&x1.add(x2)?)?;
    Ok(InnerProductMessage {
        w: msg.w.get(0, 0),
        u: msg.u,
        v: msg.v,
    })
}

/// Combines the two stacked halves into matrix (U, V, W).
pub fn sym_combine(x1: &FieldMatrix, x2: &FieldMatrix) -> Result<SymmetricMessage, SchemeError> {
    split_message(&x1.add(x2)?)
}

/// U^T V - W mod q; equals <A, B> for every encoding pair.
pub fn ip_decode(msg: &InnerProductMessage) -> u32 {
    let q = msg.u.modulus();
    let dot = msg
        .u
        .transpose()
        .mul(&msg.v)
        .expect("U and V have matching shape")
        .get(0, 0);
    q.sub(dot, msg.w)
}

/// inv(2) ((U^T V - W) + (U^T V - W)^T); equals A^T B whenever the true
/// product is symmetric. On a non-symmetric product this silently returns
/// its symmetrization, which the encoder cannot detect.
pub fn sym_decode(msg: &SymmetricMessage) -> Result<FieldMatrix, SchemeError> {
    let raw = msg.u.transpose().mul(&msg.v)?.sub(&msg.w)?;
    Ok(raw.symmetrize()?)
}

/// Convenience: full encode + combine for one source pair.
pub fn ip_message(a: &FieldMatrix, b: &FieldMatrix) -> Result<InnerProductMessage, SchemeError> {
    ip_combine(&ip_encode(a, Side::A)?, &ip_encode(b, Side::B)?)
}

pub fn sym_message(a: &FieldMatrix, b: &FieldMatrix) -> Result<SymmetricMessage, SchemeError> {
    sym_combine(&sym_encode(a, Side::A)?, &sym_encode(b, Side::B)?)
}

// ---------------------------------------------------------------------------
// Constrained binary symmetric scheme (q = 2).
// ---------------------------------------------------------------------------

/// The q = 2 constraints under which U^T V alone recovers D:
/// i) A_1^T B_1 = B_1^T A_1 (so W = 0), and ii) A_2^T A_1 = B_1^T B_2.
pub fn binary_constraints_hold(a: &FieldMatrix, b: &FieldMatrix) -> Result<bool, SchemeError> {
    let (a1, a2) = split_halves(a)?;
    let (b1, b2) = split_halves(b)?;
    let i = a1.transpose().mul(&b1)? == b1.transpose().mul(&a1)?;
    let ii = a2.transpose().mul(&a1)? == b1.transpose().mul(&b2)?;
    Ok(i && ii)
}

/// U^T V over F_2; equals D = A^T B when the encoding pair satisfies the
/// constraints checked by `binary_constraints_hold`. The caller enforces the
/// precondition; no error is raised here.
pub fn sym_binary_constrained_decode(
    u: &FieldMatrix,
    v: &FieldMatrix,
) -> Result<FieldMatrix, SchemeError> {
    Ok(u.transpose().mul(v)?)
}

// ---------------------------------------------------------------------------
// Vector-wise embedding (linear source mappings into Z_r).
// ---------------------------------------------------------------------------

/// r = 2(q-1)m for even m, 2(q-1)m + 1 for odd m.
pub fn embedding_modulus(q: PrimeModulus, m: usize) -> u64 {
    let base = 2 * (q.value() as u64 - 1) * m as u64;
    if m % 2 == 0 {
        base
    } else {
        base + 1
    }
}

/// One source's contribution to the embedding message.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingHalf {
    /// q = 2: a single mod-r linear sum plus the raw bit vector
    /// (the mod-2 part of the message).
    Binary {
        total: ResidueScalar,
        bits: FieldMatrix,
    },
    /// q > 2: per-entry residues plus the mod-q sum of squared entries.
    OddPrime {
        entries: Vec<ResidueScalar>,
        square_sum: u32,
        q: PrimeModulus,
    },
}

/// What the receiver sees after the structured combination.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingMessage {
    Binary {
        total: ResidueScalar,
        parity: FieldMatrix,
    },
    OddPrime {
        entry_sums: Vec<ResidueScalar>,
        square_sum: u32,
        q: PrimeModulus,
    },
}

pub fn emb_encode(x: &FieldMatrix, _side: Side) -> Result<EmbeddingHalf, SchemeError> {
    if x.cols() != 1 {
        return Err(SchemeError::NotVector(x.cols()));
    }
    let q = x.modulus();
    let m = x.rows();
    let r = embedding_modulus(q, m);
    if q.value() == 2 {
        let total: u64 = x.entries().iter().map(|&e| e as u64).sum();
        Ok(EmbeddingHalf::Binary {
            total: ResidueScalar::new(total, r),
            bits: x.clone(),
        })
    } else {
        let entries = x
            .entries()
            .iter()
            .map(|&e| ResidueScalar::new(e as u64, r))
            .collect();
        let mut square_sum = 0u32;
        for &e in x.entries() {
            square_sum = q.add(square_sum, q.mul(e, e));
        }
        Ok(EmbeddingHalf::OddPrime {
            entries,
            square_sum,
            q,
        })
    }
}

pub fn emb_combine(
    h1: &EmbeddingHalf,
    h2: &EmbeddingHalf,
) -> Result<EmbeddingMessage, SchemeError> {
    match (h1, h2) {
        (
            EmbeddingHalf::Binary {
                total: t1,
                bits: b1,
            },
            EmbeddingHalf::Binary {
                total: t2,
                bits: b2,
            },
        ) => Ok(EmbeddingMessage::Binary {
            total: t1.add(*t2)?,
            parity: b1.add(b2)?,
        }),
        (
            EmbeddingHalf::OddPrime {
                entries: e1,
                square_sum: s1,
                q,
            },
            EmbeddingHalf::OddPrime {
                entries: e2,
                square_sum: s2,
                q: q2,
            },
        ) => {
            if q != q2 {
                return Err(SchemeError::Field(FieldError::ModulusMismatch(
                    q.value(),
                    q2.value(),
                )));
            }
            if e1.len() != e2.len() {
                return Err(SchemeError::Field(FieldError::DimensionMismatch(
                    e1.len(),
                    1,
                    e2.len(),
                    1,
                )));
            }
            let entry_sums = e1
                .iter()
                .zip(e2)
                .map(|(a, b)| a.add(*b))
                .collect::<Result<_, _>>()?;
            Ok(EmbeddingMessage::OddPrime {
                entry_sums,
                square_sum: q.add(*s1, *s2),
                q: *q,
            })
        }
        _ => Err(SchemeError::BinaryUnsupported),
    }
}

/// Reconstructs <A, B> mod q from the combined embedding message.
///
/// For odd q: inv(2) (sum_i (a_i +_r b_i)^2 - (+_q sum of squares)) mod q.
/// For q = 2: floor((total - sum_i (a_i + b_i mod 2)) / 2) mod 2.
pub fn emb_decode(msg: &EmbeddingMessage) -> u32 {
    match msg {
        EmbeddingMessage::Binary { total, parity } => {
            let parity_sum: u64 = parity.entries().iter().map(|&e| e as u64).sum();
            // total >= parity_sum: the mod-r sum only wraps when every
            // a_i = b_i = 1, in which case both sides are zero mod 2m.
            let diff = total.value() - parity_sum;
            ((diff / 2) % 2) as u32
        }
        EmbeddingMessage::OddPrime {
            entry_sums,
            square_sum,
            q,
        } => {
            let mut squared = 0u64;
            for e in entry_sums {
                squared += e.value() * e.value();
            }
            let lhs = q.reduce(squared);
            let half = q.inverse(2).expect("odd q");
            q.mul(half, q.sub(lhs, *square_sum))
        }
    }
}

pub fn emb_message(a: &FieldMatrix, b: &FieldMatrix) -> Result<EmbeddingMessage, SchemeError> {
    emb_combine(&emb_encode(a, Side::A)?, &emb_encode(b, Side::B)?)
}

/// Entry-wise embedding baseline for binary sources carried in F_3:
/// a_k b_k = 1 iff a_k + b_k = 2, so the mod-3 sum alone determines the product.
pub fn entrywise_embed_decode(t: u32) -> u32 {
    debug_assert!(t < 3);
    u32::from(t == 2)
}

// ---------------------------------------------------------------------------
// Square (not necessarily symmetric) matrix products, q > 2, l >= 2.
// ---------------------------------------------------------------------------

/// One source's contribution to the square-product message; one block pair
/// per column index j.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareHalf {
    pub blocks: Vec<(FieldMatrix, FieldMatrix)>,
}

/// Receiver view: S_j = A + B~_j and G_j = A^T A + B~_j^T B~_j for each j,
/// where B~_j replicates column j of B across all l columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMessage {
    pub sums: Vec<FieldMatrix>,
    pub gram_sums: Vec<FieldMatrix>,
}

pub fn sq_encode(x: &FieldMatrix, side: Side) -> Result<SquareHalf, SchemeError> {
    if !x.modulus().is_odd() {
        return Err(SchemeError::BinaryUnsupported);
    }
    let l = x.cols();
    if l < 2 {
        return Err(SchemeError::WidthTooSmall(l));
    }
    let blocks = match side {
        Side::A => {
            let gram = x.transpose().mul(x)?;
            vec![(x.clone(), gram); l]
        }
        Side::B => (0..l)
            .map(|j| {
                let replicated = x.replicate_column(j, l)?;
                let gram = replicated.transpose().mul(&replicated)?;
                Ok((replicated, gram))
            })
            .collect::<Result<_, SchemeError>>()?,
    };
    Ok(SquareHalf { blocks })
}

pub fn sq_combine(h1: &SquareHalf, h2: &SquareHalf) -> Result<SquareMessage, SchemeError> {
    if h1.blocks.len() != h2.blocks.len() {
        return Err(SchemeError::Field(FieldError::DimensionMismatch(
            h1.blocks.len(),
            1,
            h2.blocks.len(),
            1,
        )));
    }
    let mut sums = Vec::with_capacity(h1.blocks.len());
    let mut gram_sums = Vec::with_capacity(h1.blocks.len());
    for ((s1, g1), (s2, g2)) in h1.blocks.iter().zip(&h2.blocks) {
        sums.push(s1.add(s2)?);
        gram_sums.push(g1.add(g2)?);
    }
    Ok(SquareMessage { sums, gram_sums })
}

/// Recovers D = A^T B column by column. For each j,
/// M_j = S_j^T S_j - G_j has entries d_{ij} + d_{kj}; the diagonal yields
/// d_{ij} = inv(2) (M_j)_{ii} and the off-diagonal entries must agree with
/// the recovered column, otherwise the message did not come from an encoder.
pub fn sq_decode(msg: &SquareMessage) -> Result<FieldMatrix, SchemeError> {
    let l = msg.sums.len();
    if l < 2 {
        return Err(SchemeError::WidthTooSmall(l));
    }
    let q = msg.sums[0].modulus();
    if !q.is_odd() {
        return Err(SchemeError::BinaryUnsupported);
    }
    let half = q.inverse(2)?;
    let mut d = FieldMatrix::zeros(l, l, q)?;
    for (j, (s, g)) in msg.sums.iter().zip(&msg.gram_sums).enumerate() {
        let m_j = s.transpose().mul(s)?.sub(g)?;
        let column: Vec<u32> = (0..l).map(|i| q.mul(half, m_j.get(i, i))).collect();
        for i in 0..l {
            for k in 0..l {
                if m_j.get(i, k) != q.add(column[i], column[k]) {
                    return Err(SchemeError::Inconsistent(i, k));
                }
            }
        }
        for i in 0..l {
            d.set(i, j, column[i]);
        }
    }
    Ok(d)
}

pub fn sq_message(a: &FieldMatrix, b: &FieldMatrix) -> Result<SquareMessage, SchemeError> {
    sq_combine(&sq_encode(a, Side::A)?, &sq_encode(b, Side::B)?)
}

pub mod exhaustive;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::mat_mul;

    fn q(v: u32) -> PrimeModulus {
        PrimeModulus::new(v).unwrap()
    }

    fn vecm(entries: &[u32], qq: u32) -> FieldMatrix {
        FieldMatrix::column_vector(entries, q(qq)).unwrap()
    }

    fn inner(a: &FieldMatrix, b: &FieldMatrix) -> u32 {
        mat_mul(&a.transpose(), b).unwrap().get(0, 0)
    }

    #[test]
    fn ip_encode_examples() {
        // A = [1,2]^T over F_3: A_1 = [1], A_2 = [2], X_1 = [2, 1, 2]^T
        let x1 = ip_encode(&vecm(&[1, 2], 3), Side::A).unwrap();
        assert_eq!(x1, vecm(&[2, 1, 2], 3));

        let zero = ip_encode(&vecm(&[0, 0], 3), Side::A).unwrap();
        assert!(zero.is_zero());

        // B = [2,1]^T: B_1 = [2], B_2 = [1], X_2 = [2, 1, 2]^T
        let x2 = ip_encode(&vecm(&[2, 1], 3), Side::B).unwrap();
        assert_eq!(x2, vecm(&[2, 1, 2], 3));

        assert!(matches!(
            ip_encode(&vecm(&[1, 2, 0], 3), Side::A),
            Err(SchemeError::OddRows(3))
        ));
    }

    #[test]
    fn ip_combine_and_decode_example() {
        let a = vecm(&[1, 2], 3);
        let b = vecm(&[2, 1], 3);
        let msg = ip_message(&a, &b).unwrap();
        assert_eq!(msg.u, vecm(&[1], 3));
        assert_eq!(msg.v, vecm(&[2], 3));
        assert_eq!(msg.w, 1);
        assert_eq!(ip_decode(&msg), 1);
        assert_eq!(inner(&a, &b), 1);
    }

    #[test]
    fn ip_combine_zero_and_self_inverse() {
        let x1 = ip_encode(&vecm(&[1, 2], 3), Side::A).unwrap();
        let zero = FieldMatrix::zeros(3, 1, q(3)).unwrap();
        let msg = ip_combine(&x1, &zero).unwrap();
        assert_eq!(msg.u, vecm(&[2], 3));
        assert_eq!(msg.v, vecm(&[1], 3));
        assert_eq!(msg.w, 2);

        // over F_2, X_1 = X_2 gives the zero message
        let x = ip_encode(&vecm(&[1, 0], 2), Side::A).unwrap();
        let msg = ip_combine(&x, &x).unwrap();
        assert!(msg.u.is_zero() && msg.v.is_zero() && msg.w == 0);
    }

    #[test]
    fn ip_zero_source_decodes_zero() {
        let a = vecm(&[0, 0], 3);
        for idx in 0..9 {
            let b = FieldMatrix::from_index(idx, 2, 1, q(3)).unwrap();
            let msg = ip_message(&a, &b).unwrap();
            assert_eq!(ip_decode(&msg), 0);
        }
    }

    #[test]
    fn ip_exhaustive_f2_m2() {
        for ai in 0..4u64 {
            for bi in 0..4u64 {
                let a = FieldMatrix::from_index(ai, 2, 1, q(2)).unwrap();
                let b = FieldMatrix::from_index(bi, 2, 1, q(2)).unwrap();
                assert_eq!(ip_decode(&ip_message(&a, &b).unwrap()), inner(&a, &b));
            }
        }
    }

    #[test]
    fn message_nonrecovery_witness() {
        // two distinct pairs with the same (U, V, W) at q = 2, m = 2
        let z = vecm(&[0, 0], 2);
        let o = vecm(&[1, 1], 2);
        let m0 = ip_message(&z, &z).unwrap();
        let m1 = ip_message(&o, &o).unwrap();
        assert_eq!(m0, m1);
    }

    #[test]
    fn emb_encode_examples() {
        // q=2, m=2 (r=4), A=[1,1]: bit entries (1,1); mod-2 squares sum to 0
        match emb_encode(&vecm(&[1, 1], 2), Side::A).unwrap() {
            EmbeddingHalf::Binary { total, bits } => {
                assert_eq!(total.modulus(), 4);
                assert_eq!(total.value(), 2);
                assert_eq!(bits.entries(), &[1, 1]);
                assert_eq!(total.value() % 2, 0);
            }
            _ => panic!("expected binary half"),
        }

        match emb_encode(&vecm(&[0, 0, 0], 5), Side::A).unwrap() {
            EmbeddingHalf::OddPrime {
                entries,
                square_sum,
                ..
            } => {
                assert!(entries.iter().all(|e| e.value() == 0));
                assert_eq!(square_sum, 0);
            }
            _ => panic!("expected odd-prime half"),
        }

        // q=3, m=2 (r=8), A=[2,2]: residues (2,2), squares 4+4 = 2 mod 3
        match emb_encode(&vecm(&[2, 2], 3), Side::A).unwrap() {
            EmbeddingHalf::OddPrime {
                entries,
                square_sum,
                ..
            } => {
                assert_eq!(
                    entries.iter().map(|e| e.value()).collect::<Vec<_>>(),
                    vec![2, 2]
                );
                assert!(entries.iter().all(|e| e.modulus() == 8));
                assert_eq!(square_sum, 2);
            }
            _ => panic!("expected odd-prime half"),
        }
    }

    #[test]
    fn emb_decode_binary_example() {
        // A=[1,1], B=[1,0]: total mod 4 = 3, parity sum 1, floor((3-1)/2) mod 2 = 1
        let a = vecm(&[1, 1], 2);
        let b = vecm(&[1, 0], 2);
        let msg = emb_message(&a, &b).unwrap();
        match &msg {
            EmbeddingMessage::Binary { total, parity } => {
                assert_eq!(total.value(), 3);
                let s: u32 = parity.entries().iter().sum();
                assert_eq!(s, 1);
            }
            _ => panic!(),
        }
        assert_eq!(emb_decode(&msg), 1);
        assert_eq!(inner(&a, &b), 1);
    }

    #[test]
    fn emb_zero_decodes_zero() {
        for qq in [2u32, 3, 5] {
            let a = FieldMatrix::zeros(3, 1, q(qq)).unwrap();
            for idx in 0..(qq as u64).pow(3) {
                let b = FieldMatrix::from_index(idx, 3, 1, q(qq)).unwrap();
                assert_eq!(emb_decode(&emb_message(&a, &b).unwrap()), 0);
            }
        }
    }

    #[test]
    fn emb_exhaustive_q3() {
        for m in 1..=3usize {
            let total = 3u64.pow(m as u32);
            for ai in 0..total {
                for bi in 0..total {
                    let a = FieldMatrix::from_index(ai, m, 1, q(3)).unwrap();
                    let b = FieldMatrix::from_index(bi, m, 1, q(3)).unwrap();
                    assert_eq!(
                        emb_decode(&emb_message(&a, &b).unwrap()),
                        inner(&a, &b),
                        "m={m} a={ai} b={bi}"
                    );
                }
            }
        }
    }

    #[test]
    fn emb_integer_sums_never_wrap() {
        // sum_i (a_i + b_i) <= 2(q-1)m <= r at test sizes
        for (qq, m) in [(2u32, 4usize), (3, 3), (5, 2)] {
            let r = embedding_modulus(q(qq), m);
            assert!(2 * (qq as u64 - 1) * m as u64 <= r);
            for ai in 0..(qq as u64).pow(m as u32) {
                for bi in 0..(qq as u64).pow(m as u32) {
                    let a = FieldMatrix::from_index(ai, m, 1, q(qq)).unwrap();
                    let b = FieldMatrix::from_index(bi, m, 1, q(qq)).unwrap();
                    let total: u64 = a
                        .entries()
                        .iter()
                        .zip(b.entries())
                        .map(|(&x, &y)| (x + y) as u64)
                        .sum();
                    assert!(total <= r);
                }
            }
        }
    }

    #[test]
    fn entrywise_embed_decode_cases() {
        assert_eq!(entrywise_embed_decode(2), 1);
        assert_eq!(entrywise_embed_decode(0), 0);
        assert_eq!(entrywise_embed_decode(1), 0);
        // consistency over all binary pairs
        for a in 0..2u32 {
            for b in 0..2u32 {
                assert_eq!(entrywise_embed_decode((a + b) % 3), a * b);
            }
        }
    }

    #[test]
    fn sym_encode_shapes_and_reduction_to_ip() {
        let a = FieldMatrix::from_rows(&[vec![1, 2], vec![0, 1]], q(3)).unwrap();
        let x = sym_encode(&a, Side::A).unwrap();
        assert_eq!((x.rows(), x.cols()), (4, 2)); // (m + l) x l = 4 x 2

        let zero = FieldMatrix::zeros(2, 2, q(3)).unwrap();
        assert!(sym_encode(&zero, Side::A).unwrap().is_zero());

        // l = 1 specializes to ip_encode
        let v = vecm(&[1, 2], 3);
        assert_eq!(
            sym_encode(&v, Side::A).unwrap(),
            ip_encode(&v, Side::A).unwrap()
        );

        assert!(matches!(
            sym_encode(&vecm(&[1, 0], 2), Side::A),
            Err(SchemeError::BinaryUnsupported)
        ));
    }

    #[test]
    fn sym_decode_matches_ip_for_vectors() {
        for ai in 0..9u64 {
            for bi in 0..9u64 {
                let a = FieldMatrix::from_index(ai, 2, 1, q(3)).unwrap();
                let b = FieldMatrix::from_index(bi, 2, 1, q(3)).unwrap();
                let d = sym_decode(&sym_message(&a, &b).unwrap()).unwrap();
                assert_eq!(d.get(0, 0), ip_decode(&ip_message(&a, &b).unwrap()));
            }
        }
    }

    #[test]
    fn sym_decode_recovers_gram_matrices() {
        // B = A gives the always-symmetric product A^T A; all A over F_3, 2x2
        for ai in 0..81u64 {
            let a = FieldMatrix::from_index(ai, 2, 2, q(3)).unwrap();
            let d = sym_decode(&sym_message(&a, &a).unwrap()).unwrap();
            assert_eq!(d, mat_mul(&a.transpose(), &a).unwrap());
        }
    }

    #[test]
    fn sym_binary_constrained_exhaustive() {
        // rejection-filtered brute force over all F_2^{2x2} pairs
        let mut kept = 0u32;
        for ai in 0..16u64 {
            for bi in 0..16u64 {
                let a = FieldMatrix::from_index(ai, 2, 2, q(2)).unwrap();
                let b = FieldMatrix::from_index(bi, 2, 2, q(2)).unwrap();
                if !binary_constraints_hold(&a, &b).unwrap() {
                    continue;
                }
                kept += 1;
                let (a1, a2) = split_halves(&a).unwrap();
                let (b1, b2) = split_halves(&b).unwrap();
                let u = a2.add(&b1).unwrap();
                let v = a1.add(&b2).unwrap();
                let d = sym_binary_constrained_decode(&u, &v).unwrap();
                assert_eq!(d, mat_mul(&a.transpose(), &b).unwrap());
            }
        }
        assert!(kept > 16, "filter kept only the trivial diagonal");
    }

    #[test]
    fn sym_binary_constrained_identity_pairs() {
        // A = B satisfies constraint i) always; for vectors (l = 1) the
        // second constraint is the scalar identity A_2^T A_1 = A_1^T A_2, so
        // every identical vector pair survives the filter and decodes to A^T A.
        for ai in 0..16u64 {
            let a = FieldMatrix::from_index(ai, 4, 1, q(2)).unwrap();
            assert!(binary_constraints_hold(&a, &a).unwrap());
            let (a1, a2) = split_halves(&a).unwrap();
            let u = a2.add(&a1).unwrap();
            let d = sym_binary_constrained_decode(&u, &u).unwrap();
            assert_eq!(d, mat_mul(&a.transpose(), &a).unwrap());
        }
        // for l >= 2 the pair (A, A) passes exactly when A_2^T A_1 is symmetric
        for ai in 0..16u64 {
            let a = FieldMatrix::from_index(ai, 2, 2, q(2)).unwrap();
            let (a1, a2) = split_halves(&a).unwrap();
            let cross = a2.transpose().mul(&a1).unwrap();
            assert_eq!(
                binary_constraints_hold(&a, &a).unwrap(),
                cross.is_symmetric()
            );
        }
    }

    #[test]
    fn sq_encode_examples() {
        let b = FieldMatrix::from_rows(&[vec![1, 2], vec![0, 1]], q(3)).unwrap();
        let half = sq_encode(&b, Side::B).unwrap();
        let expect = FieldMatrix::from_rows(&[vec![1, 1], vec![0, 0]], q(3)).unwrap();
        assert_eq!(half.blocks[0].0, expect);
        // shapes: S_j is m x l, G_j is l x l
        assert_eq!((half.blocks[0].0.rows(), half.blocks[0].0.cols()), (2, 2));
        assert_eq!((half.blocks[0].1.rows(), half.blocks[0].1.cols()), (2, 2));

        // all-zero column j gives B~_j = 0 and G_j = A^T A after combining
        let a = FieldMatrix::from_rows(&[vec![1, 2], vec![2, 0]], q(3)).unwrap();
        let bz = FieldMatrix::from_rows(&[vec![0, 1], vec![0, 2]], q(3)).unwrap();
        let msg = sq_message(&a, &bz).unwrap();
        assert_eq!(msg.sums[0], a);
        assert_eq!(msg.gram_sums[0], mat_mul(&a.transpose(), &a).unwrap());

        assert!(matches!(
            sq_encode(&vecm(&[1, 0], 3), Side::A),
            Err(SchemeError::WidthTooSmall(1))
        ));
        let bb = FieldMatrix::from_rows(&[vec![1, 0], vec![0, 1]], q(2)).unwrap();
        assert!(matches!(
            sq_encode(&bb, Side::A),
            Err(SchemeError::BinaryUnsupported)
        ));
    }

    #[test]
    fn sq_decode_spot_pairs() {
        let a = FieldMatrix::from_rows(&[vec![1, 2], vec![0, 1]], q(3)).unwrap();
        let b = FieldMatrix::from_rows(&[vec![2, 1], vec![1, 1]], q(3)).unwrap();
        let d = sq_decode(&sq_message(&a, &b).unwrap()).unwrap();
        assert_eq!(d, mat_mul(&a.transpose(), &b).unwrap());

        let zero = FieldMatrix::zeros(2, 2, q(3)).unwrap();
        assert!(sq_decode(&sq_message(&zero, &b).unwrap())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn sq_decode_agrees_with_sym_on_gram() {
        for ai in [0u64, 17, 1234, 6560] {
            let a = FieldMatrix::from_index(ai, 2, 2, q(3)).unwrap();
            let via_sq = sq_decode(&sq_message(&a, &a).unwrap()).unwrap();
            let via_sym = sym_decode(&sym_message(&a, &a).unwrap()).unwrap();
            assert_eq!(via_sq, via_sym);
        }
    }

    #[test]
    fn sq_decode_flags_malformed_messages() {
        let a = FieldMatrix::from_rows(&[vec![1, 2], vec![0, 1]], q(3)).unwrap();
        let b = FieldMatrix::from_rows(&[vec![2, 1], vec![1, 1]], q(3)).unwrap();
        let mut msg = sq_message(&a, &b).unwrap();
        // perturb one off-diagonal gram entry; diagonals still decode but the
        // consistency equations no longer hold
        let old = msg.gram_sums[0].get(0, 1);
        let qq = msg.gram_sums[0].modulus();
        msg.gram_sums[0].set(0, 1, qq.add(old, 1));
        assert!(matches!(
            sq_decode(&msg),
            Err(SchemeError::Inconsistent(0, 1))
        ));
    }

    #[test]
    fn combination_commutes_with_field_addition() {
        // message(A,B) + message(A',B') = combine(X1+X1', X2+X2')
        let pairs = [
            (vecm(&[1, 2], 3), vecm(&[2, 1], 3)),
            (vecm(&[0, 2], 3), vecm(&[1, 1], 3)),
        ];
        let m0 = ip_message(&pairs[0].0, &pairs[0].1).unwrap();
        let m1 = ip_message(&pairs[1].0, &pairs[1].1).unwrap();
        let x1 = ip_encode(&pairs[0].0, Side::A)
            .unwrap()
            .add(&ip_encode(&pairs[1].0, Side::A).unwrap())
            .unwrap();
        let x2 = ip_encode(&pairs[0].1, Side::B)
            .unwrap()
            .add(&ip_encode(&pairs[1].1, Side::B).unwrap())
            .unwrap();
        let combined = ip_combine(&x1, &x2).unwrap();
        assert_eq!(combined.u, m0.u.add(&m1.u).unwrap());
        assert_eq!(combined.v, m0.v.add(&m1.v).unwrap());
        assert_eq!(combined.w, q(3).add(m0.w, m1.w));
    }
}
