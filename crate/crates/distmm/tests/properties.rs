//! Property tests for the algebraic invariants the schemes rely on.

use distmm::field::{mat_mul, FieldMatrix, PrimeModulus};
use distmm::kmcodec::gen_code;
use distmm::schemes::{
    emb_decode, emb_message, ip_combine, ip_decode, ip_encode, ip_message, sq_decode, sq_message,
    sym_decode, sym_message, Side,
};
use proptest::prelude::*;

fn arb_prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

fn arb_odd_prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![3u32, 5, 7])
}

fn matrix(q: u32, rows: usize, cols: usize) -> impl Strategy<Value = FieldMatrix> {
    prop::collection::vec(0..q, rows * cols).prop_map(move |entries| {
        let modulus = PrimeModulus::new(q).unwrap();
        let rows_v: Vec<Vec<u32>> = entries.chunks(cols).map(|c| c.to_vec()).collect();
        FieldMatrix::from_rows(&rows_v, modulus).unwrap()
    })
}

proptest! {
    /// (X^T Y)^T = Y^T X for all conformable X, Y.
    #[test]
    fn transpose_product_identity(
        (q, x, y) in arb_prime().prop_flat_map(|q| {
            (2usize..=4, 1usize..=3, 1usize..=3).prop_flat_map(move |(m, c1, c2)| {
                (Just(q), matrix(q, m, c1), matrix(q, m, c2))
            })
        })
    ) {
        let _ = q;
        let xy = mat_mul(&x.transpose(), &y).unwrap();
        let yx = mat_mul(&y.transpose(), &x).unwrap();
        prop_assert_eq!(xy.transpose(), yx);
    }

    /// symmetrize fixes symmetric matrices and always emits symmetric output.
    #[test]
    fn symmetrize_is_symmetric(
        (q, d) in arb_odd_prime().prop_flat_map(|q| {
            (1usize..=4).prop_flat_map(move |n| (Just(q), matrix(q, n, n)))
        })
    ) {
        let _ = q;
        let s = d.symmetrize().unwrap();
        prop_assert!(s.is_symmetric());
        if d.is_symmetric() {
            prop_assert_eq!(s, d);
        }
    }

    /// Inner-product scheme decodes correctly on random pairs beyond the
    /// exhaustive sizes.
    #[test]
    fn inner_scheme_decodes(
        (q, a, b) in arb_prime().prop_flat_map(|q| {
            prop::sample::select(vec![2usize, 4, 6]).prop_flat_map(move |m| {
                (Just(q), matrix(q, m, 1), matrix(q, m, 1))
            })
        })
    ) {
        let truth = mat_mul(&a.transpose(), &b).unwrap().get(0, 0);
        let _ = q;
        prop_assert_eq!(ip_decode(&ip_message(&a, &b).unwrap()), truth);
    }

    /// Embedding scheme decodes correctly on random pairs, odd and even m.
    #[test]
    fn embedding_scheme_decodes(
        (q, a, b) in arb_prime().prop_flat_map(|q| {
            (1usize..=5).prop_flat_map(move |m| {
                (Just(q), matrix(q, m, 1), matrix(q, m, 1))
            })
        })
    ) {
        let truth = mat_mul(&a.transpose(), &b).unwrap().get(0, 0);
        let _ = q;
        prop_assert_eq!(emb_decode(&emb_message(&a, &b).unwrap()), truth);
    }

    /// Symmetric scheme recovers every symmetric product (rejection-filtered).
    #[test]
    fn symmetric_scheme_decodes(
        (q, a, b) in arb_odd_prime().prop_flat_map(|q| {
            (1usize..=2, 1usize..=2).prop_flat_map(move |(half_m, l)| {
                (Just(q), matrix(q, 2 * half_m, l), matrix(q, 2 * half_m, l))
            })
        })
    ) {
        let _ = q;
        let truth = mat_mul(&a.transpose(), &b).unwrap();
        prop_assume!(truth.is_symmetric());
        let d = sym_decode(&sym_message(&a, &b).unwrap()).unwrap();
        prop_assert_eq!(d, truth);
    }

    /// Square scheme recovers arbitrary products for odd q, l >= 2.
    #[test]
    fn square_scheme_decodes(
        (q, a, b) in arb_odd_prime().prop_flat_map(|q| {
            (1usize..=3, 2usize..=3).prop_flat_map(move |(m, l)| {
                (Just(q), matrix(q, m, l), matrix(q, m, l))
            })
        })
    ) {
        let _ = q;
        let truth = mat_mul(&a.transpose(), &b).unwrap();
        let d = sq_decode(&sq_message(&a, &b).unwrap()).unwrap();
        prop_assert_eq!(d, truth);
    }

    /// The combined message is linear: combining summed mappings equals the
    /// entrywise sum of the two messages.
    #[test]
    fn message_linearity(
        (q, a, b, a2, b2) in arb_prime().prop_flat_map(|q| {
            prop::sample::select(vec![2usize, 4]).prop_flat_map(move |m| {
                (Just(q), matrix(q, m, 1), matrix(q, m, 1), matrix(q, m, 1), matrix(q, m, 1))
            })
        })
    ) {
        let modulus = PrimeModulus::new(q).unwrap();
        let m0 = ip_message(&a, &b).unwrap();
        let m1 = ip_message(&a2, &b2).unwrap();
        let x1 = ip_encode(&a, Side::A).unwrap().add(&ip_encode(&a2, Side::A).unwrap()).unwrap();
        let x2 = ip_encode(&b, Side::B).unwrap().add(&ip_encode(&b2, Side::B).unwrap()).unwrap();
        let combined = ip_combine(&x1, &x2).unwrap();
        prop_assert_eq!(combined.u, m0.u.add(&m1.u).unwrap());
        prop_assert_eq!(combined.v, m0.v.add(&m1.v).unwrap());
        prop_assert_eq!(combined.w, modulus.add(m0.w, m1.w));
    }

    /// Syndromes are linear: C(z1 + z2) = C z1 + C z2.
    #[test]
    fn syndrome_linearity(
        (q, seed, z1, z2) in arb_prime().prop_flat_map(|q| {
            (1usize..=10).prop_flat_map(move |n| {
                (
                    Just(q),
                    any::<u64>(),
                    prop::collection::vec(0..q, n),
                    prop::collection::vec(0..q, n),
                )
            })
        })
    ) {
        let modulus = PrimeModulus::new(q).unwrap();
        let n = z1.len();
        let k = (n / 2).max(1);
        let code = gen_code(n, k, modulus, seed).unwrap();
        let sum: Vec<u32> = z1.iter().zip(&z2).map(|(&x, &y)| modulus.add(x, y)).collect();
        let lhs = code.syndrome(&sum).unwrap();
        let rhs: Vec<u32> = code
            .syndrome(&z1)
            .unwrap()
            .iter()
            .zip(&code.syndrome(&z2).unwrap())
            .map(|(&x, &y)| modulus.add(x, y))
            .collect();
        prop_assert_eq!(lhs, rhs);
    }
}
