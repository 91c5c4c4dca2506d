//! Exact entropy engine and every closed-form rate in the toolkit.
//!
//! All entropies are in bits. Rates are per source symbol: the asymptotic
//! block-coding sum rates, so no block length appears anywhere. Distribution
//! tables are exact pushforwards of enumerable models; accumulation uses
//! compensated (Neumaier) summation.

use crate::field::FieldMatrix;
use crate::schemes::{emb_message, ip_message, sq_message, EmbeddingMessage, InnerProductMessage};
use crate::sources::{JointSourceModel, ModelError};
use std::collections::BTreeMap;
use thiserror::Error;

pub const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("probabilities sum to {0}, not 1")]
    ProbabilitySum(f64),
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("empty distribution")]
    Empty,
    #[error("operation needs {needed}, model has {got}")]
    ModelShape { needed: String, got: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Finite support-to-probability map with a canonical (sorted) order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable<K: Ord> {
    entries: Vec<(K, f64)>,
}

impl<K: Ord + Clone> DistributionTable<K> {
    /// Accumulates (key, mass) pairs; repeated keys add up.
    pub fn from_pairs<I: IntoIterator<Item = (K, f64)>>(pairs: I) -> Result<Self, EntropyError> {
        let mut map: BTreeMap<K, f64> = BTreeMap::new();
        for (k, p) in pairs {
            if p < 0.0 || !p.is_finite() {
                return Err(EntropyError::NegativeProbability(p));
            }
            *map.entry(k).or_default() += p;
        }
        if map.is_empty() {
            return Err(EntropyError::Empty);
        }
        let total: f64 = neumaier_sum(map.values().copied());
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(EntropyError::ProbabilitySum(total));
        }
        Ok(Self {
            entries: map.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.entries.iter().map(|(k, p)| (k, *p))
    }

    /// -sum p log2 p with 0 log 0 = 0, compensated accumulation.
    pub fn entropy_bits(&self) -> f64 {
        entropy_of_probs(self.entries.iter().map(|(_, p)| *p))
    }

    /// Pushes the table through a key map, merging collided keys.
    pub fn map_keys<J: Ord + Clone>(&self, f: impl Fn(&K) -> J) -> DistributionTable<J> {
        let mut map: BTreeMap<J, f64> = BTreeMap::new();
        for (k, p) in &self.entries {
            *map.entry(f(k)).or_default() += p;
        }
        DistributionTable {
            entries: map.into_iter().collect(),
        }
    }
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

fn entropy_of_probs(probs: impl Iterator<Item = f64>) -> f64 {
    neumaier_sum(probs.filter(|&p| p > 0.0).map(|p| -p * p.log2()))
}

/// Shannon entropy of any raw listing, for ad-hoc use.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    entropy_of_probs(probs.iter().copied())
}

/// Binary entropy h(p), exactly 0 at the endpoints.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of_probs([p, 1.0 - p].into_iter())
}

/// Two-argument h(x, y): entropy of the three-point PMF (x, y, 1-x-y).
pub fn ternary_entropy(x: f64, y: f64) -> f64 {
    let z = (1.0 - x - y).max(0.0); // guard rounding at the simplex edge
    entropy_of_probs([x, y, z].into_iter())
}

/// Exact distribution of `derive(A, B)` under an enumerable model.
pub fn pushforward<K: Ord + Clone>(
    model: &JointSourceModel,
    derive: impl Fn(&FieldMatrix, &FieldMatrix) -> K,
) -> Result<DistributionTable<K>, EntropyError> {
    let pairs = model
        .enumerate_support()?
        .map(|(a, b, p)| (derive(&a, &b), p))
        .collect::<Vec<_>>();
    DistributionTable::from_pairs(pairs)
}

fn require_vector_model(model: &JointSourceModel) -> Result<(), EntropyError> {
    if model.l() != 1 {
        return Err(EntropyError::ModelShape {
            needed: "l = 1".into(),
            got: format!("l = {}", model.l()),
        });
    }
    Ok(())
}

fn inner_message_key(msg: &InnerProductMessage) -> Vec<u32> {
    let mut key = msg.u.entries().to_vec();
    key.extend_from_slice(msg.v.entries());
    key.push(msg.w);
    key
}

fn embedding_message_key(msg: &EmbeddingMessage) -> Vec<u64> {
    match msg {
        EmbeddingMessage::Binary { total, parity } => {
            let mut key = vec![total.value()];
            key.extend(parity.entries().iter().map(|&e| e as u64));
            key
        }
        EmbeddingMessage::OddPrime {
            entry_sums,
            square_sum,
            ..
        } => {
            let mut key: Vec<u64> = entry_sums.iter().map(|e| e.value()).collect();
            key.push(*square_sum as u64);
            key
        }
    }
}

// ---------------------------------------------------------------------------
// Enumerated rates
// ---------------------------------------------------------------------------

/// R_KM = 2 H(U, V, W) for the inner-product scheme (l = 1, even m).
pub fn rate_km_inner(model: &JointSourceModel) -> Result<f64, EntropyError> {
    require_vector_model(model)?;
    if model.m() % 2 != 0 {
        return Err(EntropyError::ModelShape {
            needed: "even m".into(),
            got: format!("m = {}", model.m()),
        });
    }
    let table = pushforward(model, |a, b| {
        inner_message_key(&ip_message(a, b).expect("valid vector pair"))
    })?;
    Ok(2.0 * table.entropy_bits())
}

/// R_SW = H(A, B), the Slepian-Wolf sum rate.
pub fn rate_sw(model: &JointSourceModel) -> Result<f64, EntropyError> {
    let table = pushforward(model, |a, b| (a.entries().to_vec(), b.entries().to_vec()))?;
    Ok(table.entropy_bits())
}

/// R_SV = 2 H(embedding message) for the vector-wise embedding scheme.
pub fn rate_sv(model: &JointSourceModel) -> Result<f64, EntropyError> {
    require_vector_model(model)?;
    let table = pushforward(model, |a, b| {
        embedding_message_key(&emb_message(a, b).expect("valid vector pair"))
    })?;
    Ok(2.0 * table.entropy_bits())
}

/// R_S = 2 H({a_i + b_i mod 3}) for binary sources carried entry-wise in F_3.
pub fn rate_s_entrywise(model: &JointSourceModel) -> Result<f64, EntropyError> {
    if model.q().value() != 2 {
        return Err(EntropyError::ModelShape {
            needed: "q = 2".into(),
            got: format!("q = {}", model.q().value()),
        });
    }
    let table = pushforward(model, |a, b| {
        a.entries()
            .iter()
            .zip(b.entries())
            .map(|(&x, &y)| (x + y) % 3)
            .collect::<Vec<u32>>()
    })?;
    Ok(2.0 * table.entropy_bits())
}

/// R_KM = 2 H({A + B~_j}, {G_j}) for the square scheme (q odd, l >= 2).
pub fn rate_km_square(model: &JointSourceModel) -> Result<f64, EntropyError> {
    if !model.q().is_odd() || model.l() < 2 {
        return Err(EntropyError::ModelShape {
            needed: "odd q and l >= 2".into(),
            got: format!("q = {}, l = {}", model.q().value(), model.l()),
        });
    }
    let table = pushforward(model, |a, b| {
        let msg = sq_message(a, b).expect("valid matrix pair");
        let mut key: Vec<u32> = Vec::new();
        for s in &msg.sums {
            key.extend_from_slice(s.entries());
        }
        for g in &msg.gram_sums {
            key.extend_from_slice(g.entries());
        }
        key
    })?;
    Ok(2.0 * table.entropy_bits())
}

/// Exact H(<A, B>) of the target itself, for reference curves.
pub fn product_entropy(model: &JointSourceModel) -> Result<f64, EntropyError> {
    let table = pushforward(model, |a, b| {
        a.transpose()
            .mul(b)
            .expect("conformable")
            .entries()
            .to_vec()
    })?;
    Ok(table.entropy_bits())
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// 2 m h(p) + 2 (1 - (1-p)^m): the cross-paired binary R_KM.
pub fn cross_paired_km_closed(m: usize, p: f64) -> f64 {
    2.0 * m as f64 * binary_entropy(p) + 2.0 * (1.0 - (1.0 - p).powi(m as i32))
}

/// m (1 + h(p)): the cross-paired binary R_SW.
pub fn cross_paired_sw_closed(m: usize, p: f64) -> f64 {
    m as f64 * (1.0 + binary_entropy(p))
}

/// Gain eta = R_SW / R_KM, both in closed form.
pub fn cross_paired_gain(m: usize, p: f64) -> f64 {
    cross_paired_sw_closed(m, p) / cross_paired_km_closed(m, p)
}

/// Large-m limit of the gain at fixed p.
pub fn cross_paired_gain_asymptote(p: f64) -> f64 {
    (1.0 + binary_entropy(p)) / (2.0 * binary_entropy(p))
}

/// m (h(2 eps) + (1 - 2 eps) + h(p)): the ternary-correlated R_SW.
pub fn ternary_sw_closed(m: usize, epsilon: f64, p: f64) -> f64 {
    m as f64 * (binary_entropy(2.0 * epsilon) + (1.0 - 2.0 * epsilon) + binary_entropy(p))
}

/// 2 m h(x, y) + 2 log2(3) with x = 2(1/2-eps)(1-p) + 2 eps (1-p) and
/// y = 2(1/2-eps)p + 2 eps p: the ternary-correlated R_KM upper bound.
pub fn ternary_km_bound(m: usize, epsilon: f64, p: f64) -> f64 {
    let x = 2.0 * (0.5 - epsilon) * (1.0 - p) + 2.0 * epsilon * (1.0 - p);
    let y = 2.0 * (0.5 - epsilon) * p + 2.0 * epsilon * p;
    2.0 * m as f64 * ternary_entropy(x, y) + 2.0 * 3.0f64.log2()
}

/// Closed-form rates for the constrained binary matrix scheme behind the
/// symmetric-product comparison: U, V carry m*l iid Bern(p) entries and
/// W = 0, against H(A, B) = m*l (1 + h(p)).
pub fn constrained_binary_km_closed(m: usize, l: usize, p: f64) -> f64 {
    2.0 * (m * l) as f64 * binary_entropy(p)
}

pub fn constrained_binary_sw_closed(m: usize, l: usize, p: f64) -> f64 {
    (m * l) as f64 * (1.0 + binary_entropy(p))
}

// ---------------------------------------------------------------------------
// Nonrecovery condition (necessary condition for beating Slepian-Wolf)
// ---------------------------------------------------------------------------

/// Exact terms of the nonrecovery check H(A^T B) + H(Q | A^T B) < H(A | Q, A^T B),
/// plus the residual uncertainty H(A, B | Q, W) left at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct NonrecoveryReport {
    pub h_product: f64,
    pub h_q_given_product: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub residual_uncertainty: f64,
    /// H(U, V, W), whose expansion equals lhs exactly for l = 1.
    pub h_message: f64,
}

pub fn nonrecovery_check(model: &JointSourceModel) -> Result<NonrecoveryReport, EntropyError> {
    require_vector_model(model)?;
    if model.m() % 2 != 0 {
        return Err(EntropyError::ModelShape {
            needed: "even m".into(),
            got: format!("m = {}", model.m()),
        });
    }
    let product =
        |a: &FieldMatrix, b: &FieldMatrix| a.transpose().mul(b).expect("conformable").get(0, 0);
    let q_key = |a: &FieldMatrix, b: &FieldMatrix| {
        let msg = ip_message(a, b).expect("valid vector pair");
        let mut key = msg.u.entries().to_vec();
        key.extend_from_slice(msg.v.entries());
        key
    };

    let h_product = pushforward(model, |a, b| product(a, b))?.entropy_bits();
    let h_q_product = pushforward(model, |a, b| (q_key(a, b), product(a, b)))?.entropy_bits();
    let h_a_q_product = pushforward(model, |a, b| {
        (a.entries().to_vec(), q_key(a, b), product(a, b))
    })?
    .entropy_bits();
    let h_message = pushforward(model, |a, b| {
        inner_message_key(&ip_message(a, b).expect("valid vector pair"))
    })?
    .entropy_bits();
    let h_sources = rate_sw(model)?;

    let h_q_given_product = h_q_product - h_product;
    let lhs = h_product + h_q_given_product;
    let rhs = h_a_q_product - h_q_product;
    // (Q, W) is a function of (A, B), so H(A,B | Q,W) = H(A,B) - H(Q,W)
    let residual_uncertainty = h_sources - h_message;
    Ok(NonrecoveryReport {
        h_product,
        h_q_given_product,
        lhs,
        rhs,
        holds: lhs < rhs,
        residual_uncertainty,
        h_message,
    })
}

// ---------------------------------------------------------------------------
// Rate report for the CLI
// ---------------------------------------------------------------------------

/// Named rates of one model at one parameter point; fields are None where the
/// corresponding scheme does not apply to the model's shape.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub model: String,
    pub r_sw: f64,
    pub r_km: Option<f64>,
    pub r_s: Option<f64>,
    pub r_sv: Option<f64>,
    pub r_km_or: Option<f64>,
    pub gain: Option<f64>,
}

impl RateReport {
    pub fn compute(model: &JointSourceModel) -> Result<Self, EntropyError> {
        let r_sw = rate_sw(model)?;
        let r_km = if model.l() == 1 && model.m() % 2 == 0 {
            Some(rate_km_inner(model)?)
        } else if model.l() >= 2 && model.q().is_odd() {
            Some(rate_km_square(model)?)
        } else {
            None
        };
        let r_s = (model.q().value() == 2)
            .then(|| rate_s_entrywise(model))
            .transpose()?;
        let r_sv = (model.l() == 1).then(|| rate_sv(model)).transpose()?;
        let gain = r_km.filter(|&k| k > 0.0).map(|k| r_sw / k);
        Ok(Self {
            model: model.label().to_string(),
            r_sw,
            r_km,
            r_s,
            r_sv,
            r_km_or: None, // filled by callers that run the graph-entropy optimizer
            gain,
        })
    }
}

/// H(U, V, W) decomposition check used by the tests: chain-rule consistency
/// H(U, V, W) = H(U, V) + H(W | U, V).
pub fn km_chain_terms(model: &JointSourceModel) -> Result<(f64, f64, f64), EntropyError> {
    let joint = pushforward(model, |a, b| {
        inner_message_key(&ip_message(a, b).expect("valid vector pair"))
    })?
    .entropy_bits();
    let uv = pushforward(model, |a, b| {
        let msg = ip_message(a, b).expect("valid vector pair");
        let mut key = msg.u.entries().to_vec();
        key.extend_from_slice(msg.v.entries());
        key
    })?
    .entropy_bits();
    Ok((joint, uv, joint - uv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::JointSourceModel;

    const P_GRID: [f64; 7] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9];

    #[test]
    fn entropy_spot_values() {
        assert_eq!(entropy_bits(&[0.5, 0.5]), 1.0);
        let u3 = entropy_bits(&[1.0 / 3.0; 3]);
        assert!((u3 - 3.0f64.log2()).abs() < 1e-12);
        // h(0.1) evaluated directly
        let h = binary_entropy(0.1);
        assert!((h - 0.4689955935892812).abs() < 1e-12);
        assert!((h - 0.46900).abs() < 1e-5);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
    }

    #[test]
    fn pushforward_examples() {
        let model = JointSourceModel::single_dsbs(0.3).unwrap();
        // constant map -> point mass
        let t = pushforward(&model, |_, _| 0u8).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.entropy_bits(), 0.0);
        // a xor b is Bern(p)
        let t = pushforward(&model, |a, b| (a.get(0, 0) + b.get(0, 0)) % 2).unwrap();
        let h = t.entropy_bits();
        assert!((h - binary_entropy(0.3)).abs() < 1e-12);
        // independent uniform bits: a + b mod 3 is (1/4, 1/2, 1/4)
        let ind = JointSourceModel::single_dsbs(0.5).unwrap();
        let t = pushforward(&ind, |a, b| (a.get(0, 0) + b.get(0, 0)) % 3).unwrap();
        assert!((t.entropy_bits() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn km_inner_matches_closed_form() {
        for m in [2usize, 4] {
            for p in P_GRID {
                let model = JointSourceModel::cross_paired_dsbs(m, p).unwrap();
                let enumerated = rate_km_inner(&model).unwrap();
                let closed = cross_paired_km_closed(m, p);
                assert!(
                    (enumerated - closed).abs() <= 1e-9,
                    "m={m} p={p}: {enumerated} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn km_inner_frozen_value() {
        // enumeration oracle over the 16 outcomes of m = 2, p = 0.25:
        // 2(2h(1/4) + 1 - (3/4)^2) = 4.120112497836531
        let model = JointSourceModel::cross_paired_dsbs(2, 0.25).unwrap();
        let rate = rate_km_inner(&model).unwrap();
        assert!((rate - 4.120112497836531).abs() < 1e-12);
    }

    #[test]
    fn km_inner_degenerate_p0() {
        let model = JointSourceModel::cross_paired_dsbs(2, 0.0).unwrap();
        assert_eq!(rate_km_inner(&model).unwrap(), 0.0);
    }

    #[test]
    fn sw_matches_closed_form() {
        for m in [2usize, 4] {
            for p in P_GRID {
                let model = JointSourceModel::cross_paired_dsbs(m, p).unwrap();
                let enumerated = rate_sw(&model).unwrap();
                assert!((enumerated - cross_paired_sw_closed(m, p)).abs() <= 1e-9);
            }
        }
        // p = 1/2: 2m bits of independent uniforms
        let model = JointSourceModel::cross_paired_dsbs(4, 0.5).unwrap();
        assert!((rate_sw(&model).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn gain_examples() {
        // m=2, p=0.5: eta = 4/5.5
        assert!((cross_paired_gain(2, 0.5) - 4.0 / 5.5).abs() < 1e-12);
        // p -> 1: eta = m/2 exactly
        for m in [2usize, 4, 8, 64] {
            assert_eq!(cross_paired_gain(m, 1.0), m as f64 / 2.0);
        }
        // m -> infinity: approaches (1 + h(p)) / (2 h(p)); eta increases as m grows
        let p = 0.1;
        assert!(cross_paired_gain(1024, p) > cross_paired_gain(64, p));
        assert!((cross_paired_gain(1 << 20, p) - cross_paired_gain_asymptote(p)).abs() < 1e-2);
    }

    #[test]
    fn gain_grows_as_p_drops() {
        assert!(cross_paired_gain(4, 1e-3) > cross_paired_gain(4, 1e-2));
        assert!(cross_paired_gain(4, 1e-2) > cross_paired_gain(4, 1e-1));
    }

    #[test]
    fn gain_surface_favorable_region() {
        // structured coding wins: eta > 1 for p <= 0.05 once m >= 4
        for m in [4usize, 8, 16, 64] {
            for p in [0.001, 0.01, 0.05] {
                assert!(cross_paired_gain(m, p) > 1.0, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn rate_sv_examples() {
        // p = 0 single DSBS: message is (2a mod 3, 0), one uniform bit
        let model = JointSourceModel::single_dsbs(0.0).unwrap();
        assert!((rate_sv(&model).unwrap() - 2.0).abs() < 1e-12);
        // data processing: R_SV <= 2 H(A, B)
        for p in [0.1, 0.3, 0.5] {
            let model = JointSourceModel::cross_paired_dsbs(2, p).unwrap();
            assert!(rate_sv(&model).unwrap() <= 2.0 * rate_sw(&model).unwrap() + 1e-12);
        }
        // stable across runs
        let model = JointSourceModel::cross_paired_dsbs(2, 0.1).unwrap();
        let r1 = rate_sv(&model).unwrap();
        let r2 = rate_sv(&model).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn rate_s_examples() {
        // independent uniform bits, m = 1: 2 * 1.5 = 3 bits
        let ind = JointSourceModel::single_dsbs(0.5).unwrap();
        assert!((rate_s_entrywise(&ind).unwrap() - 3.0).abs() < 1e-12);
        // p = 0: a = b, sum in {0, 2} uniform -> 2 bits
        let det = JointSourceModel::single_dsbs(0.0).unwrap();
        assert!((rate_s_entrywise(&det).unwrap() - 2.0).abs() < 1e-12);
        // additive across iid rows
        let one = rate_s_entrywise(&JointSourceModel::paired_dsbs(1, 0.2).unwrap()).unwrap();
        let three = rate_s_entrywise(&JointSourceModel::paired_dsbs(3, 0.2).unwrap()).unwrap();
        assert!((three - 3.0 * one).abs() < 1e-9);
    }

    #[test]
    fn ternary_closed_forms() {
        // h(0.4) + 0.6 + h(0.1) evaluated directly
        let expect = binary_entropy(0.4) + 0.6 + binary_entropy(0.1);
        assert!((ternary_sw_closed(1, 0.2, 0.1) - expect).abs() < 1e-12);
        assert!((expect - 2.0399461880439498).abs() < 1e-12);

        for m in [1usize, 2] {
            for p in [0.05, 0.1, 0.25, 0.5, 0.75] {
                let model = JointSourceModel::ternary_correlated(m, 0.2, p).unwrap();
                let enumerated = rate_sw(&model).unwrap();
                assert!(
                    (enumerated - ternary_sw_closed(m, 0.2, p)).abs() <= 1e-9,
                    "m={m} p={p}"
                );
            }
        }
    }

    #[test]
    fn ternary_km_bound_behaviour() {
        // At m = 1 the closed-form bound holds. At larger m the
        // exact rate can exceed it (its additive constant undercounts the
        // conditional term by a factor of 2); the conditional term itself is
        // always at most 2 log2(3) per side, so the doubled constant bounds
        // every m. Both facts are pinned here.
        for p in [0.05, 0.1, 0.25, 0.5, 0.9] {
            let model = JointSourceModel::ternary_correlated(1, 0.2, p).unwrap();
            let rate = rate_km_square(&model).unwrap();
            assert!(rate <= ternary_km_bound(1, 0.2, p) + 1e-9, "m=1 p={p}");
        }
        let log3 = 3.0f64.log2();
        let mut exceeded_somewhere = false;
        for m in [1usize, 2] {
            for p in [0.05, 0.1, 0.25, 0.5, 0.9] {
                let model = JointSourceModel::ternary_correlated(m, 0.2, p).unwrap();
                let rate = rate_km_square(&model).unwrap();
                let stated = ternary_km_bound(m, 0.2, p);
                let corrected = stated + 2.0 * log3;
                assert!(rate >= 0.0 && rate.is_finite());
                assert!(
                    rate <= corrected + 1e-9,
                    "m={m} p={p}: {rate} > {corrected}"
                );
                if rate > stated + 1e-9 {
                    exceeded_somewhere = true;
                }
            }
        }
        assert!(
            exceeded_somewhere,
            "m=2 mid-range p is the known counterexample"
        );
        // p = 0 stays finite and nonnegative
        let model = JointSourceModel::ternary_correlated(1, 0.2, 0.0).unwrap();
        let rate = rate_km_square(&model).unwrap();
        assert!(rate.is_finite() && rate >= 0.0);
    }

    #[test]
    fn km_expansion_identity() {
        // H(U,V,W) = H(A^T B) + H(Q | A^T B) for l = 1
        for p in [0.1, 0.25, 0.5] {
            let model = JointSourceModel::cross_paired_dsbs(2, p).unwrap();
            let report = nonrecovery_check(&model).unwrap();
            assert!((report.h_message - report.lhs).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn chain_rule_consistency() {
        let model = JointSourceModel::cross_paired_dsbs(2, 0.3).unwrap();
        let (joint, uv, w_given_uv) = km_chain_terms(&model).unwrap();
        assert!((joint - (uv + w_given_uv)).abs() < 1e-12);
    }

    #[test]
    fn nonrecovery_examples() {
        // independent uniforms: sources hidden behind the message
        let model = JointSourceModel::cross_paired_dsbs(2, 0.5).unwrap();
        let report = nonrecovery_check(&model).unwrap();
        assert!(report.residual_uncertainty > 0.0);
        assert!(report.lhs >= 0.0 && report.rhs >= 0.0);

        // deterministic paired model: condition fails (lhs == rhs)
        let det = JointSourceModel::paired_dsbs(2, 0.0).unwrap();
        let report = nonrecovery_check(&det).unwrap();
        assert!(!report.holds);
        assert!((report.lhs - report.rhs).abs() < 1e-9);
    }

    #[test]
    fn rate_report_selects_applicable_schemes() {
        let cross = JointSourceModel::cross_paired_dsbs(2, 0.1).unwrap();
        let r = RateReport::compute(&cross).unwrap();
        assert!(r.r_km.is_some() && r.r_s.is_some() && r.r_sv.is_some() && r.gain.is_some());

        let ternary = JointSourceModel::ternary_correlated(1, 0.2, 0.1).unwrap();
        let r = RateReport::compute(&ternary).unwrap();
        assert!(r.r_km.is_some()); // square scheme
        assert!(r.r_s.is_none() && r.r_sv.is_none());

        let single = JointSourceModel::single_dsbs(0.2).unwrap();
        let r = RateReport::compute(&single).unwrap();
        assert!(r.r_km.is_none()); // m odd: inner scheme does not apply
        assert!(r.r_sv.is_some());
    }
}
