//! Correlated source models over paired matrices (A, B) in F_q^{m x l}.
//!
//! A model is a product of independent components; each component draws one
//! outcome from a finite table and writes a fixed set of entries of A and B.
//! That covers every built-in here (banks of DSBS pairs, the ternary l = 2
//! model, user tables) while keeping exact enumeration and seeded sampling
//! trivial: the support is the product of the component supports.

use crate::field::{FieldError, FieldMatrix, PrimeModulus};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Hard ceiling on enumerable support size (outcome count).
pub const SUPPORT_CAP: u128 = 1 << 24;

const COMPONENT_PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("support has {size} outcomes, above the cap of {cap}")]
    SupportTooLarge { size: u128, cap: u128 },
    #[error("probabilities sum to {0}, not 1")]
    ProbabilitySum(f64),
    #[error("custom table: {0}")]
    Table(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One independent block of the joint draw: a distribution over partial
/// assignments to fixed positions of A and B.
#[derive(Debug, Clone)]
struct Component {
    a_pos: Vec<(usize, usize)>,
    b_pos: Vec<(usize, usize)>,
    /// (a values, b values, probability), zero-probability outcomes dropped.
    outcomes: Vec<(Vec<u32>, Vec<u32>, f64)>,
}

impl Component {
    fn validate(&self) -> Result<(), ModelError> {
        let mut total = 0.0;
        for (a, b, p) in &self.outcomes {
            if *p < 0.0 || !p.is_finite() {
                return Err(ModelError::BadParameter(format!("probability {p}")));
            }
            if a.len() != self.a_pos.len() || b.len() != self.b_pos.len() {
                return Err(ModelError::BadParameter("outcome arity mismatch".into()));
            }
            total += p;
        }
        if (total - 1.0).abs() > COMPONENT_PROB_TOL {
            return Err(ModelError::ProbabilitySum(total));
        }
        Ok(())
    }
}

/// Built-in model selectors.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Binary, l = 1, m even: the pairs (a_i, b_{m/2+i}) and (a_{m/2+i}, b_i)
    /// are independent DSBSs with crossover p.
    CrossPairedDsbs { m: usize, p: f64 },
    /// Binary, l = 1: the pairs (a_i, b_i) are independent DSBSs.
    PairedDsbs { m: usize, p: f64 },
    /// Binary, m = l = 1: a single DSBS pair.
    SingleDsbs { p: f64 },
    /// q = 3, l = 2: rows have a_{i1} ~ (1/2-eps, 2eps, 1/2-eps),
    /// b_{i1} = b_{i2} = -a_{i2} mod 3, and (a_{i1}, b_{i1}) drawn from the
    /// fixed 3x3 table parameterized by (eps, p).
    TernaryCorrelated { m: usize, epsilon: f64, p: f64 },
    /// Arbitrary i.i.d.-across-rows table, parsed from text.
    Custom(CustomTable),
}

/// A joint PMF over (A, B), i.i.d. across independent components.
#[derive(Debug, Clone)]
pub struct JointSourceModel {
    q: PrimeModulus,
    m: usize,
    l: usize,
    components: Vec<Component>,
    label: String,
}

pub fn build_model(kind: &ModelKind) -> Result<JointSourceModel, ModelError> {
    match kind {
        ModelKind::CrossPairedDsbs { m, p } => JointSourceModel::cross_paired_dsbs(*m, *p),
        ModelKind::PairedDsbs { m, p } => JointSourceModel::paired_dsbs(*m, *p),
        ModelKind::SingleDsbs { p } => JointSourceModel::single_dsbs(*p),
        ModelKind::TernaryCorrelated { m, epsilon, p } => {
            JointSourceModel::ternary_correlated(*m, *epsilon, *p)
        }
        ModelKind::Custom(table) => JointSourceModel::from_custom_table(table),
    }
}

fn check_prob(p: f64, what: &str) -> Result<(), ModelError> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(ModelError::BadParameter(format!(
            "{what} = {p} not in [0, 1]"
        )));
    }
    Ok(())
}

/// DSBS pair table: uniform marginals, crossover probability p.
fn dsbs_outcomes(p: f64) -> Vec<(Vec<u32>, Vec<u32>, f64)> {
    let same = (1.0 - p) / 2.0;
    let diff = p / 2.0;
    let all = [
        (vec![0], vec![0], same),
        (vec![0], vec![1], diff),
        (vec![1], vec![0], diff),
        (vec![1], vec![1], same),
    ];
    all.into_iter().filter(|(_, _, pr)| *pr > 0.0).collect()
}

impl JointSourceModel {
    pub fn cross_paired_dsbs(m: usize, p: f64) -> Result<Self, ModelError> {
        check_prob(p, "p")?;
        if m == 0 || m % 2 != 0 {
            return Err(ModelError::BadParameter(format!(
                "m = {m} must be even and positive"
            )));
        }
        let q = PrimeModulus::new(2)?;
        let half = m / 2;
        let mut components = Vec::with_capacity(m);
        for i in 0..half {
            // (a_i, b_{m/2+i}) is a DSBS
            components.push(Component {
                a_pos: vec![(i, 0)],
                b_pos: vec![(half + i, 0)],
                outcomes: dsbs_outcomes(p),
            });
            // (a_{m/2+i}, b_i) is a DSBS
            components.push(Component {
                a_pos: vec![(half + i, 0)],
                b_pos: vec![(i, 0)],
                outcomes: dsbs_outcomes(p),
            });
        }
        Self::assemble(
            q,
            m,
            1,
            components,
            format!("cross-paired-dsbs(m={m}, p={p})"),
        )
    }

    pub fn paired_dsbs(m: usize, p: f64) -> Result<Self, ModelError> {
        check_prob(p, "p")?;
        if m == 0 {
            return Err(ModelError::BadParameter("m must be positive".into()));
        }
        let q = PrimeModulus::new(2)?;
        let components = (0..m)
            .map(|i| Component {
                a_pos: vec![(i, 0)],
                b_pos: vec![(i, 0)],
                outcomes: dsbs_outcomes(p),
            })
            .collect();
        Self::assemble(q, m, 1, components, format!("paired-dsbs(m={m}, p={p})"))
    }

    pub fn single_dsbs(p: f64) -> Result<Self, ModelError> {
        let mut model = Self::paired_dsbs(1, p)?;
        model.label = format!("single-dsbs(p={p})");
        Ok(model)
    }

    pub fn ternary_correlated(m: usize, epsilon: f64, p: f64) -> Result<Self, ModelError> {
        check_prob(p, "p")?;
        if !(0.0..=0.5).contains(&epsilon) || !epsilon.is_finite() {
            return Err(ModelError::BadParameter(format!(
                "epsilon = {epsilon} not in [0, 1/2]"
            )));
        }
        if m == 0 {
            return Err(ModelError::BadParameter("m must be positive".into()));
        }
        let q = PrimeModulus::new(3)?;
        let half = 0.5 - epsilon;
        // P_{a_{i1}, b_{i1}} as a (a1, b1, prob) list; rows index a1, columns b1.
        let table = [
            (0u32, 0u32, half * (1.0 - p)),
            (0, 1, half * p),
            (1, 0, 2.0 * epsilon * p),
            (1, 2, 2.0 * epsilon * (1.0 - p)),
            (2, 1, half * (1.0 - p)),
            (2, 2, half * p),
        ];
        let outcomes: Vec<(Vec<u32>, Vec<u32>, f64)> = table
            .into_iter()
            .filter(|(_, _, pr)| *pr > 0.0)
            .map(|(a1, b1, pr)| {
                let a2 = (3 - b1) % 3; // a_{i2} = -b_{i1} mod 3
                let b2 = b1; // b_{i2} = b_{i1}
                (vec![a1, a2], vec![b1, b2], pr)
            })
            .collect();
        let components = (0..m)
            .map(|i| Component {
                a_pos: vec![(i, 0), (i, 1)],
                b_pos: vec![(i, 0), (i, 1)],
                outcomes: outcomes.clone(),
            })
            .collect();
        Self::assemble(
            q,
            m,
            2,
            components,
            format!("ternary-correlated(m={m}, eps={epsilon}, p={p})"),
        )
    }

    pub fn from_custom_table(table: &CustomTable) -> Result<Self, ModelError> {
        let q = PrimeModulus::new(table.q)?;
        let (m, l, arity) = (table.m, table.l, table.arity);
        if m == 0 || l == 0 {
            return Err(ModelError::Table("m and l must be positive".into()));
        }
        let rows_per_draw = if arity == l {
            1
        } else if arity == 2 * l {
            if m % 2 != 0 {
                return Err(ModelError::Table("arity 2l requires even m".into()));
            }
            2
        } else {
            return Err(ModelError::Table(format!(
                "arity {arity} must be l (one row per draw) or 2l (rows i and m/2+i per draw)"
            )));
        };
        let mut total = 0.0;
        for (a, b, pr) in &table.rows {
            if a.len() != arity || b.len() != arity {
                return Err(ModelError::Table(
                    "wrong number of entries in a support line".into(),
                ));
            }
            for &e in a.iter().chain(b.iter()) {
                if e >= table.q {
                    return Err(ModelError::Table(format!(
                        "entry {e} out of range for F_{}",
                        table.q
                    )));
                }
            }
            if *pr < 0.0 || !pr.is_finite() {
                return Err(ModelError::Table(format!("bad probability {pr}")));
            }
            total += pr;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(ModelError::ProbabilitySum(total));
        }
        // Renormalize away parse rounding so components validate at 1e-12.
        let outcomes: Vec<(Vec<u32>, Vec<u32>, f64)> = table
            .rows
            .iter()
            .filter(|(_, _, pr)| *pr > 0.0)
            .map(|(a, b, pr)| (a.clone(), b.clone(), pr / total))
            .collect();
        let draws = m / rows_per_draw;
        let components = (0..draws)
            .map(|i| {
                let mut a_pos = Vec::with_capacity(arity);
                for r in 0..rows_per_draw {
                    let row = i + r * draws;
                    for c in 0..l {
                        a_pos.push((row, c));
                    }
                }
                Component {
                    b_pos: a_pos.clone(),
                    a_pos,
                    outcomes: outcomes.clone(),
                }
            })
            .collect();
        Self::assemble(
            q,
            m,
            l,
            components,
            format!("custom(q={}, m={m}, l={l})", table.q),
        )
    }

    fn assemble(
        q: PrimeModulus,
        m: usize,
        l: usize,
        components: Vec<Component>,
        label: String,
    ) -> Result<Self, ModelError> {
        let mut a_seen = vec![false; m * l];
        let mut b_seen = vec![false; m * l];
        for c in &components {
            c.validate()?;
            for &(r, col) in &c.a_pos {
                if r >= m || col >= l || std::mem::replace(&mut a_seen[r * l + col], true) {
                    return Err(ModelError::BadParameter(
                        "components must tile A exactly once".into(),
                    ));
                }
            }
            for &(r, col) in &c.b_pos {
                if r >= m || col >= l || std::mem::replace(&mut b_seen[r * l + col], true) {
                    return Err(ModelError::BadParameter(
                        "components must tile B exactly once".into(),
                    ));
                }
            }
        }
        if a_seen.iter().any(|&s| !s) || b_seen.iter().any(|&s| !s) {
            return Err(ModelError::BadParameter(
                "components leave entries of (A, B) unassigned".into(),
            ));
        }
        Ok(Self {
            q,
            m,
            l,
            components,
            label,
        })
    }

    pub fn q(&self) -> PrimeModulus {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of positive-probability (A, B) outcomes.
    pub fn support_size(&self) -> u128 {
        self.components
            .iter()
            .fold(1u128, |acc, c| acc.saturating_mul(c.outcomes.len() as u128))
    }

    fn check_cap(&self) -> Result<(), ModelError> {
        let size = self.support_size();
        if size > SUPPORT_CAP {
            return Err(ModelError::SupportTooLarge {
                size,
                cap: SUPPORT_CAP,
            });
        }
        Ok(())
    }

    fn write_outcome(&self, choice: &[usize], a: &mut FieldMatrix, b: &mut FieldMatrix) -> f64 {
        let mut prob = 1.0;
        for (c, &k) in self.components.iter().zip(choice) {
            let (av, bv, p) = &c.outcomes[k];
            for (&(r, col), &v) in c.a_pos.iter().zip(av) {
                a.set(r, col, v);
            }
            for (&(r, col), &v) in c.b_pos.iter().zip(bv) {
                b.set(r, col, v);
            }
            prob *= p;
        }
        prob
    }

    /// Exact support walk: every positive-probability (A, B) exactly once.
    pub fn enumerate_support(&self) -> Result<SupportIter<'_>, ModelError> {
        self.check_cap()?;
        Ok(SupportIter {
            model: self,
            choice: vec![0; self.components.len()],
            done: false,
        })
    }

    /// One draw using the caller's generator.
    pub fn sample_with<R: Rng>(&self, rng: &mut R) -> (FieldMatrix, FieldMatrix) {
        let mut a = FieldMatrix::zeros(self.m, self.l, self.q).expect("positive dims");
        let mut b = FieldMatrix::zeros(self.m, self.l, self.q).expect("positive dims");
        let choice: Vec<usize> = self
            .components
            .iter()
            .map(|c| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, (_, _, p)) in c.outcomes.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return k;
                    }
                }
                c.outcomes.len() - 1
            })
            .collect();
        self.write_outcome(&choice, &mut a, &mut b);
        (a, b)
    }

    /// A sampler owning its seeded generator; one per worker thread.
    pub fn sampler(&self, seed: u64) -> ModelSampler<'_> {
        ModelSampler {
            model: self,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

pub struct ModelSampler<'a> {
    model: &'a JointSourceModel,
    rng: ChaCha8Rng,
}

impl ModelSampler<'_> {
    pub fn draw(&mut self) -> (FieldMatrix, FieldMatrix) {
        self.model.sample_with(&mut self.rng)
    }
}

/// Odometer over component outcomes.
pub struct SupportIter<'a> {
    model: &'a JointSourceModel,
    choice: Vec<usize>,
    done: bool,
}

impl Iterator for SupportIter<'_> {
    type Item = (FieldMatrix, FieldMatrix, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let m = self.model;
        let mut a = FieldMatrix::zeros(m.m, m.l, m.q).expect("positive dims");
        let mut b = FieldMatrix::zeros(m.m, m.l, m.q).expect("positive dims");
        let prob = m.write_outcome(&self.choice, &mut a, &mut b);
        // advance
        self.done = true;
        for (slot, c) in self.choice.iter_mut().zip(&m.components) {
            *slot += 1;
            if *slot < c.outcomes.len() {
                self.done = false;
                break;
            }
            *slot = 0;
        }
        Some((a, b, prob))
    }
}

/// Parsed custom-table source: header `q m l arity`, then one line per
/// support point (`arity` a-entries, `arity` b-entries, probability).
#[derive(Debug, Clone, PartialEq)]
pub struct CustomTable {
    pub q: u32,
    pub m: usize,
    pub l: usize,
    pub arity: usize,
    pub rows: Vec<(Vec<u32>, Vec<u32>, f64)>,
}

impl CustomTable {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|s| !s.is_empty() && !s.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| ModelError::Table("empty table".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 4 {
            return Err(ModelError::Table("header must be `q m l arity`".into()));
        }
        let parse_usize = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| ModelError::Table(format!("bad {what}: {s}")))
        };
        let q = parse_usize(head[0], "q")? as u32;
        let m = parse_usize(head[1], "m")?;
        let l = parse_usize(head[2], "l")?;
        let arity = parse_usize(head[3], "arity")?;
        let mut rows = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 * arity + 1 {
                return Err(ModelError::Table(format!(
                    "expected {} fields per line, got {}",
                    2 * arity + 1,
                    fields.len()
                )));
            }
            let mut vals = Vec::with_capacity(2 * arity);
            for f in &fields[..2 * arity] {
                vals.push(
                    f.parse::<u32>()
                        .map_err(|_| ModelError::Table(format!("bad entry {f}")))?,
                );
            }
            let prob = fields[2 * arity]
                .parse::<f64>()
                .map_err(|_| ModelError::Table(format!("bad probability {}", fields[2 * arity])))?;
            rows.push((vals[..arity].to_vec(), vals[arity..].to_vec(), prob));
        }
        if rows.is_empty() {
            return Err(ModelError::Table("no support lines".into()));
        }
        Ok(Self {
            q,
            m,
            l,
            arity,
            rows,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
