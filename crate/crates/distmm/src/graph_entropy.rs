//! Körner characteristic graphs and conditional graph entropy.
//!
//! The conditional graph entropy H_{G_X}(X|Y) is the minimum of I(W; X | Y)
//! over auxiliaries W ranging over the maximal independent sets of G_X that
//! contain X, with W - X - Y a Markov chain. The minimization here is an
//! alternating-minimization on the pair (p(w|x), q(w|y)): for fixed p the
//! optimal q is the induced conditional, and for fixed q the optimal p is an
//! exponential-family tilt. Both half-steps are exact minimizers, so the
//! surrogate objective never increases.

use crate::entropy::{pushforward, EntropyError};
use crate::field::FieldMatrix;
use crate::sources::JointSourceModel;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

pub const MAX_VERTICES: usize = 20;
pub const TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 10_000;
pub const RESTARTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("empty support")]
    EmptySupport,
    #[error("{0} vertices exceeds the enumeration limit of {MAX_VERTICES}")]
    TooManyVertices(usize),
    #[error("joint probabilities sum to {0}, not 1")]
    ProbabilitySum(f64),
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// Characteristic graph of a function g(x, y) under a joint PMF p(x, y):
/// vertices are the x-alphabet indices, and x1 ~ x2 iff some y co-occurs
/// with both and distinguishes them (g(x1, y) != g(x2, y)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicGraph {
    vertex_count: usize,
    adjacency: Vec<Vec<bool>>,
}

impl CharacteristicGraph {
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![vec![false; vertex_count]; vertex_count];
        for &(i, j) in edges {
            assert!(i != j && i < vertex_count && j < vertex_count);
            adjacency[i][j] = true;
            adjacency[j][i] = true;
        }
        Self {
            vertex_count,
            adjacency,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.vertex_count {
            for j in (i + 1)..self.vertex_count {
                if self.adjacency[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_empty_graph(&self) -> bool {
        self.edges().is_empty()
    }
}

/// Builds the characteristic graph from a dense joint table over index
/// alphabets: `joint[x][y]` and `g(x, y)`.
pub fn build_graph(
    joint: &[Vec<f64>],
    g: impl Fn(usize, usize) -> u64,
) -> Result<CharacteristicGraph, GraphError> {
    let nx = joint.len();
    if nx == 0 || joint[0].is_empty() {
        return Err(GraphError::EmptySupport);
    }
    let ny = joint[0].len();
    let mut total = 0.0;
    for row in joint {
        for &p in row {
            if p < 0.0 || !p.is_finite() {
                return Err(GraphError::NegativeProbability(p));
            }
            total += p;
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(GraphError::ProbabilitySum(total));
    }
    let mut edges = Vec::new();
    for x1 in 0..nx {
        for x2 in (x1 + 1)..nx {
            let distinguished =
                (0..ny).any(|y| joint[x1][y] > 0.0 && joint[x2][y] > 0.0 && g(x1, y) != g(x2, y));
            if distinguished {
                edges.push((x1, x2));
            }
        }
    }
    Ok(CharacteristicGraph::from_edges(nx, &edges))
}

/// All maximal independent sets, canonically ordered. Runs Bron-Kerbosch
/// with pivoting on the complement graph (independent sets are cliques
/// there).
pub fn maximal_independent_sets(
    graph: &CharacteristicGraph,
) -> Result<Vec<Vec<usize>>, GraphError> {
    let n = graph.vertex_count();
    if n > MAX_VERTICES {
        return Err(GraphError::TooManyVertices(n));
    }
    // complement adjacency
    let comp: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && !graph.has_edge(i, j))
                .collect()
        })
        .collect();
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut r = Vec::new();
    let p: Vec<usize> = (0..n).collect();
    bron_kerbosch(&comp, &mut r, p, Vec::new(), &mut found);
    for set in &mut found {
        set.sort_unstable();
    }
    found.sort();
    debug_assert!((0..n).all(|v| found.iter().any(|s| s.contains(&v))));
    Ok(found)
}

fn bron_kerbosch(
    adj: &[Vec<usize>],
    r: &mut Vec<usize>,
    p: Vec<usize>,
    x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r.clone());
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| adj[u].contains(&v)).count())
        .expect("p or x nonempty");
    let candidates: Vec<usize> = p
        .iter()
        .copied()
        .filter(|v| !adj[pivot].contains(v))
        .collect();
    let mut p = p;
    let mut x = x;
    for v in candidates {
        let new_p = p.iter().copied().filter(|&u| adj[v].contains(&u)).collect();
        let new_x = x.iter().copied().filter(|&u| adj[v].contains(&u)).collect();
        r.push(v);
        bron_kerbosch(adj, r, new_p, new_x, out);
        r.pop();
        p.retain(|&u| u != v);
        x.push(v);
    }
}

/// Result of the conditional graph entropy minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct CondGraphEntropy {
    /// Best I(W; X | Y) found, in bits.
    pub value: f64,
    /// True when every restart reached the iterate tolerance.
    pub converged: bool,
    /// Whether the surrogate objective was non-increasing at every step.
    pub monotone: bool,
    /// Max - min of the per-restart final values.
    pub restart_spread: f64,
}

/// Minimizes I(W; X | Y) over p(w|x) supported on {w : x in w}.
pub fn conditional_graph_entropy(
    graph: &CharacteristicGraph,
    joint: &[Vec<f64>],
) -> Result<CondGraphEntropy, GraphError> {
    let sets = maximal_independent_sets(graph)?;
    let instance = Instance::new(joint, &sets)?;
    let runs: Vec<RestartOutcome> = (0..RESTARTS)
        .into_par_iter()
        .map(|restart| instance.run(restart as u64))
        .collect();
    let value = runs.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let worst = runs
        .iter()
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CondGraphEntropy {
        value,
        converged: runs.iter().all(|r| r.converged),
        monotone: runs.iter().all(|r| r.monotone),
        restart_spread: worst - value,
    })
}

struct RestartOutcome {
    value: f64,
    converged: bool,
    monotone: bool,
}

/// Precomputed tables for one minimization instance.
struct Instance {
    nx: usize,
    ny: usize,
    nw: usize,
    p_xy: Vec<Vec<f64>>,
    p_x: Vec<f64>,
    p_y: Vec<f64>,
    /// w indices valid for each x (sets containing x).
    valid_w: Vec<Vec<usize>>,
}

impl Instance {
    fn new(joint: &[Vec<f64>], sets: &[Vec<usize>]) -> Result<Self, GraphError> {
        let nx = joint.len();
        let ny = joint[0].len();
        let p_x: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
        let p_y: Vec<f64> = (0..ny)
            .map(|y| joint.iter().map(|row| row[y]).sum())
            .collect();
        let valid_w: Vec<Vec<usize>> = (0..nx)
            .map(|x| {
                sets.iter()
                    .enumerate()
                    .filter(|(_, s)| s.contains(&x))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Ok(Self {
            nx,
            ny,
            nw: sets.len(),
            p_xy: joint.to_vec(),
            p_x,
            p_y,
            valid_w,
        })
    }

    fn induced_q(&self, p_wx: &[Vec<f64>]) -> Vec<Vec<f64>> {
        // q(w|y) = sum_x p(x|y) p(w|x)
        let mut q = vec![vec![0.0; self.ny]; self.nw];
        for y in 0..self.ny {
            if self.p_y[y] <= 0.0 {
                continue;
            }
            for x in 0..self.nx {
                let px_given_y = self.p_xy[x][y] / self.p_y[y];
                if px_given_y <= 0.0 {
                    continue;
                }
                for &w in &self.valid_w[x] {
                    q[w][y] += px_given_y * p_wx[w][x];
                }
            }
        }
        q
    }

    /// Surrogate F(p, q) = sum p(x,y) p(w|x) ln(p(w|x)/q(w|y)), in nats.
    fn surrogate(&self, p_wx: &[Vec<f64>], q_wy: &[Vec<f64>]) -> f64 {
        let mut f = 0.0;
        for x in 0..self.nx {
            for y in 0..self.ny {
                let pxy = self.p_xy[x][y];
                if pxy <= 0.0 {
                    continue;
                }
                for &w in &self.valid_w[x] {
                    let p = p_wx[w][x];
                    if p <= 0.0 {
                        continue;
                    }
                    f += pxy * p * (p.ln() - q_wy[w][y].max(f64::MIN_POSITIVE).ln());
                }
            }
        }
        f
    }

    fn run(&self, restart: u64) -> RestartOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6170_6800 + restart);
        let mut p_wx = vec![vec![0.0; self.nx]; self.nw];
        for x in 0..self.nx {
            let ws = &self.valid_w[x];
            if restart == 0 {
                for &w in ws {
                    p_wx[w][x] = 1.0 / ws.len() as f64;
                }
            } else {
                let mut total = 0.0;
                let weights: Vec<f64> = ws.iter().map(|_| rng.random::<f64>() + 1e-3).collect();
                for w in &weights {
                    total += w;
                }
                for (&w, weight) in ws.iter().zip(&weights) {
                    p_wx[w][x] = weight / total;
                }
            }
        }

        let mut q_wy = self.induced_q(&p_wx);
        let mut prev = self.surrogate(&p_wx, &q_wy);
        let mut converged = false;
        let mut monotone = true;
        for _ in 0..MAX_ITERATIONS {
            // p-step: p(w|x) proportional to exp(sum_y p(y|x) ln q(w|y))
            for x in 0..self.nx {
                if self.p_x[x] <= 0.0 {
                    continue;
                }
                let ws = &self.valid_w[x];
                let mut logs = Vec::with_capacity(ws.len());
                for &w in ws {
                    let mut log_t = 0.0;
                    for y in 0..self.ny {
                        let py_given_x = self.p_xy[x][y] / self.p_x[x];
                        if py_given_x > 0.0 {
                            log_t += py_given_x * q_wy[w][y].max(f64::MIN_POSITIVE).ln();
                        }
                    }
                    logs.push(log_t);
                }
                let max_log = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                let unnorm: Vec<f64> = logs.iter().map(|&t| (t - max_log).exp()).collect();
                for u in &unnorm {
                    total += u;
                }
                for (&w, u) in ws.iter().zip(&unnorm) {
                    p_wx[w][x] = u / total;
                }
            }
            // q-step: exact minimizer given p
            q_wy = self.induced_q(&p_wx);
            let current = self.surrogate(&p_wx, &q_wy);
            if current > prev + 1e-12 {
                monotone = false;
            }
            if (prev - current).abs() <= TOLERANCE {
                prev = current;
                converged = true;
                break;
            }
            prev = current;
        }
        RestartOutcome {
            value: prev / std::f64::consts::LN_2,
            converged,
            monotone,
        }
    }
}

/// Hybrid-scheme rate built on the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridRateReport {
    /// H of the side information made available to the receiver.
    pub h_side: f64,
    /// H_{G_A}(A | Y), the optimized conditional graph entropy.
    pub h_graph: f64,
    /// H(A | Y), the unstructured upper bound on `h_graph`.
    pub h_conditional: f64,
    /// The achievable sum rate for the variant.
    pub rate: f64,
    pub converged: bool,
    pub restart_spread: f64,
}

/// Which side information the hybrid scheme grants the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideInformation {
    /// Y = A + B mod q, obtained by a first structured pass; the sum rate is
    /// 2 H(Y) + H_{G_A}(A | Y) with g(A, Y) = A^T (Y - A).
    ModuloSum,
    /// Y = B available directly; the sum rate is H(B) + H_{G_A}(A | B)
    /// with g(A, B) = A^T B.
    SourceB,
}

/// Computes the hybrid rate for a vector model (l = 1) with small alphabets.
pub fn rate_km_or(
    model: &JointSourceModel,
    variant: SideInformation,
) -> Result<HybridRateReport, GraphError> {
    if model.l() != 1 {
        return Err(GraphError::Entropy(EntropyError::ModelShape {
            needed: "l = 1".into(),
            got: format!("l = {}", model.l()),
        }));
    }
    let q = model.q();
    let y_of = move |a: &FieldMatrix, b: &FieldMatrix| -> Vec<u32> {
        match variant {
            SideInformation::ModuloSum => a.add(b).expect("same shape").entries().to_vec(),
            SideInformation::SourceB => b.entries().to_vec(),
        }
    };
    // index the alphabets of A and Y over the support
    let table = pushforward(model, |a, b| (a.entries().to_vec(), y_of(a, b)))?;
    let mut x_index: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut y_index: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for ((xa, ya), _) in table.iter() {
        let next = x_index.len();
        x_index.entry(xa.clone()).or_insert(next);
        let next = y_index.len();
        y_index.entry(ya.clone()).or_insert(next);
    }
    if x_index.len() > MAX_VERTICES {
        return Err(GraphError::TooManyVertices(x_index.len()));
    }
    let mut joint = vec![vec![0.0; y_index.len()]; x_index.len()];
    for ((xa, ya), p) in table.iter() {
        joint[x_index[xa]][y_index[ya]] += p;
    }
    let x_values: Vec<Vec<u32>> = x_index.keys().cloned().collect();
    let y_values: Vec<Vec<u32>> = y_index.keys().cloned().collect();
    // g(A, Y) = A^T (Y - A) for the modulo-sum variant, A^T Y for Y = B;
    // both reduce to the true product A^T B on the support.
    let g = |x: usize, y: usize| -> u64 {
        let a = &x_values[x];
        let yv = &y_values[y];
        let mut acc = 0u64;
        for (&ai, &yi) in a.iter().zip(yv) {
            let other = match variant {
                SideInformation::ModuloSum => q.sub(yi, ai),
                SideInformation::SourceB => yi,
            };
            acc += ai as u64 * other as u64;
        }
        acc % q.value() as u64
    };
    let graph = build_graph(&joint, g)?;
    let optimum = conditional_graph_entropy(&graph, &joint)?;

    let h_y = table.map_keys(|(_, ya)| ya.clone()).entropy_bits();
    let h_xy = table.entropy_bits();
    let h_conditional = h_xy - h_y;
    let rate = match variant {
        SideInformation::ModuloSum => 2.0 * h_y + optimum.value,
        SideInformation::SourceB => h_y + optimum.value,
    };
    Ok(HybridRateReport {
        h_side: h_y,
        h_graph: optimum.value,
        h_conditional,
        rate,
        converged: optimum.converged,
        restart_spread: optimum.restart_spread,
    })
}

/// Independent grid-search minimizer for desk-scale verification.
///
/// Walks all per-vertex simplices over the valid independent sets with the
/// given step and evaluates I(W; X | Y) directly; it shares no code with the
/// alternating-minimization path. Cost is exponential in the number of free
/// vertices, so keep instances at <= 3 vertices / <= 3 sets.
pub mod grid_oracle {
    use super::*;

    pub fn minimize(
        graph: &CharacteristicGraph,
        joint: &[Vec<f64>],
        step: f64,
    ) -> Result<f64, GraphError> {
        let sets = maximal_independent_sets(graph)?;
        let nx = joint.len();
        let ny = joint[0].len();
        let p_y: Vec<f64> = (0..ny)
            .map(|y| joint.iter().map(|row| row[y]).sum())
            .collect();
        let valid_w: Vec<Vec<usize>> = (0..nx)
            .map(|x| {
                sets.iter()
                    .enumerate()
                    .filter(|(_, s)| s.contains(&x))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let steps = (1.0 / step).round() as usize;
        let mut best = f64::INFINITY;
        let mut assignment: Vec<Vec<f64>> = valid_w.iter().map(|ws| vec![0.0; ws.len()]).collect();
        search(
            joint,
            &p_y,
            &valid_w,
            sets.len(),
            steps,
            0,
            &mut assignment,
            &mut best,
        );
        Ok(best)
    }

    /// Recursively grids the simplex of each vertex in turn.
    #[allow(clippy::too_many_arguments)]
    fn search(
        joint: &[Vec<f64>],
        p_y: &[f64],
        valid_w: &[Vec<usize>],
        nw: usize,
        steps: usize,
        x: usize,
        assignment: &mut Vec<Vec<f64>>,
        best: &mut f64,
    ) {
        if x == valid_w.len() {
            let value = objective(joint, p_y, valid_w, nw, assignment);
            if value < *best {
                *best = value;
            }
            return;
        }
        let k = valid_w[x].len();
        let mut weights = vec![0usize; k];
        grid_simplex(steps, k, 0, steps, &mut weights, &mut |w| {
            for (slot, &ticks) in assignment[x].iter_mut().zip(w) {
                *slot = ticks as f64 / steps as f64;
            }
            // recursion clones are avoided: assignment[x] is rewritten in place
            search(joint, p_y, valid_w, nw, steps, x + 1, assignment, best);
        });
    }

    fn grid_simplex(
        steps: usize,
        k: usize,
        idx: usize,
        remaining: usize,
        weights: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if idx == k - 1 {
            weights[idx] = remaining;
            visit(weights);
            return;
        }
        for t in 0..=remaining {
            weights[idx] = t;
            grid_simplex(steps, k, idx + 1, remaining - t, weights, visit);
        }
    }

    fn objective(
        joint: &[Vec<f64>],
        p_y: &[f64],
        valid_w: &[Vec<usize>],
        nw: usize,
        assignment: &[Vec<f64>],
    ) -> f64 {
        let nx = joint.len();
        let ny = joint[0].len();
        // I(W; X | Y) = sum_y p(y) [ H(W|y) - sum_x p(x|y) H(W|x) ]
        let mut value = 0.0;
        for y in 0..ny {
            if p_y[y] <= 0.0 {
                continue;
            }
            let mut q_w = vec![0.0; nw];
            let mut cond = 0.0;
            for x in 0..nx {
                let px_given_y = joint[x][y] / p_y[y];
                if px_given_y <= 0.0 {
                    continue;
                }
                let mut h_wx = 0.0;
                for (slot, &w) in valid_w[x].iter().enumerate() {
                    let p = assignment[x][slot];
                    q_w[w] += px_given_y * p;
                    if p > 0.0 {
                        h_wx -= p * p.log2();
                    }
                }
                cond += px_given_y * h_wx;
            }
            let h_w: f64 = q_w
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.log2())
                .sum();
            value += p_y[y] * (h_w - cond);
        }
        value
    }
}
