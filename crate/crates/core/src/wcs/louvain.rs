//! Louvain modularity optimization on a dense symmetric weight matrix.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{modularity, Partition};

const GAIN_EPS: f64 = 1e-12;

/// Weighted graph in adjacency-list form; `self_loops[i]` holds `W_ii`.
struct Graph {
    neighbours: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    total: f64,
}

impl Graph {
    fn from_dense(w: &DMatrix<f64>) -> Graph {
        let n = w.nrows();
        let mut neighbours = vec![Vec::new(); n];
        let mut self_loops = vec![0.0; n];
        let mut degree = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let v = w[(i, j)];
                if v == 0.0 {
                    continue;
                }
                degree[i] += v;
                if i == j {
                    self_loops[i] = v;
                } else {
                    neighbours[i].push((j, v));
                }
            }
        }
        let total = degree.iter().sum();
        Graph {
            neighbours,
            self_loops,
            degree,
            total,
        }
    }

    fn len(&self) -> usize {
        self.degree.len()
    }

    /// Collapse each community into one node.
    fn aggregate(&self, community: &[usize], count: usize) -> Graph {
        let mut dense = vec![vec![0.0; count]; count];
        for i in 0..self.len() {
            let ci = community[i];
            dense[ci][ci] += self.self_loops[i];
            for &(j, v) in &self.neighbours[i] {
                dense[ci][community[j]] += v;
            }
        }
        let mut neighbours = vec![Vec::new(); count];
        let mut self_loops = vec![0.0; count];
        let mut degree = vec![0.0; count];
        for (a, row) in dense.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                degree[a] += v;
                if a == b {
                    self_loops[a] = v;
                } else {
                    neighbours[a].push((b, v));
                }
            }
        }
        Graph {
            neighbours,
            self_loops,
            degree,
            total: self.total,
        }
    }
}

/// Outcome of a Louvain run, with the modularity after every level of the
/// winning restart.
#[derive(Debug, Clone, PartialEq)]
pub struct LouvainResult {
    pub partition: Partition,
    pub level_modularity: Vec<f64>,
}

/// Independent restarts per call; the best modularity wins, earliest on ties.
pub const RESTARTS: usize = 8;

/// Greedy local moves then aggregation, repeated until a level makes no
/// move. Nodes are swept in a seeded random order fixed per level; among
/// equally good target communities the lowest id wins, and a node only
/// leaves its community for a strictly better one. Once the levels settle,
/// single original nodes are offered moves again and, if any moves, the
/// levels restart from the refined partition.
pub fn louvain(w: &DMatrix<f64>, seed: u64) -> LouvainResult {
    let n = w.nrows();
    let graph = Graph::from_dense(w);
    if n == 0 || graph.total <= 0.0 {
        let partition = Partition::from_assignment((0..n).collect(), w);
        return LouvainResult {
            level_modularity: vec![partition.modularity],
            partition,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<LouvainResult> = None;
    for _ in 0..RESTARTS {
        let run = single_run(w, &graph, &mut rng);
        if best
            .as_ref()
            .is_none_or(|b| run.partition.modularity > b.partition.modularity + GAIN_EPS)
        {
            best = Some(run);
        }
    }
    best.expect("at least one restart")
}

fn single_run(w: &DMatrix<f64>, base: &Graph, rng: &mut ChaCha8Rng) -> LouvainResult {
    let n = base.len();
    // membership[i]: community of original node i
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level_modularity = Vec::new();
    loop {
        let (community, refined) = local_moves(base, membership.clone(), rng);
        let (community, count) = renumber(&community);
        membership = community;
        let mut graph = base.aggregate(&membership, count);
        let mut merged = false;
        loop {
            let (community, moved) = local_moves(&graph, (0..graph.len()).collect(), rng);
            if !moved {
                break;
            }
            merged = true;
            let (community, next) = renumber(&community);
            for m in membership.iter_mut() {
                *m = community[*m];
            }
            level_modularity.push(modularity(w, &membership));
            if next == graph.len() {
                break;
            }
            graph = graph.aggregate(&community, next);
        }
        if refined && !merged {
            level_modularity.push(modularity(w, &membership));
        }
        if !refined && !merged {
            break;
        }
    }
    if level_modularity.is_empty() {
        level_modularity.push(modularity(w, &membership));
    }
    LouvainResult {
        partition: Partition::from_assignment(membership, w),
        level_modularity,
    }
}

/// Sweep nodes in a random order, moving each to its best neighbouring
/// community or to a fresh one of its own, until a full sweep moves nothing.
fn local_moves(g: &Graph, mut community: Vec<usize>, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = g.len();
    let m2 = g.total;
    let mut tot = vec![0.0; n];
    let mut size = vec![0usize; n];
    for i in 0..n {
        tot[community[i]] += g.degree[i];
        size[community[i]] += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &i in &order {
            let ci = community[i];
            let ki = g.degree[i];
            for &(j, v) in &g.neighbours[i] {
                let c = community[j];
                if link[c] == 0.0 {
                    touched.push(c);
                }
                link[c] += v;
            }
            tot[ci] -= ki;
            // Gain of joining c, up to a positive factor: k_{i,c} − Σ_tot(c)·k_i/2m.
            let gain = |c: usize, link: &[f64]| link[c] - tot[c] * ki / m2;
            let mut best = ci;
            let mut best_gain = gain(ci, &link);
            touched.sort_unstable();
            for &c in &touched {
                if c == ci {
                    continue;
                }
                let g_c = gain(c, &link);
                if g_c > best_gain + GAIN_EPS {
                    best = c;
                    best_gain = g_c;
                }
            }
            if size[ci] > 1 && best_gain < -GAIN_EPS {
                if let Some(empty) = size.iter().position(|&s| s == 0) {
                    best = empty;
                }
            }
            tot[best] += ki;
            if best != ci {
                size[ci] -= 1;
                size[best] += 1;
                community[i] = best;
                moved = true;
                any_move = true;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
    }
    (community, any_move)
}

/// Relabel communities 0.. in order of first appearance.
fn renumber(community: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    let out = community
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect();
    (out, next)
}
