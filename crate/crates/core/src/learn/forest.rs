//! Random forest of Gini-split decision trees.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestHyper {
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub features_per_split: usize,
    /// Train each tree on a bootstrap resample rather than the full set.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestHyper {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: 8,
            min_leaf: 2,
            features_per_split: 9,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "kebab-case")]
pub enum Node {
    /// `x[slot] <= threshold` goes left.
    Split {
        slot: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        p: f64,
    },
}

/// Nodes in preorder; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { p } => return p,
                Node::Split { slot, threshold, left, right } => {
                    i = if x[slot] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: Vec<Tree>,
}

impl ForestParams {
    /// Arithmetic mean of the trees' leaf probabilities.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub(super) fn validate(&self, dim: usize) -> bool {
        !self.trees.is_empty()
            && self.trees.iter().all(|t| {
                let n = t.nodes.len();
                n > 0
                    && t.nodes.iter().enumerate().all(|(i, node)| match *node {
                        Node::Leaf { p } => (0.0..=1.0).contains(&p),
                        Node::Split { slot, threshold, left, right } => {
                            slot < dim && threshold.is_finite() && left > i && right > i && left < n && right < n
                        }
                    })
            })
    }
}

struct Grower<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [bool],
    h: &'a ForestHyper,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    /// Scratch buffer of (value, label) pairs.
    column: Vec<(f64, bool)>,
}

struct Split {
    slot: usize,
    threshold: f64,
    impurity: f64,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl Grower<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let pos = idx.iter().filter(|&&i| self.ys[i]).count();
        self.nodes.push(Node::Leaf {
            p: pos as f64 / idx.len() as f64,
        });
        self.nodes.len() - 1
    }

    /// Lowest weighted Gini split on `slot`, thresholds at midpoints between
    /// consecutive distinct values.
    fn best_on(&mut self, idx: &[usize], slot: usize) -> Option<Split> {
        self.column.clear();
        self.column.extend(idx.iter().map(|&i| (self.xs[i][slot], self.ys[i])));
        self.column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.column.len();
        let total_pos = self.column.iter().filter(|c| c.1).count();
        let min_leaf = self.h.min_leaf.max(1);
        let mut left_pos = 0;
        let mut best: Option<Split> = None;
        for k in 0..n - 1 {
            if self.column[k].1 {
                left_pos += 1;
            }
            let nl = k + 1;
            let (a, b) = (self.column[k].0, self.column[k + 1].0);
            if a == b || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let imp = (nl as f64 * gini(left_pos, nl) + (n - nl) as f64 * gini(total_pos - left_pos, n - nl)) / n as f64;
            if best.as_ref().map_or(true, |s| imp < s.impurity) {
                let mid = a + (b - a) / 2.0;
                let threshold = if mid < b { mid } else { a };
                best = Some(Split { slot, threshold, impurity: imp });
            }
        }
        best
    }

    fn best_among(&mut self, idx: &[usize], slots: &[usize]) -> Option<Split> {
        let mut best: Option<Split> = None;
        for &s in slots {
            if let Some(c) = self.best_on(idx, s) {
                if best.as_ref().map_or(true, |b| c.impurity < b.impurity) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let pos = idx.iter().filter(|&&i| self.ys[i]).count();
        if depth >= self.h.max_depth || pos == 0 || pos == idx.len() || idx.len() < 2 * self.h.min_leaf.max(1) {
            return self.leaf(idx);
        }
        let dim = self.xs[0].len();
        let k = self.h.features_per_split.clamp(1, dim);
        let mut subset = sample(&mut self.rng, dim, k).into_vec();
        subset.sort_unstable();
        let mut split = self.best_among(idx, &subset);
        if split.is_none() {
            // Nothing in the sample varies within this node; fall back to
            // the remaining slots.
            let rest: Vec<usize> = (0..dim).filter(|s| subset.binary_search(s).is_err()).collect();
            split = self.best_among(idx, &rest);
        }
        let Some(split) = split else {
            return self.leaf(idx);
        };
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { p: 0.0 });
        let xs = self.xs;
        idx.sort_by_key(|&i| xs[i][split.slot] > split.threshold);
        let cut = idx.partition_point(|&i| xs[i][split.slot] <= split.threshold);
        let (l, r) = idx.split_at_mut(cut);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            slot: split.slot,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }
}

/// Random generator for tree `index`: the master seed selects the key and
/// the tree index selects the stream.
fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub(super) fn fit(h: &ForestHyper, xs: &[Vec<f64>], ys: &[bool]) -> Result<ForestParams, Error> {
    if h.trees == 0 {
        return Err(Error::Data("forest needs at least one tree".into()));
    }
    let n = xs.len();
    let trees = (0..h.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(h.seed, t);
            let mut idx: Vec<usize> = if h.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut g = Grower {
                xs,
                ys,
                h,
                rng,
                nodes: Vec::new(),
                column: Vec::with_capacity(n),
            };
            g.grow(&mut idx, 0);
            Tree { nodes: g.nodes }
        })
        .collect();
    Ok(ForestParams { trees })
}
