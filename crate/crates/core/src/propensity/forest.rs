//! Random forest of Gini classification trees for `P(t = 1 | x)`.

use ndarray::{Array2, ArrayView1};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{bootstrap_indices, derive_seed, rng_from, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `floor(sqrt(p))`.
    pub mtry: Option<usize>,
    /// Train each tree on a bootstrap resample (otherwise on the full sample).
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 6,
            min_leaf: 10,
            mtry: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
enum Node {
    Leaf {
        prob: f64,
    },
    Split {
        variable: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTree {
    nodes: Vec<Node>,
}

impl ProbabilityTree {
    fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { prob } => return *prob,
                Node::Split {
                    variable,
                    threshold,
                    left,
                    right,
                } => at = if x[*variable] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: ForestParams,
    pub seed: u64,
    trees: Vec<ProbabilityTree>,
}

impl RandomForest {
    pub fn fit(x: &Array2<f64>, t: &[u8], params: ForestParams, seed: u64) -> Self {
        let p = x.ncols();
        let mtry = params
            .mtry
            .unwrap_or_else(|| ((p as f64).sqrt().floor() as usize).max(1))
            .clamp(1, p);
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng_from(derive_seed(seed, b as u64));
                let rows = if params.bootstrap {
                    bootstrap_indices(x.nrows(), &mut rng)
                } else {
                    (0..x.nrows()).collect()
                };
                let mut builder = TreeBuilder {
                    x,
                    t,
                    params: &params,
                    mtry,
                    rng,
                    nodes: Vec::new(),
                };
                builder.grow(rows, 0);
                ProbabilityTree {
                    nodes: builder.nodes,
                }
            })
            .collect();
        Self {
            params,
            seed,
            trees,
        }
    }

    /// Mean over trees of the leaf treated-fraction.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.trees.iter().map(|tr| tr.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn trees(&self) -> &[ProbabilityTree] {
        &self.trees
    }
}

struct TreeBuilder<'a> {
    x: &'a Array2<f64>,
    t: &'a [u8],
    params: &'a ForestParams,
    mtry: usize,
    rng: Rng,
    nodes: Vec<Node>,
}

fn gini(treated: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let q = treated / total;
    2.0 * q * (1.0 - q)
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let treated = rows.iter().filter(|&&i| self.t[i] == 1).count();
        let prob = treated as f64 / rows.len().max(1) as f64;
        self.nodes.push(Node::Leaf { prob });
        if depth >= self.params.max_depth
            || rows.len() < 2 * self.params.min_leaf.max(1)
            || treated == 0
            || treated == rows.len()
        {
            return id;
        }
        let Some((variable, threshold)) = self.best_split(&rows, treated) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.x[[i, variable]] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            variable,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&mut self, rows: &[usize], treated: usize) -> Option<(usize, f64)> {
        let n = rows.len() as f64;
        let parent = gini(treated as f64, n);
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<(f64, usize, f64)> = None;
        let features = sample(&mut self.rng, self.x.ncols(), self.mtry);
        let mut order: Vec<(f64, u8)> = Vec::with_capacity(rows.len());
        for j in features.iter() {
            order.clear();
            order.extend(rows.iter().map(|&i| (self.x[[i, j]], self.t[i])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_treated = 0.0;
            for k in 0..order.len() - 1 {
                left_treated += order[k].1 as f64;
                let nl = (k + 1) as f64;
                if k + 1 < min_leaf || order.len() - k - 1 < min_leaf {
                    continue;
                }
                if order[k].0 == order[k + 1].0 {
                    continue;
                }
                let nr = n - nl;
                let impurity = (nl * gini(left_treated, nl)
                    + nr * gini(treated as f64 - left_treated, nr))
                    / n;
                let gain = parent - impurity;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, j, 0.5 * (order[k].0 + order[k + 1].0)));
                }
            }
        }
        best.map(|(_, j, c)| (j, c))
    }
}
