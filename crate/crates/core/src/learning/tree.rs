//! Binary CART classifier.
//!
//! Splits minimize weighted Gini impurity over midpoint thresholds between
//! consecutive distinct values. Candidates are totally ordered by
//! `(impurity, column, threshold)`, so the fitted tree does not depend on the
//! order in which candidate columns were visited. Zero-gain splits are
//! allowed; a node becomes a leaf when it is pure, at `max_depth`, too small
//! to give both children `min_leaf` rows, or has no non-constant candidate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::EncodedMatrix;
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `ceil(sqrt(m))` columns per split.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, m: usize) -> usize {
        match self {
            MaxFeatures::All => m,
            MaxFeatures::Sqrt => ((m as f64).sqrt().ceil() as usize).clamp(1, m.max(1)),
            MaxFeatures::Count(k) => k.clamp(1, m.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 12, min_leaf: 1, max_features: MaxFeatures::All }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf { neg: u32, pos: u32 },
    Split { col: u32, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    width: usize,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy)]
struct Candidate {
    score: f64,
    col: usize,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => (self.score, self.col, self.threshold) < (o.score, o.col, o.threshold),
        }
    }
}

struct Builder<'a> {
    x: &'a EncodedMatrix,
    y: &'a [u8],
    params: TreeParams,
    n_candidates: usize,
    nodes: Vec<Node>,
    columns: Vec<usize>,
    pairs: Vec<(f64, u8)>,
}

impl DecisionTree {
    /// Fits on the rows listed in `samples` (repeats allowed, as in a
    /// bootstrap). `rng` is only consumed when `max_features` is not `All`.
    pub(crate) fn fit_rows(
        x: &EncodedMatrix,
        y: &[u8],
        samples: &mut [usize],
        params: TreeParams,
        rng: &mut StreamRng,
    ) -> DecisionTree {
        let m = x.cols();
        let mut b = Builder {
            x,
            y,
            params,
            n_candidates: params.max_features.resolve(m),
            nodes: Vec::new(),
            columns: (0..m).collect(),
            pairs: Vec::with_capacity(samples.len()),
        };
        b.grow(samples, 0, rng);
        DecisionTree { width: m, nodes: b.nodes }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Index of the leaf `row` lands in.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { col, threshold, left, right } => {
                    i = if row[col as usize] <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn predict_accept_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { neg, pos } => pos as f64 / (neg + pos) as f64,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Encoded columns used by at least one split.
    pub fn used_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { col, .. } => Some(*col as usize),
                Node::Leaf { .. } => None,
            })
            .collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    }
}

impl Builder<'_> {
    fn grow(&mut self, samples: &mut [usize], depth: usize, rng: &mut StreamRng) -> u32 {
        let id = self.nodes.len() as u32;
        let pos = samples.iter().filter(|&&i| self.y[i] == 1).count();
        let neg = samples.len() - pos;
        self.nodes.push(Node::Leaf { neg: neg as u32, pos: pos as u32 });

        if pos == 0 || neg == 0 || depth >= self.params.max_depth || samples.len() < 2 * self.params.min_leaf {
            return id;
        }
        let Some(best) = self.best_split(samples, pos, rng) else {
            return id;
        };

        let x = self.x;
        let mut lo = 0;
        let mut hi = samples.len();
        while lo < hi {
            if x.get(samples[lo], best.col) <= best.threshold {
                lo += 1;
            } else {
                hi -= 1;
                samples.swap(lo, hi);
            }
        }
        let (left_rows, right_rows) = samples.split_at_mut(lo);
        let left = self.grow(left_rows, depth + 1, rng);
        let right = self.grow(right_rows, depth + 1, rng);
        self.nodes[id as usize] = Node::Split { col: best.col as u32, threshold: best.threshold, left, right };
        id
    }

    fn best_split(&mut self, samples: &[usize], total_pos: usize, rng: &mut StreamRng) -> Option<Candidate> {
        let m = self.columns.len();
        let sample_all = self.n_candidates >= m;
        let mut best: Option<Candidate> = None;
        let mut evaluated = 0;
        let mut drawn = 0;
        // Partial Fisher-Yates over `columns`: keep drawing until
        // `n_candidates` non-constant columns have been evaluated.
        while evaluated < self.n_candidates && drawn < m {
            let col = if sample_all {
                drawn
            } else {
                let j = rng.random_range(drawn..m);
                self.columns.swap(drawn, j);
                self.columns[drawn]
            };
            drawn += 1;
            if let Some(c) = self.best_threshold(samples, total_pos, col) {
                evaluated += 1;
                if c.beats(&best) {
                    best = Some(c);
                }
            } else if self.is_constant(samples, col) {
                continue;
            } else {
                evaluated += 1;
            }
        }
        best
    }

    fn is_constant(&self, samples: &[usize], col: usize) -> bool {
        let first = self.x.get(samples[0], col);
        samples.iter().all(|&i| self.x.get(i, col) == first)
    }

    fn best_threshold(&mut self, samples: &[usize], total_pos: usize, col: usize) -> Option<Candidate> {
        let n = samples.len();
        let min_leaf = self.params.min_leaf;
        self.pairs.clear();
        self.pairs.extend(samples.iter().map(|&i| (self.x.get(i, col), self.y[i])));
        self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let nf = n as f64;
        let mut best: Option<Candidate> = None;
        let mut left_pos = 0usize;
        for k in 1..n {
            left_pos += self.pairs[k - 1].1 as usize;
            let (prev, cur) = (self.pairs[k - 1].0, self.pairs[k].0);
            if prev == cur || k < min_leaf || n - k < min_leaf {
                continue;
            }
            let nl = k as f64;
            let nr = nf - nl;
            let pl = left_pos as f64;
            let pr = (total_pos - left_pos) as f64;
            // Weighted Gini up to a constant factor 2/n.
            let score = pl * (nl - pl) / nl + pr * (nr - pr) / nr;
            let cand = Candidate { score, col, threshold: prev + (cur - prev) / 2.0 };
            if cand.beats(&best) {
                best = Some(cand);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn fit(rows: &[Vec<f64>], y: &[u8], params: TreeParams) -> DecisionTree {
        let x = EncodedMatrix::from_rows(rows).unwrap();
        let mut samples: Vec<usize> = (0..rows.len()).collect();
        DecisionTree::fit_rows(&x, y, &mut samples, params, &mut rng::stream(0, &[]))
    }

    #[test]
    fn separable_points_depth_two() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [0, 0, 1, 1];
        let t = fit(&rows, &y, TreeParams { max_depth: 2, min_leaf: 1, max_features: MaxFeatures::All });
        for (r, &label) in rows.iter().zip(&y) {
            assert_eq!(t.predict_accept_row(r), label as f64);
        }
        match t.nodes()[0] {
            Node::Split { col, threshold, .. } => {
                assert_eq!(col, 0);
                assert_eq!(threshold, 0.5);
            }
            _ => panic!("root should split"),
        }
    }

    #[test]
    fn leaf_frequency_is_probability() {
        let rows = vec![vec![0.0], vec![0.0], vec![0.0], vec![0.0]];
        let t = fit(&rows, &[1, 1, 1, 0], TreeParams::default());
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_accept_row(&[0.0]), 0.75);
    }

    #[test]
    fn ties_prefer_lowest_column() {
        // Columns 0 and 1 are identical; column 0 must win.
        let rows = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0], vec![4.0, 4.0]];
        let t = fit(&rows, &[0, 0, 1, 1], TreeParams::default());
        assert!(matches!(t.nodes()[0], Node::Split { col: 0, .. }));
    }

    #[test]
    fn min_leaf_respected_and_leaves_partition_rows() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 3) as f64]).collect();
        let y: Vec<u8> = (0..40).map(|i| u8::from(i % 7 > 3 || i % 3 == 0)).collect();
        let t = fit(&rows, &y, TreeParams { max_depth: 10, min_leaf: 3, max_features: MaxFeatures::All });
        let mut routed = vec![0u32; t.nodes().len()];
        for r in &rows {
            routed[t.leaf_index(r)] += 1;
        }
        for (i, node) in t.nodes().iter().enumerate() {
            if let Node::Leaf { neg, pos } = node {
                assert_eq!(neg + pos, routed[i]);
                assert!(neg + pos >= 3);
            } else {
                assert_eq!(routed[i], 0);
            }
        }
    }
}
