//! Histogram-based least-squares regression trees.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf { value: f64 },
}

/// Binary regression tree; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Tree {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature as usize] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature as usize),
            Node::Leaf { .. } => None,
        })
    }

    /// True when every split refers to a feature below `width` and every
    /// child index is in range.
    pub fn is_well_formed(&self, width: usize) -> bool {
        let n = self.nodes.len() as u32;
        !self.nodes.is_empty()
            && self.nodes.iter().all(|node| match *node {
                Node::Split {
                    feature,
                    left,
                    right,
                    threshold,
                } => (feature as usize) < width && left < n && right < n && !threshold.is_nan(),
                Node::Leaf { value } => value.is_finite(),
            })
    }
}

/// Row-major bin codes plus the raw-value threshold closing each bin.
pub(crate) struct BinnedMatrix {
    pub n_features: usize,
    pub codes: Vec<u8>,
    /// `thresholds[f][b]` separates bin `b` from `b + 1`.
    pub thresholds: Vec<Vec<f64>>,
    offsets: Vec<usize>,
    total_bins: usize,
}

impl BinnedMatrix {
    /// `max_bins` is clamped to [2, 256].
    pub fn new(x: &[f64], n_rows: usize, n_features: usize, max_bins: usize) -> BinnedMatrix {
        let max_bins = max_bins.clamp(2, 256);
        let mut thresholds = Vec::with_capacity(n_features);
        let mut column = Vec::with_capacity(n_rows);
        for f in 0..n_features {
            column.clear();
            column.extend((0..n_rows).map(|i| x[i * n_features + f]));
            column.sort_by(f64::total_cmp);
            let mut distinct = column.clone();
            distinct.dedup();
            let cuts = if distinct.len() <= max_bins {
                distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect::<Vec<_>>()
            } else {
                let mut cuts = Vec::with_capacity(max_bins - 1);
                for k in 1..max_bins {
                    let v = column[k * n_rows / max_bins];
                    let next = distinct.partition_point(|d| *d <= v);
                    if next < distinct.len() {
                        let t = 0.5 * (v + distinct[next]);
                        if cuts.last().map_or(true, |last| t > *last) {
                            cuts.push(t);
                        }
                    }
                }
                cuts
            };
            thresholds.push(cuts);
        }

        let mut offsets = Vec::with_capacity(n_features);
        let mut total_bins = 0;
        for t in &thresholds {
            offsets.push(total_bins);
            total_bins += t.len() + 1;
        }

        let mut codes = vec![0u8; n_rows * n_features];
        for i in 0..n_rows {
            for f in 0..n_features {
                let v = x[i * n_features + f];
                codes[i * n_features + f] = thresholds[f].partition_point(|t| *t < v) as u8;
            }
        }
        BinnedMatrix {
            n_features,
            codes,
            thresholds,
            offsets,
            total_bins,
        }
    }

    fn code(&self, row: u32, f: usize) -> usize {
        self.codes[row as usize * self.n_features + f] as usize
    }
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Multiplier on the Newton leaf estimate, `(K - 1) / K`.
    pub leaf_scale: f64,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    bin: usize,
}

fn newton_leaf(residuals: &[f64], rows: &[u32], scale: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &i in rows {
        let r = residuals[i as usize];
        num += r;
        den += libm::fabs(r) * (1.0 - libm::fabs(r));
    }
    if den < 1e-150 {
        0.0
    } else {
        scale * num / den
    }
}

fn best_split(
    data: &BinnedMatrix,
    residuals: &[f64],
    rows: &[u32],
    min_leaf: usize,
    hist_sum: &mut [f64],
    hist_cnt: &mut [u32],
) -> Option<BestSplit> {
    hist_sum.fill(0.0);
    hist_cnt.fill(0);
    let nf = data.n_features;
    let mut total = 0.0;
    for &i in rows {
        let r = residuals[i as usize];
        total += r;
        let codes = &data.codes[i as usize * nf..(i as usize + 1) * nf];
        for (f, &c) in codes.iter().enumerate() {
            let slot = data.offsets[f] + c as usize;
            hist_sum[slot] += r;
            hist_cnt[slot] += 1;
        }
    }
    let n = rows.len() as f64;
    let parent = total * total / n;
    let mut best: Option<BestSplit> = None;
    for f in 0..nf {
        let bins = data.thresholds[f].len() + 1;
        let off = data.offsets[f];
        let mut left_sum = 0.0;
        let mut left_cnt = 0usize;
        for b in 0..bins - 1 {
            left_sum += hist_sum[off + b];
            left_cnt += hist_cnt[off + b] as usize;
            let right_cnt = rows.len() - left_cnt;
            if left_cnt < min_leaf || right_cnt < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / left_cnt as f64 + right_sum * right_sum / right_cnt as f64 - parent;
            if gain > 1e-12 && best.as_ref().map_or(true, |s| gain > s.gain) {
                best = Some(BestSplit { gain, feature: f, bin: b });
            }
        }
    }
    best
}

/// Fits one tree to `residuals` over `rows` by greedy depth-first growth.
pub(crate) fn fit_tree(data: &BinnedMatrix, residuals: &[f64], rows: Vec<u32>, params: &TreeParams) -> Tree {
    let mut hist_sum = vec![0.0; data.total_bins];
    let mut hist_cnt = vec![0u32; data.total_bins];
    let mut nodes: Vec<Node> = Vec::new();
    // (node slot, rows, depth)
    let mut stack = vec![(0usize, rows, 0usize)];
    nodes.push(Node::Leaf { value: 0.0 });

    while let Some((slot, rows, depth)) = stack.pop() {
        let can_split = depth < params.max_depth && rows.len() >= 2 * params.min_samples_leaf.max(1);
        let split = if can_split {
            best_split(data, residuals, &rows, params.min_samples_leaf.max(1), &mut hist_sum, &mut hist_cnt)
        } else {
            None
        };
        match split {
            None => {
                nodes[slot] = Node::Leaf {
                    value: newton_leaf(residuals, &rows, params.leaf_scale),
                };
            }
            Some(s) => {
                let (left, right): (Vec<u32>, Vec<u32>) =
                    rows.iter().partition(|&&i| data.code(i, s.feature) <= s.bin);
                let l = nodes.len();
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                nodes[slot] = Node::Split {
                    feature: s.feature as u32,
                    threshold: data.thresholds[s.feature][s.bin],
                    left: l as u32,
                    right: (l + 1) as u32,
                };
                stack.push((l + 1, right, depth + 1));
                stack.push((l, left, depth + 1));
            }
        }
    }
    Tree { nodes }
}
