//! Random forest with Gini-split decision trees.
//!
//! Trees grow on bootstrap samples until leaves are pure or hold fewer than
//! two samples. At each split, `floor(sqrt(F))` candidate features are chosen
//! by ranking a stable hash of `(seed, tree, node, feature name)` — keying on
//! the *name* makes predictions invariant under feature-column permutation
//! while staying fully reproducible from the seed. All ties break toward the
//! lexicographically smaller label, feature name, or threshold.

use rand::Rng;

use crate::rng::{fnv1a64, substream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ForestParams {
    pub n_trees: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
enum TreeNode {
    Leaf {
        label_ix: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> usize {
        let mut ix = 0;
        loop {
            match &self.nodes[ix] {
                TreeNode::Leaf { label_ix } => return *label_ix,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    ix = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

/// Trained random forest.
#[derive(Debug, Clone)]
pub struct ForestModel {
    /// Lexicographically sorted label set.
    pub labels: Vec<String>,
    trees: Vec<Tree>,
}

impl ForestModel {
    /// Majority vote over the trees; ties go to the lexicographically
    /// smaller label.
    pub fn predict(&self, row: &[f64]) -> &str {
        let mut votes = vec![0usize; self.labels.len()];
        for tree in &self.trees {
            votes[tree.predict(row)] += 1;
        }
        let mut best = 0;
        for ix in 1..votes.len() {
            if votes[ix] > votes[best] {
                best = ix;
            }
        }
        &self.labels[best]
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    label_ix: &'a [usize],
    n_labels: usize,
    feature_keys: Vec<u64>,
    /// Rank of each feature's name in lexicographic order (tie-breaks).
    name_rank: &'a [usize],
    n_candidates: usize,
    nodes: Vec<TreeNode>,
}

impl TreeBuilder<'_> {
    /// Grow the subtree over `samples` (indices into the bootstrap), depth
    /// first with the left child built before the right one. Returns the
    /// node index.
    fn grow(&mut self, samples: &[usize]) -> usize {
        let node_id = self.nodes.len() as u64;
        let mut counts = vec![0usize; self.n_labels];
        for &s in samples {
            counts[self.label_ix[s]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || samples.len() < 2 {
            return self.push_leaf(&counts);
        }

        match self.best_split(samples, node_id) {
            None => self.push_leaf(&counts),
            Some((feature, threshold)) => {
                let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = samples
                    .iter()
                    .partition(|&&s| self.x[s][feature] <= threshold);
                let ix = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { label_ix: 0 }); // placeholder
                let left = self.grow(&left_samples);
                let right = self.grow(&right_samples);
                self.nodes[ix] = TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                ix
            }
        }
    }

    fn push_leaf(&mut self, counts: &[usize]) -> usize {
        let mut best = 0;
        for ix in 1..counts.len() {
            if counts[ix] > counts[best] {
                best = ix;
            }
        }
        self.nodes.push(TreeNode::Leaf { label_ix: best });
        self.nodes.len() - 1
    }

    /// The best `(feature, threshold)` among the node's candidate features,
    /// maximizing Gini impurity decrease. The first `sqrt(F)` features of a
    /// per-node deterministic ranking are inspected; when none of them admits
    /// a valid partition (all constant on the node's samples) the scan
    /// continues down the ranking until one does. `None` only when every
    /// feature is constant.
    fn best_split(&self, samples: &[usize], node_id: u64) -> Option<(usize, f64)> {
        // rank features by hash(node, feature key)
        let f = self.feature_keys.len();
        let mut ranked: Vec<usize> = (0..f).collect();
        ranked.sort_unstable_by_key(|&c| {
            let mut buf = [0u8; 16];
            buf[..8].copy_from_slice(&self.feature_keys[c].to_le_bytes());
            buf[8..].copy_from_slice(&node_id.to_le_bytes());
            (fnv1a64(&buf), self.name_rank[c])
        });

        let n = samples.len() as f64;
        let parent_gini = {
            let mut counts = vec![0usize; self.n_labels];
            for &s in samples {
                counts[self.label_ix[s]] += 1;
            }
            gini(&counts, samples.len())
        };

        // (decrease, name rank, threshold, feature)
        let mut best: Option<(f64, usize, f64, usize)> = None;
        for (scanned, &feature) in ranked.iter().enumerate() {
            if scanned >= self.n_candidates && best.is_some() {
                break;
            }
            let mut order: Vec<usize> = samples.to_vec();
            order.sort_unstable_by(|&a, &b| {
                self.x[a][feature]
                    .partial_cmp(&self.x[b][feature])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut left_counts = vec![0usize; self.n_labels];
            let mut right_counts = vec![0usize; self.n_labels];
            for &s in &order {
                right_counts[self.label_ix[s]] += 1;
            }
            for split_at in 1..order.len() {
                let moved = self.label_ix[order[split_at - 1]];
                left_counts[moved] += 1;
                right_counts[moved] -= 1;
                let lo = self.x[order[split_at - 1]][feature];
                let hi = self.x[order[split_at]][feature];
                if lo == hi {
                    continue;
                }
                let threshold = lo + (hi - lo) / 2.0;
                let nl = split_at as f64;
                let nr = n - nl;
                let decrease = parent_gini
                    - (nl / n) * gini(&left_counts, split_at)
                    - (nr / n) * gini(&right_counts, order.len() - split_at);
                // zero-decrease splits are allowed: growth stops on purity
                // or sample count, not on impurity stagnation
                let rank = self.name_rank[feature];
                let better = match &best {
                    None => true,
                    Some((bd, br, bt, _)) => {
                        decrease > *bd + 1e-15
                            || ((decrease - *bd).abs() <= 1e-15 && (rank, threshold) < (*br, *bt))
                    }
                };
                if better {
                    best = Some((decrease, rank, threshold, feature));
                }
            }
        }
        best.map(|(_, _, threshold, feature)| (feature, threshold))
    }
}

fn gini(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

/// Train a random forest. `feature_names` key the per-node feature
/// subsampling and the split tie-breaks.
pub fn train(
    x: &[Vec<f64>],
    y: &[String],
    feature_names: &[String],
    params: ForestParams,
) -> Result<ForestModel> {
    assert_eq!(x.len(), y.len());
    let mut labels: Vec<String> = y.to_vec();
    labels.sort();
    labels.dedup();
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }
    let label_ix: Vec<usize> = y
        .iter()
        .map(|l| labels.binary_search(l).unwrap())
        .collect();
    let n = x.len();
    let f = feature_names.len();
    let n_candidates = ((f as f64).sqrt().floor() as usize).max(1);
    let name_rank: Vec<usize> = {
        let mut by_name: Vec<usize> = (0..f).collect();
        by_name.sort_by(|&a, &b| feature_names[a].cmp(&feature_names[b]));
        let mut rank = vec![0usize; f];
        for (r, &c) in by_name.iter().enumerate() {
            rank[c] = r;
        }
        rank
    };

    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = substream(params.seed, "forest-bootstrap", &[t as u64]);
            let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let boot_x: Vec<Vec<f64>> = sample.iter().map(|&s| x[s].clone()).collect();
            let boot_y: Vec<usize> = sample.iter().map(|&s| label_ix[s]).collect();
            // per-feature key: (seed, tree, feature name)
            let feature_keys: Vec<u64> = feature_names
                .iter()
                .map(|name| {
                    let mut buf = Vec::with_capacity(16 + name.len());
                    buf.extend_from_slice(&params.seed.to_le_bytes());
                    buf.extend_from_slice(&(t as u64).to_le_bytes());
                    buf.extend_from_slice(name.as_bytes());
                    fnv1a64(&buf)
                })
                .collect();
            let mut builder = TreeBuilder {
                x: &boot_x,
                label_ix: &boot_y,
                n_labels: labels.len(),
                feature_keys,
                name_rank: &name_rank,
                n_candidates,
                nodes: Vec::new(),
            };
            let all: Vec<usize> = (0..n).collect();
            let root = builder.grow(&all);
            debug_assert_eq!(root, 0);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();
    Ok(ForestModel { labels, trees })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    fn separable() -> (Vec<Vec<f64>>, Vec<String>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..8 {
            x.push(vec![1.0 + 0.1 * i as f64, 0.0]);
            y.push("hi".to_string());
            x.push(vec![-1.0 - 0.1 * i as f64, 0.0]);
            y.push("lo".to_string());
        }
        (x, y)
    }

    #[test]
    fn memorizes_separable_fixture() {
        let (x, y) = separable();
        let model = train(&x, &y, &names(2), ForestParams::default()).unwrap();
        for (row, label) in x.iter().zip(&y) {
            assert_eq!(model.predict(row), label);
        }
    }

    #[test]
    fn same_seed_predicts_identically() {
        let (x, y) = separable();
        let params = ForestParams {
            n_trees: 20,
            seed: 42,
        };
        let a = train(&x, &y, &names(2), params).unwrap();
        let b = train(&x, &y, &names(2), params).unwrap();
        for probe in [[0.3, -0.7], [-0.2, 0.5], [2.0, 2.0]] {
            assert_eq!(a.predict(&probe), b.predict(&probe));
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(
            train(&x, &y, &names(1), ForestParams::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn feature_permutation_leaves_predictions_unchanged() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n_features = 5;
        let x: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..n_features).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<String> = x
            .iter()
            .map(|r| {
                if r[1] + 0.5 * r[3] > 0.0 {
                    "pos".to_string()
                } else {
                    "neg".to_string()
                }
            })
            .collect();
        let feature_names = names(n_features);
        let params = ForestParams {
            n_trees: 15,
            seed: 7,
        };
        let base = train(&x, &y, &feature_names, params).unwrap();

        let perm = [3usize, 0, 4, 1, 2];
        let permuted_x: Vec<Vec<f64>> = x
            .iter()
            .map(|r| perm.iter().map(|&c| r[c]).collect())
            .collect();
        let permuted_names: Vec<String> =
            perm.iter().map(|&c| feature_names[c].clone()).collect();
        let permuted = train(&permuted_x, &y, &permuted_names, params).unwrap();

        for row in &x {
            let permuted_row: Vec<f64> = perm.iter().map(|&c| row[c]).collect();
            assert_eq!(base.predict(row), permuted.predict(&permuted_row));
        }
    }
}
