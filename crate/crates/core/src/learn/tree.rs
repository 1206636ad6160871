//! CART-style classification tree with greedy Gini splits.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use rand::SeedableRng;

use crate::featurize::FeatureVector;
use crate::sensor_data::ActivityLabel;

use super::cv::{Learner, Predictor};
use super::{Example, LearnError, Table, TreeParams};

const N_CLASSES: usize = ActivityLabel::COUNT;

/// Flat node storage; children are indices into the node vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub(crate) enum TreeNode {
    Leaf {
        label: ActivityLabel,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// A trained decision tree. Samples with `x[feature] <= threshold` descend
/// left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<TreeNode>,
    pub(crate) root: u32,
}

impl DecisionTree {
    /// Predicts the class for a feature row. The row length is the caller's
    /// responsibility; out-of-range features cannot occur in validated trees.
    pub fn predict(&self, x: &[f64]) -> ActivityLabel {
        let mut at = self.root as usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Structural validation for deserialized trees: indices in range, no
    /// cycles reachable from the root, features inside the schema.
    pub(crate) fn validate_structure(&self, n_features: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        if self.root as usize >= self.nodes.len() {
            return Err(format!("root index {} out of range", self.root));
        }
        let mut visited = vec![false; self.nodes.len()];
        let mut stack = vec![self.root as usize];
        while let Some(at) = stack.pop() {
            if visited[at] {
                return Err(format!("node {at} visited twice (cycle)"));
            }
            visited[at] = true;
            if let TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } = &self.nodes[at]
            {
                if *feature as usize >= n_features {
                    return Err(format!("split feature {feature} out of schema range"));
                }
                if !threshold.is_finite() {
                    return Err("non-finite split threshold".into());
                }
                for child in [left, right] {
                    if *child as usize >= self.nodes.len() {
                        return Err(format!("child index {child} out of range"));
                    }
                }
                stack.push(*left as usize);
                stack.push(*right as usize);
            }
        }
        Ok(())
    }
}

/// Trains a single tree on the full example list.
///
/// Splits greedily minimize weighted Gini impurity over `max_features`
/// candidate features sampled per node from `rng`; recursion stops at
/// `max_depth`, below `min_samples_split`, or on pure nodes. Leaves predict
/// the modal class, ties resolving to the earliest [`ActivityLabel`].
pub fn train_tree(
    data: &[Example],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> Result<DecisionTree, LearnError> {
    let table = Table::from_examples(data)?;
    let indices: Vec<u32> = (0..table.n_rows() as u32).collect();
    grow_tree(&table, indices, params, rng)
}

/// Grows a tree over a row-index multiset (rows may repeat under bootstrap).
pub(crate) fn grow_tree(
    table: &Table,
    indices: Vec<u32>,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> Result<DecisionTree, LearnError> {
    if indices.is_empty() {
        return Err(LearnError::EmptyData);
    }
    params.check(table.n_features)?;
    let mut grower = Grower {
        table,
        params,
        rng,
        nodes: Vec::new(),
    };
    let root = grower.grow(indices, 0);
    Ok(DecisionTree {
        nodes: grower.nodes,
        root,
    })
}

impl Predictor for DecisionTree {
    fn predict_label(&self, x: &FeatureVector) -> ActivityLabel {
        self.predict(&x.values)
    }
}

impl Learner for TreeParams {
    fn name(&self) -> String {
        "decision_tree".into()
    }

    fn fit(&self, data: &[Example], seed: u64) -> Result<Box<dyn Predictor>, LearnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Box::new(train_tree(data, self, &mut rng)?))
    }
}

struct Grower<'a> {
    table: &'a Table,
    params: &'a TreeParams,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn grow(&mut self, indices: Vec<u32>, depth: usize) -> u32 {
        let counts = self.class_counts(&indices);
        let n = indices.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || n < self.params.min_samples_split || capped {
            return self.push_leaf(&counts);
        }

        let candidates = index::sample(
            self.rng,
            self.table.n_features,
            self.params.max_features,
        );
        // (weighted impurity, feature, threshold); strict < keeps the first
        // candidate on ties, so results are a pure function of the rng
        let mut best: Option<(f64, u32, f64)> = None;
        for feature in candidates.iter() {
            if let Some((score, threshold)) = self.best_split(&indices, feature, &counts) {
                if best.is_none_or(|(s, _, _)| score < s) {
                    best = Some((score, feature as u32, threshold));
                }
            }
        }

        match best {
            // every candidate feature was constant at this node
            None => self.push_leaf(&counts),
            Some((_, feature, threshold)) => {
                let (left_idx, right_idx): (Vec<u32>, Vec<u32>) = indices
                    .into_iter()
                    .partition(|&i| self.table.value(i as usize, feature as usize) <= threshold);
                debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());
                let left = self.grow(left_idx, depth + 1);
                let right = self.grow(right_idx, depth + 1);
                self.nodes.push(TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                });
                (self.nodes.len() - 1) as u32
            }
        }
    }

    /// Best boundary on one feature: sort node rows by value, sweep every
    /// gap between distinct consecutive values, track class counts and
    /// count-square sums incrementally. Returns (n * weighted Gini,
    /// threshold); lower is better.
    fn best_split(
        &self,
        indices: &[u32],
        feature: usize,
        total_counts: &[u64; N_CLASSES],
    ) -> Option<(f64, f64)> {
        let mut pairs: Vec<(f64, u8)> = indices
            .iter()
            .map(|&i| {
                (
                    self.table.value(i as usize, feature),
                    self.table.labels[i as usize],
                )
            })
            .collect();
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let n = pairs.len() as f64;
        let mut left = [0u64; N_CLASSES];
        let mut right = *total_counts;
        let mut left_sq = 0u64;
        let mut right_sq: u64 = right.iter().map(|&c| c * c).sum();

        let mut best: Option<(f64, f64)> = None;
        for i in 0..pairs.len() - 1 {
            let class = pairs[i].1 as usize;
            left_sq += 2 * left[class] + 1;
            left[class] += 1;
            right_sq -= 2 * right[class] - 1;
            right[class] -= 1;

            let (a, b) = (pairs[i].0, pairs[i + 1].0);
            if a < b {
                let nl = (i + 1) as f64;
                let nr = n - nl;
                let score = (nl - left_sq as f64 / nl) + (nr - right_sq as f64 / nr);
                if best.is_none_or(|(s, _)| score < s) {
                    // midpoint unless rounding would move b's group left
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((score, threshold));
                }
            }
        }
        best
    }

    fn class_counts(&self, indices: &[u32]) -> [u64; N_CLASSES] {
        let mut counts = [0u64; N_CLASSES];
        for &i in indices {
            counts[self.table.labels[i as usize] as usize] += 1;
        }
        counts
    }

    fn push_leaf(&mut self, counts: &[u64; N_CLASSES]) -> u32 {
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        self.nodes.push(TreeNode::Leaf {
            label: ActivityLabel::from_index(best).unwrap(),
        });
        (self.nodes.len() - 1) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::FeatureVector;
    use rand::SeedableRng;

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector {
            values: values.to_vec(),
        }
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn single_class_data_yields_single_leaf() {
        let data: Vec<Example> = (0..10)
            .map(|i| (fv(&[i as f64, -i as f64]), ActivityLabel::Beverage))
            .collect();
        let tree = train_tree(&data, &TreeParams::default_for(2), &mut rng(1)).unwrap();
        assert_eq!(tree.node_count(), 1);
        for (x, _) in &data {
            assert_eq!(tree.predict(&x.values), ActivityLabel::Beverage);
        }
    }

    #[test]
    fn two_separable_points_split_once() {
        let data = vec![
            (fv(&[0.0]), ActivityLabel::CrunchyFood),
            (fv(&[1.0]), ActivityLabel::Idle),
        ];
        let params = TreeParams {
            max_depth: Some(1),
            min_samples_split: 2,
            max_features: 1,
        };
        let tree = train_tree(&data, &params, &mut rng(7)).unwrap();
        assert_eq!(tree.node_count(), 3);
        assert_eq!(tree.predict(&[0.0]), ActivityLabel::CrunchyFood);
        assert_eq!(tree.predict(&[1.0]), ActivityLabel::Idle);
    }

    #[test]
    fn threshold_separable_dataset_reaches_perfect_training_accuracy() {
        // 200 points, 5 features; class decided by feature 3 against 0.5
        let mut data = Vec::new();
        for i in 0..200 {
            let v = i as f64 / 200.0;
            let label = if v <= 0.5 {
                ActivityLabel::SoftFood
            } else {
                ActivityLabel::Speaking
            };
            data.push((fv(&[v * 3.0, -v, 9.9, v, 1.0]), label));
        }
        let tree = train_tree(&data, &TreeParams::full_view(5), &mut rng(3)).unwrap();
        // exhaustive check over the training set
        for (x, y) in &data {
            assert_eq!(tree.predict(&x.values), *y);
        }
    }

    #[test]
    fn empty_data_rejected() {
        let err = train_tree(&[], &TreeParams::default_for(1), &mut rng(0)).unwrap_err();
        assert_eq!(err, LearnError::EmptyData);
    }

    #[test]
    fn ragged_features_rejected() {
        let data = vec![
            (fv(&[0.0, 1.0]), ActivityLabel::Idle),
            (fv(&[0.0]), ActivityLabel::Idle),
        ];
        let err = train_tree(&data, &TreeParams::default_for(2), &mut rng(0)).unwrap_err();
        assert!(matches!(err, LearnError::SchemaMismatch { .. }));
    }

    #[test]
    fn max_features_out_of_range_rejected() {
        let data = vec![(fv(&[0.0]), ActivityLabel::Idle)];
        let params = TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: 2,
        };
        assert!(matches!(
            train_tree(&data, &params, &mut rng(0)),
            Err(LearnError::InvalidParams(_))
        ));
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let data: Vec<Example> = (0..60)
            .map(|i| {
                let v = (i * 37 % 100) as f64 / 10.0;
                let label = ActivityLabel::ALL[i % 5];
                (fv(&[v, v * v % 7.0, -v]), label)
            })
            .collect();
        let params = TreeParams::default_for(3);
        let a = train_tree(&data, &params, &mut rng(11)).unwrap();
        let b = train_tree(&data, &params, &mut rng(11)).unwrap();
        let c = train_tree(&data, &params, &mut rng(12)).unwrap();
        assert_eq!(a, b);
        // different seed may sample different candidate features
        let _ = c;
    }

    #[test]
    fn depth_cap_limits_tree() {
        let data: Vec<Example> = (0..64)
            .map(|i| {
                (
                    fv(&[i as f64]),
                    if i % 2 == 0 {
                        ActivityLabel::Idle
                    } else {
                        ActivityLabel::Speaking
                    },
                )
            })
            .collect();
        let params = TreeParams {
            max_depth: Some(1),
            min_samples_split: 2,
            max_features: 1,
        };
        let tree = train_tree(&data, &params, &mut rng(5)).unwrap();
        // one root split and two leaves at most
        assert!(tree.node_count() <= 3);
    }
}
