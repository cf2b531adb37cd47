//! Random forest of Gini-impurity decision trees.
//!
//! Each tree is grown on a bootstrap sample (N draws with replacement, kept
//! as per-example multiplicities). At every node a random subset of
//! `floor(sqrt(dim))` candidate features is examined; candidates are drawn
//! from the features that take more than one value inside the node, since on
//! sparse TF-IDF data almost every feature is identically zero in any given
//! node. Thresholds are midpoints between consecutive observed values and
//! `x <= threshold` goes left.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::{check_dim, check_training_set, Classifier};
use crate::corpus::Label;
use crate::error::{bail, Result};
use crate::features::SparseVector;
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestConfig {
    pub n_estimators: usize,
    pub max_depth: usize,
    /// Candidate features per node; `None` means `floor(sqrt(dim))`.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_estimators: 100,
            max_depth: 16,
            max_features: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            bail!(Config, "n_estimators must be at least 1");
        }
        if self.max_depth == 0 {
            bail!(Config, "max_depth must be at least 1");
        }
        if self.max_features == Some(0) {
            bail!(Config, "max_features must be at least 1");
        }
        Ok(())
    }

    fn features_per_split(&self, dim: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| libm::floor(libm::sqrt(dim as f64)) as usize)
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// Bootstrap-weighted class counts `[NOT, OFF]`.
    Leaf { counts: [u32; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    /// Root at index 0.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn vote(&self, x: &SparseVector) -> Label {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(*feature as usize) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { counts } => {
                    return if counts[1] > counts[0] { Label::Off } else { Label::Not };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left as usize).max(go(nodes, *right as usize)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub dim: usize,
    pub config: ForestConfig,
}

impl ForestModel {
    pub fn votes(&self, x: &SparseVector) -> Result<[usize; 2]> {
        check_dim(self.dim, x)?;
        let mut votes = [0usize; 2];
        for t in &self.trees {
            votes[t.vote(x).index()] += 1;
        }
        Ok(votes)
    }
}

impl Classifier for ForestModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &SparseVector) -> Result<Label> {
        let v = self.votes(x)?;
        Ok(if v[1] > v[0] { Label::Off } else { Label::Not })
    }
}

pub fn train_forest(x: &[SparseVector], y: &[Label], cfg: &ForestConfig) -> Result<ForestModel> {
    cfg.validate()?;
    let dim = check_training_set(x, y)?;
    let mut builder = TreeBuilder::new(x, y, cfg.max_depth, cfg.features_per_split(dim), dim);
    let trees = (0..cfg.n_estimators)
        .map(|t| {
            let mut rng = rng::derive(cfg.seed, t as u64);
            let mut weights = vec![0u32; x.len()];
            for _ in 0..x.len() {
                weights[rng.random_range(0..x.len())] += 1;
            }
            builder.grow(&weights, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        trees,
        dim,
        config: *cfg,
    })
}

/// Grows a single tree with all examples weighted 1 and every non-constant
/// feature examined at each node. Deterministic; used as a reference.
pub fn train_exhaustive_tree(x: &[SparseVector], y: &[Label], max_depth: usize) -> Result<Tree> {
    let dim = check_training_set(x, y)?;
    let mut builder = TreeBuilder::new(x, y, max_depth, usize::MAX, dim);
    Ok(builder.grow(&vec![1; x.len()], &mut rng::seeded(0)))
}

const NONE: u32 = u32::MAX;

struct TreeBuilder<'a> {
    x: &'a [SparseVector],
    y: &'a [Label],
    max_depth: usize,
    max_features: usize,
    // per-feature scratch: generation stamps and candidate slots
    stamp: Vec<u32>,
    slot: Vec<u32>,
    generation: u32,
}

struct Pending {
    node: usize,
    samples: Vec<u32>,
    depth: usize,
}

struct BestSplit {
    gini: f64,
    feature: u32,
    threshold: f64,
}

impl<'a> TreeBuilder<'a> {
    fn new(x: &'a [SparseVector], y: &'a [Label], max_depth: usize, max_features: usize, dim: usize) -> Self {
        TreeBuilder {
            x,
            y,
            max_depth,
            max_features,
            stamp: vec![0; dim],
            slot: vec![NONE; dim],
            generation: 0,
        }
    }

    fn grow(&mut self, weights: &[u32], rng: &mut Rng) -> Tree {
        let samples: Vec<u32> = (0..self.x.len() as u32).filter(|&i| weights[i as usize] > 0).collect();
        let mut nodes = vec![Node::Leaf { counts: [0, 0] }];
        let mut stack = vec![Pending {
            node: 0,
            samples,
            depth: 0,
        }];
        while let Some(p) = stack.pop() {
            let mut counts = [0u32; 2];
            for &i in &p.samples {
                counts[self.y[i as usize].index()] += weights[i as usize];
            }
            let pure = counts[0] == 0 || counts[1] == 0;
            let split = if pure || p.depth >= self.max_depth || counts[0] + counts[1] < 2 {
                None
            } else {
                self.best_split(&p.samples, weights, counts, rng)
            };
            let Some(best) = split else {
                nodes[p.node] = Node::Leaf { counts };
                continue;
            };
            let (left, right): (Vec<u32>, Vec<u32>) = p
                .samples
                .iter()
                .partition(|&&i| self.x[i as usize].get(best.feature as usize) <= best.threshold);
            let l = nodes.len();
            nodes.push(Node::Leaf { counts: [0, 0] });
            nodes.push(Node::Leaf { counts: [0, 0] });
            nodes[p.node] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left: l as u32,
                right: l as u32 + 1,
            };
            // right pushed first so the left subtree is built first
            stack.push(Pending {
                node: l + 1,
                samples: right,
                depth: p.depth + 1,
            });
            stack.push(Pending {
                node: l,
                samples: left,
                depth: p.depth + 1,
            });
        }
        Tree { nodes }
    }

    fn next_generation(&mut self) -> u32 {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        self.generation
    }

    fn best_split(&mut self, samples: &[u32], weights: &[u32], counts: [u32; 2], rng: &mut Rng) -> Option<BestSplit> {
        // features with at least one nonzero value in this node
        let gen = self.next_generation();
        let mut active = Vec::new();
        for &i in samples {
            for &f in self.x[i as usize].indices() {
                if self.stamp[f as usize] != gen {
                    self.stamp[f as usize] = gen;
                    active.push(f);
                }
            }
        }
        active.sort_unstable();

        let mut best: Option<BestSplit> = None;
        let mut examined = 0usize;
        let mut drawn = 0usize;
        while examined < self.max_features && drawn < active.len() {
            let want = (self.max_features - examined).min(active.len() - drawn);
            // partial Fisher-Yates over the not-yet-drawn tail
            for k in drawn..drawn + want {
                let j = rng.random_range(k..active.len());
                active.swap(k, j);
            }
            let batch = &active[drawn..drawn + want];
            drawn += want;
            for (s, &f) in batch.iter().enumerate() {
                self.slot[f as usize] = s as u32;
            }
            let mut columns: Vec<Vec<(f64, u32, usize)>> = vec![Vec::new(); batch.len()];
            for &i in samples {
                let row = &self.x[i as usize];
                let (w, c) = (weights[i as usize], self.y[i as usize].index());
                for (f, v) in row.iter() {
                    let s = self.slot[f];
                    if s != NONE {
                        columns[s as usize].push((v, w, c));
                    }
                }
            }
            for &f in batch {
                self.slot[f as usize] = NONE;
            }
            for (s, column) in columns.iter_mut().enumerate() {
                if let Some((gini, threshold)) = best_threshold(column, counts) {
                    examined += 1;
                    if best.as_ref().is_none_or(|b| gini < b.gini) {
                        best = Some(BestSplit {
                            gini,
                            feature: batch[s],
                            threshold,
                        });
                    }
                }
            }
        }
        best
    }
}

fn gini_sum(c: [u32; 2]) -> f64 {
    // n * gini(c) = n - (c0^2 + c1^2) / n
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (a, b) = (c[0] as f64, c[1] as f64);
    n - (a * a + b * b) / n
}

/// Best weighted Gini split of one feature. `nonzero` holds
/// `(value, weight, class)` for samples where the feature is nonzero; the
/// rest of `counts` sits at value 0. Returns `None` for constant features.
fn best_threshold(nonzero: &mut [(f64, u32, usize)], counts: [u32; 2]) -> Option<(f64, f64)> {
    let mut zeros = counts;
    for &(_, w, c) in nonzero.iter() {
        zeros[c] -= w;
    }
    nonzero.sort_by(|a, b| a.0.total_cmp(&b.0));

    // distinct values in ascending order with their class weights
    let mut groups: Vec<(f64, [u32; 2])> = Vec::new();
    let mut zero_placed = zeros == [0, 0];
    for &(v, w, c) in nonzero.iter() {
        if !zero_placed && v > 0.0 {
            groups.push((0.0, zeros));
            zero_placed = true;
        }
        match groups.last_mut() {
            Some((gv, gc)) if *gv == v => gc[c] += w,
            _ => {
                let mut gc = [0, 0];
                gc[c] = w;
                groups.push((v, gc));
            }
        }
    }
    if !zero_placed {
        groups.push((0.0, zeros));
    }
    if groups.len() < 2 {
        return None;
    }
    let total = (counts[0] + counts[1]) as f64;
    let mut left = [0u32; 2];
    let mut best: Option<(f64, f64)> = None;
    for k in 0..groups.len() - 1 {
        left[0] += groups[k].1[0];
        left[1] += groups[k].1[1];
        let right = [counts[0] - left[0], counts[1] - left[1]];
        let g = (gini_sum(left) + gini_sum(right)) / total;
        if best.is_none_or(|(bg, _)| g < bg) {
            best = Some((g, 0.5 * (groups[k].0 + groups[k + 1].0)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;
    use alloc::format;

    fn sv(d: &[f64]) -> SparseVector {
        SparseVector::from_dense(d)
    }

    /// Feature 0 separates the classes; features 1..4 are noise.
    fn separable() -> (Vec<SparseVector>, Vec<Label>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let off = i % 2 == 0;
            let noise = (i * 7 % 5) as f64 / 10.0;
            x.push(sv(&[
                if off { 0.8 } else { 0.0 },
                noise,
                0.3 - noise / 2.0,
                0.0,
                (i % 3) as f64,
            ]));
            y.push(if off { Label::Off } else { Label::Not });
        }
        (x, y)
    }

    #[test]
    fn exhaustive_tree_finds_the_separating_feature() {
        let (x, y) = separable();
        let tree = train_exhaustive_tree(&x, &y, 16).unwrap();
        match &tree.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert!((threshold - 0.4).abs() < 1e-12);
            }
            other => panic!("root should split, got {other:?}"),
        }
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn forest_fits_separable_data() {
        let (x, y) = separable();
        let cfg = ForestConfig {
            n_estimators: 25,
            seed: 3,
            ..Default::default()
        };
        let f = train_forest(&x, &y, &cfg).unwrap();
        assert_eq!(f.trees.len(), 25);
        assert_eq!(f.predict_all(&x).unwrap(), y);
    }

    #[test]
    fn depth_cap_gives_stumps() {
        let (x, y) = separable();
        let cfg = ForestConfig {
            n_estimators: 10,
            max_depth: 1,
            seed: 1,
            ..Default::default()
        };
        let f = train_forest(&x, &y, &cfg).unwrap();
        assert!(f.trees.iter().all(|t| t.depth() <= 1));
    }

    #[test]
    fn same_seed_same_trees() {
        let (x, y) = separable();
        let cfg = ForestConfig {
            n_estimators: 8,
            seed: 11,
            ..Default::default()
        };
        let a = train_forest(&x, &y, &cfg).unwrap();
        let b = train_forest(&x, &y, &cfg).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn internal_nodes_reference_valid_features() {
        let (x, y) = separable();
        let f = train_forest(&x, &y, &ForestConfig::default()).unwrap();
        for t in &f.trees {
            assert!(t.depth() <= 16);
            for n in &t.nodes {
                if let Node::Split { feature, .. } = n {
                    assert!((*feature as usize) < 5);
                }
            }
        }
    }

    fn leaf(vote: Label) -> Tree {
        let counts = if vote == Label::Off { [0, 1] } else { [1, 0] };
        Tree {
            nodes: vec![Node::Leaf { counts }],
        }
    }

    fn forest_of(votes: &[Label]) -> ForestModel {
        ForestModel {
            trees: votes.iter().map(|&v| leaf(v)).collect(),
            dim: 1,
            config: ForestConfig::default(),
        }
    }

    #[test]
    fn majority_of_trees() {
        let x = SparseVector::zeros(1);
        assert_eq!(
            forest_of(&[Label::Off, Label::Off, Label::Not]).predict(&x).unwrap(),
            Label::Off
        );
        assert_eq!(forest_of(&[Label::Off, Label::Not]).predict(&x).unwrap(), Label::Not);
        assert_eq!(forest_of(&[Label::Off]).predict(&x).unwrap(), Label::Off);
        assert!(matches!(
            forest_of(&[Label::Off]).predict(&SparseVector::zeros(2)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn config_and_data_errors() {
        let (x, y) = separable();
        let cfg = ForestConfig {
            n_estimators: 0,
            ..Default::default()
        };
        assert!(matches!(train_forest(&x, &y, &cfg), Err(Error::Config(_))));
        let one_class = vec![Label::Off; x.len()];
        assert!(matches!(
            train_forest(&x, &one_class, &ForestConfig::default()),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn threshold_search_handles_zero_group() {
        // values: three zeros (NOT), two at 0.5 (OFF)
        let mut nz = vec![(0.5, 1, 1), (0.5, 1, 1)];
        let (g, t) = best_threshold(&mut nz, [3, 2]).unwrap();
        assert_eq!(g, 0.0);
        assert_eq!(t, 0.25);
        let mut constant = vec![(0.5, 2, 0), (0.5, 3, 1)];
        assert!(best_threshold(&mut constant, [2, 3]).is_none());
    }
}
