//! CART-style decision tree with axis-aligned thresholds and Gini impurity.

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};

use super::Classifier;

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTreeModel {
    classes: Vec<Label>,
    nodes: Vec<Node>,
}

impl DecisionTreeModel {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// `(feature, threshold)` of the root split, if any.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => Some((feature, threshold)),
            Node::Leaf(_) => None,
        }
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Majority class; ties go to the lower class index.
fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

struct Builder<'a> {
    xs: Vec<&'a [f64]>,
    ys: Vec<usize>,
    classes: usize,
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.classes];
        for &i in idx {
            c[self.ys[i]] += 1;
        }
        c
    }

    fn best_split(&self, idx: &[usize], parent: &[usize]) -> Option<BestSplit> {
        let n = idx.len();
        let parent_gini = gini(parent, n);
        let d = self.xs[idx[0]].len();
        let mut best: Option<BestSplit> = None;
        let mut sorted = idx.to_vec();
        let mut left = vec![0usize; self.classes];
        let mut right = vec![0usize; self.classes];
        for f in 0..d {
            sorted.sort_by(|&a, &b| self.xs[a][f].total_cmp(&self.xs[b][f]).then(a.cmp(&b)));
            left.iter_mut().for_each(|c| *c = 0);
            right.copy_from_slice(parent);
            for p in 0..n - 1 {
                let y = self.ys[sorted[p]];
                left[y] += 1;
                right[y] -= 1;
                let (lo, hi) = (self.xs[sorted[p]][f], self.xs[sorted[p + 1]][f]);
                let nl = p + 1;
                let nr = n - nl;
                if lo == hi || nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let weighted =
                    (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
                let gain = parent_gini - weighted;
                if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain + MIN_GAIN) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        gain,
                        feature: f,
                        threshold,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&idx);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(majority(&counts)));
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return at;
        }
        let Some(split) = self.best_split(&idx, &counts) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.xs[i][split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }
}

/// Greedy Gini splits. Ties prefer the lower feature index, then the lower
/// threshold.
pub fn dt_train(train: &Dataset, max_depth: usize, min_leaf: usize) -> Result<DecisionTreeModel> {
    if train.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    if max_depth == 0 || min_leaf == 0 {
        return Err(Error::ConfigInvalid(
            "decision tree needs max_depth >= 1 and min_leaf >= 1".into(),
        ));
    }
    let classes = train.labels();
    let mut b = Builder {
        xs: train.rows().iter().map(|r| r.values.as_slice()).collect(),
        ys: train
            .rows()
            .iter()
            .map(|r| classes.binary_search(&r.label).expect("label listed"))
            .collect(),
        classes: classes.len(),
        max_depth,
        min_leaf,
        nodes: Vec::new(),
    };
    b.grow((0..train.len()).collect(), 0);
    Ok(DecisionTreeModel {
        classes,
        nodes: b.nodes,
    })
}

impl Classifier for DecisionTreeModel {
    fn name(&self) -> &str {
        "dt"
    }

    fn predict(&self, x: &[f64]) -> Label {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(k) => return self.classes[k].clone(),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

pub fn dt_classify(model: &DecisionTreeModel, z: &[f64]) -> Label {
    model.predict(z)
}
