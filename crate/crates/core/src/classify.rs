//! Decision-tree classification over segmentation-derived features.
//!
//! Trees split on categorical features by maximum information gain. A split
//! gets one branch per value seen in training plus a fallback leaf holding
//! the node's label distribution, so unseen values at prediction time fall
//! back to the local majority.

use std::collections::{BTreeMap, BTreeSet};

use crate::affixes::{cv_pattern, detect_gemination, Segmentation};
use crate::error::{Error, Result};

/// Encodes an absent categorical value (no prefix, unannotated property).
pub const NULL_LABEL: &str = "<null>";

/// Features describing one segmented word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub stem: String,
    /// Innermost stripped prefix, the one adjacent to the stem.
    pub prefix: Option<String>,
    /// Outermost suffix, the last one in surface order.
    pub suffix: Option<String>,
    pub composite_suffix: Option<String>,
    /// Consonant-vowel pattern of the stem.
    pub cv_pattern: String,
    /// Whether the stem contains a geminated consonant.
    pub gemination: bool,
    /// Property values inherited from earlier classifiers in a cascade.
    pub inherited: Vec<(String, String)>,
}

pub fn extract_features(seg: &Segmentation) -> FeatureVector {
    FeatureVector {
        stem: seg.stem.clone(),
        prefix: seg.prefixes.last().cloned(),
        suffix: seg.suffixes.last().cloned(),
        composite_suffix: seg.composite_suffix.clone(),
        cv_pattern: cv_pattern(&seg.stem),
        gemination: detect_gemination(&seg.stem).0,
        inherited: Vec::new(),
    }
}

impl FeatureVector {
    pub fn with_inherited(mut self, pairs: Vec<(String, String)>) -> FeatureVector {
        self.inherited = pairs;
        self
    }

    /// Total map from feature name to value; absent options become
    /// [`NULL_LABEL`].
    pub fn feature_map(&self) -> BTreeMap<String, String> {
        let null = || NULL_LABEL.to_string();
        let mut map = BTreeMap::new();
        map.insert("stem".into(), self.stem.clone());
        map.insert("prefix".into(), self.prefix.clone().unwrap_or_else(null));
        map.insert("suffix".into(), self.suffix.clone().unwrap_or_else(null));
        map.insert(
            "composite_suffix".into(),
            self.composite_suffix.clone().unwrap_or_else(null),
        );
        map.insert("cv_pattern".into(), self.cv_pattern.clone());
        map.insert("gemination".into(), self.gemination.to_string());
        for (name, value) in &self.inherited {
            map.insert(name.clone(), value.clone());
        }
        map
    }
}

/// One training instance: a total feature map and a label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub features: BTreeMap<String, String>,
    pub label: String,
}

/// Tree induction knobs. `max_depth` of 0 means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// Nodes holding fewer instances than this become leaves.
    pub min_leaf: usize,
    pub max_depth: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { min_leaf: 2, max_depth: 0 }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::InvalidParam("min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf { label: String, majority: u64, total: u64 },
    Split { feature: String, branches: BTreeMap<String, TreeNode>, fallback: Box<TreeNode> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub root: TreeNode,
}

fn entropy(counts: &BTreeMap<&str, u64>) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn label_counts<'a>(labels: impl Iterator<Item = &'a str>) -> BTreeMap<&'a str, u64> {
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    counts
}

/// Information gain, in bits, of partitioning `labels` by `values`.
pub fn information_gain(values: &[String], labels: &[String]) -> Result<f64> {
    if values.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "feature and label counts differ: {} vs {}",
            values.len(),
            labels.len()
        )));
    }
    if values.is_empty() {
        return Err(Error::InvalidInput("information gain needs at least one instance".into()));
    }
    let base = entropy(&label_counts(labels.iter().map(String::as_str)));
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (v, l) in values.iter().zip(labels) {
        groups.entry(v).or_default().push(l);
    }
    let n = labels.len() as f64;
    let conditional: f64 = groups
        .values()
        .map(|ls| ls.len() as f64 / n * entropy(&label_counts(ls.iter().copied())))
        .sum();
    Ok(base - conditional)
}

fn majority_leaf(instances: &[&Instance]) -> TreeNode {
    let counts = label_counts(instances.iter().map(|i| i.label.as_str()));
    let best = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .expect("leaf needs at least one instance");
    TreeNode::Leaf {
        label: best.0.to_string(),
        majority: *best.1,
        total: instances.len() as u64,
    }
}

fn grow(
    instances: &[&Instance],
    used: &BTreeSet<String>,
    depth: usize,
    params: &TreeParams,
) -> TreeNode {
    let counts = label_counts(instances.iter().map(|i| i.label.as_str()));
    let pure = counts.len() <= 1;
    let depth_capped = params.max_depth > 0 && depth >= params.max_depth;
    if instances.len() < params.min_leaf || pure || depth_capped {
        return majority_leaf(instances);
    }

    // candidate features: unused on this path and non-constant here
    let mut best: Option<(f64, &String)> = None;
    for name in instances[0].features.keys() {
        if used.contains(name) {
            continue;
        }
        let values: Vec<String> =
            instances.iter().map(|i| i.features[name].clone()).collect();
        let distinct: BTreeSet<&String> = values.iter().collect();
        if distinct.len() < 2 {
            continue;
        }
        let labels: Vec<String> = instances.iter().map(|i| i.label.clone()).collect();
        let gain = information_gain(&values, &labels).expect("lengths match by construction");
        // strict comparison keeps the lexicographically first name on ties
        if best.map_or(true, |(g, _)| gain > g) {
            best = Some((gain, name));
        }
    }
    let Some((_, feature)) = best else {
        return majority_leaf(instances);
    };
    let feature = feature.clone();

    let mut partitions: BTreeMap<&str, Vec<&Instance>> = BTreeMap::new();
    for inst in instances {
        partitions.entry(inst.features[&feature].as_str()).or_default().push(inst);
    }
    let mut child_used = used.clone();
    child_used.insert(feature.clone());
    let branches: BTreeMap<String, TreeNode> = partitions
        .into_iter()
        .map(|(value, subset)| {
            (value.to_string(), grow(&subset, &child_used, depth + 1, params))
        })
        .collect();
    TreeNode::Split { feature, branches, fallback: Box::new(majority_leaf(instances)) }
}

/// Trains a tree. Every instance must carry the same feature names.
pub fn train_tree(instances: &[Instance], params: &TreeParams) -> Result<DecisionTree> {
    params.validate()?;
    if instances.is_empty() {
        return Err(Error::InvalidInput("cannot train a tree on zero instances".into()));
    }
    let names: BTreeSet<&String> = instances[0].features.keys().collect();
    for inst in instances {
        let these: BTreeSet<&String> = inst.features.keys().collect();
        if these != names {
            return Err(Error::Schema("instances disagree on feature names".into()));
        }
        if inst.label.is_empty() {
            return Err(Error::Schema("empty label in training data".into()));
        }
    }
    let refs: Vec<&Instance> = instances.iter().collect();
    Ok(DecisionTree { root: grow(&refs, &BTreeSet::new(), 0, params) })
}

impl DecisionTree {
    /// Predicts a label and the leaf's majority proportion as confidence.
    pub fn predict(&self, features: &BTreeMap<String, String>) -> Result<(String, f64)> {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label, majority, total } => {
                    let confidence =
                        if *total == 0 { 0.0 } else { *majority as f64 / *total as f64 };
                    return Ok((label.clone(), confidence));
                }
                TreeNode::Split { feature, branches, fallback } => {
                    let value = features.get(feature).ok_or_else(|| {
                        Error::InvalidInput(format!("prediction input lacks feature {feature}"))
                    })?;
                    node = branches.get(value).map_or(fallback.as_ref(), |child| child);
                }
            }
        }
    }

    /// Serialises to a line-oriented versioned text form.
    pub fn to_text(&self) -> Result<String> {
        fn token_ok(t: &str) -> bool {
            !t.is_empty() && !t.chars().any(char::is_whitespace)
        }
        fn emit(node: &TreeNode, out: &mut String) -> Result<()> {
            match node {
                TreeNode::Leaf { label, majority, total } => {
                    if !token_ok(label) {
                        return Err(Error::InvalidInput(format!(
                            "label {label:?} cannot be serialised"
                        )));
                    }
                    out.push_str(&format!("L {label} {majority} {total}\n"));
                }
                TreeNode::Split { feature, branches, fallback } => {
                    if !token_ok(feature) {
                        return Err(Error::InvalidInput(format!(
                            "feature {feature:?} cannot be serialised"
                        )));
                    }
                    out.push_str(&format!("S {feature} {}\n", branches.len()));
                    for (value, child) in branches {
                        if !token_ok(value) {
                            return Err(Error::InvalidInput(format!(
                                "value {value:?} cannot be serialised"
                            )));
                        }
                        out.push_str(&format!("B {value}\n"));
                        emit(child, out)?;
                    }
                    out.push_str("F\n");
                    emit(fallback, out)?;
                }
            }
            Ok(())
        }
        let mut out = String::from("morphkit-tree v1\n");
        emit(&self.root, &mut out)?;
        Ok(out)
    }

    /// Parses the form written by [`DecisionTree::to_text`].
    pub fn from_text(text: &str) -> Result<DecisionTree> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty tree file"))?;
        if header != "morphkit-tree v1" {
            return Err(Error::parse(1, format!("unsupported tree format {header:?}")));
        }
        fn parse_node<'a>(
            lines: &mut impl Iterator<Item = (usize, &'a str)>,
        ) -> Result<TreeNode> {
            let (idx, line) =
                lines.next().ok_or_else(|| Error::parse(0, "tree file ends mid-node"))?;
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split(' ').collect();
            match fields.as_slice() {
                ["L", label, majority, total] => {
                    let majority = majority
                        .parse()
                        .map_err(|_| Error::parse(lineno, "bad majority count"))?;
                    let total =
                        total.parse().map_err(|_| Error::parse(lineno, "bad total count"))?;
                    Ok(TreeNode::Leaf { label: label.to_string(), majority, total })
                }
                ["S", feature, count] => {
                    let count: usize =
                        count.parse().map_err(|_| Error::parse(lineno, "bad branch count"))?;
                    let mut branches = BTreeMap::new();
                    for _ in 0..count {
                        let (bidx, bline) = lines
                            .next()
                            .ok_or_else(|| Error::parse(0, "tree file ends mid-split"))?;
                        let value = bline
                            .strip_prefix("B ")
                            .ok_or_else(|| Error::parse(bidx + 1, "expected a branch line"))?;
                        branches.insert(value.to_string(), parse_node(lines)?);
                    }
                    let (fidx, fline) = lines
                        .next()
                        .ok_or_else(|| Error::parse(0, "tree file ends before fallback"))?;
                    if fline != "F" {
                        return Err(Error::parse(fidx + 1, "expected the fallback marker"));
                    }
                    let fallback = Box::new(parse_node(lines)?);
                    Ok(TreeNode::Split { feature: feature.to_string(), branches, fallback })
                }
                _ => Err(Error::parse(lineno, format!("unrecognised tree line {line:?}"))),
            }
        }
        let root = parse_node(&mut lines)?;
        if let Some((idx, line)) = lines.next() {
            if !line.trim().is_empty() {
                return Err(Error::parse(idx + 1, "trailing content after tree"));
            }
        }
        Ok(DecisionTree { root })
    }
}
