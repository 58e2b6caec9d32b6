//! Cascaded classification of verbal morphological properties.
//!
//! One decision tree per property, trained in a fixed order. Each tree sees
//! the segmentation features plus the values of all earlier properties:
//! gold values at training time, predicted values at prediction time. The
//! property order can be searched exhaustively or with a greedy beam over
//! held-out accuracy.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::affixes::{read_inventory, segment, write_inventory, AffixInventory, AffixParams};
use crate::classify::{
    extract_features, train_tree, DecisionTree, FeatureVector, Instance, TreeParams, NULL_LABEL,
};
use crate::error::{Error, Result};
use crate::lexicon::LabelledEntry;

/// The seven verbal properties the cascade can label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Polarity,
    IndObj,
    DirObj,
    Tam,
    Number,
    Gender,
    Person,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Polarity,
        Property::IndObj,
        Property::DirObj,
        Property::Tam,
        Property::Number,
        Property::Gender,
        Property::Person,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Polarity => "polarity",
            Property::IndObj => "ind_obj",
            Property::DirObj => "dir_obj",
            Property::Tam => "tam",
            Property::Number => "number",
            Property::Gender => "gender",
            Property::Person => "person",
        }
    }

    pub fn parse(name: &str) -> Result<Property> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown property {name:?}")))
    }

    /// The entry's gold value for this property, [`NULL_LABEL`] when the
    /// property is not marked on the form.
    pub fn gold_label(self, entry: &LabelledEntry) -> String {
        let value = match self {
            Property::Polarity => entry.polarity.map(|v| v.token().to_string()),
            Property::IndObj => entry.ind_obj.clone(),
            Property::DirObj => entry.dir_obj.clone(),
            Property::Tam => entry.tam.map(|v| v.token().to_string()),
            Property::Number => entry.number.map(|v| v.token().to_string()),
            Property::Gender => entry.gender.map(|v| v.token().to_string()),
            Property::Person => entry.person.map(|v| v.token().to_string()),
        };
        value.unwrap_or_else(|| NULL_LABEL.to_string())
    }
}

/// A trained cascade: property order plus one tree per property.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    pub order: Vec<Property>,
    pub trees: BTreeMap<Property, DecisionTree>,
}

/// One predicted property value with the leaf confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyAssignment {
    pub property: Property,
    pub label: String,
    pub confidence: f64,
}

/// The cascade's full output for one surface form, in cascade order.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphLabel {
    pub surface: String,
    pub assignments: Vec<PropertyAssignment>,
}

impl MorphLabel {
    pub fn get(&self, property: Property) -> Option<&str> {
        self.assignments
            .iter()
            .find(|a| a.property == property)
            .map(|a| a.label.as_str())
    }
}

fn check_order(order: &[Property]) -> Result<()> {
    if order.is_empty() {
        return Err(Error::InvalidParam("property order is empty".into()));
    }
    let distinct: BTreeSet<Property> = order.iter().copied().collect();
    if distinct.len() != order.len() {
        return Err(Error::InvalidParam("property order repeats a property".into()));
    }
    Ok(())
}

fn inherited_pairs(entry: &LabelledEntry, earlier: &[Property]) -> Vec<(String, String)> {
    earlier
        .iter()
        .map(|p| (p.name().to_string(), p.gold_label(entry)))
        .collect()
}

/// Trains one tree per property in `order`. Earlier properties appear as
/// features with their gold values (teacher forcing).
pub fn train_cascade(
    train: &[LabelledEntry],
    inventory: &AffixInventory,
    order: &[Property],
    params: &TreeParams,
) -> Result<Cascade> {
    check_order(order)?;
    params.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidInput("cannot train a cascade on zero entries".into()));
    }
    let base: Vec<FeatureVector> = train
        .iter()
        .map(|e| Ok(extract_features(&segment(&e.surface, inventory)?)))
        .collect::<Result<_>>()?;

    let mut trees = BTreeMap::new();
    for (k, property) in order.iter().enumerate() {
        let instances: Vec<Instance> = train
            .iter()
            .zip(&base)
            .map(|(entry, fv)| Instance {
                features: fv
                    .clone()
                    .with_inherited(inherited_pairs(entry, &order[..k]))
                    .feature_map(),
                label: property.gold_label(entry),
            })
            .collect();
        trees.insert(*property, train_tree(&instances, params)?);
    }
    Ok(Cascade { order: order.to_vec(), trees })
}

impl Cascade {
    /// Labels a surface form, chaining each tree's prediction into the
    /// features of the trees after it.
    pub fn classify(&self, inventory: &AffixInventory, surface: &str) -> Result<MorphLabel> {
        let fv = extract_features(&segment(surface, inventory)?);
        let mut inherited: Vec<(String, String)> = Vec::new();
        let mut assignments = Vec::new();
        for property in &self.order {
            let features = fv.clone().with_inherited(inherited.clone()).feature_map();
            let tree = self
                .trees
                .get(property)
                .ok_or_else(|| Error::Schema(format!("cascade lacks a {} tree", property.name())))?;
            let (label, confidence) = tree.predict(&features)?;
            inherited.push((property.name().to_string(), label.clone()));
            assignments.push(PropertyAssignment { property: *property, label, confidence });
        }
        Ok(MorphLabel { surface: surface.to_string(), assignments })
    }
}

/// Mean per-property accuracy of a cascade over labelled entries.
fn mean_accuracy(
    cascade: &Cascade,
    inventory: &AffixInventory,
    entries: &[LabelledEntry],
) -> Result<f64> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("cannot score a cascade on zero entries".into()));
    }
    let mut correct: BTreeMap<Property, usize> = BTreeMap::new();
    for entry in entries {
        let label = cascade.classify(inventory, &entry.surface)?;
        for a in &label.assignments {
            if a.label == a.property.gold_label(entry) {
                *correct.entry(a.property).or_insert(0) += 1;
            }
        }
    }
    let n = entries.len() as f64;
    let total: f64 = cascade
        .order
        .iter()
        .map(|p| correct.get(p).copied().unwrap_or(0) as f64 / n)
        .sum();
    Ok(total / cascade.order.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    Exhaustive,
    Greedy,
}

impl SearchStrategy {
    pub fn token(self) -> &'static str {
        match self {
            SearchStrategy::Exhaustive => "exhaustive",
            SearchStrategy::Greedy => "greedy",
        }
    }

    pub fn parse(tok: &str) -> Result<SearchStrategy> {
        match tok {
            "exhaustive" => Ok(SearchStrategy::Exhaustive),
            "greedy" => Ok(SearchStrategy::Greedy),
            _ => Err(Error::InvalidParam(format!("unknown search strategy {tok:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    pub strategy: SearchStrategy,
    /// Partial orders kept per level in greedy search.
    pub beam: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { strategy: SearchStrategy::Greedy, beam: 3 }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.beam == 0 {
            return Err(Error::InvalidParam("beam must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSearchResult {
    pub order: Vec<Property>,
    pub score: f64,
}

fn order_names(order: &[Property]) -> Vec<&'static str> {
    order.iter().map(|p| p.name()).collect()
}

/// Sorts scored orders best-first: higher score wins, ties go to the
/// lexicographically smaller name sequence.
fn rank(scored: &mut [(Vec<Property>, f64)]) {
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1).then_with(|| order_names(&a.0).cmp(&order_names(&b.0)))
    });
}

fn permutations(props: &[Property]) -> Vec<Vec<Property>> {
    if props.len() <= 1 {
        return vec![props.to_vec()];
    }
    let mut out = Vec::new();
    for (i, p) in props.iter().enumerate() {
        let mut rest = props.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, *p);
            out.push(tail);
        }
    }
    out
}

/// Finds the property order with the best mean held-out accuracy. Training
/// and held-out sets must not share any surface form.
pub fn search_best_order(
    train: &[LabelledEntry],
    heldout: &[LabelledEntry],
    inventory: &AffixInventory,
    properties: &[Property],
    search: &SearchParams,
    tree_params: &TreeParams,
) -> Result<OrderSearchResult> {
    check_order(properties)?;
    search.validate()?;
    let train_surfaces: BTreeSet<&str> = train.iter().map(|e| e.surface.as_str()).collect();
    let mut overlap: Vec<&str> = heldout
        .iter()
        .map(|e| e.surface.as_str())
        .filter(|s| train_surfaces.contains(s))
        .collect();
    if !overlap.is_empty() {
        overlap.sort_unstable();
        overlap.dedup();
        return Err(Error::InvalidInput(format!(
            "surfaces appear in both training and held-out data: {}",
            overlap.join(", ")
        )));
    }

    let score_of = |order: &[Property]| -> Result<f64> {
        let cascade = train_cascade(train, inventory, order, tree_params)?;
        mean_accuracy(&cascade, inventory, heldout)
    };

    match search.strategy {
        SearchStrategy::Exhaustive => {
            let mut scored = Vec::new();
            for order in permutations(properties) {
                let score = score_of(&order)?;
                scored.push((order, score));
            }
            rank(&mut scored);
            let (order, score) = scored.swap_remove(0);
            Ok(OrderSearchResult { order, score })
        }
        SearchStrategy::Greedy => {
            let mut frontier: Vec<(Vec<Property>, f64)> = vec![(Vec::new(), 0.0)];
            for _ in 0..properties.len() {
                let mut level = Vec::new();
                for (partial, _) in &frontier {
                    for p in properties {
                        if partial.contains(p) {
                            continue;
                        }
                        let mut order = partial.clone();
                        order.push(*p);
                        let score = score_of(&order)?;
                        level.push((order, score));
                    }
                }
                rank(&mut level);
                level.truncate(search.beam);
                frontier = level;
            }
            let (order, score) = frontier.swap_remove(0);
            Ok(OrderSearchResult { order, score })
        }
    }
}

const MANIFEST_NAME: &str = "cascade.manifest";
const INVENTORY_NAME: &str = "inventory.tsv";

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// Saves a cascade as a directory: a manifest with the property order and
/// segmentation parameters, one tree file per property, and the affix
/// inventory.
pub fn save_cascade(cascade: &Cascade, inventory: &AffixInventory, dir: &Path) -> Result<()> {
    check_order(&cascade.order)?;
    fs::create_dir_all(dir)?;
    let p = &inventory.params;
    let manifest = format!(
        "morphkit-cascade v1\norder {}\nparams max_affix_len={} min_count={} branch_min={} min_stem_len={} max_prefixes={}\n",
        order_names(&cascade.order).join(" "),
        p.max_affix_len,
        p.min_count,
        p.branch_min,
        p.min_stem_len,
        p.max_prefixes,
    );
    fs::write(dir.join(MANIFEST_NAME), manifest)?;
    for property in &cascade.order {
        let tree = cascade
            .trees
            .get(property)
            .ok_or_else(|| Error::Schema(format!("cascade lacks a {} tree", property.name())))?;
        fs::write(dir.join(format!("{}.tree", property.name())), tree.to_text()?)?;
    }
    let mut buf = Vec::new();
    write_inventory(inventory, &mut buf)?;
    fs::write(dir.join(INVENTORY_NAME), buf)?;
    Ok(())
}

/// Loads a cascade directory written by [`save_cascade`].
pub fn load_cascade(dir: &Path) -> Result<(Cascade, AffixInventory)> {
    let manifest_path = dir.join(MANIFEST_NAME);
    let manifest = read_file(&manifest_path)?;
    let mut lines = manifest.lines();
    let header = lines.next().unwrap_or("");
    if header != "morphkit-cascade v1" {
        return Err(Error::Schema(format!(
            "{}: unsupported cascade format {header:?}",
            manifest_path.display()
        )));
    }
    let order_line = lines
        .next()
        .and_then(|l| l.strip_prefix("order "))
        .ok_or_else(|| Error::Schema(format!("{}: missing order line", manifest_path.display())))?;
    let order: Vec<Property> =
        order_line.split(' ').map(Property::parse).collect::<Result<_>>()?;
    check_order(&order)?;
    let params_line = lines
        .next()
        .and_then(|l| l.strip_prefix("params "))
        .ok_or_else(|| Error::Schema(format!("{}: missing params line", manifest_path.display())))?;
    let mut params = AffixParams::default();
    let mut seen = BTreeSet::new();
    for pair in params_line.split(' ') {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Schema(format!("malformed params entry {pair:?}")))?;
        if !seen.insert(key.to_string()) {
            return Err(Error::Schema(format!("duplicate params key {key:?}")));
        }
        let parse_usize = || -> Result<usize> {
            value.parse().map_err(|_| Error::Schema(format!("bad value for {key}: {value:?}")))
        };
        match key {
            "max_affix_len" => params.max_affix_len = parse_usize()?,
            "min_count" => {
                params.min_count = value
                    .parse()
                    .map_err(|_| Error::Schema(format!("bad value for {key}: {value:?}")))?
            }
            "branch_min" => params.branch_min = parse_usize()?,
            "min_stem_len" => params.min_stem_len = parse_usize()?,
            "max_prefixes" => params.max_prefixes = parse_usize()?,
            _ => return Err(Error::Schema(format!("unknown params key {key:?}"))),
        }
    }
    if seen.len() != 5 {
        return Err(Error::Schema(format!(
            "{}: params line must set all five segmentation keys",
            manifest_path.display()
        )));
    }

    let inventory_text = read_file(&dir.join(INVENTORY_NAME))?;
    let inventory = read_inventory(inventory_text.as_bytes(), params)?;

    let mut trees = BTreeMap::new();
    for property in &order {
        let text = read_file(&dir.join(format!("{}.tree", property.name())))?;
        trees.insert(*property, DecisionTree::from_text(&text)?);
    }
    Ok((Cascade { order, trees }, inventory))
}
