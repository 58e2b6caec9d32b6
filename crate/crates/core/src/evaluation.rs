//! Accuracy measurement for trained cascades.
//!
//! Accuracy is strict and row-wise per property: the predicted label must
//! equal the gold label exactly, and an unmarked property is an ordinary
//! class of its own. The split evaluation separates test rows by
//! morphological origin and derives the combined accuracy from raw counts,
//! so it is exactly the count-weighted mean of the two column accuracies.

use crate::affixes::AffixInventory;
use crate::cascade::{Cascade, Property};
use crate::error::{Error, Result};
use crate::lexicon::{LabelledEntry, Origin};

/// Correct/total counts for one property over one entry set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropertyAccuracy {
    pub property: Property,
    pub correct: usize,
    pub total: usize,
}

impl PropertyAccuracy {
    pub fn accuracy(&self) -> Option<f64> {
        if self.total == 0 {
            None
        } else {
            Some(self.correct as f64 / self.total as f64)
        }
    }
}

/// Per-property accuracies, in cascade order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub per_property: Vec<PropertyAccuracy>,
}

impl Evaluation {
    pub fn mean_accuracy(&self) -> Option<f64> {
        let accs: Vec<f64> = self.per_property.iter().filter_map(|p| p.accuracy()).collect();
        if accs.len() != self.per_property.len() || accs.is_empty() {
            None
        } else {
            Some(accs.iter().sum::<f64>() / accs.len() as f64)
        }
    }
}

/// Scores a cascade against gold labels, one row at a time.
pub fn evaluate(
    cascade: &Cascade,
    inventory: &AffixInventory,
    entries: &[LabelledEntry],
) -> Result<Evaluation> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate on zero entries".into()));
    }
    let mut per_property: Vec<PropertyAccuracy> = cascade
        .order
        .iter()
        .map(|p| PropertyAccuracy { property: *p, correct: 0, total: 0 })
        .collect();
    for entry in entries {
        let label = cascade.classify(inventory, &entry.surface)?;
        for (acc, assignment) in per_property.iter_mut().zip(&label.assignments) {
            acc.total += 1;
            if assignment.label == assignment.property.gold_label(entry) {
                acc.correct += 1;
            }
        }
    }
    Ok(Evaluation { per_property })
}

/// Correct/total counts per property, split by morphological origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCounts {
    pub property: Property,
    pub con_correct: usize,
    pub con_total: usize,
    pub nc_correct: usize,
    pub nc_total: usize,
}

impl SplitCounts {
    pub fn con_accuracy(&self) -> Option<f64> {
        if self.con_total == 0 {
            None
        } else {
            Some(self.con_correct as f64 / self.con_total as f64)
        }
    }

    pub fn nc_accuracy(&self) -> Option<f64> {
        if self.nc_total == 0 {
            None
        } else {
            Some(self.nc_correct as f64 / self.nc_total as f64)
        }
    }

    /// Combined accuracy over both columns, computed from the raw counts.
    pub fn overall_accuracy(&self) -> Option<f64> {
        let total = self.con_total + self.nc_total;
        if total == 0 {
            None
        } else {
            Some((self.con_correct + self.nc_correct) as f64 / total as f64)
        }
    }
}

/// Scores a cascade on entries whose origin is known, keeping concatenative
/// and non-concatenative counts apart. Entries with an unknown origin are an
/// error listing the offending surfaces.
pub fn evaluate_split(
    cascade: &Cascade,
    inventory: &AffixInventory,
    entries: &[LabelledEntry],
) -> Result<Vec<SplitCounts>> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate on zero entries".into()));
    }
    let mut unknown: Vec<&str> = entries
        .iter()
        .filter(|e| e.origin == Origin::Unknown)
        .map(|e| e.surface.as_str())
        .collect();
    if !unknown.is_empty() {
        unknown.sort_unstable();
        unknown.dedup();
        return Err(Error::Schema(format!(
            "entries without a definite origin: {}",
            unknown.join(", ")
        )));
    }

    let mut counts: Vec<SplitCounts> = cascade
        .order
        .iter()
        .map(|p| SplitCounts {
            property: *p,
            con_correct: 0,
            con_total: 0,
            nc_correct: 0,
            nc_total: 0,
        })
        .collect();
    for entry in entries {
        let label = cascade.classify(inventory, &entry.surface)?;
        for (c, assignment) in counts.iter_mut().zip(&label.assignments) {
            let correct = assignment.label == assignment.property.gold_label(entry);
            match entry.origin {
                Origin::Concatenative => {
                    c.con_total += 1;
                    c.con_correct += usize::from(correct);
                }
                Origin::NonConcatenative => {
                    c.nc_total += 1;
                    c.nc_correct += usize::from(correct);
                }
                Origin::Unknown => unreachable!("filtered above"),
            }
        }
    }
    Ok(counts)
}

/// One report row: a property and up to four accuracy columns. Absent values
/// render as blank CSV cells.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub property: Property,
    pub acc_traditional: Option<f64>,
    pub acc_gold: Option<f64>,
    pub acc_con: Option<f64>,
    pub acc_nc: Option<f64>,
}

/// A tabular accuracy report with free-form metadata lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<EvalRow>,
}

const REPORT_HEADER: &str = "property,acc_traditional,acc_gold,acc_con,acc_nc";

impl EvalReport {
    /// Assembles a report over `order` from an ordinary evaluation and/or a
    /// split evaluation.
    pub fn from_parts(
        order: &[Property],
        traditional: Option<&Evaluation>,
        split: Option<&[SplitCounts]>,
    ) -> EvalReport {
        let rows = order
            .iter()
            .map(|p| {
                let t = traditional
                    .and_then(|ev| ev.per_property.iter().find(|a| a.property == *p))
                    .and_then(|a| a.accuracy());
                let s = split.and_then(|sc| sc.iter().find(|c| c.property == *p));
                EvalRow {
                    property: *p,
                    acc_traditional: t,
                    acc_gold: s.and_then(|c| c.overall_accuracy()),
                    acc_con: s.and_then(|c| c.con_accuracy()),
                    acc_nc: s.and_then(|c| c.nc_accuracy()),
                }
            })
            .collect();
        EvalReport { metadata: Vec::new(), rows }
    }

    pub fn to_csv(&self) -> String {
        fn cell(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut out = String::new();
        for (key, value) in &self.metadata {
            out.push_str(&format!("# {key},{value}\n"));
        }
        out.push_str(REPORT_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.property.name(),
                cell(row.acc_traditional),
                cell(row.acc_gold),
                cell(row.acc_con),
                cell(row.acc_nc),
            ));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<EvalReport> {
        let mut metadata = Vec::new();
        let mut rows = Vec::new();
        let mut saw_header = false;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                let (key, value) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::parse(lineno, "metadata line needs key,value"))?;
                metadata.push((key.to_string(), value.to_string()));
                continue;
            }
            if !saw_header {
                if line != REPORT_HEADER {
                    return Err(Error::parse(
                        lineno,
                        format!("expected header {REPORT_HEADER:?}, found {line:?}"),
                    ));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::parse(
                    lineno,
                    format!("expected 5 columns, found {}", fields.len()),
                ));
            }
            let parse_cell = |f: &str| -> Result<Option<f64>> {
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse()
                        .map(Some)
                        .map_err(|_| Error::parse(lineno, format!("bad accuracy cell {f:?}")))
                }
            };
            rows.push(EvalRow {
                property: Property::parse(fields[0])
                    .map_err(|e| Error::parse(lineno, e.to_string()))?,
                acc_traditional: parse_cell(fields[1])?,
                acc_gold: parse_cell(fields[2])?,
                acc_con: parse_cell(fields[3])?,
                acc_nc: parse_cell(fields[4])?,
            });
        }
        if !saw_header {
            return Err(Error::Schema("report has no header row".into()));
        }
        Ok(EvalReport { metadata, rows })
    }
}
