//! Distribution tables and correlation statistics over evaluated clusters.
//!
//! Clusters are tagged with a morphological origin (concatenative or
//! non-concatenative) and summarised as binned tables: cluster size,
//! percentage of words experts removed, and expert quality rating. All
//! percentages are rounded half away from zero to whole numbers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use crate::clustering::ClusterSet;
use crate::error::{Error, Result};
use crate::lexicon::{csv_err, ClusterEvalRecord, Origin, Quality};

pub const SIZE_BINS: [&str; 5] = ["<10", "10-19", "20-29", "30-39", ">=40"];
pub const REMOVAL_BINS: [&str; 9] =
    ["0%", "1-5", "6-10", "11-20", "21-30", "31-40", "41-60", "61-80", ">80"];

pub fn size_bin(size: usize) -> &'static str {
    match size {
        0..=9 => "<10",
        10..=19 => "10-19",
        20..=29 => "20-29",
        30..=39 => "30-39",
        _ => ">=40",
    }
}

/// Bins a removal percentage in [0, 100]. Zero means nothing was removed and
/// gets its own bin; the remaining bins are half-open with inclusive upper
/// edges.
pub fn removal_bin(pct: f64) -> &'static str {
    if pct <= 0.0 {
        "0%"
    } else if pct <= 5.0 {
        "1-5"
    } else if pct <= 10.0 {
        "6-10"
    } else if pct <= 20.0 {
        "11-20"
    } else if pct <= 30.0 {
        "21-30"
    } else if pct <= 40.0 {
        "31-40"
    } else if pct <= 60.0 {
        "41-60"
    } else if pct <= 80.0 {
        "61-80"
    } else {
        ">80"
    }
}

/// A binned count table with one column per morphological origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinnedTable {
    pub title: String,
    pub labels: Vec<String>,
    pub con: Vec<u64>,
    pub nc: Vec<u64>,
}

/// One row of a table rendered as percentages of its origin column.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPercent {
    pub label: String,
    pub con_count: u64,
    pub con_pct: u32,
    pub nc_count: u64,
    pub nc_pct: u32,
}

fn pct(count: u64, total: u64) -> u32 {
    if total == 0 {
        0
    } else {
        (100.0 * count as f64 / total as f64).round() as u32
    }
}

impl BinnedTable {
    fn new(title: &str, labels: &[&str]) -> BinnedTable {
        BinnedTable {
            title: title.to_string(),
            labels: labels.iter().map(|l| l.to_string()).collect(),
            con: vec![0; labels.len()],
            nc: vec![0; labels.len()],
        }
    }

    fn bump(&mut self, label: &str, origin: Origin, id: &str) -> Result<()> {
        let idx = self
            .labels
            .iter()
            .position(|l| l == label)
            .expect("bin labels are fixed at construction");
        match origin {
            Origin::Concatenative => self.con[idx] += 1,
            Origin::NonConcatenative => self.nc[idx] += 1,
            Origin::Unknown => {
                return Err(Error::Schema(format!("cluster {id} has no definite origin tag")))
            }
        }
        Ok(())
    }

    pub fn con_total(&self) -> u64 {
        self.con.iter().sum()
    }

    pub fn nc_total(&self) -> u64 {
        self.nc.iter().sum()
    }

    /// Rows as percentages of each origin column's own total.
    pub fn percent_rows(&self) -> Vec<BinPercent> {
        let (ct, nt) = (self.con_total(), self.nc_total());
        self.labels
            .iter()
            .zip(self.con.iter().zip(self.nc.iter()))
            .map(|(label, (&c, &n))| BinPercent {
                label: label.clone(),
                con_count: c,
                con_pct: pct(c, ct),
                nc_count: n,
                nc_pct: pct(n, nt),
            })
            .collect()
    }
}

fn origin_for<'a>(origins: &'a BTreeMap<String, Origin>, id: &str) -> Result<Origin> {
    match origins.get(id) {
        Some(Origin::Unknown) | None => {
            Err(Error::Schema(format!("cluster {id} has no definite origin tag")))
        }
        Some(o) => Ok(*o),
    }
}

/// Distribution of cluster sizes (member counts) by origin.
pub fn size_distribution(
    clusters: &ClusterSet,
    origins: &BTreeMap<String, Origin>,
) -> Result<BinnedTable> {
    let mut table = BinnedTable::new("cluster size", &SIZE_BINS);
    for c in clusters.iter() {
        let origin = origin_for(origins, &c.id)?;
        table.bump(size_bin(c.members.len()), origin, &c.id)?;
    }
    Ok(table)
}

/// Percentage of a cluster's members an evaluation removed.
pub fn removal_percentage(record: &ClusterEvalRecord, clusters: &ClusterSet) -> Result<f64> {
    let cluster = clusters.get(&record.cluster_id).ok_or_else(|| {
        Error::Schema(format!("evaluation references unknown cluster {}", record.cluster_id))
    })?;
    Ok(100.0 * record.removed_words.len() as f64 / cluster.members.len() as f64)
}

/// Distribution of per-evaluation removal percentages by origin.
pub fn removal_distribution(
    records: &[ClusterEvalRecord],
    clusters: &ClusterSet,
    origins: &BTreeMap<String, Origin>,
) -> Result<BinnedTable> {
    let mut table = BinnedTable::new("removed words", &REMOVAL_BINS);
    for r in records {
        let origin = origin_for(origins, &r.cluster_id)?;
        table.bump(removal_bin(removal_percentage(r, clusters)?), origin, &r.cluster_id)?;
    }
    Ok(table)
}

/// Distribution of expert quality ratings by origin.
pub fn quality_distribution(
    records: &[ClusterEvalRecord],
    origins: &BTreeMap<String, Origin>,
) -> Result<BinnedTable> {
    let labels: Vec<&str> = Quality::ALL.iter().map(|q| q.token()).collect();
    let mut table = BinnedTable::new("quality rating", &labels);
    for r in records {
        let origin = origin_for(origins, &r.cluster_id)?;
        table.bump(r.quality.token(), origin, &r.cluster_id)?;
    }
    Ok(table)
}

/// Pearson correlation coefficient. Undefined for fewer than two points or
/// when either series is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("first series is constant".into()));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("second series is constant".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Correlation between quality rating ordinals (very bad = 1 .. very good = 5)
/// and removal percentages, one point per evaluation. Reported signed, as
/// computed: careful raters tend to produce a negative value, since higher
/// ratings go with fewer removals.
pub fn quality_removal_correlation(
    records: &[ClusterEvalRecord],
    clusters: &ClusterSet,
) -> Result<f64> {
    let mut x = Vec::with_capacity(records.len());
    let mut y = Vec::with_capacity(records.len());
    for r in records {
        x.push(f64::from(r.quality.ordinal()));
        y.push(removal_percentage(r, clusters)?);
    }
    pearson(&x, &y)
}

/// Loads origin tags from CSV with header `cluster_id,origin`. Every tagged
/// cluster must exist in the set and carry a definite origin; duplicate tags
/// are rejected.
pub fn load_cluster_origins<R: Read>(
    reader: R,
    clusters: &ClusterSet,
) -> Result<BTreeMap<String, Origin>> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = csv_reader.headers().map_err(csv_err)?;
        let expected = ["cluster_id", "origin"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Schema(format!(
                "origin file header must be {expected:?}, found {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
    }
    let mut origins = BTreeMap::new();
    for (idx, row) in csv_reader.records().enumerate() {
        let lineno = idx + 2;
        let row = row.map_err(csv_err)?;
        let id = row.get(0).unwrap_or("").trim().to_string();
        if clusters.get(&id).is_none() {
            return Err(Error::parse(lineno, format!("unknown cluster id {id:?}")));
        }
        let origin = Origin::parse(row.get(1).unwrap_or("")).ok_or_else(|| {
            Error::parse(lineno, format!("unknown origin token {:?}", row.get(1).unwrap_or("")))
        })?;
        if origin == Origin::Unknown {
            return Err(Error::parse(lineno, format!("cluster {id} needs a definite origin")));
        }
        if origins.insert(id.clone(), origin).is_some() {
            return Err(Error::parse(lineno, format!("duplicate origin tag for cluster {id}")));
        }
    }
    Ok(origins)
}

/// The three distribution tables plus the quality/removal correlation.
/// The correlation is absent when undefined (too few evaluations or a
/// constant series).
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub size: BinnedTable,
    pub removal: BinnedTable,
    pub quality: BinnedTable,
    pub quality_removal: Option<f64>,
}

pub fn build_analysis_report(
    clusters: &ClusterSet,
    records: &[ClusterEvalRecord],
    origins: &BTreeMap<String, Origin>,
) -> Result<AnalysisReport> {
    let size = size_distribution(clusters, origins)?;
    let removal = removal_distribution(records, clusters, origins)?;
    let quality = quality_distribution(records, origins)?;
    let quality_removal = match quality_removal_correlation(records, clusters) {
        Ok(r) => Some(r),
        Err(Error::UndefinedCorrelation(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(AnalysisReport { size, removal, quality, quality_removal })
}

impl AnalysisReport {
    /// Plain-text rendering with counts and column percentages.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for table in [&self.size, &self.removal, &self.quality] {
            let _ = writeln!(out, "{}", table.title);
            let _ = writeln!(
                out,
                "{:<12} {:>8} {:>6} {:>8} {:>6}",
                "bin", "con", "con%", "noncon", "noncon%"
            );
            for row in table.percent_rows() {
                let _ = writeln!(
                    out,
                    "{:<12} {:>8} {:>6} {:>8} {:>6}",
                    row.label, row.con_count, row.con_pct, row.nc_count, row.nc_pct
                );
            }
            let _ = writeln!(
                out,
                "{:<12} {:>8} {:>6} {:>8} {:>6}",
                "total",
                table.con_total(),
                "",
                table.nc_total(),
                ""
            );
            let _ = writeln!(out);
        }
        match self.quality_removal {
            Some(r) => {
                let _ = writeln!(out, "quality/removal correlation: {r}");
            }
            None => {
                let _ = writeln!(out, "quality/removal correlation: undefined");
            }
        }
        out
    }

    /// CSV rendering: one row per bin across all three tables, preceded by a
    /// comment line carrying the correlation.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.quality_removal {
            Some(r) => {
                let _ = writeln!(out, "# quality_removal_correlation,{r}");
            }
            None => {
                let _ = writeln!(out, "# quality_removal_correlation,undefined");
            }
        }
        let _ = writeln!(
            out,
            "table,bin,concatenative_count,concatenative_pct,nonconcatenative_count,nonconcatenative_pct"
        );
        for (name, table) in
            [("size", &self.size), ("removal", &self.removal), ("quality", &self.quality)]
        {
            for row in table.percent_rows() {
                let _ = writeln!(
                    out,
                    "{name},{},{},{},{},{}",
                    row.label, row.con_count, row.con_pct, row.nc_count, row.nc_pct
                );
            }
        }
        out
    }
}
