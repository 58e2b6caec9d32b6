//! Clustering of morphologically related words.
//!
//! Words sharing a segmentation stem form the initial clusters. Clusters are
//! then merged over a bounded number of rounds when their best member pair is
//! similar both orthographically (longest common substring ratio) and
//! semantically (cosine over co-occurrence context vectors).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use crate::affixes::Segmentation;
use crate::error::{Error, Result};

/// A cluster of related surface forms. The id is a stable content hash of the
/// sorted member list, so identical clusters get identical ids across runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub id: String,
    pub members: BTreeSet<String>,
    pub stem_keys: BTreeSet<String>,
    pub merge_depth: u32,
}

/// A set of clusters keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterSet {
    clusters: BTreeMap<String, Cluster>,
}

impl ClusterSet {
    pub fn from_clusters(clusters: impl IntoIterator<Item = Cluster>) -> ClusterSet {
        let mut set = ClusterSet::default();
        for c in clusters {
            set.clusters.insert(c.id.clone(), c);
        }
        set
    }

    pub fn get(&self, id: &str) -> Option<&Cluster> {
        self.clusters.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.values()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// All member words across all clusters.
    pub fn all_members(&self) -> BTreeSet<String> {
        self.clusters.values().flat_map(|c| c.members.iter().cloned()).collect()
    }
}

/// FNV-1a 64-bit, used for content-stable cluster ids.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn cluster_id(members: &BTreeSet<String>) -> String {
    let joined: Vec<u8> = members
        .iter()
        .flat_map(|m| m.as_bytes().iter().copied().chain(std::iter::once(0x1f)))
        .collect();
    format!("c{:016x}", fnv1a64(&joined))
}

/// Builds a cluster from a member set, deriving the content-hash id.
pub fn make_cluster(
    members: BTreeSet<String>,
    stem_keys: BTreeSet<String>,
    merge_depth: u32,
) -> Cluster {
    let id = cluster_id(&members);
    Cluster { id, members, stem_keys, merge_depth }
}

/// Groups segmented words into initial clusters keyed by identical stem.
/// Every word lands in exactly one cluster; all clusters start at merge
/// depth 0.
pub fn initial_clusters(segmentations: &[Segmentation]) -> ClusterSet {
    let mut by_stem: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for seg in segmentations {
        by_stem.entry(seg.stem.clone()).or_default().insert(seg.surface.clone());
    }
    ClusterSet::from_clusters(by_stem.into_iter().map(|(stem, members)| {
        make_cluster(members, BTreeSet::from([stem]), 0)
    }))
}

/// Orthographic similarity: 2 * LCS(a, b) / (|a| + |b|), where LCS is the
/// longest common contiguous substring and lengths are in characters.
/// 1 exactly when the words are equal; empty input compares as 0.
pub fn orthographic_similarity(a: &str, b: &str) -> f64 {
    let ac: Vec<char> = a.chars().collect();
    let bc: Vec<char> = b.chars().collect();
    if ac.is_empty() || bc.is_empty() {
        return 0.0;
    }
    let lcs = longest_common_substring(&ac, &bc);
    2.0 * lcs as f64 / (ac.len() + bc.len()) as f64
}

fn longest_common_substring(a: &[char], b: &[char]) -> usize {
    let mut best = 0usize;
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            cur[j] = if a[i - 1] == b[j - 1] { prev[j - 1] + 1 } else { 0 };
            best = best.max(cur[j]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Sparse co-occurrence vectors over a symmetric token window.
#[derive(Debug, Clone, Default)]
pub struct ContextVectors {
    window: usize,
    vectors: BTreeMap<String, BTreeMap<String, u64>>,
}

impl ContextVectors {
    pub fn window(&self) -> usize {
        self.window
    }

    /// The context counts for a word; words never seen get an empty (zero)
    /// vector.
    pub fn get(&self, word: &str) -> Option<&BTreeMap<String, u64>> {
        self.vectors.get(word)
    }
}

/// Counts, for every vocabulary word, the tokens occurring within `window`
/// positions of it in the token stream.
pub fn build_context_vectors(
    tokens: &[String],
    vocabulary: &BTreeSet<String>,
    window: usize,
) -> Result<ContextVectors> {
    if window == 0 {
        return Err(Error::InvalidParam("context window must be at least 1".into()));
    }
    let mut vectors: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for (i, tok) in tokens.iter().enumerate() {
        if !vocabulary.contains(tok) {
            continue;
        }
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(tokens.len().saturating_sub(1));
        let vector = vectors.entry(tok.clone()).or_default();
        for j in lo..=hi {
            if j != i {
                *vector.entry(tokens[j].clone()).or_insert(0) += 1;
            }
        }
    }
    Ok(ContextVectors { window, vectors })
}

/// Cosine similarity between two words' context vectors; 0 when either word
/// has no context counts at all.
pub fn semantic_similarity(a: &str, b: &str, vectors: &ContextVectors) -> f64 {
    let (va, vb) = match (vectors.get(a), vectors.get(b)) {
        (Some(va), Some(vb)) => (va, vb),
        _ => return 0.0,
    };
    let dot: f64 = va
        .iter()
        .filter_map(|(k, x)| vb.get(k).map(|y| *x as f64 * *y as f64))
        .sum();
    let na: f64 = va.values().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = vb.values().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Knobs for context building and cluster merging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    /// Symmetric co-occurrence window, in tokens.
    pub window: usize,
    /// Minimum best-member-pair orthographic similarity for a merge.
    pub ortho_threshold: f64,
    /// Minimum best-member-pair semantic similarity for a merge.
    pub sem_threshold: f64,
    /// Merge rounds to run; each cluster merges at most once per round.
    pub max_merge_rounds: u32,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams { window: 3, ortho_threshold: 0.6, sem_threshold: 0.2, max_merge_rounds: 2 }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidParam("window must be at least 1".into()));
        }
        for (name, t) in [("ortho_threshold", self.ortho_threshold), ("sem_threshold", self.sem_threshold)] {
            if !(0.0..=1.0).contains(&t) || t.is_nan() {
                return Err(Error::InvalidParam(format!("{name} must be in [0,1], got {t}")));
            }
        }
        Ok(())
    }
}

/// Pair affinity: the mean of the best member-pair orthographic similarity
/// and the best member-pair semantic similarity, qualifying only when both
/// components reach their thresholds.
fn pair_affinity(a: &Cluster, b: &Cluster, vectors: &ContextVectors) -> (f64, f64) {
    let mut best_ortho: f64 = 0.0;
    let mut best_sem: f64 = 0.0;
    for wa in &a.members {
        for wb in &b.members {
            best_ortho = best_ortho.max(orthographic_similarity(wa, wb));
            best_sem = best_sem.max(semantic_similarity(wa, wb, vectors));
        }
    }
    (best_ortho, best_sem)
}

/// Runs up to `max_merge_rounds` merge rounds over the cluster set.
///
/// Each round scores every cluster pair, keeps pairs whose orthographic and
/// semantic components both reach their thresholds, and applies them in
/// descending affinity order (ties broken by id) with each cluster merging at
/// most once per round. A merged cluster unions members and stem keys, gets
/// merge depth max(parents) + 1 and a fresh content-hash id. Stops early on a
/// round with no merges.
pub fn merge_clusters(
    set: &ClusterSet,
    vectors: &ContextVectors,
    params: &ClusterParams,
) -> Result<ClusterSet> {
    params.validate()?;
    let mut current: Vec<Cluster> = set.iter().cloned().collect();

    for _round in 0..params.max_merge_rounds {
        current.sort_by(|a, b| a.id.cmp(&b.id));
        let mut qualifying: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..current.len() {
            for j in i + 1..current.len() {
                let (ortho, sem) = pair_affinity(&current[i], &current[j], vectors);
                if ortho >= params.ortho_threshold && sem >= params.sem_threshold {
                    qualifying.push(((ortho + sem) / 2.0, i, j));
                }
            }
        }
        if qualifying.is_empty() {
            break;
        }
        qualifying.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then_with(|| current[a.1].id.cmp(&current[b.1].id))
                .then_with(|| current[a.2].id.cmp(&current[b.2].id))
        });

        let mut used = vec![false; current.len()];
        let mut merged: Vec<Cluster> = Vec::new();
        let mut any = false;
        for (_aff, i, j) in qualifying {
            if used[i] || used[j] {
                continue;
            }
            used[i] = true;
            used[j] = true;
            any = true;
            let members: BTreeSet<String> =
                current[i].members.union(&current[j].members).cloned().collect();
            let stem_keys: BTreeSet<String> =
                current[i].stem_keys.union(&current[j].stem_keys).cloned().collect();
            let depth = current[i].merge_depth.max(current[j].merge_depth) + 1;
            merged.push(make_cluster(members, stem_keys, depth));
        }
        if !any {
            break;
        }
        for (i, c) in current.into_iter().enumerate() {
            if !used[i] {
                merged.push(c);
            }
        }
        current = merged;
    }

    Ok(ClusterSet::from_clusters(current))
}

/// Writes clusters one per line: `id TAB merge_depth TAB members`, members
/// space-separated, lines sorted by id.
pub fn write_clusters<W: Write>(set: &ClusterSet, mut writer: W) -> Result<()> {
    for c in set.iter() {
        let members: Vec<&str> = c.members.iter().map(String::as_str).collect();
        writeln!(writer, "{}\t{}\t{}", c.id, c.merge_depth, members.join(" "))?;
    }
    Ok(())
}

/// Reads a cluster file written by [`write_clusters`]. Stem keys are not part
/// of the file format, so loaded clusters carry empty stem-key sets.
pub fn read_clusters<R: Read>(mut reader: R) -> Result<ClusterSet> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| match e.kind() {
        std::io::ErrorKind::InvalidData => Error::Decode { offset: 0 },
        _ => Error::Io(e),
    })?;
    let mut clusters = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(lineno, format!("expected 3 fields, found {}", fields.len())));
        }
        let id = fields[0].trim().to_string();
        if id.is_empty() {
            return Err(Error::parse(lineno, "blank cluster id"));
        }
        let merge_depth: u32 = fields[1]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad merge depth {:?}", fields[1])))?;
        let members: BTreeSet<String> =
            fields[2].split(' ').filter(|m| !m.is_empty()).map(str::to_string).collect();
        if members.is_empty() {
            return Err(Error::parse(lineno, "cluster has no members"));
        }
        clusters.push(Cluster { id, members, stem_keys: BTreeSet::new(), merge_depth });
    }
    Ok(ClusterSet::from_clusters(clusters))
}
