//! Affix discovery and word segmentation.
//!
//! Potential affixes are read off frequency tries: a candidate needs enough
//! distinct words exhibiting it (support) and a diversification point in the
//! trie with a branching factor worth splitting at. Segmentation then strips
//! discovered affixes greedily, longest match first, suffixes before
//! prefixes, never leaving a stem shorter than `min_stem_len`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::lexicon::WordEntry;

/// Orientation of a trie: `Forward` stores words as written, `Backward`
/// stores them reversed (paths from the root spell word endings).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrieDirection {
    Forward,
    Backward,
}

/// Which edge of the word an affix attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AffixKind {
    Prefix,
    Suffix,
}

impl AffixKind {
    pub fn token(self) -> &'static str {
        match self {
            AffixKind::Prefix => "prefix",
            AffixKind::Suffix => "suffix",
        }
    }

    pub fn parse(tok: &str) -> Option<AffixKind> {
        match tok {
            "prefix" => Some(AffixKind::Prefix),
            "suffix" => Some(AffixKind::Suffix),
            _ => None,
        }
    }
}

#[derive(Debug, Default)]
struct TrieNode {
    /// Frequency-weighted count of words whose path passes through this node.
    tokens: u64,
    /// Frequency-weighted count of words ending exactly here.
    terminal_tokens: u64,
    /// Number of distinct words whose path passes through this node.
    types: u64,
    children: BTreeMap<char, TrieNode>,
}

impl TrieNode {
    /// Distinct continuations out of this node, counting end-of-word as one.
    fn branching(&self) -> usize {
        self.children.len() + usize::from(self.terminal_tokens > 0)
    }
}

/// A character trie with frequency-weighted counts on every node.
#[derive(Debug)]
pub struct Trie {
    direction: TrieDirection,
    root: TrieNode,
}

/// Builds a trie over the given entries. Counts are weighted by entry
/// frequency; entries sharing a surface are aggregated first.
pub fn build_trie(entries: &[WordEntry], direction: TrieDirection) -> Result<Trie> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("cannot build a trie from an empty word list".into()));
    }
    let mut aggregated: BTreeMap<&str, u64> = BTreeMap::new();
    for e in entries {
        if e.surface.is_empty() {
            return Err(Error::InvalidInput("blank surface form in trie input".into()));
        }
        *aggregated.entry(e.surface.as_str()).or_insert(0) += e.frequency;
    }

    let mut root = TrieNode::default();
    for (surface, freq) in aggregated {
        let path: Vec<char> = match direction {
            TrieDirection::Forward => surface.chars().collect(),
            TrieDirection::Backward => surface.chars().rev().collect(),
        };
        root.tokens += freq;
        root.types += 1;
        let mut node = &mut root;
        for c in path {
            node = node.children.entry(c).or_default();
            node.tokens += freq;
            node.types += 1;
        }
        node.terminal_tokens += freq;
    }
    Ok(Trie { direction, root })
}

impl Trie {
    pub fn direction(&self) -> TrieDirection {
        self.direction
    }

    /// Total number of word tokens inserted (the root count).
    pub fn total_tokens(&self) -> u64 {
        self.root.tokens
    }

    fn node_at(&self, path: &str) -> Option<&TrieNode> {
        let mut node = &self.root;
        for c in path.chars() {
            node = node.children.get(&c)?;
        }
        Some(node)
    }

    /// P(next_char | path): the fraction of tokens passing through `path`
    /// that continue with `next_char`. Paths are in trie orientation (for a
    /// backward trie, reversed-word space). Unknown paths are errors; a
    /// next_char with no continuation has probability 0.
    pub fn transitional_probability(&self, path: &str, next_char: char) -> Result<f64> {
        let node = self.node_at(path).ok_or_else(|| unknown_path(path))?;
        let continued = node.children.get(&next_char).map_or(0, |n| n.tokens);
        Ok(continued as f64 / node.tokens as f64)
    }

    /// P(end-of-word | path): the fraction of tokens passing through `path`
    /// that stop there. Together with the transitional probabilities of all
    /// children this sums to 1.
    pub fn end_probability(&self, path: &str) -> Result<f64> {
        let node = self.node_at(path).ok_or_else(|| unknown_path(path))?;
        Ok(node.terminal_tokens as f64 / node.tokens as f64)
    }

    /// Characters that can follow `path`, for walking the distribution.
    pub fn continuations(&self, path: &str) -> Result<Vec<char>> {
        let node = self.node_at(path).ok_or_else(|| unknown_path(path))?;
        Ok(node.children.keys().copied().collect())
    }

    /// Branching factor at the end of `path` (distinct children plus one if a
    /// word ends there), or None if the path is absent.
    fn branching_at(&self, path: &[char]) -> Option<usize> {
        let mut node = &self.root;
        for c in path {
            node = node.children.get(c)?;
        }
        Some(node.branching())
    }

    /// Branching factor at the first diversification point at or below
    /// `path`: forced single-continuation runs are followed until the trie
    /// offers a real choice. A run that dead-ends without choice counts 1.
    fn run_branching(&self, path: &[char]) -> Option<usize> {
        let mut node = &self.root;
        for c in path {
            node = node.children.get(c)?;
        }
        loop {
            let b = node.branching();
            if b >= 2 {
                return Some(b);
            }
            if node.children.len() == 1 && node.terminal_tokens == 0 {
                node = node.children.values().next().expect("single child");
            } else {
                return Some(1);
            }
        }
    }

    /// Reconstructs the stored words in original orientation, with their
    /// frequencies, sorted by surface.
    pub fn words(&self) -> Vec<WordEntry> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        collect_words(&self.root, &mut path, self.direction, &mut out);
        out.sort_by(|a, b| a.surface.cmp(&b.surface));
        out
    }

    #[cfg(test)]
    fn check_count_invariant(&self) -> bool {
        fn ok(node: &TrieNode) -> bool {
            let child_sum: u64 = node.children.values().map(|c| c.tokens).sum();
            node.tokens == child_sum + node.terminal_tokens && node.children.values().all(ok)
        }
        ok(&self.root)
    }
}

fn unknown_path(path: &str) -> Error {
    Error::InvalidInput(format!("path {path:?} is not in the trie"))
}

fn collect_words(node: &TrieNode, path: &mut Vec<char>, dir: TrieDirection, out: &mut Vec<WordEntry>) {
    if node.terminal_tokens > 0 {
        let surface: String = match dir {
            TrieDirection::Forward => path.iter().collect(),
            TrieDirection::Backward => path.iter().rev().collect(),
        };
        out.push(WordEntry { surface, frequency: node.terminal_tokens });
    }
    for (c, child) in &node.children {
        path.push(*c);
        collect_words(child, path, dir, out);
        path.pop();
    }
}

/// Parameters for affix discovery and segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffixParams {
    /// Longest affix considered, in characters.
    pub max_affix_len: usize,
    /// Minimum number of distinct words exhibiting an affix.
    pub min_count: u64,
    /// Minimum branching factor at the affix's diversification point.
    pub branch_min: usize,
    /// Shortest stem a segmentation may leave behind, in characters.
    pub min_stem_len: usize,
    /// Most prefixes stripped from one word.
    pub max_prefixes: usize,
}

impl Default for AffixParams {
    fn default() -> Self {
        AffixParams { max_affix_len: 5, min_count: 2, branch_min: 2, min_stem_len: 2, max_prefixes: 2 }
    }
}

impl AffixParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_affix_len == 0 {
            return Err(Error::InvalidParam("max_affix_len must be at least 1".into()));
        }
        if self.min_count == 0 {
            return Err(Error::InvalidParam("min_count must be at least 1".into()));
        }
        if self.branch_min < 1 {
            return Err(Error::InvalidParam("branch_min must be at least 1".into()));
        }
        if self.min_stem_len == 0 {
            return Err(Error::InvalidParam("min_stem_len must be at least 1".into()));
        }
        Ok(())
    }
}

/// A scored affix candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct AffixCandidate {
    pub kind: AffixKind,
    pub text: String,
    pub score: f64,
    pub support: u64,
}

/// Scores affix candidates of one kind from a direction-matched trie
/// (backward trie for suffixes, forward for prefixes).
///
/// For a suffix f over splits w = s+f (stem non-empty), the candidate's
/// support is the number of distinct words exhibiting it, and its branching
/// factor is the larger of two boundary measures: the continuation variety of
/// the stem s (reconstructed in the opposite direction) and the branching at
/// the first diversification point below the affix path in the given trie.
/// Candidates need support >= min_count and branching >= branch_min; the
/// score is support * log2(branching). Prefixes are the mirror image. The
/// returned list is sorted by (score desc, length desc, text).
pub fn score_affixes(trie: &Trie, kind: AffixKind, params: &AffixParams) -> Result<Vec<AffixCandidate>> {
    params.validate()?;
    let expected = match kind {
        AffixKind::Prefix => TrieDirection::Forward,
        AffixKind::Suffix => TrieDirection::Backward,
    };
    if trie.direction() != expected {
        return Err(Error::InvalidInput(format!(
            "{} scoring needs a {:?} trie, got {:?}",
            kind.token(),
            expected,
            trie.direction()
        )));
    }

    let words = trie.words();
    let opposite_dir = match kind {
        AffixKind::Prefix => TrieDirection::Backward,
        AffixKind::Suffix => TrieDirection::Forward,
    };
    let opposite = build_trie(&words, opposite_dir)?;

    // text -> (support, max stem-side branching)
    let mut stats: BTreeMap<Vec<char>, (u64, usize)> = BTreeMap::new();
    for w in &words {
        let chars: Vec<char> = w.surface.chars().collect();
        let n = chars.len();
        for alen in 1..=params.max_affix_len.min(n.saturating_sub(1)) {
            let (affix, stem_path): (Vec<char>, Vec<char>) = match kind {
                // stem path in the opposite (backward) trie is the reversed stem
                AffixKind::Prefix => {
                    (chars[..alen].to_vec(), chars[alen..].iter().rev().copied().collect())
                }
                AffixKind::Suffix => (chars[n - alen..].to_vec(), chars[..n - alen].to_vec()),
            };
            let b = opposite
                .branching_at(&stem_path)
                .expect("stem path must exist: the word is in the trie");
            let entry = stats.entry(affix).or_insert((0, 1));
            entry.0 += 1;
            entry.1 = entry.1.max(b);
        }
    }

    let mut candidates = Vec::new();
    for (affix, (support, b_stem)) in stats {
        if support < params.min_count {
            continue;
        }
        let trie_path: Vec<char> = match kind {
            AffixKind::Prefix => affix.clone(),
            AffixKind::Suffix => affix.iter().rev().copied().collect(),
        };
        let b_family = trie.run_branching(&trie_path).unwrap_or(1);
        let branching = b_stem.max(b_family);
        if branching < params.branch_min {
            continue;
        }
        candidates.push(AffixCandidate {
            kind,
            text: affix.iter().collect(),
            score: support as f64 * (branching as f64).log2(),
            support,
        });
    }

    sort_candidates(&mut candidates);
    Ok(candidates)
}

fn sort_candidates(candidates: &mut [AffixCandidate]) {
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| b.text.chars().count().cmp(&a.text.chars().count()))
            .then_with(|| a.text.cmp(&b.text))
    });
}

/// A ranked affix inventory with the parameters it was built under.
#[derive(Debug, Clone)]
pub struct AffixInventory {
    pub prefixes: Vec<AffixCandidate>,
    pub suffixes: Vec<AffixCandidate>,
    pub params: AffixParams,
}

/// Discovers prefixes and suffixes for a corpus in one go.
pub fn build_inventory(entries: &[WordEntry], params: &AffixParams) -> Result<AffixInventory> {
    params.validate()?;
    let forward = build_trie(entries, TrieDirection::Forward)?;
    let backward = build_trie(entries, TrieDirection::Backward)?;
    Ok(AffixInventory {
        prefixes: score_affixes(&forward, AffixKind::Prefix, params)?,
        suffixes: score_affixes(&backward, AffixKind::Suffix, params)?,
        params: *params,
    })
}

impl AffixInventory {
    /// An inventory assembled from fixed affix lists, for tests and tools
    /// that bypass discovery. Scores default to support = 1, score = 0.
    pub fn from_lists<S: AsRef<str>>(prefixes: &[S], suffixes: &[S], params: AffixParams) -> Self {
        let mk = |kind: AffixKind, texts: &[S]| {
            texts
                .iter()
                .map(|t| AffixCandidate { kind, text: t.as_ref().to_string(), score: 0.0, support: 1 })
                .collect()
        };
        AffixInventory {
            prefixes: mk(AffixKind::Prefix, prefixes),
            suffixes: mk(AffixKind::Suffix, suffixes),
            params,
        }
    }
}

/// A word split into prefixes, stem and suffixes. Concatenating the parts in
/// order always reproduces the surface exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub surface: String,
    pub prefixes: Vec<String>,
    pub stem: String,
    pub suffixes: Vec<String>,
    /// Concatenation of all suffixes when two or more were stripped.
    pub composite_suffix: Option<String>,
}

/// Segments a word against an inventory: greedy longest-match stripping,
/// suffixes first (any number), then up to `max_prefixes` prefixes, each
/// strip keeping the residue at least `min_stem_len` characters long.
pub fn segment(word: &str, inventory: &AffixInventory) -> Result<Segmentation> {
    if word.is_empty() || word.chars().any(char::is_whitespace) {
        return Err(Error::InvalidInput(format!("cannot segment {word:?}")));
    }
    let params = &inventory.params;

    let mut rest = word;
    let mut suffixes_rev: Vec<String> = Vec::new();
    loop {
        let best = longest_match(inventory.suffixes.iter(), |t| {
            rest.ends_with(t) && char_len(rest) - char_len(t) >= params.min_stem_len
        });
        match best {
            Some(t) => {
                rest = &rest[..rest.len() - t.len()];
                suffixes_rev.push(t.to_string());
            }
            None => break,
        }
    }

    let mut prefixes: Vec<String> = Vec::new();
    while prefixes.len() < params.max_prefixes {
        let best = longest_match(inventory.prefixes.iter(), |t| {
            rest.starts_with(t) && char_len(rest) - char_len(t) >= params.min_stem_len
        });
        match best {
            Some(t) => {
                rest = &rest[t.len()..];
                prefixes.push(t.to_string());
            }
            None => break,
        }
    }

    let suffixes: Vec<String> = suffixes_rev.into_iter().rev().collect();
    let composite_suffix =
        if suffixes.len() >= 2 { Some(suffixes.concat()) } else { None };
    Ok(Segmentation {
        surface: word.to_string(),
        prefixes,
        stem: rest.to_string(),
        suffixes,
        composite_suffix,
    })
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

fn longest_match<'a, I>(candidates: I, matches: impl Fn(&str) -> bool) -> Option<&'a str>
where
    I: Iterator<Item = &'a AffixCandidate>,
{
    let mut best: Option<&str> = None;
    for c in candidates {
        if matches(&c.text) {
            let better = match best {
                Some(b) => char_len(&c.text) > char_len(b),
                None => true,
            };
            if better {
                best = Some(&c.text);
            }
        }
    }
    best
}

const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

fn is_vowel(c: char) -> bool {
    VOWELS.contains(&c)
}

/// Consonant/vowel skeleton of a word. The digraphs "ie" and "għ" collapse to
/// a single V and C respectively; any other character is V when in
/// {a,e,i,o,u} and C otherwise.
pub fn cv_pattern(word: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == 'g' && i + 1 < chars.len() && chars[i + 1] == 'ħ' {
            out.push('C');
            i += 2;
        } else if chars[i] == 'i' && i + 1 < chars.len() && chars[i + 1] == 'e' {
            out.push('V');
            i += 2;
        } else {
            out.push(if is_vowel(chars[i]) { 'V' } else { 'C' });
            i += 1;
        }
    }
    out
}

/// Reports orthographic gemination: adjacent identical consonant characters.
/// Positions index the first member of each pair, in characters.
pub fn detect_gemination(word: &str) -> (bool, Vec<usize>) {
    let chars: Vec<char> = word.chars().collect();
    let mut positions = Vec::new();
    for i in 0..chars.len().saturating_sub(1) {
        if chars[i] == chars[i + 1] && !is_vowel(chars[i]) {
            positions.push(i);
        }
    }
    (!positions.is_empty(), positions)
}

/// Writes an inventory as TSV with header `kind text score support`, prefixes
/// first, preserving rank order.
pub fn write_inventory<W: Write>(inventory: &AffixInventory, mut writer: W) -> Result<()> {
    writeln!(writer, "kind\ttext\tscore\tsupport")?;
    for c in inventory.prefixes.iter().chain(inventory.suffixes.iter()) {
        writeln!(writer, "{}\t{}\t{}\t{}", c.kind.token(), c.text, c.score, c.support)?;
    }
    Ok(())
}

/// Reads an inventory written by [`write_inventory`]. Segmentation parameters
/// are not stored in the file, so the caller supplies them.
pub fn read_inventory<R: Read>(mut reader: R, params: AffixParams) -> Result<AffixInventory> {
    params.validate()?;
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| match e.kind() {
        std::io::ErrorKind::InvalidData => Error::Decode { offset: 0 },
        _ => Error::Io(e),
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "kind\ttext\tscore\tsupport")) => {}
        _ => return Err(Error::Schema("affix file must start with: kind\\ttext\\tscore\\tsupport".into())),
    }
    let mut prefixes = Vec::new();
    let mut suffixes = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(lineno, format!("expected 4 fields, found {}", fields.len())));
        }
        let kind = AffixKind::parse(fields[0])
            .ok_or_else(|| Error::parse(lineno, format!("unknown affix kind {:?}", fields[0])))?;
        if fields[1].is_empty() {
            return Err(Error::parse(lineno, "blank affix text"));
        }
        let score: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad score {:?}", fields[2])))?;
        let support: u64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad support {:?}", fields[3])))?;
        let candidate = AffixCandidate { kind, text: fields[1].to_string(), score, support };
        match kind {
            AffixKind::Prefix => prefixes.push(candidate),
            AffixKind::Suffix => suffixes.push(candidate),
        }
    }
    Ok(AffixInventory { prefixes, suffixes, params })
}

/// Writes segmentations as TSV: `surface prefixes stem suffixes`, affix lists
/// joined with '+'.
pub fn write_segmentations<W: Write>(segs: &[Segmentation], mut writer: W) -> Result<()> {
    writeln!(writer, "surface\tprefixes\tstem\tsuffixes")?;
    for s in segs {
        writeln!(writer, "{}\t{}\t{}\t{}", s.surface, s.prefixes.join("+"), s.stem, s.suffixes.join("+"))?;
    }
    Ok(())
}

/// Reads segmentations written by [`write_segmentations`], restoring the
/// composite suffix and checking the concatenation invariant.
pub fn read_segmentations<R: Read>(mut reader: R) -> Result<Vec<Segmentation>> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| match e.kind() {
        std::io::ErrorKind::InvalidData => Error::Decode { offset: 0 },
        _ => Error::Io(e),
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "surface\tprefixes\tstem\tsuffixes")) => {}
        _ => {
            return Err(Error::Schema(
                "segmentation file must start with: surface\\tprefixes\\tstem\\tsuffixes".into(),
            ))
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(lineno, format!("expected 4 fields, found {}", fields.len())));
        }
        let split_list = |f: &str| -> Vec<String> {
            if f.is_empty() {
                Vec::new()
            } else {
                f.split('+').map(str::to_string).collect()
            }
        };
        let prefixes = split_list(fields[1]);
        let suffixes = split_list(fields[3]);
        let surface = fields[0].to_string();
        let rebuilt = format!("{}{}{}", prefixes.concat(), fields[2], suffixes.concat());
        if rebuilt != surface {
            return Err(Error::parse(
                lineno,
                format!("segmentation parts spell {rebuilt:?} but surface is {surface:?}"),
            ));
        }
        let composite_suffix =
            if suffixes.len() >= 2 { Some(suffixes.concat()) } else { None };
        out.push(Segmentation {
            surface,
            prefixes,
            stem: fields[2].to_string(),
            suffixes,
            composite_suffix,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(words: &[&str]) -> Vec<WordEntry> {
        words.iter().map(|w| WordEntry { surface: w.to_string(), frequency: 1 }).collect()
    }

    const PARADIGM: [&str; 12] = [
        "neżamina",
        "teżamina",
        "jeżamina",
        "neżaminaw",
        "teżaminaw",
        "jeżaminaw",
        "nigdeb",
        "tigdeb",
        "jigdeb",
        "nigdbu",
        "tigdbu",
        "jigdbu",
    ];

    #[test]
    fn forward_trie_counts_and_branching() {
        let trie = build_trie(&entries(&["ab", "ac"]), TrieDirection::Forward).unwrap();
        assert_eq!(trie.total_tokens(), 2);
        assert!(trie.check_count_invariant());
        assert_eq!(trie.branching_at(&['a']), Some(2));
        assert!((trie.transitional_probability("", 'a').unwrap() - 1.0).abs() < 1e-12);
        assert!((trie.transitional_probability("a", 'b').unwrap() - 0.5).abs() < 1e-12);
        assert!((trie.end_probability("ab").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn backward_trie_stores_reversed_paths() {
        let trie = build_trie(&entries(&["ab"]), TrieDirection::Backward).unwrap();
        assert!((trie.transitional_probability("b", 'a').unwrap() - 1.0).abs() < 1e-12);
        assert!(trie.node_at("a").is_none(), "paths must be in reversed-word space");
        assert!((trie.end_probability("ba").unwrap() - 1.0).abs() < 1e-12);
        let words = trie.words();
        assert_eq!(words.len(), 1);
        assert_eq!(words[0].surface, "ab", "words() must un-reverse");
    }

    #[test]
    fn transitional_probabilities_sum_to_one() {
        let trie =
            build_trie(&entries(&["walk", "walked", "walking", "talk"]), TrieDirection::Forward)
                .unwrap();
        for path in ["", "w", "wal", "walk", "walked", "t"] {
            let mut total = trie.end_probability(path).unwrap();
            for c in trie.continuations(path).unwrap() {
                total += trie.transitional_probability(path, c).unwrap();
            }
            assert!((total - 1.0).abs() < 1e-12, "distribution at {path:?} sums to {total}");
        }
    }

    #[test]
    fn unknown_path_is_an_error() {
        let trie = build_trie(&entries(&["ab"]), TrieDirection::Forward).unwrap();
        assert!(trie.transitional_probability("zz", 'a').is_err());
        assert!(trie.end_probability("q").is_err());
    }

    #[test]
    fn frequency_weights_counts() {
        let mut e = entries(&["ab", "ac"]);
        e[0].frequency = 3;
        let trie = build_trie(&e, TrieDirection::Forward).unwrap();
        assert_eq!(trie.total_tokens(), 4);
        assert!((trie.transitional_probability("a", 'b').unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn english_toy_corpus_ranks_ed_and_ing_strictly_first() {
        let words = entries(&["walk", "walked", "walking", "talk", "talked", "talking"]);
        let trie = build_trie(&words, TrieDirection::Backward).unwrap();
        let cands = score_affixes(&trie, AffixKind::Suffix, &AffixParams::default()).unwrap();
        let top2: Vec<&str> = cands.iter().take(2).map(|c| c.text.as_str()).collect();
        assert_eq!(top2, vec!["ing", "ed"]);
        // support 2, diversification at the stem boundary: {end, e, i} = 3
        let expected = 2.0 * 3.0_f64.log2();
        for c in &cands[..2] {
            assert_eq!(c.support, 2);
            assert!((c.score - expected).abs() < 1e-12);
        }
        if cands.len() > 2 {
            assert!(cands[2].score < expected - 1e-9, "top-2 must be strict: {:?}", cands[2]);
        }
    }

    #[test]
    fn paradigm_prefixes_top_and_suffixes_include_plural_markers() {
        let words = entries(&PARADIGM);
        let fwd = build_trie(&words, TrieDirection::Forward).unwrap();
        let prefixes = score_affixes(&fwd, AffixKind::Prefix, &AffixParams::default()).unwrap();
        let top3: Vec<&str> = prefixes.iter().take(3).map(|c| c.text.as_str()).collect();
        assert_eq!(top3, vec!["j", "n", "t"]);
        let top_score = 4.0 * 3.0_f64.log2();
        for c in &prefixes[..3] {
            assert_eq!(c.support, 4);
            assert!((c.score - top_score).abs() < 1e-12);
        }
        if prefixes.len() > 3 {
            assert!(prefixes[3].score < top_score - 1e-9, "subject markers must rank strictly first");
        }

        let bwd = build_trie(&words, TrieDirection::Backward).unwrap();
        let suffixes = score_affixes(&bwd, AffixKind::Suffix, &AffixParams::default()).unwrap();
        let texts: Vec<&str> = suffixes.iter().map(|c| c.text.as_str()).collect();
        assert!(texts.contains(&"w"), "suffixes were {texts:?}");
        assert!(texts.contains(&"u"), "suffixes were {texts:?}");
    }

    #[test]
    fn single_word_corpus_has_no_candidates() {
        let trie = build_trie(&entries(&["gideb"]), TrieDirection::Backward).unwrap();
        let cands = score_affixes(&trie, AffixKind::Suffix, &AffixParams::default()).unwrap();
        assert!(cands.is_empty());
    }

    #[test]
    fn direction_mismatch_is_an_error() {
        let trie = build_trie(&entries(&["ab", "ac"]), TrieDirection::Forward).unwrap();
        assert!(score_affixes(&trie, AffixKind::Suffix, &AffixParams::default()).is_err());
    }

    #[test]
    fn inventory_is_sorted_and_duplicate_free() {
        let inv = build_inventory(&entries(&PARADIGM), &AffixParams::default()).unwrap();
        for list in [&inv.prefixes, &inv.suffixes] {
            for pair in list.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let ord = b
                    .score
                    .total_cmp(&a.score)
                    .then_with(|| b.text.chars().count().cmp(&a.text.chars().count()))
                    .then_with(|| a.text.cmp(&b.text));
                assert!(ord != std::cmp::Ordering::Greater, "out of order: {a:?} then {b:?}");
                assert_ne!(a.text, b.text);
            }
        }
    }

    fn toy_inventory() -> AffixInventory {
        AffixInventory::from_lists(&["n", "t", "j"], &["w", "u"], AffixParams::default())
    }

    #[test]
    fn segment_strips_subject_prefix_and_plural_suffix() {
        let seg = segment("neżaminaw", &toy_inventory()).unwrap();
        assert_eq!(seg.prefixes, vec!["n"]);
        assert_eq!(seg.stem, "eżamina");
        assert_eq!(seg.suffixes, vec!["w"]);
        assert_eq!(seg.composite_suffix, None);
    }

    #[test]
    fn segment_collects_composite_suffix_in_surface_order() {
        let inv = AffixInventory::from_lists::<&str>(&[], &["hu", "li"], AffixParams::default());
        let seg = segment("qatilhuli", &inv).unwrap();
        assert!(seg.prefixes.is_empty());
        assert_eq!(seg.stem, "qatil");
        assert_eq!(seg.suffixes, vec!["hu", "li"]);
        assert_eq!(seg.composite_suffix.as_deref(), Some("huli"));
    }

    #[test]
    fn segment_without_matches_keeps_word_as_stem() {
        let seg = segment("kollox", &toy_inventory()).unwrap();
        assert!(seg.prefixes.is_empty());
        assert!(seg.suffixes.is_empty());
        assert_eq!(seg.stem, "kollox");
    }

    #[test]
    fn segment_respects_min_stem_len() {
        let seg = segment("nu", &toy_inventory()).unwrap();
        assert_eq!(seg.stem, "nu");
        assert!(seg.prefixes.is_empty() && seg.suffixes.is_empty());
    }

    #[test]
    fn segment_caps_prefix_count() {
        let inv = AffixInventory::from_lists::<&str>(&["a", "b", "c"], &[], AffixParams::default());
        let seg = segment("abcstem", &inv).unwrap();
        assert_eq!(seg.prefixes, vec!["a", "b"]);
        assert_eq!(seg.stem, "cstem");
    }

    #[test]
    fn segment_prefers_longest_match() {
        let inv = AffixInventory::from_lists::<&str>(&[], &["s", "es"], AffixParams::default());
        let seg = segment("boxes", &inv).unwrap();
        assert_eq!(seg.suffixes, vec!["es"]);
        assert_eq!(seg.stem, "box");
    }

    #[test]
    fn segment_concatenation_invariant_on_the_paradigm() {
        let inv = build_inventory(&entries(&PARADIGM), &AffixParams::default()).unwrap();
        for w in PARADIGM {
            let seg = segment(w, &inv).unwrap();
            let rebuilt = format!("{}{}{}", seg.prefixes.concat(), seg.stem, seg.suffixes.concat());
            assert_eq!(rebuilt, w);
            assert!(
                seg.stem.chars().count() >= inv.params.min_stem_len,
                "stem {:?} too short",
                seg.stem
            );
        }
    }

    #[test]
    fn cv_patterns_with_digraphs() {
        assert_eq!(cv_pattern("gideb"), "CVCVC");
        assert_eq!(cv_pattern("giddieb"), "CVCCVC");
        assert_eq!(cv_pattern("għamel"), "CVCVC");
        assert_eq!(cv_pattern("ie"), "V");
        assert_eq!(cv_pattern("bieb"), "CVC");
    }

    #[test]
    fn gemination_positions_are_char_indexed() {
        assert_eq!(detect_gemination("giddieb"), (true, vec![2]));
        assert_eq!(detect_gemination("saar"), (false, vec![]));
        assert_eq!(detect_gemination("fettet"), (true, vec![2]));
        assert_eq!(detect_gemination("żeffienet"), (true, vec![2]));
        assert_eq!(detect_gemination("ddd"), (true, vec![0, 1]));
    }

    #[test]
    fn inventory_roundtrip_through_tsv() {
        let inv = build_inventory(&entries(&PARADIGM), &AffixParams::default()).unwrap();
        let mut buf = Vec::new();
        write_inventory(&inv, &mut buf).unwrap();
        let back = read_inventory(&buf[..], AffixParams::default()).unwrap();
        assert_eq!(back.prefixes.len(), inv.prefixes.len());
        assert_eq!(back.suffixes.len(), inv.suffixes.len());
        for (a, b) in inv.suffixes.iter().zip(back.suffixes.iter()) {
            assert_eq!(a.text, b.text);
            assert_eq!(a.support, b.support);
            assert!((a.score - b.score).abs() < 1e-12);
        }
    }

    #[test]
    fn segmentation_roundtrip_through_tsv() {
        let inv = build_inventory(&entries(&PARADIGM), &AffixParams::default()).unwrap();
        let segs: Vec<Segmentation> = PARADIGM.iter().map(|w| segment(w, &inv).unwrap()).collect();
        let mut buf = Vec::new();
        write_segmentations(&segs, &mut buf).unwrap();
        let back = read_segmentations(&buf[..]).unwrap();
        assert_eq!(segs, back);
    }

    #[test]
    fn segmentation_reader_rejects_inconsistent_rows() {
        let text = "surface\tprefixes\tstem\tsuffixes\nabc\ta\tzz\tc\n";
        assert!(read_segmentations(text.as_bytes()).is_err());
    }
}
