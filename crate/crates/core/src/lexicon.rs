//! Corpus and lexicon loading.
//!
//! A corpus is raw text that gets tokenised into frequency-counted surface
//! forms. A labelled lexicon is a TSV table of verb forms annotated with the
//! seven morphological properties plus lemma and origin. Cluster evaluation
//! records come from a CSV of expert judgements over word clusters.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Read;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unicode_normalization::UnicodeNormalization;

use crate::clustering::ClusterSet;
use crate::error::{Error, Result};

/// A surface form with its corpus frequency. The surface is NFC-normalised,
/// lowercased and free of whitespace; frequency is at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordEntry {
    pub surface: String,
    pub frequency: u64,
}

/// Grammatical person of the subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Person {
    First,
    Second,
    Third,
}

/// Grammatical number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Number {
    Sg,
    Pl,
}

/// Grammatical gender (only marked in the third person singular).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    M,
    F,
}

/// Tense / aspect / mood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tam {
    Perfective,
    Imperfective,
    Imperative,
}

/// Polarity of the verb form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Person {
    pub fn token(self) -> &'static str {
        match self {
            Person::First => "1",
            Person::Second => "2",
            Person::Third => "3",
        }
    }
}

impl Number {
    pub fn token(self) -> &'static str {
        match self {
            Number::Sg => "sg",
            Number::Pl => "pl",
        }
    }
}

impl Gender {
    pub fn token(self) -> &'static str {
        match self {
            Gender::M => "m",
            Gender::F => "f",
        }
    }
}

impl Tam {
    pub fn token(self) -> &'static str {
        match self {
            Tam::Perfective => "perfective",
            Tam::Imperfective => "imperfective",
            Tam::Imperative => "imperative",
        }
    }
}

impl Polarity {
    pub fn token(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

/// Morphological origin of a lexeme: built by stable-stem concatenation or by
/// root-and-pattern (non-concatenative) morphology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Concatenative,
    NonConcatenative,
    Unknown,
}

impl Origin {
    pub fn token(self) -> &'static str {
        match self {
            Origin::Concatenative => "concatenative",
            Origin::NonConcatenative => "non_concatenative",
            Origin::Unknown => "unknown",
        }
    }

    pub fn parse(tok: &str) -> Option<Origin> {
        match tok {
            "concatenative" => Some(Origin::Concatenative),
            "non_concatenative" => Some(Origin::NonConcatenative),
            "unknown" | "" => Some(Origin::Unknown),
            _ => None,
        }
    }
}

/// One row of the labelled lexicon. Blank cells are `None` (the property is
/// not marked on the form); `origin` is never blank-as-null, it falls back to
/// `Unknown`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledEntry {
    pub surface: String,
    pub lemma: Option<String>,
    pub person: Option<Person>,
    pub number: Option<Number>,
    pub gender: Option<Gender>,
    pub dir_obj: Option<String>,
    pub ind_obj: Option<String>,
    pub tam: Option<Tam>,
    pub polarity: Option<Polarity>,
    pub origin: Origin,
}

/// Result of loading a labelled lexicon: the rows, plus how many exact
/// duplicates (same surface and same full label) were dropped.
#[derive(Debug, Clone)]
pub struct LoadedLexicon {
    pub entries: Vec<LabelledEntry>,
    pub duplicates_dropped: usize,
}

/// Expert quality judgement for one cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quality {
    VeryBad,
    Bad,
    Medium,
    Good,
    VeryGood,
}

impl Quality {
    /// Ordinal coding used for correlations: very_bad=1 .. very_good=5.
    pub fn ordinal(self) -> u8 {
        match self {
            Quality::VeryBad => 1,
            Quality::Bad => 2,
            Quality::Medium => 3,
            Quality::Good => 4,
            Quality::VeryGood => 5,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Quality::VeryBad => "very_bad",
            Quality::Bad => "bad",
            Quality::Medium => "medium",
            Quality::Good => "good",
            Quality::VeryGood => "very_good",
        }
    }

    pub fn parse(tok: &str) -> Option<Quality> {
        match tok {
            "very_bad" => Some(Quality::VeryBad),
            "bad" => Some(Quality::Bad),
            "medium" => Some(Quality::Medium),
            "good" => Some(Quality::Good),
            "very_good" => Some(Quality::VeryGood),
            _ => None,
        }
    }

    pub const ALL: [Quality; 5] = [
        Quality::VeryGood,
        Quality::Good,
        Quality::Medium,
        Quality::Bad,
        Quality::VeryBad,
    ];
}

/// One (cluster, expert) evaluation: a quality rating and the set of member
/// words the expert would remove from the cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterEvalRecord {
    pub cluster_id: String,
    pub expert_id: String,
    pub quality: Quality,
    pub removed_words: BTreeSet<String>,
}

/// A train / held-out / test partition of labelled entries, split by distinct
/// surface form so no form appears in two parts.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<LabelledEntry>,
    pub heldout: Vec<LabelledEntry>,
    pub test: Vec<LabelledEntry>,
    pub seed: u64,
}

/// Tokenises raw text into frequency-counted word entries.
///
/// Tokens are split on Unicode whitespace, lowercased, NFC-normalised, and
/// stripped of leading/trailing non-alphanumeric characters (internal hyphens
/// and apostrophes survive, so proclitic spellings like "l-ktieb" stay
/// intact). The result is ordered by descending frequency, ties broken
/// lexicographically. Invalid UTF-8 is reported with its byte offset.
pub fn load_corpus<R: Read>(reader: R) -> Result<Vec<WordEntry>> {
    let tokens = corpus_tokens(reader)?;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for token in tokens {
        *counts.entry(token).or_insert(0) += 1;
    }

    let mut entries: Vec<WordEntry> = counts
        .into_iter()
        .map(|(surface, frequency)| WordEntry { surface, frequency })
        .collect();
    entries.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.surface.cmp(&b.surface)));
    Ok(entries)
}

/// Tokenises raw text like [`load_corpus`] but keeps the running order, for
/// consumers that need co-occurrence context rather than counts.
pub fn corpus_tokens<R: Read>(mut reader: R) -> Result<Vec<String>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let text = match std::str::from_utf8(&bytes) {
        Ok(t) => t,
        Err(e) => return Err(Error::Decode { offset: e.valid_up_to() }),
    };
    Ok(text
        .split_whitespace()
        .map(normalise_token)
        .filter(|t| !t.is_empty())
        .collect())
}

fn normalise_token(raw: &str) -> String {
    let lowered: String = raw.to_lowercase().nfc().collect();
    let trimmed = lowered.trim_matches(|c: char| !c.is_alphanumeric());
    trimmed.to_string()
}

const LEXICON_HEADER: [&str; 10] = [
    "surface", "lemma", "person", "number", "gender", "dir_obj", "ind_obj", "tam", "polarity",
    "origin",
];

/// Loads a labelled lexicon from TSV with the fixed ten-column header
/// `surface lemma person number gender dir_obj ind_obj tam polarity origin`.
///
/// Blank cells become null labels. Rows duplicating an already-seen
/// (surface, full label) pair are dropped and counted. Unknown enum tokens
/// are row-level errors carrying the 1-based line number.
pub fn load_labelled_lexicon<R: Read>(mut reader: R) -> Result<LoadedLexicon> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let text = match std::str::from_utf8(&bytes) {
        Ok(t) => t,
        Err(e) => return Err(Error::Decode { offset: e.valid_up_to() }),
    };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Schema("labelled lexicon is empty, expected a header row".into()))?;
    let cols: Vec<&str> = header.split('\t').collect();
    if cols != LEXICON_HEADER {
        return Err(Error::Schema(format!(
            "labelled lexicon header must be exactly: {}",
            LEXICON_HEADER.join("\\t")
        )));
    }

    let mut entries = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut duplicates_dropped = 0usize;

    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != LEXICON_HEADER.len() {
            return Err(Error::parse(
                lineno,
                format!("expected {} tab-separated fields, found {}", LEXICON_HEADER.len(), fields.len()),
            ));
        }
        let surface = normalise_token(fields[0]);
        if surface.is_empty() {
            return Err(Error::parse(lineno, "blank surface form"));
        }
        let entry = LabelledEntry {
            surface,
            lemma: opt_str(fields[1]),
            person: parse_enum(lineno, "person", fields[2], |t| match t {
                "1" => Some(Person::First),
                "2" => Some(Person::Second),
                "3" => Some(Person::Third),
                _ => None,
            })?,
            number: parse_enum(lineno, "number", fields[3], |t| match t {
                "sg" => Some(Number::Sg),
                "pl" => Some(Number::Pl),
                _ => None,
            })?,
            gender: parse_enum(lineno, "gender", fields[4], |t| match t {
                "m" => Some(Gender::M),
                "f" => Some(Gender::F),
                _ => None,
            })?,
            dir_obj: opt_str(fields[5]),
            ind_obj: opt_str(fields[6]),
            tam: parse_enum(lineno, "tam", fields[7], |t| match t {
                "perfective" => Some(Tam::Perfective),
                "imperfective" => Some(Tam::Imperfective),
                "imperative" => Some(Tam::Imperative),
                _ => None,
            })?,
            polarity: parse_enum(lineno, "polarity", fields[8], |t| match t {
                "positive" => Some(Polarity::Positive),
                "negative" => Some(Polarity::Negative),
                _ => None,
            })?,
            origin: Origin::parse(fields[9].trim()).ok_or_else(|| {
                Error::parse(lineno, format!("unknown origin token {:?}", fields[9]))
            })?,
        };
        let key = dedup_key(&entry);
        if seen.insert(key) {
            entries.push(entry);
        } else {
            duplicates_dropped += 1;
        }
    }

    Ok(LoadedLexicon { entries, duplicates_dropped })
}

fn opt_str(field: &str) -> Option<String> {
    let t = field.trim();
    if t.is_empty() {
        None
    } else {
        Some(t.to_string())
    }
}

fn parse_enum<T>(
    lineno: usize,
    name: &str,
    field: &str,
    f: impl Fn(&str) -> Option<T>,
) -> Result<Option<T>> {
    let t = field.trim();
    if t.is_empty() {
        return Ok(None);
    }
    match f(t) {
        Some(v) => Ok(Some(v)),
        None => Err(Error::parse(lineno, format!("unknown {name} token {t:?}"))),
    }
}

fn dedup_key(e: &LabelledEntry) -> String {
    format!(
        "{}\u{1}{:?}\u{1}{:?}\u{1}{:?}\u{1}{:?}\u{1}{:?}\u{1}{:?}\u{1}{:?}\u{1}{:?}\u{1}{:?}",
        e.surface, e.lemma, e.person, e.number, e.gender, e.dir_obj, e.ind_obj, e.tam, e.polarity, e.origin
    )
}

/// Splits labelled entries into train/heldout/test parts by distinct surface
/// form, deterministically for a fixed seed.
///
/// `fractions` are (train, heldout, test), each positive with sum <= 1.
/// Heldout and test receive floor(n * fraction) surface groups; train absorbs
/// the remainder, so the three parts always partition the input. Errors if
/// any part would be empty.
pub fn split_dataset(
    entries: &[LabelledEntry],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit> {
    let (ft, fh, fx) = fractions;
    for (name, f) in [("train", ft), ("heldout", fh), ("test", fx)] {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::InvalidParam(format!("{name} fraction must be positive, got {f}")));
        }
    }
    if ft + fh + fx > 1.0 + 1e-12 {
        return Err(Error::InvalidParam(format!(
            "fractions must sum to at most 1, got {}",
            ft + fh + fx
        )));
    }

    let mut by_surface: BTreeMap<&str, Vec<&LabelledEntry>> = BTreeMap::new();
    for e in entries {
        by_surface.entry(&e.surface).or_default().push(e);
    }
    let mut surfaces: Vec<&str> = by_surface.keys().copied().collect();
    let n = surfaces.len();

    let n_heldout = (n as f64 * fh).floor() as usize;
    let n_test = (n as f64 * fx).floor() as usize;
    let n_train = n.saturating_sub(n_heldout + n_test);
    if n_train == 0 || n_heldout == 0 || n_test == 0 {
        return Err(Error::InvalidInput(format!(
            "too few entries to populate each split part ({n} distinct surfaces -> train {n_train}, heldout {n_heldout}, test {n_test})"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    surfaces.shuffle(&mut rng);

    let collect = |range: &[&str]| -> Vec<LabelledEntry> {
        let mut part = Vec::new();
        for s in range {
            for e in &by_surface[s] {
                part.push((*e).clone());
            }
        }
        part
    };

    Ok(DatasetSplit {
        train: collect(&surfaces[..n_train]),
        heldout: collect(&surfaces[n_train..n_train + n_heldout]),
        test: collect(&surfaces[n_train + n_heldout..]),
        seed,
    })
}

/// Loads cluster evaluation records from CSV with header
/// `cluster_id,expert_id,quality,removed_words` (removed words joined by
/// semicolons). Every record must reference a cluster in `clusters`, and every
/// removed word must be a member of that cluster.
pub fn load_cluster_evals<R: Read>(reader: R, clusters: &ClusterSet) -> Result<Vec<ClusterEvalRecord>> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = csv_reader.headers().map_err(csv_err)?;
        let expect = ["cluster_id", "expert_id", "quality", "removed_words"];
        if headers.iter().collect::<Vec<_>>() != expect {
            return Err(Error::Schema(format!(
                "cluster evaluation header must be exactly: {}",
                expect.join(",")
            )));
        }
    }

    let mut records = Vec::new();
    for (idx, row) in csv_reader.records().enumerate() {
        let lineno = idx + 2;
        let row = row.map_err(csv_err)?;
        if row.len() != 4 {
            return Err(Error::parse(lineno, format!("expected 4 fields, found {}", row.len())));
        }
        let cluster_id = row[0].trim().to_string();
        let cluster = clusters
            .get(&cluster_id)
            .ok_or_else(|| Error::parse(lineno, format!("unknown cluster id {cluster_id:?}")))?;
        let expert_id = row[1].trim().to_string();
        if expert_id.is_empty() {
            return Err(Error::parse(lineno, "blank expert id"));
        }
        let quality = Quality::parse(row[2].trim())
            .ok_or_else(|| Error::parse(lineno, format!("unknown quality token {:?}", &row[2])))?;
        let mut removed_words = BTreeSet::new();
        for w in row[3].split(';').map(str::trim).filter(|w| !w.is_empty()) {
            if !cluster.members.contains(w) {
                return Err(Error::parse(
                    lineno,
                    format!("removed word {w:?} is not a member of cluster {cluster_id:?}"),
                ));
            }
            removed_words.insert(w.to_string());
        }
        records.push(ClusterEvalRecord { cluster_id, expert_id, quality, removed_words });
    }
    Ok(records)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::parse(pos.line() as usize, e.to_string()),
        None => Error::Schema(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_counts_and_orders_tokens() {
        let text = "Il-kelb GIDEB, u il-kelb gideb darba.";
        let entries = load_corpus(text.as_bytes()).unwrap();
        let as_pairs: Vec<(&str, u64)> =
            entries.iter().map(|e| (e.surface.as_str(), e.frequency)).collect();
        assert_eq!(as_pairs, vec![("gideb", 2), ("il-kelb", 2), ("darba", 1), ("u", 1)]);
    }

    #[test]
    fn corpus_strips_punctuation_keeps_internal_marks() {
        let entries = load_corpus("«l-ittra», (qatt) ta'".as_bytes()).unwrap();
        let surfaces: Vec<&str> = entries.iter().map(|e| e.surface.as_str()).collect();
        assert_eq!(surfaces, vec!["l-ittra", "qatt", "ta"]);
    }

    #[test]
    fn corpus_rejects_invalid_utf8_with_offset() {
        let bytes = b"kelma \xff tajba";
        match load_corpus(&bytes[..]) {
            Err(Error::Decode { offset }) => assert_eq!(offset, 6),
            other => panic!("expected decode error, got {other:?}"),
        }
    }

    #[test]
    fn corpus_load_is_idempotent_under_rendering() {
        let text = "gideb gideb jigdeb l-ittra qatt qatt qatt";
        let first = load_corpus(text.as_bytes()).unwrap();
        let rendered: Vec<String> = first
            .iter()
            .flat_map(|e| std::iter::repeat(e.surface.clone()).take(e.frequency as usize))
            .collect();
        let second = load_corpus(rendered.join(" ").as_bytes()).unwrap();
        assert_eq!(first, second);
    }

    fn lexicon_fixture() -> &'static str {
        "surface\tlemma\tperson\tnumber\tgender\tdir_obj\tind_obj\ttam\tpolarity\torigin\n\
         jigdbu\tgideb\t3\tpl\t\t\t\timperfective\tpositive\tnon_concatenative\n\
         qatilhuli\tqatel\t3\tsg\tm\t3sgm\t1sg\tperfective\tpositive\tnon_concatenative\n\
         jigdbu\tgideb\t3\tpl\t\t\t\timperfective\tpositive\tnon_concatenative\n"
    }

    #[test]
    fn lexicon_parses_rows_and_drops_exact_duplicates() {
        let loaded = load_labelled_lexicon(lexicon_fixture().as_bytes()).unwrap();
        assert_eq!(loaded.entries.len(), 2);
        assert_eq!(loaded.duplicates_dropped, 1);
        let first = &loaded.entries[0];
        assert_eq!(first.surface, "jigdbu");
        assert_eq!(first.person, Some(Person::Third));
        assert_eq!(first.number, Some(Number::Pl));
        assert_eq!(first.gender, None);
        assert_eq!(first.tam, Some(Tam::Imperfective));
        assert_eq!(first.origin, Origin::NonConcatenative);
        let second = &loaded.entries[1];
        assert_eq!(second.dir_obj.as_deref(), Some("3sgm"));
        assert_eq!(second.ind_obj.as_deref(), Some("1sg"));
    }

    #[test]
    fn lexicon_rejects_unknown_enum_token_with_line() {
        let text = "surface\tlemma\tperson\tnumber\tgender\tdir_obj\tind_obj\ttam\tpolarity\torigin\n\
                    jigdbu\tgideb\t9\tpl\t\t\t\timperfective\tpositive\tunknown\n";
        match load_labelled_lexicon(text.as_bytes()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("person"), "message was {msg:?}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn lexicon_rejects_wrong_header() {
        let text = "surface\tlemma\n";
        assert!(matches!(load_labelled_lexicon(text.as_bytes()), Err(Error::Schema(_))));
    }

    fn synthetic_entries(n: usize) -> Vec<LabelledEntry> {
        (0..n)
            .map(|i| LabelledEntry {
                surface: format!("kelma{i}"),
                lemma: None,
                person: None,
                number: None,
                gender: None,
                dir_obj: None,
                ind_obj: None,
                tam: None,
                polarity: None,
                origin: Origin::Unknown,
            })
            .collect()
    }

    #[test]
    fn split_sizes_match_fractions_exactly_when_divisible() {
        let entries = synthetic_entries(100);
        let split = split_dataset(&entries, (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!((split.train.len(), split.heldout.len(), split.test.len()), (80, 10, 10));
    }

    #[test]
    fn split_is_deterministic_and_partitions_by_surface() {
        let entries = synthetic_entries(53);
        let a = split_dataset(&entries, (0.6, 0.2, 0.2), 11).unwrap();
        let b = split_dataset(&entries, (0.6, 0.2, 0.2), 11).unwrap();
        let surfaces = |part: &[LabelledEntry]| -> Vec<String> {
            part.iter().map(|e| e.surface.clone()).collect()
        };
        assert_eq!(surfaces(&a.train), surfaces(&b.train));
        assert_eq!(surfaces(&a.heldout), surfaces(&b.heldout));
        assert_eq!(surfaces(&a.test), surfaces(&b.test));

        let mut all: Vec<String> = surfaces(&a.train);
        all.extend(surfaces(&a.heldout));
        all.extend(surfaces(&a.test));
        all.sort();
        let mut expect: Vec<String> = entries.iter().map(|e| e.surface.clone()).collect();
        expect.sort();
        assert_eq!(all, expect);
    }

    #[test]
    fn split_keeps_shared_surfaces_together() {
        let mut entries = synthetic_entries(30);
        let mut twin = entries[0].clone();
        twin.person = Some(Person::First);
        entries.push(twin);
        let split = split_dataset(&entries, (0.5, 0.25, 0.25), 3).unwrap();
        let homes = [&split.train, &split.heldout, &split.test]
            .iter()
            .filter(|part| part.iter().any(|e| e.surface == "kelma0"))
            .count();
        assert_eq!(homes, 1, "a surface form must live in exactly one part");
    }

    #[test]
    fn split_rejects_empty_part() {
        let entries = synthetic_entries(5);
        assert!(split_dataset(&entries, (0.8, 0.1, 0.1), 1).is_err());
    }

    #[test]
    fn split_rejects_bad_fractions() {
        let entries = synthetic_entries(10);
        assert!(split_dataset(&entries, (0.8, 0.3, 0.1), 1).is_err());
        assert!(split_dataset(&entries, (0.8, 0.0, 0.1), 1).is_err());
    }
}
