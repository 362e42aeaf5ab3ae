//! Issue corpora: loading, validation, canonical text and a planted-topic generator.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One expert-written concern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub id: String,
    pub working_group: String,
    pub title: String,
    pub description: String,
}

impl Issue {
    pub fn new(
        id: impl Into<String>,
        working_group: impl Into<String>,
        title: impl Into<String>,
        description: impl Into<String>,
    ) -> Self {
        Issue {
            id: id.into(),
            working_group: working_group.into(),
            title: title.into(),
            description: description.into(),
        }
    }

    /// Title and description joined by a sentence boundary (`". "`, or a
    /// single space when the title already ends a sentence). The description
    /// is skipped when blank.
    pub fn canonical_text(&self) -> String {
        let title = self.title.trim();
        let description = self.description.trim();
        if description.is_empty() {
            title.to_string()
        } else if title.ends_with(['.', '!', '?']) {
            format!("{title} {description}")
        } else {
            format!("{title}. {description}")
        }
    }

    fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("issue with empty id".into()));
        }
        if self.working_group.trim().is_empty() {
            return Err(Error::Validation(format!(
                "issue {:?} has an empty working group",
                self.id
            )));
        }
        if self.title.trim().is_empty() {
            return Err(Error::Validation(format!(
                "issue {:?} has an empty title",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub issues: Vec<Issue>,
    /// File path the corpus came from, or `"synthetic"`.
    pub source: String,
}

impl Corpus {
    /// Builds a corpus, checking every issue and id uniqueness.
    pub fn new(issues: Vec<Issue>, source: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(issues.len());
        for issue in &issues {
            issue.validate()?;
            if !seen.insert(issue.id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate issue id {:?}",
                    issue.id
                )));
            }
        }
        Ok(Corpus {
            issues,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.issues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.issues.iter().map(|i| i.id.as_str())
    }

    pub fn get(&self, id: &str) -> Option<&Issue> {
        self.issues.iter().find(|i| i.id == id)
    }

    /// Grouping operations need at least two issues.
    pub fn require_groupable(&self) -> Result<()> {
        if self.issues.len() < 2 {
            return Err(Error::Argument(format!(
                "grouping needs at least 2 issues, corpus has {}",
                self.issues.len()
            )));
        }
        Ok(())
    }

    /// Distinct working groups in order of first appearance.
    pub fn working_groups(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for issue in &self.issues {
            if !out.contains(&issue.working_group.as_str()) {
                out.push(&issue.working_group);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Csv,
    Json,
}

impl CorpusFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(CorpusFormat::Csv),
            "json" => Some(CorpusFormat::Json),
            _ => None,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "json" => Ok(CorpusFormat::Json),
            other => Err(Error::Argument(format!("unknown corpus format {other:?}"))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Csv => "csv",
            CorpusFormat::Json => "json",
        })
    }
}

pub const CSV_COLUMNS: [&str; 4] = ["id", "working_group", "title", "description"];

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    let issues = match format {
        CorpusFormat::Csv => parse_csv(&raw)?,
        CorpusFormat::Json => parse_json(&raw)?,
    };
    Corpus::new(issues, path.display().to_string())
}

fn parse_csv(raw: &[u8]) -> Result<Vec<Issue>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(raw);
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable CSV header: {e}")))?
        .clone();
    let mut columns = [0usize; 4];
    for (slot, name) in columns.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing required column `{name}`")))?;
    }

    let mut issues = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Schema(format!("CSV row {}: {e}", row + 1)))?;
        let field = |i: usize| record.get(columns[i]).unwrap_or_default().to_string();
        issues.push(Issue {
            id: field(0),
            working_group: field(1),
            title: field(2),
            description: field(3),
        });
    }
    Ok(issues)
}

#[derive(Deserialize)]
struct RawIssue {
    id: Option<String>,
    working_group: Option<String>,
    title: Option<String>,
    description: Option<String>,
}

#[derive(Deserialize)]
struct RawCorpus {
    issues: Option<Vec<RawIssue>>,
}

fn parse_json(raw: &[u8]) -> Result<Vec<Issue>> {
    let doc: RawCorpus =
        serde_json::from_slice(raw).map_err(|e| Error::Schema(format!("corpus JSON: {e}")))?;
    let raw_issues = doc
        .issues
        .ok_or_else(|| Error::Schema("missing required field `issues`".into()))?;
    raw_issues
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let need = |v: Option<String>, name: &str| {
                v.ok_or_else(|| {
                    Error::Schema(format!("issue #{}: missing required field `{name}`", i + 1))
                })
            };
            Ok(Issue {
                id: need(r.id, "id")?,
                working_group: need(r.working_group, "working_group")?,
                title: need(r.title, "title")?,
                description: need(r.description, "description")?,
            })
        })
        .collect()
}

/// Planted topic index per issue id, produced alongside a synthetic corpus.
pub type PlantedLabels = IndexMap<String, usize>;

const UMBRELLA_WORDS: usize = 48;
const RETAIN_PROBABILITY: f64 = 0.75;
const FRESH_WORDS: usize = 4;
const SHARED_POOL: usize = 40;
const TITLE_WORDS: usize = 6;

/// Generates a corpus with planted topics.
///
/// Each topic owns a private vocabulary. Its first issue is an umbrella
/// statement of `UMBRELLA_WORDS` topic words; every further issue restates
/// it, keeping each word with probability `RETAIN_PROBABILITY`, and adds a
/// few words of its own. Every emitted word is swapped for a word from a pool
/// shared across topics with probability `vocab_overlap`. Topic `t` is
/// written by working group `wg-{t+1}`.
pub fn synth_corpus(
    n_topics: usize,
    sizes: &[usize],
    vocab_overlap: f64,
    seed: u64,
) -> Result<(Corpus, PlantedLabels)> {
    if n_topics == 0 {
        return Err(Error::Argument("n_topics must be positive".into()));
    }
    if sizes.len() != n_topics {
        return Err(Error::Argument(format!(
            "expected {n_topics} topic sizes, got {}",
            sizes.len()
        )));
    }
    if let Some(t) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Argument(format!("topic {t} has size 0")));
    }
    if !(0.0..=1.0).contains(&vocab_overlap) {
        return Err(Error::Argument(format!(
            "vocab_overlap must lie in [0, 1], got {vocab_overlap}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = WordFactory::default();
    let shared: Vec<String> = (0..SHARED_POOL).map(|_| words.fresh(&mut rng)).collect();

    let mut issues = Vec::with_capacity(sizes.iter().sum());
    let mut labels = PlantedLabels::new();
    for (topic, &size) in sizes.iter().enumerate() {
        let umbrella: Vec<String> = (0..UMBRELLA_WORDS).map(|_| words.fresh(&mut rng)).collect();
        for k in 0..size {
            let mut tokens: Vec<String> = if k == 0 {
                umbrella.clone()
            } else {
                let mut kept: Vec<String> = umbrella
                    .iter()
                    .filter(|_| rng.random_bool(RETAIN_PROBABILITY))
                    .cloned()
                    .collect();
                if kept.is_empty() {
                    kept.push(umbrella[rng.random_range(0..umbrella.len())].clone());
                }
                kept.extend((0..FRESH_WORDS).map(|_| words.fresh(&mut rng)));
                kept
            };
            for token in tokens.iter_mut() {
                if vocab_overlap > 0.0 && rng.random_bool(vocab_overlap) {
                    *token = shared[rng.random_range(0..shared.len())].clone();
                }
            }
            let id = format!("G{}-{:02}", topic + 1, k + 1);
            let split = TITLE_WORDS.min(tokens.len());
            let title = sentence(&tokens[..split]);
            let description = sentence(&tokens[split..]);
            issues.push(Issue::new(
                id.clone(),
                format!("wg-{}", topic + 1),
                title,
                description,
            ));
            labels.insert(id, topic);
        }
    }
    Ok((Corpus::new(issues, "synthetic")?, labels))
}

fn sentence(tokens: &[String]) -> String {
    let mut out = tokens.join(" ");
    if let Some(first) = out.get(..1) {
        let upper = first.to_ascii_uppercase();
        out.replace_range(..1, &upper);
    }
    out
}

/// Pronounceable pseudo-words, never repeated within one generator.
#[derive(Default)]
struct WordFactory {
    used: HashSet<String>,
}

impl WordFactory {
    const ONSETS: [&'static str; 16] = [
        "b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "st",
    ];
    const VOWELS: [&'static str; 6] = ["a", "e", "i", "o", "u", "ai"];

    fn fresh(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let syllables = rng.random_range(2..=4);
            let mut word = String::new();
            for _ in 0..syllables {
                word.push_str(Self::ONSETS[rng.random_range(0..Self::ONSETS.len())]);
                word.push_str(Self::VOWELS[rng.random_range(0..Self::VOWELS.len())]);
            }
            if self.used.insert(word.clone()) {
                return word;
            }
        }
    }
}
