//! Word statistics and term weighting.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::fusion::{EmotionDurations, WordFusion};
use crate::model::{normalize_word, Emotion, TimeSpan};

pub const DEFAULT_TOP_TERMS: usize = 20;

/// Weight multiplier for terms found in the emotion lexicon.
pub const LEXICON_WEIGHT: f64 = 2.0;

const STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const EMOTION_LEXICON: &str = include_str!("../../data/emotion_lexicon.txt");

/// Stopword list and emotion lexicon used for term weighting.
#[derive(Debug, Clone)]
pub struct Lexicons {
    stopwords: HashSet<String>,
    emotion_terms: HashSet<String>,
}

fn parse_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

impl Lexicons {
    /// The lists shipped with the crate.
    pub fn bundled() -> Self {
        Self { stopwords: parse_list(STOPWORDS), emotion_terms: parse_list(EMOTION_LEXICON) }
    }

    pub fn new<S: AsRef<str>>(stopwords: impl IntoIterator<Item = S>, emotion_terms: impl IntoIterator<Item = S>) -> Self {
        Self {
            stopwords: stopwords.into_iter().map(|s| s.as_ref().to_lowercase()).collect(),
            emotion_terms: emotion_terms.into_iter().map(|s| s.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn is_stopword(&self, term: &str) -> bool {
        self.stopwords.contains(term)
    }

    pub fn is_emotion_term(&self, term: &str) -> bool {
        self.emotion_terms.contains(term)
    }
}

impl Default for Lexicons {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Lowercased tokens: runs of alphanumerics and inner apostrophes.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '’'))
        .map(|t| t.trim_matches(|c| c == '\'' || c == '’').to_lowercase())
        .filter(|t| !t.is_empty())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    pub term: String,
    pub weight: f64,
}

/// Term frequency times sentiment weight over the given texts, stopwords
/// removed. Returns the `top_n` heaviest terms, ties in string order.
pub fn word_importance<'a>(texts: impl IntoIterator<Item = &'a str>, lexicons: &Lexicons, top_n: usize) -> Vec<WeightedTerm> {
    let mut tf: BTreeMap<String, usize> = BTreeMap::new();
    for text in texts {
        for token in tokenize(text).filter(|t| !lexicons.is_stopword(t)) {
            *tf.entry(token).or_default() += 1;
        }
    }
    let mut terms: Vec<WeightedTerm> = tf
        .into_iter()
        .map(|(term, n)| {
            let s = if lexicons.is_emotion_term(&term) { LEXICON_WEIGHT } else { 1.0 };
            WeightedTerm { weight: n as f64 * s, term }
        })
        .collect();
    terms.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
    terms.truncate(top_n);
    terms
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WordOccurrence {
    pub segment_id: usize,
    #[serde(flatten)]
    pub span: TimeSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WordStat {
    pub word: String,
    pub frequency: usize,
    pub total_duration: f64,
    pub face_durations: EmotionDurations,
    pub undetected_duration: f64,
    pub occurrences: Vec<WordOccurrence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordSortKey {
    Frequency,
    Duration,
    CategoryDuration(Emotion),
    Word,
}

impl FromStr for WordSortKey {
    type Err = AnalysisError;

    /// Accepts `frequency`, `duration`, `word`, `category-duration:<emotion>`
    /// and `category-duration(<emotion>)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "frequency" => return Ok(WordSortKey::Frequency),
            "duration" => return Ok(WordSortKey::Duration),
            "word" => return Ok(WordSortKey::Word),
            _ => {}
        }
        let arg = s
            .strip_prefix("category-duration:")
            .or_else(|| s.strip_prefix("category-duration(").and_then(|r| r.strip_suffix(')')));
        match arg.map(str::parse::<Emotion>) {
            Some(Ok(e)) => Ok(WordSortKey::CategoryDuration(e)),
            _ => Err(AnalysisError::Usage(format!("unknown word sort key `{s}`"))),
        }
    }
}

/// Aggregates word occurrences by normalized text, keeps those containing
/// `filter`, and orders them by `key` (descending; `Word` ascending).
pub fn word_table(words: &[WordFusion], key: WordSortKey, filter: Option<&str>) -> Vec<WordStat> {
    let mut table: BTreeMap<String, WordStat> = BTreeMap::new();
    for w in words {
        let word = normalize_word(&w.word);
        let stat = table.entry(word.clone()).or_insert_with(|| WordStat {
            word,
            frequency: 0,
            total_duration: 0.0,
            face_durations: EmotionDurations::default(),
            undetected_duration: 0.0,
            occurrences: Vec::new(),
        });
        stat.frequency += 1;
        stat.total_duration += w.span.duration();
        stat.face_durations.merge(&w.face_durations);
        stat.undetected_duration += w.undetected_duration;
        stat.occurrences.push(WordOccurrence { segment_id: w.segment_id, span: w.span });
    }
    let needle = filter.map(str::to_lowercase).filter(|f| !f.is_empty());
    let mut rows: Vec<WordStat> = table
        .into_values()
        .filter(|s| needle.as_deref().is_none_or(|n| s.word.contains(n)))
        .collect();
    let metric = |s: &WordStat| match key {
        WordSortKey::Frequency => s.frequency as f64,
        WordSortKey::Duration => s.total_duration,
        WordSortKey::CategoryDuration(e) => s.face_durations.get(e),
        WordSortKey::Word => 0.0,
    };
    rows.sort_by(|a, b| match metric(b).total_cmp(&metric(a)) {
        Ordering::Equal => a.word.cmp(&b.word),
        o => o,
    });
    rows
}
