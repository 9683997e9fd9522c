//! The eight language-independent surface features.
//!
//! All features are computed from the raw text and a corpus-internal token
//! frequency table; no lexicon, stopword list or tagger is involved, so the
//! extractor works unchanged on any language. Per text with `N` tokens:
//!
//! - `ap` — punctuation characters (Unicode category P) per token
//! - `em` — `!` characters per token
//! - `nb` — digit-only tokens per token
//! - `pa` — `()[]{}` characters per token
//! - `qm` — `?` characters per token
//! - `qt` — quote characters per token
//! - `tt` — type/token ratio: distinct tokens / N
//! - `wf` — mean corpus relative frequency of the text's tokens
//!
//! `N = 0` short-circuits to the all-zero vector.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use thiserror::Error;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// Identifiers of the eight features, in correlation-table row order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureId {
    Ap,
    Em,
    Nb,
    Pa,
    Qm,
    Qt,
    Tt,
    Wf,
}

impl FeatureId {
    pub const ALL: [FeatureId; 8] = [
        FeatureId::Ap,
        FeatureId::Em,
        FeatureId::Nb,
        FeatureId::Pa,
        FeatureId::Qm,
        FeatureId::Qt,
        FeatureId::Tt,
        FeatureId::Wf,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Row name in the correlation table.
    pub fn name(self) -> &'static str {
        match self {
            FeatureId::Ap => "ap",
            FeatureId::Em => "em",
            FeatureId::Nb => "nb",
            FeatureId::Pa => "pa",
            FeatureId::Qm => "qm",
            FeatureId::Qt => "qt",
            FeatureId::Tt => "tt",
            FeatureId::Wf => "wf",
        }
    }
}

/// The eight normalized feature values of one text.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FeatureVector {
    pub ap: f64,
    pub em: f64,
    pub nb: f64,
    pub pa: f64,
    pub qm: f64,
    pub qt: f64,
    pub tt: f64,
    pub wf: f64,
}

impl FeatureVector {
    pub fn get(&self, f: FeatureId) -> f64 {
        match f {
            FeatureId::Ap => self.ap,
            FeatureId::Em => self.em,
            FeatureId::Nb => self.nb,
            FeatureId::Pa => self.pa,
            FeatureId::Qm => self.qm,
            FeatureId::Qt => self.qt,
            FeatureId::Tt => self.tt,
            FeatureId::Wf => self.wf,
        }
    }

    pub fn set(&mut self, f: FeatureId, value: f64) {
        match f {
            FeatureId::Ap => self.ap = value,
            FeatureId::Em => self.em = value,
            FeatureId::Nb => self.nb = value,
            FeatureId::Pa => self.pa = value,
            FeatureId::Qm => self.qm = value,
            FeatureId::Qt => self.qt = value,
            FeatureId::Tt => self.tt = value,
            FeatureId::Wf => self.wf = value,
        }
    }
}

/// Case-folded token counts over a corpus, the backing data for `wf`.
///
/// Built once, then read-only; extraction over many texts may share it
/// freely across threads.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrequencyTable {
    counts: BTreeMap<String, u64>,
    total_tokens: u64,
}

/// Sentinel row carrying the token total in dumped tables. Tokens are
/// alphanumeric so the angle brackets cannot collide.
const TOTAL_SENTINEL: &str = "<TOTAL>";

#[derive(Debug, Error)]
pub enum FrequencyTableError {
    #[error("i/o error reading frequency table: {0}")]
    Io(#[from] std::io::Error),
    #[error("frequency table is not valid UTF-8")]
    InvalidUtf8,
    #[error("line {line}: expected 'token<TAB>count'")]
    MalformedLine { line: usize },
    #[error("line {line}: duplicate token {token:?}")]
    DuplicateToken { line: usize, token: String },
    #[error("missing final {TOTAL_SENTINEL} row")]
    MissingTotal,
    #[error("total row says {declared} but counts sum to {actual}")]
    TotalMismatch { declared: u64, actual: u64 },
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn distinct_tokens(&self) -> usize {
        self.counts.len()
    }

    /// Tokens and counts, in token order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.counts.iter().map(|(token, &count)| (token.as_str(), count))
    }

    pub fn add_text(&mut self, text: &str) {
        for token in tokenize(text) {
            *self.counts.entry(token).or_insert(0) += 1;
            self.total_tokens += 1;
        }
    }

    /// Serialize as `token<TAB>count` lines (token order) with a final
    /// `<TOTAL>` row.
    pub fn dump_tsv(&self) -> String {
        let mut out = String::new();
        for (token, count) in &self.counts {
            out.push_str(token);
            out.push('\t');
            out.push_str(&count.to_string());
            out.push('\n');
        }
        out.push_str(TOTAL_SENTINEL);
        out.push('\t');
        out.push_str(&self.total_tokens.to_string());
        out.push('\n');
        out
    }

    pub fn load<R: Read>(mut reader: R) -> Result<Self, FrequencyTableError> {
        let mut buf = Vec::new();
        reader.read_to_end(&mut buf)?;
        let text = std::str::from_utf8(&buf).map_err(|_| FrequencyTableError::InvalidUtf8)?;
        let mut counts = BTreeMap::new();
        let mut declared_total: Option<u64> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() {
                continue;
            }
            if declared_total.is_some() {
                // rows after <TOTAL>
                return Err(FrequencyTableError::MalformedLine { line: line_no });
            }
            let (token, count) = line
                .split_once('\t')
                .ok_or(FrequencyTableError::MalformedLine { line: line_no })?;
            let count: u64 = count
                .parse()
                .map_err(|_| FrequencyTableError::MalformedLine { line: line_no })?;
            if token == TOTAL_SENTINEL {
                declared_total = Some(count);
            } else if counts.insert(token.to_string(), count).is_some() {
                return Err(FrequencyTableError::DuplicateToken {
                    line: line_no,
                    token: token.to_string(),
                });
            }
        }
        let declared = declared_total.ok_or(FrequencyTableError::MissingTotal)?;
        let actual: u64 = counts.values().sum();
        if declared != actual {
            return Err(FrequencyTableError::TotalMismatch { declared, actual });
        }
        Ok(FrequencyTable { counts, total_tokens: actual })
    }
}

/// Split into maximal runs of alphanumeric characters, case-folded.
/// Everything else is a delimiter.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Count every token of every text.
pub fn build_frequency_table<'a, I>(texts: I) -> FrequencyTable
where
    I: IntoIterator<Item = &'a str>,
{
    let mut table = FrequencyTable::new();
    for text in texts {
        table.add_text(text);
    }
    table
}

const QUOTE_CHARS: [char; 8] = ['"', '\'', '\u{AB}', '\u{BB}', '\u{201C}', '\u{201D}', '\u{2018}', '\u{2019}'];

fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Compute the feature vector of one text against a corpus frequency table.
///
/// Pure: identical `(text, freq)` always yields the identical vector.
pub fn extract_features(text: &str, freq: &FrequencyTable) -> FeatureVector {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return FeatureVector::default();
    }
    let n = tokens.len() as f64;

    let mut punct = 0u64;
    let mut question = 0u64;
    let mut exclam = 0u64;
    let mut quote = 0u64;
    let mut paren = 0u64;
    for c in text.chars() {
        if is_punctuation(c) {
            punct += 1;
        }
        match c {
            '?' => question += 1,
            '!' => exclam += 1,
            '(' | ')' | '[' | ']' | '{' | '}' => paren += 1,
            _ => {}
        }
        if QUOTE_CHARS.contains(&c) {
            quote += 1;
        }
    }

    let digit_tokens = tokens
        .iter()
        .filter(|t| t.chars().all(char::is_numeric))
        .count();
    let distinct = tokens.iter().collect::<HashSet<_>>().len();
    let wf_sum: f64 = if freq.total_tokens() == 0 {
        0.0
    } else {
        let total = freq.total_tokens() as f64;
        tokens.iter().map(|t| freq.count(t) as f64 / total).sum()
    };

    FeatureVector {
        ap: punct as f64 / n,
        em: exclam as f64 / n,
        nb: digit_tokens as f64 / n,
        pa: paren as f64 / n,
        qm: question as f64 / n,
        qt: quote as f64 / n,
        tt: distinct as f64 / n,
        wf: wf_sum / n,
    }
}
