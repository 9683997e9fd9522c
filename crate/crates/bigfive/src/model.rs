//! The feature/trait correlation set that drives label generation.
//!
//! A [`CorrelationModel`] holds one row per surface feature with a signed
//! correlation and a significance class for each of the five traits. Only
//! starred (significant) cells ever fire. A default table for the eight
//! surface features ships with the crate; alternative tables for other
//! languages or feature sets load from the same TSV format.

use std::io::Read;
use std::str::FromStr;

use thiserror::Error;

/// The five bipolar traits, in label-string order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trait {
    Extraversion,
    EmotionalStability,
    Agreeableness,
    Conscientiousness,
    Openness,
}

impl Trait {
    pub const ALL: [Trait; 5] = [
        Trait::Extraversion,
        Trait::EmotionalStability,
        Trait::Agreeableness,
        Trait::Conscientiousness,
        Trait::Openness,
    ];

    /// Position of this trait in a label string, 0..=4.
    pub fn index(self) -> usize {
        match self {
            Trait::Extraversion => 0,
            Trait::EmotionalStability => 1,
            Trait::Agreeableness => 2,
            Trait::Conscientiousness => 3,
            Trait::Openness => 4,
        }
    }

    /// Column name used in correlation TSV files and score reports.
    pub fn short_name(self) -> &'static str {
        match self {
            Trait::Extraversion => "ext",
            Trait::EmotionalStability => "emo",
            Trait::Agreeableness => "agr",
            Trait::Conscientiousness => "con",
            Trait::Openness => "ope",
        }
    }
}

/// Significance class of a correlation cell. Unstarred cells never fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Significance {
    /// No star: the cell is kept for display but never fires.
    None,
    /// One star (p < .05).
    Weak,
    /// Two stars (p < .01).
    Strong,
}

impl Significance {
    fn stars(self) -> &'static str {
        match self {
            Significance::None => "",
            Significance::Weak => "*",
            Significance::Strong => "**",
        }
    }
}

/// One correlation cell: a signed coefficient and its significance class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub r: f64,
    pub significance: Significance,
}

/// The five cells of a single feature, indexed by trait ordinal.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub feature_id: String,
    pub cells: [Cell; 5],
}

/// A learned token/trait association. The pattern fires whenever the token
/// occurs in a text, contributing `weight` to the trait score; learned
/// patterns are always treated as strongly significant.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternCorrelation {
    pub token: String,
    pub trait_: Trait,
    pub weight: f64,
}

/// Feature row prefix marking learned patterns in the TSV format.
const PATTERN_ROW_PREFIX: &str = "tok:";

const HEADER_COLUMNS: [&str; 6] = ["feature", "ext", "emo", "agr", "con", "ope"];

const DEFAULT_MODEL_TSV: &str = include_str!("../data/table1.tsv");

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("i/o error reading model: {0}")]
    Io(#[from] std::io::Error),
    #[error("model is not valid UTF-8")]
    InvalidUtf8,
    #[error("line 1: expected header 'feature ext emo agr con ope', got {0:?}")]
    BadHeader(String),
    #[error("line {line}: expected 6 tab-separated columns, got {got}")]
    BadColumnCount { line: usize, got: usize },
    #[error("line {line}: malformed correlation cell {cell:?}")]
    MalformedCell { line: usize, cell: String },
    #[error("line {line}: duplicate feature row {feature:?}")]
    DuplicateFeature { line: usize, feature: String },
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
}

/// The full correlation set: base feature rows plus any learned patterns.
///
/// Immutable once built; transforms return a new model.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationModel {
    rows: Vec<FeatureRow>,
    patterns: Vec<PatternCorrelation>,
}

impl CorrelationModel {
    pub fn from_rows(rows: Vec<FeatureRow>) -> Result<Self, ModelError> {
        for (i, row) in rows.iter().enumerate() {
            if rows[..i].iter().any(|r| r.feature_id == row.feature_id) {
                return Err(ModelError::DuplicateFeature {
                    line: i + 2,
                    feature: row.feature_id.clone(),
                });
            }
        }
        Ok(CorrelationModel { rows, patterns: Vec::new() })
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn patterns(&self) -> &[PatternCorrelation] {
        &self.patterns
    }

    /// New model with `extra` patterns appended.
    pub fn with_patterns(&self, extra: Vec<PatternCorrelation>) -> Self {
        let mut model = self.clone();
        model.patterns.extend(extra);
        model
    }

    pub fn row(&self, feature_id: &str) -> Option<&FeatureRow> {
        self.rows.iter().find(|r| r.feature_id == feature_id)
    }

    /// Correlation and significance for one (feature, trait) cell.
    pub fn lookup(&self, feature_id: &str, t: Trait) -> Option<(f64, Significance)> {
        self.row(feature_id)
            .map(|row| (row.cells[t.index()].r, row.cells[t.index()].significance))
    }

    /// The (trait, r) contributions that fire for a feature: exactly the
    /// starred cells of its row, in trait order. Unstarred cells never fire.
    pub fn firing_contributions(&self, feature_id: &str) -> Result<Vec<(Trait, f64)>, ModelError> {
        let row = self
            .row(feature_id)
            .ok_or_else(|| ModelError::UnknownFeature(feature_id.to_string()))?;
        Ok(starred_cells(row).collect())
    }

    /// New model with every weak cell demoted to non-significant, so only
    /// strong correlations fire. Learned patterns are unaffected.
    pub fn restricted_to_strong(&self) -> Self {
        let mut model = self.clone();
        for row in &mut model.rows {
            for cell in &mut row.cells {
                if cell.significance == Significance::Weak {
                    cell.significance = Significance::None;
                }
            }
        }
        model
    }

    /// New model with every coefficient of one feature row negated. Used to
    /// flip the assumed direction of the repetition ratio.
    pub fn with_inverted_feature(&self, feature_id: &str) -> Result<Self, ModelError> {
        let mut model = self.clone();
        let row = model
            .rows
            .iter_mut()
            .find(|r| r.feature_id == feature_id)
            .ok_or_else(|| ModelError::UnknownFeature(feature_id.to_string()))?;
        for cell in &mut row.cells {
            cell.r = -cell.r;
        }
        Ok(model)
    }

    pub fn parse(input: &str) -> Result<Self, ModelError> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| ModelError::BadHeader(String::new()))?;
        let header_cols: Vec<&str> = header.split('\t').collect();
        if header_cols != HEADER_COLUMNS {
            return Err(ModelError::BadHeader(header.to_string()));
        }

        let mut rows = Vec::new();
        let mut patterns = Vec::new();
        let mut seen_ids: Vec<String> = Vec::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 6 {
                return Err(ModelError::BadColumnCount { line: line_no, got: fields.len() });
            }
            let feature_id = fields[0].to_string();
            if seen_ids.contains(&feature_id) {
                return Err(ModelError::DuplicateFeature { line: line_no, feature: feature_id });
            }
            seen_ids.push(feature_id.clone());

            let mut cells = [Cell { r: 0.0, significance: Significance::None }; 5];
            for (i, field) in fields[1..].iter().enumerate() {
                cells[i] = parse_cell(field).ok_or_else(|| ModelError::MalformedCell {
                    line: line_no,
                    cell: field.to_string(),
                })?;
            }

            if let Some(token) = feature_id.strip_prefix(PATTERN_ROW_PREFIX) {
                for t in Trait::ALL {
                    let cell = cells[t.index()];
                    if cell.significance != Significance::None {
                        patterns.push(PatternCorrelation {
                            token: token.to_string(),
                            trait_: t,
                            weight: cell.r,
                        });
                    }
                }
            } else {
                rows.push(FeatureRow { feature_id, cells });
            }
        }
        Ok(CorrelationModel { rows, patterns })
    }

    /// Serialize back to the TSV format. Base cells are written in the
    /// two-decimal table style (`-.08**`); pattern rows use the `tok:`
    /// prefix and six decimals.
    pub fn dump_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&HEADER_COLUMNS.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.feature_id);
            for cell in &row.cells {
                out.push('\t');
                out.push_str(&format_cell(cell.r, cell.significance, 2));
            }
            out.push('\n');
        }
        for token in self.pattern_tokens() {
            out.push_str(PATTERN_ROW_PREFIX);
            out.push_str(&token);
            for t in Trait::ALL {
                out.push('\t');
                match self
                    .patterns
                    .iter()
                    .find(|p| p.token == token && p.trait_ == t)
                {
                    Some(p) => out.push_str(&format_cell(p.weight, Significance::Strong, 6)),
                    None => out.push_str(&format_cell(0.0, Significance::None, 6)),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Distinct pattern tokens in first-appearance order.
    fn pattern_tokens(&self) -> Vec<String> {
        let mut tokens: Vec<String> = Vec::new();
        for p in &self.patterns {
            if !tokens.contains(&p.token) {
                tokens.push(p.token.clone());
            }
        }
        tokens
    }
}

impl Default for CorrelationModel {
    fn default() -> Self {
        default_model()
    }
}

impl FromStr for CorrelationModel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        CorrelationModel::parse(s)
    }
}

/// Starred cells of a row as (trait, r) pairs, in trait order.
pub(crate) fn starred_cells(row: &FeatureRow) -> impl Iterator<Item = (Trait, f64)> + '_ {
    Trait::ALL.into_iter().filter_map(|t| {
        let cell = row.cells[t.index()];
        (cell.significance != Significance::None).then_some((t, cell.r))
    })
}

/// The bundled default correlation set.
pub fn default_model() -> CorrelationModel {
    CorrelationModel::parse(DEFAULT_MODEL_TSV).expect("bundled correlation table is valid")
}

/// Parse from a byte stream in the TSV format.
pub fn load_model<R: Read>(mut reader: R) -> Result<CorrelationModel, ModelError> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let text = std::str::from_utf8(&buf).map_err(|_| ModelError::InvalidUtf8)?;
    CorrelationModel::parse(text)
}

/// Parse one cell like `-.08**`, `.05*` or `-.04`. The sign of zero is kept
/// so `-.00` survives a round trip.
fn parse_cell(field: &str) -> Option<Cell> {
    let stars = field.chars().rev().take_while(|&c| c == '*').count();
    if stars > 2 {
        return None;
    }
    let number = &field[..field.len() - stars];
    // plain decimal only: optional '-', digits, at most one '.'
    let body = number.strip_prefix('-').unwrap_or(number);
    if body.is_empty()
        || body.chars().filter(|&c| c == '.').count() > 1
        || !body.chars().all(|c| c.is_ascii_digit() || c == '.')
        || !body.chars().any(|c| c.is_ascii_digit())
    {
        return None;
    }
    let r: f64 = number.parse().ok()?;
    if !r.is_finite() || r.abs() > 1.0 {
        return None;
    }
    let significance = match stars {
        0 => Significance::None,
        1 => Significance::Weak,
        _ => Significance::Strong,
    };
    Some(Cell { r, significance })
}

/// Table-style rendering: no leading zero, explicit sign on negative zero.
fn format_cell(r: f64, significance: Significance, decimals: usize) -> String {
    let magnitude = format!("{:.*}", decimals, r.abs());
    let magnitude = magnitude.strip_prefix('0').unwrap_or(&magnitude);
    let sign = if r.is_sign_negative() { "-" } else { "" };
    format!("{sign}{magnitude}{stars}", stars = significance.stars())
}
