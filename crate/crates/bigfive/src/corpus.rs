//! Tab-separated corpus parsing, grouping and output serialization.
//!
//! The input format is one record per line, `author<TAB>text`, UTF-8 with
//! LF line endings (a trailing CR is stripped). Blank lines are skipped.
//! All functions here are pure over in-memory sequences.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::label::PersonalityLabel;
use crate::pipeline::AuthorResult;

/// One input line: an author id and one of their texts.
///
/// `author_id` is opaque, non-empty and free of tabs and line breaks;
/// `text` may be empty and never spans lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusRecord {
    pub author_id: String,
    pub text: String,
}

impl CorpusRecord {
    pub fn new(author_id: impl Into<String>, text: impl Into<String>) -> Self {
        CorpusRecord { author_id: author_id.into(), text: text.into() }
    }
}

/// All texts of one author, in input order, duplicates removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthorGroup {
    pub author_id: String,
    pub texts: Vec<String>,
}

/// One input text paired with its per-text label (output format 2).
pub type AnnotatedText = (CorpusRecord, PersonalityLabel);

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },
    #[error("line {line}: expected exactly one tab separator, found {tabs}")]
    MalformedLine { line: usize, tabs: usize },
    #[error("line {line}: empty author id")]
    EmptyAuthor { line: usize },
    #[error("line {line}: {message}")]
    BadLabel { line: usize, message: String },
    #[error("line {line}: duplicate author {author:?}")]
    DuplicateAuthor { line: usize, author: String },
    #[error("record {index}: {reason}, cannot be serialized")]
    UnencodableRecord { index: usize, reason: &'static str },
}

/// Parse a `author<TAB>text` byte stream into records, input order kept.
pub fn parse_corpus<R: Read>(mut reader: R) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let text = std::str::from_utf8(&buf)
        .map_err(|e| CorpusError::InvalidUtf8 { offset: e.valid_up_to() })?;

    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let tabs = line.matches('\t').count();
        if tabs != 1 {
            return Err(CorpusError::MalformedLine { line: line_no, tabs });
        }
        let (author, body) = line.split_once('\t').expect("exactly one tab");
        if author.is_empty() {
            return Err(CorpusError::EmptyAuthor { line: line_no });
        }
        records.push(CorpusRecord::new(author, body));
    }
    Ok(records)
}

/// Collapse per-author duplicate texts (first occurrence kept, byte-exact
/// comparison) and group records by author. Groups are ordered by
/// descending text count; ties keep first-appearance order.
pub fn deduplicate_and_group(records: &[CorpusRecord]) -> Vec<AuthorGroup> {
    let mut order: Vec<String> = Vec::new();
    let mut texts: HashMap<String, Vec<String>> = HashMap::new();
    for record in records {
        let entry = texts.entry(record.author_id.clone()).or_insert_with(|| {
            order.push(record.author_id.clone());
            Vec::new()
        });
        if !entry.iter().any(|t| t == &record.text) {
            entry.push(record.text.clone());
        }
    }
    let mut groups: Vec<(usize, AuthorGroup)> = order
        .into_iter()
        .enumerate()
        .map(|(first_seen, author_id)| {
            let texts = texts.remove(&author_id).expect("author was recorded");
            (first_seen, AuthorGroup { author_id, texts })
        })
        .collect();
    groups.sort_by(|(ia, a), (ib, b)| b.texts.len().cmp(&a.texts.len()).then(ia.cmp(ib)));
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Expand records whose text carries embedded line breaks into one record
/// per non-blank segment. Line breaks arrive either as real newlines or as
/// the two-character escape `\n` used when packing multi-line sources into
/// the one-line-per-record format.
pub fn split_by_lines(records: &[CorpusRecord]) -> Vec<CorpusRecord> {
    let mut out = Vec::new();
    for record in records {
        let unescaped = record.text.replace("\\n", "\n");
        for segment in unescaped.split('\n') {
            if segment.trim().is_empty() {
                continue;
            }
            out.push(CorpusRecord::new(record.author_id.clone(), segment));
        }
    }
    out
}

fn check_field(index: usize, field: &str, is_author: bool) -> Result<(), CorpusError> {
    if is_author && field.is_empty() {
        return Err(CorpusError::UnencodableRecord { index, reason: "empty author id" });
    }
    if field.contains('\t') {
        return Err(CorpusError::UnencodableRecord { index, reason: "field contains a tab" });
    }
    if field.contains('\n') || field.contains('\r') {
        return Err(CorpusError::UnencodableRecord { index, reason: "field contains a line break" });
    }
    Ok(())
}

/// Serialize records back to the `author<TAB>text` input format.
/// Writing then parsing yields the original sequence.
pub fn write_corpus<W: Write>(records: &[CorpusRecord], mut sink: W) -> Result<(), CorpusError> {
    for (index, record) in records.iter().enumerate() {
        check_field(index, &record.author_id, true)?;
        check_field(index, &record.text, false)?;
        writeln!(sink, "{}\t{}", record.author_id, record.text)?;
    }
    Ok(())
}

/// Output 1: one line per author — id, label, average confidence, text
/// count, variability. Confidence and variability use fixed 6-decimal
/// formatting.
pub fn write_author_results<W: Write>(
    results: &[AuthorResult],
    mut sink: W,
) -> Result<(), CorpusError> {
    for (index, result) in results.iter().enumerate() {
        check_field(index, &result.author_id, true)?;
        writeln!(
            sink,
            "{}\t{}\t{:.6}\t{}\t{:.6}",
            result.author_id,
            result.label,
            result.avg_confidence,
            result.text_count,
            result.variability
        )?;
    }
    Ok(())
}

/// Output 2: the input texts annotated with their per-text labels.
pub fn write_annotated_texts<W: Write>(
    hypotheses: &[AnnotatedText],
    mut sink: W,
) -> Result<(), CorpusError> {
    for (index, (record, label)) in hypotheses.iter().enumerate() {
        check_field(index, &record.author_id, true)?;
        check_field(index, &record.text, false)?;
        writeln!(sink, "{}\t{}\t{}", record.author_id, record.text, label)?;
    }
    Ok(())
}

/// Parse an `author<TAB>label` file (gold labels, or the first two columns
/// of an author-results file; extra columns are ignored). Duplicate
/// authors are an error.
pub fn parse_label_file<R: Read>(
    mut reader: R,
) -> Result<Vec<(String, PersonalityLabel)>, CorpusError> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let text = std::str::from_utf8(&buf)
        .map_err(|e| CorpusError::InvalidUtf8 { offset: e.valid_up_to() })?;

    let mut entries: Vec<(String, PersonalityLabel)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let author = fields.next().unwrap_or("");
        let label = fields.next().ok_or(CorpusError::MalformedLine { line: line_no, tabs: 0 })?;
        if author.is_empty() {
            return Err(CorpusError::EmptyAuthor { line: line_no });
        }
        let label = PersonalityLabel::from_str(label)
            .map_err(|e| CorpusError::BadLabel { line: line_no, message: e.to_string() })?;
        if entries.iter().any(|(a, _)| a == author) {
            return Err(CorpusError::DuplicateAuthor { line: line_no, author: author.to_string() });
        }
        entries.push((author.to_string(), label));
    }
    Ok(entries)
}
