//! Personality labels: one symbol per trait, five traits per label.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::Trait;

/// One pole of a bipolar trait, or an abstention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraitLabel {
    /// Rendered `y`.
    Positive,
    /// Rendered `n`.
    Negative,
    /// Rendered `o`: no evidence either way.
    Omitted,
}

impl TraitLabel {
    pub fn as_char(self) -> char {
        match self {
            TraitLabel::Positive => 'y',
            TraitLabel::Negative => 'n',
            TraitLabel::Omitted => 'o',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'y' => Some(TraitLabel::Positive),
            'n' => Some(TraitLabel::Negative),
            'o' => Some(TraitLabel::Omitted),
            _ => None,
        }
    }

    /// Label for a signed trait score: positive, negative or zero.
    pub fn from_score(score: f64) -> Self {
        if score > 0.0 {
            TraitLabel::Positive
        } else if score < 0.0 {
            TraitLabel::Negative
        } else {
            TraitLabel::Omitted
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("label must be exactly 5 characters, got {0}")]
    BadLength(usize),
    #[error("invalid label character {0:?} (expected y, n or o)")]
    BadChar(char),
}

/// A five-character personality hypothesis, one [`TraitLabel`] per trait in
/// trait order: extraversion, emotional stability, agreeableness,
/// conscientiousness, openness. `"ynoon"` reads: positive extraversion,
/// negative emotional stability, no call on agreeableness and
/// conscientiousness, negative openness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PersonalityLabel([TraitLabel; 5]);

impl PersonalityLabel {
    pub fn new(labels: [TraitLabel; 5]) -> Self {
        PersonalityLabel(labels)
    }

    /// Same label on all five traits (used by the majority baseline).
    pub fn uniform(label: TraitLabel) -> Self {
        PersonalityLabel([label; 5])
    }

    pub fn get(&self, t: Trait) -> TraitLabel {
        self.0[t.index()]
    }

    pub fn set(&mut self, t: Trait, label: TraitLabel) {
        self.0[t.index()] = label;
    }

    pub fn labels(&self) -> &[TraitLabel; 5] {
        &self.0
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|l| l.as_char()).collect()
    }

    /// True if any trait is `o`.
    pub fn has_omitted(&self) -> bool {
        self.0.contains(&TraitLabel::Omitted)
    }
}

impl fmt::Display for PersonalityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PersonalityLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, LabelError> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 5 {
            return Err(LabelError::BadLength(chars.len()));
        }
        let mut labels = [TraitLabel::Omitted; 5];
        for (i, &c) in chars.iter().enumerate() {
            labels[i] = TraitLabel::from_char(c).ok_or(LabelError::BadChar(c))?;
        }
        Ok(PersonalityLabel(labels))
    }
}
