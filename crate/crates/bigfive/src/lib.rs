#![forbid(unsafe_code)]

//! Unsupervised Big5 personality recognition from text.
//!
//! Given an unlabeled `author<TAB>text` corpus, the library extracts eight
//! language-independent surface features per text (punctuation, question
//! marks, quotes, exclamation marks, numbers, parentheses, repetition
//! ratio, word frequency), compares each value to the population average
//! sampled from the corpus itself, and fires signed feature/trait
//! correlations to hypothesize a five-trait personality label per text.
//! Per-author labels come from a majority vote over that author's texts,
//! with confidence and variability scores. A scorer evaluates predictions
//! against gold labels with the bipolar true-positive convention, plus a
//! majority baseline.
//!
//! No lexicon, tagger or any other language-specific resource is used, so
//! the pipeline runs unchanged on any UTF-8 text.
//!
//! ```
//! use bigfive::{default_model, deduplicate_and_group, parse_corpus, run, PipelineConfig};
//!
//! let corpus = "alice\tgreat, really great!\nalice\twhy? who knows...\nbob\tplain words\n";
//! let records = parse_corpus(corpus.as_bytes()).unwrap();
//! let groups = deduplicate_and_group(&records);
//! let (authors, texts) = run(&groups, &default_model(), &PipelineConfig::default()).unwrap();
//! assert_eq!(authors.len(), 2);
//! assert_eq!(texts.len(), 3);
//! ```

pub mod corpus;
pub mod features;
pub mod label;
pub mod model;
pub mod pipeline;
pub mod scorer;

pub use corpus::{
    deduplicate_and_group, parse_corpus, parse_label_file, split_by_lines, write_annotated_texts,
    write_author_results, write_corpus, AnnotatedText, AuthorGroup, CorpusError, CorpusRecord,
};
pub use features::{
    build_frequency_table, extract_features, tokenize, FeatureId, FeatureVector, FrequencyTable,
    FrequencyTableError,
};
pub use label::{LabelError, PersonalityLabel, TraitLabel};
pub use model::{
    default_model, load_model, CorrelationModel, ModelError, PatternCorrelation, Significance,
    Trait,
};
pub use pipeline::{
    aggregate_author, extract_patterns, preprocess, process_text, run, AuthorResult,
    PatternReport, PipelineConfig, PipelineError, PopulationStats, RunningState, TextHypothesis,
};
pub use scorer::{majority_baseline, score, Averaged, Report, ScoreError, TraitMetrics};
