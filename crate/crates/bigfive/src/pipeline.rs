//! The three-phase recognition pipeline.
//!
//! **Preprocessing** samples a fraction of the corpus (uniformly, without
//! replacement, seeded), computes per-feature means and firing rates over
//! the sample, and optionally detects traits whose provisional labels are
//! skewed toward one pole. **Processing** walks every text once, in corpus
//! order, firing the starred correlations of every feature whose value
//! exceeds the current population mean and turning the per-trait score
//! signs into a label. **Evaluation** reduces each author's per-text
//! hypotheses to one label by per-trait majority vote, with confidence and
//! variability.
//!
//! Optional parameters, mirroring the recognizer's flags:
//!
//! - `w` — scale each contribution by one minus the feature's running fire
//!   rate, boosting rare features.
//! - `v` — recompute the population mean on the fly while processing.
//! - `n` — divide each trait score by the number of correlations that fired
//!   for it, and resolve zero scores to the sign of the trait's cumulative
//!   corpus score (ties resolve positive), so no `o` labels are emitted.
//! - `r` — replace the scores of skew-flagged traits with a seeded uniform
//!   draw on `[-s, s]`, `s` being the mean absolute score of the unflagged
//!   traits for that text (sign-only draw when `s` is zero).
//! - `t` — fire learned token patterns carried by the model on token
//!   presence, exactly like feature correlations.
//!
//! Ordering contract: with `v`, `w` or `n` active, results depend on text
//! order, so processing is a single sequential pass; [`run`] threads one
//! [`RunningState`] through all texts in corpus order. With those
//! parameters off, per-text hypotheses are independent and could be
//! computed in parallel, provided cumulative-score updates keep corpus
//! order. This implementation always runs the sequential reference pass.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{AnnotatedText, AuthorGroup, CorpusRecord};
use crate::features::{
    build_frequency_table, extract_features, tokenize, FeatureId, FeatureVector, FrequencyTable,
};
use crate::label::{PersonalityLabel, TraitLabel};
use crate::model::{starred_cells, CorrelationModel, PatternCorrelation, Trait};

/// Minimum corpus occurrences for a token to be considered as a pattern.
pub const MIN_PATTERN_TOKEN_COUNT: u64 = 5;

/// Separates the score-randomization RNG stream from the sampling stream.
const SCORE_STREAM_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("corpus contains no texts")]
    EmptyCorpus,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("author {author:?} has no hypotheses to aggregate")]
    NoHypotheses { author: String },
}

/// Pipeline parameters. The five booleans mirror the `w v n r t` flags.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub weighted: bool,
    pub variable_average: bool,
    pub normalize: bool,
    pub randomize_skewed: bool,
    pub use_patterns: bool,
    /// Fraction of texts sampled during preprocessing.
    pub sample_rate: f64,
    pub seed: u64,
    /// One-pole share of non-`o` labels above which a trait counts as
    /// skewed.
    pub skew_threshold: f64,
    /// Authors below this average confidence are dropped before pattern
    /// extraction.
    pub pattern_min_confidence: f64,
    /// Number of tokens kept, by strongest trait association.
    pub pattern_top_k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            weighted: false,
            variable_average: false,
            normalize: false,
            randomize_skewed: false,
            use_patterns: false,
            sample_rate: 0.20,
            seed: 42,
            skew_threshold: 0.95,
            pattern_min_confidence: 0.6,
            pattern_top_k: 100,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            return Err(PipelineError::InvalidConfig(format!(
                "sample rate must be in (0, 1], got {}",
                self.sample_rate
            )));
        }
        if !(self.skew_threshold > 0.5 && self.skew_threshold <= 1.0) {
            return Err(PipelineError::InvalidConfig(format!(
                "skew threshold must be in (0.5, 1], got {}",
                self.skew_threshold
            )));
        }
        Ok(())
    }
}

/// Sample statistics computed during preprocessing.
#[derive(Clone, Debug)]
pub struct PopulationStats {
    /// Per-feature sample means.
    pub mean: FeatureVector,
    /// Fraction of sampled texts strictly above the mean, by feature index.
    pub firing_rate: [f64; 8],
    /// Fraction of sampled texts containing each pattern token (only when
    /// the model carries patterns).
    pub pattern_presence_rate: HashMap<String, f64>,
    /// Traits flagged for score randomization (empty unless `r` is on).
    pub skewed_traits: BTreeSet<Trait>,
    pub sample_size: usize,
}

/// One text's signed trait scores and the label derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct TextHypothesis {
    pub scores: [f64; 5],
    pub label: PersonalityLabel,
}

/// The generalized per-author hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct AuthorResult {
    pub author_id: String,
    pub label: PersonalityLabel,
    /// Majority-label share per trait: m / T.
    pub trait_confidence: [f64; 5],
    /// Mean of the five per-trait confidences.
    pub avg_confidence: f64,
    pub text_count: usize,
    /// avg_confidence / T; low values mean the author shifts traits across
    /// texts.
    pub variability: f64,
}

/// Mutable state threaded through the sequential processing pass.
#[derive(Clone, Debug)]
pub struct RunningState {
    mean: FeatureVector,
    mean_weight: f64,
    texts_seen: usize,
    fire_counts: [f64; 8],
    pattern_fire_counts: HashMap<String, f64>,
    cumulative_scores: [f64; 5],
    rng: ChaCha8Rng,
}

impl RunningState {
    /// Seed the state from preprocessing: running means start at the sample
    /// means (weighted by the sample size) and fire counts at the sampled
    /// firing rates.
    pub fn new(stats: &PopulationStats, cfg: &PipelineConfig) -> Self {
        let n = stats.sample_size as f64;
        let mut fire_counts = [0.0; 8];
        for f in FeatureId::ALL {
            fire_counts[f.index()] = stats.firing_rate[f.index()] * n;
        }
        let pattern_fire_counts = stats
            .pattern_presence_rate
            .iter()
            .map(|(token, rate)| (token.clone(), rate * n))
            .collect();
        RunningState {
            mean: stats.mean,
            mean_weight: n,
            texts_seen: stats.sample_size,
            fire_counts,
            pattern_fire_counts,
            cumulative_scores: [0.0; 5],
            rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ SCORE_STREAM_SALT),
        }
    }

    fn feature_fire_rate(&self, f: FeatureId) -> f64 {
        if self.texts_seen == 0 {
            0.0
        } else {
            self.fire_counts[f.index()] / self.texts_seen as f64
        }
    }

    fn pattern_fire_rate(&self, token: &str) -> f64 {
        if self.texts_seen == 0 {
            0.0
        } else {
            self.pattern_fire_counts.get(token).copied().unwrap_or(0.0) / self.texts_seen as f64
        }
    }
}

/// Number of texts sampled: ceil(rate * total), at least 1, at most total.
/// Guards against float noise so that e.g. 20% of 10 is exactly 2.
fn sample_size(rate: f64, total: usize) -> usize {
    let product = rate * total as f64;
    let rounded = product.round();
    let k = if (product - rounded).abs() < 1e-9 { rounded } else { product.ceil() };
    (k as usize).clamp(1, total)
}

/// Uniform sample of `k` indices out of `0..n` without replacement
/// (algorithm R), returned in ascending order.
fn reservoir_sample(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut reservoir: Vec<usize> = (0..k.min(n)).collect();
    for i in k..n {
        let j = rng.gen_range(0..=i);
        if j < k {
            reservoir[j] = i;
        }
    }
    reservoir.sort_unstable();
    reservoir
}

/// Preprocessing phase: sample the corpus and measure the population.
///
/// `freq` must be the frequency table of the same corpus (built once by
/// [`run`]). Skew detection labels every sampled text against the sample
/// means with the optional parameters off, then flags traits whose non-`o`
/// labels pile onto one pole.
pub fn preprocess(
    groups: &[AuthorGroup],
    freq: &FrequencyTable,
    model: &CorrelationModel,
    cfg: &PipelineConfig,
) -> Result<PopulationStats, PipelineError> {
    cfg.validate()?;
    let texts: Vec<&str> = groups
        .iter()
        .flat_map(|g| g.texts.iter().map(String::as_str))
        .collect();
    if texts.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }

    let k = sample_size(cfg.sample_rate, texts.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sampled: Vec<(FeatureVector, HashSet<String>)> = reservoir_sample(texts.len(), k, &mut rng)
        .into_iter()
        .map(|i| {
            let vector = extract_features(texts[i], freq);
            let tokens = tokenize(texts[i]).into_iter().collect();
            (vector, tokens)
        })
        .collect();

    let mut mean = FeatureVector::default();
    for f in FeatureId::ALL {
        let sum: f64 = sampled.iter().map(|(v, _)| v.get(f)).sum();
        let lo = sampled.iter().map(|(v, _)| v.get(f)).fold(f64::INFINITY, f64::min);
        let hi = sampled.iter().map(|(v, _)| v.get(f)).fold(f64::NEG_INFINITY, f64::max);
        // the true mean lies in [lo, hi]; clamping removes summation noise
        // so a sample of identical values never fires the strict > test
        mean.set(f, (sum / k as f64).clamp(lo, hi));
    }

    let mut firing_rate = [0.0; 8];
    for f in FeatureId::ALL {
        let above = sampled.iter().filter(|(v, _)| v.get(f) > mean.get(f)).count();
        firing_rate[f.index()] = above as f64 / k as f64;
    }

    let mut pattern_presence_rate = HashMap::new();
    for pattern in model.patterns() {
        if !pattern_presence_rate.contains_key(&pattern.token) {
            let present = sampled.iter().filter(|(_, toks)| toks.contains(&pattern.token)).count();
            pattern_presence_rate.insert(pattern.token.clone(), present as f64 / k as f64);
        }
    }

    let mut skewed_traits = BTreeSet::new();
    if cfg.randomize_skewed {
        let base_stats = PopulationStats {
            mean,
            firing_rate: [0.0; 8],
            pattern_presence_rate: HashMap::new(),
            skewed_traits: BTreeSet::new(),
            sample_size: k,
        };
        let base_cfg = PipelineConfig {
            weighted: false,
            variable_average: false,
            normalize: false,
            randomize_skewed: false,
            ..cfg.clone()
        };
        let mut state = RunningState::new(&base_stats, &base_cfg);
        let mut pole_counts = [(0usize, 0usize); 5];
        for (vector, tokens) in &sampled {
            let hyp = process_text(vector, tokens, &base_stats, model, &base_cfg, &mut state);
            for t in Trait::ALL {
                match hyp.label.get(t) {
                    TraitLabel::Positive => pole_counts[t.index()].0 += 1,
                    TraitLabel::Negative => pole_counts[t.index()].1 += 1,
                    TraitLabel::Omitted => {}
                }
            }
        }
        for t in Trait::ALL {
            let (y, n) = pole_counts[t.index()];
            let labeled = y + n;
            if labeled > 0 && y.max(n) as f64 / labeled as f64 >= cfg.skew_threshold {
                skewed_traits.insert(t);
            }
        }
    }

    Ok(PopulationStats { mean, firing_rate, pattern_presence_rate, skewed_traits, sample_size: k })
}

/// Processing phase for one text: fire correlations, derive the label,
/// update the running state.
///
/// Must be called once per text in corpus order; with `v`, `w` or `n`
/// active the outcome depends on that order.
pub fn process_text(
    features: &FeatureVector,
    tokens: &HashSet<String>,
    stats: &PopulationStats,
    model: &CorrelationModel,
    cfg: &PipelineConfig,
    state: &mut RunningState,
) -> TextHypothesis {
    let mut scores = [0.0f64; 5];
    let mut fired_per_trait = [0usize; 5];
    let mut fired_features: Vec<FeatureId> = Vec::new();

    for f in FeatureId::ALL {
        let mean = if cfg.variable_average { state.mean.get(f) } else { stats.mean.get(f) };
        if features.get(f) > mean {
            fired_features.push(f);
            let scale = if cfg.weighted { 1.0 - state.feature_fire_rate(f) } else { 1.0 };
            if let Some(row) = model.row(f.name()) {
                for (t, r) in starred_cells(row) {
                    scores[t.index()] += r * scale;
                    fired_per_trait[t.index()] += 1;
                }
            }
        }
    }

    let mut fired_tokens: Vec<&str> = Vec::new();
    if cfg.use_patterns {
        for pattern in model.patterns() {
            if tokens.contains(&pattern.token) {
                let scale =
                    if cfg.weighted { 1.0 - state.pattern_fire_rate(&pattern.token) } else { 1.0 };
                scores[pattern.trait_.index()] += pattern.weight * scale;
                fired_per_trait[pattern.trait_.index()] += 1;
                if !fired_tokens.contains(&pattern.token.as_str()) {
                    fired_tokens.push(&pattern.token);
                }
            }
        }
    }

    if cfg.randomize_skewed && !stats.skewed_traits.is_empty() {
        let unskewed: Vec<usize> = Trait::ALL
            .into_iter()
            .filter(|t| !stats.skewed_traits.contains(t))
            .map(Trait::index)
            .collect();
        let magnitude = if unskewed.is_empty() {
            0.0
        } else {
            unskewed.iter().map(|&i| scores[i].abs()).sum::<f64>() / unskewed.len() as f64
        };
        for t in &stats.skewed_traits {
            let draw = 2.0 * state.rng.gen::<f64>() - 1.0;
            scores[t.index()] = if magnitude > 0.0 {
                draw * magnitude
            } else if draw < 0.0 {
                -1.0
            } else {
                1.0
            };
        }
    }

    let mut labels = [TraitLabel::Omitted; 5];
    for t in Trait::ALL {
        let i = t.index();
        if cfg.normalize {
            if fired_per_trait[i] > 0 {
                scores[i] /= fired_per_trait[i] as f64;
            }
            labels[i] = if scores[i] != 0.0 {
                TraitLabel::from_score(scores[i])
            } else if state.cumulative_scores[i] < 0.0 {
                TraitLabel::Negative
            } else {
                // positive cumulative score, or the startup tie
                TraitLabel::Positive
            };
        } else {
            labels[i] = TraitLabel::from_score(scores[i]);
        }
    }

    state.texts_seen += 1;
    for f in fired_features {
        state.fire_counts[f.index()] += 1.0;
    }
    for token in fired_tokens {
        *state.pattern_fire_counts.entry(token.to_string()).or_insert(0.0) += 1.0;
    }
    if cfg.variable_average {
        let weight = state.mean_weight;
        for f in FeatureId::ALL {
            let updated = (state.mean.get(f) * weight + features.get(f)) / (weight + 1.0);
            state.mean.set(f, updated);
        }
        state.mean_weight = weight + 1.0;
    }
    for (cumulative, score) in state.cumulative_scores.iter_mut().zip(scores) {
        *cumulative += score;
    }

    TextHypothesis { scores, label: PersonalityLabel::new(labels) }
}

/// Evaluation phase for one author: per-trait majority vote over the
/// hypothesis labels, ties broken `y` over `n` over `o`.
pub fn aggregate_author(
    hypotheses: &[TextHypothesis],
    author_id: &str,
) -> Result<AuthorResult, PipelineError> {
    if hypotheses.is_empty() {
        return Err(PipelineError::NoHypotheses { author: author_id.to_string() });
    }
    let text_count = hypotheses.len();
    let mut labels = [TraitLabel::Omitted; 5];
    let mut trait_confidence = [0.0f64; 5];
    for t in Trait::ALL {
        let mut tally = (0usize, 0usize, 0usize);
        for hyp in hypotheses {
            match hyp.label.get(t) {
                TraitLabel::Positive => tally.0 += 1,
                TraitLabel::Negative => tally.1 += 1,
                TraitLabel::Omitted => tally.2 += 1,
            }
        }
        let (y, n, o) = tally;
        let (label, majority) = if y >= n && y >= o {
            (TraitLabel::Positive, y)
        } else if n >= o {
            (TraitLabel::Negative, n)
        } else {
            (TraitLabel::Omitted, o)
        };
        labels[t.index()] = label;
        trait_confidence[t.index()] = majority as f64 / text_count as f64;
    }
    let avg_confidence = trait_confidence.iter().sum::<f64>() / 5.0;
    Ok(AuthorResult {
        author_id: author_id.to_string(),
        label: PersonalityLabel::new(labels),
        trait_confidence,
        avg_confidence,
        text_count,
        variability: avg_confidence / text_count as f64,
    })
}

/// Run the full pipeline over grouped texts: preprocess once, process every
/// text in corpus order in a single sequential pass, aggregate per author.
///
/// Returns the author results (group order) and one annotation per text
/// (corpus order). Fixed inputs and seed give identical outputs.
pub fn run(
    groups: &[AuthorGroup],
    model: &CorrelationModel,
    cfg: &PipelineConfig,
) -> Result<(Vec<AuthorResult>, Vec<AnnotatedText>), PipelineError> {
    let freq =
        build_frequency_table(groups.iter().flat_map(|g| g.texts.iter().map(String::as_str)));
    let stats = preprocess(groups, &freq, model, cfg)?;
    let mut state = RunningState::new(&stats, cfg);

    let mut results = Vec::with_capacity(groups.len());
    let mut annotations = Vec::new();
    for group in groups {
        let mut hypotheses = Vec::with_capacity(group.texts.len());
        for text in &group.texts {
            let vector = extract_features(text, &freq);
            let tokens: HashSet<String> = tokenize(text).into_iter().collect();
            let hyp = process_text(&vector, &tokens, &stats, model, cfg, &mut state);
            annotations.push((CorpusRecord::new(group.author_id.clone(), text.clone()), hyp.label));
            hypotheses.push(hyp);
        }
        results.push(aggregate_author(&hypotheses, &group.author_id)?);
    }
    Ok((results, annotations))
}

/// Summary of one pattern-extraction pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternReport {
    /// Texts surviving the author-confidence filter.
    pub texts_kept: usize,
    /// Tokens that met the corpus-count floor.
    pub candidate_tokens: usize,
    pub patterns_added: usize,
}

impl PatternReport {
    /// True when the confidence filter removed everything and the model was
    /// returned unchanged.
    pub fn nothing_kept(&self) -> bool {
        self.texts_kept == 0
    }
}

/// Learn token patterns from the corpus's own high-confidence hypotheses.
///
/// Runs the base pipeline (patterns off), keeps the texts of authors at or
/// above `pattern_min_confidence`, and associates each frequent token with
/// each trait by the difference of presence probabilities between the
/// trait's `y`- and `n`-labeled texts. The difference is zero unless both
/// poles are populated. The `pattern_top_k` tokens with the strongest
/// absolute association are turned into pattern correlations.
pub fn extract_patterns(
    groups: &[AuthorGroup],
    model: &CorrelationModel,
    cfg: &PipelineConfig,
) -> Result<(CorrelationModel, PatternReport), PipelineError> {
    let base_cfg = PipelineConfig { use_patterns: false, ..cfg.clone() };
    let (authors, annotations) = run(groups, model, &base_cfg)?;

    let confident: HashSet<&str> = authors
        .iter()
        .filter(|a| a.avg_confidence >= cfg.pattern_min_confidence)
        .map(|a| a.author_id.as_str())
        .collect();
    let kept: Vec<&AnnotatedText> = annotations
        .iter()
        .filter(|(record, _)| confident.contains(record.author_id.as_str()))
        .collect();
    if kept.is_empty() {
        let report = PatternReport { texts_kept: 0, candidate_tokens: 0, patterns_added: 0 };
        return Ok((model.clone(), report));
    }

    let freq =
        build_frequency_table(groups.iter().flat_map(|g| g.texts.iter().map(String::as_str)));
    let kept_tokens: Vec<HashSet<String>> =
        kept.iter().map(|(record, _)| tokenize(&record.text).into_iter().collect()).collect();

    // per trait, indices of kept texts labeled y resp. n
    let mut positives: [Vec<usize>; 5] = Default::default();
    let mut negatives: [Vec<usize>; 5] = Default::default();
    for (i, (_, label)) in kept.iter().enumerate() {
        for t in Trait::ALL {
            match label.get(t) {
                TraitLabel::Positive => positives[t.index()].push(i),
                TraitLabel::Negative => negatives[t.index()].push(i),
                TraitLabel::Omitted => {}
            }
        }
    }

    let presence = |token: &str, indices: &[usize]| -> f64 {
        let hits = indices.iter().filter(|&&i| kept_tokens[i].contains(token)).count();
        hits as f64 / indices.len() as f64
    };

    // token -> (max |association|, per-trait association)
    let mut scored: Vec<(&str, f64, [f64; 5])> = Vec::new();
    let mut candidate_tokens = 0usize;
    for (token, count) in freq.iter() {
        if count < MIN_PATTERN_TOKEN_COUNT {
            continue;
        }
        candidate_tokens += 1;
        let mut associations = [0.0f64; 5];
        for t in Trait::ALL {
            let pos = &positives[t.index()];
            let neg = &negatives[t.index()];
            if pos.is_empty() || neg.is_empty() {
                continue;
            }
            associations[t.index()] = presence(token, pos) - presence(token, neg);
        }
        let strongest = associations.iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
        if strongest > 0.0 {
            scored.push((token, strongest, associations));
        }
    }

    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite associations").then(a.0.cmp(b.0)));
    scored.truncate(cfg.pattern_top_k);

    let mut patterns = Vec::new();
    for (token, _, associations) in &scored {
        for t in Trait::ALL {
            let a = associations[t.index()];
            if a != 0.0 {
                patterns.push(PatternCorrelation {
                    token: token.to_string(),
                    trait_: t,
                    weight: a,
                });
            }
        }
    }
    let report = PatternReport {
        texts_kept: kept.len(),
        candidate_tokens,
        patterns_added: patterns.len(),
    };
    Ok((model.with_patterns(patterns), report))
}
