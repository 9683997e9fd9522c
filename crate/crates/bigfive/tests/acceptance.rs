//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `--nocapture` to see them).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bigfive::{
    default_model, deduplicate_and_group, majority_baseline, parse_corpus, parse_label_file, run,
    score, AuthorGroup, PersonalityLabel, PipelineConfig, Report, TextHypothesis, Trait,
    TraitLabel,
};

fn groups_from(records: Vec<(String, String)>) -> Vec<AuthorGroup> {
    let records: Vec<bigfive::CorpusRecord> = records
        .into_iter()
        .map(|(author, text)| bigfive::CorpusRecord::new(author, text))
        .collect();
    deduplicate_and_group(&records)
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const VOCAB: [&str; 16] = [
        "the", "a", "cat", "dog", "word", "thing", "runs", "jumps", "big", "small", "very",
        "quite", "nice", "odd", "42", "7",
    ];
    const MARKS: [&str; 10] = ["", "", "", "!", "?", ",", ".", "\"", "(", ")"];
    let len = rng.gen_range(3..=25);
    let mut text = String::new();
    for i in 0..len {
        if i > 0 {
            text.push(' ');
        }
        text.push_str(VOCAB[rng.gen_range(0..VOCAB.len())]);
        text.push_str(MARKS[rng.gen_range(0..MARKS.len())]);
    }
    text
}

fn random_corpus(rng: &mut ChaCha8Rng) -> Vec<AuthorGroup> {
    let author_count = rng.gen_range(5..=50);
    let mut records = Vec::new();
    for a in 0..author_count {
        let author = format!("author{a:02}");
        for _ in 0..rng.gen_range(1..=20) {
            records.push((author.clone(), random_text(rng)));
        }
    }
    groups_from(records)
}

fn random_binary_gold(
    groups: &[AuthorGroup],
    rng: &mut ChaCha8Rng,
) -> BTreeMap<String, PersonalityLabel> {
    groups
        .iter()
        .map(|g| {
            let mut label = PersonalityLabel::uniform(TraitLabel::Positive);
            for t in Trait::ALL {
                if rng.gen::<bool>() {
                    label.set(t, TraitLabel::Negative);
                }
            }
            (g.author_id.clone(), label)
        })
        .collect()
}

fn predictions(results: &[bigfive::AuthorResult]) -> BTreeMap<String, PersonalityLabel> {
    results.iter().map(|r| (r.author_id.clone(), r.label)).collect()
}

/// Normalization plus variable averages guarantee a recall of exactly 1
/// against any binary gold: no `o` labels means no false negatives.
#[test]
fn recall_one_under_normalize_and_variable_average() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB1605);
    let cfg = PipelineConfig {
        normalize: true,
        variable_average: true,
        ..Default::default()
    };
    for corpus_no in 0..50 {
        let groups = random_corpus(&mut rng);
        let gold = random_binary_gold(&groups, &mut rng);
        let (results, _) = run(&groups, &default_model(), &cfg).unwrap();
        for result in &results {
            assert!(!result.label.has_omitted(), "corpus {corpus_no}: 'o' under -n -v");
        }
        let report = score(&predictions(&results), &gold).unwrap();
        for t in Trait::ALL {
            let metrics = &report.per_trait[t.index()];
            assert_eq!(
                metrics.false_neg, 0.0,
                "corpus {corpus_no}, trait {}: missing predictions",
                t.short_name()
            );
            assert_eq!(
                metrics.recall, 1.0,
                "corpus {corpus_no}, trait {}: recall {}",
                t.short_name(),
                metrics.recall
            );
        }
        assert_eq!(report.averaged.recall, 1.0);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    println!("ACCEPTANCE recall-1 under -n -v (50 corpora in {elapsed:?}): PASS");
}

/// One author exceeds the population mean on exactly one feature; every
/// starred cell of that feature must set its trait to the pole of the
/// correlation sign with confidence 1, every unstarred cell must stay 'o'.
#[test]
fn sign_correctness_per_feature() {
    // per feature: (background text, probe text) builders keeping every
    // other feature identical across the whole corpus
    type BackgroundText = fn(usize, usize) -> String;
    type ProbeText = fn(usize) -> String;
    let builders: [(&str, BackgroundText, ProbeText); 8] = [
        ("ap", |a, j| format!("u{a}x{j}a u{a}x{j}b u{a}x{j}c"), |j| {
            format!("p{j}a, p{j}b, p{j}c,")
        }),
        ("em", |a, j| format!("u{a}x{j}a, u{a}x{j}b, u{a}x{j}c,"), |j| {
            format!("p{j}a! p{j}b! p{j}c!")
        }),
        ("nb", |a, j| format!("u{a}x{j}a u{a}x{j}b u{a}x{j}c"), |j| {
            format!("9{j}1 p{j}b p{j}c")
        }),
        ("pa", |a, j| format!("u{a}x{j}a, u{a}x{j}b, u{a}x{j}c,"), |j| {
            format!("(p{j}a) p{j}b p{j}c,")
        }),
        ("qm", |a, j| format!("u{a}x{j}a, u{a}x{j}b, u{a}x{j}c,"), |j| {
            format!("p{j}a? p{j}b? p{j}c?")
        }),
        ("qt", |a, j| format!("u{a}x{j}a, u{a}x{j}b, u{a}x{j}c,"), |j| {
            format!("p{j}a\" p{j}b\" p{j}c\"")
        }),
        ("tt", |a, j| format!("u{a}x{j}a u{a}x{j}a u{a}x{j}b"), |j| {
            format!("p{j}a p{j}b p{j}c")
        }),
        ("wf", |a, j| format!("u{a}x{j}a u{a}x{j}b u{a}x{j}c"), |j| {
            format!("zip zap p{j}c")
        }),
    ];

    let model = default_model();
    let cfg = PipelineConfig::default();
    for (feature, background, probe) in builders {
        let mut records = Vec::new();
        for a in 0..40 {
            for j in 0..5 {
                records.push((format!("bg{a:02}"), background(a, j)));
            }
        }
        for j in 0..5 {
            records.push(("probe".to_string(), probe(j)));
        }
        let groups = groups_from(records);
        let (results, _) = run(&groups, &model, &cfg).unwrap();
        let result = results.iter().find(|r| r.author_id == "probe").unwrap();
        for t in Trait::ALL {
            let (r, significance) = model.lookup(feature, t).unwrap();
            let got = result.label.get(t);
            if significance == bigfive::Significance::None {
                assert_eq!(
                    got,
                    TraitLabel::Omitted,
                    "{feature}/{}: unstarred cell must stay o",
                    t.short_name()
                );
            } else {
                let expected =
                    if r > 0.0 { TraitLabel::Positive } else { TraitLabel::Negative };
                assert_eq!(got, expected, "{feature}/{}: wrong pole", t.short_name());
                assert_eq!(
                    result.trait_confidence[t.index()],
                    1.0,
                    "{feature}/{}: confidence below 1",
                    t.short_name()
                );
            }
        }
    }
    println!("ACCEPTANCE sign-correctness over all 8 features: PASS");
}

/// conf = m/T and var = avg conf/T, exhaustively for every label sequence
/// of length T ≤ 5 over {y, n, o}, against a brute-force counter.
#[test]
fn confidence_and_variability_formulas() {
    let symbols = [TraitLabel::Positive, TraitLabel::Negative, TraitLabel::Omitted];
    let mut checked = 0usize;
    for t_count in 1usize..=5 {
        let combos = 3usize.pow(t_count as u32);
        for code in 0..combos {
            let mut sequence = Vec::with_capacity(t_count);
            let mut rest = code;
            for _ in 0..t_count {
                sequence.push(symbols[rest % 3]);
                rest /= 3;
            }
            // the same sequence on all five traits
            let hypotheses: Vec<TextHypothesis> = sequence
                .iter()
                .map(|&l| TextHypothesis { scores: [0.0; 5], label: PersonalityLabel::uniform(l) })
                .collect();
            let result = bigfive::aggregate_author(&hypotheses, "x").unwrap();

            // brute-force counter
            let count = |wanted: TraitLabel| sequence.iter().filter(|&&l| l == wanted).count();
            let (y, n, o) =
                (count(TraitLabel::Positive), count(TraitLabel::Negative), count(TraitLabel::Omitted));
            let (expected_label, m) = if y >= n && y >= o {
                (TraitLabel::Positive, y)
            } else if n >= o {
                (TraitLabel::Negative, n)
            } else {
                (TraitLabel::Omitted, o)
            };
            let expected_conf = m as f64 / t_count as f64;

            for t in Trait::ALL {
                assert_eq!(result.label.get(t), expected_label);
                assert_eq!(result.trait_confidence[t.index()], expected_conf);
            }
            // same summation order as the implementation
            let expected_avg = [expected_conf; 5].iter().sum::<f64>() / 5.0;
            assert_eq!(result.avg_confidence, expected_avg);
            assert_eq!(result.variability, expected_avg / t_count as f64);
            // pigeonhole floor on the majority share
            assert!(m >= t_count.div_ceil(3));
            checked += 1;
        }
    }
    assert_eq!(checked, 3 + 9 + 27 + 81 + 243);
    println!("ACCEPTANCE conf/var formula oracle ({checked} label sequences): PASS");
}

/// Independent per-cell reimplementation of the scoring convention.
fn oracle_report(
    pred: &BTreeMap<String, PersonalityLabel>,
    gold: &BTreeMap<String, PersonalityLabel>,
) -> Report {
    let mut per_trait = [bigfive::TraitMetrics::default(); 5];
    for t in Trait::ALL {
        let (mut tp, mut fp, mut fn_) = (0.0f64, 0.0f64, 0.0f64);
        for (author, gold_label) in gold {
            let g = gold_label.get(t);
            match pred.get(author) {
                None => fn_ += 1.0,
                Some(p) => match p.get(t) {
                    TraitLabel::Omitted => fn_ += 1.0,
                    other if other == g => tp += 1.0,
                    _ => fp += 1.0,
                },
            }
        }
        let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
        let recall = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
        let f1 =
            if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        per_trait[t.index()] = bigfive::TraitMetrics {
            true_pos: tp,
            false_pos: fp,
            false_neg: fn_,
            precision,
            recall,
            f1,
        };
    }
    let averaged = bigfive::Averaged {
        precision: per_trait.iter().map(|m| m.precision).sum::<f64>() / 5.0,
        recall: per_trait.iter().map(|m| m.recall).sum::<f64>() / 5.0,
        f1: per_trait.iter().map(|m| m.f1).sum::<f64>() / 5.0,
    };
    Report { per_trait, averaged }
}

#[test]
fn scorer_matches_hand_count_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5C04E);
    let symbols = [TraitLabel::Positive, TraitLabel::Negative, TraitLabel::Omitted];
    for _ in 0..1000 {
        let author_count = rng.gen_range(1..=20);
        let mut gold = BTreeMap::new();
        let mut pred = BTreeMap::new();
        for a in 0..author_count {
            let author = format!("a{a}");
            let mut gold_label = PersonalityLabel::uniform(TraitLabel::Positive);
            for t in Trait::ALL {
                if rng.gen::<bool>() {
                    gold_label.set(t, TraitLabel::Negative);
                }
            }
            gold.insert(author.clone(), gold_label);
            // most authors predicted, some missing, some extra
            if rng.gen::<f64>() < 0.85 {
                let mut label = PersonalityLabel::uniform(TraitLabel::Omitted);
                for t in Trait::ALL {
                    label.set(t, symbols[rng.gen_range(0..3)]);
                }
                pred.insert(author, label);
            }
        }
        pred.insert("extra".to_string(), PersonalityLabel::uniform(TraitLabel::Positive));

        let got = score(&pred, &gold).unwrap();
        let expected = oracle_report(&pred, &gold);
        assert_eq!(got, expected);

        // the baseline equals the per-field mean of the two degenerate runs
        let uniform = |l: TraitLabel| -> BTreeMap<String, PersonalityLabel> {
            gold.keys().map(|a| (a.clone(), PersonalityLabel::uniform(l))).collect()
        };
        let all_y = score(&uniform(TraitLabel::Positive), &gold).unwrap();
        let all_n = score(&uniform(TraitLabel::Negative), &gold).unwrap();
        let baseline = majority_baseline(&gold).unwrap();
        for i in 0..5 {
            let (a, b, m) = (&all_y.per_trait[i], &all_n.per_trait[i], &baseline.per_trait[i]);
            assert_eq!(m.precision, (a.precision + b.precision) / 2.0);
            assert_eq!(m.recall, (a.recall + b.recall) / 2.0);
            assert_eq!(m.f1, (a.f1 + b.f1) / 2.0);
            assert_eq!(m.true_pos, (a.true_pos + b.true_pos) / 2.0);
        }
        assert_eq!(baseline.averaged.f1, (all_y.averaged.f1 + all_n.averaged.f1) / 2.0);
    }
    println!("ACCEPTANCE scorer oracle (1000 random pred/gold pairs): PASS");
}

/// Two CLI runs with the same corpus, flags and seed must produce
/// byte-identical output files, randomization included.
#[test]
fn deterministic_outputs_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("corpus.tsv");
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut corpus = String::new();
    for a in 0..20 {
        for _ in 0..5 {
            corpus.push_str(&format!("author{a:02}\t{}\n", random_text(&mut rng)));
        }
    }
    fs::write(&corpus_path, &corpus).unwrap();

    let run_once = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let prefix = dir.path().join(tag);
        let status = Command::new(env!("CARGO_BIN_EXE_bigfive"))
            .args(["recognize", "-n", "-v", "-w", "-r", "-t", "--seed", "7", "-o"])
            .arg(&prefix)
            .arg(&corpus_path)
            .status()
            .unwrap();
        assert!(status.success());
        (
            fs::read(prefix.with_extension("authors.tsv")).unwrap(),
            fs::read(prefix.with_extension("texts.tsv")).unwrap(),
        )
    };
    let first = run_once("one");
    let second = run_once("two");
    assert_eq!(first.0, second.0, "author outputs differ between runs");
    assert_eq!(first.1, second.1, "text outputs differ between runs");
    println!("ACCEPTANCE determinism (two -n -v -w -r -t runs, seed 7): PASS");
}

/// The embedded default model must match the shipped correlation file
/// byte for byte, and the punctuation row must fire exactly its two
/// starred cells.
#[test]
fn default_table_fidelity() {
    let shipped = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table1.tsv"),
    )
    .unwrap();
    assert_eq!(default_model().dump_tsv(), shipped);

    let firing = default_model().firing_contributions("ap").unwrap();
    assert_eq!(firing, vec![(Trait::Extraversion, -0.08), (Trait::Openness, -0.10)]);
    println!("ACCEPTANCE default correlation table fidelity: PASS");
}

/// Optional: when a labeled essay corpus is supplied via ESSAYS_CORPUS and
/// ESSAYS_GOLD, run -n -v over a 250-author sample and check the
/// structural claims. Absolute scores depend on the dataset and are only
/// reported.
#[test]
fn optional_labeled_dataset_check() {
    let (corpus_path, gold_path) =
        match (std::env::var("ESSAYS_CORPUS"), std::env::var("ESSAYS_GOLD")) {
            (Ok(c), Ok(g)) => (c, g),
            _ => {
                println!(
                    "ACCEPTANCE labeled dataset check: SKIPPED (set ESSAYS_CORPUS and ESSAYS_GOLD)"
                );
                return;
            }
        };
    let records = parse_corpus(fs::File::open(&corpus_path).unwrap()).unwrap();
    let gold_entries = parse_label_file(fs::File::open(&gold_path).unwrap()).unwrap();
    let gold_full: BTreeMap<String, PersonalityLabel> = gold_entries.into_iter().collect();

    let groups = deduplicate_and_group(&records);
    let mut sampled_authors: Vec<&AuthorGroup> =
        groups.iter().filter(|g| gold_full.contains_key(&g.author_id)).collect();
    sampled_authors.truncate(250);
    let sample: Vec<AuthorGroup> = sampled_authors.into_iter().cloned().collect();
    let gold: BTreeMap<String, PersonalityLabel> = sample
        .iter()
        .map(|g| (g.author_id.clone(), gold_full[&g.author_id]))
        .collect();

    let cfg = PipelineConfig { normalize: true, variable_average: true, ..Default::default() };
    let (results, _) = run(&sample, &default_model(), &cfg).unwrap();
    let report = score(&predictions(&results), &gold).unwrap();
    for t in Trait::ALL {
        assert_eq!(report.per_trait[t.index()].recall, 1.0, "recall must be 1 under -n -v");
    }
    let baseline = majority_baseline(&gold).unwrap();
    println!(
        "labeled dataset: averaged f = {:.3} vs majority baseline f = {:.3} over {} authors{}",
        report.averaged.f1,
        baseline.averaged.f1,
        sample.len(),
        if report.averaged.f1 > baseline.averaged.f1 { " (above baseline)" } else { " (NOT above baseline)" },
    );
    println!("ACCEPTANCE labeled dataset check: PASS");
}
