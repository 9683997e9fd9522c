use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use bigfive::{
    deduplicate_and_group, default_model, extract_patterns, load_model, majority_baseline,
    parse_corpus, parse_label_file, run, score, split_by_lines, write_annotated_texts,
    write_author_results, write_corpus, AuthorGroup, CorpusError, CorrelationModel, ModelError,
    PersonalityLabel, PipelineConfig, PipelineError, ScoreError,
};

#[derive(Parser)]
#[command(name = "bigfive", version, about = "Unsupervised Big5 personality recognition from text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label a corpus: writes per-author results and annotated texts
    Recognize {
        /// Input corpus, one `author<TAB>text` record per line
        corpus: PathBuf,
        /// Output prefix: writes <PREFIX>.authors.tsv and <PREFIX>.texts.tsv
        #[arg(short, long, value_name = "PREFIX")]
        output: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Score predicted labels against binary gold labels
    Score {
        /// Predicted labels: `author<TAB>label` (extra columns ignored)
        pred: PathBuf,
        /// Gold labels: `author<TAB>label`, labels over y/n only
        gold: PathBuf,
    },
    /// Majority baseline (mean of the all-'y' and all-'n' predictions)
    Baseline {
        gold: PathBuf,
    },
    /// Learn token patterns from a corpus and write the extended model
    ExtractPatterns {
        corpus: PathBuf,
        /// Where to write the extended correlation TSV
        #[arg(short, long, value_name = "TSV")]
        output: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Expand embedded line breaks into one record per line
    SplitLines {
        corpus: PathBuf,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// Down-weight frequently firing features (w)
    #[arg(short = 'w', long)]
    weighted: bool,
    /// Recompute feature averages on the fly (v)
    #[arg(short = 'v', long)]
    variable_average: bool,
    /// Normalize scores and force binary labels (n)
    #[arg(short = 'n', long)]
    normalize: bool,
    /// Randomize scores of skew-flagged traits (r)
    #[arg(short = 'r', long)]
    randomize: bool,
    /// Fire learned token patterns (t); extracts them first if the model
    /// has none
    #[arg(short = 't', long)]
    patterns: bool,
    /// Seed for sampling and randomization
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fraction of texts sampled during preprocessing
    #[arg(long, default_value_t = 0.20, value_name = "RATE")]
    sample_rate: f64,
    /// One-pole share of labels above which a trait counts as skewed
    #[arg(long, default_value_t = 0.95, value_name = "SHARE")]
    skew_threshold: f64,
    /// Author confidence floor for pattern extraction
    #[arg(long, default_value_t = 0.6, value_name = "CONF")]
    min_confidence: f64,
    /// Pattern tokens kept, strongest associations first
    #[arg(long, default_value_t = 100, value_name = "K")]
    top_k: usize,
}

impl ParamArgs {
    fn to_config(&self) -> PipelineConfig {
        PipelineConfig {
            weighted: self.weighted,
            variable_average: self.variable_average,
            normalize: self.normalize,
            randomize_skewed: self.randomize,
            use_patterns: self.patterns,
            sample_rate: self.sample_rate,
            seed: self.seed,
            skew_threshold: self.skew_threshold,
            pattern_min_confidence: self.min_confidence,
            pattern_top_k: self.top_k,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Correlation table TSV (default: the bundled table)
    #[arg(long, value_name = "TSV")]
    model: Option<PathBuf>,
    /// Fire only strong (p < .01) correlations
    #[arg(long)]
    strong_only: bool,
    /// Invert the sign of the repetition-ratio correlations
    #[arg(long)]
    invert_tt: bool,
}

impl ModelArgs {
    fn load(&self) -> Result<CorrelationModel, CliError> {
        let mut model = match &self.model {
            Some(path) => load_model(open(path)?)?,
            None => default_model(),
        };
        if self.invert_tt {
            model = model.with_inverted_feature("tt")?;
        }
        if self.strong_only {
            model = model.restricted_to_strong();
        }
        Ok(model)
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

impl CliError {
    /// 2 for usage and input problems, 3 for internal invariant violations.
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Pipeline(PipelineError::NoHypotheses { .. }) => 3,
            _ => 2,
        }
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

fn read_groups(path: &Path) -> Result<Vec<AuthorGroup>, CliError> {
    let records = parse_corpus(open(path)?)?;
    Ok(deduplicate_and_group(&records))
}

fn read_labels(path: &Path) -> Result<BTreeMap<String, PersonalityLabel>, CliError> {
    Ok(parse_label_file(open(path)?)?.into_iter().collect())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Recognize { corpus, output, params, model } => {
            cmd_recognize(&corpus, &output, &params, &model)
        }
        Command::Score { pred, gold } => {
            let report = score(&read_labels(&pred)?, &read_labels(&gold)?)?;
            print!("{}", report.render_tsv());
            Ok(())
        }
        Command::Baseline { gold } => {
            let report = majority_baseline(&read_labels(&gold)?)?;
            print!("{}", report.render_tsv());
            Ok(())
        }
        Command::ExtractPatterns { corpus, output, params, model } => {
            cmd_extract_patterns(&corpus, &output, &params, &model)
        }
        Command::SplitLines { corpus, output } => {
            let records = parse_corpus(open(&corpus)?)?;
            let split = split_by_lines(&records);
            let mut sink = create(&output)?;
            write_corpus(&split, &mut sink)?;
            sink.flush().map_err(CorpusError::Io)?;
            println!("wrote {} records to {}", split.len(), output.display());
            Ok(())
        }
    }
}

fn cmd_recognize(
    corpus: &Path,
    output: &Path,
    params: &ParamArgs,
    model_args: &ModelArgs,
) -> Result<(), CliError> {
    let groups = read_groups(corpus)?;
    let text_count: usize = groups.iter().map(|g| g.texts.len()).sum();
    println!("{} authors, {} texts after deduplication", groups.len(), text_count);

    let mut model = model_args.load()?;
    let cfg = params.to_config();
    if cfg.use_patterns && model.patterns().is_empty() {
        let (extended, report) = extract_patterns(&groups, &model, &cfg)?;
        if report.nothing_kept() {
            eprintln!("warning: no author passed the confidence filter; no patterns extracted");
        } else {
            println!(
                "extracted {} patterns from {} texts ({} candidate tokens)",
                report.patterns_added, report.texts_kept, report.candidate_tokens
            );
        }
        model = extended;
    }

    let (results, annotations) = run(&groups, &model, &cfg)?;

    let authors_path = suffixed(output, ".authors.tsv");
    let texts_path = suffixed(output, ".texts.tsv");
    let mut sink = create(&authors_path)?;
    write_author_results(&results, &mut sink)?;
    sink.flush().map_err(CorpusError::Io)?;
    let mut sink = create(&texts_path)?;
    write_annotated_texts(&annotations, &mut sink)?;
    sink.flush().map_err(CorpusError::Io)?;
    println!("wrote {}", authors_path.display());
    println!("wrote {}", texts_path.display());
    Ok(())
}

fn cmd_extract_patterns(
    corpus: &Path,
    output: &Path,
    params: &ParamArgs,
    model_args: &ModelArgs,
) -> Result<(), CliError> {
    let groups = read_groups(corpus)?;
    let model = model_args.load()?;
    let cfg = params.to_config();
    let (extended, report) = extract_patterns(&groups, &model, &cfg)?;
    if report.nothing_kept() {
        eprintln!("warning: no author passed the confidence filter; model written unchanged");
    } else {
        println!(
            "extracted {} patterns from {} texts ({} candidate tokens)",
            report.patterns_added, report.texts_kept, report.candidate_tokens
        );
    }
    let mut sink = create(output)?;
    sink.write_all(extended.dump_tsv().as_bytes())
        .map_err(|source| CliError::File { path: output.to_path_buf(), source })?;
    sink.flush().map_err(|source| CliError::File { path: output.to_path_buf(), source })?;
    println!("wrote {}", output.display());
    Ok(())
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}
