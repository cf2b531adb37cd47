//! The `codemix` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use codemix_core::classifiers::{ForestConfig, LinearConfig, MnbConfig};
use codemix_core::corpus::dataset_stats;
use codemix_core::eval::{cross_validate, holdout_evaluate, EvalConfig};
use codemix_core::pipeline::{Analyzer, ModelKind, NnParams, PipelineSpec};
use codemix_core::preprocess::{parse_stopwords, PreprocessConfig};
use codemix_core::{Dataset, NgramSpec};
use serde_json::{json, Value};

use crate::dataset::{load_all, load_dataset, parse_delimiter, Columns, ReadOptions};
use crate::error::{CliError, CliResult};
use crate::modelfile::{load_model, save_model};
use crate::report::{self, GridRow};

#[derive(Debug, Parser)]
#[command(
    name = "codemix",
    version,
    about = "Offensive-language detection for code-mixed social-media text"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-class counts and shares of labeled datasets.
    Stats(StatsArgs),
    /// Fit a pipeline and write a model file.
    Train(TrainArgs),
    /// Holdout and/or cross-validated evaluation of one pipeline.
    Evaluate(EvaluateArgs),
    /// Label every record of a dataset with a saved model.
    Predict(PredictArgs),
    /// Evaluate every model under every analyzer.
    Grid(GridArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset file; repeat to concatenate several.
    #[arg(long = "data", value_name = "PATH", required = true)]
    pub data: Vec<PathBuf>,
    /// Column separator: `tab`, `comma` or a single character.
    #[arg(long, default_value = "tab", value_parser = parse_delimiter)]
    pub delimiter: u8,
    /// The first line of each file is a header.
    #[arg(long)]
    pub header: bool,
}

impl DataArgs {
    fn options(&self) -> ReadOptions {
        ReadOptions {
            delimiter: self.delimiter,
            has_header: self.header,
        }
    }
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    #[arg(long = "word-ngrams", num_args = 2, value_names = ["LO", "HI"], default_values_t = [1, 2])]
    pub word_ngrams: Vec<usize>,
    #[arg(long = "char-ngrams", num_args = 2, value_names = ["LO", "HI"], default_values_t = [1, 5])]
    pub char_ngrams: Vec<usize>,
    #[arg(long, env = "CODEMIX_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Keep stopwords instead of removing them.
    #[arg(long)]
    pub keep_stopwords: bool,
    /// Stopword list, one word per line (`#` starts a comment).
    #[arg(long, value_name = "FILE")]
    pub stopwords: Option<PathBuf>,
    /// Keep tokens starting with `@` or `#`.
    #[arg(long)]
    pub keep_social_markers: bool,
    #[arg(long)]
    pub no_lowercase: bool,

    /// MNB smoothing.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Inverse regularization strength of SVC and LR.
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Random forest size.
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 16)]
    pub max_depth: usize,
    /// Candidate features per split (default: sqrt of the dimension).
    #[arg(long)]
    pub max_features: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
}

impl FeatureArgs {
    fn preprocess(&self) -> CliResult<PreprocessConfig> {
        let mut cfg = PreprocessConfig {
            remove_stopwords: !self.keep_stopwords,
            strip_social_markers: !self.keep_social_markers,
            lowercase: !self.no_lowercase,
            ..PreprocessConfig::default()
        };
        if let Some(path) = &self.stopwords {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            cfg.stopwords = parse_stopwords(&text)?;
        }
        Ok(cfg)
    }

    pub fn spec(&self, model: ModelKind, analyzer: Analyzer) -> CliResult<PipelineSpec> {
        let spec = PipelineSpec {
            preprocess: self.preprocess()?,
            word: NgramSpec::word(self.word_ngrams[0], self.word_ngrams[1])?,
            char: NgramSpec::char(self.char_ngrams[0], self.char_ngrams[1])?,
            mnb: MnbConfig { alpha: self.alpha },
            linear: LinearConfig {
                c: self.c,
                max_iter: self.max_iter,
                tol: self.tol,
                ..LinearConfig::default()
            },
            forest: ForestConfig {
                n_estimators: self.trees,
                max_depth: self.max_depth,
                max_features: self.max_features,
                seed: self.seed,
            },
            nn: NnParams {
                embed_dim: self.embed_dim,
                epochs: self.epochs,
                learning_rate: self.learning_rate,
                batch_size: self.batch_size,
            },
            seed: self.seed,
            ..PipelineSpec::new(model, analyzer)
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value = "svc")]
    pub model: ModelKind,
    #[arg(long, default_value = "union")]
    pub analyzer: Analyzer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Cv,
    Holdout,
    Both,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.30)]
    pub test_fraction: f64,
    /// Split without preserving class proportions.
    #[arg(long)]
    pub no_stratify: bool,
    /// Write a JSON report here.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

impl EvalArgs {
    fn config(&self, seed: u64) -> CliResult<EvalConfig> {
        let cfg = EvalConfig {
            folds: self.folds,
            test_fraction: self.test_fraction,
            seed,
            stratified: !self.no_stratify,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Model file to write.
    #[arg(long, short = 'o', value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_name = "PATH")]
    pub model_file: PathBuf,
    /// Write `id<TAB>label` lines here instead of standard output.
    #[arg(long, short = 'o', value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long, value_enum, default_value_t = Mode::Holdout)]
    pub mode: Mode,
}

fn write_out(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

fn write_report(path: &Path, v: &Value) -> CliResult<()> {
    fs::write(path, report::to_pretty(v)).map_err(|e| CliError::io(path, e))
}

fn data_names(d: &DataArgs) -> Value {
    json!(d.data.iter().map(|p| p.display().to_string()).collect::<Vec<_>>())
}

fn spec_json(spec: &PipelineSpec) -> Value {
    json!({
        "model": spec.model.as_str(),
        "analyzer": spec.analyzer.as_str(),
        "word_ngrams": [spec.word.lo(), spec.word.hi()],
        "char_ngrams": [spec.char.lo(), spec.char.hi()],
        "seed": spec.seed,
    })
}

fn stats(args: &StatsArgs, out: &mut dyn Write) -> CliResult<()> {
    let opts = args.data.options();
    let mut sets: Vec<Dataset> = args
        .data
        .data
        .iter()
        .map(|p| load_dataset(p, &opts, Columns::Labeled))
        .collect::<CliResult<_>>()?;
    if sets.len() > 1 {
        let mut all = load_all(&args.data.data, &opts, Columns::Labeled)?;
        all.name = "total".into();
        sets.push(all);
    }
    let reports = sets.iter().map(dataset_stats).collect::<Result<Vec<_>, _>>()?;
    write_out(out, &report::stats_table(&reports))?;
    if let Some(p) = &args.report {
        write_report(p, &report::stats_json(&reports))?;
    }
    Ok(())
}

fn train(args: &TrainArgs, out: &mut dyn Write) -> CliResult<()> {
    let ds = load_all(&args.data.data, &args.data.options(), Columns::Labeled)?;
    let spec = args.features.spec(args.model.model, args.model.analyzer)?;
    let model = spec.fit(&ds)?;
    save_model(&model, &args.output)?;
    let feats = match model.vectorizer() {
        Some(v) => format!("{} TF-IDF features", v.dim()),
        None => "word-embedding network".to_string(),
    };
    write_out(
        out,
        &format!(
            "trained {} on {} records ({}), saved to {}\n",
            model.kind(),
            ds.len(),
            feats,
            args.output.display()
        ),
    )
}

fn evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> CliResult<()> {
    let ds = load_all(&args.data.data, &args.data.options(), Columns::Labeled)?;
    let spec = args.features.spec(args.model.model, args.model.analyzer)?;
    let cfg = args.eval.config(spec.seed)?;
    let holdout = match args.mode {
        Mode::Holdout | Mode::Both => Some(holdout_evaluate(&spec, &ds, &cfg)?),
        Mode::Cv => None,
    };
    let cv = match args.mode {
        Mode::Cv | Mode::Both => Some(cross_validate(&spec, &ds, &cfg)?),
        Mode::Holdout => None,
    };
    let title = format!(
        "{} / {} on {} ({} records)",
        spec.model,
        spec.analyzer,
        ds.name,
        ds.len()
    );
    write_out(out, &report::evaluation_table(&title, holdout.as_ref(), cv.as_ref()))?;
    if let Some(p) = &args.eval.report {
        let mut v = json!({
            "command": "evaluate",
            "data": data_names(&args.data),
            "records": ds.len(),
            "pipeline": spec_json(&spec),
            "folds": cfg.folds,
            "test_fraction": cfg.test_fraction,
        });
        if let Some(h) = &holdout {
            v["holdout"] = report::holdout_json(h);
        }
        if let Some(cv) = &cv {
            v["cv"] = report::cv_json(cv);
        }
        write_report(p, &v)?;
    }
    Ok(())
}

fn predict(args: &PredictArgs, out: &mut dyn Write) -> CliResult<()> {
    let model = load_model(&args.model_file)?;
    let ds = load_all(&args.data.data, &args.data.options(), Columns::Auto)?;
    let labels = model.predict_dataset(&ds)?;
    let mut text = String::new();
    for (r, l) in ds.records.iter().zip(labels) {
        text.push_str(&r.id);
        text.push('\t');
        text.push_str(l.as_str());
        text.push('\n');
    }
    match &args.output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => write_out(out, &text),
    }
}

/// TF-IDF models under each analyzer, then the network once on its own
/// word-index representation.
pub fn grid_cells() -> Vec<(ModelKind, Option<Analyzer>)> {
    let mut cells = Vec::new();
    for model in ModelKind::ALL.into_iter().filter(|m| m.uses_tfidf()) {
        for analyzer in Analyzer::ALL {
            cells.push((model, Some(analyzer)));
        }
    }
    cells.push((ModelKind::Nn, None));
    cells
}

fn grid(args: &GridArgs, out: &mut dyn Write) -> CliResult<()> {
    let ds = load_all(&args.data.data, &args.data.options(), Columns::Labeled)?;
    let cfg = args.eval.config(args.features.seed)?;
    let mut rows = Vec::new();
    for (model, analyzer) in grid_cells() {
        let spec = args.features.spec(model, analyzer.unwrap_or(Analyzer::Word))?;
        let features = match analyzer {
            Some(_) => Some(
                codemix_core::features::fit_tfidf(
                    &codemix_core::preprocess::clean_dataset(&ds, &spec.preprocess)
                        .texts()
                        .collect::<Vec<_>>(),
                    &spec.feature_specs(),
                )?
                .dim(),
            ),
            None => None,
        };
        let holdout = match args.mode {
            Mode::Holdout | Mode::Both => Some(holdout_evaluate(&spec, &ds, &cfg)?),
            Mode::Cv => None,
        };
        let cv = match args.mode {
            Mode::Cv | Mode::Both => Some(cross_validate(&spec, &ds, &cfg)?),
            Mode::Holdout => None,
        };
        rows.push(GridRow {
            model: model.to_string(),
            analyzer: analyzer.map_or("-".to_string(), |a| a.to_string()),
            features,
            holdout,
            cv,
        });
    }
    write_out(out, &report::grid_table(&rows))?;
    if let Some(p) = &args.eval.report {
        let mut v = report::grid_json(&rows);
        v["data"] = data_names(&args.data);
        v["records"] = json!(ds.len());
        write_report(p, &v)?;
    }
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Stats(a) => stats(a, out),
        Command::Train(a) => train(a, out),
        Command::Evaluate(a) => evaluate(a, out),
        Command::Predict(a) => predict(a, out),
        Command::Grid(a) => grid(a, out),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "codemix: {e}");
            e.exit_code()
        }
    }
}
