//! Subcommands. Every option can also come from the config file (same name,
//! `_` or `-`) or a `DEFEMBED_<NAME>` environment variable.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use defembed::query::{compose_add, compose_mult};
use defembed::synthetic::{gradcheck_fixture, ToyWorld};
use defembed::training::gradcheck::{DEFAULT_EPSILON, DEFAULT_TOLERANCE};
use defembed::training::train_with;
use defembed::{
    build_vocabulary, checkpoint, evaluate, gradient_check, ingest_dictionary, ingest_encyclopedia,
    ingest_eval, init_parameters, load_embeddings, split_seen_unseen, Architecture, DefinitionRecord,
    EmbeddingStore, EncoderConfig, EvalMode, InputMode, LossConfig, LossKind, OutputNonlinearity, Query,
    QueryEngine, QueryMode, SplitSpec, TrainConfig,
};

use crate::config::Layers;
use crate::service::{self, AppState, ServiceConfig};

#[derive(Parser, Debug)]
#[command(name = "defembed", version, about = "Map definitions to word embeddings and query them")]
pub struct Cli {
    /// Settings file of `key = value` lines
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Log more (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Read definition files, hold out unseen words and build the vocabulary
    Ingest(IngestArgs),
    /// Train an encoder and write a checkpoint
    Train(TrainArgs),
    /// Rank-based evaluation of a model or a composition baseline
    Evaluate(EvaluateArgs),
    /// Answer one query; prints rank, word and score as TSV
    Query(QueryArgs),
    /// Run the HTTP query service
    Serve(ServeArgs),
    /// Compare analytic gradients with finite differences
    Gradcheck(GradcheckArgs),
    /// Write a seeded toy data set
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Dictionary TSV files (headword<TAB>definition)
    #[arg(long, value_delimiter = ',')]
    pub dictionary: Vec<String>,
    /// Encyclopedia TSV files (headword<TAB>first sentence)
    #[arg(long, value_delimiter = ',')]
    pub encyclopedia: Vec<String>,
    /// File of headwords to hold out, one per line
    #[arg(long)]
    pub heldout: Option<String>,
    /// Hold out this many random headwords instead
    #[arg(long)]
    pub heldout_random: Option<usize>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Minimum token count for the vocabulary
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Receives train.tsv, unseen.tsv and vocab.tsv
    #[arg(long)]
    pub out_dir: Option<String>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training pair TSV files
    #[arg(long, value_delimiter = ',')]
    pub pairs: Vec<String>,
    /// Target embedding table
    #[arg(long)]
    pub target: Option<String>,
    /// Input embedding table (pretrained_fixed mode)
    #[arg(long)]
    pub input: Option<String>,
    /// bow or lstm
    #[arg(long)]
    pub architecture: Option<Architecture>,
    /// learned or pretrained_fixed
    #[arg(long)]
    pub input_mode: Option<InputMode>,
    #[arg(long)]
    pub input_dim: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    /// tanh or identity
    #[arg(long)]
    pub output_nonlinearity: Option<OutputNonlinearity>,
    /// Parameter initialisation seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// cosine or rank
    #[arg(long)]
    pub loss: Option<LossKind>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub negative_seed: Option<u64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Output checkpoint path
    #[arg(long)]
    pub checkpoint: Option<String>,
    /// JSON-lines training log (default: stdout)
    #[arg(long)]
    pub log: Option<String>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: Option<String>,
    #[arg(long)]
    pub target: Option<String>,
    /// Evaluation TSV files (headword<TAB>description)
    #[arg(long, value_delimiter = ',')]
    pub eval: Vec<String>,
    /// revdict or crossword
    #[arg(long)]
    pub eval_mode: Option<EvalMode>,
    /// model, add or mult
    #[arg(long)]
    pub baseline: Option<Baseline>,
    /// Input table for the baselines (default: the target table)
    #[arg(long)]
    pub input: Option<String>,
    /// table or jsonl
    #[arg(long)]
    pub format: Option<ReportFormat>,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[arg(long)]
    pub checkpoint: Option<String>,
    #[arg(long)]
    pub target: Option<String>,
    /// Second-language tables
    #[arg(long, value_delimiter = ',')]
    pub bilingual: Vec<String>,
    /// revdict, crossword or bilingual
    #[arg(long)]
    pub mode: Option<QueryMode>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Answer length in letters (crossword)
    #[arg(long)]
    pub length: Option<usize>,
    /// Language tag to search (bilingual)
    #[arg(long)]
    pub target_lang: Option<String>,
    /// The description or clue
    pub text: String,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long)]
    pub checkpoint: Option<String>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub bilingual: Vec<String>,
    #[arg(long)]
    pub bind: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub default_k: Option<usize>,
    #[arg(long)]
    pub max_query_tokens: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// bow or lstm (default: both)
    #[arg(long)]
    pub architecture: Option<Architecture>,
    /// cosine or rank (default: both)
    #[arg(long)]
    pub loss: Option<LossKind>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    #[arg(long)]
    pub input_dim: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub target_dim: Option<usize>,
    /// Tokens in the checked example
    #[arg(long)]
    pub tokens: Option<usize>,
    #[arg(long)]
    pub output_nonlinearity: Option<OutputNonlinearity>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Finite-difference step
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: Option<String>,
    #[arg(long)]
    pub words: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    Model,
    Add,
    Mult,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Jsonl,
}

macro_rules! named_enum {
    ($ty:ident { $($v:ident => $s:literal),+ }) => {
        impl std::str::FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($s => Ok($ty::$v),)+
                    _ => Err(format!("expected one of: {}", [$($s),+].join(", "))),
                }
            }
        }
        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(match self { $($ty::$v => $s),+ })
            }
        }
    };
}
named_enum!(Baseline { Model => "model", Add => "add", Mult => "mult" });
named_enum!(ReportFormat { Table => "table", Jsonl => "jsonl" });

pub fn run(cli: Cli) -> Result<()> {
    let layers = Layers::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => ingest(&layers, a),
        Command::Train(a) => train(&layers, a),
        Command::Evaluate(a) => evaluate_cmd(&layers, a),
        Command::Query(a) => query(&layers, a),
        Command::Serve(a) => serve(&layers, a),
        Command::Gradcheck(a) => gradcheck(&layers, a),
        Command::Synth(a) => synth(&layers, a),
    }
}

fn path(layers: &Layers, key: &str, flag: Option<String>) -> Result<PathBuf> {
    layers.require(key, flag).map(PathBuf::from)
}

fn paths(layers: &Layers, key: &str, flag: Vec<String>) -> Vec<PathBuf> {
    layers.list(key, flag).into_iter().map(PathBuf::from).collect()
}

fn read_records(files: &[PathBuf], read: fn(&Path) -> defembed::Result<defembed::Ingested>) -> Result<Vec<DefinitionRecord>> {
    let mut out = Vec::new();
    for f in files {
        let got = read(f)?;
        for s in &got.skipped {
            log::warn!("{}:{}: skipped: {}", f.display(), s.line, s.reason);
        }
        out.extend(got.records);
    }
    Ok(out)
}

fn ingest(layers: &Layers, a: IngestArgs) -> Result<()> {
    let dictionaries = paths(layers, "dictionary", a.dictionary);
    let encyclopedias = paths(layers, "encyclopedia", a.encyclopedia);
    if dictionaries.is_empty() && encyclopedias.is_empty() {
        bail!("nothing to ingest: pass --dictionary and/or --encyclopedia");
    }
    let out_dir = path(layers, "out_dir", a.out_dir)?;
    let min_count = layers.get_or("min_count", a.min_count, 1)?;

    let mut records = read_records(&dictionaries, |p| ingest_dictionary(p))?;
    records.extend(read_records(&encyclopedias, |p| ingest_encyclopedia(p))?);

    let heldout: Option<String> = layers.get("heldout", a.heldout)?;
    let random: Option<usize> = layers.get("heldout_random", a.heldout_random)?;
    let spec = match (heldout, random) {
        (Some(_), Some(_)) => bail!("use either --heldout or --heldout-random, not both"),
        (Some(f), None) => {
            let text = fs::read_to_string(&f).with_context(|| format!("reading {f}"))?;
            SplitSpec::new(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')))
        }
        (None, Some(n)) => SplitSpec::random(&records, n, layers.get_or("split_seed", a.split_seed, 0)?),
        (None, None) => SplitSpec::new(Vec::<String>::new()),
    };
    let split = split_seen_unseen(&records, &spec);
    let vocab = build_vocabulary(&split.train, min_count)?;

    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    write_tsv(&out_dir.join("train.tsv"), &split.train)?;
    write_tsv(&out_dir.join("unseen.tsv"), &split.unseen)?;
    let vocab_path = out_dir.join("vocab.tsv");
    let mut w = BufWriter::new(File::create(&vocab_path).with_context(|| format!("creating {}", vocab_path.display()))?);
    for (id, t) in vocab.tokens().iter().enumerate() {
        writeln!(w, "{t}\t{}", vocab.count(id).unwrap_or(0))?;
    }
    w.flush()?;

    println!("records\t{}", records.len());
    println!("train\t{}", split.train.len());
    println!("unseen\t{}", split.unseen.len());
    println!("missing_heldout\t{}", split.missing.len());
    println!("vocab\t{}", vocab.len());
    println!("vocab_hash\t{}", vocab.hash());
    Ok(())
}

fn write_tsv(path: &Path, records: &[DefinitionRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    defembed::corpus::write_definitions(&mut w, records)?;
    w.flush()?;
    Ok(())
}

fn train(layers: &Layers, a: TrainArgs) -> Result<()> {
    let pairs_files = paths(layers, "pairs", a.pairs);
    if pairs_files.is_empty() {
        bail!("missing `pairs`: pass --pairs with at least one TSV file");
    }
    let target = load_embeddings(path(layers, "target", a.target)?)?;
    let out = path(layers, "checkpoint", a.checkpoint)?;
    let pairs = read_records(&pairs_files, |p| ingest_dictionary(p))?;

    let input_mode = layers.get_or("input_mode", a.input_mode, InputMode::Learned)?;
    let input: Option<EmbeddingStore> = match layers.get::<String>("input", a.input)? {
        Some(p) => Some(load_embeddings(p)?),
        None => None,
    };
    let default_input_dim = match (&input, input_mode) {
        (Some(s), InputMode::PretrainedFixed) => s.dim(),
        _ => 256,
    };
    let config = EncoderConfig {
        architecture: layers.get_or("architecture", a.architecture, Architecture::Bow)?,
        input_mode,
        input_dim: layers.get_or("input_dim", a.input_dim, default_input_dim)?,
        hidden_dim: layers.get_or("hidden_dim", a.hidden_dim, 512)?,
        target_dim: target.dim(),
        output_nonlinearity: layers.get_or("output_nonlinearity", a.output_nonlinearity, OutputNonlinearity::Tanh)?,
        seed: layers.get_or("seed", a.seed, 0)?,
    };
    let loss = LossConfig {
        kind: layers.get_or("loss", a.loss, LossKind::Rank)?,
        margin: layers.get_or("margin", a.margin, defembed::training::loss::DEFAULT_MARGIN)?,
        negative_sampling_seed: layers.get_or("negative_seed", a.negative_seed, 0)?,
    };
    let defaults = TrainConfig::default();
    let train_config = TrainConfig {
        batch_size: layers.get_or("batch_size", a.batch_size, defaults.batch_size)?,
        max_epochs: layers.get_or("epochs", a.epochs, defaults.max_epochs)?,
        shuffle_seed: layers.get_or("shuffle_seed", a.shuffle_seed, defaults.shuffle_seed)?,
        eval_every: 1,
        optimizer: defembed::Adadelta {
            rho: layers.get_or("rho", a.rho, defaults.optimizer.rho)?,
            epsilon: layers.get_or("epsilon", a.epsilon, defaults.optimizer.epsilon)?,
        },
    };

    let vocab = match input_mode {
        InputMode::Learned => build_vocabulary(&pairs, layers.get_or("min_count", a.min_count, 1)?)?,
        InputMode::PretrainedFixed => Default::default(),
    };
    let mut encoder = init_parameters(&config, &vocab, input.as_ref())?;

    let mut log_out: Box<dyn Write> = match layers.get::<String>("log", a.log)? {
        Some(p) if p != "-" => Box::new(BufWriter::new(File::create(&p).with_context(|| format!("creating {p}"))?)),
        _ => Box::new(io::stdout().lock()),
    };
    let mut log_err: Option<io::Error> = None;
    let log = train_with(&mut encoder, &pairs, &train_config, &loss, &target, |record, _| {
        let line = serde_json::to_string(record).expect("record serialises");
        if let Err(e) = writeln!(log_out, "{line}").and_then(|_| log_out.flush()) {
            log_err.get_or_insert(e);
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = log_err {
        return Err(e).context("writing the training log");
    }
    if log.examples == 0 {
        bail!("no usable training pairs ({} skipped)", log.skipped_pairs);
    }
    checkpoint::save(&encoder, &out)?;
    eprintln!(
        "trained on {} pairs ({} skipped); checkpoint {} ({})",
        log.examples,
        log.skipped_pairs,
        out.display(),
        checkpoint::hash(&encoder)
    );
    Ok(())
}

fn evaluate_cmd(layers: &Layers, a: EvaluateArgs) -> Result<()> {
    let files = paths(layers, "eval", a.eval);
    if files.is_empty() {
        bail!("missing `eval`: pass --eval with at least one TSV file");
    }
    let target = load_embeddings(path(layers, "target", a.target)?)?;
    let mode = layers.get_or("eval_mode", a.eval_mode, EvalMode::Revdict)?;
    let baseline = layers.get_or("baseline", a.baseline, Baseline::Model)?;
    let format = layers.get_or("format", a.format, ReportFormat::Table)?;

    let model = match baseline {
        Baseline::Model => Some(checkpoint::load(path(layers, "checkpoint", a.checkpoint)?)?),
        _ => None,
    };
    if let Some(m) = &model {
        if m.target_dim() != target.dim() {
            bail!("model outputs {}-d vectors but the target table is {}-d", m.target_dim(), target.dim());
        }
    }
    let input = match layers.get::<String>("input", a.input)? {
        Some(p) if baseline != Baseline::Model => Some(load_embeddings(p)?),
        _ => None,
    };
    let input = input.as_ref().unwrap_or(&target);

    let stdout = io::stdout();
    let mut out = stdout.lock();
    for f in &files {
        let items = ingest_eval(f)?.records;
        let report = match baseline {
            Baseline::Model => {
                let m = model.as_ref().unwrap();
                evaluate(|r| Ok(m.encode(&r.tokens)?.vector), &items, &target, mode)?
            }
            Baseline::Add => evaluate(|r| Ok(compose_add(input, &r.text())?.0), &items, &target, mode)?,
            Baseline::Mult => evaluate(|r| Ok(compose_mult(input, &r.text())?.0), &items, &target, mode)?,
        };
        match format {
            ReportFormat::Table => {
                writeln!(out, "== {} ({mode}, {baseline})", f.display())?;
                writeln!(out, "{report}")?;
            }
            ReportFormat::Jsonl => {
                let mut record = serde_json::to_value(&report)?;
                record["file"] = f.display().to_string().into();
                record["mode"] = mode.to_string().into();
                record["baseline"] = baseline.to_string().into();
                writeln!(out, "{record}")?;
            }
        }
    }
    Ok(())
}

fn service_config(layers: &Layers, a: ServeArgs) -> Result<ServiceConfig> {
    Ok(ServiceConfig {
        checkpoint: path(layers, "checkpoint", a.checkpoint)?,
        target: path(layers, "target", a.target)?,
        bilingual: paths(layers, "bilingual", a.bilingual),
        bind: layers.get_or("bind", a.bind, ServiceConfig::DEFAULT_BIND.to_owned())?,
        port: layers.get_or("port", a.port, ServiceConfig::DEFAULT_PORT)?,
        default_k: layers.get_or("default_k", a.default_k, ServiceConfig::DEFAULT_K)?,
        max_query_tokens: layers.get_or("max_query_tokens", a.max_query_tokens, ServiceConfig::DEFAULT_MAX_QUERY_TOKENS)?,
    })
}

fn query(layers: &Layers, a: QueryArgs) -> Result<()> {
    let target = load_embeddings(path(layers, "target", a.target)?)?;
    let bilingual = paths(layers, "bilingual", a.bilingual)
        .iter()
        .map(load_embeddings)
        .collect::<defembed::Result<Vec<_>>>()?;
    let model = checkpoint::load(path(layers, "checkpoint", a.checkpoint)?)?;
    let engine = QueryEngine::new(model, target, bilingual)?;
    let query = Query {
        text: a.text,
        mode: layers.get_or("mode", a.mode, QueryMode::Revdict)?,
        k: layers.get_or("k", a.k, ServiceConfig::DEFAULT_K)?,
        answer_length: layers.get("length", a.length)?,
        target_language: layers.get("target_lang", a.target_lang)?,
    };
    let answer = engine.run(&query)?;
    if !answer.skipped_tokens.is_empty() {
        eprintln!("unknown words ignored: {}", answer.skipped_tokens.join(" "));
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (i, c) in answer.candidates.candidates.iter().enumerate() {
        writeln!(out, "{}\t{}\t{:.6}", i + 1, c.token, c.score)?;
    }
    Ok(())
}

fn serve(layers: &Layers, a: ServeArgs) -> Result<()> {
    let config = service_config(layers, a)?;
    let snapshot = service::load_snapshot(&config)?;
    eprintln!("loaded model {}", snapshot.model_hash);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = service::bind(&config).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        let state = AppState::new(config, snapshot);
        service::run(listener, state, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })
}

fn gradcheck(layers: &Layers, a: GradcheckArgs) -> Result<()> {
    let archs = match layers.get("architecture", a.architecture)? {
        Some(x) => vec![x],
        None => vec![Architecture::Bow, Architecture::Lstm],
    };
    let losses = match layers.get("loss", a.loss)? {
        Some(x) => vec![x],
        None => vec![LossKind::Cosine, LossKind::Rank],
    };
    let margin = layers.get_or("margin", a.margin, defembed::training::loss::DEFAULT_MARGIN)?;
    let vocab_size = layers.get_or("vocab_size", a.vocab_size, 30)?;
    let n_tokens = layers.get_or("tokens", a.tokens, 5)?;
    let step = layers.get_or("step", a.step, DEFAULT_EPSILON)?;
    let tolerance = layers.get_or("tolerance", a.tolerance, DEFAULT_TOLERANCE)?;
    let seed = layers.get_or("seed", a.seed, 42)?;

    let mut failed = Vec::new();
    println!("architecture\tloss\tmax_relative_error\tchecked\tresult");
    for &arch in &archs {
        let config = EncoderConfig {
            architecture: arch,
            input_mode: InputMode::Learned,
            input_dim: layers.get_or("input_dim", a.input_dim, 6)?,
            hidden_dim: layers.get_or("hidden_dim", a.hidden_dim, 5)?,
            target_dim: layers.get_or("target_dim", a.target_dim, 4)?,
            output_nonlinearity: layers.get_or("output_nonlinearity", a.output_nonlinearity, OutputNonlinearity::Tanh)?,
            seed,
        };
        let fx = gradcheck_fixture(&config, vocab_size, n_tokens)?;
        for &kind in &losses {
            let loss = LossConfig {
                kind,
                margin,
                negative_sampling_seed: seed,
            };
            let negative = (kind == LossKind::Rank).then_some(fx.negative.as_slice());
            let r = gradient_check(&fx.encoder, &fx.tokens, &loss, &fx.target, negative, step)?;
            let ok = r.passes(tolerance);
            println!(
                "{arch}\t{kind}\t{:.3e}\t{}\t{}",
                r.max_relative_error,
                r.checked,
                if ok { "pass" } else { "FAIL" }
            );
            if !ok {
                failed.push(format!("{arch}/{kind}"));
            }
        }
    }
    if !failed.is_empty() {
        bail!("gradient check above {tolerance:e} for {}", failed.join(", "));
    }
    Ok(())
}

fn synth(layers: &Layers, a: SynthArgs) -> Result<()> {
    let out_dir = path(layers, "out_dir", a.out_dir)?;
    let words = layers.get_or("words", a.words, 200)?;
    let dim = layers.get_or("dim", a.dim, 64)?;
    let seed = layers.get_or("seed", a.seed, 0)?;
    if words < 4 || dim == 0 {
        bail!("synth needs at least 4 words and a positive dimension");
    }
    let world = ToyWorld::generate(words, dim, seed);
    world.write_fixture_dir(&out_dir)?;
    let mut counts = BTreeMap::new();
    for e in fs::read_dir(&out_dir)? {
        let e = e?;
        counts.insert(e.file_name().to_string_lossy().into_owned(), e.metadata()?.len());
    }
    for (name, bytes) in counts {
        println!("{name}\t{bytes}");
    }
    Ok(())
}
