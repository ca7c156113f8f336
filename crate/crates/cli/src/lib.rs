//! `eacm` subcommands. Every subcommand that writes files writes them into
//! its `--out` directory only, next to an `effective_config.txt` that can be
//! fed back through `--config` to repeat the run.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use eacm::corpus::{build_vocab, encode_records, read_records, CorpusFormat, EipMatrix, SyntheticSpec};
use eacm::eval::{audit_tsv, evaluate, DistinctDenominator, EvalOptions, Oracle};
use eacm::model::ModelMode;
use eacm::training::{gradcheck_model, initial_model, loss_log_csv, train, Checkpoint, GradCheckConfig, TrainConfig};
use eacm::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_GRADCHECK: i32 = 3;

pub const EFFECTIVE_CONFIG: &str = "effective_config.txt";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.eacm";
pub const LOSS_LOG_FILE: &str = "loss_log.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const EIP_FILE: &str = "eip.csv";
pub const RESPONSES_FILE: &str = "responses.tsv";

#[derive(Debug, Parser)]
#[command(name = "eacm", version, about = "Emotion-aware chat machine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic corpus from a template spec.
    Synth(SynthArgs),
    /// Train a model and write a checkpoint plus per-epoch loss log.
    Train(TrainArgs),
    /// Decode a test corpus and score the replies.
    Eval(EvalArgs),
    /// Count post/response category transitions in a corpus.
    Eip(EipArgs),
    /// Compare autodiff gradients against finite differences on a tiny model.
    Gradcheck(GradcheckArgs),
    /// Single-turn chat on standard input, one post per line.
    Chat(ChatArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Synthetic spec (`key = value`); defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of pairs, overriding the settings file.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub mode: Option<ModelMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Checkpoint to start from. The same mode continues training; a
    /// seq2seq checkpoint warm-starts an emotion-aware mode.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Test corpus, read in the checkpoint's corpus format.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Synthetic spec used as sentiment and semantic oracle.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    #[arg(long, default_value = "ngrams")]
    pub denominator: DistinctDenominator,
    /// Accepted for symmetry; decoding is greedy and does not use it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Eval settings (`max_len`, `decode_max_len`, `denominator`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EipArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "jsonl")]
    pub format: CorpusFormat,
    /// Accepted for symmetry; counting is not random.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the matrix here; otherwise it only goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<ModelMode>,
    /// Double one gradient entry of this parameter before comparing.
    #[arg(long, num_args = 0..=1, default_missing_value = "sel.pred.w", value_name = "PARAM")]
    pub corrupt: Option<String>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChatArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Reply length cap; defaults to the checkpoint's `decode_max_len`.
    #[arg(long)]
    pub max_len: Option<usize>,
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(&a, out),
        Command::Train(a) => train_cmd(&a, out, err),
        Command::Eval(a) => eval_cmd(&a, out),
        Command::Eip(a) => eip(&a, out),
        Command::Gradcheck(a) => gradcheck(&a, out),
        Command::Chat(a) => chat(&a, input, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, Error> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

fn make_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn split_override(s: &str) -> Result<(&str, &str), Error> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::Config(format!("override `{s}` is not KEY=VALUE")))
}

fn synth(a: &SynthArgs, out: &mut dyn Write) -> CmdResult {
    let mut spec = match &a.config {
        Some(p) => SyntheticSpec::parse(&read_text(p)?, &p.display().to_string())?,
        None => SyntheticSpec::default(),
    };
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(n) = a.pairs {
        spec.pairs = n;
    }
    spec.validate()?;
    make_dir(&a.out)?;
    let records = eacm::corpus::generate_synthetic(&spec)?;
    let path = a.out.join(CORPUS_FILE);
    eacm::corpus::write_records(&path, &records)?;
    write_file(&a.out, EFFECTIVE_CONFIG, spec.to_kv_string())?;
    writeln!(out, "wrote {} pairs to {}", records.len(), path.display())?;
    Ok(EXIT_OK)
}

/// File config, then dedicated flags, then `--set` overrides.
pub fn train_config(a: &TrainArgs) -> Result<TrainConfig, Error> {
    let mut cfg = match &a.config {
        Some(p) => TrainConfig::load(p)?,
        None => TrainConfig::default(),
    };
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    for o in &a.overrides {
        let (k, v) = split_override(o)?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn train_cmd(a: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let cfg = train_config(a)?;
    let records = read_records(&a.corpus, cfg.corpus_format)?;
    let init = a.init.as_deref().map(Checkpoint::load).transpose()?;
    // A starting checkpoint fixes the vocabulary, so its shapes line up.
    let vocab = match &init {
        Some(ck) => ck.vocab.clone(),
        None => build_vocab(&records, cfg.vocab_cap)?,
    };
    let mut model = initial_model(&cfg, &vocab)?;
    if let Some(ck) = &init {
        if ck.config.mode == cfg.mode {
            ck.restore_into(&mut model)?;
        } else {
            model.warm_start(&ck.model.params)?;
        }
    }
    let pairs = encode_records(&records, &vocab, cfg.max_len);
    make_dir(&a.out)?;
    let mut echoed = cfg.to_kv_string();
    echoed += &format!("# corpus: {}\n", a.corpus.display());
    if let Some(p) = &a.init {
        echoed += &format!("# init: {}\n", p.display());
    }
    write_file(&a.out, EFFECTIVE_CONFIG, echoed)?;

    writeln!(
        out,
        "training {} on {} pairs, vocabulary {}, {} parameters",
        cfg.mode,
        pairs.len(),
        vocab.len(),
        model.params.iter().map(|(_, p)| p.value.len()).sum::<usize>()
    )?;
    let log = train(&mut model, &pairs, &cfg, |e, _| {
        let _ = writeln!(
            err,
            "epoch {:>4}  L_e {:.5}  L_seq2seq {:.5}  L_EACM {:.5}",
            e.epoch, e.selector, e.seq2seq, e.total
        );
        true
    })?;
    write_file(&a.out, LOSS_LOG_FILE, loss_log_csv(&log))?;
    let ck_path = a.out.join(CHECKPOINT_FILE);
    Checkpoint::new(cfg, vocab, model).save(&ck_path)?;
    writeln!(out, "wrote {}", ck_path.display())?;
    Ok(EXIT_OK)
}

fn eval_options(a: &EvalArgs, ck: &Checkpoint) -> Result<EvalOptions, Error> {
    let mut opts = EvalOptions {
        max_len: ck.config.max_len,
        decode_max_len: ck.config.decode_max_len,
        denominator: a.denominator,
    };
    if let Some(p) = &a.config {
        for (k, v) in eacm::kv::parse(&read_text(p)?, &p.display().to_string())? {
            match k.as_str() {
                "max_len" => opts.max_len = eacm::kv::parse_value(&k, &v)?,
                "decode_max_len" => opts.decode_max_len = eacm::kv::parse_value(&k, &v)?,
                "denominator" => opts.denominator = v.parse()?,
                // The echoed file also names its inputs.
                "checkpoint" | "corpus" | "oracle" => {}
                other => return Err(Error::Config(format!("unknown eval key `{other}`"))),
            }
        }
    }
    Ok(opts)
}

fn eval_cmd(a: &EvalArgs, out: &mut dyn Write) -> CmdResult {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let opts = eval_options(a, &ck)?;
    let records = read_records(&a.corpus, ck.config.corpus_format)?;
    let oracle = match &a.oracle {
        Some(p) => Some(Oracle::from_spec(&SyntheticSpec::parse(
            &read_text(p)?,
            &p.display().to_string(),
        )?)?),
        None => None,
    };
    let ev = evaluate(&ck.model, &ck.vocab, &records, oracle.as_ref(), &opts)?;
    make_dir(&a.out)?;
    let mut echoed = format!(
        "max_len = {}\ndecode_max_len = {}\ndenominator = {}\ncheckpoint = {}\ncorpus = {}\n",
        opts.max_len,
        opts.decode_max_len,
        opts.denominator.name(),
        a.checkpoint.display(),
        a.corpus.display(),
    );
    if let Some(p) = &a.oracle {
        echoed += &format!("oracle = {}\n", p.display());
    }
    write_file(&a.out, EFFECTIVE_CONFIG, echoed)?;
    let report = ev.report.to_kv_string();
    write_file(&a.out, REPORT_FILE, &report)?;
    write_file(&a.out, RESPONSES_FILE, audit_tsv(&ev.scored))?;
    if let Some(csv) = ev.report.eip_csv() {
        write_file(&a.out, EIP_FILE, csv)?;
    }
    write!(out, "{report}")?;
    Ok(EXIT_OK)
}

fn eip(a: &EipArgs, out: &mut dyn Write) -> CmdResult {
    let records = read_records(&a.corpus, a.format)?;
    let m = EipMatrix::from_label_pairs(records.iter().map(|r| (r.post_labels.0, r.response_labels.0)));
    let csv = m.to_csv();
    if let Some(dir) = &a.out {
        make_dir(dir)?;
        write_file(
            dir,
            EFFECTIVE_CONFIG,
            format!("corpus = {}\nformat = {}\n", a.corpus.display(), a.format),
        )?;
        write_file(dir, EIP_FILE, &csv)?;
    }
    write!(out, "{csv}")?;
    Ok(EXIT_OK)
}

pub fn gradcheck_config(a: &GradcheckArgs) -> Result<GradCheckConfig, Error> {
    let mut cfg = match &a.config {
        Some(p) => GradCheckConfig::parse(&read_text(p)?, &p.display().to_string())?,
        None => GradCheckConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(c) = &a.corrupt {
        cfg.corrupt = Some(c.clone());
    }
    for o in &a.overrides {
        let (k, v) = split_override(o)?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn gradcheck(a: &GradcheckArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = gradcheck_config(a)?;
    if let Some(dir) = &a.out {
        make_dir(dir)?;
        write_file(dir, EFFECTIVE_CONFIG, cfg.to_kv_string())?;
    }
    let o = gradcheck_model(&cfg)?;
    let r = &o.report;
    if let Some((name, index)) = &o.corrupted {
        writeln!(out, "injected: doubled gradient of {name}[{index}]")?;
    }
    writeln!(
        out,
        "{} max relative error {:.3e} (tolerance {:.0e}) at {}[{}]: analytic {:.6e}, numeric {:.6e}; {} entries in {} parameters",
        if o.passed { "PASS" } else { "FAIL" },
        r.max_rel_error,
        cfg.tolerance,
        r.param,
        r.index,
        r.analytic,
        r.numeric,
        r.entries_checked,
        o.parameters,
    )?;
    Ok(if o.passed { EXIT_OK } else { EXIT_GRADCHECK })
}

fn chat(a: &ChatArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> CmdResult {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let max_len = a.max_len.unwrap_or(ck.config.decode_max_len);
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Ok(EXIT_OK);
        }
        let mut post = ck.vocab.encode(line.trim());
        if post.is_empty() {
            continue;
        }
        post.truncate(ck.config.max_len);
        let reply = ck.model.reply(&post, None, max_len)?;
        writeln!(out, "post emotion:     {}", reply.post_emotion.labeled())?;
        writeln!(out, "response emotion: {}", reply.response_emotion.labeled())?;
        writeln!(out, "reply: {}", ck.vocab.decode_sentence(&reply.tokens))?;
        out.flush()?;
    }
}
