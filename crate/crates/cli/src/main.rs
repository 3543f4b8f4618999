use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use bccode::bc_code::{BcCode, CodeSpecFile, ShortenConvention, DEFAULT_MINDIST_BUDGET};
use bccode::bc_decoder::{decode, DecodeStatus, ReceivedWord};
use bccode::das::{self, CodeDescriptor, DasParams, NumericMode, PrecisionConfig};
use bccode::das_sim::{simulate, SimConfig};
use bccode::field::{Field, FieldKind};
use bccode::topology::TopologyParams;
use clap::{Args, Parser, Subcommand};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bccode", version, about = "Block circulant erasure codes and data availability sampling analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code and write its spec file.
    Construct(ConstructArgs),
    /// Encode a message into a codeword.
    Encode(EncodeArgs),
    /// Recover erasures in a received word (exit 0 recovered, 2 uncorrectable).
    Decode(DecodeArgs),
    /// Minimum distance by exhaustive enumeration of codewords.
    Mindist(MindistArgs),
    /// Sampling analysis: s_min, thresholds and curves.
    Das(DasArgs),
    /// Monte Carlo estimate of the sampling probabilities.
    Simulate(SimulateArgs),
    /// Side-by-side parameters and protocol metrics.
    Compare(CompareArgs),
}

#[derive(Args)]
struct CodeFlags {
    #[arg(long)]
    mu: usize,
    #[arg(long)]
    lambda: usize,
    #[arg(long)]
    omega: usize,
    #[arg(long)]
    rho: usize,
    /// `p11` (prime), `b8` (GF(2^8)) or `gf256`; defaults to the smallest binary field that fits.
    #[arg(long, value_parser = parse_field)]
    field: Option<Field>,
    /// Comma-separated code locators, one per residue class of positions.
    #[arg(long, value_delimiter = ',')]
    locators: Option<Vec<u64>>,
}

impl CodeFlags {
    fn build(&self) -> Result<BcCode> {
        let params = TopologyParams::new(self.mu, self.lambda, self.omega, self.rho)?;
        let field = self.field.unwrap_or_else(|| bccode::bc_code::default_field(&params));
        Ok(match &self.locators {
            Some(l) => BcCode::with_locators(params, field, l.clone())?,
            None => BcCode::new(params, field)?,
        })
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    code: CodeFlags,
    /// Report parameters of the code shortened by this many symbols.
    #[arg(long, default_value_t = 0)]
    shorten: usize,
    /// Write the code-spec JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the parity-check matrix (JSON rows) here.
    #[arg(long)]
    dump_h: Option<PathBuf>,
    /// Write the systematic generator matrix (JSON rows) here.
    #[arg(long)]
    dump_g: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// JSON array of k message symbols; a random message is drawn when absent.
    #[arg(long)]
    message: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pin this many trailing message symbols to zero.
    #[arg(long, default_value_t = 0)]
    shorten: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// JSON array of symbols, `-1` marking an erasure.
    #[arg(long)]
    word: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the round-by-round decoding plan.
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Args)]
struct MindistArgs {
    #[arg(long, conflicts_with_all = ["mu", "lambda", "omega", "rho", "field", "locators"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    mu: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    omega: Option<usize>,
    #[arg(long)]
    rho: Option<usize>,
    #[arg(long, value_parser = parse_field)]
    field: Option<Field>,
    #[arg(long, value_delimiter = ',')]
    locators: Option<Vec<u64>>,
    /// Refuse to enumerate more than this many codewords.
    #[arg(long, default_value_t = DEFAULT_MINDIST_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct PrecisionFlags {
    /// Working precision in decimal digits (overrides BC_PRECISION_DIGITS).
    #[arg(long)]
    digits: Option<usize>,
    /// Exact rational arithmetic instead of high-precision floats.
    #[arg(long)]
    exact: bool,
}

impl PrecisionFlags {
    fn config(&self) -> Result<PrecisionConfig> {
        let mut cfg = match self.digits {
            Some(d) => PrecisionConfig::with_digits(d)?,
            None => PrecisionConfig::from_env()?,
        };
        if self.exact {
            cfg.mode = NumericMode::ExactRational;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct DasArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1000)]
    c: usize,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long, default_value_t = 0.99)]
    eta: f64,
    #[arg(long, default_value_t = 900)]
    chat_target: usize,
    #[arg(long, default_value_t = 100)]
    ctilde_target: usize,
    /// Evaluate at this sample count instead of s_min.
    #[arg(long)]
    s: Option<usize>,
    /// Base path for curve CSVs: writes `<stem>_p1.csv`, `<stem>_chat.csv`, `<stem>_qc.csv`.
    #[arg(long)]
    curves: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    precision: PrecisionFlags,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 1000)]
    c: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Thresholds c0 for Pr(Y > c0), comma-separated.
    #[arg(long, value_delimiter = ',')]
    reject_threshold: Vec<usize>,
    /// Node counts for Pr(Z >= n-d+1), comma-separated.
    #[arg(long, value_delimiter = ',')]
    live_count: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Code description files; the two reference codes are used when none are given.
    #[arg(long, num_args = 1..)]
    specs: Vec<PathBuf>,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    precision: PrecisionFlags,
}

/// Accepts `p<prime>`, `b<m>`, `gf2^<m>` or `gf<order>`.
fn parse_field(s: &str) -> Result<Field, String> {
    let s = s.trim().to_ascii_lowercase();
    let num = |t: &str| t.parse::<u64>().map_err(|_| format!("cannot parse field {s:?}"));
    let field = if let Some(m) = s.strip_prefix("gf2^") {
        Field::binary(num(m)? as u32)
    } else if let Some(q) = s.strip_prefix("gf") {
        let q = num(q)?;
        if q.is_power_of_two() && q > 2 {
            Field::binary(q.trailing_zeros())
        } else {
            Field::prime(q)
        }
    } else if let Some(p) = s.strip_prefix('p') {
        Field::prime(num(p)?)
    } else if let Some(m) = s.strip_prefix('b') {
        Field::binary(num(m)? as u32)
    } else {
        return Err(format!("unknown field {s:?}; use p11, b8 or gf256"));
    };
    field.map_err(|e| e.to_string())
}

fn field_name(f: Field) -> String {
    match f.kind() {
        FieldKind::Prime => format!("GF({})", f.p_or_m()),
        FieldKind::Binary => format!("GF(2^{})", f.p_or_m()),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_code(path: &Path) -> Result<BcCode> {
    let spec: CodeSpecFile = read_json(path)?;
    Ok(BcCode::from_spec_file(&spec)?)
}

fn code_label(code: &BcCode) -> String {
    let p = code.params();
    format!("BC[{},{},{},{}] over {}", p.mu, p.lambda, p.omega, p.rho, field_name(code.field()))
}

fn construct(args: &ConstructArgs) -> Result<ExitCode> {
    let code = args.code.build()?;
    let derived = code.shorten(args.shorten, ShortenConvention::KeepLength)?;
    println!("code: {}", code_label(&code));
    match derived.d {
        Some(d) => println!("parameters: [{},{},{}]", derived.n, derived.k, d),
        None => println!("parameters: [{},{}] (no closed-form distance for these parameters)", derived.n, derived.k),
    }
    if let Some(out) = &args.out {
        emit(&code.to_spec_file(), Some(out))?;
    }
    if let Some(path) = &args.dump_h {
        emit(&code.pc_matrix().to_rows(), Some(path))?;
    }
    if let Some(path) = &args.dump_g {
        emit(&code.systematic_generator()?.to_rows(), Some(path))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn encode(args: &EncodeArgs) -> Result<ExitCode> {
    let code = load_code(&args.spec)?;
    let len = code.k() - args.shorten.min(code.k());
    let message: Vec<u64> = match &args.message {
        Some(p) => read_json(p)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..len).map(|_| rng.random_range(0..code.field().order())).collect()
        }
    };
    let codeword = if args.shorten > 0 { code.encode_shortened(&message, args.shorten)? } else { code.encode(&message)? };
    emit(&codeword, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn decode_cmd(args: &DecodeArgs) -> Result<ExitCode> {
    let code = load_code(&args.spec)?;
    let ints: Vec<i64> = read_json(&args.word)?;
    let word = ReceivedWord::from_ints(&ints, code.field())?;
    let out = decode(&code, &word)?;
    emit(&out.word, args.out.as_deref())?;
    if let Some(p) = &args.plan {
        emit(&out.plan, Some(p))?;
    }
    match out.status {
        DecodeStatus::FullyRecovered => {
            eprintln!("recovered {} erasures", word.n_erasures());
            Ok(ExitCode::SUCCESS)
        }
        DecodeStatus::UncorrectableRemainder => {
            eprintln!("uncorrectable erasures: {} of {} remain", out.word.n_erasures(), word.n_erasures());
            Ok(ExitCode::from(2))
        }
    }
}

fn mindist(args: &MindistArgs) -> Result<ExitCode> {
    let code = match &args.spec {
        Some(p) => load_code(p)?,
        None => {
            let need = |v: Option<usize>, name: &str| v.ok_or_else(|| anyhow!("--{name} is required without --spec"));
            CodeFlags {
                mu: need(args.mu, "mu")?,
                lambda: need(args.lambda, "lambda")?,
                omega: need(args.omega, "omega")?,
                rho: need(args.rho, "rho")?,
                field: args.field,
                locators: args.locators.clone(),
            }
            .build()?
        }
    };
    let d = code.brute_force_min_distance(args.budget)?;
    println!("code: {}", code_label(&code));
    println!("minimum distance: {d}");
    if let Some(designed) = code.designed_distance() {
        println!("closed-form distance: {designed}");
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DasOutput {
    #[serde(flatten)]
    report: das::DasReport,
    achievable: bool,
    evaluated_s: Option<usize>,
    chat: Option<usize>,
    ctilde: Option<usize>,
    p1: Option<f64>,
}

fn curve_path(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "curves".into());
    base.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn das_cmd(args: &DasArgs) -> Result<ExitCode> {
    let cfg = args.precision.config()?;
    let params = DasParams {
        n: args.n,
        k: args.k,
        d: args.d,
        c: args.c,
        s: 0,
        gamma: args.gamma,
        eta: args.eta,
        chat_target: args.chat_target,
        ctilde_target: args.ctilde_target,
    };
    params.validate()?;
    let report = das::report(&params, &cfg)?;
    let s = args.s.or(report.s_min);
    let (chat, ctilde, p1) = match s {
        Some(s) => {
            let at = params.with_s(s);
            let ctilde = if s <= params.max_s() { das::c_tilde(&at, &cfg)? } else { None };
            (das::c_hat(&at, &cfg)?, ctilde, Some(das::to_f64(&das::p1(&at, &cfg)?)))
        }
        None => (None, None, None),
    };
    if let Some(base) = &args.curves {
        let s_max = params.max_s().min(200);
        fs::write(curve_path(base, "p1"), das::p1_csv(&das::p1_curve(&params, &cfg, s_max)?))?;
        match s {
            Some(s) if s <= params.max_s() => {
                let at = params.with_s(s);
                fs::write(curve_path(base, "chat"), das::chat_csv(&das::chat_curve(&at, &cfg)?))?;
                fs::write(curve_path(base, "qc"), das::qc_csv(&das::q_curve(&at, &cfg)?))?;
            }
            _ => eprintln!("no sample count to evaluate; only the p1 curve was written"),
        }
    }
    let achievable = report.s_min.is_some();
    let output = DasOutput { report, achievable, evaluated_s: s, chat, ctilde, p1 };
    if args.json {
        emit(&output, None)?;
    } else {
        let opt = |x: Option<usize>| x.map_or("none".to_string(), |v| v.to_string());
        println!("code: [{},{},{}], c={}, gamma={}, eta={}", args.n, args.k, args.d, args.c, args.gamma, args.eta);
        match output.report.s_min {
            Some(s) => println!("s_min: {s}"),
            None => println!("s_min: not achievable for targets chat>={} and ctilde<={}", args.chat_target, args.ctilde_target),
        }
        if let Some(s) = s {
            println!("at s={s}: p1={:.6}, chat={}, ctilde={}", p1.unwrap_or(f64::NAN), opt(chat), opt(ctilde));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate_cmd(args: &SimulateArgs) -> Result<ExitCode> {
    let cfg = SimConfig {
        n: args.n,
        d: args.d,
        s: args.s,
        c: args.c,
        trials: args.trials,
        seed: args.seed,
        reject_thresholds: args.reject_threshold.clone(),
        live_counts: args.live_count.clone(),
    };
    emit(&simulate(&cfg)?, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn load_descriptor(path: &Path) -> Result<CodeDescriptor> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("family").is_some() {
        return Ok(serde_json::from_value(value)?);
    }
    let spec: CodeSpecFile =
        serde_json::from_value(value).with_context(|| format!("{} is neither a code description nor a code spec", path.display()))?;
    Ok(CodeDescriptor::Bc {
        mu: spec.mu,
        lambda: spec.lambda,
        omega: spec.omega,
        rho: spec.rho,
        shorten: 0,
        field: Some(spec.field),
        name: None,
    })
}

fn compare_cmd(args: &CompareArgs) -> Result<ExitCode> {
    let cfg = args.precision.config()?;
    let descs = if args.specs.is_empty() {
        vec![
            CodeDescriptor::Product { n0: 38, k0: 32, name: None },
            CodeDescriptor::Bc { mu: 12, lambda: 2, omega: 86, rho: 32, shorten: 8, field: None, name: None },
        ]
    } else {
        args.specs.iter().map(|p| load_descriptor(p)).collect::<Result<_>>()?
    };
    let rows = das::compare(&descs, None, &cfg)?;
    if args.json {
        emit(&rows, None)?;
    } else {
        print!("{}", das::format_table(&rows));
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Construct(a) => construct(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Mindist(a) => mindist(a),
        Command::Das(a) => das_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Compare(a) => compare_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
