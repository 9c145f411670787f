use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use japdr_core::aiger::{gen_counter_thresholds, WitnessEvidence};
use japdr_core::oracle::{self, BmcResult, BruteVerdict, Semantics};
use japdr_core::orchestrator::{OrchestratorError, PropertyOrder};
use japdr_core::random::{random_system, RandomConfig};
use japdr_core::report::{self, ReportFormat, EXIT_FAILURES, EXIT_OK, EXIT_PARSE, EXIT_UNKNOWN};
use japdr_core::{
    emit_ascii, emit_binary, emit_witness, gen_counter, parse, run, Circuit, LiftMode, Mode,
    PropertyKind, PropertySpec, TaskOptions, VerdictStatus, VerificationTask,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(
    name = "japdr",
    version,
    about = "Multi-property safety checking with local proofs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every property of an AIGER file.
    Check(CheckArgs),
    /// Write the counter benchmark circuit.
    GenCounter(GenCounterArgs),
    /// Write a seeded random circuit.
    GenRandom(GenRandomArgs),
    /// Bounded model checking of one property.
    Bmc(BmcArgs),
    /// Explicit-state verdicts for small circuits.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ja,
    Joint,
    SepGlobal,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum LiftArg {
    Ignore,
    Respect,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportArg {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Local,
    Global,
}

fn positive_secs(s: &str) -> Result<Duration, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err("timeouts must be positive".into());
    }
    Ok(Duration::from_secs_f64(v))
}

#[derive(Args)]
struct CheckArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "ja")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "on")]
    reuse_clauses: OnOff,
    #[arg(long)]
    clause_db: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ignore")]
    lifting: LiftArg,
    #[arg(long, value_parser = positive_secs)]
    per_prop_timeout: Option<Duration>,
    #[arg(long, value_parser = positive_secs)]
    total_timeout: Option<Duration>,
    /// Comma-separated indices of properties expected to fail.
    #[arg(long, value_delimiter = ',')]
    etf: Vec<usize>,
    /// `given`, `easy-first`, or a file listing property indices.
    #[arg(long, default_value = "given")]
    order: String,
    #[arg(long, value_enum, default_value = "text")]
    report: ReportArg,
    #[arg(long)]
    witness_dir: Option<PathBuf>,
    /// Certify every proof (always on with clause re-use).
    #[arg(long)]
    certify: bool,
}

#[derive(Args)]
struct GenCounterArgs {
    #[arg(long)]
    bits: usize,
    #[arg(short = 'o', long)]
    output: PathBuf,
    /// Emit this many threshold properties over a correctly resetting counter.
    #[arg(long)]
    thresholds: Option<usize>,
}

#[derive(Args)]
struct GenRandomArgs {
    #[arg(long)]
    seed: u64,
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Args)]
struct BmcArgs {
    input: PathBuf,
    #[arg(long)]
    property: usize,
    #[arg(long, default_value_t = 100)]
    max_depth: usize,
    /// Assume every other property on non-final frames.
    #[arg(long)]
    local: bool,
    #[arg(long, value_parser = positive_secs)]
    timeout: Option<Duration>,
    #[arg(long)]
    witness_dir: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "local")]
    semantics: SemanticsArg,
}

/// Failure that maps to a specific exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn load_circuit(path: &Path) -> Result<(Circuit, Vec<PropertySpec>)> {
    let data = std::fs::read(path)
        .map_err(|e| Exit(EXIT_PARSE as u8, format!("{}: {e}", path.display())))?;
    parse(&data).map_err(|e| Exit(EXIT_PARSE as u8, format!("{}: {e}", path.display())).into())
}

fn write_circuit(c: &Circuit, path: &Path) -> Result<()> {
    let bytes = if path.extension().is_some_and(|e| e == "aig") {
        emit_binary(c)
    } else {
        emit_ascii(c)
    };
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn usage(msg: String) -> anyhow::Error {
    Exit(2, msg).into()
}

fn check(a: CheckArgs) -> Result<i32> {
    let order_spec = a.order.clone();
    let (circuit, mut props) = load_circuit(&a.input)?;
    for &i in &a.etf {
        let Some(p) = props.get_mut(i) else {
            return Err(usage(format!(
                "--etf {i}: the circuit has {} properties",
                props.len()
            )));
        };
        p.kind = PropertyKind::Etf;
    }
    let order = match order_spec.as_str() {
        "given" => PropertyOrder::Given,
        "easy-first" => PropertyOrder::EasyFirst,
        path => {
            let text =
                std::fs::read_to_string(path).map_err(|e| usage(format!("--order {path}: {e}")))?;
            let idx = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| usage(format!("--order {path}: expected property indices")))?;
            PropertyOrder::Explicit(idx)
        }
    };
    let reuse = matches!(a.reuse_clauses, OnOff::On);
    let options = TaskOptions {
        reuse_clauses: reuse,
        lifting: match a.lifting {
            LiftArg::Ignore => LiftMode::Ignore,
            LiftArg::Respect => LiftMode::Respect,
        },
        per_prop_timeout: a.per_prop_timeout,
        total_timeout: a.total_timeout,
        order,
        clause_db: a.clause_db,
        certify: a.certify || reuse,
        max_frames: None,
    };
    let mode = match a.mode {
        ModeArg::Ja => Mode::Ja,
        ModeArg::Joint => Mode::Joint,
        ModeArg::SepGlobal => Mode::SepGlobal,
    };
    let task = VerificationTask::new(circuit, props, mode, options).map_err(|e| match e {
        OrchestratorError::InvalidTask(m) => usage(m),
        e => e.into(),
    })?;
    let mut rep = run(&task)?;
    if let Some(dir) = &a.witness_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for v in &mut rep.verdicts {
            let ev = match (&v.counterexample, v.status) {
                (Some(c), _) => WitnessEvidence::Counterexample(c),
                (None, VerdictStatus::Unknown) => WitnessEvidence::Unknown,
                (None, _) => WitnessEvidence::Proof,
            };
            let name = format!("b{}.wit", v.index);
            std::fs::write(dir.join(&name), emit_witness(v.index, ev))
                .with_context(|| format!("writing witness {name}"))?;
            v.witness_file = Some(name);
        }
    }
    let fmt = match a.report {
        ReportArg::Text => ReportFormat::Text,
        ReportArg::Json => ReportFormat::Json,
        ReportArg::Csv => ReportFormat::Csv,
    };
    let (body, code) = report::format_report(&rep, fmt);
    print!("{body}");
    Ok(code)
}

fn gen_counter_cmd(a: GenCounterArgs) -> Result<i32> {
    let (c, _) = match a.thresholds {
        Some(n) => gen_counter_thresholds(a.bits, n, false),
        None => gen_counter(a.bits),
    }
    .map_err(|e| usage(e.to_string()))?;
    write_circuit(&c, &a.output)?;
    Ok(EXIT_OK)
}

fn gen_random_cmd(a: GenRandomArgs) -> Result<i32> {
    let s = random_system(a.seed, &RandomConfig::default());
    write_circuit(&s.circuit, &a.output)?;
    println!(
        "seed {}: {} latches, {} inputs, {} properties, planted bug: {}",
        a.seed,
        s.circuit.num_latches(),
        s.circuit.num_inputs(),
        s.properties.len(),
        s.planted_bug
    );
    Ok(EXIT_OK)
}

fn bmc_cmd(a: BmcArgs) -> Result<i32> {
    let (c, props) = load_circuit(&a.input)?;
    let Some(&target) = props.get(a.property) else {
        return Err(usage(format!("no property {}", a.property)));
    };
    let cons: Vec<PropertySpec> = if a.local {
        props
            .iter()
            .filter(|p| p.index != a.property)
            .copied()
            .collect()
    } else {
        Vec::new()
    };
    let deadline = a.timeout.map(|t| Instant::now() + t);
    match oracle::bmc(&c, &target, &cons, a.max_depth, deadline) {
        BmcResult::Cex(cex) => {
            println!(
                "property {}: counterexample at depth {}",
                a.property,
                cex.depth()
            );
            if let Some(dir) = &a.witness_dir {
                std::fs::create_dir_all(dir)?;
                let w = emit_witness(a.property, WitnessEvidence::Counterexample(&cex));
                std::fs::write(dir.join(format!("b{}.wit", a.property)), w)?;
            }
            Ok(EXIT_FAILURES)
        }
        BmcResult::NoneUpTo(d) => {
            println!("property {}: no counterexample up to depth {d}", a.property);
            Ok(EXIT_OK)
        }
        BmcResult::Unknown(d) => {
            println!(
                "property {}: timeout, no counterexample below depth {d}",
                a.property
            );
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn oracle_cmd(a: OracleArgs) -> Result<i32> {
    let (c, props) = load_circuit(&a.input)?;
    let sem = match a.semantics {
        SemanticsArg::Local => Semantics::Local,
        SemanticsArg::Global => Semantics::Global,
    };
    let mut code = EXIT_OK;
    let mut failing = Vec::new();
    for p in &props {
        match oracle::brute_check(&c, &props, p.index, sem)? {
            BruteVerdict::Holds => println!("property {}: holds", p.index),
            BruteVerdict::Fails(cex) => {
                println!("property {}: fails at depth {}", p.index, cex.depth());
                failing.push(p.index.to_string());
                code = EXIT_FAILURES;
            }
        }
    }
    if matches!(sem, Semantics::Local) {
        println!("debugging set: {{{}}}", failing.join(", "));
    }
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Check(a) => check(a),
        Command::GenCounter(a) => gen_counter_cmd(a),
        Command::GenRandom(a) => gen_random_cmd(a),
        Command::Bmc(a) => bmc_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
    };
    match res {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("japdr: {e:#}");
            match e.downcast_ref::<Exit>() {
                Some(Exit(code, _)) => ExitCode::from(*code),
                None => ExitCode::FAILURE,
            }
        }
    }
}
