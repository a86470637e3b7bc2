//! Command line front end. Exit codes: 0 success (or a definite negative
//! answer from an exact method), 1 pipeline failure, 2 invalid instance,
//! input or configuration.

use clap::{Args, Parser, Subcommand, ValueEnum};
use decomp_forge::barriers::{
    detect_divisibility_barrier, parity_barrier, search_divisibility_barrier, BarrierSpec,
    VertexPartition,
};
use decomp_forge::harness::{
    instance_digest, persist_certificate, read_instance, run_experiment, run_method,
    verify_certificate, Certificate, ExperimentConfig, InstanceSpec, Method, MethodRun, RunReport,
    Status,
};
use decomp_forge::{Error, Hypergraph, Result};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "decomp-forge",
    version,
    about = "Hypergraph matchings and triangle decompositions"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (a directory for `experiment`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance as JSON.
    Generate {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Triangle-decompose a graph instance.
    Decompose {
        #[arg(long, value_enum)]
        method: DecomposeMethod,
        #[arg(long)]
        input: PathBuf,
    },
    /// Perfect (or near-perfect) matching of a hypergraph instance.
    Match {
        #[arg(long, value_enum)]
        method: MatchMethod,
        #[arg(long)]
        input: PathBuf,
        /// Codegree slack constant.
        #[arg(long, default_value_t = 0.05)]
        c: f64,
    },
    /// Exact fractional relaxations.
    Lp {
        #[arg(value_enum)]
        which: LpKind,
        #[arg(long)]
        input: PathBuf,
    },
    Barriers {
        #[command(subcommand)]
        action: BarrierCmd,
    },
    /// Check a certificate against an instance.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Run an experiment config over its seeds.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Complete {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
    },
    Dense {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        fraction: f64,
        /// Repair to a tridivisible graph.
        #[arg(long)]
        tridivisible: bool,
    },
    Codegree {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        fraction: f64,
    },
    SteinerAux {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        r: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DecomposeMethod {
    Exact,
    Iterative,
    Algebraic,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatchMethod {
    Nibble,
    Codegree,
}

#[derive(Clone, Copy, ValueEnum)]
enum LpKind {
    Pm,
    Triangles,
}

#[derive(Subcommand)]
enum BarrierCmd {
    /// Build a barrier from a JSON spec, or the parity construction.
    Build {
        #[arg(long, conflicts_with = "parity")]
        spec: Option<PathBuf>,
        /// `n,r` of the parity construction.
        #[arg(long, value_delimiter = ',')]
        parity: Option<Vec<usize>>,
    },
    /// Test a partition for a divisibility barrier, or search for one.
    Detect {
        #[arg(long)]
        input: PathBuf,
        /// Part label of every vertex, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "search")]
        labels: Option<Vec<usize>>,
        /// Search partitions into at most this many parts.
        #[arg(long)]
        search: Option<usize>,
    },
}

fn emit(common: &Common, value: serde_json::Value, text: &str) {
    match common.format {
        Format::Json => println!("{value}"),
        Format::Text => println!("{text}"),
    }
}

fn write_or_print(common: &Common, body: &str) -> Result<()> {
    match &common.out {
        Some(p) => decomp_forge::harness::write_atomic(p, body),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn run_one(common: &Common, input: &Path, method: Method, c: f64) -> Result<ExitCode> {
    let h = read_instance(input)?;
    let start = Instant::now();
    let MethodRun {
        outcome,
        certificate,
        stats,
    } = run_method(&h, method, common.seed, c)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut cert_path = None;
    if let Some(cert) = &certificate {
        match &common.out {
            Some(p) => {
                persist_certificate(&h, cert, p)?;
                cert_path = Some(p.clone());
            }
            None => verify_certificate(&h, cert).map_err(Error::ImpossibleState)?,
        }
    }
    let code = match outcome.status {
        Status::Success | Status::Infeasible => 0,
        Status::Failed => 1,
        Status::Invalid => 2,
    };
    let report = RunReport {
        instance_digest: instance_digest(&h),
        method,
        seed: common.seed,
        outcome,
        certificate: cert_path,
        wall_ms,
        stats,
    };
    let mut text = format!("{}: {:?}", method.name(), report.outcome.status).to_lowercase();
    if let Some(d) = &report.outcome.detail {
        text.push_str(&format!(" ({d})"));
    }
    if let Some(p) = &report.certificate {
        text.push_str(&format!("; certificate written to {}", p.display()));
    } else if let (Some(cert), None) = (&certificate, &common.out) {
        text.push('\n');
        text.push_str(&cert.to_json());
    }
    let mut value = serde_json::to_value(&report)?;
    if common.out.is_none() {
        value["certificate_body"] = serde_json::to_value(&certificate)?;
    }
    emit(common, value, &text);
    Ok(ExitCode::from(code))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let common = &cli.common;
    match cli.cmd {
        Cmd::Generate { kind } => {
            let spec = match kind {
                GenKind::Complete { n, r: 2 } => InstanceSpec::Complete { n },
                GenKind::Complete { n, r } => InstanceSpec::CompleteHypergraph { n, r },
                GenKind::Dense {
                    n,
                    fraction,
                    tridivisible,
                } => InstanceSpec::Dense {
                    n,
                    min_degree_fraction: fraction,
                    seed: common.seed,
                    tridivisible,
                },
                GenKind::Codegree { n, fraction } => InstanceSpec::Codegree {
                    n,
                    codegree_fraction: fraction,
                    seed: common.seed,
                },
                GenKind::SteinerAux { n, q, r } => InstanceSpec::SteinerAuxiliary { n, q, r },
            };
            let h = spec.build()?;
            write_or_print(common, &h.to_json())?;
            if common.out.is_some() {
                emit(
                    common,
                    json!({"n": h.n(), "r": h.r(), "edges": h.num_edges(), "digest": instance_digest(&h)}),
                    &format!("{} vertices, {} edges", h.n(), h.num_edges()),
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Decompose { method, input } => {
            let m = match method {
                DecomposeMethod::Exact => Method::Exact,
                DecomposeMethod::Iterative => Method::Iterative,
                DecomposeMethod::Algebraic => Method::Algebraic,
            };
            run_one(common, &input, m, 0.0)
        }
        Cmd::Match { method, input, c } => {
            let m = match method {
                MatchMethod::Nibble => Method::Nibble,
                MatchMethod::Codegree => Method::CodegreePm,
            };
            run_one(common, &input, m, c)
        }
        Cmd::Lp { which, input } => {
            let h = read_instance(&input)?;
            match (which, h.r()) {
                (LpKind::Triangles, 2) | (LpKind::Pm, 3..) => {}
                (LpKind::Triangles, r) => {
                    return Err(Error::InvalidInstance(format!(
                        "triangle LP needs a graph, got r = {r}"
                    )))
                }
                (LpKind::Pm, r) => {
                    return Err(Error::InvalidInstance(format!(
                        "matching LP needs r >= 3, got r = {r}"
                    )))
                }
            }
            run_one(common, &input, Method::Lp, 0.0)
        }
        Cmd::Barriers { action } => barriers(common, action),
        Cmd::Verify { input, certificate } => {
            let h = read_instance(&input)?;
            let cert = Certificate::from_json(&std::fs::read_to_string(&certificate)?)?;
            let verdict = verify_certificate(&h, &cert);
            emit(
                common,
                json!({"accepted": verdict.is_ok(), "reason": verdict.as_ref().err()}),
                &match &verdict {
                    Ok(()) => "accepted".to_string(),
                    Err(why) => format!("rejected: {why}"),
                },
            );
            Ok(if verdict.is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Experiment { config } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(o) = &common.out {
                cfg.output = o.clone();
            }
            let reports = run_experiment(&cfg)?;
            let ok = reports
                .iter()
                .filter(|r| r.outcome.status == Status::Success)
                .count();
            emit(
                common,
                serde_json::to_value(&reports)?,
                &format!(
                    "{ok}/{} seeds succeeded; reports in {}",
                    reports.len(),
                    cfg.output.display()
                ),
            );
            let failed = reports.iter().any(|r| r.outcome.status == Status::Failed);
            Ok(if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

fn barriers(common: &Common, action: BarrierCmd) -> Result<ExitCode> {
    match action {
        BarrierCmd::Build { spec, parity } => {
            let h: Hypergraph = match (spec, parity) {
                (Some(p), _) => {
                    let s: BarrierSpec = serde_json::from_str(&std::fs::read_to_string(p)?)?;
                    s.build()?
                }
                (None, Some(nr)) => match nr[..] {
                    [n, r] => parity_barrier(n, r)?.0,
                    _ => return Err(Error::InvalidInput("--parity takes n,r".into())),
                },
                (None, None) => {
                    return Err(Error::InvalidInput("give --spec or --parity n,r".into()))
                }
            };
            write_or_print(common, &h.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        BarrierCmd::Detect {
            input,
            labels,
            search,
        } => {
            let h = read_instance(&input)?;
            let found = match (labels, search) {
                (Some(l), _) => {
                    let p = VertexPartition::from_labels(&l)?;
                    let v = detect_divisibility_barrier(&h, &p)?;
                    Some((p, v))
                }
                (None, Some(d)) => search_divisibility_barrier(&h, d)?,
                (None, None) => {
                    return Err(Error::InvalidInput("give --labels or --search".into()))
                }
            };
            let barrier = found.as_ref().is_some_and(|(_, v)| v.is_barrier());
            let value = match &found {
                Some((p, v)) => json!({"barrier": barrier, "parts": p.parts(), "verdict": v}),
                None => json!({"barrier": false}),
            };
            let text = match &found {
                Some((p, v)) if v.is_barrier() => format!("barrier at parts {:?}", p.parts()),
                _ => "no divisibility barrier found".to_string(),
            };
            emit(common, value, &text);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let json = cli.common.format == Format::Json;
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            if json {
                eprintln!(
                    "{}",
                    json!({"error": e.to_string(), "exit_code": e.exit_code()})
                );
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
