//! `qbc` — command-line laboratory for the steering-based bit-commitment
//! simulator: closed-form verification, honest protocol runs, attack
//! experiments, parameter planning, and grid sweeps.
//!
//! Exit codes are a stable contract: 0 success, 1 property or bound
//! violation, 2 usage or configuration error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qbc_core::adversary::{
    helstrom_attack, naive_attack, snapped_attack, steering_attack, AttackReport, DeviceModel,
    EntangledSteering, IndexRule, NaiveRedeclare, SteeringMeasurement,
};
use qbc_core::analysis::{concealing_curve, identity_suite, sweep, SecurityPlan, SweepConfig};
use qbc_core::protocol::{run_session, Bit, HonestAlice, ProtocolParams, SessionOptions};
use qbc_core::stats;
use qbc_core::DEFAULT_SEED;

const VERIFY_LADDER: [u32; 7] = [3, 4, 5, 8, 16, 32, 64];

#[derive(Parser)]
#[command(
    name = "qbc",
    version,
    about = "Simulator and verification laboratory for a steering-based quantum bit-commitment protocol"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every closed-form identity over a dimension ladder.
    Verify(VerifyArgs),
    /// Run honest commit/unveil sessions.
    Run(RunArgs),
    /// Run a cheating strategy and compare it with its bound.
    Attack(AttackArgs),
    /// Plan the register count for a target cheating probability.
    Plan(PlanArgs),
    /// Sweep the steering attack over an (n_A, s) grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Truncate the dimension ladder at this value.
    #[arg(long)]
    n_max: Option<u32>,
    /// Override every identity group's acceptance tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// Registers per session.
    #[arg(long, default_value_t = 8)]
    s: u32,
    /// Register dimension standing in for the unbounded space.
    #[arg(long, default_value_t = 256)]
    n_sim: u32,
    /// Number of sessions.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, value_enum)]
    strategy: Strategy,
    /// Attack dimension (steering and snapped strategies).
    #[arg(long, default_value_t = 8)]
    n_a: u32,
    /// Registers per session.
    #[arg(long, default_value_t = 4)]
    s: u32,
    /// The bit the attacker tries to unveil.
    #[arg(long, default_value_t = 1)]
    target_b: u8,
    /// Device precision: smallest resolvable squared-overlap gap.
    #[arg(long, default_value_t = 1e-9)]
    delta: f64,
    #[arg(long, default_value_t = 256)]
    n_sim: u32,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct PlanArgs {
    /// Target upper bound on Alice's cheating probability.
    #[arg(long)]
    p_max: f64,
    /// Largest attack dimension the adversary's devices resolve.
    #[arg(long, conflicts_with = "delta")]
    n_a_max: Option<u32>,
    /// Device precision to derive the attack dimension from.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Attack dimensions, comma separated.
    #[arg(long = "n-a", value_delimiter = ',', default_values_t = [4u32, 8, 16])]
    n_a: Vec<u32>,
    /// Register counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 4, 8])]
    s: Vec<u32>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 256)]
    n_sim: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Naive,
    Steering,
    Snapped,
    Helstrom,
}

/// A run that finished but found something out of contract (exit 1), versus
/// a run that could not be configured (exit 2).
enum Failure {
    Property(String),
    Config(String),
}

impl Failure {
    fn config(err: impl std::fmt::Display) -> Self {
        Failure::Config(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Run(args) => cmd_run(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Plan(args) => cmd_plan(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let ladder: Vec<u32> = match args.n_max {
        Some(n_max) => {
            if n_max < 3 {
                return Err(Failure::Config(format!(
                    "--n-max must be at least 3 (got {n_max})"
                )));
            }
            VERIFY_LADDER
                .iter()
                .copied()
                .filter(|&n| n <= n_max)
                .collect()
        }
        None => VERIFY_LADDER.to_vec(),
    };
    if let Some(t) = args.tolerance {
        if t <= 0.0 || !t.is_finite() {
            return Err(Failure::Config(format!(
                "--tolerance must be positive (got {t})"
            )));
        }
    }
    println!("identity ladder: {ladder:?}");
    let reports = identity_suite(&ladder, args.tolerance).map_err(Failure::config)?;
    let mut all_pass = true;
    for r in &reports {
        let status = if r.pass() { "ok" } else { "FAIL" };
        println!(
            "{status:4} {:32} max error {:10.3e}  (tolerance {:.1e})",
            r.name, r.max_error, r.tolerance
        );
        all_pass &= r.pass();
    }
    // The concealing curve cross-check rides along: closed form vs brute
    // force at every ladder point.
    let curve = concealing_curve(&ladder).map_err(Failure::config)?;
    println!("concealing curve: n -> (trace distance, guess success)");
    for p in &curve {
        println!(
            "  {:4} -> ({:.6}, {:.6})",
            p.n, p.trace_distance, p.helstrom_success
        );
    }
    if all_pass {
        println!("all {} identity groups within tolerance", reports.len());
        Ok(())
    } else {
        Err(Failure::Property(
            "one or more identity groups out of tolerance".into(),
        ))
    }
}

#[derive(serde::Serialize)]
struct SessionSummary {
    stream: u64,
    b: u8,
    accepted: bool,
    first_failure: Option<u32>,
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let params = ProtocolParams::new(args.s, args.n_sim, args.seed).map_err(Failure::config)?;
    let mut summaries = Vec::with_capacity(args.trials as usize);
    let mut acceptances = 0u64;
    for stream in 0..args.trials {
        let b = if stream % 2 == 0 { Bit::Zero } else { Bit::One };
        let mut alice = HonestAlice::new(params, b);
        let transcript = run_session(&params, stream, &mut alice, &SessionOptions::default())
            .map_err(Failure::config)?;
        acceptances += transcript.verdict.accept as u64;
        summaries.push(SessionSummary {
            stream,
            b: b.as_u8(),
            accepted: transcript.verdict.accept,
            first_failure: transcript.verdict.first_failure,
        });
    }
    println!(
        "honest sessions: accepted {acceptances}/{} (s = {}, n_sim = {}, seed = {})",
        args.trials, args.s, args.n_sim, args.seed
    );
    if let Some(path) = &args.out {
        let content = match args.format {
            Format::Json => serde_json::json!({
                "meta": {
                    "s": args.s,
                    "n_sim": args.n_sim,
                    "trials": args.trials,
                    "seed": args.seed,
                    "acceptances": acceptances,
                },
                "sessions": summaries,
            })
            .to_string(),
            Format::Csv => {
                let mut out = String::from("stream,b,accepted,first_failure\n");
                for s in &summaries {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        s.stream,
                        s.b,
                        s.accepted,
                        s.first_failure.map_or(String::new(), |j| j.to_string())
                    ));
                }
                out
            }
        };
        write_output(path, &content)?;
    }
    if acceptances == args.trials {
        Ok(())
    } else {
        Err(Failure::Property(format!(
            "honest acceptance {acceptances}/{} below 1",
            args.trials
        )))
    }
}

fn parse_bit(value: u8) -> Result<Bit, Failure> {
    match value {
        0 => Ok(Bit::Zero),
        1 => Ok(Bit::One),
        other => Err(Failure::Config(format!(
            "--target-b must be 0 or 1 (got {other})"
        ))),
    }
}

fn cmd_attack(args: AttackArgs) -> Result<(), Failure> {
    let params = ProtocolParams::new(args.s, args.n_sim, args.seed).map_err(Failure::config)?;
    let target_b = parse_bit(args.target_b)?;
    match args.strategy {
        Strategy::Helstrom => {
            let report =
                helstrom_attack(args.n_sim, args.trials, args.seed).map_err(Failure::config)?;
            println!(
                "helstrom: success {}/{} = {:.6} (expected {:.6} ± {:.6})",
                report.correct,
                report.trials,
                report.success_rate,
                report.expected,
                report.ci_half_width
            );
            if let Some(path) = &args.out {
                write_report(path, args.format, &report, |r| {
                    format!(
                        "n_sim,trials,correct,success_rate,expected,ci_half_width,seed\n{},{},{},{},{},{},{}\n",
                        r.n_sim, r.trials, r.correct, r.success_rate, r.expected, r.ci_half_width, r.master_seed
                    )
                })?;
            }
            let margin = stats::sigma_margin(report.expected, report.trials, stats::FIVE_SIGMA);
            if (report.success_rate - report.expected).abs() <= margin {
                Ok(())
            } else {
                Err(Failure::Property(format!(
                    "helstrom success {:.6} deviates from {:.6} beyond {:.6}",
                    report.success_rate, report.expected, margin
                )))
            }
        }
        Strategy::Naive => {
            let cfg = NaiveRedeclare {
                committed_b: target_b.flip(),
                announce_b: target_b,
                index_rule: IndexRule::Shifted,
            };
            let report = naive_attack(&params, &cfg, args.trials).map_err(Failure::config)?;
            finish_attack(&args, report)
        }
        Strategy::Steering | Strategy::Snapped => {
            let device = DeviceModel::new(args.delta).map_err(Failure::config)?;
            let cfg = EntangledSteering {
                n_a: args.n_a,
                target_b,
                measurement: SteeringMeasurement::Pgm,
                device,
            };
            let report = match args.strategy {
                Strategy::Steering => {
                    steering_attack(&params, &cfg, args.trials).map_err(Failure::config)?
                }
                _ => snapped_attack(&params, &cfg, args.trials).map_err(Failure::config)?,
            };
            finish_attack(&args, report)
        }
    }
}

fn finish_attack(args: &AttackArgs, report: AttackReport) -> Result<(), Failure> {
    println!(
        "{}: acceptance {}/{} = {:.6} vs bound {:.6} (+{:.6})",
        report.strategy,
        report.acceptances,
        report.trials,
        report.acceptance_rate,
        report.bound,
        report.ci_half_width
    );
    if report.registers > 0 {
        println!(
            "uniform-component hits: {}/{} = {:.6}",
            report.phi_n_minus_hits,
            report.registers,
            report.phi_n_minus_hits as f64 / report.registers as f64
        );
    }
    if let Some(path) = &args.out {
        write_report(path, args.format, &report, |r| {
            format!(
                "strategy,n_a,s,n_sim,target_b,trials,acceptances,acceptance_rate,registers,phi_n_minus_hits,bound,ci_half_width,seed\n{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.strategy,
                r.n_a.map_or(String::new(), |v| v.to_string()),
                r.s,
                r.n_sim,
                r.target_b.map_or(String::new(), |v| v.to_string()),
                r.trials,
                r.acceptances,
                r.acceptance_rate,
                r.registers,
                r.phi_n_minus_hits,
                r.bound,
                r.ci_half_width,
                r.master_seed
            )
        })?;
    }
    if report.within_bound() {
        Ok(())
    } else {
        Err(Failure::Property(format!(
            "acceptance rate {:.6} exceeds bound {:.6} + {:.6}",
            report.acceptance_rate, report.bound, report.ci_half_width
        )))
    }
}

fn cmd_plan(args: PlanArgs) -> Result<(), Failure> {
    let plan = match (args.n_a_max, args.delta) {
        (Some(n_a_max), None) => {
            SecurityPlan::from_n_a_max(args.p_max, n_a_max).map_err(Failure::config)?
        }
        (None, Some(delta)) => {
            let device = DeviceModel::new(delta).map_err(Failure::config)?;
            SecurityPlan::from_device(args.p_max, &device).map_err(Failure::config)?
        }
        _ => {
            return Err(Failure::Config(
                "provide exactly one of --n-a-max or --delta".into(),
            ))
        }
    };
    println!("n_a_max: {}", plan.n_a_max);
    println!("s_required: {}", plan.s_required);
    println!("p_a_max: {}", plan.p_a_max);
    if let Some(delta) = plan.delta {
        println!("delta: {delta}");
    }
    if plan.invariant_holds() {
        Ok(())
    } else {
        Err(Failure::Property(format!(
            "plan violates its boundary invariant: {plan:?}"
        )))
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let cfg = SweepConfig {
        n_a_values: args.n_a.clone(),
        s_values: args.s.clone(),
        trials: args.trials,
        n_sim: args.n_sim,
        master_seed: args.seed,
    };
    let table = sweep(&cfg).map_err(Failure::config)?;
    let content = match args.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json().to_string(),
    };
    match &args.out {
        Some(path) => write_output(path, &content)?,
        None => print!("{content}"),
    }
    println!(
        "sweep: {} cells, {} failures, bounds {}",
        table.rows.len(),
        table.failures.len(),
        if table.within_bounds() {
            "hold"
        } else {
            "VIOLATED"
        }
    );
    if !table.failures.is_empty() {
        return Err(Failure::Config(format!(
            "{} grid cells failed to run: first = (n_a={}, s={}): {}",
            table.failures.len(),
            table.failures[0].n_a,
            table.failures[0].s,
            table.failures[0].error
        )));
    }
    if table.within_bounds() {
        Ok(())
    } else {
        Err(Failure::Property("a sweep row exceeds its bound".into()))
    }
}

fn write_output(path: &PathBuf, content: &str) -> Result<(), Failure> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(content.as_bytes())
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn write_report<R: serde::Serialize>(
    path: &PathBuf,
    format: Format,
    report: &R,
    to_csv: impl Fn(&R) -> String,
) -> Result<(), Failure> {
    let content = match format {
        Format::Json => {
            serde_json::to_string_pretty(report).map_err(|e| Failure::Config(e.to_string()))?
        }
        Format::Csv => to_csv(report),
    };
    write_output(path, &content)
}
