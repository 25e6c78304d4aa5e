use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use combfield::combinat::{bell_numbers, hierarchy_counts, pairing_count, stirling_first_table, stirling_second_table};
use combfield::error::Error;
use combfield::fields::FieldModel;
use combfield::ito::{
    charlier_exact, exact, exponentiated_martingale_check, hermite_convergence, iterated_moment_check,
    offdiag_poisson, offdiag_poisson_mean_check, offdiag_wiener_mean_check, sample_poisson, sample_wiener,
    MartingaleKind, StepFunction, TimeGrid,
};
use combfield::rng::StreamId;
use combfield::verify::{run_suite, Suite, SuiteReport, VerifyOptions};

/// Largest n accepted by `tables`.
const TABLE_GUARD: usize = 64;
/// Jump configurations checked exactly by `simulate charlier`.
const CHARLIER_CONFIGS: usize = 1000;

#[derive(Parser)]
#[command(name = "combfield", version, about = "Partition combinatorics, moment algebra and stochastic-integral checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a table of combinatorial numbers.
    Tables {
        kind: TableKind,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a deterministic invariant suite.
    Verify {
        suite: SuiteArg,
        /// JSON model file for the numeric field checks.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Bound on quadrature Dyson–Schwinger residuals.
        #[arg(long, default_value_t = 1e-4)]
        ds_tolerance: f64,
        /// Bound on |W″Γ″ + 1| in the Legendre check.
        #[arg(long, default_value_t = 1e-3)]
        legendre_tolerance: f64,
    },
    /// Run a seeded Monte Carlo check and print a JSON report.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    Stirling1,
    Stirling2,
    Bell,
    Hierarchies,
    Pairings,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Moments,
    Fock,
    Fields,
    Arith,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimCheck {
    Hermite,
    Charlier,
    Martingale,
    Iterated,
    ItoFock,
    Offdiag,
}

#[derive(Clone, Copy, ValueEnum)]
enum Process {
    Wiener,
    Poisson,
}

#[derive(Args)]
struct SimulateArgs {
    check: SimCheck,
    /// Falls back to CF_SEED.
    #[arg(long, env = "CF_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    /// Finest grid for `hermite`; grid for `offdiag --process wiener`.
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    z: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, value_enum, default_value_t = Process::Wiener)]
    process: Process,
    /// Step function as start:end:value segments, comma separated.
    #[arg(long, default_value = "0:1:1")]
    f: String,
    #[arg(long, default_value = "0.5:1:2")]
    g: String,
    /// Write sampled paths as CSV for debugging (`hermite`, `charlier`).
    #[arg(long)]
    dump_paths: Option<PathBuf>,
}

/// Exit status and failure message.
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Capacity { .. } | Error::Model(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tables { kind, n, format } => tables(kind, n, format),
        Command::Verify { suite, model, json, ds_tolerance, legendre_tolerance } => {
            verify(suite, model, json, ds_tolerance, legendre_tolerance)
        }
        Command::Simulate(args) => simulate(&args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn tables(kind: TableKind, n: usize, format: Format) -> Result<bool, Failure> {
    if n == 0 || n > TABLE_GUARD {
        return Err(Failure::Usage(format!("--n must lie in 1..={TABLE_GUARD}, got {n}")));
    }
    let (name, rows): (&str, Vec<Vec<BigUint>>) = match kind {
        TableKind::Stirling1 => ("stirling1", triangle(stirling_first_table(n))),
        TableKind::Stirling2 => ("stirling2", triangle(stirling_second_table(n))),
        TableKind::Bell => ("bell", vec![bell_numbers(n)]),
        TableKind::Hierarchies => ("hierarchies", vec![hierarchy_counts(n)[1..=n].to_vec()]),
        TableKind::Pairings => ("pairings", vec![(1..=n).map(|k| pairing_count(2 * k)).collect()]),
    };
    let is_triangle = matches!(kind, TableKind::Stirling1 | TableKind::Stirling2);
    let mut out = String::new();
    match format {
        Format::Text => {
            for (i, row) in rows.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                if is_triangle {
                    let _ = writeln!(out, "{:>3}: {}", i + 1, cells.join(" "));
                } else {
                    let _ = writeln!(out, "{}", cells.join(" "));
                }
            }
        }
        Format::Csv => {
            if is_triangle {
                out.push_str("n,m,value\n");
                for (i, row) in rows.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let _ = writeln!(out, "{},{},{}", i + 1, j + 1, v);
                    }
                }
            } else {
                out.push_str("n,value\n");
                for (i, v) in rows[0].iter().enumerate() {
                    let _ = writeln!(out, "{},{}", i + 1, v);
                }
            }
        }
        Format::Json => {
            let num = |v: &BigUint| -> Value { Value::Number(v.to_string().parse().expect("integer literal")) };
            let body = if is_triangle {
                json!({ "kind": name, "n": n, "rows": rows.iter().map(|r| r.iter().map(num).collect::<Vec<_>>()).collect::<Vec<_>>() })
            } else {
                json!({ "kind": name, "n": n, "values": rows[0].iter().map(num).collect::<Vec<_>>() })
            };
            out = serde_json::to_string_pretty(&body).expect("serialisable") + "\n";
        }
    }
    emit(&out);
    Ok(true)
}

/// Rows 1..=n, entries m = 1..=row.
fn triangle(table: Vec<Vec<BigUint>>) -> Vec<Vec<BigUint>> {
    table.into_iter().enumerate().skip(1).map(|(n, row)| row[1..=n].to_vec()).collect()
}

fn verify(
    suite: SuiteArg,
    model: Option<PathBuf>,
    as_json: bool,
    ds_tolerance: f64,
    legendre_tolerance: f64,
) -> Result<bool, Failure> {
    let suite = match suite {
        SuiteArg::Moments => Suite::Moments,
        SuiteArg::Fock => Suite::Fock,
        SuiteArg::Fields => Suite::Fields,
        SuiteArg::Arith => Suite::Arith,
    };
    let model = match model {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            Some(FieldModel::from_json(&text)?)
        }
        None => None,
    };
    let report = run_suite(suite, &VerifyOptions { model, ds_tolerance, legendre_tolerance });
    if as_json {
        emit(&(to_json(&report) + "\n"));
    } else {
        print_suite(&report);
    }
    Ok(report.pass)
}

fn print_suite(report: &SuiteReport) {
    let mut out = String::new();
    for c in &report.checks {
        let _ = writeln!(out, "{} {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for s in &report.skipped {
        let _ = writeln!(out, "SKIP {s}");
    }
    let _ = writeln!(out, "{}: {}", report.suite.name(), if report.pass { "all checks passed" } else { "FAILED" });
    emit(&out);
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serialisable")
}

fn parse_step_function(spec: &str) -> Result<StepFunction, Failure> {
    let bad = || Failure::Usage(format!("step function {spec:?} must be start:end:value segments"));
    let mut segs: Vec<(f64, f64, f64)> = Vec::new();
    for part in spec.split(',') {
        let v: Vec<f64> = part.split(':').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        if v.len() != 3 || !(v[0] < v[1]) {
            return Err(bad());
        }
        segs.push((v[0], v[1], v[2]));
    }
    segs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut breaks = vec![segs[0].0];
    let mut values = Vec::new();
    for (i, &(a, b, c)) in segs.iter().enumerate() {
        if i > 0 {
            let last = *breaks.last().expect("nonempty");
            if a < last {
                return Err(Failure::Usage(format!("segments of {spec:?} overlap")));
            }
            if a > last {
                values.push(0.0);
                breaks.push(a);
            }
        }
        values.push(c);
        breaks.push(b);
    }
    Ok(StepFunction::new(breaks, values)?)
}

fn simulate(a: &SimulateArgs) -> Result<bool, Failure> {
    let seed = a
        .seed
        .ok_or_else(|| Failure::Usage("a seed is required: pass --seed or set CF_SEED".into()))?;
    if a.dump_paths.is_some() && !matches!(a.check, SimCheck::Hermite | SimCheck::Charlier) {
        return Err(Failure::Usage("--dump-paths applies to hermite and charlier only".into()));
    }
    let (body, pass): (Value, bool) = match a.check {
        SimCheck::Martingale => {
            let kind = match a.process {
                Process::Wiener => MartingaleKind::Wiener { z: a.z, t: a.t },
                Process::Poisson => MartingaleKind::Poisson { z: a.z, t: a.t },
            };
            let r = exponentiated_martingale_check(&kind, a.paths, seed)?;
            (json!(r), r.pass)
        }
        SimCheck::ItoFock => {
            let kind = MartingaleKind::General { f: parse_step_function(&a.f)?, g: parse_step_function(&a.g)? };
            let r = exponentiated_martingale_check(&kind, a.paths, seed)?;
            (json!(r), r.pass)
        }
        SimCheck::Iterated => {
            let r = iterated_moment_check(a.n, a.m, a.t, a.s, a.paths, seed)?;
            (json!(r), r.pass)
        }
        SimCheck::Offdiag => {
            let r = match a.process {
                Process::Wiener => offdiag_wiener_mean_check(a.n, a.t, a.steps, a.paths, seed)?,
                Process::Poisson => offdiag_poisson_mean_check(a.n, a.t, a.paths, seed)?,
            };
            (json!(r), r.pass)
        }
        SimCheck::Hermite => {
            if a.steps % 100 != 0 {
                return Err(Failure::Usage("--steps must be a multiple of 100".into()));
            }
            let steps = [a.steps / 100, a.steps / 10, a.steps];
            let r = hermite_convergence(a.n, a.t, &steps, a.paths, seed)?;
            if let Some(path) = &a.dump_paths {
                dump_wiener(path, a, seed)?;
            }
            (json!(r), r.pass)
        }
        SimCheck::Charlier => charlier(a, seed)?,
    };
    emit(&(to_json(&body) + "\n"));
    Ok(pass)
}

/// Exact equality with the Charlier polynomial on sampled jump
/// configurations, then the zero-mean Monte Carlo check.
fn charlier(a: &SimulateArgs, seed: u64) -> Result<(Value, bool), Failure> {
    let configs = a.paths.min(CHARLIER_CONFIGS);
    let t = exact(a.t)?;
    let mut mismatches = 0;
    let mut csv = String::from("config,index,time\n");
    for i in 0..configs {
        let jumps = sample_poisson(a.t, &StreamId::new(seed, "charlier-exact", i as u64))?;
        let x = exact(jumps.count() as f64)?;
        for n in 1..=a.n {
            if offdiag_poisson(&jumps, n)? != charlier_exact(n, &x, &t)? {
                mismatches += 1;
            }
        }
        if a.dump_paths.is_some() {
            for (k, s) in jumps.jump_times().iter().enumerate() {
                let _ = writeln!(csv, "{i},{k},{s}");
            }
        }
    }
    if let Some(path) = &a.dump_paths {
        write_file(path, &csv)?;
    }
    let mean = offdiag_poisson_mean_check(a.n, a.t, a.paths, seed)?;
    let exact_pass = mismatches == 0;
    let pass = exact_pass && mean.pass;
    let body = json!({
        "check": "charlier",
        "exact_identity": { "configurations": configs, "n_max": a.n, "mismatches": mismatches, "seed": seed, "stream": "charlier-exact", "pass": exact_pass },
        "zero_mean": mean,
        "pass": pass,
    });
    Ok((body, pass))
}

/// Cumulative W on the finest grid for the first few paths of the Hermite
/// convergence run.
fn dump_wiener(path: &PathBuf, a: &SimulateArgs, seed: u64) -> Result<(), Failure> {
    let grid = TimeGrid::new(a.t, a.steps)?;
    let mut csv = String::from("path,step,t,w\n");
    for p in 0..a.paths.min(10) {
        let w = sample_wiener(grid, &StreamId::new(seed, "hermite-convergence", p as u64));
        let mut acc = 0.0;
        for (k, d) in w.increments().iter().enumerate() {
            acc += d;
            let _ = writeln!(csv, "{p},{},{},{acc}", k + 1, (k + 1) as f64 * grid.dt());
        }
    }
    write_file(path, &csv)
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}
