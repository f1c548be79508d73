use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use imdpa::abstraction::{
    build_interval_abstraction, build_standard_abstraction, imdpa_to_mdpa,
};
use imdpa::engine::{check_lmc, check_mdpa, compare_abstractions, CheckResult};
use imdpa::format::{
    comparison_to_csv, fmt_sig, imdpa_to_json, lumped_to_json, mdpa_to_json, parse_imdpa,
    parse_mdpa, parse_model,
};
use imdpa::model::partition_by_labels;
use imdpa::pctl::parse_formula;

#[derive(Parser)]
#[command(
    name = "imdpa",
    version,
    about = "Abstraction and probabilistic model checking for labelled Markov chains"
)]
struct Cli {
    /// Suppress informational output on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model file of any supported kind and print a summary.
    Validate { model: PathBuf },
    /// Build an abstraction and emit it as JSON.
    Abstract {
        model: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Representative state per block, comma separated, any order.
        #[arg(long, value_delimiter = ',')]
        representatives: Option<Vec<String>>,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a formula and print the value or verdict.
    Check {
        model: PathBuf,
        formula: String,
        /// State (or block) to report; defaults to the initial one.
        #[arg(long)]
        state: Option<String>,
        #[arg(long, value_enum, default_value = "lmc")]
        model_kind: ModelKind,
        /// Exit nonzero unless the verdict matches.
        #[arg(long, value_enum)]
        assert: Option<Expect>,
    },
    /// Sweep the step bound K through a path template and tabulate
    /// concrete against abstract values as CSV.
    Compare {
        model: PathBuf,
        /// Path formula with K as the step placeholder, e.g. 'G<=K !"c"'.
        #[arg(long)]
        formula_template: String,
        /// Inclusive range of step bounds, e.g. 1..20.
        #[arg(long, value_parser = parse_k_range)]
        k: RangeInclusive<u32>,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Standard,
    Imdp,
    Mdpa,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Lmc,
    Mdpa,
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Sat,
    Unsat,
}

fn parse_k_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected an inclusive range like 1..20, got `{s}`"))?;
    let a: u32 = a.trim().parse().map_err(|_| format!("bad range start `{a}`"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("bad range end `{b}`"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..=b)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(output: Option<&Path>, content: &str, summary: &str, quiet: bool) -> Result<(), String> {
    match output {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| format!("{}: {e}", path.display()))?;
            if !quiet {
                eprintln!("{summary}");
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Validate { model } => {
            let text = read(&model)?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| e.to_string())?;
            if value.get("interval_rows").is_some() {
                let imdpa = parse_imdpa(&text).map_err(|e| e.to_string())?;
                println!(
                    "valid interval quotient: {} blocks, xi_max = {}",
                    imdpa.n_blocks(),
                    fmt_sig(imdpa.xi_max())
                );
            } else if value.get("actions").is_some() {
                let mdpa = parse_mdpa(&text).map_err(|e| e.to_string())?;
                let total: usize = mdpa.actions().iter().map(|a| a.len()).sum();
                println!(
                    "valid vertex quotient: {} blocks, {} actions, xi_max = {}",
                    mdpa.n_blocks(),
                    total,
                    fmt_sig(mdpa.xi_max())
                );
            } else {
                let chain = parse_model(&text).map_err(|e| e.to_string())?;
                let partition = partition_by_labels(&chain);
                println!(
                    "valid chain: {} states, {} label blocks, initial {}",
                    chain.n_states(),
                    partition.n_blocks(),
                    chain.initial_state()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Abstract { model, method, representatives, output } => {
            let chain = parse_model(&read(&model)?).map_err(|e| e.to_string())?;
            let partition = partition_by_labels(&chain);
            if representatives.is_some() && !matches!(method, Method::Standard) {
                return Err("--representatives applies only to --method standard".into());
            }
            let (content, summary) = match method {
                Method::Standard => {
                    let lumped = build_standard_abstraction(
                        &chain,
                        &partition,
                        representatives.as_deref(),
                    )
                    .map_err(|e| e.to_string())?;
                    let summary = format!(
                        "epsilon = {}, representatives = {}",
                        fmt_sig(lumped.epsilon()),
                        lumped.representatives().join(",")
                    );
                    (lumped_to_json(&lumped), summary)
                }
                Method::Imdp => {
                    let imdpa =
                        build_interval_abstraction(&chain, &partition).map_err(|e| e.to_string())?;
                    let xi: Vec<String> = imdpa.xi().iter().map(|&x| fmt_sig(x)).collect();
                    let summary = format!(
                        "xi = [{}], xi_max = {}",
                        xi.join(", "),
                        fmt_sig(imdpa.xi_max())
                    );
                    (imdpa_to_json(&imdpa), summary)
                }
                Method::Mdpa => {
                    let imdpa =
                        build_interval_abstraction(&chain, &partition).map_err(|e| e.to_string())?;
                    let mdpa = imdpa_to_mdpa(&imdpa).map_err(|e| e.to_string())?;
                    let counts: Vec<String> =
                        mdpa.actions().iter().map(|a| a.len().to_string()).collect();
                    let summary = format!(
                        "actions per block = [{}], xi_max = {}",
                        counts.join(", "),
                        fmt_sig(mdpa.xi_max())
                    );
                    (mdpa_to_json(&mdpa), summary)
                }
            };
            emit(output.as_deref(), &content, &summary, cli.quiet)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { model, formula, state, model_kind, assert } => {
            let parsed = parse_formula(&formula).map_err(|e| e.to_string())?;
            let text = read(&model)?;
            let (result, idx): (CheckResult, usize) = match model_kind {
                ModelKind::Lmc => {
                    let chain = parse_model(&text).map_err(|e| e.to_string())?;
                    let idx = match &state {
                        Some(id) => chain.state_index(id).map_err(|e| e.to_string())?,
                        None => chain.initial_index(),
                    };
                    (check_lmc(&chain, &parsed).map_err(|e| e.to_string())?, idx)
                }
                ModelKind::Mdpa => {
                    let mdpa = parse_mdpa(&text).map_err(|e| e.to_string())?;
                    let idx = match &state {
                        Some(id) => mdpa.block_index(id).map_err(|e| e.to_string())?,
                        None => mdpa.initial_block(),
                    };
                    (check_mdpa(&mdpa, &parsed).map_err(|e| e.to_string())?, idx)
                }
            };
            if let Some(bound) = &result.error_bound {
                if !cli.quiet {
                    let k = match bound.k {
                        Some(k) => k.to_string(),
                        None => "unbounded".to_string(),
                    };
                    eprintln!(
                        "error bound: xi = {}, k = {}, eps_k = {}, eps_max = {}",
                        fmt_sig(bound.xi),
                        k,
                        fmt_sig(bound.eps_k),
                        fmt_sig(bound.eps_max)
                    );
                    if let Some(policy) = &result.policy {
                        eprintln!("policy: {policy:?}");
                    }
                }
                if bound.vacuous {
                    eprintln!("warning: propagated error bound is vacuous (eps >= 1)");
                }
            }
            match &result.values {
                Some(values) => {
                    println!("{}", fmt_sig(values[idx]));
                    if assert.is_some() {
                        return Err("--assert applies to threshold formulas, not queries".into());
                    }
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    let sat = result.sat_set[idx];
                    println!("{}", if sat { "sat" } else { "unsat" });
                    match assert {
                        Some(expect) if matches!(expect, Expect::Sat) != sat => {
                            Ok(ExitCode::from(1))
                        }
                        _ => Ok(ExitCode::SUCCESS),
                    }
                }
            }
        }
        Command::Compare { model, formula_template, k, output } => {
            let chain = parse_model(&read(&model)?).map_err(|e| e.to_string())?;
            let partition = partition_by_labels(&chain);
            let table = compare_abstractions(&chain, &partition, &formula_template, k)
                .map_err(|e| e.to_string())?;
            let csv = comparison_to_csv(&table);
            let summary = format!("{} rows", table.rows.len());
            emit(output.as_deref(), &csv, &summary, cli.quiet)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
