// Copyright 2026 The epp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Command-line front end for the purification-protocol simulator.
//!
//! Subcommands: `list` (discover protocol ids), `run` (one evaluation),
//! `sweep` (grid over one parameter, written as a table), `verify`
//! (analytic-vs-engine cross-validation suite).  Numbers are printed with 12
//! significant digits; identical command + seed produces byte-identical
//! output.  Exit codes: 0 success, 1 verification failure, 2 usage error.

mod registry;

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use registry::{find, Params, RunCtx, PROTOCOLS};

#[derive(Parser)]
#[command(
    name = "epp",
    about = "Simulator for optical entanglement purification protocols",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Format {
    /// Comma-separated table with a one-line header.
    Csv,
    /// `name = value` records separated by blank lines.
    Records,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Protocol id (see `epp list`).
    #[arg(long)]
    protocol: String,
    /// Parameter override NAME=VALUE (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<std::path::PathBuf>,
    /// RNG seed for Monte Carlo protocols.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample budget for Monte Carlo protocols.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
}

#[derive(Subcommand)]
enum Command {
    /// List every runnable protocol with its parameters and columns.
    List,
    /// Evaluate one protocol at one parameter point.
    Run(CommonRunArgs),
    /// Evaluate a protocol over a parameter grid and write a table.
    Sweep {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Grid NAME:START:STOP:POINTS over one declared parameter.
        #[arg(long, value_name = "NAME:START:STOP:POINTS")]
        grid: String,
    },
    /// Run the engine-vs-analytic verification suite (exit 1 on failure).
    Verify {
        /// A single check name, or `all`.
        #[arg(long, default_value = "all")]
        protocol: String,
        /// RNG seed for the Monte Carlo check.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample budget for the Monte Carlo check.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
}

/// 12 significant digits, scientific notation — deterministic and lossless
/// enough for figure reproduction with any plotting tool.
fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn parse_params(pairs: &[String]) -> Result<Params> {
    let mut out = Params::new();
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .with_context(|| format!("--param expects NAME=VALUE, got {pair:?}"))?;
        let value: f64 = value
            .parse()
            .with_context(|| format!("parameter {name}: {value:?} is not a number"))?;
        if out.insert(name.to_string(), value).is_some() {
            bail!("parameter {name} given more than once");
        }
    }
    Ok(out)
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn render(table: &Table, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            let _ = writeln!(out, "{}", table.header.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|x| fmt12(*x)).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        Format::Records => {
            for (i, row) in table.rows.iter().enumerate() {
                if i > 0 {
                    let _ = writeln!(out);
                }
                for (name, value) in table.header.iter().zip(row) {
                    let _ = writeln!(out, "{name} = {}", fmt12(*value));
                }
            }
        }
    }
    out
}

fn emit(text: &str, out: &Option<std::path::PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .context("stdout")
        }
    }
}

fn cmd_list() -> Result<()> {
    let mut out = String::new();
    for p in PROTOCOLS {
        let params: Vec<String> = p
            .params
            .iter()
            .map(|(name, default)| format!("{name}={default}"))
            .collect();
        let _ = writeln!(
            out,
            "{:<22} {}\n{:<22}   parameters: {}; columns: {}",
            p.name,
            p.about,
            "",
            params.join(", "),
            p.columns.join(", ")
        );
    }
    print!("{out}");
    Ok(())
}

fn evaluate_row(
    protocol: &registry::Protocol,
    resolved: &Params,
    ctx: &RunCtx,
) -> Result<Vec<f64>> {
    let mut row: Vec<f64> = protocol
        .params
        .iter()
        .map(|(name, _)| resolved[*name])
        .collect();
    row.extend(protocol.eval(resolved, ctx)?);
    Ok(row)
}

fn header_of(protocol: &registry::Protocol) -> Vec<String> {
    protocol
        .params
        .iter()
        .map(|(name, _)| name.to_string())
        .chain(protocol.columns.iter().map(|c| c.to_string()))
        .collect()
}

fn cmd_run(args: &CommonRunArgs) -> Result<()> {
    let protocol = find(&args.protocol)?;
    let overrides = parse_params(&args.params)?;
    let resolved = protocol.resolve_params(&overrides)?;
    let ctx = RunCtx {
        seed: args.seed,
        samples: args.samples,
    };
    let table = Table {
        header: header_of(protocol),
        rows: vec![evaluate_row(protocol, &resolved, &ctx)?],
    };
    emit(&render(&table, args.format), &args.out)
}

fn parse_grid(spec: &str) -> Result<(String, f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        bail!("--grid expects NAME:START:STOP:POINTS, got {spec:?}");
    }
    let start: f64 = parts[1]
        .parse()
        .with_context(|| format!("grid start {:?}", parts[1]))?;
    let stop: f64 = parts[2]
        .parse()
        .with_context(|| format!("grid stop {:?}", parts[2]))?;
    let points: usize = parts[3]
        .parse()
        .with_context(|| format!("grid points {:?}", parts[3]))?;
    if points < 2 {
        bail!("grid needs at least 2 points, got {points}");
    }
    Ok((parts[0].to_string(), start, stop, points))
}

fn cmd_sweep(common: &CommonRunArgs, grid: &str) -> Result<()> {
    let protocol = find(&common.protocol)?;
    let overrides = parse_params(&common.params)?;
    let (name, start, stop, points) = parse_grid(grid)?;
    if !protocol.params.iter().any(|(p, _)| *p == name) {
        bail!(
            "protocol {} has no parameter {name:?} to sweep",
            protocol.name
        );
    }
    let base = protocol.resolve_params(&overrides)?;
    let ctx = RunCtx {
        seed: common.seed,
        samples: common.samples,
    };
    let mut rows = Vec::with_capacity(points);
    for value in epp::verify::linspace(start, stop, points) {
        let mut params = base.clone();
        params.insert(name.clone(), value);
        rows.push(evaluate_row(protocol, &params, &ctx)?);
    }
    let table = Table {
        header: header_of(protocol),
        rows,
    };
    emit(&render(&table, common.format), &common.out)
}

fn cmd_verify(protocol: &str, seed: u64, samples: u64) -> Result<bool> {
    let reports = if protocol == "all" {
        epp::verify::run_all(seed, samples).map_err(|e| anyhow::anyhow!("{e}"))?
    } else {
        vec![epp::verify::run_check(protocol, seed, samples).map_err(|e| anyhow::anyhow!("{e}"))?]
    };
    let mut all_passed = true;
    for r in &reports {
        all_passed &= r.passed;
        println!(
            "{} {:<18} max_deviation={}  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            fmt12(r.max_deviation),
            r.detail
        );
    }
    println!(
        "{}: {}/{} checks passed",
        if all_passed { "OK" } else { "FAILED" },
        reports.iter().filter(|r| r.passed).count(),
        reports.len()
    );
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::List => cmd_list().map(|()| true),
        Command::Run(args) => cmd_run(args).map(|()| true),
        Command::Sweep { common, grid } => cmd_sweep(common, grid).map(|()| true),
        Command::Verify {
            protocol,
            seed,
            samples,
        } => cmd_verify(protocol, *seed, *samples),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
