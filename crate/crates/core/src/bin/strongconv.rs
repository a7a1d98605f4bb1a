use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use strongconv::experiments::{emit, read_tuple, run_scenario, EmitFormat, ScenarioId, ScenarioSpec};
use strongconv::freeprob::{limit_norm, poly_moment, GeneratorFamily, LimitNormOptions};
use strongconv::ncpoly::{Monomial, NcPoly};
use strongconv::orbit::{dorb_exact_herm1, dorb_lower, dorb_upper, OrbitOptions};
use strongconv::seed::SeedSpec;

#[derive(Parser)]
#[command(name = "strongconv", version, about = "Strong convergence experiments for random matrix tuples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write record.json plus one CSV per metric table.
    Run {
        scenario: ScenarioId,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Free-probability oracles.
    Oracle {
        #[command(subcommand)]
        query: Oracle,
    },
    /// Orbit distance between two tuple files.
    Dorb {
        file_a: PathBuf,
        file_b: PathBuf,
        /// Exact value for single Hermitian matrices.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0x0b17)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Limit trace of a *-word such as "T1 T2 T1' T2'".
    Moment {
        word: String,
        #[arg(long, default_value = "semicircular")]
        gen: GeneratorFamily,
        /// Generators per tensor leg; indices above it address the second leg.
        #[arg(long)]
        r: Option<usize>,
    },
    /// Limit operator norm of a polynomial from moment extrapolation.
    Norm {
        poly: String,
        #[arg(long, default_value = "semicircular")]
        gen: GeneratorFamily,
        #[arg(long, default_value_t = 12)]
        qmax: usize,
        #[arg(long)]
        r: Option<usize>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> strongconv::Result<()> {
    match cli.command {
        Command::Run { scenario, config, seed, out } => {
            let text = match &config {
                Some(path) => fs::read_to_string(path)?,
                None => String::new(),
            };
            let spec = ScenarioSpec::from_config(scenario, seed, &text)?;
            let record = run_scenario(&spec)?;
            let mut files = emit(&record, EmitFormat::Json, &out)?;
            files.extend(emit(&record, EmitFormat::Csv, &out)?);
            for note in &record.notes {
                eprintln!("note: {note}");
            }
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Oracle { query: Oracle::Moment { word, gen, r } } => {
            let m: Monomial = word.parse()?;
            let spec = gen.spec(r.unwrap_or(m.max_index().max(1)));
            let value = poly_moment(&NcPoly::monomial(m.clone(), strongconv::C64::new(1.0, 0.0)), &spec)?;
            println!("{}", json!({ "word": m.to_string(), "re": value.re, "im": value.im }));
        }
        Command::Oracle { query: Oracle::Norm { poly, gen, qmax, r } } => {
            let p: NcPoly = poly.parse()?;
            let spec = gen.spec(r.unwrap_or(p.max_index().max(1)));
            let lim = limit_norm(&p, &spec, &LimitNormOptions::with_q_max(qmax))?;
            println!("{}", serde_json::to_string_pretty(&lim)?);
        }
        Command::Dorb { file_a, file_b, exact, restarts, seed } => {
            let a = read_tuple(&file_a)?;
            let b = read_tuple(&file_b)?;
            let out = if exact {
                if a.len() != 1 || b.len() != 1 {
                    return Err(strongconv::Error::InvalidArgument("--exact needs single-matrix tuples".into()));
                }
                json!({ "value": dorb_exact_herm1(a.get(0), b.get(0))?, "certification": "exact" })
            } else {
                let opts = OrbitOptions { restarts, seed: SeedSpec::new(seed), ..OrbitOptions::default() };
                let res = dorb_upper(&a, &b, &opts)?;
                json!({
                    "value": res.value,
                    "certification": res.certified,
                    "lower_bound": dorb_lower(&a, &b)?,
                    "restarts_used": res.restarts_used,
                })
            };
            println!("{out}");
        }
    }
    Ok(())
}
