//! Command-line front end.
//!
//! Exit status: 0 success, 1 usage error, 2 invalid config or input file,
//! 3 I/O failure, 4 numerical failure or violated contract during a run,
//! 5 system too large for the exact oracle.
//!
//! `MSQITE_THREADS` caps the number of worker threads.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use msqite::driver::{self, HamiltonianSource, RunConfig};
use msqite::operators::{build_spin_operators, ModelSpec};
use msqite::oracle::ReferenceOracle;
use msqite::pool::{build_complete_pool, build_uccgsd_pool, filter_pool, Conservation};
use msqite::{Error, Result};

#[derive(Parser)]
#[command(name = "msqite", version, about = "Imaginary-time evolution on a dense statevector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolKind {
    Uccgsd,
    Complete,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a JSON run configuration.
    Run {
        config: PathBuf,
        /// Override the config's output prefix.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the config's spin-shift strength.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Exact spectrum of a Hamiltonian file, or of an inline model spec
    /// given as JSON.
    Spectrum {
        hamiltonian: String,
        /// Label eigenvalues with their total spin.
        #[arg(long)]
        s2: bool,
        #[arg(long)]
        csv: bool,
        /// Print only the lowest `n` eigenvalues.
        #[arg(long)]
        lowest: Option<usize>,
        #[arg(long, default_value_t = msqite::oracle::DEFAULT_DENSE_CEILING)]
        ceiling: usize,
    },
    /// Print the operator pool for `n_orbitals` spatial orbitals.
    Pool {
        n_orbitals: usize,
        #[arg(long, value_enum, default_value = "uccgsd")]
        kind: PoolKind,
        #[arg(long)]
        conserve_sz: bool,
        #[arg(long)]
        conserve_particle_number: bool,
    },
    /// Write a gnuplot script for a trajectory CSV to stdout.
    PlotScript {
        csv: PathBuf,
        #[arg(long)]
        png: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, output, lambda } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(o) = output {
                cfg.output = o;
            }
            if let Some(l) = lambda {
                match &mut cfg.spin_shift {
                    Some(s) => s.lambda = l,
                    None => return Err(Error::Config("--lambda needs spin_shift in the config".into())),
                }
            }
            let summary = driver::run(&cfg)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for (i, e) in summary.final_energies.iter().enumerate() {
                let err = summary
                    .oracle
                    .as_ref()
                    .and_then(|o| o.errors.get(i))
                    .map(|x| format!("  error {x:.3e}"))
                    .unwrap_or_default();
                println!("state {i}: E = {e:.10}{err}");
            }
            println!(
                "{} after {} steps (beta = {:.4}), {:.2} s",
                if summary.converged { "converged" } else { "stopped" },
                summary.steps,
                summary.beta_final,
                summary.wall_time_seconds
            );
        }
        Command::Spectrum {
            hamiltonian,
            s2,
            csv,
            lowest,
            ceiling,
        } => {
            let src = if hamiltonian.trim_start().starts_with('{') {
                let spec: ModelSpec =
                    serde_json::from_str(&hamiltonian).map_err(|e| Error::Config(e.to_string()))?;
                HamiltonianSource::Model(spec)
            } else {
                HamiltonianSource::File(PathBuf::from(hamiltonian))
            };
            let h = driver::load_hamiltonian(&src)?;
            let spin = if s2 { Some(build_spin_operators(h.n_qubits)?.s2) } else { None };
            let mut spec = ReferenceOracle::new(ceiling).exact_spectrum(&h.h, spin.as_ref())?;
            if let Some(n) = lowest {
                spec.eigenvalues.truncate(n);
                if let Some(l) = &mut spec.spin_labels {
                    l.truncate(n);
                }
            }
            if csv {
                print!("{}", spec.to_csv());
            } else {
                for (k, e) in spec.eigenvalues.iter().enumerate() {
                    match &spec.spin_labels {
                        Some(l) => println!("{k:5}  {e:20.12}  S2 = {:.6}", l[k]),
                        None => println!("{k:5}  {e:20.12}"),
                    }
                }
            }
        }
        Command::Pool {
            n_orbitals,
            kind,
            conserve_sz,
            conserve_particle_number,
        } => {
            let n = 2 * n_orbitals;
            let pool = match kind {
                PoolKind::Uccgsd => build_uccgsd_pool(n)?,
                PoolKind::Complete => build_complete_pool(n)?,
            };
            let pool = if conserve_sz || conserve_particle_number {
                filter_pool(
                    &pool,
                    Conservation {
                        sz: conserve_sz,
                        particle_number: conserve_particle_number,
                    },
                )
            } else {
                pool
            };
            print!("{}", pool.dump());
        }
        Command::PlotScript { csv, png } => {
            let text = read(&csv)?;
            let png = png.unwrap_or_else(|| csv.with_extension("png"));
            print!(
                "{}",
                driver::plot_script(&text, &csv.display().to_string(), &png.display().to_string())
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Ok(v) = std::env::var("MSQITE_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: MSQITE_THREADS must be a positive integer, got `{v}`");
                return ExitCode::from(1);
            }
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(driver::exit_code(&e) as u8)
        }
    }
}
