use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uswb::adapt::{solve_instance, ProblemInstance};
use uswb::config::{validate_config, ScenarioConfig};
use uswb::netsim::{generate_topology, run, write_events_csv};
use uswb::phy::{build_ber_table, BerTable, LinkModel, Scheme, TableEstimator, TableGrid};
use uswb::reproduce::{reproduce, ReproduceOptions, FIGURES};
use uswb::{Error, Result};

#[derive(Parser)]
#[command(name = "uswb", version, about = "Ultrasonic wideband intra-body network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the arm-section wave experiment and write the sink series and
    /// extracted impulse response.
    Wave {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Estimate a BER table over the full (scheme, K, N_h, N_s) grid.
    BerTable {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Chip windows per (scheme, N_h, K) point.
        #[arg(long, default_value_t = 1_000_000)]
        chips: u64,
        /// Use bit-counting Monte Carlo with this many bits per point instead.
        #[arg(long)]
        bits: Option<u64>,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "ber_table.csv")]
        out: PathBuf,
    },
    /// Solve one adaptation instance and print the chosen pair as CSV.
    Solve {
        instance: PathBuf,
        /// BER table consulted when the instance names a table slice.
        #[arg(long)]
        ber_table: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the network simulation of a scenario.
    Simulate {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        ber_table: Option<PathBuf>,
        /// Output directory; overrides the scenario's.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full event log.
        #[arg(long)]
        events: bool,
    },
    /// Regenerate the data behind one figure or table.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
        figure: String,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn scenario(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => validate_config(p),
        None => Ok(ScenarioConfig::bundled()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::File { path: dir.into(), source: e })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::File { path: path.into(), source: e })
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Wave { scenario: s, out } => {
            let cfg = scenario(s.as_deref())?;
            let opts = ReproduceOptions {
                wave: cfg.wave.experiment(),
                ..ReproduceOptions::new(out, cfg.seed)
            };
            report(&reproduce("fig1", &opts)?);
        }
        Command::BerTable { scenario: s, chips, bits, k_max, seed, out } => {
            let cfg = scenario(s.as_deref())?;
            let model = LinkModel { phy: cfg.phy.clone(), ..LinkModel::arm_default() };
            let c = cfg.constraints();
            let grid = TableGrid::full(&Scheme::ALL, c.n_h_max, c.n_s_max, k_max);
            let estimator = match bits {
                Some(trials) => TableEstimator::BitLevel { trials },
                None => TableEstimator::ChipLevel { chips },
            };
            let table = build_ber_table(&model, &grid, estimator, seed.unwrap_or(cfg.seed))?;
            table.save(&out)?;
            report(&[out]);
        }
        Command::Solve { instance, ber_table, out } => {
            let inst = ProblemInstance::load(&instance)?;
            let table = match (&inst.table, ber_table) {
                (None, _) => None,
                (Some(_), Some(p)) => Some(BerTable::load(&p)?),
                (Some(_), None) => Some(BerTable::bundled()),
            };
            let sol = solve_instance(&inst, table.as_ref())?;
            match out {
                Some(p) => {
                    sol.write_csv(create(&p)?)?;
                    report(&[p]);
                }
                None => sol.write_csv(std::io::stdout().lock())?,
            }
        }
        Command::Simulate { scenario: s, seed, ber_table, out, events } => {
            let mut cfg = scenario(s.as_deref())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(p) = ber_table {
                cfg.ber_table = Some(p);
                let diags = cfg.diagnostics();
                if let Some(d) = diags.first() {
                    return Err(Error::Config { location: d.location.clone(), message: d.message.clone() });
                }
            }
            let table = cfg.ber_table()?;
            let sim = cfg.sim_config();
            let topo = generate_topology(&cfg.topology, cfg.seed)?;
            let output = run(&topo, &sim, &table, cfg.seed)?;
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let mut written = vec![dir.join("metrics.csv"), dir.join("trace.csv"), dir.join("summary.csv")];
            output.metrics.write_metrics_csv(create(&written[0])?)?;
            output.metrics.write_trace_csv(create(&written[1])?)?;
            output.metrics.write_summary_csv(create(&written[2])?)?;
            if events || cfg.output.events {
                let p = dir.join("events.csv");
                write_events_csv(&output.log, create(&p)?)?;
                written.push(p);
            }
            report(&written);
        }
        Command::Reproduce { figure, scenario: s, out } => {
            let cfg = scenario(s.as_deref())?;
            let opts = ReproduceOptions {
                table: cfg.ber_table()?,
                sim: cfg.sim_config(),
                topology: cfg.topology.clone(),
                wave: cfg.wave.experiment(),
                ..ReproduceOptions::new(out, cfg.seed)
            };
            report(&reproduce(&figure, &opts)?);
        }
    }
    Ok(())
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
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
