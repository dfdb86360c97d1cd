use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sqbell::protocol::{Direction, ProtocolRecord};
use sqbell::sweep::{emit, Format};
use sqbell::{
    compare_effective, run_protocol_converged, single_qubit_check, sweep, verify_truth_tables, assemble_schedule,
    BellState, InitialCondition, RunConfig, SweepAxis, SweepSpec,
};

#[derive(Parser)]
#[command(name = "sqbell", version, about = "Nondestructive Bell-state analysis with SQUID qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Uniform coupling g (1/T); overrides the config file.
    #[arg(long)]
    g: Option<f64>,
    /// Base RK4 step (units of T).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    gamma_phi: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Output file (stdout if absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> sqbell::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(g) = self.g {
            let p = &mut cfg.params;
            (p.g23_a1, p.g24_a1, p.g23_a2, p.g24_a2, p.g_b1, p.g_b2) = (g, g, g, g, g, g);
        }
        if let Some(dt) = self.dt {
            cfg.integrator.dt = dt;
        }
        if let Some(v) = self.gamma {
            cfg.decoherence.gamma = v;
        }
        if let Some(v) = self.gamma_phi {
            cfg.decoherence.gamma_phi = v;
        }
        if let Some(v) = self.kappa {
            cfg.decoherence.kappa = v;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        cfg.params.validate()?;
        cfg.decoherence.validate()?;
        cfg.integrator.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the ten drive amplitudes over [0, 6T] as CSV.
    Pulses {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        samples_per_step: usize,
    },
    /// Run the protocol on one Bell state and print a JSON record.
    Run {
        #[arg(long)]
        state: BellState,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the coupling or one decoherence rate (rates as fractions of the peak drive).
    Sweep {
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        points: usize,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Worker threads.
        #[arg(long, env = "SQBELL_THREADS", default_value_t = 1)]
        threads: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check the truth tables and single-qubit rotations.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Compare the nine-state step model with its effective three-state chain.
    EffectiveCompare {
        /// Couplings to compare at (defaults to a few values from 5 to 100).
        #[arg(long, value_delimiter = ',')]
        g_values: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        step: u8,
        #[command(flatten)]
        common: Common,
    },
}

fn write_out(output: Option<&PathBuf>, text: &str) -> sqbell::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| sqbell::Error::Io { path: p.clone(), source: e }),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> sqbell::Result<bool> {
    match cli.command {
        Command::Pulses { common, samples_per_step } => {
            let cfg = common.resolve()?;
            let schedule = assemble_schedule(&cfg.params)?;
            let mut buf = Vec::new();
            schedule.write_csv(&mut buf, samples_per_step).expect("writing to memory");
            write_out(cfg.output.as_ref(), &String::from_utf8_lossy(&buf))?;
            Ok(true)
        }
        Command::Run { state, common } => {
            let cfg = common.resolve()?;
            let result = run_protocol_converged(&InitialCondition::Bell(state), &cfg.params, &cfg.decoherence, &cfg.integrator)?;
            let record = ProtocolRecord { params: cfg.params, decoherence: cfg.decoherence, result };
            write_out(cfg.output.as_ref(), &(record.to_json() + "\n"))?;
            Ok(true)
        }
        Command::Sweep { axis, from, to, points, format, threads, common } => {
            let cfg = common.resolve()?;
            let spec = SweepSpec {
                params: cfg.params,
                decoherence: cfg.decoherence,
                config: cfg.integrator,
                ..SweepSpec::new(axis, from, to, points)
            };
            let result = sweep(&spec, threads)?;
            match cfg.output {
                Some(p) => emit(&result, format, p)?,
                None => {
                    let text = match format {
                        Format::Csv => result.to_csv(),
                        Format::Json => result.to_json() + "\n",
                    };
                    write_out(None, &text)?;
                }
            }
            Ok(result.rows.iter().all(|r| r.error.is_none()))
        }
        Command::Verify { common } => {
            let cfg = common.resolve()?;
            let mut ok = true;
            let tables = verify_truth_tables(&cfg.params, &cfg.integrator)?;
            print!("{tables}");
            ok &= tables.all_pass();
            for d in [Direction::Forward, Direction::Inverse] {
                let r = single_qubit_check(d, &cfg.params, &cfg.integrator)?;
                print!("{r}");
                ok &= r.all_pass();
            }
            println!("{}", if ok { "all checks passed" } else { "some checks FAILED" });
            Ok(ok)
        }
        Command::EffectiveCompare { g_values, step, common } => {
            let cfg = common.resolve()?;
            let gs = if g_values.is_empty() { vec![5.0, 10.0, 20.0, 30.0, 66.0, 100.0] } else { g_values };
            let mut text = String::from("g,full_psi1,full_psi5,effective_psi1,effective_psi5,disagreement\n");
            for g in gs {
                let p = sqbell::DeviceParams { step_duration: cfg.params.step_duration, ..sqbell::DeviceParams::uniform(g) };
                let c = compare_effective(step, &p, &cfg.integrator)?;
                text += &format!(
                    "{},{},{},{},{},{}\n",
                    sqbell::sweep::fmt9(g),
                    sqbell::sweep::fmt9(c.full.0),
                    sqbell::sweep::fmt9(c.full.1),
                    sqbell::sweep::fmt9(c.effective.0),
                    sqbell::sweep::fmt9(c.effective.1),
                    sqbell::sweep::fmt9(c.disagreement())
                );
            }
            write_out(cfg.output.as_ref(), &text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
