use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dispersive_amr::config::RunConfig;
use dispersive_amr::driver::Simulation;
use dispersive_amr::io::{list_frames, parse_frame};
use dispersive_amr::plot::render_svg;
use dispersive_amr::validation::{convergence, run_suite, SUITES};
use dispersive_amr::Error;

#[derive(Parser)]
#[command(name = "bouss1d", version, about = "1D dispersive tsunami solver with adaptive mesh refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured scenario, writing frames, gauges and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run validation suites ("all" or one of the suite names).
    Validate {
        #[arg(default_value = "all")]
        suite: String,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Observed order of a scenario from successive grid doublings.
    Convergence {
        #[arg(default_value = "periodic_linear_wave")]
        scenario: String,
        /// Comma-separated base cell counts.
        #[arg(long, default_value = "64,128,256")]
        cells: String,
        /// Optional config whose keys override the scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Minimum order for a zero exit status.
        #[arg(long, default_value_t = 1.8)]
        min_order: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Render every frame in a run directory to SVG.
    Plot {
        /// Run directory holding frame files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Fixed vertical range, "lo,hi".
        #[arg(long)]
        range: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Validation(String),
    Solver(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_config(path: &PathBuf) -> Result<RunConfig, Error> {
    RunConfig::from_file(path).map_err(|e| match e {
        Error::Io(io) => Error::config("config", format!("{}: {io}", path.display())),
        other => other,
    })
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { config, out, common } => {
            let cfg = read_config(&config)?;
            let mut sim = Simulation::new(cfg)?;
            let manifest = sim.run(Some(&out))?;
            if !common.quiet {
                println!(
                    "{} steps to t = {} s, {} frame files, relative mass change {:.3e}",
                    manifest.steps,
                    manifest.t_reached,
                    manifest.frames.len(),
                    manifest.mass_relative_change
                );
            }
            Ok(())
        }
        Command::Validate { suite, out, common } => {
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let mut text = String::new();
            let mut failed = Vec::new();
            for name in names {
                let rep = run_suite(name)?;
                if !common.quiet {
                    print!("{}", rep.render());
                }
                text.push_str(&rep.render());
                if !rep.passed {
                    failed.push(name.to_string());
                }
            }
            if let Some(path) = out {
                std::fs::write(&path, text).map_err(Error::from)?;
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Validation(failed.join(", ")))
            }
        }
        Command::Convergence {
            scenario,
            cells,
            config,
            min_order,
            common,
        } => {
            let cells: Vec<usize> = cells
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::config("cells", "expected comma-separated integers"))?;
            let overrides = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
                    text.lines()
                        .filter(|l| !l.trim_start().starts_with("scenario"))
                        .map(|l| format!("{l}\n"))
                        .collect()
                }
                None => String::new(),
            };
            let rep = convergence(&scenario, &cells, &overrides)?;
            if !common.quiet {
                print!("{}", rep.render());
            }
            let worst = rep.orders.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= min_order {
                Ok(())
            } else {
                Err(Failure::Validation(format!("observed order {worst:.3} below {min_order}")))
            }
        }
        Command::Plot { out, range, common } => {
            let range = match range {
                Some(r) => {
                    let (a, b) = r
                        .split_once(',')
                        .ok_or_else(|| Error::config("range", "expected lo,hi"))?;
                    let lo = a.trim().parse().map_err(|_| Error::config("range", "bad lower bound"))?;
                    let hi = b.trim().parse().map_err(|_| Error::config("range", "bad upper bound"))?;
                    Some((lo, hi))
                }
                None => None,
            };
            let frames = list_frames(&out)?;
            if frames.is_empty() {
                return Err(Error::config("out", format!("no frame files in {}", out.display())).into());
            }
            for (index, paths) in frames {
                let mut parsed = Vec::new();
                for p in &paths {
                    let text = std::fs::read_to_string(p).map_err(Error::from)?;
                    parsed.push(parse_frame(&text)?);
                }
                let t = parsed.first().map_or(0.0, |f| f.t);
                let svg = render_svg(&parsed, range, &format!("t = {t:.3} s"));
                let path = out.join(format!("plot_{index:05}.svg"));
                std::fs::write(&path, svg).map_err(Error::from)?;
                if !common.quiet {
                    println!("{}", path.display());
                }
            }
            Ok(())
        }
    }
}
