use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use tlsim::constants::{AMU, ANGSTROM3, MBAR};
use tlsim::scenarios::{emit_report, parse_config, run_scenario, scenario_text, GasDatabase, OutputFormat};

#[derive(Parser)]
#[command(name = "tlsim", version, about = "Talbot-Lau interferometry and collisional decoherence simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a built-in scenario and write the report to stdout.
    Scenario {
        #[arg(value_parser = ["fig2", "fig4", "fig5", "table1", "table2", "fringe"])]
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the built-in gas table.
    ListGases,
}

fn execute(text: &str, output: Option<PathBuf>, format: Option<Format>, seed: Option<u64>) -> Result<(), String> {
    let mut cfg = parse_config(text).map_err(|e| format!("config error: {e}"))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let format = format.map(OutputFormat::from).unwrap_or(cfg.output);
    let report = run_scenario(&cfg).map_err(|e| e.to_string())?;
    for (k, v) in &report.summary {
        info!("{k} = {v}");
    }
    let bytes = emit_report(&report, format).map_err(|e| e.to_string())?;
    match output {
        Some(path) => fs::write(&path, bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    }
}

fn list_gases() -> Result<(), String> {
    let db = GasDatabase::builtin();
    let mut out = String::from("name,mass_amu,polarizability_A3,valence_electrons,c6_J_m6,c6_source,p0_theory_mbar,p0_experiment_mbar\n");
    for g in &db.gases {
        let (gas, src) = db.resolve(g, db.reference.temperature).map_err(|e| e.to_string())?;
        let f = |v: Option<f64>, s: f64| v.map(|x| format!("{:.3e}", x / s)).unwrap_or_default();
        out.push_str(&format!(
            "{},{:.1},{},{},{:.4e},{},{},{}\n",
            g.name,
            g.mass / AMU,
            g.polarizability.map(|a| format!("{:.4}", a / ANGSTROM3)).unwrap_or_default(),
            g.valence_electrons.map(|n| n.to_string()).unwrap_or_default(),
            gas.c6,
            src.as_str(),
            f(g.p0_theory, MBAR),
            f(g.p0_experiment, MBAR),
        ));
    }
    std::io::stdout().write_all(out.as_bytes()).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            output,
            format,
            seed,
        } => fs::read_to_string(&config)
            .map_err(|e| format!("{}: {e}", config.display()))
            .and_then(|text| execute(&text, output, format, seed)),
        Command::Scenario {
            name,
            output,
            format,
            seed,
        } => match scenario_text(&name) {
            Some(text) => execute(text, output, format, seed),
            None => Err(format!("unknown scenario {name}")),
        },
        Command::ListGases => list_gases(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
