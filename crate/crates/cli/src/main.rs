//! `lfun`: configuration-driven front end for the L-functional toolkit.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::json;

use commands::CommandError;
use config::{Config, ValidationError};
use output::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Equilibrium,
    Evolve,
    Propagator,
    Ggreen,
    Poles,
    Inclusive,
    Selfcheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Evolve => "evolve",
            Command::Propagator => "propagator",
            Command::Ggreen => "ggreen",
            Command::Poles => "poles",
            Command::Inclusive => "inclusive",
            Command::Selfcheck => "selfcheck",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lfun", version, about = "L-functional bosonic dynamics toolkit")]
struct Cli {
    command: Command,
    /// TOML run configuration (optional for selfcheck).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for JSON, CSV and SVG output; JSON goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
}

const EXIT_MODULE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;

fn fail(kind: &str, variant: Option<String>, message: String, code: u8) -> ExitCode {
    let record = json!({ "error": { "kind": kind, "variant": variant, "message": message } });
    eprintln!("{record}");
    ExitCode::from(code)
}

fn variant_name(e: &lfun_core::Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

fn load(path: &PathBuf) -> Result<Config, ValidationError> {
    let text = std::fs::read_to_string(path).map_err(|e| ValidationError(format!("{}: {e}", path.display())))?;
    Config::parse(&text)
}

fn print_selfcheck(report: &Report) {
    let t = &report.tables[0];
    println!("{:<28} {:>12} {:>10}  status", "check", "value", "tolerance");
    for r in &t.rows {
        println!("{:<28} {:>12.3e} {:>10.1e}  {}", r[0].render(), as_f64(&r[1]), as_f64(&r[2]), r[3].render());
    }
}

fn as_f64(c: &output::Cell) -> f64 {
    match c {
        output::Cell::Float(x) => *x,
        output::Cell::Int(i) => *i as f64,
        output::Cell::Text(_) => f64::NAN,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();

    let config = match (&cli.config, cli.command) {
        (Some(p), _) => match load(p) {
            Ok(c) => Some(c),
            Err(e) => return fail("validation", None, e.0, EXIT_VALIDATION),
        },
        (None, Command::Selfcheck) => None,
        (None, _) => return fail("validation", None, "--config is required".into(), EXIT_VALIDATION),
    };

    let mut all_passed = true;
    let result = match (cli.command, &config) {
        (Command::Selfcheck, _) => {
            let (r, ok) = commands::selfcheck();
            all_passed = ok;
            Ok(r)
        }
        (cmd, Some(c)) => match cmd {
            Command::Equilibrium => commands::equilibrium(c),
            Command::Evolve => commands::evolve(c),
            Command::Propagator => commands::propagator(c),
            Command::Ggreen => commands::ggreen(c),
            Command::Poles => commands::poles(c),
            Command::Inclusive => commands::inclusive(c),
            Command::Selfcheck => unreachable!(),
        },
        (_, None) => unreachable!("config checked above"),
    };
    let report = match result {
        Ok(r) => r,
        Err(CommandError::Validation(e)) => return fail("validation", None, e.0, EXIT_VALIDATION),
        Err(CommandError::Module(e)) => return fail("module", Some(variant_name(&e)), e.to_string(), EXIT_MODULE),
    };

    let env = output::envelope(config.as_ref(), cli.command.name(), &report, start.elapsed().as_secs_f64());
    let written = match &cli.out {
        Some(dir) => output::write_all(dir, cli.command.name(), &env, &report, cli.plot),
        None => {
            if cli.command != Command::Selfcheck {
                println!("{}", serde_json::to_string_pretty(&env).expect("json"));
            }
            if cli.plot {
                output::write_plots(&PathBuf::from("."), &report)
            } else {
                Ok(())
            }
        }
    };
    if let Err(e) = written {
        return fail("io", None, e.to_string(), EXIT_MODULE);
    }
    if cli.command == Command::Selfcheck {
        print_selfcheck(&report);
        if !all_passed {
            return ExitCode::from(EXIT_MODULE);
        }
    }
    ExitCode::SUCCESS
}
