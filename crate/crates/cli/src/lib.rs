//! `noma-lab`: lattices, constellations, distance sweeps and SER simulation
//! from the command line.

pub mod commands;
pub mod error;
pub mod output;
pub mod reproduce;
pub mod settings;
pub mod svg;

use std::ffi::OsString;
use std::path::Path;

use clap::{value_parser, Arg, ArgMatches, Command};

pub use error::CliError;
use settings::{flag_name, keys_for, load_config, Settings, Source, COMMANDS};

const ABOUT: &[(&str, &str)] = &[
    (
        "lattice",
        "Print the rotated Z^n generator matrix of a cyclotomic field",
    ),
    ("constellation", "Dump a composite constellation as CSV"),
    (
        "dpmin-sweep",
        "Exact and bounded minimum product distance over an alpha grid",
    ),
    (
        "mindet-sweep",
        "Alamouti minimum determinant over an alpha grid",
    ),
    (
        "ser-sim",
        "Monte Carlo symbol error rate over block Rayleigh fading",
    ),
    (
        "reproduce",
        "Run a packaged experiment and print PASS/FAIL verdicts",
    ),
];

pub fn cli() -> Command {
    let mut cmd = Command::new("noma-lab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Algebraic-rotation NOMA constellations: construction, distances, SER")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .global(true)
                .help("key=value config file with one [section] per subcommand"),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .value_name("N")
                .env("NOMA_LAB_THREADS")
                .global(true)
                .value_parser(value_parser!(u32).range(1..))
                .help("worker threads"),
        );
    for (name, about) in ABOUT {
        let mut sub = Command::new(*name).about(*about);
        sub = match *name {
            "constellation" => sub.arg(
                Arg::new("action")
                    .value_parser(["dump"])
                    .default_value("dump")
                    .help("what to do with the constellation"),
            ),
            "reproduce" => sub.arg(
                Arg::new("figure")
                    .required(true)
                    .help("fig7 | fig8-9 | fig12-13 | mindet-table"),
            ),
            _ => sub,
        };
        for key in keys_for(name).expect("table") {
            let help = if key.default.is_empty() {
                key.help.to_string()
            } else {
                format!("{} [default: {}]", key.help, key.default)
            };
            sub = sub.arg(
                Arg::new(key.name)
                    .long(flag_name(key.name))
                    .value_name("VALUE")
                    .help(help),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// Effective settings of a parsed subcommand: defaults, then the config file
/// section, then flags.
pub fn settings_from(
    name: &str,
    sub: &ArgMatches,
    config: Option<&str>,
) -> Result<Settings, CliError> {
    let command = COMMANDS
        .iter()
        .copied()
        .find(|c| *c == name)
        .expect("known subcommand");
    let mut s = Settings::new(command);
    if let Some(path) = config {
        for (k, v) in load_config(Path::new(path), command)? {
            s.set(&k, &v, Source::File)?;
        }
    }
    for key in keys_for(command).expect("table") {
        if let Some(v) = sub.get_one::<String>(key.name) {
            s.set(key.name, v, Source::Flag)?;
        }
    }
    Ok(s)
}

fn dispatch(matches: &ArgMatches) -> Result<(), CliError> {
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let config = sub.get_one::<String>("config").map(String::as_str);
    let threads = sub.get_one::<u32>("threads").copied();
    let s = settings_from(name, sub, config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t as usize);
    }
    let pool = builder.build().map_err(|e| CliError::Config {
        field: "threads".into(),
        reason: e.to_string(),
    })?;
    pool.install(|| match name {
        "lattice" => commands::lattice(&s),
        "constellation" => commands::constellation(&s),
        "dpmin-sweep" => commands::dpmin_sweep(&s),
        "mindet-sweep" => commands::mindet_sweep(&s),
        "ser-sim" => commands::ser_sim(&s, config),
        "reproduce" => {
            let figure = sub.get_one::<String>("figure").expect("required");
            reproduce::run(figure, &s, pool.current_num_threads())
        }
        _ => unreachable!("clap rejects unknown subcommands"),
    })
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&matches) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
