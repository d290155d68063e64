use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use toric_ifn::rational::parse_q;
use toric_ifn::Q;
use toric_ifn_cli::{emit, load_config, run, CliError, Command, Format, Options};

#[derive(Parser, Debug)]
#[command(name = "engine", version, about = "Orbifold I-functions, mirror maps and quantum products of toric complete intersections")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON configuration describing the target.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Degree bound (maximal theta-pairing kept); overrides the config.
    #[arg(long, global = true, value_parser = rational)]
    order: Option<Q>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// First direction for `qproduct`.
    #[arg(long, global = true)]
    a: Option<String>,
    /// Second direction for `qproduct`.
    #[arg(long, global = true)]
    b: Option<String>,
    /// Evaluation point, `VAR=0`; repeatable.
    #[arg(long, global = true, value_parser = assignment)]
    at: Vec<(String, Q)>,
    /// Theta bound for `effective`.
    #[arg(long, global = true, value_parser = rational)]
    bound: Option<Q>,
    /// Class (or basis label) to pair the product with.
    #[arg(long, global = true)]
    pair: Option<String>,
    /// Adds the configured divisor directions as extra variables.
    #[arg(long, global = true)]
    experimental_divisor: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Check a configuration and print the GIT data.
    Validate,
    /// List twisted sectors.
    Sectors,
    /// List effective degrees up to `--bound`.
    Effective,
    /// Print the I-function.
    Ifun,
    /// Print the mirror map and the flow.
    MirrorMap,
    /// One quantum product.
    Qproduct,
    /// Product table on the configured basis.
    Table,
    /// Check the plus-part identity on the I-function.
    CoewcCheck,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum OutFormat {
    Text,
    Csv,
    Json,
}

fn rational(s: &str) -> Result<Q, String> {
    parse_q(s).ok_or_else(|| format!("'{s}' is not a rational number"))
}

fn assignment(s: &str) -> Result<(String, Q), String> {
    let (var, val) = s.split_once('=').ok_or_else(|| format!("expected VAR=VALUE, got '{s}'"))?;
    Ok((var.trim().to_string(), rational(val.trim())?))
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Argument("--config is required".into()))?;
    let config = load_config(&path)?;
    let command = match cli.command {
        Cmd::Validate => Command::Validate,
        Cmd::Sectors => Command::Sectors,
        Cmd::Effective => Command::Effective,
        Cmd::Ifun => Command::Ifun,
        Cmd::MirrorMap => Command::MirrorMap,
        Cmd::Qproduct => Command::Qproduct,
        Cmd::Table => Command::Table,
        Cmd::CoewcCheck => Command::CoewcCheck,
    };
    let opts = Options {
        order: cli.order,
        a: cli.a,
        b: cli.b,
        at: cli.at,
        bound: cli.bound,
        pair: cli.pair,
        experimental_divisor: cli.experimental_divisor,
    };
    let outcome = run(command, &config, &opts)?;
    for w in &outcome.notes {
        eprintln!("warning: {w}");
    }
    let format = match cli.format {
        OutFormat::Text => Format::Text,
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    use std::io::Write;
    std::io::stdout()
        .write_all(emit(&outcome, &config, format).as_bytes())
        .context("writing output")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(3, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
