use cheeger_core::config::{parse_criteria, RawConfig, KEYS};
use cheeger_core::manifold::CATALOGUE;
use cheeger_core::runner::{check_writable, emit_report, exit, exit_code_for, run_scenario};
use cheeger_core::GeomError;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

fn config_help() -> String {
    let mut s = String::from(
        "Config files hold `key = value` lines ('#' starts a comment). \
         `scenario` is required; scenario parameters use `scenario.<name>`.\n\nKeys and defaults:\n",
    );
    for (k, v) in KEYS {
        s.push_str(&format!("  {k:<30} {v}\n"));
    }
    s.push_str(
        "\nExit codes: 0 all checks passed, 1 a check failed, 2 configuration error, \
         3 numerical failure.",
    );
    s
}

#[derive(Parser, Debug)]
#[command(
    name = "cheeger",
    version,
    about = "Builds Cheeger deformations on catalogued G-manifolds and checks their limits",
    after_help = config_help()
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Run a catalogued scenario with default settings (no config file needed).
    #[arg(long, global = true)]
    scenario: Option<String>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_name = "PATH")]
    out_csv: Option<PathBuf>,

    #[arg(long, global = true, value_name = "PATH")]
    out_report: Option<PathBuf>,

    /// Comma-separated subset of: convergence, t_tensor, geodesic, invariance, large_l, oracle.
    #[arg(long, global = true, value_name = "CRITERIA")]
    only: Option<String>,

    /// Print the scenario catalogue and exit.
    #[arg(long)]
    list_scenarios: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the checks described by a config file.
    Run { config: PathBuf },
}

fn list_scenarios() {
    for info in CATALOGUE {
        let params: Vec<String> = info
            .params
            .iter()
            .map(|p| format!("{}={}", p.name, p.default))
            .collect();
        println!("{:<10} {}  [{}]", info.id, info.summary, params.join(", "));
    }
}

fn short(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-3..1e4).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn run(cli: Cli) -> Result<i32, GeomError> {
    let mut raw = match &cli.command {
        Some(Command::Run { config }) => {
            let text = std::fs::read_to_string(config).map_err(|e| {
                GeomError::Config(format!("cannot read {}: {e}", config.display()))
            })?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    if let Some(id) = &cli.scenario {
        raw.set("scenario", id)?;
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", &seed.to_string())?;
    }
    if let Some(only) = &cli.only {
        parse_criteria(only).map_err(|m| GeomError::Config(format!("--only: {m}")))?;
        raw.set("criteria", only)?;
    }
    if let Some(p) = &cli.out_csv {
        raw.set("output.csv", &p.to_string_lossy())?;
    }
    if let Some(p) = &cli.out_report {
        raw.set("output.report", &p.to_string_lossy())?;
    }
    let config = raw.build()?;
    for p in config.out_csv.iter().chain(&config.out_report) {
        check_writable(p)?;
    }

    let report = run_scenario(&config)?;
    for v in &report.verdicts {
        println!(
            "{} {} measured={} threshold={}{}",
            if v.passed { "PASS" } else { "FAIL" },
            v.criterion,
            short(v.measured),
            v.threshold,
            if v.detail.is_empty() { String::new() } else { format!(" ({})", v.detail) }
        );
    }
    for (c, t) in &report.timings {
        eprintln!("time {c}: {:.3} s", t.as_secs_f64());
    }
    emit_report(&report, config.out_csv.as_deref(), config.out_report.as_deref())?;
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_scenarios {
        list_scenarios();
        return ExitCode::SUCCESS;
    }
    if cli.command.is_none() && cli.scenario.is_none() {
        eprintln!("error: give `run <config>` or `--scenario <id>` (see --help)");
        return ExitCode::from(exit::CONFIG as u8);
    }
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code as u8)
}
