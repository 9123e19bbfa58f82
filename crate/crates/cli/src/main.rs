//! `lie-homog`: batch runner for decomposition, coefficient, simulation and
//! verification experiments.

mod config;
mod report;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{ExperimentConfig, Format, Kind};
use run::RunError;

/// Environment variable overriding the output directory.
const OUT_ENV: &str = "LIE_HOMOG_OUT";
const DEFAULT_OUT: &str = "lie-homog-out";

const EXIT_VERDICT: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

const PRESETS: [(&str, &str); 6] = [
    ("hopf-limit", include_str!("../presets/hopf-limit.json")),
    (
        "sphere-casimir",
        include_str!("../presets/sphere-casimir.json"),
    ),
    ("so4-subset", include_str!("../presets/so4-subset.json")),
    (
        "hyperbolic-limit",
        include_str!("../presets/hyperbolic-limit.json"),
    ),
    (
        "stiefel-centring",
        include_str!("../presets/stiefel-centring.json"),
    ),
    ("peter-weyl", include_str!("../presets/peter-weyl.json")),
];

#[derive(Parser)]
#[command(
    name = "lie-homog",
    version,
    about = "Homogenization experiments on homogeneous spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the root seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Isotypic decomposition of m, optional centring and orthogonality checks.
    Decompose,
    /// Effective coefficients a_ij(Y0).
    Coeffs,
    /// Simulates an ensemble with one scheme.
    Simulate,
    /// Multiscale system against its effective limit.
    Verify,
    /// Pathwise splitting error against step size.
    SplitTest,
    /// Moment gap over a decreasing list of epsilon.
    Rate,
    /// Runs a bundled experiment.
    Preset {
        /// One of: hopf-limit, sphere-casimir, so4-subset, hyperbolic-limit, stiefel-centring, peter-weyl.
        name: String,
    },
}

impl Command {
    fn kind(&self) -> Option<Kind> {
        match self {
            Command::Decompose => Some(Kind::Decompose),
            Command::Coeffs => Some(Kind::Coeffs),
            Command::Simulate => Some(Kind::Simulate),
            Command::Verify => Some(Kind::VerifyLimit),
            Command::SplitTest => Some(Kind::SplitTest),
            Command::Rate => Some(Kind::Rate),
            Command::Preset { .. } => None,
        }
    }
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load(cli: &Cli) -> Result<(ExperimentConfig, Option<String>), String> {
    let (text, preset) = match &cli.command {
        Command::Preset { name } => {
            if cli.config.is_some() {
                return Err("preset does not take --config".into());
            }
            let text = PRESETS
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t.to_string())
                .ok_or_else(|| {
                    let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                    format!("unknown preset `{name}`; available: {}", names.join(", "))
                })?;
            (text, Some(name.clone()))
        }
        _ => {
            let path = cli.config.as_ref().ok_or("--config is required")?;
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            (text, None)
        }
    };
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| e.0)?;
    if let Some(kind) = cli.command.kind() {
        if kind != cfg.experiment {
            return Err(format!(
                "config runs `{}` but the subcommand asks for `{}`",
                cfg.experiment.as_str(),
                kind.as_str()
            ));
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok((cfg, preset))
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| {
            cfg.outputs
                .as_ref()
                .and_then(|o| o.dir.clone())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), String> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, preset) = match load(&cli) {
        Ok(c) => c,
        Err(msg) => return fail(EXIT_CONFIG, &msg),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(EXIT_CONFIG, "--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return fail(EXIT_CONFIG, &format!("cannot set thread count: {e}"));
        }
    }
    let dir = out_dir(&cli, &cfg);
    if let Err(e) = fs::create_dir_all(&dir) {
        return fail(
            EXIT_CONFIG,
            &format!("cannot create {}: {e}", dir.display()),
        );
    }
    let manifest = json!({
        "software": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "preset": preset,
        "config": cfg,
    });
    if let Err(e) = write(&dir, "manifest.json", &pretty(&manifest)) {
        return fail(EXIT_CONFIG, &e);
    }

    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let result = run::run(&cfg);
    let timing = json!({
        "started_unix": started,
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "threads": rayon::current_num_threads(),
    });
    if let Err(e) = write(&dir, "timing.json", &pretty(&timing)) {
        return fail(EXIT_CONFIG, &e);
    }
    let outcome = match result {
        Ok(o) => o,
        Err(RunError::Budget(msg)) => return fail(EXIT_BUDGET, &msg),
        Err(RunError::Config(msg)) => return fail(EXIT_CONFIG, &msg),
    };

    let formats = cfg.formats();
    let mut writes = vec![("report.json".to_string(), pretty(&outcome.report))];
    if formats.contains(&Format::Csv) {
        writes.extend(
            outcome
                .tables
                .iter()
                .map(|t| (format!("{}.csv", t.name), t.text().to_string())),
        );
    }
    for (name, text) in &writes {
        if let Err(e) = write(&dir, name, text) {
            return fail(EXIT_CONFIG, &e);
        }
    }
    print!("{}", outcome.summary);
    println!("verdict: {}", if outcome.verdict { "PASS" } else { "FAIL" });
    println!("outputs: {}", dir.display());
    if outcome.verdict {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERDICT)
    }
}
