use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use pnp_qkd::attacks::EveModel;
use pnp_qkd::experiment::{
    self, optimize_link, run_montecarlo, run_table2, summary_json, sweep_fig3, write_sweep_csv, ExperimentConfig,
    ExperimentError, Mode,
};
use pnp_qkd::protocol::write_transcript;

#[derive(Parser)]
#[command(name = "pnp-qkd", about = "Two-way plug-and-play QKD simulator")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV output (sweep rows or session transcript).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// none, intercept-resend-z, intercept-resend-x
    #[arg(long, global = true)]
    attack: Option<String>,
    /// Print the security report as flat JSON instead of text.
    #[arg(long, global = true)]
    json_summary: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    Table2,
    Run,
    Sweep,
    OptimizeMu,
}

enum Failure {
    Config(String),
    Estimation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Estimation(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) | ExperimentError::Protocol(_) => Failure::Config(e.to_string()),
            ExperimentError::Decoy(_) | ExperimentError::Security(_) => Failure::Estimation(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn load(cli: &Cli, mode: Mode) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path).map_err(|e| Failure::Config(e.to_string()))?,
        None if mode == Mode::SweepFig3 => ExperimentConfig::fig3(),
        None => ExperimentConfig::default(),
    };
    cfg.mode = mode;
    if mode == Mode::SweepFig3 && cfg.sweep.is_none() {
        cfg.sweep = Some(Default::default());
    }
    if let Some(seed) = cli.seed {
        cfg.session.seed = seed;
    }
    if cli.out.is_some() {
        cfg.output_path = cli.out.clone();
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn emit(cli: &Cli, report: &pnp_qkd::security::SecurityReport, extra: Vec<(&str, Value)>) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    if cli.json_summary {
        let doc = summary_json(report, &extra);
        writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("JSON values serialise"))?;
    } else {
        for (k, v) in extra {
            writeln!(stdout, "{k:>14} = {v}")?;
        }
        for (k, v) in report.fields() {
            writeln!(stdout, "{k:>14} = {v:.6e}")?;
        }
    }
    Ok(())
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match cli.verb {
        Verb::Table2 => {
            let r = run_table2()?;
            let extra = vec![
                ("length_km", Value::from(r.fixture.length_km)),
                ("block_size", Value::from(r.fixture.block_size)),
                ("Y_L_X", Value::from(r.estimates.y_l_x)),
                ("Y_L_Z", Value::from(r.estimates.y_l_z)),
            ];
            emit(cli, &r.report, extra)
        }
        Verb::Run => {
            let mut cfg = load(cli, Mode::MonteCarloSession)?;
            cfg.session.record_transcript |= cfg.output_path.is_some();
            let mut model = match cli.attack.as_deref() {
                None => None,
                Some(name) => {
                    Some(EveModel::by_name(name).ok_or_else(|| Failure::Config(format!("unknown attack `{name}`")))?)
                }
            };
            let r = run_montecarlo(&cfg, model.as_mut())?;
            if let (Some(path), Some(t)) = (&cfg.output_path, &r.transcript) {
                write_transcript(t, create(path)?).map_err(|e| Failure::Io(e.to_string()))?;
            }
            let mut extra = vec![
                ("seed", Value::from(cfg.session.seed)),
                ("windows", Value::from(r.stats.windows)),
                ("sifted_bits", Value::from(r.stats.sifted.len())),
                ("e_m", Value::from(r.monitor_error)),
                ("aborted", Value::from(r.aborted.clone().unwrap_or_default())),
            ];
            if let Some(a) = r.advantage {
                extra.push(("eve_advantage_bits", Value::from(a.bits)));
                extra.push(("eve_advantage_low_confidence", Value::from(a.low_confidence)));
            }
            emit(cli, &r.report, extra)?;
            match r.aborted {
                Some(reason) => Err(Failure::Estimation(reason)),
                None => Ok(()),
            }
        }
        Verb::Sweep => {
            let cfg = load(cli, Mode::SweepFig3)?;
            let sweep = cfg.sweep.clone().expect("sweep config present");
            let throughput = if cfg.include_overheads {
                experiment::key_throughput(&cfg.session)
            } else {
                1.0
            };
            let rows = sweep_fig3(&cfg.link, &sweep, cfg.f, throughput);
            let result = match &cfg.output_path {
                Some(path) => write_sweep_csv(&rows, create(path)?),
                None => write_sweep_csv(&rows, io::stdout().lock()),
            };
            result.map_err(|e| Failure::Io(e.to_string()))
        }
        Verb::OptimizeMu => {
            let cfg = load(cli, Mode::OptimizeMu)?;
            let (opt, report) = optimize_link(&cfg.link, cfg.f, 1.0);
            let extra = vec![
                ("mu_opt", Value::from(opt.mu_opt)),
                ("zero_rate", Value::from(opt.zero_rate)),
                ("non_unimodal", Value::from(opt.non_unimodal)),
                ("length_km", Value::from(cfg.link.channel.fiber_length_km)),
                ("rate_hz", Value::from(cfg.link.channel.repetition_rate_hz)),
            ];
            emit(cli, &report, extra)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (category, msg) = match &f {
                Failure::Config(m) => ("config", m),
                Failure::Estimation(m) => ("estimation", m),
                Failure::Io(m) => ("io", m),
            };
            eprintln!("error[{category}]: {msg}");
            ExitCode::from(f.code())
        }
    }
}
