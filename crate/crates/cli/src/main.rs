#![allow(clippy::needless_range_loop)]

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use lattice_decoherence::export::CsvTable;
use serde_json::{json, Value};

mod commands;
mod config;
mod error;
mod quantity;
mod sweep;

use commands::Artifacts;
use config::{Cli, Command, RunConfig};
use error::CliError;

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    match (&cli.config, &cli.command) {
        (Some(_), Some(_)) => Err(CliError::validation("config", "give either --config or a subcommand, not both")),
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::validation("config", format!("{}: {e}", path.display())))?;
            let cfg: RunConfig = serde_json::from_str(&text)?;
            Ok(cfg.override_with(cli))
        }
        (None, Some(cmd)) => Ok(RunConfig::new(cmd.clone()).override_with(cli)),
        (None, None) => Err(CliError::validation("command", "no subcommand given (see --help)")),
    }
}

fn write_json(path: &std::path::Path, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("json serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    if !(cfg.temperature.is_finite() && cfg.temperature > 0.0) {
        return Err(CliError::validation("temperature", "must be positive"));
    }
    let material = commands::resolve_material(&cfg.material)?;
    let hash = cfg.hash();
    log::info!("{} run, config sha256 {hash}", cfg.command.name());

    let Artifacts {
        mut tables,
        documents,
        summary,
    } = match &cfg.command {
        Command::Correlator(a) => commands::correlator(&material, cfg.temperature, a)?,
        Command::Spatial(a) => commands::spatial(&material, cfg.temperature, a)?,
        Command::Twolevel(a) => commands::twolevel(cfg.seed, a)?,
        Command::Chain(a) => commands::chain(cfg.seed, a)?,
        Command::Estimates(a) => commands::estimates(&material, cfg.temperature, a)?,
        Command::Sweep(a) => sweep::sweep(&material, cfg.temperature, a)?,
    };
    let compute_s = started.elapsed().as_secs_f64();

    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let version = env!("CARGO_PKG_VERSION");
    let mut files = Vec::new();
    for (name, table) in tables.iter_mut() {
        let mut head = CsvTable::default();
        head.comment(format!("latdec {version} {}", cfg.command.name()));
        head.comment(format!("config_sha256 = {hash}"));
        head.comment(format!("material = {}, temperature_K = {}, seed = {}", material.name(), cfg.temperature, cfg.seed));
        head.comments.append(&mut table.comments);
        table.comments = head.comments;
        table.write(&dir.join(name.as_str()))?;
        files.push(name.clone());
    }
    for (name, doc) in &documents {
        let mut doc = doc.clone();
        if let Value::Object(map) = &mut doc {
            map.insert("config_sha256".into(), json!(hash));
        }
        write_json(&dir.join(name), &doc)?;
        files.push(name.clone());
    }
    let summary = json!({
        "command": cfg.command.name(),
        "config_sha256": hash,
        "material": material.to_json(),
        "temperature_K": cfg.temperature,
        "seed": cfg.seed,
        "results": summary,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    write_json(&dir.join("config.json"), &serde_json::to_value(cfg).expect("config serializes"))?;
    files.extend(["summary.json".to_string(), "config.json".to_string()]);
    let metadata = json!({
        "program": "latdec",
        "version": version,
        "config_sha256": hash,
        "config": cfg,
        "outputs": files,
        "threads": worker_threads(),
        "timings_s": { "compute": compute_s, "total": started.elapsed().as_secs_f64() },
    });
    write_json(&dir.join("metadata.json"), &metadata)?;
    println!("{}", dir.join("summary.json").display());
    Ok(())
}

fn worker_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match load_config(&cli).and_then(|cfg| run(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("latdec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
