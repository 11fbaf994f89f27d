use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use fpbound_cli::{
    bench, exit, render_bench, render_csv, render_json, render_text, run, Cli, Command,
    OutputFormat,
};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE as u8
            } else {
                exit::OK as u8
            });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
        {
            log::warn!("cannot size the worker pool: {e}");
        }
    }
    match dispatch(&cli.command) {
        Ok((text, code)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::USAGE as u8)
        }
    }
}

fn dispatch(command: &Command) -> anyhow::Result<(String, i32)> {
    match command {
        Command::Run(cfg) => {
            let report = run(cfg)?;
            let text = match cfg.output {
                OutputFormat::Text => render_text(&report, cfg.details),
                OutputFormat::Csv => render_csv(&report)?,
                OutputFormat::Json => render_json(&report)?,
            };
            let code = if report.all_succeeded() {
                exit::OK
            } else {
                exit::ANALYSIS_FAILED
            };
            Ok((text, code))
        }
        Command::Bench(cfg) => {
            let report = bench(cfg)?;
            let text =
                render_bench(&report, cfg.output).context("rendering the benchmark table")?;
            let code = if report.violations().next().is_some() {
                exit::UNSOUND
            } else {
                exit::OK
            };
            Ok((text, code))
        }
    }
}
