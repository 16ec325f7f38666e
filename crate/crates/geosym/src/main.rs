use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geosym::model::Model;
use geosym::tasks::RunOptions;

#[derive(Parser)]
#[command(name = "geosym", version, about = "Symmetry computations on declarative geometry models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run tasks from a model file
    Run {
        file: PathBuf,
        /// Task name or kind; all tasks when omitted
        #[arg(long)]
        task: Option<String>,
        #[arg(long, default_value_t = geosym_core::prolong::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = geosym_core::prolong::DEFAULT_MAX_STAGE)]
        max_stage: usize,
        /// Also write the report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Parse and check a model file without running tasks
    Validate { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { file } => match Model::load(&file) {
            Ok(m) => {
                for w in &m.warnings {
                    println!("warning: {w}");
                }
                println!("{}: ok ({} tasks)", m.name, m.file.tasks.len());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {}: {e}", file.display());
                ExitCode::from(2)
            }
        },
        Command::Run { file, task, seed, max_stage, json } => {
            let model = match Model::load(&file) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {}: {e}", file.display());
                    return ExitCode::from(2);
                }
            };
            let report = match geosym::run(&model, task.as_deref(), RunOptions { seed, max_stage }) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            print!("{report}");
            if let Some(path) = json {
                if let Err(e) = std::fs::write(&path, report.to_json()) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if report.failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
