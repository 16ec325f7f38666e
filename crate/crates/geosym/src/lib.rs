//! Model files, task execution and reports for the `geosym` command.

pub mod model;
pub mod report;
pub mod tasks;

use model::{Model, ModelError};
use report::{Report, SCHEMA_VERSION};
use tasks::{run_task, RunOptions};

/// Runs the tasks selected by `task` (by name, then by kind), or all tasks.
pub fn run(model: &Model, task: Option<&str>, opts: RunOptions) -> Result<Report, ModelError> {
    let selected = match task {
        Some(t) => {
            let found = model.task(t);
            if found.is_empty() {
                let known: Vec<&str> = model.file.tasks.iter().map(|t| t.name.as_str()).collect();
                return Err(ModelError::Invalid {
                    context: "--task".into(),
                    message: format!("no task named `{t}`; known tasks: {}", known.join(", ")),
                });
            }
            found
        }
        None => model.file.tasks.iter().collect(),
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        model: model.name.clone(),
        model_digest: model.digest.clone(),
        seed: opts.seed,
        max_stage: opts.max_stage,
        warnings: model.warnings.clone(),
        tasks: selected.into_iter().map(|t| run_task(model, t, opts)).collect(),
    })
}
