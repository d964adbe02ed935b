use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use fewbody::core::RunConfig;

use crate::Failure;

fn io(e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(format!("cannot write output: {e}"))
}

/// Artifacts of one subcommand run. CSV bodies depend only on the inputs;
/// wall-clock data goes to the manifest alone.
pub struct Run {
    dir: PathBuf,
    command: &'static str,
    started: Instant,
    artifacts: Vec<String>,
}

impl Run {
    pub fn new(dir: &Path, command: &'static str) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(io)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            started: Instant::now(),
            artifacts: Vec::new(),
        })
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        for r in rows {
            w.serialize(r).map_err(io)?;
        }
        w.flush().map_err(io)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).map_err(io)?;
        fs::write(self.dir.join(name), text + "\n").map_err(io)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, cfg: &RunConfig, d: Option<usize>, summary: Value) -> Result<(), Failure> {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|t| t.as_secs())
            .unwrap_or(0);
        let manifest = json!({
            "command": self.command,
            "experiment": cfg.experiment,
            "dimension": d,
            "timestamp_unix": stamp,
            "elapsed_seconds": self.started.elapsed().as_secs_f64(),
            "workers": rayon::current_num_threads(),
            "artifacts": self.artifacts,
            "config": cfg,
            "summary": summary,
        });
        let text = serde_json::to_string_pretty(&manifest).map_err(io)?;
        fs::write(self.dir.join("manifest.json"), text + "\n").map_err(io)?;
        println!("{}", serde_json::to_string(&manifest["summary"]).map_err(io)?);
        Ok(())
    }
}
