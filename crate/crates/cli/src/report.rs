use std::path::Path;

use clap::ValueEnum;
use mpsim::{Propensities, SimulationParams};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
pub struct Report {
    model: String,
    model_sha256: String,
    params: Params,
    runs: u64,
    converged: u64,
    attractors: Vec<Row>,
    elapsed_seconds: f64,
    seed: u64,
}

#[derive(Serialize)]
struct Params {
    init: String,
    mutations: Vec<String>,
    depth: String,
    weights: String,
    l_row_mode: String,
    stop: String,
    check_interval: usize,
    max_steps: usize,
}

#[derive(Serialize)]
struct Row {
    id: String,
    count: u64,
    fraction: f64,
}

/// Shortest representation that reads back to the same `f64`, shared by JSON and CSV.
pub fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite")
}

impl Report {
    pub fn new(
        model: &Path,
        model_bytes: &[u8],
        init: &str,
        mutations: &[String],
        params: &SimulationParams,
        est: &Propensities,
        elapsed_seconds: f64,
    ) -> Self {
        let digest = Sha256::digest(model_bytes);
        Report {
            model: model.display().to_string(),
            model_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            params: Params {
                init: init.to_string(),
                mutations: mutations.to_vec(),
                depth: params.depth.spec().to_string(),
                weights: params.weights.spec().to_string(),
                l_row_mode: params.l_row_mode.to_string(),
                stop: params.stop.to_string(),
                check_interval: params.check_interval,
                max_steps: params.max_steps,
            },
            runs: est.runs,
            converged: est.converged(),
            attractors: est
                .ranked()
                .into_iter()
                .map(|(id, count, fraction)| Row { id, count, fraction })
                .collect(),
            elapsed_seconds,
            seed: params.seed,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::from("attractor,count,fraction\n");
                for r in &self.attractors {
                    s.push_str(&format!("{},{},{}\n", r.id, r.count, number(r.fraction)));
                }
                s
            }
        }
    }

    pub fn plot_data(&self) -> String {
        let mut s = String::from("attractor\tfraction\n");
        for r in &self.attractors {
            s.push_str(&format!("{}\t{}\n", r.id, number(r.fraction)));
        }
        s
    }
}
