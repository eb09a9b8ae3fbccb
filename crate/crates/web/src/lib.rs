//! Browser bindings: every entry point takes the model as `.bnet` text and
//! returns a JSON string.

use mpsim::attractors::{assumption_warnings, filter_reachable_attractors};
use mpsim::{
    estimate_propensities, minimal_trap_spaces, parse_bnet, parse_configuration, transition_rates, DepthDistribution,
    DepthSpec, LRowMode, MpNetwork, SimulationParams, WeightSpec, WeightVector,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps a single call responsive in the page.
const MAX_RUNS: u64 = 100_000;

/// Spaces with more free components report counts but no explicit targets.
const MAX_LISTED_FREE: usize = 10;

fn load(model: &str) -> Result<MpNetwork, String> {
    let net = parse_bnet(model).map_err(|e| e.to_string())?;
    MpNetwork::new(net).map_err(|e| e.to_string())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

#[derive(Serialize)]
struct SpaceView {
    key: String,
    free: String,
    irreversible: String,
    counts: Vec<u64>,
    rates: Vec<f64>,
    targets: Vec<String>,
}

#[derive(Serialize)]
struct TransitionsView {
    names: Vec<String>,
    total_rate: f64,
    spaces: Vec<SpaceView>,
}

pub fn transitions_json(model: &str, init: &str, depth: usize, weights: &str) -> Result<String, String> {
    let m = load(model)?;
    let n = m.len();
    let x = parse_configuration(init, m.network()).map_err(|e| e.to_string())?;
    let w =
        WeightVector::new(&weights.parse::<WeightSpec>().map_err(|e| e.to_string())?, n).map_err(|e| e.to_string())?;
    let spaces = m.reachable_spaces(&x, depth).map_err(|e| e.to_string())?;
    let rates = transition_rates(&spaces, &w, LRowMode::Listing).map_err(|e| e.to_string())?;
    let mut views = Vec::new();
    for (s, (key, space)) in spaces.entries().iter().enumerate() {
        views.push(SpaceView {
            key: key.to_bitstring(n),
            free: space.free.to_bitstring(n),
            irreversible: space.irreversible.to_bitstring(n),
            counts: space.transition_counts().map_err(|e| e.to_string())?,
            rates: rates.row(s)[..space.free.len()].to_vec(),
            targets: if space.free.len() <= MAX_LISTED_FREE {
                space
                    .targets()
                    .map_err(|e| e.to_string())?
                    .iter()
                    .map(|y| y.to_string())
                    .collect()
            } else {
                Vec::new()
            },
        });
    }
    Ok(json(&TransitionsView {
        names: m.network().names().to_vec(),
        total_rate: rates.total(),
        spaces: views,
    }))
}

#[derive(Serialize)]
struct AttractorsView {
    names: Vec<String>,
    all: Vec<String>,
    reachable: Vec<String>,
}

pub fn attractors_json(model: &str, init: &str) -> Result<String, String> {
    let m = load(model)?;
    let all = minimal_trap_spaces(&m).map_err(|e| e.to_string())?;
    let reachable = if init.trim().is_empty() {
        all.clone()
    } else {
        let x = parse_configuration(init, m.network()).map_err(|e| e.to_string())?;
        filter_reachable_attractors(&all, &m, &x).map_err(|e| e.to_string())?
    };
    Ok(json(&AttractorsView {
        names: m.network().names().to_vec(),
        all: all.ids(),
        reachable: reachable.ids(),
    }))
}

#[derive(Serialize)]
struct Row {
    id: String,
    count: u64,
    fraction: f64,
}

#[derive(Serialize)]
struct PropensitiesView {
    runs: u64,
    converged: u64,
    attractors: Vec<Row>,
    warnings: Vec<String>,
}

pub fn propensities_json(
    model: &str,
    init: &str,
    depth: &str,
    weights: &str,
    runs: u64,
    seed: u64,
) -> Result<String, String> {
    if runs == 0 || runs > MAX_RUNS {
        return Err(format!("runs must be between 1 and {MAX_RUNS}"));
    }
    let m = load(model)?;
    let n = m.len();
    let x = parse_configuration(init, m.network()).map_err(|e| e.to_string())?;
    let depth = DepthDistribution::new(&depth.parse::<DepthSpec>().map_err(|e| e.to_string())?, n)
        .map_err(|e| e.to_string())?;
    let weights =
        WeightVector::new(&weights.parse::<WeightSpec>().map_err(|e| e.to_string())?, n).map_err(|e| e.to_string())?;
    let mut params = SimulationParams::new(depth, weights);
    params.seed = seed;
    let all = minimal_trap_spaces(&m).map_err(|e| e.to_string())?;
    let reachable = filter_reachable_attractors(&all, &m, &x).map_err(|e| e.to_string())?;
    let est = estimate_propensities(&m, &x, &params, &reachable, runs, Some(1)).map_err(|e| e.to_string())?;
    Ok(json(&PropensitiesView {
        runs: est.runs,
        converged: est.converged(),
        attractors: est
            .ranked()
            .into_iter()
            .map(|(id, count, fraction)| Row { id, count, fraction })
            .collect(),
        warnings: assumption_warnings(&params, &reachable),
    }))
}

/// Spaces, per-size counts, rates and targets reachable from `init` at a fixed depth.
#[wasm_bindgen]
pub fn transitions(model: &str, init: &str, depth: usize, weights: &str) -> Result<String, JsError> {
    transitions_json(model, init, depth, weights).map_err(|e| JsError::new(&e))
}

/// Minimal trap spaces, and those reachable from `init` when it is not empty.
#[wasm_bindgen]
pub fn attractors(model: &str, init: &str) -> Result<String, JsError> {
    attractors_json(model, init).map_err(|e| JsError::new(&e))
}

/// Attractor propensities estimated from `runs` trajectories.
#[wasm_bindgen]
pub fn propensities(
    model: &str,
    init: &str,
    depth: &str,
    weights: &str,
    runs: u32,
    seed: u32,
) -> Result<String, JsError> {
    propensities_json(model, init, depth, weights, runs as u64, seed as u64).map_err(|e| JsError::new(&e))
}
