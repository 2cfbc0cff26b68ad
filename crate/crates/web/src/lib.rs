//! WebAssembly bindings for the browser demo.
//!
//! Every entry point takes a TOML configuration string and returns JSON, so
//! the page needs no bindings beyond strings.

use delaylqr::config::RunConfig;
use delaylqr::delay::DelayModel;
use delaylqr::plant::{build_aggregate, Plant};
use delaylqr::sim::{ControlLaw, EpisodeConfig, Simulator};
use delaylqr::synthesis::{render_report, synthesize};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct NodeSummary {
    node: String,
    p: f64,
    gain: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SynthesisSummary {
    predicted_cost: f64,
    report: String,
    dot: String,
    nodes: Vec<NodeSummary>,
}

#[derive(Serialize)]
struct Trajectory {
    t: Vec<usize>,
    e1: Vec<usize>,
    e2: Vec<usize>,
    x1: Vec<f64>,
    x2: Vec<f64>,
    stage_cost: Vec<f64>,
    average_cost: f64,
}

#[derive(Serialize)]
struct CostCurve {
    zero_delay_prob: Vec<f64>,
    cost: Vec<f64>,
}

fn rows(m: &delaylqr::linalg::Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Gains, absorption probabilities and the predicted cost.
pub fn synthesize_json(config: &str) -> Result<String, String> {
    let cfg = RunConfig::from_toml(config).map_err(|e| e.to_string())?;
    let agg = build_aggregate(&cfg.plant).map_err(|e| e.to_string())?;
    let res = synthesize(&agg, &cfg.delay).map_err(|e| e.to_string())?;
    let nodes = res
        .graph
        .nodes()
        .map(|n| NodeSummary {
            node: n.key(),
            p: res.probabilities.p(n),
            gain: rows(res.k(n)),
        })
        .collect();
    json(&SynthesisSummary {
        predicted_cost: res.predicted_cost,
        report: render_report(&res, &agg),
        dot: res.graph.to_dot(),
        nodes,
    })
}

/// One closed-loop episode under the optimal controller; plots the first
/// component of each subsystem.
pub fn simulate_json(config: &str, seed: u64, steps: usize) -> Result<String, String> {
    let cfg = RunConfig::from_toml(config).map_err(|e| e.to_string())?;
    let agg = build_aggregate(&cfg.plant).map_err(|e| e.to_string())?;
    let res = synthesize(&agg, &cfg.delay).map_err(|e| e.to_string())?;
    let policy = res.policy();
    let sim = Simulator::new(&agg, &cfg.delay).map_err(|e| e.to_string())?;
    let episode = EpisodeConfig::average(steps.max(2), seed).map_err(|e| e.to_string())?;
    let run = sim
        .run_episode(ControlLaw::Distributed(&policy), &episode, 0, true)
        .map_err(|e| e.to_string())?;
    let records = run.trajectory.unwrap_or_default();
    let first = |plant: Plant| agg.plant_range(plant).start;
    json(&Trajectory {
        t: records.iter().map(|r| r.t).collect(),
        e1: records.iter().map(|r| r.e[0]).collect(),
        e2: records.iter().map(|r| r.e[1]).collect(),
        x1: records.iter().map(|r| r.x[first(Plant::One)]).collect(),
        x2: records.iter().map(|r| r.x[first(Plant::Two)]).collect(),
        stage_cost: records.iter().map(|r| r.stage_cost).collect(),
        average_cost: run.cost,
    })
}

/// Predicted cost when each link delivers instantly with probability `s`
/// and otherwise takes the full delay `D`, for `points` values of `s`.
pub fn cost_curve_json(config: &str, points: usize) -> Result<String, String> {
    let cfg = RunConfig::from_toml(config).map_err(|e| e.to_string())?;
    let agg = build_aggregate(&cfg.plant).map_err(|e| e.to_string())?;
    let d = cfg.plant.delay;
    let points = points.max(2);
    let mut curve = CostCurve {
        zero_delay_prob: Vec::with_capacity(points),
        cost: Vec::with_capacity(points),
    };
    for i in 0..points {
        let s = i as f64 / (points - 1) as f64;
        let model = DelayModel::symmetric(d, &[(0, s), (d, 1.0 - s)]).map_err(|e| e.to_string())?;
        let res = synthesize(&agg, &model).map_err(|e| e.to_string())?;
        curve.zero_delay_prob.push(s);
        curve.cost.push(res.predicted_cost);
    }
    json(&curve)
}

#[wasm_bindgen]
pub fn synthesize_config(config: &str) -> Result<String, JsValue> {
    synthesize_json(config).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate_episode(config: &str, seed: u64, steps: usize) -> Result<String, JsValue> {
    simulate_json(config, seed, steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cost_curve(config: &str, points: usize) -> Result<String, JsValue> {
    cost_curve_json(config, points).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = include_str!("../../../configs/scalar_d2.toml");

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn synthesis_lists_every_node() {
        let v = parse(&synthesize_json(CONFIG).unwrap());
        assert_eq!(v["nodes"].as_array().unwrap().len(), 5);
        assert!(v["predicted_cost"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn episode_has_requested_length() {
        let v = parse(&simulate_json(CONFIG, 3, 50).unwrap());
        assert_eq!(v["t"].as_array().unwrap().len(), v["x1"].as_array().unwrap().len());
        assert!(v["average_cost"].as_f64().unwrap().is_finite());
    }

    #[test]
    fn cost_falls_as_links_get_faster() {
        let v = parse(&cost_curve_json(CONFIG, 6).unwrap());
        let cost: Vec<f64> = v["cost"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
        assert!(cost.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{cost:?}");
    }

    #[test]
    fn bad_config_is_reported() {
        assert!(synthesize_json("[plant]").is_err());
    }
}
