use mpsim_web::{attractors_json, propensities_json, transitions_json};
use serde_json::Value;

fn model(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../models/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.unwrap()).unwrap()
}

#[test]
fn toy_b_from_all_ones() {
    let m = model("toy_b.bnet");
    let a = parse(attractors_json(&m, "111"));
    assert_eq!(a["reachable"], serde_json::json!(["001", "110"]));

    let t = parse(transitions_json(&m, "111", 1, "uniform"));
    let rates: f64 = t["spaces"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["rates"].as_array().unwrap().iter().map(|r| r.as_f64().unwrap()))
        .sum();
    assert_eq!(rates, t["total_rate"].as_f64().unwrap());

    let p = parse(propensities_json(&m, "111", "const:1", "uniform", 3000, 2));
    assert_eq!(p["converged"], 3000);
    let f = p["attractors"][0]["fraction"].as_f64().unwrap();
    assert_eq!(p["attractors"][0]["id"], "001");
    assert!((f - 2.0 / 3.0).abs() < 0.04, "{f}");
}

#[test]
fn same_seed_same_answer() {
    let m = model("toy_a.bnet");
    let a = propensities_json(&m, "000", "exp", "uniform", 500, 7).unwrap();
    let b = propensities_json(&m, "000", "exp", "uniform", 500, 7).unwrap();
    assert_eq!(a, b);
}

#[test]
fn errors_are_messages() {
    let m = model("toy_a.bnet");
    assert!(attractors_json("x1, y", "").unwrap_err().contains('y'));
    assert!(transitions_json(&m, "0000", 1, "uniform").is_err());
    assert!(propensities_json(&m, "000", "exp", "custom:1", 10, 0).is_err());
}
