//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! process exits non-zero if any check fails.

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use mpsim::random::random_network;
use mpsim::{
    minimal_trap_spaces, parse_bnet, parse_configuration, random_stream, sample_next_configuration,
    simulate_trajectory, transition_rates, BooleanNetwork, ComponentSet, Configuration, DepthDistribution, LRowMode,
    MpNetwork, Oracle, SimulationParams, StopPolicy, WeightVector,
};
use serde_json::Value;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn load(name: &str) -> MpNetwork {
    let text = std::fs::read_to_string(model(name)).unwrap();
    MpNetwork::new(parse_bnet(&text).unwrap()).unwrap()
}

fn cfg(s: &str) -> Configuration {
    Configuration::from_bitstring(s).unwrap()
}

struct Run {
    stdout: String,
    elapsed: Duration,
}

fn mpsim(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_mpsim"))
        .args(args)
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    assert!(
        out.status.success(),
        "mpsim {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        elapsed,
    }
}

fn simulate(model_name: &str, init: &str, extra: &[&str]) -> Run {
    let path = model(model_name);
    let mut args = vec!["simulate", "--model", path.to_str().unwrap(), "--init", init];
    args.extend_from_slice(extra);
    mpsim(&args)
}

fn fraction(report: &str, id: &str) -> f64 {
    let v: Value = serde_json::from_str(report).unwrap();
    v["attractors"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["id"] == id)
        .map(|r| r["fraction"].as_f64().unwrap())
        .unwrap_or(0.0)
}

fn exact(name: &str, init: &str, depth: &[f64], weights: &[f64], id: &str) -> f64 {
    let m = load(name);
    Oracle::new(m.network())
        .unwrap()
        .exact_propensities(&cfg(init), depth, weights, LRowMode::Listing)
        .unwrap()
        .probability(id)
        .unwrap()
}

const SEED: &str = "20240601";

/// Outcome line of one check.
struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn toy_bistability() -> Verdict {
    let run = simulate(
        "toy_a.bnet",
        "000",
        &[
            "--runs",
            "10000",
            "--depth",
            "const:3",
            "--weights",
            "uniform",
            "--seed",
            SEED,
        ],
    );
    let f = fraction(&run.stdout, "111");
    let e = exact("toy_a.bnet", "000", &[0.0, 0.0, 1.0], &[1.0; 3], "111");
    let secs = run.elapsed.as_secs_f64();
    verdict(
        (0.47..=0.53).contains(&f) && (e - 0.5).abs() <= 1e-9 && secs < 5.0,
        format!("fraction(111)={f} exact={e} runtime={secs:.3}s"),
    )
}

fn exponential_depth() -> Verdict {
    let run = simulate(
        "toy_a.bnet",
        "000",
        &[
            "--runs",
            "10000",
            "--depth",
            "exp",
            "--weights",
            "uniform",
            "--seed",
            SEED,
        ],
    );
    let f = fraction(&run.stdout, "111");
    let e = exact(
        "toy_a.bnet",
        "000",
        &[4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0],
        &[1.0; 3],
        "111",
    );
    verdict(
        (0.056..=0.087).contains(&f) && (e - 1.0 / 14.0).abs() <= 1e-9,
        format!("fraction(111)={f} exact={e}"),
    )
}

fn asynchronous_ratio() -> Verdict {
    let uniform = simulate(
        "toy_b.bnet",
        "111",
        &[
            "--runs",
            "10000",
            "--depth",
            "const:1",
            "--weights",
            "uniform",
            "--seed",
            SEED,
        ],
    );
    let single = simulate(
        "toy_b.bnet",
        "111",
        &[
            "--runs",
            "10000",
            "--depth",
            "const:1",
            "--weights",
            "single",
            "--seed",
            SEED,
        ],
    );
    let f = fraction(&uniform.stdout, "001");
    let e = exact("toy_b.bnet", "111", &[1.0, 0.0, 0.0], &[1.0; 3], "001");
    let s1 = fraction(&single.stdout, "001");
    let s2 = fraction(&single.stdout, "110");
    verdict(
        (0.63..=0.70).contains(&f)
            && (e - 2.0 / 3.0).abs() <= 1e-9
            && (0.47..=0.53).contains(&s1)
            && (0.47..=0.53).contains(&s2),
        format!("uniform fraction(001)={f} exact={e}; single 001={s1} 110={s2}"),
    )
}

/// Random networks for the structural checks: alternating locally monotone
/// and general ones unless `monotone_only`.
fn harness(count: usize, max_n: usize, monotone_only: bool, seed: u64) -> Vec<BooleanNetwork> {
    let mut rng = random_stream(seed, 0);
    (0..count)
        .map(|k| {
            let n = 1 + k % max_n;
            random_network(&mut rng, n, 3, monotone_only || k % 2 == 0)
        })
        .collect()
}

fn support(m: &MpNetwork, x: &Configuration, depth: usize, w: &WeightVector) -> BTreeSet<Configuration> {
    let spaces = m.reachable_spaces(x, depth).unwrap();
    let rates = transition_rates(&spaces, w, LRowMode::Listing).unwrap();
    let mut out = BTreeSet::new();
    for (s, (_, space)) in spaces.entries().iter().enumerate() {
        for y in space.targets().unwrap() {
            if rates.get(s, x.delta(&y).unwrap().len()) > 0.0 {
                out.insert(y);
            }
        }
    }
    out
}

fn all_configurations(n: usize) -> impl Iterator<Item = Configuration> {
    (0..1u64 << n).map(move |b| Configuration::from_bits(b, n))
}

fn depth_one_collapse() -> Verdict {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut checked = 0;
    for net in harness(200, 8, false, 4) {
        let oracle = Oracle::new(&net).unwrap();
        let n = net.len();
        let m = MpNetwork::new(net).unwrap();
        let w = WeightVector::uniform(n);
        for x in all_configurations(n) {
            checked += 1;
            if support(&m, &x, 1, &w) != oracle.async_successors(&x).unwrap() {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatches == 0 && secs < 60.0,
        format!("{checked} configurations, {mismatches} mismatches, {secs:.2}s"),
    )
}

fn single_flip_collapse() -> Verdict {
    let mut mismatches = 0;
    let mut stat = 0.0;
    let mut df = 0usize;
    let mut tested = 0;
    for (k, net) in harness(200, 8, false, 5).into_iter().enumerate() {
        let oracle = Oracle::new(&net).unwrap();
        let n = net.len();
        let m = MpNetwork::new(net).unwrap();
        let w = WeightVector::single(n);
        let mut sampled = false;
        for x in all_configurations(n) {
            let expected = oracle.fully_async_successors(&x).unwrap();
            if support(&m, &x, 1, &w) != expected {
                mismatches += 1;
            }
            // one empirical distribution per network, pooled into a single test
            if !sampled && expected.len() >= 2 {
                sampled = true;
                tested += 1;
                let mut params = SimulationParams::new(DepthDistribution::constant(1, n).unwrap(), w.clone());
                params.seed = k as u64;
                let mut rng = random_stream(99, k as u64);
                let draws = 200 * expected.len();
                let mut counts = vec![0u64; expected.len()];
                let index: Vec<Configuration> = expected.iter().copied().collect();
                for _ in 0..draws {
                    let y = sample_next_configuration(&m, &x, &params, &mut rng).unwrap();
                    counts[index.iter().position(|c| *c == y).expect("in support")] += 1;
                }
                let e = draws as f64 / expected.len() as f64;
                stat += counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum::<f64>();
                df += expected.len() - 1;
            }
        }
    }
    let p = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    verdict(
        mismatches == 0 && p > 0.001,
        format!("{mismatches} support mismatches; pooled chi-square over {tested} configurations: stat={stat:.1} df={df} p={p:.3}"),
    )
}

struct PartitionCounts {
    union_mismatches: usize,
    overlaps: usize,
    count_mismatches: usize,
    configurations: usize,
}

fn partition_harness() -> PartitionCounts {
    let mut c = PartitionCounts {
        union_mismatches: 0,
        overlaps: 0,
        count_mismatches: 0,
        configurations: 0,
    };
    for net in harness(200, 6, true, 6) {
        let oracle = Oracle::new(&net).unwrap();
        let n = net.len();
        let m = MpNetwork::new(net).unwrap();
        for x in all_configurations(n) {
            c.configurations += 1;
            let spaces = m.reachable_spaces(&x, n).unwrap();
            let mut union = HashSet::new();
            let mut counted = 0u64;
            for space in spaces.spaces() {
                counted += space.transition_counts().unwrap().iter().sum::<u64>();
                for y in space.targets().unwrap() {
                    if !union.insert(y) {
                        c.overlaps += 1;
                    }
                }
            }
            if counted != union.len() as u64 {
                c.count_mismatches += 1;
            }
            let mut expected = oracle.mp_successors(&x).unwrap();
            expected.remove(&x);
            if union.into_iter().collect::<BTreeSet<_>>() != expected {
                c.union_mismatches += 1;
            }
        }
    }
    c
}

fn spaces_cover(c: &PartitionCounts) -> Verdict {
    verdict(
        c.union_mismatches == 0,
        format!("{} configurations, {} mismatches", c.configurations, c.union_mismatches),
    )
}

fn spaces_disjoint(c: &PartitionCounts) -> Verdict {
    verdict(
        c.overlaps == 0 && c.count_mismatches == 0,
        format!(
            "{} overlapping targets, {} count mismatches over {} configurations",
            c.overlaps, c.count_mismatches, c.configurations
        ),
    )
}

fn trap_space_equivalence() -> Verdict {
    let mut mismatches = 0;
    let mut total = 0;
    let mut rng = random_stream(8, 0);
    for k in 0..100 {
        let n = 1 + k % 10;
        let net = random_network(&mut rng, n, 3, k % 2 == 0);
        let oracle = Oracle::new(&net).unwrap();
        let m = MpNetwork::new(net).unwrap();
        let found: Vec<_> = minimal_trap_spaces(&m).unwrap().iter().copied().collect();
        let expected = oracle.minimal_trap_spaces().unwrap();
        total += expected.len();
        if found != expected {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!("100 networks, {total} minimal trap spaces, {mismatches} mismatches"),
    )
}

fn sub_hypercube_fixtures() -> Verdict {
    let m = load("toy_a.bnet");
    let set = |c: &[usize]| c.iter().map(|i| i - 1).collect::<ComponentSet>();
    let cases: [(&str, &[usize], &str); 6] = [
        ("001", &[], "001"),
        ("001", &[1], "*01"),
        ("001", &[1, 2], "**1"),
        ("001", &[1, 2, 3], "**1"),
        ("011", &[1, 2, 3], "**1"),
        ("011", &[2, 3], "0*1"),
    ];
    let mut wrong = Vec::new();
    for (x, k, expected) in cases {
        let x = cfg(x);
        let h = mpsim::Subhypercube::new(&x, m.spread(&x, set(k), 3).unwrap()).to_string();
        if h != expected {
            wrong.push(format!("<{x}>{k:?}={h}, expected {expected}"));
        }
    }
    verdict(
        wrong.is_empty(),
        format!("6 fixtures, {} wrong {}", wrong.len(), wrong.join("; ")),
    )
}

fn metastasis_fraction(report: &str, metastasis: usize) -> f64 {
    let v: Value = serde_json::from_str(report).unwrap();
    v["attractors"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["id"].as_str().unwrap().as_bytes()[metastasis] == b'1')
        .map(|r| r["fraction"].as_f64().unwrap())
        .sum()
}

/// Mean time of one sampling step at a fixed depth over the given states.
fn step_time(m: &MpNetwork, states: &[Configuration], depth: usize) -> f64 {
    let n = m.len();
    let params = SimulationParams::new(DepthDistribution::constant(depth, n).unwrap(), WeightVector::uniform(n));
    let mut rng = random_stream(1, 0);
    let start = Instant::now();
    for x in states {
        std::hint::black_box(sample_next_configuration(m, x, &params, &mut rng).unwrap());
    }
    start.elapsed().as_secs_f64() / states.len() as f64
}

fn literature_model() -> Verdict {
    let m = load("tumour_invasion.bnet");
    let net = m.network();
    let init = parse_configuration(
        &net.names()
            .iter()
            .map(|name| format!("{name}={}", u8::from(name == "ECMicroenv" || name == "DNAdamage")))
            .collect::<Vec<_>>()
            .join(","),
        net,
    )
    .unwrap()
    .to_string();
    let metastasis = net.index_of("Metastasis").unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    for depth in ["const:1", "exp"] {
        let common = ["--runs", "10000", "--depth", depth, "--seed", SEED];
        let wild = simulate("tumour_invasion.bnet", &init, &common);
        let mut mutant_args = common.to_vec();
        mutant_args.extend(["--mutation", "p53=0"]);
        let mutant = simulate("tumour_invasion.bnet", &init, &mutant_args);
        let fw = metastasis_fraction(&wild.stdout, metastasis);
        let fm = metastasis_fraction(&mutant.stdout, metastasis);
        pass &= fm > fw;
        lines.push(format!(
            "{depth}: Metastasis wild-type={fw:.4} p53=0={fm:.4} ({:.1}s + {:.1}s)",
            wild.elapsed.as_secs_f64(),
            mutant.elapsed.as_secs_f64()
        ));
    }

    // states visited by full-depth trajectories, replayed at both depths
    let attractors = minimal_trap_spaces(&m).unwrap();
    let n = m.len();
    let mut params = SimulationParams::new(DepthDistribution::exponential(n), WeightVector::uniform(n));
    params.stop = StopPolicy::StrongBasin;
    let x0 = cfg(&init);
    let mut states = Vec::new();
    for r in 0..200 {
        let t = simulate_trajectory(&m, &x0, &params, &attractors, &mut random_stream(2, r)).unwrap();
        states.extend(t.states);
    }
    let shallow = step_time(&m, &states, 1);
    let full = step_time(&m, &states, n);
    lines.push(format!(
        "per-step time depth 1 = {:.1}us, depth {n} = {:.1}us, slowdown {:.1}x over {} states",
        shallow * 1e6,
        full * 1e6,
        full / shallow,
        states.len()
    ));
    verdict(pass, lines.join("; "))
}

fn determinism() -> Verdict {
    let cases: [(&str, &str, &str, &str); 4] = [
        ("toy_a.bnet", "000", "const:3", "uniform"),
        ("toy_a.bnet", "000", "exp", "uniform"),
        ("toy_b.bnet", "111", "const:1", "uniform"),
        ("toy_b.bnet", "111", "const:1", "single"),
    ];
    let mut differing = Vec::new();
    for (name, init, depth, weights) in cases {
        for format in ["json", "csv"] {
            let outputs: Vec<String> = ["1", "4", "1"]
                .iter()
                .map(|workers| {
                    simulate(
                        name,
                        init,
                        &[
                            "--runs",
                            "10000",
                            "--depth",
                            depth,
                            "--weights",
                            weights,
                            "--seed",
                            SEED,
                            "--workers",
                            workers,
                            "--format",
                            format,
                            "--no-timing",
                        ],
                    )
                    .stdout
                })
                .collect();
            if outputs.windows(2).any(|w| w[0] != w[1]) {
                differing.push(format!("{name} {depth} {weights} {format}"));
            }
        }
    }
    verdict(
        differing.is_empty(),
        format!("8 report pairs at 1, 4 and 1 workers; differing: {differing:?}"),
    )
}

type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

fn main() {
    let partition = partition_harness();
    let checks: Vec<(&str, Check)> = vec![
        ("1 toy bistability", Box::new(toy_bistability)),
        ("2 exponential depth", Box::new(exponential_depth)),
        ("3 asynchronous ratio", Box::new(asynchronous_ratio)),
        ("4 depth-1 collapse", Box::new(depth_one_collapse)),
        ("5 single-flip collapse", Box::new(single_flip_collapse)),
        ("6 spaces cover the successors", Box::new(|| spaces_cover(&partition))),
        ("7 spaces are disjoint", Box::new(|| spaces_disjoint(&partition))),
        ("8 trap-space equivalence", Box::new(trap_space_equivalence)),
        ("9 sub-hypercube fixtures", Box::new(sub_hypercube_fixtures)),
        ("10 literature model", Box::new(literature_model)),
        ("11 determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
