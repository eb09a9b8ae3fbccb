use mpsim::{
    estimate_propensities, filter_reachable_attractors, minimal_trap_spaces, parse_bnet, parse_configuration,
    DepthDistribution, DepthSpec, MpNetwork, SimulationParams, WeightSpec, WeightVector,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/toy_a.bnet");
    let net = MpNetwork::new(parse_bnet(&std::fs::read_to_string(path)?)?)?;
    let x0 = parse_configuration("000", net.network())?;
    let depth = DepthDistribution::new(&DepthSpec::Exponential, net.len())?;
    let weights = WeightVector::new(&WeightSpec::Uniform, net.len())?;
    let params = SimulationParams::new(depth, weights);
    let attractors = filter_reachable_attractors(&minimal_trap_spaces(&net)?, &net, &x0)?;
    let est = estimate_propensities(&net, &x0, &params, &attractors, 10_000, None)?;
    for (id, count, fraction) in est.ranked() {
        println!("{id} {count} {fraction}");
    }
    Ok(())
}
