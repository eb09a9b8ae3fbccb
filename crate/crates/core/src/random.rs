//! Random networks for testing.

use rand::seq::index::sample;
use rand::Rng;

use crate::model::{BooleanNetwork, Expr};

/// A random network with `n` components and at most `max_fanin` regulators each.
///
/// Locally monotone networks use disjunctions of conjunctions of signed
/// literals, one sign per regulator. Otherwise each local function is a random
/// truth table over its regulators, written in disjunctive normal form.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, n: usize, max_fanin: usize, monotone: bool) -> BooleanNetwork {
    assert!(n > 0 && n <= crate::model::MAX_COMPONENTS);
    let functions = (0..n)
        .map(|_| {
            let k = rng.random_range(0..=max_fanin.min(n));
            let regs: Vec<usize> = sample(rng, n, k).into_vec();
            if monotone {
                monotone_function(rng, &regs)
            } else {
                truth_table_function(rng, &regs)
            }
        })
        .collect();
    BooleanNetwork::anonymous(functions).expect("generated network is valid")
}

fn literal(i: usize, positive: bool) -> Expr {
    if positive {
        Expr::var(i)
    } else {
        Expr::not(Expr::var(i))
    }
}

fn monotone_function<R: Rng + ?Sized>(rng: &mut R, regs: &[usize]) -> Expr {
    if regs.is_empty() {
        return Expr::Const(rng.random());
    }
    let signs: Vec<bool> = regs.iter().map(|_| rng.random()).collect();
    let terms = rng.random_range(1..=2.min(regs.len()));
    Expr::or(
        (0..terms)
            .map(|_| {
                let picked: Vec<Expr> = regs
                    .iter()
                    .zip(&signs)
                    .filter(|_| rng.random_bool(0.6))
                    .map(|(&i, &s)| literal(i, s))
                    .collect();
                if picked.is_empty() {
                    let j = rng.random_range(0..regs.len());
                    literal(regs[j], signs[j])
                } else {
                    Expr::and(picked)
                }
            })
            .collect(),
    )
}

fn truth_table_function<R: Rng + ?Sized>(rng: &mut R, regs: &[usize]) -> Expr {
    let rows = 1usize << regs.len();
    let ones: Vec<usize> = (0..rows).filter(|_| rng.random()).collect();
    if ones.is_empty() {
        return Expr::Const(false);
    }
    if ones.len() == rows {
        return Expr::Const(true);
    }
    Expr::or(
        ones.into_iter()
            .map(|row| {
                Expr::and(
                    regs.iter()
                        .enumerate()
                        .map(|(b, &i)| literal(i, row >> b & 1 == 1))
                        .collect(),
                )
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::random_stream;

    #[test]
    fn monotone_networks_are_locally_monotone() {
        let mut rng = random_stream(1, 0);
        for _ in 0..50 {
            let net = random_network(&mut rng, 6, 3, true);
            assert!(net.is_locally_monotone().unwrap());
            assert!((0..6).all(|i| net.support(i).len() <= 3));
        }
    }

    #[test]
    fn general_networks_respect_fanin() {
        let mut rng = random_stream(2, 0);
        for _ in 0..50 {
            let net = random_network(&mut rng, 5, 3, false);
            assert!((0..5).all(|i| net.support(i).len() <= 3));
        }
    }
}
