//! Shared helpers for the unit tests: random operators and random valid
//! models built through the Stratonovich side (so validity is a theorem,
//! not an assumption).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::operator::{Operator, C64};
use crate::slh::{stratonovich_to_ito, SLHTriple, StratonovichCoefficients};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_op(dim: usize, rng: &mut impl Rng) -> Operator {
    Operator::from_fn(dim, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Operator {
    let a = random_op(dim, rng);
    (&a + &a.dagger()).scale(c(0.5, 0.0))
}

/// Random Stratonovich coefficients with a Hermitian stacked quadratic part.
#[allow(clippy::needless_range_loop)]
pub fn random_strat(n: usize, d: usize, rng: &mut impl Rng) -> StratonovichCoefficients {
    let mut blocks = vec![vec![Operator::zeros(d); n]; n];
    for i in 0..n {
        for j in i..n {
            let b = random_op(d, rng);
            if i == j {
                blocks[i][j] = (&b + &b.dagger()).scale(c(0.5, 0.0));
            } else {
                blocks[j][i] = b.dagger();
                blocks[i][j] = b;
            }
        }
    }
    let linear: Vec<Operator> = (0..n).map(|_| random_op(d, rng)).collect();
    StratonovichCoefficients::new(blocks, linear, random_hermitian(d, rng)).unwrap()
}

/// Random valid SLH triple (unitary S, Hermitian H by construction).
pub fn random_triple(n: usize, d: usize, rng: &mut impl Rng) -> SLHTriple {
    stratonovich_to_ito(&random_strat(n, d, rng)).expect("well-conditioned by construction")
}
