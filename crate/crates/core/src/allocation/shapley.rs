use super::{marginal, Allocation, Method};
use crate::allocation::random_order::for_each_permutation;
use crate::coalition::{binomial, GameTable};
use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

/// Largest player count accepted by the factorial-time Shapley form.
pub const SHAPLEY_PERMUTATION_MAX: usize = 10;

/// Shapley values as a weighted sum over coalitions:
/// `φ_i = (1/d) Σ_{A ⊆ D∖{i}} C(d−1, |A|)^{-1} [v(A ∪ {i}) − v(A)]`.
pub fn shapley_coalitional(game: &GameTable) -> Allocation {
    let d = game.players();
    // weights[k] = 1 / (d · C(d−1, k))
    let weights: Vec<f64> = (0..d)
        .map(|k| 1.0 / (d as f64 * binomial(d - 1, k)))
        .collect();
    let shares = (0..d)
        .map(|i| {
            let mut acc = CompensatedSum::new();
            for bits in 0..1u32 << d {
                if bits & (1 << i) != 0 {
                    continue;
                }
                acc.add(weights[bits.count_ones() as usize] * marginal(game, bits, i));
            }
            acc.value()
        })
        .collect();
    Allocation::new(shares, game.grand_value(), Method::Shapley).with_warnings(game)
}

/// Shapley values as the average marginal contribution over all `d!`
/// orderings. Brute force; intended as an oracle for small games.
pub fn shapley_permutation(game: &GameTable) -> Result<Allocation> {
    let d = game.players();
    if d > SHAPLEY_PERMUTATION_MAX {
        return Err(Error::ComplexityGuard {
            what: "permutation Shapley values",
            d,
            max: SHAPLEY_PERMUTATION_MAX,
        });
    }
    let mut sums = vec![CompensatedSum::new(); d];
    let mut count = 0u64;
    for_each_permutation(d, |perm| {
        let mut prefix = 0u32;
        for &p in perm {
            sums[p].add(marginal(game, prefix, p));
            prefix |= 1 << p;
        }
        count += 1;
    });
    let shares = sums.iter().map(|s| s.value() / count as f64).collect();
    Ok(Allocation::new(shares, game.grand_value(), Method::Shapley).with_warnings(game))
}

/// Shapley effects from a table of closed or total Sobol' indices. The two
/// tables are dual to each other and give the same Shapley values.
pub fn shapley_effects_from_indices(table: &GameTable) -> Allocation {
    shapley_coalitional(table)
}
