//! Random game generators for tests and property checks.

use rand::Rng;

use crate::coalition::{Coalition, GameTable};

/// A positive monotone game normalized to `v(D) = 1`.
///
/// Each coalition gets the largest value of its immediate subsets plus a
/// uniform increment, so every value is strictly above all of its subsets.
pub fn random_monotone_game<R: Rng + ?Sized>(d: usize, rng: &mut R) -> GameTable {
    build(d, rng, &[])
}

/// A nonnegative monotone game with planted null coalitions, normalized to
/// `v(D) = 1`.
///
/// One or two random coalitions of a common size `k` in `1..d` are chosen;
/// they and all of their subsets are null, everything else is positive. The
/// largest null coalitions are exactly the planted ones.
pub fn random_game_with_nulls<R: Rng + ?Sized>(d: usize, rng: &mut R) -> GameTable {
    assert!(d >= 2, "planted nulls need at least two players");
    let k = rng.random_range(1..d);
    let count = if rng.random_bool(0.5) { 2 } else { 1 };
    let mut bases: Vec<u32> = Vec::new();
    while bases.len() < count {
        let mut players: Vec<usize> = (0..d).collect();
        for i in 0..k {
            let j = rng.random_range(i..d);
            players.swap(i, j);
        }
        let bits = players[..k].iter().fold(0u32, |acc, &p| acc | 1 << p);
        if !bases.contains(&bits) {
            bases.push(bits);
        }
    }
    build(d, rng, &bases)
}

fn build<R: Rng + ?Sized>(d: usize, rng: &mut R, null_bases: &[u32]) -> GameTable {
    let mut values = vec![0.0f64; 1 << d];
    let mut order: Vec<u32> = (1..1u32 << d).collect();
    order.sort_by_key(|b| (b.count_ones(), *b));
    for bits in order {
        if null_bases.iter().any(|&z| bits & !z == 0) {
            continue;
        }
        let floor = (0..d)
            .filter(|i| bits & (1 << i) != 0)
            .map(|i| values[(bits & !(1 << i)) as usize])
            .fold(0.0, f64::max);
        values[bits as usize] = floor + rng.random_range(0.05..1.0);
    }
    let total = values[(1usize << d) - 1];
    for v in &mut values {
        *v /= total;
    }
    GameTable::new(d, values).expect("generated table is valid")
}

/// Coalition helper for tests: players given 0-based.
pub fn coalition(players: &[usize], d: usize) -> Coalition {
    Coalition::from_players(players, d).expect("valid players")
}
