//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use gsa_core::allocation::{
    proportional_values, proportional_values_extended, shapley_coalitional, Allocation,
};
use gsa_core::{Coalition, GameTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const AXIOM_TOL: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn bits_of(players: &[usize]) -> u32 {
    players.iter().fold(0, |acc, &p| acc | 1 << p)
}

/// Inserts a null player at position `at` into `base`.
pub fn with_null_player(base: &GameTable, at: usize) -> GameTable {
    let d = base.players() + 1;
    GameTable::from_fn(d, |c| {
        let low = c.bits() & ((1 << at) - 1);
        let high = (c.bits() >> (at + 1)) << at;
        base.values()[(low | high) as usize]
    })
    .unwrap()
}

/// Averages `v` with its image under the swap of players `i` and `j`.
pub fn symmetrized(g: &GameTable, i: usize, j: usize) -> GameTable {
    GameTable::from_fn(g.players(), |c| {
        let b = c.bits();
        let (bi, bj) = (b >> i & 1, b >> j & 1);
        let swapped = (b & !(1 << i) & !(1 << j)) | bj << i | bi << j;
        0.5 * (g.values()[b as usize] + g.values()[swapped as usize])
    })
    .unwrap()
}

pub fn efficiency_gap(a: &Allocation, g: &GameTable) -> f64 {
    (a.shares.iter().sum::<f64>() - g.grand_value()).abs()
}

/// `|φ_i(v) − φ_i(v_{−j}) − φ_j(v) + φ_j(v_{−i})|` maximized over pairs.
pub fn balanced_contributions_gap(g: &GameTable) -> f64 {
    let d = g.players();
    let full = shapley_coalitional(g).shares;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let without_j = shapley_coalitional(&sub_without(g, j)).shares;
            let without_i = shapley_coalitional(&sub_without(g, i)).shares;
            let lhs = full[i] - without_j[reindex(i, j)];
            let rhs = full[j] - without_i[reindex(j, i)];
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// `|PV_i(v)/PV_i(v_{−j}) − PV_j(v)/PV_j(v_{−i})|` maximized over pairs.
pub fn equal_gains_gap(g: &GameTable) -> f64 {
    let d = g.players();
    let full = proportional_values(g).unwrap().shares;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let without_j = proportional_values(&sub_without(g, j)).unwrap().shares;
            let without_i = proportional_values(&sub_without(g, i)).unwrap().shares;
            let lhs = full[i] / without_j[reindex(i, j)];
            let rhs = full[j] / without_i[reindex(j, i)];
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

fn sub_without(g: &GameTable, j: usize) -> GameTable {
    g.subgame(Coalition::full(g.players()).without(j)).unwrap()
}

/// Index of player `i` once player `removed` is dropped.
fn reindex(i: usize, removed: usize) -> usize {
    if i > removed {
        i - 1
    } else {
        i
    }
}

pub fn pv0(g: &GameTable) -> Allocation {
    proportional_values_extended(g, 0.0).unwrap()
}

/// Proportional values by explicit enumeration of all orderings, with
/// weights `Π_j v(C_j)^{-1}`. Independent of the library's recursion.
pub fn pv_by_orderings(g: &GameTable) -> Vec<f64> {
    let d = g.players();
    let mut shares = vec![0.0; d];
    let mut total = 0.0;
    let mut perm: Vec<usize> = Vec::with_capacity(d);
    let mut used = vec![false; d];
    fn rec(
        g: &GameTable,
        perm: &mut Vec<usize>,
        used: &mut [bool],
        shares: &mut [f64],
        total: &mut f64,
    ) {
        let d = g.players();
        if perm.len() == d {
            let mut prefix = 0usize;
            let mut weight = 1.0;
            let mut marginals = vec![0.0; d];
            for &p in perm.iter() {
                let before = g.values()[prefix];
                prefix |= 1 << p;
                weight /= g.values()[prefix];
                marginals[p] = g.values()[prefix] - before;
            }
            *total += weight;
            for (s, m) in shares.iter_mut().zip(&marginals) {
                *s += weight * m;
            }
            return;
        }
        for p in 0..d {
            if !used[p] {
                used[p] = true;
                perm.push(p);
                rec(g, perm, used, shares, total);
                perm.pop();
                used[p] = false;
            }
        }
    }
    rec(g, &mut perm, &mut used, &mut shares, &mut total);
    shares.iter().map(|s| s / total).collect()
}

/// Shapley values by explicit enumeration of all orderings.
pub fn shapley_by_orderings(g: &GameTable) -> Vec<f64> {
    let d = g.players();
    let mut shares = vec![0.0; d];
    let mut count = 0.0;
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(perm) = stack.pop() {
        if perm.len() == d {
            let mut prefix = 0usize;
            for &p in &perm {
                let before = g.values()[prefix];
                prefix |= 1 << p;
                shares[p] += g.values()[prefix] - before;
            }
            count += 1.0;
            continue;
        }
        for p in 0..d {
            if !perm.contains(&p) {
                let mut next = perm.clone();
                next.push(p);
                stack.push(next);
            }
        }
    }
    shares.iter().map(|s| s / count).collect()
}
