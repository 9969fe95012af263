use super::{marginal, Allocation, Method};
use crate::coalition::GameTable;
use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

/// Largest player count for which a full ordering pmf is materialized.
pub const PMF_MAX_PLAYERS: usize = 8;

/// Calls `f` once for every ordering of `0..n` (Heap's algorithm).
pub fn for_each_permutation<F: FnMut(&[usize])>(n: usize, mut f: F) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// A probability mass function over orderings of the players.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingPmf {
    d: usize,
    entries: Vec<(Vec<usize>, f64)>,
}

impl OrderingPmf {
    /// Builds a pmf from explicit `(ordering, weight)` pairs. Weights must be
    /// nonnegative and sum to one within `1e-12`.
    pub fn new(d: usize, entries: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        for (perm, w) in &entries {
            let mut seen = vec![false; d];
            if perm.len() != d
                || perm
                    .iter()
                    .any(|&p| p >= d || std::mem::replace(&mut seen[p], true))
            {
                return Err(Error::contract(format!(
                    "{perm:?} is not an ordering of 0..{d}"
                )));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::contract(format!("invalid ordering weight {w}")));
            }
        }
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::contract(format!(
                "ordering weights sum to {total}, not 1"
            )));
        }
        Ok(Self { d, entries })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        guard(d)?;
        let mut perms = Vec::new();
        for_each_permutation(d, |p| perms.push(p.to_vec()));
        let w = 1.0 / perms.len() as f64;
        // Rounding in n·(1/n) stays far below the 1e-12 normalization check.
        Self::new(d, perms.into_iter().map(|p| (p, w)).collect())
    }

    /// All mass on one ordering.
    pub fn point(ordering: Vec<usize>) -> Result<Self> {
        let d = ordering.len();
        Self::new(d, vec![(ordering, 1.0)])
    }

    /// The proportional-values pmf `p(π) ∝ Π_j v(C_j(π))^{-1}` of a positive game.
    pub fn proportional(game: &GameTable) -> Result<Self> {
        let d = game.players();
        guard(d)?;
        let mut entries = Vec::new();
        let mut total = CompensatedSum::new();
        let mut failure = None;
        for_each_permutation(d, |perm| {
            let mut prefix = 0u32;
            let mut weight = 1.0;
            for &p in perm {
                prefix |= 1 << p;
                let v = game.value_bits(prefix);
                if v <= 0.0 && failure.is_none() {
                    failure = Some((prefix, v));
                }
                weight /= v;
            }
            total.add(weight);
            entries.push((perm.to_vec(), weight));
        });
        if let Some((bits, value)) = failure {
            return Err(Error::Positivity {
                coalition: super::coalition_of(bits, d).to_string(),
                value,
            });
        }
        let total = total.value();
        for e in &mut entries {
            e.1 /= total;
        }
        Self::new(d, entries)
    }

    pub fn players(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[(Vec<usize>, f64)] {
        &self.entries
    }
}

fn guard(d: usize) -> Result<()> {
    if d > PMF_MAX_PLAYERS {
        Err(Error::ComplexityGuard {
            what: "ordering pmf",
            d,
            max: PMF_MAX_PLAYERS,
        })
    } else {
        Ok(())
    }
}

/// `φ_i = Σ_π p(π) [v(C_{π(i)}(π)) − v(C_{π(i)−1}(π))]`.
pub fn random_order_allocation(game: &GameTable, pmf: &OrderingPmf) -> Result<Allocation> {
    let d = game.players();
    if pmf.players() != d {
        return Err(Error::contract(format!(
            "pmf over {} players used on a {d}-player game",
            pmf.players()
        )));
    }
    let mut sums = vec![CompensatedSum::new(); d];
    for (perm, w) in pmf.entries() {
        let mut prefix = 0u32;
        for &p in perm {
            sums[p].add(w * marginal(game, prefix, p));
            prefix |= 1 << p;
        }
    }
    let shares = sums.iter().map(CompensatedSum::value).collect();
    Ok(Allocation::new(shares, game.grand_value(), Method::RandomOrder).with_warnings(game))
}
