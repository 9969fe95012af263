//! Proportional values, their extension to games with null coalitions, and
//! proportional marginal effects.
//!
//! The ratio potential of a positive game is
//! `R(∅) = 1`, `R(A) = v(A) / Σ_{j∈A} R(A∖{j})^{-1}`,
//! and the proportional values are `PV_i = R(D) / R(D∖{i})`.

use super::{coalition_of, Allocation, Method};
use crate::allocation::random_order::for_each_permutation;
use crate::coalition::{expand_bits, Coalition, GameTable};
use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

/// Largest player count accepted by the permutation-sum oracle.
pub const PV_ORACLE_MAX: usize = 8;

/// Ratio potentials of every subset of a ground coalition.
///
/// Built level by level over subset cardinality: each subset reads only the
/// potentials of its immediate subsets, and each value of `v` is read once.
#[derive(Debug, Clone)]
pub struct RatioPotentials {
    ground: Coalition,
    members: Vec<usize>,
    // Indexed by the compact mask over `members`.
    potentials: Vec<f64>,
}

impl RatioPotentials {
    /// `value(bits)` is queried for every nonempty subset `bits` of `ground`
    /// and must be strictly positive there.
    pub fn build<F: Fn(Coalition) -> f64>(ground: Coalition, value: F) -> Result<Self> {
        let d = ground.players();
        let members: Vec<usize> = ground.members().collect();
        let a = members.len();
        let size = 1usize << a;
        let mut potentials = vec![0.0; size];
        potentials[0] = 1.0;

        let mut by_level: Vec<Vec<u32>> = vec![Vec::new(); a + 1];
        for local in 1..size as u32 {
            by_level[local.count_ones() as usize].push(local);
        }
        for level in by_level.iter().skip(1) {
            for &local in level {
                let full = expand_bits(local, &members);
                let c = Coalition::from_bits(full, d);
                let v = value(c);
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Positivity {
                        coalition: c.to_string(),
                        value: v,
                    });
                }
                let mut inv = CompensatedSum::new();
                let mut rest = local;
                while rest != 0 {
                    let low = rest & rest.wrapping_neg();
                    inv.add(1.0 / potentials[(local ^ low) as usize]);
                    rest ^= low;
                }
                potentials[local as usize] = v / inv.value();
            }
        }
        Ok(Self {
            ground,
            members,
            potentials,
        })
    }

    pub fn ground(&self) -> Coalition {
        self.ground
    }

    /// `R(ground)`.
    pub fn potential(&self) -> f64 {
        self.potentials[self.potentials.len() - 1]
    }

    /// `R(subset)` for any subset of the ground coalition.
    pub fn get(&self, subset: Coalition) -> Result<f64> {
        if !subset.is_subset_of(self.ground) {
            return Err(Error::contract(format!(
                "{subset} is not a subset of {}",
                self.ground
            )));
        }
        let mut local = 0u32;
        for (k, &m) in self.members.iter().enumerate() {
            if subset.contains(m) {
                local |= 1 << k;
            }
        }
        Ok(self.potentials[local as usize])
    }

    /// `R(ground ∖ {player})` for a member of the ground coalition.
    pub fn potential_without(&self, player: usize) -> f64 {
        let k = self
            .members
            .iter()
            .position(|&m| m == player)
            .expect("player belongs to the ground coalition");
        self.potentials[(self.potentials.len() - 1) ^ (1 << k)]
    }
}

/// The ratio potential `R(A, v)` of one coalition.
pub fn ratio_potential<F: Fn(Coalition) -> f64>(ground: Coalition, value: F) -> Result<f64> {
    Ok(RatioPotentials::build(ground, value)?.potential())
}

fn pv_shares(game: &GameTable) -> Result<Vec<f64>> {
    let d = game.players();
    let table = RatioPotentials::build(game.grand_coalition(), |c| game.value(c))?;
    let r = table.potential();
    Ok((0..d).map(|i| r / table.potential_without(i)).collect())
}

/// Proportional values of a positive game.
///
/// Any null or negative value on a nonempty coalition is an error; such games
/// go through [`proportional_values_extended`].
pub fn proportional_values(game: &GameTable) -> Result<Allocation> {
    let shares = pv_shares(game)?;
    Ok(Allocation::new(shares, game.grand_value(), Method::Pv).with_warnings(game))
}

/// Brute-force proportional values from sums over orderings:
/// `PV_i = Σ_{π ∈ S(D∖i)} Π_j v(C_j(π))^{-1} / Σ_{σ ∈ S(D)} Π_j v(C_j(σ))^{-1}`.
pub fn pv_permutation_oracle(game: &GameTable) -> Result<Allocation> {
    let d = game.players();
    if d > PV_ORACLE_MAX {
        return Err(Error::ComplexityGuard {
            what: "permutation proportional values",
            d,
            max: PV_ORACLE_MAX,
        });
    }
    if let Some(bits) = (1..1u32 << d).find(|&b| !(game.value_bits(b) > 0.0)) {
        return Err(Error::Positivity {
            coalition: coalition_of(bits, d).to_string(),
            value: game.value_bits(bits),
        });
    }
    let ordering_sum = |players: &[usize]| {
        let mut acc = CompensatedSum::new();
        for_each_permutation(players.len(), |perm| {
            let mut prefix = 0u32;
            let mut w = 1.0;
            for &k in perm {
                prefix |= 1 << players[k];
                w /= game.value_bits(prefix);
            }
            acc.add(w);
        });
        acc.value()
    };
    let all: Vec<usize> = (0..d).collect();
    let denominator = ordering_sum(&all);
    let shares = (0..d)
        .map(|i| {
            let rest: Vec<usize> = all.iter().copied().filter(|&p| p != i).collect();
            ordering_sum(&rest) / denominator
        })
        .collect();
    Ok(Allocation::new(shares, game.grand_value(), Method::Pv).with_warnings(game))
}

/// Null-coalition structure of a nonnegative game.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroStructure {
    /// Cardinality of the largest null coalition.
    pub k_max: usize,
    /// Null coalitions of cardinality `k_max`, ascending by bitmask.
    pub largest_nulls: Vec<Coalition>,
    /// Players present in every largest null coalition.
    pub always_null: Coalition,
    /// Values at or below this threshold count as null.
    pub tau: f64,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau >= 0.0 {
        Ok(())
    } else {
        Err(Error::contract(format!(
            "zero threshold must be finite and >= 0, got {tau}"
        )))
    }
}

/// Classifies values `<= tau` as null and finds the largest null coalitions.
/// A game with no null nonempty coalition has `k_max = 0` and `{∅}` as its
/// only largest null coalition.
pub fn zero_structure(game: &GameTable, tau: f64) -> Result<ZeroStructure> {
    check_tau(tau)?;
    let d = game.players();
    let mut k_max = 0;
    let mut largest_nulls = vec![Coalition::empty(d)];
    for bits in 1..1u32 << d {
        if game.value_bits(bits) > tau {
            continue;
        }
        let k = bits.count_ones() as usize;
        let c = Coalition::from_bits(bits, d);
        if k > k_max {
            k_max = k;
            largest_nulls.clear();
            largest_nulls.push(c);
        } else if k == k_max {
            largest_nulls.push(c);
        }
    }
    let always_null = largest_nulls
        .iter()
        .fold(Coalition::full(d), |acc, &c| acc.intersection(c));
    Ok(ZeroStructure {
        k_max,
        largest_nulls,
        always_null,
        tau,
    })
}

/// Proportional values extended to nonnegative games.
///
/// Players in every largest null coalition get zero. The others get
/// `Σ_{A ∈ K, i ∉ A} R(D∖{i}∖A, v_A)^{-1} / Σ_{A ∈ K} R(D∖A, v_A)^{-1}` where `K`
/// holds the largest null coalitions and `v_A(B) = v(A ∪ B)`. Without null
/// coalitions this is exactly [`proportional_values`].
pub fn proportional_values_extended(game: &GameTable, tau: f64) -> Result<Allocation> {
    extended(game, tau, Method::Pv0)
}

fn extended(game: &GameTable, tau: f64, method: Method) -> Result<Allocation> {
    let d = game.players();
    let zeros = zero_structure(game, tau)?;
    if game.grand_value() <= tau {
        return Ok(Allocation::degenerate(d, method).with_warnings(game));
    }
    if zeros.k_max == 0 {
        let shares = pv_shares(game)?;
        return Ok(Allocation::new(shares, game.grand_value(), method).with_warnings(game));
    }

    let mut numerators = vec![CompensatedSum::new(); d];
    let mut denominator = CompensatedSum::new();
    for &null in &zeros.largest_nulls {
        let rest = null.complement();
        let table = RatioPotentials::build(rest, |b| game.value(b.union(null)))?;
        denominator.add(1.0 / table.potential());
        for i in rest.members() {
            numerators[i].add(1.0 / table.potential_without(i));
        }
    }
    let denominator = denominator.value();
    let shares = (0..d)
        .map(|i| {
            if zeros.always_null.contains(i) {
                0.0
            } else {
                numerators[i].value() / denominator
            }
        })
        .collect();
    Ok(Allocation::new(shares, game.grand_value(), method).with_warnings(game))
}

/// Proportional marginal effects: extended proportional values of a total
/// Sobol' index table. The shares sum to the table's grand value.
pub fn pme_from_total_indices(st_table: &GameTable, tau: f64) -> Result<Allocation> {
    check_tau(tau)?;
    if st_table.grand_value() <= tau {
        return Err(Error::Degenerate(format!(
            "total index of the grand coalition {} is not above the zero threshold {tau}",
            st_table.grand_value()
        )));
    }
    extended(st_table, tau, Method::Pme)
}

/// Inputs detected as exogenous from a total index table: the players present
/// in every largest null coalition. These get a zero PME and no others do.
pub fn detect_exogenous(st_table: &GameTable, tau: f64) -> Result<Coalition> {
    Ok(zero_structure(st_table, tau)?.always_null)
}
