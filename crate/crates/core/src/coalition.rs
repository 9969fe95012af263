//! Coalitions of players and materialized cooperative games.
//!
//! A [`Coalition`] is a bitmask over the players `0..d`. A [`GameTable`] stores
//! the value of every one of the `2^d` coalitions densely, indexed by bitmask.
//! Tables are immutable once built; the monotonicity and nonnegativity flags
//! are computed at construction.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Largest supported number of players.
pub const MAX_PLAYERS: usize = 20;

/// Absolute tolerance used when checking monotonicity and nonnegativity.
pub const VALIDATION_TOL: f64 = 1e-12;

fn check_dim(d: usize) -> Result<()> {
    if (1..=MAX_PLAYERS).contains(&d) {
        Ok(())
    } else {
        Err(Error::Dimension(d))
    }
}

/// A subset of the players `0..d`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    bits: u32,
    d: u8,
}

impl Coalition {
    pub fn new(bits: u32, d: usize) -> Result<Self> {
        check_dim(d)?;
        if (bits as u64) >> d != 0 {
            return Err(Error::contract(format!(
                "bitmask {bits:#b} has players outside 0..{d}"
            )));
        }
        Ok(Self { bits, d: d as u8 })
    }

    /// Unchecked constructor for internal loops where `bits < 2^d` is known.
    #[inline]
    pub(crate) fn from_bits(bits: u32, d: usize) -> Self {
        debug_assert!((bits as u64) >> d == 0);
        Self { bits, d: d as u8 }
    }

    pub fn empty(d: usize) -> Self {
        Self::from_bits(0, d)
    }

    pub fn full(d: usize) -> Self {
        Self::from_bits(full_mask(d), d)
    }

    pub fn singleton(player: usize, d: usize) -> Result<Self> {
        if player >= d {
            return Err(Error::contract(format!(
                "player {player} out of range 0..{d}"
            )));
        }
        Self::new(1 << player, d)
    }

    pub fn from_players(players: &[usize], d: usize) -> Result<Self> {
        check_dim(d)?;
        let mut bits = 0u32;
        for &p in players {
            if p >= d {
                return Err(Error::contract(format!("player {p} out of range 0..{d}")));
            }
            bits |= 1 << p;
        }
        Ok(Self::from_bits(bits, d))
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn index(self) -> usize {
        self.bits as usize
    }

    #[inline]
    pub fn players(self) -> usize {
        self.d as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn is_full(self) -> bool {
        self.bits == full_mask(self.d as usize)
    }

    #[inline]
    pub fn contains(self, player: usize) -> bool {
        player < self.d as usize && self.bits & (1 << player) != 0
    }

    #[inline]
    pub fn with(self, player: usize) -> Self {
        Self::from_bits(self.bits | (1 << player), self.d as usize)
    }

    #[inline]
    pub fn without(self, player: usize) -> Self {
        Self::from_bits(self.bits & !(1 << player), self.d as usize)
    }

    #[inline]
    pub fn complement(self) -> Self {
        Self::from_bits(!self.bits & full_mask(self.d as usize), self.d as usize)
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        Self::from_bits(self.bits | other.bits, self.d as usize)
    }

    #[inline]
    pub fn difference(self, other: Self) -> Self {
        Self::from_bits(self.bits & !other.bits, self.d as usize)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        Self::from_bits(self.bits & other.bits, self.d as usize)
    }

    #[inline]
    pub fn is_subset_of(self, other: Self) -> bool {
        self.bits & !other.bits == 0
    }

    /// Members in ascending order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let p = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(p)
            }
        })
    }

    /// Serialization used by the value-table CSV: sorted 1-based indices joined
    /// by `+`, or `0` for the empty coalition.
    pub fn to_label(self) -> String {
        if self.is_empty() {
            return "0".to_string();
        }
        self.members()
            .map(|p| (p + 1).to_string())
            .collect::<Vec<_>>()
            .join("+")
    }

    /// Parses the label format of [`Coalition::to_label`] into 0-based players.
    pub fn parse_label(label: &str) -> std::result::Result<Vec<usize>, String> {
        let label = label.trim();
        if label == "0" {
            return Ok(Vec::new());
        }
        let mut players = Vec::new();
        for part in label.split('+') {
            let idx: usize = part
                .trim()
                .parse()
                .map_err(|_| format!("bad player index {part:?} in coalition {label:?}"))?;
            if idx == 0 || idx > MAX_PLAYERS {
                return Err(format!("player index {idx} out of range 1..={MAX_PLAYERS}"));
            }
            if players.contains(&(idx - 1)) {
                return Err(format!("player {idx} repeated in coalition {label:?}"));
            }
            players.push(idx - 1);
        }
        Ok(players)
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, p) in self.members().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", p + 1)?;
        }
        f.write_str("}")
    }
}

#[inline]
pub(crate) fn full_mask(d: usize) -> u32 {
    ((1u64 << d) - 1) as u32
}

/// All `2^d` coalitions in nondecreasing cardinality, ties by ascending bits.
pub fn enumerate_coalitions(d: usize) -> Result<Vec<Coalition>> {
    check_dim(d)?;
    let mut all: Vec<Coalition> = (0..1u32 << d).map(|b| Coalition::from_bits(b, d)).collect();
    all.sort_by_key(|c| (c.len(), c.bits()));
    Ok(all)
}

/// Binomial coefficient as a float; exact for the sizes used here.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// A pair `(A, A ∪ {i})` whose value decreases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityViolation {
    pub subset: Coalition,
    pub superset: Coalition,
    pub drop: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub monotonicity: Vec<MonotonicityViolation>,
    pub negative: Vec<Coalition>,
}

impl ValidationReport {
    pub fn is_monotone(&self) -> bool {
        self.monotonicity.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.negative.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.is_monotone() && self.is_nonnegative()
    }
}

/// Dense value function over all coalitions of `d` players.
#[derive(Clone, PartialEq)]
pub struct GameTable {
    d: usize,
    values: Vec<f64>,
    monotone: bool,
    nonnegative: bool,
}

impl fmt::Debug for GameTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for c in enumerate_coalitions(self.d).unwrap_or_default() {
            m.entry(&c, &self.values[c.index()]);
        }
        m.finish()
    }
}

impl GameTable {
    /// Builds a table from values indexed by coalition bitmask.
    ///
    /// Requires `2^d` finite values and `v(∅) = 0`.
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(d)?;
        if values.len() != 1 << d {
            return Err(Error::contract(format!(
                "expected {} values for d = {d}, got {}",
                1usize << d,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "non-finite value for coalition {}",
                Coalition::from_bits(bad as u32, d)
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::contract(format!(
                "value of the empty coalition must be 0, got {}",
                values[0]
            )));
        }
        let mut table = Self {
            d,
            values,
            monotone: false,
            nonnegative: false,
        };
        let report = table.validate();
        table.monotone = report.is_monotone();
        table.nonnegative = report.is_nonnegative();
        Ok(table)
    }

    pub fn from_fn<F: FnMut(Coalition) -> f64>(d: usize, mut f: F) -> Result<Self> {
        check_dim(d)?;
        let values = (0..1u32 << d)
            .map(|b| f(Coalition::from_bits(b, d)))
            .collect();
        Self::new(d, values)
    }

    #[inline]
    pub fn players(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn value(&self, c: Coalition) -> f64 {
        self.values[c.index()]
    }

    #[inline]
    pub(crate) fn value_bits(&self, bits: u32) -> f64 {
        self.values[bits as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grand_value(&self) -> f64 {
        self.values[full_mask(self.d) as usize]
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn grand_coalition(&self) -> Coalition {
        Coalition::full(self.d)
    }

    /// The dual game `w(A) = v(D) - v(D \ A)`.
    pub fn dual(&self) -> GameTable {
        let full = full_mask(self.d);
        let grand = self.grand_value();
        let values: Vec<f64> = (0..1u32 << self.d)
            .map(|b| grand - self.values[(full & !b) as usize])
            .collect();
        // v(∅) = 0 makes w(∅) = v(D) - v(D) = 0 exactly.
        GameTable::new(self.d, values).expect("dual of a valid table is valid")
    }

    /// Lists every decreasing pair `(A, A ∪ {i})` and every negative value,
    /// beyond an absolute tolerance of [`VALIDATION_TOL`].
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for b in 0..1u32 << self.d {
            let va = self.values[b as usize];
            if va < -VALIDATION_TOL {
                report.negative.push(Coalition::from_bits(b, self.d));
            }
            for i in 0..self.d {
                if b & (1 << i) != 0 {
                    continue;
                }
                let sup = b | (1 << i);
                let vs = self.values[sup as usize];
                if vs < va - VALIDATION_TOL {
                    report.monotonicity.push(MonotonicityViolation {
                        subset: Coalition::from_bits(b, self.d),
                        superset: Coalition::from_bits(sup, self.d),
                        drop: va - vs,
                    });
                }
            }
        }
        report
    }

    /// The game `c·v`.
    pub fn scaled(&self, c: f64) -> Result<GameTable> {
        GameTable::new(self.d, self.values.iter().map(|v| c * v).collect())
    }

    /// Restriction of the game to the players of `players`, re-indexed so that
    /// the `k`-th smallest member becomes player `k`.
    pub fn subgame(&self, players: Coalition) -> Result<GameTable> {
        let members: Vec<usize> = players.members().collect();
        let m = members.len();
        check_dim(m)?;
        let values = (0..1u32 << m)
            .map(|local| self.values[expand_bits(local, &members) as usize])
            .collect();
        GameTable::new(m, values)
    }

    /// Writes the value-table CSV (`coalition,value`), coalitions in
    /// enumeration order, values with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "coalition,value")?;
        for c in enumerate_coalitions(self.d)? {
            writeln!(out, "{},{}", c.to_label(), format_value(self.value(c)))?;
        }
        Ok(())
    }

    /// Reads the value-table CSV. Lines starting with `#` are comments. The
    /// player count is the largest index that appears; every coalition must be
    /// present exactly once.
    pub fn read_csv<R: BufRead>(input: R) -> Result<GameTable> {
        let mut rows: Vec<(usize, Vec<usize>, f64)> = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if !saw_header {
                let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
                if cols != ["coalition", "value"] {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected header `coalition,value`, got {trimmed:?}"),
                    });
                }
                saw_header = true;
                continue;
            }
            let (label, value) = trimmed.split_once(',').ok_or_else(|| Error::Parse {
                line: lineno,
                message: "expected two columns".into(),
            })?;
            let players = Coalition::parse_label(label).map_err(|message| Error::Parse {
                line: lineno,
                message,
            })?;
            let value: f64 = value.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad value {:?}", value.trim()),
            })?;
            rows.push((lineno, players, value));
        }
        if !saw_header {
            return Err(Error::Parse {
                line: 0,
                message: "empty value table".into(),
            });
        }
        let d = rows
            .iter()
            .flat_map(|(_, p, _)| p.iter().map(|i| i + 1))
            .max()
            .unwrap_or(0);
        check_dim(d)?;
        let mut values = vec![f64::NAN; 1 << d];
        let mut seen = vec![false; 1 << d];
        for (lineno, players, value) in rows {
            let c = Coalition::from_players(&players, d)?;
            if seen[c.index()] {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("duplicate coalition {}", c.to_label()),
                });
            }
            seen[c.index()] = true;
            values[c.index()] = value;
        }
        let missing: Vec<String> = enumerate_coalitions(d)?
            .into_iter()
            .filter(|c| !seen[c.index()])
            .map(|c| c.to_label())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingCoalitions(missing));
        }
        GameTable::new(d, values)
    }
}

/// Scatters the low bits of `local` onto the positions listed in `members`.
#[inline]
pub(crate) fn expand_bits(local: u32, members: &[usize]) -> u32 {
    let mut out = 0u32;
    let mut rest = local;
    while rest != 0 {
        let k = rest.trailing_zeros() as usize;
        out |= 1 << members[k];
        rest &= rest - 1;
    }
    out
}

/// 17 significant digits, enough for an exact `f64` round trip.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}
