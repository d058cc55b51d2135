//! Exact Ising spectra by exhaustive enumeration.
//!
//! States are visited in reflected Gray-code order so consecutive states
//! differ by one spin and the energy is updated from that spin's local field
//! in `O(degree)`. Global flip symmetry halves the work: the last spin is
//! pinned to `+1` and every count is doubled.

use alloc::vec::Vec;

use thiserror::Error;

use crate::ising::{IsingProblem, SpinVector};

/// Default largest `m` enumerated without an explicit override.
pub const DEFAULT_CAP: usize = 26;
/// Hard limit imposed by the 64-bit state mask (one spin is pinned).
pub const MAX_ENUMERABLE: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumError {
    #[error("m = {m} exceeds the enumeration cap {cap}")]
    Capacity { m: usize, cap: usize },
    #[error("predicted counts need an even m >= 6, got {m}")]
    Domain { m: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumStats {
    pub m: usize,
    /// Ascending `(energy, count)` pairs; counts are strictly positive.
    pub levels: Vec<(i64, u64)>,
    pub e_g: i64,
    pub e_1e: Option<i64>,
    pub n_g: u64,
    pub n_1e: u64,
    pub n_2e: u64,
    /// Sorted; each ground state appears as its `+1`-first representative
    /// immediately followed by its global flip.
    pub ground_states: Vec<SpinVector>,
}

impl SpectrumStats {
    pub fn total_states(&self) -> u64 {
        self.levels.iter().map(|&(_, c)| c).sum()
    }

    pub fn gap(&self) -> Option<i64> {
        self.e_1e.map(|e| e - self.e_g)
    }
}

/// Partial enumeration result over a contiguous block of Gray-code indices.
///
/// Blocks can be produced independently and combined with
/// [`SpectrumAccumulator::merge`], which is associative and commutative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumAccumulator {
    m: usize,
    offset: i64,
    histogram: Vec<u64>,
    min_energy: i64,
    /// Masks over the free spins (the pinned last spin is `+1`).
    min_states: Vec<u64>,
}

impl SpectrumAccumulator {
    fn empty(p: &IsingProblem) -> Self {
        let n_edges = p.edges().len();
        Self {
            m: p.m(),
            offset: n_edges as i64,
            histogram: alloc::vec![0; 2 * n_edges + 1],
            min_energy: i64::MAX,
            min_states: Vec::new(),
        }
    }

    /// Number of Gray-code indices for `p` (half the state space).
    pub fn index_count(p: &IsingProblem) -> u64 {
        1u64 << (p.m() - 1)
    }

    /// Enumerates Gray-code indices `lo..hi`.
    pub fn enumerate_block(p: &IsingProblem, lo: u64, hi: u64) -> Self {
        let mut acc = Self::empty(p);
        if lo >= hi {
            return acc;
        }
        let m = p.m();
        let adj = p.adjacency();
        let mut mask = lo ^ (lo >> 1);
        let mut spins: Vec<i8> = (0..m)
            .map(|k| if k == m - 1 || mask >> k & 1 == 1 { 1 } else { -1 })
            .collect();
        let mut energy: i64 = p
            .edges()
            .iter()
            .map(|e| i64::from(e.coupling * spins[e.i] * spins[e.j]))
            .sum();
        acc.record(energy, mask);
        for k in (lo + 1)..hi {
            let q = k.trailing_zeros() as usize;
            let local: i64 = adj[q]
                .iter()
                .map(|&(j, c)| i64::from(c * spins[j]))
                .sum();
            energy -= 2 * i64::from(spins[q]) * local;
            spins[q] = -spins[q];
            mask ^= 1 << q;
            acc.record(energy, mask);
        }
        acc
    }

    #[inline]
    fn record(&mut self, energy: i64, mask: u64) {
        self.histogram[(energy + self.offset) as usize] += 1;
        if energy < self.min_energy {
            self.min_energy = energy;
            self.min_states.clear();
            self.min_states.push(mask);
        } else if energy == self.min_energy {
            self.min_states.push(mask);
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        debug_assert_eq!(self.m, other.m);
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        match other.min_energy.cmp(&self.min_energy) {
            core::cmp::Ordering::Less => {
                self.min_energy = other.min_energy;
                self.min_states = other.min_states;
            }
            core::cmp::Ordering::Equal => self.min_states.extend(other.min_states),
            core::cmp::Ordering::Greater => {}
        }
        self
    }

    pub fn finish(self) -> SpectrumStats {
        let m = self.m;
        let levels: Vec<(i64, u64)> = self
            .histogram
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k as i64 - self.offset, 2 * c))
            .collect();
        let count_at = |k: usize| levels.get(k).map_or(0, |&(_, c)| c);
        let mut ground_states: Vec<SpinVector> = Vec::with_capacity(2 * self.min_states.len());
        let mut reps: Vec<SpinVector> = self
            .min_states
            .iter()
            .map(|&mask| SpinVector::from_bits(mask | 1 << (m - 1), m).canonical())
            .collect();
        reps.sort();
        for r in reps {
            let f = r.flipped();
            ground_states.push(r);
            ground_states.push(f);
        }
        SpectrumStats {
            m,
            e_g: levels[0].0,
            e_1e: levels.get(1).map(|&(e, _)| e),
            n_g: count_at(0),
            n_1e: count_at(1),
            n_2e: count_at(2),
            levels,
            ground_states,
        }
    }
}

/// Exhaustive spectrum of `p`, refusing sizes above `cap`.
///
/// Pass `cap = MAX_ENUMERABLE` to force larger runs.
pub fn enumerate_spectrum(p: &IsingProblem, cap: usize) -> Result<SpectrumStats, SpectrumError> {
    let cap = cap.min(MAX_ENUMERABLE);
    if p.m() > cap {
        return Err(SpectrumError::Capacity { m: p.m(), cap });
    }
    let n = SpectrumAccumulator::index_count(p);
    Ok(SpectrumAccumulator::enumerate_block(p, 0, n).finish())
}

/// Closed-form first and second excited-level degeneracies, `(2m, m(m+6)/4)`.
pub fn predicted_counts(m: usize) -> Result<(u64, u64), SpectrumError> {
    if m < 6 || m % 2 != 0 {
        return Err(SpectrumError::Domain { m });
    }
    let m = m as u64;
    Ok((2 * m, m * (m + 6) / 4))
}

/// `true` iff the first excited level sits exactly 6 above the ground level.
pub fn verify_gap(p: &IsingProblem, cap: usize) -> Result<bool, SpectrumError> {
    Ok(enumerate_spectrum(p, cap)?.gap() == Some(6))
}
