//! Frustration-free (Mattis) data-search instances on ring-plus-diameter
//! cubic graphs.
//!
//! Node `i` couples to its ring neighbours `i ± 1 (mod m)` and to the node
//! across the ring, `i + m/2`. For a target configuration `t` every coupling
//! is `J_ij = -t_i t_j`, so `t` and `-t` are the only ground states.

use alloc::vec::Vec;
use core::ops::{Deref, Neg};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsingError {
    #[error("invalid problem size {m}: must be even and at least 4")]
    InvalidSize { m: usize },
    #[error("spin vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("spin entries must be +1 or -1, found {value} at index {index}")]
    InvalidSpin { index: usize, value: i8 },
    #[error("edge index {index} out of range for {edges} edges")]
    EdgeOutOfRange { index: usize, edges: usize },
    #[error("edge ({i}, {j}) is not canonical for m = {m}")]
    InvalidEdge { i: usize, j: usize, m: usize },
    #[error("coupling on edge ({i}, {j}) must be +1 or -1, found {value}")]
    InvalidCoupling { i: usize, j: usize, value: i8 },
}

/// A configuration of Ising spins, each `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn new(spins: Vec<i8>) -> Result<Self, IsingError> {
        if let Some((index, &value)) = spins.iter().enumerate().find(|(_, s)| **s != 1 && **s != -1) {
            return Err(IsingError::InvalidSpin { index, value });
        }
        Ok(Self(spins))
    }

    pub fn all_up(m: usize) -> Self {
        Self(alloc::vec![1; m])
    }

    /// Spin `k` is taken from bit `k` of `bits` (set bit = `+1`).
    pub fn from_bits(bits: u64, m: usize) -> Self {
        Self((0..m).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect())
    }

    /// Inverse of [`SpinVector::from_bits`]; only meaningful for `m <= 64`.
    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0u64, |acc, (k, _)| acc | 1 << k)
    }

    /// Draws each spin independently and uniformly.
    pub fn random<R: rand::Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        Self((0..m).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Representative of `{s, -s}` whose first spin is `+1`.
    pub fn canonical(&self) -> Self {
        match self.0.first() {
            Some(-1) => self.flipped(),
            _ => self.clone(),
        }
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }
}

impl Deref for SpinVector {
    type Target = [i8];
    fn deref(&self) -> &[i8] {
        &self.0
    }
}

impl Neg for &SpinVector {
    type Output = SpinVector;
    fn neg(self) -> SpinVector {
        self.flipped()
    }
}

/// Undirected coupling `J` between nodes `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub coupling: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsingProblem {
    m: usize,
    edges: Vec<Edge>,
    target: SpinVector,
}

/// Builds the cubic ring-plus-diameter instance encoding `target`.
///
/// For `m = 4` the chords coincide with ring edges after deduplication and
/// the graph is `K4`.
pub fn build_cubic_problem(m: usize, target: SpinVector) -> Result<IsingProblem, IsingError> {
    if m < 4 || m % 2 != 0 {
        return Err(IsingError::InvalidSize { m });
    }
    if target.len() != m {
        return Err(IsingError::DimensionMismatch { expected: m, got: target.len() });
    }
    let half = m / 2;
    let mut pairs: Vec<(usize, usize)> = (0..m)
        .map(|i| (i, (i + 1) % m))
        .chain((0..half).map(|i| (i, i + half)))
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let edges = pairs
        .into_iter()
        .map(|(i, j)| Edge { i, j, coupling: -target[i] * target[j] })
        .collect();
    Ok(IsingProblem { m, edges, target })
}

impl IsingProblem {
    /// Assembles a problem from explicit parts, e.g. after deserialization.
    ///
    /// Edges are re-sorted into canonical order; each must satisfy `i < j < m`
    /// and carry a `±1` coupling. Graph shape is not checked.
    pub fn from_parts(m: usize, mut edges: Vec<Edge>, target: SpinVector) -> Result<Self, IsingError> {
        if m < 4 || m % 2 != 0 {
            return Err(IsingError::InvalidSize { m });
        }
        if target.len() != m {
            return Err(IsingError::DimensionMismatch { expected: m, got: target.len() });
        }
        for e in &edges {
            if e.i >= e.j || e.j >= m {
                return Err(IsingError::InvalidEdge { i: e.i, j: e.j, m });
            }
            if e.coupling != 1 && e.coupling != -1 {
                return Err(IsingError::InvalidCoupling { i: e.i, j: e.j, value: e.coupling });
            }
        }
        edges.sort_unstable();
        Ok(Self { m, edges, target })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn target(&self) -> &SpinVector {
        &self.target
    }

    /// Per-node `(neighbour, J)` lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, i8)>> {
        let mut adj = alloc::vec![Vec::with_capacity(3); self.m];
        for e in &self.edges {
            adj[e.i].push((e.j, e.coupling));
            adj[e.j].push((e.i, e.coupling));
        }
        adj
    }

    /// Number of edges whose coupling is frustrated in `s` (`J s_i s_j = +1`).
    pub fn unstable_edges(&self, s: &[i8]) -> usize {
        self.edges
            .iter()
            .filter(|e| e.coupling * s[e.i] * s[e.j] > 0)
            .count()
    }
}

/// `H(s) = Σ_{i<j} J_ij s_i s_j` over the problem's edges.
pub fn ising_energy(p: &IsingProblem, s: &[i8]) -> Result<i64, IsingError> {
    if s.len() != p.m {
        return Err(IsingError::DimensionMismatch { expected: p.m, got: s.len() });
    }
    Ok(p.edges
        .iter()
        .map(|e| i64::from(e.coupling * s[e.i] * s[e.j]))
        .sum())
}

/// Returns a copy of `p` with the coupling on `edges()[edge_index]` negated.
pub fn flip_one_coupling(p: &IsingProblem, edge_index: usize) -> Result<IsingProblem, IsingError> {
    let mut out = p.clone();
    let edges = out.edges.len();
    let e = out
        .edges
        .get_mut(edge_index)
        .ok_or(IsingError::EdgeOutOfRange { index: edge_index, edges })?;
    e.coupling = -e.coupling;
    Ok(out)
}
