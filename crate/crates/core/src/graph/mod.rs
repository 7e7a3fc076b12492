//! Undirected graphs on `0..n` stored as dense symmetric bitsets.
//!
//! Row `u` occupies `words_per_row` consecutive `u64` words; bit `v % 64` of
//! word `v / 64` is set iff `{u, v}` is an edge. Neighbourhood intersections
//! are therefore word-wise ANDs, which is what the recovery filters need.

mod generate;
pub mod io;

pub use generate::{
    amplify_instance, edge_count_distinguisher, gen_gnp, gen_gnp_with, gen_planted_cover,
    gen_planted_cover_with, Distinguisher, PlantedCoverInstance, PlantedParams, Verdict,
};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("m", &self.edge_count())
            .finish()
    }
}

/// Number of `u64` words needed for `n` bits.
pub fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words_per_row = words_for(n);
        Graph {
            n,
            words_per_row,
            bits: vec![0; n * words_per_row],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            let row = g.row_mut(u);
            for v in 0..n {
                if v != u {
                    row[v / 64] |= 1 << (v % 64);
                }
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Wraps raw rows. The caller guarantees symmetry, an empty diagonal and
    /// no bits beyond `n`.
    pub(crate) fn from_bits(n: usize, bits: Vec<u64>) -> Self {
        debug_assert_eq!(bits.len(), n * words_for(n));
        Graph {
            n,
            words_per_row: words_for(n),
            bits,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words_per_row..(u + 1) * self.words_per_row]
    }

    fn row_mut(&mut self, u: usize) -> &mut [u64] {
        &mut self.bits[u * self.words_per_row..(u + 1) * self.words_per_row]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.row(u)[v / 64] >> (v % 64) & 1 == 1
    }

    /// Inserts `{u, v}`; a no-op when it is already present or `u == v`.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v {
            return;
        }
        let w = self.words_per_row;
        self.bits[u * w + v / 64] |= 1 << (v % 64);
        self.bits[v * w + u / 64] |= 1 << (u % 64);
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum::<u64>() / 2
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(self.row(u))
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            let row = self.row(u);
            let start = (u + 1) / 64;
            iter_bits(&row[start..])
                .map(move |v| v + start * 64)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Bitset with the members of `set`.
    pub fn mask(&self, set: &[usize]) -> Vec<u64> {
        let mut m = vec![0u64; self.words_per_row];
        for &v in set {
            m[v / 64] |= 1 << (v % 64);
        }
        m
    }

    /// Number of neighbours of `u` inside `mask`.
    pub fn degree_into(&self, u: usize, mask: &[u64]) -> usize {
        self.row(u)
            .iter()
            .zip(mask)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Ordered pairs `(i, j) ∈ S × T` joined by an edge.
    pub fn count_between(&self, s: &[usize], t: &[usize]) -> u64 {
        let t_mask = self.mask(t);
        s.iter().map(|&i| self.degree_into(i, &t_mask) as u64).sum()
    }

    /// True iff every pair of distinct vertices in `s` is adjacent.
    pub fn is_clique(&self, s: &[usize]) -> bool {
        let mask = self.mask(s);
        s.iter().all(|&u| {
            let mut need = mask.clone();
            need[u / 64] &= !(1 << (u % 64));
            self.row(u)
                .iter()
                .zip(&need)
                .all(|(have, want)| have & want == *want)
        })
    }
}

pub(crate) fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(i * 64 + b)
        })
    })
}

fn dedup_sorted(set: &[usize]) -> Vec<usize> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn check_members(g: &Graph, set: &[usize]) -> Result<()> {
    match set.iter().find(|&&v| v >= g.n) {
        Some(v) => Err(Error::InvalidParameter(format!(
            "vertex {v} out of range for n = {}",
            g.n
        ))),
        None => Ok(()),
    }
}

/// `2|E(S)| / (|S|(|S|-1))`, taken to be 0 when `|S| < 2`.
pub fn density(g: &Graph, cluster: &[usize]) -> Result<f64> {
    check_members(g, cluster)?;
    let s = dedup_sorted(cluster);
    if s.len() < 2 {
        return Ok(0.0);
    }
    let twice_edges = g.count_between(&s, &s) as f64;
    let k = s.len() as f64;
    Ok(twice_edges / (k * (k - 1.0)))
}

/// Fraction of ordered pairs in `S × T` joined by an edge.
pub fn bidensity(g: &Graph, s: &[usize], t: &[usize]) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::InvalidParameter(
            "bidensity of an empty vertex set".into(),
        ));
    }
    check_members(g, s)?;
    check_members(g, t)?;
    let s = dedup_sorted(s);
    let t = dedup_sorted(t);
    Ok(g.count_between(&s, &t) as f64 / (s.len() as f64 * t.len() as f64))
}
