use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{words_for, Graph};
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::rng::{self, derive_seed};

/// Binary digits of `p` after the point, most significant first, truncated
/// after the last one. Exact: doubling an `f64` in `[0, 1)` never rounds.
fn binary_digits(p: f64) -> Vec<bool> {
    let mut x = p;
    let mut digits = Vec::with_capacity(64);
    for _ in 0..64 {
        x *= 2.0;
        let bit = x >= 1.0;
        if bit {
            x -= 1.0;
        }
        digits.push(bit);
    }
    while digits.last() == Some(&false) {
        digits.pop();
    }
    digits
}

/// A word whose bits are independent Bernoulli(p) draws, where `p` is given
/// by its binary digits. Folding the digits from the least significant one
/// with OR (digit 1) or AND (digit 0) against fresh uniform words yields
/// P(bit) = Σ digit_i 2^-i.
fn bernoulli_word(rng: &mut rng::Rng, digits: &[bool]) -> u64 {
    let mut acc = 0u64;
    for &d in digits.iter().rev() {
        let r = rng.next_u64();
        acc = if d { acc | r } else { acc & r };
    }
    acc
}

fn validate_np(n: usize, p: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {p} outside [0, 1]"
        )));
    }
    Ok(())
}

/// G(n, p) with each unordered pair present independently with probability
/// `p`.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    gen_gnp_with(n, p, seed, Parallelism::default())
}

/// [`gen_gnp`] with an explicit execution mode. The output does not depend on
/// the mode: row `u`'s upper-triangle words come from their own stream.
pub fn gen_gnp_with(n: usize, p: f64, seed: u64, mode: Parallelism) -> Result<Graph> {
    validate_np(n, p)?;
    let wpr = words_for(n);
    let mut bits = vec![0u64; n * wpr];
    if p == 0.0 {
        return Ok(Graph::from_bits(n, bits));
    }
    let digits = if p == 1.0 {
        Vec::new()
    } else {
        binary_digits(p)
    };
    let tail_mask = if n.is_multiple_of(64) {
        !0
    } else {
        (1u64 << (n % 64)) - 1
    };

    exec::for_each_chunk_mut(mode, &mut bits, wpr, |u, row| {
        let first = (u + 1) / 64;
        if first >= wpr {
            return;
        }
        let mut rng = rng::stream(seed, "gnp-row", u as u64);
        for (w, word) in row.iter_mut().enumerate().skip(first) {
            let mut x = if p == 1.0 {
                !0
            } else {
                bernoulli_word(&mut rng, &digits)
            };
            if w == first {
                // Keep only columns v > u.
                let low = (u + 1) % 64;
                if low != 0 {
                    x &= !((1u64 << low) - 1);
                }
            }
            if w == wpr - 1 {
                x &= tail_mask;
            }
            *word = x;
        }
    });
    mirror_upper(n, wpr, &mut bits);
    Ok(Graph::from_bits(n, bits))
}

/// Transposes a 64×64 bit block in place (row `i`, bit `j` ↔ row `j`, bit
/// `i`).
pub(crate) fn transpose64(a: &mut [u64; 64]) {
    let mut j = 32;
    let mut m: u64 = 0x0000_0000_ffff_ffff;
    while j != 0 {
        let mut k = 0;
        while k < 64 {
            let t = ((a[k] >> j) ^ a[k + j]) & m;
            a[k] ^= t << j;
            a[k + j] ^= t;
            k = (k + j + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

/// Copies the strict upper triangle onto the lower one, block by block.
fn mirror_upper(n: usize, wpr: usize, bits: &mut [u64]) {
    let mut block = [0u64; 64];
    for bi in 0..wpr {
        for bj in bi..wpr {
            for (i, slot) in block.iter_mut().enumerate() {
                let r = bi * 64 + i;
                *slot = if r < n { bits[r * wpr + bj] } else { 0 };
            }
            transpose64(&mut block);
            for (j, &word) in block.iter().enumerate() {
                let r = bj * 64 + j;
                if r < n {
                    bits[r * wpr + bi] |= word;
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedParams {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub r: usize,
}

/// A graph with planted cliques plus the hidden ground truth.
#[derive(Clone, Debug)]
pub struct PlantedCoverInstance {
    pub graph: Graph,
    /// The graph before any clique was planted.
    pub background: Graph,
    /// Planted vertex sets in planting order, each sorted.
    pub planted_cliques: Vec<Vec<usize>>,
    pub params: PlantedParams,
    pub seed: u64,
}

impl PlantedCoverInstance {
    /// Whether `{u, v}` was added by planting rather than by the background.
    pub fn is_foreground_edge(&self, u: usize, v: usize) -> bool {
        self.graph.has_edge(u, v) && !self.background.has_edge(u, v)
    }

    /// Fraction of vertices lying in at least one planted clique.
    pub fn coverage(&self) -> f64 {
        let n = self.graph.n();
        let mut covered = vec![false; n];
        for s in &self.planted_cliques {
            for &v in s {
                covered[v] = true;
            }
        }
        covered.iter().filter(|&&c| c).count() as f64 / n as f64
    }
}

fn plant(
    graph: &mut Graph,
    n: usize,
    k: usize,
    count: usize,
    seed: u64,
    tag: &str,
) -> Vec<Vec<usize>> {
    let identity: Vec<usize> = (0..n).collect();
    (0..count)
        .map(|i| {
            let mut rng = rng::stream(seed, tag, i as u64);
            let mut s = rng::sample_without_replacement(&mut rng, &identity, k);
            s.sort_unstable();
            for (a, &u) in s.iter().enumerate() {
                for &v in &s[a + 1..] {
                    graph.add_edge(u, v);
                }
            }
            s
        })
        .collect()
}

fn validate_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "clique size {k} must lie in 1..={n}"
        )));
    }
    Ok(())
}

/// G(n, p) followed by `r` cliques of size `k`, each a uniform `k`-subset
/// drawn independently and in order.
pub fn gen_planted_cover(
    n: usize,
    p: f64,
    k: usize,
    r: usize,
    seed: u64,
) -> Result<PlantedCoverInstance> {
    gen_planted_cover_with(n, p, k, r, seed, Parallelism::default())
}

pub fn gen_planted_cover_with(
    n: usize,
    p: f64,
    k: usize,
    r: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<PlantedCoverInstance> {
    validate_np(n, p)?;
    validate_k(n, k)?;
    let background = gen_gnp_with(n, p, derive_seed(seed, "background", 0), mode)?;
    let mut graph = background.clone();
    let planted_cliques = plant(&mut graph, n, k, r, seed, "clique");
    Ok(PlantedCoverInstance {
        graph,
        background,
        planted_cliques,
        params: PlantedParams { n, p, k, r },
        seed,
    })
}

/// Plants `extra` further `k`-cliques into `g`. The whole input graph becomes
/// the background of the result and only the new cliques are recorded.
pub fn amplify_instance(
    g: &Graph,
    p: f64,
    k: usize,
    extra: usize,
    seed: u64,
) -> Result<PlantedCoverInstance> {
    let n = g.n();
    validate_np(n, p)?;
    validate_k(n, k)?;
    let mut graph = g.clone();
    let planted_cliques = plant(&mut graph, n, k, extra, seed, "amplify-clique");
    Ok(PlantedCoverInstance {
        graph,
        background: g.clone(),
        planted_cliques,
        params: PlantedParams { n, p, k, r: extra },
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Null,
    Planted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distinguisher {
    pub verdict: Verdict,
    /// Edge count minus its expectation under G(n, p).
    pub statistic: f64,
    pub threshold: f64,
}

/// Edge-count test between G(n, p) and the planted cover with `r` cliques of
/// size `k`: declares `Planted` when the edge surplus exceeds half of the
/// expected foreground surplus.
pub fn edge_count_distinguisher(g: &Graph, p: f64, k: usize, r: usize) -> Result<Distinguisher> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {p} must lie in (0, 1)"
        )));
    }
    let n = g.n() as f64;
    let null_mean = p * n * (n - 1.0) / 2.0;
    let kf = k as f64;
    let surplus = r as f64 * (1.0 - p) * kf * (kf - 1.0) / 2.0;
    let statistic = g.edge_count() as f64 - null_mean;
    let threshold = surplus / 2.0;
    Ok(Distinguisher {
        verdict: if statistic > threshold {
            Verdict::Planted
        } else {
            Verdict::Null
        },
        statistic,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_matches_naive() {
        let mut rng = rng::stream(3, "t", 0);
        let mut a = [0u64; 64];
        a.iter_mut().for_each(|w| *w = rng.next_u64());
        let orig = a;
        transpose64(&mut a);
        for i in 0..64 {
            for j in 0..64 {
                assert_eq!(a[j] >> i & 1, orig[i] >> j & 1);
            }
        }
    }

    #[test]
    fn digits_are_exact() {
        assert_eq!(binary_digits(0.5), vec![true]);
        assert_eq!(binary_digits(0.75), vec![true, true]);
        assert_eq!(binary_digits(0.375), vec![false, true, true]);
        let d = binary_digits(0.3);
        let back: f64 = d
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| 0.5f64.powi(i as i32 + 1))
            .sum();
        assert!((back - 0.3).abs() < 1e-16);
    }

    #[test]
    fn extremes() {
        assert_eq!(gen_gnp(100, 0.0, 1).unwrap().edge_count(), 0);
        let g = gen_gnp(130, 1.0, 1).unwrap();
        assert_eq!(g.edge_count(), 130 * 129 / 2);
        assert_eq!(g, Graph::complete(130));
        assert_eq!(gen_gnp(1, 0.5, 1).unwrap().edge_count(), 0);
        assert!(gen_gnp(0, 0.5, 1).is_err());
        assert!(gen_gnp(3, 1.5, 1).is_err());
    }

    #[test]
    fn symmetric_deterministic_and_mode_independent() {
        for n in [1, 2, 63, 64, 65, 200] {
            let a = gen_gnp_with(n, 0.3, 9, Parallelism::Sequential).unwrap();
            let b = gen_gnp_with(n, 0.3, 9, Parallelism::Parallel).unwrap();
            assert_eq!(a, b);
            for u in 0..n {
                assert!(!a.has_edge(u, u));
                for v in 0..n {
                    assert_eq!(a.has_edge(u, v), a.has_edge(v, u));
                }
            }
        }
        assert_ne!(gen_gnp(200, 0.5, 1).unwrap(), gen_gnp(200, 0.5, 2).unwrap());
    }

    #[test]
    fn empirical_edge_probability() {
        let g = gen_gnp(1000, 0.3, 5).unwrap();
        let pairs = 1000.0 * 999.0 / 2.0;
        let sd = (pairs * 0.3 * 0.7f64).sqrt();
        assert!((g.edge_count() as f64 - 0.3 * pairs).abs() < 5.0 * sd);
    }

    #[test]
    fn planted_instance_invariants() {
        let inst = gen_planted_cover(300, 0.5, 20, 6, 11).unwrap();
        assert_eq!(inst.planted_cliques.len(), 6);
        for s in &inst.planted_cliques {
            assert_eq!(s.len(), 20);
            assert!(inst.graph.is_clique(s));
        }
        // Graph = background ∪ clique edges.
        for u in 0..300 {
            for v in u + 1..300 {
                let in_clique = inst
                    .planted_cliques
                    .iter()
                    .any(|s| s.binary_search(&u).is_ok() && s.binary_search(&v).is_ok());
                assert_eq!(
                    inst.graph.has_edge(u, v),
                    inst.background.has_edge(u, v) || in_clique
                );
            }
        }
        let none = gen_planted_cover(300, 0.5, 20, 0, 11).unwrap();
        assert!(none.planted_cliques.is_empty());
        assert_eq!(none.graph, none.background);
        assert!(gen_planted_cover(10, 0.5, 11, 1, 0).is_err());
    }

    #[test]
    fn amplify_basics() {
        let g = gen_gnp(200, 0.5, 4).unwrap();
        let same = amplify_instance(&g, 0.5, 10, 0, 1).unwrap();
        assert_eq!(same.graph, g);
        let more = amplify_instance(&g, 0.5, 10, 3, 1).unwrap();
        assert!(more.graph.edge_count() >= g.edge_count());
        assert_eq!(more.planted_cliques.len(), 3);
        assert_eq!(more.background, g);
    }

    #[test]
    fn distinguisher_extremes() {
        let full = edge_count_distinguisher(&Graph::complete(50), 0.5, 5, 2).unwrap();
        assert_eq!(full.verdict, Verdict::Planted);
        let empty = edge_count_distinguisher(&Graph::empty(50), 0.5, 5, 2).unwrap();
        assert_eq!(empty.verdict, Verdict::Null);
        assert!(edge_count_distinguisher(&Graph::empty(5), 1.0, 2, 1).is_err());
    }
}
