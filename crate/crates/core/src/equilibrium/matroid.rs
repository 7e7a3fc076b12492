use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-7;
const MIN_SEGMENT: f64 = 1e-15;

/// Writes a point of `{z ∈ [0,1]^n : Σz ≤ d}` as a convex combination of
/// indicator vectors of sets with at most `d` elements.
///
/// Uses systematic sampling: lay the coordinates end to end as intervals of
/// length `z_i` on `[0, Σz)`, and for an offset `u ∈ [0, 1)` take every index
/// whose interval contains one of `u, u + 1, u + 2, …`. Each interval has
/// length at most 1, so it is hit with probability exactly `z_i` over a
/// uniform `u`, and at most `⌈Σz⌉ ≤ d` indices are hit. The chosen set only
/// changes when `u` crosses the fractional part of an interval endpoint, so
/// there are at most `n + 1` distinct segments.
///
/// Returns `(weight, sorted set)` pairs with weights summing to 1.
pub fn decompose_matroid_point(z: &[f64], d: usize) -> Result<Vec<(f64, Vec<usize>)>> {
    if let Some((i, v)) = z
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < -FEAS_TOL || **v > 1.0 + FEAS_TOL)
    {
        return Err(Error::InvalidParameter(format!(
            "coordinate {i} = {v} outside [0, 1]"
        )));
    }
    let mut z: Vec<f64> = z.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut total: f64 = z.iter().sum();
    if total > d as f64 + FEAS_TOL {
        return Err(Error::InvalidParameter(format!(
            "coordinates sum to {total}, above the budget {d}"
        )));
    }
    if total > d as f64 {
        let f = d as f64 / total;
        z.iter_mut().for_each(|v| *v *= f);
        total = d as f64;
    }

    let mut ends = Vec::with_capacity(z.len() + 1);
    ends.push(0.0);
    let mut acc = 0.0;
    for v in &z {
        acc += v;
        ends.push(acc);
    }
    let mut cuts: Vec<f64> = ends.iter().map(|c| c - c.floor()).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < MIN_SEGMENT);

    let hits = total.ceil() as usize;
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len < MIN_SEGMENT {
            continue;
        }
        let u = 0.5 * (w[0] + w[1]);
        let set: Vec<usize> = (0..hits)
            .map(|j| u + j as f64)
            .filter(|&q| q < total)
            .map(|q| ends.partition_point(|&c| c <= q) - 1)
            .filter(|&i| i < z.len() && z[i] > 0.0)
            .collect();
        match out.last_mut() {
            Some((weight, last)) if *last == set => *weight += len,
            _ => out.push((len, set)),
        }
    }
    let sum: f64 = out.iter().map(|(w, _)| w).sum();
    out.iter_mut().for_each(|(w, _)| *w /= sum);
    Ok(out)
}
