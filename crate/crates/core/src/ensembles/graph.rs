use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::rng::Rng;
use crate::{Error, Result};

/// Restarts allowed before regular-graph generation gives up.
pub const RETRY_BUDGET: usize = 1000;

/// Random picks tried before scanning for any admissible pair.
const PICK_ATTEMPTS: usize = 64;

/// Edges `(i, j)`, `i < j`, of a random simple `k`-regular graph on `p`
/// vertices.
///
/// Pairing model: `k` half-edges per vertex are matched one pair at a time,
/// rejecting pairs that would form a loop or a repeated edge. When no
/// admissible pair is left the attempt restarts.
pub fn random_regular_graph(p: usize, k: usize, rng: &mut Rng) -> Result<Vec<(usize, usize)>> {
    if k >= p || !(p * k).is_multiple_of(2) {
        return Err(Error::Infeasible(format!("no simple {k}-regular graph on {p} vertices")));
    }
    for _ in 0..RETRY_BUDGET {
        if let Some(edges) = try_pairing(p, k, rng) {
            return Ok(edges);
        }
    }
    Err(Error::RetryExhausted { attempts: RETRY_BUDGET })
}

fn try_pairing(p: usize, k: usize, rng: &mut Rng) -> Option<Vec<(usize, usize)>> {
    let mut points: Vec<usize> = (0..p).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    let mut seen = HashSet::with_capacity(p * k / 2);
    let mut edges = Vec::with_capacity(p * k / 2);
    let admissible =
        |seen: &HashSet<(usize, usize)>, u: usize, v: usize| u != v && !seen.contains(&(u.min(v), u.max(v)));
    while !points.is_empty() {
        let n = points.len();
        let mut chosen = None;
        for _ in 0..PICK_ATTEMPTS {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n - 1);
            let b = if b >= a { b + 1 } else { b };
            if admissible(&seen, points[a], points[b]) {
                chosen = Some((a, b));
                break;
            }
        }
        if chosen.is_none() {
            let candidates: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|&(a, b)| admissible(&seen, points[a], points[b]))
                .collect();
            if candidates.is_empty() {
                return None;
            }
            chosen = Some(candidates[rng.random_range(0..candidates.len())]);
        }
        let (a, b) = chosen?;
        let (u, v) = (points[a], points[b]);
        let e = (u.min(v), u.max(v));
        seen.insert(e);
        edges.push(e);
        points.swap_remove(a.max(b));
        points.swap_remove(a.min(b));
    }
    edges.sort_unstable();
    Some(edges)
}

/// Symmetric matrix with entries in `{-1, 0, +1}` whose support is a random
/// `k`-regular graph and whose edge signs are independent fair coins.
pub fn random_regular_signed(p: usize, k: usize, seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = crate::rng::from_seed(seed);
    signed_from_rng(p, k, &mut rng)
}

pub(crate) fn signed_from_rng(p: usize, k: usize, rng: &mut Rng) -> Result<DMatrix<f64>> {
    let edges = random_regular_graph(p, k, rng)?;
    let mut m = DMatrix::zeros(p, p);
    for (i, j) in edges {
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        m[(i, j)] = s;
        m[(j, i)] = s;
    }
    Ok(m)
}
