//! Ratio maps between two surfaces and the level-1 boundary between them.

use std::collections::BTreeMap;

use crate::error::CliError;
use crate::sweep::ErrorSurface;

/// Ratio value for a nonzero error divided by a zero error.
pub const RATIO_SENTINEL: f64 = f64::MAX;

/// Elementwise `a / b` on a shared grid, laid out like [`ErrorSurface`].
#[derive(Debug, Clone, PartialEq)]
pub struct RatioMap {
    pub deltas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub values: Vec<f64>,
    /// Combined standard error of each ratio, by first-order propagation.
    pub std_errors: Vec<f64>,
}

impl RatioMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.deltas.len() + i]
    }

    pub fn std_error(&self, i: usize, j: usize) -> f64 {
        self.std_errors[j * self.deltas.len() + i]
    }
}

/// `a / b`. Above 1 means `b` has the lower error. `0/0` is 1 (both perfect);
/// `x/0` with `x > 0` is [`RATIO_SENTINEL`].
pub fn ratio_map(a: &ErrorSurface, b: &ErrorSurface) -> Result<RatioMap, CliError> {
    if !a.same_grid(b) {
        return Err(CliError::Runtime("surfaces use different grids".into()));
    }
    let (values, std_errors) = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| {
            if y.error_prob == 0.0 {
                let r = if x.error_prob == 0.0 { 1.0 } else { RATIO_SENTINEL };
                (r, 0.0)
            } else {
                let r = x.error_prob / y.error_prob;
                let rel_a = if x.error_prob > 0.0 { x.std_error / x.error_prob } else { 0.0 };
                let rel_b = y.std_error / y.error_prob;
                (r, r * (rel_a * rel_a + rel_b * rel_b).sqrt())
            }
        })
        .unzip();
    Ok(RatioMap {
        deltas: a.deltas.clone(),
        sigmas: a.sigmas.clone(),
        values,
        std_errors,
    })
}

/// An ordered chain of `(δ, σ)` points along the level set.
pub type Polyline = Vec<(f64, f64)>;

// Grid edges are keyed by their lower-left vertex and direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    /// From `(i, j)` to `(i+1, j)`.
    Horizontal(usize, usize),
    /// From `(i, j)` to `(i, j+1)`.
    Vertical(usize, usize),
}

/// Marching squares at ratio = 1, chained into polylines.
pub fn extract_boundary(ratio: &RatioMap) -> Vec<Polyline> {
    let nd = ratio.deltas.len();
    let ns = ratio.sigmas.len();
    if nd < 2 || ns < 2 {
        return Vec::new();
    }
    let level = |i: usize, j: usize| ratio.get(i, j) - 1.0;
    let above = |i: usize, j: usize| level(i, j) > 0.0;
    let point = |e: Edge| -> (f64, f64) {
        let (i0, j0, i1, j1) = match e {
            Edge::Horizontal(i, j) => (i, j, i + 1, j),
            Edge::Vertical(i, j) => (i, j, i, j + 1),
        };
        let (a, b) = (level(i0, j0), level(i1, j1));
        let t = if a == b { 0.5 } else { (a / (a - b)).clamp(0.0, 1.0) };
        (
            ratio.deltas[i0] + t * (ratio.deltas[i1] - ratio.deltas[i0]),
            ratio.sigmas[j0] + t * (ratio.sigmas[j1] - ratio.sigmas[j0]),
        )
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ns - 1 {
        for i in 0..nd - 1 {
            let bottom = Edge::Horizontal(i, j);
            let top = Edge::Horizontal(i, j + 1);
            let left = Edge::Vertical(i, j);
            let right = Edge::Vertical(i + 1, j);
            let code = (above(i, j) as u8)
                | (above(i + 1, j) as u8) << 1
                | (above(i + 1, j + 1) as u8) << 2
                | (above(i, j + 1) as u8) << 3;
            let pair = |a, b| Some((a, b));
            let (first, second) = match code {
                0 | 15 => (None, None),
                1 | 14 => (pair(left, bottom), None),
                2 | 13 => (pair(bottom, right), None),
                3 | 12 => (pair(left, right), None),
                4 | 11 => (pair(right, top), None),
                6 | 9 => (pair(bottom, top), None),
                7 | 8 => (pair(left, top), None),
                5 | 10 => {
                    // Saddle: decide by the cell-centre average.
                    let centre = 0.25 * (level(i, j) + level(i + 1, j) + level(i + 1, j + 1) + level(i, j + 1));
                    let centre_above = centre > 0.0;
                    if (code == 5) == centre_above {
                        (pair(left, top), pair(bottom, right))
                    } else {
                        (pair(left, bottom), pair(right, top))
                    }
                }
                _ => unreachable!(),
            };
            segments.extend(first);
            segments.extend(second);
        }
    }
    chain(&segments).into_iter().map(|edges| edges.into_iter().map(point).collect()).collect()
}

/// Links segments that share an edge crossing into maximal chains.
fn chain(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut touching: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        touching.entry(*a).or_default().push(k);
        touching.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let next_from = |edge: Edge, used: &[bool]| -> Option<usize> {
        touching.get(&edge)?.iter().copied().find(|&k| !used[k])
    };
    // Open chains start at an edge crossing used by a single segment.
    let mut starts: Vec<usize> = (0..segments.len())
        .filter(|&k| {
            let (a, b) = segments[k];
            touching[&a].len() == 1 || touching[&b].len() == 1
        })
        .collect();
    starts.extend(0..segments.len());
    for s in starts {
        if used[s] {
            continue;
        }
        used[s] = true;
        let (a, b) = segments[s];
        let (mut line, mut tail) = if touching[&a].len() == 1 { (vec![a, b], b) } else { (vec![b, a], a) };
        while let Some(k) = next_from(tail, &used) {
            used[k] = true;
            let (x, y) = segments[k];
            tail = if x == tail { y } else { x };
            line.push(tail);
        }
        lines.push(line);
    }
    lines
}

/// The boundary point with the smallest δ, if any.
pub fn small_delta_intercept(lines: &[Polyline]) -> Option<(f64, f64)> {
    lines
        .iter()
        .flatten()
        .copied()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
}
