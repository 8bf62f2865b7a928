//! Marching squares over the interval field `s²` sampled at cell centers.
//!
//! The lattice nodes are the grid's cell centers; squares with any invalid
//! corner are skipped. Edge crossings are placed by linear interpolation, or,
//! when a field is supplied, polished by bracketed root finding on the edge.
//! Saddle squares are split according to the average of the four corners.

use std::collections::HashMap;

use super::grid::SampleGrid;
use crate::field::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub level: f64,
    /// Each polyline is a sequence of `(t, x)` vertices.
    pub polylines: Vec<Vec<Point>>,
}

impl LevelSet {
    pub fn vertices(&self) -> impl Iterator<Item = &Point> {
        self.polylines.iter().flatten()
    }
}

/// Lattice edge: horizontal edges join `(i, j)`–`(i, j+1)`, vertical ones
/// `(i, j)`–`(i+1, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    H(usize, usize),
    V(usize, usize),
}

impl EdgeKey {
    fn ends(self) -> ((usize, usize), (usize, usize)) {
        match self {
            EdgeKey::H(i, j) => ((i, j), (i, j + 1)),
            EdgeKey::V(i, j) => ((i, j), (i + 1, j)),
        }
    }
}

type Refiner<'a> = &'a (dyn Fn(Point) -> Option<f64> + Sync);

struct Extractor<'a> {
    grid: &'a SampleGrid,
    refine: Option<Refiner<'a>>,
}

impl Extractor<'_> {
    fn value(&self, (i, j): (usize, usize)) -> Option<f64> {
        self.grid
            .cell(i, j)
            .filter(|s| s.is_valid())
            .and_then(|s| s.interval)
    }

    fn crossing(&self, edge: EdgeKey, level: f64) -> Point {
        let (a, b) = edge.ends();
        let (pa, pb) = (self.grid.center(a.0, a.1), self.grid.center(b.0, b.1));
        let (va, vb) = (
            self.value(a).expect("edge corners are valid") - level,
            self.value(b).expect("edge corners are valid") - level,
        );
        let lerp = |s: f64| (pa.0 + s * (pb.0 - pa.0), pa.1 + s * (pb.1 - pa.1));
        let mut s = if va == vb { 0.5 } else { va / (va - vb) };
        if let Some(f) = self.refine {
            if let Some(r) = illinois(|s| f(lerp(s)).map(|v| v - level), (0.0, va), (1.0, vb), s) {
                s = r;
            }
        }
        lerp(s)
    }

    fn segments(&self, level: f64) -> Vec<(EdgeKey, EdgeKey)> {
        let (nt, nx) = self.grid.resolution;
        let mut out = Vec::new();
        for i in 0..nt.saturating_sub(1) {
            for j in 0..nx.saturating_sub(1) {
                // bottom-left, bottom-right, top-right, top-left
                let corners = [(i, j), (i, j + 1), (i + 1, j + 1), (i + 1, j)];
                let Some(values) = corners
                    .iter()
                    .map(|c| self.value(*c))
                    .collect::<Option<Vec<f64>>>()
                else {
                    continue;
                };
                let above: Vec<bool> = values.iter().map(|v| *v > level).collect();
                // edge k joins corner k and corner k+1
                let edges = [
                    EdgeKey::H(i, j),
                    EdgeKey::V(i, j + 1),
                    EdgeKey::H(i + 1, j),
                    EdgeKey::V(i, j),
                ];
                let crossing: Vec<usize> =
                    (0..4).filter(|&k| above[k] != above[(k + 1) % 4]).collect();
                match crossing.len() {
                    2 => out.push((edges[crossing[0]], edges[crossing[1]])),
                    4 => {
                        let center = values.iter().sum::<f64>() / 4.0 > level;
                        // isolate each corner on the other side of the center
                        for k in 0..4 {
                            if above[k] != center {
                                out.push((edges[(k + 3) % 4], edges[k]));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    fn level_set(&self, level: f64) -> LevelSet {
        let segments = self.segments(level);
        let mut by_edge: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
        for (n, (a, b)) in segments.iter().enumerate() {
            by_edge.entry(*a).or_default().push(n);
            by_edge.entry(*b).or_default().push(n);
        }
        let mut used = vec![false; segments.len()];
        let mut chains = Vec::new();
        for start in 0..segments.len() {
            if used[start] {
                continue;
            }
            used[start] = true;
            let (a, b) = segments[start];
            let mut forward = vec![a, b];
            walk(&segments, &by_edge, &mut used, &mut forward);
            let mut backward = vec![b, a];
            walk(&segments, &by_edge, &mut used, &mut backward);
            backward.reverse();
            backward.truncate(backward.len() - 2);
            backward.extend(forward);
            chains.push(backward);
        }
        let mut cache: HashMap<EdgeKey, Point> = HashMap::new();
        let polylines = chains
            .into_iter()
            .map(|chain| {
                chain
                    .into_iter()
                    .map(|e| *cache.entry(e).or_insert_with(|| self.crossing(e, level)))
                    .collect()
            })
            .collect();
        LevelSet { level, polylines }
    }
}

fn walk(
    segments: &[(EdgeKey, EdgeKey)],
    by_edge: &HashMap<EdgeKey, Vec<usize>>,
    used: &mut [bool],
    chain: &mut Vec<EdgeKey>,
) {
    loop {
        let tip = *chain.last().expect("chain is never empty");
        let next = by_edge[&tip].iter().copied().find(|n| !used[*n]);
        let Some(n) = next else { return };
        used[n] = true;
        let (a, b) = segments[n];
        chain.push(if a == tip { b } else { a });
    }
}

/// Root of `f` on `[lo, hi]` given values of opposite sign at the ends.
fn illinois<F: Fn(f64) -> Option<f64>>(
    f: F,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    guess: f64,
) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut x = guess.clamp(a, b);
    let mut side = 0i8;
    for _ in 0..100 {
        let fx = f(x)?;
        if fx == 0.0 || (b - a).abs() < 1e-15 {
            return Some(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        x = (a * fb - b * fa) / (fb - fa);
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
    }
    Some(x)
}

/// Level sets of the sampled interval field by linear interpolation.
pub fn extract_level_sets(grid: &SampleGrid, levels: &[f64]) -> Vec<LevelSet> {
    let ex = Extractor { grid, refine: None };
    levels.iter().map(|l| ex.level_set(*l)).collect()
}

/// As [`extract_level_sets`], with each edge crossing moved onto the zero of
/// `field − level` along its edge. `field` returns `None` where undefined, in
/// which case the interpolated vertex is kept.
pub fn extract_level_sets_refined(
    grid: &SampleGrid,
    levels: &[f64],
    field: &(dyn Fn(Point) -> Option<f64> + Sync),
) -> Vec<LevelSet> {
    let ex = Extractor {
        grid,
        refine: Some(field),
    };
    levels.iter().map(|l| ex.level_set(*l)).collect()
}
