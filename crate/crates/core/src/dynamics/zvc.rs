//! Zero-velocity curves `2 U1(x, y) = C` by marching squares.
//!
//! Each grid edge crossed by the level set gets one vertex, first placed by
//! linear interpolation and then polished onto the curve by Illinois regula
//! falsi along the edge. Saddle cells are resolved with the value at the cell
//! centre. Cells containing a primary, or with a corner inside the collision
//! guard, are skipped.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{amended_potential, SystemParams};

pub const MIN_RESOLUTION: usize = 16;

const POLISH_ITERS: usize = 80;

/// Rectangular region of the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Window {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let w = Self {
            xmin,
            xmax,
            ymin,
            ymax,
        };
        if !(xmin < xmax && ymin < ymax && [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite())) {
            return Err(domain(format!(
                "window must satisfy xmin < xmax and ymin < ymax, got {w:?}"
            )));
        }
        Ok(w)
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        (self.xmin..=self.xmax).contains(&x) && (self.ymin..=self.ymax).contains(&y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroVelocityCurve {
    pub level_c: f64,
    pub window: Window,
    pub resolution: usize,
    /// Polylines; closed loops repeat their first vertex at the end.
    pub segments: Vec<Vec<(f64, f64)>>,
}

impl ZeroVelocityCurve {
    /// Grid spacing `(dx, dy)`.
    pub fn cell_size(&self) -> (f64, f64) {
        let r = self.resolution as f64;
        (
            (self.window.xmax - self.window.xmin) / r,
            (self.window.ymax - self.window.ymin) / r,
        )
    }

    pub fn vertices(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.segments.iter().flatten().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum EdgeKey {
    /// From node (i, j) to (i + 1, j).
    Horizontal(usize, usize),
    /// From node (i, j) to (i, j + 1).
    Vertical(usize, usize),
}

struct Grid<'a> {
    p: &'a SystemParams,
    level: f64,
    window: Window,
    n: usize,
    values: Vec<Option<f64>>,
}

impl Grid<'_> {
    fn node(&self, i: usize, j: usize) -> (f64, f64) {
        // weighted form keeps a window symmetric about zero exactly symmetric
        let n = self.n as f64;
        let lerp = |lo: f64, hi: f64, k: usize| (lo * (n - k as f64) + hi * k as f64) / n;
        (
            lerp(self.window.xmin, self.window.xmax, i),
            lerp(self.window.ymin, self.window.ymax, j),
        )
    }

    fn f(&self, x: f64, y: f64) -> Option<f64> {
        amended_potential(self.p, x, y)
            .ok()
            .map(|u| 2.0 * u - self.level)
    }

    fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.values[j * (self.n + 1) + i]
    }

    fn edge_ends(&self, key: EdgeKey) -> ((usize, usize), (usize, usize)) {
        match key {
            EdgeKey::Horizontal(i, j) => ((i, j), (i + 1, j)),
            EdgeKey::Vertical(i, j) => ((i, j), (i, j + 1)),
        }
    }

    /// Point on the edge where `f` changes sign.
    fn crossing(&self, key: EdgeKey) -> (f64, f64) {
        let (na, nb) = self.edge_ends(key);
        let (a, b) = (self.node(na.0, na.1), self.node(nb.0, nb.1));
        let fa = self.value(na.0, na.1).unwrap_or(0.0);
        let fb = self.value(nb.0, nb.1).unwrap_or(0.0);
        if fa == 0.0 {
            return a;
        }
        if fb == 0.0 {
            return b;
        }
        let at = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));

        let (mut t0, mut g0, mut t1, mut g1) = (0.0, fa, 1.0, fb);
        let mut t = fa / (fa - fb);
        for _ in 0..POLISH_ITERS {
            t = (t0 * g1 - t1 * g0) / (g1 - g0);
            let (x, y) = at(t);
            let Some(gt) = self.f(x, y) else {
                break;
            };
            if gt == 0.0 || (t1 - t0).abs() < 1e-16 {
                break;
            }
            if (gt > 0.0) != (g1 > 0.0) {
                t0 = t1;
                g0 = g1;
            } else {
                g0 *= 0.5;
            }
            t1 = t;
            g1 = gt;
        }
        at(t.clamp(0.0, 1.0))
    }
}

/// Extracts the zero-velocity curve `2 U1 = level_c` inside `window` on a
/// `resolution x resolution` cell grid.
pub fn zero_velocity_curve(
    p: &SystemParams,
    level_c: f64,
    window: Window,
    resolution: usize,
) -> Result<ZeroVelocityCurve> {
    let window = Window::new(window.xmin, window.xmax, window.ymin, window.ymax)?;
    if resolution < MIN_RESOLUTION {
        return Err(domain(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    if !level_c.is_finite() {
        return Err(domain(format!("level_c must be finite, got {level_c}")));
    }
    let n = resolution;
    let mut grid = Grid {
        p,
        level: level_c,
        window,
        n,
        values: Vec::with_capacity((n + 1) * (n + 1)),
    };
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = grid.node(i, j);
            let v = grid.f(x, y);
            grid.values.push(v);
        }
    }

    let mu = p.mu();
    let primaries = [(-mu, 0.0), (1.0 - mu, 0.0)];
    let mut cut: Vec<(EdgeKey, EdgeKey)> = Vec::new();

    for j in 0..n {
        for i in 0..n {
            let corners = [
                grid.value(i, j),
                grid.value(i + 1, j),
                grid.value(i + 1, j + 1),
                grid.value(i, j + 1),
            ];
            let (x0, y0) = grid.node(i, j);
            let (x1, y1) = grid.node(i + 1, j + 1);
            let cell = Window {
                xmin: x0,
                xmax: x1,
                ymin: y0,
                ymax: y1,
            };
            if corners.iter().any(Option::is_none)
                || primaries.iter().any(|&(px, py)| cell.contains(px, py))
            {
                continue;
            }
            let v: [f64; 4] = corners.map(|c| c.unwrap());
            let inside: [bool; 4] = v.map(|f| f > 0.0);
            // edges: 0 bottom, 1 right, 2 top, 3 left; corner k sits between edges k-1 and k
            let edges = [
                EdgeKey::Horizontal(i, j),
                EdgeKey::Vertical(i + 1, j),
                EdgeKey::Horizontal(i, j + 1),
                EdgeKey::Vertical(i, j),
            ];
            let crossed: Vec<usize> = (0..4)
                .filter(|&e| inside[e] != inside[(e + 1) % 4])
                .collect();
            match crossed.len() {
                0 => {}
                2 => cut.push((edges[crossed[0]], edges[crossed[1]])),
                4 => {
                    let centre = grid
                        .f(0.5 * (x0 + x1), 0.5 * (y0 + y1))
                        .unwrap_or(0.25 * v.iter().sum::<f64>());
                    // isolate the corners whose sign differs from the centre
                    for k in 0..4 {
                        if inside[k] != (centre > 0.0) {
                            cut.push((edges[(k + 3) % 4], edges[k]));
                        }
                    }
                }
                _ => unreachable!("a cell boundary is crossed an even number of times"),
            }
        }
    }

    let mut vertex: HashMap<EdgeKey, (f64, f64)> = HashMap::new();
    for &(a, b) in &cut {
        for key in [a, b] {
            vertex.entry(key).or_insert_with(|| grid.crossing(key));
        }
    }

    let segments = assemble(&cut)
        .into_iter()
        .map(|chain| chain.into_iter().map(|k| vertex[&k]).collect())
        .collect();

    Ok(ZeroVelocityCurve {
        level_c,
        window,
        resolution,
        segments,
    })
}

/// Joins cell segments sharing an edge into polylines: open chains first
/// (started from their free ends), then closed loops.
fn assemble(cut: &[(EdgeKey, EdgeKey)]) -> Vec<Vec<EdgeKey>> {
    let mut incident: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (idx, &(a, b)) in cut.iter().enumerate() {
        incident.entry(a).or_default().push(idx);
        incident.entry(b).or_default().push(idx);
    }
    let mut used = vec![false; cut.len()];
    let mut chains = Vec::new();

    let walk = |start: EdgeKey, used: &mut Vec<bool>| {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(&idx) = incident[&cur].iter().find(|&&s| !used[s]) {
            used[idx] = true;
            let (a, b) = cut[idx];
            cur = if a == cur { b } else { a };
            chain.push(cur);
        }
        chain
    };

    for &(a, b) in cut {
        for key in [a, b] {
            if incident[&key].len() == 1 && incident[&key].iter().any(|&s| !used[s]) {
                chains.push(walk(key, &mut used));
            }
        }
    }
    for idx in 0..cut.len() {
        if !used[idx] {
            chains.push(walk(cut[idx].0, &mut used));
        }
    }
    chains
}
