//! Eigenlevels of the tilted spliced double well and adiabatic-path planning.
//!
//! The Hamiltonian -1/2 d^2/dx^2 + V(x) is discretised with the three-point
//! stencil on a uniform grid with hard walls. The grid is exactly symmetric
//! about x = 0, so parity at zero tilt survives the discretisation.
//!
//! Only one sign of the tilt needs solving: x -> -x, f -> -f maps the problem
//! onto itself, so levels are even in f and centroids are odd.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::culling::{check_range, grid};
use crate::error::{Error, Result};
use crate::numeric::fmt_num;
use crate::potential::eval_double_well;
use crate::tridiag::SymTridiag;

/// Margin kept between each well minimum and the hard wall.
pub const WALL_MARGIN: f64 = 8.0;
pub const DEFAULT_SPACING: f64 = 1e-3;
pub const MAX_SPACING: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Distance from the origin to each hard wall; `None` means d/2 + 8.
    pub half_width: Option<f64>,
    pub spacing: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { half_width: None, spacing: DEFAULT_SPACING }
    }
}

/// Uniform grid symmetric about zero; interior points only (walls excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub spacing: f64,
    pub points: Vec<f64>,
}

impl Grid {
    /// Smallest symmetric grid with the given spacing whose walls sit at or beyond `half_width`.
    pub fn symmetric(half_width: f64, spacing: f64) -> Result<Grid> {
        if !(half_width > 0.0 && spacing > 0.0 && spacing < half_width) {
            return Err(Error::Config(format!("bad grid: half-width {half_width}, spacing {spacing}")));
        }
        let half_cells = (half_width / spacing - 1e-9).ceil() as i64;
        let points = (1 - half_cells..half_cells).map(|i| i as f64 * spacing).collect();
        Ok(Grid { spacing, points })
    }

    pub fn half_width(&self) -> f64 {
        self.points.last().map(|x| x + self.spacing).unwrap_or(0.0)
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.spacing * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }
}

fn resolve_grid(d: f64, spec: &GridSpec) -> Result<Grid> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::domain(format!("well separation must be non-negative, got {d}")));
    }
    let need = 0.5 * d + WALL_MARGIN;
    let half = spec.half_width.unwrap_or(need);
    if half < need - 1e-12 {
        return Err(Error::Config(format!(
            "grid half-width {half} leaves less than {WALL_MARGIN} beyond the minima (need {need})"
        )));
    }
    if !(spec.spacing > 0.0 && spec.spacing <= MAX_SPACING) {
        return Err(Error::Config(format!("grid spacing {} outside (0, {MAX_SPACING}]", spec.spacing)));
    }
    Grid::symmetric(half, spec.spacing)
}

pub(crate) fn hamiltonian(grid: &Grid, potential: impl Fn(f64) -> f64) -> SymTridiag {
    let k = 0.5 / (grid.spacing * grid.spacing);
    SymTridiag { diag: grid.points.iter().map(|&x| 2.0 * k + potential(x)).collect(), off: -k }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellLevels {
    pub d: f64,
    pub f: f64,
    pub energies: Vec<f64>,
    /// Normalised under the grid inner product h * sum(psi_i phi_i).
    pub wavefunctions: Vec<Vec<f64>>,
    pub grid: Grid,
    pub gap: f64,
    pub ground_centroid: f64,
}

impl WellLevels {
    pub fn centroid(&self, level: usize) -> f64 {
        let psi = &self.wavefunctions[level];
        self.grid.spacing * self.grid.points.iter().zip(psi).map(|(x, p)| x * p * p).sum::<f64>()
    }
}

/// Lowest `n_states` levels of the spliced double well on an explicit grid.
pub fn solve_on_grid(d: f64, f: f64, n_states: usize, grid: &Grid) -> Result<WellLevels> {
    if n_states < 2 {
        return Err(Error::domain("need at least two states to define a gap"));
    }
    if !f.is_finite() {
        return Err(Error::domain("tilt must be finite"));
    }
    let h = hamiltonian(grid, |x| eval_double_well(d, f, x));
    let energies = h.lowest_eigenvalues(n_states);
    let scale = grid.spacing.sqrt();
    let mut unit: Vec<Vec<f64>> = Vec::with_capacity(n_states);
    for &e in &energies {
        let v = h.eigenvector(e, &unit);
        unit.push(v);
    }
    let wavefunctions: Vec<Vec<f64>> = unit.iter().map(|v| v.iter().map(|x| x / scale).collect()).collect();
    let gap = energies[1] - energies[0];
    if !(gap > 0.0) {
        return Err(Error::numerical(format!("degenerate ground doublet at d = {d}, f = {f}")));
    }
    let mut out = WellLevels {
        d,
        f,
        energies,
        wavefunctions,
        grid: grid.clone(),
        gap,
        ground_centroid: 0.0,
    };
    out.ground_centroid = out.centroid(0);
    Ok(out)
}

pub fn solve_double_well(d: f64, f: f64, n_states: usize, grid_spec: &GridSpec) -> Result<WellLevels> {
    let grid = resolve_grid(d, grid_spec)?;
    solve_on_grid(d, f, n_states, &grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCell {
    pub d: f64,
    pub f: f64,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub centroid: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapMap {
    pub d_grid: Vec<f64>,
    pub f_grid: Vec<f64>,
    /// `cells[i][j]` at (d_grid[i], f_grid[j]).
    pub cells: Vec<Vec<GapCell>>,
}

fn gap_cell(d: f64, f: f64, spec: &GridSpec) -> GapCell {
    match solve_ground_pair(d, f, spec) {
        Ok((e0, e1, centroid)) => GapCell { d, f, e0, e1, gap: e1 - e0, centroid, error: None },
        Err(e) => GapCell {
            d,
            f,
            e0: f64::NAN,
            e1: f64::NAN,
            gap: f64::NAN,
            centroid: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

// Two lowest levels and the ground centroid, without the excited eigenvector.
fn solve_ground_pair(d: f64, f: f64, spec: &GridSpec) -> Result<(f64, f64, f64)> {
    let grid = resolve_grid(d, spec)?;
    let h = hamiltonian(&grid, |x| eval_double_well(d, f, x));
    let ev = h.lowest_eigenvalues(2);
    let v = h.eigenvector(ev[0], &[]);
    let centroid: f64 = grid.points.iter().zip(&v).map(|(x, p)| x * p * p).sum();
    Ok((ev[0], ev[1], centroid))
}

/// Gap and ground centroid over a (d, f) grid, evaluated in parallel.
pub fn gap_map(
    d_range: (f64, f64),
    f_range: (f64, f64),
    nd: usize,
    nf: usize,
    grid_spec: &GridSpec,
) -> Result<GapMap> {
    check_range("d", d_range, nd)?;
    check_range("f", f_range, nf)?;
    if d_range.0 < 0.0 {
        return Err(Error::domain("well separation must be non-negative"));
    }
    if !(grid_spec.spacing > 0.0 && grid_spec.spacing <= MAX_SPACING) {
        return Err(Error::Config(format!("grid spacing {} outside (0, {MAX_SPACING}]", grid_spec.spacing)));
    }
    let d_grid = grid(d_range, nd);
    let f_grid = grid(f_range, nf);
    let flat: Vec<GapCell> =
        (0..nd * nf).into_par_iter().map(|k| gap_cell(d_grid[k / nf], f_grid[k % nf], grid_spec)).collect();
    let mut cells = Vec::with_capacity(nd);
    let mut it = flat.into_iter();
    for _ in 0..nd {
        cells.push(it.by_ref().take(nf).collect());
    }
    Ok(GapMap { d_grid, f_grid, cells })
}

impl GapMap {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "# d [x0], f [hbar*omega/x0], e0 [hbar*omega], e1 [hbar*omega], gap [hbar*omega], centroid [x0]\n",
        );
        for c in self.cells.iter().flatten() {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_num(c.d),
                fmt_num(c.f),
                fmt_num(c.e0),
                fmt_num(c.e1),
                fmt_num(c.gap),
                fmt_num(c.centroid)
            ));
        }
        s
    }

    fn nearest_f(&self, f: f64) -> usize {
        (0..self.f_grid.len())
            .min_by(|&a, &b| (self.f_grid[a] - f).abs().total_cmp(&(self.f_grid[b] - f).abs()))
            .unwrap_or(0)
    }

    /// Gap at (d, f) by bilinear interpolation; NaN outside the map.
    pub fn interpolate_gap(&self, d: f64, f: f64) -> f64 {
        let locate = |g: &[f64], v: f64| -> Option<(usize, f64)> {
            if g.len() == 1 {
                return ((v - g[0]).abs() < 1e-12).then_some((0, 0.0));
            }
            if v < g[0] - 1e-12 || v > g[g.len() - 1] + 1e-12 {
                return None;
            }
            let i = g.partition_point(|&x| x <= v).clamp(1, g.len() - 1) - 1;
            Some((i, ((v - g[i]) / (g[i + 1] - g[i])).clamp(0.0, 1.0)))
        };
        let (Some((i, s)), Some((j, t))) = (locate(&self.d_grid, d), locate(&self.f_grid, f)) else {
            return f64::NAN;
        };
        let at = |a: usize, b: usize| {
            let a = a.min(self.d_grid.len() - 1);
            let b = b.min(self.f_grid.len() - 1);
            self.cells[a][b].gap
        };
        (1.0 - s) * (1.0 - t) * at(i, j) + s * (1.0 - t) * at(i + 1, j) + (1.0 - s) * t * at(i, j + 1)
            + s * t * at(i + 1, j + 1)
    }
}

#[derive(PartialEq)]
struct Node {
    width: f64,
    i: usize,
    j: usize,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .total_cmp(&other.width)
            .then_with(|| other.i.cmp(&self.i))
            .then_with(|| other.j.cmp(&self.j))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Widest path (largest bottleneck gap) from (0, f_bias) to (d_target, f_bias).
///
/// Moves go one column forward in d (f may change by one grid step) or one
/// step in f at fixed d, so d never decreases. The end column is the first
/// grid column at or beyond `d_target`.
pub fn plan_split_path(map: &GapMap, d_target: f64, min_gap: f64, f_bias: f64) -> Result<Vec<(f64, f64)>> {
    let nd = map.d_grid.len();
    let nf = map.f_grid.len();
    if map.d_grid[0] > 1e-12 {
        return Err(Error::domain("gap map must start at d = 0"));
    }
    let Some(i_end) = map.d_grid.iter().position(|&d| d >= d_target - 1e-9) else {
        return Err(Error::domain(format!("gap map does not reach d = {d_target}")));
    };
    let j0 = map.nearest_f(f_bias);
    let gap_at = |i: usize, j: usize| {
        let g = map.cells[i][j].gap;
        if g.is_finite() {
            g
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut best = vec![vec![f64::NEG_INFINITY; nf]; nd];
    let mut prev = vec![vec![None::<(usize, usize)>; nf]; nd];
    let mut heap = BinaryHeap::new();
    best[0][j0] = gap_at(0, j0);
    heap.push(Node { width: best[0][j0], i: 0, j: j0 });
    while let Some(Node { width, i, j }) = heap.pop() {
        if width < best[i][j] {
            continue;
        }
        if i == i_end && j == j0 {
            break;
        }
        let mut next = Vec::with_capacity(5);
        if j > 0 {
            next.push((i, j - 1));
        }
        if j + 1 < nf {
            next.push((i, j + 1));
        }
        if i < i_end {
            for dj in [-1i64, 0, 1] {
                let nj = j as i64 + dj;
                if (0..nf as i64).contains(&nj) {
                    next.push((i + 1, nj as usize));
                }
            }
        }
        for (a, b) in next {
            let w = width.min(gap_at(a, b));
            if w > best[a][b] {
                best[a][b] = w;
                prev[a][b] = Some((i, j));
                heap.push(Node { width: w, i: a, j: b });
            }
        }
    }
    let bottleneck = best[i_end][j0];
    if !(bottleneck >= min_gap) {
        return Err(Error::PathNotFound { min_gap, bottleneck: bottleneck.max(0.0) });
    }
    let mut path = vec![(map.d_grid[i_end], map.f_grid[j0])];
    let mut at = (i_end, j0);
    while let Some(p) = prev[at.0][at.1] {
        path.push((map.d_grid[p.0], map.f_grid[p.1]));
        at = p;
    }
    path.reverse();
    Ok(path)
}
