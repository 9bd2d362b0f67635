//! Periodic boxes `[−L/2, L/2)^d` and complex fields sampled on them.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{invalid, Result};

/// Uniform periodic grid with `points` nodes per axis on a box of side `length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(invalid(format!(
                "points per dimension must be a power of two >= 16, got {points}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(invalid(format!("box length must be positive, got {length}")));
        }
        Ok(Self { dim, points, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Total number of nodes, `points^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Node coordinate along one axis, `−L/2 + j·dx`.
    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    /// Angular wavenumber `2πk/L` of FFT bin `k`; the Nyquist bin maps to `−π/dx`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.points as i64;
        let k = k as i64;
        let signed = if k < n / 2 { k } else { k - n };
        2.0 * PI * signed as f64 / self.length
    }

    /// Largest resolved wavenumber `π/dx`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Same node count on a box scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { length: self.length * factor, ..*self }
    }

    /// Per-axis indices of flat node `idx` (row-major, last axis fastest).
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.points, idx % self.points]
        }
    }

    /// `|x|²` at flat node `idx`.
    pub fn radius_sq(&self, idx: usize) -> f64 {
        let [a, b] = self.axes(idx);
        let xa = self.coordinate(a);
        if self.dim == 1 {
            xa * xa
        } else {
            let xb = self.coordinate(b);
            xa * xa + xb * xb
        }
    }

    /// `|ξ|²` of flat FFT bin `idx`.
    pub fn wavenumber_sq(&self, idx: usize) -> f64 {
        let [a, b] = self.axes(idx);
        let ka = self.wavenumber(a);
        if self.dim == 1 {
            ka * ka
        } else {
            let kb = self.wavenumber(b);
            ka * ka + kb * kb
        }
    }

    /// Coordinates of flat node `idx` (unused axes are 0).
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let [a, b] = self.axes(idx);
        if self.dim == 1 {
            [self.coordinate(a), 0.0]
        } else {
            [self.coordinate(a), self.coordinate(b)]
        }
    }

    /// Mask keeping modes inside the 2/3 band on every axis.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = self.points / 3;
        let keep = |k: usize| {
            let s = if k < self.points / 2 { k } else { self.points - k };
            s <= cut
        };
        (0..self.len())
            .map(|idx| {
                let [a, b] = self.axes(idx);
                keep(a) && (self.dim == 1 || keep(b))
            })
            .collect()
    }
}

/// Whether the values are node samples or unnormalised DFT coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Space,
    Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    side: Side,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>, side: Side) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, side })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            side: Side::Space,
        }
    }

    /// Samples `f(x)` at every node; `x[1]` is 0 in one dimension.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, values, side: Side::Space }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn to_frequency(&self) -> Field {
        let mut out = self.clone();
        out.make_frequency();
        out
    }

    pub fn to_space(&self) -> Field {
        let mut out = self.clone();
        out.make_space();
        out
    }

    pub fn make_frequency(&mut self) {
        if self.side == Side::Space {
            fft_nd(&mut self.values, &self.grid, FftDirection::Forward);
            self.side = Side::Frequency;
        }
    }

    pub fn make_space(&mut self) {
        if self.side == Side::Frequency {
            fft_nd(&mut self.values, &self.grid, FftDirection::Inverse);
            let inv = 1.0 / self.grid.len() as f64;
            self.values.iter_mut().for_each(|v| *v *= inv);
            self.side = Side::Space;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Discrete `L²` norm, `(Σ |u_j|² dx^d)^{1/2}`; Parseval on the frequency side.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let s = match self.side {
            Side::Space => s,
            Side::Frequency => s / self.grid.len() as f64,
        };
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.space_values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn norm_l4(&self) -> f64 {
        let s: f64 = self.space_values().iter().map(|v| v.norm_sqr().powi(2)).sum();
        (s * self.grid.cell_volume()).powf(0.25)
    }

    /// `L^∞` for d = 1, `L⁴` for d = 2.
    pub fn norm_xd(&self) -> f64 {
        if self.grid.dim == 1 {
            self.norm_linf()
        } else {
            self.norm_l4()
        }
    }

    fn space_values(&self) -> std::borrow::Cow<'_, [Complex64]> {
        match self.side {
            Side::Space => std::borrow::Cow::Borrowed(&self.values),
            Side::Frequency => std::borrow::Cow::Owned(self.to_space().values),
        }
    }

    /// `self − other`, both brought to the space side.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a + b)
    }

    fn zip(&self, other: &Field, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(invalid("fields live on different grids"));
        }
        let a = self.space_values();
        let b = other.space_values();
        let values = a.iter().zip(b.iter()).map(|(&x, &y)| op(x, y)).collect();
        Ok(Field { grid: self.grid, values, side: Side::Space })
    }

    pub fn scale(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// Applies `f(x_idx, value)` to every node value (space side).
    pub fn map_indexed(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Field {
        let src = self.space_values();
        let values = src.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        Field { grid: self.grid, values, side: Side::Space }
    }

    /// CSV with a `#`-prefixed JSON header carrying the grid metadata,
    /// then `i,re,im` (d = 1) or `i,j,re,im` (d = 2) rows.
    pub fn to_csv(&self) -> String {
        let vals = self.space_values();
        let header = serde_json::json!({
            "dim": self.grid.dim,
            "points": self.grid.points,
            "length": self.grid.length,
            "origin": -0.5 * self.grid.length,
            "spacing": self.grid.spacing(),
        });
        let mut out = format!("# {header}\n");
        out.push_str(if self.grid.dim == 1 { "i,re,im\n" } else { "i,j,re,im\n" });
        for (idx, v) in vals.iter().enumerate() {
            let [a, b] = self.grid.axes(idx);
            if self.grid.dim == 1 {
                out.push_str(&format!("{a},{:.17e},{:.17e}\n", v.re, v.im));
            } else {
                out.push_str(&format!("{a},{b},{:.17e},{:.17e}\n", v.re, v.im));
            }
        }
        out
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// Unnormalised d-dimensional DFT in place.
pub(crate) fn fft_nd(values: &mut [Complex64], grid: &Grid, direction: FftDirection) {
    let n = grid.points;
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // Rows (the whole buffer in 1D).
    fft.process_with_scratch(values, &mut scratch);
    if grid.dim == 2 {
        transpose_square(values, n);
        fft.process_with_scratch(values, &mut scratch);
        transpose_square(values, n);
    }
}

fn transpose_square(values: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            values.swap(i * n + j, j * n + i);
        }
    }
}
