//! Final data and the modified asymptotic profile
//!
//! ```text
//! u_p(t) = M(t) D(t) ŵ(t),   M(t) = e^{i|x|²/4t},   (D(t) f)(x) = (2it)^{-d/2} f(x/2t)
//! ŵ(t)   = û₊ exp(−i (g₁/2) |û₊|^{2/d} log t)
//! ```
//!
//! The Fourier transform is unitary, `û(ξ) = (2π)^{-d/2} ∫ e^{−ix·ξ} u(x) dx`,
//! so `M` and `D` are `L²` isometries and `e^{itΔ} = M D ℱ M`. Because
//! `|u_p|^{2/d} = |ŵ|^{2/d} / 2t`, the resonant term `g₁|u_p|^{2/d}u_p` rotates
//! the phase at rate `g₁|û₊|^{2/d}/2t`, which fixes the factor `1/2` above.
//!
//! `D(t)` is evaluated without interpolation: the samples `ŵ(t)(x_j/2t)` live
//! on the spatial grid scaled by `1/2t`, so the dilation maps nodes to nodes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Field, Grid, Side};

pub use crate::spectral::free_propagate;

/// Relative amplitude below which a closed-form `û₊` counts as outside its support.
pub const SUPPORT_THRESHOLD: f64 = 1e-4;

/// Default `δ`, the midpoint of `(d/2, (d+1)/2)`.
pub fn default_delta(dim: usize) -> f64 {
    dim as f64 / 2.0 + 0.25
}

/// Shape of `û₊` as a function of the frequency variable `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalProfile {
    /// `a · exp(−|ξ|²/2σ²)`; its inverse transform is `a σ^d exp(−σ²|x|²/2)`.
    Gaussian { amplitude: f64, width: f64 },
    /// `a · exp(1 − 1/(1 − |ξ|²/r²))` for `|ξ| < r`, zero outside.
    Bump { amplitude: f64, radius: f64 },
    /// Samples of `û₊` at the nodes of a grid in the `ξ` variable.
    Sampled(Field),
}

impl FinalProfile {
    fn closed_eval(&self, xi_sq: f64) -> Complex64 {
        match *self {
            FinalProfile::Gaussian { amplitude, width } => {
                Complex64::new(amplitude * (-0.5 * xi_sq / (width * width)).exp(), 0.0)
            }
            FinalProfile::Bump { amplitude, radius } => {
                let s = xi_sq / (radius * radius);
                if s < 1.0 {
                    Complex64::new(amplitude * (1.0 - 1.0 / (1.0 - s)).exp(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            FinalProfile::Sampled(_) => unreachable!("sampled profiles are interpolated"),
        }
    }
}

/// Norms of the final data recorded at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalNorms {
    /// `‖û₊‖_∞`, the smallness parameter.
    pub linf: f64,
    /// `‖û₊‖₂ = ‖u₊‖₂`.
    pub l2: f64,
    /// `‖⟨x⟩^d u₊‖₂`.
    pub h0d: f64,
    /// `‖|ξ|^{−δ} û₊‖₂` with the `ξ = 0` node dropped.
    pub hdot_minus_delta: f64,
}

/// Final data `u₊` given through `û₊`.
#[derive(Debug, Clone)]
pub struct FinalData {
    dim: usize,
    profile: FinalProfile,
    delta: f64,
    samples: Field,
    norms: FinalNorms,
    support_radius: f64,
}

impl FinalData {
    pub fn new(dim: usize, profile: FinalProfile, delta: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid(format!("dimension must be 1 or 2, got {dim}")));
        }
        let (lo, hi) = (dim as f64 / 2.0, (dim as f64 + 1.0) / 2.0);
        if !(delta > lo && delta < hi) {
            return Err(invalid(format!("delta must lie in ({lo}, {hi}), got {delta}")));
        }
        let (samples, support_radius) = match &profile {
            FinalProfile::Gaussian { amplitude, width } => {
                if !(*width > 0.0) || !amplitude.is_finite() || !width.is_finite() {
                    return Err(invalid("gaussian final data needs a finite amplitude and positive width"));
                }
                let radius = width * (2.0 * (1.0 / SUPPORT_THRESHOLD).ln()).sqrt();
                (sample_closed(&profile, dim, radius)?, radius)
            }
            FinalProfile::Bump { amplitude, radius } => {
                if !(*radius > 0.0) || !amplitude.is_finite() || !radius.is_finite() {
                    return Err(invalid("bump final data needs a finite amplitude and positive radius"));
                }
                (sample_closed(&profile, dim, *radius)?, *radius)
            }
            FinalProfile::Sampled(field) => {
                if field.grid().dim() != dim {
                    return Err(invalid("sampled final data has the wrong dimension"));
                }
                let f = field.to_space();
                (f.clone(), sampled_support(&f))
            }
        };
        let norms = compute_norms(&samples, delta);
        Ok(Self { dim, profile, delta, samples, norms, support_radius })
    }

    pub fn gaussian(dim: usize, amplitude: f64, width: f64, delta: f64) -> Result<Self> {
        Self::new(dim, FinalProfile::Gaussian { amplitude, width }, delta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn profile(&self) -> &FinalProfile {
        &self.profile
    }

    pub fn norms(&self) -> &FinalNorms {
        &self.norms
    }

    /// `û₊` on its own `ξ` grid.
    pub fn samples(&self) -> &Field {
        &self.samples
    }

    /// Radius beyond which `û₊` is negligible (exact for the bump).
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Largest time for which `x = 2tξ` stays inside the box of `grid` for
    /// every `ξ` in the support of `û₊`.
    pub fn validity_cap(&self, grid: &Grid) -> f64 {
        grid.length() / (4.0 * self.support_radius)
    }

    /// `û₊` at the nodes of `target`, read as points in `ξ`. Returns the
    /// values and the fraction of nodes outside the sampled box (always 0 for
    /// closed forms).
    pub fn eval_on(&self, target: &Grid) -> (Vec<Complex64>, f64) {
        match &self.profile {
            FinalProfile::Sampled(_) => interpolate_trig(&self.samples, target),
            closed => {
                let vals = (0..target.len()).map(|i| closed.closed_eval(target.radius_sq(i))).collect();
                (vals, 0.0)
            }
        }
    }
}

fn sample_closed(profile: &FinalProfile, dim: usize, radius: f64) -> Result<Field> {
    let points = if dim == 1 { 4096 } else { 256 };
    let grid = Grid::new(dim, points, 4.0 * radius)?;
    Ok(Field::from_fn(grid, |xi| profile.closed_eval(xi[0] * xi[0] + xi[1] * xi[1])))
}

fn sampled_support(f: &Field) -> f64 {
    let peak = f.norm_linf();
    let grid = f.grid();
    (0..grid.len())
        .filter(|&i| f.values()[i].norm() > SUPPORT_THRESHOLD * peak)
        .map(|i| grid.radius_sq(i).sqrt())
        .fold(0.0, f64::max)
        .max(grid.spacing())
}

fn compute_norms(samples: &Field, delta: f64) -> FinalNorms {
    let grid = *samples.grid();
    let d = grid.dim();
    let dv = grid.cell_volume();
    let vals = samples.values();
    let linf = samples.norm_linf();
    let l2 = samples.norm_l2();
    let hdot_sq: f64 = (0..grid.len())
        .filter_map(|i| {
            let r2 = grid.radius_sq(i);
            (r2 > 0.0).then(|| r2.powf(-delta) * vals[i].norm_sqr())
        })
        .sum::<f64>()
        * dv;

    // u₊(x_m) = (2π)^{-d/2} dξ^d Σ_j û_j e^{iξ_j·x_m}; with both boxes centred,
    // the phase reduces to a sign (−1)^{|j|} and an irrelevant constant.
    let n = grid.points();
    let signed: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let [a, b] = grid.axes(i);
            let parity = if d == 1 { a } else { a + b };
            if parity % 2 == 0 { vals[i] } else { -vals[i] }
        })
        .collect();
    let mut u = Field::new(grid, signed, Side::Frequency).expect("same grid");
    u.make_space();
    let xgrid = Grid::new(d, n, 2.0 * PI / grid.spacing()).expect("valid dual grid");
    let scale = (2.0 * PI).powf(-(d as f64) / 2.0) * dv * grid.len() as f64;
    let h0d_sq: f64 = u
        .values()
        .iter()
        .enumerate()
        .map(|(m, v)| (1.0 + xgrid.radius_sq(m)).powi(d as i32) * (v * scale).norm_sqr())
        .sum::<f64>()
        * xgrid.cell_volume();

    FinalNorms {
        linf,
        l2,
        h0d: h0d_sq.sqrt(),
        hdot_minus_delta: hdot_sq.sqrt(),
    }
}

/// Band-limited (trigonometric) interpolation of `f` onto the nodes of
/// `target`, tensor-product in 2D. Nodes outside `f`'s box are set to 0.
fn interpolate_trig(f: &Field, target: &Grid) -> (Vec<Complex64>, f64) {
    let src = *f.grid();
    let n = src.points();
    let m = target.points();
    let d = src.dim();
    let coeffs = f.to_frequency();
    let half = 0.5 * src.length();

    // E[j][q]: basis mode q at target coordinate j, already divided by n.
    let basis: Vec<Vec<Complex64>> = (0..m)
        .map(|j| {
            let s = target.coordinate(j) + half;
            (0..n)
                .map(|q| {
                    if q == n / 2 {
                        Complex64::new((src.wavenumber(q) * s).cos() / n as f64, 0.0)
                    } else {
                        Complex64::from_polar(1.0 / n as f64, src.wavenumber(q) * s)
                    }
                })
                .collect()
        })
        .collect();
    let inside: Vec<bool> = (0..m).map(|j| target.coordinate(j).abs() <= half).collect();
    let c = coeffs.values();

    let values: Vec<Complex64> = if d == 1 {
        (0..m)
            .map(|j| {
                if !inside[j] {
                    return Complex64::new(0.0, 0.0);
                }
                basis[j].iter().zip(c).map(|(e, v)| e * v).sum()
            })
            .collect()
    } else {
        // Contract the second axis first, then the first.
        let mut partial = vec![Complex64::new(0.0, 0.0); n * m];
        for qa in 0..n {
            let row = &c[qa * n..(qa + 1) * n];
            for jb in 0..m {
                partial[qa * m + jb] = basis[jb].iter().zip(row).map(|(e, v)| e * v).sum();
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        for ja in 0..m {
            if !inside[ja] {
                continue;
            }
            for jb in 0..m {
                if !inside[jb] {
                    continue;
                }
                out[ja * m + jb] = (0..n).map(|qa| basis[ja][qa] * partial[qa * m + jb]).sum();
            }
        }
        out
    };
    let outside = if d == 1 {
        inside.iter().filter(|&&b| !b).count() as f64 / m as f64
    } else {
        let k = inside.iter().filter(|&&b| b).count() as f64 / m as f64;
        1.0 - k * k
    };
    (values, outside)
}

fn log_phase(uhat: Complex64, t: f64, g1: f64, power: f64) -> Complex64 {
    if g1 == 0.0 {
        return uhat;
    }
    uhat * Complex64::from_polar(1.0, -0.5 * g1 * uhat.norm().powf(power) * t.ln())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(invalid(format!("profile time must satisfy t >= 1, got {t}")));
    }
    Ok(())
}

/// `ŵ(t) = û₊ exp(−i (g₁/2)|û₊|^{2/d} log t)` on the final data's own grid.
pub fn hat_w(fd: &FinalData, t: f64, g1: f64) -> Result<Field> {
    check_time(t)?;
    let power = 2.0 / fd.dim as f64;
    Ok(fd.samples.map_indexed(|_, v| log_phase(v, t, g1, power)))
}

/// `ŵ(t)(x_j/2t)` as a field on `grid` scaled by `1/2t`.
pub(crate) fn dilated_hat_w(fd: &FinalData, grid: &Grid, t: f64, g1: f64) -> Result<Field> {
    check_time(t)?;
    if grid.dim() != fd.dim {
        return Err(invalid("grid and final data dimensions differ"));
    }
    let target = grid.scaled(0.5 / t);
    let (vals, outside) = fd.eval_on(&target);
    if outside > 0.01 {
        log::warn!(
            "x/2t leaves the sampled frequency box on {:.1}% of the grid at t = {t}",
            100.0 * outside
        );
    }
    let power = 2.0 / fd.dim as f64;
    let vals = vals.into_iter().map(|v| log_phase(v, t, g1, power)).collect();
    Field::new(target, vals, Side::Space)
}

/// Applies `M(t) D(t)` to samples taken on the dilated grid.
pub(crate) fn apply_md(grid: &Grid, t: f64, dilated: &Field) -> Field {
    let d = grid.dim() as f64;
    let amp = Complex64::from_polar((2.0 * t).powf(-d / 2.0), -PI * d / 4.0);
    let vals = dilated
        .to_space()
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * amp * Complex64::from_polar(1.0, grid.radius_sq(i) / (4.0 * t)))
        .collect();
    Field::new(*grid, vals, Side::Space).expect("dilated grid has the same node count")
}

/// `u_p(t) = M(t) D(t) ŵ(t)` on `grid`.
pub fn build_profile(fd: &FinalData, grid: &Grid, t: f64, g1: f64) -> Result<Field> {
    let cap = fd.validity_cap(grid);
    if t > cap {
        log::warn!("t = {t} exceeds the box validity cap {cap:.3}; the profile wraps around");
    }
    let w = dilated_hat_w(fd, grid, t, g1)?;
    Ok(apply_md(grid, t, &w))
}
