//! Error series against the asymptotic profile, power-law fits, and the
//! non-resonant Duhamel term.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::finalstate::{BackwardDuhamel, Scenario};
use crate::profile::{build_profile, FinalData};
use crate::spectral::Trajectory;

/// Minimum number of modes for the non-resonant term.
pub const MIN_DUHAMEL_MODES: usize = 32;

/// `‖u(t) − u_p(t)‖₂` and `‖u(t) − u_p(t)‖_{X_d}` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub t: f64,
    pub l2_error: f64,
    pub xd_norm: f64,
}

/// Compares each recorded field with `u_p` built with resonant coefficient `g1`.
pub fn error_series(traj: &Trajectory, fd: &FinalData, g1: f64) -> Result<Vec<ErrorSample>> {
    let grid = *traj.grid();
    traj.times()
        .par_iter()
        .zip(traj.fields().par_iter())
        .map(|(&t, u)| {
            let diff = u.sub(&build_profile(fd, &grid, t, g1)?)?;
            Ok(ErrorSample { t, l2_error: diff.norm_l2(), xd_norm: diff.norm_xd() })
        })
        .collect()
}

/// Least-squares power law `value ≈ C t^{−exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits all points with `t ≥ t_min`.
pub fn fit_decay(series: &[(f64, f64)], t_min: f64) -> Result<DecayFit> {
    fit_decay_window(series, t_min, f64::INFINITY)
}

/// Fits the points with `t_min ≤ t ≤ t_max`: OLS slope of `−log value`
/// against `log t`. A flat series has `r² = 1`.
pub fn fit_decay_window(series: &[(f64, f64)], t_min: f64, t_max: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= t_min && *t <= t_max)
        .copied()
        .collect();
    if pts.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 points in [{t_min}, {t_max}], got {}",
            pts.len()
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(t, v)| !(*v > 0.0) || !(*t > 0.0) || !v.is_finite()) {
        return Err(Error::Fit(format!("nonpositive value {v} at t = {t}")));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| -v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all points share one time".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * n * (1.0 + my * my) {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(DecayFit { exponent: slope, r_squared, points: pts.len() })
}

/// `(t, ‖u − u_p‖₂)` pairs.
pub fn l2_pairs(series: &[ErrorSample]) -> Vec<(f64, f64)> {
    series.iter().map(|s| (s.t, s.l2_error)).collect()
}

/// `‖∫_t^{T_max} U(t−s) N(u_p)(s) ds‖₂` at every node. Each node interval is
/// split into `substeps` geometric sub-intervals because `N(u_p)` carries the
/// fast phases `e^{in|x|²/4s}`.
pub fn nonresonant_duhamel(sc: &Scenario, substeps: usize) -> Result<Vec<(f64, f64)>> {
    if sc.spectrum.order() < MIN_DUHAMEL_MODES {
        return Err(invalid(format!(
            "the non-resonant term needs at least {MIN_DUHAMEL_MODES} modes, got {}",
            sc.spectrum.order()
        )));
    }
    if substeps == 0 {
        return Err(invalid("substeps must be >= 1"));
    }
    sc.check_validity()?;
    let split = sc.split()?;
    let nodes = &sc.nodes;
    if split.is_purely_resonant() || sc.nonlinearity.is_zero() {
        return Ok(nodes.iter().map(|&t| (t, 0.0)).collect());
    }
    let g1 = sc.g1();
    let integrand = |s: f64| -> Result<crate::grid::Field> {
        let up = build_profile(&sc.final_data, &sc.grid, s, g1)?;
        Ok(up.map_indexed(|_, v| split.nonresonant(v)))
    };
    let k = nodes.len();
    let mut out = vec![(nodes[k - 1], 0.0)];
    let mut acc = BackwardDuhamel::new(nodes[k - 1], &integrand(nodes[k - 1])?);
    for j in (0..k - 1).rev() {
        let (lo, hi) = (nodes[j], nodes[j + 1]);
        let ratio = (hi / lo).ln() / substeps as f64;
        // Fine nodes from just below `hi` down to `lo`.
        let fine: Vec<f64> = (1..=substeps)
            .map(|m| if m == substeps { lo } else { hi * (-ratio * m as f64).exp() })
            .collect();
        let hs = fine.par_iter().map(|&s| integrand(s)).collect::<Result<Vec<_>>>()?;
        for (&s, h) in fine.iter().zip(&hs) {
            acc.step(s, h);
        }
        out.push((lo, acc.value().norm_l2()));
    }
    out.reverse();
    Ok(out)
}

/// Multiplies both fields by one unit constant before comparing; used to
/// check phase invariance of the error norms.
pub fn rotated_error(u: &crate::grid::Field, up: &crate::grid::Field, phase: f64) -> Result<(f64, f64)> {
    let c = Complex64::from_polar(1.0, phase);
    let diff = u.scaled(c).sub(&up.scaled(c))?;
    Ok((diff.norm_l2(), diff.norm_xd()))
}
