//! Split-step integration of `i ∂_t u + Δu = F(u)` on a periodic grid.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{Field, Grid, Side};
use crate::nonlinearity::AngularFunction;

/// Grids at least this large are processed in parallel chunks.
const PAR_THRESHOLD: usize = 1 << 14;

/// `U(t) = e^{itΔ}`: multiplies bin `ξ` by `e^{−it|ξ|²}`.
pub fn free_propagate(f: &Field, t: f64) -> Field {
    if t == 0.0 {
        return f.clone();
    }
    let mut hat = f.to_frequency();
    apply_free_multiplier(&mut hat, t);
    if f.side() == Side::Space {
        hat.make_space();
    }
    hat
}

pub(crate) fn apply_free_multiplier(hat: &mut Field, t: f64) {
    debug_assert_eq!(hat.side(), Side::Frequency);
    let grid = *hat.grid();
    hat.values_mut()
        .iter_mut()
        .enumerate()
        .for_each(|(i, v)| *v *= Complex64::from_polar(1.0, -t * grid.wavenumber_sq(i)));
}

/// Strang splitting settings.
#[derive(Debug, Clone)]
pub struct Integrator {
    /// Zero modes outside the 2/3 band after each nonlinear substep.
    pub dealias: bool,
    /// Record every `stride`-th step (the endpoints are always recorded).
    pub stride: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { dealias: false, stride: 1 }
    }
}

impl Integrator {
    pub fn with_stride(stride: usize) -> Self {
        Self { stride: stride.max(1), ..Self::default() }
    }

    /// One Strang step: `U(dt/2)`, the pointwise flow of `i u' = F(u)` over
    /// `dt`, then `U(dt/2)`. Negative `dt` steps backward.
    pub fn step(&self, u: &Field, dt: f64, nl: &AngularFunction) -> Field {
        if nl.is_zero() {
            return free_propagate(u, dt);
        }
        let mut hat = u.to_frequency();
        apply_free_multiplier(&mut hat, 0.5 * dt);
        hat.make_space();
        nonlinear_substep(hat.values_mut(), dt, nl);
        hat.make_frequency();
        if self.dealias {
            let mask = hat.grid().dealias_mask();
            hat.values_mut()
                .iter_mut()
                .zip(mask)
                .filter(|(_, keep)| !keep)
                .for_each(|(v, _)| *v = Complex64::new(0.0, 0.0));
        }
        apply_free_multiplier(&mut hat, 0.5 * dt);
        hat.make_space();
        hat
    }

    /// `steps` equal Strang steps from `t0` to `t1`; `t1 < t0` integrates
    /// backward. Non-finite values abort with the index of the first bad step.
    pub fn solve(
        &self,
        u0: &Field,
        t0: f64,
        t1: f64,
        steps: usize,
        nl: &AngularFunction,
    ) -> Result<Trajectory> {
        if steps == 0 {
            return Err(invalid("steps must be >= 1"));
        }
        if t0 == t1 || !t0.is_finite() || !t1.is_finite() {
            return Err(invalid(format!("empty or non-finite interval [{t0}, {t1}]")));
        }
        let dt = (t1 - t0) / steps as f64;
        let stride = self.stride.max(1);
        let mut times = vec![t0];
        let mut fields = vec![u0.to_space()];
        let mut u = u0.to_space();
        for k in 1..=steps {
            u = self.step(&u, dt, nl);
            if !u.is_finite() {
                return Err(Error::IntegrationFailure { step: k, time: t0 + k as f64 * dt });
            }
            if k % stride == 0 || k == steps {
                times.push(if k == steps { t1 } else { t0 + k as f64 * dt });
                fields.push(u.clone());
            }
        }
        Ok(Trajectory { times, fields })
    }
}

/// Solves `i u' = F(u)` pointwise over `dt`: exact phase rotation for the
/// gauge preset, classical RK4 otherwise.
fn nonlinear_substep(values: &mut [Complex64], dt: f64, nl: &AngularFunction) {
    let body = |v: &mut Complex64| *v = pointwise_flow(*v, dt, nl);
    if values.len() >= PAR_THRESHOLD {
        values.par_iter_mut().for_each(body);
    } else {
        values.iter_mut().for_each(body);
    }
}

fn pointwise_flow(u: Complex64, dt: f64, nl: &AngularFunction) -> Complex64 {
    if let Some(mu) = nl.gauge_coefficient() {
        let m = u.norm().powf(nl.power());
        return u * Complex64::from_polar(1.0, -mu * m * dt);
    }
    let rhs = |w: Complex64| Complex64::new(0.0, -1.0) * nl.eval(w);
    let k1 = rhs(u);
    let k2 = rhs(u + k1 * (0.5 * dt));
    let k3 = rhs(u + k2 * (0.5 * dt));
    let k4 = rhs(u + k3 * dt);
    u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// One Strang step with default settings.
pub fn step_strang(u: &Field, dt: f64, nl: &AngularFunction) -> Field {
    Integrator::default().step(u, dt, nl)
}

/// `steps` Strang steps from `t0` to `t1`, recording every step.
pub fn solve_interval(u0: &Field, t0: f64, t1: f64, steps: usize, nl: &AngularFunction) -> Result<Trajectory> {
    Integrator::default().solve(u0, t0, t1, steps, nl)
}

/// Space-side fields at strictly monotone times on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    fields: Vec<Field>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    times: &'a [f64],
    files: Vec<String>,
    grid: Grid,
    config_hash: &'a str,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.len() != fields.len() || times.is_empty() {
            return Err(invalid("trajectory needs one field per time, at least one"));
        }
        let increasing = times.windows(2).all(|w| w[1] > w[0]);
        let decreasing = times.windows(2).all(|w| w[1] < w[0]);
        if times.len() > 1 && !increasing && !decreasing {
            return Err(invalid("trajectory times must be strictly monotone"));
        }
        let grid = *fields[0].grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(invalid("trajectory fields must share one grid"));
        }
        let fields = fields.into_iter().map(|f| f.to_space()).collect();
        Ok(Self { times, fields })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn last(&self) -> (f64, &Field) {
        let i = self.len() - 1;
        (self.times[i], &self.fields[i])
    }

    /// Same samples in increasing time order.
    pub fn into_increasing(mut self) -> Self {
        if self.times.len() > 1 && self.times[0] > self.times[1] {
            self.times.reverse();
            self.fields.reverse();
        }
        self
    }

    /// Each field multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            times: self.times.clone(),
            fields: self.fields.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    /// Pointwise difference with another trajectory on the same times.
    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times != other.times {
            return Err(Error::NodeMismatch("trajectories are sampled at different times".into()));
        }
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { times: self.times.clone(), fields })
    }

    /// Writes `field_<k>.csv` per recorded time and `manifest.json`.
    pub fn export(&self, dir: &Path, config_hash: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.len());
        for (k, f) in self.fields.iter().enumerate() {
            let name = format!("field_{k:04}.csv");
            std::fs::write(dir.join(&name), f.to_csv())?;
            files.push(name);
        }
        let manifest = Manifest {
            times: &self.times,
            files,
            grid: *self.grid(),
            config_hash,
        };
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}
