//! The final-state problem: prescribe `u₊` at `t = ∞` and build the solution
//! on `[T, T_max]`, either by integrating backward from `u_p(T_max)` or as
//! the fixed point of the integral map
//!
//! ```text
//! Φ(v)(t) = u_p(t) + R(t)ŵ(t) + i ∫_t^{T_max} U(t−s) [F(v) − F(u_p) + N(u_p) − R(s)G(ŵ)(s)/2s] ds
//! ```
//!
//! with `R(t) = M(t)D(t)(U(−1/4t) − 1)`, `G(ŵ) = g₁|ŵ|^{2/d}ŵ` and `N` the
//! non-resonant part of `F`. All time integrals run over a fixed set of
//! geometric nodes and are truncated at `T_max`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Field, Grid, Side};
use crate::nonlinearity::{fourier_coefficients, AngularFunction, FourierSpectrum, Split};
use crate::profile::{apply_md, build_profile, dilated_hat_w, FinalData};
use crate::spectral::{apply_free_multiplier, free_propagate, Integrator, Trajectory};

/// Default number of quadrature intervals between `T` and `T_max`.
pub const DEFAULT_INTERVALS: usize = 64;

/// Parameters of the existence statement. `eps` records `‖û₊‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremParameters {
    pub dim: usize,
    pub delta: f64,
    pub gamma: f64,
    pub b: f64,
    pub eta: f64,
    pub t_start: f64,
    pub t_max: f64,
    pub eps: f64,
}

impl TheoremParameters {
    /// `γ = δ/2` for d = 1, `(δ+2)/6` for d = 2.
    pub fn gamma_for(dim: usize, delta: f64) -> f64 {
        if dim == 1 {
            delta / 2.0
        } else {
            (delta + 2.0) / 6.0
        }
    }

    /// `d/4 + 0.05`, pulled down to the midpoint of `(d/4, γ)` when that
    /// interval is too narrow.
    pub fn default_b(dim: usize, delta: f64) -> f64 {
        let lo = dim as f64 / 4.0;
        let gamma = Self::gamma_for(dim, delta);
        (lo + 0.05).min(0.5 * (lo + gamma))
    }

    /// `η` halfway between the smallest admissible value `(δ − d/2)/2` and 1.
    pub fn default_eta(dim: usize, delta: f64) -> f64 {
        0.5 * ((delta - dim as f64 / 2.0) / 2.0 + 1.0)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        delta: f64,
        b: f64,
        eta: f64,
        t_start: f64,
        t_max: f64,
        eps: f64,
    ) -> Result<Self> {
        let p = Self {
            dim,
            delta,
            gamma: Self::gamma_for(dim, delta),
            b,
            eta,
            t_start,
            t_max,
            eps,
        };
        p.validate()?;
        Ok(p)
    }

    /// Defaults for `δ`, `b` and `η`.
    pub fn with_defaults(dim: usize, t_start: f64, t_max: f64, eps: f64) -> Result<Self> {
        let delta = crate::profile::default_delta(dim);
        Self::new(
            dim,
            delta,
            Self::default_b(dim, delta),
            Self::default_eta(dim, delta),
            t_start,
            t_max,
            eps,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim as f64;
        if self.dim != 1 && self.dim != 2 {
            return Err(invalid(format!("d must be 1 or 2, got {}", self.dim)));
        }
        if !(self.delta > d / 2.0 && self.delta < (d + 1.0) / 2.0) {
            return Err(invalid(format!(
                "delta must lie in (d/2, (d+1)/2) = ({}, {}), got {}",
                d / 2.0,
                (d + 1.0) / 2.0,
                self.delta
            )));
        }
        if !(self.eta > 0.0) || !(self.delta - d / 2.0 < 2.0 * self.eta) {
            return Err(invalid(format!(
                "eta must be positive with delta - d/2 < 2 eta, got eta = {}",
                self.eta
            )));
        }
        let gamma = Self::gamma_for(self.dim, self.delta);
        if (self.gamma - gamma).abs() > 1e-12 {
            return Err(invalid(format!("gamma must equal {gamma} for d = {}", self.dim)));
        }
        if !(self.b > d / 4.0 && self.b < gamma) {
            return Err(invalid(format!(
                "b must lie in (d/4, γ) = ({}, {gamma:.6}), got {}",
                d / 4.0,
                self.b
            )));
        }
        if !(self.t_start >= 1.0 && self.t_start < self.t_max && self.t_max.is_finite()) {
            return Err(invalid(format!(
                "times must satisfy 1 <= T < T_max, got T = {}, T_max = {}",
                self.t_start, self.t_max
            )));
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(invalid(format!("eps must be finite and >= 0, got {}", self.eps)));
        }
        Ok(())
    }
}

/// `count` points from `t0` to `t1` with constant ratio; both ends exact.
pub fn geometric_nodes(t0: f64, t1: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(t0 > 0.0 && t1 > t0) {
        return Err(invalid(format!(
            "geometric nodes need count >= 2 and 0 < t0 < t1, got {count} on [{t0}, {t1}]"
        )));
    }
    let ratio = (t1 / t0).ln() / (count - 1) as f64;
    let mut nodes: Vec<f64> = (0..count).map(|j| t0 * (ratio * j as f64).exp()).collect();
    nodes[0] = t0;
    nodes[count - 1] = t1;
    Ok(nodes)
}

/// Everything a final-state computation needs, validated together.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: Grid,
    pub final_data: FinalData,
    pub nonlinearity: AngularFunction,
    pub spectrum: FourierSpectrum,
    pub params: TheoremParameters,
    pub nodes: Vec<f64>,
}

impl Scenario {
    /// Uses `modes` Fourier modes for the split and `intervals + 1`
    /// geometric nodes on `[T, T_max]`.
    pub fn new(
        grid: Grid,
        final_data: FinalData,
        nonlinearity: AngularFunction,
        params: TheoremParameters,
        modes: usize,
        intervals: usize,
    ) -> Result<Self> {
        params.validate()?;
        if grid.dim() != params.dim || final_data.dim() != params.dim || nonlinearity.dimension() != params.dim {
            return Err(invalid("grid, final data, nonlinearity and parameters disagree on d"));
        }
        let spectrum = fourier_coefficients(&nonlinearity, modes.max(1))?;
        let nodes = geometric_nodes(params.t_start, params.t_max, intervals + 1)?;
        Ok(Self { grid, final_data, nonlinearity, spectrum, params, nodes })
    }

    /// `Re g₁`; the imaginary part vanishes for admissible nonlinearities.
    pub fn g1(&self) -> f64 {
        if self.nonlinearity.is_zero() {
            0.0
        } else {
            self.spectrum.coefficient(1).re
        }
    }

    pub fn split(&self) -> Result<Split> {
        Split::new(self.params.dim, &self.spectrum)
    }

    /// Rejects `T_max` beyond the grid's validity cap.
    pub fn check_validity(&self) -> Result<()> {
        let cap = self.final_data.validity_cap(&self.grid);
        if self.params.t_max > cap * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "T_max = {} exceeds the grid validity cap {cap:.4}; enlarge the box or shrink T_max",
                self.params.t_max
            )));
        }
        Ok(())
    }

    /// `u_p` at every node.
    pub fn profile_trajectory(&self, g1: f64) -> Result<Trajectory> {
        let fields = self
            .nodes
            .par_iter()
            .map(|&t| build_profile(&self.final_data, &self.grid, t, g1))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.nodes.clone(), fields)
    }
}

/// Sets `u(T_max) = u_p(T_max)` and integrates backward to `T`, recording
/// every quadrature node. About `steps` Strang steps are spread over the
/// node intervals in proportion to their length. Returns increasing times.
pub fn construct_backward(sc: &Scenario, steps: usize, integrator: &Integrator) -> Result<Trajectory> {
    let start = build_profile(&sc.final_data, &sc.grid, sc.params.t_max, sc.g1())?;
    integrate_backward(sc, start, steps, integrator)
}

/// Backward integration over the nodes from an arbitrary state at `T_max`.
pub fn integrate_backward(
    sc: &Scenario,
    start: Field,
    steps: usize,
    integrator: &Integrator,
) -> Result<Trajectory> {
    sc.check_validity()?;
    if steps == 0 {
        return Err(invalid("steps must be >= 1"));
    }
    if *start.grid() != sc.grid {
        return Err(invalid("starting field lives on a different grid"));
    }
    let span = sc.params.t_max - sc.params.t_start;
    let seg = Integrator { stride: usize::MAX, ..integrator.clone() };
    let k = sc.nodes.len();
    let mut fields = vec![start.to_space()];
    let mut step_base = 0;
    for j in (0..k - 1).rev() {
        let (t0, t1) = (sc.nodes[j + 1], sc.nodes[j]);
        let n = ((steps as f64 * (t0 - t1) / span).ceil() as usize).max(1);
        let u = fields.last().expect("nonempty");
        let traj = seg.solve(u, t0, t1, n, &sc.nonlinearity).map_err(|e| match e {
            Error::IntegrationFailure { step, time } => {
                Error::IntegrationFailure { step: step_base + step, time }
            }
            other => other,
        })?;
        step_base += n;
        fields.push(traj.last().1.clone());
    }
    let times: Vec<f64> = sc.nodes.iter().rev().copied().collect();
    Ok(Trajectory::new(times, fields)?.into_increasing())
}

/// `R(t)ŵ(t) = M(t)D(t)(U(−1/4t) − 1)ŵ(t)` on the scenario grid.
pub fn operator_r(fd: &FinalData, grid: &Grid, t: f64, g1: f64) -> Result<Field> {
    let w = dilated_hat_w(fd, grid, t, g1)?;
    Ok(apply_md(grid, t, &free_minus_identity(&w, t)))
}

fn free_minus_identity(w: &Field, t: f64) -> Field {
    let moved = free_propagate(w, -0.25 / t);
    moved.sub(w).expect("same grid")
}

/// `R(s)G(ŵ)(s)` with `G(ŵ) = g₁|ŵ|^{2/d}ŵ`.
fn operator_r_resonant(fd: &FinalData, grid: &Grid, s: f64, g1: f64) -> Result<Field> {
    let w = dilated_hat_w(fd, grid, s, g1)?;
    let power = 2.0 / grid.dim() as f64;
    let gw = w.map_indexed(|_, v| v * (g1 * v.norm().powf(power)));
    Ok(apply_md(grid, s, &free_minus_identity(&gw, s)))
}

/// `‖N(u_p) − R G(ŵ)/2s‖₂` at `s = T_max`, the integrand size at the
/// truncation point of every time integral.
pub fn tail_proxy(sc: &Scenario) -> Result<f64> {
    Ok(truncation_source(sc, &sc.split()?, sc.params.t_max)?.norm_l2())
}

fn truncation_source(sc: &Scenario, split: &Split, t: f64) -> Result<Field> {
    let g1 = sc.g1();
    let up = build_profile(&sc.final_data, &sc.grid, t, g1)?;
    let rg = operator_r_resonant(&sc.final_data, &sc.grid, t, g1)?;
    let nd = up.map_indexed(|_, v| split.nonresonant(v));
    nd.sub(&rg.scaled(Complex64::new(0.5 / t, 0.0)))
}

/// Backward trapezoid accumulation of `∫_t^{t_K} U(t−s) h(s) ds` in the
/// interaction picture. Feed nodes from the last to the first.
pub(crate) struct BackwardDuhamel {
    acc: Field,
    last_t: f64,
    last_h: Field,
}

impl BackwardDuhamel {
    pub(crate) fn new(t_end: f64, h_end: &Field) -> Self {
        let mut acc = Field::zeros(*h_end.grid());
        acc.make_frequency();
        Self { acc, last_t: t_end, last_h: h_end.to_frequency() }
    }

    /// Advances to the earlier node `t` with integrand `h(t)`.
    pub(crate) fn step(&mut self, t: f64, h: &Field) {
        let half = Complex64::new(0.5 * (self.last_t - t), 0.0);
        let h = h.to_frequency();
        axpy(self.acc.values_mut(), half, self.last_h.values());
        apply_free_multiplier(&mut self.acc, t - self.last_t);
        axpy(self.acc.values_mut(), half, h.values());
        self.last_t = t;
        self.last_h = h;
    }

    /// Current integral, space side.
    pub(crate) fn value(&self) -> Field {
        self.acc.to_space()
    }
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// `i ∫_{t_j}^{t_K} U(t_j−s) h(s) ds` at every node by composite trapezoid.
fn duhamel_on_nodes(times: &[f64], h: &[Field]) -> Vec<Field> {
    let k = times.len();
    let mut out = vec![Field::zeros(*h[0].grid()); k];
    let mut acc = BackwardDuhamel::new(times[k - 1], &h[k - 1]);
    for j in (0..k - 1).rev() {
        acc.step(times[j], &h[j]);
        out[j] = acc.value().scaled(Complex64::new(0.0, 1.0));
    }
    out
}

/// The integral map with its `v`-independent parts precomputed.
pub struct PicardMap<'a> {
    sc: &'a Scenario,
    profile: Trajectory,
    /// `u_p + R ŵ` at each node.
    forcing: Vec<Field>,
    /// `N(u_p) − R G(ŵ)/2s` at each node.
    source: Vec<Field>,
    /// `F(u_p)` at each node.
    f_profile: Vec<Field>,
}

impl<'a> PicardMap<'a> {
    pub fn new(sc: &'a Scenario) -> Result<Self> {
        sc.check_validity()?;
        let g1 = sc.g1();
        let split = sc.split()?;
        let profile = sc.profile_trajectory(g1)?;
        let parts = sc
            .nodes
            .par_iter()
            .zip(profile.fields().par_iter())
            .map(|(&t, up)| -> Result<(Field, Field, Field)> {
                let r = operator_r(&sc.final_data, &sc.grid, t, g1)?;
                let rg = operator_r_resonant(&sc.final_data, &sc.grid, t, g1)?;
                let forcing = up.add(&r)?;
                let nd = up.map_indexed(|_, v| split.nonresonant(v));
                let source = nd.sub(&rg.scaled(Complex64::new(0.5 / t, 0.0)))?;
                let fp = up.map_indexed(|_, v| sc.nonlinearity.eval(v));
                Ok((forcing, source, fp))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut forcing = Vec::with_capacity(parts.len());
        let mut source = Vec::with_capacity(parts.len());
        let mut f_profile = Vec::with_capacity(parts.len());
        for (a, b, c) in parts {
            forcing.push(a);
            source.push(b);
            f_profile.push(c);
        }
        Ok(Self { sc, profile, forcing, source, f_profile })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.sc.nodes
    }

    /// `u_p` on the nodes, the initial iterate.
    pub fn profile(&self) -> &Trajectory {
        &self.profile
    }

    /// `‖N(u_p) − R G(ŵ)/2s‖₂` at `T_max`, the size of the integrand at the
    /// truncation point.
    pub fn tail_proxy(&self) -> f64 {
        self.source.last().expect("at least two nodes").norm_l2()
    }

    pub fn apply(&self, v: &Trajectory) -> Result<Trajectory> {
        if v.times() != self.sc.nodes.as_slice() {
            return Err(Error::NodeMismatch(format!(
                "trajectory has {} samples, the quadrature uses {} nodes",
                v.len(),
                self.sc.nodes.len()
            )));
        }
        if *v.grid() != self.sc.grid {
            return Err(Error::NodeMismatch("trajectory grid differs from the quadrature grid".into()));
        }
        let nl = &self.sc.nonlinearity;
        let h: Vec<Field> = v
            .fields()
            .par_iter()
            .zip(self.f_profile.par_iter().zip(self.source.par_iter()))
            .map(|(vf, (fp, src))| {
                let vals = vf
                    .values()
                    .iter()
                    .zip(fp.values().iter().zip(src.values()))
                    .map(|(&x, (&f, &s))| nl.eval(x) - f + s)
                    .collect();
                Field::new(self.sc.grid, vals, Side::Space).expect("grid sizes match")
            })
            .collect();
        let integral = duhamel_on_nodes(&self.sc.nodes, &h);
        let fields = self
            .forcing
            .iter()
            .zip(&integral)
            .map(|(f, i)| f.add(i))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.sc.nodes.clone(), fields)
    }

    /// `iterations` applications starting from `u_p`.
    pub fn iterate(&self, iterations: usize) -> Result<PicardRun> {
        let b = self.sc.params.b;
        let mut current = self.profile.clone();
        let mut distances = Vec::with_capacity(iterations);
        for _ in 0..iterations {
            let next = self.apply(&current)?;
            distances.push(weighted_sup_l2(&next.sub(&current)?, b));
            current = next;
        }
        let ratios = distances
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect();
        Ok(PicardRun { distances, ratios, limit: current })
    }
}

/// Outcome of a Picard iteration from `u_p`.
#[derive(Debug, Clone)]
pub struct PicardRun {
    /// `d_k = sup_t t^b ‖Φ^{k+1}(u_p) − Φ^k(u_p)‖₂`, `k = 0, 1, …`.
    pub distances: Vec<f64>,
    /// `d_{k+1}/d_k`.
    pub ratios: Vec<f64>,
    /// Last iterate.
    pub limit: Trajectory,
}

/// `sup_t t^b ‖v(t)‖₂`.
pub fn weighted_sup_l2(v: &Trajectory, b: f64) -> f64 {
    v.times()
        .iter()
        .zip(v.fields())
        .map(|(t, f)| t.powf(b) * f.norm_l2())
        .fold(0.0, f64::max)
}

/// The two parts of the weighted norm, with the truncation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    /// `sup_t t^b ‖v(t)‖₂`.
    pub energy: f64,
    /// `sup_t t^b (∫_t^{T_max} ‖v(s)‖_{X_d}⁴ ds)^{1/4}`.
    pub strichartz: f64,
    pub total: f64,
    /// Upper limit of the time integral.
    pub truncated_at: f64,
}

/// Both parts of the weighted norm over the recorded times (increasing or
/// decreasing), time integral by trapezoid.
pub fn weighted_norm_parts(v: &Trajectory, b: f64) -> WeightedNorm {
    let mut pairs: Vec<(f64, f64)> = v
        .times()
        .iter()
        .zip(v.fields())
        .map(|(&t, f)| (t, f.norm_xd().powi(4)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut tail = 0.0;
    let mut strichartz = 0.0f64;
    for j in (0..pairs.len()).rev() {
        if j + 1 < pairs.len() {
            let (t0, a) = pairs[j];
            let (t1, c) = pairs[j + 1];
            tail += 0.5 * (t1 - t0) * (a + c);
        }
        strichartz = strichartz.max(pairs[j].0.powf(b) * tail.powf(0.25));
    }
    let energy = weighted_sup_l2(v, b);
    WeightedNorm {
        energy,
        strichartz,
        total: energy + strichartz,
        truncated_at: pairs.last().map_or(0.0, |p| p.0),
    }
}

/// The weighted norm with `b` from the parameters.
pub fn weighted_norm_x(v: &Trajectory, p: &TheoremParameters) -> f64 {
    weighted_norm_parts(v, p.b).total
}
