//! Measurement harness: slaving residuals, Duhamel residuals, ε-sweeps and
//! log-log rate fits.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::initial_data::{
    benney_amplitude, benney_wave, compatible_v, nls_amplitude, nls_wave, TravelingWaveSpec,
};
use crate::integrators::{evolve_gbenney, evolve_nls, StepConfig};
use crate::models::{
    energy_g, energy_nls, limit_coefficient, mass, zakharov_instance, GBenneyParams, GBenneyState,
    NlsParams, TransportCoupling,
};
use crate::norms::{lq_norm, HasGrid, HasU, Trajectory};
use crate::spectral::{
    boundary_mass_fraction, transport_shift, ComplexField, Grid, RealField, Representation,
    BOUNDARY_MASS_LIMIT,
};

fn l2_real(a: &[f64], dx: f64) -> f64 {
    (dx * a.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

fn nonempty<S>(traj: &Trajectory<S>) -> Result<()> {
    if traj.is_empty() {
        Err(Error::Trajectory("empty trajectory".into()))
    } else {
        Ok(())
    }
}

fn slaving_residual(u: &ComplexField, w: &RealField, ratio: f64) -> f64 {
    let phys = u.to_physical();
    let diff: Vec<f64> = w
        .values()
        .iter()
        .zip(phys.values())
        .map(|(w, a)| w - ratio * a.norm_sqr())
        .collect();
    l2_real(&diff, u.grid().dx())
}

/// `max_t ‖v − (β/λ)|u|²‖_{L²}`.
pub fn residual_v(traj: &Trajectory<GBenneyState>, p: &GBenneyParams) -> Result<f64> {
    nonempty(traj)?;
    let r = p.v.ratio();
    Ok(traj
        .states()
        .iter()
        .map(|s| slaving_residual(&s.u, &s.v, r))
        .fold(0.0, f64::max))
}

/// `max_t ‖z − (β'/λ')|u|²‖_{L²}`, or `None` without a `z` channel.
pub fn residual_z(traj: &Trajectory<GBenneyState>, p: &GBenneyParams) -> Result<Option<f64>> {
    nonempty(traj)?;
    let Some(c) = p.z else { return Ok(None) };
    let mut worst = 0.0_f64;
    for s in traj.states() {
        let z =
            s.z.as_ref()
                .ok_or_else(|| Error::param("trajectory has no z channel"))?;
        worst = worst.max(slaving_residual(&s.u, z, c.ratio()));
    }
    Ok(Some(worst))
}

/// Cubic NLS trajectory on the same snapshot ladder as a Benney run.
pub fn nls_reference(
    u0: &ComplexField,
    gamma: f64,
    t_end: f64,
    cfg: &StepConfig,
    save_every: usize,
) -> Result<Trajectory<ComplexField>> {
    evolve_nls(u0, &NlsParams { gamma }, t_end, cfg, save_every)
}

/// Relative tolerance when matching snapshot times of two trajectories.
pub const LADDER_TOLERANCE: f64 = 1e-12;

fn check_ladders<A: HasGrid, B: HasGrid>(a: &Trajectory<A>, b: &Trajectory<B>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Trajectory(format!(
            "snapshot ladders differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    for (j, (ta, tb)) in a.times().iter().zip(b.times()).enumerate() {
        if (ta - tb).abs() > LADDER_TOLERANCE * ta.abs().max(1.0) {
            return Err(Error::Trajectory(format!(
                "snapshot {j} at t = {ta} vs t = {tb}"
            )));
        }
    }
    match (a.states().first(), b.states().first()) {
        (Some(x), Some(y)) if **x.grid() != **y.grid() => Err(Error::GridMismatch),
        _ => Ok(()),
    }
}

/// `max_t ‖u_A(t) − u_B(t)‖_{L²}` without phase alignment.
pub fn u_difference<A, B>(a: &Trajectory<A>, b: &Trajectory<B>) -> Result<f64>
where
    A: HasU + HasGrid,
    B: HasU + HasGrid,
{
    nonempty(a)?;
    check_ladders(a, b)?;
    let mut worst = 0.0_f64;
    for (x, y) in a.states().iter().zip(b.states()) {
        let (x, y) = (x.u().to_physical(), y.u().to_physical());
        let d = x.grid().dx()
            * x.values()
                .iter()
                .zip(y.values())
                .map(|(p, q)| (p - q).norm_sqr())
                .sum::<f64>();
        worst = worst.max(d.sqrt());
    }
    Ok(worst)
}

/// Duhamel residual norms, `max_t` of the L² norm and of the H¹ seminorm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DuhamelResidual {
    pub l2: f64,
    pub h1: f64,
}

/// Residuals `R(t_j)` of `u(t) − S(t)u₀ + iγ ∫₀ᵗ S(t−s) u|u|²(s) ds` at every
/// stored snapshot, with the time integral evaluated by the trapezoidal rule.
///
/// Uses `F_j = E(Δt) F_{j−1} + N̂_j` with `E(τ) = e^{−ik²τ}`, so that
/// `∫ ≈ Δt (F_j − ½E(t_j)N̂_0 − ½N̂_j)`.
fn duhamel_profile<S: HasU>(
    states: &[&S],
    times: &[f64],
    grid: &Arc<Grid>,
    gamma: f64,
) -> Vec<(f64, f64)> {
    let n = grid.n();
    let k = grid.wavenumbers();
    let dt = if times.len() > 1 {
        times[1] - times[0]
    } else {
        0.0
    };
    let step: Vec<Complex64> = k.iter().map(|&k| Complex64::cis(-k * k * dt)).collect();
    let spectral = |f: &ComplexField| f.to_spectral().into_values();
    let nonlinear = |u: &ComplexField| {
        let phys = u.to_physical();
        let values = phys.values().iter().map(|a| a * a.norm_sqr()).collect();
        ComplexField::new(grid.clone(), values, Representation::Physical)
            .expect("same length")
            .to_spectral()
            .into_values()
    };
    let u0_hat = spectral(states[0].u());
    let n0_hat = nonlinear(states[0].u());
    let mut acc = n0_hat.clone();
    let ig = Complex64::new(0.0, gamma);
    let len = grid.length();
    let t0 = times[0];
    let mut out = Vec::with_capacity(states.len());
    for (j, s) in states.iter().enumerate() {
        let u_hat = spectral(s.u());
        let n_hat = if j == 0 {
            n0_hat.clone()
        } else {
            nonlinear(s.u())
        };
        if j > 0 {
            for ((a, e), nj) in acc.iter_mut().zip(&step).zip(&n_hat) {
                *a = e * *a + nj;
            }
        }
        let t = times[j] - t0;
        let (mut l2, mut h1) = (0.0, 0.0);
        for m in 0..n {
            let e_t = Complex64::cis(-k[m] * k[m] * t);
            let integral = if j == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                dt * (acc[m] - 0.5 * e_t * n0_hat[m] - 0.5 * n_hat[m])
            };
            let r = u_hat[m] - e_t * u0_hat[m] + ig * integral;
            let a = r.norm_sqr();
            l2 += a;
            h1 += k[m] * k[m] * a;
        }
        out.push(((len * l2).sqrt(), (len * h1).sqrt()));
    }
    out
}

fn max_pair(profile: &[(f64, f64)]) -> DuhamelResidual {
    profile
        .iter()
        .fold(DuhamelResidual { l2: 0.0, h1: 0.0 }, |acc, &(a, b)| {
            DuhamelResidual {
                l2: acc.l2.max(a),
                h1: acc.h1.max(b),
            }
        })
}

/// Largest relative change of the Duhamel residual accepted when the snapshot
/// cadence is halved.
pub const CADENCE_LIMIT: f64 = 0.1;

/// Duhamel residual with cubic coefficient `gamma`, without the cadence check.
pub fn duhamel_residual_unchecked<S: HasU + HasGrid>(
    traj: &Trajectory<S>,
    gamma: f64,
) -> Result<DuhamelResidual> {
    nonempty(traj)?;
    let states: Vec<&S> = traj.states().iter().collect();
    let grid = traj.states()[0].grid().clone();
    Ok(max_pair(&duhamel_profile(
        &states,
        traj.times(),
        &grid,
        gamma,
    )))
}

/// Duhamel residual, verified against the same quadrature on every other
/// snapshot: at the shared instants the two must agree to within
/// [`CADENCE_LIMIT`] (relative).
pub fn duhamel_residual<S: HasU + HasGrid>(
    traj: &Trajectory<S>,
    gamma: f64,
) -> Result<DuhamelResidual> {
    nonempty(traj)?;
    let grid = traj.states()[0].grid().clone();
    let states: Vec<&S> = traj.states().iter().collect();
    let full = duhamel_profile(&states, traj.times(), &grid, gamma);
    let result = max_pair(&full);
    if traj.len() >= 5 {
        let coarse_states: Vec<&S> = states.iter().step_by(2).copied().collect();
        let coarse_times: Vec<f64> = traj.times().iter().step_by(2).copied().collect();
        let coarse = duhamel_profile(&coarse_states, &coarse_times, &grid, gamma);
        let shared: Vec<(f64, f64)> = full.iter().step_by(2).copied().collect();
        let (a, b) = (max_pair(&shared), max_pair(&coarse));
        for (x, y) in [(a.l2, b.l2), (a.h1, b.h1)] {
            if x > 0.0 {
                let change = (x - y).abs() / x;
                if change > CADENCE_LIMIT {
                    return Err(Error::Cadence {
                        relative_change: change,
                        limit: CADENCE_LIMIT,
                    });
                }
            }
        }
    }
    Ok(result)
}

/// L² Duhamel residual with `γ` from the limit coefficient of `p`.
pub fn duhamel_residual_l2(traj: &Trajectory<GBenneyState>, p: &GBenneyParams) -> Result<f64> {
    Ok(duhamel_residual(traj, limit_coefficient(p).gamma)?.l2)
}

/// H¹-seminorm Duhamel residual with `γ` from the limit coefficient of `p`.
pub fn duhamel_residual_h1(traj: &Trajectory<GBenneyState>, p: &GBenneyParams) -> Result<f64> {
    Ok(duhamel_residual(traj, limit_coefficient(p).gamma)?.h1)
}

/// `max_t ‖(v − (β/λ)|u|²) − T_ε(t)w₀ − (εβ/λ²)[1 − T_ε(t)]|u|²‖_{L²}` with
/// `w₀ = v₀ − (β/λ)|u₀|²` and `T_ε` the free transport group.
pub fn transport_closed_form_gap(
    traj: &Trajectory<GBenneyState>,
    p: &GBenneyParams,
) -> Result<f64> {
    nonempty(traj)?;
    let c = p.v;
    let r = c.ratio();
    let first = &traj.states()[0];
    let g0 = first.u.modulus_squared();
    let w0 = first.v.combine(1.0, &g0, -r)?;
    let coef = p.epsilon * c.beta / (c.lambda * c.lambda);
    let t0 = first.t;
    let mut worst = 0.0_f64;
    for s in traj.states() {
        let t = s.t - t0;
        let g = s.u.modulus_squared();
        let tw0 = transport_shift(&w0, t, c.lambda, p.epsilon)?;
        let tg = transport_shift(&g, t, c.lambda, p.epsilon)?;
        let gap: Vec<f64> = (0..g.values().len())
            .map(|j| {
                let w = s.v.values()[j] - r * g.values()[j];
                w - tw0.values()[j] - coef * (g.values()[j] - tg.values()[j])
            })
            .collect();
        worst = worst.max(l2_real(&gap, s.u.grid().dx()));
    }
    Ok(worst)
}

/// Least-squares line through `(ln ε, ln value)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Minimum number of points for a rate fit.
pub const MIN_FIT_POINTS: usize = 4;

pub fn rate_fit(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < MIN_FIT_POINTS {
        return Err(Error::param(format!(
            "rate fit needs at least {MIN_FIT_POINTS} points, got {}",
            pairs.len()
        )));
    }
    if let Some(&(e, v)) = pairs
        .iter()
        .find(|(e, v)| !(*e > 0.0 && *v > 0.0) || !v.is_finite())
    {
        return Err(Error::param(format!(
            "rate fit needs positive finite values, got ({e}, {v})"
        )));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::param(
            "rate fit needs at least two distinct epsilons",
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
    })
}

/// One row of the wave-convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveRow {
    pub epsilon: f64,
    /// `(analytic, numeric)` or the reason the row could not be built.
    pub values: std::result::Result<(f64, f64), String>,
}

/// Distance between the ε-wave and its NLS limit: grid L² norm of the
/// difference next to the closed form `|A_ε − A₀| σ √(2/σ)`.
pub fn wave_convergence_table(
    spec: &TravelingWaveSpec,
    p: &TransportCoupling,
    epsilons: &[f64],
    grid: &Arc<Grid>,
) -> Vec<WaveRow> {
    epsilons
        .iter()
        .map(|&eps| {
            let row = || -> Result<(f64, f64)> {
                let (u, _) = benney_wave(spec, p, eps, grid, 0.0)?;
                let u0 = nls_wave(spec, p, grid, 0.0)?;
                let diff: Vec<Complex64> = u
                    .values()
                    .iter()
                    .zip(u0.values())
                    .map(|(a, b)| a - b)
                    .collect();
                let diff = ComplexField::new(grid.clone(), diff, Representation::Physical)?;
                let numeric = lq_norm(&diff, 2.0)?;
                let s = spec.sigma();
                let analytic = (benney_amplitude(spec, p, eps)? - nls_amplitude(p)?).abs()
                    * s
                    * (2.0 / s).sqrt();
                Ok((analytic, numeric))
            };
            WaveRow {
                epsilon: eps,
                values: row().map_err(|e| e.to_string()),
            }
        })
        .collect()
}

/// Initial data for one sweep row.
#[derive(Clone, Debug)]
pub enum SweepData {
    /// Traveling wave `u₀ε` at `t = 0`. When `compatible`, `v₀ = (β/λ)|u₀|²`
    /// with `u₀` the ε-independent limit wave (this is exactly the wave's own
    /// `v` partner); otherwise `v₀ = 0`. The NLS reference starts from `u₀`.
    Wave {
        spec: TravelingWaveSpec,
        compatible: bool,
    },
    /// Fixed profile; wave channels slaved to `|u₀|²` when `compatible`,
    /// zero otherwise.
    Profile { u0: ComplexField, compatible: bool },
    /// Zakharov data `n₀ = −|u₀|²`, `v₀ = 0`; the model is replaced by the
    /// reduced Zakharov instance for each ε.
    Zakharov { u0: ComplexField },
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub grid: Arc<Grid>,
    /// Coefficient template; `epsilon` is overwritten per row.
    pub model: GBenneyParams,
    pub epsilons: Vec<f64>,
    pub t_end: f64,
    pub step: StepConfig,
    pub save_every: usize,
    pub data: SweepData,
    /// If set to `c`, the v-channel forcing follows `β(ε) = c ε³ λ²`.
    pub beta_scale: Option<f64>,
}

/// Measurements for one ε.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepMetrics {
    pub residual_v: f64,
    pub residual_z: Option<f64>,
    pub u_diff: f64,
    pub duhamel_l2: f64,
    pub duhamel_h1: f64,
    pub mass_drift: f64,
    /// `max_t |E(t) − E(0)| / max(|E(0)|, ∫|∂ₓu₀|²)`.
    pub energy_drift: f64,
    pub boundary_mass: f64,
    pub sup_u: f64,
    pub closed_form_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub outcome: std::result::Result<SweepMetrics, String>,
}

impl SweepRow {
    pub fn metrics(&self) -> Option<&SweepMetrics> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// Sorted by descending ε.
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

/// Metric names accepted by [`SweepResult::column`].
pub const SWEEP_COLUMNS: [&str; 9] = [
    "epsilon",
    "residual_v",
    "residual_z",
    "u_diff",
    "duhamel_l2",
    "duhamel_h1",
    "mass_drift",
    "energy_drift",
    "boundary_mass",
];

impl SweepMetrics {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "residual_v" => Some(self.residual_v),
            "residual_z" => self.residual_z,
            "u_diff" => Some(self.u_diff),
            "duhamel_l2" => Some(self.duhamel_l2),
            "duhamel_h1" => Some(self.duhamel_h1),
            "mass_drift" => Some(self.mass_drift),
            "energy_drift" => Some(self.energy_drift),
            "boundary_mass" => Some(self.boundary_mass),
            "sup_u" => Some(self.sup_u),
            "closed_form_gap" => Some(self.closed_form_gap),
            _ => None,
        }
    }
}

impl SweepResult {
    /// `(ε, value)` pairs of one metric over the successful rows.
    pub fn column(&self, name: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| {
                r.metrics()
                    .and_then(|m| m.get(name))
                    .map(|v| (r.epsilon, v))
            })
            .collect()
    }

    pub fn fit(&self, name: &str) -> Result<RateFit> {
        rate_fit(&self.column(name))
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.len() < MIN_FIT_POINTS {
            return Err(Error::param(format!(
                "an epsilon sweep needs at least {MIN_FIT_POINTS} values"
            )));
        }
        for &e in &self.epsilons {
            crate::models::check_epsilon(e)?;
        }
        self.step.validate()?;
        crate::integrators::step_count(self.t_end, self.step.h, self.save_every)?;
        Ok(())
    }

    /// Model for one ε, with `β(ε)` applied when `beta_scale` is set.
    pub fn params_for(&self, eps: f64) -> Result<GBenneyParams> {
        let mut p = match self.data {
            SweepData::Zakharov { .. } => zakharov_instance(eps)?,
            _ => self.model.with_epsilon(eps)?,
        };
        if let Some(c) = self.beta_scale {
            p.v.beta = c * eps.powi(3) * p.v.lambda * p.v.lambda;
            p.validate()?;
        }
        Ok(p)
    }

    /// Initial state and NLS reference datum for one ε.
    pub fn initial(&self, p: &GBenneyParams) -> Result<(GBenneyState, ComplexField)> {
        let grid = &self.grid;
        let slaved = |u0: &ComplexField, c: &TransportCoupling| compatible_v(u0, c);
        match &self.data {
            SweepData::Wave { spec, compatible } => {
                if p.has_z() {
                    return Err(Error::param("wave data needs a two-field model"));
                }
                let (u0, _) = benney_wave(spec, &p.v, p.epsilon, grid, 0.0)?;
                let reference = nls_wave(spec, &p.v, grid, 0.0)?;
                let v0 = if *compatible {
                    slaved(&reference, &p.v)?
                } else {
                    RealField::zeros(grid.clone())
                };
                Ok((GBenneyState::new(0.0, u0, v0, None)?, reference))
            }
            SweepData::Profile { u0, compatible } => {
                let (v0, z0) = if *compatible {
                    (slaved(u0, &p.v)?, p.z.map(|c| slaved(u0, &c)).transpose()?)
                } else {
                    (
                        RealField::zeros(grid.clone()),
                        p.z.map(|_| RealField::zeros(grid.clone())),
                    )
                };
                Ok((GBenneyState::new(0.0, u0.clone(), v0, z0)?, u0.clone()))
            }
            SweepData::Zakharov { u0 } => {
                let n0 = u0.modulus_squared().scaled(-1.0);
                let data = crate::initial_data::ZakharovData {
                    n0,
                    velocity: crate::initial_data::ZakharovVelocity::V0(RealField::zeros(
                        grid.clone(),
                    )),
                    epsilon: p.epsilon,
                };
                Ok((
                    crate::initial_data::zakharov_initial(u0, &data)?,
                    u0.clone(),
                ))
            }
        }
    }

    fn run_row(&self, eps: f64) -> Result<SweepMetrics> {
        let p = self.params_for(eps)?;
        let (state, reference) = self.initial(&p)?;
        let traj = evolve_gbenney(&state, &p, self.t_end, &self.step, self.save_every)?;
        let gamma = limit_coefficient(&p).gamma;
        let nls = nls_reference(&reference, gamma, self.t_end, &self.step, self.save_every)?;
        let duhamel = duhamel_residual(&traj, gamma)?;

        let m0 = mass(&state.u);
        let e0 = energy_g(&state, &p)?;
        let e_scale = energy_scale(e0, &state.u);
        let (mut mass_drift, mut energy_drift, mut boundary, mut sup_u) =
            (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for s in traj.states() {
            mass_drift = mass_drift.max(relative(mass(&s.u), m0));
            energy_drift = energy_drift.max((energy_g(s, &p)? - e0).abs() / e_scale);
            boundary = boundary.max(boundary_mass_fraction(&s.u));
            sup_u = sup_u.max(lq_norm(&s.u, f64::INFINITY)?);
        }
        Ok(SweepMetrics {
            residual_v: residual_v(&traj, &p)?,
            residual_z: residual_z(&traj, &p)?,
            u_diff: u_difference(&traj, &nls)?,
            duhamel_l2: duhamel.l2,
            duhamel_h1: duhamel.h1,
            mass_drift,
            energy_drift,
            boundary_mass: boundary,
            sup_u,
            closed_form_gap: transport_closed_form_gap(&traj, &p)?,
        })
    }
}

/// Denominator of relative energy drifts: `max(|E₀|, ∫|∂ₓu₀|²)`, which stays
/// meaningful for data whose energy is close to zero.
fn energy_scale(e0: f64, u0: &ComplexField) -> f64 {
    let s = e0.abs().max(mass(&crate::spectral::derivative_complex(u0)));
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Largest relative drifts of mass and energy along a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drift {
    pub mass: f64,
    pub energy: f64,
}

/// Drift of a generalized Benney run to `t_end`, sampled every step.
pub fn conservation_drift(
    initial: &GBenneyState,
    p: &GBenneyParams,
    t_end: f64,
    cfg: &StepConfig,
) -> Result<Drift> {
    let m0 = mass(&initial.u);
    let e0 = energy_g(initial, p)?;
    let scale = energy_scale(e0, &initial.u);
    let mut d = Drift {
        mass: 0.0,
        energy: 0.0,
    };
    crate::integrators::evolve_gbenney_with(initial, p, t_end, cfg, 1, |s| {
        d.mass = d.mass.max(relative(mass(&s.u), m0));
        d.energy = d.energy.max((energy_g(s, p)? - e0).abs() / scale);
        Ok(())
    })?;
    Ok(d)
}

/// Drift of a cubic NLS run to `t_end`, sampled every step.
pub fn nls_conservation_drift(
    u0: &ComplexField,
    nls: &NlsParams,
    t_end: f64,
    cfg: &StepConfig,
) -> Result<Drift> {
    let m0 = mass(u0);
    let e0 = energy_nls(u0, nls.gamma);
    let scale = energy_scale(e0, u0);
    let mut d = Drift {
        mass: 0.0,
        energy: 0.0,
    };
    crate::integrators::evolve_nls_with(u0, nls, t_end, cfg, 1, |_, u| {
        d.mass = d.mass.max(relative(mass(u), m0));
        d.energy = d.energy.max((energy_nls(u, nls.gamma) - e0).abs() / scale);
        Ok(())
    })?;
    Ok(d)
}

fn relative(x: f64, x0: f64) -> f64 {
    if x0 == 0.0 {
        (x - x0).abs()
    } else {
        ((x - x0) / x0).abs()
    }
}

/// Run every ε of `cfg` (in parallel) and collect one row per ε, sorted by
/// descending ε. A failed run is recorded in its row and does not affect the
/// others.
pub fn epsilon_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut epsilons = cfg.epsilons.clone();
    epsilons.sort_by(|a, b| b.total_cmp(a));
    let rows: Vec<SweepRow> = epsilons
        .par_iter()
        .map(|&eps| SweepRow {
            epsilon: eps,
            outcome: cfg.run_row(eps).map_err(|e| e.to_string()),
        })
        .collect();
    let mut warnings = Vec::new();
    for row in &rows {
        match &row.outcome {
            Ok(m) if m.boundary_mass > BOUNDARY_MASS_LIMIT => warnings.push(format!(
                "epsilon {}: boundary mass fraction {:e} exceeds {:e}",
                row.epsilon, m.boundary_mass, BOUNDARY_MASS_LIMIT
            )),
            Err(e) => warnings.push(format!("epsilon {}: run failed: {e}", row.epsilon)),
            _ => {}
        }
    }
    Ok(SweepResult { rows, warnings })
}
