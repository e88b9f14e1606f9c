//! Splitting integrators for the generalized Benney family and the cubic NLS.
//!
//! Each transport channel is advanced by an exponential step that solves the
//! per-mode equation `v̂' = −iμ v̂ + i(kβ/ε) ĝ`, `μ = kλ/ε`, exactly for frozen
//! forcing `ĝ = DFT(|u|²)`. The step is stable for any `h` and any `ε`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{check_epsilon, GBenneyParams, GBenneyState, NlsParams, TransportCoupling};
use crate::norms::Trajectory;
use crate::spectral::{ensure_same_grid, ComplexField, Grid, RealField, Representation};

/// Order of the substeps inside one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubstepOrder {
    /// kick(h/2), transport(h/2), S(h), transport(h/2), kick(h/2). Second order.
    #[default]
    Symmetric,
    /// kick(h/2), transport(h), S(h), kick(h/2), with the transport forced
    /// by the start-of-step `|u|²`. First order.
    Lagged,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig {
    pub h: f64,
    pub dealias: bool,
    pub order: SubstepOrder,
}

impl StepConfig {
    pub fn new(h: f64) -> Result<Self> {
        let cfg = StepConfig {
            h,
            dealias: true,
            order: SubstepOrder::Symmetric,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        let cfg = StepConfig { h, ..*self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h > 0.0 && self.h.is_finite() {
            Ok(())
        } else {
            Err(Error::param(format!(
                "time step must be positive, got {}",
                self.h
            )))
        }
    }
}

/// Precomputed exponential-transport multipliers for one channel and one
/// substep length.
struct TransportKernel {
    decay: Vec<Complex64>,
    gain: Vec<Complex64>,
}

impl TransportKernel {
    fn new(grid: &Grid, coupling: &TransportCoupling, dt: f64, epsilon: f64) -> Self {
        let ratio = coupling.ratio();
        let speed = coupling.lambda / epsilon;
        let mut decay = Vec::with_capacity(grid.n());
        let mut gain = Vec::with_capacity(grid.n());
        for &k in grid.wavenumbers() {
            let e = Complex64::cis(-k * speed * dt);
            decay.push(e);
            gain.push(ratio * (Complex64::new(1.0, 0.0) - e));
        }
        TransportKernel { decay, gain }
    }

    fn apply(&self, grid: &Grid, v: &mut [f64], g_hat: &[Complex64], buf: &mut Vec<Complex64>) {
        grid.forward_real(v, buf);
        for ((c, (d, w)), g) in buf
            .iter_mut()
            .zip(self.decay.iter().zip(&self.gain))
            .zip(g_hat)
        {
            *c = d * *c + w * g;
        }
        grid.inverse_real(buf, v);
    }
}

fn check_transport(lambda: f64, epsilon: f64) -> Result<()> {
    if lambda == 0.0 {
        return Err(Error::param("transport speed must be nonzero"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::param(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Exponential transport step with frozen forcing `g`:
/// `v̂_m ← e^{−iμh} v̂_m + (β/λ)(1 − e^{−iμh}) ĝ_m`, `μ = k_m λ/ε`.
pub fn etd_transport_step(
    v: &RealField,
    g: &RealField,
    h: f64,
    lambda: f64,
    beta: f64,
    epsilon: f64,
) -> Result<RealField> {
    check_transport(lambda, epsilon)?;
    ensure_same_grid(v.grid(), g.grid())?;
    let grid = v.grid().clone();
    let kernel = TransportKernel::new(
        &grid,
        &TransportCoupling::new(0.0, lambda, beta),
        h,
        epsilon,
    );
    let g_hat = g.to_spectral().into_values();
    let mut out = v.values().to_vec();
    let mut buf = Vec::with_capacity(grid.n());
    kernel.apply(&grid, &mut out, &g_hat, &mut buf);
    Ok(RealField::from_vec_unchecked(grid, out))
}

fn schrodinger_multiplier(grid: &Grid, h: f64) -> Vec<Complex64> {
    grid.wavenumbers()
        .iter()
        .map(|&k| Complex64::cis(-k * k * h))
        .collect()
}

fn apply_linear(grid: &Grid, lin: &[Complex64], u: &mut [Complex64]) {
    grid.forward_in_place(u);
    for (c, m) in u.iter_mut().zip(lin) {
        *c *= m;
    }
    grid.inverse_in_place(u);
}

fn kick(u: &mut [Complex64], potential: &[f64], dt: f64) {
    for (a, &p) in u.iter_mut().zip(potential) {
        *a *= Complex64::cis(-dt * p);
    }
}

fn all_finite_c(u: &[Complex64]) -> bool {
    u.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn nonfinite(step: usize, substep: &'static str) -> Error {
    Error::NonFinite { step, substep }
}

/// Scratch space for the density `|u|²` and its transforms.
struct Density {
    dealias: bool,
    g: Vec<f64>,
    g_hat: Vec<Complex64>,
    projected: Vec<f64>,
    buf: Vec<Complex64>,
}

impl Density {
    fn new(n: usize, dealias: bool) -> Self {
        Density {
            dealias,
            g: vec![0.0; n],
            g_hat: Vec::with_capacity(n),
            projected: vec![0.0; n],
            buf: Vec::with_capacity(n),
        }
    }

    /// Refresh `ĝ` (projected when dealiasing) and, if asked, its physical image.
    fn update(&mut self, grid: &Grid, u: &[Complex64], physical: bool) {
        for (g, a) in self.g.iter_mut().zip(u) {
            *g = a.norm_sqr();
        }
        grid.forward_real(&self.g, &mut self.g_hat);
        if self.dealias {
            grid.dealias_in_place(&mut self.g_hat);
        }
        if physical {
            if self.dealias {
                self.buf.clear();
                self.buf.extend_from_slice(&self.g_hat);
                grid.inverse_real(&mut self.buf, &mut self.projected);
            } else {
                self.projected.copy_from_slice(&self.g);
            }
        }
    }
}

/// Reusable stepping machinery for one parameter set and step size.
struct GBenneyStepper {
    grid: Arc<Grid>,
    tau: f64,
    v: TransportCoupling,
    z: Option<TransportCoupling>,
    h: f64,
    order: SubstepOrder,
    lin: Vec<Complex64>,
    v_kernel: TransportKernel,
    z_kernel: Option<TransportKernel>,
    density: Density,
    potential: Vec<f64>,
    buf: Vec<Complex64>,
}

impl GBenneyStepper {
    fn new(grid: Arc<Grid>, p: &GBenneyParams, cfg: &StepConfig) -> Result<Self> {
        p.validate()?;
        cfg.validate()?;
        let transport_dt = match cfg.order {
            SubstepOrder::Symmetric => 0.5 * cfg.h,
            SubstepOrder::Lagged => cfg.h,
        };
        let n = grid.n();
        Ok(GBenneyStepper {
            lin: schrodinger_multiplier(&grid, cfg.h),
            v_kernel: TransportKernel::new(&grid, &p.v, transport_dt, p.epsilon),
            z_kernel: p
                .z
                .map(|z| TransportKernel::new(&grid, &z, transport_dt, p.epsilon)),
            density: Density::new(n, cfg.dealias),
            potential: vec![0.0; n],
            buf: Vec::with_capacity(n),
            tau: p.tau,
            v: p.v,
            z: p.z,
            h: cfg.h,
            order: cfg.order,
            grid,
        })
    }

    fn build_potential(&mut self, v: &[f64], z: Option<&[f64]>) {
        let a = self.v.alpha;
        for (p, x) in self.potential.iter_mut().zip(v) {
            *p = a * x;
        }
        if let (Some(z), Some(c)) = (z, &self.z) {
            for (p, x) in self.potential.iter_mut().zip(z) {
                *p += c.alpha * x;
            }
        }
        if self.tau != 0.0 {
            for (p, g) in self.potential.iter_mut().zip(&self.density.projected) {
                *p += self.tau * g;
            }
        }
    }

    fn transport(&mut self, v: &mut [f64], z: Option<&mut [f64]>, step: usize) -> Result<()> {
        self.v_kernel
            .apply(&self.grid, v, &self.density.g_hat, &mut self.buf);
        if !all_finite(v) {
            return Err(nonfinite(step, "transport v"));
        }
        if let (Some(z), Some(kernel)) = (z, &self.z_kernel) {
            kernel.apply(&self.grid, z, &self.density.g_hat, &mut self.buf);
            if !all_finite(z) {
                return Err(nonfinite(step, "transport z"));
            }
        }
        Ok(())
    }

    fn half_kick(
        &mut self,
        u: &mut [Complex64],
        v: &[f64],
        z: Option<&[f64]>,
        step: usize,
    ) -> Result<()> {
        self.build_potential(v, z);
        kick(u, &self.potential, 0.5 * self.h);
        if all_finite_c(u) {
            Ok(())
        } else {
            Err(nonfinite(step, "phase"))
        }
    }

    fn step(
        &mut self,
        u: &mut [Complex64],
        v: &mut [f64],
        mut z: Option<&mut [f64]>,
        step: usize,
    ) -> Result<()> {
        let need_physical = self.tau != 0.0;
        self.density.update(&self.grid, u, need_physical);
        self.half_kick(u, v, z.as_deref(), step)?;
        // |u| is unchanged by the kick, so the density above is still current
        self.transport(v, z.as_deref_mut(), step)?;
        apply_linear(&self.grid, &self.lin, u);
        if !all_finite_c(u) {
            return Err(nonfinite(step, "linear"));
        }
        match self.order {
            SubstepOrder::Symmetric => {
                self.density.update(&self.grid, u, need_physical);
                self.transport(v, z.as_deref_mut(), step)?;
            }
            SubstepOrder::Lagged => {
                if need_physical {
                    self.density.update(&self.grid, u, true);
                }
            }
        }
        self.half_kick(u, v, z.as_deref(), step)
    }
}

/// Advance a generalized Benney state by one step of size `cfg.h`.
pub fn gbenney_step(
    state: &GBenneyState,
    p: &GBenneyParams,
    cfg: &StepConfig,
) -> Result<GBenneyState> {
    state.check_channels(p)?;
    let mut stepper = GBenneyStepper::new(state.u.grid().clone(), p, cfg)?;
    let mut next = state.clone();
    advance(&mut stepper, &mut next, 0)?;
    Ok(next)
}

fn advance(stepper: &mut GBenneyStepper, state: &mut GBenneyState, step: usize) -> Result<()> {
    stepper.step(
        state.u.values_mut(),
        state.v.values_mut(),
        state.z.as_mut().map(|z| z.values_mut()),
        step,
    )?;
    state.t += stepper.h;
    Ok(())
}

/// Two-field Benney step (`τ = 0`, no `z` channel).
pub fn benney_step(
    u: &ComplexField,
    v: &RealField,
    coupling: &TransportCoupling,
    epsilon: f64,
    cfg: &StepConfig,
) -> Result<(ComplexField, RealField)> {
    check_epsilon(epsilon)?;
    check_transport(coupling.lambda, epsilon)?;
    cfg.validate()?;
    ensure_same_grid(u.grid(), v.grid())?;
    let grid = u.grid().clone();
    let n = grid.n();
    let transport_dt = match cfg.order {
        SubstepOrder::Symmetric => 0.5 * cfg.h,
        SubstepOrder::Lagged => cfg.h,
    };
    let kernel = TransportKernel::new(&grid, coupling, transport_dt, epsilon);
    let lin = schrodinger_multiplier(&grid, cfg.h);
    let mut density = Density::new(n, cfg.dealias);
    let mut buf = Vec::with_capacity(n);
    let mut uu = u.to_physical().into_values();
    let mut vv = v.values().to_vec();
    let mut potential = vec![0.0; n];
    let mut kick_v = |uu: &mut [Complex64], vv: &[f64]| {
        for (p, x) in potential.iter_mut().zip(vv) {
            *p = coupling.alpha * x;
        }
        kick(uu, &potential, 0.5 * cfg.h);
    };

    density.update(&grid, &uu, false);
    kick_v(&mut uu, &vv);
    kernel.apply(&grid, &mut vv, &density.g_hat, &mut buf);
    apply_linear(&grid, &lin, &mut uu);
    if cfg.order == SubstepOrder::Symmetric {
        density.update(&grid, &uu, false);
        kernel.apply(&grid, &mut vv, &density.g_hat, &mut buf);
    }
    kick_v(&mut uu, &vv);
    if !all_finite_c(&uu) || !all_finite(&vv) {
        return Err(nonfinite(0, "benney step"));
    }
    Ok((
        ComplexField::new(grid.clone(), uu, Representation::Physical)?,
        RealField::from_vec_unchecked(grid, vv),
    ))
}

struct NlsStepper {
    grid: Arc<Grid>,
    gamma: f64,
    h: f64,
    lin: Vec<Complex64>,
    density: Density,
    potential: Vec<f64>,
}

impl NlsStepper {
    fn new(grid: Arc<Grid>, gamma: f64, cfg: &StepConfig) -> Result<Self> {
        cfg.validate()?;
        if !gamma.is_finite() {
            return Err(Error::param("cubic coefficient must be finite"));
        }
        let n = grid.n();
        Ok(NlsStepper {
            lin: schrodinger_multiplier(&grid, cfg.h),
            density: Density::new(n, cfg.dealias),
            potential: vec![0.0; n],
            gamma,
            h: cfg.h,
            grid,
        })
    }

    fn half_kick(&mut self, u: &mut [Complex64]) {
        self.density.update(&self.grid, u, true);
        for (p, g) in self.potential.iter_mut().zip(&self.density.projected) {
            *p = self.gamma * g;
        }
        kick(u, &self.potential, 0.5 * self.h);
    }

    fn step(&mut self, u: &mut [Complex64], step: usize) -> Result<()> {
        if self.gamma != 0.0 {
            self.half_kick(u);
        }
        apply_linear(&self.grid, &self.lin, u);
        if self.gamma != 0.0 {
            self.half_kick(u);
        }
        if all_finite_c(u) {
            Ok(())
        } else {
            Err(nonfinite(step, "nls"))
        }
    }
}

/// One Strang step of `i u_t + u_xx = γ|u|²u`.
pub fn nls_step(u: &ComplexField, gamma: f64, cfg: &StepConfig) -> Result<ComplexField> {
    let mut stepper = NlsStepper::new(u.grid().clone(), gamma, cfg)?;
    let mut values = u.to_physical().into_values();
    stepper.step(&mut values, 0)?;
    ComplexField::new(u.grid().clone(), values, Representation::Physical)
}

/// Tolerance on `T/h` being an integer.
pub const STEP_COUNT_TOLERANCE: f64 = 1e-9;

/// Number of steps of size `h` in `[0, t_end]`, checked against `save_every`.
pub fn step_count(t_end: f64, h: f64, save_every: usize) -> Result<usize> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::param(format!(
            "final time must be positive, got {t_end}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::param(format!("time step must be positive, got {h}")));
    }
    if save_every == 0 {
        return Err(Error::param("save_every must be at least 1"));
    }
    let ratio = t_end / h;
    let steps = ratio.round();
    if (ratio - steps).abs() > STEP_COUNT_TOLERANCE || steps < 1.0 {
        return Err(Error::param(format!(
            "final time {t_end} is not an integer multiple of the step {h}"
        )));
    }
    let steps = steps as usize;
    if !steps.is_multiple_of(save_every) {
        return Err(Error::param(format!(
            "save_every {save_every} does not divide the step count {steps}"
        )));
    }
    Ok(steps)
}

/// Integrate a generalized Benney state to `t_end`, keeping every
/// `save_every`-th state (including the first and the last).
pub fn evolve_gbenney(
    initial: &GBenneyState,
    p: &GBenneyParams,
    t_end: f64,
    cfg: &StepConfig,
    save_every: usize,
) -> Result<Trajectory<GBenneyState>> {
    let (mut times, mut states) = (Vec::new(), Vec::new());
    evolve_gbenney_with(initial, p, t_end, cfg, save_every, |s| {
        times.push(s.t);
        states.push(s.clone());
        Ok(())
    })?;
    Trajectory::new(times, states)
}

/// As [`evolve_gbenney`], handing each saved state to `observe` instead of
/// storing it.
pub fn evolve_gbenney_with(
    initial: &GBenneyState,
    p: &GBenneyParams,
    t_end: f64,
    cfg: &StepConfig,
    save_every: usize,
    mut observe: impl FnMut(&GBenneyState) -> Result<()>,
) -> Result<()> {
    initial.check_channels(p)?;
    let steps = step_count(t_end, cfg.h, save_every)?;
    let mut stepper = GBenneyStepper::new(initial.u.grid().clone(), p, cfg)?;
    let t0 = initial.t;
    let mut state = initial.clone();
    state.u = state.u.to_physical();
    observe(&state)?;
    for j in 1..=steps {
        advance(&mut stepper, &mut state, j)?;
        state.t = t0 + j as f64 * cfg.h;
        if j % save_every == 0 {
            observe(&state)?;
        }
    }
    Ok(())
}

/// Integrate the cubic NLS from `u0` to `t_end`.
pub fn evolve_nls(
    u0: &ComplexField,
    nls: &NlsParams,
    t_end: f64,
    cfg: &StepConfig,
    save_every: usize,
) -> Result<Trajectory<ComplexField>> {
    let (mut times, mut states) = (Vec::new(), Vec::new());
    evolve_nls_with(u0, nls, t_end, cfg, save_every, |t, u| {
        times.push(t);
        states.push(u.clone());
        Ok(())
    })?;
    Trajectory::new(times, states)
}

/// As [`evolve_nls`], handing each saved `(t, u)` to `observe`.
pub fn evolve_nls_with(
    u0: &ComplexField,
    nls: &NlsParams,
    t_end: f64,
    cfg: &StepConfig,
    save_every: usize,
    mut observe: impl FnMut(f64, &ComplexField) -> Result<()>,
) -> Result<()> {
    let steps = step_count(t_end, cfg.h, save_every)?;
    let grid = u0.grid().clone();
    let mut stepper = NlsStepper::new(grid.clone(), nls.gamma, cfg)?;
    let mut values = u0.to_physical().into_values();
    observe(0.0, &u0.to_physical())?;
    for j in 1..=steps {
        stepper.step(&mut values, j)?;
        if j % save_every == 0 {
            let u = ComplexField::new(grid.clone(), values.clone(), Representation::Physical)?;
            observe(j as f64 * cfg.h, &u)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{mass, zakharov_instance};
    use crate::norms::lq_norm;
    use crate::spectral::{make_grid, schrodinger_step, transport_shift};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn max_diff_c(a: &ComplexField, b: &ComplexField) -> f64 {
        let (a, b) = (a.to_physical(), b.to_physical());
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn max_diff(a: &RealField, b: &RealField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn smooth_state(grid: &Arc<Grid>, with_z: bool) -> GBenneyState {
        let u = ComplexField::from_fn(grid.clone(), |x| {
            Complex64::from_polar(1.0 / x.cosh(), 0.3 * x)
        });
        let v = RealField::from_fn(grid.clone(), |x| 0.5 * (-(x - 1.0).powi(2)).exp());
        let z = with_z.then(|| RealField::from_fn(grid.clone(), |x| -0.4 / (x + 0.5).cosh()));
        GBenneyState::new(0.0, u, v, z).unwrap()
    }

    #[test]
    fn etd_without_forcing_is_a_shift() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let v = RealField::from_fn(g.clone(), |x| x.sin() + 0.3 * (2.0 * x).cos());
        let zero = RealField::zeros(g.clone());
        let a = etd_transport_step(&v, &zero, 0.13, 1.7, 0.4, 0.3).unwrap();
        let b = transport_shift(&v, 0.13, 1.7, 0.3).unwrap();
        assert!(max_diff(&a, &b) < 1e-13);
        assert!(etd_transport_step(&v, &zero, 0.1, 0.0, 1.0, 0.5).is_err());
        assert!(etd_transport_step(&v, &zero, 0.1, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn etd_full_oscillation_returns_to_zero() {
        // μh = 2π for the m = 1 mode: k = 1, λ/ε = 2π/h
        let g = make_grid(16, 2.0 * PI).unwrap();
        let (h, eps) = (0.5, 0.25);
        let lambda = 2.0 * PI * eps / h;
        let zero = RealField::zeros(g.clone());
        let forcing = RealField::from_fn(g.clone(), f64::cos);
        let out = etd_transport_step(&zero, &forcing, h, lambda, 1.3, eps).unwrap();
        assert!(out.values().iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn etd_matches_rk4_per_mode() {
        let g = make_grid(32, 10.0).unwrap();
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..5 {
            let m = rng.gen_range(1..10usize);
            let k = g.wavenumbers()[m];
            let (lambda, beta) = (rng.gen_range(0.5..2.0), rng.gen_range(-2.0..2.0));
            let eps = rng.gen_range(0.05..0.9);
            let h = rng.gen_range(0.01..0.3);
            let v0 = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let gh = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            // build real fields carrying exactly this mode
            let mode_field = |c: Complex64| {
                let mut coeffs = vec![Complex64::new(0.0, 0.0); 32];
                coeffs[m] = c;
                coeffs[32 - m] = c.conj();
                let spec = ComplexField::new(g.clone(), coeffs, Representation::Spectral).unwrap();
                let phys = spec.to_physical();
                RealField::new(g.clone(), phys.values().iter().map(|z| z.re).collect()).unwrap()
            };
            let out = etd_transport_step(&mode_field(v0), &mode_field(gh), h, lambda, beta, eps)
                .unwrap()
                .to_spectral();

            let mu = k * lambda / eps;
            let rhs = |v: Complex64| {
                Complex64::new(0.0, -mu) * v + Complex64::new(0.0, k * beta / eps) * gh
            };
            let steps = 1000;
            let dt = h / steps as f64;
            let mut y = v0;
            for _ in 0..steps {
                let k1 = rhs(y);
                let k2 = rhs(y + 0.5 * dt * k1);
                let k3 = rhs(y + 0.5 * dt * k2);
                let k4 = rhs(y + dt * k3);
                y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            assert!((out.values()[m] - y).norm() < 1e-8, "mode {m}");
        }
    }

    #[test]
    fn etd_is_bounded_for_stiff_epsilon() {
        let g = make_grid(128, 20.0).unwrap();
        let v = RealField::from_fn(g.clone(), |x| (-x * x).exp());
        let gf = RealField::from_fn(g.clone(), |x| 1.0 / x.cosh().powi(2));
        let (lambda, beta) = (1.5_f64, -0.7_f64);
        let bound =
            lq_norm(&v, 2.0).unwrap() + (beta / lambda).abs() * 2.0 * lq_norm(&gf, 2.0).unwrap();
        for eps in [0.5, 1e-2, 1e-4, 1e-6] {
            for h in [1e-3, 0.1, 1.0, 10.0] {
                let out = etd_transport_step(&v, &gf, h, lambda, beta, eps).unwrap();
                assert!(lq_norm(&out, 2.0).unwrap() <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = make_grid(32, 8.0).unwrap();
        let p = zakharov_instance(0.2).unwrap();
        let s = GBenneyState::zeros(g, true);
        let traj = evolve_gbenney(&s, &p, 0.5, &StepConfig::new(0.05).unwrap(), 5).unwrap();
        for st in traj.states() {
            assert!(st.u.values().iter().all(|z| z.norm() == 0.0));
            assert!(st.v.values().iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn free_wave_channel_is_pure_transport() {
        let g = make_grid(64, 12.0).unwrap();
        let p = GBenneyParams::benney(1.0, 1.3, -1.0, 0.1).unwrap();
        let v0 = RealField::from_fn(g.clone(), |x| (-(x * x)).exp());
        let s = GBenneyState::new(0.0, ComplexField::zeros(g.clone()), v0.clone(), None).unwrap();
        let cfg = StepConfig::new(0.01).unwrap();
        let traj = evolve_gbenney(&s, &p, 0.2, &cfg, 20).unwrap();
        let last = traj.states().last().unwrap();
        assert!(last.u.values().iter().all(|z| z.norm() == 0.0));
        let exact = transport_shift(&v0, 0.2, 1.3, 0.1).unwrap();
        assert!(max_diff(&last.v, &exact) < 1e-12);
        let (a, b) = (lq_norm(&last.v, 2.0).unwrap(), lq_norm(&v0, 2.0).unwrap());
        assert!((a - b).abs() < 1e-12 * b);
    }

    #[test]
    fn mass_and_mean_are_preserved() {
        let g = make_grid(128, 30.0).unwrap();
        let p = zakharov_instance(0.3).unwrap();
        let s = smooth_state(&g, true);
        let traj = evolve_gbenney(&s, &p, 1.0, &StepConfig::new(0.01).unwrap(), 100).unwrap();
        let last = traj.states().last().unwrap();
        let m0 = mass(&s.u);
        assert!((mass(&last.u) - m0).abs() <= 1e-12 * m0);
        assert!((last.v.mean() - s.v.mean()).abs() < 1e-13);
        assert!((last.z.as_ref().unwrap().mean() - s.z.as_ref().unwrap().mean()).abs() < 1e-13);
    }

    #[test]
    fn evolve_snapshot_cadence_and_errors() {
        let g = make_grid(32, 10.0).unwrap();
        let p = GBenneyParams::benney(1.0, 1.0, -1.0, 0.5).unwrap();
        let s = smooth_state(&g, false);
        let h = 0.01;
        let cfg = StepConfig::new(h).unwrap();
        let traj = evolve_gbenney(&s, &p, 10.0 * h, &cfg, 5).unwrap();
        assert_eq!(traj.times(), &[0.0, 5.0 * h, 10.0 * h]);
        assert!(evolve_gbenney(&s, &p, 10.5 * h, &cfg, 1).is_err());
        assert!(evolve_gbenney(&s, &p, 10.0 * h, &cfg, 3).is_err());
        assert!(evolve_gbenney(&s, &p, 10.0 * h, &cfg, 0).is_err());
        let with_z = smooth_state(&g, true);
        assert!(evolve_gbenney(&with_z, &p, 10.0 * h, &cfg, 1).is_err());
    }

    #[test]
    fn evolve_is_deterministic() {
        let g = make_grid(64, 16.0).unwrap();
        let p = zakharov_instance(0.25).unwrap();
        let s = smooth_state(&g, true);
        let cfg = StepConfig::new(0.02).unwrap();
        let a = evolve_gbenney(&s, &p, 0.4, &cfg, 4).unwrap();
        let b = evolve_gbenney(&s, &p, 0.4, &cfg, 4).unwrap();
        for (x, y) in a.states().iter().zip(b.states()) {
            assert_eq!(x.u.values(), y.u.values());
            assert_eq!(x.v.values(), y.v.values());
        }
    }

    #[test]
    fn nonfinite_input_reports_step() {
        let g = make_grid(16, 4.0).unwrap();
        let p = GBenneyParams::benney(1.0, 1.0, -1.0, 0.5).unwrap();
        let mut s = smooth_state(&g, false);
        s.u.values_mut()[3] = Complex64::new(f64::NAN, 0.0);
        let err = evolve_gbenney(&s, &p, 0.1, &StepConfig::new(0.05).unwrap(), 1).unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 1, .. }), "{err}");
    }

    #[test]
    fn benney_step_matches_general_step_bitwise() {
        let g = make_grid(64, 16.0).unwrap();
        let p = GBenneyParams::benney(0.8, 1.2, -0.6, 0.3).unwrap();
        let s = smooth_state(&g, false);
        for order in [SubstepOrder::Symmetric, SubstepOrder::Lagged] {
            for dealias in [true, false] {
                let cfg = StepConfig {
                    h: 0.03,
                    dealias,
                    order,
                };
                let general = gbenney_step(&s, &p, &cfg).unwrap();
                let (u, v) = benney_step(&s.u, &s.v, &p.v, p.epsilon, &cfg).unwrap();
                assert_eq!(general.u.values(), u.values());
                assert_eq!(general.v.values(), v.values());
            }
        }
    }

    #[test]
    fn nls_step_cases() {
        let g = make_grid(64, 12.0).unwrap();
        let u = ComplexField::from_fn(g.clone(), |x| Complex64::new((-x * x).exp(), 0.1 * x));
        let cfg = StepConfig::new(0.05).unwrap();
        let a = nls_step(&u, 0.0, &cfg).unwrap();
        let b = schrodinger_step(&u, 0.05);
        assert!(max_diff_c(&a, &b) < 1e-14);

        let traj = evolve_nls(
            &u,
            &NlsParams { gamma: -1.0 },
            50.0,
            &StepConfig::new(0.05).unwrap(),
            1000,
        )
        .unwrap();
        let m0 = mass(&u);
        assert!((mass(traj.states().last().unwrap()) - m0).abs() <= 1e-12 * m0);
    }

    #[test]
    fn nls_soliton_profile_is_preserved() {
        // γ = −1: u = √2 σ sech(σ(x − ct)) e^{i(c/2)(x−ct)} e^{iwt}, σ² = w − c²/4
        let (c, w) = (1.0, 1.0);
        let sigma = (w - c * c / 4.0_f64).sqrt();
        let g = make_grid(1024, 64.0 * PI).unwrap();
        let wave = |t: f64| {
            ComplexField::from_fn(g.clone(), move |x| {
                let xi = wrap(x - c * t, 64.0 * PI);
                Complex64::from_polar(
                    2f64.sqrt() * sigma / (sigma * xi).cosh(),
                    0.5 * c * xi + w * t,
                )
            })
        };
        let t_end = 5.0;
        let traj = evolve_nls(
            &wave(0.0),
            &NlsParams { gamma: -1.0 },
            t_end,
            &StepConfig::new(1e-3).unwrap(),
            5000,
        )
        .unwrap();
        let err = max_diff_c(traj.states().last().unwrap(), &wave(t_end));
        assert!(err < 1e-4, "{err}");
    }

    fn wrap(x: f64, len: f64) -> f64 {
        x - len * (x / len).round()
    }

    fn self_convergence_order(order: SubstepOrder) -> f64 {
        let g = make_grid(128, 40.0).unwrap();
        let p = GBenneyParams::benney(1.0, 1.0, -1.0, 0.25).unwrap();
        let mut s = smooth_state(&g, false);
        s.v = crate::spectral::RealField::from_fn(g.clone(), |x| -(1.0 / x.cosh()).powi(2));
        let t_end = 0.5;
        let run = |h: f64| {
            let cfg = StepConfig {
                h,
                dealias: true,
                order,
            };
            let steps = (t_end / h).round() as usize;
            evolve_gbenney(&s, &p, t_end, &cfg, steps)
                .unwrap()
                .states()
                .last()
                .unwrap()
                .u
                .clone()
        };
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let l2 = |x: &ComplexField, y: &ComplexField| {
            let d: Vec<Complex64> = x
                .values()
                .iter()
                .zip(y.values())
                .map(|(p, q)| p - q)
                .collect();
            lq_norm(
                &ComplexField::new(g.clone(), d, Representation::Physical).unwrap(),
                2.0,
            )
            .unwrap()
        };
        (l2(&a, &b) / l2(&b, &c)).log2()
    }

    #[test]
    fn symmetric_order_is_second_order() {
        let q = self_convergence_order(SubstepOrder::Symmetric);
        assert!((1.9..=2.1).contains(&q), "order {q}");
    }

    #[test]
    fn lagged_order_is_first_order() {
        let q = self_convergence_order(SubstepOrder::Lagged);
        assert!((0.8..=1.3).contains(&q), "order {q}");
    }
}
