//! Closed-form traveling waves and initial-data builders.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{
    check_epsilon, zakharov_instance, zakharov_profiles, GBenneyState, TransportCoupling,
};
use crate::spectral::{antiderivative_zero_mean, ensure_same_grid, ComplexField, Grid, RealField};

/// Speed `c` and frequency `w` of a sech traveling wave; `σ = √(w − c²/4)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TravelingWaveSpec {
    pub c: f64,
    pub w: f64,
    sigma: f64,
}

impl TravelingWaveSpec {
    pub fn new(c: f64, w: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param(format!(
                "wave speed must be positive, got {c}"
            )));
        }
        let s2 = w - 0.25 * c * c;
        if !(s2 > 0.0 && s2.is_finite()) {
            return Err(Error::param(format!("need w > c²/4, got c = {c}, w = {w}")));
        }
        Ok(TravelingWaveSpec {
            c,
            w,
            sigma: s2.sqrt(),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

fn wrap(x: f64, length: f64) -> f64 {
    x - length * (x / length).round()
}

fn check_focusing(p: &TransportCoupling) -> Result<()> {
    if p.lambda == 0.0 || p.alpha == 0.0 || p.beta == 0.0 {
        return Err(Error::param(
            "wave coefficients alpha, beta, lambda must be nonzero",
        ));
    }
    if !(p.slaved_weight() < 0.0) {
        return Err(Error::param("traveling waves need alpha*beta/lambda < 0"));
    }
    Ok(())
}

/// `A_ε = √(2(εc − λ)/(αβ))`.
pub fn benney_amplitude(
    spec: &TravelingWaveSpec,
    p: &TransportCoupling,
    epsilon: f64,
) -> Result<f64> {
    check_focusing(p)?;
    check_epsilon(epsilon)?;
    if !(epsilon < 1.0 / spec.c) {
        return Err(Error::param(format!(
            "traveling waves need epsilon < 1/c = {}",
            1.0 / spec.c
        )));
    }
    let radicand = 2.0 * (epsilon * spec.c - p.lambda) / (p.alpha * p.beta);
    if !(radicand > 0.0) {
        return Err(Error::param(format!(
            "wave amplitude radicand 2(εc − λ)/(αβ) = {radicand} is not positive"
        )));
    }
    Ok(radicand.sqrt())
}

/// `A₀ = √(−2λ/(αβ))`.
pub fn nls_amplitude(p: &TransportCoupling) -> Result<f64> {
    check_focusing(p)?;
    Ok((-2.0 * p.lambda / (p.alpha * p.beta)).sqrt())
}

fn sech_wave(spec: &TravelingWaveSpec, amplitude: f64, grid: &Arc<Grid>, t: f64) -> ComplexField {
    let (c, w, s) = (spec.c, spec.w, spec.sigma);
    let len = grid.length();
    ComplexField::from_fn(grid.clone(), |x| {
        let xi = wrap(x - c * t, len);
        Complex64::from_polar(amplitude * s / (s * xi).cosh(), w * t + 0.5 * c * xi)
    })
}

/// Exact traveling wave of the two-field Benney system at time `t`.
pub fn benney_wave(
    spec: &TravelingWaveSpec,
    p: &TransportCoupling,
    epsilon: f64,
    grid: &Arc<Grid>,
    t: f64,
) -> Result<(ComplexField, RealField)> {
    let amp = benney_amplitude(spec, p, epsilon)?;
    let u = sech_wave(spec, amp, grid, t);
    let (c, s, len) = (spec.c, spec.sigma, grid.length());
    let v = RealField::from_fn(grid.clone(), |x| {
        let sech = 1.0 / (s * wrap(x - c * t, len)).cosh();
        -(2.0 / p.alpha) * s * s * sech * sech
    });
    Ok((u, v))
}

/// Limit wave of the cubic NLS with `γ = αβ/λ`.
pub fn nls_wave(
    spec: &TravelingWaveSpec,
    p: &TransportCoupling,
    grid: &Arc<Grid>,
    t: f64,
) -> Result<ComplexField> {
    let amp = nls_amplitude(p)?;
    Ok(sech_wave(spec, amp, grid, t))
}

/// `v₀ = (β/λ)|u₀|²`.
pub fn compatible_v(u0: &ComplexField, p: &TransportCoupling) -> Result<RealField> {
    if p.lambda == 0.0 {
        return Err(Error::param("compatible data needs lambda != 0"));
    }
    let r = p.ratio();
    let g = u0.modulus_squared();
    Ok(g.scaled(r))
}

fn check_width(width: f64) -> Result<()> {
    if width > 0.0 && width.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "profile width must be positive, got {width}"
        )))
    }
}

/// `A sech((x − x₀)/width) e^{i v₀ x/2}`.
pub fn sech_profile(
    amplitude: f64,
    width: f64,
    center: f64,
    phase_velocity: f64,
    grid: &Arc<Grid>,
) -> Result<ComplexField> {
    check_width(width)?;
    let len = grid.length();
    Ok(ComplexField::from_fn(grid.clone(), |x| {
        let y = wrap(x - center, len) / width;
        Complex64::from_polar(amplitude / y.cosh(), 0.5 * phase_velocity * x)
    }))
}

/// `A exp(−((x − x₀)/width)²) e^{i v₀ x/2}`.
pub fn gaussian_profile(
    amplitude: f64,
    width: f64,
    center: f64,
    phase_velocity: f64,
    grid: &Arc<Grid>,
) -> Result<ComplexField> {
    check_width(width)?;
    let len = grid.length();
    Ok(ComplexField::from_fn(grid.clone(), |x| {
        let y = wrap(x - center, len) / width;
        Complex64::from_polar(amplitude * (-y * y).exp(), 0.5 * phase_velocity * x)
    }))
}

/// Initial velocity information for Zakharov data.
#[derive(Clone, Debug)]
pub enum ZakharovVelocity {
    /// `∂ₜn(0)`; must have zero mean.
    N1(RealField),
    V0(RealField),
}

#[derive(Clone, Debug)]
pub struct ZakharovData {
    pub n0: RealField,
    pub velocity: ZakharovVelocity,
    pub epsilon: f64,
}

/// Reduced Zakharov state `(u₀, n₊, n₋)` for [`zakharov_instance`].
///
/// With `∂ₜn + ∂ₓv = 0`, the velocity built from `n₁` is `v₀ = −∂ₓ⁻¹ n₁`.
pub fn zakharov_initial(u0: &ComplexField, data: &ZakharovData) -> Result<GBenneyState> {
    zakharov_instance(data.epsilon)?;
    ensure_same_grid(u0.grid(), data.n0.grid())?;
    let v0 = match &data.velocity {
        ZakharovVelocity::V0(v) => v.clone(),
        ZakharovVelocity::N1(n1) => antiderivative_zero_mean(n1)?.scaled(-1.0),
    };
    let (n_plus, n_minus) = zakharov_profiles(&data.n0, &v0, data.epsilon)?;
    GBenneyState::new(0.0, u0.clone(), n_plus, Some(n_minus))
}
