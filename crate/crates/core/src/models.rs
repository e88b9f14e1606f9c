//! Coefficient sets, instance maps onto the generalized Benney form, and
//! conserved functionals.
//!
//! The master system is
//!
//! ```text
//! i u_t + u_xx = (τ|u|² + α v + α' z) u
//! ε v_t + λ v_x = β ∂ₓ|u|²
//! ε z_t + λ' z_x = β' ∂ₓ|u|²
//! ```
//!
//! and the two-field Benney system is the same with the `z` channel absent.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::norms::{HasGrid, HasU};
use crate::spectral::{derivative_complex, ensure_same_grid, ComplexField, Grid, RealField};

/// One transport channel: potential weight `alpha`, speed `lambda`, forcing `beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportCoupling {
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
}

impl TransportCoupling {
    pub fn new(alpha: f64, lambda: f64, beta: f64) -> Self {
        TransportCoupling {
            alpha,
            lambda,
            beta,
        }
    }

    /// Limit contribution `αβ/λ`.
    pub fn slaved_weight(&self) -> f64 {
        self.alpha * self.beta / self.lambda
    }

    /// Slaving ratio `β/λ` in `v ≈ (β/λ)|u|²`.
    pub fn ratio(&self) -> f64 {
        self.beta / self.lambda
    }

    fn validate(&self, name: &str) -> Result<()> {
        let finite = self.alpha.is_finite() && self.lambda.is_finite() && self.beta.is_finite();
        if !finite {
            return Err(Error::param(format!("{name}: coefficients must be finite")));
        }
        if self.lambda == 0.0 {
            return Err(Error::param(format!(
                "{name}: transport speed must be nonzero"
            )));
        }
        if self.beta == 0.0 {
            return Err(Error::param(format!(
                "{name}: forcing coefficient must be nonzero"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GBenneyParams {
    pub tau: f64,
    pub v: TransportCoupling,
    /// `None` for two-field instances.
    pub z: Option<TransportCoupling>,
    pub epsilon: f64,
}

impl GBenneyParams {
    pub fn new(
        tau: f64,
        v: TransportCoupling,
        z: Option<TransportCoupling>,
        epsilon: f64,
    ) -> Result<Self> {
        let p = GBenneyParams { tau, v, z, epsilon };
        p.validate()?;
        Ok(p)
    }

    /// Two-field Benney system (`τ = 0`, no `z` channel).
    pub fn benney(alpha: f64, lambda: f64, beta: f64, epsilon: f64) -> Result<Self> {
        Self::new(
            0.0,
            TransportCoupling::new(alpha, lambda, beta),
            None,
            epsilon,
        )
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.tau, self.v, self.z, epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() {
            return Err(Error::param("tau must be finite"));
        }
        self.v.validate("v channel")?;
        if let Some(z) = &self.z {
            z.validate("z channel")?;
        }
        check_epsilon(self.epsilon)
    }

    pub fn has_z(&self) -> bool {
        self.z.is_some()
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NlsParams {
    pub gamma: f64,
}

/// `γ = τ + αβ/λ (+ α'β'/λ')`.
pub fn limit_coefficient(p: &GBenneyParams) -> NlsParams {
    let mut gamma = p.tau + p.v.slaved_weight();
    if let Some(z) = &p.z {
        gamma += z.slaved_weight();
    }
    NlsParams { gamma }
}

/// Reduced Zakharov system: `v ↔ n₊`, `z ↔ n₋`.
pub fn zakharov_instance(epsilon: f64) -> Result<GBenneyParams> {
    GBenneyParams::new(
        0.0,
        TransportCoupling::new(-0.5, 1.0, 1.0),
        Some(TransportCoupling::new(0.5, -1.0, 1.0)),
        epsilon,
    )
}

/// Which cubic coefficient the Zakharov–Rubenchik instance uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZrCubic {
    /// `τ = c`
    #[default]
    Bare,
    /// `τ = k c`
    Scaled,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZrParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k: f64,
    pub epsilon: f64,
    pub cubic: ZrCubic,
}

impl ZrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) {
            return Err(Error::param(format!(
                "ZR: b must be positive, got {}",
                self.b
            )));
        }
        if self.b == self.a * self.a {
            return Err(Error::param(
                "ZR: b = a² gives a degenerate transport speed",
            ));
        }
        check_epsilon(self.epsilon)
    }
}

/// Diagonalized Zakharov–Rubenchik system in generalized Benney form, with
/// `v ↔ ψ₁` and `z ↔ ψ₂`.
pub fn zr_instance(p: &ZrParams) -> Result<GBenneyParams> {
    p.validate()?;
    let sb = p.b.sqrt();
    let r = p.a / (2.0 * sb);
    let lambda = sb - p.a;
    let lambda_p = -(p.a + sb);
    if lambda == 0.0 || lambda_p == 0.0 {
        return Err(Error::param("ZR: degenerate transport speed"));
    }
    let tau = match p.cubic {
        ZrCubic::Bare => p.c,
        ZrCubic::Scaled => p.k * p.c,
    };
    GBenneyParams::new(
        tau,
        TransportCoupling::new(sb - 0.5 * p.a, lambda, 0.5 * (-1.0 + r)),
        Some(TransportCoupling::new(
            -(sb + 0.5 * p.a),
            lambda_p,
            -0.5 * (1.0 + r),
        )),
        p.epsilon,
    )
}

fn check_b(b: f64) -> Result<f64> {
    if b > 0.0 {
        Ok(b.sqrt())
    } else {
        Err(Error::param(format!("b must be positive, got {b}")))
    }
}

/// `ψ₁ = ½(ρ + φ/√b)`, `ψ₂ = ½(ρ − φ/√b)`.
pub fn zr_to_diagonal(rho: &RealField, phi: &RealField, b: f64) -> Result<(RealField, RealField)> {
    let sb = check_b(b)?;
    Ok((
        rho.combine(0.5, phi, 0.5 / sb)?,
        rho.combine(0.5, phi, -0.5 / sb)?,
    ))
}

/// `ρ = ψ₁ + ψ₂`, `φ = √b(ψ₁ − ψ₂)`.
pub fn zr_from_diagonal(
    psi1: &RealField,
    psi2: &RealField,
    b: f64,
) -> Result<(RealField, RealField)> {
    let sb = check_b(b)?;
    Ok((psi1.combine(1.0, psi2, 1.0)?, psi1.combine(sb, psi2, -sb)?))
}

/// `n₊ = −εv − n`, `n₋ = −εv + n`.
pub fn zakharov_profiles(
    n: &RealField,
    v: &RealField,
    epsilon: f64,
) -> Result<(RealField, RealField)> {
    Ok((v.combine(-epsilon, n, -1.0)?, v.combine(-epsilon, n, 1.0)?))
}

/// `n = ½(n₋ − n₊)`.
pub fn profiles_to_n(n_plus: &RealField, n_minus: &RealField) -> Result<RealField> {
    n_minus.combine(0.5, n_plus, -0.5)
}

/// `v = −(n₊ + n₋)/(2ε)`.
pub fn profiles_to_velocity(
    n_plus: &RealField,
    n_minus: &RealField,
    epsilon: f64,
) -> Result<RealField> {
    let w = -0.5 / epsilon;
    n_plus.combine(w, n_minus, w)
}

#[derive(Clone, Debug)]
pub struct GBenneyState {
    pub t: f64,
    pub u: ComplexField,
    pub v: RealField,
    pub z: Option<RealField>,
}

impl GBenneyState {
    pub fn new(t: f64, u: ComplexField, v: RealField, z: Option<RealField>) -> Result<Self> {
        ensure_same_grid(u.grid(), v.grid())?;
        if let Some(z) = &z {
            ensure_same_grid(u.grid(), z.grid())?;
        }
        Ok(GBenneyState {
            t,
            u: u.to_physical(),
            v,
            z,
        })
    }

    pub fn zeros(grid: Arc<Grid>, with_z: bool) -> Self {
        GBenneyState {
            t: 0.0,
            u: ComplexField::zeros(grid.clone()),
            v: RealField::zeros(grid.clone()),
            z: with_z.then(|| RealField::zeros(grid)),
        }
    }

    pub(crate) fn check_channels(&self, p: &GBenneyParams) -> Result<()> {
        if self.z.is_some() != p.has_z() {
            return Err(Error::param(if p.has_z() {
                "parameters have a z channel but the state does not"
            } else {
                "state has a z channel but the parameters do not"
            }));
        }
        Ok(())
    }
}

impl HasU for GBenneyState {
    fn u(&self) -> &ComplexField {
        &self.u
    }
}

impl HasGrid for GBenneyState {
    fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }
}

fn integrate(grid: &Grid, values: impl Iterator<Item = f64>) -> f64 {
    grid.dx() * values.sum::<f64>()
}

fn physical_with_derivative(u: &ComplexField) -> (ComplexField, ComplexField) {
    let phys = u.to_physical();
    let du = derivative_complex(&phys);
    (phys, du)
}

/// `∫ |u|²`.
pub fn mass(u: &ComplexField) -> f64 {
    let phys = u.to_physical();
    integrate(u.grid(), phys.values().iter().map(|z| z.norm_sqr()))
}

fn im_u_dubar(u: &[Complex64], du: &[Complex64]) -> Vec<f64> {
    u.iter().zip(du).map(|(a, d)| (a * d.conj()).im).collect()
}

/// `∫ v² + (2β/(αε)) Im(u ∂ₓū)`.
pub fn moment_benney(u: &ComplexField, v: &RealField, p: &GBenneyParams) -> Result<f64> {
    ensure_same_grid(u.grid(), v.grid())?;
    let c = p.v;
    if c.alpha == 0.0 {
        return Err(Error::param("moment needs alpha != 0"));
    }
    let (phys, du) = physical_with_derivative(u);
    let im = im_u_dubar(phys.values(), du.values());
    let w = 2.0 * c.beta / (c.alpha * p.epsilon);
    Ok(integrate(
        u.grid(),
        v.values().iter().zip(&im).map(|(v, m)| v * v + w * m),
    ))
}

/// `∫ |∂ₓu|² + α v|u|² − (αλ/(2β)) v²`.
pub fn energy_benney(u: &ComplexField, v: &RealField, p: &GBenneyParams) -> Result<f64> {
    ensure_same_grid(u.grid(), v.grid())?;
    let c = p.v;
    if c.beta == 0.0 {
        return Err(Error::param("energy needs beta != 0"));
    }
    let (phys, du) = physical_with_derivative(u);
    let w = c.alpha * c.lambda / (2.0 * c.beta);
    Ok(integrate(
        u.grid(),
        phys.values()
            .iter()
            .zip(du.values())
            .zip(v.values())
            .map(|((a, d), v)| d.norm_sqr() + c.alpha * v * a.norm_sqr() - w * v * v),
    ))
}

pub fn mass_g(state: &GBenneyState) -> f64 {
    mass(&state.u)
}

fn z_pair<'a>(
    state: &'a GBenneyState,
    p: &GBenneyParams,
) -> Result<Option<(&'a RealField, TransportCoupling)>> {
    state.check_channels(p)?;
    Ok(state.z.as_ref().zip(p.z))
}

/// `∫ (α/(2β)) v² + (α'/(2β')) z² + (1/ε) Im(u ∂ₓū)`.
pub fn moment_g(state: &GBenneyState, p: &GBenneyParams) -> Result<f64> {
    let z = z_pair(state, p)?;
    let (phys, du) = physical_with_derivative(&state.u);
    let im = im_u_dubar(phys.values(), du.values());
    let wv = p.v.alpha / (2.0 * p.v.beta);
    let inv_eps = 1.0 / p.epsilon;
    let mut density: Vec<f64> = state
        .v
        .values()
        .iter()
        .zip(&im)
        .map(|(v, m)| wv * v * v + inv_eps * m)
        .collect();
    if let Some((zf, zc)) = z {
        let wz = zc.alpha / (2.0 * zc.beta);
        for (d, z) in density.iter_mut().zip(zf.values()) {
            *d += wz * z * z;
        }
    }
    Ok(integrate(state.u.grid(), density.into_iter()))
}

/// `∫ |∂ₓu|² + (τ/2)|u|⁴ + αv|u|² + α'z|u|² − (αλ/(2β))v² − (α'λ'/(2β'))z²`.
pub fn energy_g(state: &GBenneyState, p: &GBenneyParams) -> Result<f64> {
    let z = z_pair(state, p)?;
    let (phys, du) = physical_with_derivative(&state.u);
    let c = p.v;
    let wv = c.alpha * c.lambda / (2.0 * c.beta);
    let mut density: Vec<f64> = phys
        .values()
        .iter()
        .zip(du.values())
        .zip(state.v.values())
        .map(|((a, d), v)| {
            let m = a.norm_sqr();
            d.norm_sqr() + 0.5 * p.tau * m * m + c.alpha * v * m - wv * v * v
        })
        .collect();
    if let Some((zf, zc)) = z {
        let wz = zc.alpha * zc.lambda / (2.0 * zc.beta);
        for ((d, z), a) in density.iter_mut().zip(zf.values()).zip(phys.values()) {
            *d += zc.alpha * z * a.norm_sqr() - wz * z * z;
        }
    }
    Ok(integrate(state.u.grid(), density.into_iter()))
}

/// NLS energy `∫ |∂ₓu|² + (γ/2)|u|⁴`.
pub fn energy_nls(u: &ComplexField, gamma: f64) -> f64 {
    let (phys, du) = physical_with_derivative(u);
    integrate(
        u.grid(),
        phys.values().iter().zip(du.values()).map(|(a, d)| {
            let m = a.norm_sqr();
            d.norm_sqr() + 0.5 * gamma * m * m
        }),
    )
}

/// Zakharov invariants `(J₁, J₂)`.
pub fn zakharov_invariants(
    u: &ComplexField,
    n: &RealField,
    v: &RealField,
    epsilon: f64,
) -> Result<(f64, f64)> {
    ensure_same_grid(u.grid(), n.grid())?;
    ensure_same_grid(u.grid(), v.grid())?;
    let (phys, du) = physical_with_derivative(u);
    let grid = u.grid();
    let j1 = mass(&phys);
    let e2 = 0.5 * epsilon * epsilon;
    let j2 = integrate(
        grid,
        phys.values()
            .iter()
            .zip(du.values())
            .zip(n.values().iter().zip(v.values()))
            .map(|((a, d), (n, v))| d.norm_sqr() + n * a.norm_sqr() + 0.5 * n * n + e2 * v * v),
    );
    Ok((j1, j2))
}

/// Zakharov–Rubenchik invariants `(I₁, I₂, I₃, I₄)`.
pub fn zr_invariants(
    u: &ComplexField,
    rho: &RealField,
    phi: &RealField,
    p: &ZrParams,
) -> Result<(f64, f64, f64, f64)> {
    ensure_same_grid(u.grid(), rho.grid())?;
    ensure_same_grid(u.grid(), phi.grid())?;
    let grid = u.grid();
    let (phys, du) = physical_with_derivative(u);
    let (a, b, c, k, eps) = (p.a, p.b, p.c, p.k, p.epsilon);

    let i1 = mass(&phys);
    let i2 = integrate(
        grid,
        phys.values()
            .iter()
            .zip(du.values())
            .zip(rho.values().iter().zip(phi.values()))
            .map(|((u, d), (r, f))| {
                let m = u.norm_sqr();
                0.5 * d.norm_sqr()
                    + 0.25 * c * k * m * m
                    + 0.5 * k * (f - 0.5 * a * r) * m
                    + 0.25 * b * r * r
                    + 0.25 * f * f
                    - 0.5 * b * r * f
            }),
    );
    // (iε/2)(u ∂ₓū − ū ∂ₓu) = −ε Im(u ∂ₓū)
    let i3 = integrate(
        grid,
        phys.values()
            .iter()
            .zip(du.values())
            .zip(rho.values().iter().zip(phi.values()))
            .map(|((u, d), (r, f))| eps * r * f - eps * (u * d.conj()).im),
    );
    let i4 = i2 + b / (2.0 * eps) * i3;
    Ok((i1, i2, i3, i4))
}

/// Regularity region `−½ < s − κ ≤ 1` and `−½ ≤ κ ≤ 2s − ½`.
pub fn wp_region(s: f64, kappa: f64) -> bool {
    let d = s - kappa;
    d > -0.5 && d <= 1.0 && kappa >= -0.5 && kappa <= 2.0 * s - 0.5
}
