//! Periodic grid, discrete Fourier transform and exact Fourier multipliers.
//!
//! The real line is replaced by the periodic interval `[-L/2, L/2)` sampled at
//! `n` equispaced nodes. Fourier coefficients use the normalization
//!
//! ```text
//! c_m = (1/n) Σ_j f_j exp(-i k_m x_j),     k_m = 2π m / L,
//! ```
//!
//! so that `c_m` approximates Fourier-series coefficients and Parseval reads
//! `‖f‖²_{L²} = L Σ_m |c_m|²`. Coefficients are stored in DFT order
//! (`m = 0, 1, …, n/2-1, -n/2, …, -1`).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest admissible point count.
pub const MIN_POINTS: usize = 8;

/// Fraction of the domain (split evenly between both ends) watched by
/// [`boundary_mass_fraction`].
pub const BOUNDARY_BAND: f64 = 0.1;

/// Boundary-mass fraction above which wrap-around is considered visible.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-8;

pub struct Grid {
    n: usize,
    length: f64,
    dx: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    // (-1)^m: phase of exp(-i k_m x_0) with x_0 = -L/2
    parity: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

/// Build a periodic grid of `n` points on `[-length/2, length/2)`.
pub fn make_grid(n: usize, length: f64) -> Result<Arc<Grid>> {
    Grid::new(n, length).map(Arc::new)
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("point count {n} is odd")));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "point count {n} is below the minimum {MIN_POINTS}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain length {length} must be positive and finite"
            )));
        }
        let dx = length / n as f64;
        let nodes = (0..n).map(|j| -0.5 * length + j as f64 * dx).collect();
        let scale = 2.0 * PI / length;
        let wavenumbers = (0..n).map(|j| scale * mode_index(j, n) as f64).collect();
        let parity = (0..n)
            .map(|j| if mode_index(j, n) % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Grid {
            n,
            length,
            dx,
            nodes,
            wavenumbers,
            parity,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Wavenumbers `k_m` in DFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Signed mode number `m` stored at DFT index `j`.
    pub fn mode(&self, j: usize) -> i64 {
        mode_index(j, self.n)
    }

    /// DFT index of the Nyquist mode `m = -n/2`.
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Whether mode index `j` survives the two-thirds rule (`|m| ≤ n/3`).
    pub fn is_resolved(&self, j: usize) -> bool {
        3 * self.mode(j).unsigned_abs() as usize <= self.n
    }

    /// Physical samples to coefficients, in place.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.forward.process(buf);
        let inv_n = 1.0 / self.n as f64;
        for (c, p) in buf.iter_mut().zip(&self.parity) {
            *c *= p * inv_n;
        }
    }

    /// Coefficients to physical samples, in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        for (c, p) in buf.iter_mut().zip(&self.parity) {
            *c *= *p;
        }
        self.inverse.process(buf);
    }

    pub(crate) fn forward_real(&self, values: &[f64], out: &mut Vec<Complex64>) {
        out.clear();
        out.extend(values.iter().map(|&x| Complex64::new(x, 0.0)));
        self.forward_in_place(out);
    }

    /// Inverse transform, keeping only the real part.
    pub(crate) fn inverse_real(&self, coeffs: &mut [Complex64], out: &mut [f64]) {
        self.inverse_in_place(coeffs);
        for (o, c) in out.iter_mut().zip(coeffs.iter()) {
            *o = c.re;
        }
    }

    pub(crate) fn dealias_in_place(&self, coeffs: &mut [Complex64]) {
        for (j, c) in coeffs.iter_mut().enumerate() {
            if !self.is_resolved(j) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
}

fn mode_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

pub(crate) fn ensure_same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

/// Complex samples or Fourier coefficients on a [`Grid`].
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
    repr: Representation,
}

impl ComplexField {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>, repr: Representation) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::param(format!(
                "field has {} values, grid has {} points",
                values.len(),
                grid.n()
            )));
        }
        Ok(ComplexField { grid, values, repr })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.n()];
        ComplexField {
            grid,
            values,
            repr: Representation::Physical,
        }
    }

    /// Sample `f` at the grid nodes.
    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        ComplexField {
            grid,
            values,
            repr: Representation::Physical,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
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

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Same field in physical space (copying only if a transform is needed).
    pub fn to_physical(&self) -> ComplexField {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Spectral => transform_inverse(self).expect("spectral input"),
        }
    }

    pub fn to_spectral(&self) -> ComplexField {
        match self.repr {
            Representation::Spectral => self.clone(),
            Representation::Physical => transform_forward(self).expect("physical input"),
        }
    }

    /// Pointwise `|u|²` as a real field.
    pub fn modulus_squared(&self) -> RealField {
        let phys = self.to_physical();
        RealField {
            grid: phys.grid.clone(),
            values: phys.values.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Real samples on a [`Grid`].
#[derive(Clone, Debug)]
pub struct RealField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::param(format!(
                "field has {} values, grid has {} points",
                values.len(),
                grid.n()
            )));
        }
        if let Some(j) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::param(format!("non-finite sample at index {j}")));
        }
        Ok(RealField { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        RealField { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.n()];
        RealField { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        RealField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Fourier coefficients as a spectral [`ComplexField`].
    pub fn to_spectral(&self) -> ComplexField {
        let mut buf = Vec::with_capacity(self.grid.n());
        self.grid.forward_real(&self.values, &mut buf);
        ComplexField {
            grid: self.grid.clone(),
            values: buf,
            repr: Representation::Spectral,
        }
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
            repr: Representation::Physical,
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &RealField, b: f64) -> Result<RealField> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(RealField::from_vec_unchecked(self.grid.clone(), values))
    }

    pub fn scaled(&self, a: f64) -> RealField {
        RealField::from_vec_unchecked(
            self.grid.clone(),
            self.values.iter().map(|x| a * x).collect(),
        )
    }
}

fn expect_repr(f: &ComplexField, expected: Representation) -> Result<()> {
    if f.repr == expected {
        Ok(())
    } else {
        Err(Error::Representation {
            expected,
            found: f.repr,
        })
    }
}

pub fn transform_forward(f: &ComplexField) -> Result<ComplexField> {
    expect_repr(f, Representation::Physical)?;
    let mut values = f.values.clone();
    f.grid.forward_in_place(&mut values);
    Ok(ComplexField {
        grid: f.grid.clone(),
        values,
        repr: Representation::Spectral,
    })
}

pub fn transform_inverse(f: &ComplexField) -> Result<ComplexField> {
    expect_repr(f, Representation::Spectral)?;
    let mut values = f.values.clone();
    f.grid.inverse_in_place(&mut values);
    Ok(ComplexField {
        grid: f.grid.clone(),
        values,
        repr: Representation::Physical,
    })
}

/// Apply a diagonal multiplier in Fourier space, returning the result in the
/// input's representation.
fn apply_multiplier(
    f: &ComplexField,
    multiplier: impl Fn(usize, f64) -> Complex64,
) -> ComplexField {
    let mut spec = f.to_spectral();
    for (j, (c, &k)) in spec.values.iter_mut().zip(f.grid.wavenumbers()).enumerate() {
        *c *= multiplier(j, k);
    }
    match f.repr {
        Representation::Spectral => spec,
        Representation::Physical => spec.to_physical(),
    }
}

fn real_multiplier(f: &RealField, multiplier: impl Fn(usize, f64) -> Complex64) -> RealField {
    let grid = f.grid.clone();
    let mut buf = Vec::with_capacity(grid.n());
    grid.forward_real(&f.values, &mut buf);
    for (j, (c, &k)) in buf.iter_mut().zip(grid.wavenumbers()).enumerate() {
        *c *= multiplier(j, k);
    }
    let mut out = vec![0.0; grid.n()];
    grid.inverse_real(&mut buf, &mut out);
    RealField::from_vec_unchecked(grid, out)
}

/// Exact free Schrödinger propagator `S(dt) = exp(i dt ∂²ₓ)`, i.e. the
/// multiplier `exp(-i k² dt)`. Works for either representation.
pub fn schrodinger_step(u: &ComplexField, dt: f64) -> ComplexField {
    apply_multiplier(u, |_, k| Complex64::cis(-k * k * dt))
}

/// Exact periodic translation `v(x - (λ/ε) dt)`.
///
/// The Nyquist coefficient of a real field cannot be translated by a non-grid
/// amount without leaving the reals; its imaginary part is discarded.
pub fn transport_shift(v: &RealField, dt: f64, lambda: f64, epsilon: f64) -> Result<RealField> {
    if !(epsilon > 0.0) {
        return Err(Error::param(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let speed = lambda / epsilon;
    Ok(real_multiplier(v, |_, k| Complex64::cis(-k * speed * dt)))
}

/// Spectral `∂ₓ` of a real field; the Nyquist mode is zeroed.
pub fn derivative_real(f: &RealField) -> RealField {
    let nyq = f.grid.nyquist_index();
    real_multiplier(f, |j, k| {
        if j == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k)
        }
    })
}

/// Spectral `∂ₓ` of a complex field (all modes kept).
pub fn derivative_complex(f: &ComplexField) -> ComplexField {
    apply_multiplier(f, |_, k| Complex64::new(0.0, k))
}

/// Tolerance on `|mean| / ‖f‖` accepted by [`antiderivative_zero_mean`].
pub const ZERO_MEAN_TOLERANCE: f64 = 1e-10;

/// Zero-mean periodic antiderivative `∂ₓ⁻¹ f` (multiplier `1/(i k)`).
///
/// Fails when `f` has a mean, which puts it outside the range of `∂ₓ` on the
/// torus. The Nyquist mode is dropped, as in [`derivative_real`].
pub fn antiderivative_zero_mean(f: &RealField) -> Result<RealField> {
    let mean = f.mean();
    let norm = (f.grid.dx() * f.values.iter().map(|x| x * x).sum::<f64>()).sqrt();
    if mean.abs() > ZERO_MEAN_TOLERANCE * norm {
        return Err(Error::NonZeroMean { mean, norm });
    }
    let nyq = f.grid.nyquist_index();
    Ok(real_multiplier(f, |j, k| {
        if j == 0 || j == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / k)
        }
    }))
}

/// Two-thirds rule: zero every coefficient with `|m| > n/3`.
pub fn dealias(f: &ComplexField) -> Result<ComplexField> {
    expect_repr(f, Representation::Spectral)?;
    let mut out = f.clone();
    f.grid.dealias_in_place(&mut out.values);
    Ok(out)
}

/// Fraction of `∫|u|²` carried by the outer [`BOUNDARY_BAND`] of the domain.
pub fn boundary_mass_fraction(u: &ComplexField) -> f64 {
    let phys = u.to_physical();
    let grid = u.grid();
    let cutoff = 0.5 * grid.length() * (1.0 - BOUNDARY_BAND);
    let mut total = 0.0;
    let mut outer = 0.0;
    for (&x, z) in grid.nodes().iter().zip(phys.values()) {
        let m = z.norm_sqr();
        total += m;
        if x.abs() >= cutoff {
            outer += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng as Rng64;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_complex(grid: &Arc<Grid>, rng: &mut Rng64) -> ComplexField {
        let values = (0..grid.n())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexField::new(grid.clone(), values, Representation::Physical).unwrap()
    }

    // real field with random coefficients on |m| < n/2 (no Nyquist content)
    fn random_real_bandlimited(grid: &Arc<Grid>, rng: &mut Rng64, zero_mean: bool) -> RealField {
        let n = grid.n();
        let mut coeffs = vec![c(0.0, 0.0); n];
        for m in 1..n / 2 {
            let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            coeffs[m] = z;
            coeffs[n - m] = z.conj();
        }
        if !zero_mean {
            coeffs[0] = c(rng.gen_range(-1.0..1.0), 0.0);
        }
        let spec = ComplexField::new(grid.clone(), coeffs, Representation::Spectral).unwrap();
        let phys = spec.to_physical();
        RealField::new(grid.clone(), phys.values().iter().map(|z| z.re).collect()).unwrap()
    }

    fn max_abs_diff_c(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn l2(f: &ComplexField) -> f64 {
        let p = f.to_physical();
        (f.grid().dx() * p.values().iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    #[test]
    fn grid_wavenumbers_in_dft_order() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        assert!((g.dx() - PI / 4.0).abs() < 1e-15);
        let expect = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        assert_eq!(g.wavenumbers(), &expect);
        assert_eq!(g.nodes()[0], -PI);

        let g = make_grid(8, 4.0 * PI).unwrap();
        let expect = [0.0, 0.5, 1.0, 1.5, -2.0, -1.5, -1.0, -0.5];
        assert_eq!(g.wavenumbers(), &expect);
        assert!((g.dx() * 8.0 - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(make_grid(7, 2.0 * PI), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(6, 2.0 * PI), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(8, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(8, -1.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn forward_of_constant_and_pure_mode() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let one = ComplexField::from_fn(g.clone(), |_| c(1.0, 0.0));
        let spec = transform_forward(&one).unwrap();
        assert!((spec.values()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(spec.values()[1..].iter().all(|z| z.norm() < 1e-15));

        let k1 = g.wavenumbers()[1];
        let wave = ComplexField::from_fn(g.clone(), |x| Complex64::cis(k1 * x));
        let spec = transform_forward(&wave).unwrap();
        for (j, z) in spec.values().iter().enumerate() {
            let expect = if j == 1 { 1.0 } else { 0.0 };
            assert!((z - c(expect, 0.0)).norm() < 1e-14, "mode {j}: {z}");
        }
    }

    #[test]
    fn forward_matches_direct_dft_oracle() {
        let g = make_grid(32, 7.0).unwrap();
        let mut rng = Rng64::seed_from_u64(1);
        let f = random_complex(&g, &mut rng);
        let spec = transform_forward(&f).unwrap();
        let n = g.n() as f64;
        for (m, &k) in g.wavenumbers().iter().enumerate() {
            let direct: Complex64 = f
                .values()
                .iter()
                .zip(g.nodes())
                .map(|(fj, &x)| fj * Complex64::cis(-k * x))
                .sum::<Complex64>()
                / n;
            assert!((direct - spec.values()[m]).norm() < 1e-13);
        }
        let back = transform_inverse(&spec).unwrap();
        let scale = f.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(max_abs_diff_c(back.values(), f.values()) <= 1e-12 * scale);
    }

    #[test]
    fn transform_rejects_wrong_representation() {
        let g = make_grid(8, 1.0).unwrap();
        let f = ComplexField::zeros(g);
        assert!(matches!(
            transform_inverse(&f),
            Err(Error::Representation { .. })
        ));
        let s = f.to_spectral();
        assert!(matches!(
            transform_forward(&s),
            Err(Error::Representation { .. })
        ));
        assert!(dealias(&f).is_err());
    }

    #[test]
    fn parseval_for_random_fields() {
        let g = make_grid(64, 3.3).unwrap();
        let mut rng = Rng64::seed_from_u64(7);
        for _ in 0..100 {
            let f = random_complex(&g, &mut rng);
            let phys = g.dx() * f.values().iter().map(|z| z.norm_sqr()).sum::<f64>();
            let spec = f.to_spectral();
            let modal = g.length() * spec.values().iter().map(|z| z.norm_sqr()).sum::<f64>();
            assert!((phys - modal).abs() <= 1e-12 * phys);
        }
    }

    #[test]
    fn schrodinger_plane_wave_and_constant() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let one = ComplexField::from_fn(g.clone(), |_| c(1.0, 0.0));
        let out = schrodinger_step(&one, 0.37);
        assert!(max_abs_diff_c(out.values(), one.values()) < 1e-14);

        let t = 0.8;
        let wave = ComplexField::from_fn(g.clone(), Complex64::cis);
        let out = schrodinger_step(&wave, t);
        let expect = ComplexField::from_fn(g.clone(), |x| Complex64::cis(x - t));
        assert!(max_abs_diff_c(out.values(), expect.values()) < 1e-13);
    }

    #[test]
    fn schrodinger_gaussian_matches_closed_form() {
        // i u_t + u_xx = 0, u0 = exp(-x²/(2a²)) ⇒
        // u = (a²/(a²+2it))^{1/2} exp(-x²/(2(a²+2it)))
        let a = 1.0;
        let g = make_grid(512, 60.0).unwrap();
        let u0 = ComplexField::from_fn(g.clone(), |x| c((-x * x / (2.0 * a * a)).exp(), 0.0));
        let t = 0.1;
        let out = schrodinger_step(&u0, t);
        let s = c(a * a, 2.0 * t);
        let pre = (c(a * a, 0.0) / s).sqrt();
        let expect = ComplexField::from_fn(g, |x| pre * (-(x * x) / (2.0 * s)).exp());
        assert!(max_abs_diff_c(out.values(), expect.values()) < 1e-8);
    }

    #[test]
    fn schrodinger_is_unitary_and_reversible() {
        let g = make_grid(128, 10.0).unwrap();
        let mut rng = Rng64::seed_from_u64(11);
        for _ in 0..20 {
            let f = random_complex(&g, &mut rng);
            let dt = rng.gen_range(-2.0..2.0);
            let out = schrodinger_step(&f, dt);
            assert!((l2(&out) - l2(&f)).abs() <= 1e-12 * l2(&f));
            let back = schrodinger_step(&out, -dt);
            assert!(max_abs_diff_c(back.values(), f.values()) < 1e-12);
        }
    }

    #[test]
    fn schrodinger_keeps_spectral_representation() {
        let g = make_grid(16, 1.0).unwrap();
        let f = ComplexField::from_fn(g, |x| c(x.cos(), 0.0)).to_spectral();
        assert_eq!(
            schrodinger_step(&f, 0.1).representation(),
            Representation::Spectral
        );
    }

    #[test]
    fn transport_shift_exact_translation() {
        let len = 10.0;
        let g = make_grid(64, len).unwrap();
        let v = RealField::from_fn(g.clone(), |x| (2.0 * PI * x / len).sin());
        let h = 0.3;
        let out = transport_shift(&v, h, 1.0, 0.5).unwrap();
        let expect = RealField::from_fn(g.clone(), |x| (2.0 * PI * (x - 2.0 * h) / len).sin());
        assert!(max_abs_diff(out.values(), expect.values()) < 1e-13);

        let constant = RealField::from_fn(g.clone(), |_| 2.5);
        let out = transport_shift(&constant, 1.7, -3.0, 0.1).unwrap();
        assert!(max_abs_diff(out.values(), constant.values()) < 1e-14);

        assert!(transport_shift(&v, h, 1.0, 0.0).is_err());
        assert!(transport_shift(&v, h, 1.0, -0.1).is_err());
    }

    #[test]
    fn transport_shift_semigroup_and_isometry() {
        let g = make_grid(128, 12.0).unwrap();
        let mut rng = Rng64::seed_from_u64(3);
        let v = random_real_bandlimited(&g, &mut rng, false);
        let (d1, d2) = (0.137, 0.911);
        let two =
            transport_shift(&transport_shift(&v, d1, 1.3, 0.2).unwrap(), d2, 1.3, 0.2).unwrap();
        let one = transport_shift(&v, d1 + d2, 1.3, 0.2).unwrap();
        assert!(max_abs_diff(one.values(), two.values()) < 1e-12);
        let norm = |f: &RealField| f.values().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm(&one) - norm(&v)).abs() <= 1e-12 * norm(&v));
    }

    #[test]
    fn derivative_basic_cases() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let s = RealField::from_fn(g.clone(), f64::sin);
        let d = derivative_real(&s);
        let cos = RealField::from_fn(g.clone(), f64::cos);
        assert!(max_abs_diff(d.values(), cos.values()) < 1e-12);

        let constant = RealField::from_fn(g.clone(), |_| 4.0);
        assert!(derivative_real(&constant)
            .values()
            .iter()
            .all(|x| x.abs() < 1e-13));

        // Nyquist mode (-1)^j has zero derivative by convention
        let nyq = RealField::from_fn(g.clone(), |_| 0.0);
        let mut nyq = nyq;
        for (j, x) in nyq.values_mut().iter_mut().enumerate() {
            *x = if j % 2 == 0 { 1.0 } else { -1.0 };
        }
        assert!(derivative_real(&nyq)
            .values()
            .iter()
            .all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn derivative_agrees_with_centered_differences() {
        let g = make_grid(256, 40.0).unwrap();
        let f = RealField::from_fn(g.clone(), |x| 1.0 / x.cosh().powi(2));
        let d = derivative_real(&f);
        let dx = g.dx();
        let n = g.n();
        let fd: Vec<f64> = (0..n)
            .map(|j| (f.values()[(j + 1) % n] - f.values()[(j + n - 1) % n]) / (2.0 * dx))
            .collect();
        let err = max_abs_diff(d.values(), &fd);
        // centered differences are O(dx²); f''' is bounded by ~4 for sech²
        assert!(err < dx * dx, "err {err} vs dx² {}", dx * dx);
        // and the gap shrinks ~4× when dx halves
        let g2 = make_grid(512, 40.0).unwrap();
        let f2 = RealField::from_fn(g2.clone(), |x| 1.0 / x.cosh().powi(2));
        let d2 = derivative_real(&f2);
        let dx2 = g2.dx();
        let fd2: Vec<f64> = (0..512)
            .map(|j| (f2.values()[(j + 1) % 512] - f2.values()[(j + 511) % 512]) / (2.0 * dx2))
            .collect();
        let err2 = max_abs_diff(d2.values(), &fd2);
        assert!(err / err2 > 3.5 && err / err2 < 4.5);
    }

    #[test]
    fn antiderivative_cases() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let cos = RealField::from_fn(g.clone(), f64::cos);
        let a = antiderivative_zero_mean(&cos).unwrap();
        let sin = RealField::from_fn(g.clone(), f64::sin);
        assert!(max_abs_diff(a.values(), sin.values()) < 1e-13);

        let shifted = RealField::from_fn(g.clone(), |x| 1.0 + x.cos());
        assert!(matches!(
            antiderivative_zero_mean(&shifted),
            Err(Error::NonZeroMean { .. })
        ));
        assert!(antiderivative_zero_mean(&RealField::zeros(g)).is_ok());
    }

    #[test]
    fn antiderivative_round_trip_random() {
        let g = make_grid(128, 9.0).unwrap();
        let mut rng = Rng64::seed_from_u64(5);
        for _ in 0..20 {
            let f = random_real_bandlimited(&g, &mut rng, true);
            let back = derivative_real(&antiderivative_zero_mean(&f).unwrap());
            assert!(max_abs_diff(back.values(), f.values()) < 1e-10);
            let back = antiderivative_zero_mean(&derivative_real(&f)).unwrap();
            assert!(max_abs_diff(back.values(), f.values()) < 1e-10);
        }
    }

    #[test]
    fn dealias_zeroes_high_modes() {
        let g = make_grid(48, 2.0 * PI).unwrap();
        let band = ComplexField::from_fn(g.clone(), |x| c((16.0 * x).cos() + x.sin(), 0.0));
        let spec = band.to_spectral();
        let out = dealias(&spec).unwrap();
        assert!(max_abs_diff_c(out.values(), spec.values()) < 1e-15);

        let mut nyq = ComplexField::zeros(g.clone()).to_spectral();
        nyq.values_mut()[g.nyquist_index()] = c(1.0, 0.0);
        assert!(dealias(&nyq)
            .unwrap()
            .values()
            .iter()
            .all(|z| z.norm() == 0.0));
    }

    #[test]
    fn dealiased_product_has_no_spurious_low_modes() {
        // sin(k1 x) sin(k2 x) = ½cos((k1-k2)x) - ½cos((k1+k2)x); with
        // k1 + k2 beyond the coarse grid the sum mode aliases onto a low mode
        // unless the factors are projected first.
        let n = 32;
        let len = 2.0 * PI;
        let (k1, k2) = (10.0, 11.0);
        let coarse = make_grid(n, len).unwrap();
        let fine = make_grid(2 * n, len).unwrap();

        let product_coeffs = |g: &Arc<Grid>| {
            let f = ComplexField::from_fn(g.clone(), |x| c((k1 * x).sin(), 0.0));
            let h = ComplexField::from_fn(g.clone(), |x| c((k2 * x).sin(), 0.0));
            let prod: Vec<Complex64> = f
                .values()
                .iter()
                .zip(h.values())
                .map(|(a, b)| a * b)
                .collect();
            ComplexField::new(g.clone(), prod, Representation::Physical)
                .unwrap()
                .to_spectral()
        };
        // oracle: exact product on the refined grid restricted to resolved coarse modes
        let exact = product_coeffs(&fine);
        let coarse_raw = dealias(&product_coeffs(&coarse)).unwrap();
        let mut aliasing = 0.0_f64;
        for j in 0..n {
            if !coarse.is_resolved(j) {
                continue;
            }
            let m = coarse.mode(j);
            let jf = if m >= 0 {
                m as usize
            } else {
                (2 * n as i64 + m) as usize
            };
            aliasing = aliasing.max((coarse_raw.values()[j] - exact.values()[jf]).norm());
        }
        // naive product aliases the k1+k2 = 21 mode onto |m| = 11 (> n/3, dropped)
        // and nothing lands on resolved modes other than the true difference mode.
        assert!(aliasing < 1e-14, "aliasing {aliasing}");

        // a mode pair whose sum aliases onto a resolved mode must be caught
        let (k1, k2) = (14.0, 12.0); // sum 26 aliases to -6
        let f = ComplexField::from_fn(coarse.clone(), |x| c((k1 * x).sin(), 0.0)).to_spectral();
        let h = ComplexField::from_fn(coarse.clone(), |x| c((k2 * x).sin(), 0.0)).to_spectral();
        let fp = dealias(&f).unwrap().to_physical();
        let hp = dealias(&h).unwrap().to_physical();
        let prod: Vec<Complex64> = fp
            .values()
            .iter()
            .zip(hp.values())
            .map(|(a, b)| a * b)
            .collect();
        let prod = dealias(
            &ComplexField::new(coarse.clone(), prod, Representation::Physical)
                .unwrap()
                .to_spectral(),
        )
        .unwrap();
        // both factors exceed n/3 and vanish after projection
        assert!(prod.values().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn boundary_mass_of_localized_and_flat_fields() {
        let g = make_grid(256, 80.0).unwrap();
        let bump = ComplexField::from_fn(g.clone(), |x| c(1.0 / x.cosh(), 0.0));
        assert!(boundary_mass_fraction(&bump) < 1e-8);
        let flat = ComplexField::from_fn(g.clone(), |_| c(1.0, 0.0));
        let frac = boundary_mass_fraction(&flat);
        assert!((frac - BOUNDARY_BAND).abs() < 2.0 / 256.0);
    }
}
