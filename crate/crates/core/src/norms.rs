//! Discrete Lebesgue, Sobolev and mixed space-time norms.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{schrodinger_step, ComplexField, Grid, RealField};

/// Borrowed view of either field kind.
#[derive(Clone, Copy, Debug)]
pub enum FieldRef<'a> {
    Complex(&'a ComplexField),
    Real(&'a RealField),
}

impl<'a> From<&'a ComplexField> for FieldRef<'a> {
    fn from(f: &'a ComplexField) -> Self {
        FieldRef::Complex(f)
    }
}

impl<'a> From<&'a RealField> for FieldRef<'a> {
    fn from(f: &'a RealField) -> Self {
        FieldRef::Real(f)
    }
}

impl FieldRef<'_> {
    pub fn grid(&self) -> &Arc<Grid> {
        match self {
            FieldRef::Complex(f) => f.grid(),
            FieldRef::Real(f) => f.grid(),
        }
    }

    fn abs_values(&self) -> Vec<f64> {
        match self {
            FieldRef::Complex(f) => f.to_physical().values().iter().map(|z| z.norm()).collect(),
            FieldRef::Real(f) => f.values().iter().map(|x| x.abs()).collect(),
        }
    }

    fn spectral(&self) -> ComplexField {
        match self {
            FieldRef::Complex(f) => f.to_spectral(),
            FieldRef::Real(f) => f.to_spectral(),
        }
    }
}

/// `(dx Σ |f_j|^q)^{1/q}`, or `max |f_j|` for `q = ∞`.
pub fn lq_norm<'a>(f: impl Into<FieldRef<'a>>, q: f64) -> Result<f64> {
    let f = f.into();
    if q.is_nan() || q < 1.0 {
        return Err(Error::param(format!(
            "Lebesgue exponent must be >= 1, got {q}"
        )));
    }
    let abs = f.abs_values();
    if q.is_infinite() {
        return Ok(abs.iter().copied().fold(0.0, f64::max));
    }
    let dx = f.grid().dx();
    let sum: f64 = if q == 2.0 {
        abs.iter().map(|a| a * a).sum()
    } else {
        abs.iter().map(|a| a.powf(q)).sum()
    };
    Ok((dx * sum).powf(1.0 / q))
}

/// `(L Σ_m (1+k_m²)^s |c_m|²)^{1/2}`.
pub fn hs_norm<'a>(f: impl Into<FieldRef<'a>>, s: f64) -> f64 {
    let f = f.into();
    let grid = f.grid().clone();
    let spec = f.spectral();
    let sum: f64 = spec
        .values()
        .iter()
        .zip(grid.wavenumbers())
        .map(|(c, &k)| (1.0 + k * k).powf(s) * c.norm_sqr())
        .sum();
    (grid.length() * sum).sqrt()
}

/// Access to the grid a state lives on.
pub trait HasGrid {
    fn grid(&self) -> &Arc<Grid>;
}

impl HasGrid for ComplexField {
    fn grid(&self) -> &Arc<Grid> {
        ComplexField::grid(self)
    }
}

impl HasGrid for RealField {
    fn grid(&self) -> &Arc<Grid> {
        RealField::grid(self)
    }
}

/// Access to the Schrödinger component of a state.
pub trait HasU {
    fn u(&self) -> &ComplexField;
}

impl HasU for ComplexField {
    fn u(&self) -> &ComplexField {
        self
    }
}

/// Relative tolerance on the uniformity of snapshot spacing.
pub const SPACING_TOLERANCE: f64 = 1e-12;

/// Time-stamped snapshots with uniform spacing, all on one grid.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    times: Vec<f64>,
    states: Vec<S>,
}

impl<S: HasGrid> Trajectory<S> {
    pub fn new(times: Vec<f64>, states: Vec<S>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Trajectory("empty trajectory".into()));
        }
        if times.len() != states.len() {
            return Err(Error::Trajectory(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        if times.len() > 1 {
            let dt = times[1] - times[0];
            if !(dt > 0.0) {
                return Err(Error::Trajectory(
                    "times must be strictly increasing".into(),
                ));
            }
            for (j, w) in times.windows(2).enumerate() {
                let step = w[1] - w[0];
                if (step - dt).abs() > SPACING_TOLERANCE * dt.max(w[1].abs()) {
                    return Err(Error::Trajectory(format!(
                        "non-uniform spacing at snapshot {}: {step} vs {dt}",
                        j + 1
                    )));
                }
            }
        }
        let grid = states[0].grid();
        if states.iter().any(|s| **s.grid() != **grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Trajectory { times, states })
    }
}

impl<S> Trajectory<S> {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Snapshot spacing (zero for a single snapshot).
    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64
        } else {
            0.0
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<S>) {
        (self.times, self.states)
    }

    /// Same snapshots in reverse order, re-timed from zero.
    pub fn reversed(&self) -> Trajectory<S>
    where
        S: Clone,
    {
        let t_end = *self.times.last().expect("nonempty");
        Trajectory {
            times: self.times.iter().rev().map(|t| t_end - t).collect(),
            states: self.states.iter().rev().cloned().collect(),
        }
    }
}

/// Time-direction norm of sampled spatial norms: max for `p = ∞`, otherwise
/// trapezoidal `(Σ w_m n_m^p)^{1/p}`.
pub fn time_norm(values: &[f64], dt: f64, p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Trajectory("empty trajectory".into()));
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::param(format!("time exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().copied().fold(0.0, f64::max));
    }
    let last = values.len() - 1;
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let w = if m == 0 || m == last { 0.5 * dt } else { dt };
            w * v.powf(p)
        })
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// `‖f‖_{L^p_T L^q_x}` over the stored snapshots of `traj`.
pub fn mixed_norm<'a, S: 'a>(
    traj: &'a Trajectory<S>,
    select: impl Fn(&'a S) -> FieldRef<'a>,
    p: f64,
    q: f64,
) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::Trajectory("empty trajectory".into()));
    }
    let spatial = traj
        .states()
        .iter()
        .map(|s| lq_norm(select(s), q))
        .collect::<Result<Vec<_>>>()?;
    time_norm(&spatial, traj.dt(), p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissiblePair {
    pub p: f64,
    pub q: f64,
}

impl AdmissiblePair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if is_admissible(p, q) {
            Ok(AdmissiblePair { p, q })
        } else {
            Err(Error::param(format!(
                "({p}, {q}) is not an admissible pair"
            )))
        }
    }
}

/// `2/p = 1/2 - 1/q` with `q ∈ [2, ∞]`.
pub fn is_admissible(p: f64, q: f64) -> bool {
    if q.is_nan() || p.is_nan() || !(q >= 2.0) {
        return false;
    }
    (2.0 / p - (0.5 - 1.0 / q)).abs() <= 1e-12
}

/// `‖S(t)f‖_{L⁴_T L^∞_x} / ‖f‖_{L²}` sampled at `steps + 1` equispaced times
/// on `[0, t_end]`.
pub fn strichartz_ratio(f: &ComplexField, t_end: f64, steps: usize) -> Result<f64> {
    if steps == 0 || !(t_end > 0.0) {
        return Err(Error::param(
            "strichartz_ratio needs steps > 0 and t_end > 0",
        ));
    }
    let dt = t_end / steps as f64;
    let mut spec = f.to_spectral();
    let mut sup = Vec::with_capacity(steps + 1);
    sup.push(lq_norm(f, f64::INFINITY)?);
    for _ in 0..steps {
        spec = schrodinger_step(&spec, dt);
        sup.push(lq_norm(&spec.to_physical(), f64::INFINITY)?);
    }
    Ok(time_norm(&sup, dt, 4.0)? / lq_norm(f, 2.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random_complex(grid: &Arc<Grid>, rng: &mut StdRng) -> ComplexField {
        ComplexField::from_fn(grid.clone(), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn lq_basic_values() {
        let g = make_grid(64, 5.0).unwrap();
        let zero = RealField::zeros(g.clone());
        for q in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lq_norm(&zero, q).unwrap(), 0.0);
        }
        let one = RealField::from_fn(g.clone(), |_| 1.0);
        assert!((lq_norm(&one, 2.0).unwrap() - 5f64.sqrt()).abs() < 1e-14);
        assert!(lq_norm(&one, 0.5).is_err());

        let g = make_grid(2048, 80.0).unwrap();
        let sech = RealField::from_fn(g, |x| 1.0 / x.cosh());
        assert!((lq_norm(&sech, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn hs_basic_values() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let s = RealField::from_fn(g.clone(), f64::sin);
        assert!((hs_norm(&s, 1.0) - (2.0 * PI).sqrt()).abs() < 1e-12);

        let mut rng = StdRng::seed_from_u64(2);
        let f = random_complex(&g, &mut rng);
        let l2 = lq_norm(&f, 2.0).unwrap();
        assert!((hs_norm(&f, 0.0) - l2).abs() <= 1e-13 * l2);

        // expansion oracle for s = 2
        let spec = f.to_spectral();
        let sum: f64 = spec
            .values()
            .iter()
            .zip(g.wavenumbers())
            .map(|(c, &k)| (1.0 + 2.0 * k * k + k.powi(4)) * c.norm_sqr())
            .sum();
        let oracle = (g.length() * sum).sqrt();
        assert!((hs_norm(&f, 2.0) - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn admissibility() {
        assert!(is_admissible(f64::INFINITY, 2.0));
        assert!(is_admissible(4.0, f64::INFINITY));
        assert!(is_admissible(8.0, 4.0));
        assert!(!is_admissible(2.0, 2.0));
        assert!(!is_admissible(4.0, 1.0));
        assert!(AdmissiblePair::new(2.0, 2.0).is_err());
    }

    #[test]
    fn trajectory_validation() {
        let g = make_grid(8, 1.0).unwrap();
        let f = RealField::zeros(g.clone());
        assert!(Trajectory::<RealField>::new(vec![], vec![]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0, 3.0], vec![f.clone(); 3]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![f.clone(); 3]).is_err());
        let other = RealField::zeros(make_grid(16, 1.0).unwrap());
        assert!(matches!(
            Trajectory::new(vec![0.0, 1.0], vec![f.clone(), other]),
            Err(Error::GridMismatch)
        ));
        assert!(Trajectory::new(vec![0.0, 0.1, 0.2, 0.30000000000000004], vec![f; 4]).is_ok());
    }

    #[test]
    fn mixed_norm_examples() {
        let g = make_grid(16, 2.0).unwrap();
        let a = RealField::from_fn(g.clone(), |_| 1.0);
        let b = RealField::from_fn(g.clone(), |_| 3.0);
        let dt = 0.25;
        let traj = Trajectory::new(vec![0.0, dt], vec![a.clone(), b.clone()]).unwrap();
        let na = lq_norm(&a, 1.0).unwrap();
        let nb = lq_norm(&b, 1.0).unwrap();
        let p = 4.0 / 3.0;
        let expect = ((dt / 2.0) * (na.powf(p) + nb.powf(p))).powf(1.0 / p);
        let got = mixed_norm(&traj, FieldRef::from, p, 1.0).unwrap();
        assert!((got - expect).abs() < 1e-14);

        let still = Trajectory::new(vec![0.0, 1.0, 2.0], vec![b.clone(); 3]).unwrap();
        let sup = mixed_norm(&still, FieldRef::from, f64::INFINITY, 2.0).unwrap();
        assert_eq!(sup, lq_norm(&b, 2.0).unwrap());
    }

    #[test]
    fn free_evolution_preserves_l2_sup() {
        let g = make_grid(256, 40.0).unwrap();
        let u0 = ComplexField::from_fn(g.clone(), |x| Complex64::new((-x * x).exp(), 0.0));
        let dt = 0.05;
        let mut states = vec![u0.clone()];
        for _ in 0..20 {
            let next = schrodinger_step(states.last().unwrap(), dt);
            states.push(next);
        }
        let times = (0..=20).map(|j| j as f64 * dt).collect();
        let traj = Trajectory::new(times, states).unwrap();
        let sup = mixed_norm(&traj, FieldRef::from, f64::INFINITY, 2.0).unwrap();
        let l2 = lq_norm(&u0, 2.0).unwrap();
        assert!((sup - l2).abs() < 1e-10);
        let rev = mixed_norm(&traj.reversed(), FieldRef::from, f64::INFINITY, 2.0).unwrap();
        assert_eq!(sup, rev);
    }

    #[test]
    fn strichartz_ratio_is_bounded_across_samples() {
        let g = make_grid(128, 20.0).unwrap();
        let mut rng = StdRng::seed_from_u64(9);
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let x0 = rng.gen_range(-3.0..3.0);
            let w = rng.gen_range(0.5..2.0);
            let k = rng.gen_range(-2.0..2.0);
            let f = ComplexField::from_fn(g.clone(), |x| {
                Complex64::from_polar((-(x - x0).powi(2) / (w * w)).exp(), k * x)
            });
            let r = strichartz_ratio(&f, 1.0, 50).unwrap();
            assert!(r.is_finite() && r > 0.0);
            worst = worst.max(r);
        }
        assert!(worst < 10.0, "max ratio {worst}");
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::spectral::make_grid;
    use num_complex::Complex64;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn hs_norm_is_monotone_in_s(
            coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 32),
            s1 in -2.0f64..2.0,
            ds in 0.0f64..2.0,
        ) {
            let g = make_grid(32, 6.0).unwrap();
            let values = coeffs.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let f = ComplexField::new(g, values, crate::spectral::Representation::Physical).unwrap();
            let lo = hs_norm(&f, s1);
            let hi = hs_norm(&f, s1 + ds);
            prop_assert!(lo <= hi * (1.0 + 1e-14));
        }

        #[test]
        fn hs_zero_matches_l2(values in proptest::collection::vec(-5.0f64..5.0, 16)) {
            let g = make_grid(16, 3.0).unwrap();
            let f = RealField::new(g, values).unwrap();
            let a = hs_norm(&f, 0.0);
            let b = lq_norm(&f, 2.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-13 * b.max(1e-300));
        }
    }
}
