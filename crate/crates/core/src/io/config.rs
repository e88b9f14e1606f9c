//! TOML run configuration.
//!
//! Every key is optional. An empty document describes the reference soliton
//! experiment: Benney coefficients `α = 1, λ = 1, β = −1`, the wave `c = 1,
//! w = 1`, grid `n = 1024, L = 64π`, `T = 1`, `h = 10⁻³`, `save_every = 2` and
//! the ε ladder `2⁻², …, 2⁻⁷`.
//!
//! ```toml
//! [grid]
//! n = 1024
//! length = "64pi"       # a number, or "<k>pi"
//!
//! [model]
//! kind = "benney"       # benney | gbenney | zakharov | zr | nls
//! epsilon = 0.25        # single run
//! epsilon_list = [0.25, 0.125, 0.0625, 0.03125]
//! alpha = 1.0
//! lambda = 1.0
//! beta = -1.0
//!
//! [time]
//! T = 1.0
//! h = 0.001
//! save_every = 2
//!
//! [initial]
//! kind = "wave"         # wave | sech | gaussian | custom-file
//! c = 1.0
//! w = 1.0
//! compatible = true
//!
//! [output]
//! directory = "out"
//! emit_svg = true
//! ```
//!
//! Model keys by kind:
//!
//! * `benney`: `alpha`, `lambda`, `beta`, `beta_scale`.
//! * `gbenney`: as `benney`, plus `tau` and the optional second channel
//!   `alpha_z`, `lambda_z`, `beta_z`.
//! * `zakharov`: no coefficients.
//! * `zr`: `a`, `b`, `c` (required), `k` (default 1), `cubic = "bare" | "scaled"`.
//! * `nls`: `gamma` (required); no ε.
//!
//! Initial keys: `c`, `w` for waves; `amplitude`, `width`, `center`,
//! `velocity` for sech and gaussian profiles; `path` to a snapshot file for
//! `custom-file`, whose `u` channel is used.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{SweepConfig, SweepData};
use crate::initial_data::{benney_amplitude, gaussian_profile, sech_profile, TravelingWaveSpec};
use crate::integrators::{step_count, StepConfig, SubstepOrder};
use crate::io::snapshot::read_snapshot;
use crate::models::{
    check_epsilon, zakharov_instance, zr_instance, GBenneyParams, NlsParams, TransportCoupling,
    ZrCubic, ZrParams,
};
use crate::spectral::{make_grid, ComplexField, Grid};

pub const DEFAULT_N: usize = 1024;
pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_H: f64 = 1e-3;
pub const DEFAULT_SAVE_EVERY: usize = 2;
pub const DEFAULT_EPSILON: f64 = 0.25;

/// `2⁻², …, 2⁻⁷`.
pub fn default_epsilon_list() -> Vec<f64> {
    (2..=7).map(|j| 2f64.powi(-j)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Domain length: a number or a multiple of π written as `"<k>pi"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Length {
    Value(f64),
    Expr(String),
}

impl Default for Length {
    fn default() -> Self {
        Length::Expr("64pi".into())
    }
}

impl Length {
    pub fn value(&self) -> Result<f64> {
        match self {
            Length::Value(x) => Ok(*x),
            Length::Expr(s) => {
                let t = s.trim().to_ascii_lowercase().replace(' ', "");
                let coeff = t
                    .strip_suffix("pi")
                    .map(|k| k.strip_suffix('*').unwrap_or(k))
                    .ok_or_else(|| Error::param(format!("cannot read length {s:?}")))?;
                let k = if coeff.is_empty() {
                    1.0
                } else {
                    coeff
                        .parse::<f64>()
                        .map_err(|_| Error::param(format!("cannot read length {s:?}")))?
                };
                Ok(k * PI)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub length: Length,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n: DEFAULT_N,
            length: Length::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Benney,
    GBenney,
    Zakharov,
    Zr,
    Nls,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_z: Option<f64>,
    /// `β(ε) = beta_scale · ε³ λ²` for the v channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubic: Option<ZrCubic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(rename = "T", alias = "t_end", default = "default_t")]
    pub t_end: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_save_every")]
    pub save_every: usize,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default)]
    pub order: SubstepOrder,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            t_end: DEFAULT_T,
            h: DEFAULT_H,
            save_every: DEFAULT_SAVE_EVERY,
            dealias: true,
            order: SubstepOrder::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Wave,
    Sech,
    Gaussian,
    CustomFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// Defaults to `wave` for single-channel models and `sech` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<InitialKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default = "yes")]
    pub compatible: bool,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            kind: None,
            c: None,
            w: None,
            amplitude: None,
            width: None,
            center: None,
            velocity: None,
            path: None,
            compatible: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "yes")]
    pub emit_svg: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: default_directory(),
            emit_svg: true,
        }
    }
}

fn default_n() -> usize {
    DEFAULT_N
}
fn default_t() -> f64 {
    DEFAULT_T
}
fn default_h() -> f64 {
    DEFAULT_H
}
fn default_save_every() -> usize {
    DEFAULT_SAVE_EVERY
}
fn default_directory() -> PathBuf {
    PathBuf::from("out")
}
fn yes() -> bool {
    true
}

/// 1-based line of `key` inside `[table]`, or of the table header when the
/// key is absent.
fn locate(text: &str, table: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.split(']').next()) {
            current = name.trim().to_string();
            if current == table {
                header = Some(i + 1);
            }
            continue;
        }
        if current != table {
            continue;
        }
        if let (Some(k), Some((lhs, _))) = (key, t.split_once('=')) {
            if lhs.trim().trim_matches('"') == k {
                return Some(i + 1);
            }
        }
    }
    header
}

fn byte_line(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
        location: match e.span() {
            Some(span) => format!("line {}", byte_line(text, span.start)),
            None => "document".into(),
        },
        message: e.message().trim().to_string(),
    })?;
    cfg.resolve().map_err(|(path, err)| {
        let (table, key) = match path.split_once('.') {
            Some((t, k)) => (t, Some(k)),
            None => (path.as_str(), None),
        };
        let location = match locate(text, table, key) {
            Some(line) => format!("line {line}, {path}"),
            None => path.clone(),
        };
        Error::Config {
            location,
            message: err.to_string(),
        }
    })?;
    Ok(cfg)
}

/// [`parse_config`] on a file; diagnostics are prefixed with the path.
/// A relative `initial.path` is taken relative to the file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text).map_err(|e| prefix(path, e))?;
    if let Some(p) = cfg.initial.path.as_mut() {
        if p.is_relative() {
            *p = path.parent().unwrap_or(Path::new("")).join(&*p);
        }
    }
    Ok(cfg)
}

fn prefix(path: &Path, e: Error) -> Error {
    match e {
        Error::Config { location, message } => Error::Config {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    }
}

type Check<T> = std::result::Result<T, (String, Error)>;

fn at<T>(key: &str, r: Result<T>) -> Check<T> {
    r.map_err(|e| (key.to_string(), e))
}

fn invalid(key: &str, msg: impl Into<String>) -> (String, Error) {
    (key.to_string(), Error::param(msg))
}

fn forbid(key: &str, set: bool, kind: &str) -> Check<()> {
    if set {
        Err(invalid(key, format!("not used by {kind}")))
    } else {
        Ok(())
    }
}

impl RunConfig {
    /// Serialize with every default written out; [`parse_config`] reads the
    /// output back to an equal value.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    /// Fill kind-dependent defaults and check every downstream precondition.
    fn resolve(&mut self) -> Check<()> {
        let grid = at("grid.n", make_grid(self.grid.n, 1.0))
            .and_then(|_| at("grid.length", self.grid.length.value()))
            .and_then(|len| at("grid.length", make_grid(self.grid.n, len)))?;
        self.resolve_model()?;
        self.resolve_time()?;
        self.resolve_initial(&grid)?;
        Ok(())
    }

    fn resolve_model(&mut self) -> Check<()> {
        let m = &mut self.model;
        let kind = m.kind;
        let name = format!("model kind {kind:?}").to_lowercase();
        let zr_keys = [
            ("model.a", m.a),
            ("model.b", m.b),
            ("model.c", m.c),
            ("model.k", m.k),
        ];
        let z_keys = [
            ("model.alpha_z", m.alpha_z),
            ("model.lambda_z", m.lambda_z),
            ("model.beta_z", m.beta_z),
        ];
        let v_keys = [
            ("model.alpha", m.alpha),
            ("model.lambda", m.lambda),
            ("model.beta", m.beta),
        ];

        if kind == ModelKind::Nls {
            forbid("model.epsilon", m.epsilon.is_some(), &name)?;
            forbid("model.epsilon_list", m.epsilon_list.is_some(), &name)?;
        } else {
            let eps = *m.epsilon.get_or_insert(DEFAULT_EPSILON);
            at("model.epsilon", check_epsilon(eps))?;
            let list = m.epsilon_list.get_or_insert_with(default_epsilon_list);
            for &e in list.iter() {
                at("model.epsilon_list", check_epsilon(e))?;
            }
        }
        if kind != ModelKind::Zr {
            for (key, v) in zr_keys {
                forbid(key, v.is_some(), &name)?;
            }
            forbid("model.cubic", m.cubic.is_some(), &name)?;
        }
        if kind != ModelKind::GBenney {
            for (key, v) in z_keys {
                forbid(key, v.is_some(), &name)?;
            }
        }
        if !matches!(kind, ModelKind::Benney | ModelKind::GBenney) {
            for (key, v) in v_keys {
                forbid(key, v.is_some(), &name)?;
            }
            forbid("model.beta_scale", m.beta_scale.is_some(), &name)?;
        }
        if kind != ModelKind::GBenney {
            forbid("model.tau", m.tau.is_some(), &name)?;
        }
        if kind != ModelKind::Nls {
            forbid("model.gamma", m.gamma.is_some(), &name)?;
        }

        match kind {
            ModelKind::Benney | ModelKind::GBenney => {
                m.alpha.get_or_insert(1.0);
                m.lambda.get_or_insert(1.0);
                m.beta.get_or_insert(-1.0);
                if kind == ModelKind::GBenney {
                    m.tau.get_or_insert(0.0);
                    let set = z_keys.iter().filter(|(_, v)| v.is_some()).count();
                    if set != 0 && set != 3 {
                        return Err(invalid(
                            "model.alpha_z",
                            "the second channel needs alpha_z, lambda_z and beta_z together",
                        ));
                    }
                }
                if let Some(c) = m.beta_scale {
                    if !(c.is_finite() && c != 0.0) {
                        return Err(invalid("model.beta_scale", "must be finite and nonzero"));
                    }
                }
            }
            ModelKind::Zr => {
                for (key, v) in &zr_keys[..3] {
                    if v.is_none() {
                        return Err(invalid(key, "required for the ZR model"));
                    }
                }
                m.k.get_or_insert(1.0);
                m.cubic.get_or_insert(ZrCubic::Bare);
            }
            ModelKind::Nls => {
                if m.gamma.is_none() {
                    return Err(invalid("model.gamma", "required for the NLS model"));
                }
            }
            ModelKind::Zakharov => {}
        }
        if kind != ModelKind::Nls {
            let eps = self.model.epsilon.unwrap_or(DEFAULT_EPSILON);
            at("model", self.params(eps))?;
            for &e in self.model.epsilon_list.iter().flatten() {
                at("model", self.params(e))?;
            }
        } else {
            let g = self.model.gamma.unwrap_or_default();
            if !g.is_finite() {
                return Err(invalid("model.gamma", "must be finite"));
            }
        }
        Ok(())
    }

    fn resolve_time(&mut self) -> Check<()> {
        let t = &self.time;
        at("time.h", self.step())?;
        if !(t.t_end.is_finite() && t.t_end > 0.0) {
            return Err(invalid(
                "time.T",
                format!("must be positive, got {}", t.t_end),
            ));
        }
        at(
            "time.save_every",
            step_count(t.t_end, t.h, t.save_every).map(|_| ()),
        )
    }

    fn resolve_initial(&mut self, grid: &Arc<Grid>) -> Check<()> {
        let two_channel = matches!(self.model.kind, ModelKind::Zakharov | ModelKind::Zr)
            || self.model.alpha_z.is_some();
        let i = &mut self.initial;
        let kind = *i.kind.get_or_insert(if two_channel {
            InitialKind::Sech
        } else {
            InitialKind::Wave
        });
        let wave_keys = [("initial.c", i.c), ("initial.w", i.w)];
        let profile_keys = [
            ("initial.amplitude", i.amplitude),
            ("initial.width", i.width),
            ("initial.center", i.center),
            ("initial.velocity", i.velocity),
        ];
        let name = format!("initial kind {kind:?}").to_lowercase();
        if kind != InitialKind::Wave {
            for (key, v) in wave_keys {
                forbid(key, v.is_some(), &name)?;
            }
        }
        if !matches!(kind, InitialKind::Sech | InitialKind::Gaussian) {
            for (key, v) in profile_keys {
                forbid(key, v.is_some(), &name)?;
            }
        }
        if kind != InitialKind::CustomFile {
            forbid("initial.path", i.path.is_some(), &name)?;
        }
        match kind {
            InitialKind::Wave => {
                if two_channel {
                    return Err(invalid(
                        "initial.kind",
                        "wave data needs a single transport channel",
                    ));
                }
                i.c.get_or_insert(1.0);
                i.w.get_or_insert(1.0);
            }
            InitialKind::Sech | InitialKind::Gaussian => {
                i.amplitude.get_or_insert(1.0);
                i.width.get_or_insert(1.0);
                i.center.get_or_insert(0.0);
                i.velocity.get_or_insert(0.0);
            }
            InitialKind::CustomFile => {
                if i.path.is_none() {
                    return Err(invalid("initial.path", "required for custom-file data"));
                }
            }
        }
        if kind == InitialKind::Wave {
            let spec = at("initial", self.wave_spec())?;
            let coupling = self.wave_coupling();
            if self.model.kind != ModelKind::Nls {
                let eps = self.model.epsilon.unwrap_or(DEFAULT_EPSILON);
                for e in
                    std::iter::once(eps).chain(self.model.epsilon_list.iter().flatten().copied())
                {
                    let p = at("model", self.params(e))?;
                    at("initial", benney_amplitude(&spec, &p.v, e))?;
                }
            } else {
                at("initial", crate::initial_data::nls_amplitude(&coupling))?;
            }
        } else if kind != InitialKind::CustomFile {
            at("initial.width", self.initial_u(grid).map(|_| ()))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        make_grid(self.grid.n, self.grid.length.value()?)
    }

    pub fn step(&self) -> Result<StepConfig> {
        let s = StepConfig {
            h: self.time.h,
            dealias: self.time.dealias,
            order: self.time.order,
        };
        s.validate()?;
        Ok(s)
    }

    /// Model coefficients at `epsilon`; `None` for the NLS kind.
    pub fn params(&self, epsilon: f64) -> Result<GBenneyParams> {
        let m = &self.model;
        let num = |v: Option<f64>| v.unwrap_or_default();
        let mut p = match m.kind {
            ModelKind::Benney => {
                GBenneyParams::benney(num(m.alpha), num(m.lambda), num(m.beta), epsilon)?
            }
            ModelKind::GBenney => GBenneyParams::new(
                num(m.tau),
                TransportCoupling::new(num(m.alpha), num(m.lambda), num(m.beta)),
                m.alpha_z
                    .map(|a| TransportCoupling::new(a, num(m.lambda_z), num(m.beta_z))),
                epsilon,
            )?,
            ModelKind::Zakharov => zakharov_instance(epsilon)?,
            ModelKind::Zr => zr_instance(&ZrParams {
                a: num(m.a),
                b: num(m.b),
                c: num(m.c),
                k: m.k.unwrap_or(1.0),
                epsilon,
                cubic: m.cubic.unwrap_or_default(),
            })?,
            ModelKind::Nls => return Err(Error::param("the NLS model has no ε")),
        };
        if let Some(c) = m.beta_scale {
            p.v.beta = c * epsilon.powi(3) * p.v.lambda * p.v.lambda;
            p.validate()?;
        }
        Ok(p)
    }

    pub fn nls(&self) -> Option<NlsParams> {
        match self.model.kind {
            ModelKind::Nls => self.model.gamma.map(|gamma| NlsParams { gamma }),
            _ => None,
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.model.epsilon
    }

    pub fn epsilon_list(&self) -> Vec<f64> {
        self.model.epsilon_list.clone().unwrap_or_default()
    }

    pub fn initial_kind(&self) -> InitialKind {
        self.initial.kind.unwrap_or(InitialKind::Wave)
    }

    pub fn wave_spec(&self) -> Result<TravelingWaveSpec> {
        TravelingWaveSpec::new(self.initial.c.unwrap_or(1.0), self.initial.w.unwrap_or(1.0))
    }

    /// Transport coupling of the wave: the v channel, or `(γ, 1, 1)` for the
    /// NLS kind so that `αβ/λ = γ`.
    pub fn wave_coupling(&self) -> TransportCoupling {
        match self.model.kind {
            ModelKind::Nls => {
                TransportCoupling::new(self.model.gamma.unwrap_or_default(), 1.0, 1.0)
            }
            _ => TransportCoupling::new(
                self.model.alpha.unwrap_or(1.0),
                self.model.lambda.unwrap_or(1.0),
                self.model.beta.unwrap_or(-1.0),
            ),
        }
    }

    /// Profile `u₀` for sech, gaussian and custom-file data.
    pub fn initial_u(&self, grid: &Arc<Grid>) -> Result<ComplexField> {
        let i = &self.initial;
        let (a, w, x0, c) = (
            i.amplitude.unwrap_or(1.0),
            i.width.unwrap_or(1.0),
            i.center.unwrap_or(0.0),
            i.velocity.unwrap_or(0.0),
        );
        match self.initial_kind() {
            InitialKind::Sech => sech_profile(a, w, x0, c, grid),
            InitialKind::Gaussian => gaussian_profile(a, w, x0, c, grid),
            InitialKind::CustomFile => {
                let path = i
                    .path
                    .as_deref()
                    .ok_or_else(|| Error::param("custom-file data needs initial.path"))?;
                let snap = read_snapshot(path)?;
                if *snap.grid != **grid {
                    return Err(Error::Format {
                        path: path.to_path_buf(),
                        message: format!(
                            "snapshot grid (n = {}, L = {}) differs from the configured grid",
                            snap.grid.n(),
                            snap.grid.length()
                        ),
                    });
                }
                snap.u.ok_or_else(|| Error::Format {
                    path: path.to_path_buf(),
                    message: "snapshot has no u channel".into(),
                })
            }
            InitialKind::Wave => Err(Error::param("wave data is built per ε")),
        }
    }

    fn sweep_data(&self, grid: &Arc<Grid>) -> Result<SweepData> {
        if self.model.kind == ModelKind::Zakharov {
            return Ok(SweepData::Zakharov {
                u0: self.initial_u(grid)?,
            });
        }
        Ok(match self.initial_kind() {
            InitialKind::Wave => SweepData::Wave {
                spec: self.wave_spec()?,
                compatible: self.initial.compatible,
            },
            _ => SweepData::Profile {
                u0: self.initial_u(grid)?,
                compatible: self.initial.compatible,
            },
        })
    }

    /// Sweep over `epsilon_list`, or over the single `epsilons` given.
    pub fn sweep_config_with(&self, epsilons: Vec<f64>) -> Result<SweepConfig> {
        if self.model.kind == ModelKind::Nls {
            return Err(Error::param("the NLS model has no ε to sweep"));
        }
        let grid = self.grid()?;
        let template = self.params(epsilons.first().copied().unwrap_or(DEFAULT_EPSILON))?;
        Ok(SweepConfig {
            data: self.sweep_data(&grid)?,
            grid,
            model: template,
            epsilons,
            t_end: self.time.t_end,
            step: self.step()?,
            save_every: self.time.save_every,
            beta_scale: self.model.beta_scale,
        })
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        self.sweep_config_with(self.epsilon_list())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_error(text: &str) -> (String, String) {
        match parse_config(text) {
            Err(Error::Config { location, message }) => (location, message),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_document_is_the_reference_experiment() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.grid.n, 1024);
        assert!((cfg.grid().unwrap().length() - 64.0 * PI).abs() < 1e-12);
        assert_eq!(cfg.model.kind, ModelKind::Benney);
        assert_eq!(cfg.epsilon_list(), default_epsilon_list());
        assert_eq!(
            (cfg.time.t_end, cfg.time.h, cfg.time.save_every),
            (1.0, 1e-3, 2)
        );
        assert_eq!(cfg.initial_kind(), InitialKind::Wave);
        let p = cfg.params(0.5).unwrap();
        assert_eq!((p.v.alpha, p.v.lambda, p.v.beta), (1.0, 1.0, -1.0));
        assert!(cfg.output.emit_svg);
    }

    #[test]
    fn epsilon_out_of_range_is_rejected_with_its_line() {
        let (loc, msg) = config_error("[grid]\nn = 64\n\n[model]\nepsilon = 1.5\n");
        assert_eq!(loc, "line 5, model.epsilon");
        assert!(msg.contains("1.5"), "{msg}");
    }

    #[test]
    fn unknown_key_is_named() {
        let (loc, msg) = config_error("[model]\nepsilonn = 0.5\n");
        assert_eq!(loc, "line 2");
        assert!(msg.contains("epsilonn"), "{msg}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let (loc, _) = config_error("[grid]\nn = 64\nlength = = 3\n");
        assert_eq!(loc, "line 3");
    }

    #[test]
    fn key_of_another_kind_is_rejected() {
        let (loc, msg) = config_error("[model]\nkind = \"zakharov\"\nalpha = 2.0\n");
        assert_eq!(loc, "line 3, model.alpha");
        assert!(msg.contains("zakharov"), "{msg}");
        let (loc, _) = config_error("[model]\nkind = \"zr\"\na = 1.0\n");
        assert!(loc.ends_with("model.b"), "{loc}");
    }

    #[test]
    fn step_must_divide_the_horizon() {
        let (loc, _) = config_error("[time]\nT = 1.0\nh = 0.001\nsave_every = 3\n");
        assert_eq!(loc, "line 4, time.save_every");
    }

    #[test]
    fn wave_preconditions_are_checked_per_epsilon() {
        // αβ/λ > 0 admits no wave.
        let (loc, _) = config_error("[model]\nbeta = 1.0\n");
        assert!(loc.contains("initial"), "{loc}");
    }

    #[test]
    fn lengths() {
        assert_eq!(Length::Value(3.0).value().unwrap(), 3.0);
        assert!((Length::Expr("2pi".into()).value().unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!((Length::Expr("pi".into()).value().unwrap() - PI).abs() < 1e-15);
        assert!((Length::Expr("64 * pi".into()).value().unwrap() - 64.0 * PI).abs() < 1e-12);
        assert!(Length::Expr("64".into()).value().is_err());
    }

    #[test]
    fn printed_config_round_trips() {
        let docs = [
            "",
            "[grid]\nn = 256\nlength = 40.0\n[model]\nkind = \"gbenney\"\ntau = 0.5\nalpha_z = 1.0\nlambda_z = -1.0\nbeta_z = 1.0\n",
            "[model]\nkind = \"zr\"\na = 0.5\nb = 2.0\nc = 1.0\ncubic = \"scaled\"\nk = 2.0\n[initial]\nkind = \"gaussian\"\nwidth = 2.0\n",
            "[model]\nkind = \"nls\"\ngamma = -1.0\n[time]\nT = 0.5\nh = 0.01\nsave_every = 5\norder = \"lagged\"\ndealias = false\n[output]\ndirectory = \"results\"\nemit_svg = false\n",
            "[model]\nkind = \"zakharov\"\nepsilon_list = [0.5, 0.25, 0.125, 0.0625]\n",
        ];
        for doc in docs {
            let cfg = parse_config(doc).unwrap();
            let printed = cfg.to_toml();
            let again = parse_config(&printed).unwrap();
            assert_eq!(cfg, again, "{printed}");
        }
    }

    #[test]
    fn nls_forbids_epsilon() {
        let (loc, _) = config_error("[model]\nkind = \"nls\"\ngamma = -1.0\nepsilon = 0.5\n");
        assert_eq!(loc, "line 4, model.epsilon");
    }

    #[test]
    fn zakharov_sweep_config() {
        let cfg =
            parse_config("[grid]\nn = 64\nlength = 20.0\n[model]\nkind = \"zakharov\"\n").unwrap();
        let s = cfg.sweep_config().unwrap();
        assert!(matches!(s.data, SweepData::Zakharov { .. }));
        assert_eq!(s.epsilons.len(), 6);
    }

    #[test]
    fn beta_scale_sets_the_forcing() {
        let cfg = parse_config(
            "[model]\nalpha = 1.0\nbeta = 1.0\nbeta_scale = 2.0\n[initial]\nkind = \"sech\"\n",
        )
        .unwrap();
        let p = cfg.params(0.5).unwrap();
        assert!((p.v.beta - 2.0 * 0.125).abs() < 1e-15);
    }
}
