//! Declarative experiment definitions in TOML.

use std::f64::consts::E;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{CoupledParams, NlsParams, SolveConfig};
use crate::error::{Error, Result};
use crate::estimates::Mode;
use crate::experiments::StrichartzOrder;
use crate::spectral::{make_grid, Field, Grid, Point, Region, Side};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
}

/// Equation parameters and time stepping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k11: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k12: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k22: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub harmonic: bool,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

/// Initial-data presets. `boost` multiplies by `e^{iβ·x}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum Preset {
    Zero,
    /// `amp · e^{−|x−c|²/width²} · e^{iβ·x}`.
    Gaussian {
        amp: f64,
        #[serde(default = "unit")]
        width: f64,
        #[serde(default)]
        center: Point,
        #[serde(default)]
        boost: Point,
    },
    /// `amp · e^{1 − 1/(1−r²)}` for `r = |x−c|/radius < 1`, zero outside.
    Smoothbump {
        amp: f64,
        #[serde(default = "unit")]
        radius: f64,
        #[serde(default)]
        center: Point,
    },
    Sum {
        parts: Vec<Preset>,
    },
}

impl Preset {
    fn value(&self, x: Point) -> Complex64 {
        match self {
            Preset::Zero => Complex64::new(0.0, 0.0),
            Preset::Gaussian { amp, width, center, boost } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                Complex64::from_polar(amp * (-r2 / (width * width)).exp(), boost[0] * x[0] + boost[1] * x[1])
            }
            Preset::Smoothbump { amp, radius, center } => {
                let r2 = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)) / (radius * radius);
                if r2 < 1.0 {
                    Complex64::new(amp * E * (-1.0 / (1.0 - r2)).exp(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Preset::Sum { parts } => parts.iter().map(|p| p.value(x)).sum(),
        }
    }

    pub fn build(&self, grid: &Grid) -> Field {
        Field::from_fn(grid, |x| self.value(x))
    }

    fn diagnose(&self, name: &str, dim: usize, out: &mut Vec<String>) {
        let center_ok = |c: &Point| dim == 2 || c[1] == 0.0;
        match self {
            Preset::Zero => {}
            Preset::Gaussian { amp, width, center, boost } => {
                if !amp.is_finite() || !(*width > 0.0) || !width.is_finite() {
                    out.push(format!("{name}: gaussian needs finite amp and positive width"));
                }
                if !center_ok(center) || !center_ok(boost) {
                    out.push(format!("{name}: second coordinates must be 0 in one dimension"));
                }
            }
            Preset::Smoothbump { amp, radius, center } => {
                if !amp.is_finite() || !(*radius > 0.0) || !radius.is_finite() {
                    out.push(format!("{name}: smoothbump needs finite amp and positive radius"));
                }
                if !center_ok(center) {
                    out.push(format!("{name}: second coordinates must be 0 in one dimension"));
                }
            }
            Preset::Sum { parts } => {
                if parts.is_empty() {
                    out.push(format!("{name}: sum needs at least one part"));
                }
                for (i, p) in parts.iter().enumerate() {
                    p.diagnose(&format!("{name}.parts[{i}]"), dim, out);
                }
            }
        }
    }
}

/// A datum; `second` is the second component for coupled runs (zero if absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    #[serde(flatten)]
    pub first: Preset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<Preset>,
}

impl InitialData {
    pub fn zero() -> Self {
        InitialData { first: Preset::Zero, second: None }
    }

    pub fn build(&self, grid: &Grid) -> Field {
        self.first.build(grid)
    }

    pub fn build_pair(&self, grid: &Grid) -> [Field; 2] {
        [self.first.build(grid), self.second.as_ref().unwrap_or(&Preset::Zero).build(grid)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Translation distances (concatenation) or separations (interaction).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distances: Vec<f64>,
    /// Sobolev order `s ∈ [0, 1]` of the extra difference norm.
    #[serde(default)]
    pub order: f64,
    #[serde(default = "default_eps_target")]
    pub eps_target: f64,
    /// Rescale `w₀` to `‖w₀‖_{H¹} = w0_scale · ‖u₀‖_{H¹}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0_scale: Option<f64>,
    /// Number of copies for spread data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copies: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Start of the tail window for the decay proxy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_start: Option<f64>,
}

fn default_eps_target() -> f64 {
    1e-2
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            distances: Vec::new(),
            order: 0.0,
            eps_target: default_eps_target(),
            w0_scale: None,
            copies: None,
            spacing: None,
            tail_start: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_shell_tol")]
    pub shell_mass_tol: f64,
    #[serde(default = "default_blowup_factor")]
    pub gradient_blowup_factor: f64,
    #[serde(default = "default_guard")]
    pub resolution_guard: f64,
    /// Margin tolerance relative to `‖u₀‖₂`.
    #[serde(default = "default_margin_tol")]
    pub margin_tol: f64,
    /// Relative tolerance of the Virial identity in the resolved window.
    #[serde(default = "default_virial_tol")]
    pub virial_tol: f64,
    /// Gagliardo–Nirenberg constant; calibrated on the grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_gn: Option<f64>,
    #[serde(default = "default_bound_m")]
    pub bound_m: f64,
    #[serde(default = "default_tail_eps")]
    pub tail_eps: f64,
}

fn default_shell_tol() -> f64 {
    1e-8
}
fn default_blowup_factor() -> f64 {
    1e3
}
fn default_guard() -> f64 {
    0.25
}
fn default_margin_tol() -> f64 {
    1e-6
}
fn default_virial_tol() -> f64 {
    1e-5
}
fn default_bound_m() -> f64 {
    10.0
}
fn default_tail_eps() -> f64 {
    1.0
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            shell_mass_tol: default_shell_tol(),
            gradient_blowup_factor: default_blowup_factor(),
            resolution_guard: default_guard(),
            margin_tol: default_margin_tol(),
            virial_tol: default_virial_tol(),
            c_gn: None,
            bound_m: default_bound_m(),
            tail_eps: default_tail_eps(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    HalfSpace { axis: usize, side: Side, offset: f64 },
    Ball { center: Point, radius: f64 },
    Complement { inner: Box<RegionSpec> },
    Dilation { inner: Box<RegionSpec>, radius: f64 },
}

impl RegionSpec {
    pub fn build(&self) -> Result<Region> {
        match self {
            RegionSpec::HalfSpace { axis, side, offset } => Region::half_space(*axis, *side, *offset),
            RegionSpec::Ball { center, radius } => Region::ball(*center, *radius),
            RegionSpec::Complement { inner } => Ok(inner.build()?.complement()),
            RegionSpec::Dilation { inner, radius } => inner.build()?.dilate(*radius),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    Supported,
    General,
}

impl From<ModeSpec> for Mode {
    fn from(m: ModeSpec) -> Mode {
        match m {
            ModeSpec::Supported => Mode::Supported,
            ModeSpec::General => Mode::General,
        }
    }
}

/// Regions and options for the disturbance and scattering checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSpec {
    /// Source region `A`.
    pub a: RegionSpec,
    /// Observation region `B`; a frequency region for the scattering check.
    pub b: RegionSpec,
    #[serde(default = "default_mode")]
    pub mode: ModeSpec,
    /// Galilean boost speeds along `boost_direction`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boosts: Vec<f64>,
    #[serde(default = "default_direction")]
    pub boost_direction: Point,
    /// Also run the `L^{σ+2}` check.
    #[serde(default)]
    pub lp: bool,
    /// Cone aperture for the cone-mass check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

fn default_mode() -> ModeSpec {
    ModeSpec::Supported
}

fn default_direction() -> Point {
    [1.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub params: ParamsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_u: Option<InitialData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_v: Option<InitialData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_w: Option<InitialData>,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateSpec>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn build_grid(&self) -> Result<Grid> {
        make_grid(self.grid.dim, self.grid.half_width, self.grid.points).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn nls(&self) -> Result<NlsParams> {
        let p = &self.params;
        match (p.lambda, p.sigma) {
            (Some(l), Some(s)) => NlsParams::new(l, s).map_err(|e| Error::Config(e.to_string())),
            _ => Err(Error::Config("[params] needs lambda and sigma".into())),
        }
    }

    pub fn coupled(&self) -> Result<CoupledParams> {
        let p = &self.params;
        match (p.k11, p.k12, p.k22, p.p) {
            (Some(a), Some(b), Some(c), Some(q)) => {
                CoupledParams::new(a, b, c, q).map_err(|e| Error::Config(e.to_string()))
            }
            _ => Err(Error::Config("[params] needs k11, k12, k22 and p".into())),
        }
    }

    pub fn solve(&self) -> Result<SolveConfig> {
        let t = &self.thresholds;
        let cfg = SolveConfig {
            dt: self.params.dt,
            horizon: self.params.horizon,
            snapshot_stride: self.params.stride,
            gradient_blowup_factor: t.gradient_blowup_factor,
            outer_shell_mass_tol: t.shell_mass_tol,
            resolution_guard: t.resolution_guard,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn order(&self) -> Result<StrichartzOrder> {
        StrichartzOrder::from_order(self.sweep.order).map_err(|e| Error::Config(e.to_string()))
    }

    /// Datum of a section, or an error naming the missing section.
    pub fn datum(&self, which: &str) -> Result<&InitialData> {
        let d = match which {
            "initial_u" => &self.initial_u,
            "initial_v" => &self.initial_v,
            "initial_w" => &self.initial_w,
            _ => &None,
        };
        d.as_ref().ok_or_else(|| Error::Config(format!("missing [{which}] section")))
    }

    pub fn estimate(&self) -> Result<&EstimateSpec> {
        self.estimate.as_ref().ok_or_else(|| Error::Config("missing [estimate] section".into()))
    }

    /// Every problem found in the config; empty when it is usable.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut note = |r: Result<()>| {
            if let Err(e) = r {
                out.push(e.to_string());
            }
        };
        note(self.build_grid().map(drop));
        note(self.solve().map(drop));
        note(self.order().map(drop));
        let p = &self.params;
        if p.lambda.is_some() || p.sigma.is_some() {
            note(self.nls().map(drop));
        }
        if [p.k11, p.k12, p.k22, p.p].iter().any(Option::is_some) {
            note(self.coupled().map(drop));
        }
        if p.lambda.is_none() && p.k11.is_none() && p.k12.is_none() {
            out.push("config: [params] defines neither a single equation nor a coupled system".into());
        }
        if self.sweep.distances.windows(2).any(|w| w[1] <= w[0]) || self.sweep.distances.iter().any(|d| !(*d >= 0.0)) {
            out.push("config: [sweep] distances must be nonnegative and increasing".into());
        }
        if !(self.sweep.eps_target >= 0.0) {
            out.push("config: [sweep] eps_target must be >= 0".into());
        }
        if self.sweep.copies == Some(0) {
            out.push("config: [sweep] copies must be >= 1".into());
        }
        if let Some(e) = &self.estimate {
            for (name, r) in [("a", &e.a), ("b", &e.b)] {
                if let Err(err) = r.build() {
                    out.push(format!("config: [estimate] {name}: {err}"));
                }
            }
        }
        let dim = self.grid.dim;
        for (name, d) in [("initial_u", &self.initial_u), ("initial_v", &self.initial_v), ("initial_w", &self.initial_w)] {
            if let Some(d) = d {
                let mut found = Vec::new();
                d.first.diagnose(name, dim, &mut found);
                if let Some(s) = &d.second {
                    s.diagnose(&format!("{name}.second"), dim, &mut found);
                }
                out.extend(found.into_iter().map(|m| format!("config: {m}")));
            }
        }
        out
    }
}
