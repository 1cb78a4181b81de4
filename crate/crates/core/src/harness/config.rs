//! Flat `key = value` run configuration.
//!
//! Every key is listed in [`KEYS`]; unknown keys, malformed values and violated
//! constraints are all reported together with their line numbers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::collision::{CollisionConfig, SphereQuadrature};
use crate::error::{ConfigIssue, Result, VpbError};
use crate::params::PlasmaParams;
use crate::waves::{EulerParams, RarefactionWave, WaveState};

/// Experiment selected by the `experiment` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Relax,
    Kinetic,
    Fluid,
    Wave,
    Transport,
    Matrix,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Relax,
        Experiment::Kinetic,
        Experiment::Fluid,
        Experiment::Wave,
        Experiment::Transport,
        Experiment::Matrix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Relax => "relax",
            Experiment::Kinetic => "kinetic",
            Experiment::Fluid => "fluid",
            Experiment::Wave => "wave",
            Experiment::Transport => "transport",
            Experiment::Matrix => "matrix",
        }
    }

    fn uses_wave(self) -> bool {
        matches!(self, Experiment::Kinetic | Experiment::Fluid | Experiment::Wave)
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| {
            format!("unknown experiment '{s}' (expected relax, kinetic, fluid, wave, transport or matrix)")
        })
    }
}

/// Viscosity and heat-conduction source of the fluid experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    /// μ₀√θ, κ₀√θ with the configured constants.
    Sqrt,
    /// Constants recomputed from the linearized operator at `n_v`.
    Calibrated,
    Off,
}

impl FromStr for LawKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sqrt" => Ok(LawKind::Sqrt),
            "calibrated" => Ok(LawKind::Calibrated),
            "off" => Ok(LawKind::Off),
            _ => Err(format!("unknown transport law '{s}' (expected sqrt, calibrated or off)")),
        }
    }
}

impl LawKind {
    fn as_str(self) -> &'static str {
        match self {
            LawKind::Sqrt => "sqrt",
            LawKind::Calibrated => "calibrated",
            LawKind::Off => "off",
        }
    }
}

/// Rarefaction-wave keys as written. Without `n_plus` the wave is the
/// centred one of strength `delta_r`; with it, the left state is explicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveSpec {
    pub n_minus: f64,
    pub wave_a: Option<f64>,
    pub delta_r: Option<f64>,
    pub u_minus: Option<f64>,
    pub theta_minus: Option<f64>,
    pub n_plus: Option<f64>,
    pub u_plus: Option<f64>,
    pub theta_plus: Option<f64>,
}

/// A fully validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub experiment: Experiment,
    pub m_i: f64,
    pub m_e: f64,
    pub q_i: f64,
    pub q_e: f64,
    pub sigma: f64,
    pub seed: u64,
    pub out_dir: Option<String>,
    pub wave: WaveSpec,
    pub n_v: usize,
    pub sphere_polar: usize,
    pub sphere_azimuth: usize,
    pub n_x: usize,
    pub half_length: f64,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    pub diag_every: usize,
    pub diag_interval: f64,
    pub ion_n: f64,
    pub ion_u1: f64,
    pub ion_theta: f64,
    pub electron_n: f64,
    pub electron_u1: f64,
    pub electron_theta: f64,
    pub well_balanced: bool,
    pub transport: bool,
    pub field: bool,
    pub collisions: bool,
    pub budget_seconds: f64,
    pub theta_star: Option<f64>,
    pub eps0: f64,
    pub bump_center_i: f64,
    pub bump_center_e: f64,
    pub bump_width: f64,
    pub snapshot_times: Vec<f64>,
    pub transport_law: LawKind,
    pub mu0: f64,
    pub kappa0: f64,
    pub times: Vec<f64>,
    pub p_values: Vec<f64>,
    pub rate_times: Vec<f64>,
    pub theta_values: Vec<f64>,
    pub transport_u1: f64,
    pub q_ratios: Vec<f64>,
    pub mass_ratios: Vec<f64>,
    pub densities: Vec<f64>,
}

/// Every accepted key, in the order [`SimConfig::to_text`] writes them.
pub const KEYS: &[&str] = &[
    "experiment",
    "m_i",
    "m_e",
    "q_i",
    "q_e",
    "sigma",
    "seed",
    "out_dir",
    "n_minus",
    "wave_a",
    "delta_r",
    "u_minus",
    "theta_minus",
    "n_plus",
    "u_plus",
    "theta_plus",
    "n_v",
    "sphere_polar",
    "sphere_azimuth",
    "n_x",
    "half_length",
    "t0",
    "t_end",
    "dt",
    "steps",
    "diag_every",
    "diag_interval",
    "ion_n",
    "ion_u1",
    "ion_theta",
    "electron_n",
    "electron_u1",
    "electron_theta",
    "well_balanced",
    "transport",
    "field",
    "collisions",
    "budget_seconds",
    "theta_star",
    "eps0",
    "bump_center_i",
    "bump_center_e",
    "bump_width",
    "snapshot_times",
    "transport_law",
    "mu0",
    "kappa0",
    "times",
    "p_values",
    "rate_times",
    "theta_values",
    "transport_u1",
    "q_ratios",
    "mass_ratios",
    "densities",
];

/// √θ-law constants of the default plasma, from the linearized operator at N_v = 8.
pub const DEFAULT_MU0: f64 = 0.781_908_105_778_850_7;
pub const DEFAULT_KAPPA0: f64 = 0.617_659_040_144_267_2;

/// Ten log-spaced times in [10, 100].
pub fn default_rate_times() -> Vec<f64> {
    (0..10).map(|k| 10f64.powf(1.0 + k as f64 / 9.0)).collect()
}

/// Experiment-dependent defaults of the shared grid and time keys.
struct Defaults {
    n_x: usize,
    half_length: f64,
    t0: f64,
    t_end: f64,
    dt: f64,
    steps: usize,
}

fn defaults(e: Experiment) -> Defaults {
    match e {
        Experiment::Relax => Defaults { n_x: 1, half_length: 1.0, t0: 0.0, t_end: 0.0, dt: 0.0045, steps: 80 },
        Experiment::Kinetic => Defaults { n_x: 32, half_length: 10.0, t0: 1.0, t_end: 0.0, dt: 0.004, steps: 2 },
        Experiment::Fluid => Defaults { n_x: 400, half_length: 80.0, t0: 0.0, t_end: 150.0, dt: 0.0, steps: 0 },
        Experiment::Wave => Defaults { n_x: 401, half_length: 10.0, t0: 0.0, t_end: 0.0, dt: 0.0, steps: 0 },
        Experiment::Transport | Experiment::Matrix => {
            Defaults { n_x: 0, half_length: 0.0, t0: 0.0, t_end: 0.0, dt: 0.0, steps: 0 }
        }
    }
}

/// Typed access to the raw entries, collecting issues instead of stopping.
struct Reader {
    entries: BTreeMap<String, (usize, String)>,
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(l, _)| *l)
    }

    fn issue(&mut self, key: &str, reason: impl Into<String>) {
        let line = self.line(key);
        self.issues.push(ConfigIssue { line, key: key.into(), reason: reason.into() });
    }

    fn opt<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let (_, raw) = self.entries.get(key)?.clone();
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.issue(key, format!("expected {what}, got '{raw}'"));
                None
            }
        }
    }

    fn f64_opt(&mut self, key: &str) -> Option<f64> {
        let v = self.opt::<f64>(key, "a number")?;
        if v.is_finite() {
            Some(v)
        } else {
            self.issue(key, "value must be finite");
            None
        }
    }

    fn f64(&mut self, key: &str, default: f64) -> f64 {
        self.f64_opt(key).unwrap_or(default)
    }

    fn usize(&mut self, key: &str, default: usize) -> usize {
        self.opt::<usize>(key, "a nonnegative integer").unwrap_or(default)
    }

    fn bool(&mut self, key: &str, default: bool) -> bool {
        self.opt::<bool>(key, "true or false").unwrap_or(default)
    }

    fn list(&mut self, key: &str, default: &[f64]) -> Vec<f64> {
        let Some((_, raw)) = self.entries.get(key).cloned() else {
            return default.to_vec();
        };
        let parsed: std::result::Result<Vec<f64>, _> = raw.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => v,
            _ => {
                self.issue(key, format!("expected a comma-separated list of numbers, got '{raw}'"));
                default.to_vec()
            }
        }
    }

    fn positive(&mut self, key: &str, v: f64) {
        if !(v > 0.0) {
            self.issue(key, format!("must be positive, got {v}"));
        }
    }

    fn positive_list(&mut self, key: &str, v: &[f64]) {
        if v.iter().any(|x| !(*x > 0.0)) {
            self.issue(key, "all entries must be positive");
        }
    }
}

/// Parses and validates a config text.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut r = Reader { entries: BTreeMap::new(), issues: Vec::new() };
    for (k, raw_line) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            r.issues.push(ConfigIssue { line, key: content.into(), reason: "expected key = value".into() });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            r.issues.push(ConfigIssue { line, key: key.into(), reason: "unknown key".into() });
        } else if let Some((first, _)) = r.entries.get(key) {
            r.issues.push(ConfigIssue { line, key: key.into(), reason: format!("duplicate of line {first}") });
        } else if value.is_empty() {
            r.issues.push(ConfigIssue { line, key: key.into(), reason: "empty value".into() });
        } else {
            r.entries.insert(key.into(), (line, value.into()));
        }
    }

    let experiment = match r.entries.get("experiment").cloned() {
        None => {
            r.issue("experiment", "missing required key");
            None
        }
        Some((_, raw)) => match raw.parse::<Experiment>() {
            Ok(e) => Some(e),
            Err(msg) => {
                r.issue("experiment", msg);
                None
            }
        },
    };
    let d = defaults(experiment.unwrap_or(Experiment::Matrix));
    let transport_law = match r.entries.get("transport_law").cloned() {
        None => LawKind::Sqrt,
        Some((_, raw)) => raw.parse::<LawKind>().unwrap_or_else(|msg| {
            r.issue("transport_law", msg);
            LawKind::Sqrt
        }),
    };
    let rate_times = default_rate_times();
    let cfg = SimConfig {
        experiment: experiment.unwrap_or(Experiment::Matrix),
        m_i: r.f64("m_i", 4.0),
        m_e: r.f64("m_e", 1.0),
        q_i: r.f64("q_i", 1.0),
        q_e: r.f64("q_e", -1.0),
        sigma: r.f64("sigma", 1.0),
        seed: r.opt::<u64>("seed", "a nonnegative integer").unwrap_or(0),
        out_dir: r.entries.get("out_dir").map(|(_, v)| v.clone()),
        wave: WaveSpec {
            n_minus: r.f64("n_minus", 1.0),
            wave_a: r.f64_opt("wave_a"),
            delta_r: r.f64_opt("delta_r"),
            u_minus: r.f64_opt("u_minus"),
            theta_minus: r.f64_opt("theta_minus"),
            n_plus: r.f64_opt("n_plus"),
            u_plus: r.f64_opt("u_plus"),
            theta_plus: r.f64_opt("theta_plus"),
        },
        n_v: r.usize("n_v", 8),
        sphere_polar: r.usize("sphere_polar", 4),
        sphere_azimuth: r.usize("sphere_azimuth", 8),
        n_x: r.usize("n_x", d.n_x),
        half_length: r.f64("half_length", d.half_length),
        t0: r.f64("t0", d.t0),
        t_end: r.f64("t_end", d.t_end),
        dt: r.f64("dt", d.dt),
        steps: r.usize("steps", d.steps),
        diag_every: r.usize("diag_every", 1),
        diag_interval: r.f64("diag_interval", 5.0),
        ion_n: r.f64("ion_n", 1.0),
        ion_u1: r.f64("ion_u1", 0.2),
        ion_theta: r.f64("ion_theta", 1.2),
        electron_n: r.f64("electron_n", 1.0),
        electron_u1: r.f64("electron_u1", -0.2),
        electron_theta: r.f64("electron_theta", 0.8),
        well_balanced: r.bool("well_balanced", true),
        transport: r.bool("transport", true),
        field: r.bool("field", true),
        collisions: r.bool("collisions", true),
        budget_seconds: r.f64("budget_seconds", 900.0),
        theta_star: r.f64_opt("theta_star"),
        eps0: r.f64("eps0", 0.05),
        bump_center_i: r.f64("bump_center_i", 0.0),
        bump_center_e: r.f64("bump_center_e", 0.0),
        bump_width: r.f64("bump_width", 2.0),
        snapshot_times: r.list("snapshot_times", &[15.0, 150.0]),
        transport_law,
        mu0: r.f64("mu0", DEFAULT_MU0),
        kappa0: r.f64("kappa0", DEFAULT_KAPPA0),
        times: r.list("times", &[10.0, 30.0, 100.0]),
        p_values: r.list("p_values", &[1.0, 2.0, 8.0]),
        rate_times: r.list("rate_times", &rate_times),
        theta_values: r.list("theta_values", &[0.5, 1.0, 2.0, 4.0]),
        transport_u1: r.f64("transport_u1", 0.0),
        q_ratios: r.list("q_ratios", &[1.0, 3.0, 9.0]),
        mass_ratios: r.list("mass_ratios", &[1.0, 10.0, 100.0]),
        densities: r.list("densities", &[0.5, 1.0, 2.0]),
    };
    if experiment.is_some() {
        validate(&cfg, &mut r);
    }
    if r.issues.is_empty() {
        Ok(cfg)
    } else {
        r.issues.sort_by_key(|i| i.line);
        Err(VpbError::Config(r.issues))
    }
}

fn validate(c: &SimConfig, r: &mut Reader) {
    if let Err(e) = PlasmaParams::from_values(c.m_i, c.m_e, c.q_i, c.q_e, c.sigma) {
        r.issue("m_i", e.to_string());
        return;
    }
    if c.n_v < 4 {
        r.issue("n_v", "need at least 4 velocity nodes per axis");
    }
    if c.sphere_polar == 0 || c.sphere_azimuth == 0 {
        r.issue("sphere_polar", "sphere node counts must be positive");
    }
    let wave = if c.experiment.uses_wave() { wave_checked(c, r) } else { None };
    match c.experiment {
        Experiment::Relax => {
            for (k, v) in [
                ("ion_n", c.ion_n),
                ("ion_theta", c.ion_theta),
                ("electron_n", c.electron_n),
                ("electron_theta", c.electron_theta),
                ("dt", c.dt),
            ] {
                r.positive(k, v);
            }
            if c.steps == 0 {
                r.issue("steps", "need at least one step");
            }
        }
        Experiment::Kinetic => {
            r.positive("dt", c.dt);
            r.positive("half_length", c.half_length);
            r.positive("t0", c.t0);
            r.positive("budget_seconds", c.budget_seconds);
            if c.n_x < 3 {
                r.issue("n_x", "need at least 3 spatial nodes");
            }
            if c.steps == 0 {
                r.issue("steps", "need at least one step");
            }
            if !(c.transport || c.field || c.collisions) {
                r.issue("collisions", "at least one operator must be enabled");
            }
            if let (Some(w), Some(ts)) = (wave, c.theta_star) {
                let sup = w.left.theta.max(w.right.theta);
                if !(ts > 0.5 * sup && ts < sup) {
                    r.issue(
                        "theta_star",
                        format!("θ_* must lie strictly between ½ sup θ = {} and sup θ = {sup}", 0.5 * sup),
                    );
                }
            }
        }
        Experiment::Fluid => {
            if c.n_x < 64 {
                r.issue("n_x", "the fluid experiment needs at least 64 nodes");
            }
            r.positive("half_length", c.half_length);
            r.positive("bump_width", c.bump_width);
            r.positive("diag_interval", c.diag_interval);
            if c.eps0 < 0.0 {
                r.issue("eps0", "perturbation amplitude must be nonnegative");
            }
            if !(c.t_end > c.t0 && c.t0 >= 0.0) {
                r.issue("t_end", "need 0 ≤ t0 < t_end");
            }
            if c.snapshot_times.iter().any(|t| *t < c.t0 || *t > c.t_end) {
                r.issue("snapshot_times", "snapshot times must lie in [t0, t_end]");
            }
            if c.transport_law == LawKind::Sqrt && (c.mu0 < 0.0 || c.kappa0 < 0.0) {
                r.issue("mu0", "transport constants must be nonnegative");
            }
        }
        Experiment::Wave => {
            r.positive("half_length", c.half_length);
            if c.n_x < 2 {
                r.issue("n_x", "need at least 2 sample points");
            }
            if c.times.iter().chain(&c.rate_times).any(|t| !(1.0..=200.0).contains(t)) {
                r.issue("times", "wave times must lie in [1, 200]");
            }
            if c.p_values.iter().any(|p| !(*p >= 1.0)) {
                r.issue("p_values", "exponents must be at least 1");
            }
        }
        Experiment::Transport => {
            r.positive_list("theta_values", &c.theta_values);
        }
        Experiment::Matrix => {
            r.positive_list("q_ratios", &c.q_ratios);
            r.positive_list("mass_ratios", &c.mass_ratios);
            r.positive_list("densities", &c.densities);
            if let Some(a) = c.wave.wave_a {
                r.positive("wave_a", a);
            }
        }
    }
}

fn wave_checked(c: &SimConfig, r: &mut Reader) -> Option<RarefactionWave> {
    match c.wave_result() {
        Ok(w) => Some(w),
        Err((key, msg)) => {
            r.issue(key, msg);
            None
        }
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl SimConfig {
    pub fn params(&self) -> Result<PlasmaParams> {
        PlasmaParams::from_values(self.m_i, self.m_e, self.q_i, self.q_e, self.sigma)
    }

    pub fn collision_config(&self) -> Result<CollisionConfig> {
        Ok(CollisionConfig {
            sphere: SphereQuadrature::new(self.sphere_polar, self.sphere_azimuth)?,
            ..CollisionConfig::default()
        })
    }

    /// A = θ/n^{2/3} of the configured wave (default 1).
    pub fn wave_a(&self) -> f64 {
        self.wave.wave_a.unwrap_or(1.0)
    }

    pub fn rarefaction(&self) -> Result<RarefactionWave> {
        self.wave_result()
            .map_err(|(key, msg)| VpbError::Config(vec![ConfigIssue { line: 0, key: key.into(), reason: msg }]))
    }

    /// Builds the wave, naming the key to blame on failure.
    fn wave_result(&self) -> std::result::Result<RarefactionWave, (&'static str, String)> {
        let w = &self.wave;
        let params = self.params().map_err(|e| ("m_i", e.to_string()))?;
        let euler = EulerParams::new(params).map_err(|e| ("q_i", e.to_string()))?;
        if !(w.n_minus > 0.0) {
            return Err(("n_minus", "must be positive".into()));
        }
        let Some(n_plus) = w.n_plus else {
            for (k, v) in [
                ("u_minus", w.u_minus),
                ("theta_minus", w.theta_minus),
                ("u_plus", w.u_plus),
                ("theta_plus", w.theta_plus),
            ] {
                if v.is_some() {
                    return Err((k, "explicit end states need n_plus".into()));
                }
            }
            return RarefactionWave::centered(euler, w.n_minus, self.wave_a(), w.delta_r.unwrap_or(0.2))
                .map_err(|e| ("delta_r", e.to_string()));
        };
        if w.delta_r.is_some() {
            return Err(("delta_r", "give either delta_r or n_plus, not both".into()));
        }
        if w.wave_a.is_some() && w.theta_minus.is_some() {
            return Err(("theta_minus", "give either wave_a or theta_minus, not both".into()));
        }
        if !(n_plus > w.n_minus) {
            return Err(("n_plus", "R3 requires n_+ > n_−".into()));
        }
        let theta_minus = w.theta_minus.unwrap_or_else(|| self.wave_a() * w.n_minus.powf(2.0 / 3.0));
        let left = WaveState::new(w.n_minus, w.u_minus.unwrap_or(0.0), theta_minus);
        match (w.u_plus, w.theta_plus) {
            (None, None) => RarefactionWave::from_left(euler, left, n_plus).map_err(|e| ("n_plus", e.to_string())),
            (Some(u), Some(t)) => {
                RarefactionWave::new(euler, left, WaveState::new(n_plus, u, t)).map_err(|e| ("n_plus", e.to_string()))
            }
            _ => Err(("u_plus", "give both u_plus and theta_plus or neither".into())),
        }
    }

    /// θ_* of the kinetic M_* weight: configured, or the end-state mean.
    pub fn theta_star(&self) -> Result<f64> {
        match self.theta_star {
            Some(t) => Ok(t),
            None => {
                let w = self.rarefaction()?;
                Ok(0.5 * (w.left.theta + w.right.theta))
            }
        }
    }

    /// Canonical text; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let w = &self.wave;
        put("experiment", self.experiment.as_str().into());
        for (k, v) in
            [("m_i", self.m_i), ("m_e", self.m_e), ("q_i", self.q_i), ("q_e", self.q_e), ("sigma", self.sigma)]
        {
            put(k, format!("{v:?}"));
        }
        put("seed", self.seed.to_string());
        if let Some(o) = &self.out_dir {
            put("out_dir", o.clone());
        }
        put("n_minus", format!("{:?}", w.n_minus));
        for (k, v) in [
            ("wave_a", w.wave_a),
            ("delta_r", w.delta_r),
            ("u_minus", w.u_minus),
            ("theta_minus", w.theta_minus),
            ("n_plus", w.n_plus),
            ("u_plus", w.u_plus),
            ("theta_plus", w.theta_plus),
        ] {
            if let Some(v) = v {
                put(k, format!("{v:?}"));
            }
        }
        for (k, v) in [
            ("n_v", self.n_v),
            ("sphere_polar", self.sphere_polar),
            ("sphere_azimuth", self.sphere_azimuth),
            ("n_x", self.n_x),
        ] {
            put(k, v.to_string());
        }
        for (k, v) in [("half_length", self.half_length), ("t0", self.t0), ("t_end", self.t_end), ("dt", self.dt)] {
            put(k, format!("{v:?}"));
        }
        put("steps", self.steps.to_string());
        put("diag_every", self.diag_every.to_string());
        for (k, v) in [
            ("diag_interval", self.diag_interval),
            ("ion_n", self.ion_n),
            ("ion_u1", self.ion_u1),
            ("ion_theta", self.ion_theta),
            ("electron_n", self.electron_n),
            ("electron_u1", self.electron_u1),
            ("electron_theta", self.electron_theta),
        ] {
            put(k, format!("{v:?}"));
        }
        for (k, v) in [
            ("well_balanced", self.well_balanced),
            ("transport", self.transport),
            ("field", self.field),
            ("collisions", self.collisions),
        ] {
            put(k, v.to_string());
        }
        put("budget_seconds", format!("{:?}", self.budget_seconds));
        if let Some(t) = self.theta_star {
            put("theta_star", format!("{t:?}"));
        }
        for (k, v) in [
            ("eps0", self.eps0),
            ("bump_center_i", self.bump_center_i),
            ("bump_center_e", self.bump_center_e),
            ("bump_width", self.bump_width),
        ] {
            put(k, format!("{v:?}"));
        }
        put("snapshot_times", fmt_list(&self.snapshot_times));
        put("transport_law", self.transport_law.as_str().into());
        put("mu0", format!("{:?}", self.mu0));
        put("kappa0", format!("{:?}", self.kappa0));
        put("times", fmt_list(&self.times));
        put("p_values", fmt_list(&self.p_values));
        put("rate_times", fmt_list(&self.rate_times));
        put("theta_values", fmt_list(&self.theta_values));
        put("transport_u1", format!("{:?}", self.transport_u1));
        put("q_ratios", fmt_list(&self.q_ratios));
        put("mass_ratios", fmt_list(&self.mass_ratios));
        put("densities", fmt_list(&self.densities));
        s
    }
}
