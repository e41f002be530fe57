//! Experiment configuration: a single JSON document, validated field by
//! field so that every problem is reported at once with its path.

use std::fmt;

use kgfluct_core::automaton::FieldObservableKind;
use kgfluct_core::effective_action::Dispersion;
use kgfluct_core::schroedinger::Splitting;
use kgfluct_core::{Axis, Lattice, ModelParams, PhaseGrid, SiteGaussian, DEFAULT_LAPLACIAN_PREFACTOR};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    GridLiouville,
    Schroedinger,
    Ensemble,
    EffectiveAction,
}

impl Engine {
    const NAMES: [(&'static str, Engine); 4] = [
        ("grid_liouville", Engine::GridLiouville),
        ("schroedinger", Engine::Schroedinger),
        ("ensemble", Engine::Ensemble),
        ("effective_action", Engine::EffectiveAction),
    ];

    pub fn name(&self) -> &'static str {
        Self::NAMES.iter().find(|(_, e)| e == self).map(|(n, _)| *n).unwrap_or("?")
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, Engine::GridLiouville | Engine::Schroedinger)
    }
}

/// How the grid Liouville engine reaches later times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    /// trace each node back to the initial time and interpolate once
    #[default]
    Characteristics,
    /// one interpolation per block
    Stepwise,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    pub mass_squared: f64,
    pub coupling: f64,
    pub spatial_dim: usize,
    pub lattice_spacing: f64,
    pub laplacian_prefactor: f64,
    /// sites per spatial axis for the ensemble engine; must have `spatial_dim` entries
    pub lattice_dims: Vec<usize>,
}

impl ModelConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            mass_squared: self.mass_squared,
            coupling: self.coupling,
            spatial_dim: self.spatial_dim,
            lattice_spacing: self.lattice_spacing,
            laplacian_prefactor: self.laplacian_prefactor,
        }
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.lattice_dims.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisConfig {
    pub center: f64,
    pub half_width: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub sites: usize,
    pub sigma: AxisConfig,
    pub pi: AxisConfig,
}

impl GridConfig {
    pub fn build(&self) -> kgfluct_core::Result<PhaseGrid> {
        let axis = |a: &AxisConfig| Axis::spanning(a.center, a.half_width, a.count);
        PhaseGrid::new(axis(&self.sigma)?, axis(&self.pi)?, self.sites)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub members: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_snapshot: Option<String>,
    /// write the final ensemble as a binary snapshot
    pub snapshot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveActionConfig {
    pub truncation_order: u32,
    pub phi_values: Vec<f64>,
    /// all space-time axes of the one-loop lattice
    pub lattice_dims: Vec<usize>,
    pub dispersion: Dispersion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObservableConfig {
    pub name: String,
    pub site: usize,
}

/// Grid-engine observables; ensemble runs use the field observable names.
pub const GRID_OBSERVABLES: [&str; 9] = [
    "sigma",
    "pi",
    "sigma_squared",
    "pi_squared",
    "sigma_pi",
    "phi",
    "chi",
    "zeta_squared",
    "var_phi",
];

/// Every tolerance used by engines and by `validate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub leak: f64,
    pub norm_defect: f64,
    pub selection_rule: f64,
    pub hermitian: f64,
    pub identity: f64,
    pub band_limit: f64,
    pub commutator: f64,
    pub commuting: f64,
    pub rule_equivalence: f64,
    pub saddle_relative: f64,
    pub standard_errors: f64,
    pub free_theory_relative: f64,
    pub reversibility: f64,
    pub min_route_order: f64,
    pub energy_ratio_slack: f64,
    pub one_loop_slope_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            leak: 1e-9,
            norm_defect: 1e-8,
            selection_rule: 1e-8,
            hermitian: 1e-10,
            identity: 1e-8,
            band_limit: 1e-6,
            commutator: 1e-8,
            commuting: 1e-10,
            rule_equivalence: 1e-8,
            saddle_relative: 1e-6,
            standard_errors: 3.0,
            free_theory_relative: 1e-4,
            reversibility: 1e-10,
            min_route_order: 1.0,
            energy_ratio_slack: 0.5,
            one_loop_slope_slack: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub engine: Engine,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<SiteGaussian>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_action: Option<EffectiveActionConfig>,
    pub observables: Vec<ObservableConfig>,
    pub output: String,
    pub seed: u64,
    /// number of `2 eps` blocks
    pub n_steps: u64,
    pub sample_every: u64,
    pub transport_mode: TransportMode,
    pub splitting: Splitting,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    /// Canonical JSON text; `parse_config(&cfg.to_json())` returns `cfg`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn params(&self) -> ModelParams {
        self.model.params()
    }
}

/// One problem found while validating, addressed by its JSON path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ConfigIssue>),
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Syntax { .. } => &[],
        }
    }
}

struct Walker {
    issues: Vec<ConfigIssue>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Walker {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        match v.as_object() {
            Some(m) => {
                for k in m.keys() {
                    if !allowed.contains(&k.as_str()) {
                        self.issue(join(path, k), "unknown field");
                    }
                }
                Some(m)
            }
            None => {
                self.issue(path, "expected an object");
                None
            }
        }
    }

    fn get<'a>(&mut self, m: &'a Map<String, Value>, path: &str, key: &str, required: bool) -> Option<&'a Value> {
        match m.get(key) {
            Some(Value::Null) | None => {
                if required {
                    self.issue(join(path, key), "missing required field");
                }
                None
            }
            Some(v) => Some(v),
        }
    }

    fn float(&mut self, m: &Map<String, Value>, path: &str, key: &str, default: Option<f64>) -> Option<f64> {
        match self.get(m, path, key, default.is_none()) {
            None => default,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.issue(join(path, key), "expected a finite number");
                    None
                }
            },
        }
    }

    fn uint(&mut self, m: &Map<String, Value>, path: &str, key: &str, default: Option<u64>) -> Option<u64> {
        match self.get(m, path, key, default.is_none()) {
            None => default,
            Some(v) => match v.as_u64() {
                Some(x) => Some(x),
                None => {
                    self.issue(join(path, key), "expected a non-negative integer");
                    None
                }
            },
        }
    }

    fn boolean(&mut self, m: &Map<String, Value>, path: &str, key: &str, default: bool) -> bool {
        match self.get(m, path, key, false) {
            None => default,
            Some(v) => v.as_bool().unwrap_or_else(|| {
                self.issue(join(path, key), "expected true or false");
                default
            }),
        }
    }

    fn string(&mut self, m: &Map<String, Value>, path: &str, key: &str, default: Option<&str>) -> Option<String> {
        match self.get(m, path, key, default.is_none()) {
            None => default.map(str::to_string),
            Some(v) => match v.as_str() {
                Some(s) => Some(s.to_string()),
                None => {
                    self.issue(join(path, key), "expected a string");
                    None
                }
            },
        }
    }

    fn choice<T: Copy>(&mut self, m: &Map<String, Value>, path: &str, key: &str, options: &[(&str, T)], default: Option<T>) -> Option<T> {
        let v = match self.get(m, path, key, default.is_none()) {
            None => return default,
            Some(v) => v,
        };
        let Some(s) = v.as_str() else {
            self.issue(join(path, key), "expected a string");
            return None;
        };
        match options.iter().find(|(n, _)| *n == s) {
            Some((_, v)) => Some(*v),
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.issue(join(path, key), format!("unknown value {s:?}, expected one of {}", names.join(", ")));
                None
            }
        }
    }

    fn uint_list(&mut self, m: &Map<String, Value>, path: &str, key: &str) -> Option<Vec<usize>> {
        let v = self.get(m, path, key, false)?;
        let Some(arr) = v.as_array() else {
            self.issue(join(path, key), "expected an array of integers");
            return None;
        };
        let mut out = Vec::with_capacity(arr.len());
        for (i, x) in arr.iter().enumerate() {
            match x.as_u64() {
                Some(n) => out.push(n as usize),
                None => self.issue(format!("{}[{i}]", join(path, key)), "expected a non-negative integer"),
            }
        }
        Some(out)
    }

    fn float_list(&mut self, m: &Map<String, Value>, path: &str, key: &str) -> Option<Vec<f64>> {
        let v = self.get(m, path, key, true)?;
        let Some(arr) = v.as_array() else {
            self.issue(join(path, key), "expected an array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(arr.len());
        for (i, x) in arr.iter().enumerate() {
            match x.as_f64() {
                Some(n) if n.is_finite() => out.push(n),
                _ => self.issue(format!("{}[{i}]", join(path, key)), "expected a finite number"),
            }
        }
        Some(out)
    }

    fn positive(&mut self, path: &str, x: Option<f64>) {
        if let Some(x) = x {
            if !(x > 0.0) {
                self.issue(path, format!("must be > 0, got {x}"));
            }
        }
    }

    fn model(&mut self, v: &Value) -> Option<ModelConfig> {
        let p = "model";
        let m = self.object(
            v,
            p,
            &["mass_squared", "coupling", "spatial_dim", "lattice_spacing", "laplacian_prefactor", "lattice_dims"],
        )?;
        let mass_squared = self.float(m, p, "mass_squared", None);
        let coupling = self.float(m, p, "coupling", None);
        let spatial_dim = self.uint(m, p, "spatial_dim", Some(0));
        let lattice_spacing = self.float(m, p, "lattice_spacing", None);
        let laplacian_prefactor = self.float(m, p, "laplacian_prefactor", Some(DEFAULT_LAPLACIAN_PREFACTOR));
        let lattice_dims = self.uint_list(m, p, "lattice_dims");
        if let Some(c) = coupling {
            if c < 0.0 {
                self.issue("model.coupling", format!("must be >= 0, got {c}"));
            }
        }
        self.positive("model.lattice_spacing", lattice_spacing);
        if let Some(c) = laplacian_prefactor {
            if c < 0.0 {
                self.issue("model.laplacian_prefactor", format!("must be >= 0, got {c}"));
            }
        }
        let spatial_dim = spatial_dim? as usize;
        let lattice_dims = match lattice_dims {
            Some(d) => {
                if d.len() != spatial_dim {
                    self.issue("model.lattice_dims", format!("needs {spatial_dim} entries, got {}", d.len()));
                }
                if d.iter().any(|&n| n == 0) {
                    self.issue("model.lattice_dims", "entries must be >= 1");
                }
                d
            }
            None => vec![2; spatial_dim],
        };
        Some(ModelConfig {
            mass_squared: mass_squared?,
            coupling: coupling?,
            spatial_dim,
            lattice_spacing: lattice_spacing?,
            laplacian_prefactor: laplacian_prefactor?,
            lattice_dims,
        })
    }

    fn axis(&mut self, m: &Map<String, Value>, path: &str, key: &str) -> Option<AxisConfig> {
        let p = join(path, key);
        let v = self.get(m, path, key, true)?;
        let a = self.object(v, &p, &["center", "half_width", "count"])?;
        let center = self.float(a, &p, "center", Some(0.0));
        let half_width = self.float(a, &p, "half_width", None);
        let count = self.uint(a, &p, "count", None);
        self.positive(&join(&p, "half_width"), half_width);
        if let Some(n) = count {
            if n < 3 || n % 2 == 0 {
                self.issue(join(&p, "count"), format!("must be odd and >= 3, got {n}"));
            }
        }
        Some(AxisConfig {
            center: center?,
            half_width: half_width?,
            count: count? as usize,
        })
    }

    fn grid(&mut self, v: &Value) -> Option<GridConfig> {
        let p = "grid";
        let m = self.object(v, p, &["sites", "sigma", "pi"])?;
        let sites = self.uint(m, p, "sites", Some(1));
        if sites == Some(0) {
            self.issue("grid.sites", "must be >= 1");
        }
        let sigma = self.axis(m, p, "sigma");
        let pi = self.axis(m, p, "pi");
        Some(GridConfig {
            sites: sites? as usize,
            sigma: sigma?,
            pi: pi?,
        })
    }

    fn initial(&mut self, v: &Value) -> Option<SiteGaussian> {
        let p = "initial";
        let m = self.object(v, p, &["mean_sigma", "mean_pi", "width_sigma", "width_pi"])?;
        let mean_sigma = self.float(m, p, "mean_sigma", Some(0.0));
        let mean_pi = self.float(m, p, "mean_pi", Some(0.0));
        let width_sigma = self.float(m, p, "width_sigma", None);
        let width_pi = self.float(m, p, "width_pi", None);
        self.positive("initial.width_sigma", width_sigma);
        self.positive("initial.width_pi", width_pi);
        Some(SiteGaussian {
            mean_sigma: mean_sigma?,
            mean_pi: mean_pi?,
            width_sigma: width_sigma?,
            width_pi: width_pi?,
        })
    }

    fn ensemble(&mut self, v: &Value) -> Option<EnsembleConfig> {
        let p = "ensemble";
        let m = self.object(v, p, &["members", "initial_snapshot", "snapshot"])?;
        let members = self.uint(m, p, "members", None);
        if let Some(n) = members {
            if n < 2 {
                self.issue("ensemble.members", format!("must be >= 2, got {n}"));
            }
        }
        let initial_snapshot = match self.get(m, p, "initial_snapshot", false) {
            None => None,
            Some(_) => self.string(m, p, "initial_snapshot", None),
        };
        let snapshot = self.boolean(m, p, "snapshot", false);
        Some(EnsembleConfig {
            members: members? as usize,
            initial_snapshot,
            snapshot,
        })
    }

    fn effective_action(&mut self, v: &Value) -> Option<EffectiveActionConfig> {
        let p = "effective_action";
        let m = self.object(v, p, &["truncation_order", "phi_values", "lattice_dims", "dispersion"])?;
        let truncation_order = self.uint(m, p, "truncation_order", Some(5));
        if truncation_order == Some(0) {
            self.issue("effective_action.truncation_order", "must be >= 1");
        }
        let phi_values = self.float_list(m, p, "phi_values");
        let lattice_dims = self.uint_list(m, p, "lattice_dims").unwrap_or_default();
        if lattice_dims.is_empty() {
            self.issue("effective_action.lattice_dims", "missing or empty");
        }
        let dispersion = self.choice(
            m,
            p,
            "dispersion",
            &[("sine", Dispersion::Sine), ("linear", Dispersion::Linear)],
            Some(Dispersion::Sine),
        );
        Some(EffectiveActionConfig {
            truncation_order: truncation_order? as u32,
            phi_values: phi_values?,
            lattice_dims,
            dispersion: dispersion?,
        })
    }

    fn observables(&mut self, v: &Value) -> Vec<ObservableConfig> {
        let Some(arr) = v.as_array() else {
            self.issue("observables", "expected an array");
            return Vec::new();
        };
        let mut out = Vec::new();
        for (i, o) in arr.iter().enumerate() {
            let p = format!("observables[{i}]");
            let Some(m) = self.object(o, &p, &["name", "site"]) else {
                continue;
            };
            let name = self.string(m, &p, "name", None);
            let site = self.uint(m, &p, "site", Some(0));
            if let (Some(name), Some(site)) = (name, site) {
                out.push(ObservableConfig {
                    name,
                    site: site as usize,
                });
            }
        }
        out
    }

    fn tolerances(&mut self, v: Option<&Value>) -> Tolerances {
        let mut t = Tolerances::default();
        let Some(v) = v else {
            return t;
        };
        let fields: [(&str, &mut f64); 16] = [
            ("leak", &mut t.leak),
            ("norm_defect", &mut t.norm_defect),
            ("selection_rule", &mut t.selection_rule),
            ("hermitian", &mut t.hermitian),
            ("identity", &mut t.identity),
            ("band_limit", &mut t.band_limit),
            ("commutator", &mut t.commutator),
            ("commuting", &mut t.commuting),
            ("rule_equivalence", &mut t.rule_equivalence),
            ("saddle_relative", &mut t.saddle_relative),
            ("standard_errors", &mut t.standard_errors),
            ("free_theory_relative", &mut t.free_theory_relative),
            ("reversibility", &mut t.reversibility),
            ("min_route_order", &mut t.min_route_order),
            ("energy_ratio_slack", &mut t.energy_ratio_slack),
            ("one_loop_slope_slack", &mut t.one_loop_slope_slack),
        ];
        let names: Vec<&str> = fields.iter().map(|(n, _)| *n).collect();
        let Some(m) = self.object(v, "tolerances", &names) else {
            return t;
        };
        for (name, slot) in fields {
            if let Some(x) = self.float(m, "tolerances", name, Some(*slot)) {
                if !(x > 0.0) {
                    self.issue(join("tolerances", name), format!("must be > 0, got {x}"));
                }
                *slot = x;
            }
        }
        t
    }
}

const TOP_LEVEL: [&str; 15] = [
    "model",
    "engine",
    "grid",
    "initial",
    "ensemble",
    "effective_action",
    "observables",
    "output",
    "seed",
    "n_steps",
    "sample_every",
    "transport_mode",
    "splitting",
    "tolerances",
    "$comment",
];

/// Parses and validates a config document, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut w = Walker { issues: Vec::new() };
    let Some(root) = w.object(&doc, "", &TOP_LEVEL) else {
        return Err(ConfigError::Invalid(w.issues));
    };

    let model = match w.get(root, "", "model", true) {
        Some(v) => w.model(v),
        None => None,
    };
    let engine = w.choice(root, "", "engine", &Engine::NAMES, None);
    let grid = w.get(root, "", "grid", false).and_then(|v| w.grid(v));
    let initial = w.get(root, "", "initial", false).and_then(|v| w.initial(v));
    let ensemble = w.get(root, "", "ensemble", false).and_then(|v| w.ensemble(v));
    let effective_action = w.get(root, "", "effective_action", false).and_then(|v| w.effective_action(v));
    let observables = w.get(root, "", "observables", false).map(|v| w.observables(v)).unwrap_or_default();
    let output = w.string(root, "", "output", Some("results"));
    let seed = w.uint(root, "", "seed", Some(0));
    let n_steps = w.uint(root, "", "n_steps", Some(0));
    let sample_every = w.uint(root, "", "sample_every", Some(1));
    if sample_every == Some(0) {
        w.issue("sample_every", "must be >= 1");
    }
    let transport_mode = w.choice(
        root,
        "",
        "transport_mode",
        &[("characteristics", TransportMode::Characteristics), ("stepwise", TransportMode::Stepwise)],
        Some(TransportMode::Characteristics),
    );
    let splitting = w.choice(
        root,
        "",
        "splitting",
        &[("strang", Splitting::Strang), ("lie", Splitting::Lie)],
        Some(Splitting::Strang),
    );
    let tolerances = w.tolerances(root.get("tolerances").filter(|v| !v.is_null()));

    // engine-specific requirements
    if let Some(engine) = engine {
        if engine.is_grid() {
            if root.get("grid").is_none() {
                w.issue("grid", format!("required by engine {}", engine.name()));
            }
            if root.get("initial").is_none() {
                w.issue("initial", format!("required by engine {}", engine.name()));
            }
            if let (Some(g), Some(m)) = (&grid, &model) {
                let expected = g.sites.saturating_sub(1);
                if g.sites <= 2 && m.spatial_dim != expected {
                    w.issue("model.spatial_dim", format!("must be {expected} for a grid of {} sites", g.sites));
                }
            }
        }
        if engine == Engine::Ensemble {
            let dims_given = root
                .get("model")
                .and_then(Value::as_object)
                .is_some_and(|m| m.contains_key("lattice_dims"));
            if model.as_ref().is_some_and(|m| m.spatial_dim > 0) && !dims_given {
                w.issue("model.lattice_dims", "required by engine ensemble when spatial_dim > 0");
            }
            if root.get("ensemble").is_none() {
                w.issue("ensemble", "required by engine ensemble");
            }
            if root.get("initial").is_none() && ensemble.as_ref().is_none_or(|e| e.initial_snapshot.is_none()) {
                w.issue("initial", "required by engine ensemble unless ensemble.initial_snapshot is set");
            }
        }
        if engine == Engine::EffectiveAction && root.get("effective_action").is_none() {
            w.issue("effective_action", "required by engine effective_action");
        }
        let sites = match engine {
            Engine::GridLiouville | Engine::Schroedinger => grid.as_ref().map(|g| g.sites),
            Engine::Ensemble => model.as_ref().map(|m| m.lattice_dims.iter().product()),
            Engine::EffectiveAction => None,
        };
        for (i, o) in observables.iter().enumerate() {
            let known = match engine {
                Engine::Ensemble => FieldObservableKind::from_name(&o.name).is_some(),
                _ => GRID_OBSERVABLES.contains(&o.name.as_str()),
            };
            if !known {
                w.issue(format!("observables[{i}].name"), format!("unknown observable {:?} for engine {}", o.name, engine.name()));
            }
            if let Some(n) = sites {
                if o.site >= n {
                    w.issue(format!("observables[{i}].site"), format!("site {} outside {n} sites", o.site));
                }
            }
        }
    }

    if !w.issues.is_empty() {
        return Err(ConfigError::Invalid(w.issues));
    }
    Ok(ExperimentConfig {
        model: model.expect("checked"),
        engine: engine.expect("checked"),
        grid,
        initial,
        ensemble,
        effective_action,
        observables,
        output: output.expect("checked"),
        seed: seed.expect("checked"),
        n_steps: n_steps.expect("checked"),
        sample_every: sample_every.expect("checked"),
        transport_mode: transport_mode.expect("checked"),
        splitting: splitting.expect("checked"),
        tolerances,
    })
}
