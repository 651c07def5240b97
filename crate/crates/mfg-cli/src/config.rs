//! Strict run-config parsing: a flat, typed `key = value` format with
//! `[section]` headers, decimal literals only, and hard rejection of unknown
//! sections, unknown keys, duplicates, and malformed values — every error
//! carries the offending line and key. A parsed config can be re-emitted as
//! canonical text (`to_canonical_text`) that parses back to the same config;
//! manifests embed that echo so stored runs are self-describing.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use mfg_core::{
    ContinuationConfig, Coupling, DensitySlice, GridSpec, HamiltonianModel, NewtonConfig,
    ProblemKind, ProblemSpec, SolveOptions, TerminalCost,
};

#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

/// Every section/key pair the format accepts.
const KNOWN_KEYS: &[(&str, &[&str])] = &[
    (
        "model",
        &["family", "gamma", "alpha", "c0", "coupling", "coupling_a", "coupling_b"],
    ),
    ("grid", &["n_x", "n_t", "horizon"]),
    (
        "problem",
        &[
            "kind",
            "initial_density",
            "terminal_cost",
            "cost_a",
            "cost_b",
            "terminal_density",
            "regularization_deltas",
        ],
    ),
    (
        "solver",
        &[
            "newton_max_iter",
            "newton_rtol",
            "newton_max_halvings",
            "epsilon_start",
            "epsilon_min",
            "target_terminal_error",
            "stop_on_stall",
            "check_model",
        ],
    ),
    ("diagnostics", &["seed", "monotonicity_samples", "suite"]),
    ("sweep", &["t_values"]),
];

const KNOWN_SUITES: &[&str] = &["bounds", "convexity", "monotonicity", "turnpike"];

/// A fully resolved run configuration. Optional groups ([grid], [problem],
/// [sweep]) stay `None`/empty when absent so a model-only config still parses
/// for `check-model`; commands that need them report the missing key.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub family: String,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub c0: Option<f64>,
    pub coupling: String,
    pub coupling_a: f64,
    pub coupling_b: Option<f64>,

    pub n_x: Option<usize>,
    pub n_t: Option<usize>,
    pub horizon: Option<f64>,

    pub kind: Option<String>,
    pub initial_density: Option<String>,
    pub terminal_cost: Option<String>,
    pub cost_a: Option<f64>,
    pub cost_b: Option<f64>,
    pub terminal_density: Option<String>,
    pub regularization_deltas: Vec<f64>,

    pub newton_max_iter: usize,
    pub newton_rtol: f64,
    pub newton_max_halvings: usize,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    pub target_terminal_error: f64,
    pub stop_on_stall: bool,
    pub check_model: bool,

    pub seed: u64,
    pub monotonicity_samples: usize,
    pub suite: Vec<String>,

    pub t_values: Vec<f64>,
}

struct Entries {
    map: BTreeMap<(String, String), (usize, String)>,
}

impl Entries {
    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        self.map
            .get(&(section.to_string(), key.to_string()))
            .map(|(l, _)| *l)
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.map.remove(&(section.to_string(), key.to_string()))
    }

    fn take_str(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.take(section, key)
    }

    fn take_f64(&mut self, section: &str, key: &str) -> Result<Option<(usize, f64)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((line, v)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some((line, x))),
                _ => Err(err(
                    Some(line),
                    format!("[{section}] {key}: expected a decimal number, got '{v}'"),
                )),
            },
        }
    }

    fn take_usize(
        &mut self,
        section: &str,
        key: &str,
    ) -> Result<Option<(usize, usize)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((line, v)) => match v.parse::<usize>() {
                Ok(x) => Ok(Some((line, x))),
                Err(_) => Err(err(
                    Some(line),
                    format!("[{section}] {key}: expected a nonnegative integer, got '{v}'"),
                )),
            },
        }
    }

    fn take_u64(&mut self, section: &str, key: &str) -> Result<Option<(usize, u64)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((line, v)) => match v.parse::<u64>() {
                Ok(x) => Ok(Some((line, x))),
                Err(_) => Err(err(
                    Some(line),
                    format!("[{section}] {key}: expected a nonnegative integer, got '{v}'"),
                )),
            },
        }
    }

    fn take_bool(&mut self, section: &str, key: &str) -> Result<Option<(usize, bool)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((line, v)) => match v.as_str() {
                "true" => Ok(Some((line, true))),
                "false" => Ok(Some((line, false))),
                _ => Err(err(
                    Some(line),
                    format!("[{section}] {key}: expected 'true' or 'false', got '{v}'"),
                )),
            },
        }
    }

    fn take_f64_list(
        &mut self,
        section: &str,
        key: &str,
    ) -> Result<Option<(usize, Vec<f64>)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((line, v)) => {
                let mut out = Vec::new();
                for item in v.split(',') {
                    let item = item.trim();
                    match item.parse::<f64>() {
                        Ok(x) if x.is_finite() => out.push(x),
                        _ => {
                            return Err(err(
                                Some(line),
                                format!(
                                    "[{section}] {key}: expected comma-separated decimal numbers, got '{item}'"
                                ),
                            ))
                        }
                    }
                }
                Ok(Some((line, out)))
            }
        }
    }

    fn take_str_list(
        &mut self,
        section: &str,
        key: &str,
    ) -> Result<Option<(usize, Vec<String>)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((line, v)) => {
                let items: Vec<String> = v.split(',').map(|s| s.trim().to_string()).collect();
                if items.iter().any(|s| s.is_empty()) {
                    return Err(err(
                        Some(line),
                        format!("[{section}] {key}: empty item in list '{v}'"),
                    ));
                }
                Ok(Some((line, items)))
            }
        }
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut section: Option<String> = None;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(Some(line_no), "malformed section header (expected [name])"))?
                .trim()
                .to_string();
            if !KNOWN_KEYS.iter().any(|(s, _)| *s == name) {
                return Err(err(Some(line_no), format!("unknown section [{name}]")));
            }
            section = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(
                Some(line_no),
                format!("expected 'key = value', got '{line}'"),
            ));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let Some(section) = section.as_deref() else {
            return Err(err(
                Some(line_no),
                format!("key '{key}' appears before any [section] header"),
            ));
        };
        let keys = KNOWN_KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .map(|(_, k)| *k)
            .expect("section already validated");
        if !keys.contains(&key.as_str()) {
            return Err(err(
                Some(line_no),
                format!("unknown key '{key}' in section [{section}]"),
            ));
        }
        if value.is_empty() {
            return Err(err(Some(line_no), format!("[{section}] {key}: empty value")));
        }
        if map
            .insert((section.to_string(), key.clone()), (line_no, value))
            .is_some()
        {
            return Err(err(
                Some(line_no),
                format!("duplicate key '{key}' in section [{section}]"),
            ));
        }
    }
    Ok(Entries { map })
}

/// Rejects `key` when present: it does not apply in the stated context.
fn reject(entries: &Entries, section: &str, key: &str, context: &str) -> Result<(), ConfigError> {
    if let Some(line) = entries.line_of(section, key) {
        return Err(err(
            Some(line),
            format!("[{section}] {key}: not valid {context}"),
        ));
    }
    Ok(())
}

fn require<T>(opt: Option<(usize, T)>, section: &str, key: &str) -> Result<T, ConfigError> {
    opt.map(|(_, v)| v)
        .ok_or_else(|| err(None, format!("missing required key [{section}] {key}")))
}

/// Checks a density preset's syntax without building it.
fn validate_density_preset(preset: &str) -> Result<(), String> {
    let p = preset.trim();
    if p == "uniform" || p == "vanishing" {
        return Ok(());
    }
    for name in ["cosine", "signed"] {
        if let Some(arg) = p
            .strip_prefix(&format!("{name}("))
            .and_then(|s| s.strip_suffix(')'))
        {
            return match arg.trim().parse::<f64>() {
                Ok(a) if a.is_finite() => Ok(()),
                _ => Err(format!("'{p}': amplitude must be a decimal number")),
            };
        }
    }
    Err(format!(
        "unknown density preset '{p}' (expected uniform, cosine(a), vanishing, or signed(a))"
    ))
}

/// Builds a density slice from a preset string. `signed(a)` is the
/// sign-changing target `1 - a cos(2 pi x)` used by non-existence probes.
pub fn parse_density(preset: &str, n_x: usize) -> Result<DensitySlice, ConfigError> {
    let p = preset.trim();
    let build = |r: Result<DensitySlice, mfg_core::GridError>| {
        r.map_err(|e| err(None, format!("density preset '{p}': {e}")))
    };
    if p == "uniform" {
        return Ok(DensitySlice::uniform(n_x));
    }
    if p == "vanishing" {
        return build(DensitySlice::vanishing(n_x));
    }
    if let Some(arg) = p.strip_prefix("cosine(").and_then(|s| s.strip_suffix(')')) {
        let a: f64 = arg.trim().parse().map_err(|_| {
            err(None, format!("density preset '{p}': bad amplitude"))
        })?;
        return build(DensitySlice::cosine(n_x, a));
    }
    if let Some(arg) = p.strip_prefix("signed(").and_then(|s| s.strip_suffix(')')) {
        let a: f64 = arg.trim().parse().map_err(|_| {
            err(None, format!("density preset '{p}': bad amplitude"))
        })?;
        return build(DensitySlice::cosine(n_x, -a));
    }
    Err(err(None, validate_density_preset(p).unwrap_err()))
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let mut e = tokenize(text)?;
    let newton_default = NewtonConfig::default();
    let continuation_default = ContinuationConfig::default();

    // -- [model] --------------------------------------------------------
    let (family_line, family) = e
        .take_str("model", "family")
        .ok_or_else(|| err(None, "missing required key [model] family"))?;
    match family.as_str() {
        "quadratic" => {
            reject(&e, "model", "gamma", "for family 'quadratic' (it is fixed at 2)")?;
            reject(&e, "model", "alpha", "for family 'quadratic'")?;
            reject(&e, "model", "c0", "for family 'quadratic'")?;
        }
        "separated_power" => {
            reject(&e, "model", "alpha", "for family 'separated_power'")?;
            reject(&e, "model", "c0", "for family 'separated_power'")?;
        }
        "congestion" => {
            reject(&e, "model", "gamma", "for family 'congestion'")?;
        }
        other => {
            return Err(err(
                Some(family_line),
                format!(
                    "[model] family: unknown family '{other}' (expected quadratic, separated_power, or congestion)"
                ),
            ))
        }
    }
    let gamma = e.take_f64("model", "gamma")?;
    let alpha = e.take_f64("model", "alpha")?;
    let c0 = e.take_f64("model", "c0")?;
    if family == "separated_power" && gamma.is_none() {
        return Err(err(
            None,
            "missing required key [model] gamma for family 'separated_power'",
        ));
    }
    if family == "congestion" && alpha.is_none() {
        return Err(err(
            None,
            "missing required key [model] alpha for family 'congestion'",
        ));
    }

    let (coupling_line, coupling) = e
        .take_str("model", "coupling")
        .ok_or_else(|| err(None, "missing required key [model] coupling"))?;
    match coupling.as_str() {
        "linear" | "log" => {
            reject(&e, "model", "coupling_b", "for coupling 'linear' or 'log'")?;
        }
        "power" => {}
        other => {
            return Err(err(
                Some(coupling_line),
                format!(
                    "[model] coupling: unknown coupling '{other}' (expected linear, log, or power)"
                ),
            ))
        }
    }
    let coupling_a = require(e.take_f64("model", "coupling_a")?, "model", "coupling_a")?;
    let coupling_b = e.take_f64("model", "coupling_b")?;
    if coupling == "power" && coupling_b.is_none() {
        return Err(err(
            None,
            "missing required key [model] coupling_b for coupling 'power'",
        ));
    }

    // -- [grid] ----------------------------------------------------------
    let n_x = e.take_usize("grid", "n_x")?;
    let n_t = e.take_usize("grid", "n_t")?;
    let horizon = e.take_f64("grid", "horizon")?;

    // -- [problem] -------------------------------------------------------
    let kind = e.take_str("problem", "kind");
    match kind.as_ref().map(|(_, k)| k.as_str()) {
        None => {
            for key in [
                "initial_density",
                "terminal_cost",
                "cost_a",
                "cost_b",
                "terminal_density",
                "regularization_deltas",
            ] {
                reject(&e, "problem", key, "without [problem] kind")?;
            }
        }
        Some("terminal_cost") => {
            reject(&e, "problem", "terminal_density", "for kind 'terminal_cost'")?;
        }
        Some("planning") => {
            reject(&e, "problem", "terminal_cost", "for kind 'planning'")?;
            reject(&e, "problem", "cost_a", "for kind 'planning'")?;
            reject(&e, "problem", "cost_b", "for kind 'planning'")?;
        }
        Some(other) => {
            return Err(err(
                Some(kind.as_ref().unwrap().0),
                format!(
                    "[problem] kind: unknown kind '{other}' (expected terminal_cost or planning)"
                ),
            ))
        }
    }
    let kind = kind.map(|(_, k)| k);

    let initial_density = match e.take_str("problem", "initial_density") {
        Some((line, p)) => {
            validate_density_preset(&p)
                .map_err(|m| err(Some(line), format!("[problem] initial_density: {m}")))?;
            Some(p)
        }
        None => None,
    };
    let terminal_density = match e.take_str("problem", "terminal_density") {
        Some((line, p)) => {
            validate_density_preset(&p)
                .map_err(|m| err(Some(line), format!("[problem] terminal_density: {m}")))?;
            Some(p)
        }
        None => None,
    };
    let terminal_cost = match e.take_str("problem", "terminal_cost") {
        Some((line, k)) => match k.as_str() {
            "linear" | "log" => Some(k),
            other => {
                return Err(err(
                    Some(line),
                    format!(
                        "[problem] terminal_cost: unknown law '{other}' (expected linear or log)"
                    ),
                ))
            }
        },
        None => None,
    };
    let cost_a = e.take_f64("problem", "cost_a")?.map(|(_, v)| v);
    let cost_b = e.take_f64("problem", "cost_b")?.map(|(_, v)| v);

    if kind.as_deref() == Some("terminal_cost") {
        if terminal_cost.is_none() {
            return Err(err(
                None,
                "missing required key [problem] terminal_cost for kind 'terminal_cost'",
            ));
        }
        if cost_a.is_none() {
            return Err(err(
                None,
                "missing required key [problem] cost_a for kind 'terminal_cost'",
            ));
        }
        if initial_density.is_none() {
            return Err(err(None, "missing required key [problem] initial_density"));
        }
    }
    if kind.as_deref() == Some("planning") {
        if terminal_density.is_none() {
            return Err(err(
                None,
                "missing required key [problem] terminal_density for kind 'planning'",
            ));
        }
        if initial_density.is_none() {
            return Err(err(None, "missing required key [problem] initial_density"));
        }
    }

    let regularization_deltas = match e.take_f64_list("problem", "regularization_deltas")? {
        Some((line, list)) => {
            if list.iter().any(|&d| d <= 0.0) {
                return Err(err(
                    Some(line),
                    "[problem] regularization_deltas: every delta must be positive",
                ));
            }
            if list.windows(2).any(|w| w[1] >= w[0]) {
                return Err(err(
                    Some(line),
                    "[problem] regularization_deltas: deltas must be strictly decreasing",
                ));
            }
            list
        }
        None => Vec::new(),
    };

    // -- [solver] ---------------------------------------------------------
    let newton_max_iter = e
        .take_usize("solver", "newton_max_iter")?
        .map_or(newton_default.max_iter, |(_, v)| v);
    let newton_rtol = e
        .take_f64("solver", "newton_rtol")?
        .map_or(newton_default.rtol, |(_, v)| v);
    let newton_max_halvings = e
        .take_usize("solver", "newton_max_halvings")?
        .map_or(newton_default.max_halvings, |(_, v)| v);
    let epsilon_start = e
        .take_f64("solver", "epsilon_start")?
        .map_or(continuation_default.epsilon_start, |(_, v)| v);
    let epsilon_min = e
        .take_f64("solver", "epsilon_min")?
        .map_or(continuation_default.epsilon_min, |(_, v)| v);
    let target_terminal_error = e
        .take_f64("solver", "target_terminal_error")?
        .map_or(continuation_default.target_terminal_error, |(_, v)| v);
    let stop_on_stall = e
        .take_bool("solver", "stop_on_stall")?
        .map_or(continuation_default.stop_on_stall, |(_, v)| v);
    let check_model = e
        .take_bool("solver", "check_model")?
        .map_or(true, |(_, v)| v);

    // -- [diagnostics] -----------------------------------------------------
    let seed = e.take_u64("diagnostics", "seed")?.map_or(0, |(_, v)| v);
    let monotonicity_samples = e
        .take_usize("diagnostics", "monotonicity_samples")?
        .map_or(1000, |(_, v)| v);
    let suite = match e.take_str_list("diagnostics", "suite")? {
        Some((line, items)) => {
            for item in &items {
                if !KNOWN_SUITES.contains(&item.as_str()) {
                    return Err(err(
                        Some(line),
                        format!(
                            "[diagnostics] suite: unknown diagnostic '{item}' (expected one of {})",
                            KNOWN_SUITES.join(", ")
                        ),
                    ));
                }
            }
            items
        }
        None => vec![
            "bounds".to_string(),
            "convexity".to_string(),
            "monotonicity".to_string(),
        ],
    };

    // -- [sweep] ------------------------------------------------------------
    let t_values = match e.take_f64_list("sweep", "t_values")? {
        Some((line, mut list)) => {
            if list.iter().any(|&t| t <= 0.0) {
                return Err(err(
                    Some(line),
                    "[sweep] t_values: every horizon must be positive",
                ));
            }
            list.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(err(Some(line), "[sweep] t_values: duplicate horizon"));
            }
            list
        }
        None => Vec::new(),
    };

    debug_assert!(e.map.is_empty(), "all known keys consumed");

    Ok(RunConfig {
        family,
        gamma: gamma.map(|(_, v)| v),
        alpha: alpha.map(|(_, v)| v),
        c0: c0.map(|(_, v)| v),
        coupling,
        coupling_a,
        coupling_b: coupling_b.map(|(_, v)| v),
        n_x: n_x.map(|(_, v)| v),
        n_t: n_t.map(|(_, v)| v),
        horizon: horizon.map(|(_, v)| v),
        kind,
        initial_density,
        terminal_cost,
        cost_a,
        cost_b,
        terminal_density,
        regularization_deltas,
        newton_max_iter,
        newton_rtol,
        newton_max_halvings,
        epsilon_start,
        epsilon_min,
        target_terminal_error,
        stop_on_stall,
        check_model,
        seed,
        monotonicity_samples,
        suite,
        t_values,
    })
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(None, format!("cannot read config '{}': {e}", path.display())))?;
    parse(&text)
}

impl RunConfig {
    pub fn model(&self) -> Result<HamiltonianModel, ConfigError> {
        let coupling = match self.coupling.as_str() {
            "linear" => Coupling::Linear { a: self.coupling_a },
            "log" => Coupling::Log { a: self.coupling_a },
            "power" => Coupling::Power {
                a: self.coupling_a,
                b: self.coupling_b.expect("validated at parse"),
            },
            _ => unreachable!("validated at parse"),
        };
        let built = match self.family.as_str() {
            "quadratic" => HamiltonianModel::quadratic(coupling),
            "separated_power" => {
                HamiltonianModel::separated_power(self.gamma.expect("validated at parse"), coupling)
            }
            "congestion" => HamiltonianModel::congestion(
                self.alpha.expect("validated at parse"),
                self.c0.unwrap_or(0.0),
                coupling,
            ),
            _ => unreachable!("validated at parse"),
        };
        built.map_err(|e| err(None, format!("invalid [model] parameters: {e}")))
    }

    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        let n_x = self
            .n_x
            .ok_or_else(|| err(None, "missing required key [grid] n_x"))?;
        let n_t = self
            .n_t
            .ok_or_else(|| err(None, "missing required key [grid] n_t"))?;
        let horizon = self
            .horizon
            .ok_or_else(|| err(None, "missing required key [grid] horizon"))?;
        GridSpec::new(n_x, n_t, horizon).map_err(|e| err(None, format!("[grid]: {e}")))
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, ConfigError> {
        let model = self.model()?;
        let grid = self.grid()?;
        let kind_name = self
            .kind
            .as_deref()
            .ok_or_else(|| err(None, "missing required key [problem] kind"))?;
        let initial = self
            .initial_density
            .as_deref()
            .ok_or_else(|| err(None, "missing required key [problem] initial_density"))?;
        let initial_density = parse_density(initial, grid.n_x)?;
        let kind = match kind_name {
            "terminal_cost" => {
                let a = self.cost_a.expect("validated at parse");
                let b = self.cost_b.unwrap_or(0.0);
                let cost = match self.terminal_cost.as_deref().expect("validated at parse") {
                    "linear" => TerminalCost::Linear { a, b },
                    "log" => TerminalCost::Log { a, b },
                    _ => unreachable!("validated at parse"),
                };
                cost.validate()
                    .map_err(|e| err(None, format!("[problem] terminal cost: {e}")))?;
                ProblemKind::TerminalCost { cost }
            }
            "planning" => {
                let target = self
                    .terminal_density
                    .as_deref()
                    .expect("validated at parse");
                ProblemKind::Planning {
                    terminal_density: parse_density(target, grid.n_x)?,
                }
            }
            _ => unreachable!("validated at parse"),
        };
        Ok(ProblemSpec {
            model,
            grid,
            initial_density,
            kind,
        })
    }

    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig {
            max_iter: self.newton_max_iter,
            rtol: self.newton_rtol,
            max_halvings: self.newton_max_halvings,
            ..NewtonConfig::default()
        }
    }

    pub fn continuation(&self) -> ContinuationConfig {
        ContinuationConfig {
            epsilon_start: self.epsilon_start,
            epsilon_min: self.epsilon_min,
            target_terminal_error: self.target_terminal_error,
            stop_on_stall: self.stop_on_stall,
            newton: self.newton(),
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            newton: self.newton(),
            continuation: self.continuation(),
            check_model: self.check_model,
        }
    }

    /// Emits the configuration as canonical text that parses back to the
    /// same `RunConfig`; manifests embed this echo.
    pub fn to_canonical_text(&self) -> String {
        use fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "[model]");
        let _ = writeln!(s, "family = {}", self.family);
        if let Some(v) = self.gamma {
            let _ = writeln!(s, "gamma = {v}");
        }
        if let Some(v) = self.alpha {
            let _ = writeln!(s, "alpha = {v}");
        }
        if let Some(v) = self.c0 {
            let _ = writeln!(s, "c0 = {v}");
        }
        let _ = writeln!(s, "coupling = {}", self.coupling);
        let _ = writeln!(s, "coupling_a = {}", self.coupling_a);
        if let Some(v) = self.coupling_b {
            let _ = writeln!(s, "coupling_b = {v}");
        }
        if self.n_x.is_some() || self.n_t.is_some() || self.horizon.is_some() {
            let _ = writeln!(s, "[grid]");
            if let Some(v) = self.n_x {
                let _ = writeln!(s, "n_x = {v}");
            }
            if let Some(v) = self.n_t {
                let _ = writeln!(s, "n_t = {v}");
            }
            if let Some(v) = self.horizon {
                let _ = writeln!(s, "horizon = {v}");
            }
        }
        if let Some(kind) = &self.kind {
            let _ = writeln!(s, "[problem]");
            let _ = writeln!(s, "kind = {kind}");
            if let Some(v) = &self.initial_density {
                let _ = writeln!(s, "initial_density = {v}");
            }
            if let Some(v) = &self.terminal_cost {
                let _ = writeln!(s, "terminal_cost = {v}");
            }
            if let Some(v) = self.cost_a {
                let _ = writeln!(s, "cost_a = {v}");
            }
            if let Some(v) = self.cost_b {
                let _ = writeln!(s, "cost_b = {v}");
            }
            if let Some(v) = &self.terminal_density {
                let _ = writeln!(s, "terminal_density = {v}");
            }
            if !self.regularization_deltas.is_empty() {
                let list: Vec<String> = self
                    .regularization_deltas
                    .iter()
                    .map(|v| v.to_string())
                    .collect();
                let _ = writeln!(s, "regularization_deltas = {}", list.join(","));
            }
        }
        let _ = writeln!(s, "[solver]");
        let _ = writeln!(s, "newton_max_iter = {}", self.newton_max_iter);
        let _ = writeln!(s, "newton_rtol = {}", self.newton_rtol);
        let _ = writeln!(s, "newton_max_halvings = {}", self.newton_max_halvings);
        let _ = writeln!(s, "epsilon_start = {}", self.epsilon_start);
        let _ = writeln!(s, "epsilon_min = {}", self.epsilon_min);
        let _ = writeln!(s, "target_terminal_error = {}", self.target_terminal_error);
        let _ = writeln!(s, "stop_on_stall = {}", self.stop_on_stall);
        let _ = writeln!(s, "check_model = {}", self.check_model);
        let _ = writeln!(s, "[diagnostics]");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "monotonicity_samples = {}", self.monotonicity_samples);
        let _ = writeln!(s, "suite = {}", self.suite.join(","));
        if !self.t_values.is_empty() {
            let list: Vec<String> = self.t_values.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "[sweep]");
            let _ = writeln!(s, "t_values = {}", list.join(","));
        }
        s
    }
}
