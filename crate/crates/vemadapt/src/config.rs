//! Line-oriented `key = value` run configuration.
//!
//! ```text
//! # plate with hole, threshold sweep
//! problem = A1
//! indicator = db, db+z2
//! T = 5, 10, 15, 20, 25
//! mesh = structured, voronoi
//! nu = 0.3, 0.49995
//! steps = 30
//! budget = 30000
//! seed = 7
//! stop_at_reference = true
//! emit = csv, svg
//! ```
//!
//! Every key is required. List-valued keys take comma-separated values.

use std::fmt;

use vemadapt_core::adapt::{AdaptConfig, Procedure};
use vemadapt_core::mesh::MeshMode;
use vemadapt_core::problems::ProblemId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line of the offending entry; `None` for a missing key.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line: Some(line), message: message.into() }
}

pub fn mode_name(mode: MeshMode) -> &'static str {
    match mode {
        MeshMode::Structured => "structured",
        MeshMode::Voronoi => "voronoi",
    }
}

pub fn parse_mode(s: &str) -> Option<MeshMode> {
    match s.trim().to_ascii_lowercase().as_str() {
        "structured" => Some(MeshMode::Structured),
        "voronoi" => Some(MeshMode::Voronoi),
        _ => None,
    }
}

/// Which artifacts a run writes besides the in-memory records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Emit {
    pub csv: bool,
    pub svg: bool,
    pub mesh: bool,
}

impl Emit {
    pub fn parse(s: &str) -> Result<Emit, String> {
        let mut e = Emit::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "csv" => e.csv = true,
                "svg" => e.svg = true,
                "mesh" => e.mesh = true,
                other => return Err(format!("unknown emit kind '{other}'")),
            }
        }
        Ok(e)
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.csv {
            parts.push("csv");
        }
        if self.svg {
            parts.push("svg");
        }
        if self.mesh {
            parts.push("mesh");
        }
        parts.join(", ")
    }
}

/// One adaptive (or uniform) run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub problem: ProblemId,
    pub procedure: Procedure,
    pub threshold: f64,
    pub mode: MeshMode,
    pub nu: f64,
    pub steps: usize,
    pub budget: usize,
    pub seed: u64,
    pub stop_at_reference: bool,
}

impl RunSpec {
    /// File stem identifying the run inside an output directory.
    pub fn key(&self) -> String {
        let proc = match self.procedure {
            Procedure::Reference => "REFERENCE".to_string(),
            p => format!("{}-T{}", p.label(), self.threshold),
        };
        format!(
            "{}-{}-nu{}-{}-seed{}",
            self.problem.name(),
            mode_name(self.mode),
            self.nu,
            proc,
            self.seed
        )
    }

    /// Runs sharing a group are compared with each other.
    pub fn group(&self) -> Group {
        Group { problem: self.problem, mode: self.mode, nu: self.nu, seed: self.seed }
    }

    /// The uniform run this run is measured against.
    pub fn reference(&self) -> RunSpec {
        RunSpec { procedure: Procedure::Reference, threshold: 100.0, stop_at_reference: false, ..*self }
    }

    pub fn adapt_config(&self) -> AdaptConfig {
        AdaptConfig {
            procedure: self.procedure,
            threshold: self.threshold,
            max_steps: self.steps,
            node_budget: self.budget,
            mode: self.mode,
            rng_seed: self.seed,
            target_error: None,
        }
    }

    /// `key = value` lines accepted by [`RunSpec::parse`].
    pub fn to_lines(&self) -> Vec<String> {
        vec![
            format!("problem = {}", self.problem.name()),
            format!("indicator = {}", self.procedure.label()),
            format!("T = {}", self.threshold),
            format!("mesh = {}", mode_name(self.mode)),
            format!("nu = {}", self.nu),
            format!("steps = {}", self.steps),
            format!("budget = {}", self.budget),
            format!("seed = {}", self.seed),
            format!("stop_at_reference = {}", self.stop_at_reference),
        ]
    }

    pub fn parse(text: &str) -> Result<RunSpec, ConfigError> {
        let entries = Entries::parse(text, RUN_KEYS)?;
        let one = |key: &str| -> Result<(usize, String), ConfigError> {
            let (line, vals) = entries.get(key)?;
            match vals.as_slice() {
                [v] => Ok((line, v.clone())),
                _ => Err(err(line, format!("'{key}' takes a single value"))),
            }
        };
        let (l, v) = one("problem")?;
        let problem = parse_problem(l, &v)?;
        let (l, v) = one("indicator")?;
        let procedure = parse_procedure(l, &v)?;
        let (l, v) = one("T")?;
        let threshold = parse_threshold(l, &v)?;
        let (l, v) = one("mesh")?;
        let mode = parse_mode(&v).ok_or_else(|| err(l, format!("unknown mesh mode '{v}'")))?;
        let (l, v) = one("nu")?;
        let nu = parse_nu(l, &v)?;
        let (l, v) = one("steps")?;
        let steps = parse_count(l, "steps", &v)?;
        let (l, v) = one("budget")?;
        let budget = parse_count(l, "budget", &v)?;
        let (l, v) = one("seed")?;
        let seed = v.parse().map_err(|_| err(l, format!("invalid seed '{v}'")))?;
        let (l, v) = one("stop_at_reference")?;
        let stop_at_reference = parse_bool(l, &v)?;
        Ok(RunSpec { problem, procedure, threshold, mode, nu, steps, budget, seed, stop_at_reference })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Group {
    pub problem: ProblemId,
    pub mode: MeshMode,
    pub nu: f64,
    pub seed: u64,
}

impl Group {
    pub fn key(&self) -> String {
        format!("{}-{}-nu{}-seed{}", self.problem.name(), mode_name(self.mode), self.nu, self.seed)
    }
}

/// A sweep over problems, procedures, thresholds, mesh modes and Poisson
/// ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub problems: Vec<ProblemId>,
    pub procedures: Vec<Procedure>,
    pub thresholds: Vec<f64>,
    pub modes: Vec<MeshMode>,
    pub nus: Vec<f64>,
    pub steps: usize,
    pub budget: usize,
    pub seed: u64,
    /// Stop adaptive runs once they reach the final error of their group's
    /// uniform run.
    pub stop_at_reference: bool,
    pub emit: Emit,
}

const RUN_KEYS: &[&str] =
    &["problem", "indicator", "T", "mesh", "nu", "steps", "budget", "seed", "stop_at_reference"];
const SWEEP_KEYS: &[&str] =
    &["problem", "indicator", "T", "mesh", "nu", "steps", "budget", "seed", "stop_at_reference", "emit"];

impl SweepConfig {
    pub fn parse(text: &str) -> Result<SweepConfig, ConfigError> {
        let entries = Entries::parse(text, SWEEP_KEYS)?;
        let single = |key: &str| -> Result<(usize, String), ConfigError> {
            let (line, vals) = entries.get(key)?;
            match vals.as_slice() {
                [v] => Ok((line, v.clone())),
                _ => Err(err(line, format!("'{key}' takes a single value"))),
            }
        };
        let list = |key: &str| entries.get(key);

        let (l, vals) = list("problem")?;
        let problems = vals.iter().map(|v| parse_problem(l, v)).collect::<Result<_, _>>()?;
        let (l, vals) = list("indicator")?;
        let procedures = vals.iter().map(|v| parse_procedure(l, v)).collect::<Result<_, _>>()?;
        let (l, vals) = list("T")?;
        let thresholds = vals.iter().map(|v| parse_threshold(l, v)).collect::<Result<_, _>>()?;
        let (l, vals) = list("mesh")?;
        let modes = vals
            .iter()
            .map(|v| parse_mode(v).ok_or_else(|| err(l, format!("unknown mesh mode '{v}'"))))
            .collect::<Result<_, _>>()?;
        let (l, vals) = list("nu")?;
        let nus = vals.iter().map(|v| parse_nu(l, v)).collect::<Result<_, _>>()?;
        let (l, v) = single("steps")?;
        let steps = parse_count(l, "steps", &v)?;
        let (l, v) = single("budget")?;
        let budget = parse_count(l, "budget", &v)?;
        let (l, v) = single("seed")?;
        let seed = v.parse().map_err(|_| err(l, format!("invalid seed '{v}'")))?;
        let (l, v) = single("stop_at_reference")?;
        let stop_at_reference = parse_bool(l, &v)?;
        let (l, vals) = list("emit")?;
        let emit = Emit::parse(&vals.join(",")).map_err(|m| err(l, m))?;
        Ok(SweepConfig { problems, procedures, thresholds, modes, nus, steps, budget, seed, stop_at_reference, emit })
    }

    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let lines = [
            format!("problem = {}", join(self.problems.iter().map(|p| p.name().to_string()).collect())),
            format!("indicator = {}", join(self.procedures.iter().map(|p| p.label()).collect())),
            format!("T = {}", join(self.thresholds.iter().map(|t| t.to_string()).collect())),
            format!("mesh = {}", join(self.modes.iter().map(|m| mode_name(*m).to_string()).collect())),
            format!("nu = {}", join(self.nus.iter().map(|n| n.to_string()).collect())),
            format!("steps = {}", self.steps),
            format!("budget = {}", self.budget),
            format!("seed = {}", self.seed),
            format!("stop_at_reference = {}", self.stop_at_reference),
            format!("emit = {}", self.emit.label()),
        ];
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    /// Every run of the sweep. Each (problem, mesh, nu) group gets one
    /// uniform run first, whether or not `reference` is listed.
    pub fn runs(&self) -> Vec<RunSpec> {
        let mut out = Vec::new();
        for &problem in &self.problems {
            for &mode in &self.modes {
                for &nu in &self.nus {
                    let base = RunSpec {
                        problem,
                        procedure: Procedure::Reference,
                        threshold: 100.0,
                        mode,
                        nu,
                        steps: self.steps,
                        budget: self.budget,
                        seed: self.seed,
                        stop_at_reference: false,
                    };
                    out.push(base);
                    for &procedure in &self.procedures {
                        if procedure == Procedure::Reference {
                            continue;
                        }
                        for &threshold in &self.thresholds {
                            out.push(RunSpec {
                                procedure,
                                threshold,
                                stop_at_reference: self.stop_at_reference,
                                ..base
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

struct Entries {
    items: Vec<(usize, String, Vec<String>)>,
}

impl Entries {
    fn parse(text: &str, allowed: &[&str]) -> Result<Entries, ConfigError> {
        let mut items: Vec<(usize, String, Vec<String>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(err(line, format!("expected 'key = value', found '{content}'")));
            };
            let key = k.trim();
            if !allowed.contains(&key) {
                return Err(err(line, format!("unknown key '{key}'")));
            }
            if let Some((first, ..)) = items.iter().find(|(_, k, _)| k == key) {
                return Err(err(line, format!("duplicate key '{key}' (first set on line {first})")));
            }
            let values: Vec<String> =
                v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            if values.is_empty() && key != "emit" {
                return Err(err(line, format!("'{key}' has no value")));
            }
            items.push((line, key.to_string(), values));
        }
        for key in allowed {
            if !items.iter().any(|(_, k, _)| k == key) {
                return Err(ConfigError { line: None, message: format!("missing key '{key}'") });
            }
        }
        Ok(Entries { items })
    }

    fn get(&self, key: &str) -> Result<(usize, Vec<String>), ConfigError> {
        self.items
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.clone()))
            .ok_or_else(|| ConfigError { line: None, message: format!("missing key '{key}'") })
    }
}

fn parse_problem(line: usize, v: &str) -> Result<ProblemId, ConfigError> {
    ProblemId::parse(v).map_err(|e| err(line, e.to_string()))
}

fn parse_procedure(line: usize, v: &str) -> Result<Procedure, ConfigError> {
    Procedure::parse(v).map_err(|e| err(line, e.to_string()))
}

fn parse_threshold(line: usize, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(t) if t > 0.0 && t <= 100.0 => Ok(t),
        _ => Err(err(line, format!("threshold '{v}' is not in (0, 100]"))),
    }
}

fn parse_nu(line: usize, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(n) if n > -1.0 && n < 0.5 => Ok(n),
        _ => Err(err(line, format!("Poisson ratio '{v}' is not in (-1, 0.5)"))),
    }
}

fn parse_count(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    match v.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(err(line, format!("'{key}' must be a positive integer, found '{v}'"))),
    }
}

fn parse_bool(line: usize, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(err(line, format!("expected true or false, found '{v}'"))),
    }
}
