//! TOML experiment documents.
//!
//! ```toml
//! schema_version = 1
//!
//! [run]
//! experiment = "two-arm"      # optional, default "run"
//! horizon = 2000
//! replications = 30
//! seed = 1
//! workers = 4                 # optional
//! output_dir = "results"      # optional, default "results"
//!
//! [environment]
//! label = "p=0.1"             # optional, default "custom"
//! mu = [0.75, 0.25]           # or one row per context
//! pi = [[0.9, 0.1], [0.1, 0.9]]   # or one matrix per context
//! context_probs = [1.0]       # optional, default uniform
//!
//! [[agents]]
//! kind = "ts-lat"             # ts | ts-check | ts-obs | ts-lat | uniform | oracle
//! alpha = 1.0                 # optional
//! beta = 1.0                  # optional
//! m = 40                      # optional soft start
//! vi = { tol = 1e-6, max_iter = 500, init = "warm" }   # optional
//! ```
//!
//! Parsing reports every violation at once. Unknown keys are violations.

use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::agents::{AgentKind, AgentSpec};
use crate::env::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::harness::ExperimentConfig;
use crate::vi::{InitMode, VIConfig};

pub const SCHEMA_VERSION: i64 = 1;

const TOP_KEYS: &[&str] = &["schema_version", "run", "environment", "agents"];
const RUN_KEYS: &[&str] = &[
    "experiment",
    "horizon",
    "replications",
    "seed",
    "workers",
    "output_dir",
];
const ENV_KEYS: &[&str] = &["label", "mu", "pi", "context_probs"];
const AGENT_KEYS: &[&str] = &["kind", "alpha", "beta", "m", "vi"];
const VI_KEYS: &[&str] = &["tol", "max_iter", "init"];

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let doc: Table = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
    let mut p = Issues::default();

    p.unknown_keys("", &doc, TOP_KEYS);
    match doc.get("schema_version") {
        None => p.push("missing schema_version"),
        Some(Value::Integer(SCHEMA_VERSION)) => {}
        Some(v) => p.push(format!(
            "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
        )),
    }

    let empty = Table::new();
    let run = p.table(&doc, "run").unwrap_or(&empty);
    p.unknown_keys("run.", run, RUN_KEYS);
    let experiment = p
        .opt_string(run, "run.experiment")
        .unwrap_or_else(|| "run".into());
    let horizon = p.req_count(run, "run.horizon", 1);
    let replications = p.req_count(run, "run.replications", 1);
    let seed = match run.get("seed") {
        None => {
            p.push("missing run.seed");
            0
        }
        Some(Value::Integer(s)) if *s >= 0 => *s as u64,
        Some(v) => {
            p.push(format!("run.seed must be a non-negative integer, got {v}"));
            0
        }
    };
    let workers = run
        .contains_key("workers")
        .then(|| p.req_count(run, "run.workers", 1));
    let output_dir = p
        .opt_string(run, "run.output_dir")
        .map_or_else(|| PathBuf::from("results"), PathBuf::from);

    let env = p.table(&doc, "environment").unwrap_or(&empty);
    p.unknown_keys("environment.", env, ENV_KEYS);
    let label = p
        .opt_string(env, "environment.label")
        .unwrap_or_else(|| "custom".into());
    let mu = p.matrix(env, "environment.mu");
    let pi = p.tensor(env, "environment.pi");
    let context_probs = match env.get("context_probs") {
        None => {
            let n = mu.as_ref().map_or(1, Vec::len).max(1);
            vec![1.0 / n as f64; n]
        }
        Some(v) => p.vector(v, "environment.context_probs").unwrap_or_default(),
    };
    let environment = match (mu, pi) {
        (Some(mu), Some(pi)) => {
            let spec = EnvironmentSpec {
                label,
                mu,
                pi,
                context_probs,
            };
            for issue in spec.issues() {
                p.push(format!("environment: {issue}"));
            }
            Some(spec)
        }
        _ => None,
    };

    let mut agents = Vec::new();
    match doc.get("agents") {
        None => p.push("missing [[agents]]"),
        Some(Value::Array(items)) if items.is_empty() => p.push("[[agents]] is empty"),
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                let at = format!("agents[{i}]");
                match item {
                    Value::Table(t) => {
                        if let Some(a) = p.agent(t, &at) {
                            agents.push(a);
                        }
                    }
                    _ => p.push(format!("{at} must be a table")),
                }
            }
        }
        Some(_) => p.push("agents must be an array of tables"),
    }

    if !p.0.is_empty() {
        return Err(Error::Config(p.0));
    }
    Ok(ExperimentConfig {
        experiment,
        environment: environment.expect("checked above"),
        agents,
        horizon,
        replications,
        seed,
        workers,
        output_dir,
    })
}

/// Serializes a config back to a document that parses to an equal value.
pub fn to_toml(config: &ExperimentConfig) -> Result<String> {
    let seed = i64::try_from(config.seed).map_err(|_| {
        Error::validation(format!("seed {} does not fit a TOML integer", config.seed))
    })?;
    let int = |n: usize| Value::Integer(n as i64);
    let floats = |v: &[f64]| Value::Array(v.iter().map(|&x| Value::Float(x)).collect());

    let mut run = Table::new();
    run.insert(
        "experiment".into(),
        Value::String(config.experiment.clone()),
    );
    run.insert("horizon".into(), int(config.horizon));
    run.insert("replications".into(), int(config.replications));
    run.insert("seed".into(), Value::Integer(seed));
    if let Some(w) = config.workers {
        run.insert("workers".into(), int(w));
    }
    run.insert(
        "output_dir".into(),
        Value::String(config.output_dir.to_string_lossy().into_owned()),
    );

    let e = &config.environment;
    let mut env = Table::new();
    env.insert("label".into(), Value::String(e.label.clone()));
    env.insert(
        "mu".into(),
        Value::Array(e.mu.iter().map(|r| floats(r)).collect()),
    );
    env.insert(
        "pi".into(),
        Value::Array(
            e.pi.iter()
                .map(|m| Value::Array(m.iter().map(|r| floats(r)).collect()))
                .collect(),
        ),
    );
    env.insert("context_probs".into(), floats(&e.context_probs));

    let agents = config
        .agents
        .iter()
        .map(|a| {
            let mut vi = Table::new();
            vi.insert("tol".into(), Value::Float(a.vi.tol));
            vi.insert("max_iter".into(), int(a.vi.max_iter));
            vi.insert("init".into(), Value::String(init_name(a.vi.init).into()));
            let mut t = Table::new();
            t.insert("kind".into(), Value::String(a.kind.as_str().into()));
            t.insert("alpha".into(), Value::Float(a.alpha));
            t.insert("beta".into(), Value::Float(a.beta));
            t.insert("m".into(), int(a.soft_start));
            t.insert("vi".into(), Value::Table(vi));
            Value::Table(t)
        })
        .collect();

    let mut doc = Table::new();
    doc.insert("schema_version".into(), Value::Integer(SCHEMA_VERSION));
    doc.insert("run".into(), Value::Table(run));
    doc.insert("environment".into(), Value::Table(env));
    doc.insert("agents".into(), Value::Array(agents));
    toml::to_string(&doc).map_err(|e| Error::State(format!("cannot serialize config: {e}")))
}

fn init_name(mode: InitMode) -> &'static str {
    match mode {
        InitMode::PriorSample => "prior-sample",
        InitMode::Uniform => "uniform",
        InitMode::Warm => "warm",
    }
}

fn parse_init(s: &str) -> Option<InitMode> {
    [InitMode::PriorSample, InitMode::Uniform, InitMode::Warm]
        .into_iter()
        .find(|m| init_name(*m) == s)
}

/// Accumulated schema violations.
#[derive(Default)]
struct Issues(Vec<String>);

impl Issues {
    fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    fn unknown_keys(&mut self, prefix: &str, table: &Table, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.push(format!("unknown key {prefix}{key}"));
            }
        }
    }

    fn table<'a>(&mut self, doc: &'a Table, key: &str) -> Option<&'a Table> {
        match doc.get(key) {
            None => {
                self.push(format!("missing [{key}]"));
                None
            }
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.push(format!("{key} must be a table"));
                None
            }
        }
    }

    fn leaf(path: &str) -> &str {
        path.rsplit('.').next().unwrap_or(path)
    }

    fn opt_string(&mut self, t: &Table, path: &str) -> Option<String> {
        match t.get(Self::leaf(path)) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(v) => {
                self.push(format!("{path} must be a string, got {v}"));
                None
            }
        }
    }

    fn req_count(&mut self, t: &Table, path: &str, min: i64) -> usize {
        match t.get(Self::leaf(path)) {
            None => {
                self.push(format!("missing {path}"));
                0
            }
            Some(Value::Integer(n)) if *n >= min => *n as usize,
            Some(v) => {
                self.push(format!("{path} must be an integer >= {min}, got {v}"));
                0
            }
        }
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(n) => Some(*n as f64),
            _ => {
                self.push(format!("{path} must be a number, got {v}"));
                None
            }
        }
    }

    fn positive(&mut self, t: &Table, path: &str, default: f64) -> f64 {
        let Some(v) = t.get(Self::leaf(path)) else {
            return default;
        };
        match self.number(v, path) {
            Some(x) if x.is_finite() && x > 0.0 => x,
            Some(x) => {
                self.push(format!("{path} must be > 0, got {x}"));
                default
            }
            None => default,
        }
    }

    fn vector(&mut self, v: &Value, path: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = v else {
            self.push(format!("{path} must be an array of numbers"));
            return None;
        };
        let before = self.0.len();
        let out: Vec<f64> = items
            .iter()
            .enumerate()
            .filter_map(|(i, x)| self.number(x, &format!("{path}[{i}]")))
            .collect();
        (self.0.len() == before).then_some(out)
    }

    fn depth(v: &Value) -> usize {
        match v {
            Value::Array(items) => 1 + items.first().map_or(0, Self::depth),
            _ => 0,
        }
    }

    /// Rows per context; a flat array is one context.
    fn matrix(&mut self, t: &Table, path: &str) -> Option<Vec<Vec<f64>>> {
        let Some(v) = t.get(Self::leaf(path)) else {
            self.push(format!("missing {path}"));
            return None;
        };
        match (Self::depth(v), v) {
            (1, _) => self.vector(v, path).map(|r| vec![r]),
            (2, Value::Array(rows)) => {
                let before = self.0.len();
                let out: Vec<_> = rows
                    .iter()
                    .enumerate()
                    .filter_map(|(i, r)| self.vector(r, &format!("{path}[{i}]")))
                    .collect();
                (self.0.len() == before).then_some(out)
            }
            _ => {
                self.push(format!("{path} must be a vector or a matrix of numbers"));
                None
            }
        }
    }

    /// Matrices per context; a single matrix is one context.
    fn tensor(&mut self, t: &Table, path: &str) -> Option<Vec<Vec<Vec<f64>>>> {
        let Some(v) = t.get(Self::leaf(path)) else {
            self.push(format!("missing {path}"));
            return None;
        };
        let as_matrix = |p: &mut Self, m: &Value, at: String| -> Option<Vec<Vec<f64>>> {
            let Value::Array(rows) = m else {
                p.push(format!("{at} must be a matrix"));
                return None;
            };
            let before = p.0.len();
            let out: Vec<_> = rows
                .iter()
                .enumerate()
                .filter_map(|(i, r)| p.vector(r, &format!("{at}[{i}]")))
                .collect();
            (p.0.len() == before).then_some(out)
        };
        match (Self::depth(v), v) {
            (2, _) => as_matrix(self, v, path.to_string()).map(|m| vec![m]),
            (3, Value::Array(ms)) => {
                let before = self.0.len();
                let out: Vec<_> = ms
                    .iter()
                    .enumerate()
                    .filter_map(|(x, m)| as_matrix(self, m, format!("{path}[{x}]")))
                    .collect();
                (self.0.len() == before).then_some(out)
            }
            _ => {
                self.push(format!("{path} must be a matrix or a list of matrices"));
                None
            }
        }
    }

    fn agent(&mut self, t: &Table, at: &str) -> Option<AgentSpec> {
        self.unknown_keys(&format!("{at}."), t, AGENT_KEYS);
        let kind = match t.get("kind") {
            None => {
                self.push(format!("missing {at}.kind"));
                None
            }
            Some(Value::String(s)) => {
                let k = AgentKind::parse(s);
                if k.is_none() {
                    self.push(format!(
                        "{at}.kind {s:?} is not one of ts, ts-check, ts-obs, ts-lat, uniform, oracle"
                    ));
                }
                k
            }
            Some(v) => {
                self.push(format!("{at}.kind must be a string, got {v}"));
                None
            }
        };
        let alpha = self.positive(t, &format!("{at}.alpha"), 1.0);
        let beta = self.positive(t, &format!("{at}.beta"), 1.0);
        let soft_start = if t.contains_key("m") {
            self.req_count(t, &format!("{at}.m"), 0)
        } else {
            0
        };
        let mut vi = VIConfig::default();
        match t.get("vi") {
            None => {}
            Some(Value::Table(v)) => {
                let path = format!("{at}.vi");
                self.unknown_keys(&format!("{path}."), v, VI_KEYS);
                vi.tol = self.positive(v, &format!("{path}.tol"), vi.tol);
                if v.contains_key("max_iter") {
                    vi.max_iter = self.req_count(v, &format!("{path}.max_iter"), 1);
                }
                match v.get("init") {
                    None => {}
                    Some(Value::String(s)) => match parse_init(s) {
                        Some(m) => vi.init = m,
                        None => self.push(format!(
                            "{path}.init {s:?} is not one of prior-sample, uniform, warm"
                        )),
                    },
                    Some(x) => self.push(format!("{path}.init must be a string, got {x}")),
                }
            }
            Some(_) => self.push(format!("{at}.vi must be a table")),
        }
        Some(AgentSpec {
            kind: kind?,
            alpha,
            beta,
            soft_start,
            vi,
        })
    }
}
