//! CSV and JSON result files.
//!
//! Numbers are printed like C's `%.17g` so every value round-trips exactly and
//! the text never depends on locale.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{ExcessSuccessReport, RunOutput, SweepRow};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACES_FILE: &str = "traces.csv";
pub const SWEEP_FILE: &str = "sweep_table.csv";
pub const EXCESS_FILE: &str = "excess.csv";

pub const RESULTS_HEADER: [&str; 8] = [
    "experiment",
    "agent",
    "replication",
    "seed",
    "label",
    "final_regret",
    "vi_converged_frac",
    "wall_ms",
];
pub const SUMMARY_HEADER: [&str; 6] = ["label", "agent", "q50", "mean", "std", "n"];

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e17)`.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.16e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let sign = if x < 0.0 { "-" } else { "" };
    if !(-4..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let dot = if tail.is_empty() { "" } else { "." };
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{head}{dot}{tail}e{esign}{:02}", exp.abs());
    }
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        return format!("{sign}0.{zeros}{digits}");
    }
    let int_len = exp as usize + 1;
    if digits.len() <= int_len {
        format!("{sign}{digits}{}", "0".repeat(int_len - digits.len()))
    } else {
        format!("{sign}{}.{}", &digits[..int_len], &digits[int_len..])
    }
}

/// Run manifest: what ran, with which seed, and the configuration echo.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub master_seed: u64,
    pub horizon: usize,
    pub replications: usize,
    /// Preset parameters or the parsed config, as structured data.
    pub parameters: serde_json::Value,
    /// The config as a TOML document, when the run came from one.
    pub config_toml: Option<String>,
    pub records: usize,
    pub failures: Vec<String>,
}

impl Manifest {
    pub fn new(experiment: &str, seed: u64, horizon: usize, replications: usize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment: experiment.to_string(),
            master_seed: seed,
            horizon,
            replications,
            parameters: serde_json::Value::Null,
            config_toml: None,
            records: 0,
            failures: Vec::new(),
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Writes `results.csv`, `summary.csv`, `manifest.json` and, when the run kept
/// them, `traces.csv`. Returns the paths written.
pub fn write_results(dir: &Path, out: &RunOutput, manifest: &Manifest) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();

    let path = dir.join(RESULTS_FILE);
    let mut w = writer(&path)?;
    w.write_record(RESULTS_HEADER)?;
    for r in &out.records {
        w.write_record([
            r.experiment.clone(),
            r.agent.clone(),
            r.replication.to_string(),
            r.seed.to_string(),
            r.label.clone(),
            fmt_g17(r.final_regret),
            fmt_g17(r.vi_converged_frac),
            fmt_g17(r.wall_ms),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let path = dir.join(SUMMARY_FILE);
    let mut w = writer(&path)?;
    w.write_record(SUMMARY_HEADER)?;
    for row in out.summaries() {
        let s = row.stats;
        w.write_record([
            row.label,
            row.agent,
            fmt_g17(s.q50),
            fmt_g17(s.mean),
            fmt_g17(s.std),
            s.n.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    if !out.traces.is_empty() {
        let path = dir.join(TRACES_FILE);
        let mut w = writer(&path)?;
        w.write_record([
            "experiment",
            "label",
            "agent",
            "replication",
            "t",
            "cumulative_regret",
        ])?;
        for (r, trace) in out.records.iter().zip(&out.traces) {
            for (t, v) in trace.iter().enumerate() {
                w.write_record([
                    r.experiment.clone(),
                    r.label.clone(),
                    r.agent.clone(),
                    r.replication.to_string(),
                    (t + 1).to_string(),
                    fmt_g17(*v),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    let mut manifest = manifest.clone();
    manifest.records = out.records.len();
    manifest.failures = out
        .failures
        .iter()
        .map(|f| {
            format!(
                "{} {} replication {}: {}",
                f.label, f.agent, f.replication, f.message
            )
        })
        .collect();
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// `sweep_table.csv`: one row per `(p, agent)`.
pub fn write_sweep_table(dir: &Path, rows: &[SweepRow]) -> Result<PathBuf> {
    create_dir(dir)?;
    let path = dir.join(SWEEP_FILE);
    let mut w = writer(&path)?;
    w.write_record(["p", "agent", "mean", "std", "n", "flagged"])?;
    for r in rows {
        w.write_record([
            fmt_g17(r.p),
            r.agent.clone(),
            fmt_g17(r.stats.mean),
            fmt_g17(r.stats.std),
            r.stats.n.to_string(),
            r.flagged.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// `excess.csv`: expected excess successes over the uniform baseline.
pub fn write_excess(dir: &Path, reports: &[ExcessSuccessReport]) -> Result<PathBuf> {
    create_dir(dir)?;
    let path = dir.join(EXCESS_FILE);
    let mut w = writer(&path)?;
    w.write_record([
        "class",
        "agent",
        "mean_regret",
        "excess_successes",
        "sem",
        "n",
    ])?;
    for report in reports {
        for r in &report.rows {
            w.write_record([
                report.class.as_str().to_string(),
                r.agent.clone(),
                fmt_g17(r.mean_regret),
                fmt_g17(r.excess),
                fmt_g17(r.sem),
                r.n.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_c_printf() {
        // expected strings from printf("%.17g")
        let cases = [
            (0.1, "0.10000000000000001"),
            (250.0, "250"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (0.0001, "0.0001"),
            (123456789012345680.0, "1.2345678901234568e+17"),
            (1e17, "1e+17"),
            (12.345, "12.345000000000001"),
            (0.0, "0"),
            (f64::INFINITY, "inf"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_g17(x), s, "{x}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for x in [
            0.1,
            1.0 / 3.0,
            2.0f64.sqrt() * 1e10,
            6.02e23,
            1e-300,
            4.9e-324,
        ] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empty_output_gives_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_results(
            dir.path(),
            &RunOutput::default(),
            &Manifest::new("x", 5, 10, 1),
        )
        .unwrap();
        assert_eq!(paths.len(), 3);
        let results = fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap();
        assert_eq!(
            results,
            "experiment,agent,replication,seed,label,final_regret,vi_converged_frac,wall_ms\n"
        );
        let summary = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert_eq!(summary, "label,agent,q50,mean,std,n\n");
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap())
                .unwrap();
        assert_eq!(manifest["master_seed"], 5);
        assert_eq!(manifest["tool"], "ncbandit");
    }
}
