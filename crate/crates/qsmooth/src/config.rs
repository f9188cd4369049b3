//! Experiment configuration: a flat `key = value` file with `#` comments,
//! overridden key by key from the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    WindowImage,
    GraphClique,
    Sentiment,
    TruthTable,
}

impl ExperimentKind {
    pub const ALL: [Self; 4] = [Self::WindowImage, Self::GraphClique, Self::Sentiment, Self::TruthTable];

    pub fn name(self) -> &'static str {
        match self {
            Self::WindowImage => "window_image",
            Self::GraphClique => "graph_clique",
            Self::Sentiment => "sentiment",
            Self::TruthTable => "truth_table",
        }
    }

    /// `(p₊, p₋, instance_count)` used when the config leaves them out.
    fn defaults(self) -> (f64, f64, usize) {
        match self {
            Self::WindowImage => (0.3, 0.3, 20),
            Self::GraphClique => (0.3, 0.0, 170),
            Self::Sentiment => (0.2, 0.0, 20),
            Self::TruthTable => (0.3, 0.3, 1),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            CliError::config(format!(
                "unknown experiment `{s}`; expected one of {}",
                names.join(", ")
            ))
        })
    }
}

pub const KEYS: &[&str] = &[
    "experiment",
    "p_plus",
    "p_minus",
    "counting_qubits",
    "delta",
    "mc_samples",
    "instance_count",
    "seed",
    "output_dir",
    "max_radius",
    "truth_table",
    "graph_file",
    "x",
    "instance_id",
    "per_shot",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub p_plus: f64,
    pub p_minus: f64,
    pub counting_qubits: Vec<usize>,
    pub delta: f64,
    pub mc_samples: Vec<u64>,
    pub instance_count: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Largest `r_a` and `r_d` on certificate grids; defaults to the code length.
    pub max_radius: Option<usize>,
    pub truth_table: Option<PathBuf>,
    pub graph_file: Option<PathBuf>,
    /// Base point for `single` (and the truth-table experiment).
    pub x: Option<String>,
    pub instance_id: usize,
    pub per_shot: bool,
}

/// Unvalidated key/value pairs in insertion-independent order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut raw = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            raw.set(key.trim(), value.trim()).map_err(|e| CliError::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(CliError::config(format!(
                "unknown key `{key}`; valid keys: {}",
                KEYS.join(", ")
            )));
        }
        self.entries.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let experiment: ExperimentKind = self.get("experiment").unwrap_or("window_image").parse()?;
        let (pp, pm, count) = experiment.defaults();
        let seed = self
            .get("seed")
            .ok_or_else(|| CliError::config("`seed` is required (set it in the config or pass --seed)"))?;
        let cfg = ExperimentConfig {
            experiment,
            p_plus: self.number("p_plus")?.unwrap_or(pp),
            p_minus: self.number("p_minus")?.unwrap_or(pm),
            counting_qubits: self.list("counting_qubits")?.unwrap_or_else(|| vec![4, 5, 6, 7, 8]),
            delta: self.number("delta")?.unwrap_or(0.01),
            mc_samples: self
                .list("mc_samples")?
                .unwrap_or_else(|| vec![100, 1_000, 10_000, 100_000, 1_000_000]),
            instance_count: self.number("instance_count")?.unwrap_or(count),
            seed: parse_value("seed", seed)?,
            output_dir: self
                .get("output_dir")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out")),
            max_radius: self.number("max_radius")?,
            truth_table: self.get("truth_table").map(PathBuf::from),
            graph_file: self.get("graph_file").map(PathBuf::from),
            x: self.get("x").map(str::to_string),
            instance_id: self.number("instance_id")?.unwrap_or(0),
            per_shot: self.number("per_shot")?.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn number<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key).map(|v| parse_value(key, v)).transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get(key)
            .map(|v| v.split(',').map(|item| parse_value(key, item.trim())).collect())
            .transpose()
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::config(format!("cannot parse `{value}` as a value for `{key}`")))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_plus", self.p_plus), ("p_minus", self.p_minus)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::config(format!("`{name}` must lie in [0, 1], got {p}")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CliError::config(format!(
                "`delta` must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.counting_qubits.is_empty() || self.counting_qubits.contains(&0) {
            return Err(CliError::config(
                "`counting_qubits` needs at least one entry, all positive",
            ));
        }
        if self.mc_samples.is_empty() || self.mc_samples.contains(&0) {
            return Err(CliError::config("`mc_samples` needs at least one entry, all positive"));
        }
        if self.experiment == ExperimentKind::TruthTable && (self.truth_table.is_none() || self.x.is_none()) {
            return Err(CliError::config(
                "the truth_table experiment needs both `truth_table` and `x`",
            ));
        }
        Ok(())
    }

    pub fn probs(&self) -> qsmooth_core::FlipProbabilities {
        qsmooth_core::FlipProbabilities::new(self.p_plus, self.p_minus).expect("validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        RawConfig::parse(text, Path::new("test.cfg"))?.resolve()
    }

    #[test]
    fn parses_file_with_comments_and_defaults() {
        let cfg = parse(
            "# graph run\nexperiment = graph_clique\nseed = 7   # fixed\ncounting_qubits = 3, 5,8\n\nmc_samples=10,20\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::GraphClique);
        assert_eq!((cfg.p_plus, cfg.p_minus, cfg.instance_count), (0.3, 0.0, 170));
        assert_eq!(cfg.counting_qubits, vec![3, 5, 8]);
        assert_eq!(cfg.mc_samples, vec![10, 20]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.delta, 0.01);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse("experiment = graph_clique"), Err(CliError::Config(m)) if m.contains("seed")));
        assert!(matches!(
            parse("seed = 1\nbogus = 3"),
            Err(CliError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("seed = 1\nno equals sign"),
            Err(CliError::Parse { line: 2, .. })
        ));
        assert!(matches!(parse("seed = 1\np_plus = 1.5"), Err(CliError::Config(_))));
        assert!(matches!(
            parse("seed = 1\ncounting_qubits = 3,0"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(parse("seed = 1\ndelta = 1"), Err(CliError::Config(_))));
        assert!(matches!(parse("seed = x"), Err(CliError::Config(_))));
        assert!(matches!(
            parse("seed = 1\nexperiment = mnist"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            parse("seed = 1\nexperiment = truth_table"),
            Err(CliError::Config(_))
        ));
        assert_eq!(parse("seed = 1\nexperiment = mnist").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut raw = RawConfig::parse("seed = 1\ndelta = 0.1\n", Path::new("c")).unwrap();
        raw.set("delta", "0.05").unwrap();
        raw.set("p_minus", "0.2").unwrap();
        let cfg = raw.resolve().unwrap();
        assert_eq!((cfg.delta, cfg.p_minus), (0.05, 0.2));
        assert!(raw.set("nope", "1").is_err());
    }
}
