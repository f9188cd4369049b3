//! Experiment drivers. Each returns the files it would write as in-memory
//! text so runs can be compared byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use qsmooth_core::certify::{
    certificate_grid, exact_smooth, mc_estimate, CertificateGrid, RadiusAxis, SmoothEvaluation,
};
use qsmooth_core::qae::{build_grover, estimate, required_repeats, PhaseEstimation, QaeConfig};
use qsmooth_core::MAX_QUBITS;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiments::{build_instances, desk_scale_note, radius_axis, Instance};
use crate::numfmt::g12;
use crate::svg;

pub const RESULT_HEADER: [&str; 8] = [
    "instance_id",
    "method",
    "budget",
    "g_exact",
    "g_point",
    "g_lower",
    "oracle_calls",
    "certified_max_radius",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Exact,
    MonteCarlo { samples: u64 },
    Qae { counting_qubits: usize },
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::MonteCarlo { .. } => "mc",
            Self::Qae { .. } => "qae",
        }
    }

    /// 0 for exact, samples for MC, counting qubits for QAE.
    pub fn budget(self) -> u64 {
        match self {
            Self::Exact => 0,
            Self::MonteCarlo { samples } => samples,
            Self::Qae { counting_qubits } => counting_qubits as u64,
        }
    }

    fn tag(self) -> u64 {
        match self {
            Self::Exact => 0,
            Self::MonteCarlo { .. } => 1,
            Self::Qae { .. } => 2,
        }
    }
}

/// One CSV row of the result schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance_id: usize,
    pub method: Method,
    pub g_exact: f64,
    pub g_point: f64,
    pub g_lower: f64,
    pub oracle_calls: u64,
    /// `None` when not even the clean input is certified.
    pub certified_max_radius: Option<usize>,
}

impl ResultRow {
    fn record(&self) -> [String; 8] {
        [
            self.instance_id.to_string(),
            self.method.name().to_string(),
            self.method.budget().to_string(),
            g12(self.g_exact),
            g12(self.g_point),
            g12(self.g_lower),
            self.oracle_calls.to_string(),
            self.certified_max_radius
                .map_or_else(|| "-1".to_string(), |r| r.to_string()),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Evaluated {
    pub row: ResultRow,
    /// Certificates for the instance's label class.
    pub grid: CertificateGrid,
}

/// Files produced by a run, keyed by file name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outputs {
    pub files: BTreeMap<String, String>,
}

impl Outputs {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (name, content) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }
}

/// SplitMix64 finaliser over the run seed and a stream identity, so each
/// (instance, method, budget) draws from its own generator.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(seed, |acc, &p| {
        let mut z = acc
            ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15)
                .wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    })
}

fn check_budget(instances: &[Instance], methods: &[Method]) -> Result<()> {
    let t_max = methods
        .iter()
        .filter_map(|m| match m {
            Method::Qae { counting_qubits } => Some(*counting_qubits),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let n = instances.iter().map(|i| i.x.len()).max().unwrap_or(0);
    if n + t_max > MAX_QUBITS {
        return Err(CliError::Budget(qsmooth_core::Error::QubitBudget {
            qubits: n + t_max,
            max: MAX_QUBITS,
        }));
    }
    Ok(())
}

fn grid_extent(cfg: &ExperimentConfig, inst: &Instance) -> usize {
    cfg.max_radius.unwrap_or(inst.x.len())
}

/// Evaluates `inst` under every method and certifies the label class.
pub fn evaluate_instance(cfg: &ExperimentConfig, inst: &Instance, methods: &[Method]) -> Result<Vec<Evaluated>> {
    let probs = cfg.probs();
    let axis = radius_axis(&probs);
    let exact = exact_smooth(&inst.x, &probs, &inst.oracle)?;
    let grover = build_grover(&inst.x, &probs, &inst.oracle)?;
    let repeats = required_repeats(cfg.delta)?;
    let extent = grid_extent(cfg, inst);
    methods
        .iter()
        .map(|&method| {
            let seed = derive_seed(cfg.seed, &[inst.id as u64, method.tag(), method.budget()]);
            let eval = match method {
                Method::Exact => exact,
                Method::MonteCarlo { samples } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    mc_estimate(&inst.x, &probs, &inst.oracle, samples, cfg.delta, &mut rng)?
                }
                Method::Qae { counting_qubits } if cfg.per_shot => {
                    let qcfg = QaeConfig {
                        counting_qubits,
                        delta: cfg.delta,
                        repeats,
                        seed,
                        per_shot: true,
                    };
                    SmoothEvaluation::from_qae(&estimate(&inst.x, &probs, &inst.oracle, &qcfg)?)
                }
                Method::Qae { counting_qubits } => {
                    let pe = PhaseEstimation::simulate(&grover, counting_qubits)?;
                    SmoothEvaluation::from_qae(&pe.boosted_estimate(repeats, cfg.delta, seed)?)
                }
            };
            let grid = certificate_grid(&eval.for_class(inst.label), &inst.x, &probs, extent, extent)?;
            let row = ResultRow {
                instance_id: inst.id,
                method,
                g_exact: exact.value,
                g_point: eval.value,
                g_lower: eval.lower,
                oracle_calls: eval.oracle_calls,
                certified_max_radius: grid.max_certified_radius(axis),
            };
            Ok(Evaluated { row, grid })
        })
        .collect()
}

/// All instances under all methods, in instance order.
pub fn evaluate_all(cfg: &ExperimentConfig, methods: &[Method]) -> Result<Vec<Vec<Evaluated>>> {
    let instances = build_instances(cfg)?;
    check_budget(&instances, methods)?;
    instances
        .par_iter()
        .map(|inst| evaluate_instance(cfg, inst, methods))
        .collect()
}

fn certification_methods(cfg: &ExperimentConfig) -> Vec<Method> {
    let mut ts = cfg.counting_qubits.clone();
    ts.sort_unstable();
    ts.dedup();
    std::iter::once(Method::Exact)
        .chain(ts.into_iter().map(|t| Method::Qae { counting_qubits: t }))
        .collect()
}

fn csv_text<I, R>(comment: Option<&str>, header: &[&str], records: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut buf = Vec::new();
    if let Some(c) = comment {
        for line in c.lines() {
            buf.extend_from_slice(format!("# {line}\n").as_bytes());
        }
    }
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        w.write_record(header)?;
        for r in records {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| CliError::Csv(e.into()))?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn results_csv(evaluated: &[Vec<Evaluated>]) -> Result<String> {
    csv_text(None, &RESULT_HEADER, evaluated.iter().flatten().map(|e| e.row.record()))
}

fn header_comment(cfg: &ExperimentConfig) -> String {
    format!(
        "{}\np_plus={} p_minus={} delta={} seed={}",
        desk_scale_note(cfg.experiment),
        g12(cfg.p_plus),
        g12(cfg.p_minus),
        g12(cfg.delta),
        cfg.seed
    )
}

/// Per-method certified fractions over the `(r_a, r_d)` rectangle.
pub fn run_heatmap(cfg: &ExperimentConfig) -> Result<Outputs> {
    let methods = certification_methods(cfg);
    let evaluated = evaluate_all(cfg, &methods)?;
    let total = evaluated.len() as f64;
    let mut cells = Vec::new();
    for (k, method) in methods.iter().enumerate() {
        let grids: Vec<&CertificateGrid> = evaluated.iter().map(|e| &e[k].grid).collect();
        let (ra, rd) = (grids[0].max_ra(), grids[0].max_rd());
        for a in 0..=ra {
            for d in 0..=rd {
                let hits = grids.iter().filter(|g| g.certified(a, d).unwrap_or(false)).count();
                cells.push([
                    method.name().to_string(),
                    method.budget().to_string(),
                    a.to_string(),
                    d.to_string(),
                    g12(hits as f64 / total),
                ]);
            }
        }
    }
    let cells_csv = csv_text(Some(&header_comment(cfg)), &svg::HEATMAP_HEADER, cells)?;
    let mut out = Outputs::default();
    out.files.insert("heatmap.csv".into(), results_csv(&evaluated)?);
    out.files.insert("heatmap.svg".into(), svg::render_heatmap(&cells_csv)?);
    out.files.insert("heatmap_cells.csv".into(), cells_csv);
    Ok(out)
}

/// Certified fraction against radius, one series per method.
pub fn certified_ratio_curves(
    cfg: &ExperimentConfig,
    methods: &[Method],
    evaluated: &[Vec<Evaluated>],
) -> Vec<(Method, Vec<f64>)> {
    let axis = radius_axis(&cfg.probs());
    let total = evaluated.len() as f64;
    methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let grids: Vec<&CertificateGrid> = evaluated.iter().map(|e| &e[k].grid).collect();
            let max_r = grids
                .iter()
                .map(|g| match axis {
                    RadiusAxis::Additions => g.max_ra(),
                    RadiusAxis::Deletions => g.max_rd(),
                    RadiusAxis::Total => g.max_ra() + g.max_rd(),
                })
                .max()
                .unwrap_or(0);
            let curve = (0..=max_r)
                .map(|r| grids.iter().filter(|g| g.certified_at(axis, r)).count() as f64 / total)
                .collect();
            (method, curve)
        })
        .collect()
}

pub fn run_certified_ratio(cfg: &ExperimentConfig) -> Result<Outputs> {
    let methods = certification_methods(cfg);
    let evaluated = evaluate_all(cfg, &methods)?;
    let curves = certified_ratio_curves(cfg, &methods, &evaluated);
    let rows = curves.iter().flat_map(|(m, c)| {
        c.iter()
            .enumerate()
            .map(move |(r, f)| [m.name().to_string(), m.budget().to_string(), r.to_string(), g12(*f)])
    });
    let axis = match radius_axis(&cfg.probs()) {
        RadiusAxis::Additions => "radius = additions r_a",
        RadiusAxis::Deletions => "radius = deletions r_d",
        RadiusAxis::Total => "radius = r_a + r_d (every split certified)",
    };
    let comment = format!("{}\n{axis}", header_comment(cfg));
    let curve_csv = csv_text(Some(&comment), &svg::CURVE_HEADER, rows)?;
    let mut out = Outputs::default();
    out.files.insert("certified_ratio.csv".into(), results_csv(&evaluated)?);
    out.files
        .insert("certified_ratio.svg".into(), svg::render_certified_ratio(&curve_csv)?);
    out.files.insert("certified_ratio_curve.csv".into(), curve_csv);
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Mean absolute error per (method, budget) and the fitted log-log slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSummary {
    /// `(method, oracle_calls, mean |estimate − g|)` in method then budget order.
    pub points: Vec<(Method, u64, f64)>,
    pub mc_slope: Option<f64>,
    pub qae_slope: Option<f64>,
}

impl ConvergenceSummary {
    /// Exponent `k` in `N_classical ~ N_quantum^k` at equal error.
    pub fn exponent(&self) -> Option<f64> {
        Some(self.qae_slope? / self.mc_slope?)
    }
}

pub fn summarize_convergence(methods: &[Method], evaluated: &[Vec<Evaluated>]) -> ConvergenceSummary {
    let points: Vec<(Method, u64, f64)> = methods
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let rows: Vec<&ResultRow> = evaluated.iter().map(|e| &e[k].row).collect();
            let err = rows.iter().map(|r| (r.g_point - r.g_exact).abs()).sum::<f64>() / rows.len() as f64;
            let calls = rows.iter().map(|r| r.oracle_calls).sum::<u64>() / rows.len() as u64;
            (m, calls, err)
        })
        .collect();
    let fit = |name: &str| {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.0.name() == name)
            .map(|p| (p.1 as f64, p.2))
            .collect();
        loglog_slope(&pts)
    };
    ConvergenceSummary {
        mc_slope: fit("mc"),
        qae_slope: fit("qae"),
        points,
    }
}

pub fn convergence_methods(cfg: &ExperimentConfig) -> Vec<Method> {
    let mut samples = cfg.mc_samples.clone();
    samples.sort_unstable();
    samples.dedup();
    let mut ts = cfg.counting_qubits.clone();
    ts.sort_unstable();
    ts.dedup();
    samples
        .into_iter()
        .map(|s| Method::MonteCarlo { samples: s })
        .chain(ts.into_iter().map(|t| Method::Qae { counting_qubits: t }))
        .collect()
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Outputs> {
    let methods = convergence_methods(cfg);
    let evaluated = evaluate_all(cfg, &methods)?;
    let summary = summarize_convergence(&methods, &evaluated);
    let rows = summary.points.iter().map(|(m, calls, err)| {
        [
            m.name().to_string(),
            m.budget().to_string(),
            calls.to_string(),
            g12(*err),
        ]
    });
    let mut text = csv_text(Some(&header_comment(cfg)), &svg::CONVERGENCE_HEADER, rows)?;
    let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), g12);
    let _ = writeln!(text, "# slope_mc={}", opt(summary.mc_slope));
    let _ = writeln!(text, "# slope_qae={}", opt(summary.qae_slope));
    let _ = writeln!(text, "# exponent={}", opt(summary.exponent()));
    let mut out = Outputs::default();
    out.files.insert("convergence.csv".into(), results_csv(&evaluated)?);
    out.files
        .insert("convergence.svg".into(), svg::render_convergence(&text)?);
    out.files.insert("convergence_summary.csv".into(), text);
    Ok(out)
}

fn grid_picture(grid: &CertificateGrid) -> String {
    let mut s = String::from("      r_d→\n");
    for a in 0..=grid.max_ra() {
        let _ = write!(s, "r_a={a:<2} ");
        for d in 0..=grid.max_rd() {
            s.push(if grid.certified(a, d).unwrap_or(false) {
                '#'
            } else {
                '.'
            });
        }
        s.push('\n');
    }
    s
}

/// Human-readable report for one instance.
pub fn run_single(cfg: &ExperimentConfig) -> Result<String> {
    let instances = build_instances(cfg)?;
    let mut inst = instances
        .into_iter()
        .find(|i| i.id == cfg.instance_id)
        .ok_or_else(|| CliError::config(format!("no instance with id {}", cfg.instance_id)))?;
    if let Some(x) = &cfg.x {
        let x: qsmooth_core::BitString = x.parse()?;
        if x.len() != inst.x.len() {
            return Err(CliError::config(format!(
                "`x` must have {} bits for {}",
                inst.x.len(),
                cfg.experiment
            )));
        }
        inst.label = inst.oracle.get(&x)?;
        inst.x = x;
    }
    let mut methods = vec![Method::Exact];
    methods.extend(cfg.mc_samples.iter().map(|&s| Method::MonteCarlo { samples: s }));
    methods.extend(cfg.counting_qubits.iter().map(|&t| Method::Qae { counting_qubits: t }));
    check_budget(std::slice::from_ref(&inst), &methods)?;
    let evaluated = evaluate_instance(cfg, &inst, &methods)?;
    let probs = cfg.probs();
    let mut s = String::new();
    let _ = writeln!(s, "{}", desk_scale_note(cfg.experiment));
    let _ = writeln!(
        s,
        "instance {}  x = {}  label = {}",
        inst.id,
        inst.x,
        u8::from(inst.label)
    );
    let _ = writeln!(
        s,
        "p_plus = {}  p_minus = {}  delta = {}  seed = {}",
        g12(probs.p_plus()),
        g12(probs.p_minus()),
        g12(cfg.delta),
        cfg.seed
    );
    let _ = writeln!(s, "g_exact = {}", g12(evaluated[0].row.g_exact));
    let _ = writeln!(
        s,
        "{:<6} {:>8} {:>16} {:>16} {:>14} {:>8}",
        "method", "budget", "g_point", "g_lower", "oracle_calls", "radius"
    );
    for e in &evaluated {
        let r = &e.row;
        let radius = r
            .certified_max_radius
            .map_or_else(|| "-1".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{:<6} {:>8} {:>16} {:>16} {:>14} {:>8}",
            r.method.name(),
            r.method.budget(),
            g12(r.g_point),
            g12(r.g_lower),
            r.oracle_calls,
            radius
        );
    }
    let _ = writeln!(s, "\ncertificates for class {} (exact):", u8::from(inst.label));
    s.push_str(&grid_picture(&evaluated[0].grid));
    if let Some(best_qae) = evaluated
        .iter()
        .rev()
        .find(|e| matches!(e.row.method, Method::Qae { .. }))
    {
        let _ = writeln!(
            s,
            "\ncertificates for class {} (qae, t = {}):",
            u8::from(inst.label),
            best_qae.row.method.budget()
        );
        s.push_str(&grid_picture(&best_qae.grid));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&x: &f64| (x, 3.0 * x.powf(-0.5)))
            .collect();
        assert!((loglog_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&[(1.0, 1.0)]), None);
        assert_eq!(loglog_slope(&[(1.0, 0.0), (2.0, 0.0)]), None);
    }

    #[test]
    fn seeds_are_distinct_per_stream() {
        let a = derive_seed(1, &[0, 2, 5]);
        assert_ne!(a, derive_seed(1, &[1, 2, 5]));
        assert_ne!(a, derive_seed(1, &[0, 2, 6]));
        assert_ne!(a, derive_seed(2, &[0, 2, 5]));
        assert_eq!(a, derive_seed(1, &[0, 2, 5]));
    }

    #[test]
    fn row_formatting() {
        let row = ResultRow {
            instance_id: 3,
            method: Method::Qae { counting_qubits: 6 },
            g_exact: 1.0 / 3.0,
            g_point: 0.5,
            g_lower: 0.25,
            oracle_calls: 79 * 64,
            certified_max_radius: None,
        };
        assert_eq!(row.record().join(","), "3,qae,6,0.333333333333,0.5,0.25,5056,-1");
    }
}
