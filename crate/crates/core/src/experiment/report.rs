use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dataset::{curve_csv, ProtocolTag, ThetaDataset, Traversal};
use crate::error::{Error, Result};
use crate::gpr::GprModel;
use crate::metrics::MetricsReport;

/// One comparison solve triple at a fixed grid size. `None` iterations mark
/// non-convergence within the cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: usize,
    pub theta_pred: f64,
    pub theta_opt: f64,
    pub theta_default: f64,
    pub iter_pred: Option<usize>,
    pub iter_opt: Option<usize>,
    pub iter_default: Option<usize>,
    /// Setup plus solve seconds for the three thresholds; never hashed.
    pub time_pred: f64,
    pub time_opt: f64,
    pub time_default: f64,
}

impl CompareRow {
    pub const CSV_HEADER: &'static str = "n,theta_pred,iter_pred,theta_opt,iter_opt,theta_default,iter_default";

    pub fn csv_line(&self) -> String {
        let it = |v: Option<usize>| v.map_or_else(|| "nc".to_string(), |k| k.to_string());
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            self.theta_pred,
            it(self.iter_pred),
            self.theta_opt,
            it(self.iter_opt),
            self.theta_default,
            it(self.iter_default)
        )
    }
}

/// Everything the pipeline can write. Missing parts are simply not emitted.
#[derive(Debug, Clone, Default)]
pub struct ReportSet {
    pub datasets: Vec<ThetaDataset>,
    pub curves: Vec<(ProtocolTag, Traversal)>,
    /// Curves swept for comparison runs, keyed by grid size.
    pub compare_curves: Vec<Traversal>,
    pub models: Vec<GprModel>,
    pub metrics: Vec<MetricsReport>,
    pub compare: Vec<CompareRow>,
    pub config: Option<serde_json::Value>,
    /// Wall-clock data; written beside the manifest but not listed in it.
    pub timings: Option<serde_json::Value>,
}

impl ReportSet {
    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
            && self.curves.is_empty()
            && self.compare_curves.is_empty()
            && self.models.is_empty()
            && self.metrics.is_empty()
            && self.compare.is_empty()
            && self.config.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Kernel names contain `+`; keep file names portable.
fn file_stem(kernel: &str) -> String {
    kernel.replace('+', "_")
}

fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(header)?;
    for r in rows {
        wr.write_record(&r)?;
    }
    let bytes = wr.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Renders every file of `set` in memory, keyed by relative path.
pub fn render_reports(set: &ReportSet) -> Result<BTreeMap<String, String>> {
    let mut files = BTreeMap::new();
    for ds in &set.datasets {
        files.insert(format!("datasets/{}.csv", ds.tag), ds.to_csv_string()?);
    }
    for (tag, t) in &set.curves {
        files.insert(format!("curves/{tag}_n{}.csv", t.n), curve_csv(&t.curve));
    }
    for t in &set.compare_curves {
        files.insert(format!("curves/compare_n{}.csv", t.n), curve_csv(&t.curve));
    }
    for m in &set.models {
        files.insert(format!("models/{}.json", file_stem(&m.spec.name())), m.to_json()? + "\n");
    }
    if !set.metrics.is_empty() {
        files.insert(
            "metrics.csv".into(),
            csv_table(&MetricsReport::CSV_HEADER, set.metrics.iter().map(MetricsReport::csv_row))?,
        );
        files.insert(
            "picp.csv".into(),
            csv_table(&["kernel", "PICP"], set.metrics.iter().map(MetricsReport::picp_row))?,
        );
        files.insert("metrics.json".into(), serde_json::to_string_pretty(&set.metrics)? + "\n");
    }
    if !set.compare.is_empty() {
        let mut s = String::from(CompareRow::CSV_HEADER);
        s.push('\n');
        for r in &set.compare {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        files.insert("compare.csv".into(), s);
    }
    if let Some(c) = &set.config {
        files.insert("config.json".into(), serde_json::to_string_pretty(c)? + "\n");
    }
    Ok(files)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes all artifacts under `out_dir` plus `manifest.json` listing each
/// file (sorted by path) with its SHA-256 and size. `timings.json` is
/// written when present but kept out of the manifest.
pub fn emit_reports(set: &ReportSet, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = Manifest::default();
    for (rel, text) in render_reports(set)? {
        let path: PathBuf = out_dir.join(&rel);
        write_file(&path, text.as_bytes())?;
        manifest.entries.push(ManifestEntry {
            path: rel,
            sha256: sha256_hex(text.as_bytes()),
            bytes: text.len() as u64,
        });
    }
    write_file(&out_dir.join(Manifest::FILE), manifest.to_json()?.as_bytes())?;
    if let Some(t) = &set.timings {
        write_file(&out_dir.join("timings.json"), (serde_json::to_string_pretty(t)? + "\n").as_bytes())?;
    }
    Ok(manifest)
}
