use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the CSV and manifest layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Column order of every results file.
pub const CSV_COLUMNS: &[&str] = &[
    "experiment",
    "method",
    "tableau",
    "rtol",
    "atol",
    "setting_name",
    "setting",
    "metric",
    "value",
    "estimate",
    "reference",
    "forward_f_evals",
    "backward_f_evals",
    "wall_time_s",
    "status",
];

/// One measurement. `estimate` and `reference` carry the compared quantities when `value` is an
/// error between them; otherwise they are NaN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub method: String,
    pub tableau: String,
    pub rtol: f64,
    pub atol: f64,
    pub setting_name: String,
    pub setting: f64,
    pub metric: String,
    pub value: f64,
    pub estimate: f64,
    pub reference: f64,
    pub forward_f_evals: u64,
    pub backward_f_evals: u64,
    pub wall_time_s: f64,
    /// `ok`, or `diverged` when the cell failed and `value` is NaN.
    pub status: String,
}

impl ResultRow {
    pub fn new(experiment: &str, method: &str, tableau: &str, metric: &str, value: f64) -> Self {
        Self {
            experiment: experiment.into(),
            method: method.into(),
            tableau: tableau.into(),
            rtol: f64::NAN,
            atol: f64::NAN,
            setting_name: String::new(),
            setting: f64::NAN,
            metric: metric.into(),
            value,
            estimate: f64::NAN,
            reference: f64::NAN,
            forward_f_evals: 0,
            backward_f_evals: 0,
            wall_time_s: 0.0,
            status: "ok".into(),
        }
    }

    pub fn tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn setting(mut self, name: &str, value: f64) -> Self {
        self.setting_name = name.into();
        self.setting = value;
        self
    }

    pub fn compared(mut self, estimate: f64, reference: f64) -> Self {
        self.estimate = estimate;
        self.reference = reference;
        self
    }

    pub fn evals(mut self, forward: usize, backward: usize) -> Self {
        self.forward_f_evals = forward as u64;
        self.backward_f_evals = backward as u64;
        self
    }

    pub fn wall_time(mut self, seconds: f64) -> Self {
        self.wall_time_s = seconds;
        self
    }

    pub fn diverged(mut self) -> Self {
        self.value = f64::NAN;
        self.status = "diverged".into();
        self
    }
}

/// A named pass/fail assertion evaluated by an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything one experiment run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub rows: Vec<ResultRow>,
    pub checks: Vec<Check>,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Sidecar written next to every CSV as a single JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub experiment: String,
    pub library_version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub rows: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Writes `<out>/<experiment>.csv` and its manifest; returns the CSV path.
pub fn write_report(report: &Report, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", report.experiment));
    let mut wtr = csv::Writer::from_path(&csv_path)?;
    for row in &report.rows {
        wtr.serialize(row)?;
    }
    if report.rows.is_empty() {
        wtr.write_record(CSV_COLUMNS)?;
    }
    wtr.flush()?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        experiment: report.experiment.clone(),
        library_version: env!("CARGO_PKG_VERSION").into(),
        seed: report.seed,
        config: report.config.clone(),
        rows: report.rows.len(),
        checks: report.checks.clone(),
        passed: report.passed(),
    };
    fs::write(
        manifest_path(&csv_path),
        serde_json::to_string(&manifest)? + "\n",
    )?;
    Ok(csv_path)
}

fn schema(path: &Path, reason: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Checks a results CSV and its manifest against the schema; returns the number of rows.
pub fn validate_results(csv_path: &Path) -> Result<usize> {
    let mut rdr = csv::Reader::from_path(csv_path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(schema(
            csv_path,
            format!("header {header:?} does not match {CSV_COLUMNS:?}"),
        ));
    }
    let mut count = 0;
    let mut experiment = None;
    for (i, row) in rdr.deserialize::<ResultRow>().enumerate() {
        let row = row.map_err(|e| schema(csv_path, format!("row {}: {e}", i + 1)))?;
        match row.status.as_str() {
            "ok" if !row.value.is_finite() => {
                return Err(schema(
                    csv_path,
                    format!("row {}: non-finite value with status ok", i + 1),
                ))
            }
            "ok" | "diverged" => {}
            other => {
                return Err(schema(
                    csv_path,
                    format!("row {}: unknown status '{other}'", i + 1),
                ))
            }
        }
        if row.metric.is_empty() {
            return Err(schema(csv_path, format!("row {}: empty metric", i + 1)));
        }
        if *experiment.get_or_insert_with(|| row.experiment.clone()) != row.experiment {
            return Err(schema(
                csv_path,
                format!("row {}: mixed experiments", i + 1),
            ));
        }
        count += 1;
    }
    let mpath = manifest_path(csv_path);
    let text = fs::read_to_string(&mpath)
        .map_err(|e| schema(&mpath, format!("manifest unreadable: {e}")))?;
    if text.trim_end().lines().count() != 1 {
        return Err(schema(&mpath, "manifest must be a single line"));
    }
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| schema(&mpath, e.to_string()))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(schema(
            &mpath,
            format!(
                "schema version {} != {SCHEMA_VERSION}",
                manifest.schema_version
            ),
        ));
    }
    if manifest.rows != count {
        return Err(schema(
            &mpath,
            format!("manifest lists {} rows, file has {count}", manifest.rows),
        ));
    }
    if let Some(e) = experiment {
        if e != manifest.experiment {
            return Err(schema(
                &mpath,
                format!("experiment '{}' != rows' '{e}'", manifest.experiment),
            ));
        }
    }
    if manifest.passed != manifest.checks.iter().all(|c| c.passed) {
        return Err(schema(&mpath, "'passed' disagrees with the checks"));
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> Report {
        Report {
            experiment: "toy-gradient".into(),
            rows: vec![
                ResultRow::new("toy-gradient", "aca", "dopri5", "abs_grad_error", 1e-6)
                    .tolerances(1e-5, 1e-5)
                    .setting("T", 1.0)
                    .compared(14.778, 14.7781),
                ResultRow::new("toy-gradient", "adjoint", "dopri5", "abs_grad_error", 0.0)
                    .diverged(),
            ],
            checks: vec![Check::new("demo", true, "")],
            config: BTreeMap::from([("rtol".to_string(), "1e-5".to_string())]),
            seed: 4,
        }
    }

    #[test]
    fn write_then_validate() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_report(&report(), dir.path()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&CSV_COLUMNS.join(",")));
        assert_eq!(validate_results(&path).unwrap(), 2);
        let manifest: Manifest =
            serde_json::from_str(&fs::read_to_string(manifest_path(&path)).unwrap()).unwrap();
        assert_eq!(manifest.seed, 4);
        assert!(manifest.passed);
    }

    #[test]
    fn validation_catches_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_report(&report(), dir.path()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace(",ok", ",weird")).unwrap();
        assert!(matches!(validate_results(&path), Err(Error::Schema { .. })));

        let path = write_report(&report(), dir.path()).unwrap();
        fs::remove_file(manifest_path(&path)).unwrap();
        assert!(validate_results(&path).is_err());
    }
}
