//! CSV / JSON-lines readers and writers with fixed column schemas.
//!
//! | file            | columns                                              |
//! |-----------------|------------------------------------------------------|
//! | decay curve     | `time_s,value,sigma` (`sigma` empty when unknown)    |
//! | measurement     | `time_s,bright,dark,shots`                           |
//! | response curve  | `c_gd_M,c_na_M,t1_s,t1_err_s,sigma_m2,beta`          |
//! | T1 dataset      | `c_gd_M,c_na_M,t1_s[,t1_err_s]`                      |
//!
//! Times are in seconds, concentrations in mol·L⁻¹, densities in m⁻².

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constants::SCHEMA_VERSION;
use crate::ensemble::{DecayCurve, MeasurementRecord};
use crate::error::{Error, Result};
use crate::fitting::{Calibration, Observation, ResponsePoint};

pub const DECAY_COLUMNS: [&str; 3] = ["time_s", "value", "sigma"];
pub const MEASUREMENT_COLUMNS: [&str; 4] = ["time_s", "bright", "dark", "shots"];
pub const RESPONSE_COLUMNS: [&str; 6] = ["c_gd_M", "c_na_M", "t1_s", "t1_err_s", "sigma_m2", "beta"];

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| parse_err(path, "not a file path"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), message: message.into() }
}

fn fmt(x: f64) -> String {
    // Shortest round-trip representation.
    format!("{x:e}")
}

pub fn decay_csv(curve: &DecayCurve) -> String {
    let mut out = DECAY_COLUMNS.join(",");
    out.push('\n');
    for (i, (t, v)) in curve.times.iter().zip(&curve.contrast).enumerate() {
        let s = curve.sigma_noise.as_ref().map(|s| fmt(s[i])).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", fmt(*t), fmt(*v), s));
    }
    out
}

/// One JSON object per line; the first carries `metadata`.
pub fn decay_jsonl(curve: &DecayCurve, metadata: &Value) -> String {
    let mut out = json!({ "metadata": metadata }).to_string();
    out.push('\n');
    for (i, (t, v)) in curve.times.iter().zip(&curve.contrast).enumerate() {
        let s = curve.sigma_noise.as_ref().map(|s| s[i]);
        out.push_str(&json!({ "time_s": t, "value": v, "sigma": s }).to_string());
        out.push('\n');
    }
    out
}

pub fn measurement_csv(record: &MeasurementRecord) -> String {
    let mut out = MEASUREMENT_COLUMNS.join(",");
    out.push('\n');
    for ((t, b), d) in record.times.iter().zip(&record.bright).zip(&record.dark) {
        out.push_str(&format!("{},{},{},{}\n", fmt(*t), b, d, record.shots));
    }
    out
}

pub fn measurement_jsonl(record: &MeasurementRecord, metadata: &Value) -> String {
    let mut out = json!({ "metadata": metadata }).to_string();
    out.push('\n');
    for ((t, b), d) in record.times.iter().zip(&record.bright).zip(&record.dark) {
        out.push_str(
            &json!({ "time_s": t, "bright": b, "dark": d, "shots": record.shots }).to_string(),
        );
        out.push('\n');
    }
    out
}

pub fn response_csv(points: &[ResponsePoint]) -> String {
    let mut out = RESPONSE_COLUMNS.join(",");
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(p.c_gd),
            fmt(p.c_na),
            fmt(p.t1),
            fmt(p.t1_uncertainty),
            fmt(p.sigma_used),
            fmt(p.beta)
        ));
    }
    out
}

struct Table {
    headers: Vec<String>,
    /// (1-based line number, fields)
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn column(&self, names: &[&str]) -> Option<usize> {
        self.headers.iter().position(|h| names.contains(&h.as_str()))
    }

    fn require(&self, path: &Path, names: &[&str]) -> Result<usize> {
        self.column(names).ok_or_else(|| {
            parse_err(
                path,
                format!("missing column `{}` (found: {})", names.join("` or `"), self.headers.join(",")),
            )
        })
    }
}

fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(parse_err(path, "empty input: file has no header or data rows"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(path, e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, rec));
    }
    if rows.is_empty() {
        return Err(parse_err(path, "empty input: header present but no data rows"));
    }
    Ok(Table { headers, rows })
}

/// Collects per-row parse failures so they can be reported together.
#[derive(Default)]
struct RowErrors(Vec<String>);

impl RowErrors {
    fn num<T: std::str::FromStr>(&mut self, line: u64, rec: &csv::StringRecord, col: usize, name: &str) -> Option<T> {
        match rec.get(col).map(str::parse::<T>) {
            Some(Ok(v)) => Some(v),
            Some(Err(_)) => {
                self.0.push(format!("line {line}: `{name}` = {:?} is not a number", rec.get(col).unwrap()));
                None
            }
            None => {
                self.0.push(format!("line {line}: missing `{name}`"));
                None
            }
        }
    }

    fn opt_f64(&mut self, line: u64, rec: &csv::StringRecord, col: Option<usize>, name: &str) -> Option<Option<f64>> {
        match col.and_then(|c| rec.get(c)) {
            None | Some("") => Some(None),
            Some(_) => self.num(line, rec, col.unwrap(), name).map(Some),
        }
    }

    fn finish(self, path: &Path) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(parse_err(path, format!("malformed rows:\n  {}", self.0.join("\n  "))))
        }
    }
}

/// Reads a decay curve. The value column may be named `value` or `contrast`;
/// `sigma` is optional, but must then be given on every row.
pub fn read_decay_csv(path: &Path) -> Result<DecayCurve> {
    let table = read_table(path)?;
    let t_col = table.require(path, &["time_s"])?;
    let v_col = table.require(path, &["value", "contrast"])?;
    let s_col = table.column(&["sigma"]);
    let mut errs = RowErrors::default();
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut sigmas = Vec::new();
    for (line, rec) in &table.rows {
        let t = errs.num::<f64>(*line, rec, t_col, "time_s");
        let v = errs.num::<f64>(*line, rec, v_col, "value");
        let s = errs.opt_f64(*line, rec, s_col, "sigma");
        if let (Some(t), Some(v), Some(s)) = (t, v, s) {
            times.push(t);
            values.push(v);
            sigmas.push(s);
        }
    }
    errs.finish(path)?;
    let sigma = if sigmas.iter().all(Option::is_none) {
        None
    } else if sigmas.iter().all(Option::is_some) {
        Some(sigmas.into_iter().flatten().collect())
    } else {
        let lines: Vec<String> = table
            .rows
            .iter()
            .zip(&sigmas)
            .filter(|(_, s)| s.is_none())
            .map(|((l, _), _)| l.to_string())
            .collect();
        return Err(parse_err(path, format!("`sigma` missing on lines {}", lines.join(", "))));
    };
    DecayCurve::new(times, values, sigma).map_err(|e| parse_err(path, e.to_string()))
}

pub fn read_measurement_csv(path: &Path) -> Result<MeasurementRecord> {
    let table = read_table(path)?;
    let t_col = table.require(path, &["time_s"])?;
    let b_col = table.require(path, &["bright"])?;
    let d_col = table.require(path, &["dark"])?;
    let n_col = table.require(path, &["shots"])?;
    let mut errs = RowErrors::default();
    let mut rec_out = MeasurementRecord { times: vec![], bright: vec![], dark: vec![], shots: 0 };
    let mut shots = Vec::new();
    for (line, rec) in &table.rows {
        let t = errs.num::<f64>(*line, rec, t_col, "time_s");
        let b = errs.num::<u64>(*line, rec, b_col, "bright");
        let d = errs.num::<u64>(*line, rec, d_col, "dark");
        let n = errs.num::<u64>(*line, rec, n_col, "shots");
        if let (Some(t), Some(b), Some(d), Some(n)) = (t, b, d, n) {
            rec_out.times.push(t);
            rec_out.bright.push(b);
            rec_out.dark.push(d);
            shots.push((*line, n));
        }
    }
    errs.finish(path)?;
    let first = shots[0].1;
    if let Some((line, n)) = shots.iter().find(|(_, n)| *n != first) {
        return Err(parse_err(path, format!("line {line}: shots = {n} differs from {first}")));
    }
    rec_out.shots = first;
    Ok(rec_out)
}

/// Reads T1-versus-concentration data. A response-curve CSV is accepted as is.
pub fn read_dataset_csv(path: &Path) -> Result<Vec<Observation>> {
    let table = read_table(path)?;
    let gd = table.require(path, &["c_gd_M"])?;
    let na = table.require(path, &["c_na_M"])?;
    let t1 = table.require(path, &["t1_s"])?;
    let err = table.column(&["t1_err_s"]);
    let mut errs = RowErrors::default();
    let mut out = Vec::new();
    for (line, rec) in &table.rows {
        let c_gd = errs.num::<f64>(*line, rec, gd, "c_gd_M");
        let c_na = errs.num::<f64>(*line, rec, na, "c_na_M");
        let t = errs.num::<f64>(*line, rec, t1, "t1_s");
        let e = errs.opt_f64(*line, rec, err, "t1_err_s");
        if let (Some(c_gd), Some(c_na), Some(t1), Some(t1_err)) = (c_gd, c_na, t, e) {
            if !(c_gd >= 0.0 && c_na >= 0.0) {
                errs.0.push(format!("line {line}: negative concentration"));
            } else if !(t1 > 0.0 && t1.is_finite()) {
                errs.0.push(format!("line {line}: t1_s must be positive"));
            } else {
                out.push(Observation { c_gd, c_na, t1, t1_err });
            }
        }
    }
    errs.finish(path)?;
    Ok(out)
}

/// JSON document describing a calibration run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationManifest {
    pub schema_version: u32,
    pub seed: u64,
    pub n_sites: usize,
    pub dataset: Option<String>,
    #[serde(flatten)]
    pub calibration: Calibration,
}

impl CalibrationManifest {
    pub fn new(calibration: Calibration, seed: u64, n_sites: usize, dataset: Option<String>) -> Self {
        Self { schema_version: SCHEMA_VERSION, seed, n_sites, dataset, calibration }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let m: Self = serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(parse_err(
                path,
                format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", m.schema_version),
            ));
        }
        m.calibration.langmuir.validate().map_err(|e| parse_err(path, e.to_string()))?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn curve(sigma: bool) -> DecayCurve {
        let t = vec![0.0, 1e-6, 1e-5, 1e-4];
        let v = vec![1.0, 0.9, 0.5, 0.1];
        DecayCurve::new(t, v, sigma.then(|| vec![0.0, 0.01, 0.02, 0.03])).unwrap()
    }

    #[test]
    fn decay_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        for with_sigma in [false, true] {
            let p = dir.path().join("d.csv");
            let c = DecayCurve::new(
                vec![0.0, 1.0 / 3.0 * 1e-6, 2e-5, 1e-4],
                vec![1.0, 0.1 + 0.2, 1.0 / 7.0, 1e-300],
                with_sigma.then(|| vec![0.0, 1e-3, 2.0 / 3.0, 0.5]),
            )
            .unwrap();
            write_atomic(&p, decay_csv(&c).as_bytes()).unwrap();
            assert_eq!(read_decay_csv(&p).unwrap(), c);
        }
    }

    #[test]
    fn contrast_column_alias() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "time_s,contrast\n0,1\n1e-6,0.5\n").unwrap();
        let c = read_decay_csv(&p).unwrap();
        assert_eq!(c.contrast, vec![1.0, 0.5]);
        assert!(c.sigma_noise.is_none());
    }

    #[test]
    fn malformed_rows_are_listed() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "time_s,value,sigma\n0,1,\n1e-6,abc,\nxyz,0.3,\n").unwrap();
        let msg = read_decay_csv(&p).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("line 4"), "{msg}");
        assert!(!msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn empty_file_is_reported() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "").unwrap();
        assert!(read_decay_csv(&p).unwrap_err().to_string().contains("empty"));
        fs::write(&p, "time_s,value\n").unwrap();
        assert!(read_decay_csv(&p).unwrap_err().to_string().contains("empty"));
    }

    #[test]
    fn jsonl_has_metadata_header() {
        let s = decay_jsonl(&curve(true), &json!({"seed": 7}));
        let mut lines = s.lines();
        let head: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(head["metadata"]["seed"], 7);
        let row: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(row["value"], 1.0);
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn measurement_round_trip() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let m = MeasurementRecord {
            times: vec![0.0, 1e-6],
            bright: vec![11500, 11000],
            dark: vec![8500, 9000],
            shots: 10000,
        };
        write_atomic(&p, measurement_csv(&m).as_bytes()).unwrap();
        assert_eq!(read_measurement_csv(&p).unwrap(), m);
    }

    #[test]
    fn dataset_reads_response_csv() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let pts = vec![ResponsePoint {
            c_gd: 1e-6,
            c_na: 0.1,
            t1: 15e-6,
            t1_uncertainty: 1e-7,
            sigma_used: 8e17,
            beta: 0.5,
        }];
        fs::write(&p, response_csv(&pts)).unwrap();
        let obs = read_dataset_csv(&p).unwrap();
        assert_eq!(obs, vec![Observation { c_gd: 1e-6, c_na: 0.1, t1: 15e-6, t1_err: Some(1e-7) }]);
    }

    #[test]
    fn dataset_rejects_nonpositive_t1() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, "c_gd_M,c_na_M,t1_s\n0,0,0\n").unwrap();
        assert!(read_dataset_csv(&p).unwrap_err().to_string().contains("line 2"));
    }
}
