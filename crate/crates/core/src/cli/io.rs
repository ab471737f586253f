/*
Copyright 2026 The affine-l1 Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Dataset readers and result writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use nalgebra::DMatrix;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::problems::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Csv,
    Libsvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Rows of numbers from a CSV file whose first line may be a header.
/// Returns the header (if any) and the rows; every row must have the
/// width of the first.
fn read_csv_rows(path: &Path) -> Result<(Option<Vec<String>>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            rec.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => {
                if let Some(first) = rows.first() {
                    if vals.len() != first.len() {
                        return Err(Error::Parse {
                            line,
                            msg: format!("expected {} fields, found {}", first.len(), vals.len()),
                        });
                    }
                } else if let Some(h) = &header {
                    let h: &Vec<String> = h;
                    if vals.len() != h.len() {
                        return Err(Error::Parse {
                            line,
                            msg: format!("expected {} fields, found {}", h.len(), vals.len()),
                        });
                    }
                }
                if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("non-finite value {v}"),
                    });
                }
                rows.push(vals);
            }
            Err(e) => {
                if rows.is_empty() && header.is_none() {
                    header = Some(rec.iter().map(str::to_string).collect());
                } else {
                    return Err(Error::Parse {
                        line,
                        msg: format!("not a number: {e}"),
                    });
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidData(format!("{}: no data rows", path.display())));
    }
    Ok((header, rows))
}

/// `label idx:val ...` lines with 1-based indices, densified.
fn read_libsvm_rows(path: &Path) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut width = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let label = parts.next().unwrap_or_default();
        let label: f64 = label.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad label {label:?}"),
        })?;
        let mut row = Vec::new();
        for tok in parts {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected index:value, found {tok:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line,
                    msg: "indices are 1-based".into(),
                });
            }
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad value {val:?}"),
            })?;
            if !val.is_finite() || !label.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: "non-finite value".into(),
                });
            }
            width = width.max(idx);
            row.push((idx - 1, val));
        }
        labels.push(label);
        entries.push(row);
    }
    if labels.is_empty() {
        return Err(Error::InvalidData(format!("{}: no data rows", path.display())));
    }
    let mut a = DMatrix::zeros(labels.len(), width);
    for (i, row) in entries.iter().enumerate() {
        for &(j, v) in row {
            a[(i, j)] = v;
        }
    }
    Ok((labels, a))
}

/// CSV: first column is the response, the rest are features, optional
/// header. libsvm: label then `index:value` pairs.
pub fn load_dataset(path: &Path, format: InputFormat) -> Result<Dataset> {
    match format {
        InputFormat::Csv => {
            let (header, rows) = read_csv_rows(path)?;
            if rows[0].len() < 2 {
                return Err(Error::InvalidData(
                    "need a response column and at least one feature".into(),
                ));
            }
            let n = rows[0].len() - 1;
            let b = rows.iter().map(|r| r[0]).collect();
            let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j + 1]);
            let names = header.map(|h| h[1..].to_vec());
            Dataset::new(a, b, names)
        }
        InputFormat::Libsvm => {
            let (b, a) = read_libsvm_rows(path)?;
            Dataset::new(a, b, None)
        }
    }
}

/// Plain numeric matrix: every CSV column, or the libsvm features with
/// labels ignored.
pub fn load_matrix(path: &Path, format: InputFormat) -> Result<DMatrix<f64>> {
    match format {
        InputFormat::Csv => {
            let (_, rows) = read_csv_rows(path)?;
            Ok(DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]))
        }
        InputFormat::Libsvm => Ok(read_libsvm_rows(path)?.1),
    }
}

/// Constraint normal from a file of whitespace- or comma-separated numbers.
pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: k + 1,
                msg: format!("not a number: {tok:?}"),
            })?;
            out.push(v);
        }
    }
    Ok(out)
}

/// Scalar output field.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Num(f64),
    Int(usize),
    Bool(bool),
    Str(String),
}

/// 17 significant digits: enough to recover every `f64` exactly.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Scalar {
    fn to_csv(&self) -> String {
        match self {
            Scalar::Num(v) => format_f64(*v),
            Scalar::Int(v) => v.to_string(),
            Scalar::Bool(v) => v.to_string(),
            Scalar::Str(s) => s.clone(),
        }
    }
}

struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(format_f64(self.0))
                .map_err(serde::ser::Error::custom)?
                .serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Num(v) => Num(*v).serialize(s),
            Scalar::Int(v) => s.serialize_u64(*v as u64),
            Scalar::Bool(v) => s.serialize_bool(*v),
            Scalar::Str(v) => s.serialize_str(v),
        }
    }
}

/// Ordered list of named scalars, serialized as a JSON object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(&'static str, Scalar)>);

impl Record {
    pub fn push(&mut self, key: &'static str, v: Scalar) {
        self.0.push((key, v));
    }

    pub fn get(&self, key: &str) -> Option<&Scalar> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

struct Vector<'a>(&'a [f64]);

impl Serialize for Vector<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&v| Num(v)))
    }
}

/// Everything a command emits.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub config: Record,
    pub records: Vec<Record>,
    pub solutions: Vec<Vec<f64>>,
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let sols: Vec<Vector<'_>> = self.solutions.iter().map(|v| Vector(v)).collect();
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("config", &self.config)?;
        map.serialize_entry("records", &self.records)?;
        map.serialize_entry("solutions", &sols)?;
        map.end()
    }
}

/// JSON: one document with config, records and solutions. CSV: header
/// plus one row per record (solutions are omitted).
pub fn write_report<W: Write>(report: &Report, out: W, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = report.records.first() {
                w.write_record(first.0.iter().map(|(k, _)| *k))?;
            }
            for r in &report.records {
                w.write_record(r.0.iter().map(|(_, v)| v.to_csv()))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Writes to `path`, or standard output when `path` is `None`.
pub fn write_results(report: &Report, path: Option<&Path>, format: OutputFormat) -> Result<()> {
    match path {
        Some(p) => {
            let f = fs::File::create(p)?;
            write_report(report, std::io::BufWriter::new(f), format)
        }
        None => write_report(report, std::io::stdout().lock(), format),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::NamedTempFile;

    fn file(contents: &str) -> NamedTempFile {
        let mut f = NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_with_header() {
        let f = file("y,f1,f2\n1.0,2.0,3.0\n");
        let d = load_dataset(f.path(), InputFormat::Csv).unwrap();
        assert_eq!((d.nrows(), d.ncols()), (1, 2));
        assert_eq!(d.response, vec![1.0]);
        assert_eq!(d.features[(0, 1)], 3.0);
        assert_eq!(d.feature_names, Some(vec!["f1".into(), "f2".into()]));
    }

    #[test]
    fn csv_without_header() {
        let f = file("1,2,3\n4,5,6\n");
        let d = load_dataset(f.path(), InputFormat::Csv).unwrap();
        assert_eq!(d.response, vec![1.0, 4.0]);
        assert!(d.feature_names.is_none());
    }

    #[test]
    fn csv_short_row_names_line() {
        let f = file("y,a,b\n1,2,3\n4,5\n");
        match load_dataset(f.path(), InputFormat::Csv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_bad_number_names_line() {
        let f = file("1,2,3\n4,x,6\n");
        match load_dataset(f.path(), InputFormat::Csv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn libsvm_densifies() {
        let f = file("1 1:0.5 3:2.0\n-1 2:1\n");
        let d = load_dataset(f.path(), InputFormat::Libsvm).unwrap();
        assert_eq!(d.response, vec![1.0, -1.0]);
        assert_eq!(d.features.row(0).iter().copied().collect::<Vec<_>>(), vec![0.5, 0.0, 2.0]);
        assert_eq!(d.features[(1, 1)], 1.0);
    }

    #[test]
    fn libsvm_errors_name_line() {
        let f = file("1 1:0.5\n1 0:2\n");
        assert!(matches!(
            load_dataset(f.path(), InputFormat::Libsvm),
            Err(Error::Parse { line: 2, .. })
        ));
        let f = file("1 1:0.5\n1 3-2\n");
        assert!(matches!(
            load_dataset(f.path(), InputFormat::Libsvm),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn vector_file() {
        let f = file("1, 2\n3 -4.5\n");
        assert_eq!(load_vector(f.path()).unwrap(), vec![1.0, 2.0, 3.0, -4.5]);
    }

    #[test]
    fn json_round_trips_exactly() {
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, f64::MIN_POSITIVE];
        let mut rec = Record::default();
        for &v in &vals {
            rec.push("v", Scalar::Num(v));
        }
        let report = Report {
            config: Record(vec![("task", Scalar::Str("x".into()))]),
            records: vec![Record(vec![("a", Scalar::Num(vals[1])), ("n", Scalar::Int(3))])],
            solutions: vec![vals.to_vec()],
        };
        let mut buf = Vec::new();
        write_report(&report, &mut buf, OutputFormat::Json).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(parsed["records"][0]["a"].as_f64().unwrap(), vals[1]);
        assert_eq!(parsed["records"][0]["n"].as_u64().unwrap(), 3);
        let sol: Vec<f64> = parsed["solutions"][0]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(sol, vals.to_vec());
    }

    #[test]
    fn csv_output_has_one_row_per_record() {
        let report = Report {
            records: (0..3)
                .map(|i| Record(vec![("lambda", Scalar::Num(i as f64)), ("ok", Scalar::Bool(true))]))
                .collect(),
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_report(&report, &mut buf, OutputFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "lambda,ok");
        assert_eq!(lines[2].split(',').next().unwrap().parse::<f64>().unwrap(), 1.0);
    }
}
