//! CSV and JSON files.
//!
//! Observation tables use the header `y,a,x1,...,xd`; matrices use
//! `mu1,...,muq` or `tau2,...,tauq`; labelings use a single `label` column.
//! Numbers are written with 17 significant digits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ClusterLabeling, Observation, ObservationTable, Parametrization, PointSet};

/// Round-trip-exact text form of a float.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn parse_number(field: &str, row: usize, column: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| {
        Error::data(format!("row {row}, column {column}: {field:?} is not a number"))
    })
}

/// Reads an observation table. The number of arms is `arms` when given,
/// otherwise the largest arm label present.
pub fn read_observations(path: &Path, arms: Option<usize>) -> Result<ObservationTable> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let dim = header.len().saturating_sub(2);
    let expected: Vec<String> = ["y".to_owned(), "a".to_owned()]
        .into_iter()
        .chain((1..=dim).map(|j| format!("x{j}")))
        .collect();
    if header.len() < 3 || header != expected {
        return Err(Error::data(format!(
            "{}: expected header y,a,x1,...,xd, got {}",
            path.display(),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let y = parse_number(&record[0], i, "y")?;
        let arm = record[1]
            .parse::<i64>()
            .map_err(|_| Error::data(format!("row {i}, column a: {:?} is not an integer", &record[1])))?;
        let x = (2..record.len())
            .map(|j| parse_number(&record[j], i, &header[j]))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(Observation { y, arm, x });
    }
    let arms = arms.unwrap_or_else(|| rows.iter().map(|r| r.arm.max(0) as usize).max().unwrap_or(0));
    Ok(ObservationTable::new(rows, arms, dim))
}

pub fn write_observations(path: &Path, table: &ObservationTable) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["y".to_owned(), "a".to_owned()];
    header.extend((1..=table.dim()).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    for row in table.rows() {
        let mut rec = vec![format_number(row.y), row.arm.to_string()];
        rec.extend(row.x.iter().map(|&v| format_number(v)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a numeric matrix with any header; returns the column names too.
pub fn read_points(path: &Path) -> Result<(Vec<String>, PointSet)> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() {
        return Err(Error::data(format!("{}: no columns", path.display())));
    }
    let mut coords = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        for (j, field) in record.iter().enumerate() {
            coords.push(parse_number(field, i, &header[j])?);
        }
    }
    let points = PointSet::new(header.len(), coords)?;
    if !points.all_finite() {
        return Err(Error::data(format!("{}: non-finite entry", path.display())));
    }
    Ok((header, points))
}

/// Reads a counterfactual matrix, inferring the parametrization from the
/// header (`mu1..` or `tau2..`).
pub fn read_matrix(path: &Path) -> Result<(PointSet, Parametrization)> {
    let (header, points) = read_points(path)?;
    let q = header.len();
    let param = if header == Parametrization::Levels.column_names(q) {
        Parametrization::Levels
    } else if header == Parametrization::ContrastsVsArm1.column_names(q + 1) {
        Parametrization::ContrastsVsArm1
    } else {
        return Err(Error::data(format!(
            "{}: expected header mu1,...,muq or tau2,...,tauq, got {}",
            path.display(),
            header.join(",")
        )));
    };
    Ok((points, param))
}

pub fn write_points(path: &Path, header: &[String], points: &PointSet) -> Result<()> {
    if header.len() != points.dim() {
        return Err(Error::param("header width does not match the points"));
    }
    let mut w = writer(path)?;
    w.write_record(header)?;
    for row in points.rows() {
        w.write_record(row.iter().map(|&v| format_number(v)))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<ClusterLabeling> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["label"] {
        return Err(Error::data(format!(
            "{}: expected header label, got {}",
            path.display(),
            header.join(",")
        )));
    }
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        labels.push(record[0].parse::<usize>().map_err(|_| {
            Error::data(format!("row {i}: {:?} is not a cluster label", &record[0]))
        })?);
    }
    ClusterLabeling::new(labels)
}

pub fn write_labels(path: &Path, labels: &ClusterLabeling) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["label"])?;
    for l in labels.labels() {
        w.write_record([l.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    let text = serde_json::to_string_pretty(value)?;
    writeln!(file, "{text}").map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789, 0.0] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn observations_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.csv");
        let table = ObservationTable::new(
            vec![
                Observation { y: 0.5, arm: 1, x: vec![0.1, 0.2] },
                Observation { y: -1.0, arm: 2, x: vec![0.3, 0.4] },
            ],
            2,
            2,
        );
        write_observations(&path, &table).unwrap();
        assert_eq!(read_observations(&path, None).unwrap(), table);
    }

    #[test]
    fn bad_header_and_cells_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.csv");
        std::fs::write(&path, "y,arm,x1\n1,1,0\n").unwrap();
        assert!(matches!(read_observations(&path, None), Err(Error::InvalidData(_))));
        std::fs::write(&path, "y,a,x1\n1,one,0\n").unwrap();
        assert!(matches!(read_observations(&path, None), Err(Error::InvalidData(_))));
        assert!(matches!(
            read_observations(&dir.path().join("missing.csv"), None),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn matrix_header_decides_parametrization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let pts = PointSet::from_rows(&[[1.0, 2.0]]).unwrap();
        write_points(&path, &Parametrization::ContrastsVsArm1.column_names(3), &pts).unwrap();
        let (read, p) = read_matrix(&path).unwrap();
        assert_eq!(read, pts);
        assert_eq!(p, Parametrization::ContrastsVsArm1);
        write_points(&path, &["a".into(), "b".into()], &pts).unwrap();
        assert!(read_matrix(&path).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.csv");
        let labels = ClusterLabeling::new(vec![0, 1, 2, 1]).unwrap();
        write_labels(&path, &labels).unwrap();
        assert_eq!(read_labels(&path).unwrap(), labels);
    }
}
