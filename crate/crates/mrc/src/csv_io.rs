//! CSV datasets: UTF-8, comma separated, one header row, `.` as decimal
//! separator. The label column is picked by name; by default every other
//! column is a feature.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use mrc_core::{LabeledDataset, Matrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: malformed CSV: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: column '{column}' not found", path.display())]
    MissingColumn { path: PathBuf, column: String },
    #[error("{}: line {line}, column '{column}': '{value}' is not a finite number", path.display())]
    NonNumeric {
        path: PathBuf,
        line: u64,
        column: String,
        value: String,
    },
    #[error("{}: no data rows", path.display())]
    NoRows { path: PathBuf },
    #[error("{}: no feature columns", path.display())]
    NoFeatures { path: PathBuf },
    #[error("{}: fewer than two classes in column '{column}'", path.display())]
    TooFewClasses { path: PathBuf, column: String },
    #[error("{}: {source}", path.display())]
    Invalid { path: PathBuf, source: mrc_core::Error },
}

/// Raw contents of a CSV file split into features and (optional) labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub feature_names: Vec<String>,
    pub instances: Matrix,
    pub labels: Option<Vec<String>>,
}

/// Loads a labeled dataset; the other columns become features in file order.
pub fn load_csv(path: &Path, label_column: &str) -> Result<(LabeledDataset, Vec<String>), DataError> {
    let table = read_table(path, Some(label_column), None)?;
    let labels = table.labels.expect("label column requested");
    if labels.iter().all(|l| *l == labels[0]) {
        return Err(DataError::TooFewClasses {
            path: path.into(),
            column: label_column.into(),
        });
    }
    let ds = LabeledDataset::from_raw_labels(table.instances, &labels).map_err(|source| DataError::Invalid {
        path: path.into(),
        source,
    })?;
    Ok((ds, table.feature_names))
}

/// Reads a CSV file.
///
/// With `features = Some(names)` exactly those columns are read, in that
/// order, and any other column is ignored. Otherwise every column except
/// the label column is a feature.
pub fn read_table(path: &Path, label_column: Option<&str>, features: Option<&[String]>) -> Result<Table, DataError> {
    let csv_err = |source| DataError::Csv {
        path: path.into(),
        source,
    };
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.into(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(io::BufReader::new(file));
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let find = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| DataError::MissingColumn {
            path: path.into(),
            column: name.into(),
        })
    };
    let label_idx = label_column.map(find).transpose()?;
    let feature_idx: Vec<usize> = match features {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_, _>>()?,
        None => (0..header.len()).filter(|&i| Some(i) != label_idx).collect(),
    };
    if feature_idx.is_empty() {
        return Err(DataError::NoFeatures { path: path.into() });
    }

    let mut values = Vec::new();
    let mut labels = label_idx.map(|_| Vec::new());
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        for &j in &feature_idx {
            let cell = &record[j];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(DataError::NonNumeric {
                        path: path.into(),
                        line,
                        column: header[j].clone(),
                        value: cell.into(),
                    })
                }
            }
        }
        if let (Some(labels), Some(j)) = (labels.as_mut(), label_idx) {
            labels.push(record[j].to_owned());
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(DataError::NoRows { path: path.into() });
    }
    let instances = Matrix::from_vec(rows, feature_idx.len(), values).expect("row lengths checked by csv reader");
    Ok(Table {
        feature_names: feature_idx.iter().map(|&j| header[j].clone()).collect(),
        instances,
        labels,
    })
}

/// Writes features then the label column, one row per sample.
pub fn write_dataset<W: Write>(
    out: W,
    ds: &LabeledDataset,
    feature_names: &[String],
    label_column: &str,
) -> Result<(), csv::Error> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    writer.write_record(feature_names.iter().map(String::as_str).chain([label_column]))?;
    let mut record = Vec::with_capacity(feature_names.len() + 1);
    for (row, label) in ds.instances().iter_rows().zip(ds.decoded_labels()) {
        record.clear();
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(label.to_owned());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn labels_encoded_in_ascending_order() {
        let f = file("x,y\n1,b\n2,a\n3,a\n");
        let (ds, names) = load_csv(f.path(), "y").unwrap();
        assert_eq!(ds.labels(), [1, 0, 0]);
        assert_eq!(ds.class_labels(), ["a", "b"]);
        assert_eq!(names, ["x"]);
    }

    #[test]
    fn label_column_last_leaves_feature_matrix() {
        let f = file("u,label\n1.5,p\n-2,q\n3e1,p\n0.25,q\n");
        let (ds, _) = load_csv(f.path(), "label").unwrap();
        assert_eq!(ds.instances().rows(), 4);
        assert_eq!(ds.instances().as_slice(), [1.5, -2.0, 30.0, 0.25]);
    }

    #[test]
    fn distinct_errors() {
        let missing = Path::new("/definitely/not/here.csv");
        assert!(matches!(load_csv(missing, "y"), Err(DataError::Io { .. })));
        let f = file("x,y\n1,a\n2,b\n");
        assert!(matches!(load_csv(f.path(), "z"), Err(DataError::MissingColumn { .. })));
        let f = file("x,y\n1,a\nabc,b\n");
        match load_csv(f.path(), "y") {
            Err(DataError::NonNumeric { line, column, value, .. }) => {
                assert_eq!((line, column.as_str(), value.as_str()), (3, "x", "abc"));
            }
            other => panic!("{other:?}"),
        }
        let f = file("x,y\n1,a\n2,a\n");
        let err = load_csv(f.path(), "y").unwrap_err();
        assert!(matches!(err, DataError::TooFewClasses { .. }));
        assert!(err.to_string().contains("fewer than two classes"));
        let f = file("x,y\n1,a\nnan,b\n");
        assert!(matches!(load_csv(f.path(), "y"), Err(DataError::NonNumeric { .. })));
        let f = file("x,y\n");
        assert!(matches!(load_csv(f.path(), "y"), Err(DataError::NoRows { .. })));
        let f = file("x,y\n1,a\n2\n");
        assert!(matches!(load_csv(f.path(), "y"), Err(DataError::Csv { .. })));
    }

    #[test]
    fn selected_features_follow_requested_order() {
        let f = file("a,b,c\n1,2,3\n4,5,6\n");
        let names = vec!["c".to_owned(), "a".to_owned()];
        let t = read_table(f.path(), None, Some(&names)).unwrap();
        assert_eq!(t.instances.as_slice(), [3.0, 1.0, 6.0, 4.0]);
        assert!(t.labels.is_none());
    }

    #[test]
    fn written_dataset_reads_back() {
        let ds = mrc_core::gen_blobs(9, 3, 2, 1.0, 4).unwrap();
        let names = vec!["x0".to_owned(), "x1".to_owned()];
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds, &names, "label").unwrap();
        let f = file(std::str::from_utf8(&buf).unwrap());
        let (back, back_names) = load_csv(f.path(), "label").unwrap();
        assert_eq!(back_names, names);
        assert_eq!(back.instances(), ds.instances());
        assert_eq!(back.labels(), ds.labels());
    }
}
