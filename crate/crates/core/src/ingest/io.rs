use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::MultiViewDataset;
use crate::error::{Error, Result};
use crate::mask::PresenceMask;
use crate::matrix::DenseMatrix;

fn default_delimiter() -> String {
    ",".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub path: PathBuf,
    pub dim: usize,
}

/// On-disk description of a multi-view dataset.
///
/// View files hold one sample per line (`n` lines of `dim` values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub n: usize,
    pub views: Vec<ViewEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_path: Option<PathBuf>,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
}

impl DatasetManifest {
    /// Reads a JSON manifest. Relative paths inside it are resolved against
    /// the manifest's own directory.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: Self = serde_json::from_str(&text)
            .map_err(|e| Error::parse(path, format!("line {}: {e}", e.line())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for view in &mut manifest.views {
            if view.path.is_relative() {
                view.path = base.join(&view.path);
            }
        }
        if let Some(labels) = &mut manifest.labels_path {
            if labels.is_relative() {
                *labels = base.join(&*labels);
            }
        }
        Ok(manifest)
    }

    pub fn delimiter_char(&self) -> Result<char> {
        let mut chars = self.delimiter.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(Error::Config(format!(
                "delimiter must be one character, got {:?}",
                self.delimiter
            ))),
        }
    }
}

/// How original label values were re-coded: `original[code]` is the value
/// that became `code`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMapping {
    pub original: Vec<i64>,
}

/// Maps label values to `0..k` in increasing order of value.
pub fn recode_labels(raw: &[i64]) -> (Vec<usize>, LabelMapping) {
    let mut original = raw.to_vec();
    original.sort_unstable();
    original.dedup();
    let coded = raw
        .iter()
        .map(|x| original.binary_search(x).expect("value present"))
        .collect();
    (coded, LabelMapping { original })
}

fn rows_of(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.to_string()))
        .collect())
}

/// Reads `rows x cols` delimited decimal text, returned as stored on disk
/// (one file line per matrix row).
pub fn read_matrix(
    path: &Path,
    delimiter: char,
    rows: Option<usize>,
    cols: Option<usize>,
) -> Result<DenseMatrix> {
    let lines = rows_of(path)?;
    if let Some(expected) = rows {
        if lines.len() != expected {
            return Err(Error::parse(
                path,
                format!("expected {expected} rows, found {}", lines.len()),
            ));
        }
    }
    let mut entries = Vec::new();
    let mut width = cols;
    for (line_no, line) in &lines {
        let before = entries.len();
        for (c, cell) in line.split(delimiter).enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| {
                Error::parse(
                    path,
                    format!(
                        "row {line_no}, column {}: not a number: {:?}",
                        c + 1,
                        cell.trim()
                    ),
                )
            })?;
            if !value.is_finite() {
                return Err(Error::parse(
                    path,
                    format!("row {line_no}, column {}: non-finite value", c + 1),
                ));
            }
            entries.push(value);
        }
        let found = entries.len() - before;
        match width {
            Some(w) if w != found => {
                return Err(Error::parse(
                    path,
                    format!("row {line_no}: expected {w} columns, found {found}"),
                ))
            }
            None => width = Some(found),
            _ => {}
        }
    }
    DenseMatrix::from_row_major(lines.len(), width.unwrap_or(0), &entries)
}

/// Writes a matrix as delimited text, one matrix row per line.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>, delimiter: char) -> Result<()> {
    let mut out = String::new();
    for row in m.row_iter() {
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                out.push(delimiter);
            }
            write!(out, "{x}").expect("write to string");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    rows_of(path)?
        .into_iter()
        .map(|(line_no, l)| {
            l.trim().parse::<i64>().map_err(|_| {
                Error::parse(
                    path,
                    format!("line {line_no}: not an integer: {:?}", l.trim()),
                )
            })
        })
        .collect()
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        writeln!(out, "{l}").expect("write to string");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads an `n x V` 0/1 mask file.
pub fn read_mask(path: &Path, delimiter: char) -> Result<PresenceMask> {
    let lines = rows_of(path)?;
    let mut samples: Vec<Vec<bool>> = Vec::with_capacity(lines.len());
    for (line_no, line) in &lines {
        let row = line
            .split(delimiter)
            .enumerate()
            .map(|(c, cell)| match cell.trim() {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(Error::parse(
                    path,
                    format!(
                        "row {line_no}, column {}: expected 0 or 1, got {other:?}",
                        c + 1
                    ),
                )),
            })
            .collect::<Result<Vec<bool>>>()?;
        if let Some(first) = samples.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    path,
                    format!(
                        "row {line_no}: expected {} columns, found {}",
                        first.len(),
                        row.len()
                    ),
                ));
            }
        }
        samples.push(row);
    }
    let views = samples.first().map_or(0, Vec::len);
    let rows = (0..views)
        .map(|v| samples.iter().map(|s| s[v]).collect())
        .collect();
    PresenceMask::new(rows).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn write_mask(path: &Path, mask: &PresenceMask, delimiter: char) -> Result<()> {
    let mut out = String::with_capacity(mask.n_samples() * mask.n_views() * 2);
    for j in 0..mask.n_samples() {
        for v in 0..mask.n_views() {
            if v > 0 {
                out.push(delimiter);
            }
            out.push(if mask.is_observed(v, j) { '1' } else { '0' });
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads every view (transposed to `d_v x n`) and the optional labels.
pub fn load_dataset(
    manifest: &DatasetManifest,
) -> Result<(MultiViewDataset, Option<LabelMapping>)> {
    if manifest.views.is_empty() {
        return Err(Error::Config(format!(
            "manifest {:?} lists no views",
            manifest.name
        )));
    }
    let delimiter = manifest.delimiter_char()?;
    let views = manifest
        .views
        .iter()
        .map(|entry| {
            let m = read_matrix(&entry.path, delimiter, Some(manifest.n), Some(entry.dim))?;
            DenseMatrix::new(m.transpose())
        })
        .collect::<Result<Vec<_>>>()?;
    let (labels, mapping) = match &manifest.labels_path {
        Some(path) => {
            let raw = read_labels(path)?;
            if raw.len() != manifest.n {
                return Err(Error::parse(
                    path,
                    format!("expected {} labels, found {}", manifest.n, raw.len()),
                ));
            }
            let (coded, mapping) = recode_labels(&raw);
            (Some(coded), Some(mapping))
        }
        None => (None, None),
    };
    Ok((
        MultiViewDataset::new(manifest.name.clone(), views, labels)?,
        mapping,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn two_view_manifest(dir: &Path, view0: &str) -> DatasetManifest {
        write(dir, "a.csv", view0);
        write(dir, "b.csv", "1,2\n3,4\n5,6\n7,8\n");
        write(dir, "y.txt", "5\n2\n9\n2\n");
        let json = r#"{"name": "toy", "n": 4,
            "views": [{"path": "a.csv", "dim": 3}, {"path": "b.csv", "dim": 2}],
            "labels_path": "y.txt"}"#;
        let path = write(dir, "m.json", json);
        DatasetManifest::read(&path).unwrap()
    }

    #[test]
    fn loads_views_as_columns() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = two_view_manifest(dir.path(), "1,2,3\n4,5,6\n7,8,9\n10,11,12\n");
        let (data, mapping) = load_dataset(&manifest).unwrap();
        assert_eq!(data.view(0).shape(), (3, 4));
        assert_eq!(data.view(1).shape(), (2, 4));
        assert_eq!(data.view(0)[(2, 1)], 6.0);
        assert_eq!(data.labels().unwrap(), &[1, 0, 2, 0]);
        assert_eq!(mapping.unwrap().original, vec![2, 5, 9]);
    }

    #[test]
    fn row_count_mismatch_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = two_view_manifest(dir.path(), "1,2,3\n4,5,6\n7,8,9\n");
        let err = load_dataset(&manifest).unwrap_err().to_string();
        assert!(err.contains("a.csv"), "{err}");
        assert!(err.contains("expected 4 rows, found 3"), "{err}");
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = two_view_manifest(dir.path(), "1,2,3\n4,x,6\n7,8,9\n1,1,1\n");
        let err = load_dataset(&manifest).unwrap_err().to_string();
        assert!(err.contains("row 2, column 2"), "{err}");
    }

    #[test]
    fn column_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = two_view_manifest(dir.path(), "1,2,3\n4,5\n7,8,9\n1,1,1\n");
        assert!(load_dataset(&manifest).is_err());
    }

    #[test]
    fn missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = two_view_manifest(dir.path(), "1,2,3\n4,5,6\n7,8,9\n1,1,1\n");
        manifest.views[1].path = dir.path().join("nope.csv");
        assert!(matches!(load_dataset(&manifest), Err(Error::Io { .. })));
    }

    #[test]
    fn label_recoding() {
        let (coded, mapping) = recode_labels(&[9, 2, 5, 2]);
        assert_eq!(coded, vec![2, 0, 1, 0]);
        assert_eq!(mapping.original, vec![2, 5, 9]);
    }

    #[test]
    fn mask_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mask =
            PresenceMask::new(vec![vec![true, false, true], vec![false, true, true]]).unwrap();
        let path = dir.path().join("mask.csv");
        write_mask(&path, &mask, ',').unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "1,0\n0,1\n1,1\n");
        assert_eq!(read_mask(&path, ',').unwrap(), mask);
        fs::write(&path, "1,0\n0,2\n").unwrap();
        assert!(read_mask(&path, ',').is_err());
    }

    #[test]
    fn matrix_text_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[0.1, -1e-300, 1.0 / 3.0, 12345.678]);
        let path = dir.path().join("m.csv");
        write_matrix(&path, &m, ';').unwrap();
        assert_eq!(
            *read_matrix(&path, ';', Some(2), Some(2))
                .unwrap()
                .as_inner(),
            m
        );
    }
}
