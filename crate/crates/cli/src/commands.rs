//! The `mask`, `synth` and `eval` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use simvc_core::ingest::{
    generate_mask, read_labels, recode_labels, synth_dataset, write_labels, write_mask,
    write_matrix, DatasetManifest, SynthSpec, ViewEntry,
};
use simvc_core::{evaluate, Error as CoreError, Scores};

use crate::error::{CliError, Result};
use crate::output::{write_atomic, write_json};

fn tmp_then_rename(path: &Path, write: impl FnOnce(&Path) -> simvc_core::Result<()>) -> Result<()> {
    // Core writers take a path; render to a scratch file first, then move it.
    let dir = tempfile::tempdir_in(
        path.parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new(".")),
    )
    .map_err(|e| CoreError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let scratch = dir.path().join("out");
    write(&scratch)?;
    let bytes = fs::read(&scratch).map_err(|e| CoreError::Io {
        path: scratch.clone(),
        source: e,
    })?;
    write_atomic(path, &bytes)
}

/// Generates a presence mask for the dataset described by `manifest`.
pub fn mask_command(manifest: &Path, ratio: f64, seed: u64, out: &Path) -> Result<()> {
    let manifest = DatasetManifest::read(manifest)?;
    let mask = generate_mask(manifest.n, manifest.views.len(), ratio, seed)?;
    let delimiter = manifest.delimiter_char()?;
    tmp_then_rename(out, |p| write_mask(p, &mask, delimiter))
}

/// Writes `view_<v>.csv`, `labels.txt` and `manifest.json` into `out_dir`.
/// Returns the manifest path.
pub fn synth_command(spec_path: &Path, out_dir: &Path) -> Result<PathBuf> {
    let text = fs::read_to_string(spec_path).map_err(|e| CoreError::Io {
        path: spec_path.to_path_buf(),
        source: e,
    })?;
    let spec: SynthSpec = serde_json::from_str(&text).map_err(|e| CoreError::Parse {
        path: spec_path.to_path_buf(),
        message: format!("line {}: {e}", e.line()),
    })?;
    let (data, labels) = synth_dataset(&spec)?;
    fs::create_dir_all(out_dir).map_err(|e| CoreError::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let mut views = Vec::new();
    for (v, x) in data.views().iter().enumerate() {
        let name = format!("view_{v}.csv");
        tmp_then_rename(&out_dir.join(&name), |p| {
            write_matrix(p, &x.transpose(), ',')
        })?;
        views.push(ViewEntry {
            path: PathBuf::from(name),
            dim: x.nrows(),
        });
    }
    tmp_then_rename(&out_dir.join("labels.txt"), |p| write_labels(p, &labels))?;
    let manifest = DatasetManifest {
        name: data.name.clone(),
        n: data.n_samples(),
        views,
        labels_path: Some(PathBuf::from("labels.txt")),
        delimiter: ",".into(),
    };
    let path = out_dir.join("manifest.json");
    write_json(&path, &manifest)?;
    Ok(path)
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub n: usize,
    #[serde(flatten)]
    pub scores: Scores,
}

/// Scores predicted labels against true labels (one integer per line each).
pub fn eval_command(pred: &Path, truth: &Path) -> Result<EvalReport> {
    let (pred, _) = recode_labels(&read_labels(pred)?);
    let (truth, _) = recode_labels(&read_labels(truth)?);
    if pred.len() != truth.len() {
        return Err(CliError::Config(format!(
            "{} predicted labels but {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    Ok(EvalReport {
        n: pred.len(),
        scores: evaluate(&pred, &truth)?,
    })
}
