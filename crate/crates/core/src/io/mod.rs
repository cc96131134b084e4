//! File formats: point clouds, graphs, tables, IDX images and run artifacts.

mod graph_text;
mod idx;
mod tables;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{ExperimentOutput, FieldTable};

pub use graph_text::{graph_from_str, graph_to_string, load_graph, save_graph};
pub use idx::{encode_idx, load_idx, parse_images, parse_labels, IdxDataset};
pub use tables::{
    load_cloud, read_cloud, save_cloud, write_cloud, write_prediction, write_table, CloudFile,
};

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline. Object keys come out sorted.
pub fn write_json(value: &impl Serialize, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::data(format!("cannot serialize {}: {e}", path.display())))?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn save_table(table: &FieldTable, path: &Path) -> Result<()> {
    write_table(table, create(path)?)
}

/// Writes `report.json`, plus `field.csv` and `boundary.csv` when nonempty.
/// Returns the files written.
pub fn write_output(dir: &Path, output: &ExperimentOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let report = dir.join("report.json");
    write_json(&output.report, &report)?;
    written.push(report);
    for (name, table) in [
        ("field.csv", &output.field),
        ("boundary.csv", &output.boundary),
    ] {
        if !table.is_empty() {
            let path = dir.join(name);
            save_table(table, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}
