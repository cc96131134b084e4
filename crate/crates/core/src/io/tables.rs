//! CSV formats for point clouds, node tables and predictions.

use std::io::{Read, Write};
use std::path::Path;

use crate::classify::Prediction;
use crate::error::{Error, Result};
use crate::experiments::FieldTable;
use crate::geometry::{LabelSet, PointCloud};

fn csv_err(e: csv::Error) -> Error {
    Error::data(format!("csv: {e}"))
}

fn write_err(e: std::io::Error) -> Error {
    Error::data(format!("write failed: {e}"))
}

/// Integer-valued floats print without a fractional part; everything else
/// uses the shortest round-trip representation.
fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Writes `x_1..x_d,label_class,label_value[,truth]`.
///
/// Scalar labels get class `-1` and their value; class labels get their id in
/// both columns; unlabeled rows get `-1` and an empty value.
pub fn write_cloud<W: Write>(cloud: &PointCloud, truth: Option<&[usize]>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=cloud.dim()).map(|k| format!("x_{k}")).collect();
    header.push("label_class".into());
    header.push("label_value".into());
    if truth.is_some() {
        header.push("truth".into());
    }
    w.write_record(&header).map_err(csv_err)?;
    let labels = cloud.labels();
    let mut slot = vec![None; cloud.len()];
    for (li, &z) in labels.nodes.iter().enumerate() {
        slot[z] = Some(li);
    }
    for i in 0..cloud.len() {
        let mut rec: Vec<String> = cloud.point(i).iter().map(|&c| format!("{c}")).collect();
        match slot[i] {
            Some(li) => {
                let class = labels.classes.as_ref().map_or(-1, |c| c[li] as i64);
                rec.push(class.to_string());
                rec.push(format!("{}", labels.values[li]));
            }
            None => {
                rec.push("-1".into());
                rec.push(String::new());
            }
        }
        if let Some(t) = truth {
            rec.push(t[i].to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(write_err)
}

/// A loaded point cloud with its optional ground-truth column.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudFile {
    pub cloud: PointCloud,
    pub truth: Option<Vec<usize>>,
}

/// Reads the format of [`write_cloud`]. Coordinate columns are every column
/// named `x_k` or `xk`, in order.
pub fn read_cloud<R: Read>(input: R) -> Result<CloudFile> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    let is_coord = |h: &str| {
        let rest = h.strip_prefix("x_").or_else(|| h.strip_prefix('x'));
        rest.is_some_and(|k| !k.is_empty() && k.chars().all(|c| c.is_ascii_digit()))
    };
    let coord_cols: Vec<usize> = (0..header.len())
        .filter(|&c| is_coord(&header[c]))
        .collect();
    if coord_cols.is_empty() {
        return Err(Error::data("point cloud CSV has no x_1.. columns"));
    }
    let find = |name: &str| header.iter().position(|h| h == name);
    let (class_col, value_col, truth_col) =
        (find("label_class"), find("label_value"), find("truth"));
    for (c, h) in header.iter().enumerate() {
        if !coord_cols.contains(&c) && ![class_col, value_col, truth_col].contains(&Some(c)) {
            return Err(Error::data(format!("unknown point cloud column {h:?}")));
        }
    }
    let dim = coord_cols.len();
    let mut coords = Vec::new();
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    let mut classes: Vec<Option<usize>> = Vec::new();
    let mut truth = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = row + 2;
        let field = |c: usize| rec.get(c).unwrap_or("");
        for &c in &coord_cols {
            let v: f64 = field(c)
                .parse()
                .map_err(|_| Error::data(format!("line {line}: bad coordinate {:?}", field(c))))?;
            coords.push(v);
        }
        let class: i64 = match class_col.map(field) {
            None | Some("") => -1,
            Some(s) => s
                .parse()
                .map_err(|_| Error::data(format!("line {line}: bad label_class {s:?}")))?,
        };
        let value: Option<f64> = match value_col.map(field) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse()
                    .map_err(|_| Error::data(format!("line {line}: bad label_value {s:?}")))?,
            ),
        };
        if class < -1 {
            return Err(Error::data(format!(
                "line {line}: label_class must be >= -1"
            )));
        }
        if class >= 0 || value.is_some() {
            nodes.push(row);
            values.push(value.unwrap_or(class as f64));
            classes.push((class >= 0).then_some(class as usize));
        }
        if let Some(c) = truth_col {
            truth.push(
                field(c)
                    .parse::<usize>()
                    .map_err(|_| Error::data(format!("line {line}: bad truth {:?}", field(c))))?,
            );
        }
    }
    let mut cloud = PointCloud::new(dim, coords)?;
    let labels = if !classes.is_empty() && classes.iter().all(Option::is_some) {
        let ids: Vec<usize> = classes.into_iter().map(Option::unwrap).collect();
        if ids.iter().zip(&values).any(|(&c, &v)| v != c as f64) {
            return Err(Error::data(
                "label_value must equal label_class for class labels",
            ));
        }
        LabelSet::classes(nodes, ids)
    } else if classes.iter().any(Option::is_some) {
        return Err(Error::data(
            "labels mix class ids and scalar values; use one kind per file",
        ));
    } else {
        LabelSet::scalar(nodes, values)
    };
    cloud.set_labels(labels)?;
    Ok(CloudFile {
        cloud,
        truth: truth_col.map(|_| truth),
    })
}

pub fn save_cloud(cloud: &PointCloud, truth: Option<&[usize]>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_cloud(cloud, truth, std::io::BufWriter::new(file))
}

pub fn load_cloud(path: &Path) -> Result<CloudFile> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_cloud(std::io::BufReader::new(file))
}

/// Writes a node table; integer-valued cells print as integers.
pub fn write_table<W: Write>(table: &FieldTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| fmt_num(x)))
            .map_err(csv_err)?;
    }
    w.flush().map_err(write_err)
}

/// `node,pred_class,score_0..score_{C-1}`.
pub fn write_prediction<W: Write>(pred: &Prediction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["node".to_string(), "pred_class".to_string()];
    header.extend((0..pred.scores.len()).map(|c| format!("score_{c}")));
    w.write_record(&header).map_err(csv_err)?;
    for (i, &class) in pred.classes.iter().enumerate() {
        let mut rec = vec![i.to_string(), class.to_string()];
        rec.extend(pred.scores.iter().map(|s| format!("{}", s[i])));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(write_err)
}
