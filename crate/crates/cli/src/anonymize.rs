//! CSV microdata pipeline: rows become colored points (numeric
//! quasi-identifier columns as coordinates, the sensitive attribute as the
//! color), the solver groups them, and the published output replaces exact
//! quasi-identifiers by per-group ranges.

use divclust::instance::{Clustering, Instance};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Normalization {
    Minmax,
    Zscore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Fail when no feasible clustering exists.
    Strict,
    /// Suppress the minimum number of records instead.
    Outliers,
}

#[derive(Debug, Clone)]
pub struct AnonymizeConfig {
    pub qi_columns: Vec<String>,
    pub sa_column: String,
    pub normalization: Normalization,
    pub l: usize,
    pub mode: Mode,
}

#[derive(Debug, Error)]
pub enum AnonymizeError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("input has no rows")]
    EmptyFile,
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("row {row}: column {column:?} is not numeric: {value:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("the sensitive attribute column must not be a quasi-identifier")]
    SaIsQi,
    #[error("quasi-identifier columns must not be empty")]
    NoQiColumns,
    #[error("instance: {0}")]
    Instance(#[from] divclust::instance::InstanceError),
}

/// Original table plus everything needed to de-normalize.
pub struct Ingested {
    pub instance: Instance,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub sa_index: usize,
    pub raw_qi: Vec<Vec<f64>>,
    /// Per QI column: the scale a normalized distance is multiplied by to
    /// bound the original-space distance (range for minmax, std for zscore).
    pub scales: Vec<f64>,
}

pub fn ingest_csv<R: std::io::Read>(
    reader: R,
    cfg: &AnonymizeConfig,
) -> Result<Ingested, AnonymizeError> {
    if cfg.qi_columns.is_empty() {
        return Err(AnonymizeError::NoQiColumns);
    }
    if cfg.qi_columns.contains(&cfg.sa_column) {
        return Err(AnonymizeError::SaIsQi);
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let col_index = |name: &String| -> Result<usize, AnonymizeError> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| AnonymizeError::MissingColumn(name.clone()))
    };
    let qi_indices: Vec<usize> = cfg
        .qi_columns
        .iter()
        .map(col_index)
        .collect::<Result<_, _>>()?;
    let sa_index = col_index(&cfg.sa_column)?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut raw_qi: Vec<Vec<f64>> = Vec::new();
    let mut sa_values: Vec<String> = Vec::new();
    for (row_no, record) in rdr.records().enumerate() {
        let record = record?;
        let fields: Vec<String> = record.iter().map(|f| f.to_string()).collect();
        let mut qi = Vec::with_capacity(qi_indices.len());
        for (&idx, name) in qi_indices.iter().zip(&cfg.qi_columns) {
            let value = fields.get(idx).cloned().unwrap_or_default();
            let parsed: f64 = value
                .trim()
                .parse()
                .map_err(|_| AnonymizeError::NonNumeric {
                    row: row_no + 2, // 1-based, after the header
                    column: name.clone(),
                    value: value.clone(),
                })?;
            qi.push(parsed);
        }
        sa_values.push(fields.get(sa_index).cloned().unwrap_or_default());
        raw_qi.push(qi);
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(AnonymizeError::EmptyFile);
    }

    let dim = qi_indices.len();
    let n = rows.len();
    let mut scales = vec![0.0; dim];
    let mut coords = vec![vec![0.0; dim]; n];
    for d in 0..dim {
        let column: Vec<f64> = raw_qi.iter().map(|r| r[d]).collect();
        match cfg.normalization {
            Normalization::Minmax => {
                let min = column.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let range = max - min;
                scales[d] = range;
                for (i, &x) in column.iter().enumerate() {
                    // constant columns map to 0
                    coords[i][d] = if range > 0.0 { (x - min) / range } else { 0.0 };
                }
            }
            Normalization::Zscore => {
                let mean = column.iter().sum::<f64>() / n as f64;
                let var = column.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
                let std = var.sqrt();
                scales[d] = std;
                for (i, &x) in column.iter().enumerate() {
                    coords[i][d] = if std > 0.0 { (x - mean) / std } else { 0.0 };
                }
            }
        }
    }

    // dense color ids by first appearance of each sensitive value
    let mut seen: Vec<String> = Vec::new();
    let colors: Vec<usize> = sa_values
        .iter()
        .map(|v| match seen.iter().position(|s| s == v) {
            Some(i) => i,
            None => {
                seen.push(v.clone());
                seen.len() - 1
            }
        })
        .collect();
    let instance = Instance::from_coords(coords, colors, cfg.l)?.with_color_names(seen);
    Ok(Ingested {
        instance,
        header,
        rows,
        sa_index,
        raw_qi,
        scales,
    })
}

pub struct Published {
    /// cluster, count, radius (de-normalized scale), center QI values.
    pub summary_header: Vec<String>,
    pub summary: Vec<Vec<String>>,
    /// cluster, per-column ranges, sensitive value — one row per record.
    pub groups_header: Vec<String>,
    pub groups: Vec<Vec<String>>,
    /// full original rows of suppressed records.
    pub suppressed_header: Vec<String>,
    pub suppressed: Vec<Vec<String>>,
}

fn fmt(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Publication: (1) one summary row per cluster with the center's original
/// quasi-identifiers, the cluster size, and the radius scaled back to the
/// original units (exact for one column, an upper bound otherwise); (2) the
/// grouped table where each record keeps only its cluster id, the cluster's
/// per-column ranges, and its sensitive value; (3) the suppressed records.
pub fn publish(ingested: &Ingested, clustering: &Clustering, cfg: &AnonymizeConfig) -> Published {
    let scale = ingested.scales.iter().cloned().fold(0.0, f64::max);
    let mut summary_header = vec!["cluster".into(), "count".into(), "radius".into()];
    summary_header.extend(cfg.qi_columns.iter().cloned());
    let mut summary = Vec::new();
    let mut groups_header = vec!["cluster".into()];
    for c in &cfg.qi_columns {
        groups_header.push(format!("{c}_range"));
    }
    groups_header.push(cfg.sa_column.clone());
    let mut groups = Vec::new();

    for (ci, cluster) in clustering.clusters.iter().enumerate() {
        let mut row = vec![
            ci.to_string(),
            cluster.members.len().to_string(),
            fmt(cluster.radius * scale),
        ];
        for (d, _) in cfg.qi_columns.iter().enumerate() {
            row.push(fmt(ingested.raw_qi[cluster.center][d]));
        }
        summary.push(row);

        let ranges: Vec<String> = (0..cfg.qi_columns.len())
            .map(|d| {
                let lo = cluster
                    .members
                    .iter()
                    .map(|&m| ingested.raw_qi[m][d])
                    .fold(f64::INFINITY, f64::min);
                let hi = cluster
                    .members
                    .iter()
                    .map(|&m| ingested.raw_qi[m][d])
                    .fold(f64::NEG_INFINITY, f64::max);
                format!("{}..{}", fmt(lo), fmt(hi))
            })
            .collect();
        for &m in &cluster.members {
            let mut row = vec![ci.to_string()];
            row.extend(ranges.iter().cloned());
            row.push(ingested.rows[m][ingested.sa_index].clone());
            groups.push(row);
        }
    }

    let suppressed = clustering
        .outliers
        .iter()
        .map(|&o| ingested.rows[o].clone())
        .collect();
    Published {
        summary_header,
        summary,
        groups_header,
        groups,
        suppressed_header: ingested.header.clone(),
        suppressed,
    }
}

impl Published {
    pub fn to_csv_sections(&self) -> String {
        let mut out = String::new();
        let mut write = |title: &str, header: &[String], rows: &[Vec<String>]| {
            out.push_str(&format!("# {title}\n"));
            out.push_str(&header.join(","));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        };
        write("summary", &self.summary_header, &self.summary);
        write("groups", &self.groups_header, &self.groups);
        write("suppressed", &self.suppressed_header, &self.suppressed);
        out
    }

    pub fn to_json(&self) -> String {
        let obj = |header: &[String], rows: &[Vec<String>]| -> serde_json::Value {
            rows.iter()
                .map(|row| {
                    header
                        .iter()
                        .zip(row)
                        .map(|(h, v)| (h.clone(), serde_json::Value::String(v.clone())))
                        .collect::<serde_json::Map<_, _>>()
                        .into()
                })
                .collect::<Vec<serde_json::Value>>()
                .into()
        };
        serde_json::to_string_pretty(&serde_json::json!({
            "summary": obj(&self.summary_header, &self.summary),
            "groups": obj(&self.groups_header, &self.groups),
            "suppressed": obj(&self.suppressed_header, &self.suppressed),
        }))
        .expect("publication serializes")
    }
}
