//! On-disk formats.
//!
//! Measures are JSON `{"dim": n, "points": [[..], ..], "weights": [..]}` or
//! CSV with header `x1,..,xn,w`. Floats are written in shortest round-trip
//! form, so reading back what was written reproduces the measure exactly.

use crate::error::{LabError, Result};
use riesz_swarm_core::{DiscreteMeasure, EquilibriumResult, ShapeSpec};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// Guesses from the file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
pub struct EquilibriumJson {
    pub lambda: f64,
    pub energy: f64,
    pub capacity: f64,
    pub kkt_residual: f64,
    pub weights: Vec<f64>,
}

impl From<&EquilibriumResult> for EquilibriumJson {
    fn from(r: &EquilibriumResult) -> Self {
        EquilibriumJson {
            lambda: r.lambda,
            energy: r.energy,
            capacity: r.capacity,
            kkt_residual: r.kkt_residual,
            weights: r.weights.clone(),
        }
    }
}

pub fn measure_to_json(mu: &DiscreteMeasure) -> Result<String> {
    let doc = MeasureJson {
        dim: mu.dim(),
        points: (0..mu.len()).map(|i| mu.point(i).to_vec()).collect(),
        weights: mu.weights().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn measure_from_json(text: &str) -> Result<DiscreteMeasure> {
    let doc: MeasureJson = serde_json::from_str(text)?;
    if doc.points.iter().any(|p| p.len() != doc.dim) {
        return Err(LabError::Format(format!(
            "every point must have {} coordinates",
            doc.dim
        )));
    }
    Ok(DiscreteMeasure::new(
        doc.dim,
        doc.points.concat(),
        doc.weights,
    )?)
}

pub fn write_measure_csv<W: Write>(mu: &DiscreteMeasure, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=mu.dim()).map(|k| format!("x{k}")).collect();
    header.push("w".into());
    w.write_record(&header)?;
    for i in 0..mu.len() {
        let row = mu
            .point(i)
            .iter()
            .chain([&mu.weights()[i]])
            .map(f64::to_string);
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_measure_csv<R: Read>(input: R) -> Result<DiscreteMeasure> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let dim = header
        .len()
        .checked_sub(1)
        .filter(|&d| d > 0)
        .ok_or_else(|| LabError::Format("measure CSV needs columns x1..xn,w".into()))?;
    for (k, name) in header.iter().enumerate() {
        let expect = if k == dim {
            "w".to_string()
        } else {
            format!("x{}", k + 1)
        };
        if name.trim() != expect {
            return Err(LabError::Format(format!(
                "column {} is `{name}`, expected `{expect}`",
                k + 1
            )));
        }
    }
    let (mut points, mut weights) = (Vec::new(), Vec::new());
    for (line, record) in r.records().enumerate() {
        let record = record?;
        for (k, field) in record.iter().enumerate() {
            let x: f64 = field.trim().parse().map_err(|_| {
                LabError::Format(format!("row {}: `{field}` is not a number", line + 1))
            })?;
            if k == dim {
                weights.push(x);
            } else {
                points.push(x);
            }
        }
    }
    Ok(DiscreteMeasure::new(dim, points, weights)?)
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let mut file = BufReader::new(File::open(path)?);
    match Format::from_path(path) {
        Format::Csv => read_measure_csv(file),
        Format::Json => {
            let mut text = String::new();
            file.read_to_string(&mut text)?;
            measure_from_json(&text)
        }
    }
}

pub fn write_measure(mu: &DiscreteMeasure, path: &Path, format: Format) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_measure_csv(mu, out),
        Format::Json => {
            out.write_all(measure_to_json(mu)?.as_bytes())?;
            out.write_all(b"\n")?;
            Ok(out.flush()?)
        }
    }
}

pub fn equilibrium_to_json(res: &EquilibriumResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(&EquilibriumJson::from(res))?)
}

pub fn read_shape_spec(path: &Path) -> Result<ShapeSpec> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Trajectory frames as CSV rows `step,t,particle,x1..xn`.
pub struct TrajectoryWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(out: W, dim: usize) -> Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string(), "t".into(), "particle".into()];
        header.extend((1..=dim).map(|k| format!("x{k}")));
        out.write_record(&header)?;
        Ok(TrajectoryWriter { out })
    }

    pub fn frame(&mut self, step: u64, t: f64, dim: usize, positions: &[f64]) -> Result<()> {
        for (i, p) in positions.chunks_exact(dim).enumerate() {
            let mut row = vec![step.to_string(), t.to_string(), i.to_string()];
            row.extend(p.iter().map(f64::to_string));
            self.out.write_record(&row)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        Ok(self.out.flush()?)
    }
}
