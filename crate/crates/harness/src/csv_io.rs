//! CSV formats: heatmaps, babble datasets and distortion traces.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use vdsom::{BabbleSample, Normalizer, TrainingTrace};

use crate::error::{AtStage, Result, Stage, StageError};

fn writer<W: Write>(out: W, headers: bool) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(headers)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Writes a heatmap: one CSV line per lattice row, row-major, no header.
/// Unvisited nodes are empty fields.
pub fn write_heatmap<W: Write>(rows: &[Vec<Option<f64>>], out: W) -> Result<()> {
    let mut w = writer(out, false);
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()).collect();
        w.write_record(&cells).at(Stage::Export)?;
    }
    w.flush().at(Stage::Export)
}

pub fn heatmap_string(rows: &[Vec<Option<f64>>]) -> String {
    let mut buf = Vec::new();
    write_heatmap(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Parses a heatmap written by [`write_heatmap`]. All rows must have the
/// same width.
pub fn parse_heatmap<R: Read>(input: R) -> Result<Vec<Vec<Option<f64>>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(false).from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.at(Stage::Export)?;
        let row = rec
            .iter()
            .map(|f| {
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse::<f64>()
                        .map(Some)
                        .map_err(|e| StageError::new(Stage::Export, format!("bad heatmap cell `{f}`: {e}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// One babble dataset line: joint angles in radians, position in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BabbleRecord {
    pub theta1: f64,
    pub theta2: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
}

pub fn write_babble<W: Write>(samples: &[BabbleSample], out: W) -> Result<()> {
    let mut w = writer(out, true);
    for s in samples {
        w.serialize(BabbleRecord {
            theta1: s.joints[0],
            theta2: s.joints[1],
            x: s.position[0],
            y: s.position[1],
        })
        .at(Stage::Babble)?;
    }
    w.flush().at(Stage::Babble)
}

/// Reads a babble dataset and normalizes it with `norm`.
pub fn read_babble<R: Read>(input: R, norm: &Normalizer) -> Result<Vec<BabbleSample>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.deserialize::<BabbleRecord>() {
        let rec = rec.at(Stage::Babble)?;
        let joints = [rec.theta1, rec.theta2];
        let position = [rec.x, rec.y];
        if joints.iter().chain(&position).any(|v| !v.is_finite()) {
            return Err(StageError::new(Stage::Babble, format!("non-finite value in record {rec:?}")));
        }
        out.push(BabbleSample {
            joints,
            position,
            joints_norm: norm.normalize_joints(joints),
            position_norm: norm.normalize_task(position),
        });
    }
    if out.is_empty() {
        return Err(StageError::new(Stage::Babble, "babble file has no records"));
    }
    Ok(out)
}

/// `iteration,zeta` lines with a header.
pub fn write_trace<W: Write>(points: impl IntoIterator<Item = (usize, f64)>, out: W) -> Result<()> {
    let mut w = writer(out, false);
    w.write_record(["iteration", "zeta"]).at(Stage::Export)?;
    for (t, z) in points {
        w.write_record([t.to_string(), z.to_string()]).at(Stage::Export)?;
    }
    w.flush().at(Stage::Export)
}

pub fn trace_points(trace: &TrainingTrace) -> impl Iterator<Item = (usize, f64)> + '_ {
    trace.points.iter().map(|p| (p.iteration, p.distortion))
}
