//! CSV exchange format for measures (`weight,c0,c1,…`) and plans
//! (`source,target,mass`).

use std::io::{Read, Write};

use super::{DiscreteMeasure, TransportPlan};
use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_measure<W: Write>(measure: &DiscreteMeasure, out: W) -> Result<()> {
    let mut header = vec!["weight".to_string()];
    header.extend((0..measure.dim()).map(|k| format!("c{k}")));
    write_measure_labeled(measure, &header, out)
}

/// Like [`write_measure`] with caller-chosen column names (weight first).
pub fn write_measure_labeled<W: Write>(measure: &DiscreteMeasure, header: &[String], out: W) -> Result<()> {
    if header.len() != measure.dim() + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} column labels for a measure of dimension {}",
            header.len(),
            measure.dim()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for (i, weight) in measure.weights().iter().enumerate() {
        let mut rec = vec![format!("{weight:e}")];
        rec.extend(measure.point(i).iter().map(|x| format!("{x:e}")));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a measure written by [`write_measure`]. Weights are renormalized.
pub fn read_measure<R: Read>(input: R) -> Result<DiscreteMeasure> {
    let mut r = csv::Reader::from_reader(input);
    let dim = r.headers().map_err(csv_err)?.len().saturating_sub(1);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("row {}: {e}", line + 1)));
        weights.push(parse(&rec[0])?);
        for k in 1..=dim {
            points.push(parse(&rec[k])?);
        }
    }
    DiscreteMeasure::normalized(dim, points, weights)
}

pub fn write_plan<W: Write>(plan: &TransportPlan, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "mass"]).map_err(csv_err)?;
    for &(i, j, x) in &plan.entries {
        w.write_record(&[i.to_string(), j.to_string(), format!("{x:e}")]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
