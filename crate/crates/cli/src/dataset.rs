//! Dataset ingestion, the UBall5D generator and seeded train/test splits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use eplex::exec::stream;
use eplex::gp::{SampleMatrix, TrainingData};
use eplex::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

/// Stream domains for dataset randomness, above the engine's tag range.
const SPLIT_DOMAIN: u64 = (1 << 40) | 1;
const UBALL_DOMAIN: u64 = (1 << 40) | 2;

/// Sampling range for every UBall5D input.
pub const UBALL5D_RANGE: (f64, f64) = (0.05, 6.05);

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: SampleMatrix,
    pub target: Vec<f64>,
    pub feature_names: Vec<String>,
}

/// Provenance recorded alongside experiment output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub source: String,
    pub samples: usize,
    pub features: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_range: Option<(f64, f64)>,
    pub rejected_rows: usize,
}

impl Dataset {
    pub fn samples(&self) -> usize {
        self.target.len()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<TrainingData> {
        TrainingData::new(self.features.select(indices), indices.iter().map(|&i| self.target[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.feature_names.clone();
        header.push("y".into());
        w.write_record(&header)?;
        for i in 0..self.samples() {
            let mut rec: Vec<String> =
                (0..self.features.features()).map(|f| self.features.column(f)[i].to_string()).collect();
            rec.push(self.target[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a headed CSV. Rows with a wrong field count or any non-numeric or
/// non-finite entry are skipped; their number is returned with the dataset.
pub fn read_csv<R: Read>(reader: R, target: &str) -> Result<(Dataset, usize)> {
    let mut r = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let ti = header.iter().position(|h| h == target).ok_or_else(|| {
        Error::InvalidInput(format!("target column {target:?} not found (columns: {})", header.join(", ")))
    })?;
    let feature_names: Vec<String> =
        header.iter().enumerate().filter(|(i, _)| *i != ti).map(|(_, h)| h.clone()).collect();
    if feature_names.is_empty() {
        return Err(Error::InvalidInput("dataset needs at least one feature column".into()));
    }

    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut rejected = 0;
    for rec in r.records() {
        let rec = rec?;
        let parsed: Option<Vec<f64>> = if rec.len() == header.len() {
            rec.iter().map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite())).collect()
        } else {
            None
        };
        match parsed {
            Some(mut v) => {
                y.push(v.remove(ti));
                rows.push(v);
            }
            None => rejected += 1,
        }
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("dataset has no valid rows".into()));
    }
    Ok((Dataset { features: SampleMatrix::from_rows(&rows)?, target: y, feature_names }, rejected))
}

pub fn load_csv(path: impl AsRef<Path>, target: &str) -> Result<(Dataset, usize)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::InvalidInput(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file, target)
}

pub fn uball5d(x: &[f64; 5]) -> f64 {
    10.0 / (5.0 + x.iter().map(|v| (v - 3.0) * (v - 3.0)).sum::<f64>())
}

/// Noise-free UBall5D samples with inputs uniform on [`UBALL5D_RANGE`].
pub fn gen_uball5d(samples: usize, seed: u64) -> Result<Dataset> {
    if samples == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let mut rng = stream(seed, UBALL_DOMAIN, 0);
    let rows: Vec<[f64; 5]> =
        (0..samples).map(|_| std::array::from_fn(|_| rng.gen_range(UBALL5D_RANGE.0..=UBALL5D_RANGE.1))).collect();
    let target = rows.iter().map(uball5d).collect();
    Ok(Dataset {
        features: SampleMatrix::from_rows(&rows)?,
        target,
        feature_names: (0..5).map(|i| format!("x{i}")).collect(),
    })
}

/// Seeded shuffle split into (train, test) index lists. Both parts are
/// non-empty whenever there are at least two samples.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidInput(format!("split fraction {train_fraction} must lie in (0, 1)")));
    }
    if n < 2 {
        return Err(Error::InvalidInput("need at least two samples to split".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream(seed, SPLIT_DOMAIN, 0));
    let k = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
    let test = idx.split_off(k);
    Ok((idx, test))
}
