use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which stretch quantity a model estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Inlet,
    Outlet,
    Total,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Inlet, Target::Outlet, Target::Total];

    pub fn name(self) -> &'static str {
        match self {
            Target::Inlet => "inlet",
            Target::Outlet => "outlet",
            Target::Total => "total",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inlet" => Ok(Target::Inlet),
            "outlet" => Ok(Target::Outlet),
            "total" => Ok(Target::Total),
            other => Err(Error::Domain(format!("unknown target '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub sensor: String,
    pub repetition: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub features: Vec<f64>,
    pub inlet_mm: f64,
    pub outlet_mm: f64,
    pub total_mm: f64,
    pub provenance: Provenance,
}

impl DatasetRow {
    pub fn new(features: Vec<f64>, inlet_mm: f64, outlet_mm: f64, provenance: Provenance) -> Self {
        DatasetRow {
            features,
            inlet_mm,
            outlet_mm,
            total_mm: inlet_mm + outlet_mm,
            provenance,
        }
    }

    pub fn target(&self, t: Target) -> f64 {
        match t {
            Target::Inlet => self.inlet_mm,
            Target::Outlet => self.outlet_mm,
            Target::Total => self.total_mm,
        }
    }
}

const TARGET_COLUMNS: [&str; 6] = [
    "dL_inlet_mm",
    "dL_outlet_mm",
    "dL_total_mm",
    "sensor",
    "repetition",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    rows: Vec<DatasetRow>,
}

impl Dataset {
    pub fn new(rows: Vec<DatasetRow>) -> Result<Self> {
        if let Some(first) = rows.first() {
            let dim = first.features.len();
            for (i, r) in rows.iter().enumerate() {
                if r.features.len() != dim {
                    return Err(Error::InvalidDataset(format!(
                        "row {i} has {} features, expected {dim}",
                        r.features.len()
                    )));
                }
                if r.features.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidDataset(format!("row {i} has a non-finite feature")));
                }
                if (r.total_mm - (r.inlet_mm + r.outlet_mm)).abs() > 1e-9 {
                    return Err(Error::InvalidDataset(format!(
                        "row {i}: total {} != inlet {} + outlet {}",
                        r.total_mm, r.inlet_mm, r.outlet_mm
                    )));
                }
            }
        }
        Ok(Dataset { rows })
    }

    pub fn rows(&self) -> &[DatasetRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.rows.first().map_or(0, |r| r.features.len())
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.features.clone()).collect()
    }

    pub fn targets(&self, t: Target) -> Vec<f64> {
        self.rows.iter().map(|r| r.target(t)).collect()
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.n_features()).map(|i| format!("f{i:02}")).collect();
        header.extend(TARGET_COLUMNS.iter().map(|s| s.to_string()));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.features.iter().map(|v| v.to_string()).collect();
            rec.push(r.inlet_mm.to_string());
            rec.push(r.outlet_mm.to_string());
            rec.push(r.total_mm.to_string());
            rec.push(r.provenance.sensor.clone());
            rec.push(r.provenance.repetition.to_string());
            rec.push(r.provenance.seed.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<dataset csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers()?.clone();
        let dim = header
            .len()
            .checked_sub(TARGET_COLUMNS.len())
            .ok_or_else(|| Error::InvalidDataset("header is missing target columns".into()))?;
        for (i, name) in TARGET_COLUMNS.iter().enumerate() {
            if header.get(dim + i) != Some(*name) {
                return Err(Error::InvalidDataset(format!(
                    "expected column '{name}' at position {}",
                    dim + i
                )));
            }
        }
        let parse = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidDataset(format!("line {line}: bad number '{s}'")))
        };
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let features = (0..dim).map(|k| parse(&rec[k], line)).collect::<Result<Vec<_>>>()?;
            let inlet_mm = parse(&rec[dim], line)?;
            let outlet_mm = parse(&rec[dim + 1], line)?;
            let total_mm = parse(&rec[dim + 2], line)?;
            let repetition = rec[dim + 4]
                .parse()
                .map_err(|_| Error::InvalidDataset(format!("line {line}: bad repetition")))?;
            let seed = rec[dim + 5]
                .parse()
                .map_err(|_| Error::InvalidDataset(format!("line {line}: bad seed")))?;
            rows.push(DatasetRow {
                features,
                inlet_mm,
                outlet_mm,
                total_mm,
                provenance: Provenance {
                    sensor: rec[dim + 3].to_string(),
                    repetition,
                    seed,
                },
            });
        }
        Dataset::new(rows)
    }
}

/// Seeded shuffle into `floor(fraction * n)` training rows and the rest.
pub fn train_test_split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if d.is_empty() {
        return Err(Error::InsufficientData("cannot split an empty dataset".into()));
    }
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::Domain(format!("train fraction {train_fraction} outside [0, 1]")));
    }
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((train_fraction * d.len() as f64) + 1e-9).floor() as usize;
    let (train, test) = idx.split_at(n_train.min(d.len()));
    Ok((d.subset(train), d.subset(test)))
}
