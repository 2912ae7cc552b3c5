//! Logic-gate datasets.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seeded_rng;
use crate::slp::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Gate {
    Or,
    And,
    Xor,
}

impl Gate {
    pub const ALL: [Gate; 3] = [Gate::Or, Gate::And, Gate::Xor];

    pub fn apply(self, x1: bool, x2: bool) -> bool {
        match self {
            Gate::Or => x1 || x2,
            Gate::And => x1 && x2,
            Gate::Xor => x1 ^ x2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::Or => "OR",
            Gate::And => "AND",
            Gate::Xor => "XOR",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "OR" => Ok(Gate::Or),
            "AND" => Ok(Gate::And),
            "XOR" => Ok(Gate::Xor),
            other => Err(format!("unknown gate '{other}' (expected OR, AND or XOR)")),
        }
    }
}

fn as_bit(v: f64) -> Result<bool> {
    if v == 0.0 {
        Ok(false)
    } else if v == 1.0 {
        Ok(true)
    } else {
        Err(Error::NonBinary(v))
    }
}

/// Truth table of `gate` on binary inputs, as 0.0 / 1.0.
pub fn gate_label(gate: Gate, x1: f64, x2: f64) -> Result<f64> {
    let out = gate.apply(as_bit(x1)?, as_bit(x2)?);
    Ok(if out { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub gate: Gate,
    pub seed: u64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Writes `x1,x2,label` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::result::Result<(), csv::Error> {
        write_samples_csv(&self.samples, writer)
    }

    /// Reads `x1,x2,label` rows and checks every label against `gate`.
    pub fn read_csv<R: Read>(reader: R, gate: Gate) -> std::result::Result<Self, DatasetCsvError> {
        let samples = read_samples_csv(reader)?;
        for (row, s) in samples.iter().enumerate() {
            let expected = gate_label(gate, s.x[0], s.x[1]).map_err(|e| DatasetCsvError::Invalid {
                row: row + 1,
                reason: e.to_string(),
            })?;
            if expected != s.t {
                return Err(DatasetCsvError::Invalid {
                    row: row + 1,
                    reason: format!("label {} disagrees with {gate} truth table", s.t),
                });
            }
        }
        Ok(Self { samples, gate, seed: 0 })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetCsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {reason}")]
    Invalid { row: usize, reason: String },
}

#[derive(serde::Serialize, serde::Deserialize)]
struct CsvRow {
    x1: u8,
    x2: u8,
    label: u8,
}

pub fn write_samples_csv<W: Write>(samples: &[Sample], writer: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for s in samples {
        w.serialize(CsvRow {
            x1: s.x[0] as u8,
            x2: s.x[1] as u8,
            label: s.t as u8,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(reader: R) -> std::result::Result<Vec<Sample>, DatasetCsvError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut samples = Vec::new();
    for (row, rec) in r.deserialize::<CsvRow>().enumerate() {
        let rec = rec?;
        if rec.x1 > 1 || rec.x2 > 1 || rec.label > 1 {
            return Err(DatasetCsvError::Invalid {
                row: row + 1,
                reason: "values must be 0 or 1".into(),
            });
        }
        samples.push(Sample::new(vec![rec.x1 as f64, rec.x2 as f64], rec.label as f64));
    }
    Ok(samples)
}

/// `n` inputs drawn uniformly from `{0,1}^2`, labelled by `gate`.
pub fn generate_dataset(gate: Gate, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("dataset size must be >= 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let samples = (0..n)
        .map(|_| {
            let x1 = rng.gen_bool(0.5);
            let x2 = rng.gen_bool(0.5);
            let t = if gate.apply(x1, x2) { 1.0 } else { 0.0 };
            Sample::new(vec![x1 as u8 as f64, x2 as u8 as f64], t)
        })
        .collect();
    Ok(Dataset { samples, gate, seed })
}

/// A fresh uniformly random visiting order for one epoch.
pub fn shuffle_epoch<T, R: Rng + ?Sized>(items: &[T], rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(rng);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_tables() {
        assert_eq!(gate_label(Gate::Xor, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(gate_label(Gate::And, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(gate_label(Gate::Or, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(gate_label(Gate::Or, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(gate_label(Gate::And, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(gate_label(Gate::Xor, 1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(gate_label(Gate::Or, 0.5, 0.0), Err(Error::NonBinary(_))));
    }

    #[test]
    fn gate_parsing() {
        assert_eq!("xor".parse::<Gate>().unwrap(), Gate::Xor);
        assert_eq!("AND".parse::<Gate>().unwrap(), Gate::And);
        assert!("nand".parse::<Gate>().is_err());
    }

    #[test]
    fn generated_labels_are_sound() {
        for gate in Gate::ALL {
            let d = generate_dataset(gate, 100, 11).unwrap();
            assert_eq!(d.len(), 100);
            for s in &d.samples {
                assert_eq!(s.t, gate_label(gate, s.x[0], s.x[1]).unwrap());
            }
        }
        assert!(generate_dataset(Gate::Or, 0, 1).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            generate_dataset(Gate::Xor, 50, 9).unwrap(),
            generate_dataset(Gate::Xor, 50, 9).unwrap()
        );
        assert_ne!(
            generate_dataset(Gate::Xor, 50, 9).unwrap().samples,
            generate_dataset(Gate::Xor, 50, 10).unwrap().samples
        );
    }

    #[test]
    fn input_patterns_are_uniform() {
        for seed in [0, 1, 2, 77] {
            let d = generate_dataset(Gate::Or, 4000, seed).unwrap();
            let mut counts = [0usize; 4];
            for s in &d.samples {
                counts[(s.x[0] as usize) * 2 + s.x[1] as usize] += 1;
            }
            for c in counts {
                let freq = c as f64 / 4000.0;
                assert!((freq - 0.25).abs() < 0.05, "frequency {freq}");
            }
        }
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let items = vec![(); 1];
        assert_eq!(shuffle_epoch(&items, &mut seeded_rng(0)), vec![0]);

        let items: Vec<u32> = (0..100).collect();
        let mut order = shuffle_epoch(&items, &mut seeded_rng(5));
        order.sort_unstable();
        assert_eq!(order, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn shuffle_sequence_replays_under_seed() {
        let items = vec![0u8; 20];
        let seq = |seed| {
            let mut rng = seeded_rng(seed);
            (0..5).map(|_| shuffle_epoch(&items, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(seq(42), seq(42));
        let s = seq(42);
        assert_ne!(s[0], s[1]);
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let d = generate_dataset(Gate::And, 30, 4).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,label\n"));
        let back = Dataset::read_csv(&buf[..], Gate::And).unwrap();
        assert_eq!(back.samples, d.samples);

        assert!(matches!(
            Dataset::read_csv("x1,x2,label\n1,1,0\n".as_bytes(), Gate::And),
            Err(DatasetCsvError::Invalid { row: 1, .. })
        ));
        assert!(matches!(
            Dataset::read_csv("x1,x2,label\n2,1,0\n".as_bytes(), Gate::And),
            Err(DatasetCsvError::Invalid { .. })
        ));
        assert!(Dataset::read_csv("x1,x2,label\na,1,0\n".as_bytes(), Gate::And).is_err());
    }
}
