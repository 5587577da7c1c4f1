//! CSV sample datasets: `k` input columns followed by one output column.
//! A first row that does not parse as numbers is treated as a header.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
}

impl Dataset {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(reader);
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        let mut width = None;
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("row {}: {e}", line + 1))),
            };
            if values.len() < 2 {
                return Err(Error::Parse(format!("row {}: need at least two columns", line + 1)));
            }
            match width {
                None => width = Some(values.len()),
                Some(w) if w != values.len() => {
                    return Err(Error::Parse(format!("row {}: expected {w} columns, found {}", line + 1, values.len())))
                }
                _ => {}
            }
            let (y, x) = values.split_last().expect("at least two columns");
            inputs.push(x.to_vec());
            outputs.push(*y);
        }
        if inputs.is_empty() {
            return Err(Error::Parse("dataset has no samples".into()));
        }
        Ok(Self { inputs, outputs })
    }
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    Dataset::from_reader(std::fs::File::open(path)?)
}
