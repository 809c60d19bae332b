//! CSV form of a field: one row per main node, columns `y1..yN,weight,value`.

use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::DVector;

use crate::{Field, GeometryError, Grid};

/// Parsed rows of a field file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

fn csv_err(e: impl std::fmt::Display) -> GeometryError {
    GeometryError::Csv(e.to_string())
}

impl FieldTable {
    pub fn from_field(f: &Field) -> Self {
        let grid = f.grid();
        let dim = grid.dim();
        Self {
            dim,
            points: (0..grid.n_nodes()).map(|q| grid.node(q).to_vec()).collect(),
            weights: grid.weights().iter().copied().collect(),
            values: f.values().iter().copied().collect(),
        }
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), GeometryError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("y{i}")).collect();
        header.push("weight".into());
        header.push("value".into());
        w.write_record(&header).map_err(csv_err)?;
        for ((p, wt), v) in self.points.iter().zip(&self.weights).zip(&self.values) {
            let mut rec: Vec<String> = p.iter().map(|x| format!("{x:.17e}")).collect();
            rec.push(format!("{wt:.17e}"));
            rec.push(format!("{v:.17e}"));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(csv_err)?;
        Ok(())
    }

    /// Parse a field file. The dimension is read from the header.
    pub fn read<R: Read>(input: R) -> Result<Self, GeometryError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = r.headers().map_err(csv_err)?.clone();
        let names: Vec<&str> = header.iter().map(str::trim).collect();
        let dim = names.len().checked_sub(2).ok_or_else(|| csv_err("header too short"))?;
        if !(1..=3).contains(&dim) {
            return Err(csv_err(format!("unsupported dimension {dim} in header")));
        }
        for (i, name) in names[..dim].iter().enumerate() {
            if *name != format!("y{}", i + 1) {
                return Err(csv_err(format!("unexpected column '{name}'")));
            }
        }
        if names[dim] != "weight" || names[dim + 1] != "value" {
            return Err(csv_err("last columns must be 'weight,value'"));
        }
        let mut table = Self {
            dim,
            points: Vec::new(),
            weights: Vec::new(),
            values: Vec::new(),
        };
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != dim + 2 {
                return Err(csv_err(format!("row {} has {} columns", line + 2, rec.len())));
            }
            let nums = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| csv_err(format!("row {}: {e}", line + 2)))?;
            if nums.iter().any(|x| !x.is_finite()) {
                return Err(csv_err(format!("row {}: non-finite entry", line + 2)));
            }
            let r2: f64 = nums[..dim].iter().map(|x| x * x).sum();
            if r2 >= 1.0 {
                return Err(csv_err(format!("row {}: node outside the unit ball", line + 2)));
            }
            table.points.push(nums[..dim].to_vec());
            table.weights.push(nums[dim]);
            table.values.push(nums[dim + 1]);
        }
        Ok(table)
    }

    /// Rebuild a field on `grid`; nodes must coincide with the grid's main nodes.
    pub fn to_field(&self, grid: &Arc<Grid>) -> Result<Field, GeometryError> {
        if self.dim != grid.dim() || self.points.len() != grid.n_nodes() {
            return Err(GeometryError::GridMismatch);
        }
        for (q, p) in self.points.iter().enumerate() {
            let node = grid.node(q);
            if p.iter().zip(node).any(|(a, b)| (a - b).abs() > 1e-12) {
                return Err(GeometryError::GridMismatch);
            }
        }
        Ok(Field::from_nodal(grid, &DVector::from_column_slice(&self.values)))
    }
}
