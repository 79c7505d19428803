//! CSV artifacts: controls `t,p,v_l,v_r`, fields `x,value`, trajectories
//! `t,x,value`, and generic numeric tables.
//!
//! Values are written in Rust's shortest round-trip decimal form, so equal
//! inputs give byte-identical files.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::scalar::Real;
use std::io::{Read, Write};

pub const CONTROL_HEADER: [&str; 4] = ["t", "p", "v_l", "v_r"];
pub const FIELD_HEADER: [&str; 2] = ["x", "value"];
pub const TRAJECTORY_HEADER: [&str; 3] = ["t", "x", "value"];
pub const REMAINDER_HEADER: [&str; 3] = ["tau", "alpha", "h1_terminal"];

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Solver(format!("csv i/o: {e}"))
}

/// Writes `header` and one line per row.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Solver(format!("row of width {} under a {}-column header", row.len(), header.len())));
        }
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_controls<W: Write, S: Real>(out: W, rows: &[[S; 4]]) -> Result<()> {
    write_table(out, &CONTROL_HEADER, rows.iter().map(|r| r.iter().map(|v| v.as_f64()).collect()))
}

pub fn write_field<W: Write, S: Real>(out: W, field: &Field<S>) -> Result<()> {
    let rows = (0..field.len()).map(|i| vec![field.grid.x(i).as_f64(), field.values[i].as_f64()]);
    write_table(out, &FIELD_HEADER, rows)
}

/// Writes every `stride`-th frame plus the last one.
pub fn write_trajectory<W: Write, S: Real>(out: W, grid: &Grid1D<S>, frames: &[(S, &[S])], stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let last = frames.len().saturating_sub(1);
    let rows = frames
        .iter()
        .enumerate()
        .filter(|(k, _)| k % stride == 0 || *k == last)
        .flat_map(|(_, (t, f))| {
            f.iter()
                .enumerate()
                .map(move |(i, v)| vec![t.as_f64(), grid.x(i).as_f64(), v.as_f64()])
        });
    write_table(out, &TRAJECTORY_HEADER, rows)
}

/// `(tau, alpha, h1_terminal)` rows.
pub fn write_remainder_sweep<W: Write>(out: W, rows: &[(f64, f64, f64)]) -> Result<()> {
    write_table(out, &REMAINDER_HEADER, rows.iter().map(|r| vec![r.0, r.1, r.2]))
}

/// Reads a numeric table with a header row; returns the header and rows.
pub fn read_table<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = r.headers().map_err(io_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(io_err)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::config(format!("row {}: '{s}' is not a number", line + 1))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Reads an `x,value` profile and interpolates it linearly onto `grid`,
/// which must lie within the sampled range.
pub fn read_field<R: Read, S: Real>(input: R, grid: Grid1D<S>) -> Result<Field<S>> {
    let (header, rows) = read_table(input)?;
    let col = |name: &str| header.iter().position(|h| h == name);
    let (xi, vi) = match (col("x"), col("value")) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::config(format!("profile CSV needs columns x,value (found {})", header.join(",")))),
    };
    if rows.len() < 2 {
        return Err(Error::config("profile CSV needs at least two rows"));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r[xi]).collect();
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config("profile CSV x column must be strictly increasing"));
    }
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let span = (hi - lo).abs().max(1.0) * 1e-12;
    if grid.x_left.as_f64() < lo - span || grid.x_right.as_f64() > hi + span {
        return Err(Error::config(format!(
            "profile CSV covers [{lo}, {hi}] but the grid is [{}, {}]",
            grid.x_left, grid.x_right
        )));
    }
    let values: Vec<f64> = rows.iter().map(|r| r[vi]).collect();
    let same_nodes = xs.len() == grid.n && xs.iter().enumerate().all(|(i, &x)| (x - grid.x(i).as_f64()).abs() <= span);
    if same_nodes {
        return Field::new(grid, values.into_iter().map(S::lit).collect());
    }
    let sample = |x: f64| -> f64 {
        let x = x.clamp(lo, hi);
        let k = xs.partition_point(|&s| s <= x).clamp(1, xs.len() - 1);
        let (x0, x1) = (xs[k - 1], xs[k]);
        values[k - 1] + (values[k] - values[k - 1]) * (x - x0) / (x1 - x0)
    };
    let out: Vec<S> = (0..grid.n).map(|i| S::lit(sample(grid.x(i).as_f64()))).collect();
    Field::new(grid, out)
}
