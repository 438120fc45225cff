//! Text formats: trajectory CSV (`t,x_0,...,x_{dim-1}`) and coordinate
//! matrix files (`p <dim>` header followed by `i j value` lines, 0-based).
//!
//! Floats are written in shortest round-trip form, so re-parsing is exact.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use super::simulate::Trajectory;
use crate::{Error, Result};

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let header: Vec<String> =
        std::iter::once("t".to_string()).chain((0..traj.dim()).map(|i| format!("x_{i}"))).collect();
    writeln!(w, "{}", header.join(","))?;
    for (t, x) in traj.states().enumerate() {
        write!(w, "{:?}", t as f64 * traj.eta())?;
        for v in x {
            write!(w, ",{v:?}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Parses a trajectory CSV. The step size is read from the second time
/// stamp; `seed` is attached as given since the CSV does not carry it.
pub fn read_trajectory_csv<R: BufRead>(r: R, seed: u64) -> Result<Trajectory> {
    let mut lines = r.lines().enumerate();
    let dim = match lines.next() {
        Some((_, header)) => {
            let header = header?;
            let cols: Vec<&str> = header.trim().split(',').collect();
            if cols.first() != Some(&"t") || cols.len() < 2 {
                return Err(Error::Parse { line: 1, message: "expected header t,x_0,...".into() });
            }
            cols.len() - 1
        }
        None => return Err(Error::Parse { line: 1, message: "empty file".into() }),
    };
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {} fields, found {}", dim + 1, fields.len()),
            });
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse { line: idx + 1, message: e.to_string() });
        times.push(parse(fields[0])?);
        for f in &fields[1..] {
            states.push(parse(f)?);
        }
    }
    if times.len() < 2 {
        return Err(Error::Parse { line: 2, message: "need at least two rows to infer the step".into() });
    }
    let eta = times[1] - times[0];
    Trajectory::from_states(eta, dim, states, seed)
}

pub fn write_matrix<W: Write>(m: &DMatrix<f64>, mut w: W) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid("coordinate format stores square matrices"));
    }
    writeln!(w, "p {}", m.nrows())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != 0.0 {
                writeln!(w, "{i} {j} {:?}", m[(i, j)])?;
            }
        }
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut m: Option<DMatrix<f64>> = None;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { line: idx + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match (&mut m, fields.as_slice()) {
            (None, ["p", dim]) => {
                let p: usize = dim.parse().map_err(|_| err(format!("bad dimension {dim:?}")))?;
                m = Some(DMatrix::zeros(p, p));
            }
            (None, _) => return Err(err("expected header `p <dim>`".into())),
            (Some(mat), [i, j, v]) => {
                let i: usize = i.parse().map_err(|_| err(format!("bad row index {i:?}")))?;
                let j: usize = j.parse().map_err(|_| err(format!("bad column index {j:?}")))?;
                let v: f64 = v.parse().map_err(|_| err(format!("bad value {v:?}")))?;
                if i >= mat.nrows() || j >= mat.ncols() {
                    return Err(err(format!("index ({i},{j}) out of range")));
                }
                mat[(i, j)] = v;
            }
            (Some(_), _) => return Err(err("expected `i j value`".into())),
        }
    }
    m.ok_or(Error::Parse { line: 1, message: "missing header".into() })
}
