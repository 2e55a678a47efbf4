//! Conservative cell-average limiter.
//!
//! Given the matrix `Ubar` of cell averages (one row per cell), find the
//! matrix `X` closest to it in the Frobenius norm such that every row lies in
//! `G^eps` and every column keeps its sum. The problem is split into three
//! terms (conservation indicator, quadratic distance, admissibility
//! indicator) and solved with Davis–Yin splitting at step size 1.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::brent::BrentConfig;
use crate::dg::DGField;
use crate::error::{Error, Result};
use crate::mhd_state::{admissibility_violation, is_admissible, ConservedState, MAX_DIM};
use crate::slicing::{project_admissible, MhdPoint};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 500;

/// `N x (2 + 2n)` row-major matrix of cell averages, columns ordered
/// `rho, m_1..m_n, E, B_1..B_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellAverageMatrix {
    data: Vec<f64>,
    n_cells: usize,
    dim: usize,
}

impl CellAverageMatrix {
    pub fn new(n_cells: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension must be 1..=3, got {dim}")));
        }
        if data.len() != n_cells * (2 + 2 * dim) {
            return Err(Error::InvalidInput(format!(
                "{} entries do not fill a {n_cells} x {} matrix",
                data.len(),
                2 + 2 * dim
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry in row {}",
                i / (2 + 2 * dim)
            )));
        }
        Ok(Self { data, n_cells, dim })
    }

    pub fn from_states(states: &[ConservedState]) -> Result<Self> {
        let dim = states.first().map_or(3, |s| s.dim());
        let mut data = Vec::with_capacity(states.len() * (2 + 2 * dim));
        for s in states {
            if s.dim() != dim {
                return Err(Error::InvalidInput("states of mixed dimension".into()));
            }
            data.extend(s.to_row());
        }
        Self::new(states.len(), dim, data)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of columns, `2 + 2n`.
    pub fn width(&self) -> usize {
        2 + 2 * self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.width();
        &mut self.data[i * w..(i + 1) * w]
    }

    pub fn state(&self, i: usize) -> ConservedState {
        row_state(self.row(i), self.dim)
    }

    /// Column sums, accumulated in row order.
    pub fn column_sums(&self) -> Vec<f64> {
        let w = self.width();
        let mut sums = vec![0.0; w];
        for row in self.data.chunks_exact(w) {
            for (s, x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Index of every row outside `G^eps`.
    pub fn inadmissible_rows(&self, eps: f64) -> Vec<usize> {
        (0..self.n_cells)
            .filter(|&i| !is_admissible(&self.state(i), eps))
            .collect()
    }

    /// Largest admissibility violation over the rows.
    pub fn feasibility_residual(&self, eps: f64) -> f64 {
        (0..self.n_cells)
            .map(|i| admissibility_violation(&self.state(i), eps))
            .fold(0.0, f64::max)
    }

    pub fn header(dim: usize) -> String {
        let mut cols = vec!["rho".to_string()];
        cols.extend((1..=dim).map(|k| format!("m{k}")));
        cols.push("E".into());
        cols.extend((1..=dim).map(|k| format!("B{k}")));
        cols.join(",")
    }

    /// Reads the CSV format written by [`CellAverageMatrix::write_csv`]. The
    /// dimension is taken from the header.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| csv_error(e, 1))?
            .iter()
            .map(str::to_string)
            .collect();
        let dim = (1..=MAX_DIM)
            .find(|&d| Self::header(d) == header.join(","))
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!(
                    "unexpected header '{}', want e.g. '{}'",
                    header.join(","),
                    Self::header(3)
                ),
            })?;
        let w = 2 + 2 * dim;
        let mut data = Vec::new();
        let mut n = 0;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(e, 0))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() == 1 && rec[0].is_empty() {
                continue;
            }
            if rec.len() != w {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {w} fields, found {}", rec.len()),
                });
            }
            for f in rec.iter() {
                let x: f64 = f.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("not a number: '{f}'"),
                })?;
                if !x.is_finite() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("non-finite value '{f}'"),
                    });
                }
                data.push(x);
            }
            n += 1;
        }
        Self::new(n, dim, data)
    }

    /// Header line plus one row per cell, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let header = Self::header(self.dim);
        wtr.write_record(header.split(',')).map_err(csv_io)?;
        for row in self.data.chunks_exact(self.width()) {
            wtr.write_record(row.iter().map(|x| format!("{x:.16e}")))
                .map_err(csv_io)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            msg: format!("{kind:?}"),
        },
    }
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Internal(format!("csv writer: {kind:?}")),
    }
}

fn row_state(row: &[f64], dim: usize) -> ConservedState {
    let mut m = [0.0; 3];
    let mut b = [0.0; 3];
    m[..dim].copy_from_slice(&row[1..1 + dim]);
    b[..dim].copy_from_slice(&row[2 + dim..2 + 2 * dim]);
    ConservedState::from_parts_dim(row[0], m, row[1 + dim], b, dim)
}

fn write_state(row: &mut [f64], s: &ConservedState, dim: usize) {
    row[0] = s.rho;
    row[1..1 + dim].copy_from_slice(&s.m[..dim]);
    row[1 + dim] = s.e;
    row[2 + dim..2 + 2 * dim].copy_from_slice(&s.b[..dim]);
}

/// Column sums the limited matrix must reproduce.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationTarget {
    pub b: Vec<f64>,
}

impl ConservationTarget {
    pub fn from_matrix(m: &CellAverageMatrix) -> Self {
        Self { b: m.column_sums() }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DYReport {
    pub n_iters: usize,
    /// Max-norm of column sums minus target, for the returned matrix.
    pub conservation_residual: f64,
    /// Worst admissibility violation over the rows of the returned matrix.
    pub feasibility_residual: f64,
    pub converged: bool,
    /// `|X^{k+1} - X^{k+1/2}|_F` per iteration.
    pub increment_history: Vec<f64>,
    /// Rows that needed a projection, summed over iterations.
    pub n_projections: usize,
    /// Euler slice projections, summed over iterations.
    pub n_slice_calls: usize,
    /// Fewest and most slice projections spent on a single row projection.
    pub slice_call_range: Option<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, Default)]
struct CallStats {
    rows: usize,
    calls: usize,
    range: Option<(usize, usize)>,
}

impl CallStats {
    fn merge(self, o: Self) -> Self {
        let range = match (self.range, o.range) {
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
            (r, None) | (None, r) => r,
        };
        Self {
            rows: self.rows + o.rows,
            calls: self.calls + o.calls,
            range,
        }
    }
}

/// Projection onto the conservation hyperplane: shift each column by
/// `(b_c - sum_c) / N`.
pub fn prox_conservation(x: &CellAverageMatrix, target: &ConservationTarget) -> Result<CellAverageMatrix> {
    let w = x.width();
    if target.b.len() != w {
        return Err(Error::InvalidInput(format!(
            "target has {} entries for {w} columns",
            target.b.len()
        )));
    }
    let mut out = x.clone();
    if x.n_cells == 0 {
        return Ok(out);
    }
    let n = x.n_cells as f64;
    let shift: Vec<f64> = x
        .column_sums()
        .iter()
        .zip(&target.b)
        .map(|(s, b)| (b - s) / n)
        .collect();
    out.data.par_chunks_mut(w).for_each(|row| {
        for (v, d) in row.iter_mut().zip(&shift) {
            *v += d;
        }
    });
    Ok(out)
}

/// Row-wise projection onto `G^eps`. Returns the projected matrix and the
/// total number of slice projections spent.
pub fn prox_admissible(x: &CellAverageMatrix, eps: f64) -> Result<(CellAverageMatrix, usize)> {
    let (out, stats) = prox_admissible_counted(x, eps, &BrentConfig::default())?;
    Ok((out, stats.calls))
}

fn prox_admissible_counted(
    x: &CellAverageMatrix,
    eps: f64,
    cfg: &BrentConfig,
) -> Result<(CellAverageMatrix, CallStats)> {
    let dim = x.dim;
    let mut out = x.clone();
    let counts: Vec<CallStats> = out
        .data
        .par_chunks_mut(x.width())
        .map(|row| -> Result<CallStats> {
            let s = row_state(row, dim);
            if is_admissible(&s, eps) {
                return Ok(CallStats::default());
            }
            let r = project_admissible(&MhdPoint::from(s), eps, cfg)?;
            write_state(row, &r.state, dim);
            Ok(CallStats {
                rows: 1,
                calls: r.n_slice_calls,
                range: Some((r.n_slice_calls, r.n_slice_calls)),
            })
        })
        .collect::<Result<_>>()?;
    let stats = counts.into_iter().fold(CallStats::default(), CallStats::merge);
    Ok((out, stats))
}

/// Solves the limiting problem for `ubar`.
///
/// The returned matrix is the admissible-side iterate, so every row lies in
/// `G^eps`; its column sums match the input to within the reported
/// conservation residual. Hitting `max_iters` is reported through
/// `converged = false`, not as an error.
pub fn limit_cell_averages(
    ubar: &CellAverageMatrix,
    eps: f64,
    tol_dy: f64,
    max_iters: usize,
) -> Result<(CellAverageMatrix, DYReport)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    if !(tol_dy > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be > 0, got {tol_dy}")));
    }
    let target = ConservationTarget::from_matrix(ubar);
    if ubar.inadmissible_rows(eps).is_empty() {
        return Ok((
            ubar.clone(),
            DYReport {
                converged: true,
                ..Default::default()
            },
        ));
    }
    let n = ubar.n_cells as f64;
    let mean: Vec<f64> = target.b.iter().map(|b| b / n).collect();
    if !is_admissible(&row_state(&mean, ubar.dim), eps) {
        return Err(Error::Domain(
            "mean of the cell averages is not admissible; no conservative admissible limiting exists"
                .into(),
        ));
    }

    let cfg = BrentConfig::default();
    let threshold = tol_dy * (1.0 + ubar.frobenius_norm());
    let mut report = DYReport::default();
    let mut z = ubar.clone();
    let mut x_half = z.clone();
    let mut stats = CallStats::default();
    for _ in 0..max_iters {
        let (xh, st) = prox_admissible_counted(&z, eps, &cfg)?;
        stats = stats.merge(st);
        // 2 x_half - z - (x_half - ubar)
        let mut y = xh.clone();
        for ((yv, zv), uv) in y.data.iter_mut().zip(&z.data).zip(&ubar.data) {
            *yv += uv - zv;
        }
        let x1 = prox_conservation(&y, &target)?;
        let mut inc2 = 0.0;
        for ((zv, a), h) in z.data.iter_mut().zip(&x1.data).zip(&xh.data) {
            let d = a - h;
            inc2 += d * d;
            *zv += d;
        }
        let inc = inc2.sqrt();
        x_half = xh;
        report.n_iters += 1;
        report.increment_history.push(inc);
        if inc <= threshold {
            report.converged = true;
            break;
        }
    }
    report.conservation_residual = x_half
        .column_sums()
        .iter()
        .zip(&target.b)
        .map(|(s, b)| (s - b).abs())
        .fold(0.0, f64::max);
    report.feasibility_residual = x_half.feasibility_residual(eps);
    report.n_projections = stats.rows;
    report.n_slice_calls = stats.calls;
    report.slice_call_range = stats.range;
    Ok((x_half, report))
}

/// Shifts each cell's polynomial so that its average becomes the matching
/// row of `x_star`; higher modes are untouched.
pub fn apply_limited_averages(field: &DGField, x_star: &CellAverageMatrix) -> Result<DGField> {
    let mut out = field.clone();
    out.set_averages(x_star)?;
    Ok(out)
}
