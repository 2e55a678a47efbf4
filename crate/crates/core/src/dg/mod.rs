//! Two-dimensional P2 discontinuous Galerkin solver for ideal MHD on uniform
//! square-cell meshes. All three vector components are carried; derivatives
//! act in `x` and `y` only.

pub mod accuracy;
pub mod basis;
pub mod boundary;
pub mod cases;
pub mod config;
pub mod limiters;
pub mod output;
pub mod physics;
pub mod solver;

use rayon::prelude::*;

use crate::dy_limiter::CellAverageMatrix;
use crate::error::{Error, Result};
use basis::{eval, NMODES, TABLES};
use physics::{StateVec, NVARS};

pub use accuracy::{compute_errors, convergence_rate, ErrorReport};
pub use cases::init_case;
pub use config::{Case, RunConfig};
pub use limiters::{divfree_project, tvb_limit, zhang_shu_limit};
pub use physics::llf_flux;
pub use solver::{step_ssprk3, RunSummary, Solver, StepDiagnostics};

/// Coefficients per cell: `NVARS` variables times `NMODES` modes.
pub const CELL_LEN: usize = NVARS * NMODES;

/// Modal coefficients of every cell. Cell `(i, j)` has index `j * nx + i`;
/// within a cell, coefficient `k` of variable `v` sits at `v * NMODES + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DGField {
    nx: usize,
    ny: usize,
    dx: f64,
    origin: (f64, f64),
    coeffs: Vec<f64>,
}

impl DGField {
    pub fn zeros(nx: usize, ny: usize, dx: f64, origin: (f64, f64)) -> Self {
        Self {
            nx,
            ny,
            dx,
            origin,
            coeffs: vec![0.0; nx * ny * CELL_LEN],
        }
    }

    /// L2 projection of `f(x, y)` with 3x3 Gauss quadrature per cell.
    pub fn project<F>(nx: usize, ny: usize, dx: f64, origin: (f64, f64), f: F) -> Self
    where
        F: Fn(f64, f64) -> StateVec + Sync,
    {
        let mut field = Self::zeros(nx, ny, dx, origin);
        let t = &*TABLES;
        let geom = field.geometry();
        field
            .coeffs
            .par_chunks_mut(CELL_LEN)
            .enumerate()
            .for_each(|(c, cell)| {
                let (xc, yc) = geom.center(c);
                for q in 0..9 {
                    let (xi, eta) = t.vol_pts[q];
                    let u = f(xc + 0.5 * dx * xi, yc + 0.5 * dx * eta);
                    for v in 0..NVARS {
                        for k in 0..NMODES {
                            cell[v * NMODES + k] += 0.25 * t.vol_w[q] * u[v] * t.vol_phi[q][k];
                        }
                    }
                }
            });
        field
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        &self.coeffs[c * CELL_LEN..(c + 1) * CELL_LEN]
    }

    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.coeffs[c * CELL_LEN..(c + 1) * CELL_LEN]
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            nx: self.nx,
            ny: self.ny,
            dx: self.dx,
            origin: self.origin,
        }
    }

    pub fn average(&self, c: usize) -> StateVec {
        cell_average(self.cell(c))
    }

    /// Value of the polynomial of cell `c` at reference point `(xi, eta)`.
    pub fn value(&self, c: usize, xi: f64, eta: f64) -> StateVec {
        eval_state(self.cell(c), &basis::phi(xi, eta))
    }

    /// Cell averages as an `N x 8` matrix in cell order. Fails on
    /// non-finite entries.
    pub fn averages(&self) -> Result<CellAverageMatrix> {
        let data: Vec<f64> = (0..self.n_cells()).flat_map(|c| self.average(c)).collect();
        CellAverageMatrix::new(self.n_cells(), 3, data)
    }

    /// Domain integrals of the conserved variables.
    pub fn totals(&self) -> StateVec {
        let mut t = [0.0; NVARS];
        for c in 0..self.n_cells() {
            let a = self.average(c);
            for v in 0..NVARS {
                t[v] += a[v];
            }
        }
        t.map(|x| x * self.dx * self.dx)
    }

    /// Overwrites the constant mode of every cell with the rows of `x`,
    /// leaving the higher modes alone.
    pub fn set_averages(&mut self, x: &CellAverageMatrix) -> Result<()> {
        if x.n_cells() != self.n_cells() || x.width() != NVARS {
            return Err(Error::InvalidInput(format!(
                "{} x {} averages for a field of {} cells",
                x.n_cells(),
                x.width(),
                self.n_cells()
            )));
        }
        self.coeffs
            .par_chunks_mut(CELL_LEN)
            .enumerate()
            .for_each(|(c, cell)| {
                for (v, val) in x.row(c).iter().enumerate() {
                    cell[v * NMODES] = *val;
                }
            });
        Ok(())
    }
}

/// Mesh layout without the coefficient data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub origin: (f64, f64),
}

impl Geometry {
    pub fn center(&self, c: usize) -> (f64, f64) {
        let (i, j) = (c % self.nx, c / self.nx);
        (
            self.origin.0 + (i as f64 + 0.5) * self.dx,
            self.origin.1 + (j as f64 + 0.5) * self.dx,
        )
    }

    pub fn physical(&self, c: usize, xi: f64, eta: f64) -> (f64, f64) {
        let (xc, yc) = self.center(c);
        (xc + 0.5 * self.dx * xi, yc + 0.5 * self.dx * eta)
    }
}

#[inline]
pub(crate) fn cell_average(cell: &[f64]) -> StateVec {
    std::array::from_fn(|v| cell[v * NMODES])
}

#[inline]
pub(crate) fn eval_state(cell: &[f64], phi: &[f64; NMODES]) -> StateVec {
    std::array::from_fn(|v| eval(&cell[v * NMODES..(v + 1) * NMODES], phi))
}
