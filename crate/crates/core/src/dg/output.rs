//! Field and diagnostics output: legacy ASCII VTK, cell-average CSV and the
//! per-step diagnostics CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::physics::{pressure, StateVec};
use super::solver::StepDiagnostics;
use super::DGField;

pub fn write_averages_csv(field: &DGField, path: &Path) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    field.averages()?.write_csv(f)
}

/// Structured-grid VTK with cell data `rho`, `m`, `E`, `B`, `pressure` and
/// `mach` (flow speed over sound speed), all from cell averages.
pub fn write_vtk(field: &DGField, gamma: f64, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let (nx, ny, dx) = (field.nx(), field.ny(), field.dx());
    let (x0, y0) = field.origin();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "mhd-idp cell averages")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_GRID")?;
    writeln!(w, "DIMENSIONS {} {} 1", nx + 1, ny + 1)?;
    writeln!(w, "POINTS {} double", (nx + 1) * (ny + 1))?;
    for j in 0..=ny {
        for i in 0..=nx {
            writeln!(w, "{} {} 0", x0 + i as f64 * dx, y0 + j as f64 * dx)?;
        }
    }
    let avgs: Vec<StateVec> = (0..field.n_cells()).map(|c| field.average(c)).collect();
    writeln!(w, "CELL_DATA {}", field.n_cells())?;
    let scalar = |w: &mut BufWriter<File>, name: &str, f: &dyn Fn(&StateVec) -> f64| -> Result<()> {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for u in &avgs {
            writeln!(w, "{:.10e}", f(u))?;
        }
        Ok(())
    };
    let vector = |w: &mut BufWriter<File>, name: &str, k: usize| -> Result<()> {
        writeln!(w, "VECTORS {name} double")?;
        for u in &avgs {
            writeln!(w, "{:.10e} {:.10e} {:.10e}", u[k], u[k + 1], u[k + 2])?;
        }
        Ok(())
    };
    scalar(&mut w, "rho", &|u| u[0])?;
    vector(&mut w, "m", 1)?;
    scalar(&mut w, "E", &|u| u[4])?;
    vector(&mut w, "B", 5)?;
    scalar(&mut w, "pressure", &|u| pressure(u, gamma))?;
    scalar(&mut w, "mach", &|u| {
        let speed = (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]).sqrt() / u[0];
        let p = pressure(u, gamma);
        if p > 0.0 {
            speed / (gamma * p / u[0]).sqrt()
        } else {
            f64::NAN
        }
    })?;
    w.flush()?;
    Ok(())
}

/// Writer for one row per time step.
pub struct DiagnosticsWriter {
    inner: csv::Writer<BufWriter<File>>,
}

impl DiagnosticsWriter {
    pub const HEADER: [&'static str; 7] = [
        "time",
        "dt",
        "dy_triggered",
        "dy_iters",
        "conservation_residual",
        "min_rho",
        "min_internal_energy",
    ];

    pub fn create(path: &Path) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        inner.write_record(Self::HEADER).map_err(csv_err)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, d: &StepDiagnostics) -> Result<()> {
        self.inner
            .write_record([
                format!("{:.16e}", d.time),
                format!("{:.16e}", d.dt),
                (d.dy_triggered as u8).to_string(),
                d.dy_iters.to_string(),
                format!("{:.6e}", d.conservation_residual),
                format!("{:.16e}", d.min_rho),
                format!("{:.16e}", d.min_internal_energy),
            ])
            .map_err(csv_err)
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        k => Error::Internal(format!("csv writer: {k:?}")),
    }
}
