//! Discrete error norms against an exact solution.

use crate::error::{Error, Result};

use super::basis::TABLES;
use super::cases::{alfven_angle, alfven_exact};
use super::config::{Case, RunConfig};
use super::physics::StateVec;
use super::{eval_state, DGField};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub err1: f64,
    pub errinf: f64,
    /// Rates relative to the next coarser mesh, when known.
    pub rate1: Option<f64>,
    pub rateinf: Option<f64>,
}

/// `ln(coarse / fine) / ln 2`.
pub fn convergence_rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).ln() / 2f64.ln()
}

/// Fills the rates of a sequence of reports from successively halved meshes.
pub fn fill_rates(reports: &mut [ErrorReport]) {
    for k in 1..reports.len() {
        let (c, f) = (reports[k - 1], reports[k]);
        reports[k].rate1 = Some(convergence_rate(c.err1, f.err1));
        reports[k].rateinf = Some(convergence_rate(c.errinf, f.errinf));
    }
}

/// The four wave-carrying components of the Alfvén test: transverse
/// in-plane and out-of-plane velocity and magnetic field.
fn wave_components(u: &StateVec) -> [f64; 4] {
    let (s, c) = alfven_angle().sin_cos();
    let v = [u[1] / u[0], u[2] / u[0], u[3] / u[0]];
    [-s * v[0] + c * v[1], v[2], -s * u[5] + c * u[6], u[7]]
}

/// Per-cell errors averaged over components, summed (L1) or maximized
/// (L-infinity) over cells, with 3x3 Gauss quadrature. Only the Alfvén case
/// has an exact solution.
pub fn compute_errors(field: &DGField, cfg: &RunConfig, t: f64) -> Result<ErrorReport> {
    if cfg.case != Case::Alfven {
        return Err(Error::Unsupported(format!(
            "no exact solution for case '{}'",
            cfg.case.name()
        )));
    }
    let tab = &*TABLES;
    let geom = field.geometry();
    let area = field.dx() * field.dx() / 4.0;
    let mut report = ErrorReport::default();
    for c in 0..field.n_cells() {
        let mut l1 = [0.0; 4];
        let mut linf = [0.0f64; 4];
        for q in 0..9 {
            let (xi, eta) = tab.vol_pts[q];
            let (x, y) = geom.physical(c, xi, eta);
            let num = wave_components(&eval_state(field.cell(c), &tab.vol_phi[q]));
            let ex = wave_components(&alfven_exact(x, y, t, cfg.gamma));
            for k in 0..4 {
                let e = (num[k] - ex[k]).abs();
                l1[k] += tab.vol_w[q] * area * e;
                linf[k] = linf[k].max(e);
            }
        }
        report.err1 += 0.25 * l1.iter().sum::<f64>();
        report.errinf = report.errinf.max(0.25 * linf.iter().sum::<f64>());
    }
    Ok(report)
}
