//! Per-cell limiters: TVB slope limiting, Zhang–Shu positivity scaling and the
//! local divergence-free projection of the in-plane magnetic field.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mhd_state::is_admissible;

use super::basis::{eval, Face, NMODES, TABLES};
use super::boundary::BoundarySpec;
use super::physics::{unpack, StateVec, NVARS};
use super::{cell_average, eval_state, DGField, CELL_LEN};

const S3: f64 = 1.732_050_807_568_877_2;
const S5: f64 = 2.236_067_977_499_79;

fn minmod(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

fn minmod_tvb(a: f64, b: f64, c: f64, threshold: f64) -> f64 {
    if a.abs() <= threshold {
        a
    } else {
        minmod(a, b, c)
    }
}

/// Averages of the four neighbours (left, right, bottom, top), with ghost
/// averages on non-periodic sides.
fn neighbour_averages(field: &DGField, bc: &BoundarySpec) -> Vec<[StateVec; 4]> {
    let (nx, ny) = (field.nx(), field.ny());
    let geom = field.geometry();
    (0..field.n_cells())
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let own = field.average(c);
            let y = geom.center(c).1;
            let pick = |side: Face, inside: bool, wrap: usize| {
                if inside || bc.kind(side) == super::boundary::Boundary::Periodic {
                    field.average(wrap)
                } else {
                    bc.ghost(side, &own, y)
                }
            };
            [
                pick(Face::Left, i > 0, j * nx + (i + nx - 1) % nx),
                pick(Face::Right, i + 1 < nx, j * nx + (i + 1) % nx),
                pick(Face::Bottom, j > 0, ((j + ny - 1) % ny) * nx + i),
                pick(Face::Top, j + 1 < ny, ((j + 1) % ny) * nx + i),
            ]
        })
        .collect()
}

/// Component-wise TVB limiter with threshold `m * dx^2`.
///
/// For each variable, the face-mean deviations from the cell average are
/// checked against the neighbouring average differences with the modified
/// minmod function. If any of them is modified, the variable is reduced to a
/// linear polynomial with minmod-limited slopes. Cell averages are never
/// touched. Returns the number of (cell, variable) pairs limited.
pub fn tvb_limit(field: &mut DGField, m: f64, bc: &BoundarySpec) -> usize {
    let nb = neighbour_averages(field, bc);
    let threshold = m * field.dx() * field.dx();
    field
        .coeffs_mut()
        .par_chunks_mut(CELL_LEN)
        .zip(nb.par_iter())
        .map(|(cell, nb)| {
            let mut limited = 0;
            for v in 0..NVARS {
                let c = &mut cell[v * NMODES..(v + 1) * NMODES];
                let avg = c[0];
                let (dxm, dxp) = (avg - nb[0][v], nb[1][v] - avg);
                let (dym, dyp) = (avg - nb[2][v], nb[3][v] - avg);
                let right = S3 * c[1] + S5 * c[3];
                let left = S3 * c[1] - S5 * c[3];
                let top = S3 * c[2] + S5 * c[5];
                let bottom = S3 * c[2] - S5 * c[5];
                let changed = minmod_tvb(right, dxp, dxm, threshold) != right
                    || minmod_tvb(left, dxp, dxm, threshold) != left
                    || minmod_tvb(top, dyp, dym, threshold) != top
                    || minmod_tvb(bottom, dyp, dym, threshold) != bottom;
                if changed {
                    c[1] = minmod(S3 * c[1], dxp, dxm) / S3;
                    c[2] = minmod(S3 * c[2], dyp, dym) / S3;
                    c[3] = 0.0;
                    c[4] = 0.0;
                    c[5] = 0.0;
                    limited += 1;
                }
            }
            limited
        })
        .sum()
}

fn admissible(u: &StateVec, eps: f64) -> bool {
    is_admissible(&unpack(u), eps)
}

fn scale_modes(cell: &mut [f64], vars: std::ops::Range<usize>, theta: f64) {
    for v in vars {
        for k in 1..NMODES {
            cell[v * NMODES + k] *= theta;
        }
    }
}

/// Largest `t` in `[0, 1]` with `avg + t (u - avg)` admissible, by bisection.
fn segment_limit(avg: &StateVec, u: &StateVec, eps: f64) -> f64 {
    let at = |t: f64| -> StateVec { std::array::from_fn(|k| avg[k] + t * (u[k] - avg[k])) };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if admissible(&at(mid), eps) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Zhang–Shu scaling of one cell. Returns whether the cell was modified.
fn zhang_shu_cell(cell: &mut [f64], eps: f64) -> std::result::Result<bool, StateVec> {
    let t = &*TABLES;
    let avg = cell_average(cell);
    if !admissible(&avg, eps) {
        return Err(avg);
    }
    let pts_ok = |cell: &[f64]| t.limiter_phi.iter().all(|p| admissible(&eval_state(cell, p), eps));
    if pts_ok(cell) {
        return Ok(false);
    }

    let rho_min = t
        .limiter_phi
        .iter()
        .map(|p| eval(&cell[..NMODES], p))
        .fold(f64::INFINITY, f64::min);
    if rho_min < eps {
        let theta = ((avg[0] - eps) / (avg[0] - rho_min)).clamp(0.0, 1.0);
        scale_modes(cell, 0..1, theta);
    }

    let mut theta = 1.0f64;
    for p in &t.limiter_phi {
        let u = eval_state(cell, p);
        if !admissible(&u, eps) {
            theta = theta.min(segment_limit(&avg, &u, eps));
        }
    }
    scale_modes(cell, 0..NVARS, theta);

    // Roundoff in the rescaled coefficients can leave a point a few ulps out.
    let mut shrink = 1.0 - 1e-12;
    while !pts_ok(cell) {
        if shrink < 1e-3 {
            scale_modes(cell, 0..NVARS, 0.0);
            break;
        }
        scale_modes(cell, 0..NVARS, shrink);
        shrink *= shrink;
    }
    Ok(true)
}

/// Scales each cell's polynomial towards its average until every limiter
/// point lies in `G^eps`. Cell averages must already be admissible. Returns
/// the number of cells modified.
pub fn zhang_shu_limit(field: &mut DGField, eps: f64) -> Result<usize> {
    let geom = field.geometry();
    let outcome: Vec<std::result::Result<bool, (usize, StateVec)>> = field
        .coeffs_mut()
        .par_chunks_mut(CELL_LEN)
        .enumerate()
        .map(|(c, cell)| zhang_shu_cell(cell, eps).map_err(|a| (c, a)))
        .collect();
    let mut count = 0;
    for o in outcome {
        match o {
            Ok(changed) => count += changed as usize,
            Err((c, a)) => {
                let (x, y) = geom.center(c);
                return Err(Error::Domain(format!(
                    "cell {c} at ({x:.4}, {y:.4}) has inadmissible average {a:?}"
                )));
            }
        }
    }
    Ok(count)
}

/// Constraints `d . (B1 coeffs, B2 coeffs) = 0` spanning the divergence of a
/// P2 field: its constant, `xi` and `eta` parts. Each touches two
/// coefficients, and no coefficient appears twice.
const DIV_CONSTRAINTS: [((usize, f64), (usize, f64)); 3] = [
    ((1, 1.0), (2, 1.0)),
    ((3, S5), (4, 1.0)),
    ((4, 1.0), (5, S5)),
];

/// L2 projection of `(B1, B2)` onto the polynomials with zero divergence
/// inside each cell. `B3` and all cell averages are unchanged.
pub fn divfree_project(field: &mut DGField) {
    field.coeffs_mut().par_chunks_mut(CELL_LEN).for_each(|cell| {
        let (b1, b2) = (5 * NMODES, 6 * NMODES);
        for &((ka, wa), (kb, wb)) in &DIV_CONSTRAINTS {
            let dot = wa * cell[b1 + ka] + wb * cell[b2 + kb];
            let s = dot / (wa * wa + wb * wb);
            cell[b1 + ka] -= s * wa;
            cell[b2 + kb] -= s * wb;
        }
    });
}
