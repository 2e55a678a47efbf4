//! Initial data of the benchmark problems and the exact Alfvén solution.

use std::f64::consts::PI;

use crate::error::Result;

use super::config::{primitive, Case, RunConfig};
use super::physics::StateVec;
use super::DGField;

/// Propagation angle of the Alfvén wave, `atan(1/2)`.
pub fn alfven_angle() -> f64 {
    0.5f64.atan()
}

/// Circularly polarized Alfvén wave at time `t`.
pub fn alfven_exact(x: f64, y: f64, t: f64, gamma: f64) -> StateVec {
    let th = alfven_angle();
    let (s, c) = th.sin_cos();
    let phase = 2.0 * PI * (x * c + y * s - t);
    let perp = 0.1 * phase.sin();
    let z = 0.1 * phase.cos();
    let u = [-perp * s, perp * c, z];
    let b = [c - perp * s, s + perp * c, z];
    primitive(1.0, u, 0.1, b, gamma)
}

pub fn rotor_initial(x: f64, y: f64, gamma: f64) -> StateVec {
    let (r0, r1) = (0.1, 0.115);
    let (dx, dy) = (x - 0.5, y - 0.5);
    let r = (dx * dx + dy * dy).sqrt();
    let (rho, u1, u2) = if r <= r0 {
        (10.0, -dy / r0, dx / r0)
    } else if r <= r1 {
        let lam = (r1 - r) / (r1 - r0);
        (1.0 + 9.0 * lam, -lam * dy / r, lam * dx / r)
    } else {
        (1.0, 0.0, 0.0)
    };
    let b1 = 2.5 / (4.0 * PI).sqrt();
    primitive(rho, [u1, u2, 0.0], 0.5, [b1, 0.0, 0.0], gamma)
}

pub fn orszag_tang_initial(x: f64, y: f64, gamma: f64) -> StateVec {
    primitive(
        gamma * gamma,
        [-y.sin(), x.sin(), 0.0],
        gamma,
        [-y.sin(), (2.0 * x).sin(), 0.0],
        gamma,
    )
}

/// Pointwise initial data for the configured case.
pub fn initial_state(cfg: &RunConfig, x: f64, y: f64) -> StateVec {
    match cfg.case {
        Case::Alfven => alfven_exact(x, y, 0.0, cfg.gamma),
        Case::Rotor => rotor_initial(x, y, cfg.gamma),
        Case::OrszagTang => orszag_tang_initial(x, y, cfg.gamma),
        Case::Jet => cfg.jet_ambient_state(),
    }
}

/// L2 projection of the case's initial data onto the mesh.
pub fn init_case(cfg: &RunConfig) -> Result<DGField> {
    cfg.validate()?;
    let origin = (cfg.domain.0, cfg.domain.2);
    Ok(DGField::project(cfg.nx, cfg.ny, cfg.dx(), origin, |x, y| {
        initial_state(cfg, x, y)
    }))
}
