//! Ideal MHD fluxes in conserved variables `(rho, m, E, B)` and the local
//! Lax–Friedrichs numerical flux.

use crate::error::{Error, Result};
use crate::mhd_state::{dot, fast_speed_raw, ConservedState, GasParams, Vec3};

pub const NVARS: usize = 8;

/// One state packed as `[rho, m1, m2, m3, E, B1, B2, B3]`.
pub type StateVec = [f64; NVARS];

pub fn pack(s: &ConservedState) -> StateVec {
    [s.rho, s.m[0], s.m[1], s.m[2], s.e, s.b[0], s.b[1], s.b[2]]
}

pub fn unpack(u: &StateVec) -> ConservedState {
    ConservedState::from_parts(u[0], [u[1], u[2], u[3]], u[4], [u[5], u[6], u[7]])
}

#[inline]
pub fn pressure(u: &StateVec, gamma: f64) -> f64 {
    let m2 = u[1] * u[1] + u[2] * u[2] + u[3] * u[3];
    let b2 = u[5] * u[5] + u[6] * u[6] + u[7] * u[7];
    (gamma - 1.0) * (u[4] - 0.5 * m2 / u[0] - 0.5 * b2)
}

/// `F(U) . n`. Defined for any state with nonzero density.
pub fn normal_flux(u: &StateVec, n: &Vec3, gamma: f64) -> StateVec {
    let rho = u[0];
    let m = [u[1], u[2], u[3]];
    let b = [u[5], u[6], u[7]];
    let v = [m[0] / rho, m[1] / rho, m[2] / rho];
    let vn = dot(&v, n);
    let bn = dot(&b, n);
    let pt = pressure(u, gamma) + 0.5 * dot(&b, &b);
    let vb = dot(&v, &b);
    [
        rho * vn,
        m[0] * vn + pt * n[0] - b[0] * bn,
        m[1] * vn + pt * n[1] - b[1] * bn,
        m[2] * vn + pt * n[2] - b[2] * bn,
        (u[4] + pt) * vn - bn * vb,
        b[0] * vn - v[0] * bn,
        b[1] * vn - v[1] * bn,
        b[2] * vn - v[2] * bn,
    ]
}

/// `(F_x(U), F_y(U))`, the fluxes needed for the volume integral.
pub fn xy_flux(u: &StateVec, gamma: f64) -> (StateVec, StateVec) {
    (
        normal_flux(u, &[1.0, 0.0, 0.0], gamma),
        normal_flux(u, &[0.0, 1.0, 0.0], gamma),
    )
}

/// `|u . n| + c_f`; errors unless density and pressure are positive.
pub fn wave_speed(u: &StateVec, n: &Vec3, gamma: f64) -> Result<f64> {
    let rho = u[0];
    let p = pressure(u, gamma);
    if !(rho > 0.0) || !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "wave speed needs positive density and pressure, got rho = {rho:e}, p = {p:e}"
        )));
    }
    let b = [u[5], u[6], u[7]];
    let vn = (u[1] * n[0] + u[2] * n[1] + u[3] * n[2]) / rho;
    Ok(vn.abs() + fast_speed_raw(rho, p, &b, n, gamma))
}

/// LLF flux for a given dissipation coefficient.
#[inline]
pub fn llf_with_alpha(um: &StateVec, up: &StateVec, n: &Vec3, alpha: f64, gamma: f64) -> StateVec {
    let fm = normal_flux(um, n, gamma);
    let fp = normal_flux(up, n, gamma);
    let mut out = [0.0; NVARS];
    for k in 0..NVARS {
        out[k] = 0.5 * (fm[k] + fp[k]) - 0.5 * alpha * (up[k] - um[k]);
    }
    out
}

/// `(F(U-) + F(U+))/2 . n - alpha/2 (U+ - U-)` with `alpha` the larger of
/// `|u . n| + c_f` over the two traces.
pub fn llf_flux(
    um: &ConservedState,
    up: &ConservedState,
    normal: &Vec3,
    p: &GasParams,
) -> Result<StateVec> {
    let (a, b) = (pack(um), pack(up));
    let alpha = wave_speed(&a, normal, p.gamma)?.max(wave_speed(&b, normal, p.gamma)?);
    Ok(llf_with_alpha(&a, &b, normal, alpha, p.gamma))
}
