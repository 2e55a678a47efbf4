//! Projection onto the MHD admissible set `G^eps` by slicing.
//!
//! Fixing the magnetic energy `beta = |B|^2` splits the problem into a
//! magnetic part with the closed-form minimizer `sqrt(beta) z/|z|` and a
//! fluid part, the projection onto the Euler-like slice `F_beta`. What is left
//! is the scalar function
//!
//! ```text
//! d2(beta) = f(beta) + h(beta),   f(beta) = dist((u, v, w), F_beta)^2,
//!                                 h(beta) = (sqrt(beta) - |z|)^2,
//! ```
//!
//! which is strictly convex and continuous. Its minimizer lies in
//! `[beta_low, |z|^2]` with
//! `beta_low = (|z| / (1 + sqrt(f(0)) + |z|^2/2))^2`, and is found with Brent.

use crate::brent::{self, BrentConfig};
use crate::error::{Error, Result};
use crate::euler_projection::{project_slice, FluidPoint, FluidProjection};
use crate::mhd_state::{admissibility_violation, is_admissible, norm2, ConservedState, Vec3};

/// Below this `|z|` the magnetic part of the input is treated as zero.
pub const ZERO_FIELD_NORM: f64 = 1e-300;

/// The point `(u, v, w, z)` to project, in conserved-variable order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MhdPoint {
    pub u: f64,
    pub v: Vec3,
    pub w: f64,
    pub z: Vec3,
    dim: usize,
}

impl MhdPoint {
    pub fn new(u: f64, v: &[f64], w: f64, z: &[f64]) -> Result<Self> {
        let s = ConservedState::new(u, v, w, z)?;
        Ok(Self::from(s))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fluid(&self) -> FluidPoint {
        FluidPoint {
            u: self.u,
            v: self.v,
            w: self.w,
        }
    }

    pub fn as_state(&self) -> ConservedState {
        ConservedState::from_parts_dim(self.u, self.v, self.w, self.z, self.dim)
    }
}

impl From<ConservedState> for MhdPoint {
    fn from(s: ConservedState) -> Self {
        Self {
            u: s.rho,
            v: s.m,
            w: s.e,
            z: s.b,
            dim: s.dim(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicingResult {
    pub state: ConservedState,
    /// Magnetic energy of the projection.
    pub beta_star: f64,
    /// Search interval `[beta_low, beta_high]`; `None` when no search ran
    /// (admissible input or zero field).
    pub interval: Option<(f64, f64)>,
    /// Number of slice projections evaluated.
    pub n_slice_calls: usize,
    pub dist2: f64,
    /// False if Brent stopped on its iteration cap.
    pub converged: bool,
}

/// `(f(beta), h(beta))` for a point; `f` comes from the slice projection.
pub fn slice_terms(pt: &MhdPoint, eps: f64, beta: f64) -> Result<(f64, f64)> {
    let f = project_slice(&pt.fluid(), eps, beta)?.dist2;
    let h = (beta.sqrt() - norm2(&pt.z).sqrt()).powi(2);
    Ok((f, h))
}

/// Squared distance from `pt` to the `beta` slice of `G^eps`.
pub fn eval_d2(pt: &MhdPoint, eps: f64, beta: f64) -> Result<f64> {
    let (f, h) = slice_terms(pt, eps, beta)?;
    Ok(f + h)
}

/// Lower end of the search interval given `f(0)` and `|z|`.
pub fn beta_lower_bound(f0: f64, z_norm: f64) -> f64 {
    let r = z_norm / (1.0 + f0.sqrt() + 0.5 * z_norm * z_norm);
    r * r
}

/// Euclidean projection of `pt` onto `G^eps`.
pub fn project_admissible(pt: &MhdPoint, eps: f64, cfg: &BrentConfig) -> Result<SlicingResult> {
    let input = pt.as_state();
    if is_admissible(&input, eps) {
        return Ok(SlicingResult {
            state: input,
            beta_star: norm2(&pt.z),
            interval: None,
            n_slice_calls: 0,
            dist2: 0.0,
            converged: true,
        });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }

    let fluid = pt.fluid();
    let f0 = project_slice(&fluid, eps, 0.0)?;
    let z2 = norm2(&pt.z);
    let zn = z2.sqrt();

    if zn <= ZERO_FIELD_NORM {
        let state = assemble(pt, &f0, eps, 0.0)?;
        return Ok(finish(pt, state, 0.0, None, 1, true));
    }

    let hi = z2;
    let lo = beta_lower_bound(f0.dist2, zn).clamp(0.0, hi);

    let mut calls = 1usize;
    let mut failure: Option<Error> = None;
    let mut best: Option<(f64, f64, FluidProjection)> = None;
    let mut objective = |beta: f64| -> f64 {
        calls += 1;
        match project_slice(&fluid, eps, beta) {
            Ok(proj) => {
                let d2 = proj.dist2 + (beta.sqrt() - zn).powi(2);
                if best.is_none_or(|(_, bd, _)| d2 <= bd) {
                    best = Some((beta, d2, proj));
                }
                d2
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        }
    };

    let (beta_star, converged) = if lo < hi {
        let r = brent::minimize(&mut objective, lo, hi, cfg)?;
        (r.x_min, r.converged)
    } else {
        objective(hi);
        (hi, true)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let proj = match best {
        Some((b, _, p)) if b == beta_star => p,
        _ => {
            calls += 1;
            project_slice(&fluid, eps, beta_star)?
        }
    };
    let (beta_star, proj) = polish(&fluid, eps, pt.w, zn, (beta_star, proj), (lo, hi), &mut calls)?;
    let scale = beta_star.sqrt() / zn;
    let state = assemble(pt, &proj, eps, scale)?;
    Ok(finish(pt, state, beta_star, Some((lo, hi)), calls, converged))
}

/// Refines Brent's minimizer by an Illinois search for the root of
/// `d2'(beta) = E(beta) - w + 1 - |z| / sqrt(beta)`. A flat minimum pins
/// `beta` down only to about the square root of machine precision by values
/// alone, which is too coarse for the splitting iteration built on top.
fn polish(
    fluid: &FluidPoint,
    eps: f64,
    w: f64,
    zn: f64,
    start: (f64, FluidProjection),
    (lo, hi): (f64, f64),
    calls: &mut usize,
) -> Result<(f64, FluidProjection)> {
    let d2 = |b: f64, p: &FluidProjection| p.dist2 + (b.sqrt() - zn).powi(2);
    let slope = |b: f64, p: &FluidProjection| p.e - w + 1.0 - zn / b.sqrt();
    // roundoff level of the slope; below it the sign carries no information
    let noise = |b: f64, p: &FluidProjection| 8.0 * f64::EPSILON * (p.e.abs() + w.abs() + 1.0 + zn / b.sqrt());
    let mut eval = |b: f64| -> Result<(f64, FluidProjection)> {
        *calls += 1;
        let p = project_slice(fluid, eps, b)?;
        Ok((slope(b, &p), p))
    };
    let (b0, p0) = start;
    let g0 = slope(b0, &p0);
    if !g0.is_finite() || g0.abs() <= noise(b0, &p0) {
        return Ok((b0, p0));
    }

    // bracket the root, expanding away from b0
    let dir = if g0 < 0.0 { 1.0 } else { -1.0 };
    let mut step = 1e-7 * b0.max(hi * 1e-12);
    let (mut a, mut ga) = (b0, g0);
    let (mut b, mut gb, mut pb);
    loop {
        b = (a + dir * step).clamp(lo, hi);
        (gb, pb) = eval(b)?;
        if gb.abs() <= noise(b, &pb) {
            return Ok(if d2(b, &pb) <= d2(b0, &p0) { (b, pb) } else { (b0, p0) });
        }
        if gb.signum() != ga.signum() {
            break;
        }
        if b == lo || b == hi {
            // derivative keeps its sign up to the end of the interval
            return Ok(if d2(b, &pb) <= d2(b0, &p0) { (b, pb) } else { (b0, p0) });
        }
        (a, ga) = (b, gb);
        step *= 8.0;
    }

    let mut best = (b, pb);
    let mut best_g = gb.abs();
    for _ in 0..60 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let (gc, pc) = eval(c)?;
        if gc.abs() < best_g {
            best_g = gc.abs();
            best = (c, pc);
        }
        if gc.abs() <= noise(c, &pc) {
            break;
        }
        if gc.signum() != gb.signum() {
            (a, ga) = (b, gb);
        } else {
            ga *= 0.5;
        }
        (b, gb) = (c, gc);
    }
    let (b1, p1) = best;
    Ok(if d2(b1, &p1) <= d2(b0, &p0) * (1.0 + 1e-14) { (b1, p1) } else { (b0, p0) })
}

fn assemble(pt: &MhdPoint, proj: &FluidProjection, eps: f64, scale: f64) -> Result<ConservedState> {
    let b = [pt.z[0] * scale, pt.z[1] * scale, pt.z[2] * scale];
    let mut s = ConservedState::from_parts_dim(proj.rho, proj.m, proj.e, b, pt.dim);
    let deficit = admissibility_violation(&s, eps);
    if deficit > 1e-10 * (1.0 + s.e.abs()) {
        return Err(Error::Internal(format!(
            "assembled projection misses the admissible set by {deficit:e}"
        )));
    }
    // |B|^2 of sqrt(beta) z/|z| can exceed beta by a few ulps
    raise_energy(&mut s, eps);
    Ok(s)
}

/// Adds the rounding-level energy deficit so that `is_admissible` holds
/// exactly in floating point. Only meant for states that miss by roundoff.
pub(crate) fn raise_energy(s: &mut ConservedState, eps: f64) {
    for _ in 0..8 {
        let deficit = eps - s.internal_energy_unchecked();
        if deficit <= 0.0 {
            return;
        }
        s.e += deficit.max(f64::EPSILON * s.e.abs());
    }
}

fn finish(
    pt: &MhdPoint,
    state: ConservedState,
    beta_star: f64,
    interval: Option<(f64, f64)>,
    n_slice_calls: usize,
    converged: bool,
) -> SlicingResult {
    let dist2 = distance2(pt, &state);
    SlicingResult {
        state,
        beta_star,
        interval,
        n_slice_calls,
        dist2,
        converged,
    }
}

/// Squared Euclidean distance between a point and a state.
pub fn distance2(pt: &MhdPoint, s: &ConservedState) -> f64 {
    let mut d = (s.rho - pt.u).powi(2) + (s.e - pt.w).powi(2);
    for k in 0..3 {
        d += (s.m[k] - pt.v[k]).powi(2) + (s.b[k] - pt.z[k]).powi(2);
    }
    d
}

/// Residuals of the optimality conditions for a claimed projection `s` of
/// `pt`, with multipliers recovered from the state:
/// `mu = E - w` and `lambda = rho - u - mu |m|^2/(2 rho^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktResidual {
    pub stationarity: f64,
    /// Magnitude of any negative multiplier.
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.dual).max(self.complementarity)
    }
}

/// KKT residuals, scaled by `1 + max |pt_i|`.
pub fn kkt_residual(pt: &MhdPoint, s: &ConservedState, eps: f64) -> KktResidual {
    let scale = 1.0
        + pt.u
            .abs()
            .max(pt.w.abs())
            .max(pt.v.iter().chain(pt.z.iter()).fold(0.0_f64, |a, x| a.max(x.abs())));
    let mu = s.e - pt.w;
    let m2 = norm2(&s.m);
    let lambda = s.rho - pt.u - mu * m2 / (2.0 * s.rho * s.rho);
    let mut stat = 0.0_f64;
    for k in 0..3 {
        stat = stat.max((s.m[k] - pt.v[k] + mu * s.m[k] / s.rho).abs());
        stat = stat.max((s.b[k] - pt.z[k] + mu * s.b[k]).abs());
    }
    let dual = (-mu).max(0.0).max((-lambda).max(0.0));
    let comp = (lambda * (eps - s.rho))
        .abs()
        .max((mu * (eps - s.internal_energy_unchecked())).abs());
    KktResidual {
        stationarity: stat / scale,
        dual: dual / scale,
        complementarity: comp / (scale * scale),
    }
}
