//! Closed-form Euclidean projection onto the Euler-like slice
//!
//! ```text
//! F_beta = { (rho, m, E) : rho >= eps,  E - |m|^2/(2 rho) >= eps + beta/2 }.
//! ```
//!
//! Stationarity forces the projected momentum to be a non-negative multiple
//! of the input momentum, so the problem is solved for the scalar `t = |m|`
//! against `s = |v|` and rotated back at the end. The candidate set is the
//! usual one from the KKT case analysis (density bound active, energy bound
//! active, both, or neither with zero momentum); the closest feasible
//! candidate is the projection.

use crate::error::{Error, Result};
use crate::mhd_state::{norm2, Vec3};

/// Point `(u, v, w)` to be projected; `v` is the momentum coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidPoint {
    pub u: f64,
    pub v: Vec3,
    pub w: f64,
}

impl FluidPoint {
    pub fn new(u: f64, v: &[f64], w: f64) -> Self {
        let mut vv = [0.0; 3];
        vv[..v.len()].copy_from_slice(v);
        Self { u, v: vv, w }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidProjection {
    pub rho: f64,
    pub m: Vec3,
    pub e: f64,
    /// Squared distance between the projection and the input point.
    pub dist2: f64,
}

/// Real roots of `t^3 + p t + q = 0` (one or three of them).
#[derive(Clone, Copy, Debug)]
pub struct CubicRoots {
    vals: [f64; 3],
    len: usize,
}

impl CubicRoots {
    pub fn as_slice(&self) -> &[f64] {
        &self.vals[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[inline]
fn cubic_eval(t: f64, p: f64, q: f64) -> f64 {
    (t * t + p) * t + q
}

fn polish(mut t: f64, p: f64, q: f64) -> f64 {
    let mut ft = cubic_eval(t, p, q);
    for _ in 0..3 {
        if ft == 0.0 {
            break;
        }
        let dft = 3.0 * t * t + p;
        if dft == 0.0 {
            break;
        }
        let cand = t - ft / dft;
        let fc = cubic_eval(cand, p, q);
        if fc.abs() < ft.abs() {
            t = cand;
            ft = fc;
        } else {
            break;
        }
    }
    t
}

/// All real roots of the depressed cubic `t^3 + p t + q`, using real arithmetic
/// only: Cardano when the discriminant gives a single real root, the
/// trigonometric form when there are three.
pub fn cubic_real_roots(p: f64, q: f64) -> CubicRoots {
    let mut out = CubicRoots {
        vals: [0.0; 3],
        len: 0,
    };
    if p == 0.0 && q == 0.0 {
        out.len = 1;
        return out;
    }
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    if disc > 0.0 {
        let sq = disc.sqrt();
        // pick the sign that avoids cancellation
        let a = if q >= 0.0 {
            -(half_q + sq).cbrt()
        } else {
            (-half_q + sq).cbrt()
        };
        let b = if a != 0.0 { -third_p / a } else { 0.0 };
        out.vals[0] = polish(a + b, p, q);
        out.len = 1;
    } else {
        // three real roots (p < 0 here)
        let r = 2.0 * (-third_p).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos();
        let two_pi = 2.0 * std::f64::consts::PI;
        for k in 0..3 {
            let t = r * ((phi - two_pi * k as f64) / 3.0).cos();
            out.vals[k] = polish(t, p, q);
        }
        out.len = 3;
    }
    out
}

#[derive(Clone, Copy)]
struct Candidate {
    d2: f64,
    rho: f64,
    t: f64,
    e: f64,
}

struct Best(Option<Candidate>);

impl Best {
    #[inline]
    fn offer(&mut self, pt: (f64, f64, f64), rho: f64, t: f64, e: f64) {
        let (u, s, w) = pt;
        let d2 = (rho - u) * (rho - u) + (t - s) * (t - s) + (e - w) * (e - w);
        if !d2.is_finite() {
            return;
        }
        match self.0 {
            Some(c) if c.d2 <= d2 => {}
            _ => {
                self.0 = Some(Candidate { d2, rho, t, e });
            }
        }
    }
}

/// Projects `pt` onto `F_beta` for tolerance `eps`.
///
/// Inputs already in the set are returned unchanged with `dist2 = 0`.
pub fn project_slice(pt: &FluidPoint, eps: f64, beta: f64) -> Result<FluidProjection> {
    if !(eps > 0.0) || !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "slice projection needs eps > 0 and beta >= 0 (eps = {eps}, beta = {beta})"
        )));
    }
    let (u, w) = (pt.u, pt.w);
    if !(u.is_finite() && w.is_finite() && pt.v.iter().all(|x| x.is_finite())) {
        return Err(Error::InvalidInput("non-finite point".into()));
    }
    let k = eps + 0.5 * beta;
    let s2 = norm2(&pt.v);
    let s = s2.sqrt();

    if u >= eps && w - 0.5 * s2 / u >= k {
        return Ok(FluidProjection {
            rho: u,
            m: pt.v,
            e: w,
            dist2: 0.0,
        });
    }

    let key = (u, s, w);
    let mut best = Best(None);

    // density bound active, energy bound inactive
    if u < eps && w - 0.5 * s2 / eps >= k {
        best.offer(key, eps, s, w);
    }
    // both bounds active, zero momentum
    if u < eps && s == 0.0 && w < k {
        best.offer(key, eps, 0.0, k);
    }
    // both bounds active, nonzero momentum
    if s != 0.0 {
        let p = 2.0 * eps * (eps + k - w);
        let q = -2.0 * eps * eps * s;
        for &t in cubic_real_roots(p, q).as_slice() {
            if t != 0.0 && s / t > 1.0 && 2.0 * eps * u + t * (s - t) < 2.0 * eps * eps {
                best.offer(key, eps, t, 0.5 * t * t / eps + k);
            }
        }
    }
    // energy bound active, zero momentum
    if u >= eps && s == 0.0 && w < k {
        best.offer(key, u, 0.0, k);
    }
    // energy bound active only
    let g = k + u - w;
    let big_s = 2.0 * s2 + g * g;
    if big_s > 0.0 {
        let disc = u * u * big_s - 2.0 * u * s2 * (w - k) + s2 * s2;
        if disc >= 0.0 {
            let half_r = 0.5 * (disc / big_s).sqrt();
            for rho in [0.5 * u + half_r, 0.5 * u - half_r] {
                if !(rho >= eps) {
                    continue;
                }
                let inner = -8.0 * rho * rho + 8.0 * u * rho + s2;
                if inner < 0.0 {
                    continue;
                }
                let root = 0.5 * inner.sqrt();
                for t in [0.5 * s - root, 0.5 * s + root] {
                    let e = k + 0.5 * t * t / rho;
                    // the multiplier e - w can be far below the rounding
                    // error of e when the energies are large
                    let slack = 64.0 * f64::EPSILON * (w.abs() + e.abs());
                    if e > w - slack {
                        best.offer(key, rho, t, e.max(w));
                    }
                }
            }
        }
    }

    let c = best.0.ok_or_else(|| {
        Error::Internal(format!(
            "no feasible projection candidate for (u={u:e}, |v|={s:e}, w={w:e}), eps={eps:e}, beta={beta:e}"
        ))
    })?;

    let scale = if s > 0.0 { c.t / s } else { 0.0 };
    let m = [pt.v[0] * scale, pt.v[1] * scale, pt.v[2] * scale];
    let e = raise_to_bound(c.rho, &m, c.e, k);
    let dist2 = (c.rho - u).powi(2)
        + (m[0] - pt.v[0]).powi(2)
        + (m[1] - pt.v[1]).powi(2)
        + (m[2] - pt.v[2]).powi(2)
        + (e - w).powi(2);
    Ok(FluidProjection {
        rho: c.rho,
        m,
        e,
        dist2,
    })
}

/// Raises `e` by the rounding-level deficit, if any, so that
/// `e - |m|^2/(2 rho) >= bound` holds in floating point.
pub(crate) fn raise_to_bound(rho: f64, m: &Vec3, mut e: f64, bound: f64) -> f64 {
    let kin = 0.5 * norm2(m) / rho;
    for _ in 0..8 {
        let deficit = bound - (e - kin);
        if deficit <= 0.0 {
            break;
        }
        e += deficit.max(f64::EPSILON * e.abs());
    }
    e
}
