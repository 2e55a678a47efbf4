//! Independent reference solvers shared by the integration tests. Nothing in
//! here calls Brent, the Davis–Yin iteration or the closed-form candidate
//! enumeration, except where noted.

#![allow(dead_code)]

use mhd_idp::euler_projection::{project_slice, FluidPoint};
use mhd_idp::mhd_state::{is_admissible, ConservedState};
use mhd_idp::slicing::MhdPoint;
use rand::Rng;

pub fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..iters {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Squared distance from `pt` to the slice `F_beta`, by nested golden-section
/// search over density and momentum magnitude with the optimal energy.
pub fn fluid_oracle_dist2(pt: &FluidPoint, eps: f64, beta: f64) -> f64 {
    let k = eps + 0.5 * beta;
    let s = (pt.v[0] * pt.v[0] + pt.v[1] * pt.v[1] + pt.v[2] * pt.v[2]).sqrt();
    let g = |rho: f64, t: f64| {
        let e = pt.w.max(k + 0.5 * t * t / rho);
        (rho - pt.u).powi(2) + (t - s).powi(2) + (e - pt.w).powi(2)
    };
    let r0 = pt.u.max(eps);
    let d0 = g(r0, s);
    if d0 == 0.0 {
        return 0.0;
    }
    let inner = |rho: f64| golden(|t| g(rho, t), 0.0, s, 120).1;
    golden(inner, r0, r0 + d0.sqrt(), 120).1.min(d0)
}

/// Random feasible points of `F_beta` near `pt`, to check that none is closer.
pub fn fluid_cloud_min_dist2<R: Rng>(
    pt: &FluidPoint,
    eps: f64,
    beta: f64,
    center: (f64, [f64; 3], f64),
    radius: f64,
    n: usize,
    rng: &mut R,
) -> f64 {
    let k = eps + 0.5 * beta;
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let rho = (center.0 + radius * rng.gen_range(-1.0..1.0)).max(eps);
        let m = [
            center.1[0] + radius * rng.gen_range(-1.0..1.0),
            center.1[1] + radius * rng.gen_range(-1.0..1.0),
            center.1[2] + radius * rng.gen_range(-1.0..1.0),
        ];
        let m2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
        let e = (center.2 + radius * rng.gen_range(-1.0..1.0)).max(k + 0.5 * m2 / rho);
        let d = (rho - pt.u).powi(2)
            + (m[0] - pt.v[0]).powi(2)
            + (m[1] - pt.v[1]).powi(2)
            + (m[2] - pt.v[2]).powi(2)
            + (e - pt.w).powi(2);
        best = best.min(d);
    }
    best
}

/// Minimum of `d2(beta)` over `[0, |z|^2]` by uniform grid search followed by
/// repeated zooming around the grid minimizer. Each `d2` evaluation uses the
/// slice projection; Brent is not involved.
pub fn beta_grid_oracle(pt: &MhdPoint, eps: f64, points: usize, zooms: usize) -> (f64, f64) {
    let zn = (pt.z[0] * pt.z[0] + pt.z[1] * pt.z[1] + pt.z[2] * pt.z[2]).sqrt();
    let fluid = pt.fluid();
    let d2 = |beta: f64| project_slice(&fluid, eps, beta).unwrap().dist2 + (beta.sqrt() - zn).powi(2);
    let (mut lo, mut hi) = (0.0, zn * zn);
    let mut best = (hi, d2(hi));
    for _ in 0..=zooms {
        let h = (hi - lo) / points as f64;
        let mut arg = lo;
        let mut cur = f64::INFINITY;
        for i in 0..=points {
            let beta = lo + h * i as f64;
            let d = d2(beta);
            if d < cur {
                cur = d;
                arg = beta;
            }
        }
        if cur < best.1 {
            best = (arg, cur);
        }
        lo = (arg - 2.0 * h).max(0.0);
        hi = (arg + 2.0 * h).min(zn * zn);
    }
    best
}

pub fn random_infeasible_point<R: Rng>(rng: &mut R, range: f64) -> MhdPoint {
    loop {
        let s = ConservedState::new(
            rng.gen_range(-range..range),
            &[rng.gen_range(-range..range), rng.gen_range(-range..range), rng.gen_range(-range..range)],
            rng.gen_range(-range..range),
            &[rng.gen_range(-range..range), rng.gen_range(-range..range), rng.gen_range(-range..range)],
        )
        .unwrap();
        if !is_admissible(&s, 1e-6) {
            return MhdPoint::from(s);
        }
    }
}

pub fn random_admissible_state<R: Rng>(rng: &mut R, eps: f64) -> ConservedState {
    let rho = rng.gen_range(0.05..3.0);
    let u = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
    let b = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
    let p = rng.gen_range(0.01..2.0);
    let s = ConservedState::from_primitive(rho, &u, p, &b, 5.0 / 3.0).unwrap();
    assert!(is_admissible(&s, eps));
    s
}

/// Projection onto `G^eps` by bisection on the derivative of `d2`. By the
/// envelope theorem `f'(beta) = E(beta) - w`, so
/// `d2'(beta) = E(beta) - w + 1 - |z| / sqrt(beta)`, which is increasing.
pub fn bisection_project(pt: &MhdPoint, eps: f64) -> ConservedState {
    let s = pt.as_state();
    if is_admissible(&s, eps) {
        return s;
    }
    let fluid = pt.fluid();
    let zn = (pt.z[0] * pt.z[0] + pt.z[1] * pt.z[1] + pt.z[2] * pt.z[2]).sqrt();
    let beta = if zn == 0.0 {
        0.0
    } else {
        let slope = |b: f64| project_slice(&fluid, eps, b).unwrap().e - pt.w + 1.0 - zn / b.sqrt();
        let (mut lo, mut hi) = (0.0, zn * zn);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let p = project_slice(&fluid, eps, beta).unwrap();
    let scale = if zn == 0.0 { 0.0 } else { beta.sqrt() / zn };
    ConservedState::from_parts(p.rho, p.m, p.e, [pt.z[0] * scale, pt.z[1] * scale, pt.z[2] * scale])
}
