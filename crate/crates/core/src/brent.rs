//! Brent's derivative-free minimizer for a continuous function on `[a, b]`:
//! golden-section steps safeguarding inverse parabolic interpolation.

use crate::error::{Error, Result};

/// `(3 - sqrt(5)) / 2`
pub const GOLDEN: f64 = 0.381_966_011_250_105_1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrentConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for BrentConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_iters: 200,
        }
    }
}

impl BrentConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iters: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Brent tolerances must be positive (abs {abs_tol}, rel {rel_tol})"
            )));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_iters,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrentResult {
    pub x_min: f64,
    pub f_min: f64,
    /// Number of calls to the objective.
    pub n_evals: usize,
    pub converged: bool,
}

/// Minimizes `f` over `[a, b]`.
///
/// Hitting `max_iters` is not an error: the best point so far is returned
/// with `converged == false`.
pub fn minimize<F>(mut f: F, a: f64, b: f64, cfg: &BrentConfig) -> Result<BrentResult>
where
    F: FnMut(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!(
            "Brent needs a finite interval with a < b, got [{a}, {b}]"
        )));
    }
    let c = GOLDEN;
    let (mut sa, mut sb) = (a, b);
    let mut x = a + c * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut n_evals = 1;
    let mut e: f64 = 0.0;
    let mut d: f64 = 0.0;

    let mut iters = 0;
    loop {
        let m = 0.5 * (sa + sb);
        let tol = cfg.rel_tol * x.abs() + cfg.abs_tol;
        if (x - m).abs() < 2.0 * tol - 0.5 * (sb - sa) {
            return Ok(BrentResult {
                x_min: x,
                f_min: fx,
                n_evals,
                converged: true,
            });
        }
        if iters >= cfg.max_iters {
            return Ok(BrentResult {
                x_min: x,
                f_min: fx,
                n_evals,
                converged: false,
            });
        }
        iters += 1;

        let mut parabolic = false;
        if e.abs() > tol {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let r_e = e;
            e = d;
            if p.abs() < (0.5 * q * r_e).abs() && q * (sa - x) < p && p < q * (sb - x) {
                d = p / q;
                parabolic = true;
            }
        }
        if !parabolic {
            e = if x < m { sb - x } else { sa - x };
            d = c * e;
        }

        let u = if d.abs() >= tol {
            x + d
        } else if d >= 0.0 {
            x + tol
        } else {
            x - tol
        };
        let fu = f(u);
        n_evals += 1;

        if fu <= fx {
            if u < x {
                sb = x;
            } else {
                sa = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                sa = u;
            } else {
                sb = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
}
