//! Conserved MHD states, the ideal-gas equation of state and membership in
//! the numerical admissible set
//!
//! ```text
//! G^eps = { (rho, m, E, B) : rho >= eps,  E - |m|^2/(2 rho) - |B|^2/2 >= eps }
//! ```
//!
//! Vectors are stored as `[f64; 3]`; for dimension `n < 3` the trailing
//! components are kept at zero, so norms and dot products need no special
//! casing.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm2(a: &Vec3) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    norm2(a).sqrt()
}

fn pad(src: &[f64]) -> Vec3 {
    let mut out = [0.0; 3];
    out[..src.len()].copy_from_slice(src);
    out
}

/// Adiabatic index and admissibility tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasParams {
    pub gamma: f64,
    pub eps: f64,
}

impl GasParams {
    pub fn new(gamma: f64, eps: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!("gamma must be > 1, got {gamma}")));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
        }
        Ok(Self { gamma, eps })
    }
}

/// One MHD state `(rho, m, E, B)` in conserved variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub m: Vec3,
    pub e: f64,
    pub b: Vec3,
    dim: usize,
}

impl ConservedState {
    pub fn new(rho: f64, m: &[f64], e: f64, b: &[f64]) -> Result<Self> {
        let dim = m.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidInput(format!(
                "vector dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if b.len() != dim {
            return Err(Error::InvalidInput(format!(
                "momentum has {dim} components but magnetic field has {}",
                b.len()
            )));
        }
        let finite = rho.is_finite()
            && e.is_finite()
            && m.iter().all(|x| x.is_finite())
            && b.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidInput("state has non-finite components".into()));
        }
        Ok(Self {
            rho,
            m: pad(m),
            e,
            b: pad(b),
            dim,
        })
    }

    /// Builds a three-component state without validation. Used on hot paths
    /// where the values come from already-validated arithmetic.
    #[inline]
    pub fn from_parts(rho: f64, m: Vec3, e: f64, b: Vec3) -> Self {
        Self { rho, m, e, b, dim: 3 }
    }

    /// Same as [`ConservedState::from_parts`] but keeps a smaller dimension,
    /// zeroing components beyond it.
    pub fn from_parts_dim(rho: f64, m: Vec3, e: f64, b: Vec3, dim: usize) -> Self {
        let mut s = Self { rho, m, e, b, dim };
        for k in dim..MAX_DIM {
            s.m[k] = 0.0;
            s.b[k] = 0.0;
        }
        s
    }

    /// State from density, velocity, gas pressure and magnetic field.
    pub fn from_primitive(rho: f64, u: &[f64], p: f64, b: &[f64], gamma: f64) -> Result<Self> {
        let uu = pad(u);
        let bb = pad(b);
        let m: Vec<f64> = u.iter().map(|ui| rho * ui).collect();
        let e = p / (gamma - 1.0) + 0.5 * rho * norm2(&uu) + 0.5 * norm2(&bb);
        Self::new(rho, &m, e, b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn momentum(&self) -> &[f64] {
        &self.m[..self.dim]
    }

    pub fn magnetic(&self) -> &[f64] {
        &self.b[..self.dim]
    }

    /// Row layout used by the cell-average matrix: `rho, m_1..m_n, E, B_1..B_n`.
    pub fn to_row(&self) -> Vec<f64> {
        let mut row = Vec::with_capacity(2 + 2 * self.dim);
        row.push(self.rho);
        row.extend_from_slice(self.momentum());
        row.push(self.e);
        row.extend_from_slice(self.magnetic());
        row
    }

    pub fn from_row(row: &[f64], dim: usize) -> Result<Self> {
        if row.len() != 2 + 2 * dim {
            return Err(Error::InvalidInput(format!(
                "row of length {} does not match dimension {dim}",
                row.len()
            )));
        }
        Self::new(row[0], &row[1..1 + dim], row[1 + dim], &row[2 + dim..])
    }

    /// `E - |m|^2/(2 rho) - |B|^2/2`, without the positivity check.
    #[inline]
    pub fn internal_energy_unchecked(&self) -> f64 {
        self.e - 0.5 * norm2(&self.m) / self.rho - 0.5 * norm2(&self.b)
    }
}

/// Internal energy density `rho e = E - |m|^2/(2 rho) - |B|^2/2`.
pub fn internal_energy_density(s: &ConservedState) -> Result<f64> {
    if !(s.rho > 0.0) {
        return Err(Error::Domain(format!(
            "internal energy undefined for density {}",
            s.rho
        )));
    }
    Ok(s.internal_energy_unchecked())
}

/// Membership in `G^eps`, boundary included.
#[inline]
pub fn is_admissible(s: &ConservedState, eps: f64) -> bool {
    s.rho >= eps && s.rho > 0.0 && s.internal_energy_unchecked() >= eps
}

/// Amount by which a state misses `G^eps` (zero when admissible).
pub fn admissibility_violation(s: &ConservedState, eps: f64) -> f64 {
    let drho = (eps - s.rho).max(0.0);
    if !(s.rho > 0.0) {
        return f64::INFINITY;
    }
    drho.max(eps - s.internal_energy_unchecked()).max(0.0)
}

pub fn pressure_of(s: &ConservedState, p: &GasParams) -> Result<f64> {
    Ok((p.gamma - 1.0) * internal_energy_density(s)?)
}

/// Fast magnetosonic speed in direction `normal` (unit vector).
///
/// Requires positive density and pressure.
pub fn fast_magnetosonic_speed(s: &ConservedState, p: &GasParams, normal: &Vec3) -> Result<f64> {
    let pres = pressure_of(s, p)?;
    if !(pres > 0.0) {
        return Err(Error::Domain(format!(
            "fast speed undefined for pressure {pres} (rho = {})",
            s.rho
        )));
    }
    Ok(fast_speed_raw(s.rho, pres, &s.b, normal, p.gamma))
}

/// `c_f^2 = (a^2 + b^2 + sqrt((a^2 + b^2)^2 - 4 a^2 b_n^2)) / 2`.
#[inline]
pub(crate) fn fast_speed_raw(rho: f64, pres: f64, b: &Vec3, normal: &Vec3, gamma: f64) -> f64 {
    let a2 = gamma * pres / rho;
    let b2 = norm2(b) / rho;
    let bn = dot(b, normal);
    let bn2 = bn * bn / rho;
    let sum = a2 + b2;
    let disc = (sum * sum - 4.0 * a2 * bn2).max(0.0);
    (0.5 * (sum + disc.sqrt())).sqrt()
}

/// Alfvén speed `|B . n| / sqrt(rho)`.
pub fn alfven_speed(s: &ConservedState, normal: &Vec3) -> f64 {
    dot(&s.b, normal).abs() / s.rho.sqrt()
}

pub fn sound_speed(s: &ConservedState, p: &GasParams) -> Result<f64> {
    let pres = pressure_of(s, p)?;
    if !(pres >= 0.0) {
        return Err(Error::Domain(format!("negative pressure {pres}")));
    }
    Ok((p.gamma * pres / s.rho).sqrt())
}
