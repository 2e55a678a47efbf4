//! Orthonormal P2 basis on the reference square `[-1, 1]^2` and the point
//! sets used by the solver.
//!
//! Orthonormality is with respect to the mean `(1/4) * integral`, so mode 0
//! is the constant 1 and its coefficient is the cell average.

use std::sync::LazyLock;

pub const NMODES: usize = 6;

/// Three-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub const GAUSS_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
pub const GAUSS_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Four-point Gauss–Lobatto nodes on `[-1, 1]`.
pub const LOBATTO_X: [f64; 4] = [-1.0, -0.447_213_595_499_957_9, 0.447_213_595_499_957_9, 1.0];

const S3: f64 = 1.732_050_807_568_877_2;
const S5: f64 = 2.236_067_977_499_79;

pub fn phi(xi: f64, eta: f64) -> [f64; NMODES] {
    [
        1.0,
        S3 * xi,
        S3 * eta,
        0.5 * S5 * (3.0 * xi * xi - 1.0),
        3.0 * xi * eta,
        0.5 * S5 * (3.0 * eta * eta - 1.0),
    ]
}

/// `(d phi / d xi, d phi / d eta)`.
pub fn grad_phi(xi: f64, eta: f64) -> ([f64; NMODES], [f64; NMODES]) {
    (
        [0.0, S3, 0.0, 3.0 * S5 * xi, 3.0 * eta, 0.0],
        [0.0, 0.0, S3, 0.0, 3.0 * xi, 3.0 * S5 * eta],
    )
}

/// Faces of the reference square, in the order used throughout the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Face {
    Left = 0,
    Right = 1,
    Bottom = 2,
    Top = 3,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Left, Face::Right, Face::Bottom, Face::Top];

    /// Reference coordinates of the `g`-th edge Gauss point.
    pub fn point(self, g: usize) -> (f64, f64) {
        let s = GAUSS_X[g];
        match self {
            Face::Left => (-1.0, s),
            Face::Right => (1.0, s),
            Face::Bottom => (s, -1.0),
            Face::Top => (s, 1.0),
        }
    }

    /// Outward unit normal.
    pub fn normal(self) -> [f64; 3] {
        match self {
            Face::Left => [-1.0, 0.0, 0.0],
            Face::Right => [1.0, 0.0, 0.0],
            Face::Bottom => [0.0, -1.0, 0.0],
            Face::Top => [0.0, 1.0, 0.0],
        }
    }
}

pub struct Tables {
    /// 3x3 tensor Gauss points, weights summing to 4.
    pub vol_pts: [(f64, f64); 9],
    pub vol_w: [f64; 9],
    pub vol_phi: [[f64; NMODES]; 9],
    pub vol_dxi: [[f64; NMODES]; 9],
    pub vol_deta: [[f64; NMODES]; 9],
    /// Basis values at the three Gauss points of each face.
    pub face_phi: [[[f64; NMODES]; 3]; 4],
    /// Positivity points: (Lobatto x Gauss) union (Gauss x Lobatto), followed
    /// by the volume Gauss points.
    pub limiter_pts: Vec<(f64, f64)>,
    pub limiter_phi: Vec<[f64; NMODES]>,
}

pub static TABLES: LazyLock<Tables> = LazyLock::new(build);

fn build() -> Tables {
    let mut vol_pts = [(0.0, 0.0); 9];
    let mut vol_w = [0.0; 9];
    for j in 0..3 {
        for i in 0..3 {
            vol_pts[3 * j + i] = (GAUSS_X[i], GAUSS_X[j]);
            vol_w[3 * j + i] = GAUSS_W[i] * GAUSS_W[j];
        }
    }
    let vol_phi = vol_pts.map(|(x, y)| phi(x, y));
    let vol_dxi = vol_pts.map(|(x, y)| grad_phi(x, y).0);
    let vol_deta = vol_pts.map(|(x, y)| grad_phi(x, y).1);
    let face_phi = Face::ALL.map(|f| {
        [0, 1, 2].map(|g| {
            let (x, y) = f.point(g);
            phi(x, y)
        })
    });
    let mut limiter_pts = Vec::with_capacity(33);
    for &l in &LOBATTO_X {
        for &g in &GAUSS_X {
            limiter_pts.push((l, g));
        }
    }
    for &g in &GAUSS_X {
        for &l in &LOBATTO_X {
            limiter_pts.push((g, l));
        }
    }
    limiter_pts.extend_from_slice(&vol_pts);
    let limiter_phi = limiter_pts.iter().map(|&(x, y)| phi(x, y)).collect();
    Tables {
        vol_pts,
        vol_w,
        vol_phi,
        vol_dxi,
        vol_deta,
        face_phi,
        limiter_pts,
        limiter_phi,
    }
}

/// `sum_k c_k phi_k`.
#[inline]
pub fn eval(c: &[f64], phi: &[f64; NMODES]) -> f64 {
    c[0] * phi[0] + c[1] * phi[1] + c[2] * phi[2] + c[3] * phi[3] + c[4] * phi[4] + c[5] * phi[5]
}
