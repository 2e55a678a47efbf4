//! Run configuration and its flat `key = value` file format.

use std::path::PathBuf;
use std::str::FromStr;

use crate::dy_limiter;
use crate::error::{Error, Result};

use super::boundary::{Boundary, BoundarySpec, JetNozzle};
use super::physics::StateVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    Alfven,
    Rotor,
    OrszagTang,
    Jet,
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alfven" => Ok(Case::Alfven),
            "rotor" => Ok(Case::Rotor),
            "orszag-tang" | "orszag_tang" | "ot" => Ok(Case::OrszagTang),
            "jet" => Ok(Case::Jet),
            other => Err(Error::InvalidInput(format!(
                "unknown case '{other}' (expected alfven, rotor, orszag-tang or jet)"
            ))),
        }
    }
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Alfven => "alfven",
            Case::Rotor => "rotor",
            Case::OrszagTang => "orszag-tang",
            Case::Jet => "jet",
        }
    }
}

/// How the time step is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep {
    /// `cfl * dx / max alpha`.
    Cfl,
    Fixed(f64),
    /// A fixed step proportional to the cell size.
    PerDx(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub case: Case,
    /// `(x_min, x_max, y_min, y_max)`
    pub domain: (f64, f64, f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub gamma: f64,
    pub eps: f64,
    pub cfl: f64,
    pub tvb_m: f64,
    pub t_final: f64,
    pub time_step: TimeStep,
    /// Boundary kinds, ordered left, right, bottom, top.
    pub boundaries: [Boundary; 4],
    /// Write fields every this many steps; 0 writes only the final state.
    pub output_every: usize,
    pub out_dir: Option<PathBuf>,
    /// Magnetic field strength of the jet case.
    pub jet_b0: f64,
    pub dy_tol: f64,
    pub dy_max_iters: usize,
    pub max_steps: Option<usize>,
}

impl RunConfig {
    /// Desk-scale defaults for each case.
    pub fn for_case(case: Case) -> Self {
        use Boundary::*;
        let base = Self {
            case,
            domain: (0.0, 1.0, 0.0, 1.0),
            nx: 100,
            ny: 100,
            gamma: 5.0 / 3.0,
            eps: 1e-9,
            cfl: 0.2,
            tvb_m: 100.0,
            t_final: 1.0,
            time_step: TimeStep::Cfl,
            boundaries: [Periodic; 4],
            output_every: 0,
            out_dir: None,
            jet_b0: 200f64.sqrt(),
            dy_tol: dy_limiter::DEFAULT_TOL,
            dy_max_iters: dy_limiter::DEFAULT_MAX_ITERS,
            max_steps: None,
        };
        match case {
            Case::Alfven => Self {
                domain: (0.0, 0.5 * 5f64.sqrt(), 0.0, 5f64.sqrt()),
                nx: 16,
                ny: 32,
                eps: 1e-12,
                t_final: 2.0,
                time_step: TimeStep::PerDx(0.08 / 5f64.sqrt()),
                ..base
            },
            Case::Rotor => Self {
                nx: 150,
                ny: 150,
                t_final: 0.295,
                boundaries: [Outflow; 4],
                ..base
            },
            Case::OrszagTang => Self {
                domain: (0.0, 2.0 * std::f64::consts::PI, 0.0, 2.0 * std::f64::consts::PI),
                cfl: 0.7,
                t_final: 0.5,
                ..base
            },
            Case::Jet => Self {
                domain: (0.0, 1.5, 0.0, 0.75),
                nx: 150,
                ny: 75,
                gamma: 1.4,
                eps: 1e-6,
                tvb_m: 110.0,
                t_final: 5e-4,
                boundaries: [JetInflow, Outflow, Reflective, Outflow],
                ..base
            },
        }
    }

    /// Reads a flat `key = value` file. `case` must appear; everything else
    /// overrides the case defaults. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut case = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected 'key = value', got '{line}'"),
                });
            };
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
            if k == "case" {
                case = Some(v.parse::<Case>().map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })?);
            } else {
                entries.push((i + 1, k, v));
            }
        }
        let case = case.ok_or_else(|| Error::Parse {
            line: 0,
            msg: "missing 'case' key".into(),
        })?;
        let mut cfg = Self::for_case(case);
        for (line, k, v) in entries {
            cfg.set(&k, &v).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one configuration key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidInput(format!("bad value '{v}' for '{key}'")))
        }
        match key {
            "nx" => self.nx = num(key, value)?,
            "ny" => self.ny = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "cfl" => self.cfl = num(key, value)?,
            "tvb_m" => self.tvb_m = num(key, value)?,
            "t_final" => self.t_final = num(key, value)?,
            "fixed_dt" => {
                self.time_step = match value.to_ascii_lowercase().as_str() {
                    "none" | "cfl" => TimeStep::Cfl,
                    _ => TimeStep::Fixed(num(key, value)?),
                }
            }
            "output_every" => self.output_every = num(key, value)?,
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "b0" => self.jet_b0 = num(key, value)?,
            "dy_tol" => self.dy_tol = num(key, value)?,
            "dy_max_iters" => self.dy_max_iters = num(key, value)?,
            "max_steps" => self.max_steps = Some(num(key, value)?),
            other => return Err(Error::InvalidInput(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.nx < 4 || self.ny < 4 {
            return bad(format!("mesh must be at least 4x4, got {}x{}", self.nx, self.ny));
        }
        let (x0, x1, y0, y1) = self.domain;
        let (hx, hy) = ((x1 - x0) / self.nx as f64, (y1 - y0) / self.ny as f64);
        if ((hx - hy) / hx).abs() > 1e-12 {
            return bad(format!("cells must be square, got {hx} x {hy}"));
        }
        if !(self.gamma > 1.0) {
            return bad(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.cfl > 0.0) {
            return bad(format!("cfl must be positive, got {}", self.cfl));
        }
        if !(self.tvb_m >= 0.0) {
            return bad(format!("tvb_m must be non-negative, got {}", self.tvb_m));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return bad(format!("t_final must be a non-negative number, got {}", self.t_final));
        }
        match self.time_step {
            TimeStep::Fixed(dt) | TimeStep::PerDx(dt) if !(dt > 0.0) => {
                return bad(format!("fixed time step must be positive, got {dt}"))
            }
            _ => {}
        }
        if !(self.dy_tol > 0.0) {
            return bad(format!("dy_tol must be positive, got {}", self.dy_tol));
        }
        let periodic = |k: usize| self.boundaries[k] == Boundary::Periodic;
        if periodic(0) != periodic(1) || periodic(2) != periodic(3) {
            return bad("periodic boundaries must be paired".into());
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.domain.1 - self.domain.0) / self.nx as f64
    }

    /// The fixed time step, if one is configured.
    pub fn fixed_dt(&self) -> Option<f64> {
        match self.time_step {
            TimeStep::Cfl => None,
            TimeStep::Fixed(dt) => Some(dt),
            TimeStep::PerDx(f) => Some(f * self.dx()),
        }
    }

    pub fn boundary_spec(&self) -> BoundarySpec {
        let jet = (self.case == Case::Jet).then(|| JetNozzle {
            half_width: 0.05,
            inflow: self.jet_inflow_state(),
            ambient: self.jet_ambient_state(),
        });
        BoundarySpec {
            sides: self.boundaries,
            jet,
        }
    }

    pub fn jet_inflow_state(&self) -> StateVec {
        primitive(1.4, [800.0, 0.0, 0.0], 1.0, [self.jet_b0, 0.0, 0.0], self.gamma)
    }

    pub fn jet_ambient_state(&self) -> StateVec {
        primitive(0.14, [0.0; 3], 1.0, [self.jet_b0, 0.0, 0.0], self.gamma)
    }
}

pub(crate) fn primitive(rho: f64, u: [f64; 3], p: f64, b: [f64; 3], gamma: f64) -> StateVec {
    let ke = 0.5 * rho * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    let me = 0.5 * (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    [
        rho,
        rho * u[0],
        rho * u[1],
        rho * u[2],
        p / (gamma - 1.0) + ke + me,
        b[0],
        b[1],
        b[2],
    ]
}
