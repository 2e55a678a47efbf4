//! Ghost states on the domain boundary.

use super::basis::Face;
use super::physics::StateVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Zero-gradient: the ghost state copies the interior trace.
    Outflow,
    /// Mirror: normal momentum and normal magnetic field change sign.
    Reflective,
    /// Nozzle inflow on part of the side; elsewhere ambient inflow or outflow
    /// depending on the sign of `u . n`.
    JetInflow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetNozzle {
    /// The nozzle covers `|y| <= half_width`.
    pub half_width: f64,
    pub inflow: StateVec,
    pub ambient: StateVec,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySpec {
    /// Left, right, bottom, top.
    pub sides: [Boundary; 4],
    pub jet: Option<JetNozzle>,
}

impl BoundarySpec {
    pub fn kind(&self, side: Face) -> Boundary {
        self.sides[side as usize]
    }

    pub fn periodic_x(&self) -> bool {
        self.sides[0] == Boundary::Periodic
    }

    pub fn periodic_y(&self) -> bool {
        self.sides[2] == Boundary::Periodic
    }

    /// Exterior state across domain side `side` at a boundary point with
    /// ordinate `y`, given the interior trace there.
    pub fn ghost(&self, side: Face, interior: &StateVec, y: f64) -> StateVec {
        let n = side.normal();
        match self.kind(side) {
            Boundary::Periodic | Boundary::Outflow => *interior,
            Boundary::Reflective => {
                let mut g = *interior;
                let mn = g[1] * n[0] + g[2] * n[1];
                let bn = g[5] * n[0] + g[6] * n[1];
                for d in 0..2 {
                    g[1 + d] -= 2.0 * mn * n[d];
                    g[5 + d] -= 2.0 * bn * n[d];
                }
                g
            }
            Boundary::JetInflow => {
                let jet = self.jet.as_ref().expect("jet boundary without nozzle data");
                if y.abs() <= jet.half_width {
                    jet.inflow
                } else {
                    let un = (interior[1] * n[0] + interior[2] * n[1]) / interior[0];
                    if un <= 0.0 {
                        jet.ambient
                    } else {
                        *interior
                    }
                }
            }
        }
    }
}
