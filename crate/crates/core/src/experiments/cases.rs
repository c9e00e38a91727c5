//! The two benchmark problems.

use serde::Serialize;

use crate::dofs::BoundarySpec;
use crate::error::Result;
use crate::mesh::Point;
use crate::params::PhysicalParams;
use crate::system::Forcing;

/// Divergence-free displacement `u = curl phi` with
/// `phi = [x y (1 - x)(1 - y)]^2`, constant pressure one, zero velocity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ManufacturedCase {
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub biot_modulus: f64,
    pub tau: f64,
    pub t_max: f64,
}

impl Default for ManufacturedCase {
    fn default() -> Self {
        ManufacturedCase { lambda: 2.0, mu: 1.0, alpha: 1.0, biot_modulus: 1e6, tau: 1.0, t_max: 1.0 }
    }
}

/// Values of `X(s) = s^2 (1 - s)^2` and its first three derivatives.
fn profile(s: f64) -> [f64; 4] {
    let q = s * (1.0 - s);
    [q * q, 2.0 * q * (1.0 - 2.0 * s), 2.0 * (1.0 - 6.0 * s + 6.0 * s * s), 12.0 * (2.0 * s - 1.0)]
}

impl ManufacturedCase {
    pub fn params(&self, permeability: f64) -> Result<PhysicalParams> {
        PhysicalParams::new(self.lambda, self.mu, self.alpha, self.biot_modulus, permeability, self.tau)
    }

    pub fn boundary(&self) -> BoundarySpec {
        BoundarySpec::clamped_no_flow()
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.tau).round().max(1.0) as usize
    }

    pub fn displacement(x: Point) -> [f64; 2] {
        let (px, py) = (profile(x[0]), profile(x[1]));
        [px[0] * py[1], -px[1] * py[0]]
    }

    /// Row `i` holds the gradient of component `i`.
    pub fn displacement_gradient(x: Point) -> [[f64; 2]; 2] {
        let (px, py) = (profile(x[0]), profile(x[1]));
        [[px[1] * py[1], px[0] * py[2]], [-px[2] * py[0], -px[1] * py[1]]]
    }

    pub fn pressure(_x: Point) -> f64 {
        1.0
    }

    /// `f = -mu Laplace(u)`; the divergence terms vanish.
    pub fn body_force(mu: f64, x: Point) -> [f64; 2] {
        let (px, py) = (profile(x[0]), profile(x[1]));
        let lap1 = px[2] * py[1] + px[0] * py[3];
        let lap2 = -(px[3] * py[0] + px[1] * py[2]);
        [-mu * lap1, -mu * lap2]
    }

    pub fn forcing(&self) -> Forcing {
        let mu = self.mu;
        Forcing { body_force: Box::new(move |x| Self::body_force(mu, x)), source: Box::new(|_| 0.0) }
    }
}

/// Cantilever bracket: left side clamped, downward unit traction on top,
/// no-flow everywhere, zero initial state.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CantileverCase {
    pub young: f64,
    pub poisson: f64,
    pub permeability: f64,
    pub alpha: f64,
    pub biot_modulus: f64,
    pub tau: f64,
    pub steps: usize,
    pub traction: [f64; 2],
}

impl Default for CantileverCase {
    fn default() -> Self {
        CantileverCase {
            young: 1e5,
            poisson: 0.45,
            permeability: 1e-7,
            alpha: 0.93,
            biot_modulus: 1e10,
            tau: 1e-3,
            steps: 5,
            traction: [0.0, -1.0],
        }
    }
}

impl CantileverCase {
    pub fn params(&self) -> Result<PhysicalParams> {
        PhysicalParams::from_young(self.young, self.poisson, self.alpha, self.biot_modulus, self.permeability, self.tau)
    }

    pub fn boundary(&self) -> BoundarySpec {
        BoundarySpec::cantilever(self.traction)
    }

    pub fn final_time(&self) -> f64 {
        self.tau * self.steps as f64
    }
}
