use crate::error::{Error, Result};

/// Physical and discretization parameters of one Biot solve. Permeability is
/// the scalar `K` of the isotropic tensor `K I`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PhysicalParams {
    pub lambda: f64,
    pub mu: f64,
    /// Biot-Willis constant.
    pub alpha: f64,
    /// Biot modulus `M`.
    pub biot_modulus: f64,
    pub permeability: f64,
    pub tau: f64,
}

/// Spatial dimension.
pub const DIM: usize = 2;

impl PhysicalParams {
    pub fn new(lambda: f64, mu: f64, alpha: f64, biot_modulus: f64, permeability: f64, tau: f64) -> Result<Self> {
        let p = PhysicalParams { lambda, mu, alpha, biot_modulus, permeability, tau };
        p.validate()?;
        Ok(p)
    }

    /// Lamé parameters from Young's modulus and Poisson ratio, using
    /// `lambda = E nu / ((1 - 2 nu)(1 + nu))` and `mu = E / (1 + 2 nu)`.
    pub fn from_young(e: f64, nu: f64, alpha: f64, biot_modulus: f64, permeability: f64, tau: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&nu) {
            return Err(Error::InvalidParameter(format!("Poisson ratio {nu} outside [0, 0.5)")));
        }
        if !(e > 0.0) {
            return Err(Error::InvalidParameter(format!("Young modulus {e} must be positive")));
        }
        let (lambda, mu) = lame_from_young(e, nu);
        Self::new(lambda, mu, alpha, biot_modulus, permeability, tau)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("M", self.biot_modulus),
            ("K", self.permeability),
            ("tau", self.tau),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive and finite")));
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {} must be non-negative", self.lambda)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {} must be non-negative", self.alpha)));
        }
        Ok(())
    }

    /// `zeta^2 = lambda + 2 mu / d`.
    pub fn zeta_sq(&self) -> f64 {
        self.lambda + 2.0 * self.mu / DIM as f64
    }

    pub fn zeta(&self) -> f64 {
        self.zeta_sq().sqrt()
    }

    /// `delta = alpha^2 / zeta^2 + 1 / M`.
    pub fn delta(&self) -> f64 {
        self.alpha * self.alpha / self.zeta_sq() + 1.0 / self.biot_modulus
    }
}

pub fn lame_from_young(e: f64, nu: f64) -> (f64, f64) {
    (e * nu / ((1.0 - 2.0 * nu) * (1.0 + nu)), e / (1.0 + 2.0 * nu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let p = PhysicalParams::new(2.0, 1.0, 1.0, 1e6, 1e-6, 1.0).unwrap();
        assert_eq!(p.zeta_sq(), 3.0);
        assert!((p.delta() - (1.0 / 3.0 + 1e-6)).abs() < 1e-15);
    }

    #[test]
    fn young_conversion() {
        let p = PhysicalParams::from_young(1e5, 0.45, 0.93, 1e10, 1e-7, 1e-3).unwrap();
        assert!((p.lambda - 1e5 * 0.45 / (0.1 * 1.45)).abs() < 1e-6);
        assert!((p.mu - 1e5 / 1.9).abs() < 1e-9);
        let p = PhysicalParams::from_young(1.0, 0.0, 1.0, 1e6, 1e-6, 1.0).unwrap();
        assert_eq!((p.lambda, p.mu), (0.0, 1.0));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PhysicalParams::from_young(1.0, 0.5, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, -1.0).is_err());
        assert!(PhysicalParams::new(f64::NAN, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }
}
