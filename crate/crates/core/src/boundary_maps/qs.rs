//! Periodic monotone lifts of circle homeomorphisms.

use super::MapError;
use crate::Real;

/// A homeomorphism of `S^1` given by its lift `u: R -> R`,
/// `u(t + 2 pi) = u(t) + 2 pi`.
#[derive(Clone, Debug, PartialEq)]
pub enum Lift {
    Identity,
    /// Boundary trace of the disc automorphism `z -> (z - a) / (1 - a z)`,
    /// `|a| < 1`.
    Mobius { a: f64 },
    /// `x -> (2x)^p / 2` on `[0, 1/2]`, mirrored on `[1/2, 1]`, in units of a
    /// full turn.
    PiecewisePower { exponent: f64 },
    /// Piecewise-linear graph through `(0,0)`, the knots, and `(1,1)`, in
    /// units of a full turn.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl Lift {
    pub fn mobius(a: f64) -> Result<Self, MapError> {
        if !(a.abs() < 1.0) {
            return Err(MapError::InvalidParameter(format!("disc automorphism parameter {a} must satisfy |a| < 1")));
        }
        Ok(Self::Mobius { a })
    }

    pub fn piecewise_power(exponent: f64) -> Result<Self, MapError> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(MapError::InvalidParameter(format!("exponent {exponent} must be positive")));
        }
        Ok(Self::PiecewisePower { exponent })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self, MapError> {
        let mut prev = (0.0, 0.0);
        for &(x, y) in knots.iter().chain(std::iter::once(&(1.0, 1.0))) {
            if !(x > prev.0 && y > prev.1) {
                return Err(MapError::NonMonotone { x, y });
            }
            prev = (x, y);
        }
        Ok(Self::PiecewiseLinear { knots })
    }

    /// Evaluates the lift at `t`.
    pub fn eval<T: Real>(&self, t: T) -> T {
        let tau = T::two() * T::PI();
        match self {
            Lift::Identity => t,
            Lift::Mobius { a } => {
                let a = T::lit(*a);
                t + T::two() * (a * t.sin()).atan2(T::one() - a * t.cos())
            }
            Lift::PiecewisePower { .. } | Lift::PiecewiseLinear { .. } => {
                let turns = (t / tau).floor();
                let frac = t / tau - turns;
                (turns + self.unit_profile(frac)) * tau
            }
        }
    }

    /// The profile `[0, 1] -> [0, 1]` of the turn-periodic lifts.
    fn unit_profile<T: Real>(&self, x: T) -> T {
        match self {
            Lift::PiecewisePower { exponent } => {
                let p = T::lit(*exponent);
                if x <= T::half() {
                    T::half() * (T::two() * x).powf(p)
                } else {
                    T::one() - T::half() * (T::two() * (T::one() - x)).powf(p)
                }
            }
            Lift::PiecewiseLinear { knots } => {
                let mut prev = (T::zero(), T::zero());
                for &(kx, ky) in knots.iter().chain(std::iter::once(&(1.0, 1.0))) {
                    let (kx, ky) = (T::lit(kx), T::lit(ky));
                    if x <= kx {
                        return prev.1 + (x - prev.0) * (ky - prev.1) / (kx - prev.0);
                    }
                    prev = (kx, ky);
                }
                T::one()
            }
            _ => x,
        }
    }

    /// Angles in `[0, 2 pi)` where the lift is not a smooth diffeomorphism.
    pub fn singular_angles(&self) -> Vec<f64> {
        let tau = 2.0 * std::f64::consts::PI;
        match self {
            Lift::PiecewisePower { exponent } if *exponent != 1.0 => vec![0.0],
            Lift::PiecewiseLinear { knots } => {
                std::iter::once(0.0).chain(knots.iter().map(|k| k.0 * tau)).collect()
            }
            _ => Vec::new(),
        }
    }
}

/// A quasisymmetric homeomorphism of the circle followed by `z -> z^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct QsCovering {
    pub homeo: Lift,
    pub degree: u32,
}

impl QsCovering {
    pub fn new(homeo: Lift, degree: u32) -> Result<Self, MapError> {
        if degree == 0 {
            return Err(MapError::ZeroDegree);
        }
        Ok(Self { homeo, degree })
    }

    /// Lift of the covering: `t -> d * u(t)`.
    pub fn eval<T: Real>(&self, t: T) -> T {
        T::lit(self.degree as f64) * self.homeo.eval(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lifts() -> Vec<Lift> {
        vec![
            Lift::Identity,
            Lift::mobius(0.3).unwrap(),
            Lift::mobius(-0.7).unwrap(),
            Lift::piecewise_power(2.0).unwrap(),
            Lift::piecewise_power(0.5).unwrap(),
            Lift::piecewise_linear(vec![(0.25, 0.4), (0.5, 0.6)]).unwrap(),
        ]
    }

    #[test]
    fn lifts_are_periodic_and_increasing() {
        for lift in lifts() {
            let mut last = f64::NEG_INFINITY;
            for k in 0..1024 {
                let t = -PI + 2.0 * PI * k as f64 / 1024.0;
                let u = lift.eval(t);
                assert!((lift.eval(t + 2.0 * PI) - u - 2.0 * PI).abs() <= 1e-12, "{lift:?} at {t}");
                assert!(u > last, "{lift:?} not increasing at {t}");
                last = u;
            }
        }
    }

    #[test]
    fn non_monotone_knots_are_rejected() {
        assert!(Lift::piecewise_linear(vec![(0.5, 0.4), (0.4, 0.6)]).is_err());
        assert!(Lift::piecewise_linear(vec![(0.5, 1.2)]).is_err());
        assert!(Lift::mobius(1.0).is_err());
        assert!(QsCovering::new(Lift::Identity, 0).is_err());
    }

    #[test]
    fn mobius_lift_matches_complex_formula() {
        let a = 0.3f64;
        for k in 0..64 {
            let t = 2.0 * PI * k as f64 / 64.0;
            let (zr, zi) = (t.cos(), t.sin());
            // (z - a) / (1 - a z)
            let (nr, ni) = (zr - a, zi);
            let (dr, di) = (1.0 - a * zr, -a * zi);
            let den = dr * dr + di * di;
            let (wr, wi) = ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den);
            let u = Lift::Mobius { a }.eval(t);
            assert!((u.cos() - wr).abs() < 1e-12 && (u.sin() - wi).abs() < 1e-12);
        }
    }
}
