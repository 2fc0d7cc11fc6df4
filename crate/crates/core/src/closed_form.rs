//! Exact AAoI expressions for the single-source queues with a known closed
//! form, and ratios between them.
//!
//! Each expression is stored as `mu * Delta = num(rho) / den(rho)` with
//! integer coefficients, so every ratio is a function of the load alone and
//! its limits at `rho -> 0` and `rho -> inf` come from the extreme
//! coefficients rather than from floating-point extrapolation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::poly::Poly;

/// Loads at or above this are rejected for the infinite-buffer forms.
pub const STABILITY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("{name} must be positive and finite, got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("{id} requires rho < 1, got rho = {rho}")]
    Unstable { id: ClosedFormId, rho: f64 },
    #[error("load must lie in (0, 1), got {0}")]
    LoadOutOfRange(f64),
    #[error("unknown closed form '{name}'; valid: {valid}")]
    UnknownId { name: String, valid: String },
}

/// Poisson arrival rate and exponential service rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    lambda: f64,
    mu: f64,
}

impl RateParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self, ClosedFormError> {
        check_rate("lambda", lambda)?;
        check_rate("mu", mu)?;
        Ok(RateParams { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }

    /// Same load, rates multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self, ClosedFormError> {
        RateParams::new(self.lambda * c, self.mu * c)
    }
}

pub(crate) fn check_rate(name: &'static str, value: f64) -> Result<(), ClosedFormError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ClosedFormError::InvalidRate { name, value })
    }
}

/// Every queue variant with a printed AAoI expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClosedFormId {
    /// M/M/1/2, processor sharing, arrivals to a full system dropped.
    Mm12Ps,
    /// M/M/1/2, first generated first served.
    Mm12Fgfs,
    /// M/M/1/2*: arrival to a full system replaces the newest packet. PS.
    Mm12StarPs,
    Mm12StarFgfs,
    /// M/M/1/2**: arrival to a full system replaces the oldest packet. PS.
    Mm12Star2Ps,
    /// FGFS variant; the replaced oldest packet is the one in service.
    Mm12Star2Fgfs,
    /// M/M/1/1, arrivals to a busy server dropped.
    Mm11,
    /// M/M/1/1*, arrivals preempt the packet in service.
    Mm11Star,
    /// Infinite-buffer FGFS queue, rho < 1.
    Mm1Fgfs,
    /// `(mu - lambda) / (lambda mu)`, a strict lower bound on the
    /// infinite-buffer PS queue, rho < 1.
    Mm1PsLowerBound,
}

impl ClosedFormId {
    pub const ALL: [ClosedFormId; 10] = [
        ClosedFormId::Mm12Ps,
        ClosedFormId::Mm12Fgfs,
        ClosedFormId::Mm12StarPs,
        ClosedFormId::Mm12StarFgfs,
        ClosedFormId::Mm12Star2Ps,
        ClosedFormId::Mm12Star2Fgfs,
        ClosedFormId::Mm11,
        ClosedFormId::Mm11Star,
        ClosedFormId::Mm1Fgfs,
        ClosedFormId::Mm1PsLowerBound,
    ];

    /// The eight finite-buffer models that have an exact SHS table.
    pub const FINITE: [ClosedFormId; 8] = [
        ClosedFormId::Mm12Ps,
        ClosedFormId::Mm12Fgfs,
        ClosedFormId::Mm12StarPs,
        ClosedFormId::Mm12StarFgfs,
        ClosedFormId::Mm12Star2Ps,
        ClosedFormId::Mm12Star2Fgfs,
        ClosedFormId::Mm11,
        ClosedFormId::Mm11Star,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClosedFormId::Mm12Ps => "mm12-ps",
            ClosedFormId::Mm12Fgfs => "mm12-fgfs",
            ClosedFormId::Mm12StarPs => "mm12star-ps",
            ClosedFormId::Mm12StarFgfs => "mm12star-fgfs",
            ClosedFormId::Mm12Star2Ps => "mm12star2-ps",
            ClosedFormId::Mm12Star2Fgfs => "mm12star2-fgfs",
            ClosedFormId::Mm11 => "mm11",
            ClosedFormId::Mm11Star => "mm11star",
            ClosedFormId::Mm1Fgfs => "mm1-fgfs",
            ClosedFormId::Mm1PsLowerBound => "mm1-ps-lower-bound",
        }
    }

    /// One-line description used by `--help` listings.
    pub fn describe(self) -> &'static str {
        match self {
            ClosedFormId::Mm12Ps => "M/M/1/2 processor sharing, full-system arrivals dropped",
            ClosedFormId::Mm12Fgfs => "M/M/1/2 FGFS, full-system arrivals dropped",
            ClosedFormId::Mm12StarPs => "M/M/1/2* PS, arrival replaces the newest packet",
            ClosedFormId::Mm12StarFgfs => "M/M/1/2* FGFS, arrival replaces the waiting packet",
            ClosedFormId::Mm12Star2Ps => "M/M/1/2** PS, arrival replaces the oldest packet",
            ClosedFormId::Mm12Star2Fgfs => "M/M/1/2** FGFS, arrival replaces the packet in service",
            ClosedFormId::Mm11 => "M/M/1/1, arrivals to a busy server dropped",
            ClosedFormId::Mm11Star => "M/M/1/1*, arrivals preempt the packet in service",
            ClosedFormId::Mm1Fgfs => "M/M/1 FGFS (rho < 1)",
            ClosedFormId::Mm1PsLowerBound => "lower bound (mu-lambda)/(lambda mu) on M/M/1 PS (rho < 1)",
        }
    }

    pub fn requires_stability(self) -> bool {
        matches!(self, ClosedFormId::Mm1Fgfs | ClosedFormId::Mm1PsLowerBound)
    }

    pub fn is_finite_buffer(self) -> bool {
        !self.requires_stability()
    }

    /// `mu * Delta` as a ratio of polynomials in `rho`.
    pub fn form(self) -> RationalForm {
        let r = Poly::new(vec![0.0, 1.0]);
        let one_plus = Poly::new(vec![1.0, 1.0]);
        let tri = Poly::new(vec![1.0, 1.0, 1.0]);
        let base = &r * &tri;
        let den = |two: bool, power: u32| {
            let d = &base * &one_plus.pow(power);
            if two {
                &d * &Poly::constant(2.0)
            } else {
                d
            }
        };
        let (num, den) = match self {
            ClosedFormId::Mm12Ps => (vec![2.0, 6.0, 8.0, 9.0, 5.0], den(true, 1)),
            ClosedFormId::Mm12Fgfs => (vec![1.0, 3.0, 4.0, 5.0, 3.0], den(false, 1)),
            ClosedFormId::Mm12StarPs => (vec![2.0, 8.0, 14.0, 15.0, 11.0, 3.0], den(true, 2)),
            ClosedFormId::Mm12StarFgfs => (vec![1.0, 4.0, 7.0, 8.0, 7.0, 2.0], den(false, 2)),
            ClosedFormId::Mm12Star2Ps => (vec![2.0, 10.0, 22.0, 29.0, 25.0, 11.0, 2.0], den(true, 3)),
            ClosedFormId::Mm12Star2Fgfs => (vec![1.0, 5.0, 11.0, 15.0, 14.0, 6.0, 1.0], den(false, 3)),
            ClosedFormId::Mm11 => (vec![1.0, 2.0, 2.0], &r * &one_plus),
            ClosedFormId::Mm11Star => (vec![1.0, 1.0], r.clone()),
            // 1 + 1/rho + rho^2/(1-rho) over the common denominator rho(1-rho)
            ClosedFormId::Mm1Fgfs => (vec![1.0, 0.0, -1.0, 1.0], Poly::new(vec![0.0, 1.0, -1.0])),
            ClosedFormId::Mm1PsLowerBound => (vec![1.0, -1.0], r.clone()),
        };
        RationalForm {
            num: Poly::new(num),
            den,
        }
    }

    pub fn check(self, p: &RateParams) -> Result<(), ClosedFormError> {
        let rho = p.rho();
        if self.requires_stability() && rho >= 1.0 - STABILITY_MARGIN {
            return Err(ClosedFormError::Unstable { id: self, rho });
        }
        Ok(())
    }
}

impl fmt::Display for ClosedFormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClosedFormId {
    type Err = ClosedFormError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        ClosedFormId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == key)
            .ok_or_else(|| ClosedFormError::UnknownId {
                name: s.to_string(),
                valid: ClosedFormId::ALL.map(|id| id.name()).join(", "),
            })
    }
}

/// `num(rho) / den(rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalForm {
    pub num: Poly,
    pub den: Poly,
}

impl RationalForm {
    pub fn eval(&self, rho: f64) -> f64 {
        self.num.eval(rho) / self.den.eval(rho)
    }

    /// `self / other` with the common factors left in place.
    pub fn divide(&self, other: &RationalForm) -> RationalForm {
        RationalForm {
            num: &self.num * &other.den,
            den: &self.den * &other.num,
        }
    }

    pub fn limit(&self, at: Limit) -> f64 {
        let (Some(n), Some(d)) = (self.num_term(at), self.den_term(at)) else {
            return f64::NAN;
        };
        let order = match at {
            Limit::Zero => n.0 as i64 - d.0 as i64,
            Limit::Infinity => d.0 as i64 - n.0 as i64,
        };
        match order.cmp(&0) {
            std::cmp::Ordering::Equal => n.1 / d.1,
            std::cmp::Ordering::Greater => 0.0,
            std::cmp::Ordering::Less => f64::INFINITY * (n.1 / d.1).signum(),
        }
    }

    fn num_term(&self, at: Limit) -> Option<(usize, f64)> {
        match at {
            Limit::Zero => self.num.lowest_term(),
            Limit::Infinity => self.num.leading_term(),
        }
    }

    fn den_term(&self, at: Limit) -> Option<(usize, f64)> {
        match at {
            Limit::Zero => self.den.lowest_term(),
            Limit::Infinity => self.den.leading_term(),
        }
    }

    /// Numerator of the derivative, `num' den - num den'`; its positive
    /// roots are the stationary points of the form.
    pub fn stationary_polynomial(&self) -> Poly {
        &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Zero,
    Infinity,
}

/// Average age of information of `id` at rates `p`, in time units.
pub fn aaoi(id: ClosedFormId, p: &RateParams) -> Result<f64, ClosedFormError> {
    id.check(p)?;
    Ok(id.form().eval(p.rho()) / p.mu())
}

/// `aaoi(num) / aaoi(den)`; a function of the load only.
pub fn ratio(num: ClosedFormId, den: ClosedFormId, p: &RateParams) -> Result<f64, ClosedFormError> {
    num.check(p)?;
    den.check(p)?;
    Ok(ratio_at_load(num, den, p.rho()))
}

pub(crate) fn ratio_at_load(num: ClosedFormId, den: ClosedFormId, rho: f64) -> f64 {
    num.form().divide(&den.form()).eval(rho)
}

/// Exact limit of `aaoi(num) / aaoi(den)` as the load goes to 0 or infinity.
pub fn ratio_limit(num: ClosedFormId, den: ClosedFormId, at: Limit) -> f64 {
    num.form().divide(&den.form()).limit(at)
}

/// Bounds on the correction term `C(rho)` in the conjectured
/// `mu * Delta_PS = 1/rho + 1 + C(rho)` for the infinite PS queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjectureBounds {
    pub lower: f64,
    pub upper: f64,
    pub large_rho_lower: f64,
    pub large_rho_upper: f64,
    /// The large-load pair is only meaningful where it is consistent.
    pub large_rho_applicable: bool,
}

pub fn conjecture_bounds(rho: f64) -> Result<ConjectureBounds, ClosedFormError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(ClosedFormError::LoadOutOfRange(rho));
    }
    let large_rho_lower = (rho - 0.5).powi(3) / (1.0 - rho);
    let large_rho_upper = 0.75 * rho / (1.0 - rho).sqrt();
    Ok(ConjectureBounds {
        lower: 0.0,
        upper: rho * rho / (1.0 - rho),
        large_rho_lower,
        large_rho_upper,
        large_rho_applicable: large_rho_lower <= large_rho_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: f64, m: f64) -> RateParams {
        RateParams::new(l, m).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn spot_values() {
        assert!(close(aaoi(ClosedFormId::Mm12Ps, &p(1.0, 1.0)).unwrap(), 2.5, 1e-15));
        assert!(close(aaoi(ClosedFormId::Mm11Star, &p(1.0, 1.0)).unwrap(), 2.0, 1e-15));
        assert!(close(aaoi(ClosedFormId::Mm1Fgfs, &p(0.5, 1.0)).unwrap(), 3.5, 1e-15));
        assert!(close(
            aaoi(ClosedFormId::Mm12Star2Ps, &p(1.0, 1.0)).unwrap(),
            101.0 / 48.0,
            1e-15
        ));
        assert!(close(
            aaoi(ClosedFormId::Mm1PsLowerBound, &p(0.5, 1.0)).unwrap(),
            1.0,
            1e-15
        ));
        assert!(close(
            aaoi(ClosedFormId::Mm12Star2Fgfs, &p(1.0, 1.0)).unwrap(),
            53.0 / 24.0,
            1e-15
        ));
        assert!(close(
            aaoi(ClosedFormId::Mm12StarPs, &p(1.0, 1.0)).unwrap(),
            53.0 / 24.0,
            1e-15
        ));
    }

    #[test]
    fn ratio_spot_and_limits() {
        let r = ratio(ClosedFormId::Mm12Fgfs, ClosedFormId::Mm12Ps, &p(1.0, 1.0)).unwrap();
        assert!(close(r, 16.0 / 15.0, 1e-15));
        assert_eq!(
            ratio_limit(ClosedFormId::Mm12StarFgfs, ClosedFormId::Mm12StarPs, Limit::Zero),
            1.0
        );
        assert_eq!(
            ratio_limit(ClosedFormId::Mm12StarPs, ClosedFormId::Mm12Star2Ps, Limit::Infinity),
            1.5
        );
        assert_eq!(
            ratio_limit(ClosedFormId::Mm12Fgfs, ClosedFormId::Mm12Ps, Limit::Infinity),
            1.2
        );
        assert_eq!(
            ratio_limit(ClosedFormId::Mm1Fgfs, ClosedFormId::Mm11Star, Limit::Zero),
            1.0
        );
    }

    #[test]
    fn stability_guard() {
        assert!(matches!(
            aaoi(ClosedFormId::Mm1Fgfs, &p(1.0, 1.0)),
            Err(ClosedFormError::Unstable { .. })
        ));
        assert!(aaoi(ClosedFormId::Mm1PsLowerBound, &p(2.0, 1.0)).is_err());
        assert!(aaoi(ClosedFormId::Mm12Ps, &p(50.0, 1.0)).is_ok());
        assert!(RateParams::new(0.0, 1.0).is_err());
        assert!(RateParams::new(1.0, f64::INFINITY).is_err());
        assert!(RateParams::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn conjecture_bound_values() {
        let b = conjecture_bounds(0.5).unwrap();
        assert_eq!((b.lower, b.upper, b.large_rho_lower), (0.0, 0.5, 0.0));
        let b = conjecture_bounds(0.9).unwrap();
        assert!(close(b.upper, 8.1, 1e-12));
        assert!(close(b.large_rho_upper, 0.675 / 0.1f64.sqrt(), 1e-12));
        assert!(b.large_rho_applicable);
        assert!(!conjecture_bounds(0.999).unwrap().large_rho_applicable);
        assert!(conjecture_bounds(1.0).is_err());
        assert!(conjecture_bounds(0.0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for id in ClosedFormId::ALL {
            assert_eq!(id.name().parse::<ClosedFormId>().unwrap(), id);
        }
        let err = "mm13".parse::<ClosedFormId>().unwrap_err().to_string();
        assert!(err.contains("mm12star2-fgfs"));
    }
}
