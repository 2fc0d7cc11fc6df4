//! Dense univariate polynomials in the load `rho` with `f64` coefficients.
//!
//! Every closed form in this crate is a ratio of two such polynomials with
//! small integer coefficients, so products and derivatives stay exact in
//! double precision.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficients are stored lowest power first; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `c * rho^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Index and value of the lowest-order nonzero coefficient.
    pub fn lowest_term(&self) -> Option<(usize, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| **c != 0.0)
            .map(|(k, c)| (k, *c))
    }

    /// Index and value of the highest-order coefficient.
    pub fn leading_term(&self) -> Option<(usize, f64)> {
        self.degree().map(|d| (d, self.coeffs[d]))
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect::<Vec<_>>(),
        )
    }

    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::constant(1.0), |acc, _| &acc * self)
    }

    /// Divide out `rho^k` when the low `k` coefficients are zero.
    pub fn shift_down(&self, k: usize) -> Option<Poly> {
        if self.coeffs.iter().take(k).any(|c| *c != 0.0) {
            return None;
        }
        Some(Poly::new(self.coeffs.iter().skip(k).copied().collect::<Vec<_>>()))
    }

    /// True when `other == c * self` for some nonzero scalar `c`.
    pub fn is_proportional_to(&self, other: &Poly, rel_tol: f64) -> bool {
        let (Some((_, a)), Some((_, b))) = (self.leading_term(), other.leading_term()) else {
            return self.is_zero() && other.is_zero();
        };
        if self.coeffs.len() != other.coeffs.len() {
            return false;
        }
        let scale = b / a;
        let norm = other.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .all(|(x, y)| (x * scale - y).abs() <= rel_tol * norm)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0.0 {
                continue;
            }
            let sign = if *c < 0.0 { "-" } else { "+" };
            if first {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}r")?,
                _ => write!(f, "{a}r^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Poly, k: usize| p.coeffs.get(k).copied().unwrap_or(0.0);
        Poly::new((0..n).map(|k| get(self, k) + get(rhs, k)).collect::<Vec<_>>())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect::<Vec<_>>())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// Real roots of `p` inside `(lo, hi)`, located by sign changes on a
/// log-spaced scan and refined by bisection to `tol` in the argument.
pub fn positive_roots(p: &Poly, lo: f64, hi: f64, scan_points: usize, tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let (llo, lhi) = (lo.ln(), hi.ln());
    let at = |i: usize| (llo + (lhi - llo) * i as f64 / (scan_points - 1) as f64).exp();
    let mut x0 = at(0);
    let mut f0 = p.eval(x0);
    for i in 1..scan_points {
        let x1 = at(i);
        let f1 = p.eval(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            roots.push(bisect(p, x0, x1, tol));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

fn bisect(p: &Poly, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = p.eval(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
