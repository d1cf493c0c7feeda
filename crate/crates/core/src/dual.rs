//! Forward-mode dual numbers over the four strategy coordinates.
//!
//! The learning vector field is a rational function of `(xC, xD, yC, yD)`,
//! so pushing [`Dual4`] values through the same generic code that evaluates
//! it on `f64` yields the Jacobian to rounding precision. Finite differences
//! lose about half the significant digits, which is enough to blur the two
//! neutral eigenvalues into small genuine ones near the strategy box faces.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Minimal arithmetic needed by the field and payoff-gap formulas.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(value: f64) -> Self;
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn constant(value: f64) -> Self {
        value
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }
}

/// A value together with its gradient with respect to four seed variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual4 {
    pub re: f64,
    pub grad: [f64; 4],
}

impl Dual4 {
    /// Independent variable number `index` (0..4) with value `re`.
    pub fn variable(re: f64, index: usize) -> Self {
        let mut grad = [0.0; 4];
        grad[index] = 1.0;
        Self { re, grad }
    }

    fn map_grad(self, other: Self, f: impl Fn(f64, f64) -> f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = f(self.grad[k], other.grad[k]);
        }
        out
    }
}

impl Add for Dual4 {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            grad: self.map_grad(rhs, |a, b| a + b),
        }
    }
}

impl Sub for Dual4 {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re - rhs.re,
            grad: self.map_grad(rhs, |a, b| a - b),
        }
    }
}

impl Mul for Dual4 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.re, rhs.re);
        Self {
            re: a * b,
            grad: self.map_grad(rhs, |da, db| da * b + a * db),
        }
    }
}

impl Div for Dual4 {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let (a, b) = (self.re, rhs.re);
        let b2 = b * b;
        Self {
            re: a / b,
            grad: self.map_grad(rhs, |da, db| (da * b - a * db) / b2),
        }
    }
}

impl Neg for Dual4 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            grad: self.grad.map(|g| -g),
        }
    }
}

impl Scalar for Dual4 {
    #[inline]
    fn constant(value: f64) -> Self {
        Self {
            re: value,
            grad: [0.0; 4],
        }
    }

    #[inline]
    fn value(&self) -> f64 {
        self.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_rule() {
        // f(a, b) = a*b / (1 - a) at (0.3, 0.6)
        let a = Dual4::variable(0.3, 0);
        let b = Dual4::variable(0.6, 1);
        let f = a * b / (Dual4::constant(1.0) - a);
        assert!((f.re - 0.18 / 0.7).abs() < 1e-15);
        // df/da = b / (1-a)^2, df/db = a / (1-a)
        assert!((f.grad[0] - 0.6 / 0.49).abs() < 1e-14);
        assert!((f.grad[1] - 0.3 / 0.7).abs() < 1e-15);
        assert_eq!(f.grad[2], 0.0);
    }

    #[test]
    fn negation_flips_gradient() {
        let x = -Dual4::variable(2.0, 3);
        assert_eq!(x.re, -2.0);
        assert_eq!(x.grad, [0.0, 0.0, 0.0, -1.0]);
    }
}
