//! Forward-mode dual numbers with a fixed partial capacity.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Upper bound on simultaneously seeded variables (all of `(q, v)` for a
/// ten-dimensional chart).
pub const MAX_PARTIALS: usize = 20;

/// Value plus first partial derivatives with respect to seeded variables.
///
/// A constant carries `len == 0`; binary operations widen to the longer
/// operand, missing slots read as zero.
#[derive(Clone, Copy, PartialEq)]
pub struct DualScalar {
    value: f64,
    len: usize,
    partials: [f64; MAX_PARTIALS],
}

impl fmt::Debug for DualScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DualScalar").field("value", &self.value).field("partials", &self.partials()).finish()
    }
}

impl DualScalar {
    pub fn constant(value: f64) -> Self {
        DualScalar { value, len: 0, partials: [0.0; MAX_PARTIALS] }
    }

    /// Independent variable occupying partial slot `slot` of `width`.
    pub fn variable(value: f64, slot: usize, width: usize) -> Self {
        assert!(width <= MAX_PARTIALS, "at most {MAX_PARTIALS} seeds supported");
        assert!(slot < width);
        let mut partials = [0.0; MAX_PARTIALS];
        partials[slot] = 1.0;
        DualScalar { value, len: width, partials }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn partials(&self) -> &[f64] {
        &self.partials[..self.len]
    }

    /// Partial in `slot`, zero when the slot was never seeded.
    pub fn partial(&self, slot: usize) -> f64 {
        if slot < self.len {
            self.partials[slot]
        } else {
            0.0
        }
    }

    fn has_partials(&self) -> bool {
        self.partials().iter().any(|d| *d != 0.0)
    }

    /// Chain rule for a unary function with derivative `slope` at `self`.
    fn chain(self, value: f64, slope: f64) -> Self {
        let mut out = DualScalar { value, len: self.len, partials: [0.0; MAX_PARTIALS] };
        for i in 0..self.len {
            out.partials[i] = slope * self.partials[i];
        }
        out
    }

    fn combine(self, rhs: Self, value: f64, ds: f64, dr: f64) -> Self {
        let len = self.len.max(rhs.len);
        let mut out = DualScalar { value, len, partials: [0.0; MAX_PARTIALS] };
        for i in 0..len {
            out.partials[i] = ds * self.partials[i] + dr * rhs.partials[i];
        }
        out
    }
}

impl Add for DualScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.combine(rhs, self.value + rhs.value, 1.0, 1.0)
    }
}

impl Sub for DualScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.combine(rhs, self.value - rhs.value, 1.0, -1.0)
    }
}

impl Mul for DualScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.combine(rhs, self.value * rhs.value, rhs.value, self.value)
    }
}

impl Div for DualScalar {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.value;
        self.combine(rhs, self.value * inv, inv, -self.value * inv * inv)
    }
}

impl Neg for DualScalar {
    type Output = Self;
    fn neg(self) -> Self {
        self.chain(-self.value, -1.0)
    }
}

/// Arithmetic needed by the expression evaluator.
///
/// Domain checks live in the evaluator, which inspects [`Scalar::value`]
/// before calling the partial functions here.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn value(&self) -> f64;
    /// Whether the scalar carries any nonzero derivative information.
    fn is_varying(&self) -> bool;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    /// `self^exponent`; callers guarantee the pair is in the real domain.
    fn pow(self, exponent: Self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn is_varying(&self) -> bool {
        false
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn pow(self, exponent: Self) -> Self {
        self.powf(exponent)
    }
}

impl Scalar for DualScalar {
    fn from_f64(v: f64) -> Self {
        DualScalar::constant(v)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn is_varying(&self) -> bool {
        self.has_partials()
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn tan(self) -> Self {
        let t = self.value.tan();
        self.chain(t, 1.0 + t * t)
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn abs(self) -> Self {
        let sign = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.value.abs(), sign)
    }
    fn pow(self, exponent: Self) -> Self {
        let value = self.value.powf(exponent.value);
        let d_base = if exponent.value == 0.0 { 0.0 } else { exponent.value * self.value.powf(exponent.value - 1.0) };
        let d_exp = if exponent.has_partials() { value * self.value.ln() } else { 0.0 };
        self.combine(exponent, value, d_base, d_exp)
    }
}
