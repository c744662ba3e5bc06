//! Arithmetic backends for network and polynomial evaluation.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

/// Real arithmetic used by evaluators. Weights are always `f64`; the
/// accumulator type decides the working precision.
pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn relu(self) -> Self {
        if self > Self::zero() {
            self
        } else {
            Self::zero()
        }
    }

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }

    /// Unit roundoff of the representation.
    fn epsilon() -> f64;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn epsilon() -> f64 {
        f64::EPSILON / 2.0
    }
}

impl Scalar for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }

    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }

    fn epsilon() -> f64 {
        // 2^-104, conservative for the non-IEEE double-double operations
        4.930380657631324e-32
    }
}

/// Working precision for measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    F64,
    #[default]
    DoubleDouble,
}

impl Precision {
    pub fn epsilon(self) -> f64 {
        match self {
            Precision::F64 => <f64 as Scalar>::epsilon(),
            Precision::DoubleDouble => <TwoFloat as Scalar>::epsilon(),
        }
    }
}
