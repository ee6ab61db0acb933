use std::cmp::Ordering;
use std::fmt;

/// A signed real stored as `sign * exp(ln_abs)`.
///
/// Audit margins can exceed the `f64` range by thousands of orders of
/// magnitude, so they are kept in log form. Zero has `ln_abs = -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margin {
    pub negative: bool,
    pub ln_abs: f64,
}

impl Margin {
    pub const ZERO: Margin = Margin { negative: false, ln_abs: f64::NEG_INFINITY };
    /// Stand-in for a margin that could not be evaluated.
    pub const NEG_INFINITY: Margin = Margin { negative: true, ln_abs: f64::INFINITY };

    /// `value * exp(ln_scale)`.
    pub fn from_scaled(value: f64, ln_scale: f64) -> Self {
        if value.is_nan() || ln_scale.is_nan() {
            return Self::NEG_INFINITY;
        }
        if value == 0.0 {
            return Self::ZERO;
        }
        Margin { negative: value < 0.0, ln_abs: value.abs().ln() + ln_scale }
    }

    pub fn from_f64(value: f64) -> Self {
        Self::from_scaled(value, 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.negative
    }

    /// Nearest `f64`, saturating to infinity.
    pub fn to_f64(&self) -> f64 {
        let m = self.ln_abs.exp();
        if self.negative {
            -m
        } else {
            m
        }
    }

    /// Multiplies by `exp(ln_factor)`.
    pub fn rescale(&self, ln_factor: f64) -> Self {
        if self.ln_abs == f64::NEG_INFINITY {
            return *self;
        }
        Margin { negative: self.negative, ln_abs: self.ln_abs + ln_factor }
    }
}

impl PartialOrd for Margin {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let zero_a = self.ln_abs == f64::NEG_INFINITY;
        let zero_b = other.ln_abs == f64::NEG_INFINITY;
        let sa = if zero_a {
            0
        } else if self.negative {
            -1
        } else {
            1
        };
        let sb = if zero_b {
            0
        } else if other.negative {
            -1
        } else {
            1
        };
        match sa.cmp(&sb) {
            Ordering::Equal => match sa {
                0 => Some(Ordering::Equal),
                1 => self.ln_abs.partial_cmp(&other.ln_abs),
                _ => other.ln_abs.partial_cmp(&self.ln_abs),
            },
            o => Some(o),
        }
    }
}

impl fmt::Display for Margin {
    /// Scientific notation, also beyond the `f64` exponent range.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ln_abs == f64::NEG_INFINITY {
            return write!(f, "0");
        }
        if self.ln_abs == f64::INFINITY {
            return write!(f, "{}inf", if self.negative { "-" } else { "" });
        }
        let e10 = self.ln_abs / std::f64::consts::LN_10;
        let mut exp = e10.floor();
        let mut mant = 10f64.powf(e10 - exp);
        if mant >= 9.9999995 {
            mant /= 10.0;
            exp += 1.0;
        }
        write!(f, "{}{:.6}e{}", if self.negative { "-" } else { "" }, mant, exp as i64)
    }
}

/// `(lhs - rhs) / (|lhs| + |rhs|)`, with `0/0` read as `1`.
pub fn relative_margin(lhs: f64, rhs: f64) -> f64 {
    let d = lhs.abs() + rhs.abs();
    if d == 0.0 {
        1.0
    } else {
        (lhs - rhs) / d
    }
}
