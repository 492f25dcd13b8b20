use crate::error::{Error, Result};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

/// Bits of binary precision per decimal digit (log₂ 10), rounded up a little.
const LOG2_10: f64 = 3.321928094887362;

/// Guard bits added on top of the requested decimal precision so that long
/// accumulations (quadrature sums with thousands of terms, Cholesky sweeps)
/// do not eat into the advertised digits.
const GUARD_BITS: u32 = 64;

/// Explicit precision state threaded through every computation.
///
/// `digits` is the advertised decimal working precision, `quad_target` the
/// absolute tolerance quadrature routines aim for, and `max_nodes` the budget
/// any single adaptive rule may spend before giving up.
#[derive(Clone, Debug)]
pub struct PrecisionContext {
    digits: u32,
    bits: u32,
    quad_target_exp: i32,
    max_nodes: usize,
}

impl PrecisionContext {
    /// A context with `digits` decimal digits, quadrature tolerance
    /// `10^(−digits+10)`, and a default node budget.
    pub fn new(digits: u32) -> Result<Self> {
        Self::with_quad_target(digits, 10 - digits as i32)
    }

    /// A context with an explicit quadrature tolerance `10^quad_target_exp`.
    pub fn with_quad_target(digits: u32, quad_target_exp: i32) -> Result<Self> {
        if digits < 30 {
            return Err(Error::InvalidPrecision(format!(
                "digits must be at least 30, got {digits}"
            )));
        }
        if quad_target_exp < 10 - digits as i32 {
            return Err(Error::InvalidPrecision(format!(
                "quadrature tolerance 10^{quad_target_exp} is not achievable at {digits} digits; \
                 the floor is 10^{}",
                10 - digits as i32
            )));
        }
        let bits = (digits as f64 * LOG2_10).ceil() as u32 + GUARD_BITS;
        Ok(Self {
            digits,
            bits,
            quad_target_exp,
            max_nodes: 1 << 21,
        })
    }

    /// Same context with a different node budget.
    pub fn with_max_nodes(mut self, max_nodes: usize) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary working precision (digits converted to bits plus guard bits).
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn max_nodes(&self) -> usize {
        self.max_nodes
    }

    /// The absolute quadrature tolerance as a float.
    pub fn quad_target(&self) -> Float {
        self.pow10(self.quad_target_exp)
    }

    pub fn quad_target_exp(&self) -> i32 {
        self.quad_target_exp
    }

    /// A fresh zero at working precision.
    pub fn zero(&self) -> Float {
        Float::new(self.bits)
    }

    /// Lift any value rug can convert (integers, f64, &Float, …).
    pub fn f<T>(&self, value: T) -> Float
    where
        Float: rug::ops::AssignRound<T, Round = rug::float::Round, Ordering = std::cmp::Ordering>,
    {
        Float::with_val(self.bits, value)
    }

    /// Lift an exact rational to working precision.
    pub fn from_rational(&self, r: &Rational) -> Float {
        Float::with_val(self.bits, r)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }

    pub fn ln2(&self) -> Float {
        Float::with_val(self.bits, Constant::Log2)
    }

    pub fn euler_gamma(&self) -> Float {
        Float::with_val(self.bits, Constant::Euler)
    }

    /// `10^e` at working precision.
    pub fn pow10(&self, e: i32) -> Float {
        Float::with_val(self.bits, 10u32).pow(e)
    }

    /// A context identical to this one but with `extra` more decimal digits
    /// (used internally to absorb known cancellation).
    pub fn widened(&self, extra: u32) -> Self {
        let digits = self.digits + extra;
        let bits = (digits as f64 * LOG2_10).ceil() as u32 + GUARD_BITS;
        Self {
            digits,
            bits,
            quad_target_exp: self.quad_target_exp,
            max_nodes: self.max_nodes,
        }
    }

    /// Round a value computed at (possibly wider) precision down to this
    /// context's working precision.
    pub fn settle(&self, x: Float) -> Float {
        let mut out = Float::new(self.bits);
        out += x;
        out
    }
}

/// Deterministic decimal rendering with `digits` significant digits in
/// scientific notation. Two runs at equal precision produce byte-identical
/// strings.
pub fn format_sig(x: &Float, digits: u32) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x.is_sign_positive() { "inf" } else { "-inf" }.to_string();
    }
    // rug's exponential formatting interprets the precision as the total
    // number of significant digits
    format!("{:.*e}", digits.max(1) as usize, x)
}
