//! The polynomial confining potential `V(x) = x + Σₖ tₖ xᵏ`, the weight
//! exponent α, and membership in the admissible parameter box.
//!
//! Deformation coefficients and α are stored as exact rationals so that the
//! same potential realizes identically at every working precision.

use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use std::fmt;

/// A Laguerre-type potential: deformation vector `t = (t₁, …, t_ν)` on top of
/// the linear confinement, plus the weight exponent α (> −1).
///
/// An empty `t` is the undeformed ensemble `V(x) = x`. A non-empty `t` must
/// have `t_ν > 0` (true degree with positive leading coefficient); trailing
/// zeros are rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    t: Vec<Rational>,
    alpha: Rational,
}

/// Parameters (𝒯, γ) of the admissible box: `|t| ≤ 𝒯` (Euclidean norm) and
/// `t_ν > γ·Σ_{j<ν} |t_j|`.
#[derive(Clone, Debug)]
pub struct DomainParams {
    pub cap: Rational,
    pub ratio: Rational,
}

impl Potential {
    pub fn new(t: Vec<Rational>, alpha: Rational) -> Result<Self> {
        if let Some(last) = t.last() {
            if *last <= 0 {
                return Err(Error::InvalidPotential(format!(
                    "leading coefficient t_{} must be positive (true degree, trailing zeros \
                     rejected); got {}",
                    t.len(),
                    last
                )));
            }
        }
        if alpha <= -1 {
            return Err(Error::InvalidPotential(format!(
                "alpha must exceed -1, got {alpha}"
            )));
        }
        Ok(Self { t, alpha })
    }

    /// The undeformed ensemble `V(x) = x` with weight exponent α.
    pub fn undeformed(alpha: Rational) -> Result<Self> {
        Self::new(Vec::new(), alpha)
    }

    /// Degree ν of the deformation (0 for the undeformed ensemble).
    pub fn nu(&self) -> usize {
        self.t.len()
    }

    pub fn t(&self) -> &[Rational] {
        &self.t
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    /// Parse a plain-text key-value block: `nu=2`, `t=0,0.1`, `alpha=0`.
    /// Keys may be separated by newlines or semicolons. `nu` is optional and,
    /// when present, must match the length of `t`; omitting `t` (or giving an
    /// empty list) selects the undeformed ensemble.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nu: Option<usize> = None;
        let mut t: Option<Vec<Rational>> = None;
        let mut alpha: Option<Rational> = None;
        for raw in text.split(|c| c == '\n' || c == ';') {
            let item = raw.trim();
            if item.is_empty() || item.starts_with('#') {
                continue;
            }
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::Parse(format!("expected key=value in potential block, got `{item}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "nu" => {
                    let v: usize = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("invalid nu `{value}`")))?;
                    nu = Some(v);
                }
                "t" => {
                    let mut coeffs = Vec::new();
                    if !value.is_empty() {
                        for part in value.split(',') {
                            coeffs.push(parse_decimal(part.trim())?);
                        }
                    }
                    t = Some(coeffs);
                }
                "alpha" => alpha = Some(parse_decimal(value)?),
                other => {
                    return Err(Error::Parse(format!(
                        "unknown key `{other}` in potential block"
                    )))
                }
            }
        }
        let t = t.unwrap_or_default();
        if let Some(nu) = nu {
            if nu != t.len() {
                return Err(Error::Parse(format!(
                    "nu={} does not match the {} coefficients given in t",
                    nu,
                    t.len()
                )));
            }
        }
        let alpha = alpha.unwrap_or_else(|| Rational::new());
        Self::new(t, alpha)
    }

    /// V(x) = x + Σₖ tₖ xᵏ at the precision of `ctx`.
    pub fn eval(&self, x: &Float, ctx: &PrecisionContext) -> Float {
        let mut acc = ctx.zero();
        for tk in self.t.iter().rev() {
            acc += ctx.from_rational(tk);
            acc *= x;
        }
        acc += x;
        acc
    }

    /// V'(x) = 1 + Σₖ k·tₖ x^(k−1).
    pub fn eval_prime(&self, x: &Float, ctx: &PrecisionContext) -> Float {
        let coeffs = self.vprime_coeffs(ctx);
        let mut acc = ctx.zero();
        for c in coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Coefficients c₀..c_{ν−1} of V'(y) = Σ cₖ yᵏ:
    /// c₀ = 1 + t₁ and cₖ = (k+1)·t_{k+1}.
    pub fn vprime_coeffs(&self, ctx: &PrecisionContext) -> Vec<Float> {
        let nu = self.t.len();
        let n = nu.max(1);
        let mut coeffs = Vec::with_capacity(n);
        let mut c0 = ctx.f(1);
        if nu >= 1 {
            c0 += ctx.from_rational(&self.t[0]);
        }
        coeffs.push(c0);
        for k in 1..nu {
            let mut c = ctx.from_rational(&self.t[k]);
            c *= (k + 1) as u32;
            coeffs.push(c);
        }
        coeffs
    }

    /// Membership in the box 𝕋(𝒯, γ): `|t| ≤ 𝒯` and `t_ν > γ·Σ_{j<ν}|t_j|`.
    /// Returns the verdict together with a report naming any failed
    /// inequality. The undeformed ensemble is trivially admissible.
    pub fn in_domain(&self, d: &DomainParams) -> (bool, String) {
        if self.t.is_empty() {
            return (true, "undeformed potential: trivially admissible".into());
        }
        let mut norm2 = Rational::new();
        for c in &self.t {
            norm2 += Rational::from(c * c);
        }
        let cap2 = Rational::from(&d.cap * &d.cap);
        let mut report = Vec::new();
        let mut ok = true;
        if norm2 > cap2 {
            ok = false;
            report.push(format!("|t|² = {} exceeds cap² = {}", norm2, cap2));
        }
        let lead = self.t.last().unwrap();
        let mut lower_sum = Rational::new();
        for c in &self.t[..self.t.len() - 1] {
            lower_sum += c.clone().abs();
        }
        let bound = Rational::from(&d.ratio * &lower_sum);
        if *lead <= bound {
            ok = false;
            report.push(format!(
                "leading coefficient {} is not above ratio·Σ|t_j| = {}",
                lead, bound
            ));
        }
        if ok {
            report.push("both box inequalities hold".into());
        }
        (ok, report.join("; "))
    }

    /// Canonical text form, also used as a cache key component.
    pub fn key(&self) -> String {
        let ts: Vec<String> = self.t.iter().map(|c| c.to_string()).collect();
        format!("t=[{}];alpha={}", ts.join(","), self.alpha)
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V(x) = x")?;
        for (k, tk) in self.t.iter().enumerate() {
            if *tk != 0 {
                write!(f, " + ({})·x^{}", tk, k + 1)?;
            }
        }
        write!(f, ", alpha = {}", self.alpha)
    }
}

/// Parse a decimal literal (`-0.125`, `3`, `1e-3`, `2.5e2`, or an exact
/// fraction `p/q`) into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if s.contains('/') {
        return s
            .parse::<Rational>()
            .map_err(|e| Error::Parse(format!("invalid fraction `{s}`: {e}")));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("invalid exponent in `{s}`")))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    let joined = format!("{int_part}{frac_part}");
    if joined.is_empty() || joined == "-" || joined == "+" {
        return Err(Error::Parse(format!("invalid number `{s}`")));
    }
    let num: Integer = joined
        .parse()
        .map_err(|_| Error::Parse(format!("invalid number `{s}`")))?;
    let shift = exp - frac_part.len() as i64;
    let mut r = Rational::from(num);
    let ten = Integer::from(10);
    let pow = ten.pow(shift.unsigned_abs() as u32);
    if shift >= 0 {
        r *= &pow;
    } else {
        r /= &pow;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    fn rat(s: &str) -> Rational {
        parse_decimal(s).unwrap()
    }

    #[test]
    fn undeformed_eval_is_identity() {
        let p = Potential::undeformed(Rational::new()).unwrap();
        let ctx = ctx();
        let v = p.eval(&ctx.f(3), &ctx);
        assert_eq!(v, 3);
    }

    #[test]
    fn quadratic_eval_and_derivative() {
        let p = Potential::new(vec![rat("0"), rat("0.1")], Rational::new()).unwrap();
        let ctx = ctx();
        let v = p.eval(&ctx.f(2), &ctx);
        let err = (v - ctx.from_rational(&rat("2.4"))).abs();
        assert!(err < ctx.pow10(-35));
        let d = p.eval_prime(&ctx.f(2), &ctx);
        let err = (d - ctx.from_rational(&rat("1.4"))).abs();
        assert!(err < ctx.pow10(-35));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = Potential::new(vec![rat("0.05"), rat("-0.01"), rat("0.2")], rat("0.5")).unwrap();
        let ctx = ctx();
        for xv in [0.3, 1.0, 4.5, 10.0] {
            let x = ctx.f(xv);
            let h = ctx.pow10(-12);
            let xp = ctx.f(&x) + &h;
            let xm = ctx.f(&x) - &h;
            let fd = (p.eval(&xp, &ctx) - p.eval(&xm, &ctx)) / (ctx.f(2) * &h);
            let d = p.eval_prime(&x, &ctx);
            // central difference truncation is O(h²)
            let err = (fd - d).abs();
            assert!(err < ctx.pow10(-20), "x={xv}");
        }
    }

    #[test]
    fn trailing_zero_rejected() {
        assert!(Potential::new(vec![rat("0.1"), rat("0")], Rational::new()).is_err());
        assert!(Potential::new(vec![rat("0"), rat("-0.1")], Rational::new()).is_err());
        assert!(Potential::new(vec![rat("0"), rat("0.1")], Rational::new()).is_ok());
    }

    #[test]
    fn alpha_floor_enforced() {
        assert!(Potential::new(vec![], rat("-1")).is_err());
        assert!(Potential::new(vec![], rat("-0.5")).is_ok());
    }

    #[test]
    fn domain_membership_examples() {
        let d = DomainParams {
            cap: rat("1"),
            ratio: rat("5"),
        };
        let p = Potential::new(vec![rat("0"), rat("0.1")], Rational::new()).unwrap();
        assert!(p.in_domain(&d).0);
        let p = Potential::new(vec![rat("0.5"), rat("0.1")], Rational::new()).unwrap();
        assert!(!p.in_domain(&d).0);
        let p = Potential::new(vec![rat("0"), rat("2")], Rational::new()).unwrap();
        assert!(!p.in_domain(&d).0);
    }

    #[test]
    fn domain_membership_monotone_in_cap() {
        let p = Potential::new(vec![rat("0"), rat("0.1")], Rational::new()).unwrap();
        let mut admitted = false;
        for cap in ["0.05", "0.1", "0.2", "1", "10"] {
            let d = DomainParams {
                cap: rat(cap),
                ratio: rat("5"),
            };
            let (ok, _) = p.in_domain(&d);
            assert!(!admitted || ok, "enlarging the cap flipped admission off");
            admitted = admitted || ok;
        }
        assert!(admitted);
    }

    #[test]
    fn parse_round_trip() {
        let p = Potential::parse("nu=2; t=0,0.1; alpha=0").unwrap();
        assert_eq!(p.nu(), 2);
        assert_eq!(p.t()[1], rat("0.1"));
        assert_eq!(*p.alpha(), Rational::new());

        let p = Potential::parse("alpha=0.5").unwrap();
        assert_eq!(p.nu(), 0);
        assert_eq!(*p.alpha(), rat("0.5"));

        assert!(Potential::parse("nu=3; t=0,0.1; alpha=0").is_err());
        assert!(Potential::parse("t=0,0").is_err());
        assert!(Potential::parse("what=1").is_err());
        assert!(Potential::parse("t=0,abc").is_err());
    }

    #[test]
    fn decimal_parser_exactness() {
        assert_eq!(rat("0.1"), Rational::from((1, 10)));
        assert_eq!(rat("-0.125"), Rational::from((-1, 8)));
        assert_eq!(rat("1e-3"), Rational::from((1, 1000)));
        assert_eq!(rat("2.5e2"), Rational::from(250));
        assert_eq!(rat("1/3"), Rational::from((1, 3)));
        assert!(parse_decimal("..").is_err());
        assert!(parse_decimal("").is_err());
    }
}
