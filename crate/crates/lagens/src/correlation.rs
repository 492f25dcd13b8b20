//! One-point correlation function and linear eigenvalue statistics.
//!
//! The density of states `ρ_N` is computed by two independent routes — the
//! orthonormal sum of squares and the Christoffel–Darboux form — which must
//! agree pointwise.  Linear statistics `∫ Θ ρ_N` reduce to Gauss quadrature
//! for the weight, making them exact for polynomial test functions.
//!
//! Every evaluation goes through MPFR floats, whose enormous exponent range
//! keeps `e^{−N V}` and the compensating growth of `p_k(x)²` representable
//! individually; the product is formed without any silent underflow to zero
//! for the arguments used here.

use crate::error::{Error, Result};
use crate::orthopoly::{stieltjes_recurrence, RecurrenceTable};
use crate::precision::PrecisionContext;
use rug::ops::CompleteRound;
use rug::Float;

/// A polynomially bounded test function for linear statistics.
pub struct LinearStatistic {
    theta: Box<dyn Fn(&Float, &PrecisionContext) -> Float + Send + Sync>,
    description: String,
    degree_hint: Option<u32>,
}

impl LinearStatistic {
    /// Wrap an evaluator.  `description` is used in diagnostics and output
    /// headers.  The evaluator must be defined on the whole positive axis
    /// and grow no faster than a polynomial.
    pub fn new(
        description: impl Into<String>,
        theta: impl Fn(&Float, &PrecisionContext) -> Float + Send + Sync + 'static,
    ) -> Self {
        Self {
            theta: Box::new(theta),
            description: description.into(),
            degree_hint: None,
        }
    }

    /// Declare the exact polynomial degree of the evaluator, making the
    /// first Gauss rule already exact.
    pub fn with_degree_hint(mut self, degree: u32) -> Self {
        self.degree_hint = Some(degree);
        self
    }

    /// Human-readable description.
    pub fn description(&self) -> &str {
        &self.description
    }

    /// Evaluate the test function.
    pub fn eval(&self, x: &Float, ctx: &PrecisionContext) -> Float {
        (self.theta)(x, ctx)
    }
}

impl std::fmt::Debug for LinearStatistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearStatistic")
            .field("description", &self.description)
            .field("degree_hint", &self.degree_hint)
            .finish()
    }
}

/// Orthonormal values `p_0(x) … p_top(x)` by one forward recurrence pass.
fn orthonormal_values(
    rec: &RecurrenceTable,
    top: usize,
    x: &Float,
    ctx: &PrecisionContext,
) -> Vec<Float> {
    let bits = ctx.bits();
    let mut out = Vec::with_capacity(top + 1);
    let mut prev = Float::new(bits);
    let mut cur = ctx.f(1);
    out.push((&cur * &rec.gamma()[0]).complete(bits));
    for k in 0..top {
        let xa = (x - &rec.a()[k]).complete(bits);
        let mut next = xa * &cur;
        if k > 0 {
            next -= rec.b()[k - 1].clone().square() * &prev;
        }
        prev = std::mem::replace(&mut cur, next);
        out.push((&cur * &rec.gamma()[k + 1]).complete(bits));
    }
    out
}

/// Validate the argument of a density evaluation, returning `Some(ρ)` when
/// the value is forced without touching the table.
fn trivial_density(rec: &RecurrenceTable, x: &Float, ctx: &PrecisionContext) -> Result<Option<Float>> {
    if *x < 0u32 {
        return Ok(Some(ctx.zero()));
    }
    if *x == 0u32 && *rec.spec().potential().alpha() < 0u32 {
        return Err(Error::Domain(
            "density at x = 0 diverges for negative alpha".into(),
        ));
    }
    Ok(None)
}

/// One-point function by the sum of squares:
/// `ρ_N(x) = (1/N) x^α e^{−N V(x)} Σ_{k<N} p_k(x)²`.
///
/// The table must cover degrees through `N − 1`.
pub fn rho_sum(rec: &RecurrenceTable, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if let Some(v) = trivial_density(rec, x, ctx)? {
        return Ok(v);
    }
    let n = rec.spec().n() as usize;
    if rec.nmax() < n - 1 {
        return Err(Error::OutOfRange(format!(
            "table reaches degree {} but the sum route needs {}",
            rec.nmax(),
            n - 1
        )));
    }
    let bits = ctx.bits();
    let values = orthonormal_values(rec, n - 1, x, ctx);
    let mut sum = Float::new(bits);
    for p in &values {
        sum += p.clone().square();
    }
    let w = rec.spec().weight(x, ctx);
    Ok(sum * w / rec.spec().n())
}

/// One-point function by the Christoffel–Darboux formula:
/// `ρ_N(x) = x^α e^{−N V(x)} [π_N'(x) π_{N−1}(x) − π_N(x) π_{N−1}'(x)] /
/// (N · norm2_{N−1})`.
///
/// The table must cover degrees through `N`.
pub fn rho_cd(rec: &RecurrenceTable, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if let Some(v) = trivial_density(rec, x, ctx)? {
        return Ok(v);
    }
    let n = rec.spec().n() as usize;
    if rec.nmax() < n {
        return Err(Error::OutOfRange(format!(
            "table reaches degree {} but the Christoffel–Darboux route needs {}",
            rec.nmax(),
            n
        )));
    }
    let bits = ctx.bits();
    // One forward pass carrying (π, π') for degrees N−1 and N.
    let mut prev = ctx.f(1);
    let mut prev_d = Float::new(bits);
    let mut cur = (x - &rec.a()[0]).complete(bits);
    let mut cur_d = ctx.f(1);
    if n == 0 {
        unreachable!("weight construction enforces N ≥ 1");
    }
    for k in 1..n {
        let xa = (x - &rec.a()[k]).complete(bits);
        let b2 = rec.b()[k - 1].clone().square();
        let next = (&xa * &cur).complete(bits) - (&b2 * &prev).complete(bits);
        let next_d = (&xa * &cur_d).complete(bits) + &cur - b2 * &prev_d;
        prev = std::mem::replace(&mut cur, next);
        prev_d = std::mem::replace(&mut cur_d, next_d);
    }
    // Now cur = π_N, prev = π_{N−1} (for N = 1: cur = π_1, prev = π_0).
    let wron = (&cur_d * &prev).complete(bits) - (&cur * &prev_d).complete(bits);
    let w = rec.spec().weight(x, ctx);
    let denom = (&rec.norm2()[n - 1] * rec.spec().n()).complete(bits);
    Ok(wron * w / denom)
}

/// Linear statistic `∫₀^∞ Θ(λ) ρ_N(λ) dλ` by Gauss quadrature for the
/// weight.
///
/// With an `m`-node rule the value is `(1/N) Σ_i W_i Θ(x_i) Σ_{k<N}
/// p_k(x_i)²`, exact when `Θ` is a polynomial of degree at most
/// `2m − 1 − 2(N−1)`.  Without a degree declaration the rule size doubles
/// until two successive sizes agree.
pub fn expect(
    stat: &LinearStatistic,
    rec: &RecurrenceTable,
    ctx: &PrecisionContext,
) -> Result<Float> {
    let n = rec.spec().n() as usize;
    let bits = ctx.bits();
    let start = match stat.degree_hint {
        Some(d) => n + (d as usize).div_ceil(2) + 1,
        None => n + 4,
    };
    let eval_at = |m: usize| -> Result<Float> {
        // The rule needs a table through degree m − 1; rebuild when the
        // supplied one is too short.
        let rule = if m <= rec.nmax() + 1 {
            rec.gauss_rule(m, ctx)?
        } else {
            let bigger = stieltjes_recurrence(rec.spec(), m - 1, ctx)?;
            bigger.gauss_rule(m, ctx)?
        };
        let mut acc = Float::new(bits);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let values = orthonormal_values(rec, n - 1, x, ctx);
            let mut kernel = Float::new(bits);
            for p in &values {
                kernel += p.clone().square();
            }
            acc += kernel * stat.eval(x, ctx) * w;
        }
        Ok(acc / rec.spec().n())
    };

    let mut m = start;
    let mut previous = eval_at(m)?;
    let tol_scale = ctx.pow10(-((ctx.digits() / 2) as i32));
    for _ in 0..6 {
        m *= 2;
        let refined = eval_at(m)?;
        let gap = (&refined - &previous).complete(bits).abs();
        let tol = (ctx.f(1) + refined.clone().abs()) * &tol_scale;
        if gap <= tol {
            return Ok(refined);
        }
        previous = refined;
    }
    Err(Error::QuadratureNonConvergence {
        nodes: m,
        previous: crate::precision::format_sig(&previous, 20),
        last: format!("linear statistic '{}' did not stabilize", stat.description),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::EquilibriumData;
    use crate::orthopoly::WeightSpec;
    use crate::potential::{parse_decimal, Potential};
    use rug::Rational;

    fn ctx(digits: u32) -> PrecisionContext {
        PrecisionContext::new(digits).unwrap()
    }

    fn rat(s: &str) -> Rational {
        parse_decimal(s).unwrap()
    }

    fn table(p: &Potential, n: u32, nmax: usize, c: &PrecisionContext) -> RecurrenceTable {
        let spec = WeightSpec::new(p.clone(), n).unwrap();
        stieltjes_recurrence(&spec, nmax, c).unwrap()
    }

    fn undeformed() -> Potential {
        Potential::new(vec![], rat("0")).unwrap()
    }

    fn quadratic() -> Potential {
        Potential::new(vec![rat("0"), rat("0.1")], rat("0")).unwrap()
    }

    #[test]
    fn single_eigenvalue_density_is_exponential() {
        let c = ctx(40);
        let rec = table(&undeformed(), 1, 2, &c);
        for xv in ["0.3", "1", "2"] {
            let x = c.from_rational(&rat(xv));
            let expect = (-x.clone()).exp();
            let s = rho_sum(&rec, &x, &c).unwrap();
            let d = rho_cd(&rec, &x, &c).unwrap();
            let es = (s - &expect).abs();
            let ed = (d - &expect).abs();
            assert!(es < c.pow10(-30), "sum at {}: {:e}", xv, es);
            assert!(ed < c.pow10(-30), "cd at {}: {:e}", xv, ed);
        }
    }

    #[test]
    fn routes_agree_on_a_grid_and_are_nonnegative() {
        let c = ctx(40);
        let tol = c.pow10(-((c.digits() / 3) as i32));
        let rec = table(&undeformed(), 10, 10, &c);
        // 50 interior points of (0, β) with β = 4.
        for i in 1..=50u32 {
            let x = c.f(4) * i / 51u32;
            let s = rho_sum(&rec, &x, &c).unwrap();
            let d = rho_cd(&rec, &x, &c).unwrap();
            assert!(s >= 0u32, "negative density at {}", i);
            let gap = (s - &d).abs();
            assert!(gap < tol, "route gap {:e} at point {}", gap, i);
        }
        // Outside the support and at the origin both routes still agree.
        for x in [c.f(-1), c.zero(), c.f(5)] {
            let s = rho_sum(&rec, &x, &c).unwrap();
            let d = rho_cd(&rec, &x, &c).unwrap();
            let gap = (s.clone() - &d).abs();
            assert!(gap < tol);
            assert!(s >= 0u32);
        }
    }

    #[test]
    fn normalization_and_first_moments() {
        let c = ctx(40);
        let one = LinearStatistic::new("1", |_, c| c.f(1)).with_degree_hint(0);
        let lambda = LinearStatistic::new("x", |x, _| x.clone()).with_degree_hint(1);
        for (p, n) in [(undeformed(), 1u32), (undeformed(), 5), (quadratic(), 6)] {
            let rec = table(&p, n, n as usize, &c);
            let norm = expect(&one, &rec, &c).unwrap();
            let err = (norm - 1u32).abs();
            assert!(err < c.pow10(-13), "normalization N={} err {:e}", n, err);
        }
        // Θ = λ at N=1, t=0: ∫ λ e^{−λ} dλ = 1.
        let rec = table(&undeformed(), 1, 2, &c);
        let mean = expect(&lambda, &rec, &c).unwrap();
        let err = (mean - 1u32).abs();
        assert!(err < c.pow10(-30), "gamma-integral mean err {:e}", err);
    }

    #[test]
    fn second_moment_approaches_equilibrium_value() {
        let c = ctx(40);
        let sq = LinearStatistic::new("x^2", |x, _| x.clone().square()).with_degree_hint(2);
        // The deformed weight has genuine finite-N corrections, so the
        // linear statistic approaches ∫λ²ψ at the 1/N² rate.
        let p = quadratic();
        let eq = EquilibriumData::solve(&p, &c).unwrap();
        let m2 = eq.equilibrium_moment(2, &c).unwrap();
        let mut errors = Vec::new();
        for n in [4u32, 8, 16] {
            let rec = table(&p, n, n as usize, &c);
            let v = expect(&sq, &rec, &c).unwrap();
            errors.push((v - &m2).abs());
        }
        for i in 0..2 {
            let ratio = errors[i].clone() / &errors[i + 1];
            assert!(
                ratio > c.f(2.5),
                "error did not shrink like 1/N² at step {i}: ratio {:e}",
                ratio
            );
        }
        assert!(errors[2] < c.pow10(-3));
    }

    #[test]
    fn undeformed_polynomial_moments_are_exact_at_finite_n() {
        // At t = 0 the first two averaged moments carry no finite-N
        // correction at all: (1/N)·tr J = 1 and (1/N)·tr J² = 2 identically,
        // because the recurrence entries are linear/quadratic in the index
        // and the sums telescope.
        let c = ctx(40);
        let mean = LinearStatistic::new("x", |x, _| x.clone()).with_degree_hint(1);
        let sq = LinearStatistic::new("x^2", |x, _| x.clone().square()).with_degree_hint(2);
        for n in [3u32, 8] {
            let rec = table(&undeformed(), n, n as usize + 1, &c);
            let m1 = expect(&mean, &rec, &c).unwrap();
            let m2 = expect(&sq, &rec, &c).unwrap();
            assert!((m1 - 1u32).abs() < c.pow10(-30));
            assert!((m2 - 2u32).abs() < c.pow10(-30));
        }
    }

    #[test]
    fn adaptive_rule_handles_transcendental_statistic() {
        let c = ctx(40);
        // Θ = e^{−λ} at N=1, t=0: ∫ e^{−2λ} dλ = 1/2.
        let decay = LinearStatistic::new("exp(-x)", |x, _| (-x.clone()).exp());
        let rec = table(&undeformed(), 1, 2, &c);
        let v = expect(&decay, &rec, &c).unwrap();
        let err = (v - c.from_rational(&rat("0.5"))).abs();
        assert!(err < c.pow10(-18), "transcendental statistic err {:e}", err);
    }

    #[test]
    fn density_decays_beyond_the_endpoint() {
        let c = ctx(40);
        let rec = table(&undeformed(), 20, 20, &c);
        let x = c.f(7); // β + 3
        let v = rho_cd(&rec, &x, &c).unwrap();
        assert!(v > 0u32);
        assert!(v < c.pow10(-6), "tail value {:e}", v);
    }

    #[test]
    fn bulk_density_converges_to_equilibrium() {
        let c = ctx(40);
        for p in [undeformed(), quadratic()] {
            let eq = EquilibriumData::solve(&p, &c).unwrap();
            let mut sups = Vec::new();
            for n in [10u32, 20, 40] {
                let rec = table(&p, n, n as usize, &c);
                let mut sup = c.zero();
                // Middle third of the support.
                for i in 0..12u32 {
                    let frac = (c.f(1) + c.f(i) / 11u32) / 3u32;
                    let x = eq.beta() * frac;
                    let rho = rho_cd(&rec, &x, &c).unwrap();
                    let gap = (rho - eq.density(&x, &c)).abs();
                    if gap > sup {
                        sup = gap;
                    }
                }
                sups.push(sup);
            }
            assert!(sups[1] < sups[0], "no bulk improvement 10→20");
            assert!(sups[2] < sups[1], "no bulk improvement 20→40");
        }
    }

    #[test]
    fn table_length_preconditions_are_enforced() {
        let c = ctx(40);
        let rec = table(&undeformed(), 6, 4, &c);
        assert!(matches!(
            rho_sum(&rec, &c.f(1), &c),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            rho_cd(&rec, &c.f(1), &c),
            Err(Error::OutOfRange(_))
        ));
        // Negative arguments are simply outside the support.
        let rec = table(&undeformed(), 2, 2, &c);
        assert_eq!(rho_sum(&rec, &c.f(-3), &c).unwrap(), 0u32);
    }
}
