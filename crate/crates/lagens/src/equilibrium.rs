//! Equilibrium measure for Laguerre-type potentials on `[0, ∞)`.
//!
//! For a one-cut regular potential the equilibrium measure is supported on a
//! single interval `[0, β]` and has density
//!
//! ```text
//! ψ(x) = (1/2π) √((β − x)/x) · h(x),
//! ```
//!
//! where `h` is a polynomial of degree `ν − 1` with `h > 0` on `[0, β]`.
//! The endpoint `β` is pinned down by the normalization of the density, and
//! both `β` and the coefficients of `h` admit closed forms in terms of the
//! potential's coefficients.  This module computes those, the log-potential
//! `g`, the phase function `ξ`, the Lagrange multiplier `l_V`, and a fully
//! independent symmetrized cross-check on `[−β̃, β̃]`.

use crate::error::{Error, Result};
use crate::numerics::quad::{quad_endpoint, quad_tanh_sinh};
use crate::potential::Potential;
use crate::precision::PrecisionContext;
use rug::ops::CompleteRound;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

/// Which side of the real axis a boundary value is taken from.
///
/// `g` and `ξ` are analytic off `[0, ∞)` and real on `(β, ∞)`; on the cut
/// `(−∞, β)` they have different boundary values from above and below.  All
/// evaluators here take the limit from the upper half-plane; requiring the
/// caller to say so keeps call sites honest about which branch they get.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Boundary value from the upper half-plane (`Im z → 0⁺`).
    Above,
}

/// Binomial coefficient `C(n, k)` as an exact integer.
fn binom(n: u32, k: u32) -> Integer {
    Integer::from(n).binomial(k)
}

/// Harmonic number `H_n = 1 + 1/2 + … + 1/n` as an exact rational.
fn harmonic(n: u32) -> Rational {
    let mut h = Rational::new();
    for j in 1..=n {
        h += Rational::from((1u32, j));
    }
    h
}

/// Evaluate a polynomial with `Float` coefficients by Horner's rule.
///
/// Coefficients are in increasing-degree order.  The result carries the
/// precision of `x`.
pub(crate) fn poly_eval(coeffs: &[Float], x: &Float) -> Float {
    let prec = x.prec();
    let mut acc = Float::new(prec);
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

/// Derivative coefficients of a polynomial in increasing-degree order.
fn poly_derivative(coeffs: &[Float], ctx: &PrecisionContext) -> Vec<Float> {
    if coeffs.len() <= 1 {
        return vec![ctx.zero()];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * Float::with_val(c.prec(), k))
        .collect()
}

/// The coefficient `A_j = C(2j, j) (β/4)^j` appearing in endpoint sums.
fn a_coeff(j: u32, beta: &Float) -> Float {
    let bits = beta.prec();
    let q = (beta >> 2u32).complete(bits);
    q.pow(j) * binom(2 * j, j)
}

/// Scan geometrically for a sign change of `f`, starting from `lo` and
/// doubling until `cap`.  Returns the bracketing pair.
fn bracket_scan(
    mut f: impl FnMut(&Float) -> Float,
    lo: f64,
    cap: f64,
    ctx: &PrecisionContext,
) -> Result<(Float, Float)> {
    let mut a = ctx.f(lo);
    let mut fa = f(&a);
    if fa == 0u32 {
        return Ok((a.clone(), a));
    }
    let mut b = a.clone();
    loop {
        b = (&b << 1u32).complete(ctx.bits());
        if b > cap {
            return Err(Error::RootFinding(format!(
                "no sign change in [{:e}, {:e}] (scanned geometrically)",
                lo, cap
            )));
        }
        let fb = f(&b);
        if fb == 0u32 {
            return Ok((b.clone(), b));
        }
        if (fa < 0u32) != (fb < 0u32) {
            return Ok((a, b));
        }
        a = b.clone();
        fa = fb;
    }
}

/// Illinois variant of false position on a bracketing pair.
///
/// Keeps the bracket valid at every step and halves the retained function
/// value when the same side repeats, which restores superlinear convergence
/// on convex residuals.  Stops when the bracket width is below
/// `max(|hi|, 1) · 10^{-(digits+5)}`.
fn illinois_root(
    mut f: impl FnMut(&Float) -> Float,
    bracket: (Float, Float),
    ctx: &PrecisionContext,
) -> Result<Float> {
    let (mut lo, mut hi) = bracket;
    if lo == hi {
        return Ok(lo);
    }
    let mut flo = f(&lo);
    let mut fhi = f(&hi);
    if flo == 0u32 {
        return Ok(lo);
    }
    if fhi == 0u32 {
        return Ok(hi);
    }
    if (flo < 0u32) == (fhi < 0u32) {
        return Err(Error::RootFinding(
            "bracket endpoints have the same sign".into(),
        ));
    }
    let tol = {
        let mut scale = hi.clone().abs();
        if scale < 1u32 {
            scale = ctx.f(1);
        }
        scale * ctx.pow10(-(ctx.digits() as i32 + 5))
    };
    // Which side was retained on the previous step: -1 = lo, +1 = hi, 0 = none.
    let mut retained = 0i8;
    for _ in 0..2000 {
        let width = (&hi - &lo).complete(ctx.bits());
        if width.clone().abs() <= tol {
            return Ok((lo + hi) / 2u32);
        }
        let denom = (&fhi - &flo).complete(ctx.bits());
        let mut x = if denom == 0u32 {
            (&lo + &hi).complete(ctx.bits()) / 2u32
        } else {
            (&lo * &fhi).complete(ctx.bits()) / &denom - (&hi * &flo).complete(ctx.bits()) / &denom
        };
        // Keep the iterate strictly inside; fall back to bisection otherwise.
        if !(x > lo && x < hi) {
            x = (&lo + &hi).complete(ctx.bits()) / 2u32;
        }
        let fx = f(&x);
        if fx == 0u32 {
            return Ok(x);
        }
        if (fx < 0u32) == (flo < 0u32) {
            lo = x;
            flo = fx;
            if retained == 1 {
                fhi >>= 1u32;
            }
            retained = 1;
        } else {
            hi = x;
            fhi = fx;
            if retained == -1 {
                flo >>= 1u32;
            }
            retained = -1;
        }
    }
    Err(Error::RootFinding(
        "false-position iteration did not converge".into(),
    ))
}

/// Coefficients `c_k` of `V'(x) = Σ_k c_k x^k` for the given potential,
/// at the context precision.
fn vprime_coefficients(potential: &Potential, ctx: &PrecisionContext) -> Vec<Float> {
    potential.vprime_coeffs(ctx)
}

/// Endpoint residual `R(b) = ∫₀ᵇ V'(x) √(x/(b−x)) dx − 2π` in closed form.
///
/// With `V'(x) = Σ c_k x^k` the integral is `Σ_k c_k b^{k+1} π C(2k+2, k+1) /
/// 4^{k+1}`, so the residual is a polynomial in `b` minus `2π`; its smallest
/// positive root is the endpoint.
pub(crate) fn endpoint_residual(cprime: &[Float], b: &Float, ctx: &PrecisionContext) -> Float {
    let bits = ctx.bits();
    let mut sum = Float::new(bits);
    for (k, c) in cprime.iter().enumerate() {
        let k = k as u32;
        let coeff = Rational::from((binom(2 * k + 2, k + 1), Integer::from(4u32).pow(k + 1)));
        let term = b.clone().pow(k + 1) * c;
        sum += term * ctx.from_rational(&coeff);
    }
    sum *= ctx.pi();
    sum - (ctx.pi() << 1u32)
}

/// Solve for the endpoint `β` given derivative coefficients, without
/// re-deriving them from a [`Potential`].  Shared by [`solve_endpoint`] and
/// the path-integral oracle in the asymptotics module.
pub(crate) fn endpoint_from_vprime(cprime: &[Float], ctx: &PrecisionContext) -> Result<Float> {
    // Scale cap inversely with the size of the coefficients: a large
    // perturbation pulls the endpoint in, never pushes it out much past the
    // unperturbed value.
    let mut t_scale = 1.0f64;
    let mut sum_abs = 0.0f64;
    for c in cprime {
        sum_abs += c.to_f64().abs();
    }
    if sum_abs > t_scale {
        t_scale = sum_abs;
    }
    let cap = 64.0 / t_scale;
    let bracket = bracket_scan(|b| endpoint_residual(cprime, b, ctx), 1e-6, cap, ctx)?;
    illinois_root(|b| endpoint_residual(cprime, b, ctx), bracket, ctx)
}

/// Solve the endpoint equation `∫₀^β V'(x) √(x/(β−x)) dx = 2π` for `β`.
///
/// The root is located by a geometric bracket scan followed by a safeguarded
/// false-position refinement, and the returned value is verified a
/// posteriori by evaluating the defining integral with endpoint-singular
/// quadrature.
pub fn solve_endpoint(potential: &Potential, ctx: &PrecisionContext) -> Result<Float> {
    let wctx = ctx.widened(10);
    let cprime = vprime_coefficients(potential, &wctx);
    let beta = endpoint_from_vprime(&cprime, &wctx)?;

    // A-posteriori check through an independent evaluation of the integral.
    let zero = ctx.zero();
    let beta_check = ctx.settle(beta.clone());
    let cprime_check = vprime_coefficients(potential, ctx);
    let integral = quad_endpoint(
        |x, dxa, dxb| {
            let ratio = (dxa / dxb).complete(x.prec()).sqrt();
            poly_eval(&cprime_check, x) * ratio
        },
        &zero,
        &beta_check,
        (0.5, -0.5),
        ctx,
    )?;
    let residual = (integral - (ctx.pi() << 1u32)).abs();
    if residual > ctx.quad_target() {
        return Err(Error::PrecisionLoss(format!(
            "endpoint residual {} exceeds quadrature target",
            crate::precision::format_sig(&residual, 3)
        )));
    }
    Ok(ctx.settle(beta))
}

/// Coefficients of `h` given derivative coefficients and the endpoint.
/// Shared by [`compute_h`] and the asymptotics path oracle.
pub(crate) fn h_from_vprime(cprime: &[Float], beta: &Float, ctx: &PrecisionContext) -> Vec<Float> {
    let n = cprime.len();
    let mut h = vec![Float::new(ctx.bits()); n];
    for (i, hi) in h.iter_mut().enumerate() {
        for (k, c) in cprime.iter().enumerate().skip(i) {
            let j = (k - i) as u32;
            *hi += c * a_coeff(j, beta);
        }
    }
    h
}

/// Compute the coefficients of the polynomial factor `h` in the equilibrium
/// density, in increasing-degree order.
///
/// `h` is the polynomial part of `√(z/(z−β)) V'(z)` at infinity; expanding
/// the square root in inverse powers of `z` gives
/// `h_i = Σ_{k ≥ i} c_k C(2(k−i), k−i) (β/4)^{k−i}`
/// where `c_k` are the coefficients of `V'`.
pub fn compute_h(potential: &Potential, beta: &Float, ctx: &PrecisionContext) -> Vec<Float> {
    let wctx = ctx.widened(10);
    let cprime = vprime_coefficients(potential, &wctx);
    let wbeta = wctx.f(0) + beta;
    h_from_vprime(&cprime, &wbeta, &wctx)
        .into_iter()
        .map(|c| ctx.settle(c))
        .collect()
}

/// Moment `∫ x^l ψ(x) dx` in closed form from the coefficients of `h`.
///
/// Uses `∫₀^β x^m √((β−x)/x) dx = π β^{m+1} C(2m, m) / (2 (m+1) 4^m)`.
pub(crate) fn moment_from_h(
    h_coeffs: &[Float],
    beta: &Float,
    l: u32,
    ctx: &PrecisionContext,
) -> Float {
    let bits = ctx.bits();
    let mut sum = Float::new(bits);
    for (j, hj) in h_coeffs.iter().enumerate() {
        let m = l + j as u32;
        let kappa = Rational::from((
            binom(2 * m, m),
            Integer::from(2u32) * (m + 1) * Integer::from(4u32).pow(m),
        ));
        let term = beta.clone().pow(m + 1) * hj;
        sum += term * ctx.from_rational(&kappa);
    }
    sum >> 1u32
}

/// `g(β) = ∫ log(β − y) ψ(y) dy` in closed form.
///
/// Splitting `log(β − y)` against the beta-integral moments of the density
/// gives `g(β) = (β/2) Σ_j h_j β^j κ_j (log β + 2 − 2 log 2 − H_{j+1})`
/// with `κ_j = C(2j, j) / (2 (j+1) 4^j)`.
pub(crate) fn g_at_endpoint(h_coeffs: &[Float], beta: &Float, ctx: &PrecisionContext) -> Float {
    let bits = ctx.bits();
    let log_beta = beta.clone().ln();
    let mut sum = Float::new(bits);
    for (j, hj) in h_coeffs.iter().enumerate() {
        let j = j as u32;
        let kappa = Rational::from((
            binom(2 * j, j),
            Integer::from(2u32) * (j + 1) * Integer::from(4u32).pow(j),
        ));
        let mut factor = log_beta.clone();
        factor += 2u32;
        factor -= ctx.ln2() << 1u32;
        factor -= ctx.from_rational(&harmonic(j + 1));
        let term = beta.clone().pow(j) * hj;
        sum += term * ctx.from_rational(&kappa) * factor;
    }
    sum * beta >> 1u32
}

/// `V(β) = Σ_k c_k β^{k+1}/(k+1)` where `c_k` are the coefficients of `V'`.
fn v_at_endpoint(cprime: &[Float], beta: &Float, ctx: &PrecisionContext) -> Float {
    let bits = ctx.bits();
    let mut sum = Float::new(bits);
    for (k, c) in cprime.iter().enumerate() {
        let k = k as u32;
        let term = beta.clone().pow(k + 1) * c;
        sum += term / (k + 1);
    }
    sum
}

/// Lagrange multiplier `l_V = 2 g(β) − V(β)` from closed forms.
pub(crate) fn lagrange_from_h(
    cprime: &[Float],
    h_coeffs: &[Float],
    beta: &Float,
    ctx: &PrecisionContext,
) -> Float {
    let g_beta = g_at_endpoint(h_coeffs, beta, ctx);
    (g_beta << 1u32) - v_at_endpoint(cprime, beta, ctx)
}

/// The solved equilibrium measure of a one-cut regular potential.
///
/// Holds the endpoint `β`, the coefficients of the polynomial factor `h`
/// (increasing degree), the Lagrange multiplier `l_V`, and the minimum of
/// `h` over `[0, β]` (positive exactly when the potential is one-cut
/// regular in the sense required here).
#[derive(Debug, Clone)]
pub struct EquilibriumData {
    potential: Potential,
    beta: Float,
    h_coeffs: Vec<Float>,
    l_v: Float,
    h_min: Float,
}

impl EquilibriumData {
    /// Solve the equilibrium problem for `potential`.
    ///
    /// Returns [`Error::NotOneCut`] when the density factor `h` is not
    /// strictly positive on `[0, β]`, in which case the one-interval ansatz
    /// built into this type is wrong and every downstream quantity would be
    /// meaningless.
    pub fn solve(potential: &Potential, ctx: &PrecisionContext) -> Result<Self> {
        let wctx = ctx.widened(10);
        let cprime = vprime_coefficients(potential, &wctx);
        let beta = endpoint_from_vprime(&cprime, &wctx)?;
        let h_coeffs = h_from_vprime(&cprime, &beta, &wctx);
        let h_min = h_minimum(&h_coeffs, &beta, &wctx)?;
        if h_min <= 0u32 {
            return Err(Error::NotOneCut(format!(
                "h attains {} on [0, {}]",
                crate::precision::format_sig(&h_min, 6),
                crate::precision::format_sig(&beta, 6)
            )));
        }
        let l_v = lagrange_from_h(&cprime, &h_coeffs, &beta, &wctx);
        Ok(Self {
            potential: potential.clone(),
            beta: ctx.settle(beta),
            h_coeffs: h_coeffs.into_iter().map(|c| ctx.settle(c)).collect(),
            l_v: ctx.settle(l_v),
            h_min: ctx.settle(h_min),
        })
    }

    /// The potential this measure solves.
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Right endpoint `β` of the support `[0, β]`.
    pub fn beta(&self) -> &Float {
        &self.beta
    }

    /// Coefficients of `h` in increasing-degree order.
    pub fn h_coeffs(&self) -> &[Float] {
        &self.h_coeffs
    }

    /// Lagrange multiplier `l_V` of the equilibrium problem.
    pub fn l_v(&self) -> &Float {
        &self.l_v
    }

    /// Minimum of `h` over `[0, β]`.
    pub fn h_min(&self) -> &Float {
        &self.h_min
    }

    /// Evaluate the polynomial factor `h` at `x`.
    pub fn h_eval(&self, x: &Float) -> Float {
        poly_eval(&self.h_coeffs, x)
    }

    /// Equilibrium density `ψ(x) = (1/2π) √((β−x)/x) h(x)`, zero outside
    /// `(0, β)`.
    pub fn density(&self, x: &Float, ctx: &PrecisionContext) -> Float {
        if !(*x > 0u32) || !(*x < self.beta) {
            return ctx.zero();
        }
        let bits = ctx.bits();
        let ratio = ((&self.beta - x).complete(bits) / x).sqrt();
        let two_pi = ctx.pi() << 1u32;
        ratio * self.h_eval(x) / two_pi
    }

    /// Moment `∫ x^l ψ(x) dx` by endpoint-singular quadrature.
    pub fn equilibrium_moment(&self, l: u32, ctx: &PrecisionContext) -> Result<Float> {
        let zero = ctx.zero();
        let two_pi = ctx.pi() << 1u32;
        let integral = quad_endpoint(
            |x, dxa, dxb| {
                let ratio = (dxb / dxa).complete(x.prec()).sqrt();
                x.clone().pow(l) * ratio * self.h_eval(x)
            },
            &zero,
            self.beta(),
            (-0.5, 0.5),
            ctx,
        )?;
        Ok(integral / two_pi)
    }

    /// Distribution function `F(z) = ∫₀^z ψ(y) dy` for `0 < z < β`.
    ///
    /// Integrates from the nearer endpoint so the far endpoint never sits
    /// just outside the integration interval, where its almost-singularity
    /// would defeat the quadrature map.
    pub(crate) fn cdf(&self, z: &Float, ctx: &PrecisionContext) -> Result<Float> {
        let bits = ctx.bits();
        let two_pi = ctx.pi() << 1u32;
        let half_beta = (&self.beta >> 1u32).complete(bits);
        if *z <= half_beta {
            let zero = ctx.zero();
            let beta_minus_z = (&self.beta - z).complete(bits);
            let integral = quad_endpoint(
                |y, dya, dyb| {
                    // β − y = (β − z) + (z − y), computed without cancellation.
                    let bmy = (&beta_minus_z + dyb).complete(y.prec());
                    (bmy / dya).sqrt() * self.h_eval(y)
                },
                &zero,
                z,
                (-0.5, 0.0),
                ctx,
            )?;
            return Ok(integral / two_pi);
        }
        // Complement: F(z) = 1 − (1/2π) ∫_z^β √((β−y)/y) h(y) dy, with the
        // square-root vanishing at β carried by the quadrature exponent.
        let integral = quad_endpoint(
            |y, dya, dyb| {
                let _ = dya;
                (dyb / y).complete(y.prec()).sqrt() * self.h_eval(y)
            },
            z,
            &self.beta,
            (0.0, 0.5),
            ctx,
        )?;
        Ok(ctx.f(1) - integral / two_pi)
    }

    /// Log-potential `g(z) = ∫ log(z − y) ψ(y) dy` as `(re, im)`.
    ///
    /// For `z > β` the value is real.  On the cut (`z < β`) the boundary
    /// value depends on the side of approach, so a [`Side`] must be given;
    /// passing `None` there is an error.  The imaginary part from above is
    /// `π (1 − F(z))` for `0 < z < β` and `π` for `z ≤ 0`.
    pub fn g(&self, z: &Float, side: Option<Side>, ctx: &PrecisionContext) -> Result<(Float, Float)> {
        let bits = ctx.bits();
        if *z >= self.beta {
            // Real value; log(z − y) is smooth in y except for the soft
            // square-root vanishing of ψ at β, handled by tanh-sinh.
            if *z == self.beta {
                let h = self.h_coeffs.clone();
                let re = g_at_endpoint(&h, &self.beta, ctx);
                return Ok((re, Float::new(bits)));
            }
            let zero = ctx.zero();
            let two_pi = ctx.pi() << 1u32;
            let z_minus_beta = (z - &self.beta).complete(bits);
            let re = quad_tanh_sinh(
                |y, dya, dyb| {
                    // z − y = (z − β) + (β − y), stable near y = β.
                    let zmy = (&z_minus_beta + dyb).complete(y.prec());
                    let ratio = (dyb / dya).complete(y.prec()).sqrt();
                    zmy.ln() * ratio * self.h_eval(y)
                },
                &zero,
                &self.beta,
                ctx,
                None,
            )? / two_pi;
            return Ok((re, Float::new(bits)));
        }
        if side.is_none() {
            return Err(Error::Domain(
                "g on the cut requires a side designation".into(),
            ));
        }
        let two_pi = ctx.pi() << 1u32;
        if *z <= 0u32 {
            // Re g = ∫ log(y − z) ψ(y) dy with y − z = (−z) + y ≥ 0.  As
            // z → 0⁻ the log sharpens into a genuine endpoint singularity,
            // so use tanh-sinh, which absorbs log × algebraic behavior.
            let zero = ctx.zero();
            let minus_z = (-z).complete(bits);
            let re = quad_tanh_sinh(
                |y, dya, dyb| {
                    let ymz = (&minus_z + y).complete(y.prec());
                    let ratio = (dyb / dya).complete(y.prec()).sqrt();
                    ymz.ln() * ratio * self.h_eval(y)
                },
                &zero,
                &self.beta,
                ctx,
                None,
            )? / two_pi;
            return Ok((re, ctx.pi()));
        }
        // 0 < z < β: split the log-modulus integral at z; each piece has an
        // integrable singularity at both ends, which tanh-sinh absorbs.
        let zero = ctx.zero();
        let beta_minus_z = (&self.beta - z).complete(bits);
        let left = quad_tanh_sinh(
            |y, dya, dyb| {
                // z − y = dyb on [0, z]; β − y = (β − z) + dyb.
                let bmy = (&beta_minus_z + dyb).complete(y.prec());
                (bmy / dya).sqrt() * dyb.clone().ln() * self.h_eval(y)
            },
            &zero,
            z,
            ctx,
            None,
        )?;
        let right = quad_tanh_sinh(
            |y, dya, dyb| {
                // y − z = dya on [z, β]; β − y = dyb; y ≥ z > 0 is regular.
                let ratio = (dyb / y).complete(y.prec()).sqrt();
                ratio * dya.clone().ln() * self.h_eval(y)
            },
            z,
            &self.beta,
            ctx,
            None,
        )?;
        let re = (left + right) / two_pi;
        let f = self.cdf(z, ctx)?;
        let im = ctx.pi() * (ctx.f(1) - f);
        Ok((re, im))
    }

    /// Phase function `ξ(z) = −(1/2) ∫_β^z √((y−β)/y) h(y) dy` as `(re, im)`.
    ///
    /// `ξ(β) = 0`; for `z > β` the value is real and negative; on the cut a
    /// [`Side`] is required.  From above, `ξ = iπ(1 − F)` on `(0, β)` and
    /// picks up a growing real part for `z < 0`.
    pub fn xi(&self, z: &Float, side: Option<Side>, ctx: &PrecisionContext) -> Result<(Float, Float)> {
        let bits = ctx.bits();
        if *z >= self.beta {
            if *z == self.beta {
                return Ok((Float::new(bits), Float::new(bits)));
            }
            // √((y−β)/y) has a square-root zero at y = β; integrand regular
            // at y = z.  Endpoint-singular quadrature with p = 1/2.
            let re = quad_endpoint(
                |y, dya, dyb| {
                    let _ = dyb;
                    (dya / y).complete(y.prec()).sqrt() * self.h_eval(y)
                },
                &self.beta,
                z,
                (0.5, 0.0),
                ctx,
            )?;
            return Ok((-(re >> 1u32), Float::new(bits)));
        }
        if side.is_none() {
            return Err(Error::Domain(
                "xi on the cut requires a side designation".into(),
            ));
        }
        if *z <= 0u32 {
            // ξ(z) = iπ + (1/2) ∫_z^0 √((β−y)/(−y)) h(y) dy from above.
            let zero = ctx.zero();
            let beta_f = ctx.f(0) + &self.beta;
            let re = quad_endpoint(
                |y, dya, dyb| {
                    let _ = dya;
                    // On [z, 0]: −y = dyb, β − y = β + dyb.
                    let bmy = (&beta_f + dyb).complete(y.prec());
                    (bmy / dyb).sqrt() * self.h_eval(y)
                },
                z,
                &zero,
                (0.0, -0.5),
                ctx,
            )?;
            return Ok((re >> 1u32, ctx.pi()));
        }
        // 0 < z < β: purely imaginary from above, iπ(1 − F(z)).
        let f = self.cdf(z, ctx)?;
        let im = ctx.pi() * (ctx.f(1) - f);
        Ok((Float::new(bits), im))
    }
}

/// Locate the minimum of `h` over `[0, β]`.
///
/// Scans a uniform 1000-point grid, then polishes each local minimum
/// candidate by bisecting `h'` for a sign change in the bracketing grid
/// cell.  For the low degrees that occur here this resolves the minimum to
/// full grid accuracy, which is all the one-cut decision needs.
pub(crate) fn h_minimum(h_coeffs: &[Float], beta: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let bits = ctx.bits();
    let n_grid = 1000u32;
    let step = (beta / n_grid).complete(bits);
    let mut best = poly_eval(h_coeffs, &ctx.zero());
    let mut best_index = 0u32;
    for i in 1..=n_grid {
        let x = (&step * i).complete(bits);
        let val = poly_eval(h_coeffs, &x);
        if val < best {
            best = val;
            best_index = i;
        }
    }
    if h_coeffs.len() <= 2 {
        // Affine h: the grid minimum is at an endpoint and exact.
        return Ok(best);
    }
    // Polish an interior minimum through the derivative's sign change.
    if best_index > 0 && best_index < n_grid {
        let deriv = poly_derivative(h_coeffs, ctx);
        let lo = (&step * (best_index - 1)).complete(bits);
        let hi = (&step * (best_index + 1)).complete(bits);
        let dlo = poly_eval(&deriv, &lo);
        let dhi = poly_eval(&deriv, &hi);
        if (dlo < 0u32) != (dhi < 0u32) {
            let root = illinois_root(|x| poly_eval(&deriv, x), (lo, hi), ctx)?;
            let val = poly_eval(h_coeffs, &root);
            if val < best {
                best = val;
            }
        }
    }
    Ok(best)
}

/// The symmetrized equilibrium problem on `[−β̃, β̃]`.
///
/// Substituting `x = y²` maps the Laguerre-type problem to an even
/// potential `W(y) = V(y²)/2` on the whole line whose equilibrium density
/// is `φ(y) = (1/2π) √(β̃² − y²) h̃(y)` with `β̃² = β` and `h̃(y) = h(y²)`.
/// Solving it by independent means gives a strong cross-check on the
/// primal solution.
#[derive(Debug, Clone)]
pub struct SymmetrizedData {
    beta_tilde: Float,
    h_tilde_coeffs: Vec<Float>,
}

impl SymmetrizedData {
    /// Right symmetric endpoint `β̃` (the left one is `−β̃` by oddness of
    /// `W'`).
    pub fn beta_tilde(&self) -> &Float {
        &self.beta_tilde
    }

    /// Coefficients of `h̃` in increasing-degree order; odd entries vanish.
    pub fn h_tilde_coeffs(&self) -> &[Float] {
        &self.h_tilde_coeffs
    }

    /// Evaluate `h̃` at `y`.
    pub fn h_tilde_eval(&self, y: &Float) -> Float {
        poly_eval(&self.h_tilde_coeffs, y)
    }

    /// Symmetrized density `φ(y) = (1/2π) √(β̃² − y²) h̃(y)`, zero outside
    /// `(−β̃, β̃)`.
    pub fn density(&self, y: &Float, ctx: &PrecisionContext) -> Float {
        let abs_y = y.clone().abs();
        if !(abs_y < self.beta_tilde) {
            return ctx.zero();
        }
        let bits = ctx.bits();
        let disc = (&self.beta_tilde - &abs_y).complete(bits)
            * (&self.beta_tilde + &abs_y).complete(bits);
        let two_pi = ctx.pi() << 1u32;
        disc.sqrt() * self.h_tilde_eval(y) / two_pi
    }
}

/// Solve the symmetrized equilibrium problem directly and return its data.
///
/// The endpoint equation `∫_{−b}^{b} y W'(y) / √(b² − y²) dy = 2π` is solved
/// numerically (quadrature plus bracketed root refinement), *not* through
/// the primal closed forms, so agreement of `β̃²` with `β` is a genuine
/// consistency test.  The coefficients of `h̃` come from the same
/// inverse-square-root expansion as in the primal problem, applied to `W`.
pub fn symmetrize_check(potential: &Potential, ctx: &PrecisionContext) -> Result<SymmetrizedData> {
    let wctx = ctx.widened(10);
    let cprime = vprime_coefficients(potential, &wctx);

    // Residual of the symmetric endpoint equation at half-width b.
    // y W'(y²)·y = y² V'(y²) after W'(y) = y V'(y²), so the integrand is
    // y² V'(y²) / √((b−y)(b+y)) with inverse-square-root endpoint behavior.
    let residual = |b: &Float| -> Result<Float> {
        let minus_b = (-b).complete(wctx.bits());
        let integral = quad_endpoint(
            |y, dya, dyb| {
                let y2 = y.clone().square();
                let denom = (dya * dyb).complete(y.prec()).sqrt();
                y2.clone() * poly_eval(&cprime, &y2) / denom
            },
            &minus_b,
            b,
            (-0.5, -0.5),
            &wctx,
        )?;
        Ok(integral - (wctx.pi() << 1u32))
    };

    let mut t_scale = 1.0f64;
    let mut sum_abs = 0.0f64;
    for c in &cprime {
        sum_abs += c.to_f64().abs();
    }
    if sum_abs > t_scale {
        t_scale = sum_abs;
    }
    let cap = 8.0 / t_scale.sqrt();
    let mut first_err: Option<Error> = None;
    let mut f = |b: &Float| -> Float {
        match residual(b) {
            Ok(v) => v,
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
                Float::with_val(wctx.bits(), rug::float::Special::Nan)
            }
        }
    };
    let bracket = bracket_scan(&mut f, 1e-3, cap, &wctx)?;
    let beta_tilde = illinois_root(&mut f, bracket, &wctx)?;
    if let Some(e) = first_err {
        return Err(e);
    }

    // h̃ from the inverse-square-root expansion of √(z²/(z²−β̃²)) W'(z):
    // for each primal coefficient c_k, expanding around infinity spreads it
    // over even degrees 2(k−j) with weight C(2j, j) (β̃²/4)^j.
    let b2 = beta_tilde.clone().square();
    let n = cprime.len();
    let mut h_tilde = vec![Float::new(wctx.bits()); 2 * n - 1];
    for (k, c) in cprime.iter().enumerate() {
        for j in 0..=k {
            let idx = 2 * (k - j);
            let term = c * a_coeff(j as u32, &b2);
            h_tilde[idx] += term;
        }
    }

    Ok(SymmetrizedData {
        beta_tilde: ctx.settle(beta_tilde),
        h_tilde_coeffs: h_tilde.into_iter().map(|c| ctx.settle(c)).collect(),
    })
}
