//! Quadrature engines: Gauss–Legendre with node doubling for smooth
//! integrands, a sin²-substitution rule for algebraic endpoint
//! singularities, tanh-sinh for harder endpoint behaviour (logarithms,
//! exponents below −1/2), and exp-sinh (double-exponential) rules for
//! semi-infinite integrals and discretized weights.
//!
//! Endpoint-sensitive engines hand the integrand the distances to both
//! endpoints (`x − a` and `b − x`) computed in the transformed variable, so
//! singular factors can be evaluated without catastrophic cancellation.

use crate::error::{Error, Result};
use crate::precision::{format_sig, PrecisionContext};
use rug::ops::{CompleteRound, Pow};
use rug::Float;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// A Gauss–Legendre rule on [−1, 1], nodes ascending.
pub struct GlRule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

static GL_CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<GlRule>>>> = OnceLock::new();

/// Legendre P_n and P_n' at `x`, at `bits` working precision.
fn legendre_pair(n: usize, x: &Float, bits: u32) -> (Float, Float) {
    let mut pm1 = Float::with_val(bits, 1);
    let mut p = Float::with_val(bits, x);
    if n == 0 {
        return (pm1, Float::with_val(bits, 0));
    }
    for k in 2..=n {
        let mut t = (x * &p).complete(bits);
        t *= (2 * k - 1) as u32;
        let u = (&pm1 * ((k - 1) as u32)).complete(bits);
        t -= &u;
        t /= k as u32;
        pm1 = std::mem::replace(&mut p, t);
    }
    // (x² − 1) P_n' = n (x P_n − P_{n−1})
    let mut num = (x * &p).complete(bits);
    num -= &pm1;
    num *= n as u32;
    let mut den = (x * x).complete(bits);
    den -= 1u32;
    let dp = num / den;
    (p, dp)
}

/// The `n`-point Gauss–Legendre rule at the context's precision, cached per
/// (n, bits).
pub fn gauss_legendre(n: usize, ctx: &PrecisionContext) -> Arc<GlRule> {
    let key = (n, ctx.bits());
    let cache = GL_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&key) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build_gauss_legendre(n, ctx.bits()));
    cache
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| Arc::clone(&rule));
    rule
}

fn build_gauss_legendre(n: usize, bits: u32) -> GlRule {
    let wb = bits + 32;
    let tol = {
        let mut t = Float::with_val(wb, 1);
        t >>= wb - 8;
        t
    };
    let mut nodes = vec![Float::new(bits); n];
    let mut weights = vec![Float::new(bits); n];
    for i in 0..n.div_ceil(2) {
        let seed = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = Float::with_val(wb, seed);
        let mut dp = Float::new(wb);
        for _ in 0..200 {
            let (p, d) = legendre_pair(n, &x, wb);
            dp = d;
            let dx = p / &dp;
            x -= &dx;
            if dx.abs() < tol {
                // one polishing step after convergence
                let (p, d) = legendre_pair(n, &x, wb);
                dp = d;
                let dx = p / &dp;
                x -= &dx;
                break;
            }
        }
        // w = 2 / ((1 − x²) P_n'(x)²)
        let mut den = (&x * &x).complete(wb);
        den = 1u32 - den;
        den *= (&dp * &dp).complete(wb);
        let w = 2u32 / den;
        // i-th seed descends from +1; store ascending with symmetry
        let hi = n - 1 - i;
        nodes[hi] = Float::with_val(bits, &x);
        weights[hi] = Float::with_val(bits, &w);
        nodes[i] = Float::with_val(bits, -x);
        weights[i] = Float::with_val(bits, w);
    }
    GlRule { nodes, weights }
}

/// Apply a GL rule to ∫ₐᵇ g(x) dx.
fn gl_apply(g: &mut dyn FnMut(&Float) -> Float, a: &Float, b: &Float, rule: &GlRule, bits: u32) -> Float {
    let mut mid = (a + b).complete(bits);
    mid /= 2u32;
    let mut rad = (b - a).complete(bits);
    rad /= 2u32;
    let mut acc = Float::new(bits);
    for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let mut xi = (x * &rad).complete(bits);
        xi += &mid;
        let mut term = g(&xi);
        term *= w;
        acc += term;
    }
    acc *= &rad;
    acc
}

/// Gauss–Legendre with node doubling until two successive sizes agree within
/// `target` (absolute). For integrands analytic on a neighbourhood of [a,b].
pub fn quad_smooth(
    mut g: impl FnMut(&Float) -> Float,
    a: &Float,
    b: &Float,
    ctx: &PrecisionContext,
    target: Option<&Float>,
) -> Result<Float> {
    let default_target = ctx.quad_target();
    let target = target.unwrap_or(&default_target);
    let bits = ctx.bits();
    let mut prev: Option<Float> = None;
    let mut n = 32;
    loop {
        let rule = gauss_legendre(n, ctx);
        let cur = gl_apply(&mut g, a, b, &rule, bits);
        if let Some(p) = &prev {
            let diff = (&cur - p).complete(bits).abs();
            if diff <= *target {
                return Ok(cur);
            }
        }
        prev = Some(cur);
        if 2 * n > 4096 || 2 * n > ctx.max_nodes() {
            let last = prev.unwrap();
            return Err(Error::QuadratureNonConvergence {
                nodes: n,
                previous: format_sig(&last, 20),
                last: "(node cap reached)".to_string(),
            });
        }
        n *= 2;
    }
}

/// ∫ₐᵇ f with algebraic endpoint behaviour (x−a)^p (b−x)^q declared in
/// `sing = (p, q)`, p,q > −1.
///
/// The integrand callback receives `(x, x−a, b−x)` with the endpoint
/// distances computed in the transformed variable (no cancellation), and must
/// include the singular factors itself.
///
/// Half-integer exponents ≥ −1/2 are absorbed by the substitution
/// x = a + (b−a) sin²θ followed by Gauss–Legendre in θ; anything harder
/// (p or q in (−1, −1/2)) is routed to the tanh-sinh engine.
pub fn quad_endpoint(
    mut f: impl FnMut(&Float, &Float, &Float) -> Float,
    a: &Float,
    b: &Float,
    sing: (f64, f64),
    ctx: &PrecisionContext,
) -> Result<Float> {
    if !(a < b) {
        return Err(Error::Domain(format!(
            "quad_endpoint needs a < b, got [{}, {}]",
            format_sig(a, 10),
            format_sig(b, 10)
        )));
    }
    let (p, q) = sing;
    if p <= -1.0 || q <= -1.0 {
        return Err(Error::Domain(format!(
            "edge exponents must be > -1, got ({p}, {q})"
        )));
    }
    if p < -0.5 || q < -0.5 {
        return quad_tanh_sinh(f, a, b, ctx, None);
    }
    let bits = ctx.bits();
    let len = (b - a).complete(bits);
    let mut half_pi = ctx.pi();
    half_pi /= 2u32;
    let zero = ctx.zero();
    let g = |theta: &Float| -> Float {
        let (sin, cos) = theta.clone().sin_cos(Float::new(bits));
        let mut dxa = (&sin * &sin).complete(bits);
        dxa *= &len;
        let mut dxb = (&cos * &cos).complete(bits);
        dxb *= &len;
        let x = (a + &dxa).complete(bits);
        let mut jac = sin;
        jac *= &cos;
        jac *= 2u32;
        jac *= &len;
        let mut val = f(&x, &dxa, &dxb);
        val *= &jac;
        val
    };
    quad_smooth(g, &zero, &half_pi, ctx, None)
}

/// Tanh-sinh (double-exponential) rule on [a, b]; handles any integrable
/// endpoint singularity, including logarithms. Same `(x, x−a, b−x)` callback
/// convention as [`quad_endpoint`].
pub fn quad_tanh_sinh(
    mut f: impl FnMut(&Float, &Float, &Float) -> Float,
    a: &Float,
    b: &Float,
    ctx: &PrecisionContext,
    target: Option<&Float>,
) -> Result<Float> {
    let bits = ctx.bits();
    let default_target = ctx.quad_target();
    let target = target.unwrap_or(&default_target);
    let mut half_pi = ctx.pi();
    half_pi /= 2u32;
    let mut mid = (a + b).complete(bits);
    mid /= 2u32;
    let mut rad = (b - a).complete(bits);
    rad /= 2u32;
    // negligible-term threshold relative to the largest term seen
    let eps = ctx.pow10(-(ctx.digits() as i32) - 10);

    // One point of the rule: t = k·h. Returns the un-h-scaled term.
    let mut point = |t: &Float| -> Float {
        let u = (&half_pi * &t.clone().sinh()).complete(bits);
        // 1 ± tanh(u), computed stably on both sides
        let e2u = {
            let mut v = u.clone();
            v *= 2u32;
            v.exp()
        };
        // dxb/rad = 1 − tanh u = 2/(1+e^{2u}); dxa/rad = 1 + tanh u = 2 e^{2u}/(1+e^{2u})
        let mut den = e2u.clone();
        den += 1u32;
        let mut fb = Float::with_val(bits, 2);
        fb /= &den;
        let mut fa = e2u;
        fa *= 2u32;
        fa /= &den;
        let mut dxa = fa;
        dxa *= &rad;
        let mut dxb = fb;
        dxb *= &rad;
        let mut x = (&dxa - &dxb).complete(bits);
        x >>= 1u32;
        x += &mid;
        // jacobian dx/dt = (π/2) cosh t · (x−a)(b−x)/rad
        let mut jac = (&dxa * &dxb).complete(bits);
        jac /= &rad;
        jac *= &half_pi;
        jac *= t.clone().cosh();
        let mut val = f(&x, &dxa, &dxb);
        val *= &jac;
        val
    };

    let mut prev: Option<Float> = None;
    let mut nodes_used = 0usize;
    for level in 3u32..=12 {
        let h = {
            let mut h = Float::with_val(bits, 1);
            h >>= level;
            h
        };
        let mut acc = point(&Float::new(bits));
        let mut max_mag = acc.clone().abs();
        for dir in [1i32, -1i32] {
            let mut misses = 0;
            let mut k: u64 = 1;
            loop {
                let mut t = (&h * k).complete(bits);
                if dir < 0 {
                    t = -t;
                }
                let term = point(&t);
                nodes_used += 1;
                let mag = term.clone().abs();
                if mag > max_mag {
                    max_mag = mag.clone();
                }
                acc += term;
                let mut thresh = (&max_mag * &eps).complete(bits);
                if thresh.is_zero() {
                    thresh = eps.clone();
                }
                // keep expanding until well past t ≈ 3 regardless of early small terms
                if mag < thresh && (k as f64) * h.to_f64() > 3.0 {
                    misses += 1;
                    if misses >= 3 {
                        break;
                    }
                } else {
                    misses = 0;
                }
                k += 1;
                if nodes_used > ctx.max_nodes() {
                    return Err(Error::QuadratureNonConvergence {
                        nodes: nodes_used,
                        previous: prev.map(|p| format_sig(&p, 20)).unwrap_or_default(),
                        last: "(node budget exhausted mid-level)".to_string(),
                    });
                }
            }
        }
        acc *= &h;
        if let Some(p) = &prev {
            let diff = (&acc - p).complete(bits).abs();
            if diff <= *target {
                return Ok(acc);
            }
        }
        prev = Some(acc);
    }
    let last = prev.unwrap();
    Err(Error::QuadratureNonConvergence {
        nodes: nodes_used,
        previous: format_sig(&last, 20),
        last: "(level cap reached)".to_string(),
    })
}

/// ∫ₐ^∞ f for integrands with eventual exponential decay, via the exp-sinh
/// double-exponential substitution x = a + s·exp((π/2) sinh t). The `decay`
/// hint is the (approximate) exponential rate; it sets the scale s = 1/decay.
pub fn quad_semiinfinite(
    mut f: impl FnMut(&Float) -> Float,
    a: &Float,
    decay: f64,
    ctx: &PrecisionContext,
) -> Result<Float> {
    let bits = ctx.bits();
    let target = ctx.quad_target();
    let mut half_pi = ctx.pi();
    half_pi /= 2u32;
    let scale = ctx.f(1f64 / if decay > 0.0 { decay } else { 1.0 });
    let eps = ctx.pow10(-(ctx.digits() as i32) - 10);

    let mut point = |t: &Float| -> Float {
        let u = (&half_pi * &t.clone().sinh()).complete(bits);
        let mut r = u.exp();
        r *= &scale; // x − a
        let x = (a + &r).complete(bits);
        let mut jac = (&half_pi * &t.clone().cosh()).complete(bits);
        jac *= &r;
        let mut val = f(&x);
        val *= &jac;
        val
    };

    let mut prev: Option<Float> = None;
    let mut nodes_used = 0usize;
    for level in 3u32..=12 {
        let h = {
            let mut h = Float::with_val(bits, 1);
            h >>= level;
            h
        };
        let mut acc = point(&Float::new(bits));
        let mut max_mag = acc.clone().abs();
        for dir in [1i32, -1i32] {
            let mut misses = 0;
            let mut k: u64 = 1;
            loop {
                let mut t = (&h * k).complete(bits);
                if dir < 0 {
                    t = -t;
                }
                let term = point(&t);
                nodes_used += 1;
                let mag = term.clone().abs();
                if mag > max_mag {
                    max_mag = mag.clone();
                }
                acc += term;
                let mut thresh = (&max_mag * &eps).complete(bits);
                if thresh.is_zero() {
                    thresh = eps.clone();
                }
                if mag < thresh && (k as f64) * h.to_f64() > 3.0 {
                    misses += 1;
                    if misses >= 3 {
                        break;
                    }
                } else {
                    misses = 0;
                }
                k += 1;
                if nodes_used > ctx.max_nodes() {
                    return Err(Error::QuadratureNonConvergence {
                        nodes: nodes_used,
                        previous: prev.map(|p| format_sig(&p, 20)).unwrap_or_default(),
                        last: "(node budget exhausted mid-level)".to_string(),
                    });
                }
            }
        }
        acc *= &h;
        if let Some(p) = &prev {
            let diff = (&acc - p).complete(bits).abs();
            if diff <= target {
                return Ok(acc);
            }
        }
        prev = Some(acc);
    }
    let last = prev.unwrap();
    Err(Error::QuadratureNonConvergence {
        nodes: nodes_used,
        previous: format_sig(&last, 20),
        last: "(level cap reached)".to_string(),
    })
}

/// A discretization of a positive weight on (0, ∞):
/// ∫₀^∞ g(x) w(x) dx ≈ Σᵢ weights[i]·g(nodes[i]), weights > 0.
pub struct PositiveGrid {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

/// Exp-sinh discretization of ∫₀^∞ (·) e^{log_w(x)} dx at step 2^(−level),
/// trimmed to the nodes that matter for polynomial integrands up to degree
/// `maxdeg` at the context's precision.
///
/// This is the auxiliary node set used by the discretized Stieltjes procedure
/// and the moment integrals: the retained entries reproduce
/// ∫ x^m e^{log_w} dx for all m ≤ maxdeg at the quadrature's accuracy.
pub fn weight_grid(
    log_w: impl Fn(&Float) -> Float,
    maxdeg: u32,
    level: u32,
    ctx: &PrecisionContext,
) -> PositiveGrid {
    let bits = ctx.bits();
    let mut half_pi = ctx.pi();
    half_pi /= 2u32;
    let eps = ctx.pow10(-(ctx.digits() as i32) - 12);
    let h = {
        let mut h = Float::with_val(bits, 1);
        h >>= level;
        h
    };

    let point = |t: &Float| -> (Float, Float) {
        let u = (&half_pi * &t.clone().sinh()).complete(bits);
        let x = u.exp();
        let mut jac = (&half_pi * &t.clone().cosh()).complete(bits);
        jac *= &x;
        jac *= &h;
        let mut lw = log_w(&x);
        lw.exp_mut();
        jac *= lw;
        (x, jac)
    };
    // significance of a node for integrands up to degree maxdeg
    let signif = |x: &Float, w: &Float| -> Float {
        let mut s = w.clone().abs();
        if *x > 1u32 {
            s *= x.clone().pow(maxdeg);
        }
        s
    };

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let (x0, w0) = point(&Float::new(bits));
    // Track significance separately for the lowest and highest monitored
    // degrees: the degree-maxdeg hump dwarfs the degree-0 mass near the
    // origin, and a single shared maximum would trim the low-x nodes that
    // the low-order moments depend on.
    let mut max_low = w0.clone().abs();
    let mut max_high = signif(&x0, &w0);
    nodes.push(x0);
    weights.push(w0);
    for dir in [1i32, -1i32] {
        let mut misses = 0;
        let mut k: u64 = 1;
        loop {
            let mut t = (&h * k).complete(bits);
            if dir < 0 {
                t = -t;
            }
            let (x, w) = point(&t);
            let s_low = w.clone().abs();
            let s_high = signif(&x, &w);
            if s_low > max_low {
                max_low = s_low.clone();
            }
            if s_high > max_high {
                max_high = s_high.clone();
            }
            let keep = s_low >= (&max_low * &eps).complete(bits)
                || s_high >= (&max_high * &eps).complete(bits);
            if !keep && (k as f64) * h.to_f64() > 2.0 {
                misses += 1;
                if misses >= 3 {
                    break;
                }
            } else {
                misses = 0;
                nodes.push(x);
                weights.push(w);
            }
            k += 1;
        }
    }
    PositiveGrid { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::CompleteRound;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(50).unwrap()
    }

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        let ctx = ctx();
        let rule = gauss_legendre(8, &ctx);
        // ∫_{-1}^{1} x^14 dx = 2/15, degree 14 ≤ 2·8−1
        let mut acc = ctx.zero();
        for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
            let t = x.clone().pow(14u32) * w;
            acc += t;
        }
        let exact = ctx.f(2) / ctx.f(15);
        let err = (&acc - &exact).complete(ctx.bits()).abs();
        assert!(err < ctx.pow10(-42), "err = {}", format_sig(&err, 5));
        // weights sum to 2
        let mut s = ctx.zero();
        for w in &rule.weights {
            s += w;
        }
        let err = (s - ctx.f(2)).abs();
        assert!(err < ctx.pow10(-42));
    }

    #[test]
    fn quad_smooth_exp() {
        let ctx = ctx();
        // ∫₀¹ e^x dx = e − 1
        let v = quad_smooth(|x| x.clone().exp(), &ctx.zero(), &ctx.f(1), &ctx, None).unwrap();
        let exact = ctx.f(1).exp() - 1u32;
        let err = (v - exact).abs();
        assert!(err < ctx.pow10(-40), "err = {}", format_sig(&err, 5));
    }

    #[test]
    fn endpoint_rule_handles_half_integer_edges() {
        let ctx = ctx();
        let beta = ctx.f(4);
        // ∫₀⁴ √(x/(4−x)) dx = 2π  (exponents (1/2, −1/2))
        let v = quad_endpoint(
            |_x, dxa, dxb| {
                let r = (dxa / dxb).complete(ctx.bits());
                r.sqrt()
            },
            &ctx.zero(),
            &beta,
            (0.5, -0.5),
            &ctx,
        )
        .unwrap();
        let exact = ctx.pi() * 2u32;
        let err = (&v - &exact).complete(ctx.bits()).abs();
        assert!(err < ctx.pow10(-40), "err = {}", format_sig(&err, 5));

        // ∫₀⁴ x√(x/(4−x)) dx = 6π
        let v = quad_endpoint(
            |x, dxa, dxb| {
                let mut r = (dxa / dxb).complete(ctx.bits());
                r.sqrt_mut();
                r * x
            },
            &ctx.zero(),
            &beta,
            (1.5, -0.5),
            &ctx,
        )
        .unwrap();
        let exact = ctx.pi() * 6u32;
        let err = (v - exact).abs();
        assert!(err < ctx.pow10(-40), "err = {}", format_sig(&err, 5));

        // ∫₀¹ 1 dx = 1
        let v = quad_endpoint(|_, _, _| ctx.f(1), &ctx.zero(), &ctx.f(1), (0.0, 0.0), &ctx).unwrap();
        let err = (v - 1u32).abs();
        assert!(err < ctx.pow10(-40));
    }

    #[test]
    fn tanh_sinh_handles_log_singularity() {
        let ctx = ctx();
        // ∫₀¹ ln x dx = −1
        let v = quad_tanh_sinh(
            |_x, dxa, _dxb| dxa.clone().ln(),
            &ctx.zero(),
            &ctx.f(1),
            &ctx,
            None,
        )
        .unwrap();
        let err = (v + 1u32).abs();
        assert!(err < ctx.pow10(-40), "err = {}", format_sig(&err, 5));
    }

    #[test]
    fn semiinfinite_gamma_integrals() {
        let ctx = ctx();
        // ∫₀^∞ e^{−x} dx = 1
        let v = quad_semiinfinite(|x| (-x).complete(ctx.bits()).exp(), &ctx.zero(), 1.0, &ctx).unwrap();
        let err = (v - 1u32).abs();
        assert!(err < ctx.pow10(-40), "err = {}", format_sig(&err, 5));

        // ∫₀^∞ x e^{−2x} dx = 1/4
        let v = quad_semiinfinite(
            |x| {
                let mut e = (x * &ctx.f(-2)).complete(ctx.bits());
                e.exp_mut();
                e * x
            },
            &ctx.zero(),
            2.0,
            &ctx,
        )
        .unwrap();
        let err = (v - ctx.f(0.25)).abs();
        assert!(err < ctx.pow10(-40), "err = {}", format_sig(&err, 5));

        // ∫₀^∞ x^{3/2} e^{−x} dx = Γ(5/2) = 3√π/4
        let v = quad_semiinfinite(
            |x| {
                let mut e = (-x).complete(ctx.bits());
                e.exp_mut();
                e * x.clone().pow(ctx.f(1.5))
            },
            &ctx.zero(),
            1.0,
            &ctx,
        )
        .unwrap();
        let exact = ctx.pi().sqrt() * 3u32 / 4u32;
        let err = (v - exact).abs();
        assert!(err < ctx.pow10(-40), "err = {}", format_sig(&err, 5));
    }

    #[test]
    fn weight_grid_reproduces_gamma_moments() {
        let ctx = ctx();
        // weight e^{−x}: moments m = m!
        let grid = weight_grid(|x| (-x).complete(ctx.bits()), 6, 6, &ctx);
        let mut fact = ctx.f(1);
        for m in 0..=6u32 {
            let mut acc = ctx.zero();
            for (x, w) in grid.nodes.iter().zip(grid.weights.iter()) {
                let t = x.clone().pow(m) * w;
                acc += t;
            }
            if m > 0 {
                fact *= m;
            }
            let err = (acc / &fact - 1u32).abs();
            assert!(err < ctx.pow10(-40), "moment {m} err = {}", format_sig(&err, 5));
        }
    }

    #[test]
    fn doubling_digits_is_consistent() {
        let lo = PrecisionContext::new(40).unwrap();
        let hi = PrecisionContext::new(80).unwrap();
        let f = |x: &Float| {
            let mut e = (-x).complete(x.prec());
            e.exp_mut();
            e * x.clone().sqrt()
        };
        let a = quad_semiinfinite(f, &lo.zero(), 1.0, &lo).unwrap();
        let b = quad_semiinfinite(f, &hi.zero(), 1.0, &hi).unwrap();
        let err = (Float::with_val(hi.bits(), &a) - b).abs();
        assert!(err < lo.quad_target());
    }
}
