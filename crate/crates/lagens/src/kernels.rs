//! Conformal edge maps and leading-order local approximations to the
//! density of states near the two endpoints of the support.
//!
//! The equilibrium density behaves differently at the two edges: it blows
//! up like `x^{-1/2}` at the hard edge `0` and vanishes like a square root
//! at the soft edge `β`.  Correspondingly, the finite-`N` density of states
//! is captured near `0` by a Bessel-kernel profile and near `β` by an
//! Airy-kernel profile, each transplanted through a conformal change of
//! variables built from the equilibrium data:
//!
//! * `ζ(x)` with `ζ^{3/2}(x) = (N/2)∫₀ˣ √((β−s)/s) h(s) ds` — the real
//!   hard-edge variable; the Bessel map is `f̃ = −ζ³/4` on the cut.
//! * `f(x) = ±[(3N/4)|∫_β^x √(|s−β|/s) h(s) ds|]^{2/3}` — the real Airy
//!   variable, negative inside the support and positive outside.
//!
//! The module also exposes the scalar ingredients of the outside
//! parametrix, `a(z) = ((z−β)/z)^{1/4}`, `φ(z) = 2z−β+2√z√(z−β)` and
//! `D(z) = (z/φ(z))^{α/2}`, reduced to real form on both real rays, and
//! the oscillatory profile `F₀(ζ) = [J₀² + (J₀')²](ζ^{3/2})·ζ²` together
//! with its large-`ζ` expansion.
//!
//! The sign and branch choices in the hard-edge density were fixed by
//! matching the exact orthogonal-polynomial density at moderate `N` and are
//! frozen by regression tests; the approximations are only offered inside
//! conservative windows (an eighth of the support at either edge), and
//! evaluations outside them are rejected.

use crate::equilibrium::EquilibriumData;
use crate::error::{Error, Result};
use crate::numerics::quad::quad_endpoint;
use crate::numerics::special::{airy_ai, airy_ai_prime, bessel_j0, bessel_j0_prime};
use crate::precision::{format_sig, PrecisionContext};
use rug::ops::CompleteRound;
use rug::Float;

/// Conformal maps and local density approximations for a fixed matrix size.
///
/// All evaluators are pure functions of the stored equilibrium data, so a
/// single instance can be shared freely across threads for grid evaluation.
#[derive(Debug, Clone)]
pub struct EdgeMaps {
    eq: EquilibriumData,
    n: u32,
    hard_cutoff: Float,
    soft_window: Float,
}

impl EdgeMaps {
    /// Bundle equilibrium data with a matrix size.  The hard-edge
    /// approximation is served on `(0, β/8]` and the soft-edge one on
    /// `[β − β/8, β + β/8]`; both windows sit comfortably inside the
    /// fixed-size neighbourhoods where the local approximations hold.
    pub fn new(eq: EquilibriumData, n: u32, ctx: &PrecisionContext) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain(
                "edge maps need a positive matrix size".to_string(),
            ));
        }
        let bits = ctx.bits();
        let eighth = (eq.beta() >> 3u32).complete(bits);
        Ok(Self {
            eq,
            n,
            hard_cutoff: eighth.clone(),
            soft_window: eighth,
        })
    }

    /// The equilibrium data the maps are built from.
    pub fn eq(&self) -> &EquilibriumData {
        &self.eq
    }

    /// The matrix size `N`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Upper end of the hard-edge window `(0, x*]`.
    pub fn hard_cutoff(&self) -> &Float {
        &self.hard_cutoff
    }

    /// Half-width of the soft-edge window around `β`.
    pub fn soft_window(&self) -> &Float {
        &self.soft_window
    }

    /// The real hard-edge variable `ζ(x)`; see [`zeta_map`].
    pub fn zeta(&self, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
        zeta_map(&self.eq, self.n, x, ctx)
    }

    /// Boundary value (from the upper half plane) of the Bessel map on the
    /// cut: `f̃(x) = −[(N/4)∫₀ˣ √((β−s)/s) h(s) ds]²` for `0 ≤ x ≤ β`.
    ///
    /// The integral is computed directly, independently of [`Self::zeta`],
    /// so the exact relation `4 f̃ = −ζ³` doubles as a cross-check of the
    /// two quadrature routes.
    pub fn f_bessel(&self, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
        let beta = self.eq.beta();
        if !(x >= &0u32 && x <= beta) {
            return Err(Error::OutOfRange(format!(
                "the Bessel map is evaluated on [0, β]; got {}",
                format_sig(x, 10)
            )));
        }
        let bits = ctx.bits();
        if x.is_zero() {
            return Ok(ctx.zero());
        }
        let bmx = (beta - x).complete(bits);
        let integral = quad_endpoint(
            |s, dxa, dxb| {
                let mut v = (&bmx + dxb).complete(bits);
                v /= dxa;
                v.sqrt_mut();
                v * self.eq.h_eval(s)
            },
            &ctx.zero(),
            x,
            (-0.5, 0.5),
            ctx,
        )?;
        let mut amp = integral * self.n;
        amp >>= 2u32;
        Ok(-amp.square())
    }

    /// The real Airy variable `f(x)`: zero at `β`, negative inside the
    /// support, positive outside, with
    /// `|f|^{3/2} = (3N/4)|∫_β^x √(|s−β|/s) h(s) ds|`.
    pub fn f_airy(&self, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
        let beta = self.eq.beta();
        if !(x >= &0u32) {
            return Err(Error::OutOfRange(format!(
                "the Airy map is evaluated on the closed positive axis; got {}",
                format_sig(x, 10)
            )));
        }
        if x == beta {
            return Ok(ctx.zero());
        }
        let bits = ctx.bits();
        let scale = {
            let mut s = Float::with_val(bits, 3u32 * self.n);
            s >>= 2u32;
            s
        };
        if x > beta {
            let integral = quad_endpoint(
                |s, dxa, _| {
                    let mut v = dxa.clone();
                    v /= s;
                    v.sqrt_mut();
                    v * self.eq.h_eval(s)
                },
                beta,
                x,
                (0.5, 0.0),
                ctx,
            )?;
            let mut f = integral * scale;
            f.square_mut();
            Ok(f.cbrt())
        } else {
            let integral = quad_endpoint(
                |s, _, dxb| {
                    let mut v = dxb.clone();
                    v /= s;
                    v.sqrt_mut();
                    v * self.eq.h_eval(s)
                },
                x,
                beta,
                (0.0, 0.5),
                ctx,
            )?;
            let mut f = integral * scale;
            f.square_mut();
            Ok(-f.cbrt())
        }
    }

    /// Derivative of the real Airy variable.  Away from `β` it follows from
    /// the defining integral by the chain rule,
    /// `f'(x) = (N/2)√(|x−β|/x)·h(x)/√|f(x)|`, and at `β` itself the
    /// removable singularity is filled with the limit
    /// `f'(β) = [N·h(β)/(2√β)]^{2/3}`, which is positive for one-cut data —
    /// the map is conformal at the soft edge.
    pub fn f_airy_prime(&self, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
        let beta = self.eq.beta();
        if !(x > &0u32) {
            return Err(Error::OutOfRange(format!(
                "the Airy map derivative is evaluated on the open positive axis; got {}",
                format_sig(x, 10)
            )));
        }
        let bits = ctx.bits();
        if x == beta {
            let mut limit = self.eq.h_eval(beta);
            limit *= self.n;
            limit /= beta.clone().sqrt();
            limit >>= 1u32;
            limit.square_mut();
            return Ok(limit.cbrt());
        }
        let f = self.f_airy(x, ctx)?;
        let mut slope = (x - beta).complete(bits).abs();
        slope /= x;
        slope.sqrt_mut();
        slope *= self.eq.h_eval(x);
        slope *= self.n;
        slope >>= 1u32;
        slope /= f.abs().sqrt();
        Ok(slope)
    }

    /// Scalars of the outside parametrix at `z`; see
    /// [`outside_parametrix_scalars`].
    pub fn outside_scalars(
        &self,
        z: &Float,
        ctx: &PrecisionContext,
    ) -> Result<(Float, Float, Float)> {
        outside_parametrix_scalars(&self.eq, z, ctx)
    }
}

/// The real hard-edge variable
/// `ζ(x) = [(N/2)∫₀ˣ √((β−s)/s) h(s) ds]^{2/3}`, nonnegative and strictly
/// increasing on `[0, β]`.
///
/// The bracketed quantity equals `Nπ·F(x)` where `F` is the equilibrium
/// distribution function, so the evaluation reuses the numerically stable
/// distribution-function routes (direct near `0`, complementary near `β`).
/// In particular `ζ^{3/2}(β) = Nπ` for every admissible potential.
pub fn zeta_map(
    eq: &EquilibriumData,
    n: u32,
    x: &Float,
    ctx: &PrecisionContext,
) -> Result<Float> {
    if n == 0 {
        return Err(Error::Domain(
            "the hard-edge variable needs a positive matrix size".to_string(),
        ));
    }
    let beta = eq.beta();
    if !(x >= &0u32 && x <= beta) {
        return Err(Error::OutOfRange(format!(
            "the hard-edge variable is defined on [0, β]; got {}",
            format_sig(x, 10)
        )));
    }
    if x.is_zero() {
        return Ok(ctx.zero());
    }
    let mass = if x == beta {
        ctx.f(1)
    } else {
        eq.cdf(x, ctx)?
    };
    let mut w = ctx.pi();
    w *= n;
    w *= mass;
    Ok(w.square().cbrt())
}

/// Leading-order hard-edge approximation to the density of states at
/// `x ∈ (0, x*]`, built from the order-zero Bessel profile at argument
/// `w = ζ^{3/2}(x)`:
///
/// `ρ ≈ (π/2)·ψ_V(x)·w·[J₀²(w) + J₀'²(w)] + (c(x)/N)·w·J₀(w)·J₀'(w)`
///
/// with `c(x) = πNψ_V(x)/(2w) − β/(4x(β−x))`.  The first term carries the
/// bulk limit (for large `w` it oscillates around `ψ_V`), the second is the
/// `O(1/N)` edge correction generated by the logarithmic derivatives of the
/// outside scalar `a` and of the Bessel map.  Signs and branches were fixed
/// against the exact finite-`N` density and are locked by regression tests.
pub fn hard_edge_density(maps: &EdgeMaps, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !(x > &0u32 && x <= maps.hard_cutoff()) {
        return Err(Error::OutOfRange(format!(
            "hard-edge approximation holds on (0, {}]; got {}",
            format_sig(maps.hard_cutoff(), 10),
            format_sig(x, 10)
        )));
    }
    let bits = ctx.bits();
    let eq = maps.eq();
    let beta = eq.beta();
    let psi = eq.density(x, ctx);

    // w = ζ^{3/2}(x) = Nπ·F(x), computed without the 2/3–3/2 power round trip.
    let mut w = ctx.pi();
    w *= maps.n();
    w *= eq.cdf(x, ctx)?;

    let j0 = bessel_j0(&w, ctx);
    let j0p = bessel_j0_prime(&w, ctx);

    let mut bulk = (&j0 * &j0).complete(bits);
    bulk += (&j0p * &j0p).complete(bits);
    bulk *= &w;
    bulk *= &psi;
    bulk *= ctx.pi();
    bulk >>= 1u32;

    // c(x) = πNψ/(2w) − β/(4x(β−x))
    let mut c = ctx.pi();
    c *= maps.n();
    c *= &psi;
    c /= &w;
    c >>= 1u32;
    let mut denom = (beta - x).complete(bits);
    denom *= x;
    denom <<= 2u32;
    c -= beta / denom;

    let mut corr = c;
    corr *= &w;
    corr *= j0;
    corr *= j0p;
    corr /= maps.n();

    Ok(bulk + corr)
}

/// Leading-order soft-edge approximation to the density of states for
/// `|x − β|` inside the window: the Airy-kernel diagonal transplanted
/// through the map `f`,
///
/// `ρ ≈ (f'(x)/N)·[Ai'(f(x))² − f(x)·Ai(f(x))²]`.
///
/// Inside the support this oscillates around `ψ_V` with an `O(1/N)` error;
/// outside it inherits the super-exponential Airy decay.
pub fn soft_edge_density(maps: &EdgeMaps, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let bits = ctx.bits();
    let gap = (x - maps.eq().beta()).complete(bits).abs();
    if gap > *maps.soft_window() {
        return Err(Error::OutOfRange(format!(
            "soft-edge approximation holds within {} of the endpoint; got {}",
            format_sig(maps.soft_window(), 10),
            format_sig(x, 10)
        )));
    }
    let f = maps.f_airy(x, ctx)?;
    let fp = maps.f_airy_prime(x, ctx)?;
    let ai = airy_ai(&f, ctx);
    let aip = airy_ai_prime(&f, ctx);
    let mut v = aip.square();
    let mut sub = ai.square();
    sub *= &f;
    v -= sub;
    v *= fp;
    v /= maps.n();
    Ok(v)
}

/// The oscillatory hard-edge profile
/// `F₀(ζ) = [J₀²(ζ^{3/2}) + J₀'²(ζ^{3/2})]·ζ²`, defined for `ζ > 0`.
///
/// As a sum of squares it is nonnegative, and for large `ζ` it grows like
/// `(2/π)√ζ` with algebraically damped oscillations; see [`f0_expansion`].
pub fn f0_eval(zeta: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !(zeta > &0u32) {
        return Err(Error::Domain(format!(
            "the oscillatory profile is defined for positive arguments; got {}",
            format_sig(zeta, 10)
        )));
    }
    let bits = ctx.bits();
    let w = (zeta * &zeta.clone().sqrt()).complete(bits);
    let j0 = bessel_j0(&w, ctx);
    let j0p = bessel_j0_prime(&w, ctx);
    let mut v = j0.square();
    v += j0p.square();
    v *= zeta;
    v *= zeta;
    Ok(v)
}

/// Truncated large-`ζ` expansion of [`f0_eval`], with `1 ≤ terms ≤ 3`:
///
/// 1. `(2/π)·ζ^{1/2}`
/// 2. `− (1/π)·ζ^{−1}·cos(2ζ^{3/2})`
/// 3. `+ (1/(4π))·ζ^{−5/2}·(1 − sin(2ζ^{3/2}))`
///
/// The coefficients follow from the classical large-argument expansions of
/// `J₀` and `J₀'`; after the listed terms the remainder is `O(ζ^{−4})`.
pub fn f0_expansion(zeta: &Float, terms: u32, ctx: &PrecisionContext) -> Result<Float> {
    if !(zeta > &0u32) {
        return Err(Error::Domain(format!(
            "the oscillatory profile is defined for positive arguments; got {}",
            format_sig(zeta, 10)
        )));
    }
    if terms == 0 || terms > 3 {
        return Err(Error::OutOfRange(format!(
            "expansion is implemented for 1 to 3 terms; got {terms}"
        )));
    }
    let bits = ctx.bits();
    let pi = ctx.pi();
    let sqrt_zeta = zeta.clone().sqrt();
    let mut s = (&sqrt_zeta << 1u32).complete(bits);
    s /= &pi;
    if terms >= 2 {
        let phase = (zeta * &sqrt_zeta).complete(bits) << 1u32;
        let mut osc = phase.clone().cos();
        osc /= &pi;
        osc /= zeta;
        s -= osc;
        if terms >= 3 {
            let mut tail = ctx.f(1) - phase.sin();
            tail /= &pi;
            tail >>= 2u32;
            tail /= (zeta * zeta).complete(bits);
            tail /= sqrt_zeta;
            s += tail;
        }
    }
    Ok(s)
}

/// Scalar ingredients of the outside parametrix at real `z` off the
/// support, reduced to explicitly real expressions:
///
/// * `z ≥ β`: `a = ((z−β)/z)^{1/4}`, `φ = 2z−β+2√z√(z−β)`,
///   `D = (z/φ)^{α/2}`;
/// * `z < 0` (boundary value from the upper half plane, where the
///   principal-branch phases cancel): writing `s = −z`,
///   `a = ((s+β)/s)^{1/4}`, `φ = −(2s+β)−2√(s(s+β))` and
///   `D = (s/|φ|)^{α/2}`.
///
/// Points inside `[0, β)` are rejected: there the scalars live on a branch
/// cut and have no single real value.
pub fn outside_parametrix_scalars(
    eq: &EquilibriumData,
    z: &Float,
    ctx: &PrecisionContext,
) -> Result<(Float, Float, Float)> {
    let bits = ctx.bits();
    let beta = eq.beta();
    let alpha_half = {
        let mut a = ctx.from_rational(eq.potential().alpha());
        a >>= 1u32;
        a
    };
    // D = (z/φ)^{α/2} for a positive real ratio.
    let d_of = |ratio: Float| -> Float {
        let mut e = ratio.ln();
        e *= &alpha_half;
        e.exp()
    };
    if z >= beta {
        let dzb = (z - beta).complete(bits);
        let a = {
            let mut r = dzb.clone();
            r /= z;
            r.sqrt().sqrt()
        };
        let mut phi = (z << 1u32).complete(bits);
        phi -= beta;
        phi += (z.clone().sqrt() * dzb.sqrt()) << 1u32;
        let d = d_of((z / &phi).complete(bits));
        Ok((a, phi, d))
    } else if *z < 0u32 {
        let s = (-z).complete(bits);
        let spb = (&s + beta).complete(bits);
        let a = {
            let mut r = spb.clone();
            r /= &s;
            r.sqrt().sqrt()
        };
        let root = ((&s * &spb).complete(bits)).sqrt() << 1u32;
        let mut mag = (&s << 1u32).complete(bits);
        mag += beta;
        mag += &root;
        let d = d_of((&s / &mag).complete(bits));
        Ok((a, -mag, d))
    } else {
        Err(Error::Domain(format!(
            "outside-parametrix scalars are defined off the support [0, β); got {}",
            format_sig(z, 10)
        )))
    }
}
