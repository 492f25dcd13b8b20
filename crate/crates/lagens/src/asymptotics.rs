//! Large-`N` expansion machinery: the leading free-energy coefficient by
//! two independent routes, least-squares fits of sweep data in powers of
//! `N`, Richardson extrapolation, and even-power decay diagnostics.
//!
//! The normalized log partition ratio `(1/N²)·log(Z_N[t]/Z_N[0])` admits an
//! expansion `e₀ + e₁/N² + e₂/N⁴ + …` in even powers of `1/N`, and linear
//! eigenvalue statistics behave the same way.  Nothing in this module
//! asserts values for the subleading coefficients — no closed forms exist —
//! so they are only estimated and cross-checked:
//!
//! * [`e0_path_oracle`] integrates equilibrium moments along the straight
//!   deformation path `s·t, s ∈ [0,1]`, while [`e0_energy_difference`]
//!   subtracts equilibrium energies of the two endpoint potentials.  The
//!   routes fail differently (outer quadrature versus `l_V` accuracy),
//!   which is why both are kept.
//! * [`fit_expansion`] solves `N⁴`-weighted normal equations in a
//!   caller-chosen set of powers of `N` and can inject an `N¹` probe term
//!   to measure how much odd-power signal the data carries.
//! * [`richardson`] eliminates even powers one at a time from a sequence
//!   sampled at geometrically spaced `N`.
//! * [`remainder_ratios`] checks that what the leading fitted terms leave
//!   behind decays like the next even power (`r(N)/r(2N) ≈ 4` for an
//!   `N^{−2}` remainder).

use crate::equilibrium::{
    endpoint_from_vprime, h_from_vprime, h_minimum, moment_from_h, EquilibriumData,
};
use crate::error::{Error, Result};
use crate::numerics::linalg::solve_dense;
use crate::numerics::quad::quad_smooth;
use crate::potential::Potential;
use crate::precision::{format_sig, PrecisionContext};
use rug::float::Special;
use rug::ops::{CompleteRound, Pow};
use rug::Float;

/// A weighted least-squares fit of sweep data in fixed powers of `N`.
#[derive(Debug, Clone)]
pub struct ExpansionFit {
    basis: Vec<i32>,
    coeffs: Vec<Float>,
    residuals: Vec<(u32, Float)>,
    odd_probe: Option<Float>,
    condition: Float,
}

impl ExpansionFit {
    /// The powers of `N` the fit was built on, in input order.
    pub fn basis(&self) -> &[i32] {
        &self.basis
    }

    /// Fitted coefficients, aligned with [`Self::basis`].
    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    /// Fit leftovers `y(N) − Σ_j ĉ_j N^{p_j}`, one per input sample.
    pub fn residuals(&self) -> &[(u32, Float)] {
        &self.residuals
    }

    /// Coefficient of the injected `N¹` term, when the probe was run.
    ///
    /// The probe refits with the basis augmented by the power `1`; on data
    /// with a purely even-power structure the extra coefficient comes out
    /// at noise level.  It is populated only when the sample count exceeds
    /// the augmented basis size and `1` is not already a basis power.
    pub fn odd_probe(&self) -> Option<&Float> {
        self.odd_probe.as_ref()
    }

    /// Conditioning estimate of the normal equations (pivot-magnitude
    /// ratio of the eliminated Gram matrix).
    pub fn condition(&self) -> &Float {
        &self.condition
    }

    /// Evaluate the fitted model `Σ_j ĉ_j N^{p_j}` at a sample size.
    pub fn eval(&self, n: u32, ctx: &PrecisionContext) -> Float {
        eval_basis(&self.basis, &self.coeffs, n, ctx)
    }
}

/// `N^p` at working precision for a (possibly negative) integer power.
fn n_power(n: u32, p: i32, ctx: &PrecisionContext) -> Float {
    Float::with_val(ctx.bits(), n).pow(p)
}

/// `Σ_j c_j N^{p_j}` for one sample size.
fn eval_basis(basis: &[i32], coeffs: &[Float], n: u32, ctx: &PrecisionContext) -> Float {
    let mut acc = Float::new(ctx.bits());
    for (p, c) in basis.iter().zip(coeffs) {
        acc += n_power(n, *p, ctx) * c;
    }
    acc
}

/// Leading coefficient `e₀(t)` as a path integral of equilibrium moments.
///
/// Along the straight deformation path `r(s) = s·t` the `s`-derivative of
/// the limiting free energy is `−Σ_l t_l · m_l(s·t)`, where `m_l(r)` is the
/// `l`-th moment of the equilibrium measure for the potential with
/// coefficients `r`; integrating over `s ∈ [0,1]` gives `e₀`.  The moments
/// come from the closed-form endpoint/density data of each path potential,
/// and the outer integral uses adaptive smooth quadrature.
///
/// Every path potential must itself be one-cut regular: the first failure
/// (endpoint bracketing, or `h` dipping to zero on the support) aborts the
/// quadrature and is reported together with the failing `s`.
pub fn e0_path_oracle(p: &Potential, ctx: &PrecisionContext) -> Result<Float> {
    if p.t().is_empty() {
        return Ok(ctx.zero());
    }
    let bits = ctx.bits();
    let mut failure: Option<Error> = None;
    let outcome = quad_smooth(
        |s| match path_moment_sum(p, s, ctx) {
            Ok(v) => v,
            Err(e) => {
                if failure.is_none() {
                    failure = Some(Error::NotOneCut(format!(
                        "deformation path fails at s = {}: {e}",
                        format_sig(s, 6)
                    )));
                }
                Float::with_val(bits, Special::Nan)
            }
        },
        &ctx.zero(),
        &ctx.f(1),
        ctx,
        None,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(-outcome?)
}

/// `Σ_l t_l · m_l(s·t)` for one point on the deformation path.
fn path_moment_sum(p: &Potential, s: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let bits = ctx.bits();
    // V′ of the path potential x + Σ s·tₖ xᵏ: the constant term
    // interpolates between 1 and its full value, every higher coefficient
    // scales linearly with s.
    let full = p.vprime_coeffs(ctx);
    let mut scaled = Vec::with_capacity(full.len());
    for (i, coeff) in full.iter().enumerate() {
        if i == 0 {
            let mut c0 = coeff - ctx.f(1);
            c0 *= s;
            c0 += 1u32;
            scaled.push(c0);
        } else {
            scaled.push((coeff * s).complete(bits));
        }
    }
    let beta = endpoint_from_vprime(&scaled, ctx)?;
    let h = h_from_vprime(&scaled, &beta, ctx);
    let h_min = h_minimum(&h, &beta, ctx)?;
    if h_min <= 0u32 {
        return Err(Error::NotOneCut(format!(
            "h attains minimum {} on the support",
            format_sig(&h_min, 6)
        )));
    }
    let mut acc = Float::new(bits);
    for (k, t_k) in p.t().iter().enumerate() {
        if *t_k == 0 {
            continue;
        }
        let moment = moment_from_h(&h, &beta, (k + 1) as u32, ctx);
        acc += moment * ctx.from_rational(t_k);
    }
    Ok(acc)
}

/// Leading coefficient `e₀(t)` as a difference of equilibrium energies.
///
/// With `I_V = (∫V dμ_V − l_V)/2`, the Euler–Lagrange identity gives
/// `e₀ = I_{V₀} − I_{V_t}`; both energies come from closed-form moments of
/// the solved equilibrium data, so this route exercises `l_V` rather than
/// an outer quadrature.
pub fn e0_energy_difference(p: &Potential, ctx: &PrecisionContext) -> Result<Float> {
    let base = Potential::undeformed(p.alpha().clone())?;
    let i_base = equilibrium_energy(&base, ctx)?;
    let i_deformed = equilibrium_energy(p, ctx)?;
    Ok(i_base - i_deformed)
}

/// Equilibrium energy `I_V = (∫V dμ_V − l_V)/2` from solved data.
fn equilibrium_energy(p: &Potential, ctx: &PrecisionContext) -> Result<Float> {
    let eq = EquilibriumData::solve(p, ctx)?;
    let mut mean_v = moment_from_h(eq.h_coeffs(), eq.beta(), 1, ctx);
    for (k, t_k) in p.t().iter().enumerate() {
        if *t_k == 0 {
            continue;
        }
        let moment = moment_from_h(eq.h_coeffs(), eq.beta(), (k + 1) as u32, ctx);
        mean_v += moment * ctx.from_rational(t_k);
    }
    let mut energy = mean_v - eq.l_v();
    energy >>= 1u32;
    Ok(energy)
}

/// Weighted least-squares fit of sweep samples in fixed powers of `N`.
///
/// Models `y(N) = Σ_j c_j N^{p_j}` over the given basis exponents and
/// solves the normal equations with weights `N⁴`, emphasizing the large-`N`
/// rows where the expansion is most accurate.  A square system (as many
/// samples as basis powers) degenerates to exact interpolation and is
/// allowed.  When at least two more samples than basis powers are supplied
/// and `1` is not a basis power, the fit is repeated with an injected `N¹`
/// term and the extra coefficient is reported as [`ExpansionFit::odd_probe`].
pub fn fit_expansion(
    samples: &[(u32, Float)],
    basis: &[i32],
    ctx: &PrecisionContext,
) -> Result<ExpansionFit> {
    if basis.is_empty() {
        return Err(Error::Domain("expansion basis is empty".into()));
    }
    for (i, p) in basis.iter().enumerate() {
        if basis[..i].contains(p) {
            return Err(Error::Domain(format!("duplicate basis power {p}")));
        }
    }
    if samples.len() < basis.len() {
        return Err(Error::Domain(format!(
            "{} samples cannot determine {} coefficients",
            samples.len(),
            basis.len()
        )));
    }
    for (i, (n, _)) in samples.iter().enumerate() {
        if *n == 0 {
            return Err(Error::Domain("sample sizes must be positive".into()));
        }
        if samples[..i].iter().any(|(m, _)| m == n) {
            return Err(Error::Domain(format!("duplicate sample at N = {n}")));
        }
    }

    let (coeffs, condition) = weighted_power_fit(samples, basis, ctx)?;
    let residuals = samples
        .iter()
        .map(|(n, y)| (*n, y - eval_basis(basis, &coeffs, *n, ctx)))
        .collect();
    let odd_probe = if !basis.contains(&1) && samples.len() >= basis.len() + 2 {
        let mut augmented = basis.to_vec();
        augmented.push(1);
        weighted_power_fit(samples, &augmented, ctx)
            .ok()
            .map(|(c, _)| c[basis.len()].clone())
    } else {
        None
    };
    Ok(ExpansionFit {
        basis: basis.to_vec(),
        coeffs,
        residuals,
        odd_probe,
        condition,
    })
}

/// Assemble and solve the `N⁴`-weighted normal equations for one basis.
fn weighted_power_fit(
    samples: &[(u32, Float)],
    powers: &[i32],
    ctx: &PrecisionContext,
) -> Result<(Vec<Float>, Float)> {
    let bits = ctx.bits();
    let k = powers.len();
    let mut gram = vec![vec![Float::new(bits); k]; k];
    let mut rhs = vec![Float::new(bits); k];
    for (n, y) in samples {
        let row: Vec<Float> = powers.iter().map(|p| n_power(*n, *p, ctx)).collect();
        let weight = n_power(*n, 4, ctx);
        for j in 0..k {
            let wj = (&weight * &row[j]).complete(bits);
            rhs[j] += (&wj * y).complete(bits);
            for l in j..k {
                gram[j][l] += (&wj * &row[l]).complete(bits);
            }
        }
    }
    for j in 0..k {
        for l in 0..j {
            gram[j][l] = gram[l][j].clone();
        }
    }
    let solved = solve_dense(gram, rhs, ctx)?;
    Ok((solved.solution, solved.pivot_ratio))
}

/// Richardson extrapolation of a sequence sampled at geometric `N`.
///
/// Assumes `value(N) = limit + Σ_m a_m N^{−2m}` and eliminates the first
/// `order` even powers: with ratio `q` between consecutive sample sizes,
/// stage `m` replaces `T_i` by `(q^{2m}·T_{i+1} − T_i)/(q^{2m} − 1)`.
/// Returns the deepest entry, which is built from the largest sizes.
pub fn richardson(values: &[(u32, Float)], order: u32, ctx: &PrecisionContext) -> Result<Float> {
    if order == 0 {
        return Err(Error::OutOfRange(
            "extrapolation order must be at least 1".into(),
        ));
    }
    if values.len() < order as usize + 1 {
        return Err(Error::OutOfRange(format!(
            "order {} needs at least {} values, got {}",
            order,
            order + 1,
            values.len()
        )));
    }
    if values[0].0 == 0 {
        return Err(Error::Domain("sample sizes must be positive".into()));
    }
    let n0 = u64::from(values[0].0);
    let n1 = u64::from(values[1].0);
    for pair in values.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::Domain(format!(
                "sample sizes must increase strictly: {} then {}",
                pair[0].0, pair[1].0
            )));
        }
        if u64::from(pair[1].0) * n0 != u64::from(pair[0].0) * n1 {
            return Err(Error::Domain(format!(
                "sample sizes are not geometric: {} then {} breaks the ratio {}/{}",
                pair[0].0, pair[1].0, values[1].0, values[0].0
            )));
        }
    }
    let bits = ctx.bits();
    let q2 = {
        let ratio = Float::with_val(bits, values[1].0) / values[0].0;
        ratio.square()
    };
    let mut tableau: Vec<Float> = values
        .iter()
        .map(|(_, v)| Float::with_val(bits, v))
        .collect();
    let mut factor = ctx.f(1);
    for _ in 0..order {
        factor *= &q2;
        let denom = factor.clone() - 1u32;
        let shrunk = tableau.len() - 1;
        for i in 0..shrunk {
            let mut next = (&factor * &tableau[i + 1]).complete(bits);
            next -= &tableau[i];
            next /= &denom;
            tableau[i] = next;
        }
        tableau.truncate(shrunk);
    }
    Ok(tableau.pop().expect("tableau keeps at least one entry"))
}

/// Decay diagnostics: remainder ratios `r(N)/r(2N)` over every sample pair
/// whose sizes differ by a factor of two.
///
/// The remainder keeps only the first `keep` fitted terms: `r(N) = y(N) −
/// Σ_{j<keep} ĉ_j N^{p_j}`.  A remainder dominated by a single even power
/// `N^{−2m}` drives every ratio toward `4^m`; with `keep = 2` on an
/// even-power fit, values near 4 confirm the `N^{−2}` structure of what
/// the leading terms leave behind.  Passing `keep` equal to the basis size
/// reduces to ratios of the plain fit residuals.  Pairs whose `2N`
/// remainder is exactly zero are skipped.
pub fn remainder_ratios(
    fit: &ExpansionFit,
    keep: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<(u32, u32, Float)>> {
    if keep == 0 || keep > fit.basis.len() {
        return Err(Error::OutOfRange(format!(
            "keep count {keep} outside 1..={}",
            fit.basis.len()
        )));
    }
    let bits = ctx.bits();
    // Stored residuals subtract the whole model; add the dropped tail back.
    let remainder = |n: u32, r: &Float| {
        let mut rem = Float::with_val(bits, r);
        for j in keep..fit.basis.len() {
            rem += n_power(n, fit.basis[j], ctx) * &fit.coeffs[j];
        }
        rem
    };
    let mut out = Vec::new();
    for (n, r) in fit.residuals() {
        let Some(doubled) = n.checked_mul(2) else {
            continue;
        };
        if let Some((_, r2)) = fit.residuals().iter().find(|(m, _)| *m == doubled) {
            let top = remainder(*n, r);
            let bottom = remainder(doubled, r2);
            if bottom.is_zero() {
                continue;
            }
            out.push((*n, doubled, top / bottom));
        }
    }
    Ok(out)
}
