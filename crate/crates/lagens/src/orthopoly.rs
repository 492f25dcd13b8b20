//! Orthonormal polynomials for the weight `x^α e^{−N V(x)}` on `(0, ∞)`.
//!
//! Two independent constructions of the three-term recurrence table are
//! provided: a Hankel/Cholesky route built from power moments, and a
//! discretized Stieltjes procedure on an exp-sinh auxiliary rule.  The
//! moment route is exact but ill-conditioned (it needs roughly twice the
//! output digits); the Stieltjes route is numerically stable.  Their
//! agreement is the module's core self-check.

use crate::error::{Error, Result};
use crate::numerics::quad::{quad_semiinfinite, weight_grid, PositiveGrid};
use crate::numerics::special::loggamma;
use crate::numerics::linalg::{cholesky_rows, tridiag_eigen};
use crate::potential::Potential;
use crate::precision::PrecisionContext;
use rug::ops::CompleteRound;
use rug::ops::Pow;
use rug::Float;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// A weight `w_N(x) = x^α e^{−N V_t(x)}` on the positive half-line.
#[derive(Debug, Clone)]
pub struct WeightSpec {
    potential: Potential,
    n: u32,
}

impl WeightSpec {
    /// Create a weight specification; `n` is the scaling parameter in the
    /// exponent and must be positive.
    pub fn new(potential: Potential, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("weight parameter N must be ≥ 1".into()));
        }
        Ok(Self { potential, n })
    }

    /// The potential in the exponent.
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// The scaling parameter `N`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `log w_N(x) = α log x − N V(x)` for `x > 0`.
    pub fn log_weight(&self, x: &Float, ctx: &PrecisionContext) -> Float {
        let mut acc = -self.potential.eval(x, ctx);
        acc *= self.n;
        if *self.potential.alpha() != 0u32 {
            acc += ctx.from_rational(self.potential.alpha()) * x.clone().ln();
        }
        acc
    }

    /// Pointwise weight value `w_N(x)` for `x > 0`.
    pub fn weight(&self, x: &Float, ctx: &PrecisionContext) -> Float {
        self.log_weight(x, ctx).exp()
    }

    /// Stable identity for caching.
    fn cache_key(&self) -> String {
        format!("{};N={}", self.potential.key(), self.n)
    }
}

/// Shared cache of quadrature moments, keyed by weight, count, and digits.
static MOMENT_CACHE: OnceLock<Mutex<HashMap<(String, u32), Vec<Float>>>> = OnceLock::new();

/// Power moments `μ_k = ∫₀^∞ x^{k+α} e^{−N V(x)} dx` for `k < count`.
///
/// At `t = 0` the closed form `μ_k = Γ(k+α+1)/N^{k+α+1}` is used; otherwise
/// each moment is computed with the double-exponential semi-infinite rule.
/// Quadrature moments are cached per `(weight, digits)` since fitting
/// sweeps request the same lists repeatedly.
pub fn moments(spec: &WeightSpec, count: u32, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    if count == 0 {
        return Err(Error::OutOfRange("moment count must be ≥ 1".into()));
    }
    if spec.potential().t().is_empty() {
        return closed_form_moments(spec, count, ctx);
    }
    let key = (spec.cache_key(), ctx.digits());
    {
        let cache = MOMENT_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let guard = cache.lock().expect("moment cache poisoned");
        if let Some(cached) = guard.get(&key) {
            if cached.len() >= count as usize {
                return Ok(cached[..count as usize].to_vec());
            }
        }
    }
    let computed = quadrature_moments(spec, count, ctx)?;
    let cache = MOMENT_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("moment cache poisoned");
    let entry = guard.entry(key).or_default();
    if entry.len() < computed.len() {
        *entry = computed.clone();
    }
    Ok(computed)
}

/// Closed-form moments of the undeformed weight: `Γ(k+α+1)/N^{k+α+1}`.
fn closed_form_moments(spec: &WeightSpec, count: u32, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let wctx = ctx.widened(10);
    let alpha = wctx.from_rational(spec.potential().alpha());
    let log_n = wctx.f(spec.n()).ln();
    let mut out = Vec::with_capacity(count as usize);
    for k in 0..count {
        let arg = (&alpha + (k + 1)).complete(wctx.bits());
        let mut log_mu = loggamma(&arg, &wctx)?;
        log_mu -= arg * &log_n;
        out.push(ctx.settle(log_mu.exp()));
    }
    Ok(out)
}

/// Moments by the double-exponential semi-infinite rule, one integral per
/// moment.  Exposed to tests so the closed form and the quadrature can be
/// compared directly.
pub(crate) fn quadrature_moments(
    spec: &WeightSpec,
    count: u32,
    ctx: &PrecisionContext,
) -> Result<Vec<Float>> {
    let zero = ctx.zero();
    let decay = f64::from(spec.n());
    let mut out = Vec::with_capacity(count as usize);
    for k in 0..count {
        let mu = quad_semiinfinite(
            |x| spec.weight(x, ctx) * x.clone().pow(k),
            &zero,
            decay,
            ctx,
        )?;
        out.push(mu);
    }
    Ok(out)
}

/// Recurrence table of the orthonormal polynomials for a weight:
/// `p_{n}` satisfies `x p_n = (b_{n+1}/?)…` in monic form
/// `π_{k+1}(x) = (x − a_k) π_k(x) − b_k² π_{k−1}(x)`,
/// with squared norms `norm2_k = ⟨π_k, π_k⟩` and leading coefficients
/// `γ_k = norm2_k^{−1/2}` of the orthonormal normalization.
#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    spec: WeightSpec,
    nmax: usize,
    a: Vec<Float>,
    b: Vec<Float>,
    norm2: Vec<Float>,
    gamma: Vec<Float>,
}

impl RecurrenceTable {
    /// The weight this table belongs to.
    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    /// Largest polynomial degree covered by the table.
    pub fn nmax(&self) -> usize {
        self.nmax
    }

    /// Diagonal recurrence coefficients `a_0 … a_nmax`.
    pub fn a(&self) -> &[Float] {
        &self.a
    }

    /// Off-diagonal recurrence coefficients `b_1 … b_nmax`.
    pub fn b(&self) -> &[Float] {
        &self.b
    }

    /// Squared norms of the monic polynomials, `norm2_0 … norm2_nmax`.
    pub fn norm2(&self) -> &[Float] {
        &self.norm2
    }

    /// Leading coefficients `γ_0 … γ_nmax` of the orthonormal polynomials.
    pub fn gamma(&self) -> &[Float] {
        &self.gamma
    }

    /// Orthonormal polynomial value `p_n(x) = γ_n π_n(x)`.
    pub fn eval_orthonormal(&self, n: usize, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
        if n > self.nmax {
            return Err(Error::OutOfRange(format!(
                "degree {} exceeds table maximum {}",
                n, self.nmax
            )));
        }
        let (monic, _) = self.eval_monic_with_prime(n, x, ctx);
        Ok(monic * &self.gamma[n])
    }

    /// Monic polynomial `π_n(x)` and its derivative by forward recurrence.
    pub(crate) fn eval_monic_with_prime(
        &self,
        n: usize,
        x: &Float,
        ctx: &PrecisionContext,
    ) -> (Float, Float) {
        let bits = ctx.bits();
        let mut prev = ctx.f(1);
        let mut prev_d = Float::new(bits);
        if n == 0 {
            return (prev, prev_d);
        }
        let mut cur = (x - &self.a[0]).complete(bits);
        let mut cur_d = ctx.f(1);
        for k in 1..n {
            let xa = (x - &self.a[k]).complete(bits);
            let b2 = self.b[k - 1].clone().square();
            let next = (&xa * &cur).complete(bits) - (&b2 * &prev).complete(bits);
            let next_d = (&xa * &cur_d).complete(bits) + &cur - b2 * &prev_d;
            prev = cur;
            prev_d = cur_d;
            cur = next;
            cur_d = next_d;
        }
        (cur, cur_d)
    }

    /// Gauss rule with `m` nodes for the weight, from the Jacobi matrix.
    ///
    /// Nodes are the eigenvalues of the `m × m` Jacobi matrix; the weight of
    /// a node is `norm2_0` times the squared first eigenvector component.
    /// Requires `m ≤ nmax + 1`.
    pub fn gauss_rule(&self, m: usize, ctx: &PrecisionContext) -> Result<PositiveGrid> {
        if m == 0 || m > self.nmax + 1 {
            return Err(Error::OutOfRange(format!(
                "Gauss rule size {} outside 1..={}",
                m,
                self.nmax + 1
            )));
        }
        let eig = tridiag_eigen(&self.a[..m], &self.b[..m - 1], ctx)?;
        let weights = eig
            .first_components
            .iter()
            .map(|z| z.clone().square() * &self.norm2[0])
            .collect();
        Ok(PositiveGrid {
            nodes: eig.values,
            weights,
        })
    }
}

/// Build a recurrence table from power moments via the Hankel/Cholesky
/// factorization.
///
/// The Hankel matrix `H_{ij} = μ_{i+j}` of size `nmax+2` (with a trapezoidal
/// final row) is factorized as `L Lᵀ`; then `norm2_n = L_nn²`,
/// `b_n = L_nn / L_{n−1,n−1}`, and `a_n = L_{n+1,n}/L_nn − L_{n,n−1}/L_{n−1,n−1}`.
/// The table covers degrees up to `nmax = len(moms)/2 − 1`.
///
/// Loss of positive definiteness (the typical symptom of too few working
/// digits, since Hankel conditioning grows factorially) is reported with
/// the failing minor index.
pub fn recurrence_from_moments(
    spec: &WeightSpec,
    moms: &[Float],
    ctx: &PrecisionContext,
) -> Result<RecurrenceTable> {
    if moms.len() < 4 {
        return Err(Error::OutOfRange(
            "need at least 4 moments for a degree-1 table".into(),
        ));
    }
    let nmax = moms.len() / 2 - 1;
    let bits = ctx.bits();
    let width = nmax + 1;
    let mut rows: Vec<Vec<Float>> = Vec::with_capacity(nmax + 2);
    for i in 0..=nmax + 1 {
        let w = (i + 1).min(width);
        let mut row = Vec::with_capacity(w);
        for j in 0..w {
            row.push(moms[i + j].clone());
        }
        rows.push(row);
    }
    let l = cholesky_rows(&rows, ctx).map_err(|idx| {
        Error::PrecisionLoss(format!(
            "Hankel moment matrix lost positive definiteness at minor {} \
             (working precision {} digits is likely insufficient)",
            idx + 1,
            ctx.digits()
        ))
    })?;

    let mut a = Vec::with_capacity(nmax + 1);
    let mut b = Vec::with_capacity(nmax);
    let mut norm2 = Vec::with_capacity(nmax + 1);
    let mut gamma = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let diag = &l[n][n];
        norm2.push(diag.clone().square());
        gamma.push(ctx.f(1) / diag);
        let mut an = (&l[n + 1][n] / diag).complete(bits);
        if n > 0 {
            an -= (&l[n][n - 1] / &l[n - 1][n - 1]).complete(bits);
            b.push((diag / &l[n - 1][n - 1]).complete(bits));
        }
        a.push(an);
    }
    Ok(RecurrenceTable {
        spec: spec.clone(),
        nmax,
        a,
        b,
        norm2,
        gamma,
    })
}

/// Build a recurrence table by the discretized Stieltjes procedure.
///
/// An exp-sinh auxiliary rule for the weight is refined until its `μ_0` and
/// `μ_{2nmax+2}` estimates stabilize at the quadrature target, then the
/// standard inner-product updates produce `a`, `b`, and the norms.  This
/// route is numerically stable at the output precision and serves as the
/// independent cross-check of [`recurrence_from_moments`].
pub fn stieltjes_recurrence(
    spec: &WeightSpec,
    nmax: usize,
    ctx: &PrecisionContext,
) -> Result<RecurrenceTable> {
    if nmax == 0 {
        return Err(Error::OutOfRange("table degree must be ≥ 1".into()));
    }
    let bits = ctx.bits();
    let maxdeg = 2 * nmax as u32 + 2;
    let log_w = |x: &Float| spec.log_weight(x, ctx);

    // Refine the auxiliary rule until two consecutive levels agree on the
    // lowest and highest monitored moments.
    let target = ctx.quad_target();
    let mut grid: Option<PositiveGrid> = None;
    let mut prev: Option<(Float, Float)> = None;
    for level in 5..=12 {
        let candidate = weight_grid(&log_w, maxdeg, level, ctx);
        let mut mu0 = Float::new(bits);
        let mut mu_hi = Float::new(bits);
        for (x, w) in candidate.nodes.iter().zip(&candidate.weights) {
            mu0 += w;
            mu_hi += w * x.clone().pow(maxdeg);
        }
        if let Some((p0, p_hi)) = &prev {
            let d0 = (&mu0 - p0).complete(bits).abs();
            let dhi = (&mu_hi - p_hi).complete(bits).abs();
            let s0 = (ctx.f(1) + mu0.clone().abs()) * &target;
            let shi = (ctx.f(1) + mu_hi.clone().abs()) * &target;
            if d0 <= s0 && dhi <= shi {
                grid = Some(candidate);
                break;
            }
        }
        prev = Some((mu0, mu_hi));
    }
    let grid = grid.ok_or_else(|| {
        Error::PrecisionLoss(
            "auxiliary Stieltjes rule did not stabilize by level 12".into(),
        )
    })?;

    let m = grid.nodes.len();
    let mut pi_prev = vec![Float::new(bits); m];
    let mut pi_cur = vec![ctx.f(1); m];

    let mut a = Vec::with_capacity(nmax + 1);
    let mut b = Vec::with_capacity(nmax);
    let mut norm2 = Vec::with_capacity(nmax + 1);
    let mut gamma = Vec::with_capacity(nmax + 1);

    let mut prev_norm: Option<Float> = None;
    for k in 0..=nmax {
        let mut nrm = Float::new(bits);
        let mut xw = Float::new(bits);
        for ((x, w), p) in grid.nodes.iter().zip(&grid.weights).zip(&pi_cur) {
            let p2w = (p * p).complete(bits) * w;
            nrm += &p2w;
            xw += p2w * x;
        }
        if !(nrm > 0u32) {
            return Err(Error::PrecisionLoss(format!(
                "Stieltjes norm collapsed at degree {} (increase digits)",
                k
            )));
        }
        let ak = xw / &nrm;
        let bk2 = prev_norm.as_ref().map(|pn| (&nrm / pn).complete(bits));
        if let Some(b2) = &bk2 {
            b.push(b2.clone().sqrt());
        }
        norm2.push(nrm.clone());
        gamma.push(ctx.f(1) / nrm.clone().sqrt());
        a.push(ak.clone());

        if k < nmax {
            // π_{k+1} = (x − a_k) π_k − b_k² π_{k−1} at every node.
            let b2 = bk2.unwrap_or_else(|| Float::new(bits));
            let mut next = Vec::with_capacity(m);
            for (i, x) in grid.nodes.iter().enumerate() {
                let xa = (x - &ak).complete(bits);
                let mut v = xa * &pi_cur[i];
                if k > 0 {
                    v -= (&b2 * &pi_prev[i]).complete(bits);
                }
                next.push(v);
            }
            pi_prev = std::mem::replace(&mut pi_cur, next);
        }
        prev_norm = Some(nrm);
    }

    Ok(RecurrenceTable {
        spec: spec.clone(),
        nmax,
        a,
        b,
        norm2,
        gamma,
    })
}

/// Working-digit estimate for a table up to degree `nmax`:
/// `2 · nmax · log₁₀(max(nmax, 2)) + 30`.  Hankel conditioning grows
/// factorially, so the moment route needs digits on this order; the
/// two-route agreement check then confirms the choice a posteriori.
pub fn auto_digits(nmax: usize) -> u32 {
    let n = nmax.max(2) as f64;
    (2.0 * nmax as f64 * n.log10()).ceil() as u32 + 30
}
