//! Small dense linear-algebra kernels at working precision: a symmetric
//! tridiagonal eigensolver tracking first eigenvector components (the
//! Golub–Welsch ingredient), a row-wise Cholesky factorization, and Gaussian
//! elimination with partial pivoting for small normal-equation systems.

use rug::float::Special;
use rug::ops::CompleteRound;
use rug::Float;

use crate::error::{Error, Result};
use crate::precision::PrecisionContext;

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each normalized eigenvector, sorted by ascending eigenvalue.
pub(crate) struct TridiagEigen {
    pub values: Vec<Float>,
    pub first_components: Vec<Float>,
}

/// Implicit QL iteration with shifts on a symmetric tridiagonal matrix
/// (`diag` of length n, `off` the n−1 subdiagonal entries), accumulating only
/// the first row of the orthogonal transform.
pub(crate) fn tridiag_eigen(
    diag: &[Float],
    off: &[Float],
    ctx: &PrecisionContext,
) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagEigen {
            values: Vec::new(),
            first_components: Vec::new(),
        });
    }
    if off.len() + 1 != n {
        return Err(Error::OutOfRange(format!(
            "tridiagonal shape mismatch: {} diagonal vs {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    let bits = ctx.bits();
    let mut d: Vec<Float> = diag.iter().map(|v| Float::with_val(bits, v)).collect();
    let mut e: Vec<Float> = (0..n)
        .map(|i| {
            if i + 1 < n {
                Float::with_val(bits, &off[i])
            } else {
                Float::new(bits)
            }
        })
        .collect();
    let mut z: Vec<Float> = (0..n)
        .map(|i| Float::with_val(bits, u32::from(i == 0)))
        .collect();
    let mut eps = Float::with_val(bits, 1);
    eps >>= bits.saturating_sub(1);

    for l in 0..n {
        let mut sweeps = 0usize;
        loop {
            // Find the first negligible subdiagonal entry at or after l.
            let mut m = l;
            while m + 1 < n {
                let dd = (d[m].clone().abs() + d[m + 1].clone().abs()) * &eps;
                if e[m].clone().abs() <= dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > 80 {
                return Err(Error::RootFinding(format!(
                    "QL iteration for eigenvalue {l} did not converge in 80 sweeps"
                )));
            }

            // Shifted QL sweep over rows l..m.
            let mut g = (&d[l + 1] - &d[l]).complete(bits) / (e[l].clone() * 2u32);
            let r = g.clone().hypot(&Float::with_val(bits, 1));
            let denom = g.clone() + r.copysign(&g);
            g = (&d[m] - &d[l]).complete(bits) + (&e[l] / &denom).complete(bits);

            let mut s = Float::with_val(bits, 1);
            let mut c = Float::with_val(bits, 1);
            let mut p = Float::new(bits);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = (&s * &e[i]).complete(bits);
                let b = (&c * &e[i]).complete(bits);
                let r = f.clone().hypot(&g);
                e[i + 1] = r.clone();
                if r.is_zero() {
                    d[i + 1] -= &p;
                    e[m] = Float::new(bits);
                    underflow = true;
                    break;
                }
                s = (&f / &r).complete(bits);
                c = (&g / &r).complete(bits);
                g = (&d[i + 1] - &p).complete(bits);
                let t = ((&d[i] - &g).complete(bits) * &s) + (b.clone() * &c * 2u32);
                p = (&s * &t).complete(bits);
                d[i + 1] = (&g + &p).complete(bits);
                g = (&c * &t).complete(bits) - &b;

                let f = z[i + 1].clone();
                z[i + 1] = (&s * &z[i]).complete(bits) + (&c * &f).complete(bits);
                z[i] = (&c * &z[i]).complete(bits) - (&s * &f).complete(bits);
            }
            if underflow {
                continue;
            }
            d[l] -= &p;
            e[l] = g;
            e[m] = Float::new(bits);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("finite eigenvalues"));
    Ok(TridiagEigen {
        values: order.iter().map(|&i| d[i].clone()).collect(),
        first_components: order.iter().map(|&i| z[i].clone()).collect(),
    })
}

/// Row-wise lower Cholesky factor of a symmetric positive-definite matrix
/// given by its lower-triangular rows (`a[i]` holds columns 0..=i).  Trailing
/// rows may be truncated short of the diagonal, in which case only the
/// available leading entries of that row of L are produced (the trapezoidal
/// factorization used for recurrence extraction).
///
/// On failure returns the 0-based row index whose leading minor stopped being
/// positive definite at working precision.
pub(crate) fn cholesky_rows(
    a: &[Vec<Float>],
    ctx: &PrecisionContext,
) -> std::result::Result<Vec<Vec<Float>>, usize> {
    let bits = ctx.bits();
    let mut l: Vec<Vec<Float>> = Vec::with_capacity(a.len());
    for (i, row) in a.iter().enumerate() {
        let width = row.len().min(i + 1);
        let mut lrow: Vec<Float> = Vec::with_capacity(width);
        for j in 0..width {
            let mut s = Float::with_val(bits, &row[j]);
            for k in 0..j {
                let other = if j < i { &l[j][k] } else { &lrow[k] };
                s -= (&lrow[k] * other).complete(bits);
            }
            if j < i {
                s /= &l[j][j];
                lrow.push(s);
            } else {
                if !(s > 0u32) {
                    return Err(i);
                }
                lrow.push(s.sqrt());
            }
        }
        l.push(lrow);
    }
    Ok(l)
}

/// Solution of a small dense linear system, along with the ratio of the
/// largest to smallest pivot magnitude seen during elimination (a cheap
/// conditioning proxy).
pub(crate) struct DenseSolution {
    pub solution: Vec<Float>,
    pub pivot_ratio: Float,
}

/// Gaussian elimination with partial pivoting on a square system.
pub(crate) fn solve_dense(
    mut a: Vec<Vec<Float>>,
    mut b: Vec<Float>,
    ctx: &PrecisionContext,
) -> Result<DenseSolution> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::OutOfRange(format!(
            "dense solve shape mismatch: {n} rows, rhs length {}",
            b.len()
        )));
    }
    let bits = ctx.bits();
    let mut max_piv = Float::new(bits);
    let mut min_piv = Float::with_val(bits, Special::Infinity);

    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].clone().abs() > a[piv][col].clone().abs() {
                piv = r;
            }
        }
        if a[piv][col].is_zero() {
            return Err(Error::RankDeficient(format!("zero pivot at column {col}")));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let mag = a[col][col].clone().abs();
        if mag > max_piv {
            max_piv = mag.clone();
        }
        if mag < min_piv {
            min_piv = mag;
        }
        for r in col + 1..n {
            let factor = (&a[r][col] / &a[col][col]).complete(bits);
            if factor.is_zero() {
                continue;
            }
            for cc in col..n {
                let delta = (&factor * &a[col][cc]).complete(bits);
                a[r][cc] -= delta;
            }
            let delta = (&factor * &b[col]).complete(bits);
            b[r] -= delta;
        }
    }

    let mut x = vec![Float::new(bits); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for col in row + 1..n {
            acc -= (&a[row][col] * &x[col]).complete(bits);
        }
        acc /= &a[row][row];
        x[row] = acc;
    }
    Ok(DenseSolution {
        solution: x,
        pivot_ratio: max_piv / min_piv,
    })
}
