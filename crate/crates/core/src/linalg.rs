//! Small dense complex linear algebra: Hermitian eigendecomposition by
//! cyclic Jacobi rotations and pivoted Gaussian elimination.
//!
//! Problem sizes here are a few dozen rows at most, so clarity wins over
//! blocking or LAPACK bindings.

use ndarray::{Array1, Array2};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};

const MAX_SWEEPS: usize = 100;

fn czero<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column `i` is the unit eigenvector of `values[i]`.
    pub vectors: Array2<C<T>>,
}

/// Decompose a Hermitian matrix. Only the upper triangle's Hermitian part
/// is trusted; the input is symmetrized first.
pub fn hermitian_eigen<T: Scalar>(a: &Array2<C<T>>) -> Result<HermitianEigen<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("eigen of a {}x{} matrix", n, a.ncols())));
    }
    let half = T::of(0.5);
    let mut m = Array2::from_shape_fn((n, n), |(i, j)| (a[[i, j]] + a[[j, i]].conj()) * half);
    let mut v = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            Complex::new(T::one(), T::zero())
        } else {
            czero()
        }
    });
    let scale: T = m.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let tol = T::epsilon() * scale;

    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                let r = apq.norm();
                if r <= T::min_positive_value() {
                    continue;
                }
                let phase = apq / r;
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let theta = (aqq - app) / (T::of(2.0) * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                // U restricted to (p, q) = diag(1, conj(phase)) · [[c, s], [−s, c]]
                let u_pp = Complex::new(c, T::zero());
                let u_pq = Complex::new(s, T::zero());
                let u_qp = phase.conj() * (-s);
                let u_qq = phase.conj() * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = mkp * u_pp + mkq * u_qp;
                    m[[k, q]] = mkp * u_pq + mkq * u_qq;
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * u_pp + vkq * u_qp;
                    v[[k, q]] = vkp * u_pq + vkq * u_qq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = u_pp.conj() * mpk + u_qp.conj() * mqk;
                    m[[q, k]] = u_pq.conj() * mpk + u_qq.conj() * mqk;
                }
                m[[p, q]] = czero();
                m[[q, p]] = czero();
                m[[p, p]] = Complex::new(m[[p, p]].re, T::zero());
                m[[q, q]] = Complex::new(m[[q, q]].re, T::zero());
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].re.partial_cmp(&m[[j, j]].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[[i, i]].re).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    Ok(HermitianEigen { values, vectors })
}

/// Solve `a·x = b` by Gaussian elimination with partial pivoting.
/// A pivot below `rel_tol·max|a|` is reported as ill-conditioning.
pub fn solve<T: Scalar>(a: &Array2<C<T>>, b: &[C<T>], rel_tol: T) -> Result<Vec<C<T>>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Dimension(format!(
            "solve with a {}x{} matrix and {} right-hand sides",
            n,
            a.ncols(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut x: Array1<C<T>> = Array1::from(b.to_vec());
    let amax = m.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let floor = rel_tol * amax;
    let mut min_pivot = T::infinity();
    for col in 0..n {
        let (piv, pmag) = (col..n)
            .map(|r| (r, m[[r, col]].norm()))
            .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        min_pivot = min_pivot.min(pmag);
        if !(pmag > floor) {
            let condition = if pmag > T::zero() { (amax / pmag).to_f64_lossy() } else { f64::INFINITY };
            return Err(Error::Conditioning { condition });
        }
        if piv != col {
            for k in 0..n {
                m.swap([col, k], [piv, k]);
            }
            x.swap(col, piv);
        }
        let d = m[[col, col]];
        for r in (col + 1)..n {
            let f = m[[r, col]] / d;
            if f == czero() {
                continue;
            }
            for k in col..n {
                let v = m[[col, k]];
                m[[r, k]] -= f * v;
            }
            let xc = x[col];
            x[r] -= f * xc;
        }
    }
    for r in (0..n).rev() {
        let mut acc = x[r];
        for k in (r + 1)..n {
            acc -= m[[r, k]] * x[k];
        }
        x[r] = acc / m[[r, r]];
    }
    Ok(x.to_vec())
}

/// `aᴴ·b`
pub fn inner<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr<T: Scalar>(a: &[C<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}
