//! Sparse symmetric solves: CSR storage, Jacobi-preconditioned conjugate gradients, and a dense
//! LU fallback for systems that are not positive definite.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;

/// Largest system handed to the dense fallback.
pub const DENSE_LIMIT: usize = 20_000;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:.3e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("system is singular (is the input connected?)")]
    Singular,
    #[error("system of size {n} exceeds the dense fallback limit {limit}")]
    TooLargeForDense { n: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Pcg,
    DenseLu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveStats {
    pub method: SolverMethod,
    pub iterations: usize,
    /// Worst `|b - A x| / |b|` over the right-hand sides.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Iteration stops once the relative residual drops below this.
    pub target: f64,
    /// Results above this relative residual are reported as failures.
    pub accept: f64,
    /// Iteration cap is `cap_factor * sqrt(n)`.
    pub cap_factor: f64,
}

impl SolverOptions {
    /// `1e-12` target and `1e-10` acceptance, loosened to a few hundred ulps for `f32`.
    pub fn for_scalar<T: Real>() -> Self {
        let eps = T::epsilon().as_f64();
        Self { target: 1e-12f64.max(100.0 * eps), accept: 1e-10f64.max(1000.0 * eps), cap_factor: 50.0 }
    }
}

#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Square matrix from `(row, col, value)` triplets; duplicates are summed in a fixed order.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut col = Vec::with_capacity(triplets.len());
        let mut val: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *val.last_mut().expect("entry exists") += v;
            } else {
                col.push(c);
                val.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col, val }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        for i in 0..self.n {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.col[k] == i)
                    .map_or(T::zero(), |k| self.val[k])
            })
            .collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col[k], self.val[k])))
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn relative_residual<T: Real>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> f64 {
    let mut ax = vec![T::zero(); a.n()];
    a.mul_vec(x, &mut ax);
    let r: f64 = ax.iter().zip(b).map(|(&p, &q)| (q - p).as_f64().powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v.as_f64().powi(2)).sum::<f64>().sqrt();
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess. Returns the iterate and
/// the number of iterations taken; convergence is judged by the caller on the true residual.
pub fn pcg<T: Real>(a: &CsrMatrix<T>, b: &[T], target: f64, max_iter: usize) -> (Vec<T>, usize) {
    let n = a.n();
    let mut x = vec![T::zero(); n];
    let nb = dot(b, b).sqrt();
    if nb == T::zero() {
        return (x, 0);
    }
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let tol = T::lit(target) * nb;
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() || !pap.is_finite() {
            return (x, it);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol {
            return (x, it);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, max_iter)
}

/// Solves `A x = b_k` for every right-hand side with PCG (`A` symmetric positive definite).
pub fn solve_spd<T: Real>(a: &CsrMatrix<T>, rhs: &[Vec<T>], opts: &SolverOptions) -> Result<(Vec<Vec<T>>, SolveStats), LinalgError> {
    let cap = ((opts.cap_factor * (a.n().max(1) as f64).sqrt()).ceil() as usize).max(1);
    let mut sols = Vec::with_capacity(rhs.len());
    let mut stats = SolveStats { method: SolverMethod::Pcg, iterations: 0, relative_residual: 0.0 };
    for b in rhs {
        let (x, it) = pcg(a, b, opts.target, cap);
        let res = relative_residual(a, &x, b);
        stats.iterations = stats.iterations.max(it);
        stats.relative_residual = stats.relative_residual.max(res);
        if !(res <= opts.accept) {
            return Err(LinalgError::NotConverged { iterations: it, residual: res });
        }
        sols.push(x);
    }
    Ok((sols, stats))
}

/// Dense LU solve in double precision, for symmetric systems that may be indefinite.
pub fn solve_dense<T: Real>(a: &CsrMatrix<T>, rhs: &[Vec<T>]) -> Result<(Vec<Vec<T>>, SolveStats), LinalgError> {
    let n = a.n();
    if n > DENSE_LIMIT {
        return Err(LinalgError::TooLargeForDense { n, limit: DENSE_LIMIT });
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in a.entries() {
        m[(i, j)] += v.as_f64();
    }
    let lu = m.lu();
    let mut sols = Vec::with_capacity(rhs.len());
    let mut worst = 0.0f64;
    for b in rhs {
        let bv = nalgebra::DVector::from_iterator(n, b.iter().map(|v| v.as_f64()));
        let x = lu.solve(&bv).ok_or(LinalgError::Singular)?;
        let x: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
        worst = worst.max(relative_residual(a, &x, b));
        sols.push(x);
    }
    Ok((sols, SolveStats { method: SolverMethod::DenseLu, iterations: 1, relative_residual: worst }))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D Dirichlet Laplacian, tridiagonal [-1 2 -1].
    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 3.0), (0, 1, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.diagonal(), vec![4.0, 2.0]);
    }

    #[test]
    fn pcg_matches_dense() {
        let a = laplacian_1d(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let opts = SolverOptions::for_scalar::<f64>();
        let (x, stats) = solve_spd(&a, std::slice::from_ref(&b), &opts).unwrap();
        let (y, _) = solve_dense(&a, &[b]).unwrap();
        assert!(stats.relative_residual <= 1e-10);
        for (p, q) in x[0].iter().zip(&y[0]) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = laplacian_1d(5);
        let (x, stats) = solve_spd(&a, &[vec![0.0; 5]], &SolverOptions::for_scalar::<f64>()).unwrap();
        assert_eq!(x[0], vec![0.0; 5]);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let a = laplacian_1d(400);
        let b = vec![1.0; 400];
        let opts = SolverOptions { cap_factor: 0.1, ..SolverOptions::for_scalar::<f64>() };
        assert!(matches!(solve_spd(&a, &[b], &opts), Err(LinalgError::NotConverged { .. })));
    }

    #[test]
    fn singular_dense_system() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(solve_dense(&a, &[vec![1.0, 0.0]]), Err(LinalgError::Singular)));
    }
}
