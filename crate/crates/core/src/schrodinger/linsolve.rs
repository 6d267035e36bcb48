//! Small complex linear solvers for the implicit propagator.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[C]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Thomas algorithm for a tridiagonal system with diagonal `diag` and
/// constant off-diagonals `off` (both sides).
pub(crate) fn thomas_constant_offdiag(diag: &[C], off: C, rhs: &[C]) -> Vec<C> {
    let n = diag.len();
    let mut c = vec![C::default(); n];
    let mut d = vec![C::default(); n];
    let mut denom = diag[0];
    c[0] = off / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off * c[i - 1];
        c[i] = off / denom;
        d[i] = (rhs[i] - off * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}

/// Right-preconditioned BiCGSTAB. Converged when `|b - A x| <= tol |b|`.
pub(crate) fn bicgstab<A, M>(apply_a: A, precond: M, b: &[C], x0: &[C], tol: f64, max_iter: usize) -> Result<Vec<C>>
where
    A: Fn(&[C]) -> Result<Vec<C>>,
    M: Fn(&[C]) -> Result<Vec<C>>,
{
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![C::default(); n]);
    }
    let mut x = x0.to_vec();
    let ax = apply_a(&x)?;
    let mut r: Vec<C> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0));
    let mut v = vec![C::default(); n];
    let mut p = vec![C::default(); n];
    let mut best = (norm2(&r) / bnorm, x.clone());
    for _ in 0..max_iter {
        if best.0 <= tol {
            break;
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let y = precond(&p)?;
        v = apply_a(&y)?;
        alpha = rho / dot(&r_hat, &v);
        let s: Vec<C> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        for i in 0..n {
            x[i] += alpha * y[i];
        }
        let sres = norm2(&s) / bnorm;
        if sres <= tol {
            best = (sres, x.clone());
            break;
        }
        let z = precond(&s)?;
        let t = apply_a(&z)?;
        let tt = dot(&t, &t);
        if tt.norm() == 0.0 {
            break;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        let res = norm2(&r) / bnorm;
        if res < best.0 {
            best = (res, x.clone());
        }
        if omega.norm() == 0.0 {
            break;
        }
    }
    // stagnation just above tol at round-off level is accepted
    if best.0 <= tol.max(1e-12) {
        Ok(best.1)
    } else {
        Err(Error::SolverFailure(format!("bicgstab stalled at relative residual {:.3e}", best.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_tridiagonal() {
        let diag = vec![C::new(4.0, 1.0); 6];
        let off = C::new(-1.0, 0.5);
        let x: Vec<C> = (0..6).map(|i| C::new(i as f64, 1.0 - i as f64)).collect();
        let mut b = vec![C::default(); 6];
        for i in 0..6 {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += off * x[i - 1];
            }
            if i < 5 {
                b[i] += off * x[i + 1];
            }
        }
        let got = thomas_constant_offdiag(&diag, off, &b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-13);
        }
    }

    #[test]
    fn bicgstab_diagonal_system() {
        let d: Vec<C> = (0..10).map(|i| C::new(1.0 + i as f64, 0.3)).collect();
        let b: Vec<C> = (0..10).map(|i| C::new(1.0, i as f64)).collect();
        let x = bicgstab(
            |x| Ok(x.iter().zip(&d).map(|(a, b)| a * b).collect()),
            |r| Ok(r.to_vec()),
            &b,
            &vec![C::default(); 10],
            1e-14,
            100,
        )
        .unwrap();
        for i in 0..10 {
            assert!((x[i] * d[i] - b[i]).norm() < 1e-12);
        }
    }
}
