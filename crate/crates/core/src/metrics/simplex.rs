//! Dense tableau simplex with Bland's rule for `max c.x` subject to
//! `A x <= b`, `x >= 0`, `b >= 0`.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64], max_iter: usize) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::Lp("inconsistent dimensions".into()));
    }
    if b.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::Lp("right-hand side must be nonnegative".into()));
    }
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        t[i * width..i * width + n].copy_from_slice(&a[i]);
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = b[i];
    }
    for j in 0..n {
        t[m * width + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut iterations = 0;
    loop {
        let obj = &t[m * width..(m + 1) * width];
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -TOL) else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[i * width + enter];
            if aij > TOL {
                let ratio = t[i * width + width - 1] / aij;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - TOL || (ratio <= best + TOL && basis[i] < basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else { return Err(Error::Lp("unbounded".into())) };
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::Lp(format!("no optimum after {max_iter} pivots")));
        }
        let p = t[r * width + enter];
        for x in &mut t[r * width..(r + 1) * width] {
            *x /= p;
        }
        let pivot_row = t[r * width..(r + 1) * width].to_vec();
        for i in 0..=m {
            if i == r {
                continue;
            }
            let f = t[i * width + enter];
            if f != 0.0 {
                for (x, pr) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
            }
        }
        basis[r] = enter;
    }
    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i * width + width - 1];
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let s = maximize(
            &[3.0, 5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
            100,
        )
        .unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_detected() {
        assert!(maximize(&[1.0], &[vec![-1.0]], &[1.0], 100).is_err());
    }
}
