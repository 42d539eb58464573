//! Symmetric eigensolver: Householder reduction to tridiagonal form followed
//! by the implicit QL iteration.

use crate::error::{Error, Result};

/// Rows of `Z^T`: row `i` holds the components of eigenvector `i` on the
/// tracked coordinates.
pub(crate) struct Rotated<'a> {
    pub data: &'a mut [f64],
    pub width: usize,
}

impl Rotated<'_> {
    #[inline]
    fn rotate(&mut self, i: usize, c: f64, s: f64) {
        let w = self.width;
        let (head, tail) = self.data.split_at_mut((i + 1) * w);
        let zi = &mut head[i * w..];
        let zj = &mut tail[..w];
        for (a, b) in zi.iter_mut().zip(zj.iter_mut()) {
            let h = *b;
            *b = s * *a + c * h;
            *a = c * *a - s * h;
        }
    }
}

/// Householder reduction of the row-major symmetric matrix `a` (overwritten).
/// Returns the diagonal, the off-diagonal (`e[i]` couples `i` and `i+1`,
/// `e[n-1] = 0`) and, if requested, `Q` (row-major) with `A = Q T Q^T`.
pub(crate) fn tridiagonalize(a: &mut [f64], n: usize, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let mut e = vec![0.0; n];
    let mut reflectors: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let row = k * n + k + 1;
        let tail_norm2: f64 = a[row + 1..row + m].iter().map(|x| x * x).sum();
        let x0 = a[row];
        if tail_norm2 == 0.0 {
            e[k] = x0;
            continue;
        }
        let sigma = (x0 * x0 + tail_norm2).sqrt();
        let alpha = if x0 > 0.0 { -sigma } else { sigma };
        let mut v = a[row..row + m].to_vec();
        v[0] -= alpha;
        let vnorm2 = v[0] * v[0] + tail_norm2;
        let beta = 2.0 / vnorm2;
        e[k] = alpha;
        // p = beta A22 v
        let off = k + 1;
        for i in 0..m {
            let r = &a[(off + i) * n + off..(off + i) * n + n];
            p[i] = beta * r.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
        }
        let kk = 0.5 * beta * p[..m].iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
        for i in 0..m {
            p[i] -= kk * v[i];
        }
        // A22 -= v w^T + w v^T
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let r = &mut a[(off + i) * n + off..(off + i) * n + n];
            for ((x, vj), wj) in r.iter_mut().zip(&v).zip(&p[..m]) {
                *x -= vi * wj + wi * vj;
            }
        }
        if want_q {
            reflectors.push((off, beta, v));
        }
    }
    if n >= 2 {
        e[n - 2] = a[(n - 2) * n + n - 1];
    }
    let d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let q = want_q.then(|| {
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        let mut t = vec![0.0; n];
        for (off, beta, v) in reflectors.iter().rev() {
            let m = v.len();
            let t = &mut t[..n - off];
            t.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..m {
                let r = &q[(off + i) * n + off..(off + i) * n + n];
                for (tj, x) in t.iter_mut().zip(r) {
                    *tj += v[i] * x;
                }
            }
            for i in 0..m {
                let s = beta * v[i];
                let r = &mut q[(off + i) * n + off..(off + i) * n + n];
                for (x, tj) in r.iter_mut().zip(t.iter()) {
                    *x -= s * tj;
                }
            }
        }
        q
    });
    (d, e, q)
}

/// Implicit QL on the tridiagonal matrix `(d, e)`. Eigenvalues are left in
/// `d` (unsorted); `z`, when given, receives the rotations.
pub(crate) fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<Rotated<'_>>, max_iter: usize) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence(max_iter));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = (p * p + 1.0).sqrt();
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d[l + 2..].iter_mut() {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = (p * p + e[i] * e[i]).sqrt();
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_mut() {
                        z.rotate(i, c, s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Sorts eigenvalues ascending and permutes the rows of `z` alongside.
pub(crate) fn sort_pairs(d: &mut Vec<f64>, z: Option<(&mut Vec<f64>, usize)>) {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let sorted: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    if let Some((z, w)) = z {
        let mut out = vec![0.0; z.len()];
        for (new, &old) in idx.iter().enumerate() {
            out[new * w..(new + 1) * w].copy_from_slice(&z[old * w..(old + 1) * w]);
        }
        *z = out;
    }
    *d = sorted;
}
