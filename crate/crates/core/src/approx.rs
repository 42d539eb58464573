//! Lipschitz test functions and their polynomial approximants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Real function of one variable that can be paired with a spectral measure.
pub trait SpectralFunction: Send + Sync {
    fn eval(&self, x: f64) -> f64;

    fn describe(&self) -> String {
        "function".into()
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> SpectralFunction for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Piecewise linear function through `(xs[i], ys[i])`, constant outside `[xs[0], xs[n-1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzTestFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl LipschitzTestFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(param("need at least two breakpoints with one value each"));
        }
        if xs.iter().chain(&ys).any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite breakpoint".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(param("breakpoints must be strictly increasing"));
        }
        Ok(LipschitzTestFunction { xs, ys })
    }

    /// Samples `f` at `n + 1` equispaced points of `[a, b]`.
    pub fn from_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a < b) || n == 0 {
            return Err(param(format!("bad sampling grid on [{a}, {b}] with {n} cells")));
        }
        let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    /// Tent of the given height supported on `[c - w, c + w]`.
    pub fn hat(center: f64, half_width: f64, height: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(param("hat needs a positive half width"));
        }
        Self::new(vec![center - half_width, center, center + half_width], vec![0.0, height, 0.0])
    }

    pub fn breakpoints(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&b| b <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.ys.iter().fold(0.0, |m, y| m.max(y.abs()))
    }

    pub fn lipschitz(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
            .fold(0.0, f64::max)
    }

    /// `||f||_inf + Lip(f)`
    pub fn lip_norm(&self) -> f64 {
        self.sup_norm() + self.lipschitz()
    }

    pub fn scaled(&self, c: f64) -> Self {
        LipschitzTestFunction { xs: self.xs.clone(), ys: self.ys.iter().map(|y| c * y).collect() }
    }
}

impl SpectralFunction for LipschitzTestFunction {
    fn eval(&self, x: f64) -> f64 {
        LipschitzTestFunction::eval(self, x)
    }

    fn describe(&self) -> String {
        format!(
            "piecewise-linear({} nodes on [{}, {}])",
            self.xs.len(),
            self.xs[0],
            self.xs[self.xs.len() - 1]
        )
    }
}

/// `c_b = (4306 + 837 sqrt 6) / 5832`, the sharp constant in the Bernstein
/// estimate `||B_n g - g|| <= c_b omega(g, 1/sqrt n)`.
pub fn bernstein_constant() -> f64 {
    (4306.0 + 837.0 * 6f64.sqrt()) / 5832.0
}

/// `B_n g(x) = sum_k g(k/n) C(n,k) x^k (1-x)^(n-k)` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct BernsteinPolynomial {
    coeffs: Vec<f64>,
}

impl BernsteinPolynomial {
    pub fn new(g: impl Fn(f64) -> f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(param("Bernstein degree must be at least 1"));
        }
        Ok(BernsteinPolynomial { coeffs: (0..=n).map(|k| g(k as f64 / n as f64)).collect() })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// de Casteljau evaluation.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("Bernstein polynomials live on [0, 1], got {x}")));
        }
        let mut b = self.coeffs.clone();
        let n = b.len();
        for r in 1..n {
            for i in 0..n - r {
                b[i] = (1.0 - x) * b[i] + x * b[i + 1];
            }
        }
        Ok(b[0])
    }
}

pub fn bernstein_eval(g: impl Fn(f64) -> f64, n: usize, x: f64) -> Result<f64> {
    BernsteinPolynomial::new(g, n)?.eval(x)
}

/// `ceil((4 (rho + C) c_b L_f / eta)^2)`, the Bernstein degree reaching sup
/// error `eta` for an `L_f`-Lipschitz function on `[-(rho+C), rho+C]`.
pub fn degree_for_accuracy(l_f: f64, rho: f64, c: f64, eta: f64) -> Result<u64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!("accuracy must be positive, got {eta}")));
    }
    if !(l_f >= 0.0) || !(rho + c > 0.0) || !l_f.is_finite() || !(rho + c).is_finite() {
        return Err(Error::Domain("need L_f >= 0 and rho + C > 0".into()));
    }
    let x = (4.0 * (rho + c) * bernstein_constant() * l_f / eta).powi(2);
    if !x.is_finite() || x > u64::MAX as f64 {
        return Err(Error::Overflow(format!("degree {x:e}")));
    }
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.ceil() };
    Ok(n.max(1.0) as u64)
}

/// Cutoffs `f-` (1 up to `E - h`, 0 from `E`) and `f+` (1 up to `E`, 0 from
/// `E + h`) with `h = eps^zeta / 2`, restricted to the domain `[a, b]`.
pub fn iods_cutoffs(
    e: f64,
    eps: f64,
    zeta: f64,
    domain: (f64, f64),
) -> Result<(LipschitzTestFunction, LipschitzTestFunction)> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::Domain(format!("zeta must lie in (0, 1), got {zeta}")));
    }
    let (a, b) = domain;
    if !(a < b) {
        return Err(param("empty cutoff domain"));
    }
    let h = eps.powf(zeta) / 2.0;
    let ramp = |x: f64, top: f64| -> f64 { ((top - x) / h).clamp(0.0, 1.0) };
    let build = |top: f64| -> Result<LipschitzTestFunction> {
        let mut xs = vec![a, b];
        for p in [top - h, top] {
            if p > a && p < b {
                xs.push(p);
            }
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let ys = xs.iter().map(|&x| ramp(x, top)).collect();
        LipschitzTestFunction::new(xs, ys)
    };
    Ok((build(e)?, build(e + h)?))
}

/// `p(x) = sum_j c_j T_j(x~)` with `x~ = (2x - (a+b)) / (b-a)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChebyshevSeries {
    pub coeffs: Vec<f64>,
    pub interval: (f64, f64),
    /// Sup error against the source function on a fine grid.
    pub reconstruction_error: f64,
}

impl ChebyshevSeries {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn to_unit(&self, x: f64) -> f64 {
        let (a, b) = self.interval;
        (2.0 * x - (a + b)) / (b - a)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    /// Upper bound on `sup |p'|` over the interval.
    pub fn lipschitz_bound(&self) -> f64 {
        let n = self.degree();
        if n == 0 {
            return 0.0;
        }
        let c = &self.coeffs;
        let mut d = vec![0.0; n + 1];
        // derivative of c_0 + sum c_j T_j, as d_0/2 + sum d_j T_j
        for j in (1..=n).rev() {
            d[j - 1] = d.get(j + 1).copied().unwrap_or(0.0) + 2.0 * j as f64 * c[j];
        }
        let s = d[0].abs() / 2.0 + d[1..].iter().map(|x| x.abs()).sum::<f64>();
        s * 2.0 / (self.interval.1 - self.interval.0)
    }

    /// `sum_j c_j mu_j` for Chebyshev moments `mu`.
    pub fn pair(&self, moments: &[f64]) -> Result<f64> {
        if moments.len() < self.coeffs.len() {
            return Err(Error::LengthMismatch { expected: self.coeffs.len(), got: moments.len() });
        }
        Ok(self.coeffs.iter().zip(moments).map(|(c, m)| c * m).sum())
    }
}

impl SpectralFunction for ChebyshevSeries {
    fn eval(&self, x: f64) -> f64 {
        ChebyshevSeries::eval(self, x)
    }

    fn describe(&self) -> String {
        format!("chebyshev(n={}, [{}, {}])", self.degree(), self.interval.0, self.interval.1)
    }
}

/// Interpolation at `N = 4 max(n, 1)` Chebyshev nodes, truncated at degree `n`.
pub fn chebyshev_coeffs(f: &dyn SpectralFunction, n_max: usize, interval: (f64, f64)) -> Result<ChebyshevSeries> {
    let (a, b) = interval;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(param(format!("bad interval [{a}, {b}]")));
    }
    let nodes = 4 * n_max.max(1);
    let theta: Vec<f64> = (0..nodes).map(|k| std::f64::consts::PI * (k as f64 + 0.5) / nodes as f64).collect();
    let vals: Vec<f64> = theta.iter().map(|t| f.eval(0.5 * (a + b) + 0.5 * (b - a) * t.cos())).collect();
    let mut coeffs = vec![0.0; n_max + 1];
    for (j, c) in coeffs.iter_mut().enumerate() {
        let s: f64 = theta.iter().zip(&vals).map(|(t, v)| v * (j as f64 * t).cos()).sum();
        *c = 2.0 * s / nodes as f64;
    }
    coeffs[0] /= 2.0;
    let mut series = ChebyshevSeries { coeffs, interval, reconstruction_error: 0.0 };
    let grid = 2000;
    series.reconstruction_error = (0..=grid)
        .map(|i| {
            let x = a + (b - a) * i as f64 / grid as f64;
            (series.eval(x) - f.eval(x)).abs()
        })
        .fold(0.0, f64::max);
    Ok(series)
}

/// Constants appearing in the perturbation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TheoremConstant {
    /// `c_b`
    Bernstein,
    /// `1 / (2 + e)`
    ZetaIods,
    /// `2e / (1 + 2e)`
    ZetaBethe,
    /// `gamma_k = 2 sqrt(log(k-1)) 2^{3/2} (2 sqrt(k-1) + C) c_b`
    GammaBethe { k: u32, c: f64 },
    /// `K_0 = 2 (2 + e) max(2, K_{d;C})`
    K0 { k_dc: f64 },
}

impl TheoremConstant {
    pub fn value(&self) -> Result<f64> {
        let e = std::f64::consts::E;
        Ok(match *self {
            TheoremConstant::Bernstein => bernstein_constant(),
            TheoremConstant::ZetaIods => 1.0 / (2.0 + e),
            TheoremConstant::ZetaBethe => 2.0 * e / (1.0 + 2.0 * e),
            TheoremConstant::GammaBethe { k, c } => {
                if k < 3 || !(c >= 0.0) {
                    return Err(param(format!("gamma_k needs k >= 3 and C >= 0, got k = {k}, C = {c}")));
                }
                let q = (k - 1) as f64;
                2.0 * q.ln().sqrt() * 2f64.powf(1.5) * (2.0 * q.sqrt() + c) * bernstein_constant()
            }
            TheoremConstant::K0 { k_dc } => {
                if !(k_dc > 0.0) {
                    return Err(param("K_{d;C} must be positive"));
                }
                2.0 * (2.0 + e) * k_dc.max(2.0)
            }
        })
    }
}

impl fmt::Display for TheoremConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoremConstant::Bernstein => write!(f, "c_b"),
            TheoremConstant::ZetaIods => write!(f, "zeta_iods"),
            TheoremConstant::ZetaBethe => write!(f, "zeta_bethe"),
            TheoremConstant::GammaBethe { k, c } => write!(f, "gamma:{k}:{c}"),
            TheoremConstant::K0 { k_dc } => write!(f, "k0:{k_dc}"),
        }
    }
}

impl FromStr for TheoremConstant {
    type Err = Error;

    /// `c_b`, `zeta_iods`, `zeta_bethe`, `gamma:<k>:<C>`, `k0:<K_dC>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(|| param(format!("bad constant {s}")))
        };
        match parts[0] {
            "c_b" | "bernstein" => Ok(TheoremConstant::Bernstein),
            "zeta_iods" => Ok(TheoremConstant::ZetaIods),
            "zeta_bethe" => Ok(TheoremConstant::ZetaBethe),
            "gamma" => Ok(TheoremConstant::GammaBethe { k: num(1)? as u32, c: num(2)? }),
            "k0" => Ok(TheoremConstant::K0 { k_dc: num(1)? }),
            _ => Err(param(format!("unknown constant {s}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((bernstein_constant() - 1.089887).abs() < 1e-6);
        let z = TheoremConstant::ZetaBethe.value().unwrap();
        assert!((z - 0.84464).abs() < 1e-5);
        let g = TheoremConstant::GammaBethe { k: 3, c: 1.0 }.value().unwrap();
        assert!((g - 19.6512).abs() < 1e-3);
        assert!("gamma:2:1".parse::<TheoremConstant>().unwrap().value().is_err());
        assert!("nope".parse::<TheoremConstant>().is_err());
    }

    #[test]
    fn degree_examples() {
        let cb = bernstein_constant();
        assert_eq!(degree_for_accuracy(1.0, 2.0, 1.0, 4.0 * 3.0 * cb).unwrap(), 1);
        assert_eq!(degree_for_accuracy(1.0, 2.0, 1.0, 0.1).unwrap(), 17106);
        assert!(degree_for_accuracy(1.0, 2.0, 1.0, 0.0).is_err());
        assert!(degree_for_accuracy(1e300, 2.0, 1.0, 1e-300).is_err());
    }

    #[test]
    fn cutoffs_shape() {
        let (lo, hi) = iods_cutoffs(0.0, 0.25, 0.5, (-5.0, 5.0)).unwrap();
        // h = 0.25
        assert_eq!(lo.eval(-0.25), 1.0);
        assert_eq!(lo.eval(0.0), 0.0);
        assert_eq!(hi.eval(0.0), 1.0);
        assert_eq!(hi.eval(0.25), 0.0);
        assert!((lo.lipschitz() - 4.0).abs() < 1e-12);
        assert!(iods_cutoffs(0.0, 1.5, 0.5, (-5.0, 5.0)).is_err());
        assert!(iods_cutoffs(0.0, 0.5, 1.0, (-5.0, 5.0)).is_err());
    }

    #[test]
    fn chebyshev_reproduces_polynomials() {
        let f = |x: f64| 3.0 * x * x * x - x + 0.5;
        let s = chebyshev_coeffs(&f, 5, (-2.0, 3.0)).unwrap();
        assert!(s.reconstruction_error < 1e-12);
        assert!(s.coeffs[4].abs() < 1e-12 && s.coeffs[5].abs() < 1e-12);
        // sup |f'| on [-2, 3] is 9 * 9 - 1 = 80
        assert!(s.lipschitz_bound() >= 80.0 - 1e-9);
    }

    #[test]
    fn bernstein_reproduces_linear() {
        let v = bernstein_eval(|x| 2.0 * x - 1.0, 7, 0.3).unwrap();
        assert!((v + 0.4).abs() < 1e-14);
        assert!(bernstein_eval(|x| x, 3, 1.5).is_err());
    }
}
