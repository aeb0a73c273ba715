//! Physicists' Hermite polynomials in several variables.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Largest total degree for which `k!` is formed exactly in integer arithmetic.
pub const EXACT_FACTORIAL_LIMIT: u32 = 20;

/// A multi-index `k = (k_1, ..., k_m)` of non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `|k| = sum k_j`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `k! = prod k_j!`, exact up to `|k| <= 20`.
    pub fn factorial_exact(&self) -> Option<u64> {
        if self.total() > EXACT_FACTORIAL_LIMIT {
            return None;
        }
        Some(self.0.iter().map(|&k| (1..=k as u64).product::<u64>()).product())
    }

    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&k| (2..=k).map(|j| (j as f64).ln()).sum::<f64>()).sum()
    }

    pub fn factorial(&self) -> f64 {
        match self.factorial_exact() {
            Some(v) => v as f64,
            None => self.ln_factorial().exp(),
        }
    }

    /// All multi-indices of length `len` with `|k| <= max_total`, ordered by
    /// total degree and then lexicographically.
    pub fn up_to_total(len: usize, max_total: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for total in 0..=max_total {
            let mut current = vec![0u32; len];
            compositions(&mut current, 0, total, &mut out);
            if len == 0 {
                break;
            }
        }
        out
    }
}

fn compositions(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos == current.len() {
        if remaining == 0 {
            out.push(MultiIndex(current.clone()));
        }
        return;
    }
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        current[pos] = 0;
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v;
        compositions(current, pos + 1, remaining - v, out);
    }
    current[pos] = 0;
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// `H_n(x)` by the three-term recurrence `H_{n+1} = 2x H_n - 2n H_{n-1}`.
pub fn hermite_1d(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for j in 1..n {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_k(xi) = prod_j H_{k_j}(xi_j)`.
pub fn hermite_eval(k: &MultiIndex, xi: &[f64]) -> Result<f64> {
    check_len(k.len(), xi.len())?;
    let value: f64 = k.0.iter().zip(xi).map(|(&n, &x)| hermite_1d(n, x)).product();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("hermite_eval"))
    }
}

/// `H^nu_k(x) = H_k(sqrt(nu) x)`.
pub fn hermite_nu_eval(nu: f64, k: &MultiIndex, x2: &[f64]) -> Result<f64> {
    check_nu(nu)?;
    let scale = nu.sqrt();
    let xi: Vec<f64> = x2.iter().map(|x| scale * x).collect();
    hermite_eval(k, &xi)
}

/// Squared norm of `H^nu_k` in `L^2(R^m, e^{-nu |x|^2} dx)`:
/// `(pi/nu)^{m/2} 2^{|k|} k!`.
pub fn hermite_norm_sq(nu: f64, k: &MultiIndex) -> Result<f64> {
    check_nu(nu)?;
    let m = k.len() as f64;
    let ln = 0.5 * m * (std::f64::consts::PI / nu).ln()
        + k.total() as f64 * std::f64::consts::LN_2
        + k.ln_factorial();
    Ok(match k.factorial_exact() {
        Some(f) => (std::f64::consts::PI / nu).powf(0.5 * m) * 2f64.powi(k.total() as i32) * f as f64,
        None => ln.exp(),
    })
}

/// Closed form of `sum_k (sqrt(nu/2) z)^k H^nu_k(x) / k!`, namely
/// `exp(-(nu/2) <z,z> + sqrt(2) nu <x,z>)` with the bilinear pairing.
pub fn hermite_generating_kernel(nu: f64, z2: &[Complex64], x2: &[f64]) -> Result<Complex64> {
    check_nu(nu)?;
    check_len(z2.len(), x2.len())?;
    let zz: Complex64 = z2.iter().map(|z| z * z).sum();
    let xz: Complex64 = z2.iter().zip(x2).map(|(z, &x)| z * x).sum();
    Ok((-0.5 * nu * zz + std::f64::consts::SQRT_2 * nu * xz).exp())
}

pub(crate) fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("nu must be positive, got {nu}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Coefficients of `H_n` from the Rodrigues formula, via
    /// `d/dx [p e^{-x^2}] = (p' - 2x p) e^{-x^2}`.
    fn rodrigues_coefficients(n: usize) -> Vec<f64> {
        let mut p = vec![1.0];
        for _ in 0..n {
            let mut next = vec![0.0; p.len() + 1];
            for (i, &c) in p.iter().enumerate() {
                if i > 0 {
                    next[i - 1] += i as f64 * c;
                }
                next[i + 1] -= 2.0 * c;
            }
            p = next;
        }
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        p.into_iter().map(|c| sign * c).collect()
    }

    fn horner(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    #[test]
    fn examples() {
        assert_eq!(hermite_eval(&MultiIndex::new(vec![0]), &[3.7]).unwrap(), 1.0);
        assert_eq!(hermite_eval(&MultiIndex::new(vec![1]), &[0.5]).unwrap(), 1.0);
        assert_eq!(hermite_eval(&MultiIndex::new(vec![2]), &[1.0]).unwrap(), 2.0);
        assert_eq!(hermite_nu_eval(4.0, &MultiIndex::new(vec![1]), &[1.0]).unwrap(), 4.0);
        assert_eq!(hermite_nu_eval(2.5, &MultiIndex::new(vec![0]), &[1.3]).unwrap(), 1.0);
        let k = MultiIndex::new(vec![3, 2]);
        assert_eq!(
            hermite_nu_eval(1.0, &k, &[0.3, -0.8]).unwrap(),
            hermite_eval(&k, &[0.3, -0.8]).unwrap()
        );
    }

    #[test]
    fn norm_examples() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert_relative_eq!(hermite_norm_sq(1.0, &MultiIndex::new(vec![0])).unwrap(), sqrt_pi, max_relative = 1e-15);
        assert_relative_eq!(hermite_norm_sq(1.0, &MultiIndex::new(vec![1])).unwrap(), 2.0 * sqrt_pi, max_relative = 1e-15);
        assert_eq!(hermite_norm_sq(3.0, &MultiIndex::zeros(0)).unwrap(), 1.0);
    }

    #[test]
    fn recurrence_matches_rodrigues() {
        let points = [-2.3, -1.1, -0.4, 0.0, 0.25, 0.77, 1.5, 2.9, 3.3, -3.1];
        for n in 0..=8u32 {
            let coeffs = rodrigues_coefficients(n as usize);
            for &x in &points {
                let exact = horner(&coeffs, x);
                let rec = hermite_1d(n, x);
                assert!((rec - exact).abs() <= 1e-10 * exact.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn factorials() {
        assert_eq!(MultiIndex::new(vec![3, 4]).factorial_exact(), Some(6 * 24));
        assert_eq!(MultiIndex::new(vec![20]).factorial_exact(), Some(2_432_902_008_176_640_000));
        assert_eq!(MultiIndex::new(vec![11, 10]).factorial_exact(), None);
        let big = MultiIndex::new(vec![11, 10]);
        assert_relative_eq!(big.factorial(), 39_916_800.0 * 3_628_800.0, max_relative = 1e-12);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(MultiIndex::up_to_total(1, 3).len(), 4);
        assert_eq!(MultiIndex::up_to_total(2, 2).len(), 6);
        assert_eq!(MultiIndex::up_to_total(0, 5), vec![MultiIndex::zeros(0)]);
    }

    #[test]
    fn overflow_is_flagged() {
        assert_eq!(hermite_eval(&MultiIndex::new(vec![400]), &[1e3]).unwrap_err().code(), "Overflow");
    }

    #[test]
    fn generating_kernel_series() {
        // sum_k (sqrt(nu/2) z)^k H_k(sqrt(nu) x) / k!
        let series = |nu: f64, z: Complex64, x: f64, kmax: u32| {
            let t = z * (nu / 2.0).sqrt();
            let mut sum = Complex64::new(0.0, 0.0);
            let mut tk_over_fact = Complex64::new(1.0, 0.0);
            for k in 0..=kmax {
                if k > 0 {
                    tk_over_fact *= t / k as f64;
                }
                sum += tk_over_fact * hermite_1d(k, nu.sqrt() * x);
            }
            sum
        };
        let z = Complex64::new(0.3, 0.0);
        let closed = hermite_generating_kernel(1.0, &[z], &[0.7]).unwrap();
        assert!((series(1.0, z, 0.7, 30) - closed).norm() < 1e-12);
        assert_eq!(hermite_generating_kernel(2.0, &[Complex64::new(0.0, 0.0)], &[1.3]).unwrap(), Complex64::new(1.0, 0.0));

        let z = Complex64::new(0.4, -0.3);
        let closed = hermite_generating_kernel(1.0, &[z], &[0.0]).unwrap();
        assert!((closed - (-0.5 * z * z).exp()).norm() < 1e-15);
        assert!((series(1.0, z, 0.0, 40) - closed).norm() < 1e-13);
    }

    fn partial_sum(nu: f64, z: Complex64, x: f64, k_max: u32) -> Complex64 {
        let t = z * (nu / 2.0).sqrt();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..=k_max {
            if k > 0 {
                term *= t / k as f64;
            }
            sum += term * hermite_1d(k, nu.sqrt() * x);
        }
        sum
    }

    #[test]
    fn forty_terms_not_enough_for_large_arguments() {
        // At x = 0 the series is the Taylor series of exp(-nu z^2 / 2); with
        // nu z^2 / 2 = 8 the tail after k = 40 is of order 8^21 / 21!.
        let z = Complex64::new(2.0, 0.0);
        let closed = hermite_generating_kernel(4.0, &[z], &[0.0]).unwrap();
        assert!((partial_sum(4.0, z, 0.0, 40) - closed).norm() > 1e-3);
        assert!((partial_sum(4.0, z, 0.0, 120) - closed).norm() < 1e-10);
    }

    proptest! {
        #[test]
        fn generating_kernel_truncation(
            zr in -0.7f64..0.7, zi in -0.7f64..0.7, x in -1.0f64..1.0, nu in 0.1f64..2.0
        ) {
            let z = Complex64::new(zr, zi);
            let closed = hermite_generating_kernel(nu, &[z], &[x]).unwrap();
            prop_assert!((partial_sum(nu, z, x, 40) - closed).norm() <= 1e-10 * closed.norm().max(1.0));
        }
    }
}
