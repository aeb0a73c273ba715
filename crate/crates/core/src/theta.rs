//! Riemann theta functions with characteristics,
//! `Theta_{a,b}(z | W) = sum_n exp(2 pi i [ (a+n) W (a+n) / 2 + (a+n)(z+b) ])`.
//!
//! The sum runs over an integer box of radius `R` (sup norm) centred at the
//! dominant term. The radius comes from the Gaussian tail bound in the
//! smallest eigenvalue of `Im W`, so the discarded tail is below `tolerance`
//! times the size of the dominant term, `exp(pi Im z . (Im W)^{-1} Im z)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::linalg::{imag_part, is_symmetric, min_eigenvalue, sqrt_det_right_half_plane, KahanSum};

/// Radius cap used when none is configured.
pub const DEFAULT_MAX_RADIUS: u32 = 200;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Arguments of one theta evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaParams {
    pub alpha: DVector<f64>,
    pub beta: DVector<f64>,
    pub z: DVector<Complex64>,
    pub omega: DMatrix<Complex64>,
    pub tolerance: f64,
}

impl ThetaParams {
    pub fn new(
        alpha: DVector<f64>,
        beta: DVector<f64>,
        z: DVector<Complex64>,
        omega: DMatrix<Complex64>,
        tolerance: f64,
    ) -> Result<Self> {
        let params = Self { alpha, beta, z, omega, tolerance };
        params.validate()?;
        Ok(params)
    }

    /// `Theta_{0,0}(z | omega)`.
    pub fn plain(z: DVector<Complex64>, omega: DMatrix<Complex64>, tolerance: f64) -> Result<Self> {
        let r = z.len();
        Self::new(DVector::zeros(r), DVector::zeros(r), z, omega, tolerance)
    }

    pub fn rank(&self) -> usize {
        self.omega.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        validate_omega(&self.omega)?;
        let r = self.rank();
        check_len(r, self.alpha.len())?;
        check_len(r, self.beta.len())?;
        check_len(r, self.z.len())?;
        check_tolerance(self.tolerance)
    }
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance > 0.0 && tolerance < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("theta tolerance must lie in (0, 1), got {tolerance}")))
    }
}

fn validate_omega(omega: &DMatrix<Complex64>) -> Result<()> {
    if !omega.is_square() {
        return Err(Error::DimensionMismatch { expected: omega.nrows(), found: omega.ncols() });
    }
    if omega.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidInput("period matrix has non-finite entries".into()));
    }
    let scale = omega.iter().map(|c| c.norm()).fold(1.0, f64::max);
    if !is_symmetric(omega, SYMMETRY_TOLERANCE * scale, |a, b| (a - b).norm()) {
        return Err(Error::InvalidInput("period matrix must be symmetric".into()));
    }
    Ok(())
}

/// Smallest `R` whose tail bound
/// `sum_{j>=0} N_j exp(-pi lambda (R + j + 1/2)^2)`, with `N_j` the number of
/// integer points on the sup-norm shell of radius `R + j + 1`, is at most
/// `tolerance`.
fn radius_for(lambda_min: f64, rank: usize, tolerance: f64, cap: u32) -> Result<u32> {
    if rank == 0 {
        return Ok(0);
    }
    let shell = |m: f64| (2.0 * m + 1.0).powi(rank as i32);
    let tail = |radius: u32| {
        let mut total = 0.0;
        let mut j = 0u32;
        loop {
            let inner = f64::from(radius + j);
            let term = (shell(inner + 1.0) - shell(inner)) * (-PI * lambda_min * (inner + 0.5).powi(2)).exp();
            total += term;
            // terms decay faster than geometrically once past the peak of N_j e^{...}
            if term < 1e-3 * tolerance && j > 0 && inner + 0.5 > (rank as f64 / (PI * lambda_min)).sqrt() {
                break;
            }
            j += 1;
            if j > 100_000 {
                return f64::INFINITY;
            }
        }
        total
    };
    // Exponential search then bisection on the monotone tail.
    let mut hi = 1u32;
    while tail(hi) > tolerance {
        if hi > cap {
            return Err(Error::TruncationFailure { radius: hi as usize, cap: cap as usize });
        }
        hi = hi.saturating_mul(2);
    }
    let mut lo = 0u32;
    if tail(0) <= tolerance {
        return Ok(0);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid) <= tolerance {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi > cap {
        return Err(Error::TruncationFailure { radius: hi as usize, cap: cap as usize });
    }
    Ok(hi)
}

/// Truncation radius for `omega` at `tolerance`. The bound is independent of
/// `z` because evaluation centres the box at the dominant term.
pub fn theta_truncation_radius(omega: &DMatrix<Complex64>, tolerance: f64) -> Result<u32> {
    ThetaEvaluator::new(omega.clone(), tolerance).map(|e| e.radius())
}

/// Theta evaluator for a fixed period matrix; caches the factorization of
/// `Im omega` and the truncation radius.
#[derive(Debug, Clone)]
pub struct ThetaEvaluator {
    omega: DMatrix<Complex64>,
    y_inv: DMatrix<f64>,
    lambda_min: f64,
    tolerance: f64,
    radius: u32,
}

impl ThetaEvaluator {
    pub fn new(omega: DMatrix<Complex64>, tolerance: f64) -> Result<Self> {
        Self::with_max_radius(omega, tolerance, DEFAULT_MAX_RADIUS)
    }

    pub fn with_max_radius(omega: DMatrix<Complex64>, tolerance: f64, max_radius: u32) -> Result<Self> {
        validate_omega(&omega)?;
        check_tolerance(tolerance)?;
        let r = omega.nrows();
        let y = imag_part(&omega);
        let y_sym = (&y + y.transpose()) * 0.5;
        let chol = y_sym.clone().cholesky().ok_or(Error::NotConvergent)?;
        let lambda_min = if r == 0 { 1.0 } else { min_eigenvalue(&y_sym) };
        if !(lambda_min > 0.0) {
            return Err(Error::NotConvergent);
        }
        let radius = radius_for(lambda_min, r, tolerance, max_radius)?;
        Ok(Self { omega, y_inv: chol.inverse(), lambda_min, tolerance, radius })
    }

    pub fn rank(&self) -> usize {
        self.omega.nrows()
    }

    pub fn omega(&self) -> &DMatrix<Complex64> {
        &self.omega
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `Theta_{alpha,beta}(z | omega)`.
    pub fn eval(&self, alpha: &[f64], beta: &[f64], z: &[Complex64]) -> Result<Complex64> {
        let r = self.rank();
        check_len(r, alpha.len())?;
        check_len(r, beta.len())?;
        check_len(r, z.len())?;
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) || alpha.iter().chain(beta).any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("non-finite theta argument".into()));
        }

        // w = z + beta, then w = w0 + m with m integral: the sum picks up e^{2 pi i alpha.m}.
        let mut w0 = Vec::with_capacity(r);
        let mut shift_phase = 0.0;
        for j in 0..r {
            let w = z[j] + beta[j];
            let m = w.re.round();
            w0.push(Complex64::new(w.re - m, w.im));
            shift_phase += alpha[j] * m;
        }

        // Dominant term sits at alpha + n = -Y^{-1} Im w.
        let im_w = DVector::from_iterator(r, w0.iter().map(|c| c.im));
        let peak = -(&self.y_inv * &im_w);
        let centre: Vec<i64> = (0..r).map(|j| (peak[j] - alpha[j]).round() as i64).collect();

        let radius = i64::from(self.radius);
        let mut offsets = vec![-radius; r];
        let mut p = vec![0.0; r];
        let mut acc = KahanSum::new();
        loop {
            for j in 0..r {
                p[j] = alpha[j] + (centre[j] + offsets[j]) as f64;
            }
            let mut quad = Complex64::new(0.0, 0.0);
            for i in 0..r {
                let mut row = Complex64::new(0.0, 0.0);
                for j in 0..r {
                    row += self.omega[(i, j)] * p[j];
                }
                quad += row * p[i];
            }
            let linear: Complex64 = (0..r).map(|j| w0[j] * p[j]).sum();
            let exponent = Complex64::new(0.0, 2.0 * PI) * (0.5 * quad + linear);
            if exponent.re > 700.0 {
                return Err(Error::Overflow("theta term"));
            }
            acc.add(exponent.exp());

            let mut k = r;
            loop {
                if k == 0 {
                    let phase = Complex64::new(0.0, 2.0 * PI * shift_phase).exp();
                    return Ok(acc.value() * phase);
                }
                k -= 1;
                offsets[k] += 1;
                if offsets[k] <= radius {
                    break;
                }
                offsets[k] = -radius;
            }
        }
    }

    /// Size of the dominant term, `exp(pi Im z . (Im omega)^{-1} Im z)`; the
    /// truncation error is at most `tolerance` times this.
    pub fn dominant_scale(&self, z: &[Complex64]) -> f64 {
        let im = DVector::from_iterator(z.len(), z.iter().map(|c| c.im));
        (PI * im.dot(&(&self.y_inv * &im))).exp()
    }
}

/// `Theta_{alpha,beta}(z | omega)` to the requested tolerance.
pub fn theta_eval(params: &ThetaParams) -> Result<Complex64> {
    params.validate()?;
    let eval = ThetaEvaluator::new(params.omega.clone(), params.tolerance)?;
    eval.eval(params.alpha.as_slice(), params.beta.as_slice(), params.z.as_slice())
}

/// Both sides of the modular identity
/// `Theta(W^{-1} z | -W^{-1}) = sqrt(det(-i W)) exp(i pi z W^{-1} z) Theta(z | W)`,
/// each evaluated by its own truncated sum. The square root is the branch
/// continuous from the identity (product of principal eigenvalue roots).
pub fn theta_modular_lhs_rhs(
    z: &DVector<Complex64>,
    omega: &DMatrix<Complex64>,
    tolerance: f64,
) -> Result<(Complex64, Complex64)> {
    validate_omega(omega)?;
    check_len(omega.nrows(), z.len())?;
    let inv = omega.clone().try_inverse().ok_or(Error::SingularMatrix)?;
    let inv = (&inv + inv.transpose()) * Complex64::new(0.5, 0.0);
    let r = omega.nrows();
    let zeros = vec![0.0; r];

    let lhs_eval = ThetaEvaluator::new(-&inv, tolerance)?;
    let inv_z = &inv * z;
    let lhs = lhs_eval.eval(&zeros, &zeros, inv_z.as_slice())?;

    let rhs_eval = ThetaEvaluator::new(omega.clone(), tolerance)?;
    let minus_i_omega = omega * Complex64::new(0.0, -1.0);
    let root = sqrt_det_right_half_plane(&minus_i_omega)?;
    let quad: Complex64 = z.iter().zip(inv_z.iter()).map(|(a, b)| a * b).sum();
    let rhs = root * (Complex64::new(0.0, PI) * quad).exp() * rhs_eval.eval(&zeros, &zeros, z.as_slice())?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_omega(w: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_element(1, 1, w)
    }

    fn direct_oracle(omega: Complex64, z: Complex64, n_max: i64) -> Complex64 {
        (-n_max..=n_max)
            .map(|n| {
                let n = n as f64;
                (Complex64::new(0.0, 2.0 * PI) * (0.5 * n * n * omega + n * z)).exp()
            })
            .sum()
    }

    #[test]
    fn one_dimensional_value() {
        let v = theta_eval(&ThetaParams::plain(DVector::from_element(1, c(0.0, 0.0)), scalar_omega(c(0.0, 1.0)), 1e-14).unwrap()).unwrap();
        let oracle = direct_oracle(c(0.0, 1.0), c(0.0, 0.0), 10);
        assert!((v - oracle).norm() < 1e-14);
        assert!((v.re - 1.086_434_811_213_308).abs() < 1e-12);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn agrees_with_oracle_for_complex_arguments() {
        let omega = c(0.3, 0.8);
        let z = c(0.27, -0.6);
        let eval = ThetaEvaluator::new(scalar_omega(omega), 1e-13).unwrap();
        let v = eval.eval(&[0.0], &[0.0], &[z]).unwrap();
        let oracle = direct_oracle(omega, z, 40);
        assert!((v - oracle).norm() < 1e-12 * oracle.norm().max(eval.dominant_scale(&[z])));
    }

    #[test]
    fn radius_example() {
        let r = theta_truncation_radius(&scalar_omega(c(0.0, 1.0)), 1e-12).unwrap();
        assert!(r <= 4, "radius {r}");
        let loose = theta_truncation_radius(&scalar_omega(c(0.0, 1.0)), 1e-4).unwrap();
        assert!(loose <= r);
        let wider = theta_truncation_radius(&scalar_omega(c(0.0, 3.0)), 1e-12).unwrap();
        assert!(wider <= r);
    }

    #[test]
    fn radius_cap_is_enforced() {
        let err = ThetaEvaluator::with_max_radius(scalar_omega(c(0.0, 1e-4)), 1e-12, 20).unwrap_err();
        assert!(matches!(err, Error::TruncationFailure { .. }));
    }

    #[test]
    fn rejects_bad_period_matrices() {
        assert_eq!(ThetaEvaluator::new(scalar_omega(c(1.0, -0.5)), 1e-10).unwrap_err(), Error::NotConvergent);
        let asym = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.1, 0.0), c(0.2, 0.0), c(0.0, 1.0)]);
        assert!(matches!(ThetaEvaluator::new(asym, 1e-10), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn factorizes_for_diagonal_period() {
        let one = theta_eval(&ThetaParams::plain(DVector::from_element(1, c(0.0, 0.0)), scalar_omega(c(0.0, 1.0)), 1e-14).unwrap()).unwrap();
        let two = theta_eval(&ThetaParams::plain(DVector::from_element(2, c(0.0, 0.0)), DMatrix::identity(2, 2) * c(0.0, 1.0), 1e-14).unwrap()).unwrap();
        assert!((two - one * one).norm() < 1e-13);
    }

    #[test]
    fn rank_zero_is_one() {
        let v = theta_eval(&ThetaParams::plain(DVector::zeros(0), DMatrix::zeros(0, 0), 1e-12).unwrap()).unwrap();
        assert_eq!(v, c(1.0, 0.0));
    }

    #[test]
    fn modular_examples() {
        let (l, r) = theta_modular_lhs_rhs(&DVector::from_element(1, c(0.0, 0.0)), &scalar_omega(c(0.0, 1.0)), 1e-14).unwrap();
        assert!((l - r).norm() < 1e-14);
        let (l, r) = theta_modular_lhs_rhs(&DVector::from_element(1, c(0.3, 0.0)), &scalar_omega(c(0.0, 2.0)), 1e-13).unwrap();
        assert!((l - r).norm() <= 1e-10);
        let omega = DMatrix::identity(2, 2) * c(0.0, 2.0);
        let (l, r) = theta_modular_lhs_rhs(&DVector::from_element(2, c(0.0, 0.0)), &omega, 1e-13).unwrap();
        assert!((l - r).norm() <= 1e-10);
    }

    fn random_spd(rng: &mut ChaCha8Rng, r: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(r, r, |_, _| rng.gen_range(-0.6..0.6));
        &a * a.transpose() + DMatrix::identity(r, r) * rng.gen_range(0.4..1.5)
    }

    #[test]
    fn modular_identity_random_instances() {
        let tol = 1e-12;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..50 {
            let r = 1 + case % 3;
            let m = random_spd(&mut rng, r);
            let omega = m.map(|x| c(0.0, x));
            let z = DVector::from_fn(r, |_, _| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
            let (l, rhs) = theta_modular_lhs_rhs(&z, &omega, tol).unwrap();
            let scale = l.norm().max(rhs.norm()).max(1.0);
            assert!((l - rhs).norm() <= 10.0 * tol * scale, "case {case}: {l} vs {rhs}");
        }
    }

    proptest! {
        #[test]
        fn integer_periodicity(zr in -3.0f64..3.0, zi in -1.0f64..1.0, m in -5i32..5, y in 0.5f64..2.0, x in -1.0f64..1.0) {
            let eval = ThetaEvaluator::new(scalar_omega(c(x, y)), 1e-13).unwrap();
            let z = c(zr, zi);
            let a = eval.eval(&[0.0], &[0.0], &[z]).unwrap();
            let b = eval.eval(&[0.0], &[0.0], &[z + f64::from(m)]).unwrap();
            let scale = eval.dominant_scale(&[z]);
            prop_assert!((a - b).norm() <= 1e-12 * scale.max(a.norm()));
        }

        #[test]
        fn beta_shift_is_argument_shift(zr in -1.0f64..1.0, zi in -1.0f64..1.0, b0 in -2.0f64..2.0, b1 in -2.0f64..2.0) {
            let omega = DMatrix::from_row_slice(2, 2, &[c(0.1, 1.2), c(0.2, 0.3), c(0.2, 0.3), c(-0.3, 0.9)]);
            let eval = ThetaEvaluator::new(omega, 1e-12).unwrap();
            let z = [c(zr, zi), c(-zi, zr)];
            let shifted = [z[0] + b0, z[1] + b1];
            let a = eval.eval(&[0.0, 0.0], &[b0, b1], &z).unwrap();
            let b = eval.eval(&[0.0, 0.0], &[0.0, 0.0], &shifted).unwrap();
            prop_assert!((a - b).norm() <= 1e-13 * a.norm().max(1.0));
        }

        #[test]
        fn halving_tolerance_is_consistent(zr in -1.0f64..1.0, zi in -1.5f64..1.5, a0 in 0.0f64..1.0, t in 3i32..12) {
            let tol = 10f64.powi(-t);
            let omega = scalar_omega(c(0.2, 0.7));
            let coarse = ThetaEvaluator::new(omega.clone(), tol).unwrap();
            let fine = ThetaEvaluator::new(omega, tol / 2.0).unwrap();
            let z = [c(zr, zi)];
            let a = coarse.eval(&[a0], &[0.0], &z).unwrap();
            let b = fine.eval(&[a0], &[0.0], &z).unwrap();
            prop_assert!((a - b).norm() <= tol * coarse.dominant_scale(&z));
        }
    }
}
