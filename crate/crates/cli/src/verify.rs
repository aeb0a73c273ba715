//! The `verify` suite: invariant checks on the document's space, each with a
//! fixed pass threshold. Randomized checks draw from a ChaCha stream per
//! check, so a seed reproduces the report byte for byte.

use likewise_theta::bargmann::{
    bargmann_theta, basis_image_scale, bilateral_sum, kernel_a, kernel_a_gamma_sum, kernel_gamma_sum_radius,
    TransformConfig,
};
use likewise_theta::document::SpecDocument;
use likewise_theta::fock::{
    basis_phi_ln_norm_sq, basis_phi_normalized_eval, cauchy_riemann_residual, fock_automorphy_factor, fock_functional_eq_residual,
    fock_indices, phi_fn,
};
use likewise_theta::likewise::{
    automorphy_factor, basis_e_norm_sq, basis_fn, expansion_coefficient, functional_eq_residual, ground_psi_eval,
    inner_product_quadrature, norm_sq_quadrature, CoefficientTable, DualIndex,
};
use likewise_theta::quadrature::{gaussian_integral_exact, gaussian_integral_quadrature, QuadratureSpec};
use likewise_theta::theta::{theta_modular_lhs_rhs, ThetaEvaluator};
use likewise_theta::Result;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Value of `Theta(0 | i)` from a 200-term direct sum.
const THETA_AT_I: f64 = 1.086_434_811_213_308;

#[derive(Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub check_name: String,
    pub status: Status,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub numerical_tolerance: f64,
    pub all_passed: bool,
    pub checks: Vec<CheckResult>,
}

struct Suite {
    seed: u64,
    checks: Vec<CheckResult>,
}

impl Suite {
    fn run(&mut self, name: &str, tolerance: f64, check: impl FnOnce(&mut ChaCha8Rng) -> Result<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.checks.len() as u64);
        let (status, max_residual, message) = match check(&mut rng) {
            Ok(r) if r <= tolerance => (Status::Pass, Some(r), None),
            Ok(r) if r.is_finite() => (Status::Fail, Some(r), None),
            Ok(_) => (Status::Fail, None, Some("non-finite residual".to_string())),
            Err(e) => (Status::Fail, None, Some(format!("{}: {e}", e.code()))),
        };
        self.checks.push(CheckResult { check_name: name.to_string(), status, max_residual, tolerance, message });
    }

    /// Attaches a remark to the last check.
    fn note(&mut self, text: String) {
        if let Some(last) = self.checks.last_mut() {
            last.message = Some(match last.message.take() {
                Some(m) => format!("{m}; {text}"),
                None => text,
            });
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_real(rng: &mut ChaCha8Rng, d: usize, half_width: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-half_width..half_width)).collect()
}

fn random_complex_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<Complex64> {
    loop {
        let z: Vec<Complex64> = (0..d).map(|_| c(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius))).collect();
        if z.iter().map(|v| v.norm_sqr()).sum::<f64>() <= radius * radius {
            return z;
        }
    }
}

fn random_real_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let x = random_real(rng, d, radius);
        if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            return x;
        }
    }
}

fn random_shift(rng: &mut ChaCha8Rng, r: usize) -> Vec<i64> {
    (0..r).map(|_| rng.gen_range(-2..=2)).collect()
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn run_suite(doc: &SpecDocument, tol: f64, seed: u64) -> std::result::Result<Report, CliError> {
    let space = doc.space()?;
    let indices = if doc.indices.is_empty() { DualIndex::enumerate(&space, 1, 2) } else { doc.indices.clone() };
    for idx in &indices {
        idx.validate(&space)?;
    }
    let transform = TransformConfig::new(space.clone(), tol)?;
    let quad = QuadratureSpec::new(48, 48, tol)?;
    let d = space.dimension();
    let r = space.rank();

    let mut suite = Suite { seed, checks: Vec::new() };

    suite.run("lattice.character_law", 1e-12, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let m: Vec<i64> = (0..r).map(|_| rng.gen_range(-20..=20)).collect();
            let n: Vec<i64> = (0..r).map(|_| rng.gen_range(-20..=20)).collect();
            let sum: Vec<i64> = m.iter().zip(&n).map(|(a, b)| a + b).collect();
            let chi = space.chi();
            worst = worst.max((chi.eval(&sum) - chi.eval(&m) * chi.eval(&n)).norm());
        }
        Ok(worst)
    });

    suite.run("lattice.split_quadratic_form", 1e-10, |rng| {
        let gram = space.lattice().gram_matrix();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x = random_real(rng, d, 3.0);
            let (t, s) = space.frame().split_point(&x);
            let norm_sq: f64 = x.iter().map(|v| v * v).sum();
            let split = (t.transpose() * gram.entries() * &t)[(0, 0)] + s.norm_squared();
            worst = worst.max((norm_sq - split).abs() / (1.0 + norm_sq));
        }
        Ok(worst)
    });

    suite.run("lattice.fold_idempotent", 0.0, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x = random_real(rng, d, 5.0);
            let (folded, _) = space.domain().fold(space.frame(), &x);
            let (_, again) = space.domain().fold(space.frame(), folded.as_slice());
            worst = worst.max(again.iter().map(|m| m.unsigned_abs() as f64).fold(0.0, f64::max));
        }
        Ok(worst)
    });

    suite.run("lattice.volume", 1e-12, |_| {
        let det = space.lattice().gram_matrix().determinant();
        let vol = space.domain().volume_lambda1();
        Ok((vol * vol - det).abs() / det)
    });

    suite.run("likewise.functional_equation", 1e-10, |rng| {
        let mut worst: f64 = 0.0;
        let psi = |y: &[f64]| ground_psi_eval(&space, y).unwrap_or(c(f64::NAN, f64::NAN));
        for i in 0..100 {
            let x = random_real(rng, d, 1.0);
            let m = random_shift(rng, r);
            let scale = automorphy_factor(&space, &x, &m)?.norm().max(1.0);
            let idx = &indices[i % indices.len()];
            let res = functional_eq_residual(&space, basis_fn(&space, idx), &x, &m)?
                .max(functional_eq_residual(&space, psi, &x, &m)?);
            worst = worst.max(res / scale);
        }
        Ok(worst)
    });

    suite.run("fock.functional_equation", 1e-10, |rng| {
        let fock = transform.fock();
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let z: Vec<Complex64> = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5))).collect();
            let m = random_shift(rng, r);
            let scale = fock_automorphy_factor(fock, &z, &m)?.norm().max(1.0);
            let idx = &indices[i % indices.len()];
            worst = worst.max(fock_functional_eq_residual(fock, phi_fn(fock, idx), &z, &m)? / scale);
        }
        Ok(worst)
    });

    suite.run("fock.holomorphy", 1e-6, |rng| {
        let fock = transform.fock();
        let mut worst: f64 = 0.0;
        for idx in fock_indices(fock, 1, 2) {
            let f = phi_fn(fock, &idx);
            let z: Vec<Complex64> = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5))).collect();
            worst = worst.max(cauchy_riemann_residual(&f, &z, 1e-4) / f(&z).norm().max(1.0));
        }
        Ok(worst)
    });

    suite.run("theta.reference_value", 1e-10, |_| {
        let eval = ThetaEvaluator::new(DMatrix::from_element(1, 1, c(0.0, 1.0)), tol.min(1e-12))?;
        Ok((eval.eval(&[0.0], &[0.0], &[c(0.0, 0.0)])? - c(THETA_AT_I, 0.0)).norm())
    });

    suite.run("theta.modular_identity", 1e-9, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let n = rng.gen_range(1..=3);
            let a: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.6..0.6));
            let m = &a * a.transpose() + DMatrix::identity(n, n) * rng.gen_range(0.4..1.5);
            let omega = m.map(|v| c(0.0, v));
            let z = DVector::from_fn(n, |_, _| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
            let (lhs, rhs) = theta_modular_lhs_rhs(&z, &omega, 1e-12)?;
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0));
        }
        Ok(worst)
    });

    suite.run("quadrature.gaussian_integral", 1e-8, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let s = rng.gen_range(1..=3);
            let a = rng.gen_range(0.5..2.0);
            let m: DMatrix<f64> = DMatrix::from_fn(s, s, |_, _| rng.gen_range(-0.5..0.5));
            let re = &m * m.transpose() + DMatrix::identity(s, s) * 0.5;
            let lambda = re.clone().symmetric_eigen().eigenvalues.min();
            let raw: DMatrix<f64> = DMatrix::from_fn(s, s, |_, _| rng.gen_range(-1.0..1.0));
            let sym = (&raw + raw.transpose()) * 0.5;
            let im = &sym * (0.5 * lambda / sym.norm().max(1e-12));
            let matrix = DMatrix::from_fn(s, s, |i, j| c(re[(i, j)], im[(i, j)]));
            let b = DVector::from_fn(s, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let exact = gaussian_integral_exact(a, &matrix, &b)?;
            let quad = gaussian_integral_quadrature(a, &matrix, &b, 40, 1e-8)?;
            worst = worst.max(relative(quad.value, exact));
        }
        Ok(worst)
    });

    suite.run("likewise.gram_normalized", 1e-7, |_| {
        let mut worst: f64 = 0.0;
        for a in &indices {
            let na = basis_e_norm_sq(&space, a)?.sqrt();
            for b in &indices {
                let nb = basis_e_norm_sq(&space, b)?.sqrt();
                let v = inner_product_quadrature(&space, basis_fn(&space, a), basis_fn(&space, b), &quad)?.value / (na * nb);
                let expected = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((v - c(expected, 0.0)).norm());
            }
        }
        Ok(worst)
    });

    let random_table = |rng: &mut ChaCha8Rng| {
        let mut table = CoefficientTable::default();
        for idx in &indices {
            if rng.gen_bool(0.6) {
                table.push(idx.clone(), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        if table.entries.is_empty() {
            table.push(indices[0].clone(), c(1.0, 0.0));
        }
        table
    };

    suite.run("likewise.expansion_round_trip", 1e-7, |rng| {
        let table = random_table(rng);
        let f = table.as_fn(&space);
        let mut worst: f64 = 0.0;
        for idx in &indices {
            let a = expansion_coefficient(&space, &f, idx, &quad)?.value;
            let expected = table.entries.iter().find(|e| &e.index() == idx).map_or(c(0.0, 0.0), |e| e.value());
            worst = worst.max((a - expected).norm());
        }
        Ok(worst)
    });

    suite.run("likewise.parseval", 1e-6, |rng| {
        let table = random_table(rng);
        let n = norm_sq_quadrature(&space, table.as_fn(&space), &quad)?.value.re;
        let parseval = table.norm_sq(&space)?;
        Ok((n - parseval).abs() / parseval)
    });

    suite.run("bargmann.kernel_lattice_sum", 1e-10, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let z = random_complex_ball(rng, d, 0.8);
            let x = random_real(rng, d, 1.5);
            let a = kernel_a(&transform, &z, &x)?;
            let radius = kernel_gamma_sum_radius(&transform, &z, &x)?;
            let b = kernel_a_gamma_sum(&transform, &z, &x, radius)?;
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
        }
        Ok(worst)
    });

    // Images with C = ||e|| / ||phi|| below 1e-8 are smaller than the
    // cancellation floor of any quadrature of the O(1) integrand.
    let resolvable: Vec<&DualIndex> =
        indices.iter().filter(|idx| basis_image_scale(&space, idx).is_ok_and(|c| c >= 1e-8)).collect();
    let skipped = indices.len() - resolvable.len();
    suite.run("bargmann.basis_images", 1e-6, |rng| {
        let fock = transform.fock();
        let mut worst: f64 = 0.0;
        for idx in resolvable.iter().take(6) {
            let norm_e = basis_e_norm_sq(&space, idx)?.sqrt();
            let scale = basis_image_scale(&space, idx)?;
            let ratio = (basis_e_norm_sq(&space, idx)?.ln() - basis_phi_ln_norm_sq(fock, idx)?) * 0.5;
            worst = worst.max((scale.ln() - ratio).abs());
            for _ in 0..2 {
                let z = random_complex_ball(rng, d, 0.5);
                let image = bargmann_theta(&transform, basis_fn(&space, idx), &z, &quad)?.value / norm_e;
                let expected = basis_phi_normalized_eval(fock, idx, &z)?;
                worst = worst.max(relative(image, expected));
            }
        }
        Ok(worst)
    });
    if skipped > 0 {
        suite.note(format!("{skipped} of {} indices have images below quadrature resolution and were not compared", indices.len()));
    }

    suite.run("bargmann.bilateral_sum", 1e-6, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let z = random_complex_ball(rng, d, 0.5);
            let x = random_real_ball(rng, d, 0.5);
            let a = kernel_a(&transform, &z, &x)?;
            let s = bilateral_sum(&transform, &z, &x, (4, 20))?;
            worst = worst.max(relative(s, a));
        }
        Ok(worst)
    });

    let all_passed = suite.checks.iter().all(|c| matches!(c.status, Status::Pass));
    Ok(Report { schema_version: SCHEMA_VERSION, seed, numerical_tolerance: tol, all_passed, checks: suite.checks })
}
