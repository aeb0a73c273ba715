//! Gaussian quadrature rules, the tensor cell x Gauss-Hermite integrator and
//! the closed-form complex Gaussian integral.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermite::check_nu;
use crate::lattice::{FundamentalDomain, SplitFrame};
use crate::linalg::{is_symmetric, real_part, sqrt_det_right_half_plane, KahanSum};

/// Node and weight counts for the tensor integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per lattice direction of the cell.
    pub cell_nodes_per_dim: usize,
    /// Gauss-Hermite nodes per unbounded Gaussian-weighted direction.
    pub hermite_nodes_per_dim: usize,
    /// Accepted error estimate, mixed absolute/relative: `est <= tol * max(1, |value|)`.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { cell_nodes_per_dim: 48, hermite_nodes_per_dim: 48, tolerance: 1e-9 }
    }
}

impl QuadratureSpec {
    pub fn new(cell_nodes_per_dim: usize, hermite_nodes_per_dim: usize, tolerance: f64) -> Result<Self> {
        let spec = Self { cell_nodes_per_dim, hermite_nodes_per_dim, tolerance };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cell_nodes_per_dim < 2 || self.hermite_nodes_per_dim < 2 {
            return Err(Error::InvalidInput("quadrature node counts must be at least 2".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput("quadrature tolerance must be positive".into()));
        }
        Ok(())
    }

    /// The coarse companion used for the error estimate.
    pub(crate) fn halved(&self) -> Self {
        Self {
            cell_nodes_per_dim: self.cell_nodes_per_dim.div_ceil(2),
            hermite_nodes_per_dim: self.hermite_nodes_per_dim.div_ceil(2),
            tolerance: self.tolerance,
        }
    }
}

/// A quadrature result with its node-doubling error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: Complex64,
    pub error: f64,
}

impl QuadratureEstimate {
    /// Combines a fine and a coarse evaluation, failing when they disagree
    /// beyond `tolerance`.
    pub(crate) fn from_pair(fine: Complex64, coarse: Complex64, tolerance: f64) -> Result<Self> {
        let error = (fine - coarse).norm();
        if !fine.re.is_finite() || !fine.im.is_finite() {
            return Err(Error::Overflow("quadrature"));
        }
        if error > tolerance * fine.norm().max(1.0) {
            return Err(Error::QuadratureNotConverged { estimate: error, tolerance });
        }
        Ok(Self { value: fine, error })
    }
}

/// One-dimensional quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine image of a rule on `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Family {
    Hermite,
    Legendre,
}

type RuleCache = Mutex<HashMap<(Family, usize), Arc<Rule>>>;

fn rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(family: Family, n: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    if let Some(rule) = rule_cache().lock().expect("rule cache poisoned").get(&(family, n)) {
        return rule.clone();
    }
    let rule = Arc::new(build(n));
    rule_cache().lock().expect("rule cache poisoned").entry((family, n)).or_insert(rule).clone()
}

/// Eigenvalues of the symmetric tridiagonal Jacobi matrix, sorted ascending.
fn jacobi_nodes(off_diagonal: impl Fn(usize) -> f64, n: usize) -> Vec<f64> {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = off_diagonal(k);
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let mut nodes: Vec<f64> = j.symmetric_eigen().eigenvalues.iter().cloned().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes
}

/// Orthonormal Hermite polynomials `p_0..p_n` at `x` (weight `e^{-x^2}`).
fn orthonormal_hermite(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(std::f64::consts::PI.powf(-0.25));
    if n >= 1 {
        p.push(std::f64::consts::SQRT_2 * x * p[0]);
    }
    for k in 1..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * p[k] - (k as f64 / (k as f64 + 1.0)).sqrt() * p[k - 1];
        p.push(next);
    }
    p
}

fn build_hermite(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
    let mut nodes = jacobi_nodes(|k| (k as f64 / 2.0).sqrt(), n);
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let p = orthonormal_hermite(n, *x);
            let dp = (2.0 * n as f64).sqrt() * p[n - 1];
            if dp == 0.0 {
                break;
            }
            *x -= p[n] / dp;
        }
        let p = orthonormal_hermite(n - 1, *x);
        weights.push(1.0 / p.iter().map(|v| v * v).sum::<f64>());
    }
    symmetrize(&mut nodes, &mut weights);
    Rule { nodes, weights }
}

/// `(P_n(x), P_n'(x))` for Legendre polynomials.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = jacobi_nodes(|k| k as f64 / ((4 * k * k - 1) as f64).sqrt(), n);
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = legendre_with_derivative(n, *x);
            *x -= p / dp;
        }
        let (_, dp) = legendre_with_derivative(n, *x);
        weights.push(2.0 / ((1.0 - *x * *x) * dp * dp));
    }
    symmetrize(&mut nodes, &mut weights);
    Rule { nodes, weights }
}

/// Forces exact mirror symmetry of a symmetric rule.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// Gauss-Hermite rule for `int p(x) e^{-x^2} dx`, exact for degree `<= 2n-1`.
pub fn gauss_hermite_rule(n: usize) -> Arc<Rule> {
    cached(Family::Hermite, n, build_hermite)
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_rule(n: usize) -> Arc<Rule> {
    cached(Family::Legendre, n, build_legendre)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_legendre(a: f64, b: f64, panels: usize, per_panel: usize) -> Rule {
    let base = gauss_legendre_rule(per_panel);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mapped = base.mapped(lo, lo + h);
        nodes.extend(mapped.nodes);
        weights.extend(mapped.weights);
    }
    Rule { nodes, weights }
}

/// Visits every node of the `dims`-fold tensor product of `rule`, in
/// lexicographic order, with its product weight.
pub(crate) fn for_each_tensor_node(rule: &Rule, dims: usize, mut visit: impl FnMut(&[f64], f64)) {
    let n = rule.len();
    let mut idx = vec![0usize; dims];
    let mut point = vec![0.0; dims];
    loop {
        let mut w = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            point[k] = rule.nodes[i];
            w *= rule.weights[i];
        }
        visit(&point, w);
        let mut k = dims;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// `int_{R^s} exp(-a y^T A y + b^T y) dy` in closed form,
/// `(pi/a)^{s/2} det(A)^{-1/2} exp(b^T A^{-1} b / (4a))`.
///
/// `A` must be complex symmetric with positive definite real part. The root
/// of `det A` is the product of principal roots of the eigenvalues, which is
/// the branch continuous along `(1-t) I + t A`.
pub fn gaussian_integral_exact(a: f64, matrix: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<Complex64> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("scale a must be positive, got {a}")));
    }
    let s = matrix.nrows();
    if !matrix.is_square() || b.len() != s {
        return Err(Error::DimensionMismatch { expected: s, found: b.len() });
    }
    let scale = matrix.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    if !is_symmetric(matrix, 1e-12 * scale, |x, y| (x - y).norm()) {
        return Err(Error::InvalidInput("matrix must be symmetric".into()));
    }
    if s == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    real_part(matrix).cholesky().ok_or(Error::SingularMatrix)?;
    let solved = matrix.clone().lu().solve(b).ok_or(Error::SingularMatrix)?;
    let quad_form: Complex64 = b.iter().zip(solved.iter()).map(|(x, y)| x * y).sum();
    let root = sqrt_det_right_half_plane(matrix)?;
    let prefactor = (std::f64::consts::PI / a).powf(0.5 * s as f64);
    Ok(prefactor / root * (quad_form / (4.0 * a)).exp())
}

fn gaussian_integral_quadrature_once(
    a: f64,
    matrix: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    centre: &DVector<f64>,
    lower_inv_t: &DMatrix<f64>,
    nodes: usize,
) -> Complex64 {
    let s = matrix.nrows();
    let rule = gauss_hermite_rule(nodes);
    let scale = 1.0 / a.sqrt();
    let mut acc = KahanSum::new();
    for_each_tensor_node(&rule, s, |u, w| {
        let uv = DVector::from_column_slice(u);
        let y = (centre + lower_inv_t * uv * scale).map(|v| Complex64::new(v, 0.0));
        let quad = (y.transpose() * matrix * &y)[(0, 0)];
        let lin: Complex64 = b.iter().zip(y.iter()).map(|(p, q)| p * q).sum();
        let shift: f64 = u.iter().map(|v| v * v).sum();
        acc.add((-a * quad + lin + shift).exp() * w);
    });
    acc.value()
}

/// `int_{R^s} exp(-a y^T A y + b^T y) dy` by tensor Gauss-Hermite after
/// completing the square in the real part: `y = y_0 + L^{-T} u / sqrt(a)`
/// with `Re A = L L^T` and `2 a Re(A) y_0 = Re b`, so the weight is `e^{-|u|^2}`
/// and only the phase from `Im A`, `Im b` is left to the rule. The error
/// estimate compares `nodes` against `ceil(nodes/2)` per direction.
pub fn gaussian_integral_quadrature(
    a: f64,
    matrix: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    nodes: usize,
    tolerance: f64,
) -> Result<QuadratureEstimate> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("scale a must be positive, got {a}")));
    }
    let s = matrix.nrows();
    if !matrix.is_square() || b.len() != s {
        return Err(Error::DimensionMismatch { expected: s, found: b.len() });
    }
    if nodes < 2 || !(tolerance > 0.0) {
        return Err(Error::InvalidInput("need at least two nodes and a positive tolerance".into()));
    }
    let re = real_part(matrix);
    let chol = re.clone().cholesky().ok_or(Error::SingularMatrix)?;
    let lower_inv_t = chol.l().try_inverse().ok_or(Error::SingularMatrix)?.transpose();
    let centre = chol.solve(&b.map(|c| c.re)) / (2.0 * a);
    let jacobian = lower_inv_t.determinant() * a.powf(-0.5 * s as f64);
    let fine = gaussian_integral_quadrature_once(a, matrix, b, &centre, &lower_inv_t, nodes) * jacobian;
    let coarse = gaussian_integral_quadrature_once(a, matrix, b, &centre, &lower_inv_t, nodes.div_ceil(2)) * jacobian;
    // from_pair is mixed absolute/relative; rescale so the check is relative.
    QuadratureEstimate::from_pair(fine, coarse, tolerance * fine.norm().max(1e-300).min(1.0))
}

fn tensor_cell_hermite_once(
    frame: &SplitFrame,
    domain: &FundamentalDomain,
    nu: f64,
    integrand: &dyn Fn(&[f64]) -> Complex64,
    spec: &QuadratureSpec,
) -> Complex64 {
    let r = frame.rank();
    let m = frame.complement_dim();
    let cell = gauss_legendre_rule(spec.cell_nodes_per_dim).mapped(0.0, 1.0);
    let herm = gauss_hermite_rule(spec.hermite_nodes_per_dim);
    let inv_sqrt_nu = 1.0 / nu.sqrt();
    let b = frame.lattice_frame();
    let c = frame.complement_frame();
    let mut acc = KahanSum::new();
    for_each_tensor_node(&herm, m, |xi, wh| {
        let s = DVector::from_iterator(m, xi.iter().map(|x| x * inv_sqrt_nu));
        let origin = domain.cell_origin(&s);
        let base = c * &s;
        for_each_tensor_node(&cell, r, |u, wc| {
            let t = DVector::from_iterator(r, u.iter().zip(origin.iter()).map(|(ui, oi)| ui + oi));
            let x = b * t + &base;
            acc.add(integrand(x.as_slice()) * (wc * wh));
        });
    });
    acc.value() * domain.volume_lambda1() * inv_sqrt_nu.powi(m as i32)
}

/// `int_{Lambda} F(x) e^{-nu |x_2|^2} dx` over the fundamental domain
/// `Lambda_1 x V^perp`, by Gauss-Legendre on the cell (lattice coordinates,
/// Jacobian `vol(Lambda_1)`) times Gauss-Hermite in `sqrt(nu) x_2`.
///
/// The error estimate compares against the same rule with half the nodes.
pub fn tensor_cell_hermite(
    frame: &SplitFrame,
    domain: &FundamentalDomain,
    nu: f64,
    integrand: impl Fn(&[f64]) -> Complex64,
    spec: &QuadratureSpec,
) -> Result<QuadratureEstimate> {
    check_nu(nu)?;
    spec.validate()?;
    let fine = tensor_cell_hermite_once(frame, domain, nu, &integrand, spec);
    let coarse = tensor_cell_hermite_once(frame, domain, nu, &integrand, &spec.halved());
    QuadratureEstimate::from_pair(fine, coarse, spec.tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use approx::assert_relative_eq;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn small_hermite_rules() {
        let r1 = gauss_hermite_rule(1);
        assert_eq!(r1.nodes, vec![0.0]);
        assert_relative_eq!(r1.weights[0], SQRT_PI, max_relative = 1e-15);
        let r2 = gauss_hermite_rule(2);
        assert_relative_eq!(r2.nodes[1], 1.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r2.nodes[0], -1.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r2.weights[0], SQRT_PI / 2.0, max_relative = 1e-15);
        let second_moment: f64 = r2.nodes.iter().zip(&r2.weights).map(|(x, w)| w * x * x).sum();
        assert_relative_eq!(second_moment, SQRT_PI / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn hermite_weights_sum_to_sqrt_pi() {
        for n in [3, 10, 31, 64, 100, 150] {
            let rule = gauss_hermite_rule(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - SQRT_PI).abs() < 1e-13, "n={n}: {s}");
        }
    }

    #[test]
    fn hermite_moments_exact() {
        // int x^{2j} e^{-x^2} = Gamma(j + 1/2)
        let rule = gauss_hermite_rule(12);
        let mut gamma = SQRT_PI;
        for j in 0..12 {
            let m: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(2 * j)).sum();
            assert_relative_eq!(m, gamma, max_relative = 1e-12);
            gamma *= j as f64 + 0.5;
        }
    }

    #[test]
    fn hermite_polynomials_orthogonal() {
        let rule = gauss_hermite_rule(16);
        for m in 0..=10u32 {
            for n in 0..=10u32 {
                let v: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * crate::hermite::hermite_1d(m, *x) * crate::hermite::hermite_1d(n, *x))
                    .sum();
                let norm = |j: u32| SQRT_PI * 2f64.powi(j as i32) * (1..=j).map(f64::from).product::<f64>();
                let exact = if m == n { norm(n) } else { 0.0 };
                let scale = (norm(m) * norm(n)).sqrt();
                assert!((v - exact).abs() <= 1e-10 * scale, "m={m} n={n}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let rule = gauss_legendre_rule(7);
        for deg in 0..14 {
            let v: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((v - exact).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn composite_legendre_integrates_oscillation() {
        let rule = composite_legendre(-3.0, 5.0, 16, 12);
        let v: Complex64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| Complex64::new(0.0, 7.0 * x).exp() * w)
            .sum();
        let exact = (Complex64::new(0.0, 35.0).exp() - Complex64::new(0.0, -21.0).exp()) / Complex64::new(0.0, 7.0);
        assert!((v - exact).norm() < 1e-13);
    }

    #[test]
    fn gaussian_integral_examples() {
        let one = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let zero = DVector::from_element(1, Complex64::new(0.0, 0.0));
        assert_relative_eq!(gaussian_integral_exact(1.0, &one, &zero).unwrap().re, SQRT_PI, max_relative = 1e-15);
        let id2 = DMatrix::<Complex64>::identity(2, 2);
        let z2 = DVector::from_element(2, Complex64::new(0.0, 0.0));
        let v = gaussian_integral_exact(0.5, &id2, &z2).unwrap();
        assert_relative_eq!(v.re, 2.0 * std::f64::consts::PI, max_relative = 1e-15);
        let two = DVector::from_element(1, Complex64::new(2.0, 0.0));
        let v = gaussian_integral_exact(1.0, &one, &two).unwrap();
        assert_relative_eq!(v.re, SQRT_PI * std::f64::consts::E, max_relative = 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn gaussian_integral_rejects_indefinite_real_part() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]).map(|x| Complex64::new(x, 0.0));
        let b = DVector::from_element(2, Complex64::new(0.0, 0.0));
        assert_eq!(gaussian_integral_exact(1.0, &m, &b).unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn gaussian_integral_continuation_along_path() {
        // Along A(t) = (1-t) I + t A the value must move continuously; a branch
        // jump of the determinant root would flip its sign somewhere.
        let target = DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(1.0, 2.5),
                Complex64::new(0.2, 0.1),
                Complex64::new(0.0, -0.3),
                Complex64::new(0.2, 0.1),
                Complex64::new(0.8, 2.7),
                Complex64::new(0.1, 0.0),
                Complex64::new(0.0, -0.3),
                Complex64::new(0.1, 0.0),
                Complex64::new(1.2, 2.9),
            ],
        );
        let b = DVector::from_element(3, Complex64::new(0.0, 0.0));
        let id = DMatrix::<Complex64>::identity(3, 3);
        let mut prev = gaussian_integral_exact(1.0, &id, &b).unwrap();
        for step in 1..=400 {
            let t = step as f64 / 400.0;
            let m = &id * Complex64::new(1.0 - t, 0.0) + &target * Complex64::new(t, 0.0);
            let v = gaussian_integral_exact(1.0, &m, &b).unwrap();
            assert!((v - prev).norm() < 0.05 * prev.norm().max(v.norm()), "jump at t={t}");
            prev = v;
        }
    }

    #[test]
    fn tensor_constant_and_odd() {
        let lattice = LatticeSpec::new(3, &[vec![2.0, 0.0, 0.0]]).unwrap();
        let frame = SplitFrame::new(&lattice);
        let dom = FundamentalDomain::canonical(&lattice);
        let nu = 1.7;
        let spec = QuadratureSpec::new(8, 8, 1e-12).unwrap();
        let v = tensor_cell_hermite(&frame, &dom, nu, |_| Complex64::new(1.0, 0.0), &spec).unwrap();
        assert_relative_eq!(v.value.re, 2.0 * std::f64::consts::PI / nu, max_relative = 1e-13);
        let odd = tensor_cell_hermite(&frame, &dom, nu, |x| Complex64::new(x[1] * x[2] * x[2], 0.0), &spec).unwrap();
        assert!(odd.value.norm() < 1e-13);
    }

    #[test]
    fn tensor_matches_gaussian_oracle() {
        // int_{V^perp} e^{-nu|x2|^2 + c.x2} over a unit cell: vol * exact Gaussian.
        let lattice = LatticeSpec::new(3, &[vec![1.0, 1.0, 0.0]]).unwrap();
        let frame = SplitFrame::new(&lattice);
        let dom = FundamentalDomain::canonical(&lattice);
        let nu = 2.0;
        let c = [Complex64::new(0.4, 0.3), Complex64::new(-0.2, 0.5)];
        let cframe = frame.complement_frame().clone();
        let integrand = |x: &[f64]| {
            let s = cframe.transpose() * DVector::from_column_slice(x);
            (c[0] * s[0] + c[1] * s[1]).exp()
        };
        let spec = QuadratureSpec::new(4, 40, 1e-12).unwrap();
        let v = tensor_cell_hermite(&frame, &dom, nu, integrand, &spec).unwrap();
        let a = DMatrix::<Complex64>::identity(2, 2);
        let b = DVector::from_column_slice(&c);
        let exact = gaussian_integral_exact(nu, &a, &b).unwrap() * dom.volume_lambda1();
        assert!((v.value - exact).norm() < 1e-10 * exact.norm());
    }

    /// Random `(a, A, b)` with `s <= 3`: `Re A` well conditioned, `|Im A|`
    /// at most half the smallest eigenvalue of `Re A`, moderate `b`.
    pub(crate) fn random_gaussian_case(rng: &mut impl rand::Rng) -> (f64, DMatrix<Complex64>, DVector<Complex64>) {
        let s = rng.gen_range(1..=3);
        let a = rng.gen_range(0.5..2.0);
        let m: DMatrix<f64> = DMatrix::from_fn(s, s, |_, _| rng.gen_range(-0.5..0.5));
        let re = &m * m.transpose() + DMatrix::identity(s, s) * 0.5;
        let lambda = crate::linalg::min_eigenvalue(&re);
        let raw: DMatrix<f64> = DMatrix::from_fn(s, s, |_, _| rng.gen_range(-1.0..1.0));
        let sym = (&raw + raw.transpose()) * 0.5;
        let norm = sym.norm().max(1e-12);
        let im = sym * (0.5 * lambda / norm);
        let matrix = DMatrix::from_fn(s, s, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
        let b = DVector::from_fn(s, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (a, matrix, b)
    }

    #[test]
    fn gaussian_quadrature_matches_closed_form() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (a, matrix, b) = random_gaussian_case(&mut rng);
            let exact = gaussian_integral_exact(a, &matrix, &b).unwrap();
            let quad = gaussian_integral_quadrature(a, &matrix, &b, 40, 1e-8).unwrap();
            assert!((quad.value - exact).norm() <= 1e-8 * exact.norm(), "{:?}: {} vs {exact}", (a, &matrix, &b), quad.value);
            assert!((quad.value - exact).norm() <= quad.error.max(1e-14 * exact.norm()) * 10.0);
        }
    }

    #[test]
    fn gaussian_quadrature_rejects_bad_input() {
        let indefinite = DMatrix::from_row_slice(1, 1, &[Complex64::new(-1.0, 0.0)]);
        let b = DVector::from_element(1, Complex64::new(0.0, 0.0));
        assert!(matches!(gaussian_integral_quadrature(1.0, &indefinite, &b, 20, 1e-8), Err(Error::SingularMatrix)));
        let one = DMatrix::from_row_slice(1, 1, &[Complex64::new(1.0, 0.0)]);
        assert!(gaussian_integral_quadrature(0.0, &one, &b, 20, 1e-8).is_err());
    }
}
