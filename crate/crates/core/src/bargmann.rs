//! The Segal-Bargmann transform
//! `[B f](z) = (nu/pi)^{3d/4} int_{R^d} e^{sqrt2 nu <z,x> - (nu/2)<z,z>} f(x) e^{-nu|x|^2} dx`
//! on likewise functions: the direct integral over a truncated box, the
//! localized form over a fundamental domain with the theta kernel
//! `A(z; x) = (nu/pi)^{3d/4} e^{sqrt2 nu <z,x> - (nu/2)<z,z>} Theta_{0,alpha}((i nu/2pi) G (x_1 - sqrt2 z_1) | (i nu/2pi) G)`,
//! and the expansion of the kernel over the two paired bases.

use std::f64::consts::{PI, SQRT_2, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::fock::{basis_phi_normalized_eval, bilinear_c, FockParams};
use crate::hermite::MultiIndex;
use crate::likewise::{
    automorphy_factor, basis_e_eval, basis_e_norm_sq, functional_eq_residual, integer_box, DualIndex, SpaceParams,
};
use crate::linalg::KahanSum;
use crate::quadrature::{composite_legendre, gauss_legendre_rule, for_each_tensor_node, tensor_cell_hermite, QuadratureEstimate, QuadratureSpec, Rule};
use crate::theta::ThetaEvaluator;

/// Width of one Gauss-Legendre panel in the direct integral.
pub const PANEL_WIDTH: f64 = 0.4;
/// Nodes per panel in the direct integral.
pub const PANEL_NODES: usize = 16;

const THETA_TOLERANCE: f64 = 1e-14;
/// Extra `ln` headroom in the automatic box radius, for prefactors and
/// polynomial growth of the integrand.
const RADIUS_MARGIN: f64 = 8.0;

/// The space, its Fock partner and the numerical settings of the transform.
#[derive(Debug, Clone)]
pub struct TransformConfig {
    space: SpaceParams,
    fock: FockParams,
    theta: ThetaEvaluator,
    truncation_box_radius: Option<f64>,
    gamma_sum_radius: u32,
    tolerance: f64,
}

impl TransformConfig {
    pub fn new(space: SpaceParams, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::InvalidInput(format!("transform tolerance must lie in (0, 1), got {tolerance}")));
        }
        let fock = FockParams::from_space(&space)?;
        let omega = space.lattice().gram_matrix().entries().map(|g| Complex64::new(0.0, space.nu() / TAU * g));
        let theta = ThetaEvaluator::new(omega, THETA_TOLERANCE)?;
        Ok(Self { space, fock, theta, truncation_box_radius: None, gamma_sum_radius: 6, tolerance })
    }

    /// Fixes the half-width of the direct-integration box (orthonormal
    /// coordinates) instead of deriving it from the tolerance.
    pub fn with_box_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("box radius must be positive, got {radius}")));
        }
        self.truncation_box_radius = Some(radius);
        Ok(self)
    }

    pub fn with_gamma_sum_radius(mut self, radius: u32) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidInput("lattice sum radius must be positive".into()));
        }
        self.gamma_sum_radius = radius;
        Ok(self)
    }

    pub fn space(&self) -> &SpaceParams {
        &self.space
    }

    pub fn fock(&self) -> &FockParams {
        &self.fock
    }

    pub fn theta(&self) -> &ThetaEvaluator {
        &self.theta
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn gamma_sum_radius(&self) -> u32 {
        self.gamma_sum_radius
    }

    pub fn truncation_box_radius(&self) -> Option<f64> {
        self.truncation_box_radius
    }

    fn prefactor(&self) -> f64 {
        (self.space.nu() / PI).powf(0.75 * self.space.dimension() as f64)
    }

    fn classical_exponent(&self, z: &[Complex64], x: &[f64]) -> Complex64 {
        let nu = self.space.nu();
        let zx: Complex64 = z.iter().zip(x).map(|(a, b)| a * b).sum();
        let zz: Complex64 = z.iter().map(|a| a * a).sum();
        SQRT_2 * nu * zx - 0.5 * nu * zz
    }
}

fn check_point(cfg: &TransformConfig, z: &[Complex64]) -> Result<()> {
    check_len(cfg.space.dimension(), z.len())?;
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite evaluation point".into()));
    }
    Ok(())
}

/// Checks the functional equation of `phi` at a few fixed points and
/// generator shifts; returns `InvalidInput` when it visibly fails.
pub fn spot_check_likewise(space: &SpaceParams, phi: &dyn Fn(&[f64]) -> Complex64) -> Result<()> {
    let d = space.dimension();
    let r = space.rank();
    let probes: [f64; 3] = [0.13, -0.41, 0.27];
    for (p, start) in probes.iter().enumerate() {
        let x: Vec<f64> = (0..d).map(|i| start + 0.19 * i as f64 - 0.07 * p as f64).collect();
        for j in 0..r {
            let mut m = vec![0i64; r];
            m[j] = 1;
            let res = functional_eq_residual(space, phi, &x, &m)?;
            let scale = automorphy_factor(space, &x, &m)?.norm().max(1.0);
            if !(res <= 1e-6 * scale) {
                return Err(Error::InvalidInput(format!(
                    "function does not satisfy the functional equation (residual {res:e} for generator {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Automatic half-width `R` with `b R - c R^2 = -L`: past `R` the envelope
/// `e^{b|x| - c|x|^2}` is below `e^{-L}`.
fn envelope_radius(b: f64, c: f64, tolerance: f64) -> f64 {
    let l = (1.0 / tolerance).ln() + RADIUS_MARGIN;
    (b + (b * b + 4.0 * c * l).sqrt()) / (2.0 * c)
}

fn for_each_product(rules: &[&Rule], mut visit: impl FnMut(&[f64], f64)) {
    let dims = rules.len();
    let mut idx = vec![0usize; dims];
    let mut point = vec![0.0; dims];
    if rules.iter().any(|r| r.is_empty()) {
        return;
    }
    loop {
        let mut w = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            point[k] = rules[k].nodes[i];
            w *= rules[k].weights[i];
        }
        visit(&point, w);
        let mut k = dims;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < rules[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

struct DirectPass {
    value: Complex64,
    peak: f64,
}

fn direct_pass(
    integrand: &dyn Fn(&[f64]) -> Complex64,
    frame: &DMatrix<f64>,
    radii: &[f64],
    panel_width: f64,
) -> DirectPass {
    let rules: Vec<Rule> = radii
        .iter()
        .map(|&r| {
            let panels = ((2.0 * r / panel_width).ceil() as usize).max(1);
            composite_legendre(-r, r, panels, PANEL_NODES)
        })
        .collect();
    let refs: Vec<&Rule> = rules.iter().collect();
    let mut acc = KahanSum::new();
    let mut peak: f64 = 0.0;
    for_each_product(&refs, |y, w| {
        let x = frame * DVector::from_column_slice(y);
        let v = integrand(x.as_slice());
        peak = peak.max(v.norm());
        acc.add(v * w);
    });
    DirectPass { value: acc.value(), peak }
}

/// Largest integrand magnitude on the faces of the box, sampled on a
/// 9-point grid per remaining direction.
fn boundary_magnitude(integrand: &dyn Fn(&[f64]) -> Complex64, frame: &DMatrix<f64>, radii: &[f64]) -> f64 {
    let dims = radii.len();
    let samples = 9;
    let mut worst: f64 = 0.0;
    for face in 0..dims {
        for side in [-1.0, 1.0] {
            let mut idx = vec![0usize; dims];
            loop {
                let y: Vec<f64> = (0..dims)
                    .map(|k| {
                        if k == face {
                            side * radii[k]
                        } else {
                            radii[k] * (-1.0 + 2.0 * idx[k] as f64 / (samples - 1) as f64)
                        }
                    })
                    .collect();
                let x = frame * DVector::from_column_slice(&y);
                worst = worst.max(integrand(x.as_slice()).norm());
                let mut k = dims;
                let mut done = true;
                while k > 0 {
                    k -= 1;
                    if k == face {
                        continue;
                    }
                    idx[k] += 1;
                    if idx[k] < samples {
                        done = false;
                        break;
                    }
                    idx[k] = 0;
                }
                if done {
                    break;
                }
            }
        }
    }
    worst
}

/// `[B phi](z)` by composite Gauss-Legendre over a box in orthonormal
/// coordinates adapted to `V + V^perp`.
///
/// Unless fixed in the config, the half-widths solve `b R - c R^2 = -L` with
/// `b = sqrt2 nu |Re z|`, `c = nu/2` along `V` and `c = nu` along `V^perp`,
/// `L = ln(1/tol) + 8`. The error estimate compares against panels of twice
/// the width. `DecayViolation` is raised when the integrand on the box faces
/// exceeds `tol` times its peak.
///
/// Both the truncation and the error estimate are relative to the integrand
/// peak, not to the result: when the transform is much smaller than the
/// integrand (high dual frequencies), lower `tol` accordingly.
pub fn bargmann_direct(
    cfg: &TransformConfig,
    phi: impl Fn(&[f64]) -> Complex64,
    z: &[Complex64],
) -> Result<QuadratureEstimate> {
    check_point(cfg, z)?;
    spot_check_likewise(&cfg.space, &phi)?;
    let nu = cfg.space.nu();
    let r = cfg.space.rank();
    let frame_parts = cfg.space.frame();
    let mut columns: Vec<DVector<f64>> = Vec::new();
    for j in 0..r {
        columns.push(frame_parts.orthonormal_lattice().column(j).into_owned());
    }
    for j in 0..cfg.space.complement_dim() {
        columns.push(frame_parts.complement_frame().column(j).into_owned());
    }
    let frame = DMatrix::from_columns(&columns);

    let pre = cfg.prefactor();
    let integrand = |x: &[f64]| {
        let norm_sq: f64 = x.iter().map(|v| v * v).sum();
        let value = phi(x);
        if value == Complex64::new(0.0, 0.0) {
            return value;
        }
        (cfg.classical_exponent(z, x) - nu * norm_sq).exp() * value * pre
    };

    let b = SQRT_2 * nu * z.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    let mut radii: Vec<f64> = (0..cfg.space.dimension())
        .map(|k| match cfg.truncation_box_radius {
            Some(radius) => radius,
            None => envelope_radius(b, if k < r { 0.5 * nu } else { nu }, cfg.tolerance),
        })
        .collect();

    let mut attempts = 0;
    loop {
        let fine = direct_pass(&integrand, &frame, &radii, PANEL_WIDTH);
        if fine.peak == 0.0 {
            return Ok(QuadratureEstimate { value: Complex64::new(0.0, 0.0), error: 0.0 });
        }
        let ratio = boundary_magnitude(&integrand, &frame, &radii) / fine.peak;
        if ratio > cfg.tolerance {
            if cfg.truncation_box_radius.is_none() && attempts < 3 {
                attempts += 1;
                radii.iter_mut().for_each(|r| *r *= 1.25);
                continue;
            }
            return Err(Error::DecayViolation { ratio });
        }
        let coarse = direct_pass(&integrand, &frame, &radii, 2.0 * PANEL_WIDTH);
        return QuadratureEstimate::from_pair(fine.value, coarse.value, cfg.tolerance);
    }
}

/// The theta kernel `A(z; x)`.
pub fn kernel_a(cfg: &TransformConfig, z: &[Complex64], x: &[f64]) -> Result<Complex64> {
    check_point(cfg, z)?;
    check_len(cfg.space.dimension(), x.len())?;
    let nu = cfg.space.nu();
    let frame = cfg.space.frame();
    let tx = frame.lattice_coords(x);
    let (tz, _) = frame.split_complex(z);
    let gram = cfg.space.lattice().gram_matrix();
    let diff = DVector::from_iterator(tx.len(), tx.iter().zip(tz.iter()).map(|(a, b)| Complex64::new(*a, 0.0) - SQRT_2 * b));
    let w = gram.entries().map(|g| Complex64::new(0.0, nu / TAU * g)) * diff;
    let r = cfg.space.rank();
    let theta = cfg.theta.eval(&vec![0.0; r], cfg.space.chi().alpha().as_slice(), w.as_slice())?;
    let value = cfg.prefactor() * cfg.classical_exponent(z, x).exp() * theta;
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("kernel_a"))
    }
}

/// `A(z; x)` from its defining lattice sum
/// `sum_g chi(g) e^{-(nu/2)|g|^2 + nu <sqrt2 z - x, g>}`, truncated to
/// `|m|_inf <= radius`.
pub fn kernel_a_gamma_sum(cfg: &TransformConfig, z: &[Complex64], x: &[f64], radius: u32) -> Result<Complex64> {
    check_point(cfg, z)?;
    check_len(cfg.space.dimension(), x.len())?;
    let nu = cfg.space.nu();
    let lattice = cfg.space.lattice();
    let shift: Vec<Complex64> = z.iter().zip(x).map(|(a, b)| SQRT_2 * a - b).collect();
    let mut acc = KahanSum::new();
    for m in integer_box(cfg.space.rank(), i64::from(radius)) {
        let g = lattice.point(&m);
        let pairing: Complex64 = shift.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
        acc.add(cfg.space.chi().eval(&m) * (-0.5 * nu * g.norm_squared() + nu * pairing).exp());
    }
    Ok(cfg.prefactor() * cfg.classical_exponent(z, x).exp() * acc.value())
}

/// Box radius for [`kernel_a_gamma_sum`] leaving out only terms below
/// `e^{-40}` times the largest one. The exponent is
/// `-(nu/2)|g - b|^2 + (nu/2)|b|^2` with `b = Re(sqrt2 z - x)`, so every `g`
/// within `|b| + sqrt(80/nu)` of the origin must lie in the box.
pub fn kernel_gamma_sum_radius(cfg: &TransformConfig, z: &[Complex64], x: &[f64]) -> Result<u32> {
    check_point(cfg, z)?;
    check_len(cfg.space.dimension(), x.len())?;
    if cfg.space.rank() == 0 {
        return Ok(0);
    }
    let b: f64 = z.iter().zip(x).map(|(a, v)| (SQRT_2 * a.re - v).powi(2)).sum::<f64>().sqrt();
    let reach = b + (80.0 / cfg.space.nu()).sqrt();
    let lambda = crate::linalg::min_eigenvalue(cfg.space.lattice().gram_matrix().entries());
    let radius = (reach / lambda.sqrt()).ceil();
    if radius > f64::from(crate::theta::DEFAULT_MAX_RADIUS) {
        return Err(Error::TruncationFailure { radius: radius as usize, cap: crate::theta::DEFAULT_MAX_RADIUS as usize });
    }
    Ok(radius as u32)
}

/// `[B phi](z) = int_{Lambda} A(z; x) phi(x) e^{-nu |x|^2} dx` over the
/// fundamental domain, by the cell x Gauss-Hermite rule.
pub fn bargmann_theta(
    cfg: &TransformConfig,
    phi: impl Fn(&[f64]) -> Complex64,
    z: &[Complex64],
    quad: &QuadratureSpec,
) -> Result<QuadratureEstimate> {
    check_point(cfg, z)?;
    spot_check_likewise(&cfg.space, &phi)?;
    let nu = cfg.space.nu();
    let frame = cfg.space.frame();
    let integrand = |x: &[f64]| {
        let value = phi(x);
        if value == Complex64::new(0.0, 0.0) {
            return value;
        }
        let x1_sq = frame.v_component(x).norm_squared();
        match kernel_a(cfg, z, x) {
            Ok(a) => a * value * (-nu * x1_sq).exp(),
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    tensor_cell_hermite(frame, cfg.space.domain(), nu, integrand, quad)
}

/// `C = (nu/pi)^{d/4} 2^{r/2} (2 nu)^{|k|/2} e^{-2 pi^2 |gamma* + v_chi|^2 / nu}`,
/// the constant in `B e_{gamma*,k} = C phi_{sqrt2 gamma*,k}`. It equals
/// `||e_{gamma*,k}|| / ||phi_{sqrt2 gamma*,k}||`, so `B` maps the normalized
/// basis onto the normalized basis.
pub fn basis_image_scale(space: &SpaceParams, idx: &DualIndex) -> Result<f64> {
    idx.validate(space)?;
    let nu = space.nu();
    let d = space.dimension() as f64;
    let r = space.rank() as f64;
    let u = space.dual_vector(&idx.gamma_star_coords)? + space.chi().v_chi();
    let ln = 0.25 * d * (nu / PI).ln() + 0.5 * r * std::f64::consts::LN_2 + 0.5 * f64::from(idx.k.total()) * (2.0 * nu).ln()
        - 2.0 * PI * PI * u.norm_squared() / nu;
    Ok(ln.exp())
}

/// `sum_{|coords|_inf <= cut_coords, |k| <= cut_k} phi_n(z) conj(e_n(x)) / (||phi_n|| ||e_n||)`,
/// the expansion of `A(z; x)` over the normalized paired bases.
pub fn bilateral_sum(cfg: &TransformConfig, z: &[Complex64], x: &[f64], cut: (i64, u32)) -> Result<Complex64> {
    check_point(cfg, z)?;
    check_len(cfg.space.dimension(), x.len())?;
    let ks = MultiIndex::up_to_total(cfg.space.complement_dim(), cut.1);
    let mut acc = KahanSum::new();
    for coords in integer_box(cfg.space.rank(), cut.0) {
        for k in &ks {
            let idx = DualIndex::new(coords.clone(), k.clone());
            let e = basis_e_eval(&cfg.space, &idx, x)?;
            let phi = basis_phi_normalized_eval(&cfg.fock, &idx, z)?;
            acc.add(phi * e.conj() / basis_e_norm_sq(&cfg.space, &idx)?.sqrt());
        }
    }
    Ok(acc.value())
}

/// A computable bound on `|[B phi](z)|` given `||phi||`: Cauchy-Schwarz on
/// each lattice term of the localized integral,
/// `(nu/pi)^{3d/4} |e^{(nu/2)<z,z>}| ||phi|| sqrt(J_2) sum_g e^{-(nu/2)|g|^2 + sqrt2 nu Re<z,g>} sqrt(J_1(g))`
/// with `J_1(g) = int_{Lambda_1} |e^{-(nu/2)<x_1 - sqrt2 z_1, x_1 - sqrt2 z_1> - nu <g, x_1>}|^2`
/// (cell quadrature) and `J_2 = (pi/nu)^{(d-r)/2} e^{2 nu |Im z_2|^2}`.
pub fn transform_majorant(cfg: &TransformConfig, phi_norm: f64, z: &[Complex64]) -> Result<f64> {
    check_point(cfg, z)?;
    let nu = cfg.space.nu();
    let r = cfg.space.rank();
    let m = cfg.space.complement_dim();
    let frame = cfg.space.frame();
    let (tz, sz) = frame.split_complex(z);
    let b = frame.lattice_frame();
    let z1: Vec<Complex64> = (0..cfg.space.dimension())
        .map(|i| (0..r).map(|j| tz[j] * b[(i, j)]).sum())
        .collect();
    let im_z2_sq: f64 = sz.iter().map(|c| c.im * c.im).sum();
    let j2 = (PI / nu).powf(0.5 * m as f64) * (2.0 * nu * im_z2_sq).exp();
    let zz = bilinear_c(z, z)?;
    let head = cfg.prefactor() * (0.5 * nu * zz).exp().norm() * phi_norm * j2.sqrt();

    let cell = gauss_legendre_rule(24).mapped(0.0, 1.0);
    let vol = cfg.space.domain().volume_lambda1();
    let mut total = 0.0;
    for mvec in integer_box(r, i64::from(cfg.gamma_sum_radius)) {
        let g = cfg.space.lattice().point(&mvec);
        let gz: f64 = g.iter().zip(z).map(|(a, c)| a * c.re).sum();
        let lead = (-0.5 * nu * g.norm_squared() + SQRT_2 * nu * gz).exp();
        let mut j1 = 0.0;
        for_each_tensor_node(&cell, r, |u, w| {
            let x1 = b * DVector::from_column_slice(u);
            let diff: Vec<Complex64> = x1.iter().zip(&z1).map(|(a, c)| a - SQRT_2 * c).collect();
            let sq: Complex64 = diff.iter().map(|c| c * c).sum();
            let exponent = -0.5 * nu * sq.re - nu * g.dot(&x1);
            j1 += w * (2.0 * exponent).exp();
        });
        total += lead * (j1 * vol).sqrt();
    }
    // Small allowance for the cell quadrature of J_1.
    Ok(head * total * (1.0 + 1e-6))
}
