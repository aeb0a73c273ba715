//! The theta Bargmann-Fock space on `C^d` for the lattice `Gamma / sqrt 2`:
//! holomorphic `f` with `f(z + g) = chi(g) e^{nu H(z + g/2, g)} f(z)`,
//! square integrable against `e^{-nu H(z,z)}` on a fundamental domain
//! `cell x V x C^{d-r}` (real cell, imaginary `V`-directions, complement).

use std::f64::consts::{PI, SQRT_2, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::hermite::{check_nu, MultiIndex};
use crate::lattice::{Character, LatticeSpec, SplitFrame};
use crate::likewise::{DualIndex, SpaceParams};
use crate::linalg::KahanSum;
use crate::quadrature::{for_each_tensor_node, gauss_hermite_rule, gauss_legendre_rule, QuadratureEstimate, QuadratureSpec};

/// `<z, w> = sum z_j w_j`, no conjugation.
pub fn bilinear_c(z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    check_len(z.len(), w.len())?;
    Ok(z.iter().zip(w).map(|(a, b)| a * b).sum())
}

/// `H(z, w) = <z, conj(w)>`.
pub fn hermitian_h(z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    check_len(z.len(), w.len())?;
    Ok(z.iter().zip(w).map(|(a, b)| a * b.conj()).sum())
}

fn real_to_complex(x: &DVector<f64>) -> Vec<Complex64> {
    x.iter().map(|v| Complex64::new(*v, 0.0)).collect()
}

/// Parameters of the Fock space: `nu`, the lattice `Gamma~`, its character
/// and the dual basis used to index `Gamma~*`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockParams {
    nu: f64,
    lattice: LatticeSpec,
    chi: Character,
    frame: SplitFrame,
    dual_basis: DMatrix<f64>,
    volume: f64,
}

impl FockParams {
    /// The Fock space paired with `space`: `Gamma~ = Gamma / sqrt 2`, the same
    /// phases `alpha` (so `v~ = sqrt 2 v_chi`), and `Gamma~* = sqrt 2 Gamma*`
    /// taken from the dual basis of `Gamma`.
    pub fn from_space(space: &SpaceParams) -> Result<Self> {
        let lattice = space.lattice().scaled(1.0 / SQRT_2)?;
        let chi = Character::from_alpha(&lattice, space.chi().alpha().as_slice())?;
        let dual_basis = space.lattice().dual_basis() * SQRT_2;
        Ok(Self::assemble(space.nu(), lattice, chi, dual_basis))
    }

    /// Fock space whose lattice is `lattice` itself.
    pub fn over_lattice(nu: f64, lattice: LatticeSpec, chi: Character) -> Result<Self> {
        check_nu(nu)?;
        check_len(lattice.rank(), chi.alpha().len())?;
        let dual_basis = lattice.dual_basis();
        Ok(Self::assemble(nu, lattice, chi, dual_basis))
    }

    fn assemble(nu: f64, lattice: LatticeSpec, chi: Character, dual_basis: DMatrix<f64>) -> Self {
        let frame = SplitFrame::new(&lattice);
        let volume = lattice.gram_matrix().determinant().sqrt();
        Self { nu, lattice, chi, frame, dual_basis, volume }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn chi(&self) -> &Character {
        &self.chi
    }

    pub fn frame(&self) -> &SplitFrame {
        &self.frame
    }

    pub fn dual_basis(&self) -> &DMatrix<f64> {
        &self.dual_basis
    }

    /// Volume of the real cell of this space's own lattice.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn dimension(&self) -> usize {
        self.lattice.dimension()
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn complement_dim(&self) -> usize {
        self.dimension() - self.rank()
    }

    pub fn dual_vector(&self, coords: &[i64]) -> Result<DVector<f64>> {
        check_len(self.rank(), coords.len())?;
        Ok(&self.dual_basis * DVector::from_iterator(coords.len(), coords.iter().map(|&c| c as f64)))
    }

    /// `gamma* + v_chi` for the index coordinates.
    pub fn shifted_dual(&self, coords: &[i64]) -> Result<DVector<f64>> {
        Ok(self.dual_vector(coords)? + self.chi.v_chi())
    }

    fn check_index(&self, idx: &DualIndex) -> Result<()> {
        check_len(self.rank(), idx.gamma_star_coords.len())?;
        check_len(self.complement_dim(), idx.k.len())
    }
}

/// Exponent and monomial factor of `phi_{gamma*,k}(z)`.
fn phi_parts(params: &FockParams, idx: &DualIndex, z: &[Complex64]) -> Result<(Complex64, Complex64)> {
    params.check_index(idx)?;
    check_len(params.dimension(), z.len())?;
    let (t, s) = params.frame.split_complex(z);
    let gram = params.lattice.gram_matrix();
    let z1z1 = t.dot(&(gram.entries().map(|g| Complex64::new(g, 0.0)) * &t));
    let u = params.shifted_dual(&idx.gamma_star_coords)?;
    let z1 = params.lattice.basis().map(|b| Complex64::new(b, 0.0)) * &t;
    let pairing: Complex64 = z1.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
    let monomial: Complex64 = idx.k.entries().iter().zip(s.iter()).map(|(&k, v)| v.powu(k)).product();
    Ok((0.5 * params.nu * z1z1 + Complex64::new(0.0, TAU) * pairing, monomial))
}

fn finite(value: Complex64, what: &'static str) -> Result<Complex64> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(what))
    }
}

/// `phi_{gamma*,k}(z) = exp((nu/2)<z_1,z_1> + 2 pi i <z_1, gamma* + v_chi>) z_2^k`,
/// with `z_2` in complement-frame coordinates.
pub fn basis_phi_eval(params: &FockParams, idx: &DualIndex, z: &[Complex64]) -> Result<Complex64> {
    let (exponent, monomial) = phi_parts(params, idx, z)?;
    finite(exponent.exp() * monomial, "basis_phi_eval")
}

/// `ln ||phi_{gamma*,k}||^2`, with
/// `||phi_{gamma*,k}||^2 = vol (pi/nu)^{d - r/2} 2^{-r/2} k! nu^{-|k|} e^{(2 pi^2/nu)|gamma* + v_chi|^2}`
/// and `vol` the cell volume of this space's lattice.
pub fn basis_phi_ln_norm_sq(params: &FockParams, idx: &DualIndex) -> Result<f64> {
    params.check_index(idx)?;
    let nu = params.nu;
    let d = params.dimension() as f64;
    let r = params.rank() as f64;
    let u = params.shifted_dual(&idx.gamma_star_coords)?;
    Ok(params.volume.ln() + (d - 0.5 * r) * (PI / nu).ln() - 0.5 * r * std::f64::consts::LN_2 + idx.k.ln_factorial()
        - f64::from(idx.k.total()) * nu.ln()
        + 2.0 * PI * PI / nu * u.norm_squared())
}

pub fn basis_phi_norm_sq(params: &FockParams, idx: &DualIndex) -> Result<f64> {
    let value = basis_phi_ln_norm_sq(params, idx)?.exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("basis_phi_norm_sq"))
    }
}

/// `phi_{gamma*,k}(z) / ||phi_{gamma*,k}||`, combined in log space so that
/// neither factor has to be representable on its own.
pub fn basis_phi_normalized_eval(params: &FockParams, idx: &DualIndex, z: &[Complex64]) -> Result<Complex64> {
    let (exponent, monomial) = phi_parts(params, idx, z)?;
    let ln_norm = 0.5 * basis_phi_ln_norm_sq(params, idx)?;
    finite((exponent - ln_norm).exp() * monomial, "basis_phi_normalized_eval")
}

/// A Fock basis element as a plain evaluator; failures surface as NaN.
pub fn phi_fn<'a>(params: &'a FockParams, idx: &'a DualIndex) -> impl Fn(&[Complex64]) -> Complex64 + 'a {
    move |z| basis_phi_eval(params, idx, z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// `chi(g) e^{nu H(z + g/2, g)}` for the lattice point with coordinates `gamma_coords`.
pub fn fock_automorphy_factor(params: &FockParams, z: &[Complex64], gamma_coords: &[i64]) -> Result<Complex64> {
    check_len(params.dimension(), z.len())?;
    check_len(params.rank(), gamma_coords.len())?;
    let g = real_to_complex(&params.lattice.point(gamma_coords));
    let mid: Vec<Complex64> = z.iter().zip(&g).map(|(a, b)| a + 0.5 * b).collect();
    Ok(params.chi.eval(gamma_coords) * (params.nu * hermitian_h(&mid, &g)?).exp())
}

/// `|f(z+g) - chi(g) e^{nu H(z+g/2, g)} f(z)| / (1 + |f(z)|)`.
pub fn fock_functional_eq_residual(
    params: &FockParams,
    f: impl Fn(&[Complex64]) -> Complex64,
    z: &[Complex64],
    gamma_tilde_coords: &[i64],
) -> Result<f64> {
    let factor = fock_automorphy_factor(params, z, gamma_tilde_coords)?;
    let g = params.lattice.point(gamma_tilde_coords);
    let shifted: Vec<Complex64> = z.iter().zip(g.iter()).map(|(a, b)| a + b).collect();
    let fz = f(z);
    Ok((f(&shifted) - factor * fz).norm() / (1.0 + fz.norm()))
}

/// Largest finite-difference Cauchy-Riemann defect
/// `|df/dx_j + i df/dy_j| / 2` over the coordinates, relative to `1 + |f(z)|`.
/// Derivatives are centred differences at `step` and `step/2` combined by
/// one Richardson step (fourth order).
pub fn cauchy_riemann_residual(f: impl Fn(&[Complex64]) -> Complex64, z: &[Complex64], step: f64) -> f64 {
    let fz = f(z);
    let mut worst: f64 = 0.0;
    let mut probe = z.to_vec();
    for j in 0..z.len() {
        let mut centred = |delta: Complex64| {
            probe[j] = z[j] + delta;
            let plus = f(&probe);
            probe[j] = z[j] - delta;
            let minus = f(&probe);
            probe[j] = z[j];
            (plus - minus) / (2.0 * delta.norm())
        };
        let mut diff = |unit: Complex64| {
            let coarse = centred(unit * step);
            let fine = centred(unit * (0.5 * step));
            (4.0 * fine - coarse) / 3.0
        };
        let dx = diff(Complex64::new(1.0, 0.0));
        let dy = diff(Complex64::new(0.0, 1.0));
        worst = worst.max(0.5 * (dx + Complex64::i() * dy).norm());
    }
    worst / (1.0 + fz.norm())
}

/// Centre of the Gaussian `y_1`-profile of `phi_a conj(phi_b) e^{-nu H(z,z)}`:
/// `-pi (u_a + u_b) / (2 nu)` with `u = gamma* + v_chi`.
pub fn pair_center(params: &FockParams, a: &DualIndex, b: &DualIndex) -> Result<DVector<f64>> {
    let ua = params.shifted_dual(&a.gamma_star_coords)?;
    let ub = params.shifted_dual(&b.gamma_star_coords)?;
    Ok((ua + ub) * (-PI / (2.0 * params.nu)))
}

fn fock_quadrature_once(
    params: &FockParams,
    integrand: &dyn Fn(&[Complex64]) -> Complex64,
    center: &DVector<f64>,
    spec: &QuadratureSpec,
) -> Complex64 {
    let r = params.rank();
    let m = params.complement_dim();
    let nu = params.nu;
    let cell = gauss_legendre_rule(spec.cell_nodes_per_dim).mapped(0.0, 1.0);
    let herm = gauss_hermite_rule(spec.hermite_nodes_per_dim);
    let b = params.frame.lattice_frame();
    let q = params.frame.orthonormal_lattice();
    let c = params.frame.complement_frame();
    let y_scale = 1.0 / (2.0 * nu).sqrt();
    let z2_scale = 1.0 / nu.sqrt();
    let mut acc = KahanSum::new();
    let mut z = vec![Complex64::new(0.0, 0.0); params.dimension()];
    for_each_tensor_node(&herm, 2 * m, |pq, w2| {
        let p = DVector::from_iterator(m, pq[..m].iter().map(|v| v * z2_scale));
        let qv = DVector::from_iterator(m, pq[m..].iter().map(|v| v * z2_scale));
        let z2_re = c * &p;
        let z2_im = c * &qv;
        for_each_tensor_node(&herm, r, |a, w1| {
            let a_vec = DVector::from_iterator(r, a.iter().map(|v| v * y_scale));
            let y1 = center + q * &a_vec;
            // Undo the Gauss-Hermite weight e^{-|a|^2} = e^{-2 nu |y1 - center|^2}.
            let a_sq: f64 = a.iter().map(|v| v * v).sum();
            for_each_tensor_node(&cell, r, |u, wc| {
                let x1 = b * DVector::from_column_slice(u);
                for i in 0..z.len() {
                    z[i] = Complex64::new(x1[i] + z2_re[i], y1[i] + z2_im[i]);
                }
                // e^{-nu |z_2|^2} is supplied by the complement rules.
                let weight_exp = -nu * (x1.norm_squared() + y1.norm_squared()) + a_sq;
                acc.add(integrand(&z) * weight_exp.exp() * (wc * w1 * w2));
            });
        });
    });
    acc.value() * params.volume * y_scale.powi(r as i32) * z2_scale.powi(2 * m as i32)
}

/// `int f(z) conj(g(z)) e^{-nu H(z,z)}` over `cell x V x C^{d-r}`.
///
/// The cell uses Gauss-Legendre in lattice coordinates. The imaginary
/// `V`-directions use Gauss-Hermite for `e^{-2 nu |y_1 - center|^2}`; for a
/// pair of basis elements the right centre is [`pair_center`], and `None`
/// means the origin. The complement uses Gauss-Hermite in real and imaginary
/// parts.
pub fn fock_inner_product_quadrature(
    params: &FockParams,
    f: impl Fn(&[Complex64]) -> Complex64,
    g: impl Fn(&[Complex64]) -> Complex64,
    quad: &QuadratureSpec,
    center: Option<&DVector<f64>>,
) -> Result<QuadratureEstimate> {
    quad.validate()?;
    let d = params.dimension();
    let center = match center {
        Some(c) => {
            check_len(d, c.len())?;
            params.frame.v_component(c.as_slice())
        }
        None => DVector::zeros(d),
    };
    let integrand = |z: &[Complex64]| f(z) * g(z).conj();
    let fine = fock_quadrature_once(params, &integrand, &center, quad);
    let coarse = fock_quadrature_once(params, &integrand, &center, &quad.halved());
    QuadratureEstimate::from_pair(fine, coarse, quad.tolerance)
}

/// Multi-indices of the Fock basis matching `MultiIndex::up_to_total`.
pub fn fock_indices(params: &FockParams, max_coord: i64, max_total: u32) -> Vec<DualIndex> {
    let ks = MultiIndex::up_to_total(params.complement_dim(), max_total);
    let mut out = Vec::new();
    for coords in crate::likewise::integer_box(params.rank(), max_coord) {
        for k in &ks {
            out.push(DualIndex::new(coords.clone(), k.clone()));
        }
    }
    out
}
