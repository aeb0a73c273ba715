//! The space of likewise functions on `R^d`: square integrable (against
//! `e^{-nu |x|^2}` on a fundamental domain) solutions of
//! `f(x + g) = chi(g) e^{nu <x + g/2, g>} f(x)` for `g` in the lattice.

use std::f64::consts::TAU;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::hermite::{check_nu, hermite_norm_sq, hermite_nu_eval, MultiIndex};
use crate::lattice::{Character, FundamentalDomain, LatticeSpec, SplitFrame};
use crate::linalg::KahanSum;
use crate::quadrature::{
    for_each_tensor_node, gauss_hermite_rule, gauss_legendre_rule, tensor_cell_hermite, QuadratureEstimate,
    QuadratureSpec,
};

/// Everything that determines the space: `nu`, the lattice, the character
/// and the chosen fundamental domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceParams {
    nu: f64,
    lattice: LatticeSpec,
    chi: Character,
    frame: SplitFrame,
    domain: FundamentalDomain,
}

impl SpaceParams {
    /// Space over the canonical fundamental domain.
    pub fn new(nu: f64, lattice: LatticeSpec, chi: Character) -> Result<Self> {
        check_nu(nu)?;
        check_len(lattice.rank(), chi.alpha().len())?;
        let frame = SplitFrame::new(&lattice);
        let domain = FundamentalDomain::canonical(&lattice);
        Ok(Self { nu, lattice, chi, frame, domain })
    }

    pub fn with_domain(mut self, domain: FundamentalDomain) -> Result<Self> {
        check_len(self.lattice.rank(), domain.offset().len())?;
        self.domain = domain;
        Ok(self)
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

    pub fn domain(&self) -> &FundamentalDomain {
        &self.domain
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

    /// `gamma* = sum_i c_i w*_i` in the dual basis.
    pub fn dual_vector(&self, coords: &[i64]) -> Result<DVector<f64>> {
        check_len(self.rank(), coords.len())?;
        let c = DVector::from_iterator(coords.len(), coords.iter().map(|&x| x as f64));
        Ok(self.lattice.dual_basis() * c)
    }
}

/// Index `(gamma*, k)` of a basis element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DualIndex {
    pub gamma_star_coords: Vec<i64>,
    pub k: MultiIndex,
}

impl DualIndex {
    pub fn new(gamma_star_coords: Vec<i64>, k: impl Into<MultiIndex>) -> Self {
        Self { gamma_star_coords, k: k.into() }
    }

    pub fn validate(&self, params: &SpaceParams) -> Result<()> {
        check_len(params.rank(), self.gamma_star_coords.len())?;
        check_len(params.complement_dim(), self.k.len())?;
        // Dual vectors are rebuilt from the dual basis; check they really pair
        // integrally with the generators.
        let g = params.dual_vector(&self.gamma_star_coords)?;
        for j in 0..params.rank() {
            let pairing = g.dot(&params.lattice.generator(j));
            if (pairing - pairing.round()).abs() > 1e-10 * pairing.abs().max(1.0) {
                return Err(Error::InvalidInput(format!("dual vector pairs to {pairing} with generator {j}")));
            }
        }
        Ok(())
    }

    /// All indices with `|coords|_inf <= max_coord` and `|k| <= max_total`,
    /// coordinates outermost.
    pub fn enumerate(params: &SpaceParams, max_coord: i64, max_total: u32) -> Vec<DualIndex> {
        let ks = MultiIndex::up_to_total(params.complement_dim(), max_total);
        let mut out = Vec::new();
        for coords in integer_box(params.rank(), max_coord) {
            for k in &ks {
                out.push(DualIndex { gamma_star_coords: coords.clone(), k: k.clone() });
            }
        }
        out
    }
}

/// Integer vectors of length `r` with sup norm at most `radius`, in
/// lexicographic order.
pub(crate) fn integer_box(r: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-radius; r];
    loop {
        out.push(cur.clone());
        let mut k = r;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] <= radius {
                break;
            }
            cur[k] = -radius;
        }
    }
}

struct Split {
    t: DVector<f64>,
    s: DVector<f64>,
    x1_sq: f64,
}

fn split(params: &SpaceParams, x: &[f64]) -> Result<Split> {
    check_len(params.dimension(), x.len())?;
    let (t, s) = params.frame.split_point(x);
    let x1_sq = params.frame.v_component(x).norm_squared();
    Ok(Split { t, s, x1_sq })
}

/// `psi_v(x) = exp((nu/2)|x_1|^2 + 2 pi i <x_1, v_chi>)`.
pub fn ground_psi_eval(params: &SpaceParams, x: &[f64]) -> Result<Complex64> {
    let p = split(params, x)?;
    // <x_1, v_chi> = alpha . t since <w_j, v_chi> = alpha_j.
    let phase = params.chi.alpha().dot(&p.t);
    let value = Complex64::from_polar((0.5 * params.nu * p.x1_sq).exp(), TAU * phase);
    finite(value, "ground_psi_eval")
}

fn finite(value: Complex64, what: &'static str) -> Result<Complex64> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(what))
    }
}

/// `e_{gamma*,k}(x) = exp((nu/2)|x_1|^2 + 2 pi i <v_chi + gamma*, x_1>) H^nu_k(x_2)`,
/// with `x_2` in complement-frame coordinates.
pub fn basis_e_eval(params: &SpaceParams, idx: &DualIndex, x: &[f64]) -> Result<Complex64> {
    check_len(params.rank(), idx.gamma_star_coords.len())?;
    let p = split(params, x)?;
    let hermite = hermite_nu_eval(params.nu, &idx.k, p.s.as_slice())?;
    // <gamma*, B t> = c . t for gamma* = B G^{-1} c.
    let phase: f64 = params
        .chi
        .alpha()
        .iter()
        .zip(&idx.gamma_star_coords)
        .zip(p.t.iter())
        .map(|((a, &c), t)| (a + c as f64) * t)
        .sum();
    let value = Complex64::from_polar((0.5 * params.nu * p.x1_sq).exp(), TAU * phase) * hermite;
    finite(value, "basis_e_eval")
}

/// `||e_{gamma*,k}||^2 = vol(Lambda_1) (pi/nu)^{(d-r)/2} 2^{|k|} k!`.
pub fn basis_e_norm_sq(params: &SpaceParams, idx: &DualIndex) -> Result<f64> {
    check_len(params.complement_dim(), idx.k.len())?;
    Ok(params.domain.volume_lambda1() * hermite_norm_sq(params.nu, &idx.k)?)
}

/// A basis element as a plain evaluator, for use as a quadrature integrand.
/// Evaluation failures surface as NaN, which the integrators report as overflow.
pub fn basis_fn<'a>(params: &'a SpaceParams, idx: &'a DualIndex) -> impl Fn(&[f64]) -> Complex64 + 'a {
    move |x| basis_e_eval(params, idx, x).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// `<f, g> = int_{Lambda} f(x) conj(g(x)) e^{-nu |x|^2} dx` over the
/// fundamental domain of `params`.
pub fn inner_product_quadrature(
    params: &SpaceParams,
    f: impl Fn(&[f64]) -> Complex64,
    g: impl Fn(&[f64]) -> Complex64,
    quad: &QuadratureSpec,
) -> Result<QuadratureEstimate> {
    let frame = &params.frame;
    let nu = params.nu;
    // The Hermite rule supplies e^{-nu |x_2|^2}; the V-part of the weight stays in the integrand.
    let integrand = |x: &[f64]| {
        let x1_sq = frame.v_component(x).norm_squared();
        f(x) * g(x).conj() * (-nu * x1_sq).exp()
    };
    tensor_cell_hermite(frame, &params.domain, nu, integrand, quad)
}

/// `<f, f>` by quadrature.
pub fn norm_sq_quadrature(
    params: &SpaceParams,
    f: impl Fn(&[f64]) -> Complex64,
    quad: &QuadratureSpec,
) -> Result<QuadratureEstimate> {
    let est = inner_product_quadrature(params, &f, &f, quad)?;
    Ok(QuadratureEstimate { value: Complex64::new(est.value.re, 0.0), error: est.error })
}

fn lattice_point(params: &SpaceParams, coords: &[i64]) -> Result<DVector<f64>> {
    check_len(params.rank(), coords.len())?;
    Ok(params.lattice.point(coords))
}

/// `chi(g) e^{nu <x + g/2, g>}`.
pub fn automorphy_factor(params: &SpaceParams, x: &[f64], gamma_coords: &[i64]) -> Result<Complex64> {
    check_len(params.dimension(), x.len())?;
    let g = lattice_point(params, gamma_coords)?;
    let xv = DVector::from_column_slice(x);
    let exponent = params.nu * (&xv + &g * 0.5).dot(&g);
    Ok(params.chi.eval(gamma_coords) * exponent.exp())
}

/// `|f(x+g) - chi(g) e^{nu <x+g/2, g>} f(x)| / (1 + |f(x)|)`.
pub fn functional_eq_residual(
    params: &SpaceParams,
    f: impl Fn(&[f64]) -> Complex64,
    x: &[f64],
    gamma_coords: &[i64],
) -> Result<f64> {
    let factor = automorphy_factor(params, x, gamma_coords)?;
    let g = lattice_point(params, gamma_coords)?;
    let shifted: Vec<f64> = x.iter().zip(g.iter()).map(|(a, b)| a + b).collect();
    let fx = f(x);
    Ok((f(&shifted) - factor * fx).norm() / (1.0 + fx.norm()))
}

/// Truncated Poincare series
/// `sum_{|m|_inf <= R} conj(chi(g)) e^{-nu <x + g/2, g>} psi(x + g)`, `g = B m`.
pub fn poincare_series(
    params: &SpaceParams,
    psi: impl Fn(&[f64]) -> Complex64,
    x: &[f64],
    truncation_radius: u32,
) -> Result<Complex64> {
    check_len(params.dimension(), x.len())?;
    let xv = DVector::from_column_slice(x);
    let mut acc = KahanSum::new();
    for m in integer_box(params.rank(), i64::from(truncation_radius)) {
        let g = params.lattice.point(&m);
        let shifted = &xv + &g;
        let value = psi(shifted.as_slice());
        if value == Complex64::new(0.0, 0.0) {
            continue;
        }
        let weight = (-params.nu * (&xv + &g * 0.5).dot(&g)).exp();
        acc.add(params.chi.eval(&m).conj() * weight * value);
    }
    Ok(acc.value())
}

/// Smooth bump supported in the open cell: in cell coordinates
/// `u = t - origin(s)` it is `prod_j b((u_j - 1/2) / half_width)` times
/// `e^{-|s|^2}`, with `b(y) = exp(-1/(1-y^2))` on `|y| < 1`.
pub fn cell_bump<'a>(params: &'a SpaceParams, half_width: f64) -> impl Fn(&[f64]) -> Complex64 + 'a {
    move |x| {
        let (t, s) = params.frame.split_point(x);
        let origin = params.domain.cell_origin(&s);
        let mut value = (-s.norm_squared()).exp();
        for j in 0..t.len() {
            let y = (t[j] - origin[j] - 0.5) / half_width;
            if y.abs() >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            value *= (-1.0 / (1.0 - y * y)).exp();
        }
        Complex64::new(value, 0.0)
    }
}

/// Sampling check that `psi` vanishes outside the open cell: probes points
/// whose cell coordinates lie in a band `[-1/2, margin] U [1 - margin, 3/2]`
/// along some lattice direction. Returns false on any nonzero value.
pub fn support_inside_cell(params: &SpaceParams, psi: impl Fn(&[f64]) -> Complex64, margin: f64) -> bool {
    let r = params.rank();
    if r == 0 {
        return true;
    }
    let m = params.complement_dim();
    let steps = 9;
    let grid: Vec<f64> = (0..=steps).map(|i| -0.5 + 2.0 * i as f64 / steps as f64).collect();
    let s_samples: Vec<DVector<f64>> = if m == 0 {
        vec![DVector::zeros(0)]
    } else {
        [-1.0, 0.0, 0.7].iter().map(|v| DVector::from_element(m, *v)).collect()
    };
    for s in &s_samples {
        let origin = params.domain.cell_origin(s);
        for dir in 0..r {
            for band in [-0.5, -0.1, 0.0, margin * 0.5, 1.0 - margin * 0.5, 1.0, 1.2, 1.5] {
                for &other in &grid {
                    let mut u = DVector::from_element(r, other.clamp(0.0, 1.0));
                    u[dir] = band;
                    let t = &origin + u;
                    let x = params.frame.reconstruct(&t, s);
                    if psi(x.as_slice()) != Complex64::new(0.0, 0.0) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Cell average against `e^{-2 pi i <x_1, gamma*>}` at fixed complement
/// coordinates `s`, with an `n`-point Gauss-Legendre rule per direction.
fn fourier_once(params: &SpaceParams, f: &dyn Fn(&[f64]) -> Complex64, coords: &[i64], s: &DVector<f64>, n: usize) -> Complex64 {
    let r = params.rank();
    let cell = gauss_legendre_rule(n).mapped(0.0, 1.0);
    let origin = params.domain.cell_origin(s);
    let b = params.frame.lattice_frame();
    let c = params.frame.complement_frame();
    let x2 = c * s;
    let alpha = params.chi.alpha();
    let gram = params.lattice.gram_matrix();
    let mut acc = KahanSum::new();
    for_each_tensor_node(&cell, r, |u, w| {
        let t = DVector::from_iterator(r, u.iter().zip(origin.iter()).map(|(a, o)| a + o));
        let x = b * &t + &x2;
        let x1_sq = t.dot(&(gram.entries() * &t));
        let phase: f64 = (0..r).map(|j| (alpha[j] + coords[j] as f64) * t[j]).sum();
        let weight = Complex64::from_polar((-0.5 * params.nu * x1_sq).exp(), -TAU * phase);
        acc.add(f(x.as_slice()) * weight * w);
    });
    // The Jacobian vol(Lambda_1) cancels the 1/vol normalization.
    acc.value()
}

/// Fourier coefficient
/// `a_{gamma*}(x_2) = vol^{-1} int_{Lambda_1} e^{-(nu/2)|x_1|^2 - 2 pi i <v_chi, x_1>} f(x_1 + x_2) e^{-2 pi i <x_1, gamma*>} dx_1`,
/// with `x_2` given in complement-frame coordinates.
pub fn fourier_coefficient(
    params: &SpaceParams,
    f: impl Fn(&[f64]) -> Complex64,
    gamma_star_coords: &[i64],
    x2: &[f64],
    quad: &QuadratureSpec,
) -> Result<QuadratureEstimate> {
    quad.validate()?;
    check_len(params.rank(), gamma_star_coords.len())?;
    check_len(params.complement_dim(), x2.len())?;
    let s = DVector::from_column_slice(x2);
    let n = quad.cell_nodes_per_dim;
    let fine = fourier_once(params, &f, gamma_star_coords, &s, n);
    let coarse = fourier_once(params, &f, gamma_star_coords, &s, n.div_ceil(2));
    QuadratureEstimate::from_pair(fine, coarse, quad.tolerance)
}

fn projection_once(params: &SpaceParams, f: &dyn Fn(&[f64]) -> Complex64, idx: &DualIndex, spec: &QuadratureSpec) -> Result<Complex64> {
    let m = params.complement_dim();
    let herm = gauss_hermite_rule(spec.hermite_nodes_per_dim);
    let inv_sqrt_nu = 1.0 / params.nu.sqrt();
    let mut acc = KahanSum::new();
    let mut failure = None;
    for_each_tensor_node(&herm, m, |xi, w| {
        let s = DVector::from_iterator(m, xi.iter().map(|v| v * inv_sqrt_nu));
        let a = fourier_once(params, f, &idx.gamma_star_coords, &s, spec.cell_nodes_per_dim);
        match hermite_nu_eval(params.nu, &idx.k, s.as_slice()) {
            Ok(h) => acc.add(a * (h * w)),
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(acc.value() * inv_sqrt_nu.powi(m as i32) / hermite_norm_sq(params.nu, &idx.k)?)
}

/// Expansion coefficient `a_{gamma*,k}`: Hermite projection of the Fourier
/// coefficient `a_{gamma*}(x_2)` against `H^nu_k` in `L^2(e^{-nu|x_2|^2})`.
pub fn expansion_coefficient(
    params: &SpaceParams,
    f: impl Fn(&[f64]) -> Complex64,
    idx: &DualIndex,
    quad: &QuadratureSpec,
) -> Result<QuadratureEstimate> {
    quad.validate()?;
    idx.validate(params)?;
    let fine = projection_once(params, &f, idx, quad)?;
    let coarse = projection_once(params, &f, idx, &quad.halved())?;
    QuadratureEstimate::from_pair(fine, coarse, quad.tolerance)
}

/// One coefficient of a finite expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub gamma_star_coords: Vec<i64>,
    pub k: MultiIndex,
    pub re: f64,
    pub im: f64,
}

impl CoefficientEntry {
    pub fn index(&self) -> DualIndex {
        DualIndex { gamma_star_coords: self.gamma_star_coords.clone(), k: self.k.clone() }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A finite combination `sum a_{gamma*,k} e_{gamma*,k}`; serialized as a JSON
/// array of entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientTable {
    pub entries: Vec<CoefficientEntry>,
}

impl CoefficientTable {
    pub fn new(entries: Vec<CoefficientEntry>) -> Self {
        Self { entries }
    }

    pub fn push(&mut self, idx: DualIndex, value: Complex64) {
        self.entries.push(CoefficientEntry { gamma_star_coords: idx.gamma_star_coords, k: idx.k, re: value.re, im: value.im });
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("coefficient table: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficient table serializes")
    }

    pub fn validate(&self, params: &SpaceParams) -> Result<()> {
        self.entries.iter().try_for_each(|e| e.index().validate(params))
    }

    pub fn eval(&self, params: &SpaceParams, x: &[f64]) -> Result<Complex64> {
        let mut acc = KahanSum::new();
        for e in &self.entries {
            acc.add(e.value() * basis_e_eval(params, &e.index(), x)?);
        }
        Ok(acc.value())
    }

    /// `||f||^2` by Parseval; assumes distinct indices.
    pub fn norm_sq(&self, params: &SpaceParams) -> Result<f64> {
        self.entries.iter().map(|e| Ok(basis_e_norm_sq(params, &e.index())? * e.value().norm_sqr())).sum()
    }

    pub fn as_fn<'a>(&'a self, params: &'a SpaceParams) -> impl Fn(&[f64]) -> Complex64 + 'a {
        move |x| self.eval(params, x).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
}
