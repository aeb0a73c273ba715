//! Rank-`r` discrete subgroups of `R^d`, their characters and the induced
//! orthogonal geometry.
//!
//! A lattice is stored through its `d x r` basis matrix `B` (columns are the
//! generators). Everything else is derived from `B`: the Gram matrix
//! `G = B^T B`, the dual basis `B G^{-1}`, the projector onto
//! `V = span(B)` and an orthonormal frame of the complement.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Relative singular-value threshold for linear independence of the basis.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Default tolerance for phase comparisons when validating a character table.
pub const PHASE_TOLERANCE: f64 = 1e-9;

/// The subgroup `Z w_1 + ... + Z w_r` of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    dimension: usize,
    basis: DMatrix<f64>,
}

impl LatticeSpec {
    /// Builds a lattice from its generators, given as rows.
    pub fn new(dimension: usize, generators: &[Vec<f64>]) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if generators.len() > dimension {
            return Err(Error::InvalidInput(format!(
                "rank {} exceeds dimension {}",
                generators.len(),
                dimension
            )));
        }
        let mut basis = DMatrix::zeros(dimension, generators.len());
        for (j, g) in generators.iter().enumerate() {
            check_len(dimension, g.len())?;
            for (i, &v) in g.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidInput("non-finite basis entry".into()));
                }
                basis[(i, j)] = v;
            }
        }
        Self::from_matrix(basis)
    }

    /// Builds a lattice from a `d x r` matrix whose columns are the generators.
    pub fn from_matrix(basis: DMatrix<f64>) -> Result<Self> {
        let dimension = basis.nrows();
        if basis.ncols() > dimension {
            return Err(Error::InvalidInput("rank exceeds dimension".into()));
        }
        if basis.ncols() > 0 {
            let sv = basis.clone().svd(false, false).singular_values;
            let largest = sv.max();
            let smallest = sv.min();
            if !(largest > 0.0) || smallest <= RANK_TOLERANCE * largest {
                return Err(Error::RankDeficient { smallest, largest });
            }
        }
        Ok(Self { dimension, basis })
    }

    /// The trivial subgroup `{0}` of `R^d`.
    pub fn trivial(dimension: usize) -> Self {
        Self { dimension, basis: DMatrix::zeros(dimension, 0) }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Basis matrix, generators as columns.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn generator(&self, j: usize) -> DVector<f64> {
        self.basis.column(j).into_owned()
    }

    /// The lattice point `sum_j m_j w_j`.
    pub fn point(&self, coords: &[i64]) -> DVector<f64> {
        debug_assert_eq!(coords.len(), self.rank());
        let m = DVector::from_iterator(coords.len(), coords.iter().map(|&c| c as f64));
        &self.basis * m
    }

    /// Same generators multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_matrix(&self.basis * factor)
    }

    pub fn gram_matrix(&self) -> GramMatrix {
        GramMatrix::new(self.basis.transpose() * &self.basis)
            .expect("basis validated as full rank at construction")
    }

    /// Dual basis `w*_i` in `V`, returned as the columns of `B G^{-1}`.
    pub fn dual_basis(&self) -> DMatrix<f64> {
        &self.basis * self.gram_matrix().inverse()
    }
}

/// Gram matrix `G_ij = <w_i, w_j>` together with its inverse and determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
    determinant: f64,
}

impl GramMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let r = entries.nrows();
        if r == 0 {
            return Ok(Self { entries, inverse: DMatrix::zeros(0, 0), determinant: 1.0 });
        }
        let chol = entries.clone().cholesky().ok_or(Error::SingularMatrix)?;
        let determinant = chol.l().diagonal().iter().map(|d| d * d).product();
        let inverse = chol.inverse();
        Ok(Self { entries, inverse, determinant })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn determinant(&self) -> f64 {
        self.determinant
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// One entry of a raw character table: `chi(sum m_j w_j)` given either as a
/// phase `p` (meaning `e^{2 pi i p}`) or as a complex value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub coords: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<f64>,
}

impl PhaseEntry {
    fn resolved_phase(&self, tolerance: f64) -> Result<f64> {
        match (self.phase, self.re, self.im) {
            (Some(p), None, None) => Ok(p),
            (None, Some(re), Some(im)) => {
                let modulus = re.hypot(im);
                if (modulus - 1.0).abs() > tolerance {
                    return Err(Error::NotACharacter(format!(
                        "|chi({:?})| = {modulus} is not 1",
                        self.coords
                    )));
                }
                Ok(im.atan2(re) / std::f64::consts::TAU)
            }
            _ => Err(Error::InvalidInput(format!(
                "entry {:?} must give either `phase` or both `re` and `im`",
                self.coords
            ))),
        }
    }
}

/// Distance from `x` to the nearest integer.
fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// A character `chi(sum m_j w_j) = e^{2 pi i alpha . m}` of the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    alpha: DVector<f64>,
    beta: DVector<f64>,
    v_chi: DVector<f64>,
}

impl Character {
    /// Builds the character with `chi(w_j) = e^{2 pi i alpha_j}`.
    ///
    /// Phases are reduced into `[0, 1)`; `beta = G^{-1} alpha` and
    /// `v_chi = sum beta_j w_j` are computed from the reduced phases.
    pub fn from_alpha(lattice: &LatticeSpec, alpha: &[f64]) -> Result<Self> {
        check_len(lattice.rank(), alpha.len())?;
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("non-finite character phase".into()));
        }
        let alpha = DVector::from_iterator(alpha.len(), alpha.iter().map(|a| a.rem_euclid(1.0)));
        let alpha = alpha.map(|a| if a >= 1.0 { 0.0 } else { a });
        let beta = lattice.gram_matrix().inverse() * &alpha;
        let v_chi = lattice.basis() * &beta;
        Ok(Self { alpha, beta, v_chi })
    }

    pub fn trivial(lattice: &LatticeSpec) -> Self {
        Self::from_alpha(lattice, &vec![0.0; lattice.rank()]).expect("zero phases are valid")
    }

    /// Validates a raw table of character values and extracts the phases.
    ///
    /// The table must contain every generator `e_j`. It is rejected when the
    /// character law `chi(a + b) = chi(a) chi(b)` fails for any pair of
    /// entries whose sum is also tabulated, when any value is not unimodular,
    /// or when an entry disagrees with the phases read off the generators.
    pub fn from_phase_table(lattice: &LatticeSpec, table: &[PhaseEntry], tolerance: f64) -> Result<Self> {
        let r = lattice.rank();
        let mut phases = Vec::with_capacity(table.len());
        for entry in table {
            check_len(r, entry.coords.len())?;
            phases.push((entry.coords.clone(), entry.resolved_phase(tolerance)?));
        }
        let lookup = |coords: &[i64]| phases.iter().find(|(c, _)| c.as_slice() == coords).map(|(_, p)| *p);

        if let Some(p0) = lookup(&vec![0; r]) {
            if dist_to_integer(p0) > tolerance {
                return Err(Error::NotACharacter(format!("chi(0) has phase {p0}, expected 0")));
            }
        }
        for (a, pa) in &phases {
            for (b, pb) in &phases {
                let sum: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(ps) = lookup(&sum) {
                    if dist_to_integer(ps - pa - pb) > tolerance {
                        return Err(Error::NotACharacter(format!(
                            "chi({sum:?}) != chi({a:?}) chi({b:?})"
                        )));
                    }
                }
            }
        }

        let mut alpha = vec![0.0; r];
        for (j, slot) in alpha.iter_mut().enumerate() {
            let mut unit = vec![0; r];
            unit[j] = 1;
            *slot = lookup(&unit).ok_or_else(|| {
                Error::InvalidInput(format!("phase table is missing generator {unit:?}"))
            })?;
        }
        for (coords, p) in &phases {
            let predicted: f64 = coords.iter().zip(&alpha).map(|(&m, a)| m as f64 * a).sum();
            if dist_to_integer(predicted - p) > tolerance {
                return Err(Error::NotACharacter(format!(
                    "chi({coords:?}) is inconsistent with the generator phases"
                )));
            }
        }
        Self::from_alpha(lattice, &alpha)
    }

    /// Phases `alpha_j` in `[0, 1)`.
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn v_chi(&self) -> &DVector<f64> {
        &self.v_chi
    }

    pub fn is_trivial(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.0)
    }

    /// `alpha . m` reduced into `[0, 1)`.
    pub fn phase(&self, coords: &[i64]) -> f64 {
        let mut p = 0.0;
        for (&m, a) in coords.iter().zip(self.alpha.iter()) {
            // Reduce term by term so large coordinates do not eat precision.
            p = (p + (m as f64 * a).rem_euclid(1.0)).rem_euclid(1.0);
        }
        p
    }

    pub fn eval(&self, coords: &[i64]) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * self.phase(coords))
    }
}

/// The orthogonal split `R^d = V + V^perp` with coordinates on both sides.
///
/// `V`-coordinates are taken in the lattice basis (`x_1 = B t`),
/// complement coordinates in an orthonormal frame `C` (`x_2 = C s`).
#[derive(Debug, Clone, PartialEq)]
pub struct SplitFrame {
    lattice_frame: DMatrix<f64>,
    gram_inverse: DMatrix<f64>,
    orthonormal_lattice: DMatrix<f64>,
    complement_frame: DMatrix<f64>,
    projector_v: DMatrix<f64>,
}

fn normalize_sign(v: &mut DVector<f64>) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            *v *= -1.0;
        }
    }
}

/// Orthonormalizes `v` against the columns in `frame` (two passes).
fn orthogonalize(v: &mut DVector<f64>, frame: &[DVector<f64>]) {
    for _ in 0..2 {
        for q in frame {
            let c = q.dot(v);
            v.axpy(-c, q, 1.0);
        }
    }
}

impl SplitFrame {
    pub fn new(lattice: &LatticeSpec) -> Self {
        let d = lattice.dimension();
        let r = lattice.rank();
        let b = lattice.basis().clone();
        let gram = lattice.gram_matrix();
        let gram_inverse = gram.inverse().clone();
        let projector_v = &b * &gram_inverse * b.transpose();

        let mut lattice_cols: Vec<DVector<f64>> = Vec::with_capacity(r);
        for j in 0..r {
            let mut v = b.column(j).into_owned();
            orthogonalize(&mut v, &lattice_cols);
            v /= v.norm();
            lattice_cols.push(v);
        }

        // Column-pivoted Gram-Schmidt on (I - P_V): the rank-revealing step
        // picks the standard basis vector with the largest remaining norm.
        let residual = DMatrix::identity(d, d) - &projector_v;
        let mut candidates: Vec<DVector<f64>> = (0..d).map(|i| residual.column(i).into_owned()).collect();
        let mut complement_cols: Vec<DVector<f64>> = Vec::with_capacity(d - r);
        for _ in 0..(d - r) {
            let mut all = lattice_cols.clone();
            all.extend(complement_cols.iter().cloned());
            for c in candidates.iter_mut() {
                orthogonalize(c, &all);
            }
            let (best, _) = candidates
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 + 1e-14 { x } else { acc });
            let mut v = candidates[best].clone();
            v /= v.norm();
            normalize_sign(&mut v);
            complement_cols.push(v);
        }
        let orthonormal_lattice = if r == 0 { DMatrix::zeros(d, 0) } else { DMatrix::from_columns(&lattice_cols) };
        let complement_frame =
            if complement_cols.is_empty() { DMatrix::zeros(d, 0) } else { DMatrix::from_columns(&complement_cols) };

        Self { lattice_frame: b, gram_inverse, orthonormal_lattice, complement_frame, projector_v }
    }

    pub fn dimension(&self) -> usize {
        self.lattice_frame.nrows()
    }

    pub fn rank(&self) -> usize {
        self.lattice_frame.ncols()
    }

    pub fn complement_dim(&self) -> usize {
        self.complement_frame.ncols()
    }

    /// Columns `w_j`.
    pub fn lattice_frame(&self) -> &DMatrix<f64> {
        &self.lattice_frame
    }

    /// Orthonormal frame of `V`, obtained by Gram-Schmidt on the generators.
    pub fn orthonormal_lattice(&self) -> &DMatrix<f64> {
        &self.orthonormal_lattice
    }

    /// Orthonormal frame of `V^perp`.
    pub fn complement_frame(&self) -> &DMatrix<f64> {
        &self.complement_frame
    }

    pub fn projector_v(&self) -> &DMatrix<f64> {
        &self.projector_v
    }

    pub fn gram_inverse(&self) -> &DMatrix<f64> {
        &self.gram_inverse
    }

    /// Coordinates `(t, s)` with `x = B t + C s`.
    pub fn split_point(&self, x: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let x = DVector::from_column_slice(x);
        let t = &self.gram_inverse * (self.lattice_frame.transpose() * &x);
        let s = self.complement_frame.transpose() * &x;
        (t, s)
    }

    /// Lattice-basis coordinates of the `V`-component only.
    pub fn lattice_coords(&self, x: &[f64]) -> DVector<f64> {
        let x = DVector::from_column_slice(x);
        &self.gram_inverse * (self.lattice_frame.transpose() * x)
    }

    /// The `V`-component `x_1` as a vector of `R^d`.
    pub fn v_component(&self, x: &[f64]) -> DVector<f64> {
        &self.projector_v * DVector::from_column_slice(x)
    }

    /// Complex version of [`split_point`](Self::split_point), applied to real
    /// and imaginary parts separately.
    pub fn split_complex(&self, z: &[Complex64]) -> (DVector<Complex64>, DVector<Complex64>) {
        let re: Vec<f64> = z.iter().map(|c| c.re).collect();
        let im: Vec<f64> = z.iter().map(|c| c.im).collect();
        let (t_re, s_re) = self.split_point(&re);
        let (t_im, s_im) = self.split_point(&im);
        let join = |a: DVector<f64>, b: DVector<f64>| a.zip_map(&b, Complex64::new);
        (join(t_re, t_im), join(s_re, s_im))
    }

    /// `x = B t + C s`.
    pub fn reconstruct(&self, t: &DVector<f64>, s: &DVector<f64>) -> DVector<f64> {
        &self.lattice_frame * t + &self.complement_frame * s
    }
}

/// The fundamental domain `{x : t(x) - offset - S s(x) in [0,1)^r}`.
///
/// With zero offset and zero shear this is the half-open basis
/// parallelepiped times `V^perp`. A nonzero shear `S` (an `r x (d-r)` matrix)
/// slides the parallelepiped along the lattice directions as the complement
/// coordinate `s` varies, which is still a fundamental domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalDomain {
    volume_lambda1: f64,
    offset: DVector<f64>,
    shear: DMatrix<f64>,
}

impl FundamentalDomain {
    pub fn canonical(lattice: &LatticeSpec) -> Self {
        let r = lattice.rank();
        Self {
            volume_lambda1: lattice.gram_matrix().determinant().sqrt(),
            offset: DVector::zeros(r),
            shear: DMatrix::zeros(r, lattice.dimension() - r),
        }
    }

    pub fn with_offset(mut self, offset: &[f64]) -> Result<Self> {
        check_len(self.offset.len(), offset.len())?;
        self.offset = DVector::from_column_slice(offset);
        Ok(self)
    }

    pub fn with_shear(mut self, shear: DMatrix<f64>) -> Result<Self> {
        if shear.shape() != self.shear.shape() {
            return Err(Error::InvalidInput(format!(
                "shear must be {:?}, got {:?}",
                self.shear.shape(),
                shear.shape()
            )));
        }
        self.shear = shear;
        Ok(self)
    }

    /// `vol(Lambda_1) = sqrt(det G)`.
    pub fn volume_lambda1(&self) -> f64 {
        self.volume_lambda1
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn shear(&self) -> &DMatrix<f64> {
        &self.shear
    }

    /// Lower corner of the cell (in lattice coordinates) at complement coordinate `s`.
    pub fn cell_origin(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.offset + &self.shear * s
    }

    /// Reduces `x` into this domain: `x = x_folded + sum gamma_j w_j`.
    pub fn fold(&self, frame: &SplitFrame, x: &[f64]) -> (DVector<f64>, Vec<i64>) {
        let (t, s) = frame.split_point(x);
        let origin = self.cell_origin(&s);
        let mut gamma: Vec<i64> = t.iter().zip(origin.iter()).map(|(ti, oi)| (ti - oi).floor() as i64).collect();
        // Guard against t - origin landing exactly on 1 after rounding.
        for (j, g) in gamma.iter_mut().enumerate() {
            let local = t[j] - *g as f64 - origin[j];
            if local >= 1.0 {
                *g += 1;
            } else if local < 0.0 {
                *g -= 1;
            }
        }
        let shift = frame.lattice_frame() * DVector::from_iterator(gamma.len(), gamma.iter().map(|&g| g as f64));
        (DVector::from_column_slice(x) - shift, gamma)
    }
}

/// Folds `x` into the canonical domain of `lattice`.
pub fn fold_to_fundamental(lattice: &LatticeSpec, frame: &SplitFrame, x: &[f64]) -> (DVector<f64>, Vec<i64>) {
    FundamentalDomain::canonical(lattice).fold(frame, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lat(d: usize, rows: &[&[f64]]) -> LatticeSpec {
        LatticeSpec::new(d, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn gram_examples() {
        assert_eq!(lat(2, &[&[1.0, 0.0]]).gram_matrix().entries()[(0, 0)], 1.0);
        assert_eq!(lat(2, &[&[2.0, 0.0]]).gram_matrix().entries()[(0, 0)], 4.0);
        let g = lat(2, &[&[1.0, 1.0], &[1.0, -1.0]]).gram_matrix();
        assert_eq!(g.entries(), &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]));
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let err = LatticeSpec::new(2, &[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert_eq!(err.code(), "RankDeficient");
        assert!(LatticeSpec::new(2, &[vec![0.0, 0.0]]).is_err());
        assert!(LatticeSpec::new(1, &[vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn dual_basis_examples() {
        let d = lat(2, &[&[2.0, 0.0]]).dual_basis();
        assert_abs_diff_eq!(d[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(1, 0)], 0.0, epsilon = 1e-15);
        let d = lat(2, &[&[1.0, 1.0], &[1.0, -1.0]]).dual_basis();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, -0.5]);
        assert!((d - expected).norm() < 1e-14);
        let d = lat(2, &[&[1.0, 0.0]]).dual_basis();
        assert_abs_diff_eq!(d[(0, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn character_examples() {
        let l = lat(2, &[&[2.0, 0.0]]);
        let chi = Character::from_alpha(&l, &[0.5]).unwrap();
        assert_abs_diff_eq!(chi.beta()[0], 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(chi.v_chi()[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(chi.v_chi().dot(&l.generator(0)), 0.5, epsilon = 1e-15);
        assert!((chi.eval(&[1]) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);

        let chi0 = Character::trivial(&l);
        assert_eq!(chi0.v_chi().norm(), 0.0);
        assert_eq!(chi0.eval(&[7]), Complex64::new(1.0, 0.0));

        let l1 = lat(2, &[&[1.0, 0.0]]);
        let chi = Character::from_alpha(&l1, &[1.0 / 3.0]).unwrap();
        assert_abs_diff_eq!(chi.v_chi()[0], 1.0 / 3.0, epsilon = 1e-15);
        assert!((chi.eval(&[3]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(chi.eval(&[0]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn phase_table_validation() {
        let l = lat(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let entry = |c: &[i64], p: f64| PhaseEntry { coords: c.to_vec(), phase: Some(p), re: None, im: None };
        let good = vec![entry(&[1, 0], 0.25), entry(&[0, 1], 0.5), entry(&[1, 1], 0.75), entry(&[2, 0], 1.5)];
        let chi = Character::from_phase_table(&l, &good, PHASE_TOLERANCE).unwrap();
        assert_abs_diff_eq!(chi.alpha()[0], 0.25);
        assert_abs_diff_eq!(chi.alpha()[1], 0.5);

        let bad = vec![entry(&[1, 0], 0.25), entry(&[0, 1], 0.5), entry(&[1, 1], 0.7)];
        assert_eq!(Character::from_phase_table(&l, &bad, PHASE_TOLERANCE).unwrap_err().code(), "NotACharacter");

        let not_unit = vec![
            PhaseEntry { coords: vec![1, 0], phase: None, re: Some(0.5), im: Some(0.0) },
            entry(&[0, 1], 0.0),
        ];
        assert_eq!(Character::from_phase_table(&l, &not_unit, PHASE_TOLERANCE).unwrap_err().code(), "NotACharacter");

        let missing = vec![entry(&[1, 0], 0.25)];
        assert_eq!(Character::from_phase_table(&l, &missing, PHASE_TOLERANCE).unwrap_err().code(), "InvalidInput");
    }

    #[test]
    fn split_examples() {
        let l = lat(2, &[&[1.0, 1.0]]);
        let f = SplitFrame::new(&l);
        let (t, s) = f.split_point(&[1.0, 0.0]);
        assert_abs_diff_eq!(t[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s[0].abs(), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        // Sign convention: first nonzero entry of the complement column is positive.
        assert!(f.complement_frame()[(0, 0)] > 0.0);
        let back = f.reconstruct(&t, &s);
        assert_abs_diff_eq!(back[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(back[1], 0.0, epsilon = 1e-15);

        let (_, s) = f.split_point(&[2.0, 2.0]);
        assert_abs_diff_eq!(s[0], 0.0, epsilon = 1e-15);
        let (t, _) = f.split_point(&[1.0, -1.0]);
        assert_abs_diff_eq!(t[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_ranks() {
        let l0 = LatticeSpec::trivial(3);
        let f0 = SplitFrame::new(&l0);
        assert_eq!(f0.complement_dim(), 3);
        assert_eq!(FundamentalDomain::canonical(&l0).volume_lambda1(), 1.0);
        let (t, s) = f0.split_point(&[1.0, 2.0, 3.0]);
        assert_eq!(t.len(), 0);
        assert_eq!(s.len(), 3);

        let l2 = lat(2, &[&[1.0, 0.5], &[0.0, 2.0]]);
        let f2 = SplitFrame::new(&l2);
        assert_eq!(f2.complement_dim(), 0);
        assert_abs_diff_eq!(FundamentalDomain::canonical(&l2).volume_lambda1(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn fold_examples() {
        let l = lat(2, &[&[1.0, 0.0]]);
        let f = SplitFrame::new(&l);
        let (xf, g) = fold_to_fundamental(&l, &f, &[2.25, 5.0]);
        assert_eq!(g, vec![2]);
        assert_abs_diff_eq!(xf[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(xf[1], 5.0, epsilon = 1e-15);

        let (xf, g) = fold_to_fundamental(&l, &f, &[-0.5, 0.0]);
        assert_eq!(g, vec![-1]);
        assert_abs_diff_eq!(f.split_point(xf.as_slice()).0[0], 0.5, epsilon = 1e-15);

        let (_, g) = fold_to_fundamental(&l, &f, &[0.3, -1.0]);
        assert_eq!(g, vec![0]);
    }

    #[test]
    fn sheared_fold_lands_in_sheared_cell() {
        let l = lat(2, &[&[1.0, 0.0]]);
        let f = SplitFrame::new(&l);
        let dom = FundamentalDomain::canonical(&l)
            .with_offset(&[0.3])
            .unwrap()
            .with_shear(DMatrix::from_element(1, 1, 0.4))
            .unwrap();
        let (xf, g) = dom.fold(&f, &[3.1, 2.0]);
        let (t, s) = f.split_point(xf.as_slice());
        let local = t[0] - dom.cell_origin(&s)[0];
        assert!((0.0..1.0).contains(&local));
        assert_eq!(g, vec![2]);
    }
}
