//! JSON input documents.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "basis": [[1.0, 0.0]],
//!   "alpha": [0.25],
//!   "nu": 6.283185307179586,
//!   "points": [[0.1, -0.3]],
//!   "complex_points": [[[0.1, 0.2], [0.0, -0.1]]],
//!   "indices": [{"gamma_star_coords": [0], "k": [1]}]
//! }
//! ```
//!
//! `basis` lists the generators as rows. The character is given by `alpha`
//! (phases mod 1) or by a raw `phase_table`, never both; with neither it is
//! trivial. Complex numbers are `[re, im]` pairs. Optional fields:
//! `domain_offset`, `coefficients` (a coefficient table) and `theta`
//! (`omega_re`, `omega_im`, optional `alpha`, `beta`) for direct theta
//! evaluation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::lattice::{Character, FundamentalDomain, LatticeSpec, PhaseEntry, PHASE_TOLERANCE};
use crate::likewise::{CoefficientTable, DualIndex, SpaceParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaDocument {
    pub omega_re: Vec<Vec<f64>>,
    pub omega_im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
}

impl ThetaDocument {
    pub fn omega(&self) -> Result<DMatrix<Complex64>> {
        let r = self.omega_re.len();
        check_len(r, self.omega_im.len())?;
        let mut m = DMatrix::zeros(r, r);
        for i in 0..r {
            check_len(r, self.omega_re[i].len())?;
            check_len(r, self.omega_im[i].len())?;
            for j in 0..r {
                m[(i, j)] = Complex64::new(self.omega_re[i][j], self.omega_im[i][j]);
            }
        }
        Ok(m)
    }

    pub fn alpha(&self) -> Vec<f64> {
        self.alpha.clone().unwrap_or_else(|| vec![0.0; self.omega_re.len()])
    }

    pub fn beta(&self) -> Vec<f64> {
        self.beta.clone().unwrap_or_else(|| vec![0.0; self.omega_re.len()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub dimension: usize,
    #[serde(default)]
    pub basis: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_table: Option<Vec<PhaseEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_offset: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub complex_points: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indices: Vec<DualIndex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaDocument>,
}

impl SpecDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("spec document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        if self.basis.is_empty() {
            if self.dimension == 0 {
                return Err(Error::InvalidInput("dimension must be positive".into()));
            }
            return Ok(LatticeSpec::trivial(self.dimension));
        }
        LatticeSpec::new(self.dimension, &self.basis)
    }

    /// The character; a raw phase table goes through the character check.
    pub fn character(&self, lattice: &LatticeSpec) -> Result<Character> {
        match (&self.alpha, &self.phase_table) {
            (Some(_), Some(_)) => Err(Error::InvalidInput("give either alpha or phase_table, not both".into())),
            (Some(alpha), None) => Character::from_alpha(lattice, alpha),
            (None, Some(table)) => Character::from_phase_table(lattice, table, PHASE_TOLERANCE),
            (None, None) => Ok(Character::trivial(lattice)),
        }
    }

    pub fn space(&self) -> Result<SpaceParams> {
        let nu = self.nu.ok_or_else(|| Error::InvalidInput("field nu is required".into()))?;
        let lattice = self.lattice()?;
        let chi = self.character(&lattice)?;
        let domain = match &self.domain_offset {
            Some(offset) => Some(FundamentalDomain::canonical(&lattice).with_offset(offset)?),
            None => None,
        };
        let space = SpaceParams::new(nu, lattice, chi)?;
        match domain {
            Some(d) => space.with_domain(d),
            None => Ok(space),
        }
    }

    pub fn real_points(&self) -> Result<Vec<Vec<f64>>> {
        for p in &self.points {
            check_len(self.dimension, p.len())?;
        }
        Ok(self.points.clone())
    }

    /// Complex points, each of length `expected`.
    pub fn complex_points(&self, expected: usize) -> Result<Vec<Vec<Complex64>>> {
        self.complex_points
            .iter()
            .map(|p| {
                check_len(expected, p.len())?;
                Ok(p.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_document() {
        let doc = SpecDocument::from_json(r#"{"dimension": 2, "basis": [[1.0, 0.0]], "alpha": [0.25], "nu": 1.0}"#).unwrap();
        let space = doc.space().unwrap();
        assert_eq!(space.rank(), 1);
        assert_eq!(space.chi().alpha()[0], 0.25);
    }

    #[test]
    fn rejects_bad_documents() {
        let dependent = SpecDocument::from_json(r#"{"dimension": 2, "basis": [[1.0, 0.0], [2.0, 0.0]], "nu": 1.0}"#).unwrap();
        assert_eq!(dependent.space().unwrap_err().code(), "RankDeficient");
        let not_char = SpecDocument::from_json(
            r#"{"dimension": 1, "basis": [[1.0]], "nu": 1.0,
                "phase_table": [{"coords": [1], "phase": 0.1}, {"coords": [2], "phase": 0.3}]}"#,
        )
        .unwrap();
        assert_eq!(not_char.space().unwrap_err().code(), "NotACharacter");
        assert_eq!(SpecDocument::from_json(r#"{"dimension": 1, "bogus": 1}"#).unwrap_err().code(), "InvalidInput");
        let both = SpecDocument::from_json(
            r#"{"dimension": 1, "basis": [[1.0]], "nu": 1.0, "alpha": [0.1], "phase_table": []}"#,
        )
        .unwrap();
        assert_eq!(both.space().unwrap_err().code(), "InvalidInput");
        let no_nu = SpecDocument::from_json(r#"{"dimension": 1}"#).unwrap();
        assert_eq!(no_nu.space().unwrap_err().code(), "InvalidInput");
    }

    #[test]
    fn round_trips() {
        let text = r#"{"dimension": 2, "basis": [[1.0, 0.0]], "nu": 2.0,
            "complex_points": [[[0.1, 0.2], [0.0, -0.1]]],
            "indices": [{"gamma_star_coords": [0], "k": [1]}],
            "theta": {"omega_re": [[0.0]], "omega_im": [[1.0]]}}"#;
        let doc = SpecDocument::from_json(text).unwrap();
        assert_eq!(SpecDocument::from_json(&doc.to_json()).unwrap(), doc);
        assert_eq!(doc.complex_points(2).unwrap()[0][0], Complex64::new(0.1, 0.2));
        assert!(doc.complex_points(3).is_err());
        assert_eq!(doc.theta.unwrap().omega().unwrap()[(0, 0)], Complex64::new(0.0, 1.0));
    }
}
