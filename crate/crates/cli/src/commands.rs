//! Evaluation commands. Each returns CSV bytes.

use likewise_theta::bargmann::{bargmann_theta, TransformConfig};
use likewise_theta::document::SpecDocument;
use likewise_theta::likewise::{basis_e_eval, basis_e_norm_sq, basis_fn, inner_product_quadrature, DualIndex, SpaceParams};
use likewise_theta::quadrature::QuadratureSpec;
use likewise_theta::theta::ThetaEvaluator;
use likewise_theta::Error;
use num_complex::Complex64;

use crate::CliError;

fn missing(what: &str) -> CliError {
    Error::InvalidInput(format!("the document has no {what}")).into()
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError { code: "IoError", message: e.to_string() })
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

fn complex_header(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).flat_map(|i| [format!("{prefix}{i}_re"), format!("{prefix}{i}_im")]).collect()
}

fn complex_cells(z: &[Complex64]) -> Vec<String> {
    z.iter().flat_map(|c| [fmt(c.re), fmt(c.im)]).collect()
}

fn joined<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn indices_or_default(doc: &SpecDocument, space: &SpaceParams) -> Vec<DualIndex> {
    if doc.indices.is_empty() {
        DualIndex::enumerate(space, 1, 2)
    } else {
        doc.indices.clone()
    }
}

/// `Theta_{alpha,beta}(z | Omega)` at every complex point.
pub fn eval_theta(doc: &SpecDocument, tol: f64) -> Result<Vec<u8>, CliError> {
    let theta = doc.theta.as_ref().ok_or_else(|| missing("theta block"))?;
    let omega = theta.omega()?;
    let r = omega.nrows();
    let eval = ThetaEvaluator::new(omega, tol)?;
    let points = doc.complex_points(r)?;
    if points.is_empty() {
        return Err(missing("complex_points"));
    }
    let mut w = writer();
    let mut header = complex_header("z", r);
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header)?;
    for z in points {
        let v = eval.eval(&theta.alpha(), &theta.beta(), &z)?;
        let mut row = complex_cells(&z);
        row.extend([fmt(v.re), fmt(v.im)]);
        w.write_record(&row)?;
    }
    finish(w)
}

/// `e_{gamma*,k}(x)` for every index and real point.
pub fn eval_basis(doc: &SpecDocument) -> Result<Vec<u8>, CliError> {
    let space = doc.space()?;
    let points = doc.real_points()?;
    if points.is_empty() {
        return Err(missing("points"));
    }
    let d = space.dimension();
    let mut w = writer();
    let mut header = vec!["gamma_star".to_string(), "k".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header)?;
    for idx in indices_or_default(doc, &space) {
        for x in &points {
            let v = basis_e_eval(&space, &idx, x)?;
            let mut row = vec![joined(&idx.gamma_star_coords), joined(idx.k.entries())];
            row.extend(x.iter().map(|v| fmt(*v)));
            row.extend([fmt(v.re), fmt(v.im)]);
            w.write_record(&row)?;
        }
    }
    finish(w)
}

/// Transform of the document's coefficient table at every complex point,
/// through the theta kernel on the fundamental domain.
pub fn bargmann(doc: &SpecDocument, tol: f64) -> Result<Vec<u8>, CliError> {
    let space = doc.space()?;
    let table = doc.coefficients.as_ref().ok_or_else(|| missing("coefficients"))?;
    table.validate(&space)?;
    let d = space.dimension();
    let points = doc.complex_points(d)?;
    if points.is_empty() {
        return Err(missing("complex_points"));
    }
    let cfg = TransformConfig::new(space, tol)?;
    let quad = QuadratureSpec::new(48, 48, tol)?;
    let f = table.as_fn(cfg.space());
    let mut w = writer();
    let mut header = complex_header("z", d);
    header.extend(["re".to_string(), "im".to_string(), "error_estimate".to_string()]);
    w.write_record(&header)?;
    for z in points {
        let v = bargmann_theta(&cfg, &f, &z, &quad)?;
        let mut row = complex_cells(&z);
        row.extend([fmt(v.value.re), fmt(v.value.im), fmt(v.error)]);
        w.write_record(&row)?;
    }
    finish(w)
}

/// Quadrature Gram matrix of the basis against the closed-form norms.
pub fn gram_table(doc: &SpecDocument, tol: f64) -> Result<Vec<u8>, CliError> {
    let space = doc.space()?;
    let quad = QuadratureSpec::new(48, 48, tol)?;
    let indices = indices_or_default(doc, &space);
    let mut w = writer();
    w.write_record([
        "row_gamma_star",
        "row_k",
        "col_gamma_star",
        "col_k",
        "numeric_re",
        "numeric_im",
        "analytic",
        "error_estimate",
    ])?;
    for a in &indices {
        for b in &indices {
            let v = inner_product_quadrature(&space, basis_fn(&space, a), basis_fn(&space, b), &quad)?;
            let analytic = if a == b { basis_e_norm_sq(&space, a)? } else { 0.0 };
            w.write_record([
                joined(&a.gamma_star_coords),
                joined(a.k.entries()),
                joined(&b.gamma_star_coords),
                joined(b.k.entries()),
                fmt(v.value.re),
                fmt(v.value.im),
                fmt(analytic),
                fmt(v.error),
            ])?;
        }
    }
    finish(w)
}
