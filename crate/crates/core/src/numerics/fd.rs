use nalgebra::{DMatrix, DVector};

use super::ScalarField;
use crate::error::{Error, Result};

fn scaled(step: f64, xi: f64) -> f64 {
    step * xi.abs().max(1.0)
}

/// Central-difference gradient; component `i` uses `±step·max(1,|x_i|)`.
///
/// Non-finite values propagate as NaN. See [`fd_gradient`] for the checked
/// variant.
pub fn central_gradient<F>(f: F, x: &[f64], step: f64) -> DVector<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut y = x.to_vec();
    DVector::from_fn(x.len(), |i, _| {
        let h = scaled(step, x[i]);
        let (hi, lo) = (x[i] + h, x[i] - h);
        y[i] = hi;
        let fp = f(&y);
        y[i] = lo;
        let fm = f(&y);
        y[i] = x[i];
        (fp - fm) / (hi - lo)
    })
}

/// Checked central-difference gradient of a field.
pub fn fd_gradient(field: &dyn ScalarField, x: &[f64], step: f64) -> Result<DVector<f64>> {
    let g = central_gradient(|y| field.eval(y), x, step);
    match g.iter().position(|v| !v.is_finite()) {
        Some(component) => Err(Error::NonFinite { component }),
        None => Ok(g),
    }
}

/// Symmetric second-difference Hessian built from function values.
pub fn central_hessian<F>(f: F, x: &[f64], step: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let m = x.len();
    let hs: Vec<f64> = x.iter().map(|&xi| scaled(step, xi)).collect();
    let mut y = x.to_vec();
    let f0 = f(x);
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        y[i] = x[i] + hs[i];
        let fp = f(&y);
        y[i] = x[i] - hs[i];
        let fm = f(&y);
        y[i] = x[i];
        out[(i, i)] = (fp - 2.0 * f0 + fm) / (hs[i] * hs[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                y[i] = x[i] + si * hs[i];
                y[j] = x[j] + sj * hs[j];
                let v = f(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0)
                + corner(-1.0, -1.0))
                / (4.0 * hs[i] * hs[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Central-difference Jacobian of a vector map; column `j` is `∂F/∂x_j`.
pub fn fd_jacobian<F>(f: F, x: &[f64], step: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let mut y = x.to_vec();
    let mut cols = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = scaled(step, x[j]);
        let (hi, lo) = (x[j] + h, x[j] - h);
        y[j] = hi;
        let fp = f(&y);
        y[j] = lo;
        let fm = f(&y);
        y[j] = x[j];
        cols.push((fp - fm) / (hi - lo));
    }
    if cols.is_empty() {
        return DMatrix::zeros(0, 0);
    }
    DMatrix::from_columns(&cols)
}
