//! Centered time-derivative stencils shared by the entropy and quantum
//! residual checks: 4th-order where five points fit, 2nd-order at the two
//! points adjacent to the ends, NaN at the ends themselves (the ends are
//! excluded from every residual maximum).

pub(crate) fn centered_derivative(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![f64::NAN; n];
    if n < 3 {
        return out;
    }
    for i in 1..n - 1 {
        if i >= 2 && i + 2 < n {
            out[i] = (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2])
                / (12.0 * dt);
        } else {
            out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dt);
        }
    }
    out
}
