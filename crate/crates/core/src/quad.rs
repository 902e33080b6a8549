//! Quadrature on uniform grids.
//!
//! Everything is composite trapezoid with a deterministic left-to-right
//! summation order, which keeps artifacts bit-reproducible. On a periodic
//! cell the trapezoid rule degenerates to the rectangle rule and is
//! spectrally exact for resolved trigonometric polynomials.

/// Composite trapezoid over samples with spacing `h` (endpoints included).
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * values[0];
    for v in &values[1..n - 1] {
        acc += v;
    }
    acc += 0.5 * values[n - 1];
    acc * h
}

/// Integral over one periodic cell from samples at the left node of each
/// subinterval (the right endpoint is the wrapped copy of the first).
pub fn periodic_integral(values: &[f64], h: f64) -> f64 {
    let mut acc = 0.0;
    for v in values {
        acc += v;
    }
    acc * h
}

/// Running trapezoid antiderivative starting at 0 on the first node.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Fourth-order running antiderivative: each subinterval is integrated
/// through the cubic interpolant of its four nearest nodes.
pub fn cumulative_fourth_order(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    if n < 4 {
        return cumulative_trapezoid(values, h);
    }
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let mut acc = 0.0;
    let c = h / 24.0;
    for j in 0..n - 1 {
        acc += if j == 0 {
            c * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3])
        } else if j == n - 2 {
            c * (values[n - 4] - 5.0 * values[n - 3] + 19.0 * values[n - 2] + 9.0 * values[n - 1])
        } else {
            c * (-values[j - 1] + 13.0 * values[j] + 13.0 * values[j + 1] - values[j + 2])
        };
        out.push(acc);
    }
    out
}
