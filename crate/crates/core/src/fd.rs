//! Finite-difference derivatives on uniform grids.
//!
//! Stencil weights come from Fornberg's recurrence, so any derivative
//! order / accuracy / offset combination shares one code path. Interior
//! nodes use centered stencils; nodes near the ends use one-sided or
//! skewed stencils of the same formal accuracy.

use crate::error::{CoreError, Result};

/// Weights for the m-th derivative at `x0` from the nodes `xs` (Fornberg 1988).
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(n > m, "need more than m+1 nodes for the m-th derivative");
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

fn centered_width(order: usize, accuracy: usize) -> usize {
    2 * ((order + 1) / 2) - 1 + accuracy
}

/// Differentiate `values` sampled with spacing `h`.
///
/// `order` in 1..=3, `accuracy` 2 or 4. Interior nodes get the centered
/// stencil of the requested accuracy; the first and last few nodes use
/// `order + accuracy`-point one-sided stencils, which keep the same
/// formal order.
pub fn fd_derivative(values: &[f64], h: f64, order: usize, accuracy: usize) -> Result<Vec<f64>> {
    assert!((1..=4).contains(&order), "derivative order out of range");
    assert!(accuracy == 2 || accuracy == 4, "accuracy must be 2 or 4");
    let n = values.len();
    let w_int = centered_width(order, accuracy);
    let w_bnd = order + accuracy;
    let need = w_int.max(w_bnd);
    if n < need {
        return Err(CoreError::StencilWidth { nodes: n, width: need });
    }
    let half = w_int / 2;
    let scale = h.powi(order as i32);

    // integer-offset weights, scaled once
    let offsets: Vec<f64> = (0..w_int).map(|i| i as f64 - half as f64).collect();
    let interior: Vec<f64> = fd_weights(0.0, &offsets, order).iter().map(|w| w / scale).collect();
    let bnd_offsets: Vec<f64> = (0..w_bnd).map(|i| i as f64).collect();
    let boundary: Vec<Vec<f64>> = (0..half)
        .map(|i| {
            fd_weights(i as f64, &bnd_offsets, order)
                .iter()
                .map(|w| w / scale)
                .collect()
        })
        .collect();

    let mut out = vec![0.0; n];
    for i in 0..half {
        out[i] = boundary[i].iter().zip(&values[0..w_bnd]).map(|(w, v)| w * v).sum();
    }
    for i in half..n - half {
        out[i] = interior
            .iter()
            .zip(&values[i - half..i - half + w_int])
            .map(|(w, v)| w * v)
            .sum();
    }
    // mirror the one-sided stencils for the right end
    for i in 0..half {
        let row = &boundary[i];
        let mut acc = 0.0;
        for (j, w) in row.iter().enumerate() {
            acc += w * values[n - 1 - j];
        }
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        out[n - 1 - i] = sign * acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> (Vec<f64>, f64) {
        let h = (b - a) / n as f64;
        ((0..=n).map(|i| a + i as f64 * h).collect(), h)
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn sine_first_derivative_second_order() {
        let (xs, h) = grid(-std::f64::consts::PI, std::f64::consts::PI, 200);
        let f: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let exact: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let d = fd_derivative(&f, h, 1, 2).unwrap();
        assert!(max_err(&d, &exact) < 5.0 * h * h);
    }

    #[test]
    fn constant_field_all_orders() {
        let (_, h) = grid(0.0, 1.0, 64);
        let f = vec![3.25; 65];
        for order in 1..=3 {
            for acc in [2, 4] {
                let d = fd_derivative(&f, h, order, acc).unwrap();
                assert!(d.iter().all(|v| v.abs() < 1e-10), "order {order} acc {acc}");
            }
        }
    }

    #[test]
    fn richardson_order_matches_accuracy() {
        // e^x on a coarse/fine grid pair: error ratio ~ 2^accuracy
        for (order, acc) in [(1, 2), (1, 4), (2, 2), (2, 4), (3, 2), (3, 4)] {
            let err = |n: usize| -> f64 {
                let (xs, h) = grid(-1.0, 1.0, n);
                let f: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
                let d = fd_derivative(&f, h, order, acc).unwrap();
                max_err(&d, &f)
            };
            let ratio = err(64) / err(128);
            let expect = (2.0f64).powi(acc as i32);
            assert!(
                ratio > 0.7 * expect && ratio < 1.4 * expect,
                "order {order} acc {acc}: ratio {ratio} vs {expect}"
            );
        }
    }

    #[test]
    fn composed_first_matches_second() {
        let (xs, h) = grid(-2.0, 2.0, 256);
        let f: Vec<f64> = xs.iter().map(|x| (0.7 * x).sin() + 0.1 * x * x).collect();
        for acc in [2usize, 4] {
            let d1 = fd_derivative(&f, h, 1, acc).unwrap();
            let d11 = fd_derivative(&d1, h, 1, acc).unwrap();
            let d2 = fd_derivative(&f, h, 2, acc).unwrap();
            let err = max_err(&d11, &d2);
            assert!(err < 40.0 * h.powi(acc as i32), "acc {acc}: {err}");
        }
    }

    #[test]
    fn too_few_nodes_is_an_error() {
        let f = vec![1.0; 4];
        assert!(matches!(
            fd_derivative(&f, 0.1, 3, 4),
            Err(CoreError::StencilWidth { .. })
        ));
    }
}
