//! Hermite interpolation on one segment.
//!
//! The profile solver stores values and exact derivatives at nodes, so
//! two-point Hermite polynomials (cubic from value+slope, quintic from
//! value+slope+curvature) reconstruct off-node values with O(h^4) and
//! O(h^6) error.

/// Cubic Hermite on [x0, x1] from endpoint values and first derivatives.
pub fn hermite_cubic(x0: f64, x1: f64, y0: f64, d0: f64, y1: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Quintic Hermite on [x0, x1] from endpoint values, first and second
/// derivatives, via the Newton form with triple nodes.
#[allow(clippy::too_many_arguments)]
pub fn hermite_quintic(
    x0: f64,
    x1: f64,
    y0: f64,
    d0: f64,
    dd0: f64,
    y1: f64,
    d1: f64,
    dd1: f64,
    x: f64,
) -> f64 {
    let h = x1 - x0;
    // divided differences for nodes [x0,x0,x0,x1,x1,x1]
    let f01 = (y1 - y0) / h;
    let c0 = y0;
    let c1 = d0;
    let c2 = 0.5 * dd0;
    let l2 = (f01 - d0) / h; // f[x0,x0,x1]
    let m2 = (d1 - f01) / h; // f[x0,x1,x1]
    let c3 = (l2 - c2) / h; // f[x0,x0,x0,x1]
    let l3 = (m2 - l2) / h; // f[x0,x0,x1,x1]
    let m3 = (0.5 * dd1 - m2) / h; // f[x0,x1,x1,x1]
    let c4 = (l3 - c3) / h; // f[x0,x0,x0,x1,x1]
    let m4 = (m3 - l3) / h; // f[x0,x0,x1,x1,x1]
    let c5 = (m4 - c4) / h; // f[x0,x0,x0,x1,x1,x1]
    let s = x - x0;
    let e = x - x1;
    c0 + s * (c1 + s * (c2 + s * (c3 + e * (c4 + e * c5))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_reproduces_degree_five() {
        let p = |x: f64| 1.0 + x * (2.0 - x * (1.5 - x * (0.25 + x * (0.1 - 0.05 * x))));
        let d = |x: f64| 2.0 - 3.0 * x + 0.75 * x * x + 0.4 * x * x * x - 0.25 * x.powi(4);
        let dd = |x: f64| -3.0 + 1.5 * x + 1.2 * x * x - x.powi(3);
        let (a, b) = (0.3, 1.1);
        for i in 0..=20 {
            let x = a + (b - a) * i as f64 / 20.0;
            let v = hermite_quintic(a, b, p(a), d(a), dd(a), p(b), d(b), dd(b), x);
            assert!((v - p(x)).abs() < 1e-12, "x = {x}: {v} vs {}", p(x));
        }
    }

    #[test]
    fn cubic_error_scales_as_h4() {
        let f = |x: f64| x.sin();
        let df = |x: f64| x.cos();
        let err = |h: f64| {
            let (a, b) = (0.4, 0.4 + h);
            let x = a + 0.37 * h;
            (hermite_cubic(a, b, f(a), df(a), f(b), df(b), x) - f(x)).abs()
        };
        let r = err(0.2) / err(0.1);
        assert!(r > 10.0 && r < 22.0, "ratio {r}");
    }

    #[test]
    fn quintic_error_scales_as_h6() {
        let f = |x: f64| (1.3 * x).tanh();
        let d1 = |x: f64| 1.3 / (1.3 * x).cosh().powi(2);
        let d2 = |x: f64| -2.0 * 1.3 * 1.3 * (1.3 * x).tanh() / (1.3 * x).cosh().powi(2);
        let err = |h: f64| {
            let (a, b) = (0.2, 0.2 + h);
            let x = a + 0.61 * h;
            (hermite_quintic(a, b, f(a), d1(a), d2(a), f(b), d1(b), d2(b), x) - f(x)).abs()
        };
        let r = err(0.4) / err(0.2);
        assert!(r > 40.0 && r < 110.0, "ratio {r}");
    }
}
