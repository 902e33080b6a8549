//! Adaptive Dormand-Prince 5(4) stepping for small autonomous systems.
//!
//! Used by the profile shooting, where the independent variable runs
//! backward (negative step sizes are allowed). Every accepted node keeps
//! the state together with the right-hand side so callers can build
//! Hermite interpolants without re-evaluating.

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// One accepted node of the adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct OdeNode<const N: usize> {
    pub x: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Cap on |h|; keeps nodes dense enough for high-order resampling.
    pub max_step: f64,
    pub max_nodes: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_step: 0.05,
            max_nodes: 2_000_000,
        }
    }
}

/// Integrate dy/dx = f(y) from `x0` in the direction of `h0` until `stop`
/// returns true (checked on accepted nodes) or the node budget runs out.
pub fn integrate_adaptive<const N: usize>(
    f: impl Fn(&[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    h0: f64,
    opts: &Dopri5Options,
    mut stop: impl FnMut(f64, &[f64; N]) -> bool,
) -> Vec<OdeNode<N>> {
    let dir = h0.signum();
    let mut h = h0.abs().min(opts.max_step) * dir;
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(&y);
    let mut nodes = vec![OdeNode { x, y, dy: k1 }];

    let axpy = |y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]| -> [f64; N] {
        let mut out = *y;
        for (c, k) in terms {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
        out
    };

    while nodes.len() < opts.max_nodes {
        let y2 = axpy(&y, h, &[(A21, &k1)]);
        let k2 = f(&y2);
        let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = f(&y3);
        let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = f(&y4);
        let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = f(&y5);
        let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = f(&y6);
        let ynew = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(&ynew);
        let ylow = axpy(
            &y,
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );

        let mut err = 0.0f64;
        for i in 0..N {
            let sc = opts.atol + opts.rtol * ynew[i].abs().max(y[i].abs());
            let e = (ynew[i] - ylow[i]) / sc;
            err += e * e;
        }
        let err = (err / N as f64).sqrt();

        if err <= 1.0 {
            x += h;
            y = ynew;
            k1 = k7; // FSAL
            nodes.push(OdeNode { x, y, dy: k1 });
            if stop(x, &y) {
                break;
            }
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h = (h.abs() * fac).min(opts.max_step).max(1e-14) * dir;
    }
    nodes
}
