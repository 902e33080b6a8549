//! Traveling-wave profile construction and its rate constants.
//!
//! The profile solves the once-integrated equation
//!
//! ```text
//! mu phi'' = gamma phi' + s (phi - u_l) - (f(phi) - f(u_l)),
//! ```
//!
//! obtained by integrating the third-order traveling-wave equation from
//! the left state (all derivatives vanish there). The fixed point
//! (u_r, 0) of the phase plane is a saddle, so the heteroclinic orbit is
//! traced by seeding on its stable eigendirection and integrating
//! backward: seeding errors transverse to the orbit decay in reverse
//! time, which removes the shooting search entirely.
//!
//! Tables carry phi and derivatives through fourth order; outside the
//! integrated span the profile is continued by its linearized tail,
//! matched at the data edge, whose relative error is of the order of the
//! squared seed offset.

use crate::error::{CoreError, Result};
use crate::fd::fd_derivative;
use crate::flux::ShockSetup;
use crate::grid::LineGrid;
use crate::interp::{hermite_cubic, hermite_quintic};
use crate::rk::{integrate_adaptive, Dopri5Options, OdeNode};

#[derive(Debug, Clone, Copy)]
struct TailBranch {
    edge: f64,
    state: f64,
    amp: f64,
    rate: f64,
}

impl TailBranch {
    #[inline]
    fn eval(&self, m: usize, xi: f64) -> f64 {
        let e = self.amp * (self.rate * (xi - self.edge)).exp();
        self.state * if m == 0 { 1.0 } else { 0.0 } + self.rate.powi(m as i32) * e
    }
}

/// Linearized decay rates at the two far-field states.
///
/// Returns (slow unstable rate at u_l, stable rate at u_r); the first is
/// positive, the second negative.
pub fn linear_rates(setup: &ShockSetup) -> Result<(f64, f64)> {
    let fl = setup.flux.d1(setup.u_l);
    let fr = setup.flux.d1(setup.u_r);
    if setup.mu == 0.0 {
        return Ok(((fl - setup.s) / setup.gamma, (fr - setup.s) / setup.gamma));
    }
    let disc_l = setup.gamma * setup.gamma + 4.0 * setup.mu * (setup.s - fl);
    if disc_l < 0.0 {
        return Err(CoreError::ExistenceCondition { discriminant: disc_l });
    }
    let disc_r = setup.gamma * setup.gamma + 4.0 * setup.mu * (setup.s - fr);
    let lam_l = (setup.gamma - disc_l.sqrt()) / (2.0 * setup.mu);
    let lam_r = (setup.gamma - disc_r.sqrt()) / (2.0 * setup.mu);
    Ok((lam_l, lam_r))
}

pub struct ProfileOptions {
    pub half_width: f64,
    /// Interval count of the uniform table.
    pub n: usize,
    /// Offset of the seed from u_r and the stop gap below u_l, relative
    /// to the jump. Defaults to 1e-8.
    pub eps_seed: Option<f64>,
    /// Where the normalization phi = (u_l + u_r)/2 is pinned.
    pub anchor_offset: f64,
    pub rtol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            half_width: 25.0,
            n: 4096,
            eps_seed: None,
            anchor_offset: 0.0,
            rtol: 1e-12,
        }
    }
}

/// Tabulated profile with derivatives, tail rates and normalization.
pub struct ProfileTable {
    pub setup: ShockSetup,
    pub grid: LineGrid,
    /// phi[m][j]: m-th derivative at node j, m = 0..=4.
    pub phi: Vec<Vec<f64>>,
    pub sigma0: f64,
    pub lambda_left_slow: f64,
    pub lambda_right_stable: f64,
    pub anchor: f64,
    /// Span actually covered by the backward integration.
    pub data_span: (f64, f64),
    /// Max-norm residual of the once-integrated equation, measured with
    /// independent finite differences of the tabulated phi.
    pub max_residual: f64,
    tail_left: TailBranch,
    tail_right: TailBranch,
    j_left: usize,
    j_right: usize,
}

fn w_term(setup: &ShockSetup, phi: f64) -> f64 {
    setup.s * (phi - setup.u_l) - (setup.flux.eval(phi) - setup.flux.eval(setup.u_l))
}

fn w_prime(setup: &ShockSetup, phi: f64) -> f64 {
    setup.s - setup.flux.d1(phi)
}

/// Solve the traveling-wave problem by backward shooting from the saddle.
pub fn solve_profile(setup: &ShockSetup, opts: &ProfileOptions) -> Result<ProfileTable> {
    let existence = setup.check_profile_existence();
    if !existence.pass {
        return Err(CoreError::ExistenceCondition {
            discriminant: existence.discriminant,
        });
    }
    let (lam_l, lam_r) = linear_rates(setup)?;
    let sigma0 = lam_r.abs().min(lam_l);
    let needed = 20.0 / sigma0;
    if opts.half_width < needed {
        return Err(CoreError::DomainTooSmall {
            half_width: opts.half_width,
            needed,
        });
    }
    let jump = setup.jump();
    let delta = opts.eps_seed.unwrap_or(1e-8) * jump;
    let mid = 0.5 * (setup.u_l + setup.u_r);

    // trace the orbit, then resample
    let (xs, states) = if setup.mu == 0.0 {
        shoot_first_order(setup, delta, opts)?
    } else {
        shoot_second_order(setup, lam_r, delta, opts)?
    };

    // locate the anchor crossing phi = mid and re-index (phi decreases
    // along increasing xi)
    let k = states
        .iter()
        .position(|st| st[0] < mid)
        .ok_or_else(|| CoreError::NonMonotone("orbit never crosses the midpoint".into()))?;
    if k == 0 {
        return Err(CoreError::NonMonotone("orbit starts below the midpoint".into()));
    }
    let xi_mid = anchor_newton(setup, &xs, &states, k - 1, mid);
    let shift = opts.anchor_offset - xi_mid;
    let xs: Vec<f64> = xs.iter().map(|x| x + shift).collect();

    let grid = LineGrid::new(opts.half_width, opts.n)?;
    let data_span = (xs[0], *xs.last().unwrap());

    // table nodes covered by the integrated data
    let j_left = (0..=grid.n)
        .find(|&j| grid.node(j) >= data_span.0)
        .ok_or_else(|| CoreError::InvalidGrid("no table node inside the data span".into()))?;
    let j_right = (0..=grid.n)
        .rev()
        .find(|&j| grid.node(j) <= data_span.1)
        .ok_or_else(|| CoreError::InvalidGrid("no table node inside the data span".into()))?;

    let mut phi0 = vec![0.0; grid.n + 1];
    let mut phi1 = vec![0.0; grid.n + 1];
    for j in j_left..=j_right {
        let (p, dp) = resample(setup, &xs, &states, grid.node(j));
        phi0[j] = p;
        phi1[j] = dp;
    }

    let tail_left = TailBranch {
        edge: grid.node(j_left),
        state: setup.u_l,
        amp: phi0[j_left] - setup.u_l,
        rate: lam_l,
    };
    let tail_right = TailBranch {
        edge: grid.node(j_right),
        state: setup.u_r,
        amp: phi0[j_right] - setup.u_r,
        rate: lam_r,
    };
    for j in 0..j_left {
        phi0[j] = tail_left.eval(0, grid.node(j));
        phi1[j] = tail_left.eval(1, grid.node(j));
    }
    for j in j_right + 1..=grid.n {
        phi0[j] = tail_right.eval(0, grid.node(j));
        phi1[j] = tail_right.eval(1, grid.node(j));
    }

    // close derivatives through the equation itself
    if setup.mu == 0.0 {
        for j in 0..=grid.n {
            phi1[j] = -w_term(setup, phi0[j]) / setup.gamma;
        }
    }
    let n_nodes = grid.n + 1;
    let mut phi2 = vec![0.0; n_nodes];
    let mut phi3 = vec![0.0; n_nodes];
    let mut phi4 = vec![0.0; n_nodes];
    for j in 0..n_nodes {
        let (p, dp) = (phi0[j], phi1[j]);
        let wp = w_prime(setup, p);
        let f2 = setup.flux.d2(p);
        let f3 = setup.flux.d3(p);
        if setup.mu == 0.0 {
            let g = setup.gamma;
            phi2[j] = -wp * dp / g;
            phi3[j] = (f2 * dp * dp - wp * phi2[j]) / g;
            phi4[j] = (f3 * dp.powi(3) + 3.0 * f2 * dp * phi2[j] - wp * phi3[j]) / g;
        } else {
            let m = setup.mu;
            phi2[j] = (setup.gamma * dp + w_term(setup, p)) / m;
            phi3[j] = (setup.gamma * phi2[j] + wp * dp) / m;
            phi4[j] = (setup.gamma * phi3[j] - f2 * dp * dp + wp * phi2[j]) / m;
        }
    }

    let mut table = ProfileTable {
        setup: setup.clone(),
        grid,
        phi: vec![phi0, phi1, phi2, phi3, phi4],
        sigma0,
        lambda_left_slow: lam_l,
        lambda_right_stable: lam_r,
        anchor: opts.anchor_offset,
        data_span,
        max_residual: f64::NAN,
        tail_left,
        tail_right,
        j_left,
        j_right,
    };
    table.max_residual = table.residual_max()?;

    table.validate()?;
    Ok(table)
}

fn shoot_second_order(
    setup: &ShockSetup,
    lam_r: f64,
    delta: f64,
    opts: &ProfileOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let s = setup.clone();
    let mu = setup.mu;
    let gamma = setup.gamma;
    let rhs = move |y: &[f64; 2]| [y[1], (gamma * y[1] + w_term(&s, y[0])) / mu];
    let stop_hi = setup.u_l - delta;
    let overshoot = setup.u_l + 0.1 * setup.jump();
    let nodes = integrate_adaptive(
        rhs,
        0.0,
        [setup.u_r + delta, delta * lam_r],
        -0.01,
        &Dopri5Options {
            rtol: opts.rtol,
            atol: opts.rtol * 1e-2,
            max_step: 0.05,
            max_nodes: 4_000_000,
        },
        |_, y| y[0] >= stop_hi || y[1] > 0.0 || y[0] > overshoot,
    );
    collect_orbit(nodes, stop_hi)
}

fn shoot_first_order(
    setup: &ShockSetup,
    delta: f64,
    opts: &ProfileOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let s = setup.clone();
    let gamma = setup.gamma;
    let rhs = move |y: &[f64; 1]| [-w_term(&s, y[0]) / gamma];
    let stop_hi = setup.u_l - delta;
    let overshoot = setup.u_l + 0.1 * setup.jump();
    let nodes = integrate_adaptive(
        rhs,
        0.0,
        [setup.u_r + delta],
        -0.01,
        &Dopri5Options {
            rtol: opts.rtol,
            atol: opts.rtol * 1e-2,
            max_step: 0.05,
            max_nodes: 4_000_000,
        },
        |_, y| y[0] >= stop_hi || y[0] > overshoot,
    );
    let wrapped: Vec<OdeNode<1>> = nodes;
    // widen to the common (phi, phi') state layout
    let mut xs = Vec::with_capacity(wrapped.len());
    let mut states = Vec::with_capacity(wrapped.len());
    for nd in wrapped.iter().rev() {
        xs.push(nd.x);
        states.push(vec![nd.y[0], nd.dy[0]]);
    }
    check_monotone(&xs, &states, stop_hi)?;
    Ok((xs, states))
}

fn collect_orbit(nodes: Vec<OdeNode<2>>, stop_hi: f64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut xs = Vec::with_capacity(nodes.len());
    let mut states = Vec::with_capacity(nodes.len());
    for nd in nodes.iter().rev() {
        xs.push(nd.x);
        states.push(vec![nd.y[0], nd.y[1], nd.dy[1]]);
    }
    check_monotone(&xs, &states, stop_hi)?;
    Ok((xs, states))
}

fn check_monotone(xs: &[f64], states: &[Vec<f64>], stop_hi: f64) -> Result<()> {
    if states.is_empty() || states[0][0] < stop_hi {
        return Err(CoreError::NonMonotone(format!(
            "backward orbit stopped at phi = {} before reaching the left state (existence hypothesis violated?)",
            states.first().map(|s| s[0]).unwrap_or(f64::NAN)
        )));
    }
    for (i, st) in states.iter().enumerate() {
        if st.len() > 1 && st[1] > 0.0 && i > 0 && i + 1 < states.len() {
            return Err(CoreError::NonMonotone(format!(
                "phi' = {} > 0 at xi = {}",
                st[1], xs[i]
            )));
        }
    }
    Ok(())
}

/// Quintic-Hermite resampling of (phi, phi') from the adaptive nodes.
///
/// States carry [phi, phi', phi''] for the second-order system (phi''
/// from the equation); the first-order oracle stores [phi, phi'].
fn resample(setup: &ShockSetup, xs: &[f64], states: &[Vec<f64>], xi: f64) -> (f64, f64) {
    let i = match xs.binary_search_by(|x| x.partial_cmp(&xi).unwrap()) {
        Ok(i) => i.min(xs.len() - 2),
        Err(i) => i.saturating_sub(1).min(xs.len() - 2),
    };
    let (x0, x1) = (xs[i], xs[i + 1]);
    let (a, b) = (&states[i], &states[i + 1]);
    if setup.mu == 0.0 {
        let p = hermite_cubic(x0, x1, a[0], a[1], b[0], b[1], xi);
        let dp = -w_term(setup, p) / setup.gamma;
        (p, dp)
    } else {
        let p = hermite_quintic(x0, x1, a[0], a[1], a[2], b[0], b[1], b[2], xi);
        let dd0 = (setup.gamma * a[2] + w_prime(setup, a[0]) * a[1]) / setup.mu;
        let dd1 = (setup.gamma * b[2] + w_prime(setup, b[0]) * b[1]) / setup.mu;
        let dp = hermite_quintic(x0, x1, a[1], a[2], dd0, b[1], b[2], dd1, xi);
        (p, dp)
    }
}

fn anchor_newton(setup: &ShockSetup, xs: &[f64], states: &[Vec<f64>], seg: usize, mid: f64) -> f64 {
    let mut xi = 0.5 * (xs[seg] + xs[seg + 1]);
    for _ in 0..12 {
        let (p, dp) = resample(setup, xs, states, xi);
        let step = (p - mid) / dp;
        xi -= step;
        xi = xi.clamp(xs[seg] - 1.0, xs[seg + 1] + 1.0);
        if step.abs() < 1e-15 {
            break;
        }
    }
    xi
}

impl ProfileTable {
    /// m-th derivative of phi (m = 0..=3) at an arbitrary point; the
    /// linearized tail continues the table beyond its edges.
    pub fn eval_phi(&self, m: usize, xi: f64) -> f64 {
        assert!(m <= 3);
        if xi <= self.tail_left.edge {
            return self.tail_left.eval(m, xi);
        }
        if xi >= self.tail_right.edge {
            return self.tail_right.eval(m, xi);
        }
        let g = &self.grid;
        let jf = (xi + g.half_width) / g.h;
        let j = (jf.floor() as usize)
            .max(self.j_left)
            .min(self.j_right.saturating_sub(1).max(self.j_left));
        let (x0, x1) = (g.node(j), g.node(j + 1));
        let v = &self.phi;
        if m <= 2 {
            hermite_quintic(
                x0,
                x1,
                v[m][j],
                v[m + 1][j],
                v[m + 2][j],
                v[m][j + 1],
                v[m + 1][j + 1],
                v[m + 2][j + 1],
                xi,
            )
        } else {
            hermite_cubic(x0, x1, v[3][j], v[4][j], v[3][j + 1], v[4][j + 1], xi)
        }
    }

    /// Normalized profile g = (phi - u_r)/(u_l - u_r) and derivatives.
    pub fn eval_g(&self, m: usize, xi: f64) -> f64 {
        let jump = self.setup.jump();
        if m == 0 {
            (self.eval_phi(0, xi) - self.setup.u_r) / jump
        } else {
            self.eval_phi(m, xi) / jump
        }
    }

    /// g sampled at the table nodes (m = 0..=3).
    pub fn g_table(&self, m: usize) -> Vec<f64> {
        let jump = self.setup.jump();
        if m == 0 {
            self.phi[0].iter().map(|p| (p - self.setup.u_r) / jump).collect()
        } else {
            self.phi[m].iter().map(|p| p / jump).collect()
        }
    }

    /// Residual of the once-integrated equation from finite differences
    /// of the tabulated phi alone (independent of the integrator).
    pub fn residual_max(&self) -> Result<f64> {
        let phi = &self.phi[0];
        let d1 = fd_derivative(phi, self.grid.h, 1, 4)?;
        let setup = &self.setup;
        let mut worst = 0.0f64;
        if setup.mu == 0.0 {
            for (j, p) in phi.iter().enumerate() {
                let r = -setup.gamma * d1[j] - w_term(setup, *p);
                worst = worst.max(r.abs());
            }
        } else {
            let d2 = fd_derivative(phi, self.grid.h, 2, 4)?;
            for (j, p) in phi.iter().enumerate() {
                let r = setup.mu * d2[j] - setup.gamma * d1[j] - w_term(setup, *p);
                worst = worst.max(r.abs());
            }
        }
        Ok(worst)
    }

    fn validate(&self) -> Result<()> {
        let setup = &self.setup;
        let n = self.grid.n;
        for j in 1..n {
            if self.phi[1][j] >= 0.0 {
                return Err(CoreError::NonMonotone(format!(
                    "phi' = {} at interior node {}",
                    self.phi[1][j], j
                )));
            }
            // strict bounds collapse to equality once the tail underflows
            if self.phi[0][j] < setup.u_r || self.phi[0][j] > setup.u_l {
                return Err(CoreError::NonMonotone(format!(
                    "phi = {} leaves [u_r, u_l] at node {}",
                    self.phi[0][j], j
                )));
            }
        }
        let tol_end = 10.0 * (-self.sigma0 * self.grid.half_width).exp();
        let g0 = self.eval_g(0, -self.grid.half_width);
        let g1 = self.eval_g(0, self.grid.half_width);
        if g0 < 1.0 - tol_end || g1 > tol_end {
            return Err(CoreError::DomainTooSmall {
                half_width: self.grid.half_width,
                needed: self.grid.half_width * (1.0 + 0.25),
            });
        }
        Ok(())
    }

    /// Location where the characteristic speed equals the shock speed.
    pub fn locate_sonic_point(&self) -> f64 {
        let setup = &self.setup;
        let f = |xi: f64| setup.flux.d1(self.eval_phi(0, xi)) - setup.s;
        let mut lo = -self.grid.half_width;
        let mut hi = self.grid.half_width;
        // f(lo) > 0 > f(hi): bisect, then polish
        for _ in 0..80 {
            let midp = 0.5 * (lo + hi);
            if f(midp) > 0.0 {
                lo = midp;
            } else {
                hi = midp;
            }
        }
        let mut xi = 0.5 * (lo + hi);
        for _ in 0..6 {
            let d = setup.flux.d2(self.eval_phi(0, xi)) * self.eval_phi(1, xi);
            if d == 0.0 {
                break;
            }
            xi -= f(xi) / d;
        }
        xi
    }

    /// Explicit stability-rate constants for a weight exponent alpha.
    pub fn decay_constants(&self, alpha: f64, theta_ref: f64) -> Result<RateConstants> {
        let setup = &self.setup;
        let alpha_max = if setup.mu == 0.0 {
            self.sigma0
        } else {
            (2.0 * setup.gamma / (3.0 * setup.mu)).min(self.sigma0)
        };
        if !(alpha > 0.0 && alpha < alpha_max) {
            return Err(CoreError::AlphaOutOfRange { alpha, max: alpha_max });
        }
        let n = 2000;
        let mut g_min = f64::INFINITY;
        for i in 0..=n {
            let u = setup.u_r + setup.jump() * i as f64 / n as f64;
            g_min = g_min.min(setup.flux.d2(u).abs());
        }
        let xi_star = self.locate_sonic_point();
        let mut b_min = f64::INFINITY;
        for i in 0..=n {
            let xi = xi_star - 1.0 + 2.0 * i as f64 / n as f64;
            b_min = b_min.min(self.eval_phi(1, xi).abs());
        }
        let p0 = self.eval_phi(0, xi_star);
        let jump_near = (self.eval_phi(0, xi_star - 1.0) - p0)
            .abs()
            .min((self.eval_phi(0, xi_star + 1.0) - p0).abs());
        let c0 = g_min * (b_min / alpha).min(jump_near);

        let (mu, gamma) = (setup.mu, setup.gamma);
        let pen = alpha * (alpha * mu + gamma).powi(2) / (2.0 * gamma - 3.0 * alpha * mu);
        let beta = (c0 * alpha).min(theta_ref).min(c0 - pen);
        // the strict inequality system bounds beta by alpha * (c0 - pen)
        let beta_sup = (c0 * alpha).min(theta_ref).min(alpha * (c0 - pen));
        let beta_weight = 0.9 * beta_sup;

        let mut margin_det = f64::INFINITY;
        let mut margin_trace = f64::INFINITY;
        for sgn in [-1.0, 1.0] {
            let m11 = c0 * alpha - beta_weight;
            let m12 = mu * alpha * alpha + gamma * alpha * sgn;
            let m22 = 2.0 * gamma - 3.0 * alpha * mu * sgn;
            margin_det = margin_det.min(m11 * m22 - m12 * m12);
            margin_trace = margin_trace.min(m11 + m22);
        }
        if beta <= 0.0 {
            return Err(CoreError::RateUnavailable { beta });
        }
        Ok(RateConstants {
            xi_star,
            g_min_convexity: g_min,
            b_slope: b_min,
            c0,
            alpha,
            theta_ref,
            beta,
            beta_sup,
            beta_weight,
            margin_det,
            margin_trace,
            matrix_positive: margin_det > 0.0 && margin_trace > 0.0,
        })
    }

    /// Fit the smallest constants in the exponential tail bounds for g
    /// and its first three derivatives.
    pub fn verify_tail_bounds(&self) -> Result<TailBoundReport> {
        let g = self.g_table(0);
        let n = self.grid.n;
        let mut c_right = 0.0f64;
        let mut c_left = 0.0f64;
        for j in 0..=n {
            let xi = self.grid.node(j);
            if xi > 0.0 {
                c_right = c_right.max(g[j] * (self.sigma0 * xi).exp());
            } else if xi < 0.0 {
                c_left = c_left.max((1.0 - g[j]) * (self.sigma0 * xi.abs()).exp());
            }
        }
        let mut c_deriv = [0.0f64; 3];
        let mut argmax_first = 0.0;
        for (m, slot) in c_deriv.iter_mut().enumerate() {
            let gm = self.g_table(m + 1);
            for j in 0..=n {
                let xi = self.grid.node(j);
                let ratio = gm[j].abs() * (self.sigma0 * xi.abs()).exp();
                if !ratio.is_finite() {
                    return Err(CoreError::TailFitFailure(format!(
                        "derivative bound ratio not finite at node {j}"
                    )));
                }
                if ratio > *slot {
                    *slot = ratio;
                    if m == 0 {
                        argmax_first = xi;
                    }
                }
            }
        }
        for j in 1..n {
            if self.phi[1][j] >= 0.0 {
                return Err(CoreError::TailFitFailure(format!(
                    "g' >= 0 at node {j} (ratio check void)"
                )));
            }
        }
        let c_overall = c_right.max(c_left).max(c_deriv[0]).max(c_deriv[1]).max(c_deriv[2]);
        Ok(TailBoundReport {
            c_right,
            c_left,
            c_deriv,
            c_overall,
            argmax_first_deriv: argmax_first,
        })
    }

    /// CSV export: metadata line, header, then one row per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# sigma0={:.17e} xi_star={:.17e} s={:.17e}\n",
            self.sigma0,
            self.locate_sonic_point(),
            self.setup.s
        ));
        out.push_str("xi,phi,dphi,g,dg,d2g,d3g\n");
        let g0 = self.g_table(0);
        let g1 = self.g_table(1);
        let g2 = self.g_table(2);
        let g3 = self.g_table(3);
        for j in 0..=self.grid.n {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                self.grid.node(j),
                self.phi[0][j],
                self.phi[1][j],
                g0[j],
                g1[j],
                g2[j],
                g3[j]
            ));
        }
        out
    }
}

/// Constants entering the explicit decay-rate prediction.
#[derive(Debug, Clone, Copy)]
pub struct RateConstants {
    pub xi_star: f64,
    /// G: min |f''| over the state hull.
    pub g_min_convexity: f64,
    /// B: min |phi'| within distance one of the sonic point.
    pub b_slope: f64,
    pub c0: f64,
    pub alpha: f64,
    pub theta_ref: f64,
    /// Predicted rate from the equality display.
    pub beta: f64,
    /// Largest beta admissible for the weight-matrix inequality system.
    pub beta_sup: f64,
    /// The value used in the weighted functionals (0.9 * beta_sup).
    pub beta_weight: f64,
    pub margin_det: f64,
    pub margin_trace: f64,
    pub matrix_positive: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct TailBoundReport {
    pub c_right: f64,
    pub c_left: f64,
    pub c_deriv: [f64; 3],
    pub c_overall: f64,
    pub argmax_first_deriv: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxModel;

    fn burgers_oracle() -> ProfileTable {
        let setup = ShockSetup::inviscid_oracle(FluxModel::Burgers, 1.0, -1.0, 1.0).unwrap();
        solve_profile(
            &setup,
            &ProfileOptions {
                half_width: 22.0,
                n: 2048,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn tanh_closed_form() {
        let table = burgers_oracle();
        let mut worst = 0.0f64;
        for j in 0..=table.grid.n {
            let xi = table.grid.node(j);
            if xi.abs() <= 20.0 {
                worst = worst.max((table.phi[0][j] + (xi / 2.0).tanh()).abs());
            }
        }
        assert!(worst <= 1e-8, "max node error {worst}");
        assert!((table.sigma0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn viscous_dispersive_profile_basics() {
        let setup = ShockSetup::new(FluxModel::Burgers, 1.0, -1.0, 0.1, 1.0).unwrap();
        let table = solve_profile(&setup, &ProfileOptions::default()).unwrap();
        assert_eq!(setup.s, 0.0);
        // symmetry forces the anchor value
        assert!(table.eval_phi(0, 0.0).abs() < 1e-11);
        assert!((table.eval_g(0, 0.0) - 0.5).abs() < 1e-11);
        assert!(table.max_residual <= 1e-8, "residual {}", table.max_residual);
        // interior monotone
        assert!(table.phi[1][1..table.grid.n].iter().all(|d| *d < 0.0));
    }

    #[test]
    fn sonic_point_symmetric_is_zero() {
        let setup = ShockSetup::new(FluxModel::Burgers, 1.0, -1.0, 0.1, 1.0).unwrap();
        let table = solve_profile(&setup, &ProfileOptions::default()).unwrap();
        let xs = table.locate_sonic_point();
        assert!(xs.abs() < 1e-10, "xi* = {xs}");
        assert!((setup.flux.d1(table.eval_phi(0, xs)) - setup.s).abs() <= 1e-10);
    }

    #[test]
    fn sonic_point_asymmetric() {
        let setup = ShockSetup::new(FluxModel::Burgers, 2.0, 0.0, 0.05, 1.0).unwrap();
        let table = solve_profile(&setup, &ProfileOptions::default()).unwrap();
        let xs = table.locate_sonic_point();
        // f'(phi) = phi, s = 1: root where phi = 1 = midpoint = anchor
        assert!((table.eval_phi(0, xs) - 1.0).abs() < 1e-10);
        assert!((setup.flux.d1(table.eval_phi(0, xs)) - setup.s).abs() <= 1e-10);
    }

    #[test]
    fn existence_failure_is_reported() {
        let setup = ShockSetup::new(FluxModel::Burgers, 1.0, -1.0, 0.1, 0.2).unwrap();
        assert!(matches!(
            solve_profile(&setup, &ProfileOptions::default()),
            Err(CoreError::ExistenceCondition { .. })
        ));
    }

    #[test]
    fn tail_bounds_for_tanh() {
        let table = burgers_oracle();
        let rep = table.verify_tail_bounds().unwrap();
        assert!(rep.c_right <= 2.0 && rep.c_left <= 2.0, "{rep:?}");
        assert!((rep.c_right - rep.c_left).abs() <= 0.01 * rep.c_right);
        assert!(rep.c_overall.is_finite());
    }

    #[test]
    fn burgers_convexity_constant_is_one() {
        let setup = ShockSetup::new(FluxModel::Burgers, 1.0, -1.0, 0.1, 1.0).unwrap();
        let table = solve_profile(&setup, &ProfileOptions::default()).unwrap();
        let rc = table.decay_constants(0.3, 1.0).unwrap();
        assert_eq!(rc.g_min_convexity, 1.0);
        assert!(rc.beta > 0.0);
    }

    #[test]
    fn c0_branch_switch_in_alpha() {
        // wide shock: the B/alpha branch becomes active while the
        // predicted rate is still positive
        let setup = ShockSetup::new(FluxModel::Burgers, 2.0, -2.0, 1e-3, 1.0).unwrap();
        let table = solve_profile(
            &setup,
            &ProfileOptions {
                half_width: 15.0,
                n: 4096,
                ..Default::default()
            },
        )
        .unwrap();
        let xi_star = table.locate_sonic_point();
        let p0 = table.eval_phi(0, xi_star);
        let jumps = (table.eval_phi(0, xi_star - 1.0) - p0)
            .abs()
            .min((table.eval_phi(0, xi_star + 1.0) - p0).abs());
        let lo = table.decay_constants(0.4, 10.0).unwrap();
        // alpha small: B/alpha exceeds the near-sonic jump, which wins the min
        assert!((lo.c0 - lo.g_min_convexity * jumps).abs() < 1e-12);
        let switch = lo.b_slope / jumps;
        assert!(0.4 < switch && switch < 0.7, "switch at {switch}");
        let hi = table.decay_constants(0.7, 10.0).unwrap();
        assert!((hi.c0 - hi.g_min_convexity * hi.b_slope / 0.7).abs() < 1e-12);
        assert!(hi.c0 < lo.c0);
    }

    #[test]
    fn alpha_out_of_range_rejected() {
        let setup = ShockSetup::new(FluxModel::Burgers, 1.0, -1.0, 0.1, 1.0).unwrap();
        let table = solve_profile(&setup, &ProfileOptions::default()).unwrap();
        assert!(matches!(
            table.decay_constants(table.sigma0 * 1.01, 1.0),
            Err(CoreError::AlphaOutOfRange { .. })
        ));
        assert!(table.decay_constants(0.0, 1.0).is_err());
    }
}
