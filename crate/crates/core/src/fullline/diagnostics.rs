//! Weighted functionals, error-term audits and the stability report.

use crate::error::Result;
use crate::fd::fd_derivative;
use crate::fit::{fit_decay, DecayFit};
use crate::grid::LineGrid;
use crate::quad::{cumulative_fourth_order, trapezoid};

use super::stepper::SnapshotScalars;

/// Running antiderivative of the perturbation from the left end.
pub fn anti_derivative(v: &[f64], h: f64) -> Vec<f64> {
    cumulative_fourth_order(v, h)
}

/// Spatial integrals int w(xi) (d^k Psi)^2 dxi for k = 0..=4, where
/// Psi is the antiderivative of v, derivative orders above one fall on v
/// itself, and w is the exponential weight (or 1).
pub fn weighted_integrals(
    v: &[f64],
    grid: &LineGrid,
    weight: Option<&[f64]>,
) -> Result<[f64; 5]> {
    let psi = anti_derivative(v, grid.h);
    let d1 = fd_derivative(v, grid.h, 1, 4)?;
    let d2 = fd_derivative(v, grid.h, 2, 4)?;
    let d3 = fd_derivative(v, grid.h, 3, 4)?;
    let orders: [&[f64]; 5] = [&psi, v, &d1, &d2, &d3];
    let mut out = [0.0; 5];
    let mut buf = vec![0.0; v.len()];
    for (k, field) in orders.iter().enumerate() {
        match weight {
            Some(w) => {
                for j in 0..v.len() {
                    buf[j] = w[j] * field[j] * field[j];
                }
            }
            None => {
                for j in 0..v.len() {
                    buf[j] = field[j] * field[j];
                }
            }
        }
        out[k] = trapezoid(&buf, grid.h);
    }
    Ok(out)
}

/// Pointwise audit of one error-term frame: max over resolvable nodes of
/// |d^j H| e^{theta t} e^{sigma0 |xi - eta|}, j = 0..=3.
///
/// Nodes where the field has decayed below `floor[j]` are skipped; the
/// weight grows exponentially, so including quadrature noise would make
/// the audit meaningless in finite precision.
pub fn h_audit_frame(
    h: &[f64],
    h_int: &[f64],
    grid: &LineGrid,
    t: f64,
    eta: f64,
    theta: f64,
    sigma0: f64,
    floor: &[f64; 4],
) -> Result<[f64; 4]> {
    let d1 = fd_derivative(h, grid.h, 1, 4)?;
    let d2 = fd_derivative(h, grid.h, 2, 4)?;
    let minus = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| -x).collect() };
    let fields: [Vec<f64>; 4] = [h_int.to_vec(), minus(h), minus(&d1), minus(&d2)];
    let et = (theta * t).exp();
    let mut out = [0.0; 4];
    for (j, field) in fields.iter().enumerate() {
        let mut worst = 0.0f64;
        for (idx, val) in field.iter().enumerate() {
            if val.abs() <= floor[j] {
                continue;
            }
            let x = grid.node(idx);
            worst = worst.max(val.abs() * et * (sigma0 * (x - eta).abs()).exp());
        }
        out[j] = worst;
    }
    Ok(out)
}

/// Sup over the run of the per-frame audits.
#[derive(Debug, Clone, Copy)]
pub struct HBoundAudit {
    pub c: [f64; 4],
    pub finite: bool,
}

pub fn h_bound_audit(snapshots: &[SnapshotScalars]) -> HBoundAudit {
    let mut c = [0.0f64; 4];
    for s in snapshots {
        for j in 0..4 {
            c[j] = c[j].max(s.r_audit[j]);
        }
    }
    HBoundAudit {
        c,
        finite: c.iter().all(|v| v.is_finite()),
    }
}

/// Everything the acceptance criteria read off one full-line run.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub sup_initial: f64,
    pub sup_final: f64,
    /// sup_final / sup_initial (NaN for an unperturbed run).
    pub sup_ratio: f64,
    pub beta_meas: Option<DecayFit>,
    /// Worst positive log-increment over the final half of the resolvable
    /// sup-norm series, in units of the fit scatter.
    pub tail_uptick_in_sigmas: f64,
    pub monotone_tail_ok: bool,
    /// max over run / max over first quarter, weighted and unweighted.
    pub w_ratio: [f64; 4],
    pub w_plain_ratio: [f64; 4],
    pub w_bounded: bool,
    pub h_audit: HBoundAudit,
    /// sup_t max_xi |d^i (U - phi_{eta_inf})| e^{theta t}, i = 0, 1.
    pub lemma41_sup: [f64; 2],
    pub drift_max: f64,
    pub psi_end_max: f64,
    pub boundary_margin_max: f64,
}

pub fn stability_report(snapshots: &[SnapshotScalars], theta: f64, drift_max: f64) -> StabilityReport {
    let n = snapshots.len();
    assert!(n >= 2);
    let sup0 = snapshots[0].sup_dist;
    let supf = snapshots[n - 1].sup_dist;
    let floor = (1e-12 * sup0).max(1e-14);

    // rate fit over the resolvable tail
    let resolvable: Vec<usize> = (0..n).filter(|&i| snapshots[i].sup_dist > floor).collect();
    let mut beta_meas = None;
    let mut uptick = 0.0f64;
    let mut monotone_ok = true;
    if resolvable.len() >= 8 {
        let tail = &resolvable[resolvable.len() / 2..];
        let ts: Vec<f64> = tail.iter().map(|&i| snapshots[i].t).collect();
        let qs: Vec<f64> = tail.iter().map(|&i| snapshots[i].sup_dist).collect();
        if let Some(fit) = fit_decay(&ts, &qs) {
            // monotone within fit noise over the final half
            let sigma = fit.log_rms.max(1e-12);
            for w in qs.windows(2) {
                let inc = (w[1] / w[0]).ln();
                uptick = uptick.max(inc / sigma);
            }
            monotone_ok = uptick <= 2.0;
            beta_meas = Some(fit);
        }
    }

    let quarter = (n / 4).max(1);
    let mut w_ratio = [0.0f64; 4];
    let mut w_plain_ratio = [0.0f64; 4];
    for k in 0..4 {
        let early = snapshots[..quarter]
            .iter()
            .map(|s| s.w[k])
            .fold(0.0f64, f64::max);
        let all = snapshots.iter().map(|s| s.w[k]).fold(0.0f64, f64::max);
        w_ratio[k] = all / early.max(1e-300);
        let early0 = snapshots[..quarter]
            .iter()
            .map(|s| s.w_plain[k])
            .fold(0.0f64, f64::max);
        let all0 = snapshots.iter().map(|s| s.w_plain[k]).fold(0.0f64, f64::max);
        w_plain_ratio[k] = all0 / early0.max(1e-300);
    }
    let w_bounded = w_ratio.iter().chain(w_plain_ratio.iter()).all(|r| *r <= 3.0);

    let h_audit = h_bound_audit(snapshots);

    let mut lemma41 = [0.0f64; 2];
    for i in 0..2 {
        let base = snapshots[0].ansatz_dist[i];
        let fl = (1e-12 * base).max(1e-300);
        for s in snapshots {
            if s.ansatz_dist[i] > fl {
                lemma41[i] = lemma41[i].max(s.ansatz_dist[i] * (theta * s.t).exp());
            }
        }
    }

    StabilityReport {
        sup_initial: sup0,
        sup_final: supf,
        sup_ratio: supf / sup0,
        beta_meas,
        tail_uptick_in_sigmas: uptick,
        monotone_tail_ok: monotone_ok,
        w_ratio,
        w_plain_ratio,
        w_bounded,
        h_audit,
        lemma41_sup: lemma41,
        drift_max,
        psi_end_max: snapshots.iter().map(|s| s.psi_end.abs()).fold(0.0, f64::max),
        boundary_margin_max: snapshots.iter().map(|s| s.boundary_margin).fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antiderivative_recovers_bump() {
        // v = derivative of a compact bump: Psi recovers the bump to O(h^4)
        let grid = LineGrid::new(10.0, 2000).unwrap();
        let bump = |x: f64| {
            let z: f64 = x / 3.0;
            if z.abs() < 1.0 {
                (-1.0 / (1.0 - z * z)).exp()
            } else {
                0.0
            }
        };
        let dbump = |x: f64| {
            let z: f64 = x / 3.0;
            if z.abs() < 1.0 {
                let w = 1.0 - z * z;
                (-1.0 / w).exp() * (-2.0 * z / (w * w)) / 3.0
            } else {
                0.0
            }
        };
        let v = grid.sample(dbump);
        let psi = anti_derivative(&v, grid.h);
        let mut worst = 0.0f64;
        for j in 0..=grid.n {
            worst = worst.max((psi[j] - bump(grid.node(j))).abs());
        }
        assert!(worst < 1e-7, "antiderivative error {worst}");
        assert_eq!(psi[0], 0.0);
    }

    #[test]
    fn zero_field_gives_zero_functionals() {
        let grid = LineGrid::new(5.0, 256).unwrap();
        let v = vec![0.0; grid.num_nodes()];
        let ints = weighted_integrals(&v, &grid, None).unwrap();
        assert!(ints.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn unweighted_matches_plain_norm() {
        // alpha = 0 weight equals one: W_0 is the plain squared L2 norm
        let grid = LineGrid::new(8.0, 1024).unwrap();
        let v = grid.sample(|x| (-x * x).exp() * x);
        let ints = weighted_integrals(&v, &grid, None).unwrap();
        let psi = anti_derivative(&v, grid.h);
        let direct: f64 = trapezoid(&psi.iter().map(|p| p * p).collect::<Vec<_>>(), grid.h);
        assert!((ints[0] - direct).abs() <= 1e-14 * direct.max(1.0));
    }

    #[test]
    fn weights_scale_stationary_gaussian() {
        let grid = LineGrid::new(8.0, 1024).unwrap();
        let alpha = 0.3;
        let weight: Vec<f64> = grid.nodes().iter().map(|x| (alpha * x.abs()).exp()).collect();
        let v = grid.sample(|x| -2.0 * x * (-x * x).exp());
        // same field at two times: with beta = 0 the weighted functional is constant
        let a = weighted_integrals(&v, &grid, Some(&weight)).unwrap();
        let b = weighted_integrals(&v, &grid, Some(&weight)).unwrap();
        assert_eq!(a[0], b[0]);
    }
}
