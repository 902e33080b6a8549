//! End-to-end scenario execution: profile, periodic far fields, shift,
//! full-line perturbation, stability report, verdicts.

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use shocklab_core::flux::ShockSetup;
use shocklab_core::fullline::{
    solve_perturbation, AnsatzSupplier, PerturbationRun, RunOptions, StabilityReport,
};
use shocklab_core::fullline::diagnostics::stability_report;
use shocklab_core::periodic::{
    flux_defect_integrals, measure_decay, solve_periodic, DecayMeasurement, FluxDefectIntegrals,
    PeriodicHistory, PeriodicParams,
};
use shocklab_core::profile::{solve_profile, ProfileOptions, ProfileTable, RateConstants};
use shocklab_core::shift::{
    eta_infinity_formula, integrate_shift, EtaInfinityFormula, ShiftOde, ShiftTrajectory,
};

use crate::config::ScenarioConfig;
use crate::scenario::{make_initial_data, InitialData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> CheckVerdict {
    CheckVerdict {
        name: name.to_string(),
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
    }
}

fn not_applicable(name: &str, detail: &str) -> CheckVerdict {
    CheckVerdict {
        name: name.to_string(),
        status: CheckStatus::NotApplicable,
        detail: detail.to_string(),
    }
}

/// Every scalar the run produces, in one serializable block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub shock_speed: f64,
    pub sigma0: f64,
    pub xi_star: f64,
    pub profile_residual: f64,
    pub tail_constant_overall: f64,
    pub delta: f64,
    pub eta0: f64,
    pub eta_inf_ode: f64,
    pub eta_inf_formula: f64,
    pub eta_inf_gap: f64,
    pub eta_tail_gap: f64,
    pub eta_formula_eta1: f64,
    pub eta_formula_eta2: f64,
    pub shift_decay_c: Option<f64>,
    pub shift_decay_theta: Option<f64>,
    pub theta_meas_left: Option<f64>,
    pub theta_meas_right: Option<f64>,
    pub theta_poincare_left: f64,
    pub theta_poincare_right: f64,
    pub theta_ref: f64,
    pub mass_drift_left: f64,
    pub mass_drift_right: f64,
    pub alpha: f64,
    pub beta_theory: f64,
    pub beta_sup: f64,
    pub beta_weight: f64,
    pub margin_det: f64,
    pub margin_trace: f64,
    pub matrix_positive: bool,
    pub beta_meas: Option<f64>,
    pub beta_meas_log_rms: Option<f64>,
    pub sup_initial: f64,
    pub sup_final: f64,
    pub sup_ratio: f64,
    pub monotone_tail_ok: bool,
    pub tail_uptick_in_sigmas: f64,
    pub w_ratio: [f64; 4],
    pub w_plain_ratio: [f64; 4],
    pub h_audit_c: [f64; 4],
    pub h_audit_finite: bool,
    pub lemma41_sup: [f64; 2],
    pub conservation_drift: f64,
    pub psi_end_initial: f64,
    pub psi_end_max: f64,
    pub boundary_margin_max: f64,
}

/// Full in-memory result of one scenario.
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub config_hash: String,
    pub profile: ProfileTable,
    pub constants: RateConstants,
    pub hist_l: PeriodicHistory,
    pub hist_r: PeriodicHistory,
    pub decay_l: Option<DecayMeasurement>,
    pub decay_r: Option<DecayMeasurement>,
    pub defect_l: FluxDefectIntegrals,
    pub defect_r: FluxDefectIntegrals,
    pub initial: InitialData,
    pub traj: ShiftTrajectory,
    pub formula: EtaInfinityFormula,
    pub run: PerturbationRun,
    pub stability: StabilityReport,
    pub report: RunReport,
    pub checks: Vec<CheckVerdict>,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let config_hash = config.hash()?;
    let flux = config.flux.build();
    let setup = ShockSetup::new(flux, config.u_l, config.u_r, config.mu, config.gamma)
        .map_err(|e| anyhow!("shock setup: {e}"))?;

    let profile = solve_profile(
        &setup,
        &ProfileOptions {
            half_width: config.grid.profile_half_width,
            n: config.grid.profile_n,
            ..Default::default()
        },
    )
    .context("profile stage")?;
    let tail_report = profile.verify_tail_bounds().context("profile tail audit")?;

    let initial = make_initial_data(config, &profile).context("initial data stage")?;

    // both far-field cells evolve independently
    let t_end = config.time.t_end;
    let make_params = |period: f64, m: usize| PeriodicParams {
        flux: setup.flux.clone(),
        mu: setup.mu,
        gamma: setup.gamma,
        s: setup.s,
        period,
        m,
        dt: config.time.periodic_dt,
    };
    let params_l = make_params(initial.left.period, initial.left.m);
    let params_r = make_params(initial.right.period, initial.right.m);
    let w0l = initial.left.cell_samples();
    let w0r = initial.right.cell_samples();
    let (hist_l, hist_r) = std::thread::scope(|scope| {
        let hl = scope.spawn(|| {
            solve_periodic(&params_l, setup.u_l, &w0l, t_end, config.time.periodic_dt_out)
        });
        let hr = scope.spawn(|| {
            solve_periodic(&params_r, setup.u_r, &w0r, t_end, config.time.periodic_dt_out)
        });
        (hl.join().unwrap(), hr.join().unwrap())
    });
    let hist_l = hist_l.context("left periodic stage")?;
    let hist_r = hist_r.context("right periodic stage")?;

    let decay_l = measure_decay(&hist_l, 0).ok();
    let decay_r = measure_decay(&hist_r, 0).ok();
    let kap = |p: f64| 2.0 * std::f64::consts::PI / p;
    let poincare_l = setup.gamma * kap(initial.left.period).powi(2);
    let poincare_r = setup.gamma * kap(initial.right.period).powi(2);
    let theta_ref = match (&decay_l, &decay_r) {
        (Some(a), Some(b)) => a.theta_meas.min(b.theta_meas),
        (Some(a), None) => a.theta_meas,
        (None, Some(b)) => b.theta_meas,
        (None, None) => poincare_l.min(poincare_r),
    };

    let constants = profile
        .decay_constants(config.constants.alpha, theta_ref)
        .context("rate constants stage")?;

    // shift dynamics
    let ode = ShiftOde::new(
        &profile,
        &hist_l,
        &hist_r,
        &shocklab_core::shift::ShiftOdeOptions {
            quad_half_width: config.tolerances.eta_margin + 28.0 / profile.sigma0,
            quad_step: config.tolerances.quad_step,
        },
    );
    let traj = integrate_shift(&ode, initial.eta0, t_end, config.time.shift_dt, initial.delta)
        .context("shift stage")?;

    let defect_l = flux_defect_integrals(&hist_l, config.tolerances.tail_tol).context("left flux defect")?;
    let defect_r = flux_defect_integrals(&hist_r, config.tolerances.tail_tol).context("right flux defect")?;
    let left_eval = initial.left.clone();
    let right_eval = initial.right.clone();
    let formula = eta_infinity_formula(
        &initial.u0,
        &initial.grid,
        &profile,
        &|x| left_eval.eval(x),
        &|x| right_eval.eval(x),
        &defect_l,
        &defect_r,
    )
    .context("asymptotic shift formula")?;

    // perturbation dynamics around the ansatz
    let supplier = AnsatzSupplier::new(&initial.grid, &profile, &hist_l, &hist_r, &traj);
    let v0: Vec<f64> = initial
        .grid
        .nodes()
        .iter()
        .zip(&initial.u0)
        .map(|(&x, &u)| {
            let g = profile.eval_g(0, x - initial.eta0);
            let ul0 = setup.u_l + initial.left.eval(x);
            let ur0 = setup.u_r + initial.right.eval(x);
            u - (ul0 * g + ur0 * (1.0 - g))
        })
        .collect();
    let xi_star = constants.xi_star;
    let run = solve_perturbation(
        &initial.grid,
        &profile,
        &supplier,
        &v0,
        &RunOptions {
            t_end,
            dt: config.time.dt,
            dt_out: config.time.dt_out,
            alpha: constants.alpha,
            beta_weight: constants.beta_weight,
            xi_star_shifted: xi_star + traj.eta_inf_ode,
            eta_inf: traj.eta_inf_ode,
            theta: theta_ref,
            field_dump_times: config.field_dump_times.clone(),
        },
    )
    .context("full-line stage")?;
    let stability = stability_report(&run.snapshots, theta_ref, run.drift_max);

    let eta_tail_gap = (traj.eta.last().unwrap() - traj.eta_inf_ode).abs();
    let report = RunReport {
        config_hash: config_hash.clone(),
        shock_speed: setup.s,
        sigma0: profile.sigma0,
        xi_star,
        profile_residual: profile.max_residual,
        tail_constant_overall: tail_report.c_overall,
        delta: initial.delta,
        eta0: initial.eta0,
        eta_inf_ode: traj.eta_inf_ode,
        eta_inf_formula: formula.value,
        eta_inf_gap: (formula.value - traj.eta_inf_ode).abs(),
        eta_tail_gap,
        eta_formula_eta1: formula.eta1,
        eta_formula_eta2: formula.eta2,
        shift_decay_c: traj.decay.map(|d| d.c),
        shift_decay_theta: traj.decay.map(|d| d.theta),
        theta_meas_left: decay_l.as_ref().map(|d| d.theta_meas),
        theta_meas_right: decay_r.as_ref().map(|d| d.theta_meas),
        theta_poincare_left: poincare_l,
        theta_poincare_right: poincare_r,
        theta_ref,
        mass_drift_left: hist_l.mass_drift(),
        mass_drift_right: hist_r.mass_drift(),
        alpha: constants.alpha,
        beta_theory: constants.beta,
        beta_sup: constants.beta_sup,
        beta_weight: constants.beta_weight,
        margin_det: constants.margin_det,
        margin_trace: constants.margin_trace,
        matrix_positive: constants.matrix_positive,
        beta_meas: stability.beta_meas.map(|f| f.rate),
        beta_meas_log_rms: stability.beta_meas.map(|f| f.log_rms),
        sup_initial: stability.sup_initial,
        sup_final: stability.sup_final,
        sup_ratio: stability.sup_ratio,
        monotone_tail_ok: stability.monotone_tail_ok,
        tail_uptick_in_sigmas: stability.tail_uptick_in_sigmas,
        w_ratio: stability.w_ratio,
        w_plain_ratio: stability.w_plain_ratio,
        h_audit_c: stability.h_audit.c,
        h_audit_finite: stability.h_audit.finite,
        lemma41_sup: stability.lemma41_sup,
        conservation_drift: run.drift_max,
        psi_end_initial: run.snapshots[0].psi_end,
        psi_end_max: stability.psi_end_max,
        boundary_margin_max: stability.boundary_margin_max,
    };
    let checks = build_checks(&report, decay_l.is_some() || decay_r.is_some());

    Ok(ScenarioRun {
        config: config.clone(),
        config_hash,
        profile,
        constants,
        hist_l,
        hist_r,
        decay_l,
        decay_r,
        defect_l,
        defect_r,
        initial,
        traj,
        formula,
        run,
        stability,
        report,
        checks,
    })
}

fn build_checks(r: &RunReport, perturbed: bool) -> Vec<CheckVerdict> {
    let mut out = Vec::new();
    out.push(check(
        "profile_residual",
        r.profile_residual <= 1e-8,
        format!("max residual {:.3e} (criterion 2)", r.profile_residual),
    ));
    out.push(check(
        "profile_tail_bounds",
        r.tail_constant_overall.is_finite(),
        format!("fitted C = {:.4} (criterion 2)", r.tail_constant_overall),
    ));
    out.push(check(
        "periodic_mass_drift",
        r.mass_drift_left <= 1e-12 && r.mass_drift_right <= 1e-12,
        format!(
            "cell mean drift {:.3e} / {:.3e} (criterion 3)",
            r.mass_drift_left, r.mass_drift_right
        ),
    ));
    if perturbed {
        out.push(check(
            "periodic_decay_fit",
            r.theta_meas_left.is_some() || r.theta_meas_right.is_some(),
            format!(
                "theta measured {:?} / {:?}, Poincare {:.3} / {:.3} (criterion 3)",
                r.theta_meas_left, r.theta_meas_right, r.theta_poincare_left, r.theta_poincare_right
            ),
        ));
    } else {
        out.push(not_applicable("periodic_decay_fit", "zero perturbation: nothing to fit"));
    }
    out.push(check(
        "shift_tail_resolved",
        r.eta_tail_gap < 1e-4,
        format!("|eta(T) - eta_inf| = {:.3e} (criterion 5 gate)", r.eta_tail_gap),
    ));
    out.push(check(
        "eta_inf_two_routes",
        r.eta_inf_gap <= 1e-3,
        format!(
            "formula {:.8} vs ODE {:.8}, gap {:.3e} (criterion 5)",
            r.eta_inf_formula, r.eta_inf_ode, r.eta_inf_gap
        ),
    ));
    out.push(check(
        "conservation_drift",
        r.conservation_drift <= 1e-6,
        format!("max |d(int v)/dt| = {:.3e} (criterion 8)", r.conservation_drift),
    ));
    out.push(check(
        "initial_mass_zero",
        r.psi_end_initial.abs() <= 1e-9,
        format!("Psi(+L, 0) = {:.3e}", r.psi_end_initial),
    ));
    out.push(check(
        "h_bound_finite",
        r.h_audit_finite,
        format!("audit constants {:?} (criterion 8)", r.h_audit_c),
    ));
    out.push(check(
        "weighted_bounded",
        r.w_ratio.iter().chain(r.w_plain_ratio.iter()).all(|x| *x <= 3.0),
        format!(
            "weighted ratios {:?}, plain {:?} (criterion 9)",
            r.w_ratio, r.w_plain_ratio
        ),
    ));
    if r.sup_initial > 1e-12 {
        out.push(check(
            "sup_convergence",
            r.sup_ratio <= 0.01 && r.monotone_tail_ok,
            format!(
                "sup ratio {:.3e}, tail uptick {:.2} sigmas (criterion 6)",
                r.sup_ratio, r.tail_uptick_in_sigmas
            ),
        ));
    } else {
        out.push(not_applicable("sup_convergence", "unperturbed run: distance at rounding level"));
    }
    match r.beta_meas {
        Some(bm) if perturbed => out.push(check(
            "rate_beta",
            bm >= 0.8 * r.beta_theory,
            format!("beta_meas {:.4} vs 0.8 beta_theory {:.4} (criterion 7)", bm, 0.8 * r.beta_theory),
        )),
        _ => out.push(not_applicable("rate_beta", "no resolvable decay to fit")),
    }
    out.push(check(
        "weight_matrix_positive",
        r.matrix_positive,
        format!(
            "margins det {:.4e}, trace {:.4e} at beta_weight {:.4} (criterion 7)",
            r.margin_det, r.margin_trace, r.beta_weight
        ),
    ));
    out
}

pub fn all_applicable_pass(checks: &[CheckVerdict]) -> bool {
    checks.iter().all(|c| c.status != CheckStatus::Fail)
}
