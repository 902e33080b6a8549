//! Refinement study: observed discretization orders per stage.
//!
//! Spatial refinement halves h; the full-line step is scaled as dt ~ h^2
//! so the second-order-in-time splitting never masks the fourth-order
//! stencils. The shift integrator is probed by plain step halving and
//! the periodic stage by doubling its mode count (the error there sits
//! at the spectral floor once resolved).

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use shocklab_core::flux::ShockSetup;
use shocklab_core::fullline::{solve_perturbation, AnsatzSupplier, RunOptions};
use shocklab_core::periodic::{solve_periodic, PeriodicParams};
use shocklab_core::profile::{solve_profile, ProfileOptions};
use shocklab_core::shift::{integrate_shift, ShiftOde, ShiftOdeOptions};

use crate::config::ScenarioConfig;
use crate::scenario::make_initial_data;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub levels: usize,
    pub profile_residuals: Vec<f64>,
    pub profile_order: f64,
    pub periodic_floor: f64,
    pub eta_diffs: Vec<f64>,
    pub eta_order: f64,
    pub v_diffs: Vec<f64>,
    pub v_order: f64,
    /// Every refinement sequence decreased monotonically.
    pub monotone: bool,
}

/// A scaled-down scenario suitable for refinement sweeps.
pub fn study_config() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::reference();
    cfg.grid.half_width = 40.0;
    cfg.grid.n = 1024;
    cfg.grid.profile_half_width = 50.0;
    cfg.grid.profile_n = 2048;
    cfg.time.t_end = 5.0;
    cfg.time.dt = 0.02;
    cfg.time.dt_out = 0.5;
    cfg.time.periodic_dt = 0.005;
    cfg.time.periodic_dt_out = 0.025;
    cfg.time.shift_dt = 0.5;
    cfg.field_dump_times = vec![];
    cfg
}

fn mean_log2_ratio(seq: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut n = 0;
    for w in seq.windows(2) {
        acc += (w[0] / w[1]).log2();
        n += 1;
    }
    acc / n as f64
}

fn is_decreasing(seq: &[f64]) -> bool {
    seq.windows(2).all(|w| w[1] < w[0])
}

pub fn convergence_study(config: &ScenarioConfig, levels: usize) -> Result<StudyReport> {
    if levels < 3 {
        bail!("a refinement study needs at least 3 levels");
    }
    config.validate()?;
    let setup = ShockSetup::new(config.flux.build(), config.u_l, config.u_r, config.mu, config.gamma)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    // profile residual per table refinement
    let mut profile_residuals = Vec::new();
    for k in 0..levels {
        let table = solve_profile(
            &setup,
            &ProfileOptions {
                half_width: config.grid.profile_half_width,
                n: config.grid.profile_n << k,
                ..Default::default()
            },
        )?;
        profile_residuals.push(table.max_residual);
    }
    let profile_order = mean_log2_ratio(&profile_residuals);

    // one well-resolved profile serves every later stage
    let profile = solve_profile(
        &setup,
        &ProfileOptions {
            half_width: config.grid.profile_half_width,
            n: config.grid.profile_n << (levels - 1),
            ..Default::default()
        },
    )?;
    let data_probe = make_initial_data(config, &profile)?;
    let t_end = config.time.t_end;

    // periodic spectral floor: doubling the mode count
    let run_cell = |m: usize| -> Result<shocklab_core::periodic::PeriodicHistory> {
        let side = crate::scenario::ResolvedSide {
            period: data_probe.left.period,
            m,
            modes: data_probe.left.modes.clone(),
        };
        let params = PeriodicParams {
            flux: setup.flux.clone(),
            mu: setup.mu,
            gamma: setup.gamma,
            s: setup.s,
            period: side.period,
            m,
            dt: config.time.periodic_dt,
        };
        Ok(solve_periodic(&params, setup.u_l, &side.cell_samples(), t_end, config.time.periodic_dt_out)?)
    };
    let cell_a = run_cell(data_probe.left.m)?;
    let cell_b = run_cell(2 * data_probe.left.m)?;
    let mut periodic_floor = 0.0f64;
    for i in 0..7 {
        let x = -3.0 + i as f64;
        periodic_floor =
            periodic_floor.max((cell_a.eval_at(t_end, x, 0) - cell_b.eval_at(t_end, x, 0)).abs());
    }

    // shared far fields for the shift and full-line sweeps
    let make_params = |period: f64, m: usize| PeriodicParams {
        flux: setup.flux.clone(),
        mu: setup.mu,
        gamma: setup.gamma,
        s: setup.s,
        period,
        m,
        dt: config.time.periodic_dt,
    };
    let hist_l = solve_periodic(
        &make_params(data_probe.left.period, data_probe.left.m),
        setup.u_l,
        &data_probe.left.cell_samples(),
        t_end,
        config.time.periodic_dt_out,
    )?;
    let hist_r = solve_periodic(
        &make_params(data_probe.right.period, data_probe.right.m),
        setup.u_r,
        &data_probe.right.cell_samples(),
        t_end,
        config.time.periodic_dt_out,
    )?;

    // shift integrator order by step halving
    let ode = ShiftOde::new(
        &profile,
        &hist_l,
        &hist_r,
        &ShiftOdeOptions {
            quad_half_width: config.tolerances.eta_margin + 28.0 / profile.sigma0,
            quad_step: config.tolerances.quad_step,
        },
    );
    let mut eta_ends = Vec::new();
    for k in 0..=levels {
        let dt = config.time.shift_dt / (1 << k) as f64;
        let traj = integrate_shift(&ode, data_probe.eta0, t_end, dt, data_probe.delta)?;
        eta_ends.push(*traj.eta.last().unwrap());
    }
    let eta_diffs: Vec<f64> = eta_ends.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let eta_order = mean_log2_ratio(&eta_diffs);

    // full-line spatial order: n doubles, dt quarters
    let theta_ref = profile.setup.gamma * (2.0 * std::f64::consts::PI / data_probe.left.period).powi(2);
    let constants = profile.decay_constants(config.constants.alpha, theta_ref)?;
    let mut finals: Vec<Vec<f64>> = Vec::new();
    for k in 0..levels {
        let mut level_cfg = config.clone();
        level_cfg.grid.n = config.grid.n << k;
        let data = make_initial_data(&level_cfg, &profile)?;
        let traj = integrate_shift(&ode, data.eta0, t_end, config.time.shift_dt / 4.0, data.delta)?;
        let supplier = AnsatzSupplier::new(&data.grid, &profile, &hist_l, &hist_r, &traj);
        let v0: Vec<f64> = data
            .grid
            .nodes()
            .iter()
            .zip(&data.u0)
            .map(|(&x, &u)| {
                let g = profile.eval_g(0, x - data.eta0);
                let ul0 = setup.u_l + data.left.eval(x);
                let ur0 = setup.u_r + data.right.eval(x);
                u - (ul0 * g + ur0 * (1.0 - g))
            })
            .collect();
        let run = solve_perturbation(
            &data.grid,
            &profile,
            &supplier,
            &v0,
            &RunOptions {
                t_end,
                dt: config.time.dt / (1 << (2 * k)) as f64,
                dt_out: t_end,
                alpha: constants.alpha,
                beta_weight: constants.beta_weight,
                xi_star_shifted: constants.xi_star + traj.eta_inf_ode,
                eta_inf: traj.eta_inf_ode,
                theta: theta_ref,
                field_dump_times: vec![],
            },
        )
        .context("full-line study level")?;
        finals.push(run.v_final);
    }
    let mut v_diffs = Vec::new();
    for k in 0..levels - 1 {
        let coarse = &finals[k];
        let fine = &finals[k + 1];
        let mut worst = 0.0f64;
        for (j, c) in coarse.iter().enumerate() {
            worst = worst.max((c - fine[2 * j]).abs());
        }
        v_diffs.push(worst);
    }
    let v_order = mean_log2_ratio(&v_diffs);

    let monotone = is_decreasing(&profile_residuals) && is_decreasing(&eta_diffs) && is_decreasing(&v_diffs);
    Ok(StudyReport {
        levels,
        profile_residuals,
        profile_order,
        periodic_floor,
        eta_diffs,
        eta_order,
        v_diffs,
        v_order,
        monotone,
    })
}
