//! Shift ODE against independent oracles: high-resolution Romberg for the
//! right-hand side and step-halving for the integrator order.

mod common;

use shocklab_core::flux::{FluxModel, ShockSetup};
use shocklab_core::periodic::{measure_decay, solve_periodic, PeriodicHistory, PeriodicParams};
use shocklab_core::profile::{solve_profile, ProfileOptions, ProfileTable};
use shocklab_core::shift::{integrate_shift, ShiftOde};

struct Fixture {
    profile: ProfileTable,
    hist_l: PeriodicHistory,
    hist_r: PeriodicHistory,
}

fn fixture(eps: f64, t_end: f64, dt_out: f64) -> Fixture {
    let setup = ShockSetup::new(FluxModel::Burgers, 1.0, -1.0, 0.1, 1.0).unwrap();
    let profile = solve_profile(
        &setup,
        &ProfileOptions {
            half_width: 60.0,
            n: 8192,
            ..Default::default()
        },
    )
    .unwrap();
    let p_l = 2.0 * std::f64::consts::PI;
    let p_r = std::f64::consts::PI * std::f64::consts::SQRT_2;
    let make = |period: f64, u_bar: f64, phase: f64| {
        let m = 64;
        let w0: Vec<f64> = (0..m)
            .map(|j| {
                let x = j as f64 * period / m as f64;
                eps * (2.0 * std::f64::consts::PI / period * x + phase).sin()
            })
            .collect();
        let params = PeriodicParams {
            flux: setup.flux.clone(),
            mu: setup.mu,
            gamma: setup.gamma,
            s: setup.s,
            period,
            m,
            dt: 0.005,
        };
        solve_periodic(&params, u_bar, &w0, t_end, dt_out).unwrap()
    };
    Fixture {
        hist_l: make(p_l, setup.u_l, 0.0),
        hist_r: make(p_r, setup.u_r, 1.1),
        profile,
    }
}

#[test]
fn rhs_matches_romberg_of_the_defining_integrals() {
    let fx = fixture(0.02, 0.5, 0.01);
    let profile = &fx.profile;
    let ode = ShiftOde::new(profile, &fx.hist_l, &fx.hist_r, &ShiftOde::default_options(profile, 2.0));
    let setup = &profile.setup;
    let l_q = 2.0 + 28.0 / profile.sigma0;
    for (t, eta) in [(0.0, 0.0), (0.31, 0.17)] {
        // the defining integrals, with the bare g'' and g''' weights
        let cl = fx.hist_l.coeffs_at(t);
        let cr = fx.hist_r.coeffs_at(t);
        let kl = fx.hist_l.kappa();
        let kr = fx.hist_r.kappa();
        let ul = |x: f64| shocklab_core::spectral::eval_series_at(&cl, kl, x, 0);
        let ur = |x: f64| shocklab_core::spectral::eval_series_at(&cr, kr, x, 0);
        let numerand = |x: f64| {
            let du = ul(x) - ur(x);
            let df = setup.flux.eval(ul(x)) - setup.flux.eval(ur(x));
            setup.gamma * du * profile.eval_g(2, x - eta)
                + setup.mu * du * profile.eval_g(3, x - eta)
                + df * profile.eval_g(1, x - eta)
        };
        let denand = |x: f64| (ul(x) - ur(x)) * profile.eval_g(1, x - eta);
        let num = common::romberg(&numerand, -l_q, l_q, 16, 1e-13);
        let den = common::romberg(&denand, -l_q, l_q, 16, 1e-13);
        let brute = num / den - setup.s;
        let fast = ode.rhs(t, eta).unwrap();
        assert!(
            (fast - brute).abs() <= 1e-9,
            "t = {t}, eta = {eta}: rhs {fast} vs Romberg {brute}"
        );
    }
}

#[test]
fn integrator_is_fourth_order_in_dt() {
    let fx = fixture(0.02, 8.0, 0.005);
    let ode = ShiftOde::new(
        &fx.profile,
        &fx.hist_l,
        &fx.hist_r,
        &ShiftOde::default_options(&fx.profile, 2.0),
    );
    let eta_end = |dt: f64| {
        integrate_shift(&ode, 0.0, 8.0, dt, 0.02)
            .unwrap()
            .eta
            .last()
            .copied()
            .unwrap()
    };
    let coarse = eta_end(0.4);
    let mid = eta_end(0.2);
    let fine = eta_end(0.1);
    let e1 = (coarse - mid).abs();
    let e2 = (mid - fine).abs();
    let order = (e1 / e2).log2();
    assert!(order > 3.4, "observed order {order} (errors {e1}, {e2})");
    // dt halving at practical resolution barely moves the answer
    let very_fine = eta_end(0.05);
    assert!((fine - very_fine).abs() <= 1e-8, "dt sensitivity {}", (fine - very_fine).abs());
}

#[test]
fn trajectory_rhs_is_reproducible_and_denominator_healthy() {
    let fx = fixture(0.02, 6.0, 0.01);
    let profile = &fx.profile;
    let ode = ShiftOde::new(profile, &fx.hist_l, &fx.hist_r, &ShiftOde::default_options(profile, 2.0));
    let traj = integrate_shift(&ode, 0.0, 6.0, 0.1, 0.02).unwrap();
    for (i, t) in traj.times.iter().enumerate().step_by(7) {
        let again = ode.rhs(*t, traj.eta[i]).unwrap();
        assert!(
            (again - traj.eta_dot[i]).abs() <= 1e-13,
            "stored eta' diverges from the recomputed rhs at t = {t}"
        );
    }
}

#[test]
fn shift_decay_tracks_the_far_field_rate() {
    let fx = fixture(0.02, 14.0, 0.01);
    let ode = ShiftOde::new(
        &fx.profile,
        &fx.hist_l,
        &fx.hist_r,
        &ShiftOde::default_options(&fx.profile, 2.0),
    );
    let traj = integrate_shift(&ode, 0.0, 14.0, 0.1, 0.02).unwrap();
    let theta_l = measure_decay(&fx.hist_l, 0).unwrap().theta_meas;
    let theta_r = measure_decay(&fx.hist_r, 0).unwrap().theta_meas;
    let theta = theta_l.min(theta_r);
    let fit = traj.decay.expect("decay fit must exist for a perturbed run");
    assert!(
        (fit.theta - theta).abs() <= 0.2 * theta,
        "shift decay {} vs far-field rate {theta}",
        fit.theta
    );
    assert!(fit.c > 0.0);
}
