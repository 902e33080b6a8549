//! Structural properties of the profile construction.

use shocklab_core::flux::{FluxModel, ShockSetup};
use shocklab_core::profile::{linear_rates, solve_profile, ProfileOptions};

fn reference_setup() -> ShockSetup {
    ShockSetup::new(FluxModel::Burgers, 1.0, -1.0, 0.1, 1.0).unwrap()
}

#[test]
fn shift_covariance_of_the_anchor() {
    // the profile is unique up to a shift: moving the anchor by delta
    // translates the whole table
    let setup = reference_setup();
    let base = solve_profile(&setup, &ProfileOptions::default()).unwrap();
    let delta = 1.37;
    let moved = solve_profile(
        &setup,
        &ProfileOptions {
            anchor_offset: delta,
            ..Default::default()
        },
    )
    .unwrap();
    let mut worst = 0.0f64;
    for xi in [-8.0, -3.3, -0.4, 0.0, 1.9, 6.6] {
        worst = worst.max((moved.eval_phi(0, xi + delta) - base.eval_phi(0, xi)).abs());
    }
    assert!(worst < 1e-10, "shift covariance violated by {worst}");
}

#[test]
fn residual_drops_at_fourth_order_under_refinement() {
    let setup = reference_setup();
    let coarse = solve_profile(
        &setup,
        &ProfileOptions {
            half_width: 25.0,
            n: 1024,
            ..Default::default()
        },
    )
    .unwrap();
    let fine = solve_profile(
        &setup,
        &ProfileOptions {
            half_width: 25.0,
            n: 2048,
            ..Default::default()
        },
    )
    .unwrap();
    let ratio = coarse.max_residual / fine.max_residual;
    // halving h must gain at least 2^(accuracy - 0.5)
    assert!(
        ratio >= 2.0f64.powf(3.5),
        "refinement ratio {ratio} (coarse {}, fine {})",
        coarse.max_residual,
        fine.max_residual
    );
}

#[test]
fn far_left_log_fit_matches_slow_rate() {
    let setup = reference_setup();
    let table = solve_profile(&setup, &ProfileOptions::default()).unwrap();
    let (lam_l, _) = linear_rates(&setup).unwrap();
    // fit log(u_l - phi) over the far-left third
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 0..=table.grid.n {
        let xi = table.grid.node(j);
        if xi <= -table.grid.half_width / 3.0 {
            let gap = setup.u_l - table.phi[0][j];
            if gap > 1e-280 {
                xs.push(xi);
                ys.push(gap.ln());
            }
        }
    }
    let fit = shocklab_core::fit::fit_line(&xs, &ys).unwrap();
    assert!(
        (fit.slope - lam_l).abs() <= 0.05 * lam_l,
        "fitted rate {} vs slow rate {lam_l}",
        fit.slope
    );
}

#[test]
fn g_is_an_affine_rescale_of_phi() {
    let setup = reference_setup();
    let table = solve_profile(&setup, &ProfileOptions::default()).unwrap();
    let g = table.g_table(0);
    let mut worst = 0.0f64;
    for j in 0..=table.grid.n {
        let recon = setup.u_r + setup.jump() * g[j];
        worst = worst.max((table.phi[0][j] - recon).abs());
    }
    assert!(worst <= 1e-14, "affine identity violated by {worst}");
}

#[test]
fn endpoint_gaps_within_tail_tolerance() {
    let setup = reference_setup();
    let table = solve_profile(&setup, &ProfileOptions::default()).unwrap();
    let tol_end = 10.0 * (-table.sigma0 * table.grid.half_width).exp();
    let g_left = table.eval_g(0, -table.grid.half_width);
    let g_right = table.eval_g(0, table.grid.half_width);
    assert!(g_left >= 1.0 - tol_end);
    assert!(g_right <= tol_end);
}

#[test]
fn tail_constant_stable_under_grid_halving() {
    let setup = reference_setup();
    let coarse = solve_profile(
        &setup,
        &ProfileOptions {
            n: 2048,
            ..Default::default()
        },
    )
    .unwrap();
    let fine = solve_profile(
        &setup,
        &ProfileOptions {
            n: 4096,
            ..Default::default()
        },
    )
    .unwrap();
    let a = coarse.verify_tail_bounds().unwrap();
    let b = fine.verify_tail_bounds().unwrap();
    for (x, y) in [
        (a.c_right, b.c_right),
        (a.c_left, b.c_left),
        (a.c_deriv[0], b.c_deriv[0]),
        (a.c_deriv[1], b.c_deriv[1]),
        (a.c_deriv[2], b.c_deriv[2]),
    ] {
        assert!((x - y).abs() <= 0.1 * y.abs(), "tail constant moved: {x} vs {y}");
    }
}

#[test]
fn quadratic_linear_flux_profile_translates_burgers() {
    // adding c u to the flux shifts the speed by c and leaves the shape
    let b = solve_profile(&reference_setup(), &ProfileOptions::default()).unwrap();
    let setup = ShockSetup::new(FluxModel::QuadraticLinear { c: 0.7 }, 1.0, -1.0, 0.1, 1.0).unwrap();
    assert!((setup.s - 0.7).abs() < 1e-14);
    let q = solve_profile(&setup, &ProfileOptions::default()).unwrap();
    let mut worst = 0.0f64;
    for xi in [-5.0, -1.2, 0.0, 2.4, 7.7] {
        worst = worst.max((q.eval_phi(0, xi) - b.eval_phi(0, xi)).abs());
    }
    assert!(worst < 1e-9, "profiles differ by {worst}");
}

#[test]
fn csv_export_carries_header_and_metadata() {
    let setup = reference_setup();
    let table = solve_profile(
        &setup,
        &ProfileOptions {
            n: 512,
            ..Default::default()
        },
    )
    .unwrap();
    let csv = table.to_csv();
    let mut lines = csv.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with("# sigma0="));
    assert!(meta.contains("xi_star=") && meta.contains("s="));
    assert_eq!(lines.next().unwrap(), "xi,phi,dphi,g,dg,d2g,d3g");
    assert_eq!(csv.lines().count(), 2 + 513);
}
