//! Initial-data construction from a scenario configuration.
//!
//! The initial line datum matches the periodic far-field states exactly
//! outside [-L/2, L/2]: the profile is spliced onto the constants by a
//! smooth cutoff whose transition stays inside that window, the two
//! periodic perturbations are cross-faded around the origin, and an
//! optional compact bump carries the mass defect. The initial shift is
//! then the root of the zero-total-mass relation.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shocklab_core::grid::LineGrid;
use shocklab_core::profile::ProfileTable;
use shocklab_core::shift::solve_initial_shift;

use crate::config::{ModeSpec, ScenarioConfig, SideConfig};

/// Smooth transition: 1 for x <= 0, 0 for x >= 1, C-infinity between.
fn smooth_step_down(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let b = |y: f64| (-1.0 / y).exp();
    b(1.0 - x) / (b(1.0 - x) + b(x))
}

/// C-infinity bump supported on |x - center| < width, of unit mass.
pub fn unit_bump(x: f64, center: f64, width: f64) -> f64 {
    let z = (x - center) / width;
    if z.abs() >= 1.0 {
        return 0.0;
    }
    const MASS: f64 = 0.443993816168079438; // integral of exp(-1/(1-z^2))
    (-1.0 / (1.0 - z * z)).exp() / (MASS * width)
}

/// All mode lists resolved (random modes drawn), ready to evaluate.
#[derive(Debug, Clone)]
pub struct ResolvedSide {
    pub period: f64,
    pub m: usize,
    pub modes: Vec<ModeSpec>,
}

impl ResolvedSide {
    pub fn eval(&self, x: f64) -> f64 {
        let kap = 2.0 * std::f64::consts::PI / self.period;
        self.modes
            .iter()
            .map(|md| md.amplitude * (md.k as f64 * kap * x + md.phase).sin())
            .sum()
    }

    /// Samples at the collocation nodes of the cell.
    pub fn cell_samples(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| self.eval(j as f64 * self.period / self.m as f64))
            .collect()
    }

    /// Exact H^1(0, p) norm of the zero-mean perturbation.
    pub fn h1_norm(&self) -> f64 {
        let kap = 2.0 * std::f64::consts::PI / self.period;
        let mut acc = 0.0;
        for md in &self.modes {
            let k = md.k as f64 * kap;
            acc += 0.5 * self.period * md.amplitude * md.amplitude * (1.0 + k * k);
        }
        acc.sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|m| m.amplitude == 0.0)
    }
}

fn resolve_side(side: &SideConfig, rng: &mut ChaCha8Rng) -> ResolvedSide {
    let mut modes = side.modes.clone();
    if let Some(rm) = &side.random_modes {
        for _ in 0..rm.count {
            modes.push(ModeSpec {
                amplitude: rm.amplitude * rng.gen_range(0.5..1.0),
                k: rng.gen_range(1..=rm.max_k.max(1)),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            });
        }
    }
    ResolvedSide {
        period: side.period,
        m: side.m,
        modes,
    }
}

pub struct InitialData {
    pub grid: LineGrid,
    pub u0: Vec<f64>,
    pub left: ResolvedSide,
    pub right: ResolvedSide,
    pub eta0: f64,
    /// max_i ||w0i||_{H1(0, p_i)}.
    pub delta: f64,
}

pub fn make_initial_data(config: &ScenarioConfig, profile: &ProfileTable) -> Result<InitialData> {
    let grid = LineGrid::new(config.grid.half_width, config.grid.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let left = resolve_side(&config.left, &mut rng);
    let right = resolve_side(&config.right, &mut rng);

    let delta = left.h1_norm().max(right.h1_norm());
    let cap = config.tolerances.delta_cap_factor * (config.u_l - config.u_r);
    if delta > cap {
        bail!(
            "perturbation H1 size {delta} exceeds the smallness cap {cap}; \
             raise delta_cap_factor only if you accept degraded fits"
        );
    }

    let half = grid.half_width;
    // profile-to-constant splice: u_l exactly left of -L/2, profile
    // inside [-3L/8, 3L/8], u_r exactly right of L/2
    let splice = |x: f64| -> f64 {
        let phi = profile.eval_phi(0, x);
        let chi_l = smooth_step_down((x + half / 2.0) / (half / 8.0));
        let chi_r = smooth_step_down((half / 2.0 - x) / (half / 8.0));
        phi + (config.u_l - phi) * chi_l + (config.u_r - phi) * chi_r
    };
    // cross-fade of the two periodic perturbations inside [-L/8, L/8]
    let fade = |x: f64| smooth_step_down((x + half / 8.0) / (half / 4.0));

    if let Some(b) = &config.bump {
        if b.center.abs() + b.width > half / 2.5 {
            bail!("bump support must stay inside the matching window");
        }
    }
    let u0: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| {
            let mut v = splice(x) + left.eval(x) * fade(x) + right.eval(x) * (1.0 - fade(x));
            if let Some(b) = &config.bump {
                v += b.mass * unit_bump(x, b.center, b.width);
            }
            v
        })
        .collect();

    let ul0 = |x: f64| config.u_l + left.eval(x);
    let ur0 = |x: f64| config.u_r + right.eval(x);
    let eta0 = solve_initial_shift(&u0, &grid, &ul0, &ur0, profile)?;

    Ok(InitialData {
        grid,
        u0,
        left,
        right,
        eta0,
        delta,
    })
}
