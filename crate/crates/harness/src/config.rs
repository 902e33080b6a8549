//! Scenario configuration: one JSON document drives the whole pipeline.
//!
//! The config hash is the SHA-256 of the canonical serialization
//! (recursively sorted keys, shortest-roundtrip float formatting), so a
//! rerun of an identical document lands in the same artifact identity.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shocklab_core::flux::FluxModel;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FluxConfig {
    Burgers,
    QuadraticLinear { c: f64 },
    Polynomial { coeffs: Vec<f64> },
}

impl FluxConfig {
    pub fn build(&self) -> FluxModel {
        match self {
            FluxConfig::Burgers => FluxModel::Burgers,
            FluxConfig::QuadraticLinear { c } => FluxModel::QuadraticLinear { c: *c },
            FluxConfig::Polynomial { coeffs } => FluxModel::Polynomial { coeffs: coeffs.clone() },
        }
    }
}

/// One sinusoidal component of a periodic perturbation; integer
/// wavenumbers keep the cell mean at zero by construction.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModeSpec {
    pub amplitude: f64,
    pub k: u32,
    pub phase: f64,
}

/// Optional deterministic random mode set, drawn from `seed`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RandomModes {
    pub count: u32,
    pub amplitude: f64,
    pub max_k: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SideConfig {
    pub period: f64,
    /// Collocation modes for this cell.
    pub m: usize,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
    #[serde(default)]
    pub random_modes: Option<RandomModes>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BumpConfig {
    pub center: f64,
    pub width: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridConfig {
    pub half_width: f64,
    pub n: usize,
    pub profile_half_width: f64,
    pub profile_n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    /// Full-line step.
    pub dt: f64,
    /// Snapshot spacing for diagnostics.
    pub dt_out: f64,
    pub periodic_dt: f64,
    pub periodic_dt_out: f64,
    pub shift_dt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConstantsConfig {
    /// Weight exponent for the exponential norms.
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    /// Required relative decay of the flux defect before its tail fit.
    pub tail_tol: f64,
    /// Shift magnitude the quadrature window is sized for.
    pub eta_margin: f64,
    /// Shift quadrature spacing.
    pub quad_step: f64,
    /// Cap on max_i ||w0i||_{H1(0,p_i)} relative to the jump.
    pub delta_cap_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tail_tol: 1e-2,
            eta_margin: 2.0,
            quad_step: 0.02,
            delta_cap_factor: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScenarioConfig {
    pub flux: FluxConfig,
    pub u_l: f64,
    pub u_r: f64,
    pub mu: f64,
    pub gamma: f64,
    pub left: SideConfig,
    pub right: SideConfig,
    #[serde(default)]
    pub bump: Option<BumpConfig>,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Times at which full field slices are exported.
    #[serde(default)]
    pub field_dump_times: Vec<f64>,
}

impl ScenarioConfig {
    /// The reference scenario: Burgers flux, symmetric states,
    /// incommensurate periods on the two sides, small single-mode
    /// perturbations plus a compact bump.
    pub fn reference() -> Self {
        Self {
            flux: FluxConfig::Burgers,
            u_l: 1.0,
            u_r: -1.0,
            mu: 0.1,
            gamma: 1.0,
            left: SideConfig {
                period: 2.0 * std::f64::consts::PI,
                m: 64,
                modes: vec![ModeSpec {
                    amplitude: 0.02,
                    k: 1,
                    phase: 0.0,
                }],
                random_modes: None,
            },
            right: SideConfig {
                period: std::f64::consts::PI * std::f64::consts::SQRT_2,
                m: 64,
                modes: vec![ModeSpec {
                    amplitude: 0.02,
                    k: 1,
                    phase: 1.1,
                }],
                random_modes: None,
            },
            bump: Some(BumpConfig {
                center: 0.0,
                width: 2.0,
                mass: 0.01,
            }),
            grid: GridConfig {
                half_width: 80.0,
                n: 8192,
                profile_half_width: 100.0,
                profile_n: 16384,
            },
            time: TimeConfig {
                t_end: 40.0,
                dt: 0.005,
                dt_out: 0.1,
                periodic_dt: 0.005,
                periodic_dt_out: 0.02,
                shift_dt: 0.1,
            },
            constants: ConstantsConfig { alpha: 0.3 },
            tolerances: Tolerances::default(),
            seed: 0,
            field_dump_times: vec![0.0, 10.0, 40.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.u_l <= self.u_r {
            bail!("need u_l > u_r, got ({}, {})", self.u_l, self.u_r);
        }
        if self.mu <= 0.0 || self.gamma <= 0.0 {
            bail!("mu and gamma must be positive");
        }
        for (name, side) in [("left", &self.left), ("right", &self.right)] {
            if side.period <= 0.0 {
                bail!("{name} period must be positive");
            }
            if side.m < 8 || side.m % 2 != 0 {
                bail!("{name} collocation count must be even and >= 8");
            }
            for mode in &side.modes {
                if mode.k == 0 {
                    bail!("{name} perturbation modes need wavenumber k >= 1 (zero cell mean)");
                }
            }
        }
        if self.grid.n % 2 != 0 {
            bail!("grid interval count must be even (a node at the origin)");
        }
        if self.grid.profile_half_width < self.grid.half_width + self.tolerances.eta_margin {
            bail!(
                "profile table must cover the grid plus the shift margin: {} < {} + {}",
                self.grid.profile_half_width,
                self.grid.half_width,
                self.tolerances.eta_margin
            );
        }
        if self.constants.alpha <= 0.0 {
            bail!("alpha must be positive");
        }
        if self.constants.alpha * (self.grid.half_width + self.tolerances.eta_margin) > 60.0 {
            bail!("alpha (L + eta margin) exceeds the weight overflow guard");
        }
        Ok(())
    }

    pub fn canonical_json(&self) -> Result<String> {
        // serde_json maps are BTree-backed: object keys come out sorted
        let value = serde_json::to_value(self).context("serializing config")?;
        serde_json::to_string(&value).context("canonicalizing config")
    }

    pub fn hash(&self) -> Result<String> {
        let canon = self.canonical_json()?;
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        Ok(format!("{:x}", hasher.finalize()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).context("parsing config JSON")?;
        cfg.validate()?;
        Ok(cfg)
    }
}
