use std::path::Path;

use nalgebra::{DMatrix, Matrix3};
use serde::Deserialize;

use super::SimError;
use crate::bearing::BearingConfig;
use crate::eqf::GainSchedule;
use crate::lie::SymPosDef;

/// Experiment configuration. Defaults reproduce the reference protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// Final time T.
    pub duration: f64,
    pub trials: usize,
    pub seed: u64,
    /// Std of the initial perturbation μ₀.
    pub sigma0: f64,
    /// Gyro noise std (rad/s).
    pub sigma_u: f64,
    /// Magnetometer noise std.
    pub sigma_y: f64,
    pub c_m: f64,
    pub ekf_r_virtual: f64,
    /// Per-sample magnetometer variance of the EKF; defaults to `σ_y²`.
    pub ekf_r_meas: Option<f64>,
    /// `M_ε = m_eps · I₂`.
    pub m_eps: f64,
    /// `N_ε = n_eps · I₃`.
    pub n_eps: f64,
    /// `Σ₀ = sigma0_gain · I₂`. Must stay below `N/dt` for the explicit
    /// Riccati step to keep Σ positive definite.
    pub sigma0_gain: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            duration: 5.0,
            trials: 500,
            seed: 0,
            sigma0: 0.5,
            sigma_u: 0.01,
            sigma_y: 0.05,
            c_m: 1.0,
            ekf_r_virtual: 1e-4,
            ekf_r_meas: None,
            m_eps: 1e-3,
            n_eps: 0.0,
            sigma0_gain: 0.1,
        }
    }
}

fn nonneg(name: &str, v: f64) -> Result<(), SimError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::InvalidConfig(format!("{name} must be finite and non-negative, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<(), SimError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::InvalidConfig(format!("{name} must be finite and positive, got {v}")))
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        positive("dt", self.dt)?;
        positive("duration", self.duration)?;
        if self.duration < self.dt {
            return Err(SimError::InvalidConfig(format!(
                "duration {} is shorter than one step of {}",
                self.duration, self.dt
            )));
        }
        if self.trials == 0 {
            return Err(SimError::InvalidConfig("trials must be at least 1".into()));
        }
        nonneg("sigma0", self.sigma0)?;
        nonneg("sigma_u", self.sigma_u)?;
        nonneg("sigma_y", self.sigma_y)?;
        positive("c_m", self.c_m)?;
        positive("ekf_r_virtual", self.ekf_r_virtual)?;
        if let Some(r) = self.ekf_r_meas {
            positive("ekf_r_meas", r)?;
        }
        nonneg("m_eps", self.m_eps)?;
        nonneg("n_eps", self.n_eps)?;
        positive("sigma0_gain", self.sigma0_gain)?;
        positive("output gain N", self.n_eps + self.sigma_y * self.sigma_y)?;
        Ok(())
    }

    /// Number of filter steps; the record has one more row.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn bearing(&self) -> Result<BearingConfig, SimError> {
        Ok(BearingConfig::new(self.c_m)?)
    }

    /// `Σ₀`, `M_ε`, `N_ε`, input intensity `σ_u² I₃`, output intensity
    /// `σ_y² I₃`.
    pub fn eqf_gains(&self) -> Result<GainSchedule, SimError> {
        let sigma0 = SymPosDef::scaled_identity(2, self.sigma0_gain);
        Ok(GainSchedule {
            sigma0,
            m_eps: DMatrix::identity(2, 2) * self.m_eps,
            n_eps: DMatrix::identity(3, 3) * self.n_eps,
            m_input: DMatrix::identity(3, 3) * self.sigma_u.powi(2),
            n_meas: DMatrix::identity(3, 3) * self.sigma_y.powi(2),
        })
    }

    /// The true initial uncertainty `σ₀² I₃`.
    pub fn ekf_p0(&self) -> Matrix3<f64> {
        Matrix3::identity() * (self.sigma0 * self.sigma0)
    }

    /// Process intensity `σ_u² I₃`, integrated as `P += dt Q`.
    pub fn ekf_q(&self) -> Matrix3<f64> {
        Matrix3::identity() * (self.sigma_u * self.sigma_u)
    }

    /// Per-sample measurement covariance, the true noise variance unless
    /// overridden.
    pub fn ekf_r_meas(&self) -> Matrix3<f64> {
        let r = self.ekf_r_meas.unwrap_or(self.sigma_y * self.sigma_y);
        Matrix3::identity() * r
    }

    /// Same gains, no injected noise.
    pub fn without_noise(&self) -> NoiseFree {
        NoiseFree(self.clone())
    }
}

/// A configuration whose noise is switched off while its gains are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseFree(pub SimConfig);

/// Key/value config file. Every field is optional and mirrors a CLI flag;
/// values given on the command line win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub sigma0: Option<f64>,
    #[serde(alias = "sigma_u")]
    pub sigma_u: Option<f64>,
    #[serde(alias = "sigma_y")]
    pub sigma_y: Option<f64>,
    #[serde(alias = "c_m")]
    pub c_m: Option<f64>,
    #[serde(alias = "ekf_r_virtual")]
    pub ekf_r_virtual: Option<f64>,
    #[serde(alias = "ekf_r_meas")]
    pub ekf_r_meas: Option<f64>,
    #[serde(alias = "m_eps")]
    pub m_eps: Option<f64>,
    #[serde(alias = "n_eps")]
    pub n_eps: Option<f64>,
    #[serde(alias = "sigma0_gain")]
    pub sigma0_gain: Option<f64>,
    pub out: Option<String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Overlay the file's values onto `cfg`.
    pub fn apply(&self, cfg: &mut SimConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(dt, duration, trials, seed, sigma0, sigma_u, sigma_y, c_m, ekf_r_virtual, m_eps, n_eps, sigma0_gain);
        if self.ekf_r_meas.is_some() {
            cfg.ekf_r_meas = self.ekf_r_meas;
        }
    }
}
