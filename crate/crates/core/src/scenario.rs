//! Study configuration, entity placement, path loss and noise powers.
//!
//! All powers are carried in watts. Decibel quantities appear only as
//! configuration inputs (`*_db`, `*_dbm_hz`) and are converted on access.
//!
//! Path loss follows the 3GPP TR 38.901 UMi street-canyon NLOS formula
//! `PL = 22.4 + 35.3 log10(d_3D) + 21.3 log10(f_GHz) - 0.3 (h_UT - 1.5)`
//! with distances clamped to at least 1 m. The BS-to-repeater links may use
//! the UMi street-canyon LOS formula instead.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{IsacError, Result};

pub type Position = Vector3<f64>;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Sensing precoder construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderMode {
    /// Beam steered at the target.
    TargetCentric,
    /// Target beam projected onto the nullspace of the users' channels.
    CommCentric,
    /// Target beam projected away from the BS-to-repeater channel.
    RepeaterNull,
}

/// How `repeater_gain_db` maps to the amplitude `|nu|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainReference {
    /// `|nu|^2 = 10^(G/10)`.
    Absolute,
    /// `|nu|^2` is chosen so that the forwarded repeater noise arriving at
    /// each receive-BS antenna sits `G` dB above the BS noise floor:
    /// `|nu|^2 sigma_R^2 beta_rep_rx = 10^(G/10) sigma_BS^2`.
    ReceiverNoiseRise,
}

/// Path-loss variant for a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathlossModel {
    UmiNlos,
    UmiLos,
}

impl PathlossModel {
    /// Linear power gain between a mast at height `h_bs_m` and a terminal at
    /// `h_ut_m`, `distance_m` apart in 3D.
    pub fn linear(
        self,
        distance_m: f64,
        carrier_ghz: f64,
        h_bs_m: f64,
        h_ut_m: f64,
    ) -> Result<f64> {
        match self {
            PathlossModel::UmiNlos => pathloss_linear(distance_m, carrier_ghz, h_ut_m),
            PathlossModel::UmiLos => Ok(db_to_linear(-pathloss_los_db(
                distance_m,
                carrier_ghz,
                h_bs_m,
                h_ut_m,
            )?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolAlphabet {
    /// i.i.d. CN(0, 1).
    Gaussian,
    /// Unit-modulus QPSK, uniform over the four points.
    Qpsk,
}

/// Every physical and algorithmic parameter of one study.
///
/// Deserialized from a flat TOML file; every key is optional and falls back
/// to the value in [`ScenarioConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_tx_antennas: usize,
    pub n_rx_antennas: usize,
    pub n_users: usize,
    /// Channel uses per sensing slot.
    pub slot_length: usize,
    pub tx_power_watt: f64,
    /// Fraction of the transmit power spent on the sensing stream.
    pub sensing_power_fraction: f64,
    /// Per-user fractions. Empty means an equal split of what sensing leaves.
    pub user_power_fractions: Vec<f64>,
    pub repeater_enabled: bool,
    pub repeater_gain_db: f64,
    pub repeater_phase_rad: f64,
    pub repeater_gain_reference: GainReference,
    /// RCS variance in m^2.
    pub rcs_variance: f64,
    /// RCS variance assumed by the detector. Defaults to the true variance;
    /// set it to study a mismatched prior.
    pub detector_rcs_variance: Option<f64>,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub noise_density_dbm_hz: f64,
    /// Receive-BS noise figure.
    pub noise_figure_db: f64,
    pub ue_noise_figure_db: f64,
    /// Overrides for the derived noise powers.
    pub bs_noise_power_watt: Option<f64>,
    pub ue_noise_power_watt: Option<f64>,
    /// Defaults to the receive-BS noise power.
    pub repeater_noise_power_watt: Option<f64>,
    /// Per-entry variance of the residual inter-BS channel error.
    pub residual_interbs_power: f64,
    /// Path loss of the transmit-BS-to-repeater and repeater-to-receive-BS
    /// links.
    pub repeater_link_pathloss: PathlossModel,
    /// Linear scaling of the clutter path gain.
    pub clutter_suppression: f64,
    /// Assume the direct repeater-to-BS leakage is pre-cancelled. When off,
    /// it is kept in the effective clutter and the clutter covariance grows
    /// by the matching rank-one term.
    pub cancel_repeater_leakage: bool,
    /// Defaults to `K sigma_UE^2 / rho`.
    pub zf_regularizer: Option<f64>,
    pub pfa_target: f64,
    pub mc_trials: usize,
    pub calibration_trials: usize,
    pub master_seed: u64,
    pub precoder_mode: PrecoderMode,
    /// Conjugate the channels when building precoders so that beams add
    /// coherently under the `f^T x` reception model.
    pub conjugate_convention: bool,
    /// Count the desired stream in the SINR interference sum as well.
    pub literal_sinr_interference: bool,
    pub symbol_alphabet: SymbolAlphabet,

    /// Horizontal positions in meters.
    pub tx_bs_xy: [f64; 2],
    pub rx_bs_xy: [f64; 2],
    pub hotspot_xy: [f64; 2],
    pub bs_height_m: f64,
    pub repeater_height_m: f64,
    pub user_height_m: f64,
    pub target_height_m: f64,
    /// Users are dropped uniformly in this disc around the transmit BS.
    pub service_radius_m: f64,
    /// The repeater is dropped uniformly in this disc around the hotspot.
    pub repeater_radius_m: f64,

    /// RCS variances swept by the detection study.
    pub rcs_grid: Vec<f64>,
    /// Repeater gains compared against the no-repeater baseline.
    pub pod_repeater_gains_db: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_tx_antennas: 8,
            n_rx_antennas: 8,
            n_users: 10,
            slot_length: 50,
            tx_power_watt: 1.0,
            sensing_power_fraction: 0.5,
            user_power_fractions: Vec::new(),
            repeater_enabled: true,
            repeater_gain_db: 20.0,
            repeater_phase_rad: 0.0,
            repeater_gain_reference: GainReference::ReceiverNoiseRise,
            rcs_variance: 1.0,
            detector_rcs_variance: None,
            carrier_ghz: 1.9,
            bandwidth_hz: 20e6,
            noise_density_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            ue_noise_figure_db: 9.0,
            bs_noise_power_watt: None,
            ue_noise_power_watt: None,
            repeater_noise_power_watt: None,
            residual_interbs_power: 1e-13,
            repeater_link_pathloss: PathlossModel::UmiLos,
            clutter_suppression: 1.0,
            cancel_repeater_leakage: true,
            zf_regularizer: None,
            pfa_target: 0.01,
            mc_trials: 2000,
            calibration_trials: 2000,
            master_seed: 1,
            precoder_mode: PrecoderMode::TargetCentric,
            conjugate_convention: true,
            literal_sinr_interference: false,
            symbol_alphabet: SymbolAlphabet::Gaussian,
            tx_bs_xy: [0.0, 0.0],
            rx_bs_xy: [500.0, 0.0],
            hotspot_xy: [250.0, 200.0],
            bs_height_m: 25.0,
            repeater_height_m: 10.0,
            user_height_m: 1.5,
            target_height_m: 1.5,
            service_radius_m: 200.0,
            repeater_radius_m: 100.0,
            rcs_grid: vec![0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0],
            pod_repeater_gains_db: vec![20.0],
        }
    }
}

/// Power fractions `pi_1..pi_K` and `pi_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSplit {
    pub users: Vec<f64>,
    pub sensing: f64,
}

impl PowerSplit {
    pub fn new(users: Vec<f64>, sensing: f64) -> Result<Self> {
        if users
            .iter()
            .chain(std::iter::once(&sensing))
            .any(|p| !(*p >= 0.0) || !p.is_finite())
        {
            return Err(IsacError::Config(
                "power fractions must be finite and nonnegative".into(),
            ));
        }
        let split = Self { users, sensing };
        let total = split.total();
        if total > 1.0 + 1e-12 {
            return Err(IsacError::PowerBudget(total));
        }
        Ok(split)
    }

    pub fn total(&self) -> f64 {
        self.users.iter().sum::<f64>() + self.sensing
    }
}

/// Noise powers in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevels {
    pub bs: f64,
    pub repeater: f64,
    pub ue: f64,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| IsacError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| IsacError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            IsacError::Config(msg) => IsacError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: &str| Err(IsacError::Config(m.to_string()));
        if self.n_tx_antennas == 0 || self.n_rx_antennas == 0 {
            return cfg_err("antenna counts must be positive");
        }
        if self.slot_length == 0 {
            return cfg_err("slot_length must be at least 1");
        }
        if !(self.tx_power_watt > 0.0) {
            return cfg_err("tx_power_watt must be positive");
        }
        if !(self.rcs_variance > 0.0) {
            return cfg_err("rcs_variance must be positive");
        }
        if matches!(self.detector_rcs_variance, Some(v) if !(v > 0.0)) {
            return cfg_err("detector_rcs_variance must be positive");
        }
        if !(self.carrier_ghz > 0.0) || !(self.bandwidth_hz > 0.0) {
            return cfg_err("carrier_ghz and bandwidth_hz must be positive");
        }
        if !(self.pfa_target > 0.0 && self.pfa_target < 1.0) {
            return cfg_err("pfa_target must lie in (0, 1)");
        }
        if self.mc_trials == 0 || self.calibration_trials == 0 {
            return cfg_err("trial counts must be positive");
        }
        if !(self.residual_interbs_power >= 0.0) || !(self.clutter_suppression >= 0.0) {
            return cfg_err("residual_interbs_power and clutter_suppression must be nonnegative");
        }
        if let Some(z) = self.zf_regularizer {
            if !(z > 0.0) {
                return cfg_err("zf_regularizer must be positive");
            }
        }
        for p in [
            self.bs_noise_power_watt,
            self.ue_noise_power_watt,
            self.repeater_noise_power_watt,
        ]
        .into_iter()
        .flatten()
        {
            if !(p > 0.0) {
                return cfg_err("noise power overrides must be positive");
            }
        }
        if !self.user_power_fractions.is_empty() && self.user_power_fractions.len() != self.n_users
        {
            return cfg_err("user_power_fractions must be empty or have one entry per user");
        }
        if !(self.service_radius_m >= 0.0) || !(self.repeater_radius_m >= 0.0) {
            return cfg_err("disc radii must be nonnegative");
        }
        if self.rcs_grid.iter().any(|s| !(*s > 0.0)) {
            return cfg_err("rcs_grid entries must be positive");
        }
        self.power_split()?;
        Ok(())
    }

    /// Power fractions with the equal-split default applied.
    pub fn power_split(&self) -> Result<PowerSplit> {
        let sensing = self.sensing_power_fraction;
        let users = if self.user_power_fractions.is_empty() {
            if self.n_users == 0 {
                Vec::new()
            } else {
                vec![(1.0 - sensing).max(0.0) / self.n_users as f64; self.n_users]
            }
        } else {
            self.user_power_fractions.clone()
        };
        PowerSplit::new(users, sensing)
    }

    pub fn noise_levels(&self) -> NoiseLevels {
        let bs = self.bs_noise_power_watt.unwrap_or_else(|| {
            noise_power_watt(
                self.noise_density_dbm_hz,
                self.bandwidth_hz,
                self.noise_figure_db,
            )
        });
        let ue = self.ue_noise_power_watt.unwrap_or_else(|| {
            noise_power_watt(
                self.noise_density_dbm_hz,
                self.bandwidth_hz,
                self.ue_noise_figure_db,
            )
        });
        let repeater = self.repeater_noise_power_watt.unwrap_or(bs);
        NoiseLevels { bs, repeater, ue }
    }

    pub fn zf_regularizer_value(&self) -> f64 {
        self.zf_regularizer.unwrap_or_else(|| {
            (self.n_users.max(1) as f64) * self.noise_levels().ue / self.tx_power_watt
        })
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / (self.carrier_ghz * 1e9)
    }

    /// Number of clutter unknowns `N_t N_r`.
    pub fn clutter_dim(&self) -> usize {
        self.n_tx_antennas * self.n_rx_antennas
    }
}

/// Positions of every entity in one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub tx_bs: Position,
    pub rx_bs: Position,
    pub repeater: Position,
    /// Target hotspot center; the target sits here.
    pub hotspot: Position,
    pub users: Vec<Position>,
}

impl Geometry {
    /// Fails if two entities coincide.
    pub fn validate(&self) -> Result<()> {
        let mut all = vec![self.tx_bs, self.rx_bs, self.repeater, self.hotspot];
        all.extend(self.users.iter().copied());
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if (all[i] - all[j]).norm() <= 0.0 {
                    return Err(IsacError::Config(format!(
                        "entities {i} and {j} share a position"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn uniform_in_disc<R: Rng + ?Sized>(
    rng: &mut R,
    center: [f64; 2],
    radius: f64,
    height: f64,
) -> Position {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    Position::new(center[0] + r * phi.cos(), center[1] + r * phi.sin(), height)
}

/// Places the users and the repeater; the BSs and the hotspot are fixed
/// anchors from the configuration.
pub fn drop_entities<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Geometry> {
    if config.service_radius_m == 0.0 && config.n_users > 1 {
        return Err(IsacError::Config(
            "zero-radius service disc cannot hold more than one user".into(),
        ));
    }
    let at = |xy: [f64; 2], h: f64| Position::new(xy[0], xy[1], h);
    let repeater = uniform_in_disc(
        rng,
        config.hotspot_xy,
        config.repeater_radius_m,
        config.repeater_height_m,
    );
    let users = (0..config.n_users)
        .map(|_| {
            uniform_in_disc(
                rng,
                config.tx_bs_xy,
                config.service_radius_m,
                config.user_height_m,
            )
        })
        .collect();
    let geometry = Geometry {
        tx_bs: at(config.tx_bs_xy, config.bs_height_m),
        rx_bs: at(config.rx_bs_xy, config.bs_height_m),
        repeater,
        hotspot: at(config.hotspot_xy, config.target_height_m),
        users,
    };
    geometry.validate()?;
    Ok(geometry)
}

/// UMi street-canyon NLOS path loss in dB.
pub fn pathloss_db(distance_m: f64, carrier_ghz: f64, rx_height_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(IsacError::Numerical(format!(
            "path-loss distance must be positive, got {distance_m}"
        )));
    }
    if !(carrier_ghz > 0.0) {
        return Err(IsacError::Numerical(format!(
            "carrier must be positive, got {carrier_ghz}"
        )));
    }
    let d = distance_m.max(1.0);
    Ok(22.4 + 35.3 * d.log10() + 21.3 * carrier_ghz.log10() - 0.3 * (rx_height_m - 1.5))
}

/// UMi street-canyon LOS path loss in dB, with the two-slope breakpoint at
/// `4 (h_BS - 1)(h_UT - 1) f_c / c`.
pub fn pathloss_los_db(distance_m: f64, carrier_ghz: f64, h_bs_m: f64, h_ut_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(IsacError::Numerical(format!(
            "path-loss distance must be positive, got {distance_m}"
        )));
    }
    if !(carrier_ghz > 0.0) {
        return Err(IsacError::Numerical(format!(
            "carrier must be positive, got {carrier_ghz}"
        )));
    }
    let d = distance_m.max(1.0);
    let dh = h_bs_m - h_ut_m;
    let d_2d = (d * d - dh * dh).max(0.0).sqrt();
    let breakpoint = 4.0 * (h_bs_m - 1.0).max(0.0) * (h_ut_m - 1.0).max(0.0) * carrier_ghz * 1e9
        / SPEED_OF_LIGHT;
    let fc = 20.0 * carrier_ghz.log10();
    if d_2d <= breakpoint {
        Ok(32.4 + 21.0 * d.log10() + fc)
    } else {
        Ok(32.4 + 40.0 * d.log10() + fc - 9.5 * (breakpoint * breakpoint + dh * dh).log10())
    }
}

/// Linear power gain `10^(-PL/10)`.
pub fn pathloss_linear(distance_m: f64, carrier_ghz: f64, rx_height_m: f64) -> Result<f64> {
    Ok(db_to_linear(-pathloss_db(
        distance_m,
        carrier_ghz,
        rx_height_m,
    )?))
}

/// Thermal noise power in watts over `bandwidth_hz`.
pub fn noise_power_watt(density_dbm_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    db_to_linear(density_dbm_hz + 10.0 * bandwidth_hz.log10() + noise_figure_db - 30.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
