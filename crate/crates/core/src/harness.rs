//! Monte Carlo drivers for the detection and downlink studies, plus CSV
//! emission.
//!
//! Every trial draws from its own ChaCha8 substream keyed by
//! `(master_seed, study_id)` with the trial index as stream number. Trials
//! run on a rayon pool and are merged in trial order, so results depend only
//! on the configuration and the seed.
//!
//! The detection study keeps the geometry and the large-scale channels of a
//! single drop fixed; clutter, residual inter-BS error, symbols, noise and the
//! RCS are redrawn per trial. The same trial draws are reused across every
//! RCS variance and every repeater setting (common random numbers).

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    self, clutter_covariance, gen_channels, link_gains, repeater_amplification, ChannelRealization,
    ClutterModel,
};
use crate::comm_metrics::all_user_sinr;
use crate::detector::calibration::{empirical_pfa, quantile_threshold, Calibration};
use crate::detector::oracle::{oracle_loglike_ratio, random_instance};
use crate::detector::{
    assemble_statistics, decide, detect, glrt_statistic, glrt_statistic_for_variances,
    DetectorModel, Hypothesis,
};
use crate::linalg::{complex_normal, C64};
use crate::precoding::{
    build_precoders, build_precoders_with_mode, draw_symbol, frame_from_symbols, PrecoderSet,
    TransmitFrame,
};
use crate::propagation::{receive_bs_slot, NoiseDraws};
use crate::scenario::{drop_entities, PrecoderMode, ScenarioConfig};
use crate::{IsacError, Result};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "ISAC_WORKERS";

/// Substream families. Distinct families never share random numbers.
pub mod study {
    pub const GEOMETRY: u64 = 0;
    pub const CALIBRATION: u64 = 1;
    pub const FRESH_H0: u64 = 2;
    pub const DETECTION: u64 = 3;
    pub const SE_DROPS: u64 = 4;
    pub const ORACLE: u64 = 5;
}

/// Tolerance of the oracle comparison, relative to `1 + |T|`.
pub const ORACLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialSeed {
    pub master_seed: u64,
    pub study_id: u64,
    pub trial_id: u64,
}

impl TrialSeed {
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.study_id.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.trial_id);
        rng
    }
}

pub fn trial_rng(master_seed: u64, study_id: u64, trial_id: u64) -> ChaCha8Rng {
    TrialSeed {
        master_seed,
        study_id,
        trial_id,
    }
    .rng()
}

/// Per-trial output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub truth: Hypothesis,
    pub statistic: f64,
    pub decision: Hypothesis,
    pub threshold: f64,
    pub rcs_draw: C64,
    pub rcs_estimate: C64,
    pub sinr: Vec<f64>,
    pub se: Vec<f64>,
    pub seed: TrialSeed,
}

/// Runs `f` on a dedicated pool of `workers` threads (rayon's default when
/// `None`).
pub fn with_workers<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(IsacError::Config("worker count must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| IsacError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Maps `f` over trial ids in parallel; results and the first error (in
/// trial order) do not depend on scheduling.
fn par_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..trials as u64)
        .into_par_iter()
        .map(f)
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// One repeater configuration of the detection study.
#[derive(Debug, Clone)]
pub struct RepeaterSetting {
    /// `None` is the no-repeater baseline.
    pub gain_db: Option<f64>,
    pub nu: C64,
}

impl RepeaterSetting {
    pub fn label(&self) -> String {
        match self.gain_db {
            Some(g) => format!("{g}"),
            None => "off".to_string(),
        }
    }
}

/// Fixed part of a detection study for one repeater setting.
#[derive(Debug, Clone)]
struct SettingState {
    setting: RepeaterSetting,
    channels: ChannelRealization,
    precoders: PrecoderSet,
    model: DetectorModel,
}

/// Random numbers of one detection trial, shared by all settings and RCS
/// variances.
struct TrialDraws {
    clutter: crate::linalg::CMatrix,
    interbs_error: crate::linalg::CMatrix,
    /// Unit-variance RCS draw, scaled by `sigma_T` on use.
    unit_rcs: C64,
    user_symbols: Vec<Vec<C64>>,
    sensing_symbols: Vec<C64>,
    noise: NoiseDraws,
}

impl TrialDraws {
    fn draw(config: &ScenarioConfig, clutter: &ClutterModel, rng: &mut ChaCha8Rng) -> Self {
        let (nt, nr) = (config.n_tx_antennas, config.n_rx_antennas);
        let clutter_draw = clutter.draw(nr, nt, rng);
        let interbs_error =
            crate::linalg::complex_normal_matrix(rng, nr, nt, config.residual_interbs_power);
        let unit_rcs = complex_normal(rng, 1.0);
        let len = config.slot_length;
        let alphabet = config.symbol_alphabet;
        let user_symbols = (0..config.n_users)
            .map(|_| (0..len).map(|_| draw_symbol(alphabet, rng)).collect())
            .collect();
        let sensing_symbols = (0..len).map(|_| draw_symbol(alphabet, rng)).collect();
        let noise = NoiseDraws::draw(nr, config.n_users, len, &config.noise_levels(), rng);
        Self {
            clutter: clutter_draw,
            interbs_error,
            unit_rcs,
            user_symbols,
            sensing_symbols,
            noise,
        }
    }
}

/// Everything about a detection study that stays fixed across trials.
#[derive(Debug, Clone)]
pub struct DetectionSetup {
    pub config: ScenarioConfig,
    clutter: ClutterModel,
    states: Vec<SettingState>,
}

impl DetectionSetup {
    /// Drops the geometry from the study's geometry substream and prepares
    /// each repeater setting.
    pub fn new(config: &ScenarioConfig, settings: &[RepeaterSetting]) -> Result<Self> {
        config.validate()?;
        let mut rng = trial_rng(config.master_seed, study::GEOMETRY, 0);
        let geometry = drop_entities(config, &mut rng)?;
        let base = gen_channels(&geometry, config, &mut rng)?;
        let clutter = clutter_covariance(config, &geometry)?;
        let states = settings
            .iter()
            .map(|setting| {
                let mut channels = base.clone();
                channels.nu = setting.nu;
                let precoders = build_precoders(config, &channels)?;
                let model = DetectorModel::from_config(config, &clutter, &channels)?;
                Ok(SettingState {
                    setting: setting.clone(),
                    channels,
                    precoders,
                    model,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: config.clone(),
            clutter,
            states,
        })
    }

    /// The configured repeater (as given by `repeater_enabled` and
    /// `repeater_gain_db`) as the only setting.
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        let setting = if config.repeater_enabled {
            repeater_setting(config, Some(config.repeater_gain_db))?
        } else {
            repeater_setting(config, None)?
        };
        Self::new(config, &[setting])
    }

    pub fn settings(&self) -> impl Iterator<Item = &RepeaterSetting> {
        self.states.iter().map(|s| &s.setting)
    }

    pub fn channels(&self, setting: usize) -> &ChannelRealization {
        &self.states[setting].channels
    }

    /// Frame, channels and observation for one trial under one setting.
    fn trial_parts(
        &self,
        state: &SettingState,
        draws: &TrialDraws,
        rcs: C64,
    ) -> Result<(
        TransmitFrame,
        ChannelRealization,
        crate::propagation::SensingObservation,
    )> {
        let frame = frame_from_symbols(
            &state.precoders,
            self.config.power_split()?,
            self.config.tx_power_watt,
            draws.user_symbols.clone(),
            draws.sensing_symbols.clone(),
        )?;
        let mut channels = state.channels.clone();
        channels.clutter = draws.clutter.clone();
        channels.interbs_error = draws.interbs_error.clone();
        channels.rcs = rcs;
        let observation = receive_bs_slot(&frame, &channels, &draws.noise, &self.config)?;
        Ok((frame, channels, observation))
    }

    /// RCS variance the detector assumes when the truth is `truth`.
    pub fn detector_variance(&self, truth: f64) -> f64 {
        self.config.detector_rcs_variance.unwrap_or(truth)
    }

    /// H0 statistics of one trial, `[setting][variance]`.
    pub fn h0_statistics(
        &self,
        study_id: u64,
        trial_id: u64,
        variances: &[f64],
    ) -> Result<Vec<Vec<f64>>> {
        let mut rng = trial_rng(self.config.master_seed, study_id, trial_id);
        let draws = TrialDraws::draw(&self.config, &self.clutter, &mut rng);
        let assumed: Vec<f64> = variances
            .iter()
            .map(|s| self.detector_variance(*s))
            .collect();
        self.states
            .iter()
            .map(|state| {
                let (frame, channels, obs) = self.trial_parts(state, &draws, C64::new(0.0, 0.0))?;
                let ws = assemble_statistics(&obs, &frame, &channels, &state.model)?;
                glrt_statistic_for_variances(&ws, &assumed)
            })
            .collect()
    }

    /// H0 statistics of `trials` trials under the first setting at the
    /// configured RCS variance.
    pub fn h0_sample(&self, study_id: u64, trials: usize) -> Result<Vec<f64>> {
        let variances = [self.config.rcs_variance];
        par_trials(trials, |t| {
            self.h0_statistics(study_id, t, &variances).map(|s| s[0][0])
        })
    }

    /// H1 statistics of one trial, `[setting][variance]`, with the RCS drawn
    /// as `sigma_T` times a shared unit-variance draw.
    pub fn h1_statistics(
        &self,
        study_id: u64,
        trial_id: u64,
        variances: &[f64],
    ) -> Result<Vec<Vec<f64>>> {
        let mut rng = trial_rng(self.config.master_seed, study_id, trial_id);
        let draws = TrialDraws::draw(&self.config, &self.clutter, &mut rng);
        self.states
            .iter()
            .map(|state| {
                variances
                    .iter()
                    .map(|s| {
                        let (frame, channels, obs) =
                            self.trial_parts(state, &draws, draws.unit_rcs * s.sqrt())?;
                        let model = state.model.with_rcs_variance(self.detector_variance(*s))?;
                        let ws = assemble_statistics(&obs, &frame, &channels, &model)?;
                        glrt_statistic(&ws)
                    })
                    .collect()
            })
            .collect()
    }

    /// Full detection record of one trial under the first setting and the
    /// configured RCS variance.
    pub fn detection_record(
        &self,
        study_id: u64,
        trial_id: u64,
        truth: Hypothesis,
        threshold: f64,
    ) -> Result<TrialRecord> {
        let seed = TrialSeed {
            master_seed: self.config.master_seed,
            study_id,
            trial_id,
        };
        let mut rng = seed.rng();
        let draws = TrialDraws::draw(&self.config, &self.clutter, &mut rng);
        let state = &self.states[0];
        let rcs = match truth {
            Hypothesis::H0 => C64::new(0.0, 0.0),
            Hypothesis::H1 => draws.unit_rcs * self.config.rcs_variance.sqrt(),
        };
        let (frame, channels, obs) = self.trial_parts(state, &draws, rcs)?;
        let model = state
            .model
            .with_rcs_variance(self.detector_variance(self.config.rcs_variance))?;
        let ws = assemble_statistics(&obs, &frame, &channels, &model)?;
        let result = detect(&ws, threshold)?;
        let metrics = all_user_sinr(&state.precoders, &channels, &self.config)?;
        Ok(TrialRecord {
            trial_id,
            truth,
            statistic: result.statistic,
            decision: result.decision,
            threshold,
            rcs_draw: rcs,
            rcs_estimate: result.rcs_estimate,
            sinr: metrics.iter().map(|m| m.sinr).collect(),
            se: metrics.iter().map(|m| m.se).collect(),
            seed,
        })
    }
}

/// Repeater setting for `gain_db` in the study's geometry convention;
/// `None` gives `nu = 0`. The amplitude depends on the geometry only through
/// the repeater-to-BS gain, so it is evaluated on the study's geometry drop.
pub fn repeater_setting(config: &ScenarioConfig, gain_db: Option<f64>) -> Result<RepeaterSetting> {
    let Some(g) = gain_db else {
        return Ok(RepeaterSetting {
            gain_db: None,
            nu: C64::new(0.0, 0.0),
        });
    };
    let mut rng = trial_rng(config.master_seed, study::GEOMETRY, 0);
    let geometry = drop_entities(config, &mut rng)?;
    let on = ScenarioConfig {
        repeater_enabled: true,
        repeater_gain_db: g,
        ..config.clone()
    };
    let nu = repeater_amplification(&on, &link_gains(&on, &geometry)?);
    Ok(RepeaterSetting {
        gain_db: Some(g),
        nu,
    })
}

/// One point of the PoD-versus-RCS curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PodPoint {
    pub sigma_t_sq: f64,
    pub repeater: String,
    pub pod: f64,
    pub threshold: f64,
    pub empirical_pfa: f64,
    pub trials: usize,
    pub calibration: Calibration,
}

impl PodPoint {
    /// Binomial standard error of the PoD estimate.
    pub fn std_error(&self) -> f64 {
        (self.pod * (1.0 - self.pod) / self.trials as f64).sqrt()
    }
}

/// Aggregated output of one study.
#[derive(Debug, Clone, PartialEq)]
pub enum StudyResult {
    PodVsRcs {
        /// Ordered by setting, then by RCS variance.
        points: Vec<PodPoint>,
        warnings: Vec<String>,
    },
    SeCdf {
        curves: Vec<SeCurve>,
        drops: usize,
    },
}

/// Sorted per-user SE samples of one (mode, repeater) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct SeCurve {
    pub mode: PrecoderMode,
    pub repeater: bool,
    pub samples: Vec<f64>,
    /// Drops where the mode could not be built (nulled sensing direction).
    pub degenerate_drops: usize,
}

impl SeCurve {
    pub fn median(&self) -> Option<f64> {
        let n = self.samples.len();
        match n {
            0 => None,
            _ if n % 2 == 1 => Some(self.samples[n / 2]),
            _ => Some(0.5 * (self.samples[n / 2 - 1] + self.samples[n / 2])),
        }
    }
}

impl StudyResult {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        match self {
            StudyResult::PodVsRcs { points, .. } => {
                if points.is_empty() {
                    w.write_record([
                        "sigma_t_sq",
                        "repeater_gain_db",
                        "pod",
                        "threshold",
                        "empirical_pfa",
                        "trials",
                    ])?;
                }
                for p in points {
                    w.serialize(PodRow {
                        sigma_t_sq: p.sigma_t_sq,
                        repeater_gain_db: &p.repeater,
                        pod: p.pod,
                        threshold: p.threshold,
                        empirical_pfa: p.empirical_pfa,
                        trials: p.trials,
                    })?;
                }
            }
            StudyResult::SeCdf { curves, .. } => {
                w.write_record(["mode", "repeater", "se", "cdf"])?;
                for c in curves {
                    let n = c.samples.len();
                    for (i, se) in c.samples.iter().enumerate() {
                        w.serialize((
                            mode_name(c.mode),
                            if c.repeater { "on" } else { "off" },
                            se,
                            (i + 1) as f64 / n as f64,
                        ))?;
                    }
                }
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct PodRow<'a> {
    sigma_t_sq: f64,
    repeater_gain_db: &'a str,
    pod: f64,
    threshold: f64,
    empirical_pfa: f64,
    trials: usize,
}

#[derive(Serialize)]
struct CalibrationRow<'a> {
    sigma_t_sq: f64,
    repeater_gain_db: &'a str,
    threshold: f64,
    pfa_target: f64,
    in_sample_pfa: f64,
    trials: usize,
}

pub fn mode_name(mode: PrecoderMode) -> &'static str {
    match mode {
        PrecoderMode::TargetCentric => "target_centric",
        PrecoderMode::CommCentric => "comm_centric",
        PrecoderMode::RepeaterNull => "repeater_null",
    }
}

/// PoD versus RCS variance for the no-repeater baseline and each gain in
/// `pod_repeater_gains_db`.
///
/// Per setting and variance the threshold is the calibrated
/// `(1 - pfa_target)` quantile of `calibration_trials` H0 statistics;
/// `empirical_pfa` is measured on `mc_trials` fresh H0 trials and PoD on
/// `mc_trials` H1 trials.
pub fn run_pod_vs_rcs(config: &ScenarioConfig, rcs_grid: &[f64]) -> Result<StudyResult> {
    if rcs_grid.is_empty() {
        return Err(IsacError::Config("rcs_grid must not be empty".into()));
    }
    if rcs_grid.iter().any(|s| !(*s > 0.0)) {
        return Err(IsacError::Config(
            "rcs_grid entries must be positive".into(),
        ));
    }
    let mut settings = vec![repeater_setting(config, None)?];
    for g in &config.pod_repeater_gains_db {
        settings.push(repeater_setting(config, Some(*g))?);
    }
    let setup = DetectionSetup::new(config, &settings)?;

    let calib = par_trials(config.calibration_trials, |t| {
        setup.h0_statistics(study::CALIBRATION, t, rcs_grid)
    })?;
    let fresh = par_trials(config.mc_trials, |t| {
        setup.h0_statistics(study::FRESH_H0, t, rcs_grid)
    })?;
    let h1 = par_trials(config.mc_trials, |t| {
        setup.h1_statistics(study::DETECTION, t, rcs_grid)
    })?;

    let column = |rows: &[Vec<Vec<f64>>], s: usize, v: usize| {
        rows.iter().map(|r| r[s][v]).collect::<Vec<f64>>()
    };
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for (s, setting) in settings.iter().enumerate() {
        for (v, sigma) in rcs_grid.iter().enumerate() {
            let calibration = quantile_threshold(&column(&calib, s, v), config.pfa_target)?;
            if let Some(w) = &calibration.warning {
                warnings.push(format!(
                    "repeater {} sigma_t_sq {sigma}: {w}",
                    setting.label()
                ));
            }
            let threshold = calibration.threshold;
            let detections = column(&h1, s, v)
                .iter()
                .filter(|t| decide(**t, threshold) == Hypothesis::H1)
                .count();
            points.push(PodPoint {
                sigma_t_sq: *sigma,
                repeater: setting.label(),
                pod: detections as f64 / config.mc_trials as f64,
                threshold,
                empirical_pfa: empirical_pfa(&column(&fresh, s, v), threshold),
                trials: config.mc_trials,
                calibration,
            });
        }
    }
    Ok(StudyResult::PodVsRcs { points, warnings })
}

/// Per-user SE over `mc_trials` independent drops, for the target-centric
/// and comm-centric sensing beams with the repeater off and on.
pub fn run_se_cdf(config: &ScenarioConfig) -> Result<StudyResult> {
    config.validate()?;
    if config.n_users == 0 {
        return Err(IsacError::Config(
            "the SE study needs at least one user".into(),
        ));
    }
    let modes = [PrecoderMode::TargetCentric, PrecoderMode::CommCentric];
    let on_config = ScenarioConfig {
        repeater_enabled: true,
        ..config.clone()
    };
    // [repeater off/on][mode] -> per-user SE, or None when degenerate
    let drops = par_trials(config.mc_trials, |t| {
        let mut rng = trial_rng(config.master_seed, study::SE_DROPS, t);
        let geometry = drop_entities(config, &mut rng)?;
        let mut channels = gen_channels(&geometry, config, &mut rng)?;
        let nu_on = repeater_amplification(&on_config, &channel::link_gains(config, &geometry)?);
        [C64::new(0.0, 0.0), nu_on]
            .iter()
            .map(|nu| {
                channels.nu = *nu;
                modes
                    .iter()
                    .map(
                        |mode| match build_precoders_with_mode(config, &channels, *mode) {
                            Ok(p) => Ok(Some(
                                all_user_sinr(&p, &channels, config)?
                                    .iter()
                                    .map(|m| m.se)
                                    .collect::<Vec<_>>(),
                            )),
                            Err(IsacError::NulledSensingDirection { .. }) => Ok(None),
                            Err(e) => Err(e),
                        },
                    )
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut curves = Vec::new();
    for (mode_idx, mode) in modes.iter().enumerate() {
        for (rep_idx, repeater) in [false, true].into_iter().enumerate() {
            let mut samples = Vec::new();
            let mut degenerate_drops = 0;
            for d in &drops {
                match &d[rep_idx][mode_idx] {
                    Some(se) => samples.extend_from_slice(se),
                    None => degenerate_drops += 1,
                }
            }
            samples.sort_by(f64::total_cmp);
            curves.push(SeCurve {
                mode: *mode,
                repeater,
                samples,
                degenerate_drops,
            });
        }
    }
    Ok(StudyResult::SeCdf {
        curves,
        drops: config.mc_trials,
    })
}

/// Threshold for the configured RCS variance and repeater, with the
/// calibration trial records.
pub fn run_calibration(config: &ScenarioConfig) -> Result<(Calibration, Vec<TrialRecord>)> {
    let setup = DetectionSetup::from_config(config)?;
    let stats = setup.h0_sample(study::CALIBRATION, config.calibration_trials)?;
    let calibration = quantile_threshold(&stats, config.pfa_target)?;
    let records = par_trials(config.calibration_trials, |t| {
        setup.detection_record(study::CALIBRATION, t, Hypothesis::H0, calibration.threshold)
    })?;
    Ok((calibration, records))
}

pub fn write_calibration_csv<W: Write>(
    config: &ScenarioConfig,
    calibration: &Calibration,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let repeater = if config.repeater_enabled {
        config.repeater_gain_db.to_string()
    } else {
        "off".to_string()
    };
    w.serialize(CalibrationRow {
        sigma_t_sq: config.rcs_variance,
        repeater_gain_db: &repeater,
        threshold: calibration.threshold,
        pfa_target: calibration.pfa_target,
        in_sample_pfa: calibration.in_sample_pfa,
        trials: calibration.trials,
    })?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Detector debug dump: `trial,T,threshold,decision,re_alpha_hat,im_alpha_hat`.
pub fn write_detector_dump<W: Write>(records: &[TrialRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "trial",
        "T",
        "threshold",
        "decision",
        "re_alpha_hat",
        "im_alpha_hat",
    ])?;
    for r in records {
        w.serialize((
            r.trial_id,
            r.statistic,
            r.threshold,
            r.decision.as_str(),
            r.rcs_estimate.re,
            r.rcs_estimate.im,
        ))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One closed-form versus oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub instance: u64,
    pub statistic: f64,
    pub oracle: f64,
}

impl OracleComparison {
    pub fn error(&self) -> f64 {
        (self.statistic - self.oracle).abs()
    }

    pub fn tolerance(&self) -> f64 {
        ORACLE_TOL * (1.0 + self.statistic.abs())
    }

    pub fn passed(&self) -> bool {
        self.error() <= self.tolerance()
    }
}

/// Closed-form statistic against the brute-force oracle on random
/// `2 x 2`, three-symbol instances.
pub fn run_oracle_check(master_seed: u64, instances: usize) -> Result<Vec<OracleComparison>> {
    par_trials(instances, |i| {
        let mut rng = trial_rng(master_seed, study::ORACLE, i);
        let inst = random_instance(&mut rng, 2, 2, 3)?;
        let ws = assemble_statistics(&inst.observation, &inst.frame, &inst.channels, &inst.model)?;
        Ok(OracleComparison {
            instance: i,
            statistic: glrt_statistic(&ws)?,
            oracle: oracle_loglike_ratio(
                &inst.observation,
                &inst.frame,
                &inst.channels,
                &inst.model,
            )?,
        })
    })
}

pub fn write_oracle_csv<W: Write>(rows: &[OracleComparison], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "instance",
        "T",
        "T_oracle",
        "abs_error",
        "tolerance",
        "pass",
    ])?;
    for r in rows {
        w.serialize((
            r.instance,
            r.statistic,
            r.oracle,
            r.error(),
            r.tolerance(),
            r.passed(),
        ))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small_config() -> ScenarioConfig {
        ScenarioConfig {
            n_tx_antennas: 3,
            n_rx_antennas: 2,
            n_users: 2,
            slot_length: 4,
            mc_trials: 40,
            calibration_trials: 40,
            rcs_grid: vec![0.1, 10.0],
            ..Default::default()
        }
    }

    #[test]
    fn substreams_are_distinct_and_reproducible() {
        let a: u64 = trial_rng(7, 1, 3).random();
        let b: u64 = trial_rng(7, 1, 3).random();
        let c: u64 = trial_rng(7, 1, 4).random();
        let d: u64 = trial_rng(7, 2, 3).random();
        let e: u64 = trial_rng(8, 1, 3).random();
        assert_eq!(a, b);
        assert!(a != c && a != d && a != e && c != d);
    }

    #[test]
    fn off_setting_has_zero_amplification() {
        let cfg = small_config();
        let off = repeater_setting(&cfg, None).unwrap();
        assert_eq!(off.nu, C64::new(0.0, 0.0));
        assert_eq!(off.label(), "off");
        let on = repeater_setting(&cfg, Some(20.0)).unwrap();
        assert!(on.nu.norm() > 0.0);
        assert_eq!(on.label(), "20");
        let louder = repeater_setting(&cfg, Some(30.0)).unwrap();
        assert!((louder.nu.norm_sqr() / on.nu.norm_sqr() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn pod_study_rows_are_ordered_and_bounded() {
        let cfg = small_config();
        let StudyResult::PodVsRcs { points, .. } = run_pod_vs_rcs(&cfg, &cfg.rcs_grid).unwrap()
        else {
            panic!("wrong study kind")
        };
        assert_eq!(points.len(), 4);
        assert_eq!(points[0].repeater, "off");
        assert_eq!(points[2].repeater, "20");
        for p in &points {
            assert!((0.0..=1.0).contains(&p.pod));
            assert!((0.0..=1.0).contains(&p.empirical_pfa));
            assert_eq!(p.trials, 40);
        }
    }

    #[test]
    fn h1_statistic_at_tiny_variance_matches_h0_draws() {
        // With a vanishing RCS the observation equals the H0 one drawn from
        // the same substream.
        let cfg = small_config();
        let setup = DetectionSetup::from_config(&cfg).unwrap();
        let h0 = setup.h0_statistics(9, 0, &[1e-30]).unwrap();
        let h1 = setup.h1_statistics(9, 0, &[1e-30]).unwrap();
        assert!((h0[0][0] - h1[0][0]).abs() <= 1e-9 * (1.0 + h0[0][0]));
    }

    #[test]
    fn detector_variance_override_changes_only_the_prior() {
        let cfg = small_config();
        let mismatched = ScenarioConfig {
            detector_rcs_variance: Some(7.0),
            ..cfg.clone()
        };
        let matched = DetectionSetup::from_config(&cfg).unwrap();
        let setup = DetectionSetup::from_config(&mismatched).unwrap();
        let assumed = matched.h1_statistics(9, 1, &[7.0]).unwrap();
        let h1 = setup.h1_statistics(9, 1, &[1.0, 7.0]).unwrap();
        assert!((h1[0][1] - assumed[0][0]).abs() <= 1e-9 * (1.0 + h1[0][1]));
        assert!((h1[0][0] - h1[0][1]).abs() > 1e-9);
        let h0 = setup.h0_statistics(9, 1, &[1.0, 3.0]).unwrap();
        assert_eq!(h0[0][0], h0[0][1]);
        assert!(ScenarioConfig {
            detector_rcs_variance: Some(0.0),
            ..cfg
        }
        .validate()
        .is_err());
    }

    #[test]
    fn csv_is_independent_of_worker_count() {
        let cfg = small_config();
        let run = |w| {
            with_workers(Some(w), || {
                let mut out = Vec::new();
                run_pod_vs_rcs(&cfg, &cfg.rcs_grid)
                    .unwrap()
                    .write_csv(&mut out)
                    .unwrap();
                out
            })
            .unwrap()
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn se_study_without_sensing_power_is_mode_independent() {
        let cfg = ScenarioConfig {
            sensing_power_fraction: 0.0,
            mc_trials: 5,
            ..small_config()
        };
        let StudyResult::SeCdf { curves, .. } = run_se_cdf(&cfg).unwrap() else {
            panic!("wrong study kind")
        };
        assert_eq!(curves.len(), 4);
        for rep in [false, true] {
            let pick = |m| {
                curves
                    .iter()
                    .find(|c| c.mode == m && c.repeater == rep)
                    .unwrap()
            };
            let (t, c) = (
                pick(PrecoderMode::TargetCentric),
                pick(PrecoderMode::CommCentric),
            );
            assert_eq!(t.samples.len(), 10);
            for (a, b) in t.samples.iter().zip(&c.samples) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + a));
            }
        }
    }

    #[test]
    fn degenerate_comm_centric_drops_are_counted() {
        let cfg = ScenarioConfig {
            n_users: 3,
            mc_trials: 3,
            ..small_config()
        };
        let StudyResult::SeCdf { curves, .. } = run_se_cdf(&cfg).unwrap() else {
            panic!("wrong study kind")
        };
        let comm = curves
            .iter()
            .find(|c| c.mode == PrecoderMode::CommCentric)
            .unwrap();
        assert_eq!(comm.degenerate_drops, 3);
        assert!(comm.samples.is_empty());
    }

    #[test]
    fn oracle_check_passes() {
        let rows = run_oracle_check(3, 5).unwrap();
        assert!(rows.iter().all(OracleComparison::passed));
    }

    #[test]
    fn calibration_dump_has_one_row_per_trial() {
        let cfg = small_config();
        let (cal, records) = run_calibration(&cfg).unwrap();
        assert_eq!(records.len(), cfg.calibration_trials);
        let exceed = records
            .iter()
            .filter(|r| r.decision == Hypothesis::H1)
            .count();
        assert_eq!(exceed as f64 / records.len() as f64, cal.in_sample_pfa);
        let mut out = Vec::new();
        write_detector_dump(&records, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("trial,T,threshold,decision,re_alpha_hat,im_alpha_hat\n"));
        assert_eq!(text.lines().count(), cfg.calibration_trials + 1);
    }
}
