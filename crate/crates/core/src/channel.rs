//! One realization of every channel in the system, the target RCS and the
//! clutter statistics.
//!
//! Link models:
//!
//! - BS-to-user `f_n`: Rayleigh fading scaled by UMi path loss.
//! - BS-to-repeater `b_t`, repeater-to-BS `b_r`, repeater-to-user `h_n`:
//!   line of sight with distance-derived phase. `h_n` uses UMi NLOS path
//!   loss; `b_t` and `b_r` use `repeater_link_pathloss` (UMi LOS by default).
//! - BS-to-target `a_t`, target-to-BS `a_r`, target-to-repeater `g`:
//!   line of sight with the bistatic radar-equation spreading split, so that
//!   `|a_t|^2 |a_r|^2 sigma_T^2` per antenna pair equals
//!   `lambda^2 sigma_T^2 / ((4 pi)^3 d_t^2 d_r^2)` with `sigma_T^2` in m^2.
//! - Clutter `C`: i.i.d. CN(0, kappa beta_clutter), beta_clutter being the UMi
//!   gain over the BS-to-BS distance.
//! - Residual inter-BS channel `G~_B`: i.i.d. CN(0, zeta^2).

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    complex_normal, complex_normal_matrix, complex_normal_vector, vectorize, CMatrix, CVector,
    HermitianFactor, C64,
};
use crate::scenario::{
    db_to_linear, pathloss_linear, GainReference, Geometry, Position, ScenarioConfig,
};
use crate::{IsacError, Result};

/// Every channel of one drop. `interbs_error` and `clutter` are `N_r x N_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub f_user: Vec<CVector>,
    pub h_user: Vec<C64>,
    pub a_tx: CVector,
    pub a_rx: CVector,
    pub b_tx: CVector,
    pub b_rx: CVector,
    pub g_rep: C64,
    pub interbs_error: CMatrix,
    pub clutter: CMatrix,
    pub rcs: C64,
    /// Repeater amplification `nu`; zero when the repeater is off.
    pub nu: C64,
}

impl ChannelRealization {
    pub fn n_tx(&self) -> usize {
        self.a_tx.len()
    }

    pub fn n_rx(&self) -> usize {
        self.a_rx.len()
    }

    pub fn n_users(&self) -> usize {
        self.f_user.len()
    }

    /// Amplified direct repeater path `nu b_r b_t^T`.
    pub fn repeater_leakage(&self) -> CMatrix {
        &self.b_rx * self.b_tx.transpose() * self.nu
    }

    /// Redraws the parts that change from trial to trial within a study:
    /// clutter, residual inter-BS error and RCS.
    pub fn redraw_trial_parts<R: Rng + ?Sized>(
        &mut self,
        clutter: &ClutterModel,
        residual_interbs_power: f64,
        rcs_variance: f64,
        rng: &mut R,
    ) {
        let (nr, nt) = (self.n_rx(), self.n_tx());
        self.clutter = clutter.draw(nr, nt, rng);
        self.interbs_error = complex_normal_matrix(rng, nr, nt, residual_interbs_power);
        self.rcs = draw_rcs(rcs_variance, rng);
    }
}

/// Large-scale power gains of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub f_user: Vec<f64>,
    pub h_user: Vec<f64>,
    pub a_tx: f64,
    pub a_rx: f64,
    pub b_tx: f64,
    pub b_rx: f64,
    pub g_rep: f64,
    pub clutter: f64,
}

/// Power density spreading from a transmitter to a scatterer, per m^2.
fn spreading_gain(distance_m: f64) -> f64 {
    1.0 / (4.0 * PI * distance_m.max(1.0).powi(2))
}

/// Effective-aperture capture of a scattered wave at an isotropic antenna.
fn capture_gain(distance_m: f64, wavelength_m: f64) -> f64 {
    wavelength_m.powi(2) / ((4.0 * PI).powi(2) * distance_m.max(1.0).powi(2))
}

pub fn link_gains(config: &ScenarioConfig, geometry: &Geometry) -> Result<LinkGains> {
    let fc = config.carrier_ghz;
    let lambda = config.wavelength_m();
    let dist = |a: &Position, b: &Position| (a - b).norm();
    let repeater_link = |d: f64| {
        config
            .repeater_link_pathloss
            .linear(d, fc, config.bs_height_m, config.repeater_height_m)
    };
    let f_user = geometry
        .users
        .iter()
        .map(|u| pathloss_linear(dist(&geometry.tx_bs, u), fc, config.user_height_m))
        .collect::<Result<Vec<_>>>()?;
    let h_user = geometry
        .users
        .iter()
        .map(|u| pathloss_linear(dist(&geometry.repeater, u), fc, config.user_height_m))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinkGains {
        f_user,
        h_user,
        a_tx: spreading_gain(dist(&geometry.tx_bs, &geometry.hotspot)),
        a_rx: capture_gain(dist(&geometry.hotspot, &geometry.rx_bs), lambda),
        b_tx: repeater_link(dist(&geometry.tx_bs, &geometry.repeater))?,
        b_rx: repeater_link(dist(&geometry.repeater, &geometry.rx_bs))?,
        g_rep: capture_gain(dist(&geometry.hotspot, &geometry.repeater), lambda),
        clutter: config.clutter_suppression
            * pathloss_linear(
                dist(&geometry.tx_bs, &geometry.rx_bs),
                fc,
                config.user_height_m,
            )?,
    })
}

/// Repeater amplification `nu` for this geometry, zero when disabled.
pub fn repeater_amplification(config: &ScenarioConfig, gains: &LinkGains) -> C64 {
    if !config.repeater_enabled {
        return C64::new(0.0, 0.0);
    }
    let g = db_to_linear(config.repeater_gain_db);
    let power = match config.repeater_gain_reference {
        GainReference::Absolute => g,
        GainReference::ReceiverNoiseRise => {
            let noise = config.noise_levels();
            g * noise.bs / (noise.repeater * gains.b_rx)
        }
    };
    C64::from_polar(power.sqrt(), config.repeater_phase_rad)
}

/// Half-wavelength ULA response, element `m` equal to `exp(i pi m sin(angle))`.
pub fn steering_vector(n_antennas: usize, angle_rad: f64) -> CVector {
    let s = angle_rad.sin();
    CVector::from_fn(n_antennas, |m, _| C64::from_polar(1.0, PI * m as f64 * s))
}

/// Angle from array broadside, the array axis being the global x axis.
fn array_angle(array: &Position, other: &Position) -> f64 {
    let d = other - array;
    d.x.atan2(d.y)
}

fn propagation_phase(distance_m: f64, wavelength_m: f64) -> C64 {
    C64::from_polar(1.0, -2.0 * PI * (distance_m / wavelength_m).fract())
}

/// Swerling-I RCS coefficient, `alpha ~ CN(0, sigma_T^2)`.
pub fn draw_rcs<R: Rng + ?Sized>(sigma_t_sq: f64, rng: &mut R) -> C64 {
    complex_normal(rng, sigma_t_sq)
}

/// Draws every channel for `geometry`.
///
/// Random draws happen in a fixed order (user fading, clutter, inter-BS
/// error, RCS) so that a seeded stream always yields the same realization.
pub fn gen_channels<R: Rng + ?Sized>(
    geometry: &Geometry,
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let gains = link_gains(config, geometry)?;
    let (nt, nr) = (config.n_tx_antennas, config.n_rx_antennas);
    let lambda = config.wavelength_m();
    let los_vector = |n: usize, array: &Position, other: &Position, gain: f64| {
        let d = (array - other).norm();
        steering_vector(n, array_angle(array, other)) * (propagation_phase(d, lambda) * gain.sqrt())
    };
    let los_scalar = |a: &Position, b: &Position, gain: f64| {
        propagation_phase((a - b).norm(), lambda) * gain.sqrt()
    };

    let f_user = gains
        .f_user
        .iter()
        .map(|beta| complex_normal_vector(rng, nt, *beta))
        .collect();
    let h_user = geometry
        .users
        .iter()
        .zip(&gains.h_user)
        .map(|(u, beta)| los_scalar(&geometry.repeater, u, *beta))
        .collect();
    let clutter_model = ClutterModel::iid(nt * nr, gains.clutter)?;
    let mut realization = ChannelRealization {
        f_user,
        h_user,
        a_tx: los_vector(nt, &geometry.tx_bs, &geometry.hotspot, gains.a_tx),
        a_rx: los_vector(nr, &geometry.rx_bs, &geometry.hotspot, gains.a_rx),
        b_tx: los_vector(nt, &geometry.tx_bs, &geometry.repeater, gains.b_tx),
        b_rx: los_vector(nr, &geometry.rx_bs, &geometry.repeater, gains.b_rx),
        g_rep: los_scalar(&geometry.hotspot, &geometry.repeater, gains.g_rep),
        interbs_error: CMatrix::zeros(nr, nt),
        clutter: CMatrix::zeros(nr, nt),
        rcs: C64::new(0.0, 0.0),
        nu: repeater_amplification(config, &gains),
    };
    realization.redraw_trial_parts(
        &clutter_model,
        config.residual_interbs_power,
        config.rcs_variance,
        rng,
    );
    Ok(realization)
}

/// Prior covariance of `vec(C)` and the rule used to draw `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterModel {
    /// Hermitian positive definite, `N_t N_r` square.
    pub covariance: CMatrix,
    /// Per-entry variance of the i.i.d. draw of `C`.
    pub entry_variance: f64,
}

impl ClutterModel {
    pub fn iid(dim: usize, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(IsacError::Numerical(format!(
                "clutter variance must be positive for an invertible covariance, got {variance}"
            )));
        }
        Ok(Self {
            covariance: CMatrix::identity(dim, dim) * C64::new(variance, 0.0),
            entry_variance: variance,
        })
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    /// Adds `v v^H` to the covariance, keeping the draw rule.
    pub fn with_rank_one(&self, v: &CVector) -> Self {
        Self {
            covariance: &self.covariance + v * v.adjoint(),
            entry_variance: self.entry_variance,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, n_rx: usize, n_tx: usize, rng: &mut R) -> CMatrix {
        complex_normal_matrix(rng, n_rx, n_tx, self.entry_variance)
    }

    /// `Sigma_c^{-1}`.
    pub fn precision(&self) -> Result<CMatrix> {
        Ok(HermitianFactor::new(&self.covariance, "clutter covariance")?.inverse())
    }
}

/// Clutter statistics for the configured i.i.d. Gaussian model.
pub fn clutter_covariance(config: &ScenarioConfig, geometry: &Geometry) -> Result<ClutterModel> {
    let gains = link_gains(config, geometry)?;
    ClutterModel::iid(config.clutter_dim(), gains.clutter)
}

/// Clutter prior seen by the detector: the drawn model, plus the repeater
/// leakage as a rank-one term when it is not pre-cancelled.
pub fn detector_clutter_model(
    config: &ScenarioConfig,
    base: &ClutterModel,
    channels: &ChannelRealization,
) -> ClutterModel {
    if config.cancel_repeater_leakage || channels.nu == C64::new(0.0, 0.0) {
        base.clone()
    } else {
        base.with_rank_one(&vectorize(&channels.repeater_leakage()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DumpRow {
    field: String,
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

/// Writes every channel entry as one `field,row,col,re,im` CSV row.
pub fn write_channel_dump<W: Write>(channels: &ChannelRealization, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut put = |field: &str, row: usize, col: usize, z: C64| {
        w.serialize(DumpRow {
            field: field.to_string(),
            row,
            col,
            re: z.re,
            im: z.im,
        })
    };
    for (n, f) in channels.f_user.iter().enumerate() {
        for (m, z) in f.iter().enumerate() {
            put("f_user", n, m, *z)?;
        }
    }
    for (n, z) in channels.h_user.iter().enumerate() {
        put("h_user", n, 0, *z)?;
    }
    for (name, v) in [
        ("a_tx", &channels.a_tx),
        ("a_rx", &channels.a_rx),
        ("b_tx", &channels.b_tx),
        ("b_rx", &channels.b_rx),
    ] {
        for (m, z) in v.iter().enumerate() {
            put(name, m, 0, *z)?;
        }
    }
    for (name, mat) in [
        ("interbs_error", &channels.interbs_error),
        ("clutter", &channels.clutter),
    ] {
        for c in 0..mat.ncols() {
            for r in 0..mat.nrows() {
                put(name, r, c, mat[(r, c)])?;
            }
        }
    }
    put("g_rep", 0, 0, channels.g_rep)?;
    put("rcs", 0, 0, channels.rcs)?;
    put("nu", 0, 0, channels.nu)?;
    w.flush().map_err(|e| IsacError::Csv(e.into()))?;
    Ok(())
}

/// Reads a dump written by [`write_channel_dump`].
pub fn read_channel_dump<R: Read>(reader: R) -> Result<ChannelRealization> {
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let row: DumpRow = row?;
        rows.push(row);
    }
    let extent = |field: &str| {
        rows.iter()
            .filter(|r| r.field == field)
            .fold(None, |acc: Option<(usize, usize)>, r| {
                let (mr, mc) = acc.unwrap_or((0, 0));
                Some((mr.max(r.row + 1), mc.max(r.col + 1)))
            })
    };
    let need = |field: &str| {
        extent(field).ok_or_else(|| IsacError::Config(format!("channel dump lacks field {field}")))
    };
    let (nt, _) = need("a_tx")?;
    let (nr, _) = need("a_rx")?;
    let k = extent("f_user").map(|(r, _)| r).unwrap_or(0);
    let mut ch = ChannelRealization {
        f_user: vec![CVector::zeros(nt); k],
        h_user: vec![C64::new(0.0, 0.0); k],
        a_tx: CVector::zeros(nt),
        a_rx: CVector::zeros(nr),
        b_tx: CVector::zeros(nt),
        b_rx: CVector::zeros(nr),
        g_rep: C64::new(0.0, 0.0),
        interbs_error: CMatrix::zeros(nr, nt),
        clutter: CMatrix::zeros(nr, nt),
        rcs: C64::new(0.0, 0.0),
        nu: C64::new(0.0, 0.0),
    };
    let bad = |r: &DumpRow| {
        IsacError::Config(format!(
            "channel dump entry {}[{},{}] out of range",
            r.field, r.row, r.col
        ))
    };
    for r in &rows {
        let z = C64::new(r.re, r.im);
        let slot = match r.field.as_str() {
            "f_user" => ch.f_user.get_mut(r.row).and_then(|v| v.get_mut(r.col)),
            "h_user" => ch.h_user.get_mut(r.row),
            "a_tx" => ch.a_tx.get_mut(r.row),
            "a_rx" => ch.a_rx.get_mut(r.row),
            "b_tx" => ch.b_tx.get_mut(r.row),
            "b_rx" => ch.b_rx.get_mut(r.row),
            "interbs_error" => ch.interbs_error.get_mut((r.row, r.col)),
            "clutter" => ch.clutter.get_mut((r.row, r.col)),
            "g_rep" => Some(&mut ch.g_rep),
            "rcs" => Some(&mut ch.rcs),
            "nu" => Some(&mut ch.nu),
            other => {
                return Err(IsacError::Config(format!(
                    "unknown channel dump field {other}"
                )))
            }
        };
        *slot.ok_or_else(|| bad(r))? = z;
    }
    Ok(ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::drop_entities;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn steering_vector_cases() {
        let broadside = steering_vector(4, 0.0);
        for z in broadside.iter() {
            assert!((z - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let endfire = steering_vector(2, PI / 2.0);
        assert!((endfire[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        for angle in [-1.2, 0.3, 0.7, 2.9] {
            let v = steering_vector(7, angle);
            assert!((v.norm_squared() - 7.0).abs() < 1e-12);
            assert!(v.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn rcs_second_moment_and_mean() {
        let mut r = rng(5);
        let n = 100_000;
        let sigma = 2.5;
        let draws: Vec<C64> = (0..n).map(|_| draw_rcs(sigma, &mut r)).collect();
        let power = draws.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((power / sigma - 1.0).abs() < 0.02, "{power}");
        let mean = draws.iter().sum::<C64>() / n as f64;
        // std of each component of the mean is sqrt(sigma/2/n)
        let three_sigma = 3.0 * (sigma / 2.0 / n as f64).sqrt();
        assert!(
            mean.re.abs() < three_sigma && mean.im.abs() < three_sigma,
            "{mean}"
        );
    }

    fn small_config() -> ScenarioConfig {
        ScenarioConfig {
            n_tx_antennas: 4,
            n_rx_antennas: 3,
            n_users: 2,
            ..Default::default()
        }
    }

    #[test]
    fn gen_channels_dimensions_and_determinism() {
        let c = small_config();
        let g = drop_entities(&c, &mut rng(1)).unwrap();
        let a = gen_channels(&g, &c, &mut rng(2)).unwrap();
        let b = gen_channels(&g, &c, &mut rng(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.f_user.len(), 2);
        assert_eq!(a.interbs_error.shape(), (3, 4));
        assert_eq!(a.clutter.shape(), (3, 4));
        assert_eq!(a.a_rx.len(), 3);
        assert!(a.nu.norm() > 0.0);
        let off = ScenarioConfig {
            repeater_enabled: false,
            ..c
        };
        assert_eq!(
            gen_channels(&g, &off, &mut rng(2)).unwrap().nu,
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn zero_residual_power_gives_zero_interbs_error() {
        let c = ScenarioConfig {
            residual_interbs_power: 0.0,
            ..small_config()
        };
        let g = drop_entities(&c, &mut rng(1)).unwrap();
        let ch = gen_channels(&g, &c, &mut rng(3)).unwrap();
        assert!(ch.interbs_error.iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn user_channel_power_follows_pathloss() {
        let c = ScenarioConfig {
            n_users: 1,
            ..small_config()
        };
        let mut g = drop_entities(&c, &mut rng(1)).unwrap();
        g.users[0] = Position::new(60.0, 80.0, 1.5);
        let beta = link_gains(&c, &g).unwrap().f_user[0];
        let mut r = rng(4);
        let draws = 10_000;
        let mean = (0..draws)
            .map(|_| gen_channels(&g, &c, &mut r).unwrap().f_user[0].norm_squared())
            .sum::<f64>()
            / draws as f64;
        let expected = c.n_tx_antennas as f64 * beta;
        assert!((mean / expected - 1.0).abs() < 0.02, "{mean} vs {expected}");
    }

    #[test]
    fn doubling_distance_scales_by_pathloss_ratio() {
        let c = ScenarioConfig {
            n_users: 1,
            ..small_config()
        };
        let mut g = drop_entities(&c, &mut rng(1)).unwrap();
        g.users[0] = Position::new(30.0, 40.0, 1.5);
        let near = link_gains(&c, &g).unwrap();
        let d_near = (g.users[0] - g.tx_bs).norm();
        let dir = (g.users[0] - g.tx_bs) / d_near;
        g.users[0] = g.tx_bs + dir * (2.0 * d_near);
        let far = link_gains(&c, &g).unwrap();
        let ratio = pathloss_linear(2.0 * d_near, c.carrier_ghz, 1.5).unwrap()
            / pathloss_linear(d_near, c.carrier_ghz, 1.5).unwrap();
        assert!((far.f_user[0] / near.f_user[0] / ratio - 1.0).abs() < 1e-9);
        // LOS vectors carry exactly their gain
        let ch = gen_channels(&g, &c, &mut rng(2)).unwrap();
        let lg = link_gains(&c, &g).unwrap();
        assert!((ch.b_tx.norm_squared() / (c.n_tx_antennas as f64 * lg.b_tx) - 1.0).abs() < 1e-12);
        assert!((ch.a_rx.norm_squared() / (c.n_rx_antennas as f64 * lg.a_rx) - 1.0).abs() < 1e-12);
        assert!((ch.g_rep.norm_sqr() / lg.g_rep - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bistatic_product_matches_radar_equation() {
        let c = small_config();
        let g = drop_entities(&c, &mut rng(1)).unwrap();
        let lg = link_gains(&c, &g).unwrap();
        let dt = (g.tx_bs - g.hotspot).norm();
        let dr = (g.rx_bs - g.hotspot).norm();
        let lambda = c.wavelength_m();
        let radar = lambda.powi(2) / ((4.0 * PI).powi(3) * dt.powi(2) * dr.powi(2));
        assert!((lg.a_tx * lg.a_rx / radar - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_rise_reference_sets_forwarded_noise_level() {
        let c = small_config();
        let g = drop_entities(&c, &mut rng(1)).unwrap();
        let lg = link_gains(&c, &g).unwrap();
        let nu = repeater_amplification(&c, &lg);
        let n = c.noise_levels();
        let rise = nu.norm_sqr() * n.repeater * lg.b_rx / n.bs;
        assert!((rise / 100.0 - 1.0).abs() < 1e-12);
        let abs = ScenarioConfig {
            repeater_gain_reference: GainReference::Absolute,
            ..c
        };
        assert!((repeater_amplification(&abs, &lg).norm_sqr() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn clutter_covariance_cases() {
        let unit = ClutterModel::iid(6, 1.0).unwrap();
        assert_eq!(unit.covariance, CMatrix::identity(6, 6));
        let c = ScenarioConfig {
            clutter_suppression: 0.0,
            ..small_config()
        };
        let g = drop_entities(&c, &mut rng(1)).unwrap();
        assert!(matches!(
            clutter_covariance(&c, &g),
            Err(IsacError::Numerical(_))
        ));
        let c = small_config();
        let m = clutter_covariance(&c, &g).unwrap();
        HermitianFactor::new(&m.covariance, "clutter").unwrap();
        assert_eq!(m.dim(), 12);
    }

    #[test]
    fn clutter_draws_match_covariance() {
        let model = ClutterModel::iid(6, 0.7).unwrap();
        let mut r = rng(8);
        let draws = 10_000;
        let mut acc = CMatrix::zeros(6, 6);
        let precision = model.precision().unwrap();
        let mut whitened = 0.0;
        for _ in 0..draws {
            let v = vectorize(&model.draw(3, 2, &mut r));
            acc += &v * v.adjoint();
            whitened += v.dotc(&(&precision * &v)).re / 6.0;
        }
        let emp = acc / C64::new(draws as f64, 0.0);
        for i in 0..6 {
            for j in 0..6 {
                let err = (emp[(i, j)] - model.covariance[(i, j)]).norm();
                assert!(err <= 0.05 * 0.7, "({i},{j}) {}", emp[(i, j)]);
            }
        }
        let mean = whitened / draws as f64;
        assert!((mean - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn leakage_enlarges_detector_prior() {
        let c = ScenarioConfig {
            cancel_repeater_leakage: false,
            ..small_config()
        };
        let g = drop_entities(&c, &mut rng(1)).unwrap();
        let ch = gen_channels(&g, &c, &mut rng(2)).unwrap();
        let base = clutter_covariance(&c, &g).unwrap();
        let enlarged = detector_clutter_model(&c, &base, &ch);
        let leak = vectorize(&ch.repeater_leakage());
        let diff = &enlarged.covariance - &base.covariance - &leak * leak.adjoint();
        assert!(diff.norm() < 1e-12 * enlarged.covariance.norm());
        let cancelled = ScenarioConfig {
            cancel_repeater_leakage: true,
            ..c
        };
        assert_eq!(detector_clutter_model(&cancelled, &base, &ch), base);
    }

    #[test]
    fn channel_dump_round_trip() {
        let c = small_config();
        let g = drop_entities(&c, &mut rng(1)).unwrap();
        let ch = gen_channels(&g, &c, &mut rng(2)).unwrap();
        let mut buf = Vec::new();
        write_channel_dump(&ch, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("field,row,col,re,im\n"));
        assert_eq!(read_channel_dump(buf.as_slice()).unwrap(), ch);
    }
}
