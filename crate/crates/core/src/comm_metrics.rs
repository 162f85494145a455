//! Downlink SINR and spectral efficiency.

use crate::channel::ChannelRealization;
use crate::linalg::CVector;
use crate::precoding::{effective_downlink_channels, PrecoderSet};
use crate::scenario::{PowerSplit, ScenarioConfig};
use crate::{IsacError, Result};

/// Per-user power budget of the received signal, in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserMetrics {
    pub sinr: f64,
    /// bits/s/Hz
    pub se: f64,
    pub signal_power: f64,
    pub multiuser_interference: f64,
    pub sensing_interference: f64,
    pub noise_power: f64,
}

/// `log2(1 + sinr)`.
pub fn spectral_efficiency(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// SINR of `user` from the effective channels `f_dot` and the precoders.
///
/// The desired stream is excluded from the multiuser sum unless
/// `literal_interference` is set.
pub fn sinr_from_parts(
    user: usize,
    effective: &[CVector],
    precoders: &PrecoderSet,
    power: &PowerSplit,
    tx_power_watt: f64,
    noise_power: f64,
    literal_interference: bool,
) -> Result<UserMetrics> {
    let f = effective
        .get(user)
        .ok_or_else(|| IsacError::Config(format!("user index {user} out of range")))?;
    if precoders.users.len() != effective.len() || power.users.len() != effective.len() {
        return Err(IsacError::Config(
            "user count mismatch in SINR evaluation".into(),
        ));
    }
    let gain = |p: &CVector| f.dot(p).norm_sqr();
    let signal_power = tx_power_watt * power.users[user] * gain(&precoders.users[user]);
    let multiuser_interference = tx_power_watt
        * precoders
            .users
            .iter()
            .zip(&power.users)
            .enumerate()
            .filter(|(k, _)| literal_interference || *k != user)
            .map(|(_, (p, pi))| pi * gain(p))
            .sum::<f64>();
    let sensing_interference = tx_power_watt * power.sensing * gain(&precoders.sensing);
    let sinr = signal_power / (multiuser_interference + sensing_interference + noise_power);
    Ok(UserMetrics {
        sinr,
        se: spectral_efficiency(sinr),
        signal_power,
        multiuser_interference,
        sensing_interference,
        noise_power,
    })
}

/// Instantaneous SINR of `user` with noise `|nu|^2 |h_n|^2 sigma_R^2 + sigma_UE^2`.
pub fn user_sinr(
    user: usize,
    precoders: &PrecoderSet,
    channels: &ChannelRealization,
    config: &ScenarioConfig,
) -> Result<UserMetrics> {
    let h = channels
        .h_user
        .get(user)
        .ok_or_else(|| IsacError::Config(format!("user index {user} out of range")))?;
    let levels = config.noise_levels();
    let noise = channels.nu.norm_sqr() * h.norm_sqr() * levels.repeater + levels.ue;
    sinr_from_parts(
        user,
        &effective_downlink_channels(channels),
        precoders,
        &config.power_split()?,
        config.tx_power_watt,
        noise,
        config.literal_sinr_interference,
    )
}

/// Metrics of every user.
pub fn all_user_sinr(
    precoders: &PrecoderSet,
    channels: &ChannelRealization,
    config: &ScenarioConfig,
) -> Result<Vec<UserMetrics>> {
    (0..channels.n_users())
        .map(|n| user_sinr(n, precoders, channels, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_normal, complex_normal_vector, CMatrix, C64};
    use crate::precoding::build_precoders_with_mode;
    use crate::scenario::PrecoderMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_channels(seed: u64, nt: usize, k: usize, nu: C64) -> ChannelRealization {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ChannelRealization {
            f_user: (0..k)
                .map(|_| complex_normal_vector(&mut rng, nt, 1.0))
                .collect(),
            h_user: (0..k).map(|_| complex_normal(&mut rng, 1.0)).collect(),
            a_tx: complex_normal_vector(&mut rng, nt, 1.0),
            a_rx: complex_normal_vector(&mut rng, 2, 1.0),
            b_tx: complex_normal_vector(&mut rng, nt, 1.0),
            b_rx: complex_normal_vector(&mut rng, 2, 1.0),
            g_rep: complex_normal(&mut rng, 1.0),
            interbs_error: CMatrix::zeros(2, nt),
            clutter: CMatrix::zeros(2, nt),
            rcs: c(0.0, 0.0),
            nu,
        }
    }

    fn unit_config(k: usize, sensing: f64) -> ScenarioConfig {
        ScenarioConfig {
            n_tx_antennas: 6,
            n_users: k,
            sensing_power_fraction: sensing,
            ue_noise_power_watt: Some(0.1),
            repeater_noise_power_watt: Some(0.2),
            zf_regularizer: Some(0.05),
            ..Default::default()
        }
    }

    #[test]
    fn spectral_efficiency_points() {
        assert_eq!(spectral_efficiency(0.0), 0.0);
        assert_eq!(spectral_efficiency(1.0), 1.0);
        assert_eq!(spectral_efficiency(3.0), 2.0);
    }

    #[test]
    fn single_user_hand_case() {
        // ||f||^2 = 4, p = conj(f)/||f||, rho = 1, sigma_UE^2 = 2 -> SINR 2
        let f = CVector::from_vec(vec![c(1.0, 1.0), c(1.0, -1.0)]);
        let set = PrecoderSet {
            users: vec![f.conjugate() / c(2.0, 0.0)],
            sensing: CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
            user_normalizers: vec![0.5],
            sensing_normalizer: 1.0,
        };
        let power = PowerSplit::new(vec![1.0], 0.0).unwrap();
        let m = sinr_from_parts(0, &[f], &set, &power, 1.0, 2.0, false).unwrap();
        assert!((m.sinr - 2.0).abs() < 1e-12);
        assert!((m.se - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn repeater_off_noise_is_ue_noise() {
        let ch = random_channels(1, 6, 3, c(0.0, 0.0));
        let cfg = unit_config(3, 0.4);
        let set = build_precoders_with_mode(&cfg, &ch, PrecoderMode::TargetCentric).unwrap();
        let m = user_sinr(1, &set, &ch, &cfg).unwrap();
        assert_eq!(m.noise_power, 0.1);
        let on = random_channels(1, 6, 3, c(2.0, 1.0));
        let m = user_sinr(1, &set, &on, &cfg).unwrap();
        assert!((m.noise_power - (5.0 * on.h_user[1].norm_sqr() * 0.2 + 0.1)).abs() < 1e-12);
        assert!(user_sinr(3, &set, &on, &cfg).is_err());
    }

    #[test]
    fn comm_centric_nulls_sensing_interference() {
        for seed in 0..20 {
            let ch = random_channels(seed, 6, 4, c(0.5, -0.3));
            let cfg = unit_config(4, 0.5);
            let comm = build_precoders_with_mode(&cfg, &ch, PrecoderMode::CommCentric).unwrap();
            let target = build_precoders_with_mode(&cfg, &ch, PrecoderMode::TargetCentric).unwrap();
            for n in 0..4 {
                let fd = crate::propagation::user_effective_channel(&ch, n);
                let mc = user_sinr(n, &comm, &ch, &cfg).unwrap();
                let mt = user_sinr(n, &target, &ch, &cfg).unwrap();
                assert!(
                    mc.sensing_interference <= 1e-20 * cfg.tx_power_watt * 0.5 * fd.norm_squared()
                );
                assert!(mc.sensing_interference <= mt.sensing_interference);
            }
        }
    }

    #[test]
    fn decomposition_and_phase_invariance() {
        let ch = random_channels(5, 6, 3, c(0.4, 0.9));
        let cfg = unit_config(3, 0.3);
        let set = build_precoders_with_mode(&cfg, &ch, PrecoderMode::TargetCentric).unwrap();
        let eff = effective_downlink_channels(&ch);
        let power = cfg.power_split().unwrap();
        for n in 0..3 {
            let m = user_sinr(n, &set, &ch, &cfg).unwrap();
            let denom = m.multiuser_interference + m.sensing_interference + m.noise_power;
            assert!((m.sinr * denom - m.signal_power).abs() <= 1e-12 * m.signal_power);
            assert!((m.se - spectral_efficiency(m.sinr)).abs() < 1e-15);

            let mut rotated = eff.clone();
            rotated[n] *= C64::from_polar(1.0, 1.234);
            let r = sinr_from_parts(n, &rotated, &set, &power, 1.0, m.noise_power, false).unwrap();
            assert!((r.sinr - m.sinr).abs() <= 1e-12 * m.sinr);
        }
    }

    #[test]
    fn literal_interference_counts_own_stream() {
        let ch = random_channels(6, 6, 2, c(0.0, 0.0));
        let cfg = unit_config(2, 0.2);
        let set = build_precoders_with_mode(&cfg, &ch, PrecoderMode::TargetCentric).unwrap();
        let std = user_sinr(0, &set, &ch, &cfg).unwrap();
        let lit = user_sinr(
            0,
            &set,
            &ch,
            &ScenarioConfig {
                literal_sinr_interference: true,
                ..cfg
            },
        )
        .unwrap();
        assert!(
            (lit.multiuser_interference - std.multiuser_interference - std.signal_power).abs()
                < 1e-12
        );
        assert!(lit.sinr < std.sinr);
    }
}
