//! Brute-force reference for the GLRT statistic.
//!
//! Each hypothesis' negative log-posterior is written as one whitened
//! least-squares problem over the stacked slot,
//!
//! `f(z) = sum_tau ||L_s^{-1}(y - [r | B] z)||^2 + |alpha|^2 / sigma_T^2 + ||L_c^{-1} c||^2`,
//!
//! real-ified to twice its size and minimized with a dense QR solve. None of
//! the closed-form statistics from the parent module are used; the sensing
//! channel and the clutter regressor columns are rebuilt here from the raw
//! channels.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::channel::{ChannelRealization, ClutterModel};
use crate::detector::{DetectorModel, SensingNoiseParams};
use crate::linalg::{
    self, complex_normal, complex_normal_matrix, complex_normal_vector, CMatrix, CVector, C64,
};
use crate::precoding::TransmitFrame;
use crate::propagation::{receive_bs_slot, NoiseDraws, SensingObservation};
use crate::scenario::{NoiseLevels, PowerSplit, ScenarioConfig};
use crate::{IsacError, Result};

/// Relative first-order optimality tolerance on the least-squares solution.
const OPTIMALITY_TOL: f64 = 1e-8;

fn cholesky_lower(m: CMatrix, what: &str) -> Result<CMatrix> {
    linalg::cholesky_lower(&m)
        .ok_or_else(|| IsacError::Oracle(format!("{what} is not positive definite")))
}

fn lower_solve(l: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    l.solve_lower_triangular(b)
        .ok_or_else(|| IsacError::Oracle("singular whitening factor".into()))
}

/// `min_z f(z)` for H1 (`with_rcs`) or H0.
pub fn minimum_negative_log_posterior(
    observation: &SensingObservation,
    frame: &TransmitFrame,
    channels: &ChannelRealization,
    model: &DetectorModel,
    with_rcs: bool,
) -> Result<f64> {
    let nt = channels.a_tx.len();
    let nr = channels.a_rx.len();
    let dim = nt * nr;
    let offset = usize::from(with_rcs);
    let unknowns = dim + offset;
    let slots = frame.x.len();
    let rows = slots * nr + offset + dim;

    let mut a = CMatrix::zeros(rows, unknowns);
    let mut b = CVector::zeros(rows);

    let target_path = &channels.a_rx * channels.a_tx.transpose()
        + &channels.b_rx * channels.a_tx.transpose() * (channels.nu * channels.g_rep);
    let noise: &SensingNoiseParams = &model.noise;
    let repeater_cov = &channels.b_rx
        * channels.b_rx.adjoint()
        * C64::new(noise.nu.norm_sqr() * noise.repeater_noise_power, 0.0);

    for (tau, (x, y)) in frame.x.iter().zip(&observation.per_slot).enumerate() {
        let floor = noise.residual_interbs_power * x.norm_squared() + noise.bs_noise_power;
        let cov = &repeater_cov + CMatrix::identity(nr, nr) * C64::new(floor, 0.0);
        let l = cholesky_lower(cov, "sensing noise covariance")?;

        let mut block = CMatrix::zeros(nr, unknowns);
        if with_rcs {
            block.set_column(0, &(&target_path * x));
        }
        for j in 0..nt {
            for i in 0..nr {
                // C = e_i e_j^T gives C x = e_i x_j
                block[(i, offset + j * nr + i)] = x[j];
            }
        }
        let rhs = CMatrix::from_column_slice(nr, 1, y.as_slice());
        let wa = lower_solve(&l, &block)?;
        let wb = lower_solve(&l, &rhs)?;
        a.view_mut((tau * nr, 0), (nr, unknowns)).copy_from(&wa);
        b.rows_mut(tau * nr, nr).copy_from(&wb.column(0));
    }

    let prior_row = slots * nr;
    if with_rcs {
        a[(prior_row, 0)] = C64::new(1.0 / model.rcs_variance.sqrt(), 0.0);
    }
    let lc = cholesky_lower(model.clutter.covariance.clone(), "clutter covariance")?;
    let lc_inv = lower_solve(&lc, &CMatrix::identity(dim, dim))?;
    a.view_mut((prior_row + offset, offset), (dim, dim))
        .copy_from(&lc_inv);

    least_squares_minimum(&a, &b)
}

/// `min_z ||b - A z||^2` through the real-ified system.
fn least_squares_minimum(a: &CMatrix, b: &CVector) -> Result<f64> {
    let (m, n) = a.shape();
    let ar = DMatrix::from_fn(2 * m, 2 * n, |i, j| {
        let z = a[(i % m, j % n)];
        match (i < m, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let br = DVector::from_fn(2 * m, |i, _| if i < m { b[i].re } else { b[i - m].im });

    let qr = ar.clone().qr();
    let qtb = qr.q().transpose() * &br;
    let z = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| IsacError::Oracle("least-squares system is rank deficient".into()))?;
    let residual = &br - &ar * &z;
    let gradient = ar.transpose() * &residual;
    let scale = ar.norm() * br.norm();
    if gradient.norm() > OPTIMALITY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(IsacError::Oracle(format!(
            "least-squares optimality residual {:.3e} exceeds tolerance",
            gradient.norm() / scale
        )));
    }
    Ok(residual.norm_squared())
}

/// Difference of the maximized H1 and H0 log-posteriors, excluding the
/// constant `-ln(pi sigma_T^2)` exactly as the closed-form statistic does.
pub fn oracle_loglike_ratio(
    observation: &SensingObservation,
    frame: &TransmitFrame,
    channels: &ChannelRealization,
    model: &DetectorModel,
) -> Result<f64> {
    let h1 = minimum_negative_log_posterior(observation, frame, channels, model, true)?;
    let h0 = minimum_negative_log_posterior(observation, frame, channels, model, false)?;
    Ok(h0 - h1)
}

/// A randomized, unit-scale detection problem for oracle comparisons.
#[derive(Debug, Clone)]
pub struct OracleInstance {
    pub observation: SensingObservation,
    pub frame: TransmitFrame,
    pub channels: ChannelRealization,
    pub model: DetectorModel,
}

/// Random channels, transmit vectors, noise parameters and a correlated
/// clutter prior; the target is present with probability one half.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    n_tx: usize,
    n_rx: usize,
    slot_length: usize,
) -> Result<OracleInstance> {
    let dim = n_tx * n_rx;
    let g = complex_normal_matrix(rng, dim, dim, 1.0);
    let covariance = &g * g.adjoint() / C64::new(dim as f64, 0.0)
        + CMatrix::identity(dim, dim) * C64::new(0.5, 0.0);
    let clutter_factor = cholesky_lower(covariance.clone(), "random clutter covariance")?;
    let clutter_vec = &clutter_factor * complex_normal_vector(rng, dim, 1.0);

    let rcs_variance = 10f64.powf(rng.random_range(-1.0..1.0));
    let noise = SensingNoiseParams {
        residual_interbs_power: rng.random_range(0.05..0.5),
        repeater_noise_power: rng.random_range(0.1..1.0),
        bs_noise_power: rng.random_range(0.5..1.5),
        nu: complex_normal(rng, 1.0),
    };
    let rcs = if rng.random::<bool>() {
        complex_normal(rng, rcs_variance)
    } else {
        C64::new(0.0, 0.0)
    };
    let channels = ChannelRealization {
        f_user: vec![],
        h_user: vec![],
        a_tx: complex_normal_vector(rng, n_tx, 1.0),
        a_rx: complex_normal_vector(rng, n_rx, 1.0),
        b_tx: complex_normal_vector(rng, n_tx, 1.0),
        b_rx: complex_normal_vector(rng, n_rx, 1.0),
        g_rep: complex_normal(rng, 1.0),
        interbs_error: complex_normal_matrix(rng, n_rx, n_tx, noise.residual_interbs_power),
        clutter: CMatrix::from_column_slice(n_rx, n_tx, clutter_vec.as_slice()),
        rcs,
        nu: noise.nu,
    };
    let frame = TransmitFrame {
        user_symbols: vec![],
        sensing_symbols: vec![C64::new(1.0, 0.0); slot_length],
        x: (0..slot_length)
            .map(|_| complex_normal_vector(rng, n_tx, 1.0))
            .collect(),
        power: PowerSplit::new(vec![], 1.0)?,
    };
    let levels = NoiseLevels {
        bs: noise.bs_noise_power,
        repeater: noise.repeater_noise_power,
        ue: 1.0,
    };
    let draws = NoiseDraws::draw(n_rx, 0, slot_length, &levels, rng);
    let config = ScenarioConfig {
        cancel_repeater_leakage: true,
        ..Default::default()
    };
    let observation = receive_bs_slot(&frame, &channels, &draws, &config)?;
    let model = DetectorModel::new(
        ClutterModel {
            covariance,
            entry_variance: 1.0,
        },
        noise,
        rcs_variance,
    )?;
    Ok(OracleInstance {
        observation,
        frame,
        channels,
        model,
    })
}
