//! Received signals at the repeater terminals, the sensing BS and the users.
//!
//! The sensing BS is modeled after inter-BS cancellation: only the residual
//! error `G~_B x` remains. When `cancel_repeater_leakage` is set the
//! pre-estimated leakage `nu b_r b_t^T x` is also removed, so the effective
//! clutter is `C`; otherwise it is `C + nu b_r b_t^T`.

use rand::Rng;

use crate::channel::ChannelRealization;
use crate::linalg::{complex_normal, complex_normal_vector, CVector, C64};
use crate::precoding::{effective_downlink_channel, TransmitFrame};
use crate::scenario::{NoiseLevels, ScenarioConfig};
use crate::{IsacError, Result};

/// Thermal noise for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraws {
    /// `w_R[tau]`.
    pub repeater: Vec<C64>,
    /// `w_B[tau]`.
    pub bs: Vec<CVector>,
    /// `w_UE[n][tau]`.
    pub ue: Vec<Vec<C64>>,
}

impl NoiseDraws {
    pub fn draw<R: Rng + ?Sized>(
        n_rx: usize,
        n_users: usize,
        slot_length: usize,
        levels: &NoiseLevels,
        rng: &mut R,
    ) -> Self {
        let repeater = (0..slot_length)
            .map(|_| complex_normal(rng, levels.repeater))
            .collect();
        let bs = (0..slot_length)
            .map(|_| complex_normal_vector(rng, n_rx, levels.bs))
            .collect();
        let ue = (0..n_users)
            .map(|_| {
                (0..slot_length)
                    .map(|_| complex_normal(rng, levels.ue))
                    .collect()
            })
            .collect();
        Self { repeater, bs, ue }
    }

    pub fn silent(n_rx: usize, n_users: usize, slot_length: usize) -> Self {
        Self {
            repeater: vec![C64::new(0.0, 0.0); slot_length],
            bs: vec![CVector::zeros(n_rx); slot_length],
            ue: vec![vec![C64::new(0.0, 0.0); slot_length]; n_users],
        }
    }
}

/// Received vectors at the sensing BS over one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingObservation {
    pub per_slot: Vec<CVector>,
}

impl SensingObservation {
    /// `[y[1]; y[2]; ...; y[tau_L]]`.
    pub fn stacked(&self) -> CVector {
        let n: usize = self.per_slot.iter().map(|y| y.len()).sum();
        CVector::from_iterator(n, self.per_slot.iter().flat_map(|y| y.iter().copied()))
    }
}

/// Repeater input `alpha g a_t^T x + b_t^T x` and output `nu (y_in + w_R)`.
pub fn repeater_io(
    x: &CVector,
    channels: &ChannelRealization,
    nu: C64,
    rcs: C64,
    w_rep: C64,
) -> (C64, C64) {
    let y_in = rcs * channels.g_rep * channels.a_tx.dot(x) + channels.b_tx.dot(x);
    (y_in, nu * (y_in + w_rep))
}

fn check_frame(
    frame: &TransmitFrame,
    channels: &ChannelRealization,
    noise: &NoiseDraws,
) -> Result<()> {
    let len = frame.slot_length();
    if noise.repeater.len() != len || noise.bs.len() != len {
        return Err(IsacError::Config(
            "noise draws do not match the slot length".into(),
        ));
    }
    if frame.x.iter().any(|x| x.len() != channels.n_tx()) {
        return Err(IsacError::Config(
            "transmit vectors do not match the antenna count".into(),
        ));
    }
    Ok(())
}

/// Received vector at the sensing BS for one channel use.
pub fn receive_bs_symbol(
    x: &CVector,
    channels: &ChannelRealization,
    w_rep: C64,
    w_bs: &CVector,
    cancel_repeater_leakage: bool,
) -> CVector {
    let (_, y_out) = repeater_io(x, channels, channels.nu, channels.rcs, w_rep);
    let mut y = &channels.a_rx * (channels.rcs * channels.a_tx.dot(x));
    y.axpy(y_out, &channels.b_rx, C64::new(1.0, 0.0));
    y += &channels.interbs_error * x;
    y += &channels.clutter * x;
    y += w_bs;
    if cancel_repeater_leakage {
        let leak = channels.nu * channels.b_tx.dot(x);
        y.axpy(-leak, &channels.b_rx, C64::new(1.0, 0.0));
    }
    y
}

/// `y_BS[tau]` for every channel use of the slot, after inter-BS
/// cancellation.
pub fn receive_bs_slot(
    frame: &TransmitFrame,
    channels: &ChannelRealization,
    noise: &NoiseDraws,
    config: &ScenarioConfig,
) -> Result<SensingObservation> {
    check_frame(frame, channels, noise)?;
    let per_slot = frame
        .x
        .iter()
        .zip(&noise.repeater)
        .zip(&noise.bs)
        .map(|((x, w_r), w_b)| {
            receive_bs_symbol(x, channels, *w_r, w_b, config.cancel_repeater_leakage)
        })
        .collect();
    Ok(SensingObservation { per_slot })
}

/// Received samples at user `user` over the slot. The target-reflected
/// repeater path is not part of the user's model and is left out.
pub fn receive_ue(
    frame: &TransmitFrame,
    channels: &ChannelRealization,
    user: usize,
    noise: &NoiseDraws,
) -> Result<Vec<C64>> {
    if user >= channels.n_users() {
        return Err(IsacError::Config(format!("user index {user} out of range")));
    }
    check_frame(frame, channels, noise)?;
    let w_ue = noise
        .ue
        .get(user)
        .filter(|w| w.len() == frame.slot_length())
        .ok_or_else(|| IsacError::Config("user noise draws do not match the slot".into()))?;
    let f = &channels.f_user[user];
    let h = channels.h_user[user];
    Ok(frame
        .x
        .iter()
        .zip(&noise.repeater)
        .zip(w_ue)
        .map(|((x, w_r), w_u)| {
            let (_, relayed) = repeater_io(x, channels, channels.nu, C64::new(0.0, 0.0), *w_r);
            f.dot(x) + h * relayed + w_u
        })
        .collect())
}

/// The effective downlink channel seen by `user`, for reference in tests
/// and metrics.
pub fn user_effective_channel(channels: &ChannelRealization, user: usize) -> CVector {
    effective_downlink_channel(
        &channels.f_user[user],
        channels.h_user[user],
        channels.nu,
        &channels.b_tx,
    )
}
