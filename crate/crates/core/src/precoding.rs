//! User and sensing precoders, power allocation and the per-slot transmit
//! frame `x[tau] = sqrt(rho) (sum_n sqrt(pi_n) p_n s_n[tau] + sqrt(pi_T) p_T s_T[tau])`.
//!
//! Received signals use the unconjugated form `f^T x`. With
//! `conjugate_convention` on, precoders are built from `conj(f)` so that
//! user beams add coherently and nulls are exact; with it off the channel
//! vectors are used as given.

use rand::Rng;

use crate::channel::ChannelRealization;
use crate::linalg::{complex_normal, CMatrix, CVector, HermitianFactor, C64};
use crate::scenario::{PowerSplit, PrecoderMode, ScenarioConfig, SymbolAlphabet};
use crate::{IsacError, Result};

/// Relative singular-value cutoff when extracting the user subspace.
const RANK_TOL: f64 = 1e-10;
/// A projected sensing direction shorter than this fraction of the input is
/// treated as annihilated.
const NULLED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    /// Unit-norm `p_1..p_K`.
    pub users: Vec<CVector>,
    /// Unit-norm `p_T`.
    pub sensing: CVector,
    /// `epsilon_n`.
    pub user_normalizers: Vec<f64>,
    /// `epsilon_T`.
    pub sensing_normalizer: f64,
}

/// Symbols and transmit vectors of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitFrame {
    /// `user_symbols[n][tau]`.
    pub user_symbols: Vec<Vec<C64>>,
    pub sensing_symbols: Vec<C64>,
    /// `x[tau]`.
    pub x: Vec<CVector>,
    pub power: PowerSplit,
}

impl TransmitFrame {
    pub fn slot_length(&self) -> usize {
        self.x.len()
    }
}

fn apply_convention(v: &CVector, conjugate: bool) -> CVector {
    if conjugate {
        v.conjugate()
    } else {
        v.clone()
    }
}

fn normalize(v: CVector) -> Result<(CVector, f64)> {
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(IsacError::Numerical(
            "cannot normalize a zero or non-finite precoder".into(),
        ));
    }
    Ok((v / C64::new(norm, 0.0), 1.0 / norm))
}

/// `f_n + nu h_n b_t`: the BS-to-user channel including the repeater relay.
pub fn effective_downlink_channel(
    f_user: &CVector,
    h_user: C64,
    nu: C64,
    b_tx: &CVector,
) -> CVector {
    f_user + b_tx * (nu * h_user)
}

pub fn effective_downlink_channels(channels: &ChannelRealization) -> Vec<CVector> {
    channels
        .f_user
        .iter()
        .zip(&channels.h_user)
        .map(|(f, h)| effective_downlink_channel(f, *h, channels.nu, &channels.b_tx))
        .collect()
}

/// Regularized zero-forcing: `p_n ∝ (sum c(f) c(f)^H + zeta I)^{-1} c(f_n)`.
/// Returns the unit-norm precoders and their normalizers.
pub fn rzf_precoders(
    channels: &[CVector],
    zf_regularizer: f64,
    conjugate: bool,
) -> Result<(Vec<CVector>, Vec<f64>)> {
    if !(zf_regularizer > 0.0) {
        return Err(IsacError::Config("zf_regularizer must be positive".into()));
    }
    let Some(first) = channels.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let nt = first.len();
    let columns: Vec<CVector> = channels
        .iter()
        .map(|f| apply_convention(f, conjugate))
        .collect();
    let mut gram = CMatrix::identity(nt, nt) * C64::new(zf_regularizer, 0.0);
    for c in &columns {
        gram += c * c.adjoint();
    }
    let factor = HermitianFactor::new(&gram, "RZF Gram matrix")?;
    columns
        .iter()
        .map(|c| normalize(factor.solve(c)))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().unzip())
}

/// Orthonormal basis of the column span of `vectors`, rank-revealing.
fn orthonormal_basis(vectors: &[CVector], n: usize) -> CMatrix {
    if vectors.is_empty() {
        return CMatrix::zeros(n, 0);
    }
    let m = CMatrix::from_columns(vectors);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > RANK_TOL * smax && **s > 0.0)
        .map(|(i, _)| i)
        .collect();
    CMatrix::from_columns(
        &keep
            .iter()
            .map(|&i| u.column(i).into_owned())
            .collect::<Vec<_>>(),
    )
}

fn project_out(direction: &CVector, basis: &CMatrix) -> CVector {
    if basis.ncols() == 0 {
        return direction.clone();
    }
    direction - basis * (basis.adjoint() * direction)
}

/// Sensing precoder `p_T` for the requested mode.
pub fn target_precoder(
    mode: PrecoderMode,
    a_tx: &CVector,
    b_tx: &CVector,
    channels: &[CVector],
    conjugate: bool,
) -> Result<(CVector, f64)> {
    let target = apply_convention(a_tx, conjugate);
    let projected = match mode {
        PrecoderMode::TargetCentric => target.clone(),
        PrecoderMode::CommCentric => {
            let cols: Vec<CVector> = channels
                .iter()
                .map(|f| apply_convention(f, conjugate))
                .collect();
            project_out(&target, &orthonormal_basis(&cols, target.len()))
        }
        PrecoderMode::RepeaterNull => {
            // (I - b^* b^T / ||b||^2) c(a_t)
            let bb = b_tx.norm_squared();
            if bb == 0.0 {
                target.clone()
            } else {
                &target - b_tx.conjugate() * (b_tx.dot(&target) / bb)
            }
        }
    };
    let reference = target.norm();
    let residual = projected.norm() / reference;
    if !(reference > 0.0) || residual < NULLED_TOL {
        return Err(IsacError::NulledSensingDirection { residual });
    }
    normalize(projected)
}

/// Builds all precoders for one channel realization.
pub fn build_precoders(
    config: &ScenarioConfig,
    channels: &ChannelRealization,
) -> Result<PrecoderSet> {
    build_precoders_with_mode(config, channels, config.precoder_mode)
}

pub fn build_precoders_with_mode(
    config: &ScenarioConfig,
    channels: &ChannelRealization,
    mode: PrecoderMode,
) -> Result<PrecoderSet> {
    let effective = effective_downlink_channels(channels);
    let (users, user_normalizers) = rzf_precoders(
        &effective,
        config.zf_regularizer_value(),
        config.conjugate_convention,
    )?;
    let (sensing, sensing_normalizer) = target_precoder(
        mode,
        &channels.a_tx,
        &channels.b_tx,
        &effective,
        config.conjugate_convention,
    )?;
    Ok(PrecoderSet {
        users,
        sensing,
        user_normalizers,
        sensing_normalizer,
    })
}

pub fn draw_symbol<R: Rng + ?Sized>(alphabet: SymbolAlphabet, rng: &mut R) -> C64 {
    match alphabet {
        SymbolAlphabet::Gaussian => complex_normal(rng, 1.0),
        SymbolAlphabet::Qpsk => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let re = if rng.random::<bool>() { h } else { -h };
            let im = if rng.random::<bool>() { h } else { -h };
            C64::new(re, im)
        }
    }
}

/// Superimposes the streams for given symbols.
pub fn frame_from_symbols(
    precoders: &PrecoderSet,
    power: PowerSplit,
    tx_power_watt: f64,
    user_symbols: Vec<Vec<C64>>,
    sensing_symbols: Vec<C64>,
) -> Result<TransmitFrame> {
    if user_symbols.len() != precoders.users.len() || power.users.len() != precoders.users.len() {
        return Err(IsacError::Config(
            "user count mismatch between precoders, power and symbols".into(),
        ));
    }
    let len = sensing_symbols.len();
    if user_symbols.iter().any(|s| s.len() != len) {
        return Err(IsacError::Config(
            "symbol sequences differ in length".into(),
        ));
    }
    let root_rho = tx_power_watt.sqrt();
    let user_amp: Vec<f64> = power.users.iter().map(|p| root_rho * p.sqrt()).collect();
    let sensing_amp = root_rho * power.sensing.sqrt();
    let x = (0..len)
        .map(|t| {
            let mut x = &precoders.sensing * (sensing_symbols[t] * sensing_amp);
            for ((p, s), a) in precoders.users.iter().zip(&user_symbols).zip(&user_amp) {
                x.axpy(s[t] * *a, p, C64::new(1.0, 0.0));
            }
            x
        })
        .collect();
    Ok(TransmitFrame {
        user_symbols,
        sensing_symbols,
        x,
        power,
    })
}

/// Draws fresh symbols for every stream and builds `x[1..tau_L]`.
pub fn build_transmit_frame<R: Rng + ?Sized>(
    precoders: &PrecoderSet,
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<TransmitFrame> {
    let power = config.power_split()?;
    let len = config.slot_length;
    let alphabet = config.symbol_alphabet;
    let user_symbols = (0..precoders.users.len())
        .map(|_| (0..len).map(|_| draw_symbol(alphabet, rng)).collect())
        .collect();
    let sensing_symbols = (0..len).map(|_| draw_symbol(alphabet, rng)).collect();
    frame_from_symbols(
        precoders,
        power,
        config.tx_power_watt,
        user_symbols,
        sensing_symbols,
    )
}
