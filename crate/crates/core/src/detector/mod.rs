//! GLRT target detection with joint MAP estimation of the RCS and the
//! effective clutter channel.
//!
//! Per channel use the sensing BS observes
//! `y[tau] = r[tau] alpha + B[tau] c + w[tau]` with `B[tau] = x[tau]^T ⊗ I`,
//! `c = vec(C)`, `w[tau] ~ CN(0, Sigma_s[tau])`, `alpha ~ CN(0, sigma_T^2)` and
//! `c ~ CN(0, Sigma_c)`. Maximizing the posterior over `z = [alpha; c]` under
//! H1 and over `c` under H0 gives the log-ratio
//!
//! `T = t_H1^H Q_H1^{-1} t_H1 - t_H0^H Q_H0^{-1} t_H0`
//!
//! where the constant `-ln(pi sigma_T^2)` is folded into the threshold. Since
//! `Q_H0` is the trailing block of `Q_H1` and `t_H0` the trailing part of
//! `t_H1`, both quadratic forms come out of a single Cholesky factorization
//! of `Q_H1` with the RCS unknown ordered last; `T` is then the square of the
//! last whitened component and is never formed as a difference.

pub mod calibration;
pub mod oracle;

use crate::channel::{detector_clutter_model, ChannelRealization, ClutterModel};
use crate::linalg::{hermitian_part, CMatrix, CVector, HermitianFactor, C64};
use crate::precoding::TransmitFrame;
use crate::propagation::SensingObservation;
use crate::scenario::ScenarioConfig;
use crate::{IsacError, Result};

pub use calibration::{calibrate_threshold, empirical_pfa, quantile_threshold, Calibration};
pub use oracle::oracle_loglike_ratio;

/// Largest imaginary residue tolerated on a quadratic form that must be real.
const IMAG_TOL: f64 = 1e-9;

/// Parameters of the sensing-noise covariance
/// `Sigma_s = zeta^2 ||x||^2 I + |nu|^2 sigma_R^2 b_r b_r^H + sigma_BS^2 I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingNoiseParams {
    pub residual_interbs_power: f64,
    pub repeater_noise_power: f64,
    pub bs_noise_power: f64,
    pub nu: C64,
}

impl SensingNoiseParams {
    pub fn from_config(config: &ScenarioConfig, nu: C64) -> Self {
        let levels = config.noise_levels();
        Self {
            residual_interbs_power: config.residual_interbs_power,
            repeater_noise_power: levels.repeater,
            bs_noise_power: levels.bs,
            nu,
        }
    }
}

/// Everything the detector knows a priori.
#[derive(Debug, Clone)]
pub struct DetectorModel {
    pub clutter: ClutterModel,
    /// `Sigma_c^{-1}`, cached.
    pub clutter_precision: CMatrix,
    pub noise: SensingNoiseParams,
    pub rcs_variance: f64,
}

impl DetectorModel {
    pub fn new(
        clutter: ClutterModel,
        noise: SensingNoiseParams,
        rcs_variance: f64,
    ) -> Result<Self> {
        if !(rcs_variance > 0.0) {
            return Err(IsacError::Numerical(format!(
                "rcs variance must be positive, got {rcs_variance}"
            )));
        }
        if !(noise.bs_noise_power > 0.0) {
            return Err(IsacError::Numerical(
                "BS noise power must be positive".into(),
            ));
        }
        let clutter_precision = clutter.precision()?;
        Ok(Self {
            clutter,
            clutter_precision,
            noise,
            rcs_variance,
        })
    }

    /// Model for a configured study: clutter prior (enlarged by the repeater
    /// leakage when it is not cancelled), noise powers and RCS variance.
    pub fn from_config(
        config: &ScenarioConfig,
        base_clutter: &ClutterModel,
        channels: &ChannelRealization,
    ) -> Result<Self> {
        Self::new(
            detector_clutter_model(config, base_clutter, channels),
            SensingNoiseParams::from_config(config, channels.nu),
            config.rcs_variance,
        )
    }

    pub fn with_rcs_variance(&self, rcs_variance: f64) -> Result<Self> {
        if !(rcs_variance > 0.0) {
            return Err(IsacError::Numerical(format!(
                "rcs variance must be positive, got {rcs_variance}"
            )));
        }
        Ok(Self {
            rcs_variance,
            ..self.clone()
        })
    }
}

/// `B = x^T ⊗ I_{N_r}`, so that `B vec(C) = C x`.
pub fn regressor(x: &CVector, n_rx: usize) -> CMatrix {
    let nt = x.len();
    let mut b = CMatrix::zeros(n_rx, nt * n_rx);
    for (j, xj) in x.iter().enumerate() {
        for i in 0..n_rx {
            b[(i, j * n_rx + i)] = *xj;
        }
    }
    b
}

pub fn sensing_noise_cov(x: &CVector, params: &SensingNoiseParams, b_rx: &CVector) -> CMatrix {
    let n = b_rx.len();
    let diag = params.residual_interbs_power * x.norm_squared() + params.bs_noise_power;
    let repeater = params.nu.norm_sqr() * params.repeater_noise_power;
    let mut cov = b_rx * b_rx.adjoint() * C64::new(repeater, 0.0);
    for i in 0..n {
        cov[(i, i)] += diag;
    }
    cov
}

/// Equivalent sensing channel `r = (a_r + nu g b_r) (a_t^T x)`.
pub fn sensing_channel(
    x: &CVector,
    a_tx: &CVector,
    a_rx: &CVector,
    b_rx: &CVector,
    g: C64,
    nu: C64,
) -> CVector {
    (a_rx + b_rx * (nu * g)) * a_tx.dot(x)
}

/// Sufficient statistics of one slot.
///
/// `Q_H1 = [[q_aa, m^H], [m, Q_H0]]` and `t_H1 = [t_alpha; t_H0]`; the
/// full matrices are available through [`q_h1`](Self::q_h1) and
/// [`t_h1`](Self::t_h1).
#[derive(Debug, Clone)]
pub struct DetectorWorkspace {
    /// `Sigma_s[tau]`.
    pub sigma_s: Vec<CMatrix>,
    /// `r[tau]`.
    pub sensing_channels: Vec<CVector>,
    /// `sum r^H Sigma_s^{-1} y`.
    pub t_alpha: C64,
    /// `sum B^H Sigma_s^{-1} y`.
    pub t_h0: CVector,
    /// `sum r^H Sigma_s^{-1} r`, without the prior term.
    pub q_alpha_data: f64,
    /// `m = sum B^H Sigma_s^{-1} r`.
    pub q_cross: CVector,
    /// `sum B^H Sigma_s^{-1} B + Sigma_c^{-1}`.
    pub q_h0: CMatrix,
    pub rcs_variance: f64,
}

impl DetectorWorkspace {
    /// Top-left entry of `Q_H1`.
    pub fn q_alpha_alpha(&self) -> f64 {
        self.q_alpha_data + 1.0 / self.rcs_variance
    }

    pub fn t_h1(&self) -> CVector {
        let n = self.t_h0.len();
        CVector::from_fn(n + 1, |i, _| {
            if i == 0 {
                self.t_alpha
            } else {
                self.t_h0[i - 1]
            }
        })
    }

    pub fn q_h1(&self) -> CMatrix {
        let n = self.t_h0.len();
        let mut q = CMatrix::zeros(n + 1, n + 1);
        q[(0, 0)] = C64::new(self.q_alpha_alpha(), 0.0);
        for i in 0..n {
            q[(i + 1, 0)] = self.q_cross[i];
            q[(0, i + 1)] = self.q_cross[i].conj();
        }
        q.view_mut((1, 1), (n, n)).copy_from(&self.q_h0);
        q
    }

    pub fn with_rcs_variance(&self, rcs_variance: f64) -> Self {
        Self {
            rcs_variance,
            ..self.clone()
        }
    }
}

/// Builds `t_H1`, `t_H0`, `Q_H1`, `Q_H0` for one observed slot.
pub fn assemble_statistics(
    observation: &SensingObservation,
    frame: &TransmitFrame,
    channels: &ChannelRealization,
    model: &DetectorModel,
) -> Result<DetectorWorkspace> {
    let nr = channels.n_rx();
    let nt = channels.n_tx();
    let dim = nt * nr;
    if observation.per_slot.len() != frame.slot_length() {
        return Err(IsacError::Config(
            "observation and frame differ in slot length".into(),
        ));
    }
    if model.clutter.dim() != dim {
        return Err(IsacError::Config(format!(
            "clutter prior has dimension {}, expected {dim}",
            model.clutter.dim()
        )));
    }
    let mut t_alpha = C64::new(0.0, 0.0);
    let mut t_h0 = CVector::zeros(dim);
    let mut q_alpha_data = 0.0;
    let mut q_cross = CVector::zeros(dim);
    let mut q_h0 = CMatrix::zeros(dim, dim);
    let mut sigma_s = Vec::with_capacity(frame.slot_length());
    let mut sensing_channels = Vec::with_capacity(frame.slot_length());

    for (x, y) in frame.x.iter().zip(&observation.per_slot) {
        if x.len() != nt || y.len() != nr {
            return Err(IsacError::Config(
                "slot vector dimensions do not match the channels".into(),
            ));
        }
        let cov = sensing_noise_cov(x, &model.noise, &channels.b_rx);
        let factor = HermitianFactor::new(&cov, "sensing noise covariance")?;
        let r = sensing_channel(
            x,
            &channels.a_tx,
            &channels.a_rx,
            &channels.b_rx,
            channels.g_rep,
            channels.nu,
        );
        let wy = factor.solve(y);
        let wr = factor.solve(&r);
        let inv = factor.inverse();

        t_alpha += r.dotc(&wy);
        q_alpha_data += r.dotc(&wr).re;
        // B^H v = conj(x) ⊗ v
        for (j, xj) in x.iter().enumerate() {
            let cj = xj.conj();
            for i in 0..nr {
                t_h0[j * nr + i] += cj * wy[i];
                q_cross[j * nr + i] += cj * wr[i];
            }
        }
        // B^H S^{-1} B = (conj(x) x^T) ⊗ S^{-1}
        let data = q_h0.as_mut_slice();
        for (l, xl) in x.iter().enumerate() {
            for k in 0..nr {
                let col = (l * nr + k) * dim;
                for (j, xj) in x.iter().enumerate() {
                    let coef = xj.conj() * xl;
                    let base = col + j * nr;
                    for i in 0..nr {
                        data[base + i] += coef * inv[(i, k)];
                    }
                }
            }
        }
        sigma_s.push(cov);
        sensing_channels.push(r);
    }
    q_h0 += &model.clutter_precision;
    Ok(DetectorWorkspace {
        sigma_s,
        sensing_channels,
        t_alpha,
        t_h0,
        q_alpha_data,
        q_cross,
        q_h0: hermitian_part(&q_h0),
        rcs_variance: model.rcs_variance,
    })
}

/// Cholesky of `Q_H1` with the RCS unknown ordered last:
/// `L = [[L0, 0], [v^H, d]]`, `L0 L0^H = Q_H0`, `L0 v = m`,
/// `d^2 = q_aa - ||v||^2`.
struct Factorized {
    q0: HermitianFactor,
    u: CVector,
    v: CVector,
    v_norm_sq: f64,
}

impl Factorized {
    fn new(ws: &DetectorWorkspace) -> Result<Self> {
        let q0 = HermitianFactor::new(&ws.q_h0, "Q_H0")?;
        let u = q0.whiten(&ws.t_h0);
        let v = q0.whiten(&ws.q_cross);
        let v_norm_sq = v.norm_squared();
        Ok(Self {
            q0,
            u,
            v,
            v_norm_sq,
        })
    }

    /// `d^2` for a given top-left entry.
    fn schur(&self, q_alpha_alpha: f64) -> Result<f64> {
        let d2 = q_alpha_alpha - self.v_norm_sq;
        if !(d2 > 0.0) || !d2.is_finite() {
            return Err(IsacError::Numerical(format!(
                "Q_H1 is not positive definite (Schur complement {d2:.3e})"
            )));
        }
        Ok(d2)
    }

    /// `t_alpha - v^H u`.
    fn innovation(&self, t_alpha: C64) -> C64 {
        t_alpha - self.v.dotc(&self.u)
    }

    fn statistic(&self, ws: &DetectorWorkspace, q_alpha_alpha: f64) -> Result<f64> {
        Ok(self.innovation(ws.t_alpha).norm_sqr() / self.schur(q_alpha_alpha)?)
    }
}

/// `T = t_H1^H Q_H1^{-1} t_H1 - t_H0^H Q_H0^{-1} t_H0`.
pub fn glrt_statistic(ws: &DetectorWorkspace) -> Result<f64> {
    Factorized::new(ws)?.statistic(ws, ws.q_alpha_alpha())
}

/// `T` for several RCS variances at once; only the top-left entry of
/// `Q_H1` depends on it, so one factorization of `Q_H0` serves them all.
pub fn glrt_statistic_for_variances(
    ws: &DetectorWorkspace,
    rcs_variances: &[f64],
) -> Result<Vec<f64>> {
    let f = Factorized::new(ws)?;
    rcs_variances
        .iter()
        .map(|s| f.statistic(ws, ws.q_alpha_data + 1.0 / s))
        .collect()
}

/// The H0 quadratic form `t_H0^H Q_H0^{-1} t_H0`.
pub fn h0_quadratic_form(ws: &DetectorWorkspace) -> Result<f64> {
    Ok(Factorized::new(ws)?.u.norm_squared())
}

/// `T` evaluated literally as the difference of two independently solved
/// quadratic forms. Slower and less accurate than [`glrt_statistic`]; kept
/// as a cross-check.
pub fn glrt_statistic_direct(ws: &DetectorWorkspace) -> Result<f64> {
    let t1 = ws.t_h1();
    let q1 = HermitianFactor::new(&ws.q_h1(), "Q_H1")?;
    let q0 = HermitianFactor::new(&ws.q_h0, "Q_H0")?;
    let form1 = t1.dotc(&q1.solve(&t1));
    let form0 = ws.t_h0.dotc(&q0.solve(&ws.t_h0));
    let diff = form1 - form0;
    if diff.im.abs() > IMAG_TOL * (1.0 + form1.norm()) {
        return Err(IsacError::Numerical(format!(
            "test statistic has imaginary part {:.3e}",
            diff.im
        )));
    }
    Ok(diff.re)
}

/// MAP estimate `z = Q_H1^{-1} t_H1`, split into the RCS and the clutter.
pub fn map_estimate(ws: &DetectorWorkspace) -> Result<(C64, CVector)> {
    let f = Factorized::new(ws)?;
    let alpha = map_from_factor(&f, ws)?;
    Ok((alpha, clutter_from_factor(&f, ws, alpha)))
}

fn map_from_factor(f: &Factorized, ws: &DetectorWorkspace) -> Result<C64> {
    Ok(f.innovation(ws.t_alpha) / f.schur(ws.q_alpha_alpha())?)
}

fn clutter_from_factor(f: &Factorized, ws: &DetectorWorkspace, alpha: C64) -> CVector {
    f.q0.solve(&(&ws.t_h0 - &ws.q_cross * alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
        }
    }
}

/// H1 iff `T >= threshold`; the threshold lives in the log domain.
pub fn decide(statistic: f64, threshold: f64) -> Hypothesis {
    if statistic >= threshold {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub decision: Hypothesis,
    pub statistic: f64,
    pub threshold: f64,
    pub rcs_estimate: C64,
    pub clutter_estimate: CVector,
}

/// Statistic, decision and MAP estimates from one factorization.
pub fn detect(ws: &DetectorWorkspace, threshold: f64) -> Result<DetectionResult> {
    let f = Factorized::new(ws)?;
    let statistic = f.statistic(ws, ws.q_alpha_alpha())?;
    let rcs_estimate = map_from_factor(&f, ws)?;
    let clutter_estimate = clutter_from_factor(&f, ws, rcs_estimate);
    Ok(DetectionResult {
        decision: decide(statistic, threshold),
        statistic,
        threshold,
        rcs_estimate,
        clutter_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_normal_matrix, complex_normal_vector, vectorize};
    use nalgebra::SymmetricEigen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// The 1x1x1 case: x = r = Sigma_s = Sigma_c = sigma_T^2 = 1, y = 3.
    pub(crate) fn scalar_workspace() -> DetectorWorkspace {
        let one = CVector::from_element(1, c(1.0, 0.0));
        let channels = ChannelRealization {
            f_user: vec![],
            h_user: vec![],
            a_tx: one.clone(),
            a_rx: one.clone(),
            b_tx: one.clone(),
            b_rx: one.clone(),
            g_rep: c(0.0, 0.0),
            interbs_error: CMatrix::zeros(1, 1),
            clutter: CMatrix::zeros(1, 1),
            rcs: c(0.0, 0.0),
            nu: c(0.0, 0.0),
        };
        let frame = TransmitFrame {
            user_symbols: vec![],
            sensing_symbols: vec![c(1.0, 0.0)],
            x: vec![one],
            power: crate::scenario::PowerSplit::new(vec![], 1.0).unwrap(),
        };
        let obs = SensingObservation {
            per_slot: vec![CVector::from_element(1, c(3.0, 0.0))],
        };
        let noise = SensingNoiseParams {
            residual_interbs_power: 0.0,
            repeater_noise_power: 1.0,
            bs_noise_power: 1.0,
            nu: c(0.0, 0.0),
        };
        let model = DetectorModel::new(ClutterModel::iid(1, 1.0).unwrap(), noise, 1.0).unwrap();
        assemble_statistics(&obs, &frame, &channels, &model).unwrap()
    }

    #[test]
    fn regressor_cases() {
        let e1 = CVector::from_fn(3, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let b = regressor(&e1, 2);
        let mut expect = CMatrix::zeros(2, 6);
        expect[(0, 0)] = c(1.0, 0.0);
        expect[(1, 1)] = c(1.0, 0.0);
        assert_eq!(b, expect);
        assert_eq!(
            regressor(&CVector::from_element(1, c(5.0, 0.0)), 1)[(0, 0)],
            c(5.0, 0.0)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cm = complex_normal_matrix(&mut rng, 2, 2, 1.0);
        let x = complex_normal_vector(&mut rng, 2, 1.0);
        let lhs = regressor(&x, 2) * vectorize(&cm);
        assert!((lhs - &cm * &x).norm() <= 1e-13);
    }

    #[test]
    fn sensing_noise_cov_cases() {
        let b = CVector::from_element(1, c(1.0, 0.0));
        let x = CVector::from_element(2, c(1.0, 1.0));
        let p = SensingNoiseParams {
            residual_interbs_power: 0.0,
            repeater_noise_power: 1.0,
            bs_noise_power: 1.0,
            nu: c(2.0, 0.0),
        };
        assert!((sensing_noise_cov(&x, &p, &b)[(0, 0)] - c(5.0, 0.0)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = complex_normal_vector(&mut rng, 3, 1.0);
        let x = complex_normal_vector(&mut rng, 4, 1.0);
        let quiet = SensingNoiseParams {
            residual_interbs_power: 0.0,
            repeater_noise_power: 3.0,
            bs_noise_power: 0.7,
            nu: c(0.0, 0.0),
        };
        assert_eq!(
            sensing_noise_cov(&x, &quiet, &b),
            CMatrix::identity(3, 3) * c(0.7, 0.0)
        );

        let loud = SensingNoiseParams {
            residual_interbs_power: 0.2,
            repeater_noise_power: 3.0,
            bs_noise_power: 0.7,
            nu: c(1.0, -2.0),
        };
        let eig = SymmetricEigen::new(sensing_noise_cov(&x, &loud, &b));
        assert!(eig.eigenvalues.iter().all(|l| *l >= 0.7 - 1e-12));
    }

    #[test]
    fn sensing_channel_cases() {
        let one = CVector::from_element(1, c(1.0, 0.0));
        let r = sensing_channel(&one, &one, &one, &one, c(1.0, 0.0), c(3.0, 0.0));
        assert_eq!(r[0], c(4.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a_t = complex_normal_vector(&mut rng, 2, 1.0);
        let a_r = complex_normal_vector(&mut rng, 3, 1.0);
        let b_r = complex_normal_vector(&mut rng, 3, 1.0);
        let x = complex_normal_vector(&mut rng, 2, 1.0);
        let off = sensing_channel(&x, &a_t, &a_r, &b_r, c(0.3, 0.1), c(0.0, 0.0));
        assert!((off - &a_r * a_t.dot(&x)).norm() < 1e-15);
        // a_t^T x = 0
        let ortho = CVector::from_vec(vec![a_t[1], -a_t[0]]);
        let r = sensing_channel(&ortho, &a_t, &a_r, &b_r, c(0.3, 0.1), c(2.0, 0.0));
        assert!(r.norm() < 1e-15);
    }

    #[test]
    fn scalar_hand_case() {
        let ws = scalar_workspace();
        assert_eq!(ws.t_h1(), CVector::from_vec(vec![c(3.0, 0.0), c(3.0, 0.0)]));
        let q = ws.q_h1();
        let expect =
            CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert!((q - expect).norm() < 1e-15);
        assert!((ws.q_h0[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((glrt_statistic(&ws).unwrap() - 1.5).abs() < 1e-12);
        assert!((glrt_statistic_direct(&ws).unwrap() - 1.5).abs() < 1e-12);
        let (alpha, clutter) = map_estimate(&ws).unwrap();
        assert!((alpha - c(1.0, 0.0)).norm() < 1e-12);
        assert!((clutter[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_sensing_channel_reduces_to_h0() {
        let mut ws = scalar_workspace();
        ws.q_cross.fill(c(0.0, 0.0));
        ws.q_alpha_data = 0.0;
        ws.t_alpha = c(0.0, 0.0);
        let q = ws.q_h1();
        assert_eq!(q[(0, 0)], c(1.0, 0.0));
        assert_eq!(q[(0, 1)], c(0.0, 0.0));
        assert_eq!(glrt_statistic(&ws).unwrap(), 0.0);
    }

    #[test]
    fn zero_data_gives_zero_estimates() {
        let mut ws = scalar_workspace();
        ws.t_alpha = c(0.0, 0.0);
        ws.t_h0.fill(c(0.0, 0.0));
        let (alpha, clutter) = map_estimate(&ws).unwrap();
        assert_eq!(alpha, c(0.0, 0.0));
        assert!(clutter.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn decision_boundary() {
        assert_eq!(decide(1.0, 1.0), Hypothesis::H1);
        assert_eq!(decide(1.0 - 1e-12, 1.0), Hypothesis::H0);
        assert_eq!(decide(1.5, 1.0), Hypothesis::H1);
        let ws = scalar_workspace();
        let det = detect(&ws, 1.5).unwrap();
        assert_eq!(det.decision, Hypothesis::H1);
        assert_eq!(detect(&ws, 1.6).unwrap().decision, Hypothesis::H0);
    }

    #[test]
    fn variance_sweep_matches_single_evaluations() {
        let ws = scalar_workspace();
        let grid = [0.1, 1.0, 10.0];
        let swept = glrt_statistic_for_variances(&ws, &grid).unwrap();
        for (s, t) in grid.iter().zip(&swept) {
            let single = glrt_statistic(&ws.with_rcs_variance(*s)).unwrap();
            assert!((single - t).abs() < 1e-14);
        }
    }

    #[test]
    fn non_positive_definite_inputs_are_rejected() {
        let mut ws = scalar_workspace();
        ws.q_h0[(0, 0)] = c(-1.0, 0.0);
        assert!(matches!(glrt_statistic(&ws), Err(IsacError::Numerical(_))));
        let noise = SensingNoiseParams {
            residual_interbs_power: 0.0,
            repeater_noise_power: 1.0,
            bs_noise_power: 0.0,
            nu: c(0.0, 0.0),
        };
        assert!(DetectorModel::new(ClutterModel::iid(1, 1.0).unwrap(), noise, 1.0).is_err());
    }
}
