//! Reduced-rank Kalman channel estimator operating on beamformed pilots.
//!
//! The state is the full concatenated channel `h_n` of dimension `N·L·K`;
//! only the observation lives in the `D`-dimensional beamspace. Products
//! with `Ψ_n = x_n ⊗ S_D` go through [`MeasurementMap`] and never form `Ψ_n`.

use num_complex::Complex64;

use crate::channel::Observation;
use crate::covariance::ExtendedChannelCovariance;
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, hpd_inverse, kron, log_det_hpd, log_det_psd, symmetrize_in_place, trace_re, CMat,
    CVec, ONE,
};
use crate::training::{measurement_matrix, MeasurementMap, TrainingVector};

/// Largest state dimension accepted by [`batch_mmse_oracle`].
pub const ORACLE_MAX_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Holds `ĥ_{n|n-1}`, `P_{n|n-1}`.
    Predicted,
    /// Holds `ĥ_{n|n}`, `P_{n|n}`.
    Updated,
}

/// Form of the a posteriori covariance update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateForm {
    /// `P ← (I - K Ψ^H) P`, then symmetrized.
    #[default]
    Standard,
    /// `P ← (I - K Ψ^H) P (I - K Ψ^H)^H + K S^H R_η S K^H`.
    Joseph,
}

#[derive(Debug, Clone)]
pub struct KalmanState {
    estimate: CVec,
    covariance: CMat,
    epoch: usize,
    phase: Phase,
    user_count: usize,
}

impl KalmanState {
    /// `ĥ_{0|-1} = 0`, `P_{0|-1} = R_h`.
    pub fn init(r_h: &ExtendedChannelCovariance) -> Self {
        Self {
            estimate: CVec::zeros(r_h.dim()),
            covariance: r_h.materialize(),
            epoch: 0,
            phase: Phase::Predicted,
            user_count: r_h.user_count(),
        }
    }

    /// Prior from a dense covariance.
    pub fn from_prior(user_count: usize, covariance: CMat) -> Result<Self> {
        if covariance.nrows() != covariance.ncols() || user_count == 0 {
            return Err(Error::Dimension(
                "prior covariance must be square and the user count positive".into(),
            ));
        }
        Ok(Self {
            estimate: CVec::zeros(covariance.nrows()),
            covariance,
            epoch: 0,
            phase: Phase::Predicted,
            user_count,
        })
    }

    pub fn estimate(&self) -> &CVec {
        &self.estimate
    }

    pub fn covariance(&self) -> &CMat {
        &self.covariance
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn dim(&self) -> usize {
        self.estimate.len()
    }

    /// `trace(P) / K`.
    pub fn mse(&self) -> f64 {
        mse(self)
    }

    /// `ln det P`, with pivots of the semidefinite Cholesky sweep floored at
    /// `floor · trace(P) / dim`.
    pub fn log_det(&self, floor: f64) -> f64 {
        let scale = trace_re(&self.covariance).max(f64::MIN_POSITIVE) / self.dim().max(1) as f64;
        log_det_psd(&self.covariance, floor * scale)
    }

    /// Marks the epoch as processed without a measurement (no pilot received).
    pub fn skip_measurement(&self) -> Result<KalmanState> {
        self.expect_phase(Phase::Predicted)?;
        let mut next = self.clone();
        next.phase = Phase::Updated;
        Ok(next)
    }

    fn expect_phase(&self, phase: Phase) -> Result<()> {
        if self.phase != phase {
            return Err(Error::Domain(format!(
                "filter is in phase {:?}, operation needs {:?}",
                self.phase, phase
            )));
        }
        Ok(())
    }
}

/// `trace(P) / K`.
pub fn mse(state: &KalmanState) -> f64 {
    trace_re(&state.covariance) / state.user_count as f64
}

/// Beamformer together with the projected interference `S^H R_η S` and its
/// Cholesky factor; built once per beamformer.
#[derive(Debug, Clone)]
pub struct ProjectedNoise {
    s: CMat,
    noise: CMat,
}

impl ProjectedNoise {
    /// Fails if `S^H R_η S` is not positive definite (rank-deficient `S`).
    pub fn new(s: &CMat, r_eta: &CMat) -> Result<Self> {
        if r_eta.nrows() != s.nrows() || r_eta.ncols() != s.nrows() {
            return Err(Error::Dimension(format!(
                "beamformer has {} rows, interference covariance is {}x{}",
                s.nrows(),
                r_eta.nrows(),
                r_eta.ncols()
            )));
        }
        let mut noise = s.adjoint() * r_eta * s;
        symmetrize_in_place(&mut noise);
        cholesky(&noise)?;
        Ok(Self {
            s: s.clone(),
            noise,
        })
    }

    pub fn beamformer(&self) -> &CMat {
        &self.s
    }

    /// `S^H R_η S`.
    pub fn noise(&self) -> &CMat {
        &self.noise
    }

    pub fn reduced_dim(&self) -> usize {
        self.s.ncols()
    }
}

/// Innovation `z`, its covariance `E` and the gain `K` of one update.
#[derive(Debug, Clone)]
pub struct InnovationRecord {
    pub innovation: CVec,
    pub covariance: CMat,
    pub gain: CMat,
}

/// `Ψ^H G` for an `(L·K·N) × c` matrix `G`.
fn adjoint_apply_columns(map: &MeasurementMap<'_>, g: &CMat) -> CMat {
    let n = map.element_count();
    let mut combined = CMat::zeros(n, g.ncols());
    for (j, xj) in map.training().as_vector().iter().enumerate() {
        if xj.re == 0.0 && xj.im == 0.0 {
            continue;
        }
        combined += g.rows(j * n, n) * xj.conj();
    }
    map.beamformer().adjoint() * combined
}

/// Measurement update with a reduced observation `y = S^H y_full`.
pub fn measurement_update(
    state: &KalmanState,
    y: &Observation,
    x: &TrainingVector,
    proj: &ProjectedNoise,
    form: UpdateForm,
) -> Result<(KalmanState, InnovationRecord)> {
    state.expect_phase(Phase::Predicted)?;
    let map = measurement_matrix(x, &proj.s)?;
    if map.state_dim() != state.dim() {
        return Err(Error::Dimension(format!(
            "pilots and beamformer span {} state entries, filter has {}",
            map.state_dim(),
            state.dim()
        )));
    }
    if y.y.len() != proj.reduced_dim() {
        return Err(Error::Dimension(format!(
            "observation has {} entries, beamspace has {}",
            y.y.len(),
            proj.reduced_dim()
        )));
    }
    let p = &state.covariance;
    // G = P Ψ; with P Hermitian, Ψ^H P = G^H.
    let g = map.right_multiply(p)?;
    let mut e = adjoint_apply_columns(&map, &g) + &proj.noise;
    symmetrize_in_place(&mut e);
    let chol = cholesky(&e)
        .map_err(|_| Error::Factorization("innovation covariance is singular".into()))?;
    let z = &y.y - map.adjoint_apply(&state.estimate)?;
    let gain = chol.solve(&g.adjoint()).adjoint();

    let mut estimate = state.estimate.clone();
    estimate.gemv(ONE, &gain, &z, ONE);

    let covariance = match form {
        UpdateForm::Standard => {
            let mut next = p.clone();
            next.gemm(-ONE, &gain, &g.adjoint(), ONE);
            symmetrize_in_place(&mut next);
            next
        }
        UpdateForm::Joseph => {
            let psi_h = map.dense().adjoint();
            let a = CMat::identity(state.dim(), state.dim()) - &gain * psi_h;
            let mut next = &a * p * a.adjoint() + &gain * &proj.noise * gain.adjoint();
            symmetrize_in_place(&mut next);
            next
        }
    };
    let next = KalmanState {
        estimate,
        covariance,
        epoch: state.epoch,
        phase: Phase::Updated,
        user_count: state.user_count,
    };
    Ok((
        next,
        InnovationRecord {
            innovation: z,
            covariance: e,
            gain,
        },
    ))
}

fn check_stationary(state: &KalmanState, alpha: f64, r_h: &CMat) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if r_h.nrows() != state.dim() || r_h.ncols() != state.dim() {
        return Err(Error::Dimension(format!(
            "channel covariance is {}x{}, filter state has {} entries",
            r_h.nrows(),
            r_h.ncols(),
            state.dim()
        )));
    }
    Ok(())
}

fn extrapolate(state: &KalmanState, alpha: f64, r_h: &CMat, steps: usize) -> KalmanState {
    let a = alpha.powi(steps as i32);
    let keep = a * a;
    let mut covariance = &state.covariance * Complex64::new(keep, 0.0);
    covariance += r_h * Complex64::new(1.0 - keep, 0.0);
    symmetrize_in_place(&mut covariance);
    KalmanState {
        estimate: &state.estimate * Complex64::new(a, 0.0),
        covariance,
        epoch: state.epoch + steps,
        phase: Phase::Predicted,
        user_count: state.user_count,
    }
}

/// `ĥ_{n+1|n} = α ĥ_{n|n}`, `P_{n+1|n} = α² P_{n|n} + (1 - α²) R_h`.
pub fn predict(state: &KalmanState, alpha: f64, r_h: &CMat) -> Result<KalmanState> {
    state.expect_phase(Phase::Updated)?;
    check_stationary(state, alpha, r_h)?;
    Ok(extrapolate(state, alpha, r_h, 1))
}

/// Closed-form `steps`-ahead prediction,
/// `P_{n+M|n} = α^{2M} P + (1 - α^{2M}) R_h`.
///
/// Accepts either phase so that predictions compose.
pub fn multi_step_predict(
    state: &KalmanState,
    alpha: f64,
    r_h: &CMat,
    steps: usize,
) -> Result<KalmanState> {
    if steps == 0 {
        return Err(Error::Domain("prediction horizon must be positive".into()));
    }
    check_stationary(state, alpha, r_h)?;
    Ok(extrapolate(state, alpha, r_h, steps))
}

/// Frobenius norm of
/// `P_{n|n}^{-1} - (P_{n|n-1}^{-1} + Ψ (S^H R_η S)^{-1} Ψ^H)`.
///
/// Returns `f64::INFINITY` when either covariance is singular. Dense; meant
/// for checking small instances.
pub fn information_form_check(
    prior: &KalmanState,
    posterior: &KalmanState,
    x: &TrainingVector,
    proj: &ProjectedNoise,
) -> Result<f64> {
    let map = measurement_matrix(x, &proj.s)?;
    if map.state_dim() != prior.dim() || prior.dim() != posterior.dim() {
        return Err(Error::Dimension(
            "prior, posterior and measurement map disagree in size".into(),
        ));
    }
    let (prior_inv, post_inv) = match (
        hpd_inverse(&prior.covariance),
        hpd_inverse(&posterior.covariance),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Ok(f64::INFINITY),
    };
    let psi = map.dense();
    let noise_inv = hpd_inverse(&proj.noise)?;
    let rhs = prior_inv + &psi * noise_inv * psi.adjoint();
    Ok((post_inv - rhs).norm())
}

/// Linear MMSE estimate and error covariance from a batch of observations.
#[derive(Debug, Clone)]
pub struct BatchEstimate {
    pub estimate: CVec,
    pub covariance: CMat,
}

/// Batch LMMSE estimate of a static channel (`α = 1`) from full-array
/// observations `y_0 … y_n`:
/// `ĥ = R_h Φ (Φ^H R_h Φ + I ⊗ R_η)^{-1} y`, `Φ = [x_0 ⊗ I_N, …, x_n ⊗ I_N]`.
pub fn batch_mmse_oracle(
    observations: &[Observation],
    pilots: &[TrainingVector],
    r_h: &CMat,
    r_eta: &CMat,
    alpha: f64,
) -> Result<BatchEstimate> {
    if alpha != 1.0 {
        return Err(Error::Domain(
            "batch oracle is defined for a static channel (alpha = 1) only".into(),
        ));
    }
    let dim = r_h.nrows();
    if dim > ORACLE_MAX_DIM {
        return Err(Error::Domain(format!(
            "batch oracle limited to state dimension {ORACLE_MAX_DIM}, got {dim}"
        )));
    }
    if observations.len() != pilots.len() {
        return Err(Error::Dimension(format!(
            "{} observations but {} training vectors",
            observations.len(),
            pilots.len()
        )));
    }
    if observations.is_empty() {
        return Ok(BatchEstimate {
            estimate: CVec::zeros(dim),
            covariance: r_h.clone(),
        });
    }
    let n = r_eta.nrows();
    let steps = observations.len();
    let ident = CMat::identity(n, n);
    let mut phi = CMat::zeros(dim, n * steps);
    let mut y = CVec::zeros(n * steps);
    for (t, (obs, x)) in observations.iter().zip(pilots).enumerate() {
        if x.len() * n != dim || obs.y.len() != n {
            return Err(Error::Dimension(format!(
                "epoch {t}: pilots or observation do not match the state"
            )));
        }
        let xm = CMat::from_column_slice(x.len(), 1, x.as_vector().as_slice());
        phi.columns_mut(t * n, n).copy_from(&kron(&xm, &ident));
        y.rows_mut(t * n, n).copy_from(&obs.y);
    }
    let noise = kron(&CMat::identity(steps, steps), r_eta);
    let rphi = r_h * &phi;
    let mut gram = phi.adjoint() * &rphi + noise;
    symmetrize_in_place(&mut gram);
    let chol = cholesky(&gram)?;
    let estimate = &rphi * chol.solve(&y);
    let mut covariance = r_h - &rphi * chol.solve(&rphi.adjoint());
    symmetrize_in_place(&mut covariance);
    Ok(BatchEstimate {
        estimate,
        covariance,
    })
}

/// One block measurement with the pilot Gram matrix replaced by its mean
/// `E_s M I`, applied to a block-form covariance:
/// `A^l ← A^l - c A^l S (S^H R_η S + c S^H A^l S)^{-1} S^H A^l`, `c = E_s M`.
pub fn idealized_block_update(
    prior: &ExtendedChannelCovariance,
    s: &CMat,
    r_eta: &CMat,
    symbol_energy: f64,
    block_len: usize,
) -> Result<ExtendedChannelCovariance> {
    let proj = ProjectedNoise::new(s, r_eta)?;
    let c = Complex64::new(symbol_energy * block_len as f64, 0.0);
    let blocks = prior
        .blocks()
        .iter()
        .map(|a| {
            let as_ = a * s;
            let mut inner = &proj.noise + s.adjoint() * &as_ * c;
            symmetrize_in_place(&mut inner);
            let chol = cholesky(&inner)?;
            let mut next = a - &as_ * chol.solve(&as_.adjoint()) * c;
            symmetrize_in_place(&mut next);
            Ok(next)
        })
        .collect::<Result<Vec<_>>>()?;
    ExtendedChannelCovariance::from_blocks(prior.user_count(), blocks)
}

/// Block-form `P ← α^{2M} P + (1 - α^{2M}) R_h`.
pub fn block_predict(
    posterior: &ExtendedChannelCovariance,
    stationary: &ExtendedChannelCovariance,
    alpha: f64,
    steps: usize,
) -> Result<ExtendedChannelCovariance> {
    if posterior.memory() != stationary.memory() || posterior.dim() != stationary.dim() {
        return Err(Error::Dimension("block covariances disagree in shape".into()));
    }
    let keep = alpha.powi(2 * steps as i32);
    let blocks = posterior
        .blocks()
        .iter()
        .zip(stationary.blocks())
        .map(|(p, r)| p * Complex64::new(keep, 0.0) + r * Complex64::new(1.0 - keep, 0.0))
        .collect();
    ExtendedChannelCovariance::from_blocks(posterior.user_count(), blocks)
}

/// `ln det P = K Σ_l ln det A^l` for a positive definite block-form covariance.
pub fn block_log_det(p: &ExtendedChannelCovariance) -> Result<f64> {
    let per_user: f64 = p
        .blocks()
        .iter()
        .map(log_det_hpd)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(p.user_count() as f64 * per_user)
}

/// `ln det P_{n|n}` predicted from the prior blocks through
/// `det P_{n|n} = det P_{n|n-M} / det(I + E_s M Σ_l I_K ⊗ E_{L,l} ⊗ SNR^l)`.
pub fn closed_form_log_det(
    prior: &ExtendedChannelCovariance,
    s: &CMat,
    r_eta: &CMat,
    symbol_energy: f64,
    block_len: usize,
) -> Result<f64> {
    let gain = crate::beamspace::realized_log_det_metric(
        prior.blocks(),
        s,
        r_eta,
        prior.user_count(),
        symbol_energy,
        block_len,
    )?;
    Ok(block_log_det(prior)? - gain)
}

/// Mass of `P` outside the `Σ_l I_K ⊗ E_{L,l} ⊗ A^l` pattern: off-block
/// entries plus disagreement between the user copies of each delay block.
pub fn block_form_defect(p: &CMat, user_count: usize, memory: usize) -> Result<f64> {
    let blocks = user_count * memory;
    if blocks == 0 || p.nrows() % blocks != 0 || p.nrows() != p.ncols() {
        return Err(Error::Dimension("covariance does not split into delay blocks".into()));
    }
    let n = p.nrows() / blocks;
    let mut defect = 0.0f64;
    for bj in 0..blocks {
        for bi in 0..blocks {
            let view = p.view((bi * n, bj * n), (n, n));
            if bi != bj {
                defect += view.norm_squared();
            } else if bi >= memory {
                let reference = p.view(((bi % memory) * n, (bj % memory) * n), (n, n));
                defect += (view - reference).norm_squared();
            }
        }
    }
    Ok(defect.sqrt())
}
