//! First-order Gauss-Markov channel evolution and pilot observations.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::covariance::{
    extended_covariance, group_covariances, ArrayGeometry, ExtendedChannelCovariance,
    GroupProfile,
};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, psd_factor, CMat, CVec};
use crate::training::TrainingVector;

/// Draws a vector of i.i.d. `CN(0, 1)` entries.
pub fn standard_complex_normal<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVec {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// Concatenated group channel `h_n`: users outermost, then delay taps, then
/// antennas (entry `(k·L + l)·N + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub h: CVec,
    pub epoch: usize,
}

#[derive(Debug, Clone)]
enum Factor {
    Dense(CMat),
    /// Per-delay factors of a block-diagonal covariance, repeated per user.
    Block { user_count: usize, blocks: Vec<CMat> },
}

/// AR(1) model `h_n = α h_{n-1} + √(1-α²) b_n` with `b_n ~ CN(0, R_h)`.
#[derive(Debug, Clone)]
pub struct ArModel {
    alpha: f64,
    factor: Factor,
    dim: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

impl ArModel {
    /// Model for a dense stationary covariance.
    pub fn from_covariance(alpha: f64, covariance: &CMat) -> Result<Self> {
        check_alpha(alpha)?;
        let factor = psd_factor(covariance)?;
        Ok(Self {
            alpha,
            dim: covariance.nrows(),
            factor: Factor::Dense(factor),
        })
    }

    /// Model for the block-diagonal extended covariance; factors one
    /// `N × N` block per delay instead of the full matrix.
    pub fn from_extended(alpha: f64, covariance: &ExtendedChannelCovariance) -> Result<Self> {
        check_alpha(alpha)?;
        let blocks = covariance
            .blocks()
            .iter()
            .map(psd_factor)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alpha,
            dim: covariance.dim(),
            factor: Factor::Block {
                user_count: covariance.user_count(),
                blocks,
            },
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dense root factor `C` with `C C^H = R_h`.
    pub fn root_covariance(&self) -> CMat {
        match &self.factor {
            Factor::Dense(c) => c.clone(),
            Factor::Block { user_count, blocks } => {
                let ext = ExtendedChannelCovariance::from_blocks(*user_count, blocks.clone())
                    .expect("blocks validated at construction");
                ext.materialize()
            }
        }
    }

    /// `R_h` rebuilt from the factor.
    pub fn covariance(&self) -> CMat {
        let c = self.root_covariance();
        &c * c.adjoint()
    }

    /// One draw of `C w`, `w ~ CN(0, I)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        match &self.factor {
            Factor::Dense(c) => c * standard_complex_normal(c.ncols(), rng),
            Factor::Block { user_count, blocks } => {
                let n = blocks[0].nrows();
                let mut out = CVec::zeros(self.dim);
                let mut offset = 0;
                for _ in 0..*user_count {
                    for b in blocks {
                        let w = standard_complex_normal(n, rng);
                        out.rows_mut(offset, n).copy_from(&(b * w));
                        offset += n;
                    }
                }
                out
            }
        }
    }
}

/// `h_0 ~ CN(0, R_h)`.
pub fn sample_initial<R: Rng + ?Sized>(model: &ArModel, rng: &mut R) -> ChannelState {
    ChannelState {
        h: model.draw(rng),
        epoch: 0,
    }
}

/// One AR(1) step.
pub fn evolve<R: Rng + ?Sized>(
    state: &ChannelState,
    model: &ArModel,
    rng: &mut R,
) -> Result<ChannelState> {
    if state.h.len() != model.dim {
        return Err(Error::Dimension(format!(
            "state has {} entries, model expects {}",
            state.h.len(),
            model.dim
        )));
    }
    let h = if model.alpha == 1.0 {
        state.h.clone()
    } else {
        let innovation = model.draw(rng);
        &state.h * Complex64::new(model.alpha, 0.0)
            + innovation * Complex64::new((1.0 - model.alpha * model.alpha).sqrt(), 0.0)
    };
    Ok(ChannelState {
        h,
        epoch: state.epoch + 1,
    })
}

/// Array snapshot (`N` entries) or beamformed observation (`D` entries).
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: CVec,
    pub epoch: usize,
}

impl Observation {
    /// `S^H y`.
    pub fn project(&self, s: &CMat) -> Result<Observation> {
        if s.nrows() != self.y.len() {
            return Err(Error::Dimension(format!(
                "observation has {} entries, beamformer has {} rows",
                self.y.len(),
                s.nrows()
            )));
        }
        Ok(Observation {
            y: s.ad_mul(&self.y),
            epoch: self.epoch,
        })
    }
}

/// Symbols transmitted by interfering users in explicit mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfererSymbols {
    /// i.i.d. QPSK with energy `γ E_s`.
    Qpsk,
    /// The same symbol at every epoch.
    Constant(Complex64),
}

#[derive(Debug, Clone)]
struct InterferingUser {
    model: ArModel,
    channel: ChannelState,
    /// `history[l]` holds the symbol sent `l` epochs ago.
    history: Vec<Complex64>,
    amplitude: f64,
}

/// Explicit simulation of every interfering user's Gauss-Markov channel and
/// symbol stream plus white noise.
#[derive(Debug, Clone)]
pub struct ExplicitInterference {
    users: Vec<InterferingUser>,
    element_count: usize,
    noise_std: f64,
    symbols: InterfererSymbols,
}

/// Source of the inter-group interference plus noise `η_n`.
#[derive(Debug, Clone)]
pub enum InterferenceSource {
    /// No interference and no noise.
    Silent,
    /// `η ~ CN(0, R_η)` through a Cholesky factor of `R_η`.
    GaussianEquivalent { factor: CMat },
    Explicit(Box<ExplicitInterference>),
}

impl InterferenceSource {
    /// Gaussian-equivalent source; `covariance` must be positive definite.
    pub fn gaussian(covariance: &CMat) -> Result<Self> {
        let chol = cholesky(covariance)?;
        Ok(Self::GaussianEquivalent {
            factor: chol.l(),
        })
    }

    /// Explicit source. Each interfering user gets an independent channel
    /// drawn from its group's per-delay covariances and evolved with `alpha`;
    /// symbol histories start filled.
    #[allow(clippy::too_many_arguments)]
    pub fn explicit<R: Rng + ?Sized>(
        geometry: &ArrayGeometry,
        interferers: &[GroupProfile],
        symbol_energy: f64,
        noise_power: f64,
        alpha: f64,
        symbols: InterfererSymbols,
        quadrature_points: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if !(noise_power >= 0.0 && noise_power.is_finite()) {
            return Err(Error::Domain(format!(
                "noise power must be nonnegative, got {noise_power}"
            )));
        }
        let mut users = Vec::new();
        for g in interferers {
            let spatial = group_covariances(geometry, g, quadrature_points)?;
            let single = GroupProfile::new(
                g.group_id(),
                1,
                g.sectors().to_vec(),
                g.pdp().to_vec(),
                g.relative_power(),
            )?;
            let ext = extended_covariance(&single, &spatial)?;
            let model = ArModel::from_extended(alpha, &ext)?;
            let amplitude = (g.relative_power() * symbol_energy).sqrt();
            for _ in 0..g.user_count() {
                let channel = sample_initial(&model, rng);
                let history = (0..g.memory())
                    .map(|_| draw_symbol(symbols, amplitude, rng))
                    .collect();
                users.push(InterferingUser {
                    model: model.clone(),
                    channel,
                    history,
                    amplitude,
                });
            }
        }
        Ok(Self::Explicit(Box::new(ExplicitInterference {
            users,
            element_count: geometry.element_count(),
            noise_std: noise_power.sqrt(),
            symbols,
        })))
    }

    /// Draws `η_n`. Explicit mode advances every interferer by one epoch
    /// before forming `Σ_l h_{n,l} x_{n-l}`.
    pub fn sample<R: Rng + ?Sized>(&mut self, element_count: usize, rng: &mut R) -> Result<CVec> {
        match self {
            Self::Silent => Ok(CVec::zeros(element_count)),
            Self::GaussianEquivalent { factor } => {
                if factor.nrows() != element_count {
                    return Err(Error::Dimension(format!(
                        "interference covariance is {}-dimensional, array has {element_count}",
                        factor.nrows()
                    )));
                }
                Ok(&*factor * standard_complex_normal(element_count, rng))
            }
            Self::Explicit(ex) => {
                if ex.element_count != element_count {
                    return Err(Error::Dimension(format!(
                        "explicit interference built for {} elements, array has {element_count}",
                        ex.element_count
                    )));
                }
                let n = element_count;
                let mut eta = standard_complex_normal(n, rng) * Complex64::new(ex.noise_std, 0.0);
                for user in ex.users.iter_mut() {
                    user.channel = evolve(&user.channel, &user.model, rng)?;
                    user.history.rotate_right(1);
                    user.history[0] = draw_symbol(ex.symbols, user.amplitude, rng);
                    for (l, sym) in user.history.iter().enumerate() {
                        eta.axpy(*sym, &user.channel.h.rows(l * n, n), Complex64::new(1.0, 0.0));
                    }
                }
                Ok(eta)
            }
        }
    }
}

fn draw_symbol<R: Rng + ?Sized>(kind: InterfererSymbols, amplitude: f64, rng: &mut R) -> Complex64 {
    match kind {
        InterfererSymbols::Constant(c) => c,
        InterfererSymbols::Qpsk => {
            let a = amplitude * std::f64::consts::FRAC_1_SQRT_2;
            let re = if rng.random::<bool>() { a } else { -a };
            let im = if rng.random::<bool>() { a } else { -a };
            Complex64::new(re, im)
        }
    }
}

/// `y_n = (x_n ⊗ I_N)^H h_n + η_n`, evaluated blockwise.
pub fn observe_full<R: Rng + ?Sized>(
    state: &ChannelState,
    pilots: &TrainingVector,
    interference: &mut InterferenceSource,
    rng: &mut R,
) -> Result<Observation> {
    if pilots.is_empty() || state.h.len() % pilots.len() != 0 {
        return Err(Error::Dimension(format!(
            "channel of length {} does not split into {} blocks",
            state.h.len(),
            pilots.len()
        )));
    }
    let n = state.h.len() / pilots.len();
    let mut y = CVec::zeros(n);
    for (j, xj) in pilots.as_vector().iter().enumerate() {
        y.axpy(xj.conj(), &state.h.rows(j * n, n), Complex64::new(1.0, 0.0));
    }
    y += interference.sample(n, rng)?;
    Ok(Observation {
        y,
        epoch: state.epoch,
    })
}
