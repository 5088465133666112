//! Monte Carlo driver.
//!
//! The error covariance and gains of the filter depend only on the pilots,
//! the beamformers and the statistics, never on the data. They are computed
//! once per beamformer in [`Scenario::covariance_pass`]; each trial then runs
//! only the estimate recursion on its own channel and noise draws, which are
//! shared by every beamformer (common random numbers).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InterferenceModel};
use crate::beamspace::{
    beam_pattern, dft_beamspace, Beamformer, BeamformerKind, GebDesigner, GebParams, SnrLedger,
};
use crate::channel::{
    evolve, observe_full, sample_initial, ArModel, InterferenceSource, InterfererSymbols,
    Observation,
};
use crate::covariance::{
    extended_covariance, group_covariances, interference_from_parts, summed_covariance,
    ArrayGeometry, ExtendedChannelCovariance, GroupProfile, SpatialCovariance,
};
use crate::error::Result;
use crate::kalman::{measurement_update, predict, KalmanState, ProjectedNoise, UpdateForm};
use crate::linalg::{CMat, CVec};
use crate::training::{build_pilot_book, measurement_matrix, training_vector, PilotBook, TrainingVector};

/// Relative pivot floor for `ln det P`.
pub const LOG_DET_FLOOR: f64 = 1e-300;

/// One epoch of one trial for one beamformer and dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub epoch: usize,
    pub dimension: usize,
    pub kind: BeamformerKind,
    pub trial: usize,
    /// `trace(P_{n|n}) / K`.
    pub mse: f64,
    /// `‖h_n - ĥ_{n|n}‖² / K` for this trial's draw.
    pub empirical_error: f64,
    /// `ln det P_{n|n}`; NaN when not tracked.
    pub det_log: f64,
    /// Fraction of `trace(Σ_l ρ_l R_l)` inside the beamformer span.
    pub captured_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRow {
    pub kind: BeamformerKind,
    pub dimension: usize,
    pub block: usize,
    pub azimuth: f64,
    pub gain_db: f64,
}

/// One ledger entry used by a GEB block, either as a realized column or as
/// a direction already covered by the other columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub kind: BeamformerKind,
    pub dimension: usize,
    pub block: usize,
    pub delay: usize,
    pub index: usize,
    pub snr: f64,
    pub column: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub patterns: Vec<PatternRow>,
    pub selections: Vec<SelectionRow>,
}

/// Beamformers applied over the blocks of one run.
#[derive(Debug, Clone)]
pub struct BeamformerPlan {
    pub kind: BeamformerKind,
    pub dimension: usize,
    pub blocks: Vec<Beamformer>,
    /// Ledger each GEB block was selected from.
    pub ledgers: Vec<SnrLedger>,
}

/// Data-independent part of a run.
#[derive(Debug, Clone)]
pub struct CovarianceTrack {
    /// Gain `K_n` of each trained epoch.
    pub gains: Vec<Option<CMat>>,
    pub mse: Vec<f64>,
    pub log_det: Vec<f64>,
    pub captured_power: Vec<f64>,
}

/// Channel and full-array observations of one trial.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub channels: Vec<CVec>,
    pub observations: Vec<Observation>,
}

/// Statistics shared by every trial.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ExperimentConfig,
    pub geometry: ArrayGeometry,
    pub serving: GroupProfile,
    pub interferers: Vec<GroupProfile>,
    pub spatial: Vec<SpatialCovariance>,
    pub channel_covariance: ExtendedChannelCovariance,
    pub channel_dense: CMat,
    pub r_eta: CMat,
    /// `Σ_l ρ_l R_l` of the serving group.
    pub summed: CMat,
    pub pilots: PilotBook,
    pub training: Vec<TrainingVector>,
    pub designer: GebDesigner,
    pub symbol_energy: f64,
}

impl Scenario {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let geometry = config.geometry()?;
        let serving = config.serving.profile()?;
        let interferers = config
            .interferers
            .iter()
            .map(|g| g.profile())
            .collect::<Result<Vec<_>>>()?;
        let es = config.symbol_energy();
        let spatial = group_covariances(&geometry, &serving, config.quadrature_points)?;
        let interferer_spatial = interferers
            .iter()
            .map(|g| group_covariances(&geometry, g, config.quadrature_points))
            .collect::<Result<Vec<_>>>()?;
        let parts: Vec<(&GroupProfile, &[SpatialCovariance])> = interferers
            .iter()
            .zip(&interferer_spatial)
            .map(|(g, s)| (g, s.as_slice()))
            .collect();
        let r_eta = interference_from_parts(
            geometry.element_count(),
            &parts,
            es,
            config.noise_power,
        )?;
        let channel_covariance = extended_covariance(&serving, &spatial)?;
        let channel_dense = channel_covariance.materialize();
        let summed = summed_covariance(&serving, &spatial)?;
        let pilots = build_pilot_book(config.training_len, serving.user_count(), es)?;
        let training = (0..config.training_len)
            .map(|n| training_vector(&pilots, n, serving.memory()))
            .collect::<Result<Vec<_>>>()?;
        let designer = GebDesigner::from_spatial(&spatial, serving.pdp(), &r_eta)?;
        Ok(Self {
            config: config.clone(),
            geometry,
            serving,
            interferers,
            spatial,
            channel_covariance,
            channel_dense,
            r_eta,
            summed,
            pilots,
            training,
            designer,
            symbol_energy: es,
        })
    }

    pub fn geb_params(&self, dimension: usize) -> GebParams {
        GebParams {
            dimension,
            user_count: self.serving.user_count(),
            symbol_energy: self.symbol_energy,
            block_len: self.config.block_len,
            alpha: self.config.alpha,
            policy: self.config.selection,
        }
    }

    /// Beamformers for every block. `dimension` is ignored for the identity.
    pub fn plan(&self, kind: BeamformerKind, dimension: usize) -> Result<BeamformerPlan> {
        let blocks = self.config.block_count();
        let n = self.geometry.element_count();
        let (dimension, per_block, ledgers) = match kind {
            BeamformerKind::SequentialGeb => {
                let sched = self.designer.sequential(&self.geb_params(dimension), blocks)?;
                (dimension, sched.beamformers, sched.ledgers)
            }
            BeamformerKind::FixedGeb => {
                let bf = self.designer.fixed(&self.geb_params(dimension))?;
                (
                    dimension,
                    vec![bf; blocks],
                    vec![self.designer.initial_ledger()],
                )
            }
            BeamformerKind::Dft => {
                let bf = dft_beamspace(&self.spatial, self.serving.pdp(), dimension)?;
                (dimension, vec![bf; blocks], Vec::new())
            }
            BeamformerKind::Identity => (n, vec![Beamformer::identity(n); blocks], Vec::new()),
        };
        Ok(BeamformerPlan {
            kind,
            dimension,
            blocks: per_block,
            ledgers,
        })
    }

    /// All plans requested by the configuration, in output order.
    pub fn plans(&self) -> Result<Vec<BeamformerPlan>> {
        let mut kinds = self.config.beamformers.clone();
        kinds.sort();
        kinds.dedup();
        let mut dims = self.config.dimensions.clone();
        dims.sort_unstable();
        dims.dedup();
        let mut out = Vec::new();
        for kind in kinds {
            if kind == BeamformerKind::Identity {
                out.push(self.plan(kind, self.geometry.element_count())?);
            } else {
                for &d in &dims {
                    out.push(self.plan(kind, d)?);
                }
            }
        }
        Ok(out)
    }

    /// Runs the filter covariance recursion for one plan.
    pub fn covariance_pass(&self, plan: &BeamformerPlan) -> Result<CovarianceTrack> {
        let cfg = &self.config;
        let mut state = KalmanState::init(&self.channel_covariance);
        let mut proj: Option<(usize, ProjectedNoise)> = None;
        let mut track = CovarianceTrack {
            gains: Vec::with_capacity(cfg.training_len),
            mse: Vec::with_capacity(cfg.training_len),
            log_det: Vec::with_capacity(cfg.training_len),
            captured_power: Vec::with_capacity(cfg.training_len),
        };
        let mut captured: Vec<Option<f64>> = vec![None; plan.blocks.len()];
        for n in 0..cfg.training_len {
            let block = n / cfg.block_len;
            let bf = &plan.blocks[block];
            if proj.as_ref().map(|p| p.0) != Some(block) {
                proj = Some((block, ProjectedNoise::new(bf.columns(), &self.r_eta)?));
            }
            let p = &proj.as_ref().expect("set above").1;
            if cfg.schedule.is_training(n, cfg.block_len) {
                // The covariance recursion does not read the observation.
                let y = Observation {
                    y: CVec::zeros(bf.dimension()),
                    epoch: n,
                };
                let (next, rec) =
                    measurement_update(&state, &y, &self.training[n], p, UpdateForm::Standard)?;
                state = next;
                track.gains.push(Some(rec.gain));
            } else {
                state = state.skip_measurement()?;
                track.gains.push(None);
            }
            track.mse.push(state.mse());
            track.log_det.push(if cfg.track_log_det {
                state.log_det(LOG_DET_FLOOR)
            } else {
                f64::NAN
            });
            let cp = match captured[block] {
                Some(v) => v,
                None => {
                    let v = bf.captured_power(&self.summed)?;
                    captured[block] = Some(v);
                    v
                }
            };
            track.captured_power.push(cp);
            if n + 1 < cfg.training_len {
                state = predict(&state, cfg.alpha, &self.channel_dense)?;
            }
        }
        Ok(track)
    }

    fn interference_source(&self, rng: &mut ChaCha8Rng) -> Result<InterferenceSource> {
        match self.config.interference {
            InterferenceModel::Gaussian => InterferenceSource::gaussian(&self.r_eta),
            InterferenceModel::Explicit => InterferenceSource::explicit(
                &self.geometry,
                &self.interferers,
                self.symbol_energy,
                self.config.noise_power,
                self.config.alpha,
                InterfererSymbols::Qpsk,
                self.config.quadrature_points,
                rng,
            ),
        }
    }

    /// Channel and observations of trial `trial`, seeded with `seed + trial`.
    pub fn trajectory(&self, trial: usize) -> Result<Trajectory> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_add(trial as u64));
        let model = ArModel::from_extended(self.config.alpha, &self.channel_covariance)?;
        let mut interference = self.interference_source(&mut rng)?;
        let mut state = sample_initial(&model, &mut rng);
        let mut channels = Vec::with_capacity(self.config.training_len);
        let mut observations = Vec::with_capacity(self.config.training_len);
        for n in 0..self.config.training_len {
            if n > 0 {
                state = evolve(&state, &model, &mut rng)?;
            }
            observations.push(observe_full(&state, &self.training[n], &mut interference, &mut rng)?);
            channels.push(state.h.clone());
        }
        Ok(Trajectory {
            channels,
            observations,
        })
    }

    /// `ĥ_{n|n}` for every epoch from precomputed gains.
    pub fn estimate_trajectory(
        &self,
        plan: &BeamformerPlan,
        track: &CovarianceTrack,
        traj: &Trajectory,
    ) -> Result<Vec<CVec>> {
        let cfg = &self.config;
        let alpha = Complex64::new(cfg.alpha, 0.0);
        let mut h = CVec::zeros(self.channel_covariance.dim());
        let mut out = Vec::with_capacity(cfg.training_len);
        for n in 0..cfg.training_len {
            if let Some(gain) = &track.gains[n] {
                let s = plan.blocks[n / cfg.block_len].columns();
                let y = traj.observations[n].project(s)?;
                let map = measurement_matrix(&self.training[n], s)?;
                let z = y.y - map.adjoint_apply(&h)?;
                h.gemv(Complex64::new(1.0, 0.0), gain, &z, Complex64::new(1.0, 0.0));
            }
            out.push(h.clone());
            h *= alpha;
        }
        Ok(out)
    }

    fn trial_rows(
        &self,
        plans: &[BeamformerPlan],
        tracks: &[CovarianceTrack],
        trial: usize,
    ) -> Result<Vec<ResultRow>> {
        let traj = self.trajectory(trial)?;
        let users = self.serving.user_count() as f64;
        let mut rows = Vec::new();
        for (plan, track) in plans.iter().zip(tracks) {
            let estimates = self.estimate_trajectory(plan, track, &traj)?;
            for (n, est) in estimates.iter().enumerate() {
                rows.push(ResultRow {
                    epoch: n,
                    dimension: plan.dimension,
                    kind: plan.kind,
                    trial,
                    mse: track.mse[n],
                    empirical_error: (&traj.channels[n] - est).norm_squared() / users,
                    det_log: track.log_det[n],
                    captured_power: track.captured_power[n],
                });
            }
        }
        Ok(rows)
    }

    fn pattern_rows(&self, plans: &[BeamformerPlan]) -> Result<Vec<PatternRow>> {
        let step = self.config.pattern_step;
        let count = (180.0 / step).floor() as usize;
        let grid: Vec<f64> = (0..=count)
            .map(|i| -90.0 + i as f64 * step)
            .filter(|a| a.abs() < 90.0)
            .collect();
        let mut rows = Vec::new();
        for plan in plans {
            let mut blocks = vec![0];
            let last = plan.blocks.len() - 1;
            if plan.kind == BeamformerKind::SequentialGeb && last > 0 {
                blocks.push(last);
            }
            for b in blocks {
                let gains = beam_pattern(plan.blocks[b].columns(), &self.geometry, &grid)?;
                rows.extend(grid.iter().zip(gains).map(|(&azimuth, gain_db)| PatternRow {
                    kind: plan.kind,
                    dimension: plan.dimension,
                    block: b,
                    azimuth,
                    gain_db,
                }));
            }
        }
        Ok(rows)
    }

    fn selection_rows(&self, plans: &[BeamformerPlan]) -> Vec<SelectionRow> {
        let mut rows = Vec::new();
        for plan in plans {
            for (b, ledger) in plan.ledgers.iter().enumerate() {
                let bf = &plan.blocks[b];
                let Some(measured) = bf.measured() else {
                    continue;
                };
                for (delay, index) in measured.pairs() {
                    let column = bf.sources().iter().position(|&s| s == (delay, index));
                    rows.push(SelectionRow {
                        kind: plan.kind,
                        dimension: plan.dimension,
                        block: b,
                        delay,
                        index,
                        snr: ledger.current()[delay][index],
                        column,
                    });
                }
            }
        }
        rows
    }
}

/// Runs every configured beamformer and dimension over all trials.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let scenario = Scenario::build(config)?;
    let plans = scenario.plans()?;
    let tracks = plans
        .par_iter()
        .map(|p| scenario.covariance_pass(p))
        .collect::<Result<Vec<_>>>()?;
    let per_trial = (0..config.trials)
        .into_par_iter()
        .map(|t| scenario.trial_rows(&plans, &tracks, t))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ResultRow> = per_trial.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.kind, a.dimension, a.trial, a.epoch).cmp(&(b.kind, b.dimension, b.trial, b.epoch))
    });
    Ok(ExperimentOutput {
        rows,
        patterns: scenario.pattern_rows(&plans)?,
        selections: scenario.selection_rows(&plans),
    })
}

/// Trial mean and standard error of the mean at one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub epoch: usize,
    pub dimension: usize,
    pub kind: BeamformerKind,
    pub trials: usize,
    pub mse_mean: f64,
    pub mse_se: f64,
    pub empirical_mean: f64,
    pub empirical_se: f64,
    pub det_log: f64,
    pub captured_power: f64,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-(kind, dimension, epoch) averages over trials, in that order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(BeamformerKind, usize, usize)> =
        rows.iter().map(|r| (r.kind, r.dimension, r.epoch)).collect();
    keys.sort();
    keys.dedup();
    let mut groups: std::collections::BTreeMap<(BeamformerKind, usize, usize), Vec<&ResultRow>> =
        keys.into_iter().map(|k| (k, Vec::new())).collect();
    for r in rows {
        groups
            .get_mut(&(r.kind, r.dimension, r.epoch))
            .expect("key inserted")
            .push(r);
    }
    groups
        .into_iter()
        .map(|((kind, dimension, epoch), rs)| {
            let mse: Vec<f64> = rs.iter().map(|r| r.mse).collect();
            let emp: Vec<f64> = rs.iter().map(|r| r.empirical_error).collect();
            let (mse_mean, mse_se) = mean_se(&mse);
            let (empirical_mean, empirical_se) = mean_se(&emp);
            SummaryRow {
                epoch,
                dimension,
                kind,
                trials: rs.len(),
                mse_mean,
                mse_se,
                empirical_mean,
                empirical_se,
                det_log: rs[0].det_log,
                captured_power: rs[0].captured_power,
            }
        })
        .collect()
}

/// Summary rows at the last epoch only.
pub fn final_epoch_summary(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let last = rows.iter().map(|r| r.epoch).max().unwrap_or(0);
    summarize(rows)
        .into_iter()
        .filter(|s| s.epoch == last)
        .collect()
}
