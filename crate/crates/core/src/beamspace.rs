//! Statistical pre-beamformers.
//!
//! The generalized eigenvector beamformer (GEB) takes its columns from the
//! generalized eigenvectors of each delay's signal covariance `ρ_l R_l`
//! against the interference covariance `R_η`. Eigenvectors are scaled to be
//! `R_η`-orthonormal, which diagonalizes both quadratic forms at once, so the
//! per-delay SNR matrices reduce to the scalar spectra held by [`SnrLedger`].
//!
//! The sequential design re-selects columns at the start of every block of
//! `M` symbols: pick the largest ledger entries pooled across delays, shrink
//! the measured entries by `λ / (1 + E_s M λ)`, then relax every entry toward
//! its initial value by `α^{2M}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::{steering_vector, ArrayGeometry, SpatialCovariance};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, hermitian_eigen, log_det_hpd, CMat, CVec, ONE};

/// Generalized eigenvalues below this are treated as zero.
pub const EIGENVALUE_CLAMP: f64 = 1e-14;

/// A candidate column is considered already covered by the current beamformer
/// when its `R_η`-norm residual after projection falls below this fraction.
pub const SPAN_TOLERANCE: f64 = 1e-6;

/// Floor applied to beam-pattern gains before conversion to dB.
pub const GAIN_FLOOR: f64 = 1e-30;

/// Solution of `A V = B V Λ` with `V^H B V = I` and `Λ` sorted descending.
#[derive(Debug, Clone)]
pub struct GeneralizedEigenPair {
    vectors: CMat,
    values: Vec<f64>,
}

impl GeneralizedEigenPair {
    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Generalized eigendecomposition of the Hermitian pencil `(A, B)` for PSD `A`
/// and positive definite `B`, computed by whitening with the Cholesky factor
/// `B = L L^H`: `V = L^{-H} U` where `U` diagonalizes `L^{-1} A L^{-H}`.
pub fn generalized_eigendecomposition(a: &CMat, b: &CMat) -> Result<GeneralizedEigenPair> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::Dimension(format!(
            "pencil operands are {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let l = cholesky(b)?.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Factorization("singular whitening factor".into()))?;
    let whitened = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::Factorization("singular whitening factor".into()))?;
    let (mut values, u) = hermitian_eigen(&whitened)?;
    for v in values.iter_mut() {
        if *v < EIGENVALUE_CLAMP {
            *v = 0.0;
        }
    }
    let vectors = l
        .ad_solve_lower_triangular(&u)
        .ok_or_else(|| Error::Factorization("singular whitening factor".into()))?;
    Ok(GeneralizedEigenPair { vectors, values })
}

/// Per-delay SNR spectra: the current `Λ^l` and the initial `Λ^l_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrLedger {
    current: Vec<Vec<f64>>,
    initial: Vec<Vec<f64>>,
    block: usize,
}

impl SnrLedger {
    pub fn new(initial: Vec<Vec<f64>>) -> Result<Self> {
        if initial.is_empty() {
            return Err(Error::Domain("ledger needs at least one delay".into()));
        }
        if initial.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain("ledger entries must be finite and nonnegative".into()));
        }
        Ok(Self {
            current: initial.clone(),
            initial,
            block: 0,
        })
    }

    pub fn from_pairs(pairs: &[GeneralizedEigenPair]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| p.values.clone()).collect())
    }

    pub fn current(&self) -> &[Vec<f64>] {
        &self.current
    }

    pub fn initial(&self) -> &[Vec<f64>] {
        &self.initial
    }

    /// Index `m` of the block this ledger describes.
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn memory(&self) -> usize {
        self.current.len()
    }

    pub fn entry_count(&self) -> usize {
        self.current.iter().map(Vec::len).sum()
    }

    /// `(delay, index)` pairs ordered by descending current value, ties
    /// broken by lower delay, then lower index.
    pub fn pooled_order(&self) -> Vec<(usize, usize)> {
        let mut order: Vec<(usize, usize)> = self
            .current
            .iter()
            .enumerate()
            .flat_map(|(l, vals)| (0..vals.len()).map(move |i| (l, i)))
            .collect();
        order.sort_by(|&(la, ia), &(lb, ib)| {
            self.current[lb][ib]
                .total_cmp(&self.current[la][ia])
                .then(la.cmp(&lb))
                .then(ia.cmp(&ib))
        });
        order
    }
}

/// Index sets `I^l` into the columns of each `V^l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    per_delay: Vec<Vec<usize>>,
}

impl Selection {
    pub fn empty(memory: usize) -> Self {
        Self {
            per_delay: vec![Vec::new(); memory],
        }
    }

    pub fn from_pairs(memory: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut sel = Self::empty(memory);
        for (l, i) in pairs {
            sel.insert(l, i);
        }
        sel
    }

    fn insert(&mut self, delay: usize, index: usize) {
        let set = &mut self.per_delay[delay];
        if let Err(pos) = set.binary_search(&index) {
            set.insert(pos, index);
        }
    }

    /// Sorted indices selected for `delay`.
    pub fn indices(&self, delay: usize) -> &[usize] {
        &self.per_delay[delay]
    }

    pub fn per_delay(&self) -> &[Vec<usize>] {
        &self.per_delay
    }

    pub fn contains(&self, delay: usize, index: usize) -> bool {
        self.per_delay[delay].binary_search(&index).is_ok()
    }

    pub fn total(&self) -> usize {
        self.per_delay.iter().map(Vec::len).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.per_delay
            .iter()
            .enumerate()
            .flat_map(|(l, set)| set.iter().map(move |&i| (l, i)))
    }
}

fn check_design_scalars(user_count: usize, symbol_energy: f64, block_len: usize) -> Result<()> {
    if user_count == 0 || block_len == 0 {
        return Err(Error::Domain("user count and block length must be positive".into()));
    }
    if !(symbol_energy > 0.0 && symbol_energy.is_finite()) {
        return Err(Error::Domain(format!(
            "symbol energy must be positive, got {symbol_energy}"
        )));
    }
    Ok(())
}

/// `ln F = K Σ_l Σ_{i∈I^l} ln(1 + E_s M λ^l_i)` for the current ledger.
pub fn log_det_metric(
    ledger: &SnrLedger,
    selection: &Selection,
    user_count: usize,
    symbol_energy: f64,
    block_len: usize,
) -> f64 {
    let gain = symbol_energy * block_len as f64;
    user_count as f64
        * selection
            .pairs()
            .map(|(l, i)| (gain * ledger.current[l][i]).ln_1p())
            .sum::<f64>()
}

/// Index sets maximizing the determinant metric for a total dimension `D`.
///
/// The log-metric is a sum of increasing per-entry terms, so its maximizer is
/// the top `D` ledger entries pooled across delays.
pub fn allocate_dimensions(
    ledger: &SnrLedger,
    dimension: usize,
    user_count: usize,
    symbol_energy: f64,
    block_len: usize,
) -> Result<Selection> {
    check_design_scalars(user_count, symbol_energy, block_len)?;
    let available = ledger.entry_count();
    if dimension > available {
        return Err(Error::Domain(format!(
            "dimension {dimension} exceeds the {available} available eigen-directions"
        )));
    }
    Ok(Selection::from_pairs(
        ledger.memory(),
        ledger.pooled_order().into_iter().take(dimension),
    ))
}

/// Shrinks the measured entries and relaxes every entry toward its initial
/// value.
pub fn update_ledger(
    ledger: &SnrLedger,
    measured: &Selection,
    symbol_energy: f64,
    block_len: usize,
    alpha: f64,
) -> Result<SnrLedger> {
    if measured.per_delay.len() != ledger.memory() {
        return Err(Error::Dimension(format!(
            "selection covers {} delays, ledger has {}",
            measured.per_delay.len(),
            ledger.memory()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let gain = symbol_energy * block_len as f64;
    let keep = alpha.powi(2 * block_len as i32);
    let mut next = ledger.clone();
    for (l, i) in measured.pairs() {
        let lam = next
            .current
            .get_mut(l)
            .and_then(|v| v.get_mut(i))
            .ok_or_else(|| Error::Domain(format!("selected entry ({l}, {i}) out of range")))?;
        *lam /= 1.0 + gain * *lam;
    }
    for (cur, init) in next.current.iter_mut().zip(&ledger.initial) {
        for (c, i0) in cur.iter_mut().zip(init) {
            *c = keep * *c + (1.0 - keep) * i0;
        }
    }
    next.block += 1;
    Ok(next)
}

/// How columns are drawn from the pooled ledger order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    /// Exactly the `D` pooled top entries; a direction picked for two delays
    /// occupies two columns.
    Pooled,
    /// Walk the pooled order and keep a candidate only if it enlarges the
    /// span; candidates already in the span are marked measured without
    /// consuming a column.
    #[default]
    SpanAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BeamformerKind {
    #[serde(rename = "geb-seq")]
    SequentialGeb,
    #[serde(rename = "geb-fixed")]
    FixedGeb,
    #[serde(rename = "dft")]
    Dft,
    #[serde(rename = "identity")]
    Identity,
}

impl BeamformerKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::SequentialGeb => "geb-seq",
            Self::FixedGeb => "geb-fixed",
            Self::Dft => "dft",
            Self::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "geb-seq" => Ok(Self::SequentialGeb),
            "geb-fixed" => Ok(Self::FixedGeb),
            "dft" => Ok(Self::Dft),
            "identity" => Ok(Self::Identity),
            other => Err(Error::Config(format!("unknown beamformer '{other}'"))),
        }
    }
}

/// An `N × D` pre-beamformer.
#[derive(Debug, Clone)]
pub struct Beamformer {
    kind: BeamformerKind,
    columns: CMat,
    blocks: Vec<CMat>,
    sources: Vec<(usize, usize)>,
    measured: Option<Selection>,
}

impl Beamformer {
    pub fn kind(&self) -> BeamformerKind {
        self.kind
    }

    /// The realized `N × D` matrix applied to the array output. GEB columns
    /// are `R_η`-orthonormal; DFT and identity columns are orthonormal.
    pub fn columns(&self) -> &CMat {
        &self.columns
    }

    pub fn dimension(&self) -> usize {
        self.columns.ncols()
    }

    /// Per-delay blocks `S_D(l)`: the raw `V^l` columns drawn for delay `l`.
    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    /// `(delay, index)` behind each realized column, in column order.
    pub fn sources(&self) -> &[(usize, usize)] {
        &self.sources
    }

    /// Ledger entries measured by this GEB (a superset of `sources` under
    /// [`SelectionPolicy::SpanAware`]).
    pub fn measured(&self) -> Option<&Selection> {
        self.measured.as_ref()
    }

    /// Fraction of `trace(cov)` captured by the orthogonal projector onto the
    /// column span.
    pub fn captured_power(&self, cov: &CMat) -> Result<f64> {
        let q = orthonormal_basis(&self.columns);
        let total = crate::linalg::trace_re(cov);
        if total <= 0.0 {
            return Ok(0.0);
        }
        let captured = crate::linalg::trace_re(&(q.adjoint() * cov * &q));
        Ok(captured / total)
    }

    pub fn identity(element_count: usize) -> Self {
        let columns = CMat::identity(element_count, element_count);
        Self {
            kind: BeamformerKind::Identity,
            blocks: vec![columns.clone()],
            sources: (0..element_count).map(|i| (0, i)).collect(),
            columns,
            measured: None,
        }
    }

    /// Wraps an arbitrary matrix, e.g. for tests against textbook filters.
    pub fn from_columns(kind: BeamformerKind, columns: CMat) -> Self {
        let d = columns.ncols();
        Self {
            kind,
            blocks: vec![columns.clone()],
            sources: (0..d).map(|i| (0, i)).collect(),
            columns,
            measured: None,
        }
    }
}

/// Euclidean orthonormal basis of the column span (modified Gram-Schmidt,
/// dropping dependent columns).
fn orthonormal_basis(s: &CMat) -> CMat {
    let scale = s.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis: Vec<CVec> = Vec::new();
    for col in s.column_iter() {
        let mut v: CVec = col.into_owned();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&v);
                v.axpy(-c, q, ONE);
            }
        }
        let nv = v.norm();
        if nv > 1e-10 * scale {
            basis.push(v / Complex64::new(nv, 0.0));
        }
    }
    if basis.is_empty() {
        return CMat::zeros(s.nrows(), 0);
    }
    CMat::from_columns(&basis)
}

/// Parameters of a GEB design.
#[derive(Debug, Clone, Copy)]
pub struct GebParams {
    pub dimension: usize,
    pub user_count: usize,
    pub symbol_energy: f64,
    pub block_len: usize,
    pub alpha: f64,
    pub policy: SelectionPolicy,
}

/// Generalized eigenpairs of every delay against a common `R_η`.
#[derive(Debug, Clone)]
pub struct GebDesigner {
    pairs: Vec<GeneralizedEigenPair>,
    r_eta: CMat,
}

/// Output of the sequential design: the beamformer of each block and the
/// ledger it was selected from.
#[derive(Debug, Clone)]
pub struct GebSchedule {
    pub beamformers: Vec<Beamformer>,
    pub ledgers: Vec<SnrLedger>,
}

impl GebDesigner {
    /// `weighted[l]` is `ρ_l R_l`.
    pub fn new(weighted: &[CMat], r_eta: &CMat) -> Result<Self> {
        if weighted.is_empty() {
            return Err(Error::Domain("need at least one delay".into()));
        }
        let pairs = weighted
            .iter()
            .map(|a| generalized_eigendecomposition(a, r_eta))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            pairs,
            r_eta: r_eta.clone(),
        })
    }

    pub fn from_spatial(spatial: &[SpatialCovariance], pdp: &[f64], r_eta: &CMat) -> Result<Self> {
        if spatial.len() != pdp.len() {
            return Err(Error::Dimension(format!(
                "{} covariances but {} power-delay entries",
                spatial.len(),
                pdp.len()
            )));
        }
        let weighted: Vec<CMat> = spatial
            .iter()
            .zip(pdp)
            .map(|(r, rho)| r.matrix() * Complex64::new(*rho, 0.0))
            .collect();
        Self::new(&weighted, r_eta)
    }

    pub fn pairs(&self) -> &[GeneralizedEigenPair] {
        &self.pairs
    }

    pub fn r_eta(&self) -> &CMat {
        &self.r_eta
    }

    pub fn element_count(&self) -> usize {
        self.r_eta.nrows()
    }

    pub fn initial_ledger(&self) -> SnrLedger {
        SnrLedger::from_pairs(&self.pairs).expect("clamped generalized eigenvalues are nonnegative")
    }

    fn check_params(&self, params: &GebParams) -> Result<()> {
        check_design_scalars(params.user_count, params.symbol_energy, params.block_len)?;
        let available = self.pairs.len() * self.element_count();
        if params.dimension == 0 || params.dimension > available {
            return Err(Error::Domain(format!(
                "GEB dimension must lie in 1..={available}, got {}",
                params.dimension
            )));
        }
        if !(0.0..=1.0).contains(&params.alpha) {
            return Err(Error::Domain(format!(
                "alpha must lie in [0, 1], got {}",
                params.alpha
            )));
        }
        Ok(())
    }

    /// Beamformer for one block given the current ledger.
    pub fn assemble(&self, ledger: &SnrLedger, params: &GebParams) -> Result<Beamformer> {
        self.check_params(params)?;
        let memory = self.pairs.len();
        let mut span = BSpan::new(&self.r_eta);
        let mut sources = Vec::new();
        let mut measured = Selection::empty(memory);

        match params.policy {
            SelectionPolicy::Pooled => {
                let order = ledger.pooled_order();
                for &(l, i) in order.iter().take(params.dimension) {
                    measured.insert(l, i);
                    if span.try_push(&self.pairs[l].vectors.column(i).into_owned()) {
                        sources.push((l, i));
                    }
                }
            }
            SelectionPolicy::SpanAware => {
                for (l, i) in ledger.pooled_order() {
                    let v = self.pairs[l].vectors.column(i).into_owned();
                    if span.len() < params.dimension {
                        if span.try_push(&v) {
                            sources.push((l, i));
                        }
                        measured.insert(l, i);
                    } else if span.covers(&v) {
                        measured.insert(l, i);
                    }
                }
            }
        }

        let blocks = (0..memory)
            .map(|l| {
                let cols: Vec<CVec> = sources
                    .iter()
                    .filter(|(dl, _)| *dl == l)
                    .map(|&(dl, i)| self.pairs[dl].vectors.column(i).into_owned())
                    .collect();
                if cols.is_empty() {
                    CMat::zeros(self.element_count(), 0)
                } else {
                    CMat::from_columns(&cols)
                }
            })
            .collect();
        Ok(Beamformer {
            kind: BeamformerKind::SequentialGeb,
            columns: span.into_matrix(self.element_count()),
            blocks,
            sources,
            measured: Some(measured),
        })
    }

    /// GEB designed once from the initial spectra.
    pub fn fixed(&self, params: &GebParams) -> Result<Beamformer> {
        let mut bf = self.assemble(&self.initial_ledger(), params)?;
        bf.kind = BeamformerKind::FixedGeb;
        Ok(bf)
    }

    /// Runs the sequential construction for `blocks` blocks.
    pub fn sequential(&self, params: &GebParams, blocks: usize) -> Result<GebSchedule> {
        let mut ledger = self.initial_ledger();
        let mut beamformers = Vec::with_capacity(blocks);
        let mut ledgers = Vec::with_capacity(blocks);
        for _ in 0..blocks {
            let bf = self.assemble(&ledger, params)?;
            let next = update_ledger(
                &ledger,
                bf.measured.as_ref().expect("GEB records its selection"),
                params.symbol_energy,
                params.block_len,
                params.alpha,
            )?;
            ledgers.push(ledger);
            beamformers.push(bf);
            ledger = next;
        }
        Ok(GebSchedule {
            beamformers,
            ledgers,
        })
    }
}

/// Incrementally built `R_η`-orthonormal basis.
struct BSpan<'a> {
    b: &'a CMat,
    basis: Vec<CVec>,
    b_basis: Vec<CVec>,
}

impl<'a> BSpan<'a> {
    fn new(b: &'a CMat) -> Self {
        Self {
            b,
            basis: Vec::new(),
            b_basis: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.basis.len()
    }

    fn b_norm(&self, v: &CVec) -> f64 {
        v.dotc(&(self.b * v)).re.max(0.0).sqrt()
    }

    /// Residual of `v` after removing its `R_η`-projection on the span,
    /// with the relative residual norm.
    fn residual(&self, v: &CVec) -> (CVec, f64, CVec) {
        let scale = self.b_norm(v);
        let mut r = v.clone();
        for _ in 0..2 {
            for (q, bq) in self.basis.iter().zip(&self.b_basis) {
                let c = bq.dotc(&r);
                r.axpy(-c, q, ONE);
            }
        }
        let br = self.b * &r;
        let nr = r.dotc(&br).re.max(0.0).sqrt();
        let rel = if scale > 0.0 { nr / scale } else { 0.0 };
        (r, rel, br)
    }

    fn covers(&self, v: &CVec) -> bool {
        self.residual(v).1 <= SPAN_TOLERANCE
    }

    fn try_push(&mut self, v: &CVec) -> bool {
        let (r, rel, br) = self.residual(v);
        if rel <= SPAN_TOLERANCE {
            return false;
        }
        let nr = r.dotc(&br).re.sqrt();
        let inv = Complex64::new(1.0 / nr, 0.0);
        self.basis.push(r * inv);
        self.b_basis.push(br * inv);
        true
    }

    fn into_matrix(self, rows: usize) -> CMat {
        if self.basis.is_empty() {
            CMat::zeros(rows, 0)
        } else {
            CMat::from_columns(&self.basis)
        }
    }
}

/// Sequential GEB from spatial covariances (see [`GebDesigner::sequential`]).
pub fn sequential_geb(
    spatial: &[SpatialCovariance],
    pdp: &[f64],
    r_eta: &CMat,
    params: &GebParams,
    blocks: usize,
) -> Result<GebSchedule> {
    GebDesigner::from_spatial(spatial, pdp, r_eta)?.sequential(params, blocks)
}

/// Conventional beamspace: top `D` orthonormal eigenvectors of `Σ_l ρ_l R_l`.
pub fn dft_beamspace(spatial: &[SpatialCovariance], pdp: &[f64], dimension: usize) -> Result<Beamformer> {
    if spatial.len() != pdp.len() || spatial.is_empty() {
        return Err(Error::Dimension(format!(
            "{} covariances but {} power-delay entries",
            spatial.len(),
            pdp.len()
        )));
    }
    let n = spatial[0].dim();
    if dimension == 0 || dimension > n {
        return Err(Error::Domain(format!(
            "DFT beamspace dimension must lie in 1..={n}, got {dimension}"
        )));
    }
    let mut total = CMat::zeros(n, n);
    for (r, rho) in spatial.iter().zip(pdp) {
        total += r.matrix() * Complex64::new(*rho, 0.0);
    }
    let (_, vectors) = hermitian_eigen(&total)?;
    let columns = vectors.columns(0, dimension).into_owned();
    Ok(Beamformer {
        kind: BeamformerKind::Dft,
        blocks: vec![columns.clone()],
        sources: (0..dimension).map(|i| (0, i)).collect(),
        columns,
        measured: None,
    })
}

/// `10 log10 ‖S^H a(θ)‖²` over an azimuth grid in degrees.
pub fn beam_pattern(s: &CMat, geometry: &ArrayGeometry, azimuths: &[f64]) -> Result<Vec<f64>> {
    if s.nrows() != geometry.element_count() {
        return Err(Error::Dimension(format!(
            "beamformer has {} rows, array has {} elements",
            s.nrows(),
            geometry.element_count()
        )));
    }
    azimuths
        .iter()
        .map(|&theta| {
            let a = steering_vector(geometry, theta)?;
            let g = s.ad_mul(&a).norm_squared();
            Ok(10.0 * g.max(GAIN_FLOOR).log10())
        })
        .collect()
}

/// Largest `|v_a^H R_η v_b|` between realized source columns drawn from
/// different delays. Zero when the per-delay eigenspaces are
/// `R_η`-orthogonal, which is when the separable metric is exact.
pub fn cross_delay_overlap(designer: &GebDesigner, bf: &Beamformer) -> f64 {
    let mut worst = 0.0f64;
    let src = bf.sources();
    for (a, &(la, ia)) in src.iter().enumerate() {
        let va = designer.pairs[la].vectors.column(ia);
        let bva = &designer.r_eta * va;
        for &(lb, ib) in &src[a + 1..] {
            if la == lb {
                continue;
            }
            let vb = designer.pairs[lb].vectors.column(ib);
            worst = worst.max(vb.dotc(&bva).norm());
        }
    }
    worst
}

/// Exact `ln det(I + E_s M Σ_l I_K ⊗ E_{L,l} ⊗ SNR^l)` for the realized
/// beamformer against error-covariance blocks `A^l`.
pub fn realized_log_det_metric(
    blocks: &[CMat],
    s: &CMat,
    r_eta: &CMat,
    user_count: usize,
    symbol_energy: f64,
    block_len: usize,
) -> Result<f64> {
    let noise = s.adjoint() * r_eta * s;
    let noise_log_det = log_det_hpd(&noise)?;
    let gain = Complex64::new(symbol_energy * block_len as f64, 0.0);
    let mut total = 0.0;
    for a in blocks {
        // det(I + c N^{-1} S^H A S) = det(N + c S^H A S) / det(N)
        let m = &noise + s.adjoint() * a * s * gain;
        total += log_det_hpd(&m)? - noise_log_det;
    }
    Ok(user_count as f64 * total)
}
