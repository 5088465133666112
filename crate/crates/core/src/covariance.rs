//! Second-order channel statistics: ULA steering, one-ring sector
//! covariances, the inter-group interference covariance and the extended
//! (Kronecker block-diagonal) channel covariance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, hermitian_eigen, trace_re, CMat, CVec, ZERO};

/// Midpoint-rule points per sector used when none is configured.
pub const DEFAULT_QUADRATURE_POINTS: usize = 360;

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    element_count: usize,
    /// Inter-element spacing in wavelengths.
    element_spacing: f64,
}

impl ArrayGeometry {
    pub fn new(element_count: usize, element_spacing: f64) -> Result<Self> {
        if element_count == 0 {
            return Err(Error::Domain("array needs at least one element".into()));
        }
        if !(element_spacing > 0.0 && element_spacing.is_finite()) {
            return Err(Error::Domain(format!(
                "element spacing must be positive, got {element_spacing}"
            )));
        }
        Ok(Self {
            element_count,
            element_spacing,
        })
    }

    /// Half-wavelength ULA.
    pub fn half_wavelength(element_count: usize) -> Result<Self> {
        Self::new(element_count, 0.5)
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn element_spacing(&self) -> f64 {
        self.element_spacing
    }
}

/// Azimuth support `[lower, upper]` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSector {
    lower: f64,
    upper: f64,
}

impl AngularSector {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        check_azimuth(lower)?;
        check_azimuth(upper)?;
        if lower > upper {
            return Err(Error::Domain(format!(
                "sector lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_azimuth(azimuth: f64) -> Result<()> {
    if azimuth.is_finite() && azimuth > -90.0 && azimuth < 90.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "azimuth {azimuth} deg outside (-90, 90)"
        )))
    }
}

/// Geometry and statistics of one user group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupProfile {
    group_id: usize,
    user_count: usize,
    sectors: Vec<AngularSector>,
    pdp: Vec<f64>,
    relative_power: f64,
}

impl GroupProfile {
    /// `sectors[l]` and `pdp[l]` describe delay tap `l`; the channel memory is
    /// their common length. The power-delay profile must sum to one.
    pub fn new(
        group_id: usize,
        user_count: usize,
        sectors: Vec<AngularSector>,
        pdp: Vec<f64>,
        relative_power: f64,
    ) -> Result<Self> {
        if user_count == 0 {
            return Err(Error::Domain("group needs at least one user".into()));
        }
        if sectors.is_empty() {
            return Err(Error::Domain("group needs at least one delay tap".into()));
        }
        if sectors.len() != pdp.len() {
            return Err(Error::Dimension(format!(
                "{} sectors but {} power-delay entries",
                sectors.len(),
                pdp.len()
            )));
        }
        if pdp.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain("power-delay profile must be nonnegative".into()));
        }
        let total: f64 = pdp.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "power-delay profile sums to {total}, expected 1"
            )));
        }
        if !(relative_power.is_finite() && relative_power >= 0.0) {
            return Err(Error::Domain(format!(
                "relative power must be nonnegative, got {relative_power}"
            )));
        }
        Ok(Self {
            group_id,
            user_count,
            sectors,
            pdp,
            relative_power,
        })
    }

    /// Group with a flat power-delay profile `1 / L` over the given sectors.
    pub fn uniform(
        group_id: usize,
        user_count: usize,
        sectors: Vec<AngularSector>,
        relative_power: f64,
    ) -> Result<Self> {
        let memory = sectors.len().max(1);
        let pdp = vec![1.0 / memory as f64; sectors.len()];
        Self::new(group_id, user_count, sectors, pdp, relative_power)
    }

    pub fn group_id(&self) -> usize {
        self.group_id
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    /// Channel memory `L` (number of delay taps).
    pub fn memory(&self) -> usize {
        self.sectors.len()
    }

    pub fn sectors(&self) -> &[AngularSector] {
        &self.sectors
    }

    pub fn pdp(&self) -> &[f64] {
        &self.pdp
    }

    pub fn relative_power(&self) -> f64 {
        self.relative_power
    }
}

/// Hermitian PSD spatial covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCovariance {
    matrix: CMat,
}

impl SpatialCovariance {
    /// Wraps `matrix` after checking it is square, Hermitian and PSD.
    pub fn from_matrix(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "covariance must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.norm().max(1.0);
        if hermitian_defect(&matrix) > 1e-12 * scale {
            return Err(Error::Domain("covariance is not Hermitian".into()));
        }
        let (values, _) = hermitian_eigen(&matrix)?;
        let floor = -1e-10 * trace_re(&matrix).abs().max(1.0);
        if values.last().is_some_and(|&v| v < floor) {
            return Err(Error::Domain("covariance is not positive semidefinite".into()));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMat) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.matrix)
    }
}

/// `R_h = Σ_l I_K ⊗ E_{L,l} ⊗ A^l`, stored as the `L` blocks `A^l`.
///
/// The same shape describes the a priori / a posteriori error covariances
/// whenever they keep the block-diagonal form.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedChannelCovariance {
    user_count: usize,
    blocks: Vec<CMat>,
}

impl ExtendedChannelCovariance {
    pub fn from_blocks(user_count: usize, blocks: Vec<CMat>) -> Result<Self> {
        if user_count == 0 || blocks.is_empty() {
            return Err(Error::Domain(
                "extended covariance needs at least one user and one delay".into(),
            ));
        }
        let n = blocks[0].nrows();
        if blocks.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::Dimension(
                "all delay blocks must be square of equal size".into(),
            ));
        }
        Ok(Self { user_count, blocks })
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn memory(&self) -> usize {
        self.blocks.len()
    }

    pub fn element_count(&self) -> usize {
        self.blocks[0].nrows()
    }

    /// Dimension `N·L·K` of the materialized matrix.
    pub fn dim(&self) -> usize {
        self.element_count() * self.memory() * self.user_count
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, delay: usize) -> &CMat {
        &self.blocks[delay]
    }

    /// Dense `Σ_l I_K ⊗ E_{L,l} ⊗ A^l`. Diagonal block `k·L + l` is `A^l`.
    pub fn materialize(&self) -> CMat {
        let n = self.element_count();
        let l_count = self.memory();
        let mut out = CMat::zeros(self.dim(), self.dim());
        for k in 0..self.user_count {
            for (l, block) in self.blocks.iter().enumerate() {
                let off = (k * l_count + l) * n;
                out.view_mut((off, off), (n, n)).copy_from(block);
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.user_count as f64 * self.blocks.iter().map(trace_re).sum::<f64>()
    }
}

/// ULA response `a_n = exp(i 2π d n sin θ)`, `n = 0..N-1`.
pub fn steering_vector(geometry: &ArrayGeometry, azimuth_deg: f64) -> Result<CVec> {
    check_azimuth(azimuth_deg)?;
    let phase = 2.0 * PI * geometry.element_spacing * azimuth_deg.to_radians().sin();
    Ok(CVec::from_fn(geometry.element_count, |n, _| {
        Complex64::from_polar(1.0, phase * n as f64)
    }))
}

/// Unit-trace covariance of a uniform angular density over `sector`,
/// integrated with a `quadrature_points`-point midpoint rule.
///
/// The result is Toeplitz: entry `(m, p)` depends only on `m - p`, so it is
/// assembled from one lag sequence and is exactly Hermitian.
pub fn sector_covariance(
    geometry: &ArrayGeometry,
    sector: &AngularSector,
    quadrature_points: usize,
) -> Result<SpatialCovariance> {
    if quadrature_points == 0 {
        return Err(Error::Domain("quadrature needs at least one point".into()));
    }
    let n = geometry.element_count;
    let q = quadrature_points as f64;
    let phases: Vec<f64> = (0..quadrature_points)
        .map(|i| {
            let theta = sector.lower + sector.width() * (i as f64 + 0.5) / q;
            2.0 * PI * geometry.element_spacing * theta.to_radians().sin()
        })
        .collect();
    let lags: Vec<Complex64> = (0..n)
        .map(|lag| {
            if lag == 0 {
                return Complex64::new(1.0, 0.0);
            }
            let sum: Complex64 = phases
                .iter()
                .map(|&ph| Complex64::from_polar(1.0, ph * lag as f64))
                .sum();
            sum / q
        })
        .collect();
    let scale = 1.0 / n as f64;
    let matrix = CMat::from_fn(n, n, |r, c| {
        if r >= c {
            lags[r - c] * scale
        } else {
            lags[c - r].conj() * scale
        }
    });
    Ok(SpatialCovariance::from_matrix_unchecked(matrix))
}

/// Spatial covariances `R_l` for every delay tap of a group.
pub fn group_covariances(
    geometry: &ArrayGeometry,
    profile: &GroupProfile,
    quadrature_points: usize,
) -> Result<Vec<SpatialCovariance>> {
    profile
        .sectors
        .iter()
        .map(|s| sector_covariance(geometry, s, quadrature_points))
        .collect()
}

/// `R_η = E_s Σ_{g'} γ_{g'} K_{g'} Σ_l ρ_l R_l^{(g')} + N_0 I` from
/// precomputed per-delay covariances of each interferer.
pub fn interference_from_parts(
    element_count: usize,
    interferers: &[(&GroupProfile, &[SpatialCovariance])],
    symbol_energy: f64,
    noise_power: f64,
) -> Result<CMat> {
    if !(noise_power > 0.0 && noise_power.is_finite()) {
        return Err(Error::Domain(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    if !(symbol_energy >= 0.0 && symbol_energy.is_finite()) {
        return Err(Error::Domain(format!(
            "symbol energy must be nonnegative, got {symbol_energy}"
        )));
    }
    let mut out = CMat::zeros(element_count, element_count);
    for (profile, spatial) in interferers {
        if spatial.len() != profile.memory() {
            return Err(Error::Dimension(format!(
                "group {} has memory {} but {} covariances",
                profile.group_id,
                profile.memory(),
                spatial.len()
            )));
        }
        let weight = symbol_energy * profile.relative_power * profile.user_count as f64;
        for (rho, r) in profile.pdp.iter().zip(spatial.iter()) {
            if r.dim() != element_count {
                return Err(Error::Dimension(format!(
                    "interferer covariance is {}x{}, array has {element_count} elements",
                    r.dim(),
                    r.dim()
                )));
            }
            out += r.matrix() * Complex64::new(weight * rho, 0.0);
        }
    }
    for i in 0..element_count {
        out[(i, i)] += Complex64::new(noise_power, 0.0);
    }
    Ok(out)
}

/// Inter-group interference plus noise covariance seen by `serving`.
pub fn interference_covariance(
    geometry: &ArrayGeometry,
    serving: &GroupProfile,
    interferers: &[GroupProfile],
    symbol_energy: f64,
    noise_power: f64,
    quadrature_points: usize,
) -> Result<CMat> {
    if interferers.iter().any(|g| g.group_id == serving.group_id) {
        return Err(Error::Domain(format!(
            "serving group {} listed among its interferers",
            serving.group_id
        )));
    }
    let spatial: Vec<Vec<SpatialCovariance>> = interferers
        .iter()
        .map(|g| group_covariances(geometry, g, quadrature_points))
        .collect::<Result<_>>()?;
    let parts: Vec<(&GroupProfile, &[SpatialCovariance])> = interferers
        .iter()
        .zip(spatial.iter())
        .map(|(g, s)| (g, s.as_slice()))
        .collect();
    interference_from_parts(
        geometry.element_count,
        &parts,
        symbol_energy,
        noise_power,
    )
}

/// Extended covariance with blocks `ρ_l R_l`.
pub fn extended_covariance(
    profile: &GroupProfile,
    spatial: &[SpatialCovariance],
) -> Result<ExtendedChannelCovariance> {
    if spatial.len() != profile.memory() {
        return Err(Error::Dimension(format!(
            "group memory is {} but {} spatial covariances were given",
            profile.memory(),
            spatial.len()
        )));
    }
    let blocks = profile
        .pdp
        .iter()
        .zip(spatial)
        .map(|(rho, r)| r.matrix() * Complex64::new(*rho, 0.0))
        .collect();
    ExtendedChannelCovariance::from_blocks(profile.user_count, blocks)
}

/// `Σ_l ρ_l R_l` for a group.
pub fn summed_covariance(profile: &GroupProfile, spatial: &[SpatialCovariance]) -> Result<CMat> {
    let first = spatial
        .first()
        .ok_or_else(|| Error::Domain("no spatial covariances".into()))?;
    let mut out = CMat::from_element(first.dim(), first.dim(), ZERO);
    for (rho, r) in profile.pdp.iter().zip(spatial) {
        out += r.matrix() * Complex64::new(*rho, 0.0);
    }
    Ok(out)
}
