//! Pilot generation and the Kronecker-structured measurement map.
//!
//! Pilots are BPSK-mapped sequences from the small Kasami set. The training
//! vector at epoch `n` stacks, user by user, the conjugated symbols
//! `[x_n, x_{n-1}, …, x_{n-L+1}]`, so that `(x ⊗ I_N)^H h` is the noiseless
//! array snapshot for the channel layout of [`crate::channel::ChannelState`].

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, ZERO};

/// Feedback taps (exponents below the degree, constant term included) of the
/// default primitive polynomial for each supported even degree.
fn default_taps(degree: u32) -> Option<&'static [u32]> {
    match degree {
        2 => Some(&[1, 0]),
        4 => Some(&[1, 0]),
        6 => Some(&[1, 0]),
        8 => Some(&[4, 3, 2, 0]),
        10 => Some(&[3, 0]),
        12 => Some(&[6, 4, 1, 0]),
        _ => None,
    }
}

/// One period of the maximal-length sequence with recurrence
/// `a_{k+m} = Σ_{j∈taps} a_{k+j}` (mod 2), seeded with `a_0 = 1`.
pub fn m_sequence(degree: u32, taps: &[u32]) -> Result<Vec<u8>> {
    if degree == 0 || degree > 24 {
        return Err(Error::Domain(format!("unsupported register degree {degree}")));
    }
    if taps.iter().any(|&t| t >= degree) || !taps.contains(&0) {
        return Err(Error::Domain(
            "taps must lie below the degree and include the constant term".into(),
        ));
    }
    let m = degree as usize;
    let period = (1usize << degree) - 1;
    let mut seq = vec![0u8; period];
    seq[0] = 1;
    for k in 0..period - m {
        seq[k + m] = taps.iter().fold(0u8, |acc, &t| acc ^ seq[k + t as usize]);
    }
    Ok(seq)
}

/// Small Kasami set of even `degree`: the base m-sequence `u` followed by
/// `u ⊕ T^j w` for `j = 0 … 2^{degree/2} - 2`, where `w` is `u` decimated by
/// `2^{degree/2} + 1` and `T` is a left cyclic shift. This generation order is
/// the set ordering used by [`build_pilot_book`].
pub fn kasami_small_set(degree: u32) -> Result<Vec<Vec<u8>>> {
    if degree % 2 != 0 {
        return Err(Error::Domain(format!(
            "small Kasami sets need an even degree, got {degree}"
        )));
    }
    let taps = default_taps(degree)
        .ok_or_else(|| Error::Domain(format!("no default polynomial for degree {degree}")))?;
    let u = m_sequence(degree, taps)?;
    let period = u.len();
    let q = (1usize << (degree / 2)) + 1;
    let w: Vec<u8> = (0..period).map(|k| u[(q * k) % period]).collect();
    let shifts = (1usize << (degree / 2)) - 1;
    let mut set = Vec::with_capacity(shifts + 1);
    set.push(u.clone());
    for j in 0..shifts {
        set.push(
            (0..period)
                .map(|k| u[k] ^ w[(k + j) % period])
                .collect(),
        );
    }
    Ok(set)
}

const KASAMI_DEGREE: u32 = 6;

/// Pilot symbols of one user group.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBook {
    sequences: Vec<Vec<Complex64>>,
    /// `precursors[k][j]` is the symbol of user `k` at epoch `-1 - j`;
    /// missing entries are zero.
    precursors: Vec<Vec<Complex64>>,
    symbol_energy: f64,
}

impl PilotBook {
    pub fn new(sequences: Vec<Vec<Complex64>>, symbol_energy: f64) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::Domain("pilot book needs at least one user".into()));
        }
        let len = sequences[0].len();
        if len == 0 || sequences.iter().any(|s| s.len() != len) {
            return Err(Error::Dimension(
                "pilot sequences must be nonempty and of equal length".into(),
            ));
        }
        let users = sequences.len();
        Ok(Self {
            sequences,
            precursors: vec![Vec::new(); users],
            symbol_energy,
        })
    }

    /// Replaces the zero precursors.
    pub fn with_precursors(mut self, precursors: Vec<Vec<Complex64>>) -> Result<Self> {
        if precursors.len() != self.sequences.len() {
            return Err(Error::Dimension(format!(
                "{} precursor rows for {} users",
                precursors.len(),
                self.sequences.len()
            )));
        }
        self.precursors = precursors;
        Ok(self)
    }

    pub fn user_count(&self) -> usize {
        self.sequences.len()
    }

    pub fn len(&self) -> usize {
        self.sequences[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn symbol_energy(&self) -> f64 {
        self.symbol_energy
    }

    pub fn sequence(&self, user: usize) -> &[Complex64] {
        &self.sequences[user]
    }

    /// Symbol of `user` at epoch `n`; negative epochs read the precursors.
    pub fn symbol(&self, user: usize, n: isize) -> Complex64 {
        if n >= 0 {
            self.sequences[user]
                .get(n as usize)
                .copied()
                .unwrap_or(ZERO)
        } else {
            self.precursors[user]
                .get((-1 - n) as usize)
                .copied()
                .unwrap_or(ZERO)
        }
    }

    /// One whitespace-separated row of `+1`/`-1` per user, normalized by `√E_s`.
    pub fn to_text(&self) -> String {
        let scale = self.symbol_energy.sqrt();
        let mut out = String::new();
        for seq in &self.sequences {
            let row: Vec<&str> = seq
                .iter()
                .map(|s| if s.re / scale >= 0.0 { "+1" } else { "-1" })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    /// Parses the format written by [`PilotBook::to_text`].
    pub fn from_text(text: &str, symbol_energy: f64) -> Result<Self> {
        let scale = symbol_energy.sqrt();
        let sequences = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| match tok {
                        "+1" | "1" => Ok(Complex64::new(scale, 0.0)),
                        "-1" => Ok(Complex64::new(-scale, 0.0)),
                        other => Err(Error::Domain(format!("bad pilot chip '{other}'"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sequences, symbol_energy)
    }
}

/// Pilots from the last `user_count` length-63 Kasami sequences, truncated to
/// `length` chips and mapped `0 → +√E_s`, `1 → -√E_s`. Precursors are zero.
pub fn build_pilot_book(length: usize, user_count: usize, symbol_energy: f64) -> Result<PilotBook> {
    let set = kasami_small_set(KASAMI_DEGREE)?;
    let period = set[0].len();
    if length == 0 || length > period {
        return Err(Error::Domain(format!(
            "training length must be in 1..={period}, got {length}"
        )));
    }
    if user_count == 0 || user_count > set.len() {
        return Err(Error::Domain(format!(
            "at most {} users can get distinct Kasami pilots, got {user_count}",
            set.len()
        )));
    }
    if !(symbol_energy > 0.0 && symbol_energy.is_finite()) {
        return Err(Error::Domain(format!(
            "symbol energy must be positive, got {symbol_energy}"
        )));
    }
    let amp = symbol_energy.sqrt();
    let sequences = set[set.len() - user_count..]
        .iter()
        .map(|bits| {
            bits[..length]
                .iter()
                .map(|&b| Complex64::new(if b == 0 { amp } else { -amp }, 0.0))
                .collect()
        })
        .collect();
    PilotBook::new(sequences, symbol_energy)
}

/// Complete training vector of a group at one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingVector {
    x: CVec,
    user_count: usize,
    memory: usize,
}

impl TrainingVector {
    /// Wraps a raw vector laid out user-major, delay-minor.
    pub fn from_vector(x: CVec, user_count: usize, memory: usize) -> Result<Self> {
        if x.len() != user_count * memory {
            return Err(Error::Dimension(format!(
                "training vector has {} entries, expected {}",
                x.len(),
                user_count * memory
            )));
        }
        Ok(Self {
            x,
            user_count,
            memory,
        })
    }

    pub fn as_vector(&self) -> &CVec {
        &self.x
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().all(|v| *v == ZERO)
    }
}

/// Training vector at epoch `n`: entry `k·L + l` is `conj(x^{(k)}_{n-l})`.
pub fn training_vector(book: &PilotBook, epoch: usize, memory: usize) -> Result<TrainingVector> {
    if epoch >= book.len() {
        return Err(Error::Domain(format!(
            "epoch {epoch} beyond training length {}",
            book.len()
        )));
    }
    if memory == 0 {
        return Err(Error::Domain("channel memory must be positive".into()));
    }
    let users = book.user_count();
    let x = CVec::from_fn(users * memory, |j, _| {
        let (k, l) = (j / memory, j % memory);
        book.symbol(k, epoch as isize - l as isize).conj()
    });
    TrainingVector::from_vector(x, users, memory)
}

/// Measurement map `Ψ = x ⊗ S` of shape `(L·K·N) × D`.
///
/// Products are evaluated blockwise; [`MeasurementMap::dense`] exists for
/// small-instance checks only.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementMap<'a> {
    x: &'a TrainingVector,
    s: &'a CMat,
}

/// Builds `Ψ = x ⊗ S` after checking shapes.
pub fn measurement_matrix<'a>(x: &'a TrainingVector, s: &'a CMat) -> Result<MeasurementMap<'a>> {
    if s.ncols() == 0 || s.nrows() == 0 {
        return Err(Error::Dimension("beamformer has no columns".into()));
    }
    Ok(MeasurementMap { x, s })
}

impl<'a> MeasurementMap<'a> {
    pub fn training(&self) -> &TrainingVector {
        self.x
    }

    pub fn beamformer(&self) -> &CMat {
        self.s
    }

    pub fn element_count(&self) -> usize {
        self.s.nrows()
    }

    /// Reduced dimension `D`.
    pub fn reduced_dim(&self) -> usize {
        self.s.ncols()
    }

    /// Number of rows `L·K·N`.
    pub fn state_dim(&self) -> usize {
        self.x.len() * self.s.nrows()
    }

    fn check_state(&self, len: usize) -> Result<()> {
        if len != self.state_dim() {
            return Err(Error::Dimension(format!(
                "state has {len} entries, measurement map expects {}",
                self.state_dim()
            )));
        }
        Ok(())
    }

    /// `Ψ^H h = Σ_j conj(x_j) S^H h_j`.
    pub fn adjoint_apply(&self, h: &CVec) -> Result<CVec> {
        self.check_state(h.len())?;
        Ok(self.s.ad_mul(&self.combine(h)))
    }

    /// `Σ_j conj(x_j) h_j`: the unprojected snapshot `(x ⊗ I_N)^H h`.
    pub(crate) fn combine(&self, h: &CVec) -> CVec {
        let n = self.element_count();
        let mut acc = CVec::zeros(n);
        for (j, xj) in self.x.x.iter().enumerate() {
            if *xj == ZERO {
                continue;
            }
            acc.axpy(xj.conj(), &h.rows(j * n, n), Complex64::new(1.0, 0.0));
        }
        acc
    }

    /// `Ψ z`: block `j` equals `x_j S z`.
    pub fn apply(&self, z: &CVec) -> Result<CVec> {
        if z.len() != self.reduced_dim() {
            return Err(Error::Dimension(format!(
                "vector has {} entries, beamformer has {} columns",
                z.len(),
                self.reduced_dim()
            )));
        }
        let n = self.element_count();
        let sz = self.s * z;
        let mut out = CVec::zeros(self.state_dim());
        for (j, xj) in self.x.x.iter().enumerate() {
            out.rows_mut(j * n, n).copy_from(&(&sz * *xj));
        }
        Ok(out)
    }

    /// `P Ψ = Σ_j x_j P[:, block j] S` for a square `P` of the state dimension.
    pub fn right_multiply(&self, p: &CMat) -> Result<CMat> {
        self.check_state(p.ncols())?;
        let n = self.element_count();
        let mut combined = CMat::zeros(p.nrows(), n);
        for (j, xj) in self.x.x.iter().enumerate() {
            if *xj == ZERO {
                continue;
            }
            combined += p.columns(j * n, n) * *xj;
        }
        Ok(combined * self.s)
    }

    /// Materialized `x ⊗ S`.
    pub fn dense(&self) -> CMat {
        let xm = CMat::from_column_slice(self.x.len(), 1, self.x.x.as_slice());
        crate::linalg::kron(&xm, self.s)
    }
}
