#![allow(dead_code)]

use beamkf::channel::standard_complex_normal;
use beamkf::covariance::{
    group_covariances, ArrayGeometry, ExtendedChannelCovariance, GroupProfile, SpatialCovariance,
};
use beamkf::harness::ExperimentConfig;
use beamkf::linalg::{CMat, CVec};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `ridge·I + Σ v v^H` over `rank` Gaussian vectors, scaled by `1/n`.
pub fn random_gram(n: usize, rank: usize, ridge: f64, rng: &mut ChaCha8Rng) -> CMat {
    let mut m = CMat::identity(n, n) * c(ridge);
    for _ in 0..rank {
        let v = standard_complex_normal(n, rng);
        m += &v * v.adjoint() * c(1.0 / n as f64);
    }
    m
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    let v = standard_complex_normal(rows * cols, rng);
    CMat::from_column_slice(rows, cols, v.as_slice())
}

pub fn random_block_covariance(
    n: usize,
    users: usize,
    memory: usize,
    ridge: f64,
    rng: &mut ChaCha8Rng,
) -> ExtendedChannelCovariance {
    let blocks = (0..memory).map(|_| random_gram(n, n, ridge, rng)).collect();
    ExtendedChannelCovariance::from_blocks(users, blocks).unwrap()
}

pub fn random_bpsk(len: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> CVec {
    CVec::from_fn(len, |_, _| c(if rng.random::<bool>() { amplitude } else { -amplitude }))
}

pub fn relative(a: &CVec, b: &CVec) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Serving-group spatial covariances and interference for the desk preset.
pub fn desk_statistics() -> (ArrayGeometry, GroupProfile, Vec<SpatialCovariance>, CMat) {
    let cfg = ExperimentConfig::desk();
    let scn = beamkf::harness::Scenario::build(&cfg).unwrap();
    let spatial = group_covariances(&scn.geometry, &scn.serving, cfg.quadrature_points).unwrap();
    (scn.geometry, scn.serving, spatial, scn.r_eta)
}
