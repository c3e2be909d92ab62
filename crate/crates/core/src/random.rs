//! Seeded random configurations for property runs and the verify harness.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::Amplitude;
use crate::elements::{BeamSplitterSpec, ObjectSpec};
use crate::network::{Delays, NetworkConfig};

/// Valid splitter: `T = cos θ e^{iα}`, `R = ±i sin θ e^{iα}`.
pub fn random_splitter<R: Rng + ?Sized>(rng: &mut R, label: &str) -> BeamSplitterSpec {
    let theta = rng.gen_range(0.0..TAU);
    let alpha = rng.gen_range(0.0..TAU);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let t = Amplitude::from_polar(theta.cos(), alpha);
    let r = Amplitude::new(0.0, sign * theta.sin()) * Amplitude::from_polar(1.0, alpha);
    BeamSplitterSpec::labelled(label, t, r).expect("unitary by construction")
}

/// γ ∈ (0, 2], T ∈ [0, 1], all phases in [0, 2π).
pub fn random_config<R: Rng + ?Sized>(rng: &mut R) -> NetworkConfig {
    let mut gamma = || 2.0 - rng.gen_range(0.0..2.0);
    let gammas = [gamma(), gamma(), gamma()];
    NetworkConfig {
        gammas,
        bs_a: random_splitter(rng, "a"),
        bs_b: random_splitter(rng, "b"),
        object1: ObjectSpec::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..TAU)).unwrap(),
        object2: ObjectSpec::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..TAU)).unwrap(),
        delays: Delays {
            phi1: rng.gen_range(0.0..TAU),
            phi2: rng.gen_range(0.0..TAU),
            phi3: rng.gen_range(0.0..TAU),
        },
    }
}

/// `count` configurations from a ChaCha8 stream seeded with `seed`.
pub fn random_configs(seed: u64, count: usize) -> Vec<NetworkConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_config(&mut rng)).collect()
}
