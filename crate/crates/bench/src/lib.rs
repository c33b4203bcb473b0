//! Fixed inputs shared by the benchmarks in `benches/`.

use orbitdp_core::harness::{gen_projection_instance, gen_wishart_instance};
use orbitdp_core::{derived_rng, HermitianMatrix, SamplerConfig};

/// Stream used for every fixture so benchmark inputs never change.
const FIXTURE_SEED: u64 = 0x0b17;

pub fn wishart_fixture(d: usize) -> HermitianMatrix {
    gen_wishart_instance(d, d, &mut derived_rng(FIXTURE_SEED, d as u64)).expect("valid dimensions")
}

pub fn projection_fixture(d: usize, k: usize, top_eig: f64) -> HermitianMatrix {
    gen_projection_instance(d, k, top_eig, &mut derived_rng(FIXTURE_SEED, (d * 16 + k) as u64)).expect("valid dimensions")
}

/// A chain short enough to time many iterations.
pub fn short_chain() -> SamplerConfig {
    SamplerConfig { chain_length: 2_000, burn_in: 500, ..SamplerConfig::default() }
}
