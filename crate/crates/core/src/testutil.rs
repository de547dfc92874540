use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constructions;
use crate::gkls::GklsGenerator;
use crate::linalg::CMatrix;
use crate::superop::QuantumChannel;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_channel(rng: &mut ChaCha8Rng, d: usize, env: usize) -> QuantumChannel {
    constructions::random_stinespring_channel(rng, d, env).unwrap()
}

pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    constructions::random_density(rng, d)
}

pub fn random_generator(rng: &mut ChaCha8Rng, d: usize, k: usize) -> GklsGenerator {
    constructions::random_generic_generator(rng, d, k).unwrap()
}
