//! Seeded fixtures shared by the benchmarks in `benches/`.

use oqs_core::constructions::{self, stream_rng};
use oqs_core::gkls::GklsGenerator;
use oqs_core::superop::QuantumChannel;
use oqs_core::ComplexMatrix;

pub const SEED: u64 = 0x5eed;

pub fn channel(d: usize) -> QuantumChannel {
    constructions::random_stinespring_channel(&mut stream_rng(SEED, d as u64), d, d * d).expect("valid channel")
}

pub fn generator(d: usize) -> GklsGenerator {
    constructions::random_generic_generator(&mut stream_rng(SEED, 100 + d as u64), d, d).expect("valid generator")
}

/// Kraus operators of a random channel, for commutant benchmarks.
pub fn operator_set(d: usize) -> Vec<ComplexMatrix> {
    let ch = channel(d);
    let mut ops = ch.kraus().to_vec();
    ops.extend(
        ch.kraus()
            .iter()
            .map(|k| ComplexMatrix::new(k.adjoint()).expect("finite")),
    );
    ops
}
