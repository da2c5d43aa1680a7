//! Criterion benchmarks for `kmtlab-core`; see `benches/`.

pub use kmtlab_core::VERSION;
