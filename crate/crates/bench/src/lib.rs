//! Benchmark harness for the templar engines; see `benches/`.
