//! Benchmark-only crate; the measurements live in `benches/core_ops.rs`
//! and run with `cargo bench -p nlca-bench`.
