//! Acceptance checks spanning the library and the command line live in
//! `tests/acceptance.rs`; run them with `cargo test -p fidmark-verify`.
