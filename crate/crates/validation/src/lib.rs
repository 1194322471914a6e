//! End-to-end acceptance checks; the checks live in `tests/acceptance.rs`.
