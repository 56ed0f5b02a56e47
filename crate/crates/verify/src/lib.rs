//! Empty on purpose. The acceptance suite lives in `tests/acceptance.rs` and
//! runs after every other test binary in the workspace.
