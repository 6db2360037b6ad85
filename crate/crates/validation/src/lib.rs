//! Holds the acceptance suite in `tests/acceptance.rs`. Kept in its own
//! package so its (strict) criteria run after every
//! other test target of the workspace.
