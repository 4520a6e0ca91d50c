//! Storage, HTTP API and shared operations behind the `holoviz` binary.

pub mod api;
pub mod ops;
pub mod store;
