//! File formats, generators, gadget dumps, benchmarking and the command
//! layer behind the `mmdc` binary.

pub mod bench;
pub mod commands;
pub mod format;
pub mod gadget_dump;
pub mod generate;
