//! File formats, report documents and command dispatch for `flatri`.

pub mod app;
pub mod render;
pub mod sysfile;

pub use app::{run, Cli, Command, Format, Outcome};
pub use sysfile::{
    load, parse_documents, parse_system, write_system, write_transcript, LoadError, SystemFile,
};
