//! File formats, caching, the claim registry and the command-line front end
//! built on `zdl-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod build;
pub mod cache;
pub mod cli;
pub mod compute;
pub mod error;
pub mod formats;
pub mod plotdata;
pub mod registry;
pub mod verify;

pub use error::{Error, Result};
pub use zdl_core as core;
