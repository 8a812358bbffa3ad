//! Link-level simulator for the 5G NR broadcast channel over GEO satellite
//! links, with neural symbol enhancement and equalization.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod channel;
pub mod cli;
pub mod frame;
pub mod io;
pub mod models;
pub mod nn;
pub mod nr;
pub mod rng;
pub mod rx;
pub mod selftest;
mod serde_ext;

pub use error::{Error, Result};
pub use frame::IqFrame;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/transmitter.md")]
    mod transmitter {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/receiver.md")]
    mod receiver {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/files-and-cli.md")]
    mod files_and_cli {}
}
