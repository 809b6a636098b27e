//! Mission evaluation for a UAV-borne passive bistatic SAR receiver.
//!
//! A mission is a set of candidate flight paths over a terrain model. Each
//! path is scored on flight energy, terrain threat, imaging resolution over a
//! target scene, the size of the echo data it collects, and whether a
//! line-of-sight link can return that data to a ground station in time.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comms;
pub mod echosim;
pub mod energy;
pub mod flightpath;
pub mod geom;
pub mod mission;
pub mod sargeom;
pub mod threat;

// The guide in `book/` is compiled here so its snippets run with `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/threat.md")]
    mod threat {}
    #[doc = include_str!("../../../book/src/resolution.md")]
    mod resolution {}
    #[doc = include_str!("../../../book/src/data-and-link.md")]
    mod data_and_link {}
    #[doc = include_str!("../../../book/src/imaging.md")]
    mod imaging {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
