//! Meshlet compression with generalized triangle strips.
//!
//! The pipeline partitions a triangle mesh into self-contained meshlets,
//! finds a strip cover of each meshlet's dual graph with as few restarts as
//! possible, encodes the strips as L/R flags plus explicit or reused 8-bit
//! indices, quantizes attributes on a global grid and packs everything into
//! an `MLT1` container.

pub mod bits;
pub mod codec;
pub mod container;
pub mod error;
pub mod math;
pub mod mesh;
pub mod meshlet;
pub mod obj;
pub mod pipeline;
pub mod quantize;
pub mod stripify;
pub mod synth;
pub mod verify;
pub mod wave;

pub use container::{Codec, MeshletContainer};
pub use error::{Error, Result};
pub use mesh::{AttributeLayout, TriangleMesh};
pub use meshlet::{Meshlet, MeshletLimits};
pub use pipeline::{compress, CompressOptions, Compressed, RunReport, SolverKind};
pub use verify::{verify, VerifyReport};
