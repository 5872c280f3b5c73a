//! Vertex-frequency analysis on undirected, connected, weighted graphs.
//!
//! The crate builds up from a dense graph representation and a full
//! Laplacian eigendecomposition to the operators of windowed Fourier
//! analysis transplanted to graphs:
//!
//! - [`graph`]: graph construction and generators, both Laplacians, and
//!   hop-count geodesic distances;
//! - [`spectral`]: eigendecomposition with deterministic ordering and sign
//!   conventions, the graph Fourier transform, and coherence statistics;
//! - [`operators`]: generalized convolution, translation and modulation
//!   (combinatorial and normalized variants), the dual-graph alternative
//!   modulation, and Chebyshev-approximate filtering;
//! - [`wgft`]: windowed graph Fourier atoms, the forward transform by both
//!   computational routes, frame bounds, exact reconstruction, and
//!   spectrograms;
//! - [`localization`]: norm bounds for translated kernels, strict polynomial
//!   localization, heat-kernel decay and spread control, and modulation
//!   concentration;
//! - [`clustering`]: spectral clustering and signal-adapted clustering on
//!   windowed-transform features.
//!
//! Everything is dense and exact: the intended scale is a few thousand
//! vertices, where a full eigendecomposition is the dominant cost. Vertex
//! indices are 0-based in the API; edge-list files and the CLI use 1-based
//! indices.

pub mod cli;
pub mod clustering;
pub mod error;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod localization;
pub mod operators;
pub mod signal;
pub mod spectral;
pub mod wgft;

pub use error::{Error, Result};
pub use graph::{DistanceMatrix, Graph, GraphSpec, LaplacianVariant};
pub use kernel::{Kernel, KernelForm};
pub use signal::Signal;
pub use spectral::{CoherenceReport, Spectrum};
pub use wgft::{FrameBounds, WgftCoefficients};
