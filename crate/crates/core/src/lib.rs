//! Metadata-driven data discovery.
//!
//! A declarative document lists metadata providers (what they return, what
//! input they need, where they are shown, how their results rank). From
//! it this crate builds overviews, selection-driven exploration and a
//! boolean search/filter language over a catalog of data artifacts.

pub mod catalog;
pub mod discovery;
pub mod exec;
pub mod provider;
pub mod query;
pub mod ranking;
pub mod spec;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use catalog::{CatalogSnapshot, DataArtifact, MetadataValue};
pub use discovery::DiscoveryService;
pub use exec::Execution;
pub use provider::{ProviderRegistry, RepresentationPayload};
pub use query::QueryAst;
pub use spec::{ProviderSpec, SpecDocument};
