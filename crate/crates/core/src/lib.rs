//! Country tagging, ensemble sentiment scoring and weekly trend analysis
//! for short social-media posts about an epidemic.
//!
//! The pipeline has three stages: keyword-filtered ingestion with weekly
//! Tuesday sampling ([`ingest`]), content-based location tagging against a
//! GeoNames-derived gazetteer ([`gazetteer`]), and sentiment scoring with an
//! attention-pooled, three-head majority-vote classifier ([`sentiment`]).
//! [`trends`] turns the scored posts into weekly per-country series and
//! correlates them with official case counts; [`pipeline`] wires it all
//! together.

pub mod country;
pub mod error;
pub mod gazetteer;
pub mod ingest;
pub mod pipeline;
pub mod rng;
pub mod sentiment;
pub mod trends;

pub use country::CountryCode;
pub use error::{Error, Result};
