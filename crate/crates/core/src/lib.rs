//! Exact big I-functions of complete intersections in toric Deligne-Mumford
//! stacks, with mirror maps and small quantum products extracted from them.
//!
//! - [`presentation`]: GIT data, semistable supports, sectors, effective degrees
//! - [`cohomology`]: per-sector presented rings, orbifold pairing, dual bases
//! - [`series`]: truncated Laurent-in-`z` class-valued series
//! - [`ifunction`]: coefficient-by-coefficient assembly of the I-function
//! - [`mirror`]: mirror map, J-frame normalization, quantum products

pub mod cohomology;
pub mod error;
pub mod ifunction;
pub mod linalg;
pub mod mirror;
pub mod presentation;
pub mod rational;
pub mod series;

pub use cohomology::{Cohomology, CRClass, Monomial, Poly, RingSpec, SectorClass};
pub use error::{Error, Result};
pub use presentation::{Character, Degree, GitPresentation, Presentation, SectorId, TauClass};
pub use rational::Q;
pub use series::{Direction, ExpPrefactorSpec, MultiSeries, NovikovChart, ScalarSeries, SeriesIndex, TruncationSpec, ZLaurent};
