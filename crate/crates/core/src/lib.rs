//! Numerical toolkit for the resource theory of quantum conditional entropy.
//!
//! The crate decides whether a quantum channel can create negative
//! conditional-entropy states: A-/B-unitality and unitality detection,
//! ACVENN membership, resource-generation witnesses, a gallery of named
//! channels, and tight entropy/conditional-entropy bounds.

pub mod bounds;
pub mod channels;
pub mod detect;
pub mod error;
pub mod gallery;
pub mod io;
pub mod linalg;
pub mod states;

pub use bounds::BoundsResult;
pub use channels::{ChoiMatrix, KrausChannel};
pub use detect::{DetectionReport, ResourceWitness};
pub use gallery::GalleryEntry;
pub use error::{Error, Result};
pub use linalg::{CMat, SubsystemLayout};
pub use states::{DensityMatrix, StateBasis};
