pub mod error;
pub mod field;
pub mod autdecomp;
pub mod building;
pub mod drinfeld;
pub mod lattice;
pub mod matrix;
pub mod subdivision;
pub mod verify;

pub use error::{Error, Result};
pub use field::{ExtensionDescriptor, FieldElement, FieldModel};
pub use lattice::VertexClass;
pub use matrix::Mat;
