pub mod cyclo;
pub mod eigsys;
pub mod error;
pub mod format;
pub mod heckemat;
pub mod heckeops;
pub mod ideals;
pub mod linmod;
pub mod modpts;
pub mod msym;
pub mod qfield;
pub mod suite;
pub mod zlinalg;

pub use error::{Error, Result};
pub use ideals::{Class, ClassGroup, Ideal};
pub use linmod::{Lattice, Mat2};
pub use modpts::{FormalSum, Level, ModPoint};
pub use qfield::{Elt, Field, Rat};
