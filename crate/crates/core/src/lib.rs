pub mod cse;
pub mod discord;
pub mod dist;
pub mod ent;
pub mod error;
pub mod locc;
pub mod optim;
pub mod qmat;
pub mod states;
pub mod verify;

pub use dist::DistanceKind;
pub use error::{CsentError, Result};
pub use optim::{BoundDirection, OptimOptions};
pub use qmat::{ComplexMatrix, Factor, Party, StateVector, SubsystemLayout};
pub use states::MultipartiteState;
