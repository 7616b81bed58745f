//! Single-spin ground-state Hamiltonian, eigensystems and field maps.

mod eigen;
mod frame;
mod hamiltonian;
mod maps;
pub mod operators;

pub use eigen::{diagonalize, diagonalize_with_reference, SpinEigensystem, StateOverlaps};
pub use frame::{NvClass, NvClassFrame};
pub use hamiltonian::{build_hamiltonian, FieldConfiguration};
pub use maps::{eigenstate_map, transverse_field_scan, EigenMapCell, TransverseScanPoint};
