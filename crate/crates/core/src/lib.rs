//! Simulation of a three-crystal induced-coherence interferometer.
//!
//! Three down-conversion crystals share one pump photon. Their idler beams are
//! aligned onto a single idler mode, with a partially transparent object in
//! the idler path after the first and after the second crystal. The signal
//! beams interfere on two beam splitters feeding detectors `A`, `B` and `C`.
//!
//! The crate computes the post-selected two-photon output state, traces out
//! the environment modes that model absorption by the objects, and reports all
//! singles and signal-idler coincidence probabilities. The [`analysis`] module
//! solves for the object-1 settings under which object 2 has no effect on any
//! signal-side rate, and [`oracle`] recomputes everything through a dense
//! Fock-space simulation that shares no propagation code with the fast path.

pub mod algebra;
pub mod analysis;
pub mod detection;
pub mod elements;
mod error;
pub mod network;
pub mod numfmt;
pub mod oracle;
pub mod random;
pub mod tolerance;

pub use algebra::{Amplitude, LinearForm, ModeId, ModeRegistry, TwoPhotonState};
pub use detection::{Detector, ProbabilityReport, ReducedDensityState};
pub use elements::{BeamSplitterSpec, CrystalSpec, ObjectSpec, PhaseSpec};
pub use error::{Error, Result};
pub use network::{Delays, Network, NetworkConfig, PumpBranch};
