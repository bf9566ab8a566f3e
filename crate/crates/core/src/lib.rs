//! Spinor squares, Spin(7) structures, Lorentzian parabolic pairs and
//! left-invariant spinor flows on three-dimensional Lie groups.

pub mod clifford_rep;
pub mod error;
pub mod kahler_atiyah;
pub mod lorentz4;
pub mod spin7;
pub mod spinor_flow;

pub use clifford_rep::{CliffordModule, Endomorphism, KernelCheck, Spinor};
pub use error::{Error, Result};
pub use kahler_atiyah::{Multivector, QuadraticSpace};
pub use lorentz4::{MinkowskiSpace, NullCoframe, ParabolicPair, TorsionData};
pub use spinor_flow::{CauchyPair, GroupTag, Lapse, LieGroup3, SkewCauchyData};
