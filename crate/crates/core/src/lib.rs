//! Class groups, graded Jacobian rings, primitive Hodge numbers and an
//! infinitesimal Noether-Lefschetz check for hypersurfaces in complete
//! simplicial toric varieties. All arithmetic is exact.

pub mod cli;
pub mod cox;
pub mod divisor;
pub mod fan;
pub mod fixtures;
pub mod jacobian;
pub mod linalg;
pub mod quasismooth;
