//! Relativistic one-electron toolkit: radial Dirac-Coulomb solver in a
//! kinetically balanced Gaussian basis, the virial and density energy routes,
//! the squared-Hamiltonian variational functional and a lattice probe of the
//! density-to-potential map.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod functional;
pub mod lattice;
pub mod model;
pub mod numerics;
pub mod observables;
pub mod radial;
