//! Exact lattice arithmetic, root-orbit reduction, period-domain coordinates,
//! mirror lattice bookkeeping, root counting with q-series, and regularized
//! determinants of flat tori.

pub mod counting;
pub mod lattice;
pub mod mirror;
pub mod orbit;
pub mod period;
pub mod rational;
pub mod shell;
pub mod spectral;
