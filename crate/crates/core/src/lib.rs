//! Exact and numerical machinery for the resonant quartic mode coupling of
//! cubic Klein-Gordon and co-rotational wave-map equations on AdS.

pub mod acceptance;
pub mod algebra;
pub mod coefficients;
pub mod evolve;
pub mod hyper;
pub mod par;
pub mod resonant;
pub mod spectrum;
pub mod telescope;

pub use par::Exec;
