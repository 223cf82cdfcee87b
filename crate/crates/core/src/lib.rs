//! Exact normal complexes, mixed volumes and Chow degrees of marked fans,
//! with Bergman fans of matroids.

pub mod af;
pub mod chow;
pub mod exact;
pub mod fan;
pub mod fixtures;
pub mod matroid;
pub mod normalcx;
