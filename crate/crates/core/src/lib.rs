//! Renormalization toolkit for standard and affine interval exchange
//! transformations: exact Rauzy-Veech and Zorich induction, cocycle
//! accumulation and dynamical partitions, Lyapunov spectra and Oseledets
//! subspace estimates, construction of affine exchanges with a prescribed
//! rotation number and log-slope, Birkhoff-sum machinery with
//! bounded-return-time certificates, and diagnostics for conjugacies and
//! their invariant measures.

pub mod affine;
pub mod analysis;
pub mod birkhoff;
pub mod cocycle;
pub mod error;
pub mod fixtures;
pub mod iet;
pub mod intmat;
pub mod perm;
pub mod periodic;
pub mod rauzy;
pub mod scalar;
pub mod specfile;
pub mod spectrum;

pub use error::{Error, Result};
pub use iet::{Aiet, Iet, IntervalMap};
pub use intmat::IntMatrix;
pub use perm::{make_permutation, Alphabet, PermutationPair, RvType, Symbol};
pub use rauzy::{
    inverse_rv_step, loop_matrix, rauzy_class, rotation_number_prefix, rv_step, rv_type,
    zorich_step, InductionChain, RauzyMove, RauzyPath, ZorichBlock, ZorichStream,
    DEFAULT_GUARD_BITS,
};
pub use scalar::{parse_rational, FieldElement, NumberField, RealHp, Scalar, DEFAULT_PRECISION};
pub use specfile::{LoadedMap, MapSpec};
