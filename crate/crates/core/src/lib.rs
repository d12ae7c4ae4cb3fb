//! Finite partial automorphisms of (Q,<) and their conjugacy-class closures:
//! orbital quotients, χ-colored words, closure membership, and the
//! amalgamation constructions, together with the analogous calculi for
//! permutations of ω, the posets B_n and the betweenness relation.

pub mod amalgam;
pub mod bn;
pub mod closure;
pub mod error;
pub mod fresh;
pub mod piso;
pub mod rational;
pub mod sample;
pub mod sinf;
pub mod text;
pub mod words;

pub use amalgam::{AmalgamResult, RchAmalgam};
pub use bn::{BnDescriptor, BnPartialIso};
pub use closure::RichWitness;
pub use error::{Error, ParseError, Result};
pub use fresh::{Midpoint, PointSupplier, Seeded};
pub use piso::{Orbital, OrbitalQuotient, PartialIso};
pub use rational::Rational;
pub use words::{Chi, Color, ColoredOrder, OrderDescriptor};
