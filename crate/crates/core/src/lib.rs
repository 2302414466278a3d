//! Evolutionary search for binary linear codes with large minimum distance.
//!
//! Candidate codes are full-rank generator matrices over F_2. Their fitness
//! counts the low-degree monomials present in the algebraic normal form of
//! the code's indicator function: a `k`-dimensional code of length `n` has
//! minimum distance at least `d` exactly when every monomial of degree below
//! `d` occurs, so the optimum is `sum_{i<d} C(n, i)`.
//!
//! Modules:
//! - [`gf2`]: packed vectors and matrices over F_2, subspace distance,
//!   Gaussian binomials and the matrix text format.
//! - [`boolfun`]: truth tables, ANF tables and the fast Möbius transform.
//! - [`code`]: linear codes, fitness, weight enumerators.
//! - [`operators`]: rank-preserving mutation and crossover.
//! - [`es`]: the (μ,λ) / (μ+λ) evolution strategies.
//! - [`equivalence`]: permutation equivalence of codes.
//! - [`experiments`]: multi-run campaigns and statistics.

pub mod boolfun;
pub mod code;
pub mod equivalence;
pub mod error;
pub mod es;
pub mod experiments;
pub mod gf2;
pub mod operators;

pub use code::{fitness, optimal_fitness, LinearCode, ProblemInstance};
pub use error::{Error, Result};
pub use es::{run, EsConfig, Replacement, RunResult, Variant};
pub use gf2::{BinMatrix, BitVec, GeneratorMatrix};
