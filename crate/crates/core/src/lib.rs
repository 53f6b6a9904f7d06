//! Exact dimension computations for mixed-integer hulls and the faces that
//! cutting planes induce on them.
//!
//! Everything is computed over the rationals. The polyhedron is only
//! accessed through an [`Oracle`](oracle::Oracle) that maximizes linear
//! objectives; [`hull::affine_hull`] turns such an oracle into an affine
//! basis plus a system of implied equations.

pub mod analysis;
pub mod generate;
pub mod hull;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod pipeline;

pub use analysis::{classify_cut, CutClassification, Verdict};
pub use hull::{affine_hull, face_hull, polytope_hull, AffineHullResult, EquationSystem, HullConfig, HullError};
pub use linalg::{parse_rational, Rational, RationalMatrix, RationalVector};
pub use model::{Inequality, MipInstance};
pub use oracle::{BruteForceOracle, MipOracle, Oracle, OracleResponse, PointCache};
pub use pipeline::{analyze_instance, AnalysisConfig, InstanceAnalysis};
