//! Decision procedures on expansions and presentations: thematic rank,
//! rank-2 canonical form, isomorphism, invariance and family scans.

mod cascade;
mod equivalence;
mod ode;
mod rank;
mod rank2;
mod scan;

pub use cascade::{run_cascade, Cascade, Definition, LinForm, Obstruction, Relation};
pub use equivalence::{
    check_basis, generic_invariant, generic_isomorphic, invariance_test, isomorphism_test, Assignment, ClassifyOptions,
    Distinguisher, InvarianceOutcome, InvarianceWitness, IsomorphismOutcome, IsomorphismWitness,
};
pub use ode::{solve_b_ode, solve_b_ode_with, BOdeSolution, OdeObstruction};
pub use rank::{is_k_thematic, thematic_rank, RankCertificate};
pub use rank2::{c_rank2, canonical_rank2_generator, gamma_rank2, parameter_of_rank2, rank2_reduce, Rank2Reduction};
pub use scan::{scan_family, GridPoint, PointReport, ScanReport, Stratum};
