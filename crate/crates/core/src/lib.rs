//! Pseudo-bosonic operator pairs and Riesz bicoherent states on a truncated
//! Fock space.
//!
//! Every identity relating the pair `(a, b)`, the Riesz map `S` that
//! produces it from the canonical ladder `c`, the displacement operators
//! and the bicoherent states is exposed as a check returning a measured
//! residual, so that the algebra can be verified numerically rather than
//! assumed.

pub mod bicoherent;
pub mod coordinate;
pub mod displacement;
pub mod error;
pub mod expm;
pub mod fock;
pub mod pseudo_boson;
pub mod quadrature;
pub mod report;
pub mod riesz;

pub use bicoherent::{
    coherent, coherent_in_regime, eigen_check, rbcs, resolution_of_identity, series_route, weak_pairing_check,
    BicoherentPair, CoherentState,
};
pub use coordinate::{
    coherent_wavefunction, cross_validate, example_wavefunctions, hermite_basis, projector_map, CrossValidation,
    ProjectorMap,
};
pub use displacement::{
    bch_factorization_check, bch_in_regime, bch_leakage, displaced_pair, intertwining_check, power_similarity_check,
    weyl, BchResidual, DisplacementSet, Weyl,
};
pub use error::{Error, Result};
pub use fock::{
    commutator, inner, ladder_c, ladder_c_dag, make_space, restrict, FockSpace, Matrix, Operator, SafeSubspace,
    StateVector,
};
pub use num_complex::Complex64;
pub use pseudo_boson::{
    excited_states, ladder_check, make_pair, number_operator_check, theta_conjugacy_check, vacua, PseudoBosonPair,
    VacuumPair,
};
pub use quadrature::{make_quadrature, QuadratureScheme};
pub use report::{ResidualRecord, ResidualReport};
pub use riesz::{
    biorthogonal_family, make_riesz_map, metric_operator, quasi_basis_check, random_riesz_map, theta_rank_one_sums,
    BiorthogonalFamily, MapRecord, MetricOperator, RieszMap,
};
