//! Realizable fourth-order fiber-orientation tensors.
//!
//! A fourth-order orientation tensor is the fourth moment of a probability
//! measure on the unit sphere. In two and three dimensions the realizable
//! tensors are exactly the completely symmetric tensors that are positive
//! semidefinite as operators on symmetric second-order tensors and carry
//! unit double trace; this crate implements that characterization
//! end-to-end:
//!
//! - [`tensor`]: symmetric tensor algebra and the Kelvin-Mandel 6x6 view,
//! - [`fot`]: orientation tensors of discrete fiber measures and
//!   candidate-set membership,
//! - [`param`]: the eigensystem-based parameterization separating second-
//!   and fourth-order information, with material-symmetry groups,
//! - [`sdp`]: a dense interior-point solver for the extremal-information
//!   semidefinite programs and the polar sweep driver,
//! - [`realize`]: constructive realizability (nonnegative atomic
//!   decompositions with at most 15 atoms) and sum-of-squares certificates,
//! - [`io`]: the tensor JSON and fiber/sweep CSV formats used by the CLI.

pub mod error;
pub mod fot;
pub mod io;
pub mod linalg;
pub mod param;
pub mod realize;
pub mod sdp;
pub mod sphere;
pub mod tensor;

pub use error::{Error, Result};
pub use fot::{
    check_candidate, check_candidate_km, check_properties, sample_extreme_candidate,
    CandidateReport, FiberAtom, FiberMeasure, Fot2, PropertyReport,
};
pub use param::{
    assemble_triclinic, iso4, orthotropic_group, second_order_part, symmetry_residual,
    tricl_structure, SymmetryClass, SymmetryGroup, TriclinicParams,
};
pub use realize::{
    caratheodory_reduce, quartic_min_on_sphere, realize, sos_certificate, RealizationResult,
    RealizeOptions, SosCertificate, SosOutcome, SosWitness,
};
pub use sdp::{
    build_constraints, extremize, solve, sweep, ConstraintSpec, LinearConstraint, SdpProblem,
    SdpSolution, SdpStatus, SweepGrid, SweepResult,
};
pub use tensor::{Direction, Frame, Km66, Rotation, Sym2, Sym4, Vec3};
