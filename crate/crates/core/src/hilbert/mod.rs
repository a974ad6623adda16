//! Finite-dimensional operators, spin-1 contexts and value-map impossibility checks.

mod ks;
mod mermin;
mod operator;
mod spin;

pub use ks::{
    brute_force_count, check_operator_map, check_value_map, ks_count, ks_search, ks_search_parallel, load_ray_file,
    parse_ray_file, peres33, ContextHypergraph, KsOutcome, KsReport, Ray, Relation, SearchStats, ValueAssignment,
    Violation, RAY_TOL,
};
pub use mermin::{
    count_satisfying, mermin_lines, mermin_operators, mermin_square_check, ContradictionReport, Line, LineCheck,
};
pub use operator::{
    c, max_abs, pauli_x, pauli_y, pauli_z, random_unitary, CMatrix, CVector, Eigen, FiniteState, HermitianOperator, MatrixJson,
    HERMITIAN_TOL, NORM_TOL,
};
pub use spin::{frame_deviation, random_frame, spin1_component, spin1_generators, spin1_squares, Frame, FRAME_TOL};
