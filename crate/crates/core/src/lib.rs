//! Exact arithmetic on real quadratic irrationals, binary quadratic forms and closed
//! geodesics on the modular surface, together with enumeration tools for thin
//! semigroups of continued fractions with bounded partial quotients.

pub mod arith;
pub mod cli;
pub mod config;
pub mod error;
pub mod forms;
pub mod geodesics;
pub mod orbits;
pub mod pell;
pub mod surd;

pub use error::{Error, Result};
pub use surd::{cf_eval, cf_expand, cf_to_matrix, CFExpansion, IntMatrix2, QuadSurd};
pub use forms::{class_group, is_equivalent, ClassGroupListing, Form, FormClass};
pub use pell::{solve_pell4, solve_pell_neg4, unit, PellSolution};
pub use geodesics::{cutting_sequence, duke_statistic, fold, frame, visual_point, HyperbolicMatrix};
