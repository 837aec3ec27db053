//! Scenario-level verification of the regularity theory on solved harmonic
//! maps, plus the Moser-conclusion and Liouville experiments.

pub mod checks;
pub mod frozen;
pub mod liouville;
pub mod moser;
pub mod refine;
pub mod scenario;

pub use checks::{
    check_auxiliary_split, check_convexity_laplacian, check_energy_monotone,
    check_lipschitz_estimate, check_local_boundedness, check_rademacher, check_reverse_poincare,
    check_solver_oracle, check_subharmonicity, check_target_max_principle, check_zzz,
    lipschitz_estimate_constant, local_boundedness_constant, reverse_poincare_constant,
};
pub use liouville::{liouville_experiment, LiouvilleLevel};
pub use moser::{check_moser_conclusion, harmonic_instance, moser_measure, torsion_instance};
pub use refine::{RefinementLevel, RefinementStudy};
pub use scenario::{BoundarySpec, CheckSpec, DomainSpec, RegionSpec, Scenario, ScenarioRun};
