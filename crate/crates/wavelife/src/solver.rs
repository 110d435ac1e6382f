//! Interchangeable Cauchy-problem solvers behind a common trait.
//! Implementations register by name; the CLI selects one per run.

use crate::fd_solver::{default_blowup_threshold, fd_solve, FdError};
use crate::model::{Field, Grid, InitialData, NonlinearitySpec};
use crate::picard_solver::{picard_solve, PicardError, DEFAULT_MAX_ITER};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Fd(#[from] FdError),
    #[error(transparent)]
    Picard(#[from] PicardError),
}

#[derive(Debug)]
pub struct Solution {
    pub field: Field,
    /// exit time when the run left the threshold before t_max
    pub blowup_time: Option<f64>,
}

pub trait CauchySolver: Sync {
    fn name(&self) -> &'static str;
    fn solve(
        &self,
        spec: &NonlinearitySpec,
        data: &InitialData,
        eps: f64,
        grid: Grid,
    ) -> Result<Solution, SolverError>;
}

struct LeapfrogSolver;

impl CauchySolver for LeapfrogSolver {
    fn name(&self) -> &'static str {
        "leapfrog"
    }

    fn solve(
        &self,
        spec: &NonlinearitySpec,
        data: &InitialData,
        eps: f64,
        grid: Grid,
    ) -> Result<Solution, SolverError> {
        let threshold = default_blowup_threshold(data, eps);
        let outcome = fd_solve(spec, data, eps, grid, threshold)?;
        Ok(Solution {
            field: outcome.field,
            blowup_time: outcome.blowup_time,
        })
    }
}

struct PicardSolver;

impl CauchySolver for PicardSolver {
    fn name(&self) -> &'static str {
        "picard"
    }

    fn solve(
        &self,
        spec: &NonlinearitySpec,
        data: &InitialData,
        eps: f64,
        grid: Grid,
    ) -> Result<Solution, SolverError> {
        match picard_solve(spec, data, eps, grid, None, DEFAULT_MAX_ITER) {
            Ok(report) => Ok(Solution {
                field: report.final_field,
                blowup_time: None,
            }),
            // divergence of the iteration marks the slab as past the
            // lifespan; the horizon itself is not resolved by this scheme
            Err(PicardError::Diverged { .. }) | Err(PicardError::NonFinite { .. }) => {
                Ok(Solution {
                    field: Field::zeros(grid),
                    blowup_time: Some(f64::NAN),
                })
            }
        }
    }
}

pub fn registry() -> Vec<Box<dyn CauchySolver>> {
    vec![Box::new(LeapfrogSolver), Box::new(PicardSolver)]
}

pub fn solver_by_name(name: &str) -> Option<Box<dyn CauchySolver>> {
    registry().into_iter().find(|s| s.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{classify, Monomial, Profile};

    fn semilinear() -> NonlinearitySpec {
        classify(
            &[Monomial {
                coeff: 1.0,
                a: 2,
                b: 1,
                d: 0,
                abs_u: false,
                abs_ut: false,
                abs_ux: false,
            }],
            &[],
            &[],
        )
        .unwrap()
    }

    #[test]
    fn registry_names() {
        let names: Vec<&str> = registry().iter().map(|s| s.name()).collect();
        assert_eq!(names, vec!["leapfrog", "picard"]);
        assert!(solver_by_name("leapfrog").is_some());
        assert!(solver_by_name("picard").is_some());
        assert!(solver_by_name("spectral").is_none());
    }

    #[test]
    fn both_solvers_agree_on_a_small_run() {
        let spec = semilinear();
        let data = InitialData::new(
            Profile::Bump { amplitude: 1.0 },
            Profile::BumpDerivative { amplitude: 1.0 },
            2.0,
        );
        let grid = Grid::cover(0.05, 0.5, 1.0, 2.0);
        let a = solver_by_name("leapfrog")
            .unwrap()
            .solve(&spec, &data, 0.3, grid)
            .unwrap();
        let b = solver_by_name("picard")
            .unwrap()
            .solve(&spec, &data, 0.3, grid)
            .unwrap();
        assert!(a.blowup_time.is_none() && b.blowup_time.is_none());
        assert!(a.field.sup_diff(&b.field) < 5e-3);
    }
}
