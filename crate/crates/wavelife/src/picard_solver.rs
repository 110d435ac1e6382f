//! Fixed-point solver on the Duhamel integral equation: iterate
//! u_{k+1} = eps u0 + L(b(v,Dv) v_xx + 2 a0(v,Dv) v_tx + F(v,Dv)) with
//! v = u_k until the sup-norm difference stalls below tolerance.

use crate::linear_kernel::{duhamel_slab, free_slab};
use crate::model::{diff_t, diff_x, diff_xx, Field, Grid, InitialData, NonlinearitySpec};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PicardError {
    #[error("iteration diverged at step {iteration}: sup diff {sup_diff:.3e}")]
    Diverged { iteration: usize, sup_diff: f64 },
    #[error("non-finite value during iteration {iteration}")]
    NonFinite { iteration: usize },
}

#[derive(Debug)]
pub struct PicardReport {
    pub iterations: usize,
    /// sup |u_{k+1} - u_k| per iteration
    pub sup_diffs: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
    pub final_field: Field,
}

pub const DEFAULT_MAX_ITER: usize = 50;

/// Default stopping tolerance 1e-10 * max(1, sup |eps u0|).
pub fn default_tol(u0: &Field) -> f64 {
    1e-10 * u0.sup_norm().max(1.0)
}

fn assemble_rhs(
    spec: &NonlinearitySpec,
    v: &Field,
    iteration: usize,
) -> Result<Field, PicardError> {
    let grid = v.grid;
    let vt = diff_t(v);
    let vx = diff_x(v);
    let quasilinear = !spec.is_semilinear();
    let (vxx, vtx) = if quasilinear {
        (Some(diff_xx(v)), Some(diff_x(&vt)))
    } else {
        (None, None)
    };
    let mut rhs = Field::zeros(grid);
    for i in 0..=v.valid_up_to {
        for j in 0..grid.nx {
            let (u, ut, ux) = (v.at(i, j), vt.at(i, j), vx.at(i, j));
            let force = spec
                .eval_force(u, ut, ux)
                .map_err(|_| PicardError::NonFinite { iteration })?;
            let mut val = force;
            if let (Some(vxx), Some(vtx)) = (&vxx, &vtx) {
                val += spec.eval_b(u, ut, ux) * vxx.at(i, j)
                    + 2.0 * spec.eval_a0(u, ut, ux) * vtx.at(i, j);
            }
            rhs.set(i, j, val);
        }
    }
    rhs.valid_up_to = v.valid_up_to;
    Ok(rhs)
}

fn diverging(sup_diffs: &[f64]) -> bool {
    // growth by a factor > 10 across 3 consecutive iterations
    if sup_diffs.len() < 4 {
        return false;
    }
    let w = &sup_diffs[sup_diffs.len() - 4..];
    w[1] > w[0] && w[2] > w[1] && w[3] > w[2] && w[3] > 10.0 * w[0]
}

/// Solve by Picard iteration, invoking `observer` on every iterate
/// (including u_0 = eps u0) so callers can track norms.
pub fn picard_solve_observed(
    spec: &NonlinearitySpec,
    data: &InitialData,
    eps: f64,
    grid: Grid,
    tol: Option<f64>,
    max_iter: usize,
    mut observer: impl FnMut(&Field),
) -> Result<PicardReport, PicardError> {
    let u0 = free_slab(data, eps, grid);
    let tol = tol.unwrap_or_else(|| default_tol(&u0));
    let mut current = u0.clone();
    observer(&current);
    let mut sup_diffs = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=max_iter {
        let rhs = assemble_rhs(spec, &current, k)?;
        let duhamel = duhamel_slab(&rhs);
        let mut next = Field::zeros(grid);
        for i in 0..=current.valid_up_to {
            for j in 0..grid.nx {
                next.set(i, j, u0.at(i, j) + duhamel.at(i, j));
            }
        }
        next.valid_up_to = current.valid_up_to;
        let diff = next.sup_diff(&current);
        if !diff.is_finite() {
            return Err(PicardError::NonFinite { iteration: k });
        }
        sup_diffs.push(diff);
        iterations = k;
        current = next;
        observer(&current);
        if diff <= tol {
            converged = true;
            break;
        }
        if diverging(&sup_diffs) {
            return Err(PicardError::Diverged {
                iteration: k,
                sup_diff: diff,
            });
        }
    }
    Ok(PicardReport {
        iterations,
        sup_diffs,
        converged,
        tol,
        final_field: current,
    })
}

pub fn picard_solve(
    spec: &NonlinearitySpec,
    data: &InitialData,
    eps: f64,
    grid: Grid,
    tol: Option<f64>,
    max_iter: usize,
) -> Result<PicardReport, PicardError> {
    picard_solve_observed(spec, data, eps, grid, tol, max_iter, |_| {})
}
