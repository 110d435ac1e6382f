//! Leapfrog finite-difference solver for the quasilinear wave equation
//! u_tt = (1 + b) u_xx + 2 a0 u_tx + F(u, u_t, u_x), with blow-up-aware
//! stepping. This is the oracle solver the lifespan sweep trusts.

use crate::linear_kernel::free_solution;
use crate::model::{Field, Grid, InitialData, NonlinearitySpec};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FdError {
    #[error("CFL violation at t = {t}: effective speed {speed} exceeds dx/dt = {limit}")]
    CflViolation { t: f64, speed: f64, limit: f64 },
    #[error("hyperbolicity lost at t = {t}: 1 + b = {value} <= 0")]
    HyperbolicityLoss { t: f64, value: f64 },
}

/// Result of one run: the computed slab (rows up to `field.valid_up_to`)
/// and the detected blow-up time, absent when the run reached t_max.
#[derive(Debug)]
pub struct FdOutcome {
    pub field: Field,
    pub blowup_time: Option<f64>,
}

/// Scale-free default threshold: 1e3 * sup |eps u0|.
pub fn default_blowup_threshold(data: &InitialData, eps: f64) -> f64 {
    1e3 * free_amplitude(data, eps)
}

/// sup |eps u0| by a coarse scan; the sup is attained while the window
/// [x-t, x+t] still interacts with the data support, so t <= 2R suffices.
pub fn free_amplitude(data: &InitialData, eps: f64) -> f64 {
    let r = data.support_radius;
    let n = 160;
    let mut max = 0.0f64;
    for it in 0..=n {
        let t = 2.0 * r * it as f64 / n as f64;
        for ix in 0..=n {
            let x = -2.0 * r + 4.0 * r * ix as f64 / n as f64;
            max = max.max(free_solution(data, eps, x, t).abs());
        }
    }
    max
}

struct Stepper<'a> {
    spec: &'a NonlinearitySpec,
    grid: Grid,
    support_radius: f64,
    quasilinear: bool,
}

enum StepOutcome {
    Ok,
    NonFinite,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a NonlinearitySpec, grid: Grid, support_radius: f64) -> Stepper<'a> {
        Stepper {
            spec,
            grid,
            support_radius,
            quasilinear: !spec.is_semilinear(),
        }
    }

    /// Advance from level n (rows prev2 = n-2, prev = n-1, curr = n) to
    /// next = n+1. prev2 may equal prev at the first step.
    fn step(
        &self,
        level: usize,
        prev2: &[f64],
        prev: &[f64],
        curr: &[f64],
        next: &mut [f64],
    ) -> Result<StepOutcome, FdError> {
        let Grid { dx, dt, nx, .. } = self.grid;
        let t = self.grid.t(level);
        let dt2 = dt * dt;
        let limit = dx / dt;
        let mut finite = true;
        next[0] = 0.0;
        next[nx - 1] = 0.0;
        // With courant_ratio < 1 the raw stencil spreads faster than the
        // physical characteristics; zeroing outside the slightly enlarged
        // cone keeps the discrete support inside |x| <= t + R + 2 dx. The
        // exact solution vanishes there, so this only removes scheme-order
        // dispersive tails. The mask is index-based so it is exactly
        // mirror-symmetric.
        let reach = self.grid.t(level + 1) + self.support_radius + dx;
        let reach_cells = (reach / dx).floor() as isize;
        let mid = (nx as isize - 1) / 2;
        for j in 1..nx - 1 {
            if (j as isize - mid).abs() > reach_cells {
                next[j] = 0.0;
                continue;
            }
            let u = curr[j];
            // second-order one-sided u_t keeps the scheme explicit
            let ut = if level >= 2 {
                (3.0 * curr[j] - 4.0 * prev[j] + prev2[j]) / (2.0 * dt)
            } else {
                (curr[j] - prev[j]) / dt
            };
            let ux = (curr[j + 1] - curr[j - 1]) / (2.0 * dx);
            let uxx = (curr[j + 1] - 2.0 * curr[j] + curr[j - 1]) / (dx * dx);
            let force = match self.spec.eval_force(u, ut, ux) {
                Ok(v) => v,
                Err(_) => {
                    finite = false;
                    0.0
                }
            };
            if self.quasilinear {
                let b = self.spec.eval_b(u, ut, ux);
                let a0 = self.spec.eval_a0(u, ut, ux);
                let one_plus_b = 1.0 + b;
                if one_plus_b <= 0.0 {
                    return Err(FdError::HyperbolicityLoss {
                        t,
                        value: one_plus_b,
                    });
                }
                let speed = (one_plus_b + a0.abs()).sqrt();
                if speed > limit {
                    return Err(FdError::CflViolation { t, speed, limit });
                }
                // centered-in-x of the backward-in-t derivative
                let utx =
                    ((curr[j + 1] - prev[j + 1]) - (curr[j - 1] - prev[j - 1])) / (2.0 * dx * dt);
                next[j] =
                    2.0 * curr[j] - prev[j] + dt2 * ((1.0 + b) * uxx + 2.0 * a0 * utx + force);
            } else {
                next[j] = 2.0 * curr[j] - prev[j] + dt2 * (uxx + force);
            }
            if !next[j].is_finite() {
                finite = false;
            }
        }
        Ok(if finite {
            StepOutcome::Ok
        } else {
            StepOutcome::NonFinite
        })
    }

    /// Taylor seed for the first row after t = 0:
    /// u1 = eps f + dt eps g + dt^2/2 (eps f'' + F(eps f, eps g, eps f')).
    fn first_rows(&self, data: &InitialData, eps: f64, row0: &mut [f64], row1: &mut [f64]) {
        let grid = self.grid;
        for (j, slot) in row0.iter_mut().enumerate() {
            *slot = eps * data.f(grid.x(j));
        }
        for (j, slot) in row1.iter_mut().enumerate() {
            let x = grid.x(j);
            let f = eps * data.f(x);
            let g = eps * data.g(x);
            let force = self
                .spec
                .eval_force(f, g, eps * data.f_d1(x))
                .unwrap_or(0.0);
            *slot = f + grid.dt * g + 0.5 * grid.dt * grid.dt * (eps * data.f_d2(x) + force);
        }
    }
}

fn row_exit(curr: &[f64], prev: &[f64], dt: f64, threshold: f64) -> bool {
    curr.iter().zip(prev).any(|(&u, &up)| {
        let ut = (u - up) / dt;
        !u.is_finite() || u.abs() > threshold || ut.abs() > threshold
    })
}

/// Run the leapfrog scheme on the full slab, recording every row.
pub fn fd_solve(
    spec: &NonlinearitySpec,
    data: &InitialData,
    eps: f64,
    grid: Grid,
    blowup_threshold: f64,
) -> Result<FdOutcome, FdError> {
    let stepper = Stepper::new(spec, grid, data.support_radius);
    let mut field = Field::zeros(grid);
    let mut row0 = vec![0.0; grid.nx];
    let mut row1 = vec![0.0; grid.nx];
    stepper.first_rows(data, eps, &mut row0, &mut row1);
    field.row_mut(0).copy_from_slice(&row0);
    if grid.nt == 1 {
        field.valid_up_to = 0;
        return Ok(FdOutcome {
            field,
            blowup_time: None,
        });
    }
    field.row_mut(1).copy_from_slice(&row1);
    field.valid_up_to = 1;
    if row_exit(&row1, &row0, grid.dt, blowup_threshold) {
        return Ok(FdOutcome {
            field,
            blowup_time: Some(grid.t(1)),
        });
    }
    let mut next = vec![0.0; grid.nx];
    for n in 1..grid.nt - 1 {
        let (prev2, prev, curr) = if n >= 2 {
            (field.row(n - 2), field.row(n - 1), field.row(n))
        } else {
            (field.row(0), field.row(0), field.row(1))
        };
        // borrow juggling: copy out of the slab rows before writing next
        let outcome = stepper.step(n, prev2, prev, curr, &mut next)?;
        let exited = matches!(outcome, StepOutcome::NonFinite)
            || row_exit(&next, field.row(n), grid.dt, blowup_threshold);
        if next.iter().all(|v| v.is_finite()) {
            field.row_mut(n + 1).copy_from_slice(&next);
            field.valid_up_to = n + 1;
        }
        if exited {
            return Ok(FdOutcome {
                field,
                blowup_time: Some(grid.t(n + 1)),
            });
        }
    }
    Ok(FdOutcome {
        field,
        blowup_time: None,
    })
}

/// Memory-light variant for lifespan sweeps: rolling four-row buffer,
/// returns only the detected blow-up time.
pub fn fd_blowup_scan(
    spec: &NonlinearitySpec,
    data: &InitialData,
    eps: f64,
    grid: Grid,
    blowup_threshold: f64,
) -> Result<Option<f64>, FdError> {
    let stepper = Stepper::new(spec, grid, data.support_radius);
    let mut prev2 = vec![0.0; grid.nx];
    let mut prev = vec![0.0; grid.nx];
    let mut curr = vec![0.0; grid.nx];
    let mut next = vec![0.0; grid.nx];
    stepper.first_rows(data, eps, &mut prev, &mut curr);
    prev2.copy_from_slice(&prev);
    if grid.nt == 1 {
        return Ok(None);
    }
    if row_exit(&curr, &prev, grid.dt, blowup_threshold) {
        return Ok(Some(grid.t(1)));
    }
    for n in 1..grid.nt - 1 {
        let outcome = stepper.step(n, &prev2, &prev, &curr, &mut next)?;
        if matches!(outcome, StepOutcome::NonFinite)
            || row_exit(&next, &curr, grid.dt, blowup_threshold)
        {
            return Ok(Some(grid.t(n + 1)));
        }
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }
    Ok(None)
}

/// Exactly conserved staggered energy of the linear leapfrog scheme:
/// E = (1/2) sum_j [ ((u^{n+1} - u^n)/dt)^2
///                 + D_x u^{n+1} . D_x u^n ] dx, evaluated between rows
/// n and n+1.
pub fn discrete_energy(field: &Field, n: usize) -> f64 {
    let grid = field.grid;
    let a = field.row(n);
    let b = field.row(n + 1);
    let mut sum = 0.0;
    for j in 0..grid.nx - 1 {
        let vt = (b[j] - a[j]) / grid.dt;
        let gx_a = (a[j + 1] - a[j]) / grid.dx;
        let gx_b = (b[j + 1] - b[j]) / grid.dx;
        sum += vt * vt + gx_a * gx_b;
    }
    0.5 * sum * grid.dx
}
