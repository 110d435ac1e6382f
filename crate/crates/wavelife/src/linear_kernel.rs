//! Linear wave machinery: d'Alembert free solution, the Duhamel integral
//! operator over backward light triangles, and the interior/exterior cone
//! masks used by the weighted norms.

use crate::model::{Field, Grid, InitialData};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum KernelError {
    #[error("point (x={x}, t={t}) outside the field domain")]
    OutOfDomain { x: f64, t: f64 },
    #[error("g is not zero-mean; Huygens residual undefined")]
    NotZeroMean,
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights on [-1, 1], computed by Newton iteration on the
/// Legendre polynomial rather than transcribed from a table.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 1..=n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p2) / j as f64;
            }
            dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let step = p0 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const GL_ORDER: usize = 16;
const QUAD_TOL: f64 = 1e-13;

fn composite_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gl_cache();
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in nodes.iter().zip(weights) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    sum * 0.5 * h
}

fn gl_cache() -> (&'static [f64], &'static [f64]) {
    use std::sync::OnceLock;
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (n, w) = CACHE.get_or_init(|| gauss_legendre(GL_ORDER));
    (n, w)
}

/// Integrate a smooth compactly supported function, doubling the panel
/// count until two successive composite rules agree to below 1e-12.
pub fn converged_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut panels = 4;
    let mut prev = composite_gl(&f, a, b, panels);
    loop {
        panels *= 2;
        let next = composite_gl(&f, a, b, panels);
        if (next - prev).abs() <= QUAD_TOL || panels >= 512 {
            return next;
        }
        prev = next;
    }
}

// ---------------------------------------------------------------------------
// Free solution
// ---------------------------------------------------------------------------

/// eps * u0(x, t) for the d'Alembert free solution
/// u0 = (f(x+t) + f(x-t)) / 2 + (1/2) * integral of g over [x-t, x+t].
pub fn free_solution(data: &InitialData, eps: f64, x: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    let avg = 0.5 * (data.f(x + t) + data.f(x - t));
    let r = data.support_radius;
    let lo = (x - t).max(-r);
    let hi = (x + t).min(r);
    let int_g = converged_quadrature(|y| data.g(y), lo, hi);
    eps * (avg + 0.5 * int_g)
}

/// eps * u0 sampled on a whole grid. Nodes whose integration window
/// covers all of supp g share one precomputed total, so only the band
/// near the characteristics |x +- t| = R pays for quadrature.
pub fn free_slab(data: &InitialData, eps: f64, grid: Grid) -> Field {
    let r = data.support_radius;
    let total_g = converged_quadrature(|y| data.g(y), -r, r);
    Field::from_fn(grid, |x, t| {
        let avg = 0.5 * (data.f(x + t) + data.f(x - t));
        if x - t <= -r && x + t >= r {
            eps * (avg + 0.5 * total_g)
        } else if x + t <= -r || x - t >= r {
            eps * avg
        } else {
            free_solution(data, eps, x, t)
        }
    })
}

// ---------------------------------------------------------------------------
// Cone masks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// t - |x| >= R
    InteriorD,
    /// |x| <= t + R and not interior
    ExteriorDprime,
}

/// Membership test for the interior/exterior split of the light cone.
#[derive(Debug, Clone, Copy)]
pub struct ConeMask {
    pub grid: Grid,
    pub support_radius: f64,
    pub region: Region,
}

impl ConeMask {
    pub fn new(grid: Grid, support_radius: f64, region: Region) -> ConeMask {
        ConeMask {
            grid,
            support_radius,
            region,
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let t = self.grid.t(i);
        let x = self.grid.x(j);
        // tolerance absorbs roundoff in t - |x| on node coordinates
        let tol = 1e-9 * self.grid.dx;
        let interior = t - x.abs() >= self.support_radius - tol;
        match self.region {
            Region::InteriorD => interior,
            Region::ExteriorDprime => !interior && x.abs() <= t + self.support_radius + tol,
        }
    }
}

/// Max of |eps * u0| over the interior cone D, where the strong Huygens
/// principle says the free solution vanishes for zero-mean g.
pub fn huygens_residual(data: &InitialData, grid: Grid) -> Result<f64, KernelError> {
    if !data.g_zero_mean() {
        return Err(KernelError::NotZeroMean);
    }
    let mask = ConeMask::new(grid, data.support_radius, Region::InteriorD);
    let mut max = 0.0f64;
    for i in 0..grid.nt {
        for j in 0..grid.nx {
            if mask.contains(i, j) {
                max = max.max(free_solution(data, 1.0, grid.x(j), grid.t(i)).abs());
            }
        }
    }
    Ok(max)
}

// ---------------------------------------------------------------------------
// Duhamel operator L
// ---------------------------------------------------------------------------

/// Per-row cumulative trapezoid integrals C[s][k] = int_{x_min}^{x_k} v(y, s) dy.
/// Evaluating C at an off-node point interpolates v linearly inside the
/// cell, which is exactly the partial-cell trapezoid rule.
struct RowIntegrals<'a> {
    field: &'a Field,
    cumulative: Vec<Vec<f64>>,
}

impl<'a> RowIntegrals<'a> {
    fn new(field: &'a Field, rows: usize) -> RowIntegrals<'a> {
        let grid = field.grid;
        let mut cumulative = Vec::with_capacity(rows);
        for i in 0..rows {
            let row = field.row(i);
            let mut c = vec![0.0; grid.nx];
            for k in 1..grid.nx {
                c[k] = c[k - 1] + 0.5 * grid.dx * (row[k - 1] + row[k]);
            }
            cumulative.push(c);
        }
        RowIntegrals { field, cumulative }
    }

    /// C at arbitrary x, row i.
    fn cumulative_at(&self, i: usize, x: f64) -> f64 {
        let grid = self.field.grid;
        let pos = (x - grid.x_min) / grid.dx;
        let k = (pos.floor() as isize).clamp(0, grid.nx as isize - 2) as usize;
        let frac = pos - k as f64;
        let row = self.field.row(i);
        let v_left = row[k];
        let v_x = v_left + frac * (row[k + 1] - v_left);
        self.cumulative[i][k] + frac * grid.dx * 0.5 * (v_left + v_x)
    }

    /// int_a^b v(y, s_i) dy with trapezoid + edge interpolation. The
    /// integration window is clipped to the grid; solutions are supported
    /// inside the light cone, which never reaches the boundary.
    fn row_integral(&self, i: usize, a: f64, b: f64) -> f64 {
        let grid = self.field.grid;
        let a = a.max(grid.x_min);
        let b = b.min(grid.x_max);
        if b <= a {
            return 0.0;
        }
        self.cumulative_at(i, b) - self.cumulative_at(i, a)
    }
}

fn check_in_domain(grid: Grid, x: f64, t: f64, t_cap: f64) -> Result<(), KernelError> {
    let ok = t >= 0.0
        && t <= t_cap + 1e-9 * grid.dt
        && x >= grid.x_min - 1e-9 * grid.dx
        && x <= grid.x_max + 1e-9 * grid.dx;
    if ok {
        Ok(())
    } else {
        Err(KernelError::OutOfDomain { x, t })
    }
}

fn duhamel_from_rows(rows: &RowIntegrals, x: f64, t: f64) -> f64 {
    let grid = rows.field.grid;
    let i_max = (t / grid.dt + 1e-9).floor() as usize;
    let aligned = (t - i_max as f64 * grid.dt).abs() <= 1e-9 * grid.dt;
    // composite trapezoid in s over full rows
    let mut sum = 0.0;
    for m in 0..=i_max {
        let s = grid.t(m);
        let half_width = t - s;
        let inner = rows.row_integral(m, x - half_width, x + half_width);
        let w = if m == 0 || (aligned && m == i_max) {
            0.5
        } else {
            1.0
        };
        sum += w * inner;
    }
    let mut value = sum * grid.dt;
    if !aligned {
        // partial strip from the last full row up to t; the inner integral
        // vanishes at s = t, so a single trapezoid panel suffices
        let s_last = grid.t(i_max);
        let inner_last = rows.row_integral(i_max, x - (t - s_last), x + (t - s_last));
        value += 0.5 * (t - s_last) * inner_last;
        // remove the double-counted full weight given to the last row above
        value -= 0.5 * grid.dt * inner_last;
    }
    0.5 * value
}

/// L(v)(x, t) = (1/2) * int_0^t ds int_{x-t+s}^{x+t-s} v(y, s) dy.
pub fn duhamel_point(v: &Field, x: f64, t: f64) -> Result<f64, KernelError> {
    let t_cap = v.grid.t(v.valid_up_to);
    check_in_domain(v.grid, x, t, t_cap)?;
    let rows_needed = ((t / v.grid.dt + 1e-9).floor() as usize + 1).min(v.valid_up_to + 1);
    let rows = RowIntegrals::new(v, rows_needed);
    Ok(duhamel_from_rows(&rows, x, t))
}

/// L applied at every node of the grid, sharing one pass of per-row
/// cumulative sums so the whole slab costs O(nt^2 nx).
pub fn duhamel_slab(v: &Field) -> Field {
    use rayon::prelude::*;
    let grid = v.grid;
    let rows = RowIntegrals::new(v, v.valid_up_to + 1);
    let mut out = Field::zeros(grid);
    let nx = grid.nx;
    let computed: Vec<Vec<f64>> = (0..=v.valid_up_to)
        .into_par_iter()
        .map(|i| {
            let t = grid.t(i);
            (0..nx)
                .map(|j| duhamel_from_rows(&rows, grid.x(j), t))
                .collect()
        })
        .collect();
    for (i, row) in computed.into_iter().enumerate() {
        out.row_mut(i).copy_from_slice(&row);
    }
    out.valid_up_to = v.valid_up_to;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InitialData, Profile};

    /// Independent adaptive Simpson oracle for the quadrature cross-check.
    fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn recurse(
            f: &impl Fn(f64) -> f64,
            a: f64,
            b: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth > 40 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                recurse(f, a, m, left, tol / 2.0, depth + 1)
                    + recurse(f, m, b, right, tol / 2.0, depth + 1)
            }
        }
        recurse(f, a, b, simpson(f, a, b), tol, 0)
    }

    fn bump_data(r: f64) -> InitialData {
        InitialData::new(
            Profile::Bump { amplitude: 1.0 },
            Profile::Bump { amplitude: 1.0 },
            r,
        )
    }

    #[test]
    fn gauss_legendre_nodes_are_sane() {
        let (nodes, weights) = gauss_legendre(16);
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // integrates x^2 on [-1,1] exactly
        let int: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x * x).sum();
        assert!((int - 2.0 / 3.0).abs() < 1e-14);
        // degree-30 monomial still exact for 16 nodes
        let int30: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(30))
            .sum();
        assert!((int30 - 2.0 / 31.0).abs() < 1e-13);
    }

    #[test]
    fn free_solution_at_t_zero_is_eps_f() {
        let data = InitialData::new(Profile::Bump { amplitude: 1.0 }, Profile::Zero, 1.0);
        for x in [-0.9, -0.3, 0.0, 0.4, 0.99, 2.0] {
            let v = free_solution(&data, 0.7, x, 0.0);
            assert!((v - 0.7 * data.f(x)).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn free_solution_full_window_matches_adaptive_oracle() {
        let data = bump_data(1.0);
        // window [x-t, x+t] = [-4, 6] covers supp g = [-1, 1]
        let (x, t) = (1.0, 5.0);
        let eps = 0.25;
        let total = adaptive_simpson(&|y| data.g(y), -1.0, 1.0, 1e-14);
        let got = free_solution(&data, eps, x, t);
        assert!(
            (got - eps * 0.5 * total).abs() < 1e-12,
            "got {got}, oracle {}",
            eps * 0.5 * total
        );
    }

    #[test]
    fn free_solution_partial_window_matches_adaptive_oracle() {
        let data = bump_data(1.0);
        let (x, t) = (0.8, 0.5);
        let oracle = adaptive_simpson(&|y| data.g(y), 0.3, 1.0, 1e-14);
        let got = free_solution(&data, 1.0, x, t);
        let expect = 0.5 * (data.f(x + t) + data.f(x - t)) + 0.5 * oracle;
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn huygens_zero_mean_g() {
        let data = InitialData::new(
            Profile::Zero,
            Profile::BumpDerivative { amplitude: 1.0 },
            1.0,
        );
        let grid = Grid::cover(0.1, 0.5, 10.0, 1.0);
        let res = huygens_residual(&data, grid).unwrap();
        assert!(res <= 1e-10, "residual {res}");
    }

    #[test]
    fn huygens_f_only() {
        let data = InitialData::new(Profile::Bump { amplitude: 2.0 }, Profile::Zero, 1.0);
        let grid = Grid::cover(0.1, 0.5, 6.0, 1.0);
        let res = huygens_residual(&data, grid).unwrap();
        assert!(res <= 1e-10, "residual {res}");
    }

    #[test]
    fn huygens_rejects_nonzero_mean() {
        let data = bump_data(1.0);
        let grid = Grid::cover(0.1, 0.5, 4.0, 1.0);
        assert_eq!(huygens_residual(&data, grid), Err(KernelError::NotZeroMean));
    }

    #[test]
    fn cone_masks_partition_the_support() {
        let grid = Grid::cover(0.1, 0.5, 5.0, 1.0);
        let interior = ConeMask::new(grid, 1.0, Region::InteriorD);
        let exterior = ConeMask::new(grid, 1.0, Region::ExteriorDprime);
        for i in 0..grid.nt {
            for j in 0..grid.nx {
                assert!(!(interior.contains(i, j) && exterior.contains(i, j)));
                if grid.x(j).abs() <= grid.t(i) + 1.0 - 1e-9 {
                    assert!(interior.contains(i, j) || exterior.contains(i, j));
                }
            }
        }
    }

    #[test]
    fn duhamel_constant_field() {
        let grid = Grid::cover(0.05, 0.5, 4.0, 1.0);
        let v = Field::from_fn(grid, |_, _| 1.0);
        for t in [0.5, 1.0, 2.5, 4.0] {
            let got = duhamel_point(&v, 0.3, t).unwrap();
            assert!(
                (got - t * t / 2.0).abs() < 1e-10,
                "t = {t}: got {got}, want {}",
                t * t / 2.0
            );
        }
    }

    #[test]
    fn duhamel_linear_in_time_field() {
        let grid = Grid::cover(0.05, 0.5, 4.0, 1.0);
        let v = Field::from_fn(grid, |_, s| s);
        for t in [1.0, 2.0, 4.0] {
            let got = duhamel_point(&v, -0.4, t).unwrap();
            let want = t * t * t / 6.0;
            // trapezoid in s on a product that is quadratic in s: O(dt^2)
            assert!((got - want).abs() < 5e-4, "t = {t}: got {got}, want {want}");
        }
    }

    #[test]
    fn duhamel_refinement_oracle_on_nonlinear_force() {
        // L of a smooth field converges at O(dx^2); compare a coarse
        // evaluation with a dx/8 recomputation of the same integral.
        let f = |x: f64, s: f64| (x * 0.7).sin() * (-s).exp() + 0.3 * x * x;
        let coarse_grid = Grid::cover(0.1, 0.5, 3.0, 1.0);
        let fine_grid = Grid::cover(0.1 / 8.0, 0.5, 3.0, 1.0);
        let coarse = duhamel_point(&Field::from_fn(coarse_grid, f), 0.5, 3.0).unwrap();
        let fine = duhamel_point(&Field::from_fn(fine_grid, f), 0.5, 3.0).unwrap();
        // error budget: C * dx^2 with a modest constant
        assert!(
            (coarse - fine).abs() < 5.0 * 0.1 * 0.1,
            "coarse {coarse} fine {fine}"
        );
    }

    #[test]
    fn duhamel_slab_matches_point_evaluations() {
        let grid = Grid::cover(0.1, 0.5, 3.0, 1.0);
        let v = Field::from_fn(grid, |x, s| (x + 0.3 * s).cos() * (1.0 + s));
        let slab = duhamel_slab(&v);
        // deterministic pseudo-random node selection
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..100 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let i = (state >> 33) as usize % grid.nt;
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % grid.nx;
            let point = duhamel_point(&v, grid.x(j), grid.t(i)).unwrap();
            assert!(
                (slab.at(i, j) - point).abs() < 1e-13,
                "mismatch at ({i},{j})"
            );
        }
    }

    #[test]
    fn duhamel_is_linear() {
        let grid = Grid::cover(0.1, 0.5, 2.0, 1.0);
        let v = Field::from_fn(grid, |x, s| (x * s).sin());
        let w = Field::from_fn(grid, |x, s| x * x - s);
        let combo = Field::from_fn(grid, |x, s| 2.0 * (x * s).sin() - 0.5 * (x * x - s));
        let (a, b) = (2.0, -0.5);
        for (x, t) in [(0.0, 2.0), (0.7, 1.5), (-1.1, 1.0)] {
            let lv = duhamel_point(&v, x, t).unwrap();
            let lw = duhamel_point(&w, x, t).unwrap();
            let lc = duhamel_point(&combo, x, t).unwrap();
            assert!((lc - (a * lv + b * lw)).abs() < 1e-13);
        }
    }

    #[test]
    fn duhamel_is_monotone() {
        let grid = Grid::cover(0.1, 0.5, 2.0, 1.0);
        let v = Field::from_fn(grid, |x, s| (x * s).cos().abs() + 0.1);
        let slab = duhamel_slab(&v);
        for i in 0..grid.nt {
            for j in 0..grid.nx {
                assert!(slab.at(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn duhamel_out_of_domain() {
        let grid = Grid::cover(0.1, 0.5, 2.0, 1.0);
        let v = Field::from_fn(grid, |_, _| 1.0);
        assert!(matches!(
            duhamel_point(&v, 0.0, 3.5),
            Err(KernelError::OutOfDomain { .. })
        ));
        assert!(matches!(
            duhamel_point(&v, grid.x_max + 1.0, 1.0),
            Err(KernelError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn free_slab_matches_pointwise_free_solution() {
        let data = InitialData::new(
            Profile::Bump { amplitude: 1.0 },
            Profile::BumpDerivative { amplitude: 0.5 },
            1.0,
        );
        let grid = Grid::cover(0.1, 0.5, 3.0, 1.0);
        let slab = free_slab(&data, 0.4, grid);
        for i in (0..grid.nt).step_by(7) {
            for j in (0..grid.nx).step_by(5) {
                let p = free_solution(&data, 0.4, grid.x(j), grid.t(i));
                assert!((slab.at(i, j) - p).abs() < 1e-13);
            }
        }
    }

    /// w = eps*u0 + L(v) satisfies w_tt - w_xx = v at interior nodes to O(dx^2).
    #[test]
    fn duhamel_inverts_the_wave_operator() {
        let data = InitialData::new(Profile::Bump { amplitude: 1.0 }, Profile::Zero, 1.0);
        let grid = Grid::cover(0.05, 0.5, 2.0, 1.0);
        let v = Field::from_fn(grid, |x, s| (0.5 * x).cos() * (0.3 * s).sin());
        let u0 = free_slab(&data, 0.3, grid);
        let lv = duhamel_slab(&v);
        let w = Field::from_fn(grid, |_, _| 0.0);
        let mut w = w;
        for i in 0..grid.nt {
            for j in 0..grid.nx {
                w.set(i, j, u0.at(i, j) + lv.at(i, j));
            }
        }
        w.valid_up_to = grid.nt - 1;
        let (dt, dx) = (grid.dt, grid.dx);
        let mut max_res = 0.0f64;
        for i in 2..grid.nt - 2 {
            for j in 2..grid.nx - 2 {
                // skip the cone edges where u0 has limited smoothness in
                // the discrete sense
                let x = grid.x(j);
                let t = grid.t(i);
                if (x.abs() - (t + 1.0)).abs() < 4.0 * dx || (t - x.abs() - 1.0).abs() < 4.0 * dx {
                    continue;
                }
                let wtt = (w.at(i + 1, j) - 2.0 * w.at(i, j) + w.at(i - 1, j)) / (dt * dt);
                let wxx = (w.at(i, j + 1) - 2.0 * w.at(i, j) + w.at(i, j - 1)) / (dx * dx);
                max_res = max_res.max((wtt - wxx - v.at(i, j)).abs());
            }
        }
        assert!(max_res < 60.0 * dx * dx, "residual {max_res}");
    }
}
