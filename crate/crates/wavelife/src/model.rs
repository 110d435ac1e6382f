//! Domain types shared by every solver and diagnostic: monomial
//! nonlinearities with derived orders, compactly supported initial data,
//! uniform space-time grids and solution fields.

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("force term list is empty")]
    EmptyForce,
    #[error("degenerate nonlinearity order alpha = {0} < 1")]
    DegenerateOrder(i64),
    #[error("monomial has total degree 0")]
    ZeroDegreeTerm,
    #[error("non-finite coefficient in term list")]
    NonFiniteCoefficient,
    #[error("non-finite value in force evaluation")]
    NonFinite,
}

/// One term `coeff * u^a * u_t^b * u_x^d`, each factor optionally taken
/// as `|.|^power` when the corresponding abs flag is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    /// power of u
    pub a: u32,
    /// power of u_t
    pub b: u32,
    /// power of u_x
    pub d: u32,
    #[serde(default)]
    pub abs_u: bool,
    #[serde(default)]
    pub abs_ut: bool,
    #[serde(default)]
    pub abs_ux: bool,
}

impl Monomial {
    pub fn total_degree(&self) -> u32 {
        self.a + self.b + self.d
    }

    pub fn is_pure_u(&self) -> bool {
        self.b == 0 && self.d == 0
    }

    /// Clears abs flags on even powers (|x|^{2k} = x^{2k}) and on absent
    /// factors, so canonically equal terms compare equal.
    fn canonical_flags(mut self) -> Monomial {
        if self.a == 0 || self.a.is_multiple_of(2) {
            self.abs_u = false;
        }
        if self.b == 0 || self.b.is_multiple_of(2) {
            self.abs_ut = false;
        }
        if self.d == 0 || self.d.is_multiple_of(2) {
            self.abs_ux = false;
        }
        self
    }

    fn same_shape(&self, other: &Monomial) -> bool {
        self.a == other.a
            && self.b == other.b
            && self.d == other.d
            && self.abs_u == other.abs_u
            && self.abs_ut == other.abs_ut
            && self.abs_ux == other.abs_ux
    }

    fn eval(&self, u: f64, ut: f64, ux: f64) -> f64 {
        let fu = if self.abs_u { u.abs() } else { u };
        let fut = if self.abs_ut { ut.abs() } else { ut };
        let fux = if self.abs_ux { ux.abs() } else { ux };
        self.coeff * fu.powi(self.a as i32) * fut.powi(self.b as i32) * fux.powi(self.d as i32)
    }
}

/// Symbolic nonlinearity: the force F plus the quasilinear coefficients
/// b and a0, with the orders alpha and beta0 derived at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub f_terms: Vec<Monomial>,
    pub b_terms: Vec<Monomial>,
    pub a0_terms: Vec<Monomial>,
    pub alpha: u32,
    pub beta0: Option<u32>,
}

/// Merge duplicate monomials, drop zero coefficients, clear redundant abs flags.
fn canonicalize(terms: &[Monomial]) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = Vec::new();
    for term in terms {
        let term = term.canonical_flags();
        if let Some(existing) = out.iter_mut().find(|t| t.same_shape(&term)) {
            existing.coeff += term.coeff;
        } else {
            out.push(term);
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out
}

/// Derive the orders alpha and beta0 from raw term lists and validate
/// the admissibility conditions on them.
pub fn classify(
    f_terms: &[Monomial],
    b_terms: &[Monomial],
    a0_terms: &[Monomial],
) -> Result<NonlinearitySpec, ModelError> {
    for t in f_terms.iter().chain(b_terms).chain(a0_terms) {
        if !t.coeff.is_finite() {
            return Err(ModelError::NonFiniteCoefficient);
        }
        if t.total_degree() == 0 {
            return Err(ModelError::ZeroDegreeTerm);
        }
    }
    let f_terms = canonicalize(f_terms);
    let b_terms = canonicalize(b_terms);
    let a0_terms = canonicalize(a0_terms);
    if f_terms.is_empty() {
        return Err(ModelError::EmptyForce);
    }

    let min_f_degree = f_terms.iter().map(|t| t.total_degree()).min().unwrap();
    let mut alpha = min_f_degree as i64 - 1;
    if let Some(min_b) = b_terms.iter().map(|t| t.total_degree()).min() {
        alpha = alpha.min(min_b as i64);
    }
    if let Some(min_a0) = a0_terms.iter().map(|t| t.total_degree()).min() {
        alpha = alpha.min(min_a0 as i64);
    }
    if alpha < 1 {
        return Err(ModelError::DegenerateOrder(alpha));
    }
    let alpha = alpha as u32;

    // beta0 is the vanishing order of pure-u derivatives of F: one less
    // than the lowest pure-u degree, admissible only in [alpha+1, 2*alpha).
    let beta0 = f_terms
        .iter()
        .filter(|t| t.is_pure_u())
        .map(|t| t.total_degree())
        .min()
        .map(|deg| deg - 1)
        .filter(|&b0| alpha < b0 && b0 < 2 * alpha);

    Ok(NonlinearitySpec {
        f_terms,
        b_terms,
        a0_terms,
        alpha,
        beta0,
    })
}

impl NonlinearitySpec {
    pub fn eval_force(&self, u: f64, ut: f64, ux: f64) -> Result<f64, ModelError> {
        let v: f64 = self.f_terms.iter().map(|t| t.eval(u, ut, ux)).sum();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonFinite)
        }
    }

    /// Like `eval_force` with all coefficients replaced by their absolute
    /// values and all factors by magnitudes; majorizes |F|.
    pub fn eval_force_abs(&self, u: f64, ut: f64, ux: f64) -> f64 {
        self.f_terms
            .iter()
            .map(|t| {
                t.coeff.abs()
                    * u.abs().powi(t.a as i32)
                    * ut.abs().powi(t.b as i32)
                    * ux.abs().powi(t.d as i32)
            })
            .sum()
    }

    pub fn eval_b(&self, u: f64, ut: f64, ux: f64) -> f64 {
        self.b_terms.iter().map(|t| t.eval(u, ut, ux)).sum()
    }

    pub fn eval_a0(&self, u: f64, ut: f64, ux: f64) -> f64 {
        self.a0_terms.iter().map(|t| t.eval(u, ut, ux)).sum()
    }

    pub fn is_semilinear(&self) -> bool {
        self.b_terms.is_empty() && self.a0_terms.is_empty()
    }
}

/// Smooth compactly supported profile on [-R, R].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Zero,
    /// amplitude * exp(-1 / (1 - (x/R)^2)) inside (-R, R)
    Bump {
        amplitude: f64,
    },
    /// amplitude * d/dx of the bump; integrates to exactly zero
    BumpDerivative {
        amplitude: f64,
    },
}

impl Profile {
    pub fn is_zero_mean(&self) -> bool {
        matches!(self, Profile::Zero | Profile::BumpDerivative { .. })
    }
}

// Below this width of 1 - (x/R)^2 the bump underflows; evaluating the
// rational prefactors there would produce inf * 0 = NaN.
const BUMP_CUTOFF: f64 = 5e-3;

fn bump_parts(x: f64, r: f64) -> Option<(f64, f64, f64)> {
    let s = x / r;
    let w = 1.0 - s * s;
    if w < BUMP_CUTOFF {
        return None;
    }
    Some((s, w, (-1.0 / w).exp()))
}

pub fn bump(x: f64, r: f64) -> f64 {
    match bump_parts(x, r) {
        Some((_, _, e)) => e,
        None => 0.0,
    }
}

pub fn bump_d1(x: f64, r: f64) -> f64 {
    match bump_parts(x, r) {
        Some((s, w, e)) => e * (-2.0 * s) / (r * w * w),
        None => 0.0,
    }
}

pub fn bump_d2(x: f64, r: f64) -> f64 {
    match bump_parts(x, r) {
        Some((s, w, e)) => {
            let s2 = s * s;
            e / (r * r) * (4.0 * s2 - 2.0 * w * w - 8.0 * s2 * w) / (w * w * w * w)
        }
        None => 0.0,
    }
}

fn bump_d3(x: f64, r: f64) -> f64 {
    // Central difference of d2 is accurate enough for the one place this
    // is used (the g' part of the Taylor seed would need it only for
    // quasilinear refinements; kept simple).
    let h = 1e-5 * r;
    (bump_d2(x + h, r) - bump_d2(x - h, r)) / (2.0 * h)
}

/// Initial data (f, g) for the Cauchy problem, supported in [-R, R].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub f_profile: Profile,
    pub g_profile: Profile,
    pub support_radius: f64,
}

impl InitialData {
    pub fn new(f_profile: Profile, g_profile: Profile, support_radius: f64) -> InitialData {
        assert!(support_radius >= 1.0, "support radius must be >= 1");
        InitialData {
            f_profile,
            g_profile,
            support_radius,
        }
    }

    pub fn g_zero_mean(&self) -> bool {
        self.g_profile.is_zero_mean()
    }

    fn eval_profile(&self, p: Profile, x: f64, order: u32) -> f64 {
        let r = self.support_radius;
        match p {
            Profile::Zero => 0.0,
            Profile::Bump { amplitude } => match order {
                0 => amplitude * bump(x, r),
                1 => amplitude * bump_d1(x, r),
                2 => amplitude * bump_d2(x, r),
                _ => unreachable!(),
            },
            Profile::BumpDerivative { amplitude } => match order {
                0 => amplitude * bump_d1(x, r),
                1 => amplitude * bump_d2(x, r),
                2 => amplitude * bump_d3(x, r),
                _ => unreachable!(),
            },
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        self.eval_profile(self.f_profile, x, 0)
    }

    pub fn f_d1(&self, x: f64) -> f64 {
        self.eval_profile(self.f_profile, x, 1)
    }

    pub fn f_d2(&self, x: f64) -> f64 {
        self.eval_profile(self.f_profile, x, 2)
    }

    pub fn g(&self, x: f64) -> f64 {
        self.eval_profile(self.g_profile, x, 0)
    }
}

/// Uniform space-time grid wide enough that the light cone of the data
/// never reaches the spatial boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dx: f64,
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
}

impl Grid {
    /// Symmetric grid covering [-(t_max + R + dx), t_max + R + dx] with a
    /// node at x = 0 and dt = courant_ratio * dx.
    pub fn cover(dx: f64, courant_ratio: f64, t_max: f64, support_radius: f64) -> Grid {
        assert!(dx > 0.0 && t_max > 0.0);
        assert!(
            courant_ratio > 0.0 && courant_ratio < 1.0,
            "courant ratio must lie in (0, 1)"
        );
        let dt = courant_ratio * dx;
        let nt = (t_max / dt).ceil() as usize + 1;
        let t_max = (nt - 1) as f64 * dt;
        let half = ((t_max + support_radius + dx) / dx).ceil() as usize + 1;
        let nx = 2 * half + 1;
        let x_min = -(half as f64) * dx;
        Grid {
            dx,
            dt,
            x_min,
            x_max: half as f64 * dx,
            t_max,
            nx,
            nt,
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }
}

/// A solution slab: row i holds u(., t_i). Rows past `valid_up_to` are unset.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: Grid,
    data: Vec<f64>,
    pub valid_up_to: usize,
}

impl Field {
    pub fn zeros(grid: Grid) -> Field {
        Field {
            grid,
            data: vec![0.0; grid.nt * grid.nx],
            valid_up_to: 0,
        }
    }

    /// Build a field by evaluating `f(x, t)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Field {
        let mut out = Field::zeros(grid);
        for i in 0..grid.nt {
            let t = grid.t(i);
            for j in 0..grid.nx {
                out.data[i * grid.nx + j] = f(grid.x(j), t);
            }
        }
        out.valid_up_to = grid.nt - 1;
        out
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.grid.nx + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.grid.nx + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.grid.nx..(i + 1) * self.grid.nx]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.grid.nx..(i + 1) * self.grid.nx]
    }

    /// Sup norm over computed rows.
    pub fn sup_norm(&self) -> f64 {
        self.data[..(self.valid_up_to + 1) * self.grid.nx]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_diff(&self, other: &Field) -> f64 {
        let n = (self.valid_up_to.min(other.valid_up_to) + 1) * self.grid.nx;
        self.data[..n]
            .iter()
            .zip(&other.data[..n])
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Checks |u| = 0 outside {|x| <= t + R + 2 dx} on every computed row.
    pub fn finite_propagation_ok(&self, support_radius: f64) -> bool {
        for i in 0..=self.valid_up_to {
            let reach = self.grid.t(i) + support_radius + 2.0 * self.grid.dx;
            for j in 0..self.grid.nx {
                if self.grid.x(j).abs() > reach && self.at(i, j) != 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

/// Centered time differences, one-sided at the first and last computed row.
pub fn diff_t(u: &Field) -> Field {
    let grid = u.grid;
    let top = u.valid_up_to;
    let mut out = Field::zeros(grid);
    for i in 0..=top {
        for j in 0..grid.nx {
            let v = if top == 0 {
                0.0
            } else if i == 0 {
                (u.at(1, j) - u.at(0, j)) / grid.dt
            } else if i == top {
                (u.at(top, j) - u.at(top - 1, j)) / grid.dt
            } else {
                (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * grid.dt)
            };
            out.set(i, j, v);
        }
    }
    out.valid_up_to = top;
    out
}

/// Centered space differences, one-sided at the spatial boundary.
pub fn diff_x(u: &Field) -> Field {
    let grid = u.grid;
    let top = u.valid_up_to;
    let mut out = Field::zeros(grid);
    for i in 0..=top {
        for j in 0..grid.nx {
            let v = if j == 0 {
                (u.at(i, 1) - u.at(i, 0)) / grid.dx
            } else if j == grid.nx - 1 {
                (u.at(i, j) - u.at(i, j - 1)) / grid.dx
            } else {
                (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * grid.dx)
            };
            out.set(i, j, v);
        }
    }
    out.valid_up_to = top;
    out
}

/// Compact second difference in x.
pub fn diff_xx(u: &Field) -> Field {
    let grid = u.grid;
    let top = u.valid_up_to;
    let dx2 = grid.dx * grid.dx;
    let mut out = Field::zeros(grid);
    for i in 0..=top {
        for j in 1..grid.nx - 1 {
            out.set(
                i,
                j,
                (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) / dx2,
            );
        }
    }
    out.valid_up_to = top;
    out
}
