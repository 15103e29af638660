//! Maximum-entropy estimates.
//!
//! The typical table `Z` maximizes
//! `g(Z) = Σ (z+1) ln(z+1) - z ln z` over real matrices with the given
//! margins. Its stationarity condition `ln(1 + 1/z_ij) = a_i + b_j` makes
//! the problem separable in the duals `(a, b)`, which is what the solver
//! works on. The Gaussian estimate then only needs `g(Z)` and `det Q`; the
//! Edgeworth estimate adds third- and fourth-moment corrections.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimate::{LogCount, Method};
use crate::margins::Margins;
use crate::math;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Coordinate sweeps between two stall checks.
const STALL_WINDOW: usize = 100;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// The entropy-maximizing typical table and its duals.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntSolution {
    m: usize,
    n: usize,
    /// Row-major `m × n`.
    z: Vec<f64>,
    pub g_value: f64,
    /// `max_i |Σ_j z_ij - r_i| / r_i`
    pub row_residual: f64,
    /// `max_j |Σ_i z_ij - c_j| / c_j`
    pub col_residual: f64,
    pub dual_row: Vec<f64>,
    pub dual_col: Vec<f64>,
    /// Coordinate sweeps plus Newton steps used.
    pub iterations: usize,
}

impl MaxEntSolution {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.n + j]
    }

    /// Row-major entries of `Z`.
    pub fn entries(&self) -> &[f64] {
        &self.z
    }

    /// `max |ln(1 + 1/z_ij) - dual_row_i - dual_col_j|`.
    pub fn kkt_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            for j in 0..self.n {
                let lhs = math::ln_1p(1.0 / self.z(i, j));
                worst = worst.max((lhs - self.dual_row[i] - self.dual_col[j]).abs());
            }
        }
        worst
    }
}

/// `(z + 1) ln(z + 1) - z ln z`, written to stay accurate for large `z`.
fn entropy_term(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    math::ln_1p(z) + z * math::ln_1p(1.0 / z)
}

/// `g(Z)` for any non-negative matrix.
pub fn g_value(z: &[f64]) -> f64 {
    z.iter().map(|&v| entropy_term(v)).sum()
}

fn z_of(s: f64) -> f64 {
    1.0 / math::exp_m1(s)
}

struct Dual<'a> {
    rows: &'a [u64],
    cols: &'a [u64],
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Dual<'_> {
    fn m(&self) -> usize {
        self.rows.len()
    }

    fn n(&self) -> usize {
        self.cols.len()
    }

    fn table(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.m() * self.n());
        for &ai in &self.a {
            z.extend(self.b.iter().map(|&bj| z_of(ai + bj)));
        }
        z
    }

    fn residuals(&self, z: &[f64]) -> (f64, f64) {
        let n = self.n();
        let mut row = 0.0f64;
        for (i, &r) in self.rows.iter().enumerate() {
            let s: f64 = z[i * n..(i + 1) * n].iter().sum();
            row = row.max((s - r as f64).abs() / r as f64);
        }
        let mut col = 0.0f64;
        for (j, &c) in self.cols.iter().enumerate() {
            let s: f64 = (0..self.m()).map(|i| z[i * n + j]).sum();
            col = col.max((s - c as f64).abs() / c as f64);
        }
        (row, col)
    }

    /// Solve `Σ_k 1/expm1(x + others_k) = target` for `x`.
    fn solve_one(others: &[f64], target: f64, start: f64, tol: f64) -> f64 {
        let min = others.iter().copied().fold(f64::INFINITY, f64::min);
        let mut lo = -min;
        let mut hi = -min + math::ln_1p(others.len() as f64 / target);
        let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
        for _ in 0..200 {
            let (mut phi, mut slope) = (-target, 0.0);
            for &o in others {
                let z = z_of(x + o);
                phi += z;
                slope -= z * (z + 1.0);
            }
            if phi.abs() <= 0.05 * tol * target {
                break;
            }
            if phi > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let step = x - phi / slope;
            x = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * x.abs().max(1e-300) {
                break;
            }
        }
        x
    }

    fn sweep(&mut self, tol: f64) {
        for i in 0..self.m() {
            self.a[i] = Self::solve_one(&self.b, self.rows[i] as f64, self.a[i], tol);
        }
        let mut column = vec![0.0; self.m()];
        for j in 0..self.n() {
            column.copy_from_slice(&self.a);
            self.b[j] = Self::solve_one(&column, self.cols[j] as f64, self.b[j], tol);
        }
    }

    /// Gradient of the convex dual in the gauge `b_n` fixed.
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let (m, n) = (self.m(), self.n());
        let mut g = Vec::with_capacity(m + n - 1);
        for (i, &r) in self.rows.iter().enumerate() {
            g.push(r as f64 - z[i * n..(i + 1) * n].iter().sum::<f64>());
        }
        for (j, &c) in self.cols.iter().enumerate().take(n - 1) {
            g.push(c as f64 - (0..m).map(|i| z[i * n + j]).sum::<f64>());
        }
        g
    }

    fn hessian(&self, z: &[f64]) -> Vec<f64> {
        let (m, n) = (self.m(), self.n());
        let d = m + n - 1;
        let mut h = vec![0.0; d * d];
        for i in 0..m {
            for j in 0..n {
                let w = z[i * n + j] * (z[i * n + j] + 1.0);
                h[i * d + i] += w;
                if j < n - 1 {
                    let k = m + j;
                    h[k * d + k] += w;
                    h[i * d + k] = w;
                    h[k * d + i] = w;
                }
            }
        }
        h
    }

    /// One damped Newton step on the dual. Returns false if no step
    /// along the Newton direction reduces the gradient norm.
    fn newton_step(&mut self) -> bool {
        let (m, n) = (self.m(), self.n());
        let z = self.table();
        let grad = self.gradient(&z);
        let norm2: f64 = grad.iter().map(|g| g * g).sum();
        let Ok(chol) = Cholesky::factor(self.hessian(&z), m + n - 1) else {
            return false;
        };
        // descent direction -H⁻¹ ∇
        let dir = chol.solve(&grad);
        let (a0, b0) = (self.a.clone(), self.b.clone());
        let mut t = 1.0;
        for _ in 0..60 {
            for i in 0..m {
                self.a[i] = a0[i] - t * dir[i];
            }
            for j in 0..n - 1 {
                self.b[j] = b0[j] - t * dir[m + j];
            }
            let valid = self.a.iter().all(|&ai| self.b.iter().all(|&bj| ai + bj > 0.0));
            if valid {
                let g = self.gradient(&self.table());
                let new2: f64 = g.iter().map(|v| v * v).sum();
                if new2.is_finite() && new2 <= (1.0 - 2e-4 * t) * norm2 {
                    return true;
                }
            }
            t *= 0.5;
        }
        self.a = a0;
        self.b = b0;
        false
    }
}

fn initial_duals(margins: &Margins) -> (Vec<f64>, Vec<f64>) {
    let (rows, cols) = (margins.rows(), margins.cols());
    let (m, n, total) = (rows.len(), cols.len(), margins.total() as f64);
    // Additive fit of ln(1 + 1/z) over the independence table r_i c_j / N.
    let l = |i: usize, j: usize| math::ln_1p(total / (rows[i] as f64 * cols[j] as f64));
    let mut row_mean = vec![0.0; m];
    let mut col_mean = vec![0.0; n];
    let mut grand = 0.0;
    for i in 0..m {
        for j in 0..n {
            let v = l(i, j);
            row_mean[i] += v / n as f64;
            col_mean[j] += v / m as f64;
            grand += v / (m * n) as f64;
        }
    }
    let a: Vec<f64> = row_mean.iter().map(|v| v - 0.5 * grand).collect();
    let b: Vec<f64> = col_mean.iter().map(|v| v - 0.5 * grand).collect();
    if a.iter().all(|&ai| b.iter().all(|&bj| ai + bj > 0.0)) {
        (a, b)
    } else {
        let s = 0.5 * math::ln_1p((m * n) as f64 / total);
        (vec![s; m], vec![s; n])
    }
}

/// Find the maximum-entropy table.
///
/// Runs coordinate sweeps on the duals and switches to damped Newton once
/// a window of sweeps fails to halve the residual. `tol` bounds the
/// relative margin residuals and `max_iter` the total sweeps and steps.
pub fn solve_maxent(margins: &Margins, tol: f64, max_iter: usize) -> Result<MaxEntSolution> {
    let (a, b) = initial_duals(margins);
    let mut dual = Dual {
        rows: margins.rows(),
        cols: margins.cols(),
        a,
        b,
    };
    let mut newton = false;
    let mut checkpoint = f64::INFINITY;
    let mut last = (f64::INFINITY, f64::INFINITY);
    for iteration in 1..=max_iter {
        if newton {
            if !dual.newton_step() {
                break;
            }
        } else {
            dual.sweep(tol);
        }
        let z = dual.table();
        last = dual.residuals(&z);
        if last.0 <= tol && last.1 <= tol {
            return Ok(MaxEntSolution {
                m: dual.m(),
                n: dual.n(),
                g_value: g_value(&z),
                z,
                row_residual: last.0,
                col_residual: last.1,
                dual_row: dual.a,
                dual_col: dual.b,
                iterations: iteration,
            });
        }
        if !newton && iteration % STALL_WINDOW == 0 {
            let worst = last.0.max(last.1);
            if worst > 0.5 * checkpoint {
                newton = true;
            }
            checkpoint = worst;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        row_residual: last.0,
        col_residual: last.1,
    })
}

/// Lower Cholesky factor of a dense symmetric matrix.
#[derive(Debug, Clone)]
struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(mut a: Vec<f64>, dim: usize) -> Result<Self> {
        for k in 0..dim {
            let mut pivot = a[k * dim + k];
            for p in 0..k {
                pivot -= a[k * dim + p] * a[k * dim + p];
            }
            if !(pivot > 0.0) {
                return Err(Error::SingularQ { index: k, pivot });
            }
            let d = math::sqrt(pivot);
            a[k * dim + k] = d;
            for i in k + 1..dim {
                let mut v = a[i * dim + k];
                for p in 0..k {
                    v -= a[i * dim + p] * a[k * dim + p];
                }
                a[i * dim + k] = v / d;
            }
            for j in k + 1..dim {
                a[k * dim + j] = 0.0;
            }
        }
        Ok(Cholesky { dim, l: a })
    }

    fn ln_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|k| math::ln(self.l[k * self.dim + k])).sum::<f64>()
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut y = rhs.to_vec();
        for i in 0..d {
            for p in 0..i {
                y[i] -= self.l[i * d + p] * y[p];
            }
            y[i] /= self.l[i * d + i];
        }
        for i in (0..d).rev() {
            for p in i + 1..d {
                y[i] -= self.l[p * d + i] * y[p];
            }
            y[i] /= self.l[i * d + i];
        }
        y
    }

    fn inverse(&self) -> Vec<f64> {
        let d = self.dim;
        let mut inv = vec![0.0; d * d];
        let mut e = vec![0.0; d];
        for col in 0..d {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[col] = 1.0;
            let x = self.solve(&e);
            for row in 0..d {
                inv[row * d + col] = x[row];
            }
        }
        // exact symmetry
        for i in 0..d {
            for j in i + 1..d {
                let v = 0.5 * (inv[i * d + j] + inv[j * d + i]);
                inv[i * d + j] = v;
                inv[j * d + i] = v;
            }
        }
        inv
    }
}

/// The `(m + n - 1)`-square matrix whose determinant enters the Gaussian
/// estimate. Rows and columns are `u_1..u_m, t_1..t_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl QMatrix {
    pub fn new(margins: &Margins, solution: &MaxEntSolution) -> Self {
        let (m, n) = (solution.m, solution.n);
        let dim = m + n - 1;
        let mut data = vec![0.0; dim * dim];
        for (i, &r) in margins.rows().iter().enumerate() {
            let squares: f64 = (0..n).map(|j| solution.z(i, j) * solution.z(i, j)).sum();
            data[i * dim + i] = r as f64 + squares;
        }
        for (j, &c) in margins.cols().iter().enumerate().take(n - 1) {
            let k = m + j;
            let squares: f64 = (0..m).map(|i| solution.z(i, j) * solution.z(i, j)).sum();
            data[k * dim + k] = c as f64 + squares;
            for i in 0..m {
                let z = solution.z(i, j);
                let v = z * z + z;
                data[i * dim + k] = v;
                data[k * dim + i] = v;
            }
        }
        QMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::factor(self.data.clone(), self.dim)
    }

    /// `ln det Q` as twice the sum of log Cholesky pivots.
    pub fn ln_det(&self) -> Result<f64> {
        Ok(self.cholesky()?.ln_det())
    }

    /// `Q⁻¹`, row-major: the covariance of `(u, t)` under `e^{-xᵀQx/2}`.
    pub fn inverse(&self) -> Result<Vec<f64>> {
        Ok(self.cholesky()?.inverse())
    }
}

/// Edgeworth correction moments `μ = E[f²]` and `ν = E[h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeworthTerms {
    pub mu: f64,
    pub nu: f64,
}

/// Covariance of `u_i1 + t_j1` with `u_i2 + t_j2`; `t_n` is identically 0.
struct PairCovariance<'a> {
    m: usize,
    n: usize,
    dim: usize,
    s: &'a [f64],
}

impl PairCovariance<'_> {
    fn t(&self, j: usize) -> Option<usize> {
        (j + 1 < self.n).then_some(self.m + j)
    }

    fn at(&self, x: Option<usize>, y: Option<usize>) -> f64 {
        match (x, y) {
            (Some(x), Some(y)) => self.s[x * self.dim + y],
            _ => 0.0,
        }
    }

    fn cov(&self, (i1, j1): (usize, usize), (i2, j2): (usize, usize)) -> f64 {
        let (t1, t2) = (self.t(j1), self.t(j2));
        self.at(Some(i1), Some(i2)) + self.at(Some(i1), t2) + self.at(Some(i2), t1) + self.at(t1, t2)
    }
}

/// `μ` and `ν` by Wick contraction over every cell `(i, j)`.
///
/// With `X = u_i + t_j` jointly Gaussian and centred,
/// `E[X⁴] = 3 σ⁴` and `E[X³ Y³] = 9 σ_X² σ_Y² ρ + 6 ρ³` where `ρ = cov(X, Y)`.
pub fn edgeworth_terms(solution: &MaxEntSolution, q: &QMatrix) -> Result<EdgeworthTerms> {
    edgeworth_terms_over(solution, q, solution.n)
}

/// As [`edgeworth_terms`] but summing only over the first `cols` columns.
pub fn edgeworth_terms_over(solution: &MaxEntSolution, q: &QMatrix, cols: usize) -> Result<EdgeworthTerms> {
    let inverse = q.inverse()?;
    let pc = PairCovariance {
        m: solution.m,
        n: solution.n,
        dim: q.dim,
        s: &inverse,
    };
    let cells: Vec<(usize, usize)> = (0..solution.m)
        .flat_map(|i| (0..cols.min(solution.n)).map(move |j| (i, j)))
        .collect();
    let cubic: Vec<f64> = cells
        .iter()
        .map(|&(i, j)| {
            let z = solution.z(i, j);
            z * (z + 1.0) * (2.0 * z + 1.0)
        })
        .collect();
    let var: Vec<f64> = cells.iter().map(|&a| pc.cov(a, a)).collect();
    let mut nu = 0.0;
    for (k, &(i, j)) in cells.iter().enumerate() {
        let z = solution.z(i, j);
        let quartic = z * (z + 1.0) * (6.0 * z * z + 6.0 * z + 1.0);
        nu += quartic * 3.0 * var[k] * var[k];
    }
    let mut mu = 0.0;
    for (x, &a) in cells.iter().enumerate() {
        let mut row = 0.0;
        for (y, &b) in cells.iter().enumerate() {
            let rho = pc.cov(a, b);
            row += cubic[y] * (9.0 * var[x] * var[y] * rho + 6.0 * rho * rho * rho);
        }
        mu += cubic[x] * row;
    }
    Ok(EdgeworthTerms {
        mu: mu / 36.0,
        nu: nu / 24.0,
    })
}

/// Both maximum-entropy estimates from one solve.
#[derive(Debug, Clone)]
pub struct MaxEntEstimates {
    pub solution: MaxEntSolution,
    pub ln_det_q: f64,
    pub terms: EdgeworthTerms,
    pub gaussian: LogCount,
    pub edgeworth: LogCount,
}

fn gaussian_from(solution: &MaxEntSolution, ln_det_q: f64) -> f64 {
    let dim = (solution.m + solution.n - 1) as f64;
    solution.g_value - 0.5 * dim * LN_2PI - 0.5 * ln_det_q
}

pub fn maxent_estimates(margins: &Margins, tol: f64, max_iter: usize) -> Result<MaxEntEstimates> {
    let solution = solve_maxent(margins, tol, max_iter)?;
    let q = QMatrix::new(margins, &solution);
    let ln_det_q = q.ln_det()?;
    let terms = edgeworth_terms(&solution, &q)?;
    let ln_g = gaussian_from(&solution, ln_det_q);
    Ok(MaxEntEstimates {
        gaussian: LogCount::point(Method::MaxentG, ln_g),
        edgeworth: LogCount::point(Method::MaxentE, ln_g - 0.5 * terms.mu + terms.nu),
        solution,
        ln_det_q,
        terms,
    })
}

pub fn gaussian_estimate_with(margins: &Margins, tol: f64, max_iter: usize) -> Result<LogCount> {
    let solution = solve_maxent(margins, tol, max_iter)?;
    let ln_det_q = QMatrix::new(margins, &solution).ln_det()?;
    Ok(LogCount::point(Method::MaxentG, gaussian_from(&solution, ln_det_q)))
}

/// `g(Z) - ((m+n-1)/2) ln 2π - ½ ln det Q`.
pub fn gaussian_estimate(margins: &Margins) -> Result<LogCount> {
    gaussian_estimate_with(margins, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

pub fn edgeworth_estimate_with(margins: &Margins, tol: f64, max_iter: usize) -> Result<LogCount> {
    Ok(maxent_estimates(margins, tol, max_iter)?.edgeworth)
}

/// The Gaussian estimate plus `-μ/2 + ν`.
pub fn edgeworth_estimate(margins: &Margins) -> Result<LogCount> {
    edgeworth_estimate_with(margins, DEFAULT_TOL, DEFAULT_MAX_ITER)
}
