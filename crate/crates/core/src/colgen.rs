//! Column generation for `min Σ_j w_j c(u_j)` over weights `w_j ≥ 0` and unit
//! vectors `u_j ∈ C^d` with `Σ_j w_j u_j u_j† = I`.
//!
//! This is the search over rank-1 POVMs written as a linear program with one
//! column per effect direction (`c` must be 1-homogeneous in the effect). The
//! restricted program over a finite pool of columns is solved by Clarabel.
//! New columns come from Nelder-Mead descents of the reduced cost
//! `c(u) − <Y, u u†>`, `Y` being the equality duals, which also give the
//! lower bound `tr Y + d · min_u (c(u) − <Y, u u†>)` on the optimum.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::optimize::{refine_from, Direction, OptimizerConfig};

const INITIAL_COLUMNS_PER_ENTRY: usize = 8;
const MAX_ROUNDS: usize = 150;
/// Reduced cost below which a priced direction enters the pool.
const NEW_COLUMN_TOL: f64 = 1e-12;
const SAME_DIRECTION: f64 = 1e-10;
const WEIGHT_FLOOR: f64 = 1e-12;

pub(crate) struct ColumnSolution {
    /// `√w_j u_j` for every column in the reduced support.
    pub(crate) rows: Vec<Vec<Complex64>>,
    /// Restricted-program value after every round.
    pub(crate) history: Vec<f64>,
    pub(crate) evaluations: usize,
    pub(crate) converged: bool,
}

/// Real coordinates of `u u†`: diagonal entries, then real and imaginary
/// parts of the entries above the diagonal.
fn gram_coords(u: &[Complex64]) -> Vec<f64> {
    let d = u.len();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(u[i].norm_sqr());
    }
    for i in 0..d {
        for j in i + 1..d {
            let z = u[i] * u[j].conj();
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

/// Hermitian `H` with `u† H u = gram_coords(u) · y`.
fn dual_matrix(y: &[f64], d: usize) -> ComplexMatrix<f64> {
    let mut h = ComplexMatrix::zeros(d, d);
    let mut k = d;
    for i in 0..d {
        h[(i, i)] = Complex64::new(y[i], 0.0);
        for j in i + 1..d {
            h[(j, i)] = Complex64::new(y[k], -y[k + 1]) * 0.5;
            h[(i, j)] = h[(j, i)].conj();
            k += 2;
        }
    }
    h
}

fn identity_coords(d: usize) -> Vec<f64> {
    let mut b = vec![0.0; d * d];
    b[..d].iter_mut().for_each(|x| *x = 1.0);
    b
}

fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    normalized(v)
}

fn normalized(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    v
}

fn from_real(x: &[f64]) -> Vec<Complex64> {
    let d = x.len() / 2;
    normalized((0..d).map(|i| Complex64::new(x[i], x[d + i])).collect())
}

struct Column {
    u: Vec<Complex64>,
    a: Vec<f64>,
    cost: f64,
}

impl Column {
    fn new(u: Vec<Complex64>, cost: f64) -> Self {
        Self { a: gram_coords(&u), u, cost }
    }
}

/// Optimal weights and equality duals `y` (dual program: max `b·y` subject
/// to `a_j·y ≤ c_j`) of the restricted program.
fn solve_restricted(columns: &[Column], b: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (m, k) = (b.len(), columns.len());
    let mut colptr = Vec::with_capacity(k + 1);
    let (mut rowval, mut nzval) = (Vec::new(), Vec::new());
    for (j, col) in columns.iter().enumerate() {
        colptr.push(rowval.len());
        for (i, &v) in col.a.iter().enumerate() {
            if v != 0.0 {
                rowval.push(i);
                nzval.push(v);
            }
        }
        rowval.push(m + j);
        nzval.push(-1.0);
    }
    colptr.push(rowval.len());
    let a = CscMatrix::new(m + k, k, colptr, rowval, nzval);
    let p = CscMatrix::zeros((k, k));
    let q: Vec<f64> = columns.iter().map(|c| c.cost).collect();
    let mut rhs = b.to_vec();
    rhs.resize(m + k, 0.0);
    let cones = [SupportedConeT::ZeroConeT(m), SupportedConeT::NonnegativeConeT(k)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-11)
        .tol_gap_rel(1e-11)
        .tol_feas(1e-11)
        .build()
        .expect("valid solver settings");
    let mut solver = DefaultSolver::new(&p, &q, &a, &rhs, &cones, settings)
        .map_err(|e| Error::InvalidConfig(format!("linear program setup: {e}")))?;
    solver.solve();
    let sol = &solver.solution;
    if !matches!(sol.status, SolverStatus::Solved | SolverStatus::AlmostSolved) {
        return Err(Error::NonFiniteObjective { value: f64::NAN });
    }
    let w = sol.x.iter().map(|&x| x.max(0.0)).collect();
    let y = sol.z[..m].iter().map(|&z| -z).collect();
    Ok((w, y, sol.obj_val))
}

/// Moves the weights along null vectors of the active columns, never raising
/// the cost, until at most `m` columns carry weight.
fn reduce_support(columns: &[Column], w: &mut [f64]) {
    loop {
        let active: Vec<usize> = (0..w.len()).filter(|&j| w[j] > WEIGHT_FLOOR).collect();
        let m = columns[0].a.len();
        if active.len() <= m {
            for (j, x) in w.iter_mut().enumerate() {
                if !active.contains(&j) {
                    *x = 0.0;
                }
            }
            return;
        }
        let pick = &active[..m + 1];
        let z = null_vector(&pick.iter().map(|&j| columns[j].a.as_slice()).collect::<Vec<_>>());
        let slope: f64 = pick.iter().zip(&z).map(|(&j, zj)| columns[j].cost * zj).sum();
        let z: Vec<f64> = if slope > 0.0 { z.iter().map(|v| -v).collect() } else { z };
        let Some((limit, step)) = pick
            .iter()
            .zip(&z)
            .filter(|(_, &zj)| zj < 0.0)
            .map(|(&j, &zj)| (j, w[j] / -zj))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return;
        };
        for (&j, zj) in pick.iter().zip(&z) {
            w[j] = (w[j] + step * zj).max(0.0);
        }
        w[limit] = 0.0;
    }
}

/// Unit vector `z` with `Σ_j z_j cols[j] ≈ 0` for `cols.len() > cols[0].len()`,
/// by Gaussian elimination with partial pivoting.
fn null_vector(cols: &[&[f64]]) -> Vec<f64> {
    let (m, k) = (cols[0].len(), cols.len());
    let mut a: Vec<Vec<f64>> = (0..m).map(|i| (0..k).map(|j| cols[j][i]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..k {
        if row == m {
            break;
        }
        let (best, val) = (row..m).map(|r| (r, a[r][col].abs())).max_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
        if val < 1e-13 {
            continue;
        }
        a.swap(row, best);
        for r in 0..m {
            if r != row {
                let f = a[r][col] / a[row][col];
                if f != 0.0 {
                    for c in col..k {
                        a[r][c] -= f * a[row][c];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free = (0..k).find(|c| !pivots.contains(c)).expect("more columns than rows");
    let mut z = vec![0.0; k];
    z[free] = 1.0;
    for (r, &p) in pivots.iter().enumerate() {
        z[p] = -a[r][free] / a[r][p];
    }
    let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    z.iter().map(|v| v / n).collect()
}

/// Runs column generation for the cost `cost(u)` of a unit direction `u ∈ C^d`.
///
/// Each round prices Nelder-Mead descents started from the directions that
/// `seeds` proposes for the dual matrix `H` (with `u† H u` the dual part of
/// the reduced cost), then from `config.restarts` perturbed support columns
/// and Haar-random directions drawn from the round's own stream. Stops when
/// the restricted value is within `10 · config.objective_tol` of the dual
/// bound, when pricing finds no improving column, or after a fixed number of
/// rounds.
pub(crate) fn column_generation<F, S>(cost: F, seeds: S, d: usize, config: &OptimizerConfig) -> Result<ColumnSolution>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
    S: Fn(&ComplexMatrix<f64>, &mut ChaCha8Rng) -> Vec<Vec<Complex64>>,
{
    config.validate()?;
    let b = identity_coords(d);
    let mut rng = config.restart_rng(0);
    let mut columns: Vec<Column> = (0..d)
        .map(|i| (0..d).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect::<Vec<_>>())
        .chain((0..INITIAL_COLUMNS_PER_ENTRY * d * d).map(|_| haar_vector(d, &mut rng)))
        .map(|u| {
            let c = cost(&u);
            Column::new(u, c)
        })
        .collect();
    let mut evaluations = columns.len();
    let pricing = OptimizerConfig { objective_tol: config.objective_tol * 1e-2, simplex_init_scale: 0.3, hops: 0, ..config.clone() };
    let mut history = Vec::new();
    let mut converged = false;
    let mut w;
    let mut value;
    let mut round = 0;
    loop {
        let (weights, y, v) = solve_restricted(&columns, &b)?;
        w = weights;
        value = v;
        history.push(value);
        round += 1;
        if round > MAX_ROUNDS {
            break;
        }
        let reduced = |u: &[Complex64]| cost(u) - gram_coords(u).iter().zip(&y).map(|(a, y)| a * y).sum::<f64>();
        let mut order: Vec<usize> = (0..columns.len()).filter(|&j| w[j] > WEIGHT_FLOOR).collect();
        order.sort_by(|&i, &j| w[j].total_cmp(&w[i]));
        let mut rng = config.restart_rng(round);
        let seeded = seeds(&dual_matrix(&y, d), &mut rng);
        let starts: Vec<Vec<f64>> = seeded
            .into_iter()
            .chain((0..config.restarts).map(|s| match order.get(s / 2) {
                Some(&j) if s % 2 == 0 => {
                    let kick = haar_vector(d, &mut rng);
                    normalized(columns[j].u.iter().zip(&kick).map(|(a, k)| a + k * 0.1).collect())
                }
                _ => haar_vector(d, &mut rng),
            }))
            .map(|u| u.iter().map(|z| z.re).chain(u.iter().map(|z| z.im)).collect())
            .collect();
        let descend = |x0: &Vec<f64>| refine_from(|x: &[f64]| reduced(&from_real(x)), x0.clone(), Direction::Minimize, &pricing);
        let found: Vec<(Vec<f64>, f64, usize)> = if config.parallel {
            starts.par_iter().map(descend).collect::<Result<_>>()?
        } else {
            starts.iter().map(descend).collect::<Result<_>>()?
        };
        let mut best_rc: f64 = 0.0;
        let mut added = 0;
        let first_new = columns.len();
        for (x, rc, e) in found {
            evaluations += e;
            best_rc = best_rc.min(rc);
            if rc < -NEW_COLUMN_TOL {
                let u = from_real(&x);
                let duplicate = columns[first_new..].iter().any(|c| {
                    let ov: Complex64 = c.u.iter().zip(&u).map(|(a, b)| a.conj() * b).sum();
                    ov.norm_sqr() > 1.0 - SAME_DIRECTION
                });
                if !duplicate {
                    let c = cost(&u);
                    columns.push(Column::new(u, c));
                    added += 1;
                }
            }
        }
        let lower_bound = value + d as f64 * best_rc;
        if value - lower_bound <= 10.0 * config.objective_tol || added == 0 {
            converged = true;
            break;
        }
    }
    reduce_support(&columns, &mut w);
    let rows = columns
        .iter()
        .zip(&w)
        .filter(|(_, &wj)| wj > 0.0)
        .map(|(c, &wj)| c.u.iter().map(|z| z * wj.sqrt()).collect())
        .collect();
    Ok(ColumnSolution { rows, history, evaluations, converged })
}
