//! Minimization of `Σ_x q_x f(σ_x)` over rank-1 measurements on one factor
//! of a bipartite state, where `σ_x` is the normalized state left on the
//! other factor after outcome `x`.
//!
//! The main route is column generation over effect directions (see
//! `colgen`), followed by cyclic sweeps that rotate one pair of rows at a
//! time to the best point of a grid over the Bloch sphere. When the
//! requested number of outcomes is below the size of that solution, a
//! restart search over isometries with that many rows is used instead.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;

use crate::entropy::normalize_spectrum;
use crate::error::{Error, Result};
use crate::colgen::column_generation;
use crate::linalg::{eig_hermitian, hermitian_eigenvalues, ComplexMatrix};
use crate::measurements::{isometry_from_angles, IsometryParams, Side};
use crate::optimize::{refine_from, restart_endpoints, summarize, Direction, OptReport, OptimizerConfig};
use crate::scalar::{tol, Real};
use crate::state::{DensityMatrix, PureState};

/// Factorization `ρ = Σ_k |r_k><r_k|` of a state on `S ⊗ M` with each `r_k`
/// reshaped to an `s × d` matrix `R_k` (rows on S, columns on the measured
/// factor M). Measuring M with the effect `V†|x><x|V` leaves the unnormalized
/// state `σ_x = Σ_k (R_k v_x)(R_k v_x)†` on S, `v_x` being row `x` of `V`.
pub(crate) struct Steering<T> {
    factors: Vec<ComplexMatrix<T>>,
    s: usize,
    pub(crate) d: usize,
    /// `F` with search coordinates `V'` mapping to the POVM isometry `V'F`.
    frame: Option<ComplexMatrix<T>>,
}

impl<T: Real> Steering<T> {
    /// Searches in the eigenbasis of the measured marginal, the frame a
    /// purification built from the spectral decomposition would have.
    pub(crate) fn of_state(rho: &DensityMatrix<T>, side: Side) -> Result<Self> {
        let (da, db) = match rho.dims() {
            [a, b] => (*a, *b),
            d => return Err(Error::dims(format!("expected a bipartite state, got subsystems {d:?}"))),
        };
        let (s, d) = if side == Side::B { (da, db) } else { (db, da) };
        let keep = if side == Side::B { 1 } else { 0 };
        let u = rho.partial_trace(&[keep])?.eigen().vectors.map(|z| z.conj());
        let eig = rho.eigen();
        let factors = eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > T::lit(tol::RANK))
            .map(|(k, &l)| {
                let r = eig.eigenvector(k);
                let w = l.sqrt();
                ComplexMatrix::from_fn(s, d, |i, m| match side {
                    Side::B => r[i * d + m] * w,
                    Side::A => r[m * s + i] * w,
                })
                .matmul(&u)
            })
            .collect();
        Ok(Self { factors, s, d, frame: Some(u.transpose()) })
    }

    /// Members of the decomposition steered by `V`, reduced to the first
    /// subsystem of `psi` (dims `[a, b, e]`, `e` measured).
    pub(crate) fn of_purification(psi: &PureState<T>) -> Self {
        let (a, b, e) = (psi.dims()[0], psi.dims()[1], psi.dims()[2]);
        let amps = psi.amplitudes();
        let factors = (0..b)
            .map(|j| ComplexMatrix::from_fn(a, e, |i, m| amps[(i * b + j) * e + m]))
            .collect();
        Self { factors, s: a, d: e, frame: None }
    }

    /// POVM isometry for search coordinates `v`.
    pub(crate) fn to_isometry(&self, v: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        match &self.frame {
            Some(f) => v.matmul(f),
            None => v.clone(),
        }
    }

    fn apply(&self, r: &ComplexMatrix<T>, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.s).map(|i| r.row(i).iter().zip(v).map(|(a, b)| *a * *b).sum()).collect()
    }

    fn conditional(&self, v: &[Complex<T>]) -> ComplexMatrix<T> {
        let mut sigma = ComplexMatrix::zeros(self.s, self.s);
        for r in &self.factors {
            let phi = self.apply(r, v);
            for i in 0..self.s {
                for j in 0..self.s {
                    sigma[(i, j)] += phi[i] * phi[j].conj();
                }
            }
        }
        sigma
    }

    /// `Σ_x q_x f(spec σ_x/q_x)` over outcomes with `q_x ≥ 1e-12`.
    pub(crate) fn average<F: Fn(&[T]) -> T>(&self, v: &ComplexMatrix<T>, member: &F) -> T {
        (0..v.rows()).map(|x| member_cost(self.conditional(v.row(x)), member)).sum()
    }

    fn pair_moments(&self, vx: &[Complex<T>], vy: &[Complex<T>]) -> PairMoments<T> {
        let s = self.s;
        let mut out = PairMoments { a: ComplexMatrix::zeros(s, s), b: ComplexMatrix::zeros(s, s), c: ComplexMatrix::zeros(s, s) };
        for r in &self.factors {
            let u = self.apply(r, vx);
            let z = self.apply(r, vy);
            for i in 0..s {
                for j in 0..s {
                    out.a[(i, j)] += u[i] * u[j].conj();
                    out.b[(i, j)] += z[i] * z[j].conj();
                    out.c[(i, j)] += u[i] * z[j].conj();
                }
            }
        }
        out
    }
}

/// `q f(spec σ/q)` for an unnormalized `σ` with trace `q`, zero below `1e-12`.
fn member_cost<T: Real, F: Fn(&[T]) -> T>(sigma: ComplexMatrix<T>, member: &F) -> T {
    let mut eigs = hermitian_eigenvalues(sigma);
    let q = normalize_spectrum(&mut eigs);
    if q >= T::lit(tol::PRUNE) {
        q * member(&eigs)
    } else {
        T::zero()
    }
}

/// Moments of a pair of rows: `σ(a v_x + b v_y) = |a|²A + |b|²B + a b̄ C + ā b C†`.
struct PairMoments<T> {
    a: ComplexMatrix<T>,
    b: ComplexMatrix<T>,
    c: ComplexMatrix<T>,
}

impl<T: Real> PairMoments<T> {
    /// Combined cost of the rotated pair `(a v_x + b v_y, −b̄ v_x + ā v_y)`
    /// with `a = cos(t/2)`, `b = e^{ip} sin(t/2)`.
    fn cost<F: Fn(&[T]) -> T>(&self, t: f64, p: f64, member: &F) -> T {
        let (st, ct) = (t / 2.0).sin_cos();
        let (aa, bb) = (T::lit(ct * ct), T::lit(st * st));
        let ab = Complex::from_polar(T::lit(ct * st), T::lit(-p));
        let s = self.a.rows();
        let mixed = |i: usize, j: usize| self.c[(i, j)] * ab + (self.c[(j, i)] * ab).conj();
        let first = ComplexMatrix::from_fn(s, s, |i, j| self.a[(i, j)].scale(aa) + self.b[(i, j)].scale(bb) + mixed(i, j));
        let second = ComplexMatrix::from_fn(s, s, |i, j| self.a[(i, j)].scale(bb) + self.b[(i, j)].scale(aa) - mixed(i, j));
        member_cost(first, member) + member_cost(second, member)
    }
}

const PAIR_GRID_T: usize = 12;
const PAIR_GRID_P: usize = 24;
const MAX_SWEEPS: usize = 100;
const WORKING_OUTCOMES: usize = 4;

/// Cyclic sweeps over row pairs of `v`; each pair moves to the best point of
/// a grid over the Bloch sphere, polished by Nelder-Mead. Stops when a full
/// sweep gains less than `tol`.
fn pair_sweeps<T: Real, F: Fn(&[T]) -> T>(steer: &Steering<T>, v: &mut ComplexMatrix<T>, member: &F, tol: f64) -> Result<usize> {
    let n = v.rows();
    let mut evaluations = 0;
    let polish = OptimizerConfig {
        max_iters: 200,
        objective_tol: 1e-13,
        simplex_init_scale: 0.5 * PI / PAIR_GRID_T as f64,
        ..OptimizerConfig::default()
    };
    for _ in 0..MAX_SWEEPS {
        let mut gained = 0.0;
        for x in 0..n {
            for y in x + 1..n {
                let m = steer.pair_moments(v.row(x), v.row(y));
                let here = m.cost(0.0, 0.0, member).as_f64();
                let mut best = (here, 0.0, 0.0);
                for i in 1..=PAIR_GRID_T {
                    let t = PI * i as f64 / PAIR_GRID_T as f64;
                    for j in 0..PAIR_GRID_P {
                        let p = 2.0 * PI * j as f64 / PAIR_GRID_P as f64;
                        let c = m.cost(t, p, member).as_f64();
                        if c < best.0 {
                            best = (c, t, p);
                        }
                    }
                }
                evaluations += 1 + PAIR_GRID_T * PAIR_GRID_P;
                let (tp, c, e) = refine_from(|z: &[f64]| m.cost(z[0], z[1], member).as_f64(), vec![best.1, best.2], Direction::Minimize, &polish)?;
                evaluations += e;
                if c < best.0 {
                    best = (c, tp[0], tp[1]);
                }
                if best.0 < here {
                    let (st, ct) = (best.1 / 2.0).sin_cos();
                    let a = Complex::new(T::lit(ct), T::zero());
                    let b = Complex::from_polar(T::lit(st), T::lit(best.2));
                    for col in 0..v.cols() {
                        let (vx, vy) = (v[(x, col)], v[(y, col)]);
                        v[(x, col)] = a * vx + b * vy;
                        v[(y, col)] = a * vy - b.conj() * vx;
                    }
                    gained += here - best.0;
                }
            }
        }
        if gained < tol {
            break;
        }
    }
    Ok(evaluations)
}

/// Minimizes `Σ_x q_x f(σ_x)` over rank-1 POVMs with `n` outcomes.
///
/// Column generation runs first; its support has at most `d²` directions.
/// When that exceeds `n`, the restart search over `n`-row isometries runs
/// instead. Returns the optimal isometry in measurement coordinates and a
/// report whose `best_params` hold its entries row by row, real and
/// imaginary parts interleaved.
pub(crate) fn search_rank1<T: Real, F>(
    steer: &Steering<T>,
    n: usize,
    member: F,
    config: &OptimizerConfig,
) -> Result<(ComplexMatrix<T>, OptReport)>
where
    F: Fn(&[T]) -> T + Sync,
{
    config.validate()?;
    let d = steer.d;
    if n < d {
        return Err(Error::TooFewOutcomes { outcomes: n, dim: d });
    }
    let cost = |u: &[Complex<f64>]| {
        let u: Vec<Complex<T>> = u.iter().map(|z| Complex::new(T::lit(z.re), T::lit(z.im))).collect();
        member_cost(steer.conditional(&u), &member).as_f64()
    };
    let pure = PureDirections::new(steer);
    let sol = column_generation(cost, |h, rng| pure.best(h, rng), d, config)?;
    let (v, mut report) = if sol.rows.len() <= n {
        let k = sol.rows.len();
        let v = orthonormalized(ComplexMatrix::from_fn(k, d, |x, j| {
            let z = sol.rows[x][j];
            Complex::new(T::lit(z.re), T::lit(z.im))
        }))?;
        let evaluations = sol.evaluations;
        let padded = ComplexMatrix::from_fn(n, d, |x, j| if x < k { v[(x, j)] } else { Complex::new(T::zero(), T::zero()) });
        let report = OptReport {
            best_value: steer.average(&padded, &member).as_f64(),
            best_params: Vec::new(),
            best_restart: 0,
            per_restart_values: sol.history,
            evaluations,
            converged: sol.converged,
        };
        (padded, report)
    } else {
        restart_search(steer, n, &member, config)?
    };
    let v = steer.to_isometry(&v);
    report.best_params = v.as_slice().iter().flat_map(|z| [z.re.as_f64(), z.im.as_f64()]).collect();
    Ok((v, report))
}

const PURE_PROBES: usize = 48;
const PURE_STARTS: usize = 4;
const PURE_ITERS: usize = 300;

/// Directions `u` whose steered state `Σ_k R_k u u† R_k†` is pure. For a
/// target `φ` they form the kernel of `Σ_k R_k† (I − φφ†) R_k`.
struct PureDirections {
    factors: Vec<ComplexMatrix<f64>>,
    gram: ComplexMatrix<f64>,
    s: usize,
}

impl PureDirections {
    fn new<T: Real>(steer: &Steering<T>) -> Self {
        let factors: Vec<ComplexMatrix<f64>> = steer.factors.iter().map(|r| r.cast()).collect();
        let mut gram = ComplexMatrix::zeros(steer.d, steer.d);
        for r in &factors {
            gram = &gram + &r.adjoint().matmul(r);
        }
        Self { factors, gram, s: steer.s }
    }

    /// Best `u† H u` over the pure directions of target `φ`, with its `u`.
    fn score(&self, phi: &[Complex<f64>], h: &ComplexMatrix<f64>) -> Option<(f64, Vec<Complex<f64>>)> {
        let d = self.gram.rows();
        let mut g = self.gram.clone();
        for r in &self.factors {
            let w: Vec<Complex<f64>> = (0..d).map(|m| (0..self.s).map(|i| phi[i].conj() * r[(i, m)]).sum()).collect();
            for i in 0..d {
                for j in 0..d {
                    g[(i, j)] -= w[i].conj() * w[j];
                }
            }
        }
        let eig = eig_hermitian(&g).ok()?;
        let floor = 1e-9 * eig.values[0].max(1.0);
        let kernel: Vec<usize> = (0..d).filter(|&k| eig.values[k] <= floor).collect();
        if kernel.is_empty() {
            return None;
        }
        let q = ComplexMatrix::from_fn(d, kernel.len(), |i, k| eig.vectors[(i, kernel[k])]);
        let top = eig_hermitian(&q.adjoint().matmul(h).matmul(&q)).ok()?;
        Some((top.values[0], q.mul_vec(&top.eigenvector(0))))
    }

    /// Top pure directions for `H`: the best of random targets, refined by
    /// Nelder-Mead over the target. Empty when pure members do not exist.
    fn best(&self, h: &ComplexMatrix<f64>, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<Vec<Complex<f64>>> {
        let s = self.s;
        let unit = |x: &[f64]| {
            let v: Vec<Complex<f64>> = (0..s).map(|i| Complex::new(x[i], x[s + i])).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / n).collect::<Vec<_>>()
        };
        let mut probes: Vec<(f64, Vec<f64>)> = Vec::with_capacity(PURE_PROBES);
        for _ in 0..PURE_PROBES {
            let x: Vec<f64> = (0..2 * s).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            match self.score(&unit(&x), h) {
                Some((v, _)) => probes.push((v, x)),
                None => return Vec::new(),
            }
        }
        probes.sort_by(|a, b| b.0.total_cmp(&a.0));
        let polish = OptimizerConfig { max_iters: PURE_ITERS, objective_tol: 1e-12, simplex_init_scale: 0.2, ..OptimizerConfig::default() };
        probes
            .into_iter()
            .take(PURE_STARTS)
            .filter_map(|(_, x)| {
                let objective = |x: &[f64]| self.score(&unit(x), h).map_or(-1e30, |(v, _)| v);
                let (x, _, _) = refine_from(objective, x, Direction::Maximize, &polish).ok()?;
                self.score(&unit(&x), h).map(|(_, u)| u)
            })
            .collect()
    }
}

/// `V (V†V)^{-1/2}`, the nearest isometry to an almost isometric `V`.
fn orthonormalized<T: Real>(v: ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let gram = eig_hermitian(&v.adjoint().matmul(&v))?;
    Ok(v.matmul(&gram.reconstruct_with(|l| T::one() / l.sqrt())))
}

/// Nelder-Mead over Givens angles of a working isometry with
/// `min(n, max(d, 4))` rows, sweeps on every restart's endpoint, and a lift of
/// the best one to `n` rows by appending zero rows and sweeping again.
fn restart_search<T: Real, F>(steer: &Steering<T>, n: usize, member: &F, config: &OptimizerConfig) -> Result<(ComplexMatrix<T>, OptReport)>
where
    F: Fn(&[T]) -> T + Sync,
{
    let d = steer.d;
    let working = n.min(d.max(WORKING_OUTCOMES));
    let objective = |params: &[f64]| steer.average(&isometry_from_angles::<T>(working, d, params), member).as_f64();
    let mut ends = restart_endpoints(&[objective], IsometryParams::param_count(working, d), Direction::Minimize, config)?;
    let mut polished = Vec::with_capacity(ends.len());
    for end in ends.iter_mut() {
        let mut v = isometry_from_angles::<T>(working, d, &end.x);
        end.evaluations += pair_sweeps(steer, &mut v, member, config.objective_tol)?;
        end.value = steer.average(&v, member).as_f64();
        polished.push(v);
    }
    let mut report = summarize(ends, Direction::Minimize)?;
    let mut v = polished.swap_remove(report.best_restart);
    if n > working {
        let mut lifted = ComplexMatrix::zeros(n, d);
        for x in 0..working {
            for col in 0..d {
                lifted[(x, col)] = v[(x, col)];
            }
        }
        report.evaluations += pair_sweeps(steer, &mut lifted, member, config.objective_tol)?;
        report.best_value = steer.average(&lifted, member).as_f64();
        v = lifted;
    }
    Ok((v, report))
}
