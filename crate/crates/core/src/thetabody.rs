//! Theta-body relaxation of the quantum set, intersected with the clique
//! equalities, and a projection-based solver for it.
//!
//! A box `P` is in the relaxation when some symmetric `Π` has `Π_ii = P_i`,
//! `Π_ij = 0` on every edge, and `[[1, Pᵀ], [P, Π]] ⪰ 0`. Membership is
//! decided on `M = Π − PPᵀ` by Dykstra-corrected alternating projections
//! between the affine set of fixed entries and the PSD cone. Every feasible
//! `M` annihilates the indicator of each saturated clique, so the PSD step is
//! taken inside that face; without this restriction the iteration only
//! converges sublinearly. Boxes on the boundary of the relaxation can still
//! leave the iteration crawling, so once the residual is small the iterate is
//! factored as `A·Aᵀ` and the fixed entries are fitted over `A` with L-BFGS.
//! A fit within tolerance is a witness that is PSD by construction.

use argmin::core::{CostFunction, Executor, Gradient};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::orthograph::{check_clique, CliqueSet, OrthogonalityGraph};
use crate::polytope::{enumerate_deterministic, BoxVector, RowKind};

/// Tolerance of the linear pre-checks on clique sums.
const LINEAR_TOL: f64 = 1e-9;
/// Diagonal entries `P_i - P_i²` at or below this are treated as zero.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub infeasibility_threshold: f64,
    /// Iterations the residual must stay above the threshold.
    pub window: usize,
    /// Relative residual decrease over one window below which the iteration
    /// counts as stalled.
    pub stall_ratio: f64,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions {
            tol: 1e-6,
            max_iter: 50_000,
            infeasibility_threshold: 1e-4,
            window: 1000,
            stall_ratio: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaStatus {
    Feasible,
    Infeasible,
    Undecided,
}

impl ThetaStatus {
    pub fn name(self) -> &'static str {
        match self {
            ThetaStatus::Feasible => "Feasible",
            ThetaStatus::Infeasible => "Infeasible",
            ThetaStatus::Undecided => "Undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCertificate {
    pub status: ThetaStatus,
    pub residual: f64,
    pub iterations: usize,
    /// Witness `Π`, present when feasible.
    pub pi: Option<DMatrix<f64>>,
    /// Index of a clique whose equality the box violates, when the linear
    /// pre-check already rules it out.
    pub violated_clique: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaOptimum {
    pub value: f64,
    pub argmax: BoxVector,
    pub certificate: ThetaCertificate,
}

fn symmetric_eigen(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    SymmetricEigen::new(m.clone())
}

fn clip(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = symmetric_eigen(m);
    let mut scaled = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = l.max(0.0);
        scaled.column_mut(j).scale_mut(s);
    }
    let out = scaled * eig.eigenvectors.transpose();
    (&out + out.transpose()) * 0.5
}

/// Frobenius-nearest PSD matrix.
pub fn psd_project(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix", m.nrows(), m.ncols())));
    }
    let asym = (m - m.transpose()).amax();
    if asym > 1e-9 * m.amax().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(clip(&((m + m.transpose()) * 0.5)))
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigen(m).eigenvalues.min()
}

/// Orthonormal basis of the common kernel of the given row vectors.
fn kernel_basis(rows: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    if rows.is_empty() {
        return DMatrix::identity(dim, dim);
    }
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for r in rows {
        gram += r * r.transpose();
    }
    let eig = symmetric_eigen(&gram);
    let scale = eig.eigenvalues.amax().max(1.0);
    let cols: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l < 1e-9 * scale)
        .map(|(j, _)| eig.eigenvectors.column(j).into_owned())
        .collect();
    if cols.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    DMatrix::from_columns(&cols)
}

/// PSD projection restricted to the face `{X = W S Wᵀ : S ⪰ 0}`.
struct Face {
    w: DMatrix<f64>,
}

impl Face {
    fn project(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        if self.w.ncols() == 0 {
            return DMatrix::zeros(z.nrows(), z.ncols());
        }
        let inner = self.w.transpose() * z * &self.w;
        let inner = (&inner + inner.transpose()) * 0.5;
        &self.w * clip(&inner) * self.w.transpose()
    }
}

/// Residual below which the factored refinement is attempted.
const POLISH_START: f64 = 1e-2;
const POLISH_ITERS: u64 = 2000;

/// `Σ_{(i,j) fixed} ((W V Vᵀ Wᵀ)_ij − t_ij)²` over the face coordinates `V`.
struct Factored<'a> {
    w: &'a DMatrix<f64>,
    fixed: &'a [(usize, usize, f64)],
    rank: usize,
}

impl Factored<'_> {
    fn factor(&self, v: &[f64]) -> DMatrix<f64> {
        self.w * DMatrix::from_column_slice(self.w.ncols(), self.rank, v)
    }

    /// Residual matrix on the fixed pattern, zero elsewhere.
    fn residuals(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(a.nrows(), a.nrows());
        for &(i, j, t) in self.fixed {
            e[(i, j)] = a.row(i).dot(&a.row(j)) - t;
        }
        e
    }
}

impl CostFunction for Factored<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, v: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.residuals(&self.factor(v)).norm_squared())
    }
}

impl Gradient for Factored<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, v: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        let a = self.factor(v);
        let e = self.residuals(&a);
        // The pattern is symmetric, so d/dA Σ e_ij² = 4 E A.
        let g = self.w.transpose() * (e * a) * 4.0;
        Ok(g.as_slice().to_vec())
    }
}

/// Fits the fixed entries with a factored PSD matrix started from `x`;
/// returns it when the fit is within `tol`.
fn polish(face: &Face, fixed: &[(usize, usize, f64)], x: &DMatrix<f64>, tol: f64) -> Option<DMatrix<f64>> {
    let w = &face.w;
    let k = w.ncols();
    if k == 0 {
        return None;
    }
    let inner = w.transpose() * x * w;
    let eig = symmetric_eigen(&((&inner + inner.transpose()) * 0.5));
    let top = eig.eigenvalues.amax().max(1e-12);
    let mut v0 = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        // Keep every direction alive: a zero column has zero gradient.
        v0.column_mut(j).scale_mut(l.max(1e-6 * top).sqrt());
    }
    let problem = Factored { w, fixed, rank: k };
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), 10)
        .with_tolerance_grad(0.0)
        .ok()?
        .with_tolerance_cost(0.0)
        .ok()?;
    let result = Executor::new(problem, solver)
        .configure(|state| state.param(v0.as_slice().to_vec()).max_iters(POLISH_ITERS).target_cost(tol * tol * 1e-2))
        .run()
        .ok()?;
    let best = result.state.best_param?;
    let problem = Factored { w, fixed, rank: k };
    let a = problem.factor(&best);
    let fit = problem.residuals(&a).norm();
    log::debug!("factored refinement residual {fit:e}");
    (fit < tol).then(|| &a * a.transpose())
}

fn clique_indicator(n: usize, vertices: &[usize]) -> DVector<f64> {
    let mut u = DVector::zeros(n);
    for &v in vertices {
        u[v] = 1.0;
    }
    u
}

/// Cliques of the set that are genuine cliques of `g`; only those force a
/// kernel vector.
fn saturated_cliques<'a>(g: &OrthogonalityGraph, cliques: &'a CliqueSet) -> Vec<&'a [usize]> {
    cliques
        .cliques
        .iter()
        .filter(|c| check_clique(g, &c.vertices).is_ok())
        .map(|c| c.vertices.as_slice())
        .collect()
}

struct Tracker {
    history: Vec<f64>,
}

enum Verdict {
    Converged,
    Stalled,
    Continue,
}

impl Tracker {
    fn step(&mut self, r: f64, opts: &ThetaOptions) -> Result<Verdict> {
        if !r.is_finite() {
            return Err(Error::Diverged("non-finite residual".into()));
        }
        self.history.push(r);
        let k = self.history.len() - 1;
        if r < opts.tol {
            return Ok(Verdict::Converged);
        }
        if k >= opts.window {
            let window = &self.history[k - opts.window..=k];
            let above = window.iter().all(|&x| x > opts.infeasibility_threshold);
            if above && r > (1.0 - opts.stall_ratio) * window[0] {
                return Ok(Verdict::Stalled);
            }
        }
        Ok(Verdict::Continue)
    }
}

fn check_scenario(g: &OrthogonalityGraph, p: &BoxVector) -> Result<()> {
    if g.scenario != *p.scenario() {
        return Err(Error::ScenarioMismatch);
    }
    Ok(())
}

pub fn theta_membership(
    g: &OrthogonalityGraph,
    cliques: &CliqueSet,
    p: &BoxVector,
    opts: &ThetaOptions,
) -> Result<ThetaCertificate> {
    check_scenario(g, p)?;
    let n = g.vertex_count();
    let pv = p.to_f64();

    for (k, c) in cliques.cliques.iter().enumerate() {
        let sum: f64 = c.vertices.iter().map(|&v| pv[v]).sum();
        if (sum - 1.0).abs() > LINEAR_TOL {
            return Ok(ThetaCertificate {
                status: ThetaStatus::Infeasible,
                residual: (sum - 1.0).abs(),
                iterations: 0,
                pi: None,
                violated_clique: Some(k),
            });
        }
    }
    if let Some(neg) = pv.iter().copied().filter(|&x| x < -LINEAR_TOL).reduce(f64::min) {
        return Ok(ThetaCertificate {
            status: ThetaStatus::Infeasible,
            residual: -neg,
            iterations: 0,
            pi: None,
            violated_clique: None,
        });
    }

    // A zero diagonal entry P_i - P_i² forces row i of a PSD matrix to vanish.
    let mut kernel_rows: Vec<DVector<f64>> = saturated_cliques(g, cliques)
        .iter()
        .map(|c| clique_indicator(n, c))
        .collect();
    kernel_rows.extend((0..n).filter(|&i| pv[i] - pv[i] * pv[i] <= DEGENERATE_TOL).map(|i| clique_indicator(n, &[i])));
    let face = Face {
        w: kernel_basis(&kernel_rows, n),
    };
    let mut fixed: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, pv[i] - pv[i] * pv[i])).collect();
    for (u, v) in g.edges() {
        let t = -pv[u] * pv[v];
        fixed.push((u, v, t));
        fixed.push((v, u, t));
    }

    let mut x = DMatrix::<f64>::zeros(n, n);
    for &(i, j, t) in &fixed {
        x[(i, j)] = t;
    }
    let mut inc = DMatrix::<f64>::zeros(n, n);
    let mut tracker = Tracker { history: Vec::new() };
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iter {
        let z = &x + &inc;
        let y = face.project(&z);
        inc = z - &y;
        x = y;
        residual = fixed
            .iter()
            .map(|&(i, j, t)| {
                let d = t - x[(i, j)];
                x[(i, j)] = t;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        match tracker.step(residual, opts)? {
            Verdict::Converged => {
                let pvec = DVector::from_vec(pv.clone());
                let pi = &x + &pvec * pvec.transpose();
                return Ok(ThetaCertificate {
                    status: ThetaStatus::Feasible,
                    residual,
                    iterations: it + 1,
                    pi: Some(pi),
                    violated_clique: None,
                });
            }
            Verdict::Stalled => {
                return Ok(ThetaCertificate {
                    status: ThetaStatus::Infeasible,
                    residual,
                    iterations: it + 1,
                    pi: None,
                    violated_clique: None,
                })
            }
            Verdict::Continue => {}
        }
        let last = it + 1 == opts.max_iter;
        if residual < POLISH_START && ((it + 1) % opts.window == 0 || last) {
            if let Some(m) = polish(&face, &fixed, &x, opts.tol) {
                let pvec = DVector::from_vec(pv.clone());
                return Ok(ThetaCertificate {
                    status: ThetaStatus::Feasible,
                    residual,
                    iterations: it + 1,
                    pi: Some(m + &pvec * pvec.transpose()),
                    violated_clique: None,
                });
            }
        }
    }
    Ok(ThetaCertificate {
        status: ThetaStatus::Undecided,
        residual,
        iterations: opts.max_iter,
        pi: None,
        violated_clique: None,
    })
}

/// Independent check of a witness: diagonal and edge conditions hold within
/// `slack` and the bordered matrix has no eigenvalue below `-slack`.
pub fn check_witness(g: &OrthogonalityGraph, p: &BoxVector, pi: &DMatrix<f64>, slack: f64) -> bool {
    let n = g.vertex_count();
    if pi.nrows() != n || pi.ncols() != n || p.len() != n {
        return false;
    }
    let pv = p.to_f64();
    if (0..n).any(|i| (pi[(i, i)] - pv[i]).abs() > slack) {
        return false;
    }
    if g.edges().iter().any(|&(u, v)| pi[(u, v)].abs() > slack || pi[(v, u)].abs() > slack) {
        return false;
    }
    min_eigenvalue(&bordered(&pv, pi)) >= -slack
}

fn bordered(p: &[f64], pi: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.len();
    let mut y = DMatrix::<f64>::zeros(n + 1, n + 1);
    y[(0, 0)] = 1.0;
    for i in 0..n {
        y[(0, i + 1)] = p[i];
        y[(i + 1, 0)] = p[i];
        for j in 0..n {
            y[(i + 1, j + 1)] = pi[(i, j)];
        }
    }
    y
}

/// Projection-based feasibility oracle for the slice `f·P = t` on the
/// bordered matrix `Y = [[1, Pᵀ], [P, Π]]`.
struct Slice<'a> {
    n: usize,
    edges: Vec<(usize, usize)>,
    face: Face,
    /// Rows of `G` in `G·P = g`: clique indicators, then `f`.
    g_rows: DMatrix<f64>,
    g_pinv: DMatrix<f64>,
    clique_count: usize,
    opts: &'a ThetaOptions,
}

enum SliceResult {
    Feasible(DMatrix<f64>, f64, usize),
    Rejected(ThetaStatus, f64, usize),
}

impl<'a> Slice<'a> {
    fn new(g: &OrthogonalityGraph, cliques: &CliqueSet, f: &[f64], opts: &'a ThetaOptions) -> Result<Self> {
        let n = g.vertex_count();
        let kernel: Vec<DVector<f64>> = saturated_cliques(g, cliques)
            .iter()
            .map(|c| {
                let mut v = DVector::zeros(n + 1);
                v[0] = -1.0;
                for &i in *c {
                    v[i + 1] = 1.0;
                }
                v
            })
            .collect();
        let face = Face {
            w: kernel_basis(&kernel, n + 1),
        };
        let k = cliques.cliques.len();
        let mut g_rows = DMatrix::<f64>::zeros(k + 1, n);
        for (r, c) in cliques.cliques.iter().enumerate() {
            for &v in &c.vertices {
                g_rows[(r, v)] = 1.0;
            }
        }
        for (j, &fj) in f.iter().enumerate() {
            g_rows[(k, j)] = fj;
        }
        let g_pinv = g_rows
            .clone()
            .pseudo_inverse(1e-10)
            .map_err(|e| Error::Diverged(format!("pseudo-inverse failed: {e}")))?;
        Ok(Slice {
            n,
            edges: g.edges(),
            face,
            g_rows,
            g_pinv,
            clique_count: k,
            opts,
        })
    }

    fn affine(&self, y: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
        let n = self.n;
        let p_hat = DVector::from_fn(n, |i, _| (y[(0, i + 1)] + y[(i + 1, 0)] + y[(i + 1, i + 1)]) / 3.0);
        let mut rhs = DVector::from_element(self.clique_count + 1, 1.0);
        rhs[self.clique_count] = t;
        let p = &p_hat - &self.g_pinv * (&self.g_rows * &p_hat - rhs);
        let mut x = y.clone();
        x[(0, 0)] = 1.0;
        for i in 0..n {
            x[(0, i + 1)] = p[i];
            x[(i + 1, 0)] = p[i];
            x[(i + 1, i + 1)] = p[i];
        }
        for &(u, v) in &self.edges {
            x[(u + 1, v + 1)] = 0.0;
            x[(v + 1, u + 1)] = 0.0;
        }
        x
    }

    fn solve(&self, t: f64) -> Result<SliceResult> {
        let mut y = DMatrix::<f64>::zeros(self.n + 1, self.n + 1);
        let mut inc = DMatrix::<f64>::zeros(self.n + 1, self.n + 1);
        let mut tracker = Tracker { history: Vec::new() };
        let mut residual = f64::INFINITY;
        for it in 0..self.opts.max_iter {
            let x = self.affine(&y, t);
            let z = &x + &inc;
            y = self.face.project(&z);
            inc = &z - &y;
            residual = (&x - &y).norm();
            match tracker.step(residual, self.opts)? {
                Verdict::Converged => return Ok(SliceResult::Feasible(x, residual, it + 1)),
                Verdict::Stalled => return Ok(SliceResult::Rejected(ThetaStatus::Infeasible, residual, it + 1)),
                Verdict::Continue => {}
            }
        }
        Ok(SliceResult::Rejected(ThetaStatus::Undecided, residual, self.opts.max_iter))
    }
}

/// Maximizes `f·P` over the relaxation by bisection on the level `t`.
pub fn theta_optimize(
    g: &OrthogonalityGraph,
    cliques: &CliqueSet,
    f: &[f64],
    opts: &ThetaOptions,
) -> Result<ThetaOptimum> {
    let n = g.vertex_count();
    if f.len() != n {
        return Err(Error::DimensionMismatch(format!("functional has {} entries, graph has {n} vertices", f.len())));
    }
    if f.iter().any(|x| !x.is_finite()) {
        return Err(Error::DimensionMismatch("functional has non-finite entries".into()));
    }

    // Lower end: best deterministic box satisfying every clique equality.
    let mut best: Option<(f64, Vec<f64>)> = None;
    for l in enumerate_deterministic(&g.scenario)? {
        let lv = l.to_f64();
        let ok = cliques
            .cliques
            .iter()
            .all(|c| (c.vertices.iter().map(|&v| lv[v]).sum::<f64>() - 1.0).abs() <= LINEAR_TOL);
        if !ok {
            continue;
        }
        let value: f64 = f.iter().zip(&lv).map(|(a, b)| a * b).sum();
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, lv));
        }
    }
    let (mut lo, lbest) = best.ok_or_else(|| Error::Diverged("no deterministic box satisfies the clique equalities".into()))?;

    // Upper end: each normalization clique carries total weight one.
    let mut hi = 0.0;
    let mut covered = vec![false; n];
    for c in cliques.cliques.iter().filter(|c| c.kind == RowKind::Norm) {
        hi += c.vertices.iter().map(|&v| f[v]).fold(f64::NEG_INFINITY, f64::max);
        for &v in &c.vertices {
            covered[v] = true;
        }
    }
    if covered.iter().any(|c| !c) {
        return Err(Error::Diverged("normalization cliques do not cover every event".into()));
    }

    let lbest_vec = DVector::from_vec(lbest.clone());
    let mut witness = bordered(&lbest, &(&lbest_vec * lbest_vec.transpose()));
    let mut certificate = ThetaCertificate {
        status: ThetaStatus::Feasible,
        residual: 0.0,
        iterations: 0,
        pi: Some(witness.view((1, 1), (n, n)).into_owned()),
        violated_clique: None,
    };

    if hi - lo > opts.tol {
        let slice = Slice::new(g, cliques, f, opts)?;
        while hi - lo > opts.tol {
            let mid = 0.5 * (lo + hi);
            match slice.solve(mid)? {
                SliceResult::Feasible(x, residual, iterations) => {
                    log::debug!("level {mid}: feasible after {iterations} iterations");
                    lo = mid;
                    certificate = ThetaCertificate {
                        status: ThetaStatus::Feasible,
                        residual,
                        iterations,
                        pi: Some(x.view((1, 1), (n, n)).into_owned()),
                        violated_clique: None,
                    };
                    witness = x;
                }
                SliceResult::Rejected(status, residual, iterations) => {
                    log::debug!("level {mid}: {} after {iterations} iterations (residual {residual:e})", status.name());
                    hi = mid;
                }
            }
        }
    }

    let argmax: Vec<f64> = (0..n).map(|i| witness[(0, i + 1)]).collect();
    let bordered_min = min_eigenvalue(&witness);
    if bordered_min < -10.0 * opts.tol.max(certificate.residual) {
        return Err(Error::Diverged(format!("witness has eigenvalue {bordered_min:e}")));
    }
    Ok(ThetaOptimum {
        value: lo,
        argmax: BoxVector::float(g.scenario, argmax)?,
        certificate,
    })
}
