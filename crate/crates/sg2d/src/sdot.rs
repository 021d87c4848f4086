//! Semi-discrete optimal transport between Lebesgue measure on Ω and a
//! discrete measure, by damped Newton on the Kantorovich functional.
//!
//! For seeds `z`, masses `m`, and weights `w`, the (concave) Kantorovich
//! functional is
//!
//! ```text
//! g(w) = Σ_i ∫_{C_i(w)} |x − z_i|² dx + Σ_i (m_i − area(C_i(w))) w_i ,
//! ```
//!
//! whose maximizer is the weight vector making every Laguerre cell carry
//! exactly its prescribed mass: ∂g/∂w_i = m_i − area(C_i). The negative
//! Hessian is the graph Laplacian of the diagram's dual graph with edge
//! weights `interface_length / (2 · seed_distance)` — symmetric positive
//! semidefinite with kernel span{𝟙} while all cells are nonempty — so each
//! Newton step solves one reduced (N−1)-dimensional Laplacian system.
//!
//! Damping follows Kitagawa–Mérigot: accept the step `w + t·d` (halving
//! `t` as needed) only while every cell area stays above
//! `ε₀ = ½·min(min_i m_i, min_i area_i(start))` *and* the gradient norm
//! decreases by the factor `(1 − t/2)`. That keeps every iterate inside
//! the region where `g` is smooth and strongly concave, which is what
//! makes Newton globally convergent here.
//!
//! Weights are only defined up to an additive constant; everything in this
//! module pins the gauge by `w[N−1] = 0`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geom2d::{ConvexPolygon, Point2};
use crate::laguerre::{
    build_diagram, DiscreteMeasure, LaguerreDiagram, LaguerreError, WeightVector,
};
use crate::tolerances::{
    BUMP_MARGIN_REL, CG_MAX_ITER_FACTOR, CG_REL_TOL, DENSE_SOLVE_MAX, MASS_SUM_ABS,
    MAX_BACKTRACKS, MAX_FEASIBILITY_ROUNDS, MAX_NEWTON_ITERATIONS,
};

/// Sparse symmetric graph Laplacian: the negative Hessian of the
/// Kantorovich functional.
///
/// Stored as positive edge weights `h_ij`; the matrix is
/// `L_ii = Σ_j h_ij`, `L_ij = −h_ij`. Rows sum to zero by construction,
/// and the matrix is positive semidefinite with kernel span{𝟙} whenever
/// the dual graph is connected.
#[derive(Clone, Debug)]
pub struct GraphLaplacian {
    diag: Vec<f64>,
    /// `(i, j, h_ij)` with `i < j`, `h_ij > 0`; entry value is `−h_ij`.
    edges: Vec<(usize, usize, f64)>,
}

impl GraphLaplacian {
    /// Assemble from a diagram: edge weight `ℓ_ij / (2 |z_i − z_j|)`.
    pub fn from_diagram(diagram: &LaguerreDiagram) -> Self {
        let n = diagram.n();
        let mut diag = alloc::vec![0.0; n];
        let mut edges = Vec::with_capacity(diagram.adjacency().len());
        for e in diagram.adjacency() {
            let h = e.interface_length / (2.0 * e.seed_distance);
            diag[e.i] += h;
            diag[e.j] += h;
            edges.push((e.i, e.j, h));
        }
        Self { diag, edges }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Matrix entry (O(#edges) scan; intended for tests and diagnostics).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let key = (i.min(j), i.max(j));
        self.edges
            .iter()
            .find(|(a, b, _)| (*a, *b) == key)
            .map_or(0.0, |(_, _, h)| -h)
    }

    /// Dense row-major copy, for spectral checks in tests.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n();
        let mut a = alloc::vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = self.diag[i];
        }
        for &(i, j, h) in &self.edges {
            a[i * n + j] = -h;
            a[j * n + i] = -h;
        }
        a
    }

    /// `out = L[..m, ..m] · x` — the reduced system on the first `m = n−1`
    /// coordinates (the gauge row/column is dropped).
    fn matvec_reduced(&self, x: &[f64], out: &mut [f64]) {
        let m = x.len();
        for i in 0..m {
            out[i] = self.diag[i] * x[i];
        }
        for &(i, j, h) in &self.edges {
            if i < m && j < m {
                out[i] -= h * x[j];
                out[j] -= h * x[i];
            }
        }
    }

    /// Dense copy of the reduced (n−1)×(n−1) block.
    fn to_dense_reduced(&self) -> Vec<f64> {
        let m = self.n() - 1;
        let mut a = alloc::vec![0.0; m * m];
        for i in 0..m {
            a[i * m + i] = self.diag[i];
        }
        for &(i, j, h) in &self.edges {
            if i < m && j < m {
                a[i * m + j] = -h;
                a[j * m + i] = -h;
            }
        }
        a
    }
}

/// The Kantorovich functional and its first two derivatives at `(z, w)`.
#[derive(Clone, Debug)]
pub struct KantorovichState {
    /// `g(w)` — the functional value (concave in `w`).
    pub g_value: f64,
    /// `∂g/∂w_i = m_i − area(C_i)`.
    pub gradient: Vec<f64>,
    /// The **negative** Hessian `−D²g`: a graph Laplacian.
    pub hessian: GraphLaplacian,
}

/// Outcome statistics of a Newton solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    /// Accepted Newton steps.
    pub iterations: usize,
    /// `max_i |m_i − area(C_i)|` at exit.
    pub final_area_error: f64,
    /// Whether the area tolerance was met.
    pub converged: bool,
    /// Total step halvings across all line searches.
    pub damping_backtracks: usize,
}

/// Errors from transport solves.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SdotError {
    /// Newton ran out of iterations or a line search ran out of halvings.
    #[error(
        "transport solve did not converge after {} iterations \
         ({} backtracks, area error {:.3e})",
        .0.iterations, .0.damping_backtracks, .0.final_area_error
    )]
    NonConvergence(SolveReport),
    /// The reduced Laplacian could not be factored/solved — the dual graph
    /// has numerically disconnected (some cell is about to vanish).
    #[error("reduced Laplacian is numerically singular")]
    SingularHessian,
    /// Diagram construction failed.
    #[error(transparent)]
    Laguerre(#[from] LaguerreError),
}

/// Evaluate `g`, its gradient, and the Laplacian at `(measure, w)`.
///
/// # Errors
/// Propagates [`LaguerreError`] from diagram construction.
pub fn kantorovich_eval(
    domain: &ConvexPolygon,
    measure: &DiscreteMeasure,
    w: &WeightVector,
) -> Result<KantorovichState, SdotError> {
    let diagram = build_diagram(domain, measure, w)?;
    Ok(state_from_diagram(&diagram, measure, w))
}

fn state_from_diagram(
    diagram: &LaguerreDiagram,
    measure: &DiscreteMeasure,
    w: &[f64],
) -> KantorovichState {
    let gradient: Vec<f64> = measure
        .masses()
        .iter()
        .zip(diagram.areas())
        .map(|(m, a)| m - a)
        .collect();
    let g_value = diagram.second_moments().iter().sum::<f64>()
        + gradient.iter().zip(w).map(|(g, wi)| g * wi).sum::<f64>();
    KantorovichState {
        g_value,
        gradient,
        hessian: GraphLaplacian::from_diagram(diagram),
    }
}

/// Solve for the optimal weights by damped Newton, starting from `w0`
/// (cold start = zeros).
///
/// On success the returned weights satisfy
/// `max_i |m_i − area(C_i)| < tol · min_j m_j` and `w[N−1] = 0`.
///
/// # Errors
/// - [`SdotError::NonConvergence`] after [`MAX_NEWTON_ITERATIONS`] Newton
///   iterations, or [`MAX_BACKTRACKS`] halvings in one line search, or an
///   infeasible start that inflation cannot repair.
/// - [`SdotError::SingularHessian`] if the reduced Laplacian cannot be
///   solved.
/// - Propagated [`LaguerreError::CoincidentSeeds`].
///
/// # Panics
/// If `tol ≤ 0`, or the measure's total mass does not match `area(Ω)`
/// within [`MASS_SUM_ABS`] · max(1, area(Ω)) — those are caller bugs:
/// no weight vector can balance areas against a mismatched total.
pub fn solve_weights(
    domain: &ConvexPolygon,
    measure: &DiscreteMeasure,
    w0: &WeightVector,
    tol: f64,
) -> Result<(WeightVector, SolveReport), SdotError> {
    assert!(tol > 0.0, "solve_weights needs tol > 0, got {tol}");
    let area = domain.area();
    let mass_defect = (measure.total_mass() - area).abs();
    assert!(
        mass_defect <= MASS_SUM_ABS * area.max(1.0),
        "total mass {} does not match domain area {} (defect {:.3e})",
        measure.total_mass(),
        area,
        mass_defect
    );

    let n = measure.n();
    let threshold = tol * measure.min_mass();
    let mut report = SolveReport {
        iterations: 0,
        final_area_error: f64::INFINITY,
        converged: false,
        damping_backtracks: 0,
    };

    // Feasible start: all cells must be nonempty for ε₀ > 0.
    let (mut w, mut diagram) = feasible_start(domain, measure, w0)?;
    let eps0 = 0.5
        * measure
            .min_mass()
            .min(diagram.areas().iter().copied().fold(f64::INFINITY, f64::min));

    let mut gradient: Vec<f64> = grad(measure, &diagram);
    let mut err = linf(&gradient);
    let mut gnorm = l2(&gradient);

    for _ in 0..MAX_NEWTON_ITERATIONS {
        report.final_area_error = err;
        if err < threshold {
            report.converged = true;
            return Ok((WeightVector::from(w), report));
        }
        if n == 1 {
            // The gauge pins w = (0); nothing to optimize, yet the area
            // defect exceeds the tolerance: impossible request.
            return Err(SdotError::NonConvergence(report));
        }

        // Newton direction: L d = ∇g on the reduced system, d[n−1] = 0.
        let laplacian = GraphLaplacian::from_diagram(&diagram);
        let mut d = alloc::vec![0.0; n];
        solve_laplacian(&laplacian, &gradient[..n - 1], &mut d[..n - 1])?;

        // Kitagawa–Mérigot damping: halve t until the trial keeps every
        // area ≥ ε₀ and shrinks ‖∇g‖₂ by (1 − t/2).
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = w.iter().zip(&d).map(|(wi, di)| wi + t * di).collect();
            let trial_diagram = build_diagram(domain, measure, &trial.clone().into())?;
            let min_area = trial_diagram
                .areas()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            let trial_grad = grad(measure, &trial_diagram);
            let trial_gnorm = l2(&trial_grad);
            if min_area >= eps0 && trial_gnorm <= (1.0 - 0.5 * t) * gnorm {
                w = trial;
                diagram = trial_diagram;
                gradient = trial_grad;
                gnorm = trial_gnorm;
                err = linf(&gradient);
                accepted = true;
                break;
            }
            t *= 0.5;
            report.damping_backtracks += 1;
        }
        if !accepted {
            report.final_area_error = err;
            return Err(SdotError::NonConvergence(report));
        }
        report.iterations += 1;
    }

    report.final_area_error = err;
    if err < threshold {
        report.converged = true;
        return Ok((WeightVector::from(w), report));
    }
    Err(SdotError::NonConvergence(report))
}

/// Solve weights from a warm start and return the optimal-cell centroids
/// together with the solved weights (for reuse as the next warm start).
///
/// # Errors
/// As [`solve_weights`].
pub fn optimal_centroids(
    domain: &ConvexPolygon,
    measure: &DiscreteMeasure,
    warm: &WeightVector,
    tol: f64,
) -> Result<(Vec<Point2>, WeightVector), SdotError> {
    let (w, _) = solve_weights(domain, measure, warm, tol)?;
    let diagram = build_diagram(domain, measure, &w)?;
    Ok((diagram.centroids().to_vec(), w))
}

/// Squared 2-Wasserstein distance between Lebesgue measure on Ω and the
/// discrete measure: `Σ_i ∫_{C_i} |x − z_i|² dx`.
///
/// Meaningful only when `diagram` was built at the optimal weights for
/// `measure` (so that `area(C_i) = m_i`); this function just sums the
/// stored second moments.
///
/// # Panics
/// If the diagram and measure disagree on N.
pub fn transport_cost(diagram: &LaguerreDiagram, measure: &DiscreteMeasure) -> f64 {
    assert_eq!(diagram.n(), measure.n(), "diagram/measure size mismatch");
    diagram.second_moments().iter().sum()
}

/// The conserved energy of the 2-D flow: `½ · transport_cost`.
///
/// Same precondition as [`transport_cost`].
pub fn discrete_energy(diagram: &LaguerreDiagram, measure: &DiscreteMeasure) -> f64 {
    0.5 * transport_cost(diagram, measure)
}

fn grad(measure: &DiscreteMeasure, diagram: &LaguerreDiagram) -> Vec<f64> {
    measure
        .masses()
        .iter()
        .zip(diagram.areas())
        .map(|(m, a)| m - a)
        .collect()
}

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Produce a start `(w, diagram)` with every cell nonempty, gauge-fixed to
/// `w[N−1] = 0`.
///
/// Ladder:
/// 1. the given `w0` (shifted into gauge);
/// 2. if that leaves empty cells, `w_i = |z_i − proj_Ω(z_i)|²`, which
///    re-inflates cells of seeds that wandered far from Ω;
/// 3. a bump loop: for each still-empty cell, raise `w_i` until the cell
///    owns a neighborhood of a probe point just inside Ω nearest its seed.
///    Raising one weight can empty another cell, so iterate (each round
///    rebuilds the diagram) up to [`MAX_FEASIBILITY_ROUNDS`] times.
fn feasible_start(
    domain: &ConvexPolygon,
    measure: &DiscreteMeasure,
    w0: &WeightVector,
) -> Result<(Vec<f64>, LaguerreDiagram), SdotError> {
    let n = measure.n();
    assert_eq!(w0.len(), n, "warm-start length {} != seed count {n}", w0.len());
    let gauge = w0[n - 1];
    let mut w: Vec<f64> = w0.iter().map(|x| x - gauge).collect();

    let mut diagram = build_diagram(domain, measure, &w.clone().into())?;
    if min_of(diagram.areas()) > 0.0 {
        return Ok((w, diagram));
    }

    // Step 2: projection weights.
    let seeds = measure.seeds();
    w = seeds
        .iter()
        .map(|&z| {
            let d = domain.distance_to(z);
            d * d
        })
        .collect();
    let gauge = w[n - 1];
    for wi in &mut w {
        *wi -= gauge;
    }
    diagram = build_diagram(domain, measure, &w.clone().into())?;
    if min_of(diagram.areas()) > 0.0 {
        return Ok((w, diagram));
    }

    // Step 3: bump loop. Probe point for seed i: its projection onto Ω
    // pulled slightly toward the domain centroid, so it is interior.
    let diam = domain.diameter();
    let pull = 1e-6 * diam;
    let center = domain.centroid();
    for _ in 0..MAX_FEASIBILITY_ROUNDS {
        let mut bumped = false;
        for i in 0..n {
            if diagram.areas()[i] > 0.0 {
                continue;
            }
            let proj = domain.project(seeds[i]);
            let to_center = center - proj;
            let len = to_center.norm();
            let probe = if len > pull {
                proj + to_center * (pull / len)
            } else {
                center
            };
            // Smallest rival power distance at the probe.
            let rival = (0..n)
                .filter(|&j| j != i)
                .map(|j| (probe - seeds[j]).norm_sq() - w[j])
                .fold(f64::INFINITY, f64::min);
            let own_sq = (probe - seeds[i]).norm_sq();
            let margin = BUMP_MARGIN_REL * (diam * diam + own_sq);
            w[i] = own_sq - rival + margin;
            bumped = true;
        }
        if !bumped {
            return Ok((w, diagram));
        }
        // Re-fix the gauge (bumps may have touched the last entry).
        let gauge = w[n - 1];
        for wi in &mut w {
            *wi -= gauge;
        }
        diagram = build_diagram(domain, measure, &w.clone().into())?;
        if min_of(diagram.areas()) > 0.0 {
            return Ok((w, diagram));
        }
    }
    Err(SdotError::NonConvergence(SolveReport {
        iterations: 0,
        final_area_error: f64::INFINITY,
        converged: false,
        damping_backtracks: 0,
    }))
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Solve the reduced Laplacian system `L̃ x = b`: dense Cholesky up to
/// [`DENSE_SOLVE_MAX`] unknowns, Jacobi-preconditioned conjugate gradient
/// above.
fn solve_laplacian(l: &GraphLaplacian, b: &[f64], x: &mut [f64]) -> Result<(), SdotError> {
    let m = b.len();
    debug_assert_eq!(m + 1, l.n());
    if m == 0 {
        return Ok(());
    }
    if m <= DENSE_SOLVE_MAX {
        let mut a = l.to_dense_reduced();
        x.copy_from_slice(b);
        linalg::cholesky_solve_in_place(&mut a, x).map_err(|_| SdotError::SingularHessian)
    } else {
        linalg::pcg_solve(
            |v, out| l.matvec_reduced(v, out),
            &l.diag[..m],
            b,
            x,
            CG_REL_TOL,
            CG_MAX_ITER_FACTOR * m,
        )
        .map_err(|_| SdotError::SingularHessian)
    }
}

/// Dense symmetric and iterative solvers sized for the Newton step.
/// Hand-rolled because the core crate is `no_std`: the few dozen lines
/// below beat carrying a linear-algebra stack for one SPD solve.
mod linalg {
    use alloc::vec::Vec;

    #[allow(unused_imports)]
    use num_traits::Float;

    use crate::tolerances::CHOLESKY_PIVOT_REL;

    /// In-place Cholesky solve of `A x = b` for symmetric positive
    /// definite `A` (row-major, n×n; only the lower triangle is read).
    /// `b` is overwritten with the solution.
    ///
    /// Fails when a pivot falls below [`CHOLESKY_PIVOT_REL`] times the
    /// largest diagonal entry — the matrix is then semidefinite to
    /// working precision.
    pub(super) fn cholesky_solve_in_place(a: &mut [f64], b: &mut [f64]) -> Result<(), ()> {
        let n = b.len();
        debug_assert_eq!(a.len(), n * n);
        let max_diag = (0..n).fold(0.0_f64, |acc, i| acc.max(a[i * n + i]));
        let floor = CHOLESKY_PIVOT_REL * max_diag;
        // Factor A = L Lᵀ, storing L in the lower triangle.
        for k in 0..n {
            let mut pivot = a[k * n + k];
            for p in 0..k {
                pivot -= a[k * n + p] * a[k * n + p];
            }
            if !(pivot > floor) {
                return Err(());
            }
            let lkk = pivot.sqrt();
            a[k * n + k] = lkk;
            for i in k + 1..n {
                let mut v = a[i * n + k];
                for p in 0..k {
                    v -= a[i * n + p] * a[k * n + p];
                }
                a[i * n + k] = v / lkk;
            }
        }
        // Forward substitution L y = b.
        for i in 0..n {
            let mut v = b[i];
            for p in 0..i {
                v -= a[i * n + p] * b[p];
            }
            b[i] = v / a[i * n + i];
        }
        // Back substitution Lᵀ x = y.
        for i in (0..n).rev() {
            let mut v = b[i];
            for p in i + 1..n {
                v -= a[p * n + i] * b[p];
            }
            b[i] = v / a[i * n + i];
        }
        Ok(())
    }

    /// Jacobi-preconditioned conjugate gradient for SPD systems given as a
    /// matvec. Converges when `‖r‖ ≤ rel_tol · ‖b‖`; errs on breakdown
    /// (`pᵀAp ≤ 0`, impossible for SPD up to rounding) or iteration cap.
    pub(super) fn pcg_solve(
        matvec: impl Fn(&[f64], &mut [f64]),
        diag: &[f64],
        b: &[f64],
        x: &mut [f64],
        rel_tol: f64,
        max_iter: usize,
    ) -> Result<(), ()> {
        let n = b.len();
        for xi in x.iter_mut() {
            *xi = 0.0;
        }
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok(());
        }
        let inv_diag: Vec<f64> = diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect();
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
        let mut p = z.clone();
        let mut rz: f64 = dot(&r, &z);
        let mut ap = alloc::vec![0.0; n];
        for _ in 0..max_iter {
            matvec(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(());
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm(&r) <= rel_tol * bnorm {
                return Ok(());
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(())
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn norm(a: &[f64]) -> f64 {
        dot(a, a).sqrt()
    }

    #[cfg(test)]
    mod tests {
        use super::*;
        use alloc::vec;

        #[test]
        fn cholesky_solves_spd_system() {
            // A = [[4,2,0],[2,5,1],[0,1,3]] (SPD), b = A·(1,−2,3).
            let mut a = vec![4.0, 2.0, 0.0, 2.0, 5.0, 1.0, 0.0, 1.0, 3.0];
            let mut b = vec![0.0, -5.0, 7.0];
            cholesky_solve_in_place(&mut a, &mut b).expect("SPD");
            for (got, want) in b.iter().zip([1.0, -2.0, 3.0]) {
                assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
            }
        }

        #[test]
        fn cholesky_rejects_singular() {
            // Rank-1 matrix.
            let mut a = vec![1.0, 1.0, 1.0, 1.0];
            let mut b = vec![1.0, 1.0];
            assert!(cholesky_solve_in_place(&mut a, &mut b).is_err());
        }

        #[test]
        fn pcg_matches_cholesky() {
            // Same SPD system through both solvers.
            let a = [4.0, 2.0, 0.0, 2.0, 5.0, 1.0, 0.0, 1.0, 3.0];
            let b = [0.0, -5.0, 7.0];
            let diag = [4.0, 5.0, 3.0];
            let mut x = [0.0; 3];
            pcg_solve(
                |v, out| {
                    for i in 0..3 {
                        out[i] = (0..3).map(|j| a[i * 3 + j] * v[j]).sum();
                    }
                },
                &diag,
                &b,
                &mut x,
                1e-14,
                100,
            )
            .expect("converges");
            for (got, want) in x.iter().zip([1.0, -2.0, 3.0]) {
                assert!((got - want).abs() < 1e-10, "got {got}, want {want}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::square(0.0, 1.0)
    }

    fn two_seeds(masses: (f64, f64)) -> DiscreteMeasure {
        DiscreteMeasure::new(
            vec![Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)],
            vec![masses.0, masses.1],
        )
        .expect("valid measure")
    }

    #[test]
    fn symmetric_config_has_zero_gradient() {
        let st = kantorovich_eval(&unit_square(), &two_seeds((0.5, 0.5)), &WeightVector::zeros(2))
            .expect("evaluates");
        assert_eq!(st.gradient, vec![0.0, 0.0]);
    }

    #[test]
    fn unbalanced_masses_show_in_gradient() {
        // Areas at w=0 stay (0.5, 0.5) by symmetry, so the gradient is
        // masses − areas = (−0.25, 0.25).
        let st = kantorovich_eval(&unit_square(), &two_seeds((0.25, 0.75)), &WeightVector::zeros(2))
            .expect("evaluates");
        assert!((st.gradient[0] + 0.25).abs() < 1e-15);
        assert!((st.gradient[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_seed_hessian_is_unit_laplacian() {
        // Interface length 1, seed distance 0.5 → h = 1/(2·0.5) = 1.
        let st = kantorovich_eval(&unit_square(), &two_seeds((0.5, 0.5)), &WeightVector::zeros(2))
            .expect("evaluates");
        let l = st.hessian.to_dense();
        let want = [1.0, -1.0, -1.0, 1.0];
        for (got, want) in l.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "Laplacian entry {got} vs {want}");
        }
    }

    #[test]
    fn g_value_at_zero_weights_is_transport_term() {
        // g(0) = Σ second moments: two 0.5×1 rectangles about their seeds,
        // each 0.5·(0.25+1)/12 = 5/96.
        let st = kantorovich_eval(&unit_square(), &two_seeds((0.5, 0.5)), &WeightVector::zeros(2))
            .expect("evaluates");
        let want = 2.0 * (0.5 * 1.25 / 12.0);
        assert!(
            (st.g_value - want).abs() < 1e-15,
            "g(0) = {}, want {want}",
            st.g_value
        );
    }

    #[test]
    fn laplacian_invariants_on_random_config() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let domain = unit_square();
        let n = 24;
        let seeds: Vec<Point2> = (0..n)
            .map(|_| Point2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
            .collect();
        let measure = DiscreteMeasure::uniform(seeds, 1.0).expect("valid");
        let st = kantorovich_eval(&domain, &measure, &WeightVector::zeros(n)).expect("evaluates");
        let a = st.hessian.to_dense();
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| a[i * n + j]).sum();
            assert!(
                row_sum.abs() < 1e-10,
                "row {i} sums to {row_sum}, not 0"
            );
            for j in 0..n {
                assert_eq!(a[i * n + j], a[j * n + i], "asymmetric at ({i},{j})");
                if i != j {
                    assert!(a[i * n + j] <= 0.0, "positive off-diagonal at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn solve_two_seed_unbalanced() {
        let (w, report) = solve_weights(
            &unit_square(),
            &two_seeds((0.25, 0.75)),
            &WeightVector::zeros(2),
            1e-8,
        )
        .expect("converges");
        assert!(report.converged);
        assert_eq!(w[1], 0.0, "gauge must pin the last weight to exactly 0");
        // Cut at x = 0.25 needs w₀ − w₁ = −0.5·… : x = 0.5 + (w₀−w₁) here,
        // so w₀ = −0.25.
        assert!(
            (w[0] + 0.25).abs() < 1e-6,
            "solved weight {} (want −0.25)",
            w[0]
        );
        // One Newton step suffices: the area is an affine function of the
        // cut position here, and the Hessian is exact.
        assert!(report.iterations <= 2, "took {} iterations", report.iterations);
        assert!(report.final_area_error < 1e-8 * 0.25);
    }

    #[test]
    fn solve_grid_seeds_is_instant() {
        // A 4×4 uniform grid with uniform masses is already balanced at
        // w = 0: the solver must accept the start without iterating.
        let mut seeds = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                seeds.push(Point2::new(
                    (f64::from(i) + 0.5) / 4.0,
                    (f64::from(j) + 0.5) / 4.0,
                ));
            }
        }
        let measure = DiscreteMeasure::uniform(seeds, 1.0).expect("valid");
        let (w, report) = solve_weights(&unit_square(), &measure, &WeightVector::zeros(16), 1e-8)
            .expect("converges");
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        assert!(w.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn solve_single_seed() {
        let measure = DiscreteMeasure::uniform(vec![Point2::new(0.3, 0.4)], 1.0).expect("valid");
        let (w, report) = solve_weights(
            &unit_square(),
            &measure,
            &WeightVector::from(vec![17.0]),
            1e-6,
        )
        .expect("converges");
        assert_eq!(w.as_slice(), &[0.0]);
        assert_eq!(report.iterations, 0);
        assert!(report.converged);
    }

    #[test]
    fn solve_with_far_away_seed_needs_inflation() {
        // Zero weights leave the far seed's cell empty; the feasibility
        // ladder must rescue the start and the solve must still converge.
        let measure = DiscreteMeasure::new(
            vec![
                Point2::new(0.4, 0.5),
                Point2::new(0.6, 0.5),
                Point2::new(3.0, 0.5),
            ],
            vec![0.4, 0.4, 0.2],
        )
        .expect("valid");
        let (w, report) = solve_weights(&unit_square(), &measure, &WeightVector::zeros(3), 1e-7)
            .expect("converges");
        assert!(report.converged, "report: {report:?}");
        let d = build_diagram(&unit_square(), &measure, &w).expect("builds");
        for (i, (&a, &m)) in d.areas().iter().zip(measure.masses()).enumerate() {
            assert!(
                (a - m).abs() < 1e-7 * 0.2,
                "cell {i}: area {a} vs mass {m}"
            );
        }
    }

    #[test]
    fn optimal_centroids_two_seed() {
        // Optimal cells are [0, 0.25]×[0,1] and [0.25, 1]×[0,1]; their
        // centroids sit at x = 0.125 and x = 0.625.
        let (centroids, w) = optimal_centroids(
            &unit_square(),
            &two_seeds((0.25, 0.75)),
            &WeightVector::zeros(2),
            1e-8,
        )
        .expect("converges");
        assert!((centroids[0] - Point2::new(0.125, 0.5)).norm() < 1e-6);
        assert!((centroids[1] - Point2::new(0.625, 0.5)).norm() < 1e-6);
        assert_eq!(w[1], 0.0);
    }

    #[test]
    fn optimal_centroids_single_seed_is_domain_centroid() {
        let measure = DiscreteMeasure::uniform(vec![Point2::new(0.9, 0.1)], 1.0).expect("valid");
        let (centroids, _) =
            optimal_centroids(&unit_square(), &measure, &WeightVector::zeros(1), 1e-6)
                .expect("converges");
        assert_eq!(centroids[0], unit_square().centroid());
    }

    #[test]
    fn transport_cost_and_energy_examples() {
        // Symmetric two-seed at w = 0: two rectangle moments.
        let measure = two_seeds((0.5, 0.5));
        let d = build_diagram(&unit_square(), &measure, &WeightVector::zeros(2)).expect("builds");
        let cost = transport_cost(&d, &measure);
        let want = 2.0 * (0.5 * 1.25 / 12.0);
        assert!((cost - want).abs() < 1e-15, "cost {cost} vs {want}");
        assert_eq!(discrete_energy(&d, &measure), 0.5 * cost);

        // Single seed at the domain centroid: ∫_{[0,1]²}|x−c|² = 1/6.
        let m1 = DiscreteMeasure::uniform(vec![Point2::new(0.5, 0.5)], 1.0).expect("valid");
        let d1 = build_diagram(&unit_square(), &m1, &WeightVector::zeros(1)).expect("builds");
        let c1 = transport_cost(&d1, &m1);
        assert!((c1 - 1.0 / 6.0).abs() < 1e-15, "cost {c1} vs 1/6");
        assert!((discrete_energy(&d1, &m1) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn solver_postcondition_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let domain = unit_square();
        for case in 0..10 {
            let n = rng.random_range(2..=40);
            let seeds: Vec<Point2> = (0..n)
                .map(|_| Point2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
                .collect();
            // Random masses, bounded ratio, rescaled to the domain area.
            let masses: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
            let mut measure = DiscreteMeasure::new(seeds, masses).expect("valid");
            measure.rescale_to(1.0);
            let tol = 1e-7;
            let (w, report) = solve_weights(&domain, &measure, &WeightVector::zeros(n), tol)
                .unwrap_or_else(|e| panic!("case {case} failed: {e}"));
            assert!(report.converged);
            assert_eq!(w[n - 1], 0.0);
            assert!(
                report.final_area_error < tol * measure.min_mass(),
                "case {case}: error {} vs {}",
                report.final_area_error,
                tol * measure.min_mass()
            );
        }
    }
}
