//! Sparse LU, preconditioned conjugate gradients and Newton-Raphson with
//! backtracking.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::{norm2, norm_inf, CscMatrix};

/// Column ordering used before factorization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Ordering {
    #[default]
    Natural,
    /// Reverse Cuthill-McKee.
    Rcm,
    /// Nested dissection on breadth-first level structures.
    NestedDissection,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearSolver {
    SparseLu { ordering: Ordering },
    ConjugateGradient { rtol: f64, max_iters: usize },
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver::SparseLu {
            ordering: Ordering::Natural,
        }
    }
}

/// Partial pivoting threshold: the diagonal is kept while it is at least
/// this fraction of the column maximum.
const PIVOT_THRESHOLD: f64 = 0.1;
const NONE: usize = usize::MAX;

/// LU factors of `P A Q = L U`.
#[derive(Clone, Debug)]
pub struct SparseLu {
    n: usize,
    q: Vec<usize>,
    pinv: Vec<usize>,
    l: CscMatrix,
    u: CscMatrix,
}

/// Depth-first search over the graph of `L` from the nonzeros of `b`;
/// returns the reached rows in topological order. Column `j` of `L` is
/// searched over `lp[j]..lend[j]` only.
fn reach(
    lp: &[usize],
    lend: &[usize],
    li: &[usize],
    pinv: &[usize],
    brows: &[usize],
    mark: &mut [bool],
    stack: &mut Vec<(usize, usize)>,
    out: &mut Vec<usize>,
) {
    out.clear();
    for &start in brows {
        if mark[start] {
            continue;
        }
        mark[start] = true;
        let first = |j: usize| if pinv[j] == NONE { 0 } else { lp[pinv[j]] };
        stack.push((start, first(start)));
        while let Some(&mut (j, ref mut p)) = stack.last_mut() {
            let jj = pinv[j];
            let end = if jj == NONE { 0 } else { lend[jj] };
            let mut pushed = None;
            while *p < end {
                let i = li[*p];
                *p += 1;
                if !mark[i] {
                    mark[i] = true;
                    pushed = Some(i);
                    break;
                }
            }
            match pushed {
                Some(i) => stack.push((i, first(i))),
                None => {
                    stack.pop();
                    out.push(j);
                }
            }
        }
    }
    out.reverse();
    for &i in out.iter() {
        mark[i] = false;
    }
}

impl SparseLu {
    pub fn factor(a: &CscMatrix, ordering: Ordering) -> Result<Self> {
        a.check_square(a.nrows)?;
        let n = a.ncols;
        let q = order(a, ordering);
        let mut lp = vec![0usize];
        let mut li: Vec<usize> = Vec::new();
        let mut lx: Vec<f64> = Vec::new();
        let mut up = vec![0usize];
        let mut ui: Vec<usize> = Vec::new();
        let mut ux: Vec<f64> = Vec::new();
        let mut pinv = vec![NONE; n];
        let mut x = vec![0.0; n];
        let mut mark = vec![false; n];
        let mut stack = Vec::new();
        let mut topo = Vec::new();
        let mut lend: Vec<usize> = Vec::with_capacity(n);
        let mut pruned = vec![false; n];

        for (k, &col) in q.iter().enumerate() {
            let (brows, bvals) = a.col(col);
            reach(&lp, &lend, &li, &pinv, brows, &mut mark, &mut stack, &mut topo);
            for (&i, &v) in brows.iter().zip(bvals) {
                x[i] = v;
            }
            for &j in &topo {
                let jj = pinv[j];
                if jj == NONE {
                    continue;
                }
                let xj = x[j];
                if xj == 0.0 {
                    continue;
                }
                // first entry of every L column is its unit diagonal
                let r = lp[jj] + 1..lp[jj + 1];
                for (&i, &l) in li[r.clone()].iter().zip(&lx[r]) {
                    x[i] -= l * xj;
                }
            }
            let mut ipiv = NONE;
            let mut amax = -1.0;
            for &i in &topo {
                if pinv[i] == NONE {
                    let t = x[i].abs();
                    if t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    ui.push(pinv[i]);
                    ux.push(x[i]);
                }
            }
            if ipiv == NONE || amax <= 0.0 || !amax.is_finite() {
                return Err(Error::Singular { pivot: k });
            }
            if pinv[col] == NONE && x[col].abs() >= PIVOT_THRESHOLD * amax {
                ipiv = col;
            }
            let piv = x[ipiv];
            ui.push(k);
            ux.push(piv);
            up.push(ui.len());
            pinv[ipiv] = k;
            li.push(ipiv);
            lx.push(1.0);
            for &i in &topo {
                if pinv[i] == NONE {
                    li.push(i);
                    lx.push(x[i] / piv);
                }
                x[i] = 0.0;
            }
            lp.push(li.len());
            lend.push(li.len());
            // symmetric pruning: a column of L holding the new pivot row only
            // needs its already pivotal rows for later searches
            for &j in &topo {
                let jj = pinv[j];
                if jj >= k || pruned[jj] {
                    continue;
                }
                let r = lp[jj] + 1..lp[jj + 1];
                if !li[r.clone()].contains(&ipiv) {
                    continue;
                }
                let (mut head, mut tail) = (r.start, r.end);
                while head < tail {
                    if pinv[li[head]] != NONE {
                        head += 1;
                    } else {
                        tail -= 1;
                        li.swap(head, tail);
                        lx.swap(head, tail);
                    }
                }
                lend[jj] = tail;
                pruned[jj] = true;
            }
        }
        for r in li.iter_mut() {
            *r = pinv[*r];
        }
        let l = sorted(CscMatrix {
            nrows: n,
            ncols: n,
            colptr: lp,
            rowind: li,
            values: lx,
        });
        let u = sorted(CscMatrix {
            nrows: n,
            ncols: n,
            colptr: up,
            rowind: ui,
            values: ux,
        });
        Ok(SparseLu { n, q, pinv, l, u })
    }

    pub fn nnz(&self) -> usize {
        self.l.nnz() + self.u.nnz()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.n
            )));
        }
        let mut y = vec![0.0; self.n];
        for (i, v) in b.iter().enumerate() {
            y[self.pinv[i]] = *v;
        }
        // L y = P b, unit lower triangular, diagonal stored first
        for j in 0..self.n {
            let yj = y[j];
            if yj == 0.0 {
                continue;
            }
            for p in self.l.colptr[j] + 1..self.l.colptr[j + 1] {
                y[self.l.rowind[p]] -= self.l.values[p] * yj;
            }
        }
        // U z = y, diagonal stored last
        for j in (0..self.n).rev() {
            let end = self.u.colptr[j + 1] - 1;
            y[j] /= self.u.values[end];
            let yj = y[j];
            if yj == 0.0 {
                continue;
            }
            for p in self.u.colptr[j]..end {
                y[self.u.rowind[p]] -= self.u.values[p] * yj;
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &c) in self.q.iter().enumerate() {
            x[c] = y[k];
        }
        Ok(x)
    }
}

/// Sorts row indices within columns, keeping the diagonal where the solves
/// expect it (first in `L`, last in `U`) since it is the smallest resp.
/// largest index of its column.
fn sorted(mut m: CscMatrix) -> CscMatrix {
    for j in 0..m.ncols {
        let r = m.colptr[j]..m.colptr[j + 1];
        let mut pairs: Vec<(usize, f64)> = m.rowind[r.clone()]
            .iter()
            .copied()
            .zip(m.values[r.clone()].iter().copied())
            .collect();
        pairs.sort_by_key(|p| p.0);
        for (k, (i, v)) in pairs.into_iter().enumerate() {
            m.rowind[r.start + k] = i;
            m.values[r.start + k] = v;
        }
    }
    m
}

/// Column permutation for `ordering`.
pub fn order(a: &CscMatrix, ordering: Ordering) -> Vec<usize> {
    match ordering {
        Ordering::Natural => (0..a.ncols).collect(),
        Ordering::Rcm => rcm(&a.symmetric_adjacency()),
        Ordering::NestedDissection => nested_dissection(&a.symmetric_adjacency()),
    }
}

/// Breadth-first levels from `start` inside the nodes with `part[v] == tag`.
fn levels(adj: &[Vec<usize>], part: &[u32], tag: u32, start: usize, level: &mut [usize]) -> Vec<usize> {
    let mut order = vec![start];
    level[start] = 0;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &w in &adj[v] {
            if part[w] == tag && level[w] == NONE {
                level[w] = level[v] + 1;
                order.push(w);
            }
        }
    }
    order
}

/// Pseudo-peripheral node of the component of `start` (George-Liu).
fn peripheral(adj: &[Vec<usize>], part: &[u32], tag: u32, start: usize, level: &mut [usize]) -> usize {
    let mut s = start;
    let mut ecc = 0;
    loop {
        let ord = levels(adj, part, tag, s, level);
        let last = level[*ord.last().unwrap()];
        let cand = ord
            .iter()
            .copied()
            .filter(|&v| level[v] == last)
            .min_by_key(|&v| adj[v].len())
            .unwrap();
        for &v in &ord {
            level[v] = NONE;
        }
        if last <= ecc {
            return s;
        }
        ecc = last;
        s = cand;
    }
}

fn rcm(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let part = vec![0u32; n];
    let mut level = vec![NONE; n];
    let mut done = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        if done[s] {
            continue;
        }
        let p = peripheral(adj, &part, 0, s, &mut level);
        let mut queue = VecDeque::from([p]);
        done[p] = true;
        while let Some(v) = queue.pop_front() {
            out.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !done[w]).collect();
            nb.sort_by_key(|&w| (adj[w].len(), w));
            for w in nb {
                done[w] = true;
                queue.push_back(w);
            }
        }
    }
    out.reverse();
    out
}

fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut part = vec![0u32; n];
    let mut level = vec![NONE; n];
    let mut next_tag = 1u32;
    let mut out = Vec::with_capacity(n);
    // explicit stack of (nodes, tag); separators are emitted after both halves
    enum Job {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut jobs = vec![Job::Split((0..n).collect())];
    while let Some(job) = jobs.pop() {
        let nodes = match job {
            Job::Emit(v) => {
                out.extend(v);
                continue;
            }
            Job::Split(v) => v,
        };
        if nodes.len() <= 64 {
            out.extend(nodes);
            continue;
        }
        let tag = next_tag;
        next_tag += 1;
        for &v in &nodes {
            part[v] = tag;
        }
        let p = peripheral(adj, &part, tag, nodes[0], &mut level);
        let ord = levels(adj, &part, tag, p, &mut level);
        let depth = level[*ord.last().unwrap()];
        if ord.len() < nodes.len() {
            // disconnected: split off this component
            let rest: Vec<usize> = nodes.iter().copied().filter(|&v| level[v] == NONE).collect();
            for &v in &ord {
                level[v] = NONE;
            }
            jobs.push(Job::Split(rest));
            jobs.push(Job::Split(ord));
            continue;
        }
        if depth < 2 {
            for &v in &ord {
                level[v] = NONE;
            }
            out.extend(ord);
            continue;
        }
        let half = ord.len() / 2;
        let mid = level[ord[half]].clamp(1, depth - 1);
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut sep = Vec::new();
        for &v in &ord {
            let l = level[v];
            if l < mid {
                a.push(v);
            } else if l > mid {
                b.push(v);
            } else if adj[v].iter().any(|&w| part[w] == tag && level[w] == mid + 1) {
                sep.push(v);
            } else {
                a.push(v);
            }
        }
        for &v in &ord {
            level[v] = NONE;
        }
        jobs.push(Job::Emit(sep));
        jobs.push(Job::Split(b));
        jobs.push(Job::Split(a));
    }
    out
}

/// Jacobi-preconditioned conjugate gradients. Refuses matrices that are
/// not symmetric or have a non-positive diagonal.
pub fn conjugate_gradient(a: &CscMatrix, b: &[f64], rtol: f64, max_iters: usize) -> Result<Vec<f64>> {
    a.check_square(b.len())?;
    let asym = a.asymmetry();
    if asym > 1e-10 {
        return Err(Error::NotSpd(format!("relative asymmetry {asym:e}")));
    }
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|d| *d <= 0.0) {
        return Err(Error::NotSpd(format!("diagonal entry {i} is {}", diag[i])));
    }
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..max_iters {
        let ap = a.matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::NotSpd("non-positive curvature in conjugate gradients".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= rtol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::IterationLimit {
        max_iters,
        residual: norm2(&r) / bnorm,
    })
}

/// Solves `A x = b`. The LU path does two steps of iterative refinement.
pub fn solve_linear(a: &CscMatrix, b: &[f64], solver: &LinearSolver) -> Result<Vec<f64>> {
    a.check_square(b.len())?;
    match *solver {
        LinearSolver::SparseLu { ordering } => {
            let lu = SparseLu::factor(a, ordering)?;
            let mut x = lu.solve(b)?;
            for _ in 0..2 {
                let ax = a.matvec(&x);
                let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
                if norm_inf(&r) == 0.0 {
                    break;
                }
                let dx = lu.solve(&r)?;
                x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
            }
            Ok(x)
        }
        LinearSolver::ConjugateGradient { rtol, max_iters } => conjugate_gradient(a, b, rtol, max_iters),
    }
}

/// A nonlinear algebraic system `r(x) = 0`.
pub trait NonlinearSystem {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, x: &[f64]) -> Result<CscMatrix>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Stop when `|r|_inf` drops below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Step shrink factor.
    pub shrink: f64,
    pub max_backtracks: usize,
    pub trace: bool,
    pub linear: LinearSolver,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-8,
            max_iters: 20,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 25,
            trace: false,
            linear: LinearSolver::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonStep {
    pub iter: usize,
    pub residual_inf: f64,
    pub residual_2: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NewtonLog {
    pub steps: Vec<NewtonStep>,
}

impl NewtonLog {
    /// Number of Newton updates taken.
    pub fn iterations(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.residual_inf)
    }
}

fn record(log: &mut NewtonLog, trace: bool, iter: usize, r: &[f64], alpha: f64) {
    let s = NewtonStep {
        iter,
        residual_inf: norm_inf(r),
        residual_2: norm2(r),
        alpha,
    };
    if trace {
        println!(
            "newton iter {:>3}  |r|_inf = {:.6e}  |r|_2 = {:.6e}  alpha = {}",
            s.iter, s.residual_inf, s.residual_2, s.alpha
        );
    }
    log.steps.push(s);
}

/// Newton-Raphson with Armijo backtracking on the 2-norm of the residual.
pub fn solve_newton(
    sys: &dyn NonlinearSystem,
    x0: Vec<f64>,
    opts: &NewtonOptions,
) -> Result<(Vec<f64>, NewtonLog)> {
    let mut x = x0;
    let mut log = NewtonLog::default();
    let mut r = sys.residual(&x)?;
    record(&mut log, opts.trace, 0, &r, 0.0);
    for it in 1..=opts.max_iters {
        if norm_inf(&r) < opts.tol {
            return Ok((x, log));
        }
        let j = sys.jacobian(&x)?;
        let minus_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = solve_linear(&j, &minus_r, &opts.linear)?;
        let f0 = norm2(&r).powi(2);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let xn: Vec<f64> = x.iter().zip(&dx).map(|(x, d)| x + alpha * d).collect();
            let rn = sys.residual(&xn)?;
            let f = norm2(&rn).powi(2);
            if f.is_finite() && f <= (1.0 - 2.0 * opts.armijo * alpha) * f0 {
                accepted = Some((xn, rn));
                break;
            }
            alpha *= opts.shrink;
        }
        let (xn, rn) = accepted.ok_or(Error::LineSearch { iteration: it })?;
        x = xn;
        r = rn;
        record(&mut log, opts.trace, it, &r, alpha);
    }
    if norm_inf(&r) < opts.tol {
        return Ok((x, log));
    }
    Err(Error::NewtonDiverged {
        iterations: opts.max_iters,
        residual: norm_inf(&r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap1d(n: usize) -> CscMatrix {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 2.0;
            if i > 0 {
                d[i * n + i - 1] = -1.0;
                d[(i - 1) * n + i] = -1.0;
            }
        }
        CscMatrix::from_dense(&d, n, n)
    }

    #[test]
    fn identity() {
        let b = vec![1.0, -2.0, 3.5];
        let x = solve_linear(&CscMatrix::identity(3), &b, &LinearSolver::default()).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn two_by_two() {
        let a = CscMatrix::from_dense(&[2.0, 1.0, 1.0, 3.0], 2, 2);
        for o in [Ordering::Natural, Ordering::Rcm, Ordering::NestedDissection] {
            let x = solve_linear(&a, &[3.0, 5.0], &LinearSolver::SparseLu { ordering: o }).unwrap();
            assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        let a = CscMatrix::from_dense(&[0.0, 1.0, 1.0, 0.0], 2, 2);
        let x = solve_linear(&a, &[2.0, 3.0], &LinearSolver::default()).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_reports_pivot() {
        let a = CscMatrix::from_dense(&[1.0, 2.0, 2.0, 4.0], 2, 2);
        assert!(matches!(
            SparseLu::factor(&a, Ordering::Natural),
            Err(Error::Singular { pivot: 1 })
        ));
    }

    #[test]
    fn orderings_are_permutations() {
        let a = lap1d(300);
        for o in [Ordering::Rcm, Ordering::NestedDissection] {
            let mut q = order(&a, o);
            q.sort_unstable();
            assert_eq!(q, (0..300).collect::<Vec<_>>());
        }
    }

    #[test]
    fn cg_matches_lu() {
        let a = lap1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let x1 = conjugate_gradient(&a, &b, 1e-13, 500).unwrap();
        let x2 = solve_linear(&a, &b, &LinearSolver::default()).unwrap();
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_refuses_indefinite() {
        let a = CscMatrix::from_dense(&[1.0, 1.0, 1.0, 0.0], 2, 2);
        assert!(matches!(conjugate_gradient(&a, &[1.0, 1.0], 1e-10, 10), Err(Error::NotSpd(_))));
        let a = CscMatrix::from_dense(&[1.0, 2.0, 0.0, 1.0], 2, 2);
        assert!(matches!(conjugate_gradient(&a, &[1.0, 1.0], 1e-10, 10), Err(Error::NotSpd(_))));
    }

    struct Scalar;

    impl NonlinearSystem for Scalar {
        fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0] * x[0] - 2.0])
        }
        fn jacobian(&self, x: &[f64]) -> Result<CscMatrix> {
            Ok(CscMatrix::from_dense(&[2.0 * x[0]], 1, 1))
        }
    }

    #[test]
    fn newton_sqrt2() {
        let (x, log) = solve_newton(&Scalar, vec![1.0], &NewtonOptions::default()).unwrap();
        assert!((x[0] - 2f64.sqrt()).abs() < 1e-9);
        assert!(log.final_residual() < 1e-8);
        assert!(log.iterations() <= 6);
    }

    #[test]
    fn newton_iteration_limit() {
        let opts = NewtonOptions {
            max_iters: 1,
            ..Default::default()
        };
        assert!(matches!(
            solve_newton(&Scalar, vec![100.0], &opts),
            Err(Error::NewtonDiverged { iterations: 1, .. })
        ));
    }
}
