//! Weak-form terms and their assembly into sparse systems.
//!
//! Integrands are closures evaluated at one quadrature point. They receive
//! one [`ShapeValue`] per field: for a basis function of field `f` only
//! entry `f` is nonzero, for a finite element state every entry holds the
//! value of its field.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fespace::{dirichlet_index, FEFunction, MultiFieldSpace};
use crate::geometry::{Domain, Item, QPoint};
use crate::reffe::{QuadratureRule, ShapeValue};
use crate::solvers::{solve_linear, LinearSolver, NonlinearSystem};
use crate::sparse::{CooMatrix, CscMatrix};
use crate::tensor::Vector;

/// `a(q, u, v)`.
pub type BilinearFn = Arc<dyn Fn(&QPoint, &[ShapeValue], &[ShapeValue]) -> f64 + Send + Sync>;
/// `b(q, v)`.
pub type LinearFn = Arc<dyn Fn(&QPoint, &[ShapeValue]) -> f64 + Send + Sync>;
/// `res(q, uh, v)`.
pub type ResidualFn = Arc<dyn Fn(&QPoint, &[ShapeValue], &[ShapeValue]) -> f64 + Send + Sync>;
/// `jac(q, uh, du, v)`.
pub type JacobianFn = Arc<dyn Fn(&QPoint, &[ShapeValue], &[ShapeValue], &[ShapeValue]) -> f64 + Send + Sync>;
/// `a(q, u, v)` on the skeleton, with both sides of `u` and `v`.
pub type SkeletonFn = Arc<dyn Fn(&QPoint, &Pair, &Pair) -> f64 + Send + Sync>;

/// Values of a field on both sides of an interior facet.
#[derive(Clone, Copy, Debug)]
pub struct Pair<'a> {
    pub plus: &'a [ShapeValue],
    pub minus: &'a [ShapeValue],
}

impl Pair<'_> {
    /// `u+ n+ + u- n-` of scalar field `f`, with `n` the plus normal.
    pub fn jump(&self, f: usize, n: &Vector) -> Vector {
        *n * (self.plus[f].value - self.minus[f].value)
    }

    /// `u+ . n+ + u- . n-` of vector field `f`.
    pub fn jump_normal(&self, f: usize, n: &Vector) -> f64 {
        (self.plus[f].vector - self.minus[f].vector).dot(n)
    }

    /// Mean of the gradient of scalar field `f`.
    pub fn mean_grad(&self, f: usize) -> Vector {
        (self.plus[f].grad + self.minus[f].grad) * 0.5
    }

    pub fn mean_value(&self, f: usize) -> f64 {
        0.5 * (self.plus[f].value + self.minus[f].value)
    }
}

#[derive(Clone)]
enum TermKind {
    Affine(BilinearFn, LinearFn),
    Linear(BilinearFn),
    Source(LinearFn),
    Nonlinear(ResidualFn, JacobianFn),
    Skeleton(SkeletonFn),
}

/// One integral over one domain with one quadrature rule.
#[derive(Clone)]
pub struct Term {
    domain: Domain,
    degree: usize,
    kind: TermKind,
}

impl std::fmt::Debug for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = match self.kind {
            TermKind::Affine(..) => "affine",
            TermKind::Linear(..) => "linear",
            TermKind::Source(..) => "source",
            TermKind::Nonlinear(..) => "nonlinear",
            TermKind::Skeleton(..) => "skeleton",
        };
        write!(f, "Term({k}, {}, degree {})", self.domain.kind_name(), self.degree)
    }
}

fn cell_domain(domain: &Domain) -> Result<()> {
    if domain.is_skeleton() {
        return Err(Error::UnsupportedDomain(
            "skeleton terms take two-sided integrands, use Term::skeleton".into(),
        ));
    }
    Ok(())
}

impl Term {
    /// Contributes `a(u, v)` to the matrix and `b(v)` to the right-hand side.
    pub fn affine(
        domain: impl Into<Domain>,
        degree: usize,
        a: impl Fn(&QPoint, &[ShapeValue], &[ShapeValue]) -> f64 + Send + Sync + 'static,
        b: impl Fn(&QPoint, &[ShapeValue]) -> f64 + Send + Sync + 'static,
    ) -> Result<Term> {
        let domain = domain.into();
        cell_domain(&domain)?;
        Ok(Term {
            domain,
            degree,
            kind: TermKind::Affine(Arc::new(a), Arc::new(b)),
        })
    }

    pub fn linear(
        domain: impl Into<Domain>,
        degree: usize,
        a: impl Fn(&QPoint, &[ShapeValue], &[ShapeValue]) -> f64 + Send + Sync + 'static,
    ) -> Result<Term> {
        let domain = domain.into();
        cell_domain(&domain)?;
        Ok(Term {
            domain,
            degree,
            kind: TermKind::Linear(Arc::new(a)),
        })
    }

    pub fn source(
        domain: impl Into<Domain>,
        degree: usize,
        b: impl Fn(&QPoint, &[ShapeValue]) -> f64 + Send + Sync + 'static,
    ) -> Result<Term> {
        let domain = domain.into();
        if domain.is_skeleton() {
            return Err(Error::UnsupportedDomain(
                "right-hand side terms on the skeleton are not supported".into(),
            ));
        }
        Ok(Term {
            domain,
            degree,
            kind: TermKind::Source(Arc::new(b)),
        })
    }

    pub fn nonlinear(
        domain: impl Into<Domain>,
        degree: usize,
        res: impl Fn(&QPoint, &[ShapeValue], &[ShapeValue]) -> f64 + Send + Sync + 'static,
        jac: impl Fn(&QPoint, &[ShapeValue], &[ShapeValue], &[ShapeValue]) -> f64 + Send + Sync + 'static,
    ) -> Result<Term> {
        let domain = domain.into();
        cell_domain(&domain)?;
        Ok(Term {
            domain,
            degree,
            kind: TermKind::Nonlinear(Arc::new(res), Arc::new(jac)),
        })
    }

    /// Bilinear term on the interior facets.
    pub fn skeleton(
        domain: impl Into<Domain>,
        degree: usize,
        a: impl Fn(&QPoint, &Pair, &Pair) -> f64 + Send + Sync + 'static,
    ) -> Result<Term> {
        let domain = domain.into();
        if !domain.is_skeleton() {
            return Err(Error::UnsupportedDomain(format!(
                "two-sided integrand on a {} domain",
                domain.kind_name()
            )));
        }
        Ok(Term {
            domain,
            degree,
            kind: TermKind::Skeleton(Arc::new(a)),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
}

/// Global position of a local dof.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Glob {
    Free(usize),
    Dir(usize, usize),
}

/// Dof layout and basis values of one item.
struct Local {
    nf: usize,
    globs: Vec<Glob>,
    /// `(side, field, local dof)` of every item dof; side 0 = plus/only.
    who: Vec<(usize, usize, usize)>,
    /// `[point][dof][field]` basis values on the plus (or only) side.
    plus: Vec<ShapeValue>,
    /// Same on the minus side (skeleton only).
    minus: Vec<ShapeValue>,
    npts: usize,
}

impl Local {
    fn ndofs(&self) -> usize {
        self.globs.len()
    }

    fn basis(&self, q: usize, a: usize) -> &[ShapeValue] {
        let n = self.ndofs();
        let s = (q * n + a) * self.nf;
        &self.plus[s..s + self.nf]
    }

    fn basis_minus(&self, q: usize, a: usize) -> &[ShapeValue] {
        let n = self.ndofs();
        let s = (q * n + a) * self.nf;
        &self.minus[s..s + self.nf]
    }
}

fn layout(space: &MultiFieldSpace, cells: &[usize]) -> (Vec<Glob>, Vec<(usize, usize, usize)>) {
    let mut globs = Vec::new();
    let mut who = Vec::new();
    for (side, &c) in cells.iter().enumerate() {
        for (f, fs) in space.fields().iter().enumerate() {
            let off = space.offsets()[f];
            for (l, &id) in fs.space().cell_dofs(c).iter().enumerate() {
                globs.push(match dirichlet_index(id) {
                    None => Glob::Free(off + id as usize),
                    Some(i) => Glob::Dir(f, i),
                });
                who.push((side, f, l));
            }
        }
    }
    (globs, who)
}

fn local(space: &MultiFieldSpace, item: &Item) -> Local {
    let nf = space.num_fields();
    let cells: Vec<usize> = std::iter::once(item.cell).chain(item.minus).collect();
    let (globs, who) = layout(space, &cells);
    let n = globs.len();
    let npts = item.points.len();
    let two = item.minus.is_some();
    let mut plus = vec![ShapeValue::ZERO; npts * n * nf];
    let mut minus = if two { vec![ShapeValue::ZERO; npts * n * nf] } else { Vec::new() };
    let mut buf: Vec<Vec<ShapeValue>> = space
        .fields()
        .iter()
        .map(|f| vec![ShapeValue::ZERO; f.space().num_cell_dofs()])
        .collect();
    for (qi, q) in item.points.iter().enumerate() {
        for (side, at) in std::iter::once(q.at).chain(q.minus).enumerate() {
            for (f, fs) in space.fields().iter().enumerate() {
                fs.space().cell_shapes(at.cell, &at.xi, &mut buf[f]);
            }
            let target = if side == 0 { &mut plus } else { &mut minus };
            for (a, &(s, f, l)) in who.iter().enumerate() {
                if s == side {
                    target[(qi * n + a) * nf + f] = buf[f][l];
                }
            }
        }
    }
    Local {
        nf,
        globs,
        who,
        plus,
        minus,
        npts,
    }
}

/// Values of the state `x` at every point of the item, `[point][field]`,
/// on the plus and minus sides.
fn state(space: &MultiFieldSpace, funcs: &[FEFunction], loc: &Local) -> (Vec<ShapeValue>, Vec<ShapeValue>) {
    let nf = loc.nf;
    let coef: Vec<f64> = loc
        .globs
        .iter()
        .zip(&loc.who)
        .map(|(g, &(_, f, _))| match *g {
            Glob::Free(i) => funcs[f].free[i - space.offsets()[f]],
            Glob::Dir(f, i) => funcs[f].dirichlet[i],
        })
        .collect();
    let mut up = vec![ShapeValue::ZERO; loc.npts * nf];
    let mut um = if loc.minus.is_empty() { Vec::new() } else { vec![ShapeValue::ZERO; loc.npts * nf] };
    for q in 0..loc.npts {
        for (a, &(side, f, _)) in loc.who.iter().enumerate() {
            if side == 0 {
                up[q * nf + f].axpy(coef[a], &loc.basis(q, a)[f]);
            } else {
                um[q * nf + f].axpy(coef[a], &loc.basis_minus(q, a)[f]);
            }
        }
    }
    (up, um)
}

/// What to assemble.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Matrix plus right-hand side with Dirichlet lifting.
    Affine,
    Residual,
    Jacobian,
}

/// Contributions of one chunk of items.
struct Chunk {
    coo: CooMatrix,
    rhs: Vec<(usize, f64)>,
}

fn assemble_items(
    trial: &MultiFieldSpace,
    test: &MultiFieldSpace,
    term: &Term,
    rule: &QuadratureRule,
    items: std::ops::Range<usize>,
    mode: Mode,
    funcs: Option<&[FEFunction]>,
) -> Chunk {
    let n = test.num_free();
    let mut out = Chunk {
        coo: CooMatrix::new(n, trial.num_free()),
        rhs: Vec::new(),
    };
    for it in items {
        let item = term.domain.item(it, rule);
        let lt = local(test, &item);
        // spaces match, so the trial layout is the test layout
        let lu = &lt;
        let (nt, nu) = (lt.ndofs(), lu.ndofs());
        let mut mat = vec![0.0; nt * nu];
        let mut vec_ = vec![0.0; nt];
        let st = funcs.map(|f| state(trial, f, lu));
        let want_mat = mode != Mode::Residual;
        for (qi, q) in item.points.iter().enumerate() {
            let w = q.weight;
            match &term.kind {
                TermKind::Affine(a, _) | TermKind::Linear(a) => {
                    let b = match &term.kind {
                        TermKind::Affine(_, b) => Some(b),
                        _ => None,
                    };
                    for i in 0..nt {
                        let v = lt.basis(qi, i);
                        if want_mat {
                            for j in 0..nu {
                                mat[i * nu + j] += w * a(q, lu.basis(qi, j), v);
                            }
                        }
                        if mode == Mode::Residual {
                            let (up, _) = st.as_ref().unwrap();
                            let u = &up[qi * lu.nf..(qi + 1) * lu.nf];
                            vec_[i] += w * a(q, u, v);
                            if let Some(b) = b {
                                vec_[i] -= w * b(q, v);
                            }
                        } else if mode == Mode::Affine {
                            if let Some(b) = b {
                                vec_[i] += w * b(q, v);
                            }
                        }
                    }
                }
                TermKind::Source(b) => {
                    if mode == Mode::Jacobian {
                        continue;
                    }
                    let sign = if mode == Mode::Residual { -1.0 } else { 1.0 };
                    for i in 0..nt {
                        vec_[i] += sign * w * b(q, lt.basis(qi, i));
                    }
                }
                TermKind::Nonlinear(res, jac) => {
                    let (up, _) = st.as_ref().expect("nonlinear terms need a state");
                    let u = &up[qi * lu.nf..(qi + 1) * lu.nf];
                    for i in 0..nt {
                        let v = lt.basis(qi, i);
                        if mode == Mode::Residual {
                            vec_[i] += w * res(q, u, v);
                        } else {
                            for j in 0..nu {
                                mat[i * nu + j] += w * jac(q, u, lu.basis(qi, j), v);
                            }
                        }
                    }
                }
                TermKind::Skeleton(a) => {
                    let nf_u = lu.nf;
                    for i in 0..nt {
                        let v = Pair {
                            plus: lt.basis(qi, i),
                            minus: lt.basis_minus(qi, i),
                        };
                        if mode == Mode::Residual {
                            let (up, um) = st.as_ref().unwrap();
                            let u = Pair {
                                plus: &up[qi * nf_u..(qi + 1) * nf_u],
                                minus: &um[qi * nf_u..(qi + 1) * nf_u],
                            };
                            vec_[i] += w * a(q, &u, &v);
                        } else {
                            for j in 0..nu {
                                let u = Pair {
                                    plus: lu.basis(qi, j),
                                    minus: lu.basis_minus(qi, j),
                                };
                                mat[i * nu + j] += w * a(q, &u, &v);
                            }
                        }
                    }
                }
            }
        }
        // scatter
        for i in 0..nt {
            let Glob::Free(gi) = lt.globs[i] else { continue };
            let mut r = vec_[i];
            if want_mat {
                for j in 0..nu {
                    let v = mat[i * nu + j];
                    if v == 0.0 {
                        continue;
                    }
                    match lu.globs[j] {
                        Glob::Free(gj) => out.coo.push(gi, gj, v),
                        Glob::Dir(f, d) => {
                            if mode == Mode::Affine {
                                r -= v * trial.field(f).dirichlet_values()[d];
                            }
                        }
                    }
                }
            }
            if r != 0.0 {
                out.rhs.push((gi, r));
            }
        }
    }
    out
}

/// Assembly settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assembler {
    /// Worker threads; items are split into contiguous chunks.
    pub threads: usize,
}

impl Default for Assembler {
    fn default() -> Self {
        Assembler { threads: 1 }
    }
}

fn check_spaces(trial: &MultiFieldSpace, test: &MultiFieldSpace, terms: &[Term]) -> Result<()> {
    if !trial.matches(test) {
        return Err(Error::SpaceMismatch(
            "test space must be built from the trial space fields".into(),
        ));
    }
    for t in terms {
        if !Arc::ptr_eq(t.domain.model(), trial.model()) {
            return Err(Error::DomainMismatch(format!(
                "{} term integrates over another model",
                t.domain.kind_name()
            )));
        }
    }
    Ok(())
}

impl Assembler {
    fn run(
        &self,
        trial: &MultiFieldSpace,
        test: &MultiFieldSpace,
        terms: &[Term],
        mode: Mode,
        funcs: Option<&[FEFunction]>,
    ) -> (CooMatrix, Vec<f64>) {
        let mut coo = CooMatrix::new(test.num_free(), trial.num_free());
        let mut rhs = vec![0.0; test.num_free()];
        for term in terms {
            let rule = term.domain.rule(term.degree);
            let n = term.domain.len();
            let threads = self.threads.max(1).min(n.max(1));
            let chunks: Vec<Chunk> = if threads == 1 {
                vec![assemble_items(trial, test, term, &rule, 0..n, mode, funcs)]
            } else {
                let size = n.div_ceil(threads);
                std::thread::scope(|s| {
                    let hs: Vec<_> = (0..threads)
                        .map(|t| {
                            let r = (t * size).min(n)..((t + 1) * size).min(n);
                            let rule = &rule;
                            s.spawn(move || assemble_items(trial, test, term, rule, r, mode, funcs))
                        })
                        .collect();
                    hs.into_iter().map(|h| h.join().expect("assembly thread panicked")).collect()
                })
            };
            for mut c in chunks {
                coo.append(&mut c.coo);
                for (i, v) in c.rhs {
                    rhs[i] += v;
                }
            }
        }
        (coo, rhs)
    }

    pub fn assemble_affine(
        &self,
        trial: &MultiFieldSpace,
        test: &MultiFieldSpace,
        terms: &[Term],
    ) -> Result<AffineOperator> {
        check_spaces(trial, test, terms)?;
        if terms.iter().any(|t| matches!(t.kind, TermKind::Nonlinear(..))) {
            return Err(Error::Arity("nonlinear term in an affine operator".into()));
        }
        let (coo, rhs) = self.run(trial, test, terms, Mode::Affine, None);
        Ok(AffineOperator {
            trial: trial.clone(),
            matrix: coo.to_csc(),
            rhs,
        })
    }
}

/// `A x = b` on the free dofs.
#[derive(Clone, Debug)]
pub struct AffineOperator {
    pub trial: MultiFieldSpace,
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
}

impl AffineOperator {
    /// Solves and returns the free values.
    pub fn solve_free(&self, solver: &LinearSolver) -> Result<Vec<f64>> {
        solve_linear(&self.matrix, &self.rhs, solver)
    }

    /// Solves and unpacks the solution into one function per field.
    pub fn solve(&self, solver: &LinearSolver) -> Result<Vec<FEFunction>> {
        self.trial.unpack(&self.solve_free(solver)?)
    }
}

pub fn assemble_affine(trial: &MultiFieldSpace, test: &MultiFieldSpace, terms: &[Term]) -> Result<AffineOperator> {
    Assembler::default().assemble_affine(trial, test, terms)
}

/// Residual and Jacobian of a list of terms at a state.
#[derive(Clone, Debug)]
pub struct NonlinearOperator {
    pub trial: MultiFieldSpace,
    pub test: MultiFieldSpace,
    pub terms: Vec<Term>,
    pub assembler: Assembler,
}

impl NonlinearOperator {
    pub fn new(trial: &MultiFieldSpace, test: &MultiFieldSpace, terms: Vec<Term>) -> Result<Self> {
        check_spaces(trial, test, &terms)?;
        Ok(NonlinearOperator {
            trial: trial.clone(),
            test: test.clone(),
            terms,
            assembler: Assembler::default(),
        })
    }

    pub fn with_assembler(mut self, a: Assembler) -> Self {
        self.assembler = a;
        self
    }

    pub fn residual_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, CscMatrix)> {
        Ok((self.residual(x)?, self.jacobian(x)?))
    }
}

impl NonlinearSystem for NonlinearOperator {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let funcs = self.trial.unpack(x)?;
        Ok(self.assembler.run(&self.trial, &self.test, &self.terms, Mode::Residual, Some(&funcs)).1)
    }

    fn jacobian(&self, x: &[f64]) -> Result<CscMatrix> {
        let funcs = self.trial.unpack(x)?;
        Ok(self
            .assembler
            .run(&self.trial, &self.test, &self.terms, Mode::Jacobian, Some(&funcs))
            .0
            .to_csc())
    }
}

/// Largest columnwise mismatch between the analytic Jacobian and forward
/// differences of the residual, relative to `max(1, |J e_j|)`.
pub fn jacobian_fd_error(sys: &dyn NonlinearSystem, x: &[f64], eps: f64) -> Result<f64> {
    let r0 = sys.residual(x)?;
    let j = sys.jacobian(x)?;
    let mut worst: f64 = 0.0;
    let mut xp = x.to_vec();
    for c in 0..x.len() {
        xp[c] = x[c] + eps;
        let r1 = sys.residual(&xp)?;
        xp[c] = x[c];
        let mut col = vec![0.0; r0.len()];
        let (rows, vals) = j.col(c);
        for (i, v) in rows.iter().zip(vals) {
            col[*i] = *v;
        }
        let scale = col.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let err = r0
            .iter()
            .zip(&r1)
            .zip(&col)
            .fold(0.0f64, |m, ((a, b), jc)| m.max(((b - a) / eps - jc).abs()));
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::{scalar_fn, FESpace, SpaceSpec, TrialSpace};
    use crate::geometry::{skeleton_triangulation, triangulation};
    use crate::mesh::DiscreteModel;
    use crate::reffe::{Conformity, Family, ValueKind};

    fn square(n: usize) -> Arc<DiscreteModel> {
        Arc::new(DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[n, n]).unwrap())
    }

    #[test]
    fn penalty_block_for_q0() {
        let m = Arc::new(DiscreteModel::cartesian(&[0.0, 2.0, 0.0, 1.0], &[2, 1]).unwrap());
        let v = FESpace::new(&m, &SpaceSpec::new(Family::QLagrangian, 0, ValueKind::Scalar, Conformity::L2))
            .unwrap();
        let x = MultiFieldSpace::single(TrialSpace::homogeneous(&v));
        let s = skeleton_triangulation(&m).unwrap();
        let (gamma, h) = (3.0, 1.0);
        let t = Term::skeleton(s, 0, move |q, u, v| {
            gamma / h * u.jump(0, &q.normal).dot(&v.jump(0, &q.normal))
        })
        .unwrap();
        let op = assemble_affine(&x, &x.test(), &[t]).unwrap();
        assert_eq!(op.matrix.to_dense(), vec![3.0, -3.0, -3.0, 3.0]);
    }

    #[test]
    fn poisson_patch_test() {
        let m = square(2);
        let all: Vec<u32> = (1..=8).collect();
        let v = FESpace::new(
            &m,
            &SpaceSpec::new(Family::QLagrangian, 1, ValueKind::Scalar, Conformity::H1).dirichlet(all),
        )
        .unwrap();
        let u = TrialSpace::new(&v, &[scalar_fn(|x| x[0])]).unwrap();
        let x = MultiFieldSpace::single(u.clone());
        let t = Term::linear(triangulation(&m), 2, |_, u, v| u[0].grad.dot(&v[0].grad)).unwrap();
        let op = assemble_affine(&x, &x.test(), &[t]).unwrap();
        let sol = op.solve_free(&LinearSolver::default()).unwrap();
        assert_eq!(sol.len(), 1);
        assert!((sol[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn skeleton_term_needs_skeleton() {
        let m = square(2);
        assert!(matches!(
            Term::skeleton(triangulation(&m), 0, |_, _, _| 0.0),
            Err(Error::UnsupportedDomain(_))
        ));
        let s = skeleton_triangulation(&m).unwrap();
        assert!(matches!(Term::source(s, 0, |_, _| 0.0), Err(Error::UnsupportedDomain(_))));
    }

    #[test]
    fn foreign_test_space() {
        let m = square(2);
        let spec = SpaceSpec::new(Family::QLagrangian, 1, ValueKind::Scalar, Conformity::H1);
        let a = MultiFieldSpace::single(TrialSpace::homogeneous(&FESpace::new(&m, &spec).unwrap()));
        let b = MultiFieldSpace::single(TrialSpace::homogeneous(&FESpace::new(&m, &spec).unwrap()));
        let t = Term::linear(triangulation(&m), 2, |_, u, v| u[0].value * v[0].value).unwrap();
        assert!(matches!(assemble_affine(&a, &b, &[t]), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn threads_match_serial() {
        let m = square(6);
        let v = FESpace::new(&m, &SpaceSpec::new(Family::QLagrangian, 2, ValueKind::Scalar, Conformity::H1))
            .unwrap();
        let x = MultiFieldSpace::single(TrialSpace::homogeneous(&v));
        let t = Term::affine(
            triangulation(&m),
            4,
            |_, u, v| u[0].grad.dot(&v[0].grad) + u[0].value * v[0].value,
            |q, v| q.x[0].sin() * v[0].value,
        )
        .unwrap();
        let a = assemble_affine(&x, &x.test(), std::slice::from_ref(&t)).unwrap();
        let b = Assembler { threads: 3 }.assemble_affine(&x, &x.test(), &[t]).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.rhs, b.rhs);
    }
}
