//! Lazy field expressions evaluated point by point on a domain.
//!
//! A [`CellField`] is an expression tree over analytic functions, finite
//! element functions, the physical coordinate and the facet normal. Trees are
//! evaluated at the quadrature points of a [`Domain`] by [`integrate`] and
//! friends.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fespace::{FEFunction, PointFn};
use crate::geometry::{CellPoint, Domain, QPoint, SkeletonTriangulation};
use crate::reffe::{ShapeValue, ValueKind};
use crate::tensor::{Tensor, Value, Vector};

/// A point of evaluation.
#[derive(Clone, Copy, Debug)]
pub struct EvalPoint {
    pub dim: usize,
    pub q: QPoint,
}

type LawFn = Arc<dyn Fn(&Vector, &[Value]) -> Result<Value> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Deriv {
    Value,
    Grad,
    SymGrad,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum UnOp {
    Neg,
    Transpose,
    Trace,
    Norm,
    Sym,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Inner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Plus,
    Minus,
}

enum Node {
    Constant(Value),
    Identity,
    Analytic { f: PointFn, grad: Option<PointFn> },
    Coordinate,
    Normal,
    Fe(Arc<FEFunction>, Deriv),
    Unary(UnOp, CellField),
    Binary(BinOp, CellField, CellField),
    Law(LawFn, Vec<CellField>),
    Restrict(Side, CellField, u64),
    Jump(CellField, u64),
    Mean(CellField, u64),
}

/// A lazily evaluated field.
#[derive(Clone)]
pub struct CellField(Arc<Node>);

impl fmt::Debug for CellField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &*self.0 {
            Node::Constant(v) => return write!(f, "Constant({v:?})"),
            Node::Identity => "Identity",
            Node::Analytic { .. } => "Analytic",
            Node::Coordinate => "Coordinate",
            Node::Normal => "Normal",
            Node::Fe(_, d) => return write!(f, "Fe({d:?})"),
            Node::Unary(op, a) => return write!(f, "{op:?}({a:?})"),
            Node::Binary(op, a, b) => return write!(f, "{op:?}({a:?}, {b:?})"),
            Node::Law(_, args) => return write!(f, "Law({args:?})"),
            Node::Restrict(s, a, _) => return write!(f, "{s:?}({a:?})"),
            Node::Jump(a, _) => return write!(f, "Jump({a:?})"),
            Node::Mean(a, _) => return write!(f, "Mean({a:?})"),
        };
        f.write_str(name)
    }
}

fn node(n: Node) -> CellField {
    CellField(Arc::new(n))
}

fn kind_err(op: &str, a: &Value, b: Option<&Value>) -> Error {
    match b {
        Some(b) => Error::Kind(format!("cannot apply {op} to {} and {}", a.kind_name(), b.kind_name())),
        None => Error::Kind(format!("cannot apply {op} to a {}", a.kind_name())),
    }
}

fn fe_value(f: &FEFunction, d: Deriv, s: &ShapeValue) -> Result<Value> {
    let kind = f.space().reffe().kind();
    Ok(match (kind, d) {
        (ValueKind::Scalar, Deriv::Value) => Value::Scalar(s.value),
        (ValueKind::Scalar, Deriv::Grad) => Value::Vector(s.grad),
        (ValueKind::Vector, Deriv::Value) => Value::Vector(s.vector),
        (ValueKind::Vector, Deriv::Grad) => Value::Tensor(s.jac),
        (ValueKind::Vector, Deriv::SymGrad) => Value::Tensor(s.eps()),
        (ValueKind::Vector, Deriv::Div) => Value::Scalar(s.div),
        (ValueKind::Scalar, _) => {
            return Err(Error::Kind("symmetric gradient and divergence need a vector field".into()))
        }
    })
}

impl CellField {
    pub fn constant(v: impl Into<Value>) -> Self {
        node(Node::Constant(v.into()))
    }

    /// Identity tensor in the dimension of the domain.
    pub fn identity() -> Self {
        node(Node::Identity)
    }

    /// Analytic function of the physical coordinates, without gradient.
    pub fn function(f: PointFn) -> Self {
        node(Node::Analytic { f, grad: None })
    }

    /// Analytic function with a registered gradient.
    pub fn with_gradient(f: PointFn, grad: PointFn) -> Self {
        node(Node::Analytic { f, grad: Some(grad) })
    }

    /// The physical coordinate `x`.
    pub fn coordinate() -> Self {
        node(Node::Coordinate)
    }

    pub fn fe(f: &FEFunction) -> Self {
        node(Node::Fe(Arc::new(f.clone()), Deriv::Value))
    }

    /// Pointwise constitutive law `fn(x, args)`, checked against `arity`.
    pub fn law(
        arity: usize,
        f: impl Fn(&Vector, &[Value]) -> Result<Value> + Send + Sync + 'static,
        args: Vec<CellField>,
    ) -> Result<Self> {
        if args.len() != arity {
            return Err(Error::Arity(format!("law takes {arity} fields, got {}", args.len())));
        }
        Ok(node(Node::Law(Arc::new(f), args)))
    }

    pub fn inner(&self, o: &CellField) -> CellField {
        node(Node::Binary(BinOp::Inner, self.clone(), o.clone()))
    }

    pub fn transpose(&self) -> CellField {
        node(Node::Unary(UnOp::Transpose, self.clone()))
    }

    pub fn trace(&self) -> CellField {
        node(Node::Unary(UnOp::Trace, self.clone()))
    }

    pub fn norm(&self) -> CellField {
        node(Node::Unary(UnOp::Norm, self.clone()))
    }

    pub fn evaluate(&self, p: &EvalPoint) -> Result<Value> {
        match &*self.0 {
            Node::Constant(v) => Ok(*v),
            Node::Identity => Ok(Value::Tensor(Tensor::identity(p.dim))),
            Node::Analytic { f, .. } => Ok(f(&p.q.x)),
            Node::Coordinate => Ok(Value::Vector(p.q.x)),
            Node::Normal => Ok(Value::Vector(p.q.normal)),
            Node::Fe(f, d) => {
                let s = f.evaluate(p.q.at.cell, &p.q.at.xi);
                fe_value(f, *d, &s)
            }
            Node::Unary(op, a) => {
                let v = a.evaluate(p)?;
                match (op, v) {
                    (UnOp::Neg, v) => Ok(v.scale(-1.0)),
                    (UnOp::Norm, v) => Ok(Value::Scalar(v.norm())),
                    (UnOp::Transpose, Value::Tensor(t)) => Ok(Value::Tensor(t.transpose())),
                    (UnOp::Trace, Value::Tensor(t)) => Ok(Value::Scalar(t.trace())),
                    (UnOp::Sym, Value::Tensor(t)) => Ok(Value::Tensor(t.symmetric())),
                    (op, v) => Err(kind_err(&format!("{op:?}").to_lowercase(), &v, None)),
                }
            }
            Node::Binary(op, a, b) => {
                let (x, y) = (a.evaluate(p)?, b.evaluate(p)?);
                binary(*op, &x, &y)
            }
            Node::Law(f, args) => {
                let vals = args.iter().map(|a| a.evaluate(p)).collect::<Result<Vec<_>>>()?;
                f(&p.q.x, &vals)
            }
            Node::Restrict(side, a, _) => a.evaluate(&on_side(p, *side)?),
            Node::Jump(a, _) => {
                let vp = a.evaluate(&on_side(p, Side::Plus)?)?;
                let vm = a.evaluate(&on_side(p, Side::Minus)?)?;
                let n = p.q.normal;
                match (vp, vm) {
                    (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Vector(n * (x - y))),
                    (Value::Vector(x), Value::Vector(y)) => Ok(Value::Scalar((x - y).dot(&n))),
                    (x, _) => Err(kind_err("jump", &x, None)),
                }
            }
            Node::Mean(a, _) => {
                let vp = a.evaluate(&on_side(p, Side::Plus)?)?;
                let vm = a.evaluate(&on_side(p, Side::Minus)?)?;
                vp.try_add(&vm)
                    .map(|v| v.scale(0.5))
                    .ok_or_else(|| kind_err("mean", &vp, Some(&vm)))
            }
        }
    }

    /// Skeleton ids referenced by restrictions, jumps and means.
    fn skeleton_ids(&self, out: &mut Vec<u64>) {
        match &*self.0 {
            Node::Unary(_, a) => a.skeleton_ids(out),
            Node::Binary(_, a, b) => {
                a.skeleton_ids(out);
                b.skeleton_ids(out);
            }
            Node::Law(_, args) => args.iter().for_each(|a| a.skeleton_ids(out)),
            Node::Restrict(_, a, id) | Node::Jump(a, id) | Node::Mean(a, id) => {
                out.push(*id);
                a.skeleton_ids(out);
            }
            _ => {}
        }
    }

    fn check_models(&self, domain: &Domain) -> Result<()> {
        match &*self.0 {
            Node::Fe(f, _) => {
                if !Arc::ptr_eq(f.space().model(), domain.model()) {
                    return Err(Error::DomainMismatch(
                        "finite element function lives on another model".into(),
                    ));
                }
                Ok(())
            }
            Node::Unary(_, a) | Node::Restrict(_, a, _) | Node::Jump(a, _) | Node::Mean(a, _) => {
                a.check_models(domain)
            }
            Node::Binary(_, a, b) => {
                a.check_models(domain)?;
                b.check_models(domain)
            }
            Node::Law(_, args) => args.iter().try_for_each(|a| a.check_models(domain)),
            _ => Ok(()),
        }
    }

    /// Checks that the field can be evaluated on `domain`.
    pub fn check_domain(&self, domain: &Domain) -> Result<()> {
        self.check_models(domain)?;
        let mut ids = Vec::new();
        self.skeleton_ids(&mut ids);
        if ids.is_empty() {
            return Ok(());
        }
        if !domain.is_skeleton() {
            return Err(Error::UnsupportedDomain(format!(
                "skeleton restrictions evaluated on a {} domain",
                domain.kind_name()
            )));
        }
        if let Some(bad) = ids.iter().find(|&&i| i != domain.id()) {
            return Err(Error::DomainMismatch(format!(
                "field restricted to skeleton {bad} integrated on skeleton {}",
                domain.id()
            )));
        }
        Ok(())
    }
}

fn on_side(p: &EvalPoint, side: Side) -> Result<EvalPoint> {
    let minus = p
        .q
        .minus
        .ok_or_else(|| Error::UnsupportedDomain("two-sided values need a skeleton point".into()))?;
    let mut o = *p;
    if side == Side::Minus {
        o.q.at = minus;
        o.q.minus = Some(p.q.at);
        o.q.normal = -p.q.normal;
    }
    Ok(o)
}

fn binary(op: BinOp, x: &Value, y: &Value) -> Result<Value> {
    use Value::*;
    match op {
        BinOp::Add => x.try_add(y).ok_or_else(|| kind_err("+", x, Some(y))),
        BinOp::Sub => x.try_add(&y.scale(-1.0)).ok_or_else(|| kind_err("-", x, Some(y))),
        BinOp::Inner => x.inner(y).map(Scalar).ok_or_else(|| kind_err("inner", x, Some(y))),
        BinOp::Mul => match (x, y) {
            (Scalar(a), v) | (v, Scalar(a)) => Ok(v.scale(*a)),
            (Vector(a), Vector(b)) => Ok(Scalar(a.dot(b))),
            (Tensor(t), Vector(v)) => Ok(Vector(*t * *v)),
            (Tensor(a), Tensor(b)) => Ok(Tensor(*a * *b)),
            _ => Err(kind_err("*", x, Some(y))),
        },
    }
}

impl Add for CellField {
    type Output = CellField;
    fn add(self, o: CellField) -> CellField {
        node(Node::Binary(BinOp::Add, self, o))
    }
}

impl Sub for CellField {
    type Output = CellField;
    fn sub(self, o: CellField) -> CellField {
        node(Node::Binary(BinOp::Sub, self, o))
    }
}

impl Mul for CellField {
    type Output = CellField;
    fn mul(self, o: CellField) -> CellField {
        node(Node::Binary(BinOp::Mul, self, o))
    }
}

impl Mul<CellField> for f64 {
    type Output = CellField;
    fn mul(self, o: CellField) -> CellField {
        CellField::constant(self) * o
    }
}

impl Neg for CellField {
    type Output = CellField;
    fn neg(self) -> CellField {
        node(Node::Unary(UnOp::Neg, self))
    }
}

/// Gradient of a field. Analytic fields need a registered gradient.
pub fn gradient(f: &CellField) -> Result<CellField> {
    match &*f.0 {
        Node::Constant(v) => match v {
            Value::Scalar(_) => Ok(CellField::constant(Vector::ZERO)),
            Value::Vector(_) => Ok(CellField::constant(Tensor::ZERO)),
            Value::Tensor(_) => Err(Error::Kind("gradient of a tensor field".into())),
        },
        Node::Identity => Err(Error::Kind("gradient of a tensor field".into())),
        Node::Analytic { grad, .. } => grad
            .as_ref()
            .map(|g| CellField::function(g.clone()))
            .ok_or(Error::MissingGradient),
        Node::Coordinate => Ok(CellField::identity()),
        Node::Fe(fe, Deriv::Value) => Ok(node(Node::Fe(fe.clone(), Deriv::Grad))),
        Node::Unary(UnOp::Neg, a) => Ok(-gradient(a)?),
        Node::Binary(op @ (BinOp::Add | BinOp::Sub), a, b) => {
            Ok(node(Node::Binary(*op, gradient(a)?, gradient(b)?)))
        }
        Node::Binary(BinOp::Mul, a, b) => match (&*a.0, &*b.0) {
            (Node::Constant(Value::Scalar(_)), _) => Ok(a.clone() * gradient(b)?),
            (_, Node::Constant(Value::Scalar(_))) => Ok(gradient(a)? * b.clone()),
            _ => Err(Error::MissingGradient),
        },
        Node::Restrict(s, a, id) => Ok(node(Node::Restrict(*s, gradient(a)?, *id))),
        _ => Err(Error::MissingGradient),
    }
}

fn is_scalar_fe(f: &CellField) -> bool {
    matches!(&*f.0, Node::Fe(fe, Deriv::Value) if fe.space().reffe().kind() == ValueKind::Scalar)
}

/// Symmetric gradient `(grad u + grad u^T) / 2` of a vector field.
pub fn symmetric_gradient(u: &CellField) -> Result<CellField> {
    match &*u.0 {
        Node::Fe(fe, Deriv::Value) => {
            if is_scalar_fe(u) {
                return Err(Error::Kind("symmetric gradient of a scalar field".into()));
            }
            Ok(node(Node::Fe(fe.clone(), Deriv::SymGrad)))
        }
        _ => Ok(node(Node::Unary(UnOp::Sym, gradient(u)?))),
    }
}

/// Divergence of a vector field.
pub fn divergence(u: &CellField) -> Result<CellField> {
    match &*u.0 {
        Node::Fe(fe, Deriv::Value) => {
            if is_scalar_fe(u) {
                return Err(Error::Kind("divergence of a scalar field".into()));
            }
            Ok(node(Node::Fe(fe.clone(), Deriv::Div)))
        }
        _ => Ok(gradient(u)?.trace()),
    }
}

/// The facet normal of a boundary or skeleton domain.
pub fn normal_vector(domain: &Domain) -> Result<CellField> {
    match domain {
        Domain::Interior(_) => Err(Error::UnsupportedDomain(
            "the interior triangulation has no normal vector".into(),
        )),
        _ => Ok(node(Node::Normal)),
    }
}

/// A field restricted to both sides of a skeleton.
#[derive(Clone, Debug)]
pub struct SkeletonPair {
    pub plus: CellField,
    pub minus: CellField,
    field: CellField,
    skeleton: u64,
}

pub fn restrict(f: &CellField, skeleton: &SkeletonTriangulation) -> SkeletonPair {
    let id = skeleton.id();
    SkeletonPair {
        plus: node(Node::Restrict(Side::Plus, f.clone(), id)),
        minus: node(Node::Restrict(Side::Minus, f.clone(), id)),
        field: f.clone(),
        skeleton: id,
    }
}

/// `v+ n+ + v- n-` (scalar `v`) or `v+ . n+ + v- . n-` (vector `v`).
pub fn jump(pair: &SkeletonPair) -> CellField {
    node(Node::Jump(pair.field.clone(), pair.skeleton))
}

pub fn mean(pair: &SkeletonPair) -> CellField {
    node(Node::Mean(pair.field.clone(), pair.skeleton))
}

/// Per-item integrals of a scalar field over `domain` with a rule of
/// degree `degree`.
pub fn integrate(f: &CellField, domain: &Domain, degree: usize) -> Result<Vec<f64>> {
    f.check_domain(domain)?;
    let rule = domain.rule(degree);
    let dim = domain.model().dim();
    (0..domain.len())
        .map(|i| {
            let item = domain.item(i, &rule);
            let mut s = 0.0;
            for q in &item.points {
                let v = f.evaluate(&EvalPoint { dim, q: *q })?;
                let v = v
                    .as_scalar()
                    .ok_or_else(|| Error::Kind(format!("integrand must be scalar, got a {}", v.kind_name())))?;
                s += q.weight * v;
            }
            Ok(s)
        })
        .collect()
}

pub fn integrate_sum(f: &CellField, domain: &Domain, degree: usize) -> Result<f64> {
    Ok(integrate(f, domain, degree)?.iter().sum())
}

/// Maximum of `|f|` over the quadrature points of `domain`.
pub fn max_abs(f: &CellField, domain: &Domain, degree: usize) -> Result<f64> {
    f.check_domain(domain)?;
    let rule = domain.rule(degree);
    let dim = domain.model().dim();
    let mut m: f64 = 0.0;
    for i in 0..domain.len() {
        for q in &domain.item(i, &rule).points {
            m = m.max(f.evaluate(&EvalPoint { dim, q: *q })?.norm());
        }
    }
    Ok(m)
}

/// `(sqrt(int e.e), sqrt(int e.e + grad e : grad e))`.
pub fn error_norms(e: &CellField, domain: &Domain, degree: usize) -> Result<(f64, f64)> {
    let ge = gradient(e)?;
    let l2 = integrate_sum(&e.inner(e), domain, degree)?;
    let h1 = integrate_sum(&ge.inner(&ge), domain, degree)?;
    Ok((l2.max(0.0).sqrt(), (l2 + h1).max(0.0).sqrt()))
}

/// Evaluates `f` at a cell point of an interior domain.
pub fn evaluate_at(f: &CellField, domain: &Domain, at: CellPoint) -> Result<Value> {
    let map = crate::geometry::cell_map(domain.model(), at.cell);
    let q = QPoint {
        x: map.apply(&at.xi),
        weight: 0.0,
        normal: Vector::ZERO,
        at,
        minus: None,
        h: 0.0,
    };
    f.evaluate(&EvalPoint {
        dim: domain.model().dim(),
        q,
    })
}
