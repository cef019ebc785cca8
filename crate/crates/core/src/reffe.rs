//! Reference elements on the unit cube `[0,1]^d` and Gauss quadrature.

use crate::dense;
use crate::error::{Error, Result};
use crate::mesh::{CubeFaces, Side};
use crate::tensor::{Tensor, Value, Vector};

/// Tensor-product Gauss-Legendre rule on `[0,1]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Total polynomial degree per axis integrated exactly.
    pub degree: usize,
}

/// Gauss-Legendre nodes and weights on `[0,1]`.
pub fn gauss_legendre_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Newton on P_n from the Chebyshev-like initial guess.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { t } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            let dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, t);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let (pn, pm) = if n == 1 { (t, 1.0) } else { (p1, p0) };
        let dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
        // ascending order on [0,1]
        x[n - 1 - i] = 0.5 * (1.0 + t);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Tensor Gauss rule with `degree / 2 + 1` points per axis; `dim` may be 0
/// (a single point of weight one, used for facets of 1D cells).
pub fn gauss_rule(dim: usize, degree: usize) -> QuadratureRule {
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre_1d(n);
    let total = n.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for lin in 0..total {
        let mut p = [0.0; 3];
        let mut wt = 1.0;
        let mut r = lin;
        for slot in p.iter_mut().take(dim) {
            let i = r % n;
            r /= n;
            *slot = x[i];
            wt *= w[i];
        }
        points.push(p);
        weights.push(wt);
    }
    QuadratureRule {
        dim,
        points,
        weights,
        degree: 2 * n - 1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    QLagrangian,
    PLagrangian,
    RaviartThomas,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueKind {
    Scalar,
    Vector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conformity {
    H1,
    L2,
    HDiv,
}

/// Value, gradient and divergence of one field (a shape function or a finite
/// element function) at one point.
///
/// Scalar fields use `value` and `grad`; vector fields use `vector`, `jac`
/// (`jac[i][j] = d v_j / d x_i`) and `div`. Unused slots stay zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ShapeValue {
    pub value: f64,
    pub grad: Vector,
    pub vector: Vector,
    pub jac: Tensor,
    pub div: f64,
}

impl ShapeValue {
    pub const ZERO: ShapeValue = ShapeValue {
        value: 0.0,
        grad: Vector::ZERO,
        vector: Vector::ZERO,
        jac: Tensor::ZERO,
        div: 0.0,
    };

    /// Symmetric gradient of a vector field.
    pub fn eps(&self) -> Tensor {
        self.jac.symmetric()
    }

    /// `self * a + other`, slot by slot.
    pub fn axpy(&mut self, a: f64, o: &ShapeValue) {
        self.value += a * o.value;
        self.grad += o.grad * a;
        self.vector += o.vector * a;
        self.jac += o.jac * a;
        self.div += a * o.div;
    }
}

/// Affine map from the reference cube to an axis-aligned box:
/// `x = offset + diag(scale) xi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub dim: usize,
    pub offset: [f64; 3],
    pub scale: [f64; 3],
}

impl AffineMap {
    pub fn new(offset: &[f64], scale: &[f64]) -> Self {
        let dim = offset.len();
        let mut o = [0.0; 3];
        let mut s = [1.0; 3];
        o[..dim].copy_from_slice(&offset[..dim.min(3)]);
        s[..dim].copy_from_slice(&scale[..dim.min(3)]);
        AffineMap {
            dim,
            offset: o,
            scale: s,
        }
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap {
            dim,
            offset: [0.0; 3],
            scale: [1.0; 3],
        }
    }

    pub fn apply(&self, xi: &[f64; 3]) -> Vector {
        let mut x = Vector::ZERO;
        for a in 0..self.dim {
            x.0[a] = self.offset[a] + self.scale[a] * xi[a];
        }
        x
    }

    pub fn det(&self) -> f64 {
        self.scale[..self.dim].iter().product()
    }

    pub fn jacobian(&self) -> Tensor {
        let mut t = Tensor::ZERO;
        for a in 0..self.dim {
            t.0[a][a] = self.scale[a];
        }
        t
    }
}

/// Contravariant Piola transform of a reference vector value and its
/// divergence: `v = J v_ref / det J`, `div v = div_ref / det J`.
pub fn piola_map(map: &AffineMap, v_ref: Vector, div_ref: f64) -> Result<(Vector, f64)> {
    let det = map.det();
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::Geometry(format!("cell map has Jacobian determinant {det}")));
    }
    Ok(((map.jacobian() * v_ref) * (1.0 / det), div_ref / det))
}

/// A reference element on `[0,1]^d`.
#[derive(Clone, Debug)]
pub struct ReferenceElement {
    family: Family,
    order: usize,
    dim: usize,
    kind: ValueKind,
    conformity: Conformity,
    ncomp: usize,
    /// Lagrangian nodes (one per scalar basis function).
    nodes: Vec<[f64; 3]>,
    /// Owning cube face of every node (Q elements).
    node_owner: Vec<usize>,
    /// Monomial exponents and inverse Vandermonde (P elements).
    exps: Vec<[usize; 3]>,
    coeffs: Vec<f64>,
}

fn lagrange_1d(order: usize, t: f64, m: usize) -> (f64, f64) {
    if order == 0 {
        return (1.0, 0.0);
    }
    let node = |l: usize| l as f64 / order as f64;
    let tm = node(m);
    let mut val = 1.0;
    let mut der = 0.0;
    for l in 0..=order {
        if l == m {
            continue;
        }
        let d = tm - node(l);
        let f = (t - node(l)) / d;
        der = der * f + val / d;
        val *= f;
    }
    (val, der)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn multi_indices_upto(dim: usize, k: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for total in 0..=k {
        let mut rec = |e: [usize; 3]| out.push(e);
        match dim {
            1 => rec([total, 0, 0]),
            2 => {
                for j in 0..=total {
                    rec([total - j, j, 0]);
                }
            }
            3 => {
                for j in 0..=total {
                    for l in 0..=total - j {
                        rec([total - j - l, j, l]);
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    out
}

fn monomial(e: &[usize; 3], x: &[f64; 3], dim: usize) -> (f64, Vector) {
    let mut v = 1.0;
    for a in 0..dim {
        v *= x[a].powi(e[a] as i32);
    }
    let mut g = Vector::ZERO;
    for a in 0..dim {
        if e[a] == 0 {
            continue;
        }
        let mut d = e[a] as f64 * x[a].powi(e[a] as i32 - 1);
        for b in 0..dim {
            if b != a {
                d *= x[b].powi(e[b] as i32);
            }
        }
        g.0[a] = d;
    }
    (v, g)
}

impl ReferenceElement {
    /// Lagrangian element of tensor type (`Q_k`), scalar or vector valued.
    pub fn q_lagrangian(dim: usize, order: usize, kind: ValueKind, conformity: Conformity) -> Result<Self> {
        check_dim(dim)?;
        if conformity == Conformity::HDiv {
            return Err(Error::Incompatible("Q Lagrangian elements are H1 or L2".into()));
        }
        if conformity == Conformity::H1 && order == 0 {
            return Err(Error::Incompatible("H1 Lagrangian elements need order >= 1".into()));
        }
        let cube = CubeFaces::new(dim);
        let n1 = order + 1;
        let total = n1.pow(dim as u32);
        let mut nodes = Vec::with_capacity(total);
        let mut node_owner = Vec::with_capacity(total);
        for lin in 0..total {
            let mut p = [0.0; 3];
            let mut sides = vec![Side::Free; dim];
            let mut r = lin;
            for a in 0..dim {
                let i = r % n1;
                r /= n1;
                p[a] = if order == 0 { 0.5 } else { i as f64 / order as f64 };
                if order > 0 {
                    sides[a] = if i == 0 {
                        Side::Low
                    } else if i == order {
                        Side::High
                    } else {
                        Side::Free
                    };
                }
            }
            nodes.push(p);
            node_owner.push(cube.index_of(&sides));
        }
        Ok(ReferenceElement {
            family: Family::QLagrangian,
            order,
            dim,
            kind,
            conformity,
            ncomp: ncomp(kind, dim),
            nodes,
            node_owner,
            exps: Vec::new(),
            coeffs: Vec::new(),
        })
    }

    /// Discontinuous Lagrangian element spanning full degree `order`.
    ///
    /// Order 1 places its nodes at the cell center and a quarter cell along
    /// each axis; higher orders use the lattice `0.15 + 0.7 m / order`,
    /// `|m| <= order`. The basis is nodal through the inverse Vandermonde
    /// matrix.
    pub fn p_lagrangian(dim: usize, order: usize, kind: ValueKind) -> Result<Self> {
        check_dim(dim)?;
        let exps = multi_indices_upto(dim, order);
        let nodes: Vec<[f64; 3]> = exps
            .iter()
            .map(|m| {
                let mut p = [0.0; 3];
                for a in 0..dim {
                    p[a] = match order {
                        0 => 0.5,
                        1 => 0.5 + 0.25 * m[a] as f64,
                        _ => 0.15 + 0.7 * m[a] as f64 / order as f64,
                    };
                }
                p
            })
            .collect();
        let n = exps.len();
        let mut vander = vec![0.0; n * n];
        for (j, x) in nodes.iter().enumerate() {
            for (i, e) in exps.iter().enumerate() {
                vander[j * n + i] = monomial(e, x, dim).0;
            }
        }
        // coeffs[i * n + j]: coefficient of monomial i in basis function j
        let coeffs = dense::invert(&vander, n)?;
        let cube = CubeFaces::new(dim);
        let interior = cube.len() - 1;
        Ok(ReferenceElement {
            family: Family::PLagrangian,
            order,
            dim,
            kind,
            conformity: Conformity::L2,
            ncomp: ncomp(kind, dim),
            node_owner: vec![interior; n],
            nodes,
            exps,
            coeffs,
        })
    }

    /// Lowest-order Raviart-Thomas element: one normal-flux dof per facet,
    /// in cube facet order. Basis functions have unit outward flux through
    /// their facet and divergence one.
    pub fn raviart_thomas(dim: usize, order: usize) -> Result<Self> {
        check_dim(dim)?;
        if order != 0 {
            return Err(Error::Incompatible(format!(
                "Raviart-Thomas order {order} is not available, only order 0"
            )));
        }
        Ok(ReferenceElement {
            family: Family::RaviartThomas,
            order,
            dim,
            kind: ValueKind::Vector,
            conformity: Conformity::HDiv,
            ncomp: dim,
            nodes: Vec::new(),
            node_owner: Vec::new(),
            exps: Vec::new(),
            coeffs: Vec::new(),
        })
    }

    /// Builds an element from family/order/kind/conformity, checking that
    /// the combination makes sense.
    pub fn new(dim: usize, family: Family, order: usize, kind: ValueKind, conformity: Conformity) -> Result<Self> {
        match (family, conformity) {
            (Family::QLagrangian, Conformity::H1 | Conformity::L2) => {
                Self::q_lagrangian(dim, order, kind, conformity)
            }
            (Family::PLagrangian, Conformity::L2) => Self::p_lagrangian(dim, order, kind),
            (Family::RaviartThomas, Conformity::HDiv) => {
                if kind != ValueKind::Vector {
                    return Err(Error::Incompatible("Raviart-Thomas elements are vector valued".into()));
                }
                Self::raviart_thomas(dim, order)
            }
            _ => Err(Error::Incompatible(format!(
                "{family:?} elements do not support {conformity:?} conformity"
            ))),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn conformity(&self) -> Conformity {
        self.conformity
    }

    /// Number of value components.
    pub fn num_components(&self) -> usize {
        self.ncomp
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_dofs(&self) -> usize {
        match self.family {
            Family::RaviartThomas => 2 * self.dim,
            _ => self.nodes.len() * self.ncomp,
        }
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    /// Node of Lagrangian dof `i` (dofs are component-major).
    pub fn dof_node(&self, i: usize) -> usize {
        i % self.nodes.len()
    }

    /// Component of Lagrangian dof `i`.
    pub fn dof_component(&self, i: usize) -> usize {
        i / self.nodes.len()
    }

    /// Owning cube face of Lagrangian dof `i`.
    pub fn dof_owner(&self, i: usize) -> usize {
        self.node_owner[self.dof_node(i)]
    }

    fn scalar_basis(&self, xi: &[f64; 3], out: &mut [(f64, Vector)]) {
        match self.family {
            Family::QLagrangian => {
                let n1 = self.order + 1;
                let mut tab = [[(0.0, 0.0); 16]; 3];
                for a in 0..self.dim {
                    for m in 0..n1 {
                        tab[a][m] = lagrange_1d(self.order, xi[a], m);
                    }
                }
                for (lin, o) in out.iter_mut().enumerate().take(self.nodes.len()) {
                    let mut idx = [0; 3];
                    let mut r = lin;
                    for i in idx.iter_mut().take(self.dim) {
                        *i = r % n1;
                        r /= n1;
                    }
                    let mut v = 1.0;
                    let mut g = Vector::ZERO;
                    for a in 0..self.dim {
                        v *= tab[a][idx[a]].0;
                        let mut d = tab[a][idx[a]].1;
                        for b in 0..self.dim {
                            if b != a {
                                d *= tab[b][idx[b]].0;
                            }
                        }
                        g.0[a] = d;
                    }
                    *o = (v, g);
                }
            }
            Family::PLagrangian => {
                let n = self.exps.len();
                for o in out.iter_mut().take(n) {
                    *o = (0.0, Vector::ZERO);
                }
                for (i, e) in self.exps.iter().enumerate() {
                    let (mv, mg) = monomial(e, xi, self.dim);
                    for (j, o) in out.iter_mut().enumerate().take(n) {
                        let c = self.coeffs[i * n + j];
                        o.0 += c * mv;
                        o.1 += mg * c;
                    }
                }
            }
            Family::RaviartThomas => unreachable!(),
        }
    }

    /// Reference values of every basis function at `xi`; `out.len()` must be
    /// at least [`ReferenceElement::num_dofs`].
    pub fn evaluate(&self, xi: &[f64; 3], out: &mut [ShapeValue]) {
        let nd = self.num_dofs();
        for o in out.iter_mut().take(nd) {
            *o = ShapeValue::ZERO;
        }
        if self.family == Family::RaviartThomas {
            let cube = CubeFaces::new(self.dim);
            for (f, o) in out.iter_mut().enumerate().take(nd) {
                let (axis, high) = cube.facet_axis_side(f);
                let c = if high { xi[axis] } else { xi[axis] - 1.0 };
                o.vector.0[axis] = c;
                o.jac.0[axis][axis] = 1.0;
                o.div = 1.0;
            }
            return;
        }
        let nn = self.nodes.len();
        let mut scratch = [(0.0, Vector::ZERO); 64];
        self.scalar_basis(xi, &mut scratch[..nn]);
        match self.kind {
            ValueKind::Scalar => {
                for (o, (v, g)) in out.iter_mut().zip(&scratch[..nn]) {
                    o.value = *v;
                    o.grad = *g;
                }
            }
            ValueKind::Vector => {
                for c in 0..self.ncomp {
                    for (n, (v, g)) in scratch[..nn].iter().enumerate() {
                        let o = &mut out[c * nn + n];
                        o.vector.0[c] = *v;
                        for a in 0..3 {
                            o.jac.0[a][c] = g.0[a];
                        }
                        o.div = g.0[c];
                    }
                }
            }
        }
    }

    /// Reference values as a `[dof][point]` table.
    pub fn shape_values(&self, points: &[[f64; 3]]) -> Vec<Vec<Value>> {
        self.table(points, |s| match self.kind {
            ValueKind::Scalar => Value::Scalar(s.value),
            ValueKind::Vector => Value::Vector(s.vector),
        })
    }

    /// Reference gradients as a `[dof][point]` table (vectors for scalar
    /// elements, tensors for vector elements).
    pub fn shape_gradients(&self, points: &[[f64; 3]]) -> Vec<Vec<Value>> {
        self.table(points, |s| match self.kind {
            ValueKind::Scalar => Value::Vector(s.grad),
            ValueKind::Vector => Value::Tensor(s.jac),
        })
    }

    /// Reference divergences as a `[dof][point]` table (vector elements).
    pub fn shape_divergences(&self, points: &[[f64; 3]]) -> Vec<Vec<f64>> {
        self.table(points, |s| s.div)
    }

    fn table<T>(&self, points: &[[f64; 3]], f: impl Fn(&ShapeValue) -> T) -> Vec<Vec<T>> {
        let nd = self.num_dofs();
        let mut buf = vec![ShapeValue::ZERO; nd];
        let mut out: Vec<Vec<T>> = (0..nd).map(|_| Vec::with_capacity(points.len())).collect();
        for p in points {
            self.evaluate(p, &mut buf);
            for (i, s) in buf.iter().enumerate() {
                out[i].push(f(s));
            }
        }
        out
    }

    /// Maps reference values to physical values on the cell `map`.
    pub fn map_to_physical(&self, map: &AffineMap, refv: &ShapeValue) -> ShapeValue {
        let mut s = *refv;
        let h = &map.scale;
        match self.family {
            Family::RaviartThomas => {
                let det = map.det();
                for j in 0..3 {
                    s.vector.0[j] = h[j] * refv.vector.0[j] / det;
                    for i in 0..3 {
                        s.jac.0[i][j] = h[j] * refv.jac.0[i][j] / (det * h[i]);
                    }
                }
                s.div = refv.div / det;
            }
            _ => {
                for i in 0..3 {
                    s.grad.0[i] = refv.grad.0[i] / h[i];
                    for j in 0..3 {
                        s.jac.0[i][j] = refv.jac.0[i][j] / h[i];
                    }
                }
                s.div = s.jac.trace();
            }
        }
        s
    }
}

fn ncomp(kind: ValueKind, dim: usize) -> usize {
    match kind {
        ValueKind::Scalar => 1,
        ValueKind::Vector => dim,
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "finite elements are available in 1 to 3 dimensions, got {dim}"
        )));
    }
    Ok(())
}

/// Number of dofs of a full-degree polynomial space, `C(k + d, d)`.
pub fn p_dimension(dim: usize, order: usize) -> usize {
    binomial(order + dim, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_2d_degree_2() {
        let q = gauss_rule(2, 2);
        assert_eq!(q.points.len(), 4);
        for w in &q.weights {
            assert!((w - 0.25).abs() < 1e-15);
        }
        let s: f64 = q
            .points
            .iter()
            .zip(&q.weights)
            .map(|(p, w)| w * p[0] * p[0] * p[1] * p[1])
            .sum();
        assert!((s - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_3d_degree_0_is_midpoint() {
        let q = gauss_rule(3, 0);
        assert_eq!(q.points, vec![[0.5, 0.5, 0.5]]);
        assert_eq!(q.weights, vec![1.0]);
    }

    #[test]
    fn q1_corner_basis() {
        let e = ReferenceElement::q_lagrangian(2, 1, ValueKind::Scalar, Conformity::H1).unwrap();
        let mut out = vec![ShapeValue::ZERO; 4];
        e.evaluate(&[0.0, 0.0, 0.0], &mut out);
        assert_eq!(out[0].value, 1.0);
        assert_eq!(out[0].grad, Vector::new2(-1.0, -1.0));
        e.evaluate(&[0.3, 0.6, 0.0], &mut out);
        assert!((out[0].value - 0.7 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn q1_nodes_give_identity() {
        let e = ReferenceElement::q_lagrangian(2, 1, ValueKind::Scalar, Conformity::H1).unwrap();
        let tab = e.shape_values(e.nodes());
        for (i, row) in tab.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(v.as_scalar().unwrap(), want);
            }
        }
    }

    #[test]
    fn p_element_sizes() {
        assert_eq!(ReferenceElement::p_lagrangian(2, 1, ValueKind::Scalar).unwrap().num_dofs(), 3);
        assert_eq!(ReferenceElement::p_lagrangian(3, 2, ValueKind::Scalar).unwrap().num_dofs(), 10);
        assert_eq!(p_dimension(2, 1), 3);
        assert_eq!(p_dimension(3, 2), 10);
    }

    #[test]
    fn p1_reproduces_linears() {
        let e = ReferenceElement::p_lagrangian(2, 1, ValueKind::Scalar).unwrap();
        let f = |x: &[f64; 3]| 2.0 - x[0] + 3.0 * x[1];
        let coefs: Vec<f64> = e.nodes().iter().map(f).collect();
        let mut out = vec![ShapeValue::ZERO; 3];
        let xi = [0.1, 0.9, 0.0];
        e.evaluate(&xi, &mut out);
        let v: f64 = out.iter().zip(&coefs).map(|(s, c)| s.value * c).sum();
        assert!((v - f(&xi)).abs() < 1e-13);
        let g: Vector = out.iter().zip(&coefs).fold(Vector::ZERO, |acc, (s, c)| acc + s.grad * *c);
        assert!((g - Vector::new2(-1.0, 3.0)).max_abs() < 1e-12);
    }

    #[test]
    fn rt0_right_facet_basis() {
        let e = ReferenceElement::raviart_thomas(2, 0).unwrap();
        let cube = CubeFaces::new(2);
        let right = cube.facet_index(0, true);
        let mut out = vec![ShapeValue::ZERO; 4];
        e.evaluate(&[0.25, 0.75, 0.0], &mut out);
        assert_eq!(out[right].vector, Vector::new2(0.25, 0.0));
        assert_eq!(out[right].div, 1.0);
    }

    #[test]
    fn rt_higher_order_is_rejected() {
        assert!(matches!(ReferenceElement::raviart_thomas(2, 1), Err(Error::Incompatible(_))));
        assert!(matches!(
            ReferenceElement::new(2, Family::PLagrangian, 1, ValueKind::Scalar, Conformity::H1),
            Err(Error::Incompatible(_))
        ));
    }

    #[test]
    fn piola_examples() {
        let v = Vector::new2(0.3, -0.7);
        let (w, d) = piola_map(&AffineMap::identity(2), v, 1.0).unwrap();
        assert_eq!((w, d), (v, 1.0));
        let m = AffineMap::new(&[0.0, 0.0], &[0.5, 0.5]);
        let (w, d) = piola_map(&m, v, 1.0).unwrap();
        assert!((w - v * 2.0).max_abs() < 1e-15);
        assert_eq!(d, 4.0);
        let singular = AffineMap::new(&[0.0, 0.0], &[0.0, 1.0]);
        assert!(matches!(piola_map(&singular, v, 1.0), Err(Error::Geometry(_))));
    }
}
