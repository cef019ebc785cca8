//! Small fixed-size vector and tensor values used at quadrature points.
//!
//! Everything is stored padded to three components; 2D quantities keep the
//! third component (and the third row/column of tensors) at zero. Functions
//! that depend on the spatial dimension, such as [`Tensor::identity`], take it
//! explicitly.
//!
//! Gradients of vector fields follow the convention `grad[i][j] = d u_j / d x_i`,
//! so that the convection term `(u . grad) u` reads `grad.transpose() * u`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vector(pub [f64; 3]);

impl Vector {
    pub const ZERO: Vector = Vector([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vector([x, y, z])
    }

    pub fn new2(x: f64, y: f64) -> Self {
        Vector([x, y, 0.0])
    }

    /// Unit vector along `axis`.
    pub fn axis(axis: usize) -> Self {
        let mut v = Vector::ZERO;
        v.0[axis] = 1.0;
        v
    }

    pub fn from_slice(s: &[f64]) -> Self {
        let mut v = Vector::ZERO;
        v.0[..s.len()].copy_from_slice(s);
        v
    }

    pub fn dot(&self, o: &Vector) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn outer(&self, o: &Vector) -> Tensor {
        let mut t = Tensor::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[i] * o.0[j];
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, o: Vector) -> Vector {
        Vector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vector {
    fn add_assign(&mut self, o: Vector) {
        *self = *self + o;
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, o: Vector) -> Vector {
        Vector([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl SubAssign for Vector {
    fn sub_assign(&mut self, o: Vector) {
        *self = *self - o;
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self * -1.0
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(self, a: f64) -> Vector {
        Vector([self.0[0] * a, self.0[1] * a, self.0[2] * a])
    }
}

impl Mul<Vector> for f64 {
    type Output = Vector;
    fn mul(self, v: Vector) -> Vector {
        v * self
    }
}

/// Second-order tensor, row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tensor(pub [[f64; 3]; 3]);

impl Tensor {
    pub const ZERO: Tensor = Tensor([[0.0; 3]; 3]);

    /// Identity on the first `dim` axes.
    pub fn identity(dim: usize) -> Self {
        let mut t = Tensor::ZERO;
        for i in 0..dim.min(3) {
            t.0[i][i] = 1.0;
        }
        t
    }

    /// Row-major 2x2 tensor.
    pub fn new2(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Tensor([[a11, a12, 0.0], [a21, a22, 0.0], [0.0; 3]])
    }

    pub fn transpose(&self) -> Tensor {
        let mut t = Tensor::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// Symmetric part `(T + T^t) / 2`.
    pub fn symmetric(&self) -> Tensor {
        (*self + self.transpose()) * 0.5
    }

    /// Double contraction `sum_ij a_ij b_ij`.
    pub fn inner(&self, o: &Tensor) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j] * o.0[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn row(&self, i: usize) -> Vector {
        Vector(self.0[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Add for Tensor {
    type Output = Tensor;
    fn add(self, o: Tensor) -> Tensor {
        let mut t = self;
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] += o.0[i][j];
            }
        }
        t
    }
}

impl AddAssign for Tensor {
    fn add_assign(&mut self, o: Tensor) {
        *self = *self + o;
    }
}

impl Sub for Tensor {
    type Output = Tensor;
    fn sub(self, o: Tensor) -> Tensor {
        self + o * -1.0
    }
}

impl Neg for Tensor {
    type Output = Tensor;
    fn neg(self) -> Tensor {
        self * -1.0
    }
}

impl Mul<f64> for Tensor {
    type Output = Tensor;
    fn mul(self, a: f64) -> Tensor {
        let mut t = self;
        for row in t.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= a;
            }
        }
        t
    }
}

impl Mul<Tensor> for f64 {
    type Output = Tensor;
    fn mul(self, t: Tensor) -> Tensor {
        t * self
    }
}

impl Mul<Vector> for Tensor {
    type Output = Vector;
    fn mul(self, v: Vector) -> Vector {
        let mut r = Vector::ZERO;
        for i in 0..3 {
            r.0[i] = self.0[i][0] * v.0[0] + self.0[i][1] * v.0[1] + self.0[i][2] * v.0[2];
        }
        r
    }
}

impl Mul<Tensor> for Tensor {
    type Output = Tensor;
    fn mul(self, o: Tensor) -> Tensor {
        let mut t = Tensor::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        t
    }
}

/// A point value of a field: scalar, vector or second-order tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector(Vector),
    Tensor(Tensor),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Vector(_) => "vector",
            Value::Tensor(_) => "tensor",
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(s) => Some(*s),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<Vector> {
        match self {
            Value::Vector(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_tensor(&self) -> Option<Tensor> {
        match self {
            Value::Tensor(t) => Some(*t),
            _ => None,
        }
    }

    /// Full contraction with another value of the same kind.
    pub fn inner(&self, o: &Value) -> Option<f64> {
        match (self, o) {
            (Value::Scalar(a), Value::Scalar(b)) => Some(a * b),
            (Value::Vector(a), Value::Vector(b)) => Some(a.dot(b)),
            (Value::Tensor(a), Value::Tensor(b)) => Some(a.inner(b)),
            _ => None,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Value::Scalar(a) => a.abs(),
            Value::Vector(v) => v.norm(),
            Value::Tensor(t) => t.norm(),
        }
    }

    pub fn scale(&self, a: f64) -> Value {
        match self {
            Value::Scalar(s) => Value::Scalar(s * a),
            Value::Vector(v) => Value::Vector(*v * a),
            Value::Tensor(t) => Value::Tensor(*t * a),
        }
    }

    pub fn try_add(&self, o: &Value) -> Option<Value> {
        match (self, o) {
            (Value::Scalar(a), Value::Scalar(b)) => Some(Value::Scalar(a + b)),
            (Value::Vector(a), Value::Vector(b)) => Some(Value::Vector(*a + *b)),
            (Value::Tensor(a), Value::Tensor(b)) => Some(Value::Tensor(*a + *b)),
            _ => None,
        }
    }

    /// Zero of the same kind.
    pub fn zero_like(&self) -> Value {
        self.scale(0.0)
    }
}

impl From<f64> for Value {
    fn from(s: f64) -> Self {
        Value::Scalar(s)
    }
}

impl From<Vector> for Value {
    fn from(v: Vector) -> Self {
        Value::Vector(v)
    }
}

impl From<Tensor> for Value {
    fn from(t: Tensor) -> Self {
        Value::Tensor(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convection_convention() {
        // u = (y, 0): grad[i][j] = d u_j / d x_i, so grad[1][0] = 1.
        let mut g = Tensor::ZERO;
        g.0[1][0] = 1.0;
        let u = Vector::new2(2.0, 3.0);
        // (u . grad) u = (u_y * 1, 0) = (3, 0)
        assert_eq!(g.transpose() * u, Vector::new2(3.0, 0.0));
        assert_eq!(g.symmetric(), Tensor::new2(0.0, 0.5, 0.5, 0.0));
        assert_eq!(g.trace(), 0.0);
    }

    #[test]
    fn identity_respects_dimension() {
        assert_eq!(Tensor::identity(2).trace(), 2.0);
        assert_eq!(Tensor::identity(3).trace(), 3.0);
    }

    #[test]
    fn value_kinds_do_not_mix() {
        let s = Value::Scalar(1.0);
        let v = Value::Vector(Vector::axis(0));
        assert!(s.try_add(&v).is_none());
        assert!(s.inner(&v).is_none());
        assert_eq!(v.inner(&v), Some(1.0));
    }
}
