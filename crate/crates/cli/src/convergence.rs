//! Convergence study of the Poisson problem against a manufactured solution.

use std::f64::consts::PI;

use cartfem::cellfield::{error_norms, CellField};
use cartfem::fespace::{scalar_fn, vector_fn, FEFunction, FESpace, MultiFieldSpace, PointFn, SpaceSpec, TrialSpace};
use cartfem::geometry::{triangulation, Domain};
use cartfem::mesh::{DiscreteModel, TagRef};
use cartfem::operators::Term;
use cartfem::postprocess::{write_vtk, ConvergenceRecord};
use cartfem::solvers::Ordering;
use cartfem::reffe::{Conformity, Family, ValueKind};
use cartfem::tensor::Vector;

use crate::{ensure_tag, Config, DriverError, Result, Summary};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Manufactured {
    /// `sin(2 pi x1) x2`.
    #[default]
    Sine,
    /// `x1 + x2`.
    Linear,
}

impl std::str::FromStr for Manufactured {
    type Err = DriverError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Manufactured::Sine),
            "linear" => Ok(Manufactured::Linear),
            _ => Err(DriverError::Config(format!("unknown manufactured solution `{s}`"))),
        }
    }
}

impl Manufactured {
    fn name(self) -> &'static str {
        match self {
            Manufactured::Sine => "sine",
            Manufactured::Linear => "linear",
        }
    }

    /// `(u, grad u, -lap u)`.
    fn functions(self) -> (PointFn, PointFn, fn(&Vector) -> f64) {
        match self {
            Manufactured::Sine => (
                scalar_fn(|x| (2.0 * PI * x[0]).sin() * x[1]),
                vector_fn(|x| Vector::new2(2.0 * PI * (2.0 * PI * x[0]).cos() * x[1], (2.0 * PI * x[0]).sin())),
                |x| 4.0 * PI * PI * (2.0 * PI * x[0]).sin() * x[1],
            ),
            Manufactured::Linear => (
                scalar_fn(|x| x[0] + x[1]),
                vector_fn(|_| Vector::new2(1.0, 1.0)),
                |_| 0.0,
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceOptions {
    pub ns: Vec<usize>,
    pub manufactured: Manufactured,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            ns: vec![8, 16, 32, 64],
            manufactured: Manufactured::Sine,
        }
    }
}

/// One Poisson solve on an `n x n` mesh; returns `(el2, eh1, uh)`.
pub fn solve_on(cfg: &Config, n: usize, order: usize, degree: usize, m: Manufactured) -> Result<(f64, f64, FEFunction)> {
    let model = std::sync::Arc::new(DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[n, n])?);
    let boundary: Vec<TagRef> = (1..=8).map(TagRef::Entity).collect();
    let model = ensure_tag(model, "boundary", &boundary)?;
    let (u, grad, f) = m.functions();
    let v = FESpace::new(
        &model,
        &SpaceSpec::new(Family::QLagrangian, order, ValueKind::Scalar, Conformity::H1).dirichlet(["boundary"]),
    )?;
    let x = MultiFieldSpace::single(TrialSpace::new(&v, std::slice::from_ref(&u))?);
    let omega: Domain = triangulation(&model).into();
    let t = Term::affine(
        omega.clone(),
        degree,
        |_, u, v| u[0].grad.dot(&v[0].grad),
        move |q, v| f(&q.x) * v[0].value,
    )?;
    let op = cfg.assembler().assemble_affine(&x, &x.test(), &[t])?;
    let uh = op.solve(&cfg.linear_solver(Ordering::Natural))?.remove(0);
    let e = CellField::fe(&uh) - CellField::with_gradient(u, grad);
    let (el2, eh1) = error_norms(&e, &omega, degree)?;
    Ok((el2, eh1, uh))
}

pub fn run_convergence(cfg: &Config, opts: &ConvergenceOptions) -> Result<Summary> {
    let order = cfg.order.unwrap_or(1);
    let degree = cfg.degree.unwrap_or(2 * order);
    let mut ns = opts.ns.clone();
    if let Some(n) = cfg.n {
        ns = vec![n];
    }
    if ns.is_empty() || ns.contains(&0) {
        return Err(DriverError::Config("mesh sizes must be positive".into()));
    }
    let mut s = Summary::new("convergence");
    s.set("order", order);
    s.set("degree", degree);
    s.set("manufactured", opts.manufactured.name());
    s.set("ns", ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","));
    let mut rec = ConvergenceRecord::new(order);
    let mut last = None;
    println!("{:>6} {:>14} {:>14} {:>14}", "n", "h", "el2", "eh1");
    for &n in &ns {
        let (el2, eh1, uh) = solve_on(cfg, n, order, degree, opts.manufactured)?;
        let h = 1.0 / n as f64;
        println!("{n:>6} {h:>14.6e} {el2:>14.6e} {eh1:>14.6e}");
        rec.push(h, el2, eh1)?;
        s.set_f64(&format!("n{n}.el2"), el2);
        s.set_f64(&format!("n{n}.eh1"), eh1);
        last = Some(uh);
    }
    let el2_max = rec.samples.iter().fold(0.0, |m: f64, x| m.max(x.el2));
    let eh1_max = rec.samples.iter().fold(0.0, |m: f64, x| m.max(x.eh1));
    s.set_f64("el2_max", el2_max);
    s.set_f64("eh1_max", eh1_max);
    if opts.manufactured == Manufactured::Sine && rec.samples.len() >= 3 {
        let (l2, h1) = rec.slopes()?;
        println!("slopes: L2 {l2:.4}  H1 {h1:.4}");
        s.set_f64("slope_l2", l2);
        s.set_f64("slope_h1", h1);
    }
    if let (Some(p), Some(uh)) = (cfg.vtk_path(), last) {
        let omega: Domain = triangulation(uh.space().model()).into();
        write_vtk(&omega, p, &[("uh", CellField::fe(&uh))])?;
    }
    s.write(cfg)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in [Manufactured::Sine, Manufactured::Linear] {
            assert_eq!(m.name().parse::<Manufactured>().unwrap(), m);
        }
        assert!("cubic".parse::<Manufactured>().is_err());
    }

    #[test]
    fn first_order_rates() {
        let o = ConvergenceOptions {
            ns: vec![4, 8, 16],
            ..Default::default()
        };
        let s = run_convergence(&Config::default(), &o).unwrap();
        let l2 = s.f64("slope_l2").unwrap();
        let h1 = s.f64("slope_h1").unwrap();
        assert!((1.7..2.3).contains(&l2), "{l2}");
        assert!((0.8..1.2).contains(&h1), "{h1}");
    }
}
