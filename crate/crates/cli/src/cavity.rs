//! Lid-driven cavity for the steady incompressible Navier-Stokes equations.

use cartfem::cellfield::CellField;
use cartfem::fespace::{constant_fn, dirichlet_index, FEFunction, FESpace, MultiFieldSpace, SpaceSpec, TrialSpace};
use cartfem::geometry::{triangulation, Domain};
use cartfem::mesh::TagRef;
use cartfem::operators::{jacobian_fd_error, NonlinearOperator, Term};
use cartfem::postprocess::write_vtk;
use cartfem::reffe::{Conformity, Family, ValueKind};
use cartfem::solvers::{solve_newton, NonlinearSystem, Ordering};
use cartfem::sparse::norm_inf;
use cartfem::tensor::Vector;

use crate::{check, ensure_tag, Config, DriverError, Result, Summary};

#[derive(Clone, Debug)]
pub struct CavityOptions {
    pub re: f64,
}

impl Default for CavityOptions {
    fn default() -> Self {
        CavityOptions { re: 10.0 }
    }
}

/// Largest deviation of the lid velocity dofs from `(1, 0)`, and their count.
pub fn lid_deviation(uh: &FEFunction, lid_tag: usize) -> (f64, usize) {
    let sp = uh.space();
    let r = sp.reffe();
    let mut seen = std::collections::BTreeSet::new();
    let mut dev: f64 = 0.0;
    for c in 0..sp.model().num_cells() {
        for (l, &id) in sp.cell_dofs(c).iter().enumerate() {
            let Some(i) = dirichlet_index(id) else { continue };
            if sp.dirichlet_tag(i) != Some(lid_tag) || !seen.insert(i) {
                continue;
            }
            let want = if r.dof_component(l) == 0 { 1.0 } else { 0.0 };
            dev = dev.max((uh.dof_value(id) - want).abs());
        }
    }
    (dev, seen.len())
}

pub fn run_cavity(cfg: &Config, opts: &CavityOptions) -> Result<Summary> {
    let n = cfg.n.unwrap_or(32);
    let order = cfg.order.unwrap_or(2);
    if order < 2 {
        return Err(DriverError::Config(format!("velocity order must be at least 2, got {order}")));
    }
    let degree = cfg.degree.unwrap_or((order - 1) * 2);
    let model = cfg.model(&[0.0, 1.0, 0.0, 1.0], &[n, n])?;
    let model = ensure_tag(model, "diri1", &[TagRef::Entity(6)])?;
    let rest: Vec<TagRef> = [1, 2, 3, 4, 5, 7, 8].into_iter().map(TagRef::Entity).collect();
    let model = ensure_tag(model, "diri0", &rest)?;

    let vspec =
        SpaceSpec::new(Family::QLagrangian, order, ValueKind::Vector, Conformity::H1).dirichlet(["diri0", "diri1"]);
    let qspec = SpaceSpec::new(Family::PLagrangian, order - 1, ValueKind::Scalar, Conformity::L2).zero_mean();
    let v = FESpace::new(&model, &vspec)?;
    let q = FESpace::new(&model, &qspec)?;
    let u = TrialSpace::new(&v, &[constant_fn(Vector::ZERO), constant_fn(Vector::new2(1.0, 0.0))])?;
    let x = MultiFieldSpace::new(vec![u, TrialSpace::homogeneous(&q)])?;

    let omega: Domain = triangulation(&model).into();
    let re = opts.re;
    let t = Term::nonlinear(
        omega.clone(),
        degree,
        move |_, x, y| {
            let (u, p) = (&x[0], x[1].value);
            let conv = u.jac.transpose() * u.vector;
            y[0].jac.inner(&u.jac) - y[0].div * p + y[1].value * u.div + re * y[0].vector.dot(&conv)
        },
        move |_, x, dx, y| {
            let u = &x[0];
            let du = &dx[0];
            let dconv = du.jac.transpose() * u.vector + u.jac.transpose() * du.vector;
            y[0].jac.inner(&du.jac) - y[0].div * dx[1].value + y[1].value * du.div + re * y[0].vector.dot(&dconv)
        },
    )?;
    let op = NonlinearOperator::new(&x, &x.test(), vec![t])?.with_assembler(cfg.assembler());

    let mut s = Summary::new("cavity");
    s.set("cells", model.num_cells());
    s.set("order", order);
    s.set("degree", degree);
    s.set_f64("re", re);
    s.set("velocity_dofs", v.num_free());
    s.set("pressure_dofs", q.num_free());
    let x0 = x.zero();
    if cfg.check_jacobian {
        let err = jacobian_fd_error(&op, &x0, 1e-7)?;
        s.set_f64("jacobian_fd_error", err);
        check(err < 1e-5, || format!("jacobian differs from finite differences by {err:e}"))?;
    }
    let (sol, log) = solve_newton(&op, x0, &cfg.newton(Ordering::Rcm))?;
    s.set("newton_iterations", log.iterations());
    s.set_f64("residual_inf", norm_inf(&op.residual(&sol)?));

    let mut fields = x.unpack(&sol)?;
    let ph = fields.pop().expect("two fields").zero_mean_postshift()?;
    let uh = fields.pop().expect("two fields");
    let measure: f64 = model.extents().iter().product();
    let pint = ph.integral(2 * order)?;
    s.set_f64("pressure_integral", pint);
    s.set_f64("pressure_integral_bound", 1e-12 * measure);
    let (dev, count) = lid_deviation(&uh, 1);
    s.set("lid_dofs", count);
    s.set_f64("lid_max_deviation", dev);
    let uvals = uh.free.iter().chain(&uh.dirichlet);
    s.set_f64("velocity_max", uvals.fold(0.0, |m, v| m.max(v.abs())));
    if let Some(p) = cfg.vtk_path() {
        write_vtk(&omega, p, &[("uh", CellField::fe(&uh)), ("ph", CellField::fe(&ph))])?;
    }
    s.write(cfg)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_cavity() {
        let cfg = Config {
            n: Some(4),
            check_jacobian: true,
            ..Default::default()
        };
        let s = run_cavity(&cfg, &CavityOptions::default()).unwrap();
        assert!(s.f64("residual_inf").unwrap() < 1e-8);
        assert_eq!(s.f64("lid_max_deviation"), Some(0.0));
        assert_eq!(s.usize("lid_dofs"), Some(2 * (2 * 4 - 1)));
        assert!(s.f64("pressure_integral").unwrap().abs() < 1e-12);
    }
}
