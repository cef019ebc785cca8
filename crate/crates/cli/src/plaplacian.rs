//! p-Laplacian solved with Newton's method from a random initial guess.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cartfem::cellfield::CellField;
use cartfem::fespace::{constant_fn, FESpace, MultiFieldSpace, SpaceSpec, TrialSpace};
use cartfem::geometry::{triangulation, Domain};
use cartfem::operators::{jacobian_fd_error, NonlinearOperator, Term};
use cartfem::postprocess::write_vtk;
use cartfem::reffe::{Conformity, Family, ValueKind};
use cartfem::solvers::{solve_newton, NonlinearSystem, Ordering};
use cartfem::sparse::norm_inf;
use cartfem::tensor::Vector;

use crate::{check, closure_of, ensure_tag, Config, DriverError, Result, Summary};

#[derive(Clone, Debug)]
pub struct PLaplacianOptions {
    pub p: f64,
    pub f: f64,
    pub g: f64,
}

impl Default for PLaplacianOptions {
    fn default() -> Self {
        PLaplacianOptions { p: 3.0, f: 1.0, g: 2.0 }
    }
}

/// `|grad u|^(p-2) grad u`.
pub fn flux(p: f64, g: &Vector) -> Vector {
    *g * g.norm().powf(p - 2.0)
}

/// Derivative of [`flux`] at `g` in direction `dg`.
pub fn dflux(p: f64, g: &Vector, dg: &Vector) -> Vector {
    let n = g.norm();
    let lin = *dg * n.powf(p - 2.0);
    if n == 0.0 {
        return lin;
    }
    *g * ((p - 2.0) * n.powf(p - 4.0) * g.dot(dg)) + lin
}

pub fn run_plaplacian(cfg: &Config, opts: &PLaplacianOptions) -> Result<Summary> {
    let p = opts.p;
    if p < 2.0 {
        return Err(DriverError::Config(format!("p must be at least 2, got {p}")));
    }
    let n = cfg.n.unwrap_or(16);
    let order = cfg.order.unwrap_or(1);
    let degree = cfg.degree.unwrap_or(2 * order);
    let model = cfg.model(&[0.0, 1.0, 0.0, 1.0], &[n, n])?;
    let (x0, x1) = (model.boundary_facet_entity(0, false), model.boundary_facet_entity(0, true));
    let model = ensure_tag(model.clone(), "diri0", &closure_of(&model, &[x0])?)?;
    let model = ensure_tag(model.clone(), "dirig", &closure_of(&model, &[x1])?)?;

    let spec = SpaceSpec::new(Family::QLagrangian, order, ValueKind::Scalar, Conformity::H1).dirichlet(["diri0", "dirig"]);
    let v = FESpace::new(&model, &spec)?;
    let u = TrialSpace::new(&v, &[constant_fn(0.0), constant_fn(opts.g)])?;
    let x = MultiFieldSpace::single(u.clone());

    let omega: Domain = triangulation(&model).into();
    let f = opts.f;
    let t = Term::nonlinear(
        omega.clone(),
        degree,
        move |_, u, v| v[0].grad.dot(&flux(p, &u[0].grad)) - f * v[0].value,
        move |_, u, du, v| v[0].grad.dot(&dflux(p, &u[0].grad, &du[0].grad)),
    )?;
    let op = NonlinearOperator::new(&x, &x.test(), vec![t])?.with_assembler(cfg.assembler());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x0: Vec<f64> = (0..x.num_free()).map(|_| rng.gen::<f64>()).collect();

    let mut s = Summary::new("plaplacian");
    s.set("cells", model.num_cells());
    s.set("order", order);
    s.set("p", p);
    s.set("seed", cfg.seed);
    s.set("free_dofs", x.num_free());
    if cfg.check_jacobian {
        let err = jacobian_fd_error(&op, &x0, 1e-7)?;
        s.set_f64("jacobian_fd_error", err);
        check(err < 1e-5, || format!("jacobian differs from finite differences by {err:e}"))?;
    }
    let (sol, log) = solve_newton(&op, x0, &cfg.newton(Ordering::Natural))?;
    let r = norm_inf(&op.residual(&sol)?);
    s.set("newton_iterations", log.iterations());
    s.set_f64("residual_inf", r);
    let uh = u.function(sol)?;
    let all = uh.free.iter().chain(&uh.dirichlet);
    s.set_f64("uh_min", all.clone().fold(f64::INFINITY, |m, v| m.min(*v)));
    s.set_f64("uh_max", all.fold(f64::NEG_INFINITY, |m, v| m.max(*v)));
    if let Some(path) = cfg.vtk_path() {
        write_vtk(&omega, path, &[("uh", CellField::fe(&uh))])?;
    }
    s.write(cfg)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_derivative_by_differences() {
        let g = Vector::new2(0.3, -1.2);
        let dg = Vector::new2(0.7, 0.4);
        let e = 1e-7;
        for p in [2.0, 3.0, 4.5] {
            let fd = (flux(p, &(g + dg * e)) - flux(p, &g)) * (1.0 / e);
            assert!((fd - dflux(p, &g, &dg)).norm() < 1e-6);
        }
        assert_eq!(dflux(3.0, &Vector::ZERO, &dg), Vector::ZERO);
    }

    #[test]
    fn rejects_small_exponent() {
        let o = PLaplacianOptions {
            p: 1.5,
            ..Default::default()
        };
        assert!(run_plaplacian(&Config::default(), &o).is_err());
    }
}
