//! Symmetric interior penalty discretization of the Poisson equation with
//! a linear manufactured solution.

use cartfem::cellfield::{error_norms, jump, max_abs, restrict, CellField};
use cartfem::fespace::{scalar_fn, vector_fn, FESpace, MultiFieldSpace, SpaceSpec, TrialSpace};
use cartfem::geometry::{boundary_triangulation, skeleton_triangulation, triangulation, Domain};
use cartfem::operators::Term;
use cartfem::postprocess::write_vtk;
use cartfem::reffe::{Conformity, Family, ValueKind};
use cartfem::solvers::Ordering;
use cartfem::tensor::Vector;

use crate::{check, Config, DriverError, Result, Summary};

#[derive(Clone, Debug)]
pub struct DgOptions {
    pub dim: usize,
}

impl Default for DgOptions {
    fn default() -> Self {
        DgOptions { dim: 3 }
    }
}

const COEFFS: [f64; 3] = [3.0, 1.0, 2.0];

fn exact(x: &Vector) -> f64 {
    COEFFS[0] * x[0] + COEFFS[1] * x[1] + COEFFS[2] * x[2]
}

pub fn run_dg(cfg: &Config, opts: &DgOptions) -> Result<Summary> {
    let d = opts.dim;
    if !(2..=3).contains(&d) {
        return Err(DriverError::Config(format!("--dim must be 2 or 3, got {d}")));
    }
    let n = cfg.n.unwrap_or(4);
    let order = cfg.order.unwrap_or(3);
    let degree = cfg.degree.unwrap_or(2 * order);
    let tol = cfg.tol.unwrap_or(1e-10);
    let l = 1.0;
    let bx: Vec<f64> = (0..d).flat_map(|_| [0.0, l]).collect();
    let model = cfg.model(&bx, &vec![n; d])?;
    let dim = model.dim();

    let v = FESpace::new(&model, &SpaceSpec::new(Family::QLagrangian, order, ValueKind::Scalar, Conformity::L2))?;
    let x = MultiFieldSpace::single(TrialSpace::homogeneous(&v));

    let omega: Domain = triangulation(&model).into();
    let gamma: Domain = boundary_triangulation(&model, None)?.into();
    let skel = skeleton_triangulation(&model)?;
    let lambda: Domain = skel.clone().into();

    let h = l / n as f64;
    let pen = (order * (order + 1)) as f64 / h;
    let mut grad_u = Vector::ZERO;
    for (a, c) in COEFFS.iter().enumerate().take(dim) {
        grad_u.0[a] = *c;
    }
    let terms = vec![
        Term::affine(omega.clone(), degree, |_, u, v| v[0].grad.dot(&u[0].grad), |_, _| 0.0)?,
        Term::affine(
            gamma,
            degree,
            move |q, u, v| {
                let n = q.normal;
                pen * v[0].value * u[0].value - v[0].value * u[0].grad.dot(&n) - v[0].grad.dot(&n) * u[0].value
            },
            move |q, v| {
                let g = exact(&q.x);
                pen * v[0].value * g - v[0].grad.dot(&q.normal) * g
            },
        )?,
        Term::skeleton(lambda.clone(), degree, move |q, u, v| {
            let n = q.normal;
            let (ju, jv) = (u.jump(0, &n), v.jump(0, &n));
            pen * jv.dot(&ju) - jv.dot(&u.mean_grad(0)) - v.mean_grad(0).dot(&ju)
        })?,
    ];
    let op = cfg.assembler().assemble_affine(&x, &x.test(), &terms)?;
    let uh = op.solve(&cfg.linear_solver(Ordering::Rcm))?.remove(0);

    let uhf = CellField::fe(&uh);
    let ue = CellField::with_gradient(scalar_fn(exact), vector_fn(move |_| grad_u));
    let (el2, eh1) = error_norms(&(uhf.clone() - ue), &omega, degree)?;
    let jumps = jump(&restrict(&uhf, &skel));
    let max_jump = max_abs(&jumps, &lambda, degree)?;

    let mut s = Summary::new("dg");
    s.set("dim", dim);
    s.set("cells", model.num_cells());
    s.set("order", order);
    s.set("dofs", v.num_free());
    s.set_f64("penalty", pen * h);
    s.set_f64("matrix_asymmetry", op.matrix.asymmetry());
    s.set_f64("el2", el2);
    s.set_f64("eh1", eh1);
    s.set_f64("max_jump", max_jump);
    if let (Some(p), Some(prefix)) = (cfg.vtk_path(), &cfg.out) {
        write_vtk(&omega, p, &[("uh", uhf)])?;
        let mut jp = prefix.clone().into_os_string();
        jp.push(".jumps.vtk");
        write_vtk(&lambda, jp, &[("jump_u", jumps)])?;
    }
    s.write(cfg)?;
    check(el2 < tol && eh1 < tol, || format!("errors el2 = {el2:e}, eh1 = {eh1:e} exceed {tol:e}"))?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_reproduces_linear() {
        let cfg = Config {
            n: Some(3),
            order: Some(1),
            ..Default::default()
        };
        let s = run_dg(&cfg, &DgOptions { dim: 2 }).unwrap();
        assert!(s.f64("el2").unwrap() < 1e-10);
        assert!(s.f64("max_jump").unwrap() < 1e-10);
        assert!(s.f64("matrix_asymmetry").unwrap() < 1e-12);
    }
}
