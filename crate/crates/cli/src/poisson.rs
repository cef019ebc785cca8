//! Poisson problem with Dirichlet data on two opposite sides and a Neumann
//! flux on the top side.

use cartfem::cellfield::{error_norms, CellField};
use cartfem::fespace::{scalar_fn, vector_fn, FESpace, MultiFieldSpace, PointFn, SpaceSpec, TrialSpace};
use cartfem::geometry::{boundary_triangulation, triangulation, Domain};
use cartfem::mesh::TagRef;
use cartfem::operators::Term;
use cartfem::postprocess::write_vtk;
use cartfem::reffe::{Conformity, Family, ValueKind};
use cartfem::solvers::Ordering;
use cartfem::tensor::Vector;

use crate::{closure_of, ensure_tag, Config, DriverError, Result, Summary};

#[derive(Clone, Debug)]
pub struct PoissonOptions {
    pub dim: usize,
    /// Solve for `u = x1 + x2` with Dirichlet data on the whole boundary.
    pub linear: bool,
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        PoissonOptions {
            dim: 3,
            linear: false,
            f: 1.0,
            g: 2.0,
            h: 3.0,
        }
    }
}

pub fn run_poisson(cfg: &Config, opts: &PoissonOptions) -> Result<Summary> {
    let d = opts.dim;
    if !(2..=3).contains(&d) {
        return Err(DriverError::Config(format!("--dim must be 2 or 3, got {d}")));
    }
    let n = cfg.n.unwrap_or(8);
    let order = cfg.order.unwrap_or(1);
    let degree = cfg.degree.unwrap_or(2 * order);
    let bx: Vec<f64> = (0..d).flat_map(|_| [0.0, 1.0]).collect();
    let model = cfg.model(&bx, &vec![n; d])?;
    let d = model.dim();

    let (x0, x1) = (model.boundary_facet_entity(0, false), model.boundary_facet_entity(0, true));
    let top = model.boundary_facet_entity(d - 1, true);
    let model = ensure_tag(model.clone(), "sides", &closure_of(&model, &[x0, x1])?)?;
    let model = ensure_tag(model, "neumann", &[TagRef::Entity(top)])?;
    let boundary: Vec<TagRef> = (1..=model.cube().len() as u32 - 1).map(TagRef::Entity).collect();
    let model = ensure_tag(model, "boundary", &boundary)?;

    let dir = if opts.linear { "boundary" } else { "sides" };
    let spec = SpaceSpec::new(Family::QLagrangian, order, ValueKind::Scalar, Conformity::H1).dirichlet([dir]);
    let v = FESpace::new(&model, &spec)?;
    let exact = scalar_fn(|x| x[0] + x[1]);
    let g: PointFn = if opts.linear {
        exact.clone()
    } else {
        let g = opts.g;
        scalar_fn(move |_| g)
    };
    let u = TrialSpace::new(&v, &[g])?;
    let x = MultiFieldSpace::single(u.clone());

    let omega: Domain = triangulation(&model).into();
    let f = if opts.linear { 0.0 } else { opts.f };
    let mut terms = vec![Term::affine(
        omega.clone(),
        degree,
        |_, u, v| u[0].grad.dot(&v[0].grad),
        move |_, v| f * v[0].value,
    )?];
    if !opts.linear {
        let gamma = boundary_triangulation(&model, Some(&[TagRef::from("neumann")]))?;
        let h = opts.h;
        terms.push(Term::source(gamma, degree, move |_, v| h * v[0].value)?);
    }
    let op = cfg.assembler().assemble_affine(&x, &x.test(), &terms)?;
    let uh = op.solve(&cfg.linear_solver(Ordering::Natural))?.remove(0);

    let mut s = Summary::new("poisson");
    s.set("dim", d);
    s.set("cells", model.num_cells());
    s.set("order", order);
    s.set("free_dofs", v.num_free());
    s.set("dirichlet_dofs", v.num_dirichlet());
    s.set_f64("matrix_asymmetry", op.matrix.asymmetry());
    let all = uh.free.iter().chain(&uh.dirichlet);
    s.set_f64("uh_min", all.clone().fold(f64::INFINITY, |m, v| m.min(*v)));
    s.set_f64("uh_max", all.fold(f64::NEG_INFINITY, |m, v| m.max(*v)));
    s.set_f64("uh_integral", uh.integral(degree)?);
    let uhf = CellField::fe(&uh);
    if opts.linear {
        let ue = CellField::with_gradient(exact, vector_fn(|_| Vector::new(1.0, 1.0, 0.0)));
        let (el2, eh1) = error_norms(&(uhf.clone() - ue), &omega, degree)?;
        s.set_f64("el2", el2);
        s.set_f64("eh1", eh1);
    }
    if let Some(p) = cfg.vtk_path() {
        write_vtk(&omega, p, &[("uh", uhf)])?;
    }
    s.write(cfg)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_side_data() {
        let cfg = Config {
            n: Some(4),
            ..Default::default()
        };
        let s = run_poisson(
            &cfg,
            &PoissonOptions {
                dim: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.usize("free_dofs"), Some(15));
        assert!(s.f64("uh_min").unwrap() >= 2.0 - 1e-12);
        assert!(s.f64("matrix_asymmetry").unwrap() < 1e-12);
    }

    #[test]
    fn bad_dimension() {
        let o = PoissonOptions {
            dim: 4,
            ..Default::default()
        };
        assert!(matches!(run_poisson(&Config::default(), &o), Err(DriverError::Config(_))));
    }
}
