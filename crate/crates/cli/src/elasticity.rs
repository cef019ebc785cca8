//! Linear elasticity of a bar clamped at one end and pulled at the other.

use cartfem::cellfield::{error_norms, max_abs, symmetric_gradient, CellField};
use cartfem::fespace::{constant_fn, vector_fn, FESpace, MultiFieldSpace, SpaceSpec, TrialSpace};
use cartfem::geometry::{triangulation, Domain};
use cartfem::mesh::TagRef;
use cartfem::operators::Term;
use cartfem::postprocess::write_vtk;
use cartfem::reffe::{Conformity, Family, ValueKind};
use cartfem::solvers::Ordering;
use cartfem::tensor::{Tensor, Value, Vector};

use crate::{closure_of, ensure_tag, Config, Result, Summary};

#[derive(Clone, Debug)]
pub struct ElasticityOptions {
    pub young: f64,
    pub poisson: f64,
    /// Prescribed displacement of the pulled end.
    pub delta: f64,
    /// Impose an affine field on the whole boundary instead.
    pub patch: bool,
}

impl Default for ElasticityOptions {
    fn default() -> Self {
        ElasticityOptions {
            young: 70.0e9,
            poisson: 0.33,
            delta: 0.005,
            patch: false,
        }
    }
}

/// Lamé parameters `(lambda, mu)`.
pub fn lame(young: f64, nu: f64) -> (f64, f64) {
    (young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), young / (2.0 * (1.0 + nu)))
}

fn stress(lambda: f64, mu: f64, eps: &Tensor, dim: usize) -> Tensor {
    Tensor::identity(dim) * (lambda * eps.trace()) + *eps * (2.0 * mu)
}

/// Affine displacement used by the patch test.
pub fn patch_field(x: &Vector) -> Vector {
    Vector::new(
        1e-3 + 2e-3 * x[0] - 1e-3 * x[1] + 5e-4 * x[2],
        -2e-3 + 1e-3 * x[0] + 3e-3 * x[1] - 2e-3 * x[2],
        4e-4 - 5e-4 * x[0] + 1e-3 * x[1] + 2e-3 * x[2],
    )
}

fn patch_gradient() -> Tensor {
    // grad[i][j] = d u_j / d x_i
    Tensor([[2e-3, 1e-3, -5e-4], [-1e-3, 3e-3, 1e-3], [5e-4, -2e-3, 2e-3]])
}

pub fn run_elasticity(cfg: &Config, opts: &ElasticityOptions) -> Result<Summary> {
    let n = cfg.n.unwrap_or(16);
    let order = cfg.order.unwrap_or(1);
    let degree = cfg.degree.unwrap_or(2 * order);
    let m = (n / 4).max(1);
    let model = cfg.model(&[0.0, 1.0, 0.0, 0.25, 0.0, 0.25], &[n, m, m])?;
    let dim = model.dim();

    let (x0, x1) = (model.boundary_facet_entity(0, false), model.boundary_facet_entity(0, true));
    let model = ensure_tag(model.clone(), "surface_1", &closure_of(&model, &[x1])?)?;
    let model = ensure_tag(model.clone(), "surface_2", &closure_of(&model, &[x0])?)?;
    let boundary: Vec<TagRef> = (1..model.cube().len() as u32).map(TagRef::Entity).collect();
    let model = ensure_tag(model, "boundary", &boundary)?;

    let spec = SpaceSpec::new(Family::QLagrangian, order, ValueKind::Vector, Conformity::H1);
    let (v, u) = if opts.patch {
        let v = FESpace::new(&model, &spec.dirichlet(["boundary"]))?;
        let u = TrialSpace::new(&v, &[vector_fn(patch_field)])?;
        (v, u)
    } else {
        let mut mask = vec![false; dim];
        mask[0] = true;
        let spec = spec
            .dirichlet(["surface_1", "surface_2"])
            .masks(vec![mask, vec![true; dim]]);
        let v = FESpace::new(&model, &spec)?;
        let mut g1 = Vector::ZERO;
        g1.0[0] = opts.delta;
        let u = TrialSpace::new(&v, &[constant_fn(g1), constant_fn(Vector::ZERO)])?;
        (v, u)
    };
    let x = MultiFieldSpace::single(u);

    let (lambda, mu) = lame(opts.young, opts.poisson);
    let omega: Domain = triangulation(&model).into();
    let t = Term::linear(omega.clone(), degree, move |_, u, v| {
        v[0].eps().inner(&stress(lambda, mu, &u[0].eps(), dim))
    })?;
    let op = cfg.assembler().assemble_affine(&x, &x.test(), &[t])?;
    let uh = op.solve(&cfg.linear_solver(Ordering::Natural))?.remove(0);

    let uhf = CellField::fe(&uh);
    let epsi = symmetric_gradient(&uhf)?;
    let sigma = CellField::law(
        1,
        move |_, a| {
            let e = a[0].as_tensor().ok_or_else(|| cartfem::Error::Kind("strain must be a tensor".into()))?;
            Ok(Value::Tensor(stress(lambda, mu, &e, dim)))
        },
        vec![epsi.clone()],
    )?;

    let mut s = Summary::new("elasticity");
    s.set("cells", model.num_cells());
    s.set("order", order);
    s.set("free_dofs", uh.free.len());
    s.set("dirichlet_dofs", uh.dirichlet.len());
    s.set_f64("lambda", lambda);
    s.set_f64("mu", mu);
    s.set_f64("matrix_asymmetry", op.matrix.asymmetry());
    let ux_max = (0..model.num_cells())
        .flat_map(|c| {
            let r = v.reffe();
            let vals = uh.cell_values(c);
            (0..r.num_dofs()).filter(move |&l| r.dof_component(l) == 0).map(move |l| vals[l])
        })
        .fold(f64::NEG_INFINITY, f64::max);
    s.set_f64("ux_max", ux_max);
    let smax = max_abs(&sigma, &omega, degree)?;
    s.set_f64("sigma_max", smax);
    let asym = max_abs(&(sigma.clone() - sigma.transpose()), &omega, degree)?;
    s.set_f64("sigma_asymmetry", asym / smax.max(f64::MIN_POSITIVE));
    if opts.patch {
        let ue = CellField::with_gradient(vector_fn(patch_field), constant_fn(patch_gradient()));
        let (el2, eh1) = error_norms(&(uhf.clone() - ue), &omega, degree)?;
        s.set_f64("el2", el2);
        s.set_f64("eh1", eh1);
    }
    if let Some(p) = cfg.vtk_path() {
        write_vtk(&omega, p, &[("uh", uhf), ("epsi", epsi), ("sigma", sigma)])?;
    }
    s.write(cfg)?;
    Ok(s)
}
