//! Mixed Darcy flow with lowest-order Raviart-Thomas fluxes and piecewise
//! constant pressures.

use cartfem::cellfield::{integrate, integrate_sum, max_abs, normal_vector, CellField};
use cartfem::fespace::{constant_fn, scalar_fn, FESpace, MultiFieldSpace, SpaceSpec, TrialSpace};
use cartfem::geometry::{boundary_triangulation, triangulation, Domain};
use cartfem::mesh::TagRef;
use cartfem::operators::Term;
use cartfem::postprocess::write_vtk;
use cartfem::reffe::{Conformity, Family, ValueKind};
use cartfem::solvers::Ordering;
use cartfem::tensor::{Tensor, Value, Vector};

use crate::{Config, Result, Summary};

#[derive(Clone, Debug, Default)]
pub struct DarcyOptions {
    /// Unit permeability everywhere.
    pub homogeneous: bool,
    /// Use the 100 x 100 mesh instead of the default 32 x 32.
    pub fine: bool,
}

/// Inverse permeability at `x`.
pub fn kinv(x: &Vector, homogeneous: bool) -> Tensor {
    if !homogeneous && (x[0] - 0.5).abs() <= 0.1 && (x[1] - 0.5).abs() <= 0.1 {
        Tensor::new2(100.0, 90.0, 90.0, 100.0)
    } else {
        Tensor::new2(1.0, 0.0, 0.0, 1.0)
    }
}

pub fn run_darcy(cfg: &Config, opts: &DarcyOptions) -> Result<Summary> {
    let n = cfg.n.unwrap_or(if opts.fine { 100 } else { 32 });
    let degree = cfg.degree.unwrap_or(2);
    let model = cfg.model(&[0.0, 1.0, 0.0, 1.0], &[n, n])?;

    let (bottom, top) = (model.boundary_facet_entity(1, false), model.boundary_facet_entity(1, true));
    let right = model.boundary_facet_entity(0, true);
    let vspec = SpaceSpec::new(Family::RaviartThomas, 0, ValueKind::Vector, Conformity::HDiv).dirichlet([bottom, top]);
    let qspec = SpaceSpec::new(Family::QLagrangian, 0, ValueKind::Scalar, Conformity::L2);
    let v = FESpace::new(&model, &vspec)?;
    let q = FESpace::new(&model, &qspec)?;
    let u = TrialSpace::new(&v, &[constant_fn(Vector::ZERO)])?;
    let p = TrialSpace::homogeneous(&q);
    let x = MultiFieldSpace::new(vec![u, p])?;

    let omega: Domain = triangulation(&model).into();
    let neumann: Domain = boundary_triangulation(&model, Some(&[TagRef::Entity(right)]))?.into();
    let hom = opts.homogeneous;
    let h = -1.0;
    let terms = vec![
        Term::linear(omega.clone(), degree, move |qp, u, v| {
            v[0].vector.dot(&(kinv(&qp.x, hom) * u[0].vector)) - v[0].div * u[1].value + v[1].value * u[0].div
        })?,
        Term::source(neumann.clone(), degree, move |qp, v| v[0].vector.dot(&qp.normal) * h)?,
    ];
    let op = cfg.assembler().assemble_affine(&x, &x.test(), &terms)?;
    let mut sol = op.solve(&cfg.linear_solver(Ordering::NestedDissection))?;
    let ph = sol.pop().expect("two fields");
    let uh = sol.pop().expect("two fields");

    let uhf = CellField::fe(&uh);
    let phf = CellField::fe(&ph);
    let mut s = Summary::new("darcy");
    s.set("cells", model.num_cells());
    s.set("flux_dofs", v.num_free());
    s.set("pressure_dofs", q.num_free());
    s.set("homogeneous", hom);
    let gd: Domain = boundary_triangulation(&model, Some(&[TagRef::Entity(bottom), TagRef::Entity(top)]))?.into();
    let flux = uhf.clone() * normal_vector(&gd)?;
    let facet_flux = integrate(&flux, &gd, degree)?;
    s.set_f64("dirichlet_flux_max", facet_flux.iter().fold(0.0, |m, f| m.max(f.abs())));
    s.set_f64("dirichlet_normal_velocity_max", max_abs(&flux, &gd, degree)?);
    let outflow = integrate_sum(&(uhf.clone() * normal_vector(&neumann)?), &neumann, degree)?;
    s.set_f64("outflow_right", outflow);
    s.set_f64("ph_min", ph.free.iter().fold(f64::INFINITY, |m, v| m.min(*v)));
    s.set_f64("ph_max", ph.free.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)));
    if hom {
        // x1 is not in Q0, so the pressure is compared with its cell averages
        let ue = CellField::constant(Vector::new2(-1.0, 0.0));
        let (x0, dx) = (model.origin()[0], model.cell_size()[0]);
        let avg = CellField::law(
            0,
            move |x, _| Ok(Value::Scalar(x0 + (((x[0] - x0) / dx).floor() + 0.5) * dx)),
            vec![],
        )?;
        let px = CellField::function(scalar_fn(|x| x[0]));
        s.set_f64("el2_u", l2_norm(&(uhf.clone() - ue), &omega, degree)?);
        s.set_f64("el2_p", l2_norm(&(phf.clone() - avg), &omega, degree)?);
        s.set_f64("el2_p_pointwise", l2_norm(&(phf.clone() - px), &omega, degree)?);
    }
    if let Some(path) = cfg.vtk_path() {
        write_vtk(&omega, path, &[("uh", uhf), ("ph", phf)])?;
    }
    s.write(cfg)?;
    Ok(s)
}

fn l2_norm(e: &CellField, omega: &Domain, degree: usize) -> Result<f64> {
    Ok(integrate_sum(&e.inner(e), omega, degree)?.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn switch_region() {
        assert_eq!(kinv(&Vector::new2(0.5, 0.55), false).0[0][1], 90.0);
        assert_eq!(kinv(&Vector::new2(0.5, 0.55), true).0[0][1], 0.0);
        assert_eq!(kinv(&Vector::new2(0.7, 0.5), false).0[0][0], 1.0);
    }
}
