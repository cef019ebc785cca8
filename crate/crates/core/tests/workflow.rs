use std::sync::Arc;

use cartfem::cellfield::{error_norms, CellField};
use cartfem::fespace::{scalar_fn, vector_fn, FESpace, MultiFieldSpace, SpaceSpec, TrialSpace};
use cartfem::geometry::{boundary_triangulation, triangulation, Domain};
use cartfem::mesh::{read_model, write_model, DiscreteModel, TagRef};
use cartfem::operators::{assemble_affine, Term};
use cartfem::reffe::{Conformity, Family, ValueKind};
use cartfem::solvers::{solve_linear, LinearSolver, Ordering};
use cartfem::tensor::Vector;
use cartfem::Error;

#[test]
fn model_file_round_trip_keeps_tags() {
    let m = DiscreteModel::cartesian(&[0.0, 2.0, -1.0, 1.0], &[3, 2]).unwrap();
    let labels = m.labeling().add_tag_from_tags("walls", &[TagRef::Entity(5), TagRef::Entity(6)]).unwrap();
    let m = m.with_labeling(labels).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.txt");
    write_model(&m, &p).unwrap();
    let r = read_model(&p).unwrap();
    assert_eq!(r.partition(), m.partition());
    assert_eq!(r.labeling(), m.labeling());
    let walls = TagRef::from("walls");
    assert_eq!(r.labeling().faces_with_tag(1, &walls).unwrap(), m.labeling().faces_with_tag(1, &walls).unwrap());
    assert_eq!(r.labeling().faces_with_tag(1, &walls).unwrap().len(), 6);
}

#[test]
fn quadratic_poisson_is_exact_for_quadratics() {
    let m = Arc::new(DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[3, 2]).unwrap());
    let all: Vec<u32> = (1..=8).collect();
    let v = FESpace::new(
        &m,
        &SpaceSpec::new(Family::QLagrangian, 2, ValueKind::Scalar, Conformity::H1).dirichlet(all),
    )
    .unwrap();
    let u = scalar_fn(|x| x[0] * x[0] + x[0] * x[1]);
    let x = MultiFieldSpace::single(TrialSpace::new(&v, std::slice::from_ref(&u)).unwrap());
    let omega: Domain = triangulation(&m).into();
    let t = Term::affine(omega.clone(), 4, |_, u, v| u[0].grad.dot(&v[0].grad), |_, v| -2.0 * v[0].value).unwrap();
    let uh = assemble_affine(&x, &x.test(), &[t]).unwrap().solve(&LinearSolver::default()).unwrap().remove(0);
    let ue = CellField::with_gradient(u, vector_fn(|x| Vector::new2(2.0 * x[0] + x[1], x[0])));
    let (el2, eh1) = error_norms(&(CellField::fe(&uh) - ue), &omega, 4).unwrap();
    assert!(el2 < 1e-12 && eh1 < 1e-12, "{el2} {eh1}");
}

#[test]
fn saddle_point_needs_lu() {
    let m = Arc::new(DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[4, 4]).unwrap());
    let v = FESpace::new(
        &m,
        &SpaceSpec::new(Family::RaviartThomas, 0, ValueKind::Vector, Conformity::HDiv).dirichlet([5u32, 6]),
    )
    .unwrap();
    let q = FESpace::new(&m, &SpaceSpec::new(Family::QLagrangian, 0, ValueKind::Scalar, Conformity::L2)).unwrap();
    let x = MultiFieldSpace::new(vec![TrialSpace::homogeneous(&v), TrialSpace::homogeneous(&q)]).unwrap();
    let omega = triangulation(&m);
    let right = boundary_triangulation(&m, Some(&[TagRef::Entity(8)])).unwrap();
    let terms = [
        Term::linear(omega, 2, |_, u, v| {
            v[0].vector.dot(&u[0].vector) - v[0].div * u[1].value + v[1].value * u[0].div
        })
        .unwrap(),
        Term::source(right, 2, |q, v| -v[0].vector.dot(&q.normal)).unwrap(),
    ];
    let op = assemble_affine(&x, &x.test(), &terms).unwrap();
    let cg = LinearSolver::ConjugateGradient {
        rtol: 1e-10,
        max_iters: 1000,
    };
    assert!(matches!(solve_linear(&op.matrix, &op.rhs, &cg), Err(Error::NotSpd(_))));
    let lu = LinearSolver::SparseLu {
        ordering: Ordering::NestedDissection,
    };
    let sol = op.solve(&lu).unwrap();
    // u = (-1, 0): every x-normal flux dof carries -|F|
    for f in &sol[0].free {
        assert!(f.abs() < 1e-12 || (f + 0.25).abs() < 1e-12, "{f}");
    }
}
