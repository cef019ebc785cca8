//! Integration domains: interior cells, tagged boundary facets and the
//! interior-facet skeleton.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{DiscreteModel, TagRef};
use crate::reffe::{gauss_rule, AffineMap, QuadratureRule};
use crate::tensor::Vector;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Affine map of cell `c`.
pub fn cell_map(model: &DiscreteModel, c: usize) -> AffineMap {
    AffineMap::new(&model.cell_origin(c), &model.cell_size())
}

/// All cells of a model.
#[derive(Clone, Debug)]
pub struct InteriorTriangulation {
    model: Arc<DiscreteModel>,
    id: u64,
}

/// A boundary facet seen from its only cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFacet {
    pub facet: usize,
    pub cell: usize,
    /// Local facet index in the cell.
    pub local: usize,
    pub axis: usize,
    pub high: bool,
    /// Outward unit normal.
    pub normal: Vector,
    pub measure: f64,
}

#[derive(Clone, Debug)]
pub struct BoundaryTriangulation {
    model: Arc<DiscreteModel>,
    facets: Vec<BoundaryFacet>,
    id: u64,
}

/// An interior facet; `plus` is the smaller cell id and the normal points
/// from `plus` into `minus`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkeletonFacet {
    pub facet: usize,
    pub plus: usize,
    pub minus: usize,
    pub local_plus: usize,
    pub local_minus: usize,
    pub axis: usize,
    pub normal: Vector,
    pub measure: f64,
    /// Largest edge length of the facet.
    pub diameter: f64,
}

#[derive(Clone, Debug)]
pub struct SkeletonTriangulation {
    model: Arc<DiscreteModel>,
    facets: Vec<SkeletonFacet>,
    id: u64,
}

pub fn triangulation(model: &Arc<DiscreteModel>) -> InteriorTriangulation {
    InteriorTriangulation {
        model: model.clone(),
        id: fresh_id(),
    }
}

fn facet_measure(h: &[f64], axis: usize) -> (f64, f64) {
    let mut m = 1.0;
    let mut diam: f64 = 0.0;
    for (a, ha) in h.iter().enumerate() {
        if a != axis {
            m *= ha;
            diam = diam.max(*ha);
        }
    }
    if h.len() == 1 {
        diam = 1.0;
    }
    (m, diam)
}

/// Boundary facets whose entity is in `tags` (all boundary facets when
/// `tags` is `None`).
pub fn boundary_triangulation(
    model: &Arc<DiscreteModel>,
    tags: Option<&[TagRef]>,
) -> Result<BoundaryTriangulation> {
    let d = model.dim();
    let labels = model.labeling();
    let wanted: Option<BTreeSet<u32>> = tags.map(|t| labels.resolve_all(t)).transpose()?;
    let h = model.cell_size();
    let cube = model.cube();
    let fr = cube.faces_of_dim(d - 1);
    let mut facets = Vec::new();
    for c in 0..model.num_cells() {
        let idx = model.cell_index(c);
        for (local, &f) in model.cell_faces(c, d - 1).iter().enumerate() {
            let (axis, high) = cube.facet_axis_side(local);
            let on_boundary = if high {
                idx[axis] + 1 == model.partition()[axis]
            } else {
                idx[axis] == 0
            };
            if !on_boundary {
                continue;
            }
            if let Some(w) = &wanted {
                if !w.contains(&labels.entity(d - 1, f)) {
                    continue;
                }
            }
            let sign = if high { 1.0 } else { -1.0 };
            let (measure, _) = facet_measure(&h, axis);
            facets.push(BoundaryFacet {
                facet: f,
                cell: c,
                local,
                axis,
                high,
                normal: Vector::axis(axis) * sign,
                measure,
            });
            debug_assert!(local < fr.len());
        }
    }
    if facets.is_empty() {
        let what = tags
            .map(|t| t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
            .unwrap_or_else(|| "boundary".into());
        return Err(Error::EmptyDomain(format!("no boundary facets carry tags [{what}]")));
    }
    facets.sort_by_key(|f| f.facet);
    Ok(BoundaryTriangulation {
        model: model.clone(),
        facets,
        id: fresh_id(),
    })
}

pub fn skeleton_triangulation(model: &Arc<DiscreteModel>) -> Result<SkeletonTriangulation> {
    let d = model.dim();
    let cube = model.cube();
    let h = model.cell_size();
    let mut facets = Vec::new();
    for c in 0..model.num_cells() {
        let idx = model.cell_index(c);
        for axis in 0..d {
            if idx[axis] + 1 >= model.partition()[axis] {
                continue;
            }
            let local_plus = cube.facet_index(axis, true);
            let local_minus = cube.facet_index(axis, false);
            let f = model.cell_faces(c, d - 1)[local_plus];
            let [plus, minus] = model.facet_cells(f);
            debug_assert_eq!(plus, c);
            let (measure, diameter) = facet_measure(&h, axis);
            facets.push(SkeletonFacet {
                facet: f,
                plus,
                minus,
                local_plus,
                local_minus,
                axis,
                normal: Vector::axis(axis),
                measure,
                diameter,
            });
        }
    }
    if facets.is_empty() {
        return Err(Error::EmptyDomain("model has a single cell, the skeleton is empty".into()));
    }
    facets.sort_by_key(|f| f.facet);
    Ok(SkeletonTriangulation {
        model: model.clone(),
        facets,
        id: fresh_id(),
    })
}

impl InteriorTriangulation {
    pub fn model(&self) -> &Arc<DiscreteModel> {
        &self.model
    }

    pub fn num_cells(&self) -> usize {
        self.model.num_cells()
    }
}

impl BoundaryTriangulation {
    pub fn model(&self) -> &Arc<DiscreteModel> {
        &self.model
    }

    pub fn facets(&self) -> &[BoundaryFacet] {
        &self.facets
    }
}

impl SkeletonTriangulation {
    pub fn model(&self) -> &Arc<DiscreteModel> {
        &self.model
    }

    pub fn facets(&self) -> &[SkeletonFacet] {
        &self.facets
    }

    pub fn id(&self) -> u64 {
        self.id
    }
}

/// Any of the three integration domains.
#[derive(Clone, Debug)]
pub enum Domain {
    Interior(InteriorTriangulation),
    Boundary(BoundaryTriangulation),
    Skeleton(SkeletonTriangulation),
}

impl From<InteriorTriangulation> for Domain {
    fn from(t: InteriorTriangulation) -> Self {
        Domain::Interior(t)
    }
}

impl From<BoundaryTriangulation> for Domain {
    fn from(t: BoundaryTriangulation) -> Self {
        Domain::Boundary(t)
    }
}

impl From<SkeletonTriangulation> for Domain {
    fn from(t: SkeletonTriangulation) -> Self {
        Domain::Skeleton(t)
    }
}

/// Where a quadrature point sits in a cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellPoint {
    pub cell: usize,
    pub xi: [f64; 3],
}

/// One quadrature point of a domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QPoint {
    /// Physical coordinates.
    pub x: Vector,
    /// Physical weight (reference weight times cell or facet measure).
    pub weight: f64,
    /// Facet normal (outward on the boundary, `n+` on the skeleton); zero
    /// in the interior.
    pub normal: Vector,
    /// Position in the (plus) cell.
    pub at: CellPoint,
    /// Position in the minus cell (skeleton only).
    pub minus: Option<CellPoint>,
    /// Facet diameter (facets only).
    pub h: f64,
}

/// A group of quadrature points belonging to one cell or facet.
#[derive(Clone, Debug)]
pub struct Item {
    /// Cell id (interior), facet id (boundary and skeleton).
    pub id: usize,
    pub cell: usize,
    pub minus: Option<usize>,
    pub points: Vec<QPoint>,
}

fn embed(facet_pt: &[f64; 3], axis: usize, at: f64, dim: usize) -> [f64; 3] {
    let mut xi = [0.0; 3];
    let mut k = 0;
    for (a, slot) in xi.iter_mut().enumerate().take(dim) {
        if a == axis {
            *slot = at;
        } else {
            *slot = facet_pt[k];
            k += 1;
        }
    }
    xi
}

impl Domain {
    pub fn model(&self) -> &Arc<DiscreteModel> {
        match self {
            Domain::Interior(t) => &t.model,
            Domain::Boundary(t) => &t.model,
            Domain::Skeleton(t) => &t.model,
        }
    }

    pub fn id(&self) -> u64 {
        match self {
            Domain::Interior(t) => t.id,
            Domain::Boundary(t) => t.id,
            Domain::Skeleton(t) => t.id,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Domain::Interior(_) => "interior",
            Domain::Boundary(_) => "boundary",
            Domain::Skeleton(_) => "skeleton",
        }
    }

    pub fn is_skeleton(&self) -> bool {
        matches!(self, Domain::Skeleton(_))
    }

    /// Number of cells (interior) or facets.
    pub fn len(&self) -> usize {
        match self {
            Domain::Interior(t) => t.num_cells(),
            Domain::Boundary(t) => t.facets.len(),
            Domain::Skeleton(t) => t.facets.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reference rule used on the cells or facets of this domain.
    pub fn rule(&self, degree: usize) -> QuadratureRule {
        let d = self.model().dim();
        match self {
            Domain::Interior(_) => gauss_rule(d, degree),
            _ => gauss_rule(d - 1, degree),
        }
    }

    /// Quadrature points of item `i`.
    pub fn item(&self, i: usize, rule: &QuadratureRule) -> Item {
        let model = self.model();
        let d = model.dim();
        match self {
            Domain::Interior(_) => {
                let map = cell_map(model, i);
                let det = map.det();
                let points = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(xi, w)| QPoint {
                        x: map.apply(xi),
                        weight: w * det,
                        normal: Vector::ZERO,
                        at: CellPoint { cell: i, xi: *xi },
                        minus: None,
                        h: 0.0,
                    })
                    .collect();
                Item {
                    id: i,
                    cell: i,
                    minus: None,
                    points,
                }
            }
            Domain::Boundary(t) => {
                let f = &t.facets[i];
                let map = cell_map(model, f.cell);
                let at = if f.high { 1.0 } else { 0.0 };
                let (_, diam) = facet_measure(&model.cell_size(), f.axis);
                let points = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| {
                        let xi = embed(p, f.axis, at, d);
                        QPoint {
                            x: map.apply(&xi),
                            weight: w * f.measure,
                            normal: f.normal,
                            at: CellPoint { cell: f.cell, xi },
                            minus: None,
                            h: diam,
                        }
                    })
                    .collect();
                Item {
                    id: f.facet,
                    cell: f.cell,
                    minus: None,
                    points,
                }
            }
            Domain::Skeleton(t) => {
                let f = &t.facets[i];
                let map = cell_map(model, f.plus);
                let points = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| {
                        let xp = embed(p, f.axis, 1.0, d);
                        let xm = embed(p, f.axis, 0.0, d);
                        QPoint {
                            x: map.apply(&xp),
                            weight: w * f.measure,
                            normal: f.normal,
                            at: CellPoint { cell: f.plus, xi: xp },
                            minus: Some(CellPoint { cell: f.minus, xi: xm }),
                            h: f.diameter,
                        }
                    })
                    .collect();
                Item {
                    id: f.facet,
                    cell: f.plus,
                    minus: Some(f.minus),
                    points,
                }
            }
        }
    }

    /// Reference positions of the vertices of item `i`, for sampling fields
    /// at vertices. Interior: cell vertices in tensor order; facets: facet
    /// vertices in tensor order of the remaining axes.
    pub fn item_vertices(&self, i: usize) -> Vec<QPoint> {
        let d = self.model().dim();
        let k = match self {
            Domain::Interior(_) => d,
            _ => d - 1,
        };
        let pts: Vec<[f64; 3]> = (0..1usize << k)
            .map(|v| {
                let mut p = [0.0; 3];
                for (a, slot) in p.iter_mut().enumerate().take(k) {
                    *slot = ((v >> a) & 1) as f64;
                }
                p
            })
            .collect();
        let rule = QuadratureRule {
            dim: k,
            weights: vec![0.0; pts.len()],
            points: pts,
            degree: 0,
        };
        self.item(i, &rule).points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> Arc<DiscreteModel> {
        Arc::new(DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[n, n]).unwrap())
    }

    #[test]
    fn skeleton_count() {
        let s = skeleton_triangulation(&square(4)).unwrap();
        assert_eq!(s.facets().len(), 24);
        let total: f64 = s.facets().iter().map(|f| f.diameter).sum();
        assert!((total - 2.0 * 4.0 * 3.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_tag() {
        let r = boundary_triangulation(&square(2), Some(&["circle-like".into()]));
        assert!(matches!(r, Err(Error::NameResolution(_))));
    }

    #[test]
    fn interior_tag_gives_empty_boundary() {
        let r = boundary_triangulation(&square(2), Some(&["interior".into()]));
        assert!(matches!(r, Err(Error::EmptyDomain(_))));
    }

    #[test]
    fn normals() {
        let m = square(2);
        let right = boundary_triangulation(&m, Some(&[8u32.into()])).unwrap();
        assert_eq!(right.facets().len(), 2);
        assert!(right.facets().iter().all(|f| f.normal == Vector::new2(1.0, 0.0)));
        let bottom = boundary_triangulation(&m, Some(&[5u32.into()])).unwrap();
        assert!(bottom.facets().iter().all(|f| f.normal == Vector::new2(0.0, -1.0)));
        let m3 = Arc::new(DiscreteModel::cartesian(&[0., 1., 0., 1., 0., 1.], &[2, 2, 2]).unwrap());
        let top = boundary_triangulation(&m3, Some(&[22u32.into()])).unwrap();
        assert!(top.facets().iter().all(|f| f.normal == Vector::new(0.0, 0.0, 1.0)));
    }

    #[test]
    fn skeleton_orientation() {
        let m = Arc::new(DiscreteModel::cartesian(&[0.0, 2.0, 0.0, 1.0], &[2, 1]).unwrap());
        let s = skeleton_triangulation(&m).unwrap();
        let f = s.facets()[0];
        assert_eq!((f.plus, f.minus), (0, 1));
        assert_eq!(f.normal, Vector::new2(1.0, 0.0));
        let item = Domain::from(s).item(0, &gauss_rule(1, 2));
        for p in &item.points {
            assert_eq!(p.x[0], 1.0);
            assert_eq!(p.minus.unwrap().xi[0], 0.0);
        }
    }

    #[test]
    fn facet_weights_sum_to_perimeter() {
        let m = Arc::new(DiscreteModel::cartesian(&[0.0, 3.0, 0.0, 0.5], &[5, 3]).unwrap());
        let b: Domain = boundary_triangulation(&m, None).unwrap().into();
        let rule = b.rule(2);
        let s: f64 = (0..b.len())
            .flat_map(|i| b.item(i, &rule).points)
            .map(|p| p.weight)
            .sum();
        assert!((s - 7.0).abs() < 1e-12);
    }
}
