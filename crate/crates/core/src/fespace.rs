//! Global finite element spaces: dof numbering, Dirichlet data, multi-field
//! composition and the zero-mean constraint.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::cell_map;
use crate::mesh::{DiscreteModel, TagRef};
use crate::reffe::{gauss_rule, Conformity, Family, ReferenceElement, ShapeValue, ValueKind};
use crate::tensor::{Value, Vector};

/// A function of the physical coordinates.
pub type PointFn = Arc<dyn Fn(&Vector) -> Value + Send + Sync>;

pub fn scalar_fn(f: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> PointFn {
    Arc::new(move |x| Value::Scalar(f(x)))
}

pub fn vector_fn(f: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> PointFn {
    Arc::new(move |x| Value::Vector(f(x)))
}

pub fn constant_fn(v: impl Into<Value>) -> PointFn {
    let v = v.into();
    Arc::new(move |_| v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    ZeroMean,
}

/// Global dof id: `>= 0` free, `< 0` Dirichlet number `-(id + 1)`.
pub type DofId = i64;

pub fn dirichlet_index(id: DofId) -> Option<usize> {
    (id < 0).then(|| (-id - 1) as usize)
}

/// Specification of a space, see [`FESpace::new`].
#[derive(Clone, Debug)]
pub struct SpaceSpec {
    pub family: Family,
    pub order: usize,
    pub kind: ValueKind,
    pub conformity: Conformity,
    pub dirichlet_tags: Vec<TagRef>,
    pub dirichlet_masks: Option<Vec<Vec<bool>>>,
    pub constraint: Option<Constraint>,
}

impl SpaceSpec {
    pub fn new(family: Family, order: usize, kind: ValueKind, conformity: Conformity) -> Self {
        SpaceSpec {
            family,
            order,
            kind,
            conformity,
            dirichlet_tags: Vec::new(),
            dirichlet_masks: None,
            constraint: None,
        }
    }

    pub fn dirichlet<T: Into<TagRef>>(mut self, tags: impl IntoIterator<Item = T>) -> Self {
        self.dirichlet_tags = tags.into_iter().map(Into::into).collect();
        self
    }

    pub fn masks(mut self, masks: Vec<Vec<bool>>) -> Self {
        self.dirichlet_masks = Some(masks);
        self
    }

    pub fn zero_mean(mut self) -> Self {
        self.constraint = Some(Constraint::ZeroMean);
        self
    }
}

/// Which functional a Dirichlet dof takes: the cell and local dof used to
/// evaluate it, and the index of the tag (or `None` for the zero-mean dof).
#[derive(Clone, Copy, Debug, PartialEq)]
struct DirichletDof {
    cell: usize,
    local: usize,
    tag: Option<usize>,
}

/// A global finite element (test) space.
#[derive(Debug)]
pub struct FESpace {
    model: Arc<DiscreteModel>,
    reffe: ReferenceElement,
    ndofs_cell: usize,
    cell_dofs: Vec<DofId>,
    cell_signs: Vec<f64>,
    nfree: usize,
    dirichlet: Vec<DirichletDof>,
    ntags: usize,
    constraint: Option<Constraint>,
}

impl FESpace {
    pub fn new(model: &Arc<DiscreteModel>, spec: &SpaceSpec) -> Result<Arc<FESpace>> {
        let d = model.dim();
        let reffe = ReferenceElement::new(d, spec.family, spec.order, spec.kind, spec.conformity)?;
        let ncomp = match spec.conformity {
            Conformity::HDiv => 1,
            _ => reffe.num_components(),
        };
        if spec.conformity == Conformity::L2 && !spec.dirichlet_tags.is_empty() {
            return Err(Error::Incompatible(
                "discontinuous spaces do not take dirichlet tags".into(),
            ));
        }
        let labels = model.labeling();
        let mut tag_sets: Vec<(BTreeSet<u32>, Vec<bool>)> = Vec::new();
        for (i, tag) in spec.dirichlet_tags.iter().enumerate() {
            let set = labels.resolve(tag)?;
            let mask = match &spec.dirichlet_masks {
                Some(ms) => {
                    let m = ms.get(i).ok_or_else(|| Error::MaskArity {
                        tag: tag.to_string(),
                        got: 0,
                        expected: ncomp,
                    })?;
                    if m.len() != ncomp {
                        return Err(Error::MaskArity {
                            tag: tag.to_string(),
                            got: m.len(),
                            expected: ncomp,
                        });
                    }
                    m.clone()
                }
                None => vec![true; ncomp],
            };
            tag_sets.push((set, mask));
        }
        if let Some(ms) = &spec.dirichlet_masks {
            if ms.len() != spec.dirichlet_tags.len() {
                return Err(Error::Arity(format!(
                    "{} dirichlet masks for {} dirichlet tags",
                    ms.len(),
                    spec.dirichlet_tags.len()
                )));
            }
        }

        let ncells = model.num_cells();
        let nd = reffe.num_dofs();
        let mut cell_dofs = vec![0; ncells * nd];
        let mut cell_signs = Vec::new();
        let mut nfree = 0usize;
        let mut dirichlet = Vec::new();
        let claim = |entity: u32, comp: usize| -> Option<usize> {
            tag_sets
                .iter()
                .enumerate()
                .rev()
                .find(|(_, (set, mask))| set.contains(&entity) && mask[comp])
                .map(|(i, _)| i)
        };
        let cube = model.cube();

        match spec.conformity {
            Conformity::L2 => {
                for (i, x) in cell_dofs.iter_mut().enumerate() {
                    *x = i as DofId;
                }
                nfree = ncells * nd;
            }
            Conformity::H1 => {
                let k = spec.order;
                let lattice: Vec<usize> = model.partition().iter().map(|n| n * k + 1).collect();
                let mut seen: HashMap<(usize, usize), DofId> = HashMap::new();
                for c in 0..ncells {
                    let idx = model.cell_index(c);
                    for l in 0..nd {
                        let node = reffe.dof_node(l);
                        let comp = reffe.dof_component(l);
                        let mut r = node;
                        let mut g = 0;
                        let mut stride = 1;
                        for a in 0..d {
                            let i = r % (k + 1);
                            r /= k + 1;
                            g += (idx[a] * k + i) * stride;
                            stride *= lattice[a];
                        }
                        let id = *seen.entry((g, comp)).or_insert_with(|| {
                            let owner = reffe.dof_owner(l);
                            let fd = cube.face_dim(owner);
                            let local = owner - cube.faces_of_dim(fd).start;
                            let face = model.cell_faces(c, fd)[local];
                            let entity = labels.entity(fd, face);
                            match claim(entity, comp) {
                                Some(t) => {
                                    dirichlet.push(DirichletDof {
                                        cell: c,
                                        local: l,
                                        tag: Some(t),
                                    });
                                    -(dirichlet.len() as DofId)
                                }
                                None => {
                                    nfree += 1;
                                    nfree as DofId - 1
                                }
                            }
                        });
                        cell_dofs[c * nd + l] = id;
                    }
                }
            }
            Conformity::HDiv => {
                cell_signs = vec![0.0; ncells * nd];
                let mut seen: HashMap<usize, DofId> = HashMap::new();
                for c in 0..ncells {
                    let facets = model.cell_faces(c, d - 1);
                    for l in 0..nd {
                        let (_, high) = cube.facet_axis_side(l);
                        let f = facets[l];
                        let id = *seen.entry(f).or_insert_with(|| {
                            match claim(labels.entity(d - 1, f), 0) {
                                Some(t) => {
                                    dirichlet.push(DirichletDof {
                                        cell: c,
                                        local: l,
                                        tag: Some(t),
                                    });
                                    -(dirichlet.len() as DofId)
                                }
                                None => {
                                    nfree += 1;
                                    nfree as DofId - 1
                                }
                            }
                        });
                        cell_dofs[c * nd + l] = id;
                        cell_signs[c * nd + l] = if high { 1.0 } else { -1.0 };
                    }
                }
            }
        }

        if spec.constraint == Some(Constraint::ZeroMean) {
            if nfree == 0 {
                return Err(Error::InvalidArgument("zero-mean constraint on a space without free dofs".into()));
            }
            if spec.kind != ValueKind::Scalar || spec.family == Family::RaviartThomas {
                return Err(Error::Incompatible("zero-mean constraint needs a scalar Lagrangian space".into()));
            }
            let last = nfree as DofId - 1;
            let mut rep = None;
            dirichlet.push(DirichletDof {
                cell: 0,
                local: 0,
                tag: None,
            });
            let new_id = -(dirichlet.len() as DofId);
            for (i, x) in cell_dofs.iter_mut().enumerate() {
                if *x == last {
                    *x = new_id;
                    rep.get_or_insert((i / nd, i % nd));
                }
            }
            let (cell, local) = rep.unwrap();
            let slot = dirichlet.last_mut().unwrap();
            slot.cell = cell;
            slot.local = local;
            nfree -= 1;
        }

        Ok(Arc::new(FESpace {
            model: model.clone(),
            reffe,
            ndofs_cell: nd,
            cell_dofs,
            cell_signs,
            nfree,
            dirichlet,
            ntags: spec.dirichlet_tags.len(),
            constraint: spec.constraint,
        }))
    }

    pub fn model(&self) -> &Arc<DiscreteModel> {
        &self.model
    }

    pub fn reffe(&self) -> &ReferenceElement {
        &self.reffe
    }

    pub fn num_free(&self) -> usize {
        self.nfree
    }

    pub fn num_dirichlet(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn num_dirichlet_tags(&self) -> usize {
        self.ntags
    }

    pub fn constraint(&self) -> Option<Constraint> {
        self.constraint
    }

    pub fn num_cell_dofs(&self) -> usize {
        self.ndofs_cell
    }

    pub fn cell_dofs(&self, c: usize) -> &[DofId] {
        &self.cell_dofs[c * self.ndofs_cell..(c + 1) * self.ndofs_cell]
    }

    /// Orientation signs of the cell dofs (all ones except for HDiv).
    pub fn cell_sign(&self, c: usize, l: usize) -> f64 {
        if self.cell_signs.is_empty() {
            1.0
        } else {
            self.cell_signs[c * self.ndofs_cell + l]
        }
    }

    /// Tag index claiming Dirichlet dof `i` (`None` for the zero-mean dof).
    pub fn dirichlet_tag(&self, i: usize) -> Option<usize> {
        self.dirichlet[i].tag
    }

    /// Physical shape values of the cell dofs at reference point `xi`,
    /// orientation signs applied.
    pub fn cell_shapes(&self, c: usize, xi: &[f64; 3], out: &mut [ShapeValue]) {
        self.reffe.evaluate(xi, out);
        let map = cell_map(&self.model, c);
        for (l, s) in out.iter_mut().enumerate().take(self.ndofs_cell) {
            let mut p = self.reffe.map_to_physical(&map, s);
            let sg = self.cell_sign(c, l);
            if sg != 1.0 {
                p = scaled(&p, sg);
            }
            *s = p;
        }
    }

    /// Value of the dof functional of local dof `l` in cell `c` applied to `f`.
    fn functional(&self, c: usize, l: usize, f: &PointFn) -> Result<f64> {
        let map = cell_map(&self.model, c);
        match self.reffe.family() {
            Family::RaviartThomas => {
                let d = self.model.dim();
                let (axis, high) = self.model.cube().facet_axis_side(l);
                let rule = gauss_rule(d - 1, 4);
                let h = self.model.cell_size();
                let measure: f64 = (0..d).filter(|a| *a != axis).map(|a| h[a]).product();
                let mut flux = 0.0;
                for (p, w) in rule.points.iter().zip(&rule.weights) {
                    let mut xi = [0.0; 3];
                    let mut k = 0;
                    for (a, slot) in xi.iter_mut().enumerate().take(d) {
                        if a == axis {
                            *slot = if high { 1.0 } else { 0.0 };
                        } else {
                            *slot = p[k];
                            k += 1;
                        }
                    }
                    let v = f(&map.apply(&xi));
                    let v = v.as_vector().ok_or_else(|| {
                        Error::Kind(format!("flux data must be a vector, got a {}", v.kind_name()))
                    })?;
                    flux += w * measure * v[axis];
                }
                Ok(flux)
            }
            _ => {
                let node = self.reffe.nodes()[self.reffe.dof_node(l)];
                let v = f(&map.apply(&node));
                match (self.reffe.kind(), v) {
                    (ValueKind::Scalar, Value::Scalar(s)) => Ok(s),
                    (ValueKind::Vector, Value::Vector(u)) => Ok(u[self.reffe.dof_component(l)]),
                    (k, v) => Err(Error::Kind(format!(
                        "{k:?} space cannot interpolate a {} function",
                        v.kind_name()
                    ))),
                }
            }
        }
    }

    /// Interpolates `f` on every dof, free and Dirichlet.
    pub fn interpolate_all(&self, f: &PointFn) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut free = vec![0.0; self.nfree];
        let mut dir = vec![0.0; self.dirichlet.len()];
        for c in 0..self.model.num_cells() {
            for (l, &id) in self.cell_dofs(c).iter().enumerate() {
                let v = self.functional(c, l, f)?;
                match dirichlet_index(id) {
                    None => free[id as usize] = v,
                    Some(i) => dir[i] = v,
                }
            }
        }
        Ok((free, dir))
    }
}

fn scaled(s: &ShapeValue, a: f64) -> ShapeValue {
    let mut o = ShapeValue::ZERO;
    o.axpy(a, s);
    o
}

/// A space together with prescribed Dirichlet values.
#[derive(Clone, Debug)]
pub struct TrialSpace {
    space: Arc<FESpace>,
    dirichlet_values: Arc<Vec<f64>>,
}

impl TrialSpace {
    /// Dirichlet values from one function per dirichlet tag, or a single
    /// function for all tags.
    pub fn new(space: &Arc<FESpace>, fns: &[PointFn]) -> Result<Self> {
        let ntags = space.num_dirichlet_tags();
        if !(fns.len() == ntags || (fns.len() == 1 && ntags > 0) || (ntags == 0 && fns.is_empty())) {
            return Err(Error::FunctionCount {
                got: fns.len(),
                expected: ntags,
            });
        }
        let mut vals = vec![0.0; space.num_dirichlet()];
        for (i, d) in space.dirichlet.iter().enumerate() {
            if let Some(t) = d.tag {
                let f = if fns.len() == 1 { &fns[0] } else { &fns[t] };
                vals[i] = space.functional(d.cell, d.local, f)?;
            }
        }
        Ok(TrialSpace {
            space: space.clone(),
            dirichlet_values: Arc::new(vals),
        })
    }

    /// Trial space with zero Dirichlet values.
    pub fn homogeneous(space: &Arc<FESpace>) -> Self {
        TrialSpace {
            space: space.clone(),
            dirichlet_values: Arc::new(vec![0.0; space.num_dirichlet()]),
        }
    }

    pub fn space(&self) -> &Arc<FESpace> {
        &self.space
    }

    pub fn dirichlet_values(&self) -> &[f64] {
        &self.dirichlet_values
    }

    pub fn function(&self, free: Vec<f64>) -> Result<FEFunction> {
        if free.len() != self.space.num_free() {
            return Err(Error::Arity(format!(
                "{} free values for a space with {} free dofs",
                free.len(),
                self.space.num_free()
            )));
        }
        Ok(FEFunction {
            trial: self.clone(),
            dirichlet: self.dirichlet_values.to_vec(),
            free,
        })
    }

    pub fn zero(&self) -> FEFunction {
        self.function(vec![0.0; self.space.num_free()]).unwrap()
    }

    /// Interpolant of `f`, keeping the trial Dirichlet values.
    pub fn interpolate(&self, f: &PointFn) -> Result<FEFunction> {
        let (free, _) = self.space.interpolate_all(f)?;
        self.function(free)
    }
}

impl From<&Arc<FESpace>> for TrialSpace {
    fn from(s: &Arc<FESpace>) -> Self {
        TrialSpace::homogeneous(s)
    }
}

/// A function of a trial space.
#[derive(Clone, Debug)]
pub struct FEFunction {
    trial: TrialSpace,
    pub free: Vec<f64>,
    pub dirichlet: Vec<f64>,
}

impl FEFunction {
    pub fn space(&self) -> &Arc<FESpace> {
        &self.trial.space
    }

    pub fn trial(&self) -> &TrialSpace {
        &self.trial
    }

    pub fn dof_value(&self, id: DofId) -> f64 {
        match dirichlet_index(id) {
            None => self.free[id as usize],
            Some(i) => self.dirichlet[i],
        }
    }

    /// Local coefficients of cell `c` (without orientation signs).
    pub fn cell_values(&self, c: usize) -> Vec<f64> {
        self.space().cell_dofs(c).iter().map(|&id| self.dof_value(id)).collect()
    }

    /// Value, gradient and divergence at reference point `xi` of cell `c`.
    pub fn evaluate(&self, c: usize, xi: &[f64; 3]) -> ShapeValue {
        let sp = self.space();
        let mut buf = vec![ShapeValue::ZERO; sp.num_cell_dofs()];
        sp.cell_shapes(c, xi, &mut buf);
        let mut out = ShapeValue::ZERO;
        for (s, &id) in buf.iter().zip(sp.cell_dofs(c)) {
            out.axpy(self.dof_value(id), s);
        }
        out
    }

    /// Adds a constant to a scalar Lagrangian function.
    pub fn shifted(&self, c: f64) -> Result<FEFunction> {
        let r = self.space().reffe();
        if r.kind() != ValueKind::Scalar || r.family() == Family::RaviartThomas {
            return Err(Error::Kind("only scalar Lagrangian functions can be shifted".into()));
        }
        let mut out = self.clone();
        out.free.iter_mut().for_each(|x| *x += c);
        out.dirichlet.iter_mut().for_each(|x| *x += c);
        Ok(out)
    }

    /// Integral over the whole model, with a rule of degree `degree`.
    pub fn integral(&self, degree: usize) -> Result<f64> {
        let model = self.space().model();
        let rule = gauss_rule(model.dim(), degree);
        let mut s = 0.0;
        for c in 0..model.num_cells() {
            let det = cell_map(model, c).det();
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                s += w * det * self.evaluate(c, p).value;
            }
        }
        Ok(s)
    }

    /// The function shifted by a constant so that its mean vanishes.
    pub fn zero_mean_postshift(&self) -> Result<FEFunction> {
        let degree = 2 * self.space().reffe().order().max(1);
        let model = self.space().model();
        let measure: f64 = model.extents().iter().product();
        let mean = self.integral(degree)? / measure;
        let once = self.shifted(-mean)?;
        // second pass removes the rounding left by the first
        let rest = once.integral(degree)? / measure;
        once.shifted(-rest)
    }
}

/// Ordered list of trial spaces sharing one global free-dof numbering.
#[derive(Clone, Debug)]
pub struct MultiFieldSpace {
    fields: Vec<TrialSpace>,
    offsets: Vec<usize>,
    nfree: usize,
}

impl MultiFieldSpace {
    pub fn new(fields: Vec<TrialSpace>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidArgument("multi-field space needs at least one field".into()))?;
        let model = first.space.model().clone();
        let mut offsets = Vec::with_capacity(fields.len());
        let mut n = 0;
        for f in &fields {
            if !Arc::ptr_eq(f.space.model(), &model) {
                return Err(Error::DomainMismatch("fields live on different models".into()));
            }
            offsets.push(n);
            n += f.space.num_free();
        }
        Ok(MultiFieldSpace {
            fields,
            offsets,
            nfree: n,
        })
    }

    pub fn single(trial: TrialSpace) -> Self {
        MultiFieldSpace::new(vec![trial]).unwrap()
    }

    /// The matching test space (same numbering, zero Dirichlet values).
    pub fn test(&self) -> Self {
        MultiFieldSpace {
            fields: self.fields.iter().map(|f| TrialSpace::homogeneous(&f.space)).collect(),
            offsets: self.offsets.clone(),
            nfree: self.nfree,
        }
    }

    pub fn model(&self) -> &Arc<DiscreteModel> {
        self.fields[0].space.model()
    }

    pub fn num_fields(&self) -> usize {
        self.fields.len()
    }

    pub fn field(&self, i: usize) -> &TrialSpace {
        &self.fields[i]
    }

    pub fn fields(&self) -> &[TrialSpace] {
        &self.fields
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn num_free(&self) -> usize {
        self.nfree
    }

    /// Same numbering as `other` (field by field the same spaces).
    pub fn matches(&self, other: &MultiFieldSpace) -> bool {
        self.fields.len() == other.fields.len()
            && self
                .fields
                .iter()
                .zip(&other.fields)
                .all(|(a, b)| Arc::ptr_eq(&a.space, &b.space))
    }

    pub fn unpack(&self, x: &[f64]) -> Result<Vec<FEFunction>> {
        if x.len() != self.nfree {
            return Err(Error::Arity(format!(
                "{} values for a multi-field space with {} free dofs",
                x.len(),
                self.nfree
            )));
        }
        self.fields
            .iter()
            .zip(&self.offsets)
            .map(|(f, &o)| f.function(x[o..o + f.space.num_free()].to_vec()))
            .collect()
    }

    pub fn pack(&self, fs: &[FEFunction]) -> Vec<f64> {
        fs.iter().flat_map(|f| f.free.iter().copied()).collect()
    }

    pub fn zero(&self) -> Vec<f64> {
        vec![0.0; self.nfree]
    }
}
