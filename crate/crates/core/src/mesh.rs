//! Cartesian discrete models in arbitrary dimension.
//!
//! Faces of the reference `d`-cube (and of the box domain) are enumerated in a
//! fixed order: by dimension, then by the lexicographically sorted set of free
//! axes, then by the sides of the fixed axes with the first fixed axis
//! varying fastest. In 2D this gives the corners `1..=4`, the edges
//! `5: y=y0, 6: y=y1, 7: x=x0, 8: x=x1` and the interior `9`; in 3D the 8
//! corners, 12 edges (x-parallel, y-parallel, z-parallel), 6 faces
//! (`z0, z1, y0, y1, x0, x1`) and the interior `27`.
//!
//! Entity ids of the face labeling are `1 + index` of the box face in that
//! order.

mod io;

pub use io::{read_model, write_model};

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Per-axis state of a cube face: fixed at the lower side, fixed at the upper
/// side, or spanning the axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Low,
    High,
    Free,
}

impl Side {
    fn code(self) -> usize {
        match self {
            Side::Low => 0,
            Side::High => 1,
            Side::Free => 2,
        }
    }
}

/// The faces of the reference `d`-cube, in canonical order.
#[derive(Clone, Debug)]
pub struct CubeFaces {
    dim: usize,
    faces: Vec<Vec<Side>>,
    offsets: Vec<usize>,
    lookup: Vec<usize>,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl CubeFaces {
    pub fn new(dim: usize) -> Self {
        let mut faces = Vec::new();
        let mut offsets = vec![0];
        for k in 0..=dim {
            for free in combinations(dim, k) {
                let fixed: Vec<usize> = (0..dim).filter(|a| !free.contains(a)).collect();
                for bits in 0..(1usize << fixed.len()) {
                    let mut sides = vec![Side::Free; dim];
                    for (i, &a) in fixed.iter().enumerate() {
                        sides[a] = if bits >> i & 1 == 0 { Side::Low } else { Side::High };
                    }
                    faces.push(sides);
                }
            }
            offsets.push(faces.len());
        }
        let mut lookup = vec![usize::MAX; 3usize.pow(dim as u32)];
        for (i, f) in faces.iter().enumerate() {
            lookup[Self::code_of(f)] = i;
        }
        CubeFaces {
            dim,
            faces,
            offsets,
            lookup,
        }
    }

    fn code_of(sides: &[Side]) -> usize {
        sides.iter().rev().fold(0, |acc, s| acc * 3 + s.code())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of faces, `3^d`.
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn sides(&self, face: usize) -> &[Side] {
        &self.faces[face]
    }

    pub fn face_dim(&self, face: usize) -> usize {
        self.faces[face].iter().filter(|s| **s == Side::Free).count()
    }

    /// Global indices of the faces of dimension `k`.
    pub fn faces_of_dim(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn index_of(&self, sides: &[Side]) -> usize {
        self.lookup[Self::code_of(sides)]
    }

    /// Index of the facet normal to `axis` on the given side, counted among
    /// facets only.
    pub fn facet_index(&self, axis: usize, high: bool) -> usize {
        2 * (self.dim - 1 - axis) + usize::from(high)
    }

    /// Inverse of [`CubeFaces::facet_index`]: `(axis, high)`.
    pub fn facet_axis_side(&self, local_facet: usize) -> (usize, bool) {
        (self.dim - 1 - local_facet / 2, local_facet % 2 == 1)
    }

    /// All faces contained in the closure of `face` (including itself).
    pub fn closure(&self, face: usize) -> Vec<usize> {
        let f = &self.faces[face];
        (0..self.len())
            .filter(|&g| {
                self.faces[g]
                    .iter()
                    .zip(f)
                    .all(|(gs, fs)| *fs == Side::Free || gs == fs)
            })
            .collect()
    }
}

/// Reference to a tag: either a named tag or a raw entity id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TagRef {
    Name(String),
    Entity(u32),
}

impl From<&str> for TagRef {
    fn from(s: &str) -> Self {
        TagRef::Name(s.to_string())
    }
}

impl From<String> for TagRef {
    fn from(s: String) -> Self {
        TagRef::Name(s)
    }
}

impl From<u32> for TagRef {
    fn from(e: u32) -> Self {
        TagRef::Entity(e)
    }
}

impl std::fmt::Display for TagRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TagRef::Name(n) => write!(f, "{n}"),
            TagRef::Entity(e) => write!(f, "{e}"),
        }
    }
}

/// Entity ids per face of every dimension plus named tags.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceLabeling {
    entities: Vec<Vec<u32>>,
    tags: Vec<(String, BTreeSet<u32>)>,
}

impl FaceLabeling {
    pub fn new(entities: Vec<Vec<u32>>, tags: Vec<(String, BTreeSet<u32>)>) -> Result<Self> {
        let known: BTreeSet<u32> = entities.iter().flatten().copied().collect();
        let mut seen = BTreeSet::new();
        for (name, ids) in &tags {
            if !seen.insert(name.as_str()) {
                return Err(Error::Conflict(name.clone()));
            }
            if let Some(bad) = ids.iter().find(|e| !known.contains(e)) {
                return Err(Error::NameResolution(format!(
                    "tag `{name}` references entity {bad}, which labels no face"
                )));
            }
        }
        Ok(FaceLabeling { entities, tags })
    }

    /// Entity id of face `face` of dimension `dim`.
    pub fn entity(&self, dim: usize, face: usize) -> u32 {
        self.entities[dim][face]
    }

    pub fn entities(&self, dim: usize) -> &[u32] {
        &self.entities[dim]
    }

    pub fn num_dims(&self) -> usize {
        self.entities.len()
    }

    pub fn tags(&self) -> impl Iterator<Item = (&str, &BTreeSet<u32>)> {
        self.tags.iter().map(|(n, s)| (n.as_str(), s))
    }

    pub fn has_tag(&self, name: &str) -> bool {
        self.tags.iter().any(|(n, _)| n == name)
    }

    fn entity_exists(&self, e: u32) -> bool {
        self.entities.iter().any(|es| es.contains(&e))
    }

    /// Entity set of a single tag reference.
    pub fn resolve(&self, tag: &TagRef) -> Result<BTreeSet<u32>> {
        match tag {
            TagRef::Name(n) => self
                .tags
                .iter()
                .find(|(name, _)| name == n)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| Error::NameResolution(n.clone())),
            TagRef::Entity(e) => {
                if self.entity_exists(*e) {
                    Ok(BTreeSet::from([*e]))
                } else {
                    Err(Error::NameResolution(format!("entity {e}")))
                }
            }
        }
    }

    /// Union of the entity sets of several tags.
    pub fn resolve_all(&self, tags: &[TagRef]) -> Result<BTreeSet<u32>> {
        let mut out = BTreeSet::new();
        for t in tags {
            out.extend(self.resolve(t)?);
        }
        Ok(out)
    }

    /// A new labeling with `new_tag` defined as the union of `sources`.
    pub fn add_tag_from_tags(&self, new_tag: &str, sources: &[TagRef]) -> Result<FaceLabeling> {
        if self.has_tag(new_tag) {
            return Err(Error::Conflict(new_tag.to_string()));
        }
        let ids = self.resolve_all(sources)?;
        let mut out = self.clone();
        out.tags.push((new_tag.to_string(), ids));
        Ok(out)
    }

    /// Faces of dimension `dim` whose entity id is in the tag's entity set.
    pub fn faces_with_tag(&self, dim: usize, tag: &TagRef) -> Result<Vec<usize>> {
        let ids = self.resolve(tag)?;
        Ok(self.entities[dim]
            .iter()
            .enumerate()
            .filter(|(_, e)| ids.contains(e))
            .map(|(i, _)| i)
            .collect())
    }
}

/// Per-dimension face tables of the model.
#[derive(Clone, Debug, PartialEq)]
struct FaceTable {
    /// Face vertices, `2^k` per face, increasing.
    vertices: Vec<usize>,
    /// Cell to face incidence, one entry per local `k`-face of every cell.
    cell_faces: Vec<usize>,
}

/// A `d`-dimensional Cartesian grid of axis-aligned boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteModel {
    dim: usize,
    origin: Vec<f64>,
    extents: Vec<f64>,
    partition: Vec<usize>,
    coords: Vec<f64>,
    cells: Vec<usize>,
    cube: CubeFaces,
    group_offsets: Vec<Vec<(Vec<usize>, usize)>>,
    faces: Vec<FaceTable>,
    facet_cells: Vec<[usize; 2]>,
    labeling: FaceLabeling,
}

impl PartialEq for CubeFaces {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim
    }
}

/// Marker for a missing neighbor in [`DiscreteModel::facet_cells`].
pub const NO_CELL: usize = usize::MAX;

fn lex_index(idx: &[usize], sizes: &[usize]) -> usize {
    idx.iter()
        .zip(sizes)
        .rev()
        .fold(0, |acc, (i, n)| acc * n + i)
}

fn lex_multi(mut lin: usize, sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .map(|n| {
            let i = lin % n;
            lin /= n;
            i
        })
        .collect()
}

impl DiscreteModel {
    /// Cartesian model of the box `(x0, x1, y0, y1, ...)` with `partition`
    /// cells per axis.
    pub fn cartesian(domain_box: &[f64], partition: &[usize]) -> Result<Self> {
        let dim = partition.len();
        if !(1..=4).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "dimension must be between 1 and 4, got {dim}"
            )));
        }
        if domain_box.len() != 2 * dim {
            return Err(Error::InvalidArgument(format!(
                "box needs {} bounds for a {dim}D partition, got {}",
                2 * dim,
                domain_box.len()
            )));
        }
        if let Some(a) = partition.iter().position(|&n| n == 0) {
            return Err(Error::InvalidArgument(format!("partition along axis {a} is zero")));
        }
        let origin: Vec<f64> = (0..dim).map(|a| domain_box[2 * a]).collect();
        let extents: Vec<f64> = (0..dim)
            .map(|a| domain_box[2 * a + 1] - domain_box[2 * a])
            .collect();
        if let Some(a) = extents.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "extent along axis {a} is not positive: {}",
                extents[a]
            )));
        }
        let cube = CubeFaces::new(dim);
        let vsizes: Vec<usize> = partition.iter().map(|n| n + 1).collect();
        let nverts: usize = vsizes.iter().product();
        let ncells: usize = partition.iter().product();

        let mut coords = Vec::with_capacity(nverts * dim);
        for v in 0..nverts {
            let idx = lex_multi(v, &vsizes);
            for a in 0..dim {
                let l = domain_box[2 * a + 1] - domain_box[2 * a];
                // The last vertex hits the upper bound exactly.
                let x = if idx[a] == partition[a] {
                    domain_box[2 * a + 1]
                } else {
                    domain_box[2 * a] + l * idx[a] as f64 / partition[a] as f64
                };
                coords.push(x);
            }
        }

        let nlocal = 1usize << dim;
        let mut cells = Vec::with_capacity(ncells * nlocal);
        for c in 0..ncells {
            let idx = lex_multi(c, partition);
            for lv in 0..nlocal {
                let vidx: Vec<usize> = (0..dim).map(|a| idx[a] + (lv >> a & 1)).collect();
                cells.push(lex_index(&vidx, &vsizes));
            }
        }

        // Face groups: for each dimension, the free-axis sets in order with
        // the offset of their first face.
        let mut group_offsets = Vec::with_capacity(dim + 1);
        for k in 0..=dim {
            let mut groups = Vec::new();
            let mut off = 0;
            for free in combinations(dim, k) {
                let sizes = Self::group_sizes(partition, &free);
                groups.push((free, off));
                off += sizes.iter().product::<usize>();
            }
            group_offsets.push(groups);
        }

        let mut model = DiscreteModel {
            dim,
            origin,
            extents,
            partition: partition.to_vec(),
            coords,
            cells,
            cube,
            group_offsets,
            faces: Vec::new(),
            facet_cells: Vec::new(),
            labeling: FaceLabeling {
                entities: Vec::new(),
                tags: Vec::new(),
            },
        };
        model.build_faces();
        model.labeling = model.default_labeling();
        Ok(model)
    }

    fn group_sizes(partition: &[usize], free: &[usize]) -> Vec<usize> {
        partition
            .iter()
            .enumerate()
            .map(|(a, n)| if free.contains(&a) { *n } else { n + 1 })
            .collect()
    }

    fn build_faces(&mut self) {
        let dim = self.dim;
        let ncells = self.num_cells();
        let vsizes: Vec<usize> = self.partition.iter().map(|n| n + 1).collect();
        let mut faces = Vec::with_capacity(dim + 1);
        for k in 0..=dim {
            let nfaces = self.num_faces(k);
            let nv = 1usize << k;
            let mut vertices = vec![0; nfaces * nv];
            for (free, off) in &self.group_offsets[k] {
                let sizes = Self::group_sizes(&self.partition, free);
                let count: usize = sizes.iter().product();
                for lin in 0..count {
                    let pos = lex_multi(lin, &sizes);
                    for lv in 0..nv {
                        let mut vidx = pos.clone();
                        for (i, &a) in free.iter().enumerate() {
                            vidx[a] += lv >> i & 1;
                        }
                        vertices[(off + lin) * nv + lv] = lex_index(&vidx, &vsizes);
                    }
                }
            }
            let local: Vec<usize> = self.cube.faces_of_dim(k).collect();
            let mut cell_faces = Vec::with_capacity(ncells * local.len());
            for c in 0..ncells {
                let cidx = self.cell_index(c);
                for &lf in &local {
                    cell_faces.push(self.face_of_cell(&cidx, lf));
                }
            }
            faces.push(FaceTable {
                vertices,
                cell_faces,
            });
        }
        self.faces = faces;

        let nfacets = self.num_faces(dim - 1);
        let mut facet_cells = vec![[NO_CELL; 2]; nfacets];
        for c in 0..ncells {
            for &f in self.cell_faces(c, dim - 1) {
                let slot = &mut facet_cells[f];
                if slot[0] == NO_CELL {
                    slot[0] = c;
                } else {
                    slot[1] = c;
                }
            }
        }
        self.facet_cells = facet_cells;
    }

    /// Global id of local cube face `lf` of the cell with multi-index `cidx`.
    fn face_of_cell(&self, cidx: &[usize], lf: usize) -> usize {
        let sides = self.cube.sides(lf);
        let k = self.cube.face_dim(lf);
        let free: Vec<usize> = (0..self.dim).filter(|&a| sides[a] == Side::Free).collect();
        let pos: Vec<usize> = (0..self.dim)
            .map(|a| match sides[a] {
                Side::Low | Side::Free => cidx[a],
                Side::High => cidx[a] + 1,
            })
            .collect();
        self.face_id(k, &free, &pos)
    }

    fn face_id(&self, k: usize, free: &[usize], pos: &[usize]) -> usize {
        let (_, off) = self.group_offsets[k]
            .iter()
            .find(|(f, _)| f == free)
            .expect("free-axis set of matching size");
        off + lex_index(pos, &Self::group_sizes(&self.partition, free))
    }

    /// Free axes and lattice position of face `face` of dimension `k`.
    pub fn face_position(&self, k: usize, face: usize) -> (Vec<usize>, Vec<usize>) {
        let groups = &self.group_offsets[k];
        let g = groups.partition_point(|(_, off)| *off <= face) - 1;
        let (free, off) = &groups[g];
        let sizes = Self::group_sizes(&self.partition, free);
        (free.clone(), lex_multi(face - off, &sizes))
    }

    /// Box entity (1-based) of a face given its free axes and position.
    fn box_entity(&self, free: &[usize], pos: &[usize]) -> u32 {
        let sides: Vec<Side> = (0..self.dim)
            .map(|a| {
                if free.contains(&a) {
                    Side::Free
                } else if pos[a] == 0 {
                    Side::Low
                } else if pos[a] == self.partition[a] {
                    Side::High
                } else {
                    Side::Free
                }
            })
            .collect();
        (self.cube.index_of(&sides) + 1) as u32
    }

    fn default_labeling(&self) -> FaceLabeling {
        let mut entities = Vec::with_capacity(self.dim + 1);
        for k in 0..=self.dim {
            let n = self.num_faces(k);
            entities.push(
                (0..n)
                    .map(|f| {
                        let (free, pos) = self.face_position(k, f);
                        self.box_entity(&free, &pos)
                    })
                    .collect(),
            );
        }
        let interior = self.cube.len() as u32;
        let tags = vec![
            ("interior".to_string(), BTreeSet::from([interior])),
            ("boundary".to_string(), (1..interior).collect()),
        ];
        FaceLabeling { entities, tags }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    /// The box as `(x0, x1, y0, y1, ...)`.
    pub fn domain_box(&self) -> Vec<f64> {
        (0..self.dim)
            .flat_map(|a| [self.origin[a], self.origin[a] + self.extents[a]])
            .collect()
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn cube(&self) -> &CubeFaces {
        &self.cube
    }

    pub fn num_cells(&self) -> usize {
        self.partition.iter().product()
    }

    pub fn num_vertices(&self) -> usize {
        self.partition.iter().map(|n| n + 1).product()
    }

    pub fn num_faces(&self, k: usize) -> usize {
        self.group_offsets[k]
            .iter()
            .map(|(free, _)| Self::group_sizes(&self.partition, free).iter().product::<usize>())
            .sum()
    }

    pub fn vertex_coords(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    /// Vertices of cell `c` in tensor-product order (x fastest).
    pub fn cell_vertices(&self, c: usize) -> &[usize] {
        let n = 1 << self.dim;
        &self.cells[c * n..(c + 1) * n]
    }

    pub fn cell_index(&self, c: usize) -> Vec<usize> {
        lex_multi(c, &self.partition)
    }

    pub fn cell_id(&self, idx: &[usize]) -> usize {
        lex_index(idx, &self.partition)
    }

    /// Cell size along every axis (uniform on a Cartesian grid).
    pub fn cell_size(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|a| self.extents[a] / self.partition[a] as f64)
            .collect()
    }

    /// Lower corner of cell `c`.
    pub fn cell_origin(&self, c: usize) -> Vec<f64> {
        let v = self.cell_vertices(c)[0];
        self.vertex_coords(v).to_vec()
    }

    /// Vertices of face `face` of dimension `k`, increasing.
    pub fn face_vertices(&self, k: usize, face: usize) -> &[usize] {
        let n = 1 << k;
        &self.faces[k].vertices[face * n..(face + 1) * n]
    }

    /// Global ids of the `k`-faces of cell `c`, in local cube-face order.
    pub fn cell_faces(&self, c: usize, k: usize) -> &[usize] {
        let n = self.cube.faces_of_dim(k).len();
        &self.faces[k].cell_faces[c * n..(c + 1) * n]
    }

    /// The one or two cells sharing facet `f`, smaller id first; the second
    /// entry is [`NO_CELL`] on the boundary.
    pub fn facet_cells(&self, f: usize) -> [usize; 2] {
        self.facet_cells[f]
    }

    pub fn num_facets(&self) -> usize {
        self.facet_cells.len()
    }

    pub fn labeling(&self) -> &FaceLabeling {
        &self.labeling
    }

    /// The same model with a different labeling.
    pub fn with_labeling(&self, labeling: FaceLabeling) -> Result<Self> {
        for k in 0..=self.dim {
            if labeling.entities.get(k).map(Vec::len) != Some(self.num_faces(k)) {
                return Err(Error::InvalidArgument(format!(
                    "labeling does not cover the faces of dimension {k}"
                )));
            }
        }
        let mut m = self.clone();
        m.labeling = labeling;
        Ok(m)
    }

    /// Box entity ids forming the closure of box entity `entity`.
    pub fn entity_closure(&self, entity: u32) -> Result<Vec<u32>> {
        let face = (entity as usize)
            .checked_sub(1)
            .filter(|f| *f < self.cube.len())
            .ok_or_else(|| Error::NameResolution(format!("entity {entity}")))?;
        Ok(self.cube.closure(face).into_iter().map(|f| f as u32 + 1).collect())
    }

    /// Box entity of the facet normal to `axis` on the given side.
    pub fn boundary_facet_entity(&self, axis: usize, high: bool) -> u32 {
        let r = self.cube.faces_of_dim(self.dim - 1);
        (r.start + self.cube.facet_index(axis, high)) as u32 + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> DiscreteModel {
        DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[n, n]).unwrap()
    }

    #[test]
    fn counts() {
        let m = unit_square(4);
        assert_eq!(m.num_cells(), 16);
        assert_eq!(m.num_vertices(), 25);
        let m3 = DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0], &[4, 4, 4]).unwrap();
        assert_eq!(m3.num_cells(), 64);
        assert_eq!(m3.num_vertices(), 125);
        let m4 = DiscreteModel::cartesian(&[0., 1., 0., 1., 0., 1., 0., 1.], &[2, 2, 2, 2]).unwrap();
        assert_eq!(m4.num_cells(), 16);
        assert_eq!(m4.cube().len(), 81);
    }

    #[test]
    fn square_entity_numbering() {
        let m = DiscreteModel::cartesian(&[0.0, 2.0, -1.0, 1.0], &[3, 2]).unwrap();
        let l = m.labeling();
        let find_vertex = |x: f64, y: f64| {
            (0..m.num_vertices())
                .find(|&v| m.vertex_coords(v) == [x, y])
                .unwrap()
        };
        assert_eq!(l.entity(0, find_vertex(0.0, -1.0)), 1);
        assert_eq!(l.entity(0, find_vertex(2.0, -1.0)), 2);
        assert_eq!(l.entity(0, find_vertex(0.0, 1.0)), 3);
        assert_eq!(l.entity(0, find_vertex(2.0, 1.0)), 4);
        for f in 0..m.num_faces(1) {
            let vs = m.face_vertices(1, f);
            let a = m.vertex_coords(vs[0]);
            let b = m.vertex_coords(vs[1]);
            let expected = if a[1] == -1.0 && b[1] == -1.0 {
                5
            } else if a[1] == 1.0 && b[1] == 1.0 {
                6
            } else if a[0] == 0.0 && b[0] == 0.0 {
                7
            } else if a[0] == 2.0 && b[0] == 2.0 {
                8
            } else {
                9
            };
            assert_eq!(l.entity(1, f), expected, "edge {f}");
        }
        assert!(l.entities(2).iter().all(|&e| e == 9));
    }

    #[test]
    fn top_facets_carry_entity_six() {
        let m = unit_square(2);
        let top = m.labeling().faces_with_tag(1, &TagRef::Entity(6)).unwrap();
        assert_eq!(top.len(), 2);
        for f in top {
            for &v in m.face_vertices(1, f) {
                assert_eq!(m.vertex_coords(v)[1], 1.0);
            }
        }
    }

    #[test]
    fn hex_face_entities() {
        let m = DiscreteModel::cartesian(&[0., 1., 0., 1., 0., 1.], &[2, 2, 2]).unwrap();
        // z0, z1, y0, y1, x0, x1
        let expect = [(2, false, 21), (2, true, 22), (1, false, 23), (1, true, 24), (0, false, 25), (0, true, 26)];
        for (axis, high, e) in expect {
            assert_eq!(m.boundary_facet_entity(axis, high), e);
            let fs = m.labeling().faces_with_tag(2, &TagRef::Entity(e)).unwrap();
            assert_eq!(fs.len(), 4);
            let want = if high { 1.0 } else { 0.0 };
            for f in fs {
                for &v in m.face_vertices(2, f) {
                    assert_eq!(m.vertex_coords(v)[axis], want);
                }
            }
        }
        assert!(m.labeling().entities(3).iter().all(|&e| e == 27));
        // first x-parallel edge is (y0, z0), entity 9
        let fs = m.labeling().faces_with_tag(1, &TagRef::Entity(9)).unwrap();
        for f in fs {
            for &v in m.face_vertices(1, f) {
                let x = m.vertex_coords(v);
                assert_eq!((x[1], x[2]), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn facets_have_one_or_two_cells() {
        let m = DiscreteModel::cartesian(&[0., 1., 0., 2., 0., 1.], &[3, 2, 2]).unwrap();
        let mut interior = 0;
        for f in 0..m.num_facets() {
            let [a, b] = m.facet_cells(f);
            assert_ne!(a, NO_CELL);
            if b != NO_CELL {
                interior += 1;
                assert!(a < b);
                let (ia, ib) = (m.cell_index(a), m.cell_index(b));
                let diff: usize = ia.iter().zip(&ib).map(|(x, y)| x.abs_diff(*y)).sum();
                assert_eq!(diff, 1);
            }
        }
        // (nx-1) ny nz + nx (ny-1) nz + nx ny (nz-1)
        assert_eq!(interior, 2 * 2 * 2 + 3 * 1 * 2 + 3 * 2 * 1);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[0, 4]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            DiscreteModel::cartesian(&[0.0, -1.0, 0.0, 1.0], &[4, 4]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            DiscreteModel::cartesian(&[0.0; 10], &[1; 5]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn tags_from_tags() {
        let m = unit_square(2);
        let l = m.labeling();
        let diri0 = l
            .add_tag_from_tags("diri0", &[1, 2, 3, 4, 5, 7, 8].map(TagRef::Entity))
            .unwrap();
        let diri = diri0.add_tag_from_tags("diri1", &[TagRef::Entity(6)]).unwrap();
        let all = diri
            .add_tag_from_tags("all", &["diri0".into(), "diri1".into()])
            .unwrap();
        let set = all.resolve(&"all".into()).unwrap();
        assert_eq!(set, (1..=8).collect());
        // existing tags keep their resolution
        assert_eq!(all.resolve(&"diri0".into()).unwrap(), diri0.resolve(&"diri0".into()).unwrap());
        // the original labeling is untouched
        assert!(!l.has_tag("diri0"));

        let walls = l
            .add_tag_from_tags("walls", &[TagRef::Entity(5), TagRef::Entity(6)])
            .unwrap();
        assert_eq!(walls.faces_with_tag(1, &"walls".into()).unwrap().len(), 4);

        assert!(matches!(
            l.add_tag_from_tags("x", &["nope".into()]),
            Err(Error::NameResolution(_))
        ));
        assert!(matches!(
            l.add_tag_from_tags("boundary", &[TagRef::Entity(1)]),
            Err(Error::Conflict(_))
        ));
        assert!(matches!(
            l.add_tag_from_tags("x", &[TagRef::Entity(99)]),
            Err(Error::NameResolution(_))
        ));
    }

    #[test]
    fn closure_of_entities() {
        let m = unit_square(2);
        assert_eq!(m.entity_closure(7).unwrap(), vec![1, 3, 7]);
        assert_eq!(m.entity_closure(6).unwrap(), vec![3, 4, 6]);
        let m3 = DiscreteModel::cartesian(&[0., 1., 0., 1., 0., 1.], &[1, 1, 1]).unwrap();
        let c = m3.entity_closure(25).unwrap();
        assert_eq!(c.len(), 4 + 4 + 1);
    }

    #[test]
    fn boundary_measure_is_perimeter() {
        let m = DiscreteModel::cartesian(&[0.0, 3.0, 0.0, 0.5], &[7, 3]).unwrap();
        let h = m.cell_size();
        let mut total = 0.0;
        for f in 0..m.num_facets() {
            if m.facet_cells(f)[1] == NO_CELL {
                let (free, _) = m.face_position(1, f);
                total += h[free[0]];
            }
        }
        assert!((total - 7.0).abs() < 1e-12 * 7.0);
    }
}
