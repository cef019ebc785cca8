//! Convergence slopes and legacy VTK output.

use std::fmt::Write as _;
use std::path::Path;

use crate::cellfield::{CellField, EvalPoint};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::tensor::Value;

/// Least-squares slope of `log10(err)` against `log10(h)`.
pub fn slope(hs: &[f64], errs: &[f64]) -> Result<f64> {
    if hs.len() != errs.len() {
        return Err(Error::Arity(format!("{} mesh sizes for {} errors", hs.len(), errs.len())));
    }
    if hs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a slope needs at least 3 samples, got {}",
            hs.len()
        )));
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.log10()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceSample {
    pub h: f64,
    pub el2: f64,
    pub eh1: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub order: usize,
    pub samples: Vec<ConvergenceSample>,
}

impl ConvergenceRecord {
    pub fn new(order: usize) -> Self {
        ConvergenceRecord {
            order,
            samples: Vec::new(),
        }
    }

    /// Adds a sample; mesh sizes must strictly decrease.
    pub fn push(&mut self, h: f64, el2: f64, eh1: f64) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if h >= last.h {
                return Err(Error::InvalidArgument(format!(
                    "mesh sizes must decrease, got {h} after {}",
                    last.h
                )));
            }
        }
        self.samples.push(ConvergenceSample { h, el2, eh1 });
        Ok(())
    }

    /// `(L2 slope, H1 slope)`.
    pub fn slopes(&self) -> Result<(f64, f64)> {
        let hs: Vec<f64> = self.samples.iter().map(|s| s.h).collect();
        let l2: Vec<f64> = self.samples.iter().map(|s| s.el2).collect();
        let h1: Vec<f64> = self.samples.iter().map(|s| s.eh1).collect();
        Ok((slope(&hs, &l2)?, slope(&hs, &h1)?))
    }
}

/// Lexicographic vertex order to VTK order, and the VTK cell type.
fn vtk_cell(k: usize) -> (&'static [usize], u8) {
    match k {
        0 => (&[0], 1),
        1 => (&[0, 1], 3),
        2 => (&[0, 1, 3, 2], 9),
        _ => (&[0, 1, 3, 2, 4, 5, 7, 6], 12),
    }
}

/// Writes `fields` sampled at the vertices of every cell or facet of
/// `domain` as a legacy ASCII unstructured grid. Points are duplicated per
/// item, so discontinuous fields are shown as they are.
pub fn write_vtk(domain: &Domain, path: impl AsRef<Path>, fields: &[(&str, CellField)]) -> Result<()> {
    for (_, f) in fields {
        f.check_domain(domain)?;
    }
    let dim = domain.model().dim();
    let k = match domain {
        Domain::Interior(_) => dim,
        _ => dim - 1,
    };
    let (perm, ctype) = vtk_cell(k);
    let nv = perm.len();
    let n = domain.len();
    let mut points = Vec::with_capacity(n * nv);
    let mut values: Vec<Vec<Value>> = vec![Vec::with_capacity(n * nv); fields.len()];
    for i in 0..n {
        let verts = domain.item_vertices(i);
        for &p in perm {
            let q = verts[p];
            points.push(q.x);
            for (vals, (_, f)) in values.iter_mut().zip(fields) {
                vals.push(f.evaluate(&EvalPoint { dim, q })?);
            }
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "cartfem {}", domain.kind_name());
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(s, "{:e} {:e} {:e}", p[0], p[1], p[2]);
    }
    let _ = writeln!(s, "CELLS {} {}", n, n * (nv + 1));
    for i in 0..n {
        let ids: Vec<String> = (0..nv).map(|v| (i * nv + v).to_string()).collect();
        let _ = writeln!(s, "{nv} {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {n}");
    for _ in 0..n {
        let _ = writeln!(s, "{ctype}");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", points.len());
    }
    for ((name, _), vals) in fields.iter().zip(&values) {
        let name = name.replace(char::is_whitespace, "_");
        match vals.first() {
            Some(Value::Scalar(_)) | None => {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            }
            Some(Value::Vector(_)) => {
                let _ = writeln!(s, "VECTORS {name} double");
            }
            Some(Value::Tensor(_)) => {
                let _ = writeln!(s, "TENSORS {name} double");
            }
        }
        for v in vals {
            match v {
                Value::Scalar(x) => {
                    let _ = writeln!(s, "{x:e}");
                }
                Value::Vector(u) => {
                    let _ = writeln!(s, "{:e} {:e} {:e}", u[0], u[1], u[2]);
                }
                Value::Tensor(t) => {
                    for r in &t.0 {
                        let _ = writeln!(s, "{:e} {:e} {:e}", r[0], r[1], r[2]);
                    }
                }
            }
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Contents of a legacy VTK file written by [`write_vtk`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtkData {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    /// `(name, components, values)`.
    pub point_data: Vec<(String, usize, Vec<f64>)>,
}

/// Minimal reader for the subset of the format produced by [`write_vtk`].
pub fn read_vtk(path: impl AsRef<Path>) -> Result<VtkData> {
    let text = std::fs::read_to_string(path)?;
    let mut toks = text
        .lines()
        .enumerate()
        .skip(3)
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
        .peekable();
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut next = |what: &str| {
        toks.next()
            .ok_or_else(|| perr(0, format!("unexpected end of file, expected {what}")))
    };
    fn num<T: std::str::FromStr>(t: (usize, &str)) -> Result<T> {
        t.1.parse().map_err(|_| Error::Parse {
            line: t.0,
            msg: format!("cannot parse `{}`", t.1),
        })
    }
    let mut d = VtkData::default();
    let expect = |t: (usize, &str), w: &str| {
        if t.1 == w {
            Ok(())
        } else {
            Err(Error::Parse {
                line: t.0,
                msg: format!("expected `{w}`, got `{}`", t.1),
            })
        }
    };
    expect(next("DATASET")?, "DATASET")?;
    next("grid type")?;
    expect(next("POINTS")?, "POINTS")?;
    let np: usize = num(next("point count")?)?;
    next("type")?;
    for _ in 0..np {
        let p = [num(next("x")?)?, num(next("y")?)?, num(next("z")?)?];
        d.points.push(p);
    }
    expect(next("CELLS")?, "CELLS")?;
    let nc: usize = num(next("cell count")?)?;
    next("size")?;
    for _ in 0..nc {
        let k: usize = num(next("cell size")?)?;
        let ids = (0..k).map(|_| num(next("vertex")?)).collect::<Result<Vec<usize>>>()?;
        d.cells.push(ids);
    }
    expect(next("CELL_TYPES")?, "CELL_TYPES")?;
    next("count")?;
    for _ in 0..nc {
        d.cell_types.push(num(next("cell type")?)?);
    }
    let Ok(t) = next("POINT_DATA") else { return Ok(d) };
    expect(t, "POINT_DATA")?;
    next("count")?;
    while let Ok(kind) = next("data kind") {
        let name = next("name")?.1.to_string();
        next("type")?;
        let ncomp = match kind.1 {
            "SCALARS" => {
                next("components")?;
                next("LOOKUP_TABLE")?;
                next("table")?;
                1
            }
            "VECTORS" => 3,
            "TENSORS" => 9,
            other => return Err(perr(kind.0, format!("unknown data kind `{other}`"))),
        };
        let vals = (0..np * ncomp).map(|_| num(next("value")?)).collect::<Result<Vec<f64>>>()?;
        d.point_data.push((name, ncomp, vals));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::scalar_fn;
    use crate::geometry::triangulation;
    use crate::mesh::DiscreteModel;
    use crate::tensor::Vector;
    use std::sync::Arc;

    #[test]
    fn exact_power_law() {
        let hs = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        assert!((slope(&hs, &e).unwrap() - 2.0).abs() < 1e-10);
        assert!(matches!(slope(&hs[..2], &e[..2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn record_needs_decreasing_h() {
        let mut r = ConvergenceRecord::new(1);
        r.push(0.5, 1.0, 1.0).unwrap();
        assert!(r.push(0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn square_output() {
        let m = Arc::new(DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[2, 2]).unwrap());
        let omega: Domain = triangulation(&m).into();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.vtk");
        let fields = [
            ("u", CellField::function(scalar_fn(|x| x[0]))),
            ("w", CellField::constant(Vector::new2(1.0, 2.0))),
        ];
        write_vtk(&omega, &path, &fields).unwrap();
        let d = read_vtk(&path).unwrap();
        assert_eq!(d.points.len(), 16);
        assert_eq!(d.cells.len(), 4);
        assert!(d.cell_types.iter().all(|t| *t == 9));
        let (name, nc, u) = &d.point_data[0];
        assert_eq!((name.as_str(), *nc), ("u", 1));
        for (p, v) in d.points.iter().zip(u) {
            assert_eq!(p[0], *v);
        }
        assert_eq!(&d.point_data[1].2[..3], &[1.0, 2.0, 0.0]);
    }
}
