//! Line-oriented text format for Cartesian models.
//!
//! ```text
//! cartfem-mesh 1
//! dim 2
//! box 0 1 0 1
//! partition 4 4
//! entities 0 25
//! 0 1
//! 1 5
//! ...
//! entities 1 40
//! ...
//! tag boundary: 1 2 3 4 5 6 7 8
//! ```
//!
//! Every face of every dimension must be listed exactly once inside the
//! `entities <dim> <count>` block of its dimension. Blank lines and lines
//! starting with `#` are ignored.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use super::{DiscreteModel, FaceLabeling};
use crate::error::{Error, Result};

const MAGIC: &str = "cartfem-mesh 1";

pub fn write_model(model: &DiscreteModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_string(model))?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<DiscreteModel> {
    let text = std::fs::read_to_string(path)?;
    from_str(&text)
}

fn join<T: std::fmt::Display>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn to_string(model: &DiscreteModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "dim {}", model.dim());
    // `{:e}` prints the shortest representation that parses back exactly.
    let _ = writeln!(
        s,
        "box {}",
        join(model.domain_box().iter().map(|x| format!("{x:e}")))
    );
    let _ = writeln!(s, "partition {}", join(model.partition()));
    let labels = model.labeling();
    for k in 0..=model.dim() {
        let es = labels.entities(k);
        let _ = writeln!(s, "entities {k} {}", es.len());
        for (f, e) in es.iter().enumerate() {
            let _ = writeln!(s, "{f} {e}");
        }
    }
    for (name, ids) in labels.tags() {
        let _ = writeln!(s, "tag {name}: {}", join(ids));
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_list<T: std::str::FromStr>(line: usize, field: &str, rest: &str) -> Result<Vec<T>> {
    rest.split_whitespace()
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| perr(line, format!("{field}: cannot parse `{t}`")))
        })
        .collect()
}

struct Lines<'a>(Box<dyn Iterator<Item = (usize, &'a str)> + 'a>);

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.0
            .next()
            .ok_or_else(|| perr(0, format!("unexpected end of file, expected {what}")))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (ln, l) = self.next_line(key)?;
        match l.split_once(char::is_whitespace) {
            Some((k, rest)) if k == key => Ok((ln, rest)),
            _ => Err(perr(ln, format!("expected `{key}`"))),
        }
    }
}

pub(crate) fn from_str(text: &str) -> Result<DiscreteModel> {
    let mut lines = Lines(Box::new(
        text.lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
    ));

    let (ln, magic) = lines.next_line("header")?;
    if magic != MAGIC {
        return Err(perr(ln, format!("expected `{MAGIC}`")));
    }
    let (ln, d) = lines.keyed("dim")?;
    let dim: usize = d
        .trim()
        .parse()
        .map_err(|_| perr(ln, format!("dim: cannot parse `{d}`")))?;
    let (ln, b) = lines.keyed("box")?;
    let bbox: Vec<f64> = parse_list(ln, "box", b)?;
    let (ln, p) = lines.keyed("partition")?;
    let partition: Vec<usize> = parse_list(ln, "partition", p)?;
    if partition.len() != dim || bbox.len() != 2 * dim {
        return Err(perr(ln, format!("box/partition do not match dim {dim}")));
    }
    let model = DiscreteModel::cartesian(&bbox, &partition).map_err(|e| perr(ln, e.to_string()))?;

    let mut entities: Vec<Vec<u32>> = Vec::with_capacity(dim + 1);
    for k in 0..=dim {
        let (ln, rest) = lines.keyed("entities")?;
        let hdr: Vec<usize> = parse_list(ln, "entities", rest)?;
        let expected = model.num_faces(k);
        if hdr != [k, expected] {
            return Err(perr(
                ln,
                format!("expected `entities {k} {expected}`, got `entities {rest}`"),
            ));
        }
        let mut es: Vec<Option<u32>> = vec![None; expected];
        for _ in 0..expected {
            let (ln, l) = lines.next_line("face entity line")?;
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(perr(ln, "face entity line needs `<face> <entity>`"));
            }
            let f: usize = fields[0]
                .parse()
                .map_err(|_| perr(ln, format!("face: cannot parse `{}`", fields[0])))?;
            let e: u32 = fields[1]
                .parse()
                .map_err(|_| perr(ln, format!("entity: cannot parse `{}`", fields[1])))?;
            let slot = es
                .get_mut(f)
                .ok_or_else(|| perr(ln, format!("face {f} out of range for dimension {k}")))?;
            if let Some(prev) = slot {
                return Err(perr(
                    ln,
                    format!("face {f} of dimension {k} assigned two entity ids ({prev} and {e})"),
                ));
            }
            *slot = Some(e);
        }
        let es: Vec<u32> = es.into_iter().map(|e| e.unwrap()).collect();
        entities.push(es);
    }

    let known: BTreeSet<u32> = entities.iter().flatten().copied().collect();
    let mut tags: Vec<(String, BTreeSet<u32>)> = Vec::new();
    for (ln, l) in lines.0 {
        let rest = l
            .strip_prefix("tag ")
            .ok_or_else(|| perr(ln, format!("unexpected line `{l}`")))?;
        let (name, ids) = rest
            .split_once(':')
            .ok_or_else(|| perr(ln, "tag line needs `tag <name>: <ids>`"))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(perr(ln, "empty tag name"));
        }
        if tags.iter().any(|(n, _)| n == name) {
            return Err(perr(ln, format!("duplicate tag `{name}`")));
        }
        let ids: Vec<u32> = parse_list(ln, "tag", ids)?;
        if let Some(bad) = ids.iter().find(|e| !known.contains(e)) {
            return Err(perr(
                ln,
                format!("tag `{name}` references entity {bad}, which labels no face"),
            ));
        }
        tags.push((name.to_string(), ids.into_iter().collect()));
    }
    let labeling = FaceLabeling::new(entities, tags).map_err(|e| perr(0, e.to_string()))?;
    model.with_labeling(labeling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TagRef;

    fn square() -> DiscreteModel {
        DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[4, 4]).unwrap()
    }

    #[test]
    fn round_trip() {
        let m = square();
        let l = m
            .labeling()
            .add_tag_from_tags("diri0", &[1, 2, 7].map(TagRef::Entity))
            .unwrap();
        let m = m.with_labeling(l).unwrap();
        let back = from_str(&to_string(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn round_trip_odd_coordinates() {
        let m = DiscreteModel::cartesian(&[0.1, 0.7, -1.0 / 3.0, 2.0_f64.sqrt()], &[3, 7]).unwrap();
        let back = from_str(&to_string(&m)).unwrap();
        for v in 0..m.num_vertices() {
            assert_eq!(back.vertex_coords(v), m.vertex_coords(v));
        }
    }

    #[test]
    fn duplicate_entity_assignment_is_rejected() {
        let text = to_string(&square());
        // assign face 0 of dimension 1 twice, dropping face 1
        let bad = text.replacen("entities 1 40\n0 5\n1 5\n", "entities 1 40\n0 5\n0 6\n", 1);
        assert_ne!(bad, text);
        match from_str(&bad) {
            Err(Error::Parse { line, msg }) => {
                assert!(line > 0);
                assert!(msg.contains("two entity ids"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dangling_tag_is_rejected() {
        let text = to_string(&square()) + "tag bad: 99\n";
        assert!(matches!(from_str(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn malformed_header_is_rejected() {
        let text = to_string(&square()).replace("partition 4 4", "partition 4 x");
        match from_str(&text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("partition"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
