//! Tutorial drivers built on `cartfem`.
//!
//! Every driver takes a [`Config`] with the common options plus its own
//! option struct, and returns a [`Summary`] of `key=value` results. When
//! `Config::out` is set the driver also writes `PREFIX.vtk` and
//! `PREFIX.summary`.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cartfem::mesh::{read_model, DiscreteModel, TagRef};
use cartfem::operators::Assembler;
use cartfem::solvers::{LinearSolver, NewtonOptions, Ordering};

pub mod cavity;
pub mod convergence;
pub mod darcy;
pub mod dg;
pub mod elasticity;
pub mod plaplacian;
pub mod poisson;

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error(transparent)]
    Fem(#[from] cartfem::Error),
    #[error("invalid option: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DriverError>;

/// Which direct or iterative solver the drivers use for linear systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverChoice {
    #[default]
    Lu,
    Cg,
}

/// Options shared by all drivers. `None` means the driver default.
#[derive(Clone, Debug)]
pub struct Config {
    pub n: Option<usize>,
    pub order: Option<usize>,
    pub degree: Option<usize>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub threads: usize,
    pub check_jacobian: bool,
    pub trace: bool,
    pub solver: SolverChoice,
    pub ordering: Option<Ordering>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: None,
            order: None,
            degree: None,
            tol: None,
            max_iters: None,
            seed: 1234,
            out: None,
            mesh: None,
            threads: 1,
            check_jacobian: false,
            trace: false,
            solver: SolverChoice::Lu,
            ordering: None,
        }
    }
}

impl Config {
    pub fn assembler(&self) -> Assembler {
        Assembler {
            threads: self.threads.max(1),
        }
    }

    /// Linear solver, with `ordering` used unless `--ordering` overrides it.
    pub fn linear_solver(&self, ordering: Ordering) -> LinearSolver {
        match self.solver {
            SolverChoice::Lu => LinearSolver::SparseLu {
                ordering: self.ordering.unwrap_or(ordering),
            },
            SolverChoice::Cg => LinearSolver::ConjugateGradient {
                rtol: self.tol.unwrap_or(1e-12),
                max_iters: self.max_iters.unwrap_or(10_000),
            },
        }
    }

    pub fn newton(&self, ordering: Ordering) -> NewtonOptions {
        let d = NewtonOptions::default();
        NewtonOptions {
            tol: self.tol.unwrap_or(d.tol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            trace: self.trace,
            linear: LinearSolver::SparseLu {
                ordering: self.ordering.unwrap_or(ordering),
            },
            ..d
        }
    }

    /// The model from `--mesh`, or a Cartesian one.
    pub fn model(&self, domain_box: &[f64], partition: &[usize]) -> Result<Arc<DiscreteModel>> {
        let m = match &self.mesh {
            Some(p) => read_model(p)?,
            None => DiscreteModel::cartesian(domain_box, partition)?,
        };
        Ok(Arc::new(m))
    }

    pub fn vtk_path(&self) -> Option<PathBuf> {
        self.out.as_ref().map(|p| with_suffix(p, ".vtk"))
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Adds tag `name` as the union of `sources` unless the model already has it.
pub fn ensure_tag(model: Arc<DiscreteModel>, name: &str, sources: &[TagRef]) -> Result<Arc<DiscreteModel>> {
    if model.labeling().has_tag(name) {
        return Ok(model);
    }
    let labels = model.labeling().add_tag_from_tags(name, sources)?;
    Ok(Arc::new(model.with_labeling(labels)?))
}

/// Box entities in the closure of the given box entities.
pub fn closure_of(model: &DiscreteModel, entities: &[u32]) -> Result<Vec<TagRef>> {
    let mut all = std::collections::BTreeSet::new();
    for &e in entities {
        all.extend(model.entity_closure(e)?);
    }
    Ok(all.into_iter().map(TagRef::Entity).collect())
}

/// Ordered `key=value` results of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new(driver: &str) -> Self {
        let mut s = Summary::default();
        s.set("driver", driver);
        s
    }

    /// Sets `key`, replacing an earlier value in place.
    pub fn set(&mut self, key: &str, value: impl Display) {
        let v = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = v,
            None => self.entries.push((key.to_string(), v)),
        }
    }

    /// Floats are written in shortest round-trip form.
    pub fn set_f64(&mut self, key: &str, value: f64) {
        self.set(key, format!("{value:e}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn usize(&self, key: &str) -> Option<usize> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Summary::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| DriverError::Config(format!("summary line {} has no `=`", i + 1)))?;
            s.set(k, v);
        }
        Ok(s)
    }

    /// Writes `PREFIX.summary` when an output prefix is configured.
    pub fn write(&self, cfg: &Config) -> Result<()> {
        if let Some(p) = &cfg.out {
            std::fs::write(with_suffix(p, ".summary"), self.to_text())?;
        }
        Ok(())
    }
}

pub(crate) fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(DriverError::Check(msg()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_round_trip() {
        let mut s = Summary::new("poisson");
        s.set("n", 4);
        s.set_f64("el2", 1.5e-12);
        s.set("n", 8);
        let text = s.to_text();
        assert_eq!(text, "driver=poisson\nn=8\nel2=1.5e-12\n");
        let p = Summary::parse(&text).unwrap();
        assert_eq!(p, s);
        assert_eq!(p.f64("el2"), Some(1.5e-12));
        assert!(Summary::parse("oops").is_err());
    }

    #[test]
    fn suffixes() {
        let cfg = Config {
            out: Some(PathBuf::from("/tmp/run.a")),
            ..Default::default()
        };
        assert_eq!(cfg.vtk_path().unwrap(), PathBuf::from("/tmp/run.a.vtk"));
    }

    #[test]
    fn tags_are_added_once() {
        let m = Arc::new(DiscreteModel::cartesian(&[0.0, 1.0, 0.0, 1.0], &[2, 2]).unwrap());
        let src = closure_of(&m, &[7]).unwrap();
        assert_eq!(src, vec![TagRef::Entity(1), TagRef::Entity(3), TagRef::Entity(7)]);
        let m = ensure_tag(m, "left", &src).unwrap();
        let m2 = ensure_tag(m.clone(), "left", &[]).unwrap();
        assert!(Arc::ptr_eq(&m, &m2));
    }
}
