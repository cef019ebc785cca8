use std::path::Path;
use std::process::{Command, Output};

use cartfem::mesh::{write_model, DiscreteModel};
use cartfem::postprocess::read_vtk;
use cartfem_cli::Summary;

fn cartfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartfem")).args(args).output().expect("binary runs")
}

fn summary_at(prefix: &Path) -> Summary {
    let mut p = prefix.as_os_str().to_owned();
    p.push(".summary");
    Summary::parse(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn poisson_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (p, threads) in [(&a, "1"), (&b, "3")] {
        let o = cartfem(&["poisson", "--dim", "2", "--n", "6", "--threads", threads, "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (sa, sb) = (summary_at(&a), summary_at(&b));
    assert_eq!(sa, sb);
    assert_eq!(sa.get("driver"), Some("poisson"));
    let stdout = cartfem(&["poisson", "--dim", "2", "--n", "6"]).stdout;
    assert_eq!(String::from_utf8(stdout).unwrap(), sa.to_text());

    let mut vtk = a.as_os_str().to_owned();
    vtk.push(".vtk");
    let d = read_vtk(vtk).unwrap();
    assert_eq!(d.cells.len(), 36);
    assert_eq!(d.point_data[0].0, "uh");
}

#[test]
fn failures_exit_nonzero() {
    let o = cartfem(&["poisson", "--dim", "5"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--dim"));
    let o = cartfem(&["dg", "--dim", "2", "--n", "2", "--order", "1", "--tol", "1e-300"]);
    assert!(!o.status.success());
    let o = cartfem(&["convergence", "--manufactured", "cubic"]);
    assert!(!o.status.success());
    let o = cartfem(&["poisson", "--mesh", "/nonexistent/model.txt"]);
    assert!(!o.status.success());
}

#[test]
fn mesh_file_drives_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("model.txt");
    write_model(&DiscreteModel::cartesian(&[0.0, 2.0, 0.0, 1.0], &[4, 2]).unwrap(), &mesh).unwrap();
    let out = dir.path().join("r");
    let o = cartfem(&["poisson", "--mesh", mesh.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary_at(&out);
    assert_eq!(s.usize("dim"), Some(2));
    assert_eq!(s.usize("cells"), Some(8));
}

#[test]
fn dg_writes_skeleton_jumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dg");
    let o = cartfem(&["dg", "--dim", "2", "--n", "3", "--order", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = read_vtk(dir.path().join("dg.jumps.vtk")).unwrap();
    assert_eq!(d.cells.len(), 12);
    assert!(d.cell_types.iter().all(|t| *t == 3));
    assert!(d.point_data[0].2.iter().all(|v| v.abs() < 1e-10));
}

#[test]
fn newton_trace_is_printed() {
    let o = cartfem(&["plaplacian", "--n", "4", "--trace", "--check-jacobian"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("newton iter   0"));
    assert!(text.contains("jacobian_fd_error="));
}
