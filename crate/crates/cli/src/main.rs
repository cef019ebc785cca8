use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cartfem::solvers::Ordering;
use cartfem_cli::cavity::{run_cavity, CavityOptions};
use cartfem_cli::convergence::{run_convergence, ConvergenceOptions, Manufactured};
use cartfem_cli::darcy::{run_darcy, DarcyOptions};
use cartfem_cli::dg::{run_dg, DgOptions};
use cartfem_cli::elasticity::{run_elasticity, ElasticityOptions};
use cartfem_cli::plaplacian::{run_plaplacian, PLaplacianOptions};
use cartfem_cli::poisson::{run_poisson, PoissonOptions};
use cartfem_cli::{Config, SolverChoice, Summary};

#[derive(Parser, Debug)]
#[command(name = "cartfem", version, about = "Finite element tutorials on Cartesian meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderingArg {
    Natural,
    Rcm,
    Nd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Lu,
    Cg,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Cells per direction.
    #[arg(long)]
    n: Option<usize>,
    /// Polynomial order.
    #[arg(long)]
    order: Option<usize>,
    /// Quadrature degree.
    #[arg(long)]
    degree: Option<usize>,
    /// Nonlinear (or check) tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value_t = 1234)]
    seed: u64,
    /// Output prefix for PREFIX.vtk and PREFIX.summary.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Read the model from a mesh file.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Assembly threads.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    check_jacobian: bool,
    /// Print the Newton iterations.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "lu")]
    solver: SolverArg,
    /// Fill-reducing ordering for the sparse LU.
    #[arg(long, value_enum)]
    ordering: Option<OrderingArg>,
}

impl Common {
    fn config(&self) -> Config {
        Config {
            n: self.n,
            order: self.order,
            degree: self.degree,
            tol: self.tol,
            max_iters: self.max_iters,
            seed: self.seed,
            out: self.out.clone(),
            mesh: self.mesh.clone(),
            threads: self.threads,
            check_jacobian: self.check_jacobian,
            trace: self.trace,
            solver: match self.solver {
                SolverArg::Lu => SolverChoice::Lu,
                SolverArg::Cg => SolverChoice::Cg,
            },
            ordering: self.ordering.map(|o| match o {
                OrderingArg::Natural => Ordering::Natural,
                OrderingArg::Rcm => Ordering::Rcm,
                OrderingArg::Nd => Ordering::NestedDissection,
            }),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Poisson with Dirichlet and Neumann data.
    Poisson {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Solve for u = x1 + x2 with Dirichlet data everywhere.
        #[arg(long)]
        linear: bool,
    },
    /// Linear elasticity of a bar.
    Elasticity {
        #[command(flatten)]
        common: Common,
        /// Affine Dirichlet data on the whole boundary.
        #[arg(long)]
        patch: bool,
        #[arg(long, default_value_t = 0.005)]
        delta: f64,
    },
    /// p-Laplacian with Newton's method.
    Plaplacian {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3.0)]
        p: f64,
    },
    /// Interior penalty DG with a linear solution.
    Dg {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Mixed Darcy flow.
    Darcy {
        #[command(flatten)]
        common: Common,
        /// Unit permeability everywhere.
        #[arg(long)]
        homogeneous: bool,
        /// 100 x 100 mesh.
        #[arg(long)]
        fine: bool,
    },
    /// Lid-driven cavity.
    Cavity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10.0)]
        re: f64,
    },
    /// Mesh convergence study for Poisson.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        ns: Vec<usize>,
        /// sine or linear.
        #[arg(long, default_value = "sine")]
        manufactured: String,
    },
}

fn run(cmd: Command) -> cartfem_cli::Result<Summary> {
    match cmd {
        Command::Poisson { common, dim, linear } => run_poisson(
            &common.config(),
            &PoissonOptions {
                dim,
                linear,
                ..Default::default()
            },
        ),
        Command::Elasticity { common, patch, delta } => run_elasticity(
            &common.config(),
            &ElasticityOptions {
                patch,
                delta,
                ..Default::default()
            },
        ),
        Command::Plaplacian { common, p } => run_plaplacian(
            &common.config(),
            &PLaplacianOptions {
                p,
                ..Default::default()
            },
        ),
        Command::Dg { common, dim } => run_dg(&common.config(), &DgOptions { dim }),
        Command::Darcy {
            common,
            homogeneous,
            fine,
        } => run_darcy(
            &common.config(),
            &DarcyOptions {
                homogeneous,
                fine,
            },
        ),
        Command::Cavity { common, re } => run_cavity(&common.config(), &CavityOptions { re }),
        Command::Convergence {
            common,
            ns,
            manufactured,
        } => {
            let manufactured: Manufactured = manufactured.parse()?;
            run_convergence(&common.config(), &ConvergenceOptions { ns, manufactured })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(s) => {
            print!("{}", s.to_text());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
