use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lb_spectra::config::StudyConfig;
use lb_spectra::{io, parallel, presets, study};
use lb_spectra_core::lift::PointKind;
use lb_spectra_core::pipeline::{self, Discretization};
use lb_spectra_core::quadrature::{QuadratureRule, RuleFamily};
use lb_spectra_core::spectral::{SolverMethod, SolverOptions};
use lb_spectra_core::{CellKind, LevelSet, SurfaceDescription};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "lb-spectra", version, about = "Laplace–Beltrami eigenpairs on lifted surface finite elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study from a TOML file or a built-in preset.
    Study {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (overrides the config).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Record wall-clock seconds per level.
        #[arg(long)]
        timings: bool,
    },
    /// Solve one level and print the lowest eigenvalues.
    Solve {
        /// circle, sphere, torus or an implicit level-set name.
        #[arg(long, default_value = "sphere")]
        surface: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long, default_value_t = 12)]
        num_eigs: usize,
        /// segment, triangle or quad; defaults to segment on the circle, quad elsewhere.
        #[arg(long)]
        cell: Option<String>,
        #[arg(long, default_value = "gauss_lobatto")]
        points: String,
        #[arg(long, default_value = "auto")]
        method: String,
        #[arg(long, default_value_t = 2.0)]
        major: f64,
        #[arg(long, default_value_t = 1.0)]
        minor: f64,
        /// Write the base mesh (OFF) and both matrices (MatrixMarket) here.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Print the monomial moment table of a 1D rule on [0, 1].
    Quadcheck {
        #[arg(long, default_value = "gauss_lobatto")]
        rule: String,
        #[arg(long, default_value_t = 4)]
        points: usize,
    },
    /// List or show the built-in presets.
    Presets {
        #[arg(long, conflicts_with = "show")]
        list: bool,
        #[arg(long)]
        show: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Study { config, preset, output, timings } => run_study(config, preset, output, timings),
        Command::Solve { surface, k, r, level, num_eigs, cell, points, method, major, minor, export } => {
            run_solve(SolveArgs { surface, k, r, level, num_eigs, cell, points, method, major, minor, export })
        }
        Command::Quadcheck { rule, points } => quadcheck(&rule, points),
        Command::Presets { list, show } => match show {
            Some(name) => match presets::source(&name) {
                Some(src) => {
                    print!("{src}");
                    ExitCode::SUCCESS
                }
                None => config_error(format!("unknown preset `{name}`")),
            },
            None => {
                let _ = list;
                for name in presets::names() {
                    println!("{name}");
                }
                ExitCode::SUCCESS
            }
        },
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn numerical_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_NUMERICAL)
}

fn run_study(config: Option<PathBuf>, preset: Option<String>, output: Option<PathBuf>, timings: bool) -> ExitCode {
    let parsed = match (config, preset) {
        (Some(path), _) => StudyConfig::load(&path),
        (None, Some(name)) => match presets::load(&name) {
            Some(c) => c,
            None => return config_error(format!("unknown preset `{name}`; see `lb-spectra presets --list`")),
        },
        (None, None) => return config_error("need --config or --preset"),
    };
    let mut cfg = match parsed {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if timings {
        cfg.output.timings = true;
    }
    let dir = output.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let study = match cfg.validate() {
        Ok(s) => s,
        Err(e) => return config_error(e),
    };
    let report = study::run_study(&study);
    let written = match study::write_outputs(&report, &dir) {
        Ok(w) => w,
        Err(e) => return numerical_error(format!("writing outputs: {e}")),
    };
    for check in &report.checks {
        let observed = check.observed.map_or("n/a".to_string(), |o| format!("{o:.3}"));
        let target = check.target.map_or(String::new(), |t| format!(" λ={t:.6}"));
        println!(
            "{} {}{target}: observed {observed}, expected {} ± {}{}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.expected,
            check.window,
            check.note.as_ref().map_or(String::new(), |n| format!(" ({n})")),
        );
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    match report.exit_code() {
        0 => ExitCode::SUCCESS,
        _ => numerical_error("not every level completed; see null_reasons in the CSV"),
    }
}

struct SolveArgs {
    surface: String,
    k: usize,
    r: usize,
    level: usize,
    num_eigs: usize,
    cell: Option<String>,
    points: String,
    method: String,
    major: f64,
    minor: f64,
    export: Option<PathBuf>,
}

fn run_solve(a: SolveArgs) -> ExitCode {
    let surface = match a.surface.as_str() {
        "circle" => SurfaceDescription::circle(1.0),
        "sphere" => SurfaceDescription::sphere(1.0),
        "torus" => SurfaceDescription::torus(a.major, a.minor),
        name => match LevelSet::from_name(name) {
            Some(ls) => SurfaceDescription::implicit(ls),
            None => return config_error(format!("unknown surface `{name}`")),
        },
    };
    let default_cell = if a.surface == "circle" { "segment" } else { "quad" };
    let Some(cell) = CellKind::from_name(a.cell.as_deref().unwrap_or(default_cell)) else {
        return config_error("unknown cell kind");
    };
    let Some(points) = PointKind::from_name(&a.points) else {
        return config_error(format!("unknown point set `{}`", a.points));
    };
    let Some(method) = SolverMethod::from_name(&a.method) else {
        return config_error(format!("unknown method `{}`", a.method));
    };
    if a.k == 0 || a.r == 0 || a.num_eigs == 0 {
        return config_error("k, r and num-eigs must be positive");
    }
    let mut disc = Discretization::new(surface, cell, a.k, a.r);
    disc.point_kind = points;
    let opts = SolverOptions { method, ..SolverOptions::default() };

    let pool = parallel::pool();
    let result = pool.install(|| -> lb_spectra_core::Result<_> {
        let space = disc.space(a.level)?;
        let forms = parallel::assemble(&space, &disc.rule(&space))?;
        pipeline::solve_assembled(&disc, a.level, space, forms, a.num_eigs, &opts)
    });
    let sol = match result {
        Ok(s) => s,
        Err(e @ lb_spectra_core::Error::UnsupportedCombination(_)) => return config_error(e),
        Err(e) => return numerical_error(e),
    };
    println!("# surface={} cell={} k={} r={} level={}", a.surface, cell.name(), a.k, a.r, a.level);
    println!("# h={:.6e} n_dofs={} method={}", sol.h, sol.n_dofs(), sol.spectrum.method.name());
    println!("# index eigenvalue residual");
    for (i, (l, res)) in sol.eigenvalues().iter().zip(&sol.spectrum.residual_norms).enumerate() {
        println!("{i} {l:.15e} {res:.3e}");
    }
    if let Some(dir) = a.export {
        if let Err(e) = export(&disc, &sol, a.level, &dir) {
            return numerical_error(format!("export: {e}"));
        }
    }
    ExitCode::SUCCESS
}

fn export(disc: &Discretization, sol: &pipeline::LevelSolution, level: usize, dir: &std::path::Path) -> anyhow::Result<()> {
    use std::fs::File;
    use std::io::BufWriter;
    std::fs::create_dir_all(dir)?;
    let mesh = disc.base_mesh(level)?;
    if mesh.cell_kind != CellKind::Segment {
        io::write_off(&mesh, &mut BufWriter::new(File::create(dir.join("mesh.off"))?))?;
    }
    io::write_matrix_market(&sol.forms.stiffness, &mut BufWriter::new(File::create(dir.join("stiffness.mtx"))?))?;
    io::write_matrix_market(&sol.forms.mass, &mut BufWriter::new(File::create(dir.join("mass.mtx"))?))?;
    Ok(())
}

fn quadcheck(rule: &str, points: usize) -> ExitCode {
    let family = match rule {
        "gauss_legendre" => RuleFamily::GaussLegendre,
        "gauss_lobatto" => RuleFamily::GaussLobatto,
        "newton_cotes" => RuleFamily::NewtonCotes,
        other => return config_error(format!("unknown rule `{other}`")),
    };
    let q = match QuadratureRule::new(CellKind::Segment, family, points) {
        Ok(q) => q,
        Err(e) => return config_error(e),
    };
    println!("# {rule} with {points} points, exact through degree {}", q.exactness_degree);
    println!("# degree computed exact abs_error");
    for d in 0..=q.exactness_degree + 2 {
        let computed = q.integrate(|p| p[0].powi(d as i32));
        let exact = 1.0 / (d as f64 + 1.0);
        println!("{d} {computed:.17e} {exact:.17e} {:.3e}", (computed - exact).abs());
    }
    ExitCode::SUCCESS
}
