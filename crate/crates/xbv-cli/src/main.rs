//! `xbv`: experiments, operators and solvers of `xbv-core` on files.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use xbv_core::beltrami::{solve_linear_beltrami, BeltramiCoefficient, NeumannOptions};
use xbv_core::cauchy_green::{
    hilbert_conjugate, op_c0_tau, op_c_boundary, op_s_nodes, op_t0_s0_tau, op_t_nodes, Deformation, GridDeformation,
    Identity, KernelConfig, DEFAULT_SEPARATION,
};
use xbv_core::deriv_recon::{affine_family_reconstruct, build_direction_set};
use xbv_core::domain_grid::{boundary_trace, DomainSpec, GridField};
use xbv_core::experiments::{run_experiment, ExperimentConfig};
use xbv_core::io::{
    parse_complex_list, read_field_csv, read_field_rows, read_tensor_csv, write_field_csv, DomainDescription, StructureDescription,
};
use xbv_core::jcurve::{picard_disc, PicardOptions, StructureSpec};
use xbv_core::structures::{find_side_certificate, Hyperplane};
use xbv_core::{Error, Result};

#[derive(Parser)]
#[command(name = "xbv", version, about = "Beltrami structures, singular integrals and boundary-regularity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON configuration; exits 0 iff every assertion passes.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Singular integral operators on grid CSV fields.
    Ops {
        #[command(subcommand)]
        command: OpsCommand,
    },
    /// Linear Beltrami solves.
    Beltrami {
        #[command(subcommand)]
        command: BeltramiCommand,
    },
    /// Pseudoholomorphic discs.
    Jcurve {
        #[command(subcommand)]
        command: JcurveCommand,
    },
    /// Directional derivative reconstruction.
    Derivs {
        #[command(subcommand)]
        command: DerivsCommand,
    },
    /// Linear structures.
    Structures {
        #[command(subcommand)]
        command: StructuresCommand,
    },
}

#[derive(Args)]
struct DomainArg {
    /// Domain JSON; the unit disk when omitted.
    #[arg(long)]
    domain: Option<PathBuf>,
}

impl DomainArg {
    fn load(&self) -> Result<DomainSpec<f64>> {
        match &self.domain {
            Some(path) => DomainDescription::from_json(&fs::read_to_string(path)?)?.build(),
            None => Ok(DomainSpec::unit_disk()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    /// Cauchy-Green transform at the nodes.
    #[value(name = "T")]
    T,
    /// Beurling transform at the nodes.
    #[value(name = "S")]
    S,
    /// Boundary Cauchy transform of the field's trace, at the nodes.
    #[value(name = "C")]
    C,
    /// Harmonic conjugate of the real part of the trace on the circle.
    #[value(name = "H")]
    H,
    /// Deformed segment transform of the trace on the real segment, with its `z`-derivative.
    #[value(name = "C0")]
    C0,
    /// Deformed Cauchy-Green and Beurling transforms.
    #[value(name = "T0S0")]
    T0S0,
}

#[derive(Subcommand)]
enum OpsCommand {
    /// Apply an operator to component 0 (all components for T, S, T0S0).
    Apply {
        #[arg(long, value_enum)]
        op: Op,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Grid CSV of `τ` on the same domain, for C0 and T0S0; the identity when omitted.
        #[arg(long)]
        tau: Option<PathBuf>,
        /// Separation constant checked for `τ`.
        #[arg(long, default_value_t = DEFAULT_SEPARATION)]
        separation: f64,
        #[command(flatten)]
        domain: DomainArg,
    },
}

#[derive(Subcommand)]
enum BeltramiCommand {
    /// Solve `∂_z̄ f + a ∂_z f = b` with `f = −(I + T a ∂_z)^{-1} T b`.
    Solve {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        domain: DomainArg,
    },
}

#[derive(Subcommand)]
enum JcurveCommand {
    /// Picard iteration for a disc through `t·ẽ/n` with direction `e`.
    Disc {
        #[arg(long)]
        structure: PathBuf,
        /// JSON array of `n` complex entries (numbers or `[re, im]`).
        #[arg(long)]
        e: String,
        /// JSON array of `n − 1` complex entries.
        #[arg(long)]
        t: String,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 1.0 / 128.0)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DerivsCommand {
    /// Partials of a tensor-grid function from straight-line difference quotients.
    Reconstruct {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        /// Line step; the first axis spacing when omitted.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum StructuresCommand {
    /// Search for a side certificate of two structures over a hyperplane.
    Certify {
        #[arg(long)]
        j1: PathBuf,
        #[arg(long)]
        j2: PathBuf,
        /// Hyperplane normal as a JSON array of `2n` numbers.
        #[arg(long)]
        normal: String,
        #[arg(long, default_value_t = 2000)]
        density: usize,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { config, outdir } => run(&config, &outdir),
        Command::Ops { command: OpsCommand::Apply { op, input, out, tau, separation, domain } } => {
            ops_apply(op, &input, &out, tau.as_deref(), separation, &domain)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Beltrami { command: BeltramiCommand::Solve { a, b, tol, alpha, out, report, domain } } => {
            let domain = domain.load()?;
            let a = read_field_csv(BufReader::new(File::open(a)?), domain)?;
            let b = read_field_rows(BufReader::new(File::open(b)?))?.on_grid(&a.grid)?;
            let coef = BeltramiCoefficient::scalar(a, alpha)?;
            let opts = NeumannOptions { tol, ..NeumannOptions::default() };
            let (f, rep) = solve_linear_beltrami(&coef, &b, &opts)?;
            write_field_csv(&f, BufWriter::new(File::create(out)?))?;
            let summary = json!({
                "iterations": rep.iterations,
                "ratios": rep.ratios,
                "pde_residual": rep.pde_residual,
                "cauchy_residual": rep.cauchy_residual,
            });
            emit(&summary, report.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Jcurve { command: JcurveCommand::Disc { structure, e, t, r, h, out, report } } => {
            let spec: StructureSpec = serde_json::from_str(&fs::read_to_string(structure)?)?;
            let field = spec.build()?;
            let opts = PicardOptions { r, h, ..PicardOptions::default() };
            let (disc, rep) = picard_disc(&field, &parse_complex_list(&e)?, &parse_complex_list(&t)?, &opts)?;
            write_field_csv(&disc.u, BufWriter::new(File::create(out)?))?;
            emit(&serde_json::to_value(&rep)?, report.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Derivs { command: DerivsCommand::Reconstruct { f, n, k, eps, h, stride, out } } => {
            let field = read_tensor_csv(BufReader::new(File::open(f)?), n)?;
            let ds = build_direction_set(n, k, eps)?;
            let step = match h {
                Some(h) => h,
                None => field.axes[0].get(1).map(|x| x - field.axes[0][0]).ok_or_else(|| {
                    Error::InvalidInput("tensor grid needs two points per axis".into())
                })?,
            };
            let rec = affine_family_reconstruct(&field, &ds, step, stride)?;
            let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out)?));
            let mut header: Vec<String> = (1..=n).map(|a| format!("x{a}")).collect();
            header.extend(rec.partials.keys().map(|alpha| {
                format!("d{}", alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("_"))
            }));
            w.write_record(&header)?;
            for (p, point) in rec.points.iter().enumerate() {
                let mut row: Vec<String> = point.iter().map(|x| x.to_string()).collect();
                row.extend(rec.partials.values().map(|v| v[p].to_string()));
                w.write_record(&row)?;
            }
            w.flush()?;
            let summary = json!({
                "directions": ds.len(),
                "condition": ds.condition,
                "max_quotient": rec.max_quotient,
                "lipschitz": rec.lipschitz,
                "unbounded": rec.unbounded,
            });
            emit(&summary, None)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Structures { command: StructuresCommand::Certify { j1, j2, normal, density } } => {
            let s1 = StructureDescription::from_json(&fs::read_to_string(j1)?)?.build()?;
            let s2 = StructureDescription::from_json(&fs::read_to_string(j2)?)?.build()?;
            let normal: Vec<f64> = serde_json::from_str(&normal)?;
            let cert = find_side_certificate(&s1.j, &s2.j, &Hyperplane::new(normal)?, density)?;
            emit(&serde_json::to_value(&cert)?, None)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn emit(value: &serde_json::Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(config: &Path, outdir: &Path) -> Result<ExitCode> {
    let config = ExperimentConfig::from_path(config)?;
    let report = run_experiment(&config)?;
    report.write(outdir, &config.report.formats)?;
    for a in &report.assertions {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn ops_apply(op: Op, input: &Path, out: &Path, tau: Option<&Path>, separation: f64, domain: &DomainArg) -> Result<()> {
    let domain = domain.load()?;
    let field = read_field_csv(BufReader::new(File::open(input)?), domain.clone())?;
    let write = |f: &GridField<f64>| write_field_csv(f, BufWriter::new(File::create(out)?));
    let load_tau = || -> Result<Box<dyn Deformation<f64>>> {
        Ok(match tau {
            Some(p) => Box::new(GridDeformation::new(read_field_rows(BufReader::new(File::open(p)?))?.on_grid(&field.grid)?)),
            None => Box::new(Identity),
        })
    };
    match op {
        Op::T => write(&op_t_nodes(&field)?),
        Op::S => write(&op_s_nodes(&field, KernelConfig::default())?),
        Op::C => {
            let trace: Vec<_> = boundary_trace(&field, &domain).into_iter().map(|s| s.value).collect();
            let values = op_c_boundary(&domain, &trace, &field.grid.nodes)?.values;
            write(&GridField::from_values(&field.grid, values))
        }
        Op::H => {
            let trace = boundary_trace(&field, &domain);
            let u: Vec<f64> = trace.iter().map(|s| s.value.re).collect();
            let hu = hilbert_conjugate(&u)?;
            let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out)?));
            w.write_record(["s", "re_z", "im_z", "u", "hu"])?;
            for (s, v) in trace.iter().zip(&hu) {
                w.write_record([s.s, s.z.re, s.z.im, s.value.re, *v].map(|x| x.to_string()))?;
            }
            w.flush()?;
            Ok(())
        }
        Op::C0 => {
            let tau = load_tau()?;
            let f = |s: f64| field.interpolate(xbv_core::C64::new(s, 0.0), 0).0;
            let c0 = op_c0_tau(&f, tau.as_ref(), &domain, &field.grid.nodes, separation)?;
            let values = c0.values.iter().zip(&c0.dz).flat_map(|(v, d)| [*v, *d]).collect();
            write(&GridField::from_values_vec(&field.grid, 2, values))
        }
        Op::T0S0 => {
            let tau = load_tau()?;
            let (t0, s0) = op_t0_s0_tau(&field, tau.as_ref(), &KernelConfig::default(), separation)?;
            write(&GridField::stack(&[t0, s0]))
        }
    }
}
