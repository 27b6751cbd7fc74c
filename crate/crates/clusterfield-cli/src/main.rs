//! Command-line interface for the clusterfield library.
//!
//! Exit codes: 0 = a verdict or result was produced (including FAIL verdicts),
//! 2 = usage or domain error, 3 = file error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use clusterfield::decider::decide;
use clusterfield::distsim::{run_simulation, SessionConfig, Transport};
use clusterfield::exceedance::{exceed_ball_mc, exceed_ball_rsf, exceed_equidistant_grf};
use clusterfield::fields::{
    covariance, empirical_covariance, grf_weights, lsh_msd_check, FieldSpec,
};
use clusterfield::kernel1d::{
    det_bound_p2, det_bound_p2_raw, gaussian_kernel_value, kernel_eval, psd_feasibility_bound,
    solve_optimal_kernel_1d,
};
use clusterfield::kernelhd::{e_d, kappa_infinity, kernel_hd_eval, solve_optimal_kernel_hd};
use clusterfield::points::{load_points, PointFormat};
use clusterfield::tuner::{default_param_grid, default_t_grid, gap_surface, tune};
use clusterfield::{Error, FieldKind, PointSet, PromiseParams};

#[derive(Parser)]
#[command(
    name = "clusterfield",
    about = "Decide the clustering promise problem with random-field hashes",
    version
)]
struct Cli {
    /// Cap the number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Rsf,
    Grf,
}

impl From<FieldArg> for FieldKind {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Rsf => FieldKind::Rsf,
            FieldArg::Grf => FieldKind::GrfFourier,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundMode {
    P2,
    P5,
    Hierarchy,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Inproc,
    Tcp,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagMode {
    LshMsd,
    RsfCov,
    SlepianMono,
    GrfApprox,
}

#[derive(Args)]
struct PromiseArgs {
    /// Number of covering balls in the YES case.
    #[arg(long)]
    k1: usize,
    /// Ball radius in the YES case (raw data units for point-file commands).
    #[arg(long)]
    eps: f64,
    /// Number of pairwise-far points in the NO case.
    #[arg(long)]
    k2: usize,
    /// Pairwise separation in the NO case (raw data units likewise).
    #[arg(long)]
    delta: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a point set is (k1,eps)-clusterable or (k2,delta)-far.
    Decide {
        /// Point file, one point per line (CSV or JSONL).
        #[arg(long)]
        points: PathBuf,
        /// Input format; inferred from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[command(flatten)]
        promise: PromiseArgs,
        #[arg(long, value_enum, default_value = "rsf")]
        field: FieldArg,
        /// Field draws used for the empirical exceedance.
        #[arg(long, default_value_t = 2000)]
        draws: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the full decision report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Grid-search the field parameter and threshold maximizing M - C.
    Tune {
        #[command(flatten)]
        promise: PromiseArgs,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value = "rsf")]
        field: FieldArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the full gap surface as CSV (param,t,gap).
        #[arg(long)]
        surface_out: Option<PathBuf>,
    },

    /// Solve the 1D optimal-kernel LP over the cosine basis.
    Kernel1d {
        #[arg(long)]
        eps: f64,
        /// Kernel value at eps.
        #[arg(long)]
        c: f64,
        #[arg(long)]
        delta: f64,
        /// Number of cosine terms.
        #[arg(long, default_value_t = 60)]
        terms: usize,
        /// Monotonicity grid resolution.
        #[arg(long, default_value_t = 400)]
        grid: usize,
        /// Write the kernel as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write (t, k(t), gaussian) samples as CSV.
        #[arg(long)]
        curve_out: Option<PathBuf>,
    },

    /// Solve the d-dimensional optimal-kernel LP over the Dini basis.
    Kernelhd {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 40)]
        terms: usize,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write (t, k(t)) samples as CSV.
        #[arg(long)]
        curve_out: Option<PathBuf>,
    },

    /// Lower bounds on kernel values from PSD feasibility.
    Bound {
        #[arg(long, value_enum)]
        mode: BoundMode,
        /// The fixed value p1 = k(eps).
        #[arg(long, default_value_t = 0.99)]
        p1: f64,
        /// Grid step of the feasibility search.
        #[arg(long, default_value_t = 0.005)]
        step: f64,
    },

    /// Table of the k-tilde validity thresholds E_d(c).
    EdTable {
        #[arg(long, default_value_t = 0.9)]
        c: f64,
        #[arg(long, default_value_t = 10)]
        dmax: usize,
    },

    /// Run the distributed max-aggregation protocol on a partitioned set.
    Simulate {
        /// Number of nodes; points are partitioned round-robin.
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long, value_enum, default_value = "inproc")]
        transport: TransportArg,
        /// TCP port for the coordinator (0 = ephemeral).
        #[arg(long, default_value_t = 0)]
        port: u16,
        #[command(flatten)]
        promise: PromiseArgs,
        #[arg(long, value_enum, default_value = "rsf")]
        field: FieldArg,
        #[arg(long, default_value_t = 2000)]
        draws: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Diagnostics reproducing the qualitative claims behind the design.
    Diag {
        #[arg(long, value_enum)]
        mode: DiagMode,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure thread pool: {e}");
            std::process::exit(2);
        }
    }
    match run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::EmptyInput | Error::Parse { .. } | Error::Json(_) => 3,
        _ => 2,
    }
}

fn infer_format(path: &Path, arg: Option<FormatArg>) -> PointFormat {
    match arg {
        Some(FormatArg::Csv) => PointFormat::Csv,
        Some(FormatArg::Jsonl) => PointFormat::Jsonl,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => PointFormat::Jsonl,
            _ => PointFormat::Csv,
        },
    }
}

/// Load, normalize, and rescale the promise parameters into normalized units.
fn load_normalized(
    path: &Path,
    format: Option<FormatArg>,
    promise: &PromiseArgs,
) -> Result<(PointSet, PromiseParams), Error> {
    let raw = load_points(path, infer_format(path, format))?;
    let mut s = raw.normalize();
    let mut f = s.scale_factor();
    // a set much smaller than delta would be blown up past the delta <= 1
    // domain; cap the scale so the rescaled delta stays exactly at 1
    if promise.delta * f > 1.0 {
        f = 1.0 / promise.delta;
        s = scale_about_centroid(&raw, f)?;
    }
    println!("scale_factor = {f}");
    println!(
        "normalized eps = {}, delta = {}",
        promise.eps * f,
        promise.delta * f
    );
    let params = PromiseParams::new(
        promise.k1,
        promise.eps * f,
        promise.k2,
        promise.delta * f,
        s.dim(),
    )?;
    Ok((s, params))
}

fn scale_about_centroid(raw: &PointSet, f: f64) -> Result<PointSet, Error> {
    let n = raw.len() as f64;
    let mut centroid = vec![0.0; raw.dim()];
    for p in raw.points() {
        for (c, v) in centroid.iter_mut().zip(p) {
            *c += v / n;
        }
    }
    PointSet::new(
        raw.points()
            .iter()
            .map(|p| p.iter().zip(&centroid).map(|(v, c)| (v - c) * f).collect())
            .collect(),
    )
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Decide {
            points,
            format,
            promise,
            field,
            draws,
            seed,
            out,
        } => {
            let (s, params) = load_normalized(&points, format, &promise)?;
            let kind: FieldKind = field.into();
            let tuned = tune(
                &params,
                kind,
                &default_param_grid(kind),
                &default_t_grid(),
                seed,
            )?;
            let report = decide(&s, &params, kind, &tuned, draws, seed)?;
            println!(
                "param = {}, T = {}, C = {}, M = {}",
                report.field_param, report.threshold_t, report.prob_yes_c, report.prob_no_m
            );
            println!("empirical_P = {}", report.empirical_p);
            println!("{}", report.verdict);
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
            Ok(())
        }

        Command::Tune {
            promise,
            dim,
            field,
            seed,
            surface_out,
        } => {
            let params = PromiseParams::new(promise.k1, promise.eps, promise.k2, promise.delta, dim)?;
            let kind: FieldKind = field.into();
            let param_grid = default_param_grid(kind);
            let t_grid = default_t_grid();
            if let Some(path) = &surface_out {
                let surface = gap_surface(&params, kind, &param_grid, &t_grid, seed)?;
                let mut file = std::fs::File::create(path)?;
                writeln!(file, "param,t,gap")?;
                for (pi, row) in surface.iter().enumerate() {
                    for (ti, gap) in row.iter().enumerate() {
                        writeln!(file, "{},{},{}", param_grid[pi], t_grid[ti], gap)?;
                    }
                }
            }
            let tuned = tune(&params, kind, &param_grid, &t_grid, seed)?;
            println!(
                "best_param = {}, best_T = {}, C = {}, M = {}, gap = {}",
                tuned.best_param, tuned.best_t, tuned.c, tuned.m, tuned.gap
            );
            println!("feasible = {}", tuned.feasible);
            Ok(())
        }

        Command::Kernel1d {
            eps,
            c,
            delta,
            terms,
            grid,
            out,
            curve_out,
        } => {
            let (kernel, k_delta) = solve_optimal_kernel_1d(eps, c, delta, terms, grid)?;
            let gauss = gaussian_kernel_value(eps, c, delta);
            println!("k(delta) = {k_delta}");
            println!("gaussian k(delta) = {gauss}");
            if let Some(path) = out {
                write_json(&path, &kernel)?;
            }
            if let Some(path) = curve_out {
                let mut file = std::fs::File::create(path)?;
                writeln!(file, "t,k,gaussian")?;
                for j in 0..=400 {
                    let t = j as f64 / 400.0;
                    writeln!(
                        file,
                        "{t},{},{}",
                        kernel_eval(&kernel, t)?,
                        gaussian_kernel_value(eps, c, t)
                    )?;
                }
            }
            Ok(())
        }

        Command::Kernelhd {
            dim,
            eps,
            c,
            delta,
            terms,
            grid,
            out,
            curve_out,
        } => {
            let (kernel, k_delta) = solve_optimal_kernel_hd(dim, c, eps, delta, terms, grid)?;
            println!("k(delta) = {k_delta}");
            println!("kappa_infinity = {}", kappa_infinity(c, eps, delta));
            println!("E_{dim}({c}) = {}", e_d(dim, c));
            if let Some(path) = out {
                write_json(&path, &kernel)?;
            }
            if let Some(path) = curve_out {
                let mut file = std::fs::File::create(path)?;
                writeln!(file, "t,k")?;
                for j in 0..=400 {
                    let t = j as f64 / 400.0;
                    writeln!(file, "{t},{}", kernel_hd_eval(&kernel, t)?)?;
                }
            }
            Ok(())
        }

        Command::Bound { mode, p1, step } => {
            match mode {
                BoundMode::P2 => {
                    println!("det bound p2 >= {} (raw {})", det_bound_p2(p1), det_bound_p2_raw(p1));
                }
                BoundMode::P5 => {
                    let fixed = BTreeMap::from([(1usize, p1)]);
                    let b = psd_feasibility_bound(&fixed, 5, 5, step)?;
                    if b.warning {
                        println!("p5 bound: no feasible completion, returning 0");
                    }
                    println!("p5 >= {}", b.bound);
                }
                BoundMode::Hierarchy => {
                    let fixed = BTreeMap::from([(1usize, p1)]);
                    let b5 = psd_feasibility_bound(&fixed, 5, 5, step)?;
                    println!("stage 1: p5 >= {}", b5.bound);
                    let fixed2 = BTreeMap::from([(1usize, b5.bound)]);
                    let b2 = psd_feasibility_bound(&fixed2, 2, 4, step)?;
                    println!("stage 2: p2 >= {}", b2.bound);
                    println!(
                        "naive det bound at p1 = {}: {}",
                        b5.bound,
                        det_bound_p2_raw(b5.bound)
                    );
                }
            }
            Ok(())
        }

        Command::EdTable { c, dmax } => {
            println!("d,e_d");
            for d in 1..=dmax {
                println!("{d},{:.4}", e_d(d, c));
            }
            Ok(())
        }

        Command::Simulate {
            nodes,
            points,
            format,
            transport,
            port,
            promise,
            field,
            draws,
            seed,
            out,
        } => {
            if nodes == 0 {
                return Err(Error::Domain {
                    arg: "nodes",
                    msg: "need at least one node".into(),
                });
            }
            let (s, params) = load_normalized(&points, format, &promise)?;
            let kind: FieldKind = field.into();
            let tuned = tune(
                &params,
                kind,
                &default_param_grid(kind),
                &default_t_grid(),
                seed,
            )?;
            if !tuned.feasible {
                println!("FAIL");
                return Ok(());
            }
            let spec = field_spec_for(kind, tuned.best_param, params.dim)?;
            let cfg = SessionConfig {
                seed,
                field_spec: spec,
                threshold_t: tuned.best_t,
                n_draws: draws,
                prob_yes_c: tuned.c,
                prob_no_m: tuned.m,
            };
            let partitions = round_robin(&s, nodes)?;
            let t = match transport {
                TransportArg::Inproc => Transport::InProcess,
                TransportArg::Tcp => Transport::Tcp { port },
            };
            let report = run_simulation(&partitions, &cfg, t)?;
            println!(
                "nodes = {}, bytes_sent = {}",
                report.n_nodes, report.bytes_sent
            );
            println!("empirical_P = {}", report.decision.empirical_p);
            println!("{}", report.decision.verdict);
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
            Ok(())
        }

        Command::Diag { mode, seed } => run_diag(mode, seed),
    }
}

fn field_spec_for(kind: FieldKind, param: f64, dim: usize) -> Result<FieldSpec, Error> {
    match kind {
        FieldKind::Rsf => FieldSpec::rsf(param, dim),
        FieldKind::GrfFourier => {
            // resolve the correlation length 1/sqrt(lambda), capped as in tuning
            let per_axis = ((3.0 * param.sqrt()).ceil() as usize).clamp(8, 3000);
            let cap = (1e6f64.powf(1.0 / dim as f64)) as usize;
            FieldSpec::grf(param, dim, per_axis.min(cap.max(1)))
        }
        _ => Err(Error::Unsupported("unsupported field kind".into())),
    }
}

fn round_robin(s: &PointSet, nodes: usize) -> Result<Vec<PointSet>, Error> {
    if nodes > s.len() {
        return Err(Error::Domain {
            arg: "nodes",
            msg: format!("{nodes} nodes but only {} points", s.len()),
        });
    }
    let mut parts: Vec<Vec<Vec<f64>>> = vec![Vec::new(); nodes];
    for (i, p) in s.points().iter().enumerate() {
        parts[i % nodes].push(p.clone());
    }
    parts.into_iter().map(PointSet::new).collect()
}

fn run_diag(mode: DiagMode, seed: u64) -> Result<(), Error> {
    match mode {
        DiagMode::LshMsd => {
            // E[(a.x - a.y)^2] grows as sigma^2 ||x-y||^2 while the projection
            // covariance stays proportional to x.y: projections never decorrelate
            let sigma = 1.0;
            println!("distance,msd,expected");
            for t in [0.5, 1.0, 2.0, 4.0, 8.0] {
                let x = [t];
                let y = [0.0];
                let msd = lsh_msd_check(sigma, &x, &y, 100_000, seed);
                println!("{t},{msd},{}", sigma * sigma * t * t);
            }
            Ok(())
        }
        DiagMode::RsfCov => {
            let spec = FieldSpec::rsf(1.0, 1)?;
            println!("distance,empirical,closed_form,stderr");
            for j in 1..=10 {
                let t = j as f64 / 2.0;
                let (emp, se) = empirical_covariance(&spec, &[t], &[0.0], 100_000, seed)?;
                let cf = covariance(&spec, &[t], &[0.0])?;
                println!("{t},{emp},{cf},{se}");
            }
            Ok(())
        }
        DiagMode::SlepianMono => {
            // exceedance of the 2-point maximum rises as correlation falls,
            // both for the quadrature model and the RSF Monte Carlo
            println!("rho,exceedance");
            for j in 0..20 {
                let rho = j as f64 / 20.0;
                let p = exceed_equidistant_grf(2, rho, 0.9)?;
                println!("{rho},{}", p.prob);
            }
            println!("distance,rsf_ball_exceedance");
            let spec = FieldSpec::rsf(5.0, 1)?;
            for j in 1..=5 {
                let eps = 0.1 * j as f64;
                let mc = exceed_ball_mc(&spec, eps, 0.9, 4000, 64, seed)?;
                let cf = exceed_ball_rsf(0.9, eps, 5.0, 1)?;
                println!("{eps},{} (closed form {})", mc.prob, cf.prob);
            }
            Ok(())
        }
        DiagMode::GrfApprox => {
            let lambda = 300.0;
            let spec = FieldSpec::grf(lambda, 1, 25)?;
            let w = grf_weights(lambda, 25);
            println!("n_terms = 25, positive weights = {}", w.iter().filter(|&&v| v > 0.0).count());
            println!("t,approx_cov,target");
            let mut rms = 0.0;
            let n = 101;
            for j in 0..n {
                let t = j as f64 / (n - 1) as f64;
                // normalize to unit variance for comparison with exp(-lambda t^2)
                let c0 = covariance(&spec, &[0.0], &[0.0])?;
                let cv = covariance(&spec, &[t], &[0.0])? / c0;
                let target = (-lambda * t * t).exp();
                rms += (cv - target) * (cv - target);
                if j % 10 == 0 {
                    println!("{t},{cv},{target}");
                }
            }
            println!("rms_error = {}", (rms / n as f64).sqrt());
            Ok(())
        }
    }
}
