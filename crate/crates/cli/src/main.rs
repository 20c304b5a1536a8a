//! Command-line driver: dataset generation, quality reports, partitioning,
//! optimization, solving, and the study/ablation orchestration.
//!
//! Every run writes a manifest JSON (tool version, full command line, seed,
//! threads, effective config) next to its primary output, so results can be
//! reproduced bit for bit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use vemopt::config::Config;
use vemopt::datasets::{gen_dataset, DatasetSpec, Family};
use vemopt::dual::WeightMode;
use vemopt::mesh::{io, Mesh};
use vemopt::partition::{compute_k, kway_partition, read_labels, write_labels, PartitionOptions};
use vemopt::report::{delta_metrics, records_to_csv, ReportRecord};
use vemopt::study::{convergence_study, solve_run, weight_ablation, KappaChain};
use vemopt::{Error, Result};

#[derive(Parser)]
#[command(name = "vemopt", version, about = "Polytopal mesh optimization toolkit with a VEM verification solver")]
struct Cli {
    /// Seed for every randomized stage.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Config file with one key=value per line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a dataset of meshes plus its manifest.
    Generate(GenerateArgs),
    /// Per-element quality CSV and the mesh quality scalar.
    Quality(QualityArgs),
    /// K-way partition of the weighted dual graph.
    Partition(PartitionArgs),
    /// Full optimization pipeline: partition + agglomerate.
    Optimize(OptimizeArgs),
    /// Solve the manufactured Poisson or heat problem on a mesh.
    Solve(SolveArgs),
    /// Convergence study over a dataset, original vs optimized.
    Study(StudyArgs),
    /// Quality-weights vs constant-weights ablation over a dataset.
    Ablation(AblationArgs),
    /// Delta metrics between two solve reports.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Mesh family: tri | qua | hex | tet.
    #[arg(long)]
    family: String,
    /// Five increasing element-count targets, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct QualityArgs {
    /// Input mesh (POLY2/POLY3).
    #[arg(long)]
    mesh: PathBuf,
    /// Per-element CSV output path (defaults to stdout).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Optimization parameter: target element percentage in (0, 100].
    #[arg(long, default_value_t = 20.0)]
    kappa: f64,
    /// quality | constant.
    #[arg(long, default_value = "quality")]
    weights: String,
    /// Write the labels (one 1-based part id per element line).
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Use externally computed labels instead of partitioning.
    #[arg(long)]
    labels_in: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Single optimization pass parameter in (0, 100].
    #[arg(long, default_value_t = 20.0)]
    kappa: f64,
    /// Recursive chain like "40,25" (overrides --kappa).
    #[arg(long, value_delimiter = ',')]
    recursive: Option<Vec<f64>>,
    #[arg(long, default_value = "quality")]
    weights: String,
    /// Optimization report JSON path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// VEM order (2D: 1..3, 3D: 1).
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// poisson | heat.
    #[arg(long, default_value = "poisson")]
    problem: String,
    /// Backward Euler steps (heat only).
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Also estimate the condition number.
    #[arg(long)]
    condition: bool,
    /// Report JSON path (defaults to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    family: String,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Orders to solve, comma separated (default: all supported).
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    /// Kappa chains, semicolon separated; "100" is the unoptimized baseline
    /// and a chain like "40-25" applies passes recursively.
    #[arg(long, default_value = "100;20")]
    kappas: String,
    #[arg(long)]
    condition: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct AblationArgs {
    #[arg(long)]
    family: String,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    #[arg(long, default_value_t = 20.0)]
    kappa: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Report JSON of the run on the original mesh.
    #[arg(long)]
    original: PathBuf,
    /// Report JSON of the run on the optimized mesh.
    #[arg(long)]
    optimized: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    let cfg = match &cli.config {
        Some(path) => Config::parse(&read_text(path)?)?,
        None => Config::default(),
    };
    match &cli.cmd {
        Cmd::Generate(a) => generate(cli, &cfg, a),
        Cmd::Quality(a) => quality(cli, &cfg, a),
        Cmd::Partition(a) => partition(cli, &cfg, a),
        Cmd::Optimize(a) => optimize(cli, &cfg, a),
        Cmd::Solve(a) => solve(cli, &cfg, a),
        Cmd::Study(a) => study(cli, &cfg, a),
        Cmd::Ablation(a) => ablation(cli, &cfg, a),
        Cmd::Compare(a) => compare(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(fs::write(path, text)?)
}

/// Reads a mesh in either dimension, sniffing the POLY2/POLY3 header.
fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = read_text(path)?;
    match text.split_whitespace().next() {
        Some("POLY2") => Ok(Mesh::Two(io::read_mesh2(&text)?)),
        Some("POLY3") => Ok(Mesh::Three(io::read_mesh3(&text)?)),
        other => Err(Error::Parse(format!("unknown mesh header {other:?}"))),
    }
}

fn write_mesh(path: &Path, mesh: &Mesh) -> Result<()> {
    let text = match mesh {
        Mesh::Two(m) => io::write_mesh2(m),
        Mesh::Three(m) => io::write_mesh3(m),
    };
    write_text(path, &text)
}

/// Reproduction manifest written next to each run's primary output.
fn write_manifest(cli: &Cli, cfg: &Config, path: &Path) -> Result<()> {
    let manifest = json!({
        "tool": "vemopt",
        "version": env!("CARGO_PKG_VERSION"),
        "argv": std::env::args().collect::<Vec<_>>(),
        "seed": cli.seed,
        "threads": cli.threads,
        "config": cfg,
    });
    write_text(path, &format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()))
}

fn manifest_path(primary: &Path) -> PathBuf {
    let stem = primary.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    primary.with_file_name(format!("{stem}.manifest.json"))
}

fn to_json(value: &impl serde::Serialize) -> String {
    format!("{}\n", serde_json::to_string_pretty(value).unwrap())
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_family(s: &str) -> Result<Family> {
    s.parse()
}

fn dataset_spec(family: Family, sizes: &Option<Vec<usize>>, seed: u64, cfg: &Config) -> Result<DatasetSpec> {
    let mut spec = DatasetSpec::desk(family, seed);
    spec.perturbation = cfg.perturbation;
    if let Some(sizes) = sizes {
        spec.targets = sizes.clone();
    }
    Ok(spec)
}

fn default_orders(family: Family) -> Vec<usize> {
    if family.dim() == 2 {
        vec![1, 2, 3]
    } else {
        vec![1]
    }
}

fn generate(cli: &Cli, cfg: &Config, a: &GenerateArgs) -> Result<()> {
    let family = parse_family(&a.family)?;
    let spec = dataset_spec(family, &a.sizes, cli.seed, cfg)?;
    let (meshes, manifest) = gen_dataset(&spec)?;
    for (i, mesh) in meshes.iter().enumerate() {
        let ext = if family.dim() == 2 { "poly2" } else { "poly3" };
        write_mesh(&a.out_dir.join(format!("{}_{i}.{ext}", family.name())), mesh)?;
    }
    write_text(&a.out_dir.join("manifest.json"), &to_json(&manifest))?;
    write_manifest(cli, cfg, &a.out_dir.join("run.manifest.json"))?;
    println!("wrote {} meshes to {}", meshes.len(), a.out_dir.display());
    Ok(())
}

fn quality(cli: &Cli, cfg: &Config, a: &QualityArgs) -> Result<()> {
    let mesh = read_mesh(&a.mesh)?;
    let n_components = if mesh.dim() == 2 { 4 } else { 3 };
    let mut csv = String::from("element_id");
    for c in 1..=n_components {
        csv.push_str(&format!(",rho{c}"));
    }
    csv.push_str(",quality\n");
    for e in 0..mesh.num_elements() {
        let q = vemopt::quality::element_quality(&mesh, e)?;
        csv.push_str(&format!("{e}"));
        for v in &q.components {
            csv.push_str(&format!(",{v}"));
        }
        csv.push_str(&format!(",{}\n", q.element));
    }
    emit(a.csv.as_ref(), &csv)?;
    let summary = json!({
        "mesh": a.mesh.display().to_string(),
        "n_elements": mesh.num_elements(),
        "mesh_quality": vemopt::quality::mesh_quality(&mesh)?,
    });
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    if let Some(csv_path) = &a.csv {
        write_manifest(cli, cfg, &manifest_path(csv_path))?;
    }
    Ok(())
}

fn partition(cli: &Cli, cfg: &Config, a: &PartitionArgs) -> Result<()> {
    let mesh = read_mesh(&a.mesh)?;
    let mode: WeightMode = a.weights.parse()?;
    let labels = match &a.labels_in {
        Some(path) => {
            let l = read_labels(&read_text(path)?)?;
            if l.labels.len() != mesh.num_elements() {
                return Err(Error::InvalidArgument(format!(
                    "label file has {} entries for {} elements",
                    l.labels.len(),
                    mesh.num_elements()
                )));
            }
            l
        }
        None => {
            let graph = vemopt::dual::build_dual_graph(&mesh, mode, cfg)?;
            let k = compute_k(mesh.num_elements(), a.kappa);
            let options = PartitionOptions { imbalance_tol: cfg.imbalance_tol, ..Default::default() };
            kway_partition(&graph, k, cli.seed, &options)
        }
    };
    if let Some(path) = &a.labels_out {
        write_text(path, &write_labels(&labels))?;
        write_manifest(cli, cfg, &manifest_path(path))?;
    }
    let summary = json!({
        "n_elements": mesh.num_elements(),
        "k_requested": labels.k_requested,
        "k_actual": labels.k_actual,
        "cut": labels.cut,
        "imbalance": labels.imbalance,
        "infeasible_balance": labels.infeasible_balance,
    });
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    Ok(())
}

fn optimize(cli: &Cli, cfg: &Config, a: &OptimizeArgs) -> Result<()> {
    let mesh = read_mesh(&a.mesh)?;
    let mode: WeightMode = a.weights.parse()?;
    let chain = match &a.recursive {
        Some(ks) => KappaChain(ks.clone()),
        None => KappaChain(vec![a.kappa]),
    };
    let mut current = mesh;
    let mut reports = Vec::new();
    for &kappa in &chain.0 {
        let (next, rep) = vemopt::agglomerate::optimize(&current, kappa, cli.seed, mode, cfg)?;
        reports.push(rep);
        current = next;
    }
    write_mesh(&a.out, &current)?;
    write_manifest(cli, cfg, &manifest_path(&a.out))?;
    let report = json!({ "chain": chain.label(), "passes": reports });
    if let Some(path) = &a.report {
        write_text(path, &to_json(&report))?;
    } else {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    }
    Ok(())
}

fn solve(cli: &Cli, cfg: &Config, a: &SolveArgs) -> Result<()> {
    let mesh = read_mesh(&a.mesh)?;
    let mesh_id = a.mesh.display().to_string();
    let report: serde_json::Value = match a.problem.as_str() {
        "poisson" => {
            let record = solve_run(&mesh, &mesh_id, a.order, 0.0, a.condition)?;
            serde_json::to_value(&record).unwrap()
        }
        "heat" => heat_report(&mesh, &mesh_id, a)?,
        other => return Err(Error::InvalidArgument(format!("unknown problem '{other}'"))),
    };
    let text = format!("{}\n", serde_json::to_string_pretty(&report).unwrap());
    emit(a.report.as_ref(), &text)?;
    if let Some(path) = &a.report {
        write_manifest(cli, cfg, &manifest_path(path))?;
    }
    Ok(())
}

/// Heat run: u(t, x) = t u_m(x) with the manufactured spatial profile, so
/// f = u_m + t f_m, g = t u_m, u0 = 0; reports the backward Euler cost
/// structure plus the final-time errors.
fn heat_report(mesh: &Mesh, mesh_id: &str, a: &SolveArgs) -> Result<serde_json::Value> {
    let dim = mesh.dim();
    let um = vemopt::study::manufactured_u(dim);
    let fm = vemopt::study::manufactured_f(dim);
    let gm = vemopt::study::manufactured_grad(dim);
    let t_final = 1.0;
    let (states, timings) = vemopt::vem::solve_heat_backward_euler(
        mesh,
        a.order,
        &|t, p| um(p) + t * fm(p),
        &|t, p| t * um(p),
        &|_| 0.0,
        t_final,
        a.steps,
    )?;
    let last = states.last().unwrap();
    let (e_l2, e_h1) = vemopt::vem::errors(
        mesh,
        a.order,
        last,
        &|p| t_final * um(p),
        &|p| t_final * gm(p),
    )?;
    Ok(json!({
        "mesh_id": mesh_id,
        "problem": "heat",
        "k": a.order,
        "steps": a.steps,
        "t_final": t_final,
        "e_l2": e_l2,
        "e_h1": e_h1,
        "t_assemble": timings.assemble,
        "t_factorize": timings.factorize,
        "t_solve": timings.solve,
        "t_total": timings.total,
    }))
}

fn study(cli: &Cli, cfg: &Config, a: &StudyArgs) -> Result<()> {
    let family = parse_family(&a.family)?;
    let spec = dataset_spec(family, &a.sizes, cli.seed, cfg)?;
    let (meshes, ds_manifest) = gen_dataset(&spec)?;
    let orders = a.orders.clone().unwrap_or_else(|| default_orders(family));
    let kappas: Vec<KappaChain> = a
        .kappas
        .split(';')
        .map(|s| s.trim().parse())
        .collect::<Result<_>>()?;
    let bundle = convergence_study(&meshes, family.name(), &orders, &kappas, cli.seed, cfg, a.condition)?;
    write_text(&a.out_dir.join("study.json"), &to_json(&bundle))?;
    write_text(&a.out_dir.join("study.csv"), &bundle.csv())?;
    write_text(&a.out_dir.join("dataset.manifest.json"), &to_json(&ds_manifest))?;
    write_manifest(cli, cfg, &a.out_dir.join("run.manifest.json"))?;
    for r in &bundle.rates {
        println!(
            "kappa={} k={}: rate_L2={:.2} rate_H1={:.2}",
            if r.kappa.is_empty() { "100" } else { &r.kappa },
            r.k,
            r.rate_l2,
            r.rate_h1
        );
    }
    println!("wrote study bundle to {}", a.out_dir.display());
    Ok(())
}

fn ablation(cli: &Cli, cfg: &Config, a: &AblationArgs) -> Result<()> {
    let family = parse_family(&a.family)?;
    let spec = dataset_spec(family, &a.sizes, cli.seed, cfg)?;
    let (meshes, _) = gen_dataset(&spec)?;
    let orders = a.orders.clone().unwrap_or_else(|| default_orders(family));
    let bundle = weight_ablation(&meshes, family.name(), &orders, a.kappa, cli.seed, cfg)?;
    write_text(&a.out_dir.join("ablation.json"), &to_json(&bundle))?;
    let quality_records: Vec<ReportRecord> =
        bundle.quality_runs.iter().map(|r| r.record.clone()).collect();
    let constant_records: Vec<ReportRecord> =
        bundle.constant_runs.iter().map(|r| r.record.clone()).collect();
    write_text(&a.out_dir.join("ablation_quality.csv"), &records_to_csv(&quality_records))?;
    write_text(&a.out_dir.join("ablation_constant.csv"), &records_to_csv(&constant_records))?;
    write_manifest(cli, cfg, &a.out_dir.join("run.manifest.json"))?;
    println!("wrote ablation bundle to {}", a.out_dir.display());
    Ok(())
}

fn compare(a: &CompareArgs) -> Result<()> {
    let parse = |path: &Path| -> Result<ReportRecord> {
        serde_json::from_str(&read_text(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    };
    let original = parse(&a.original)?;
    let optimized = parse(&a.optimized)?;
    let delta = delta_metrics(&original, &optimized)?;
    println!("{}", serde_json::to_string_pretty(&delta).unwrap());
    Ok(())
}
