//! Experiment orchestration: convergence studies over dataset mesh
//! sequences, baseline-vs-optimized delta tables, and the weight ablation.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::agglomerate;
use crate::config::Config;
use crate::dual::WeightMode;
use crate::mesh::Mesh;
use crate::report::{
    delta_metrics, rate, records_to_csv, DeltaRecord, ReportRecord, DIVERGENCE_THRESHOLD,
    SCHEMA_VERSION,
};
use crate::vem;
use crate::{Error, Result};

/// Manufactured exact solution: a separable polynomial bump vanishing on
/// the boundary of the unit square/cube.
pub fn manufactured_u(dim: usize) -> fn(&Point3<f64>) -> f64 {
    if dim == 2 {
        |p| 16.0 * p.x * p.y * (1.0 - p.x) * (1.0 - p.y)
    } else {
        |p| 6.4 * p.x * p.y * p.z * (p.x - 1.0) * (p.y - 1.0) * (p.z - 1.0)
    }
}

/// Forcing term -Lap u of the manufactured solution.
pub fn manufactured_f(dim: usize) -> fn(&Point3<f64>) -> f64 {
    if dim == 2 {
        |p| 32.0 * (p.x * (1.0 - p.x) + p.y * (1.0 - p.y))
    } else {
        |p| {
            let xx = p.x * (p.x - 1.0);
            let yy = p.y * (p.y - 1.0);
            let zz = p.z * (p.z - 1.0);
            -12.8 * (yy * zz + xx * zz + xx * yy)
        }
    }
}

/// Gradient of the manufactured solution.
pub fn manufactured_grad(dim: usize) -> fn(&Point3<f64>) -> Vector3<f64> {
    if dim == 2 {
        |p| {
            Vector3::new(
                16.0 * p.y * (1.0 - p.y) * (1.0 - 2.0 * p.x),
                16.0 * p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y),
                0.0,
            )
        }
    } else {
        |p| {
            let xx = p.x * (p.x - 1.0);
            let yy = p.y * (p.y - 1.0);
            let zz = p.z * (p.z - 1.0);
            Vector3::new(
                6.4 * (2.0 * p.x - 1.0) * yy * zz,
                6.4 * xx * (2.0 * p.y - 1.0) * zz,
                6.4 * xx * yy * (2.0 * p.z - 1.0),
            )
        }
    }
}

/// A sequence of agglomeration passes, e.g. "40-25" optimizes to 40% of the
/// elements and then to 25% of the remainder; "100" is the baseline
/// (no optimization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaChain(pub Vec<f64>);

impl KappaChain {
    pub fn baseline() -> Self {
        Self(vec![100.0])
    }

    pub fn is_baseline(&self) -> bool {
        self.0.iter().all(|&k| k >= 100.0)
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Applies the passes in order; kappa = 100 steps are identities.
    pub fn apply(
        &self,
        mesh: &Mesh,
        seed: u64,
        mode: WeightMode,
        cfg: &Config,
    ) -> Result<(Mesh, f64)> {
        let mut current = mesh.clone();
        let mut t_optimize = 0.0;
        for &kappa in &self.0 {
            if kappa >= 100.0 {
                continue;
            }
            let (next, rep) = agglomerate::optimize(&current, kappa, seed, mode, cfg)?;
            t_optimize += rep.t_optimize;
            current = next;
        }
        Ok((current, t_optimize))
    }
}

impl FromStr for KappaChain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split('-')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad kappa '{p}'")))
            })
            .collect::<Result<_>>()?;
        if parts.is_empty() || parts.iter().any(|&k| !(k > 0.0 && k <= 100.0)) {
            return Err(Error::InvalidArgument(format!("kappa chain '{s}' outside (0, 100]")));
        }
        Ok(Self(parts))
    }
}

impl fmt::Display for KappaChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| format!("{k}")).collect();
        write!(f, "{}", parts.join("-"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRun {
    pub mesh_index: usize,
    pub kappa: String,
    pub record: ReportRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyDelta {
    pub mesh_index: usize,
    pub kappa: String,
    pub delta: DeltaRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub kappa: String,
    pub k: usize,
    /// Slopes over the last (up to) 3 meshes of the sequence.
    pub rate_l2: f64,
    pub rate_h1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyBundle {
    pub schema_version: u32,
    pub family: String,
    pub seed: u64,
    pub runs: Vec<StudyRun>,
    pub deltas: Vec<StudyDelta>,
    pub rates: Vec<RateEstimate>,
}

impl StudyBundle {
    /// Plot data: DOFs/h vs errors, one row per run.
    pub fn csv(&self) -> String {
        records_to_csv(&self.runs.iter().map(|r| r.record.clone()).collect::<Vec<_>>())
    }
}

/// Solves the manufactured Poisson problem on one mesh and fills a record.
/// Solver breakdowns are recorded as divergent runs rather than errors.
pub fn solve_run(
    mesh: &Mesh,
    mesh_id: &str,
    k: usize,
    t_optimize: f64,
    with_condition: bool,
) -> Result<ReportRecord> {
    let dim = mesh.dim();
    let u = manufactured_u(dim);
    let f = manufactured_f(dim);
    let g = manufactured_grad(dim);

    let mut dofs = [0usize; 3];
    for kk in 1..=3 {
        if let Ok(dm) = vem::build_dof_map(mesh, kk) {
            dofs[kk - 1] = dm.n_dofs;
        }
    }

    let t0 = Instant::now();
    let mut sys = vem::assemble_poisson(mesh, k, &u_wrap(f), Some(&u_wrap(u)))?;
    let t_assemble = t0.elapsed().as_secs_f64();

    // Median of 3 solve repeats for stable timings.
    let mut t_fac = Vec::new();
    let mut t_sol = Vec::new();
    let mut solution = None;
    let mut failure = None;
    for _ in 0..3 {
        match sys.solve() {
            Ok(x) => {
                t_fac.push(sys.timings.factorize);
                t_sol.push(sys.timings.solve);
                solution = Some(x);
            }
            Err(e @ (Error::NotPositiveDefinite | Error::NoConvergence { .. })) => {
                failure = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let (e_l2, e_h1, diverged) = match (&solution, &failure) {
        (Some(x), None) => {
            let (l2, h1) = vem::errors(mesh, k, x, &u_wrap(u), &g_wrap(g))?;
            (l2, h1, l2 > DIVERGENCE_THRESHOLD || !l2.is_finite())
        }
        // Divergent: keep finite sentinel errors and flag the run.
        _ => (DIVERGENCE_THRESHOLD * 1e3, DIVERGENCE_THRESHOLD * 1e3, true),
    };
    let median = |v: &mut Vec<f64>| -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let t_factorize = median(&mut t_fac);
    let t_solve = median(&mut t_sol);

    let condition = if with_condition && !diverged {
        sys.condition_estimate().ok()
    } else {
        None
    };

    let (n_vertices, n_interfaces) = match mesh {
        Mesh::Two(m) => (m.num_vertices(), m.num_edges()),
        Mesh::Three(m) => (m.num_vertices(), m.num_faces()),
    };
    Ok(ReportRecord {
        schema_version: SCHEMA_VERSION,
        mesh_id: mesh_id.to_string(),
        k,
        dim,
        n_vertices,
        n_interfaces,
        n_elements: mesh.num_elements(),
        h: mesh.mesh_size(),
        dofs,
        quality: crate::quality::mesh_quality(mesh)?,
        e_l2,
        e_h1,
        diverged,
        t_optimize,
        t_assemble,
        t_factorize,
        t_solve,
        t_total: t_optimize + t_assemble + t_factorize + t_solve,
        condition,
    })
}

fn u_wrap(f: fn(&Point3<f64>) -> f64) -> impl Fn(&Point3<f64>) -> f64 + Sync {
    move |p| f(p)
}

fn g_wrap(f: fn(&Point3<f64>) -> Vector3<f64>) -> impl Fn(&Point3<f64>) -> Vector3<f64> + Sync {
    move |p| f(p)
}

/// Runs every mesh x kappa chain x order combination, collects records,
/// deltas against the kappa = 100 baseline, and log-log rate estimates.
pub fn convergence_study(
    meshes: &[Mesh],
    family: &str,
    k_list: &[usize],
    kappas: &[KappaChain],
    seed: u64,
    cfg: &Config,
    with_condition: bool,
) -> Result<StudyBundle> {
    let mut runs = Vec::new();
    for (i, mesh) in meshes.iter().enumerate() {
        for chain in kappas {
            let (opt, t_optimize) = chain.apply(mesh, seed, WeightMode::Quality, cfg)?;
            for &k in k_list {
                if mesh.dim() == 3 && k > 1 {
                    continue;
                }
                let id = format!("{family}{i}-K{}", chain.label());
                runs.push(StudyRun {
                    mesh_index: i,
                    kappa: chain.label(),
                    record: solve_run(&opt, &id, k, t_optimize, with_condition)?,
                });
            }
        }
    }

    let mut deltas = Vec::new();
    for run in &runs {
        let chain: KappaChain = run.kappa.parse()?;
        if chain.is_baseline() {
            continue;
        }
        if let Some(base) = runs.iter().find(|r| {
            r.mesh_index == run.mesh_index
                && r.record.k == run.record.k
                && r.kappa.parse::<KappaChain>().map(|c| c.is_baseline()).unwrap_or(false)
        }) {
            deltas.push(StudyDelta {
                mesh_index: run.mesh_index,
                kappa: run.kappa.clone(),
                delta: delta_metrics(&base.record, &run.record)?,
            });
        }
    }

    let mut rates = Vec::new();
    for chain in kappas {
        for &k in k_list {
            let series: Vec<&ReportRecord> = runs
                .iter()
                .filter(|r| r.kappa == chain.label() && r.record.k == k && !r.record.diverged)
                .map(|r| &r.record)
                .collect();
            if series.len() < 2 {
                continue;
            }
            let tail = &series[series.len().saturating_sub(3)..];
            let hs: Vec<f64> = tail.iter().map(|r| r.h).collect();
            let l2: Vec<f64> = tail.iter().map(|r| r.e_l2).collect();
            let h1: Vec<f64> = tail.iter().map(|r| r.e_h1).collect();
            rates.push(RateEstimate {
                kappa: chain.label(),
                k,
                rate_l2: rate(&hs, &l2),
                rate_h1: rate(&hs, &h1),
            });
        }
    }

    Ok(StudyBundle {
        schema_version: SCHEMA_VERSION,
        family: family.to_string(),
        seed,
        runs,
        deltas,
        rates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationBundle {
    pub schema_version: u32,
    pub family: String,
    pub seed: u64,
    pub kappa: f64,
    pub quality_runs: Vec<StudyRun>,
    pub constant_runs: Vec<StudyRun>,
}

/// Optimizes every mesh with quality weights and with constant weights at
/// the same kappa and seed, solving each result.
pub fn weight_ablation(
    meshes: &[Mesh],
    family: &str,
    k_list: &[usize],
    kappa: f64,
    seed: u64,
    cfg: &Config,
) -> Result<AblationBundle> {
    let mut bundles = Vec::new();
    for mode in [WeightMode::Quality, WeightMode::Constant] {
        let chain = KappaChain(vec![kappa]);
        let mut runs = Vec::new();
        for (i, mesh) in meshes.iter().enumerate() {
            let (opt, t_optimize) = chain.apply(mesh, seed, mode, cfg)?;
            for &k in k_list {
                if mesh.dim() == 3 && k > 1 {
                    continue;
                }
                let id = format!("{family}{i}-K{kappa}-{mode:?}");
                runs.push(StudyRun {
                    mesh_index: i,
                    kappa: chain.label(),
                    record: solve_run(&opt, &id, k, t_optimize, false)?,
                });
            }
        }
        bundles.push(runs);
    }
    let constant_runs = bundles.pop().unwrap();
    let quality_runs = bundles.pop().unwrap();
    Ok(AblationBundle {
        schema_version: SCHEMA_VERSION,
        family: family.to_string(),
        seed,
        kappa,
        quality_runs,
        constant_runs,
    })
}
