//! Per-run report records, optimization delta metrics, convergence-rate
//! estimation and CSV/JSON emission.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A solution E_L2 beyond this is flagged as diverged (the run is still
/// recorded with its values).
pub const DIVERGENCE_THRESHOLD: f64 = 1e3;

/// One solver run on one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub schema_version: u32,
    pub mesh_id: String,
    /// Order the run was solved with.
    pub k: usize,
    pub dim: usize,
    pub n_vertices: usize,
    /// Interfaces: edges in 2D, faces in 3D.
    pub n_interfaces: usize,
    pub n_elements: usize,
    /// Mesh size h (max element diameter).
    pub h: f64,
    /// DOF counts for k = 1, 2, 3 (zeros where the order is unsupported).
    pub dofs: [usize; 3],
    /// Mesh quality indicator in [0, 1].
    pub quality: f64,
    pub e_l2: f64,
    pub e_h1: f64,
    pub diverged: bool,
    pub t_optimize: f64,
    pub t_assemble: f64,
    pub t_factorize: f64,
    pub t_solve: f64,
    pub t_total: f64,
    pub condition: Option<f64>,
}

impl ReportRecord {
    /// DOFs for the order this record was solved with.
    pub fn dofs_solved(&self) -> usize {
        self.dofs[self.k - 1]
    }

    /// T of the solve pipeline: assemble + factorize + solve.
    pub fn t_pipeline(&self) -> f64 {
        self.t_assemble + self.t_factorize + self.t_solve
    }
}

/// Differences between a run on an original mesh and on its optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub schema_version: u32,
    pub k: usize,
    /// dofs(original) - dofs(optimized); >= 0 for a genuine optimization.
    pub delta_dofs: i64,
    /// E(original) - E(optimized): positive when the optimized mesh is more
    /// accurate.
    pub delta_e_l2: f64,
    pub delta_e_h1: f64,
    /// Pipeline time saved (assemble + factorize + solve), excluding the
    /// optimization time itself.
    pub delta_t: f64,
    /// Same, with the optimization time charged to the optimized mesh.
    pub delta_t_incl_optimize: f64,
    /// delta_e / delta_dofs; None when delta_dofs <= 0.
    pub r_l2: Option<f64>,
    pub r_h1: Option<f64>,
}

/// Deltas of `optimized` relative to `original`; both must come from the
/// same problem (dimension and order).
pub fn delta_metrics(original: &ReportRecord, optimized: &ReportRecord) -> Result<DeltaRecord> {
    if original.k != optimized.k || original.dim != optimized.dim {
        return Err(Error::MismatchedRuns);
    }
    let delta_dofs = original.dofs_solved() as i64 - optimized.dofs_solved() as i64;
    let delta_e_l2 = original.e_l2 - optimized.e_l2;
    let delta_e_h1 = original.e_h1 - optimized.e_h1;
    let ratio = |de: f64| if delta_dofs > 0 { Some(de / delta_dofs as f64) } else { None };
    Ok(DeltaRecord {
        schema_version: SCHEMA_VERSION,
        k: original.k,
        delta_dofs,
        delta_e_l2,
        delta_e_h1,
        delta_t: original.t_pipeline() - optimized.t_pipeline(),
        delta_t_incl_optimize: original.t_pipeline()
            - (optimized.t_pipeline() + optimized.t_optimize),
        r_l2: ratio(delta_e_l2),
        r_h1: ratio(delta_e_h1),
    })
}

/// Least-squares slope p of log E against log h: E = C h^p.
pub fn rate(hs: &[f64], es: &[f64]) -> f64 {
    assert_eq!(hs.len(), es.len());
    assert!(hs.len() >= 2);
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// CSV table of records (one row per run), with a fixed documented header:
/// mesh_id,k,dim,n_elements,h,dofs,quality,e_l2,e_h1,diverged,
/// t_optimize,t_assemble,t_factorize,t_solve,t_total,condition
pub fn records_to_csv(records: &[ReportRecord]) -> String {
    let mut out = String::from(
        "mesh_id,k,dim,n_elements,h,dofs,quality,e_l2,e_h1,diverged,\
         t_optimize,t_assemble,t_factorize,t_solve,t_total,condition\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{:.17e},{},{:.17e},{:.17e},{:.17e},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{}\n",
            r.mesh_id,
            r.k,
            r.dim,
            r.n_elements,
            r.h,
            r.dofs_solved(),
            r.quality,
            r.e_l2,
            r.e_h1,
            r.diverged,
            r.t_optimize,
            r.t_assemble,
            r.t_factorize,
            r.t_solve,
            r.t_total,
            r.condition.map_or(String::new(), |c| format!("{c:.6e}")),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_record(k: usize, dofs: usize, e: f64) -> ReportRecord {
        ReportRecord {
            schema_version: SCHEMA_VERSION,
            mesh_id: "tri-0-K100".into(),
            k,
            dim: 2,
            n_vertices: 10,
            n_interfaces: 20,
            n_elements: 11,
            h: 0.5,
            dofs: [dofs, 0, 0],
            quality: 0.9,
            e_l2: e,
            e_h1: 2.0 * e,
            diverged: e > DIVERGENCE_THRESHOLD,
            t_optimize: 0.0,
            t_assemble: 0.1,
            t_factorize: 0.2,
            t_solve: 0.3,
            t_total: 0.6,
            condition: None,
        }
    }

    #[test]
    fn identical_records_give_zero_deltas() {
        let r = sample_record(1, 1000, 1e-3);
        let d = delta_metrics(&r, &r).unwrap();
        assert_eq!(d.delta_dofs, 0);
        assert_eq!(d.delta_e_l2, 0.0);
        assert_eq!(d.delta_e_h1, 0.0);
        assert_eq!(d.delta_t, 0.0);
        assert!(d.r_l2.is_none());
    }

    #[test]
    fn dof_reduction_with_equal_errors() {
        let a = sample_record(1, 1000, 1e-3);
        let b = sample_record(1, 800, 1e-3);
        let d = delta_metrics(&a, &b).unwrap();
        assert_eq!(d.delta_dofs, 200);
        assert_eq!(d.delta_e_l2, 0.0);
        assert_eq!(d.r_l2, Some(0.0));
    }

    #[test]
    fn magnitude_ordering_of_ratios() {
        // Large DOF savings with a slightly worse error: the ratio is a tiny
        // negative number.
        let mut a = sample_record(2, 200_000, 1e-5);
        let mut b = sample_record(2, 100_000, 1e-5 + 1e-6);
        a.k = 2;
        b.k = 2;
        a.dofs = [0, 200_000, 0];
        b.dofs = [0, 100_000, 0];
        let d = delta_metrics(&a, &b).unwrap();
        assert_eq!(d.delta_dofs, 100_000);
        assert!(d.delta_e_l2 < 0.0);
        let r = d.r_l2.unwrap();
        assert!(r < 0.0 && r.abs() < 1e-10);
    }

    #[test]
    fn mismatched_orders_rejected() {
        let a = sample_record(1, 100, 1e-3);
        let mut b = sample_record(1, 100, 1e-3);
        b.k = 2;
        b.dofs = [0, 100, 0];
        assert!(matches!(delta_metrics(&a, &b), Err(Error::MismatchedRuns)));
    }

    #[test]
    fn rate_recovers_synthetic_slope() {
        let hs = [0.5f64, 0.25, 0.125, 0.0625];
        let es: Vec<f64> = hs.iter().map(|&h| 3.7 * h.powf(2.5)).collect();
        assert!((rate(&hs, &es) - 2.5).abs() < 1e-6);
    }

    #[test]
    fn json_round_trip_is_identity() {
        let r = sample_record(1, 1000, 1e-3);
        let s1 = serde_json::to_string(&r).unwrap();
        let back: ReportRecord = serde_json::from_str(&s1).unwrap();
        let s2 = serde_json::to_string(&back).unwrap();
        assert_eq!(r, back);
        assert_eq!(s1, s2);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let csv = records_to_csv(&[sample_record(1, 1000, 1e-3)]);
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("mesh_id,k,dim,"));
        assert!(lines.next().unwrap().starts_with("tri-0-K100,1,2,11,"));
        assert!(lines.next().is_none());
    }
}
