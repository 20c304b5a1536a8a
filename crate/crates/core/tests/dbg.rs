use std::time::Instant;
use vemopt::config::Config;
use vemopt::study::{convergence_study, KappaChain};

#[test]
#[ignore]
fn dbg_full_study() {
    let cfg = Config::default();
    let kappas = vec![KappaChain(vec![]), "20".parse::<KappaChain>().unwrap()];
    for fam in ["tri", "qua", "hex", "tet"] {
        let family: vemopt::datasets::Family = fam.parse().unwrap();
        let spec = vemopt::datasets::DatasetSpec::desk(family, 42);
        let (meshes, _) = vemopt::datasets::gen_dataset(&spec).unwrap();
        let k_list: Vec<usize> = if family.dim() == 2 { vec![1, 2, 3] } else { vec![1] };
        let t = Instant::now();
        let bundle = convergence_study(&meshes, fam, &k_list, &kappas, 42, &cfg, false).unwrap();
        println!("{fam}: study took {:.1}s", t.elapsed().as_secs_f64());
        for r in &bundle.rates {
            println!("  {fam} kappa='{}' k={}: rate_L2={:.2} rate_H1={:.2}", r.kappa, r.k, r.rate_l2, r.rate_h1);
        }
        for run in &bundle.runs {
            if run.record.e_l2.is_nan() || run.record.e_l2 >= 1e3 {
                println!("  DIVERGED: {fam} mesh {} kappa '{}' k={}", run.mesh_index, run.kappa, run.record.k);
            }
        }
    }
}
