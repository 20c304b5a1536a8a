use std::time::Instant;

use vemopt::config::Config;
use vemopt::datasets;
use vemopt::dual::WeightMode;
use vemopt::mesh::Mesh;
use vemopt::study::{manufactured_f, manufactured_grad, manufactured_u};

fn solve(label: &str, mesh: &Mesh, k: usize) {
    let dim = mesh.dim();
    let u = manufactured_u(dim);
    let f = manufactured_f(dim);
    let gr = manufactured_grad(dim);
    let t = Instant::now();
    let mut sys = vemopt::vem::assemble_poisson(mesh, k, &f, Some(&u)).unwrap();
    let ta = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let sol = sys.solve().unwrap();
    let ts = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let (el2, eh1) = vemopt::vem::errors(mesh, k, &sol, &u, &gr).unwrap();
    let te = t.elapsed().as_secs_f64();
    println!(
        "{label} k={k}: dofs={} asm={ta:.2}s solve={ts:.2}s err={te:.2}s  E_L2={el2:.3e} E_H1={eh1:.3e}",
        sys.dof_map.n_dofs
    );
}

#[test]
#[ignore]
fn bench_optimize_scale() {
    let cfg = Config::default();
    for (label, mesh) in [
        ("qua 181^2", Mesh::Two(datasets::gen_qua(181, 1).unwrap())),
        ("tri 32768", Mesh::Two(datasets::gen_tri(16386, 1).unwrap())),
        ("hex 25^3", Mesh::Three(datasets::gen_hex(25, 1).unwrap())),
        ("tet 13^3x6", Mesh::Three(datasets::gen_tet(13, 1).unwrap())),
    ] {
        let t = Instant::now();
        let (opt, rep) =
            vemopt::agglomerate::optimize(&mesh, 20.0, 5, WeightMode::Quality, &cfg).unwrap();
        println!(
            "{label}: n={} -> {} optimize={:.2}s",
            rep.elements_before,
            opt.num_elements(),
            t.elapsed().as_secs_f64(),
        );
        let orders: &[usize] = if mesh.dim() == 2 { &[1, 2, 3] } else { &[1] };
        for &k in orders {
            solve(label, &mesh, k);
            solve(&format!("{label} opt"), &opt, k);
        }
    }
}
