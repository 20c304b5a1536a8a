use vemopt::datasets;
use vemopt::mesh::Mesh;
use vemopt::study::{manufactured_f, manufactured_grad, manufactured_u};

#[test]
#[ignore]
fn conv_tri() {
    let u = manufactured_u(2);
    let f = manufactured_f(2);
    let gr = manufactured_grad(2);
    for k in [1usize, 2, 3] {
        let mut prev: Option<(f64, f64, f64)> = None;
        for np in [66usize, 258, 1026, 4098] {
            let mesh = Mesh::Two(datasets::gen_tri(np, 1).unwrap());
            let h = (2.0 / np as f64).sqrt(); // proxy mesh size
            let mut sys = vemopt::vem::assemble_poisson(&mesh, k, &f, Some(&u)).unwrap();
            match sys.solve() {
                Ok(sol) => {
                    let (el2, eh1) = vemopt::vem::errors(&mesh, k, &sol, &u, &gr).unwrap();
                    let (rl2, rh1) = match prev {
                        Some((ph, pl2, ph1)) => (
                            (pl2 / el2).ln() / (ph / h).ln(),
                            (ph1 / eh1).ln() / (ph / h).ln(),
                        ),
                        None => (f64::NAN, f64::NAN),
                    };
                    println!(
                        "k={k} np={np} E_L2={el2:.3e} (rate {rl2:.2}) E_H1={eh1:.3e} (rate {rh1:.2})"
                    );
                    prev = Some((h, el2, eh1));
                }
                Err(e) => println!("k={k} np={np} SOLVE FAILED: {e}"),
            }
        }
    }
}
