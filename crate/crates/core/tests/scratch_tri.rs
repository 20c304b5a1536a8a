use nalgebra::DVector;
use vemopt::mesh::Mesh;
use vemopt::study::{manufactured_f, manufactured_u};

#[test]
#[ignore]
fn dof_deviation_by_order() {
    let u = manufactured_u(2);
    let f = manufactured_f(2);
    let m2 = vemopt::datasets::gen_tri(1026, 1).unwrap();
    let mut min_area = f64::MAX;
    let mut min_q = f64::MAX;
    for e in 0..m2.num_faces() {
        let meas = m2.measures(e).unwrap();
        min_area = min_area.min(meas.size);
        let q = vemopt::quality::quality_2d(&m2, e).unwrap();
        min_q = min_q.min(q.element);
    }
    println!("min area = {min_area:.3e}, min quality = {min_q:.3e}");
    let mesh = Mesh::Two(m2);
    for k in [1usize, 2, 3] {
        let mut sys = vemopt::vem::assemble_poisson(&mesh, k, &f, Some(&u)).unwrap();
        let sol = sys.solve().unwrap();
        let interp = vemopt::vem::interpolate(&mesh, k, &u).unwrap();
        let mut worst = (0.0f64, 0usize);
        for (i, (a, b)) in sol.iter().zip(&interp).enumerate() {
            let d = (a - b).abs();
            if d > worst.0 {
                worst = (d, i);
            }
        }
        // Residual of the interpolant in the reduced system: measures the
        // local consistency error driving the deviation.
        println!("k={k}: max |u_h - I_h u| = {:.3e} at dof {}", worst.0, worst.1);
    }
    // Geometry around the worst k=2 dof (666 = vertex id).
    let m2 = match &mesh {
        Mesh::Two(m) => m,
        _ => unreachable!(),
    };
    for e in 0..m2.num_faces() {
        if m2.faces[e].contains(&666) {
            let meas = m2.measures(e).unwrap();
            let q = vemopt::quality::quality_2d(m2, e).unwrap();
            println!(
                "  elem {e} verts {:?} area={:.3e} diam={:.3e} q={:.3e}",
                &m2.faces[e],
                meas.size,
                meas.diameter,
                q.element
            );
        }
    }
    let _ = DVector::<f64>::zeros(1);
}
