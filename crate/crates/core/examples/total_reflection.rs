//! Past the critical angle no refracted direction exists and the default
//! policy follows the reflected branch.

use conesnell::chart::ChartBox;
use conesnell::finsler::Metric;
use conesnell::interface::Interface;
use conesnell::linalg::Vector;
use conesnell::snell::{critical_angle, Media};
use conesnell::tracer::{trace, Scene};

fn main() -> conesnell::Result<()> {
    let (n1, n2) = (1.5, 1.0);
    let m1 = Metric::isotropic(3, n1)?;
    let media = Media::new(m1.clone(), Metric::isotropic(3, n2)?, Interface::coordinate_plane(3, 1, 0.0));
    let scene = Scene::new(media, ChartBox::new(vec![-1.0, -2.0, -3.0], vec![10.0, 2.0, 3.0]));
    let crit = critical_angle(n1, n2).expect("denser first medium").to_degrees();
    println!("critical angle {crit:.4} deg");
    let start = Vector::from_row_slice(&[0.0, -1.0, -1.5]);
    for deg in [30.0, 40.0, 41.0, 42.0, 50.0, 70.0f64] {
        let a = deg.to_radians();
        let dir = m1.lift(&start, &Vector::from_row_slice(&[0.0, a.cos(), a.sin()]))?;
        let t = trace(&scene, &start, &dir, 1)?;
        let e = &t.events[0];
        println!(
            "{deg:>5.1} deg: case {:<24} -> medium {:?}, {:?}",
            e.refraction.case_label.name(),
            e.to_medium,
            e.annotation
        );
    }
    Ok(())
}
