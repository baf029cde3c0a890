//! A ray leaving still air into a layer with a cross wind. The wind is a
//! Randers term, so the refracted direction is not symmetric under
//! flipping the incidence angle, and the ray drifts downwind.

use conesnell::chart::ChartBox;
use conesnell::finsler::Metric;
use conesnell::interface::Interface;
use conesnell::linalg::Vector;
use conesnell::snell::Media;
use conesnell::tracer::{trace, Scene};

fn main() -> conesnell::Result<()> {
    let still = Metric::isotropic(3, 1.0)?;
    let windy = Metric::randers_constant_wind(&[0.0, 0.5])?;
    let media = Media::new(still.clone(), windy, Interface::coordinate_plane(3, 1, 0.0));
    let scene = Scene::new(media, ChartBox::new(vec![0.0, -1.0, -3.0], vec![6.0, 2.0, 3.0]));
    let start = Vector::from_row_slice(&[0.0, -1.0, 0.0]);
    for deg in [-30.0f64, -15.0, 0.0, 15.0, 30.0] {
        let a = deg.to_radians();
        let dir = still.lift(&start, &Vector::from_row_slice(&[0.0, a.cos(), a.sin()]))?;
        let t = trace(&scene, &start, &dir, 2)?;
        let out = &t.events[0].chosen.as_ref().expect("refracted").direction;
        let heading = out[2].atan2(out[1]).to_degrees();
        let speed = out.rows(1, 2).norm() / out[0];
        println!(
            "in {deg:+6.1} deg -> out {heading:+8.3} deg, ground speed {speed:.4}, exits at {:.3?}",
            t.end().x.as_slice()
        );
    }
    Ok(())
}
