//! A face that is spacelike for the second cone (a sudden change of the
//! medium at a given instant) refracts every ray twice. Only one of the two
//! branches is straight oriented, which the connector search confirms: the
//! other one can be shortcut by a timelike path.

use conesnell::finsler::Metric;
use conesnell::interface::Interface;
use conesnell::linalg::Vector;
use conesnell::snell::{incident_data, solve_refraction, Media};
use conesnell::tracer::timelike_connector_search;

fn main() -> conesnell::Result<()> {
    let media = Media::new(
        Metric::minkowski(3),
        Metric::isotropic(3, 0.5)?,
        Interface::coordinate_plane(3, 0, 0.0),
    );
    let p = Vector::zeros(3);
    let u = Vector::from_row_slice(&[1.0, 0.6, 0.8]);
    let inc = incident_data(&media, &p, &u)?;
    let out = solve_refraction(&media, &inc)?;
    println!("case {} with {} directions", out.case_label.name(), out.directions.len());
    for d in &out.directions {
        let c = timelike_connector_search(&media, &p, &u, &d.v, 2)?;
        println!(
            "  v = {:.4?} straight: {:<5} timelike connector: {} (margin {:+.2e})",
            d.v.as_slice(),
            d.straight_oriented,
            c.found,
            c.margin
        );
    }
    Ok(())
}
