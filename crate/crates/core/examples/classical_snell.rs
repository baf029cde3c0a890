//! Isotropic media reduce the cone law to n1 sin θ1 = n2 sin θ2 and the
//! mirror law. Sweeps the incidence angle and compares.

use conesnell::finsler::Metric;
use conesnell::interface::Interface;
use conesnell::linalg::{angle_between, Vector};
use conesnell::snell::{critical_angle, incident_data, solve_reflection, solve_refraction, Media};

fn main() -> conesnell::Result<()> {
    for (n1, n2) in [(1.0, 1.5), (1.5, 1.0)] {
        let media = Media::new(
            Metric::isotropic(3, n1)?,
            Metric::isotropic(3, n2)?,
            Interface::coordinate_plane(3, 1, 0.0),
        );
        println!("n1 = {n1}, n2 = {n2}");
        if let Some(c) = critical_angle(n1, n2) {
            println!("  critical angle {:.6} deg", c.to_degrees());
        }
        println!("  {:>6} {:>12} {:>12} {:>12}", "θ1", "θ2", "law", "reflected");
        for deg in (10..=80).step_by(10) {
            let th = (deg as f64).to_radians();
            let u = Vector::from_row_slice(&[1.0, th.cos() / n1, th.sin() / n1]);
            let o = Vector::zeros(3);
            let inc = incident_data(&media, &o, &u)?;
            let refr = solve_refraction(&media, &inc)?;
            let refl = solve_reflection(&media, &inc)?;
            let angle = |v: &Vector| v[2].abs().atan2(v[1].abs()).to_degrees();
            let got = refr.straight().map(|d| format!("{:.6}", angle(&d.v))).unwrap_or("-".into());
            let law = (n1 / n2 * th.sin()).asin();
            let law = if law.is_nan() { "-".into() } else { format!("{:.6}", law.to_degrees()) };
            let back = refl
                .proper()
                .find(|d| angle_between(&d.v, &inc.u) > 1e-8)
                .map(|d| format!("{:.6}", angle(&d.v)))
                .unwrap_or("-".into());
            println!("  {deg:>6} {got:>12} {law:>12} {back:>12}");
        }
    }
    Ok(())
}
