//! Aims a ray from a source at an observer across a refracting plane and
//! checks that its arrival time is critical, comparing with a brute-force
//! minimisation over broken lightlike paths.

use conesnell::chart::ChartBox;
use conesnell::finsler::Metric;
use conesnell::interface::Interface;
use conesnell::linalg::Vector;
use conesnell::snell::Media;
use conesnell::tracer::{aim_at_receiver, fermat_criticality_check, fermat_oracle, LocalModel, Receiver, Scene};

fn main() -> conesnell::Result<()> {
    let media = Media::new(
        Metric::isotropic(3, 1.0)?,
        Metric::randers_constant_wind(&[0.1, 0.3])?,
        Interface::plane(&[0.0, 1.0, 0.2], 0.0)?,
    );
    let mut scene = Scene::new(media, ChartBox::new(vec![-1.0, -3.0, -3.0], vec![15.0, 3.0, 3.0]))
        .with_receiver(Receiver::observer(&[1.2, 0.5]));
    scene.options.step = Some(0.05);
    let start = Vector::from_row_slice(&[0.0, -1.0, -0.3]);

    let t = aim_at_receiver(&scene, &start, &Vector::from_row_slice(&[0.0, 2.2, 0.8]), 2)?;
    let report = fermat_criticality_check(&scene, &t)?;
    let oracle = fermat_oracle(&LocalModel::from_scene(&scene, &start, false)?)?;

    println!("traced arrival   {:.10}", t.arrival.unwrap_or(f64::NAN));
    println!("oracle arrival   {:.10} ({} evaluations)", oracle.time, oracle.evaluations);
    println!("traced crossing  {:.8?}", t.events[0].crossing.point.as_slice());
    println!("oracle crossing  {:.8?}", oracle.crossing.as_slice());
    println!(
        "gradient {:.2e} (tolerance {:.2e}), hessian {:?}, verdict {:?}",
        report.gradient_norm, report.tolerance, report.hessian, report.verdict
    );
    Ok(())
}
