//! Traces a fan of rays from a point inside a cylinder of fast medium out
//! into a slower surrounding medium, and prints the samples of the first ray
//! as CSV.

use conesnell::chart::ChartBox;
use conesnell::finsler::Metric;
use conesnell::interface::{Interface, Shape};
use conesnell::linalg::Vector;
use conesnell::snell::Media;
use conesnell::tracer::{trace_bundle, Scene};

fn main() -> conesnell::Result<()> {
    // Q1 is the inside of the cylinder.
    let lens = Interface::new(
        3,
        Shape::Cylinder {
            axes: vec![1, 2],
            center: vec![0.0, 0.0],
            radius: 1.0,
        },
    )?;
    let inside = Metric::isotropic(3, 1.0)?;
    let outside = Metric::isotropic(3, 1.6)?;
    let mut scene = Scene::new(Media::new(inside.clone(), outside, lens), ChartBox::new(vec![0.0, -4.0, -4.0], vec![12.0, 4.0, 4.0]));
    scene.options.step = Some(0.01);
    let start = Vector::from_row_slice(&[0.0, -0.5, 0.0]);
    let rays: Vec<_> = (0..9)
        .map(|i| {
            let a = -0.8 + 0.2 * i as f64;
            let d = inside.lift(&start, &Vector::from_row_slice(&[0.0, a.cos(), a.sin()])).unwrap();
            (start.clone(), d)
        })
        .collect();
    let results = trace_bundle(&scene, &rays, 4);
    for ((_, d), r) in rays.iter().zip(&results) {
        match r {
            Ok(t) => println!(
                "dir ({:+.3}, {:+.3}) -> {} events, {:?} at {:.3?}",
                d[1],
                d[2],
                t.events.len(),
                t.termination,
                t.end().x.as_slice()
            ),
            Err(e) => println!("dir ({:+.3}, {:+.3}) -> {e}", d[1], d[2]),
        }
    }
    if let Ok(t) = &results[0] {
        let mut csv = Vec::new();
        t.write_csv(&mut csv)?;
        let text = String::from_utf8_lossy(&csv);
        for line in text.lines().take(4) {
            println!("{line}");
        }
        println!("... {} rows", text.lines().count() - 1);
    }
    Ok(())
}
