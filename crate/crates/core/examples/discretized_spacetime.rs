//! Replaces a medium with a smoothly varying index by constant cells and
//! watches the exit point approach the smooth geodesic as the grid refines.

use conesnell::chart::ChartBox;
use conesnell::expr::ScalarExpr;
use conesnell::finsler::Metric;
use conesnell::linalg::Vector;
use conesnell::tracer::{convergence_study, GridScene};

fn main() -> conesnell::Result<()> {
    let m = Metric::isotropic(3, ScalarExpr::linear(1.0, vec![0.0, 0.3, 0.2]))?;
    let bounds = ChartBox::new(vec![0.0, -1.0, -1.0], vec![1.5, 1.0, 1.0]);
    let grid = GridScene::uniform(m, bounds, 8, 3);
    let start = Vector::from_row_slice(&[0.05, -0.8, -0.3]);
    let dir = Vector::from_row_slice(&[1.0, 0.6, 0.5]);
    let table = convergence_study(&grid, &start, &dir, &[4, 8, 16, 32, 64])?;
    println!("smooth exit {:.6?}", table.reference_endpoint.as_slice());
    println!("{:>6} {:>8} {:>12}", "cells", "events", "error");
    for r in &table.rows {
        println!("{:>6} {:>8} {:>12.3e}", r.resolution, r.events, r.error);
    }
    println!("orders {:.2?}, monotone {}", table.orders, table.monotone);
    Ok(())
}
