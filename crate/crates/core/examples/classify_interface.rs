//! Causal character of a few planar interfaces in Minkowski space and in a
//! medium with wind. The character decides which row of the refraction
//! table applies.

use conesnell::finsler::Metric;
use conesnell::interface::Interface;
use conesnell::linalg::Vector;

fn main() -> conesnell::Result<()> {
    let faces = [
        ("wall x = 0", vec![0.0, 1.0, 0.0]),
        ("moving wall x = t/2", vec![-0.5, 1.0, 0.0]),
        ("light front x = t", vec![-1.0, 1.0, 0.0]),
        ("slice t = x/2", vec![1.0, -0.5, 0.0]),
    ];
    let media = [
        ("minkowski", Metric::minkowski(3)),
        ("wind (0.4, 0)", Metric::randers_constant_wind(&[0.4, 0.0])?),
    ];
    let o = Vector::zeros(3);
    for (mname, m) in &media {
        println!("{mname}");
        for (fname, normal) in &faces {
            let c = Interface::plane(normal, 0.0)?.classify(m, &o)?;
            println!("  {fname:<22} {:?} (max L on the unit half-sphere {:+.4})", c.char, c.max_l);
        }
    }
    Ok(())
}
