//! Light rays in media described by cone structures, crossing an interface.
//!
//! A medium is a Lorentz-Finsler metric `L` whose zero set is the light cone
//! at each point ([`finsler`]). Rays are lightlike geodesics ([`geodesic`])
//! that stop at a level-set interface ([`interface`]), where the refraction
//! and reflection laws pick the outgoing directions and label the outcome
//! ([`snell`]). [`tracer`] glues those pieces into trajectories, checks
//! arrival-time criticality and runs the piecewise-constant approximation.
//!
//! ```
//! use conesnell::finsler::Metric;
//! use conesnell::interface::Interface;
//! use conesnell::linalg::Vector;
//! use conesnell::snell::{incident_data, solve_refraction, Media};
//!
//! let media = Media::new(
//!     Metric::isotropic(3, 1.0).unwrap(),
//!     Metric::isotropic(3, 1.5).unwrap(),
//!     Interface::coordinate_plane(3, 1, 0.0),
//! );
//! let th = 30f64.to_radians();
//! let u = Vector::from_row_slice(&[1.0, th.cos(), th.sin()]);
//! let inc = incident_data(&media, &Vector::zeros(3), &u).unwrap();
//! let out = solve_refraction(&media, &inc).unwrap();
//! let v = &out.straight().unwrap().v;
//! let angle = v[2].atan2(v[1]);
//! assert!((1.5 * angle.sin() - th.sin()).abs() < 1e-12);
//! ```

pub mod chart;
pub mod cli;
pub mod error;
pub mod expr;
pub mod finsler;
pub mod geodesic;
pub mod interface;
pub mod linalg;
pub mod numeric;
pub mod snell;
pub mod tracer;

pub use chart::ChartBox;
pub use error::{Error, Result};
