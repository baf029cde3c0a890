use serde::{Deserialize, Serialize};

use crate::linalg::Vector;

/// Axis-aligned coordinate box of the chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ChartBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Self {
        ChartBox { min, max }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn diameter(&self) -> f64 {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Membership with a relative slack so that refined events on the boundary
    /// still count as inside.
    pub fn contains(&self, x: &Vector) -> bool {
        let slack = 1e-9 * self.diameter();
        x.iter()
            .enumerate()
            .all(|(i, &c)| c.is_finite() && c >= self.min[i] - slack && c <= self.max[i] + slack)
    }

    pub fn center(&self) -> Vector {
        Vector::from_iterator(
            self.dim(),
            self.min.iter().zip(&self.max).map(|(a, b)| 0.5 * (a + b)),
        )
    }
}
