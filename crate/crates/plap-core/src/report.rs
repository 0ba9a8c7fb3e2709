//! One verified inequality.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs
    pub margin: f64,
    pub tolerance: f64,
    /// Coordinates of the worst point (s for radial data, (x, y) on grids).
    pub worst_point: Vec<f64>,
    pub params: Vec<(String, f64)>,
    pub pass: bool,
}

impl EstimateReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64, worst_point: Vec<f64>) -> EstimateReport {
        let margin = rhs - lhs;
        EstimateReport {
            name: name.into(),
            lhs,
            rhs,
            margin,
            tolerance,
            worst_point,
            params: Vec::new(),
            pass: margin >= -tolerance,
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> EstimateReport {
        self.params.push((key.into(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}
