use std::io::Write;

use serde::{Deserialize, Serialize};

use super::BoundFamily;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub t: f64,
    /// Absent when no left-tail bound is licensed.
    pub left: Option<f64>,
    pub right: f64,
}

/// Left and right bounds tabulated on a grid of `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub family: BoundFamily,
    pub points: Vec<BoundPoint>,
}

impl BoundCurve {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    /// Every value scaled by `factor` (used for negative controls).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            family: self.family,
            points: self
                .points
                .iter()
                .map(|p| BoundPoint {
                    t: p.t,
                    left: p.left.map(|v| v * factor),
                    right: p.right * factor,
                })
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,bound_left,bound_right,family")?;
        for p in &self.points {
            let left = p.left.map(|v| format!("{v:.12e}")).unwrap_or_default();
            writeln!(w, "{},{},{:.12e},{}", p.t, left, p.right, self.family)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}
