//! Line-oriented text format: a header `n N a seed`, then one point per
//! line as space-separated `num/den` fields.

use std::fmt::Write as _;

use crate::exact::{Cube, ExactScalar, Point};

use super::{PointSet, PointTag};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParsePointSetError {
    #[error("missing header line")]
    MissingHeader,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("line {line}: {msg}")]
    BadPoint { line: usize, msg: String },
    #[error("header declares {declared} points, found {found}")]
    CountMismatch { declared: usize, found: usize },
}

impl PointSet {
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.dim(), self.len(), self.cube.side(), self.seed);
        for p in &self.points {
            let fields: Vec<String> = p.coords().iter().map(ExactScalar::to_string).collect();
            let _ = writeln!(out, "{}", fields.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PointSet, ParsePointSetError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (_, header) = lines.next().ok_or(ParsePointSetError::MissingHeader)?;
        let bad = || ParsePointSetError::BadHeader(header.to_string());
        let h: Vec<u64> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [n, count, a, seed] = h[..] else {
            return Err(bad());
        };
        let cube = Cube::new(a, n as usize).map_err(|_| bad())?;
        let mut points = Vec::with_capacity(count as usize);
        for (i, line) in lines {
            let coords: Vec<ExactScalar> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| ParsePointSetError::BadPoint { line: i + 1, msg: format!("{e}") })?;
            if coords.len() != n as usize {
                return Err(ParsePointSetError::BadPoint {
                    line: i + 1,
                    msg: format!("expected {n} coordinates, found {}", coords.len()),
                });
            }
            let p = Point::new(coords);
            if !cube.contains_open(&p) {
                return Err(ParsePointSetError::BadPoint {
                    line: i + 1,
                    msg: "point is not strictly inside the cube".into(),
                });
            }
            points.push(p);
        }
        if points.len() != count as usize {
            return Err(ParsePointSetError::CountMismatch {
                declared: count as usize,
                found: points.len(),
            });
        }
        let tags = vec![PointTag::External; points.len()];
        Ok(PointSet::from_parts(points, tags, cube, seed))
    }
}
