//! Exact affine classification of integer point sets.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SupportClass {
    Empty,
    Point,
    Line,
    /// Coplanar but not collinear (3D only).
    Plane,
    /// Not collinear (2D only).
    Spread2D,
    /// Not coplanar (3D only).
    Full3D,
}

impl SupportClass {
    /// Empty sets, points and lines all count as "part of a line object".
    pub fn is_line_compatible(self) -> bool {
        matches!(self, SupportClass::Empty | SupportClass::Point | SupportClass::Line)
    }
}

/// Classifies a set of 2D or 3D integer points by the dimension of its
/// affine hull.
pub fn classify_support<const D: usize>(points: &[[i64; D]]) -> SupportClass {
    assert!(D == 2 || D == 3, "support classification is for 2D or 3D points");
    let Some(origin) = points.first() else {
        return SupportClass::Empty;
    };
    let diffs: Vec<Vec<i128>> = points[1..]
        .iter()
        .map(|q| (0..D).map(|c| (q[c] - origin[c]) as i128).collect())
        .collect();
    match (affine_rank(diffs, D), D) {
        (0, _) => SupportClass::Point,
        (1, _) => SupportClass::Line,
        (2, 2) => SupportClass::Spread2D,
        (2, _) => SupportClass::Plane,
        _ => SupportClass::Full3D,
    }
}

// Fraction-free Gaussian elimination; coordinates are small so i128 never
// overflows for the grids used here.
fn affine_rank(mut rows: Vec<Vec<i128>>, cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != 0 {
                let (a, b) = (rows[rank][c], rows[r][c]);
                let pivot_row = rows[rank].clone();
                for (v, &q) in rows[r].iter_mut().zip(&pivot_row) {
                    *v = *v * a - q * b;
                }
                let g = rows[r].iter().fold(0i128, |g, &v| gcd(g, v.abs()));
                if g > 1 {
                    rows[r].iter_mut().for_each(|v| *v /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
