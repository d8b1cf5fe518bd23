//! Incremental Bowyer-Watson Delaunay triangulation in the plane.
//!
//! Instead of a finite super-triangle, the hull is closed with "ghost"
//! triangles `(a, b, INF)`, one per hull edge `a -> b` with the outside on
//! its left. A point conflicts with a ghost when it sees that hull edge, so
//! hull edges come out exactly right no matter how flat the hull is.
//!
//! Insertion is in index order. Point sets with four or more cocircular
//! points have no unique triangulation; an in-circle determinant within
//! `1e-9` (relative) of zero counts as "not inside", so the configuration
//! built from lower-indexed points is kept. Such ties are counted in
//! [`Triangulation::cocircular_ties`].

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

const INF: usize = usize::MAX;

/// Relative tolerance on the in-circle determinant.
pub const INCIRCLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub cocircular_ties: usize,
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// In-circle determinant for CCW `(a, b, c)`: positive when `p` is inside
/// the circumcircle. Also returns the magnitude scale used for the tie test.
fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> (f64, f64) {
    let (adx, ady) = (a[0] - p[0], a[1] - p[1]);
    let (bdx, bdy) = (b[0] - p[0], b[1] - p[1]);
    let (cdx, cdy) = (c[0] - p[0], c[1] - p[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    let det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
    let scale = ad.max(bd).max(cd);
    (det, scale * scale)
}

fn on_open_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    let t = (p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1];
    t > 0.0 && t < d[0] * d[0] + d[1] * d[1]
}

struct Builder<'a> {
    pts: &'a [[f64; 2]],
    tris: Vec<[usize; 3]>,
    ties: usize,
}

impl Builder<'_> {
    fn contains(&self, t: [usize; 3], p: [f64; 2]) -> bool {
        if t[2] == INF {
            let (a, b) = (self.pts[t[0]], self.pts[t[1]]);
            let o = orient(a, b, p);
            o > 0.0 || (o == 0.0 && on_open_segment(a, b, p))
        } else {
            let [a, b, c] = t.map(|i| self.pts[i]);
            orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
        }
    }

    fn conflicts(&mut self, t: [usize; 3], p: [f64; 2]) -> bool {
        if t[2] == INF {
            return self.contains(t, p);
        }
        let [a, b, c] = t.map(|i| self.pts[i]);
        let (det, scale) = incircle(a, b, c, p);
        if det.abs() <= INCIRCLE_TOL * scale {
            self.ties += 1;
            return false;
        }
        det > 0.0
    }

    fn insert(&mut self, idx: usize) {
        let p = self.pts[idx];
        let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::with_capacity(self.tris.len() * 3);
        for (ti, t) in self.tris.iter().enumerate() {
            for e in 0..3 {
                edge_owner.insert((t[e], t[(e + 1) % 3]), ti);
            }
        }
        let seed = (0..self.tris.len())
            .find(|&ti| self.tris[ti][2] != INF && self.contains(self.tris[ti], p))
            .or_else(|| (0..self.tris.len()).find(|&ti| self.contains(self.tris[ti], p)))
            .expect("every point lies in a triangle or sees a hull edge");

        // flood fill the cavity through shared edges
        let mut in_cavity = vec![false; self.tris.len()];
        in_cavity[seed] = true;
        let mut stack = vec![seed];
        while let Some(ti) = stack.pop() {
            let t = self.tris[ti];
            for e in 0..3 {
                let (u, v) = (t[e], t[(e + 1) % 3]);
                if let Some(&nb) = edge_owner.get(&(v, u)) {
                    if !in_cavity[nb] && self.conflicts(self.tris[nb], p) {
                        in_cavity[nb] = true;
                        stack.push(nb);
                    }
                }
            }
        }

        let mut boundary = Vec::new();
        for (ti, t) in self.tris.iter().enumerate() {
            if !in_cavity[ti] {
                continue;
            }
            for e in 0..3 {
                let (u, v) = (t[e], t[(e + 1) % 3]);
                let shared = edge_owner.get(&(v, u)).is_some_and(|&nb| in_cavity[nb]);
                if !shared {
                    boundary.push((u, v));
                }
            }
        }
        let mut kept: Vec<[usize; 3]> = self
            .tris
            .iter()
            .zip(&in_cavity)
            .filter(|(_, &c)| !c)
            .map(|(t, _)| *t)
            .collect();
        for (u, v) in boundary {
            // rotate so a ghost vertex, if any, comes last
            kept.push(match (u == INF, v == INF) {
                (false, false) => [u, v, idx],
                (false, true) => [idx, u, INF],
                (true, false) => [v, idx, INF],
                (true, true) => unreachable!("edge between two ghost vertices"),
            });
        }
        self.tris = kept;
    }
}

/// Delaunay triangulation of at least three distinct, not all collinear points.
pub fn triangulate(points: &[[f64; 2]]) -> Result<Triangulation> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Geometry(format!("need at least 3 points, got {n}")));
    }
    if let Some(i) = points.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::Geometry(format!("point {i} has non-finite coordinates")));
    }
    let mut seen = HashMap::with_capacity(n);
    for (i, p) in points.iter().enumerate() {
        // +0.0 so that -0.0 and 0.0 compare equal
        let key = ((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits());
        if let Some(j) = seen.insert(key, i) {
            return Err(Error::Geometry(format!("points {j} and {i} coincide")));
        }
    }
    let third = (2..n)
        .find(|&k| orient(points[0], points[1], points[k]) != 0.0)
        .ok_or_else(|| Error::Geometry("all points are collinear".into()))?;

    let first = if orient(points[0], points[1], points[third]) > 0.0 {
        [0, 1, third]
    } else {
        [1, 0, third]
    };
    let [a, b, c] = first;
    let mut builder = Builder {
        pts: points,
        tris: vec![first, [b, a, INF], [c, b, INF], [a, c, INF]],
        ties: 0,
    };
    for idx in (2..n).filter(|&k| k != third) {
        builder.insert(idx);
    }

    let triangles: Vec<[usize; 3]> = builder.tris.into_iter().filter(|t| t[2] != INF).collect();
    let mut edges: Vec<(usize, usize)> = triangles
        .iter()
        .flat_map(|t| (0..3).map(move |e| (t[e].min(t[(e + 1) % 3]), t[e].max(t[(e + 1) % 3]))))
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    edges.sort_unstable();
    Ok(Triangulation {
        triangles,
        edges,
        cocircular_ties: builder.ties,
    })
}

/// Edge list of the Delaunay triangulation.
pub fn delaunay_edges(points: &[[f64; 2]]) -> Result<Vec<(usize, usize)>> {
    Ok(triangulate(points)?.edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle() {
        let t = triangulate(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(t.triangles.len(), 1);
        assert_eq!(t.edges, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn square_has_one_diagonal() {
        let t = triangulate(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(t.edges.len(), 5);
        for hull in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            assert!(t.edges.contains(&hull));
        }
        assert!(t.cocircular_ties > 0);
    }

    #[test]
    fn collinear_prefix_then_apex() {
        let t = triangulate(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [1.5, 1.0]]).unwrap();
        assert_eq!(t.triangles.len(), 3);
        assert!(t.edges.contains(&(0, 1)) && t.edges.contains(&(1, 2)) && t.edges.contains(&(2, 3)));
        assert!(!t.edges.contains(&(0, 3)));
    }

    #[test]
    fn interior_point_connects_to_all_corners() {
        let t = triangulate(&[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [1.0, 1.0]]).unwrap();
        assert_eq!(t.triangles.len(), 3);
        assert_eq!(t.edges.len(), 6);
    }

    #[test]
    fn errors() {
        assert!(triangulate(&[[0.0, 0.0], [1.0, 1.0]]).is_err());
        assert!(triangulate(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
        assert!(triangulate(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(triangulate(&[[0.0, 0.0], [1.0, 0.0], [f64::NAN, 1.0]]).is_err());
    }
}
