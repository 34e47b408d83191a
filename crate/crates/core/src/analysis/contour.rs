use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Composition;
use crate::model::{fold_log_density, FoldedNormalParams};

/// Nodes with a part below this value carry no density.
pub const BOUNDARY_MARGIN: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct ContourNode {
    /// Barycentric lattice indices, `i + j + k = resolution`.
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub x: [f64; 3],
    /// `None` on the boundary.
    pub log_density: Option<f64>,
}

/// Log-density of `fold(Y)` on the barycentric lattice `(i, j, k)/r` of S².
#[derive(Debug, Clone, Serialize)]
pub struct ContourGrid {
    pub resolution: usize,
    pub params: FoldedNormalParams,
    pub nodes: Vec<ContourNode>,
}

/// Points checked on the segment between two lattice maxima.
const SEGMENT_POINTS: usize = 64;
/// Dip in log-density along a segment that separates two modes.
const VALLEY_DEPTH: f64 = 1e-9;

pub fn contour_grid(theta: &FoldedNormalParams, resolution: usize) -> Result<ContourGrid> {
    if theta.parts() != 3 {
        return Err(Error::InvalidDimension(format!(
            "contour grids need D = 3, got D = {}",
            theta.parts()
        )));
    }
    if resolution < 10 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 10, got {resolution}"
        )));
    }
    let r = resolution;
    let mut nodes = Vec::with_capacity((r + 1) * (r + 2) / 2);
    for i in 0..=r {
        for j in 0..=(r - i) {
            let k = r - i - j;
            let x = [i as f64 / r as f64, j as f64 / r as f64, k as f64 / r as f64];
            let log_density = if x.iter().any(|&v| v < BOUNDARY_MARGIN) {
                None
            } else {
                let c = Composition::closure(x.to_vec())?;
                Some(fold_log_density(&c, theta)?)
            };
            nodes.push(ContourNode { i, j, k, x, log_density });
        }
    }
    Ok(ContourGrid {
        resolution,
        params: theta.clone(),
        nodes,
    })
}

impl ContourGrid {
    fn at(&self, i: usize, j: usize) -> &ContourNode {
        // rows before i hold Σ_{m<i} (r − m + 1) nodes
        let start = i * (2 * self.resolution + 3 - i) / 2;
        &self.nodes[start + j]
    }

    fn density(&self, i: isize, j: isize) -> Option<f64> {
        let r = self.resolution as isize;
        if i < 0 || j < 0 || i + j > r {
            return None;
        }
        self.at(i as usize, j as usize).log_density
    }

    /// Nodes whose density exceeds that of every defined lattice neighbour.
    pub fn local_maxima(&self) -> Vec<&ContourNode> {
        const NEIGHBOURS: [(isize, isize); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];
        self.nodes
            .iter()
            .filter(|node| {
                let Some(v) = node.log_density else {
                    return false;
                };
                let (i, j) = (node.i as isize, node.j as isize);
                NEIGHBOURS
                    .iter()
                    .all(|(di, dj)| self.density(i + di, j + dj).is_none_or(|w| v > w))
            })
            .collect()
    }

    /// Modes of the density: lattice maxima grouped so that two maxima
    /// joined by a segment without a valley in the continuous density count
    /// once. Returns the highest node of every group.
    ///
    /// A ridge that runs obliquely to the lattice produces several lattice
    /// maxima on the same hill; this merges them.
    pub fn modes(&self) -> Result<Vec<&ContourNode>> {
        let maxima = self.local_maxima();
        let m = maxima.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for a in 0..m {
            for b in a + 1..m {
                if self.no_valley(maxima[a], maxima[b])? {
                    let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let mut best: Vec<Option<usize>> = vec![None; m];
        for i in 0..m {
            let r = root(&mut parent, i);
            let better = best[r].is_none_or(|j| maxima[i].log_density > maxima[j].log_density);
            if better {
                best[r] = Some(i);
            }
        }
        Ok(best.into_iter().flatten().map(|i| maxima[i]).collect())
    }

    fn no_valley(&self, a: &ContourNode, b: &ContourNode) -> Result<bool> {
        let floor = a.log_density.unwrap_or(f64::NEG_INFINITY).min(b.log_density.unwrap_or(f64::NEG_INFINITY));
        for s in 1..SEGMENT_POINTS {
            let t = s as f64 / SEGMENT_POINTS as f64;
            let x: Vec<f64> = (0..3).map(|k| (1.0 - t) * a.x[k] + t * b.x[k]).collect();
            let v = fold_log_density(&Composition::closure(x)?, &self.params)?;
            if v < floor - VALLEY_DEPTH {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Σ over lattice triangles of area `1/(2r²)` times the mean density of
    /// the triangle's defined vertices.
    pub fn total_mass(&self) -> f64 {
        let r = self.resolution as isize;
        let area = 1.0 / (2.0 * (r * r) as f64);
        let cell = |vs: [Option<f64>; 3]| {
            let defined: Vec<f64> = vs.iter().flatten().map(|v| v.exp()).collect();
            if defined.is_empty() {
                0.0
            } else {
                defined.iter().sum::<f64>() / defined.len() as f64
            }
        };
        let mut total = 0.0;
        for i in 0..r {
            for j in 0..(r - i) {
                total += cell([self.density(i, j), self.density(i + 1, j), self.density(i, j + 1)]);
                if i + j + 2 <= r {
                    total += cell([
                        self.density(i + 1, j),
                        self.density(i, j + 1),
                        self.density(i + 1, j + 1),
                    ]);
                }
            }
        }
        total * area
    }
}
