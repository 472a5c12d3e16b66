//! Fixed-radius neighbor search over a uniform bucket grid.

use crate::error::{Error, Result};
use crate::geometry::{distance, Point, Window};
use crate::pattern::MarkedPattern;

const MAX_CELLS_PER_AXIS: usize = 1024;

/// Uniform bucket grid with cells at least `rmax` wide, so every pair within
/// `rmax` sits in the same or an adjacent cell.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    points: Vec<Point>,
    rmax: f64,
    nx: usize,
    ny: usize,
    xmin: f64,
    ymin: f64,
    cell_w: f64,
    cell_h: f64,
    // Points of cell c are items[starts[c]..starts[c + 1]], ascending.
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl NeighborIndex {
    pub fn build(pattern: &MarkedPattern, rmax: f64) -> Result<Self> {
        Self::from_points(pattern.points(), pattern.window(), rmax)
    }

    pub fn from_points(points: &[Point], window: &Window, rmax: f64) -> Result<Self> {
        if !(rmax > 0.0 && rmax.is_finite()) {
            return Err(Error::param(
                "rmax",
                format!("must be positive, got {rmax}"),
            ));
        }
        let cells = |side: f64| ((side / rmax).floor() as usize).clamp(1, MAX_CELLS_PER_AXIS);
        let nx = cells(window.width());
        let ny = cells(window.height());
        let cell_w = window.width() / nx as f64;
        let cell_h = window.height() / ny as f64;

        let mut index = Self {
            points: points.to_vec(),
            rmax,
            nx,
            ny,
            xmin: window.xmin(),
            ymin: window.ymin(),
            cell_w,
            cell_h,
            starts: vec![0; nx * ny + 1],
            items: vec![0; points.len()],
        };

        let cell_of: Vec<usize> = points.iter().map(|&p| index.cell(p)).collect();
        for &c in &cell_of {
            index.starts[c + 1] += 1;
        }
        for c in 0..nx * ny {
            index.starts[c + 1] += index.starts[c];
        }
        let mut fill = index.starts.clone();
        for (i, &c) in cell_of.iter().enumerate() {
            index.items[fill[c]] = i;
            fill[c] += 1;
        }
        Ok(index)
    }

    fn cell(&self, p: Point) -> usize {
        let cx = (((p.x - self.xmin) / self.cell_w) as usize).min(self.nx - 1);
        let cy = (((p.y - self.ymin) / self.cell_h) as usize).min(self.ny - 1);
        cy * self.nx + cx
    }

    fn bucket(&self, cx: usize, cy: usize) -> &[usize] {
        let c = cy * self.nx + cx;
        &self.items[self.starts[c]..self.starts[c + 1]]
    }

    pub fn rmax(&self) -> f64 {
        self.rmax
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Visit every unordered pair `i < j` with `d(x_i, x_j) <= r` once.
    ///
    /// `r` is clamped to the build radius. The visiting order depends only on
    /// the point coordinates, never on scheduling.
    pub fn for_each_pair<F: FnMut(usize, usize, f64)>(&self, r: f64, mut visit: F) {
        let r = r.min(self.rmax);
        // Forward half-neighbourhood: self, east, and the three cells above.
        const OFFSETS: [(isize, isize); 5] = [(0, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        for cy in 0..self.ny {
            for cx in 0..self.nx {
                let here = self.bucket(cx, cy);
                if here.is_empty() {
                    continue;
                }
                for &(dx, dy) in &OFFSETS {
                    let (ox, oy) = (cx as isize + dx, cy as isize + dy);
                    if ox < 0 || oy < 0 || ox >= self.nx as isize || oy >= self.ny as isize {
                        continue;
                    }
                    let same = dx == 0 && dy == 0;
                    let there = self.bucket(ox as usize, oy as usize);
                    for (a, &i) in here.iter().enumerate() {
                        let others = if same { &there[a + 1..] } else { there };
                        for &j in others {
                            let d = distance(self.points[i], self.points[j]);
                            if d <= r {
                                if i < j {
                                    visit(i, j, d);
                                } else {
                                    visit(j, i, d);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// All ordered pairs `(i, j)`, `i != j`, with `d(x_i, x_j) <= r`, sorted.
    pub fn pairs_within(&self, r: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        self.for_each_pair(r, |i, j, _| {
            out.push((i, j));
            out.push((j, i));
        });
        out.sort_unstable();
        out
    }

    /// Indices of points within `r` of `p` (including a point at `p` itself).
    pub fn within(&self, p: Point, r: f64) -> Vec<usize> {
        let r = r.min(self.rmax);
        let cx = (((p.x - self.xmin) / self.cell_w).max(0.0) as usize).min(self.nx - 1);
        let cy = (((p.y - self.ymin) / self.cell_h).max(0.0) as usize).min(self.ny - 1);
        let mut out = Vec::new();
        for oy in cy.saturating_sub(1)..=(cy + 1).min(self.ny - 1) {
            for ox in cx.saturating_sub(1)..=(cx + 1).min(self.nx - 1) {
                out.extend(
                    self.bucket(ox, oy)
                        .iter()
                        .copied()
                        .filter(|&j| distance(p, self.points[j]) <= r),
                );
            }
        }
        out.sort_unstable();
        out
    }
}

/// Build a neighbor index over a pattern.
pub fn build_index(pattern: &MarkedPattern, rmax: f64) -> Result<NeighborIndex> {
    NeighborIndex::build(pattern, rmax)
}
