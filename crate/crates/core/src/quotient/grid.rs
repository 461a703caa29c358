use serde::Serialize;

use crate::error::{Error, Result};

/// Strictly increasing nodes over [a, b], optionally clustered towards
/// boundary-layer endpoints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    nodes: Vec<f64>,
    /// Width of each clustered layer (zero for an unclustered grid).
    layer_width: f64,
    /// Fraction of the cells placed inside the clustered layers.
    layer_fraction: f64,
}

impl Grid1D {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter("a grid needs at least two nodes".into()));
        }
        if nodes.iter().any(|t| !t.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("grid nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes, layer_width: 0.0, layer_fraction: 0.0 })
    }

    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Self> {
        check_interval(a, b, cells)?;
        let h = (b - a) / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| a + h * i as f64).collect();
        nodes[cells] = b;
        Self::from_nodes(nodes)
    }

    /// Uniform spacing inside a layer of width `layer_width` at each flagged
    /// endpoint, holding `layer_fraction` of all cells, continued by a
    /// geometrically growing spacing towards the interior.
    ///
    /// Falls back to a uniform grid when the layers would cover the interval
    /// or when uniform spacing is already at least as fine as the layer spacing.
    pub fn graded(
        a: f64,
        b: f64,
        cells: usize,
        layers: (bool, bool),
        layer_width: f64,
        layer_fraction: f64,
    ) -> Result<Self> {
        check_interval(a, b, cells)?;
        if !(layer_fraction > 0.0 && layer_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "layer fraction must lie in (0, 1), got {layer_fraction}"
            )));
        }
        let count = layers.0 as usize + layers.1 as usize;
        let length = b - a;
        if count == 0 || !layer_width.is_finite() || layer_width * count as f64 >= length {
            return Self::uniform(a, b, cells);
        }

        let per_layer = ((layer_fraction * cells as f64).round() as usize / count).max(1);
        let outer_cells = cells.saturating_sub(per_layer * count);
        if outer_cells < count {
            return Self::uniform(a, b, cells);
        }
        let h0 = layer_width / per_layer as f64;
        let outer_length = length - layer_width * count as f64;
        if h0 * outer_cells as f64 >= outer_length {
            return Self::uniform(a, b, cells);
        }

        let layer = vec![h0; per_layer];
        let widths: Vec<f64> = match layers {
            (true, true) => {
                let left_n = outer_cells / 2;
                let right_n = outer_cells - left_n;
                let half = outer_length / 2.0;
                let mut w = layer.clone();
                w.extend(geometric_cells(h0, left_n, half));
                let mut right = geometric_cells(h0, right_n, half);
                right.reverse();
                w.extend(right);
                w.extend(layer);
                w
            }
            (true, false) => {
                let mut w = layer;
                w.extend(geometric_cells(h0, outer_cells, outer_length));
                w
            }
            (false, true) => {
                let mut w = geometric_cells(h0, outer_cells, outer_length);
                w.reverse();
                w.extend(layer);
                w
            }
            (false, false) => unreachable!(),
        };

        let mut nodes = Vec::with_capacity(widths.len() + 1);
        let mut t = a;
        nodes.push(t);
        for w in &widths {
            t += w;
            nodes.push(t);
        }
        *nodes.last_mut().unwrap() = b;
        let mut grid = Self::from_nodes(nodes)?;
        grid.layer_width = layer_width;
        grid.layer_fraction = layer_fraction;
        Ok(grid)
    }

    /// The grid obtained by halving every cell.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        Self { nodes, layer_width: self.layer_width, layer_fraction: self.layer_fraction }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn layer_width(&self) -> f64 {
        self.layer_width
    }

    pub fn layer_fraction(&self) -> f64 {
        self.layer_fraction
    }

    pub fn count_within(&self, point: f64, distance: f64) -> usize {
        self.nodes.iter().filter(|t| (*t - point).abs() <= distance * (1.0 + 1e-12)).count()
    }
}

fn check_interval(a: f64, b: f64, cells: usize) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParameter(format!("invalid interval [{a}, {b}]")));
    }
    if cells < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 cells, got {cells}")));
    }
    Ok(())
}

/// `n` widths h₀q, h₀q², …, h₀qⁿ summing to `length`, with q ≥ 1.
fn geometric_cells(h0: f64, n: usize, length: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if h0 * n as f64 >= length {
        return vec![length / n as f64; n];
    }
    let total = |q: f64| -> f64 {
        let mut s = 0.0;
        let mut h = h0;
        for _ in 0..n {
            h *= q;
            s += h;
            if !s.is_finite() {
                return f64::INFINITY;
            }
        }
        s
    };
    let (mut lo, mut hi) = (1.0, 2.0);
    while total(hi) < length {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < length {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let q = 0.5 * (lo + hi);
    let mut widths = Vec::with_capacity(n);
    let mut h = h0;
    for _ in 0..n {
        h *= q;
        widths.push(h);
    }
    let scale = length / widths.iter().sum::<f64>();
    widths.iter_mut().for_each(|w| *w *= scale);
    widths
}
