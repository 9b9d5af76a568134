use crate::error::{input, Error, Result};

/// Default jump threshold: a facet is a jump when its difference exceeds
/// `10·h`.
pub const DEFAULT_JUMP_THRESHOLD: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacetTag {
    Diffuse,
    Jump,
}

impl FacetTag {
    pub fn as_char(self) -> char {
        match self {
            FacetTag::Diffuse => 'D',
            FacetTag::Jump => 'J',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'D' => Some(FacetTag::Diffuse),
            'J' => Some(FacetTag::Jump),
            _ => None,
        }
    }
}

/// An interior facet between cells `a` and `b = a + e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Facet {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
}

/// Cell-valued `m`-component field on a uniform 1D or 2D grid whose
/// interior facets are tagged as diffuse or jump.
///
/// Cells are numbered `i + j·nx`. Facets along axis 0 come first
/// (row by row), then those along axis 1. Facet normals point along the
/// positive axes.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSBV {
    pub dim: usize,
    /// Cells per axis; `shape[1] == 1` in 1D.
    pub shape: [usize; 2],
    pub h: f64,
    pub m: usize,
    /// Row-major `n_cells × m`.
    pub values: Vec<f64>,
    pub tags: Vec<FacetTag>,
}

impl DiscreteSBV {
    /// Builds a field with explicit facet tags.
    pub fn with_tags(dim: usize, shape: [usize; 2], h: f64, m: usize, values: Vec<f64>, tags: Vec<FacetTag>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return input(format!("dimension must be 1 or 2, got {dim}"));
        }
        if dim == 1 && shape[1] != 1 {
            return input("a 1D field has shape [n, 1]");
        }
        if shape[0] == 0 || shape[1] == 0 || m == 0 {
            return input("empty field");
        }
        if !(h > 0.0) || !h.is_finite() {
            return input(format!("grid spacing must be positive, got {h}"));
        }
        let n = shape[0] * shape[1];
        if values.len() != n * m {
            return Err(Error::Shape(format!("expected {} values, got {}", n * m, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return input("field values must be finite");
        }
        let nf = facet_count(shape);
        if tags.len() != nf {
            return Err(Error::Shape(format!("expected {nf} facet tags, got {}", tags.len())));
        }
        Ok(DiscreteSBV {
            dim,
            shape,
            h,
            m,
            values,
            tags,
        })
    }

    /// Tags a facet as a jump when `|difference| > threshold·h`.
    pub fn classify(dim: usize, shape: [usize; 2], h: f64, m: usize, values: Vec<f64>, threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0) {
            return input("jump threshold must be nonnegative");
        }
        let mut f = Self::with_tags(dim, shape, h, m, values, vec![FacetTag::Diffuse; facet_count(shape)])?;
        for k in 0..f.tags.len() {
            if f.facet_jump_norm(k) > threshold * h {
                f.tags[k] = FacetTag::Jump;
            }
        }
        Ok(f)
    }

    /// Piecewise constant field: every facet with a nonzero difference is a
    /// jump.
    pub fn piecewise_constant(dim: usize, shape: [usize; 2], h: f64, m: usize, values: Vec<f64>) -> Result<Self> {
        let mut f = Self::with_tags(dim, shape, h, m, values, vec![FacetTag::Diffuse; facet_count(shape)])?;
        for k in 0..f.tags.len() {
            if f.facet_jump_norm(k) > 0.0 {
                f.tags[k] = FacetTag::Jump;
            }
        }
        Ok(f)
    }

    pub fn n_cells(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn n_facets(&self) -> usize {
        self.tags.len()
    }

    /// `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// `h^{dim−1}`.
    pub fn facet_area(&self) -> f64 {
        self.h.powi(self.dim as i32 - 1)
    }

    pub fn value(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.m..(cell + 1) * self.m]
    }

    pub fn facet(&self, k: usize) -> Facet {
        let [nx, ny] = self.shape;
        let n0 = (nx - 1) * ny;
        if k < n0 {
            let (j, i) = (k / (nx - 1), k % (nx - 1));
            let a = i + j * nx;
            Facet { a, b: a + 1, axis: 0 }
        } else {
            let k = k - n0;
            Facet { a: k, b: k + nx, axis: 1 }
        }
    }

    /// Unit normal of facets along `axis`, as a `dim`-vector.
    pub fn normal(&self, axis: usize) -> Vec<f64> {
        let mut nu = vec![0.0; self.dim];
        nu[axis] = 1.0;
        nu
    }

    /// `u(b) − u(a)` on facet `k`.
    pub fn facet_difference(&self, k: usize, out: &mut [f64]) {
        let f = self.facet(k);
        let (ua, ub) = (self.value(f.a), self.value(f.b));
        for i in 0..self.m {
            out[i] = ub[i] - ua[i];
        }
    }

    pub fn facet_jump_norm(&self, k: usize) -> f64 {
        let f = self.facet(k);
        let (ua, ub) = (self.value(f.a), self.value(f.b));
        ua.iter().zip(ub).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt()
    }

    /// `|Du| = Σ_facets |difference| h^{dim−1}`.
    pub fn total_variation(&self) -> f64 {
        (0..self.n_facets()).map(|k| self.facet_jump_norm(k)).sum::<f64>() * self.facet_area()
    }

    /// `|Du^i|` for component `i`.
    pub fn component_variation(&self, i: usize) -> f64 {
        (0..self.n_facets())
            .map(|k| {
                let f = self.facet(k);
                (self.value(f.b)[i] - self.value(f.a)[i]).abs()
            })
            .sum::<f64>()
            * self.facet_area()
    }

    pub fn jump_count(&self) -> usize {
        self.tags.iter().filter(|t| **t == FacetTag::Jump).count()
    }

    /// `H^{n−1}(J_u)`, counting only jump facets with a nonzero difference.
    pub fn jump_measure(&self) -> f64 {
        (0..self.n_facets())
            .filter(|&k| self.tags[k] == FacetTag::Jump && self.facet_jump_norm(k) > 0.0)
            .count() as f64
            * self.facet_area()
    }

    /// Approximate gradient on a cell (`m×dim`, row-major): forward
    /// difference through each diffuse facet, zero across jumps and at the
    /// last cell along an axis.
    pub fn cell_gradient(&self, cell: usize, out: &mut [f64]) {
        let d = self.dim;
        out[..self.m * d].iter_mut().for_each(|v| *v = 0.0);
        let [nx, ny] = self.shape;
        let (i, j) = (cell % nx, cell / nx);
        let n0 = (nx - 1) * ny;
        if i + 1 < nx {
            let k = j * (nx - 1) + i;
            if self.tags[k] == FacetTag::Diffuse {
                for a in 0..self.m {
                    out[a * d] = (self.value(cell + 1)[a] - self.value(cell)[a]) / self.h;
                }
            }
        }
        if d == 2 && j + 1 < ny {
            let k = n0 + cell;
            if self.tags[k] == FacetTag::Diffuse {
                for a in 0..self.m {
                    out[a * d + 1] = (self.value(cell + nx)[a] - self.value(cell)[a]) / self.h;
                }
            }
        }
    }

    /// `‖∇u‖_{L¹}` from [`cell_gradient`](Self::cell_gradient).
    pub fn gradient_l1(&self) -> f64 {
        let mut g = vec![0.0; self.m * self.dim];
        let mut s = 0.0;
        for c in 0..self.n_cells() {
            self.cell_gradient(c, &mut g);
            s += g.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        s * self.cell_volume()
    }

    /// `max_cells |u − w|` (Euclidean in the components).
    pub fn sup_distance(&self, other: &DiscreteSBV) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok((0..self.n_cells())
            .map(|c| {
                self.value(c)
                    .iter()
                    .zip(other.value(c))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_same_grid(&self, other: &DiscreteSBV) -> Result<()> {
        if self.dim != other.dim || self.shape != other.shape || self.m != other.m {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Same grid and tags with new values.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> DiscreteSBV {
        DiscreteSBV {
            values,
            ..self.clone()
        }
    }
}

pub(crate) fn facet_count(shape: [usize; 2]) -> usize {
    let [nx, ny] = shape;
    (nx - 1) * ny + nx * (ny - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn facet_layout_2d() {
        let f = DiscreteSBV::piecewise_constant(2, [3, 2], 0.5, 1, vec![0.0; 6]).unwrap();
        assert_eq!(f.n_facets(), 2 * 2 + 3);
        assert_eq!(f.facet(0), Facet { a: 0, b: 1, axis: 0 });
        assert_eq!(f.facet(3), Facet { a: 4, b: 5, axis: 0 });
        assert_eq!(f.facet(4), Facet { a: 0, b: 3, axis: 1 });
        assert_eq!(f.facet(6), Facet { a: 2, b: 5, axis: 1 });
    }

    #[test]
    fn classify_separates_steps_from_slopes() {
        let h = 0.01;
        let vals: Vec<f64> = (0..100).map(|i| i as f64 * h + if i >= 50 { 1.0 } else { 0.0 }).collect();
        let f = DiscreteSBV::classify(1, [100, 1], h, 1, vals, DEFAULT_JUMP_THRESHOLD).unwrap();
        assert_eq!(f.jump_count(), 1);
        assert!((f.total_variation() - (0.99 + 1.0)).abs() < 1e-12);
        let mut g = [0.0];
        f.cell_gradient(10, &mut g);
        assert!((g[0] - 1.0).abs() < 1e-9);
        f.cell_gradient(49, &mut g);
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(DiscreteSBV::piecewise_constant(1, [3, 2], 1.0, 1, vec![0.0; 6]).is_err());
        assert!(DiscreteSBV::piecewise_constant(2, [3, 2], 1.0, 1, vec![0.0; 5]).is_err());
        assert!(DiscreteSBV::piecewise_constant(2, [3, 2], 0.0, 1, vec![0.0; 6]).is_err());
    }
}
