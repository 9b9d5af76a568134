use crate::error::{input, Error, Result};
use crate::io::FieldDump;
use crate::mesh::Mesh;
use crate::optim::Bounds;

/// Nodal unknowns `(u, v)` of the phase-field functional on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFieldState {
    pub mesh: Mesh,
    pub m: usize,
    /// Row-major `n_nodes × m`.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eps: f64,
}

impl PhaseFieldState {
    /// `u ≡ 0`, `v ≡ 1`.
    pub fn new(mesh: Mesh, m: usize, eps: f64) -> Result<Self> {
        if m == 0 {
            return input("u needs at least one component");
        }
        let n = mesh.n_nodes();
        let s = PhaseFieldState {
            mesh,
            m,
            u: vec![0.0; n * m],
            v: vec![1.0; n],
            eps,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.mesh.shape()
    }

    pub fn h(&self) -> f64 {
        self.mesh.h
    }

    pub fn u_at(&self, node: usize) -> &[f64] {
        &self.u[node * self.m..(node + 1) * self.m]
    }

    pub fn min_v(&self) -> f64 {
        self.v.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return input(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.mesh.h > 0.0) || !self.mesh.h.is_finite() {
            return input(format!("grid spacing must be positive, got {}", self.mesh.h));
        }
        let n = self.n_nodes();
        if self.u.len() != n * self.m || self.v.len() != n {
            return Err(Error::Shape(format!(
                "state has {} u and {} v values for {n} nodes with m = {}",
                self.u.len(),
                self.v.len(),
                self.m
            )));
        }
        if self.u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invariant("u is not finite".into()));
        }
        if let Some(x) = self.v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Invariant(format!("v = {x} outside [0, 1]")));
        }
        Ok(())
    }

    /// Interleaved unknowns `[u_0, …, u_{m−1}, v]` per node.
    pub fn to_dofs(&self) -> Vec<f64> {
        let s = self.m + 1;
        let mut x = vec![0.0; self.n_nodes() * s];
        for k in 0..self.n_nodes() {
            x[k * s..k * s + self.m].copy_from_slice(self.u_at(k));
            x[k * s + self.m] = self.v[k];
        }
        x
    }

    pub fn set_dofs(&mut self, x: &[f64]) {
        let s = self.m + 1;
        for k in 0..self.n_nodes() {
            for a in 0..self.m {
                self.u[k * self.m + a] = x[k * s + a];
            }
            self.v[k] = x[k * s + self.m].clamp(0.0, 1.0);
        }
    }

    /// Coordinates of a node, with the origin at the first node.
    pub fn position(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.mesh.node_ij(node);
        [i as f64 * self.mesh.h, j as f64 * self.mesh.h]
    }

    /// Linear interpolation of another 1D state onto this grid.
    pub fn interpolate_from(&mut self, other: &PhaseFieldState) -> Result<()> {
        if self.mesh.dim != 1 || other.mesh.dim != 1 || self.m != other.m {
            return input("interpolation is only supported between 1D states with equal m");
        }
        let l_other = other.mesh.volume();
        let n_other = other.n_nodes();
        for k in 0..self.n_nodes() {
            let x = (self.position(k)[0]).min(l_other);
            let t = x / other.mesh.h;
            let i = (t.floor() as usize).min(n_other - 2);
            let w = t - i as f64;
            for a in 0..self.m {
                self.u[k * self.m + a] = (1.0 - w) * other.u[i * self.m + a] + w * other.u[(i + 1) * self.m + a];
            }
            self.v[k] = ((1.0 - w) * other.v[i] + w * other.v[i + 1]).clamp(0.0, 1.0);
        }
        Ok(())
    }

    pub fn to_dump(&self) -> FieldDump {
        FieldDump {
            shape: self.shape(),
            h: self.mesh.h,
            meta: vec![("m".into(), self.m.to_string()), ("eps".into(), format!("{:e}", self.eps))],
            fields: vec![("u".into(), self.u.clone()), ("v".into(), self.v.clone())],
        }
    }

    pub fn from_dump(d: &FieldDump) -> Result<Self> {
        let bad = |msg: &str| Error::Input(format!("state dump: {msg}"));
        let m: usize = d.meta("m").ok_or_else(|| bad("missing m"))?.parse().map_err(|_| bad("bad m"))?;
        let eps: f64 = d.meta("eps").ok_or_else(|| bad("missing eps"))?.parse().map_err(|_| bad("bad eps"))?;
        let mesh = match d.shape.as_slice() {
            [n] if *n >= 2 => Mesh::line(n - 1, d.h),
            [nx, ny] if *nx >= 2 && *ny >= 2 => Mesh::grid(nx - 1, ny - 1, d.h),
            _ => return Err(bad("bad shape")),
        };
        let s = PhaseFieldState {
            mesh,
            m,
            u: d.field("u").ok_or_else(|| bad("missing u"))?.to_vec(),
            v: d.field("v").ok_or_else(|| bad("missing v"))?.to_vec(),
            eps,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    None,
    DirichletU,
    MollifiedJump,
}

/// Prescribed nodal values. Constrained nodes must lie on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCondition {
    pub kind: BoundaryKind,
    pub u: Vec<(usize, Vec<f64>)>,
    pub v: Vec<(usize, f64)>,
}

impl BoundaryCondition {
    pub fn none() -> Self {
        BoundaryCondition {
            kind: BoundaryKind::None,
            u: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn dirichlet_u(u: Vec<(usize, Vec<f64>)>) -> Self {
        BoundaryCondition {
            kind: BoundaryKind::DirichletU,
            u,
            v: Vec::new(),
        }
    }

    /// Bar `(0, L)`: `u = 0` and `u = z` at the ends, `v = 1` at both ends.
    pub fn bar(mesh: &Mesh, z: &[f64]) -> Result<Self> {
        if mesh.dim != 1 {
            return input("bar conditions need a 1D mesh");
        }
        let last = mesh.n_nodes() - 1;
        Ok(BoundaryCondition {
            kind: BoundaryKind::DirichletU,
            u: vec![(0, vec![0.0; z.len()]), (last, z.to_vec())],
            v: vec![(0, 1.0), (last, 1.0)],
        })
    }

    /// `u = (zχ_{s>0}) ∗ φ_w` and `v = χ_{|s|≥2w} ∗ φ_w` on every boundary
    /// node, where `s` is the last grid coordinate measured from the centre.
    /// On a square the last axis plays the role of `ν`.
    pub fn mollified_jump(mesh: &Mesh, z: &[f64], width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return input("mollifier width must be positive");
        }
        let moll = Mollifier::new(mesh.dim);
        let axis = mesh.dim - 1;
        let centre = 0.5 * mesh.cells[axis] as f64 * mesh.h;
        let mut bc = BoundaryCondition {
            kind: BoundaryKind::MollifiedJump,
            u: Vec::new(),
            v: Vec::new(),
        };
        for k in 0..mesh.n_nodes() {
            if !mesh.is_boundary(k) {
                continue;
            }
            let (i, j) = mesh.node_ij(k);
            let s = [i, j][axis] as f64 * mesh.h - centre;
            let (uu, vv) = moll.jump_data(s, width);
            bc.u.push((k, z.iter().map(|zi| zi * uu).collect()));
            bc.v.push((k, vv));
        }
        Ok(bc)
    }

    pub fn validate(&self, mesh: &Mesh, m: usize) -> Result<()> {
        let n = mesh.n_nodes();
        for (k, val) in &self.u {
            if *k >= n || !mesh.is_boundary(*k) {
                return input(format!("u constraint on non-boundary node {k}"));
            }
            if val.len() != m {
                return Err(Error::Shape(format!("u constraint with {} components, expected {m}", val.len())));
            }
        }
        for (k, val) in &self.v {
            if *k >= n || !mesh.is_boundary(*k) {
                return input(format!("v constraint on non-boundary node {k}"));
            }
            if !(0.0..=1.0).contains(val) {
                return input(format!("v constraint {val} outside [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn apply(&self, state: &mut PhaseFieldState) -> Result<()> {
        self.validate(&state.mesh, state.m)?;
        let m = state.m;
        for (k, val) in &self.u {
            state.u[k * m..(k + 1) * m].copy_from_slice(val);
        }
        for (k, val) in &self.v {
            state.v[*k] = *val;
        }
        Ok(())
    }

    /// Whether `state` carries the prescribed values up to `tol`.
    pub fn is_satisfied(&self, state: &PhaseFieldState, tol: f64) -> bool {
        let m = state.m;
        self.u
            .iter()
            .all(|(k, val)| val.iter().enumerate().all(|(a, x)| (state.u[k * m + a] - x).abs() <= tol))
            && self.v.iter().all(|(k, x)| (state.v[*k] - x).abs() <= tol)
    }

    /// Box `0 ≤ v ≤ 1` with every constrained unknown pinned.
    pub fn bounds(&self, mesh: &Mesh, m: usize) -> Bounds {
        let s = m + 1;
        let mut b = Bounds::unbounded(mesh.n_nodes() * s);
        for k in 0..mesh.n_nodes() {
            b.set(k * s + m, 0.0, 1.0);
        }
        for (k, val) in &self.u {
            for (a, x) in val.iter().enumerate() {
                b.pin(k * s + a, *x);
            }
        }
        for (k, x) in &self.v {
            b.pin(k * s + m, *x);
        }
        b
    }
}

/// The normalised bump `φ(x) ∝ exp(−1/(1−|x|²))` on the unit ball of
/// `ℝ^n`, through the distribution function of its one-dimensional
/// marginal.
#[derive(Clone, Debug)]
pub struct Mollifier {
    pub n: usize,
    cdf: Vec<f64>,
}

const MOLL_TABLE: usize = 4000;

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

impl Mollifier {
    /// Tabulates the marginal for `n ∈ {1, 2}`.
    pub fn new(n: usize) -> Self {
        let dt = 2.0 / MOLL_TABLE as f64;
        let marginal = |t: f64| -> f64 {
            if n == 1 {
                return bump(t * t);
            }
            let w = (1.0 - t * t).max(0.0).sqrt();
            if w == 0.0 {
                return 0.0;
            }
            // Midpoint rule across the chord; the integrand is smooth and
            // vanishes to all orders at the ends.
            let k = 400;
            let dy = 2.0 * w / k as f64;
            (0..k).map(|i| bump(t * t + (-w + (i as f64 + 0.5) * dy).powi(2))).sum::<f64>() * dy
        };
        let dens: Vec<f64> = (0..=MOLL_TABLE).map(|i| marginal(-1.0 + i as f64 * dt)).collect();
        let mut cdf = vec![0.0; MOLL_TABLE + 1];
        for i in 1..=MOLL_TABLE {
            cdf[i] = cdf[i - 1] + 0.5 * dt * (dens[i - 1] + dens[i]);
        }
        let total = cdf[MOLL_TABLE];
        for c in cdf.iter_mut() {
            *c /= total;
        }
        // Enforce F(−t) = 1 − F(t) exactly.
        for i in 0..=MOLL_TABLE / 2 {
            let j = MOLL_TABLE - i;
            let a = 0.5 * (cdf[i] + 1.0 - cdf[j]);
            cdf[i] = a;
            cdf[j] = 1.0 - a;
        }
        Mollifier { n, cdf }
    }

    /// `F(t) = ∫_{y·e < t} φ(y) dy`.
    pub fn marginal_cdf(&self, t: f64) -> f64 {
        if t <= -1.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let x = (t + 1.0) * 0.5 * MOLL_TABLE as f64;
        let i = (x.floor() as usize).min(MOLL_TABLE - 1);
        let w = x - i as f64;
        (1.0 - w) * self.cdf[i] + w * self.cdf[i + 1]
    }

    /// `((χ_{s>0}) ∗ φ_w, χ_{|s|≥2w} ∗ φ_w)` at normal coordinate `s`.
    pub fn jump_data(&self, s: f64, width: f64) -> (f64, f64) {
        let f = |t: f64| self.marginal_cdf(t / width);
        let u = f(s);
        let v = 1.0 - (f(s + 2.0 * width) - f(s - 2.0 * width));
        (u, v.clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mollifier_is_symmetric_and_normalised() {
        for n in [1, 2] {
            let m = Mollifier::new(n);
            assert_eq!(m.marginal_cdf(-1.0), 0.0);
            assert_eq!(m.marginal_cdf(1.0), 1.0);
            assert!((m.marginal_cdf(0.0) - 0.5).abs() < 1e-12);
            for t in [0.1, 0.37, 0.8] {
                assert!((m.marginal_cdf(t) + m.marginal_cdf(-t) - 1.0).abs() < 1e-12);
                assert!(m.marginal_cdf(t) > m.marginal_cdf(t - 0.05));
            }
        }
    }

    #[test]
    fn jump_data_profiles() {
        let m = Mollifier::new(2);
        assert_eq!(m.jump_data(-1.5, 1.0).0, 0.0);
        assert_eq!(m.jump_data(0.5, 1.0).1, 0.0);
        assert_eq!(m.jump_data(3.5, 1.0), (1.0, 1.0));
        let (u, v) = m.jump_data(2.0, 1.0);
        assert_eq!(u, 1.0);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bar_bounds_pin_the_ends() {
        let mesh = Mesh::line(10, 0.1);
        let bc = BoundaryCondition::bar(&mesh, &[2.0]).unwrap();
        let b = bc.bounds(&mesh, 1);
        assert!(b.is_pinned(0) && b.is_pinned(1) && b.is_pinned(20) && b.is_pinned(21));
        assert!(!b.is_pinned(2));
        let mut s = PhaseFieldState::new(mesh, 1, 0.1).unwrap();
        bc.apply(&mut s).unwrap();
        assert!(bc.is_satisfied(&s, 0.0));
        assert_eq!(s.u[10], 2.0);
    }

    #[test]
    fn interior_constraints_are_rejected() {
        let mesh = Mesh::grid(4, 4, 0.25);
        let bc = BoundaryCondition::dirichlet_u(vec![(mesh.node(2, 2), vec![0.0])]);
        assert!(bc.validate(&mesh, 1).is_err());
        let ok = BoundaryCondition::mollified_jump(&mesh, &[1.0], 0.25).unwrap();
        assert!(ok.validate(&mesh, 1).is_ok());
        assert_eq!(ok.u.len(), 16);
    }
}
