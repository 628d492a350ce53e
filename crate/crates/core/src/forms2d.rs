//! Finite-difference exterior calculus on a rectangular `(s, t)` grid.
//!
//! Scalar fields, 1-forms `p ds + q dt` and 2-forms `r ds∧dt` are sampled at
//! grid nodes. Derivatives use second-order central differences in the
//! interior and second-order one-sided stencils on the boundary, so every
//! residual built from them decays like `h²` at interior nodes.

use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Path used by line-by-line integrators: which grid edge is swept first
/// before filling the remaining lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// Along `t` at `s_min`, then along every `s`-line.
    #[default]
    TEdgeFirst,
    /// Along `s` at `t_min`, then along every `t`-line.
    SEdgeFirst,
}

/// Rectangular node lattice over `[s_min, s_max] × [t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    s_min: f64,
    s_max: f64,
    t_min: f64,
    t_max: f64,
    ns: usize,
    nt: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GridSpec {
    s_min: f64,
    s_max: f64,
    t_min: f64,
    t_max: f64,
    ns: usize,
    nt: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(g: GridSpec) -> Result<Self> {
        Grid::new(g.s_min, g.s_max, g.t_min, g.t_max, g.ns, g.nt)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            s_min: g.s_min,
            s_max: g.s_max,
            t_min: g.t_min,
            t_max: g.t_max,
            ns: g.ns,
            nt: g.nt,
        }
    }
}

impl Grid {
    pub const MIN_NODES: usize = 5;

    pub fn new(s_min: f64, s_max: f64, t_min: f64, t_max: f64, ns: usize, nt: usize) -> Result<Self> {
        if ![s_min, s_max, t_min, t_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if s_max <= s_min || t_max <= t_min {
            return Err(Error::InvalidGrid(format!(
                "empty rectangle [{s_min}, {s_max}] x [{t_min}, {t_max}]"
            )));
        }
        if ns < Self::MIN_NODES || nt < Self::MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {} nodes per direction, got {ns} x {nt}",
                Self::MIN_NODES
            )));
        }
        Ok(Self {
            s_min,
            s_max,
            t_min,
            t_max,
            ns,
            nt,
        })
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }
    pub fn s_max(&self) -> f64 {
        self.s_max
    }
    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn ns(&self) -> usize {
        self.ns
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn len(&self) -> usize {
        self.ns * self.nt
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h_s(&self) -> f64 {
        (self.s_max - self.s_min) / (self.ns - 1) as f64
    }

    pub fn h_t(&self) -> f64 {
        (self.t_max - self.t_min) / (self.nt - 1) as f64
    }

    /// Larger of the two spacings.
    pub fn h(&self) -> f64 {
        self.h_s().max(self.h_t())
    }

    pub fn s(&self, i: usize) -> f64 {
        if i == self.ns - 1 {
            self.s_max
        } else {
            self.s_min + i as f64 * self.h_s()
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        if j == self.nt - 1 {
            self.t_max
        } else {
            self.t_min + j as f64 * self.h_t()
        }
    }

    /// Row-major index: `s` is the slow index.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }

    pub fn s_nodes(&self) -> Vec<f64> {
        (0..self.ns).map(|i| self.s(i)).collect()
    }

    /// Same rectangle with the spacing halved `levels` times
    /// (`n -> 2(n - 1) + 1`), so coarse nodes are a subset of fine nodes.
    pub fn refined(&self, levels: u32) -> Grid {
        let f = 1usize << levels;
        Grid {
            ns: (self.ns - 1) * f + 1,
            nt: (self.nt - 1) * f + 1,
            ..*self
        }
    }

    fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

fn check_same(a: &Grid, b: &Grid, op: &str) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("{op}: operands live on different grids")))
    }
}

/// A function of `(s, t)` sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "scalar field".into(),
                i: k / grid.nt,
                j: k % grid.nt,
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(s, t)` at every node.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.ns {
            let s = grid.s(i);
            for j in 0..grid.nt {
                values.push(f(s, grid.t(j)));
            }
        }
        Self::new(grid, values)
    }

    /// Like [`ScalarField::from_fn`] for fallible samplers.
    pub fn try_from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.ns {
            let s = grid.s(i);
            for j in 0..grid.nt {
                values.push(f(s, grid.t(j))?);
            }
        }
        Self::new(grid, values)
    }

    /// Broadcasts per-`s` samples along `t`.
    pub fn from_s_samples(grid: Grid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.ns {
            return Err(Error::GridMismatch(format!(
                "expected {} s-samples, got {}",
                grid.ns,
                samples.len()
            )));
        }
        let values = samples
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, grid.nt))
            .collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination; panics if grids differ (use on fields from one pipeline).
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(self.grid.same_as(&other.grid), "zip_map on mismatched grids");
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max |value| over nodes at least `margin` away from every edge.
    pub fn max_abs_interior_margin(&self, margin: usize) -> f64 {
        let g = &self.grid;
        let mut m: f64 = 0.0;
        for i in margin..g.ns.saturating_sub(margin) {
            for j in margin..g.nt.saturating_sub(margin) {
                m = m.max(self.at(i, j).abs());
            }
        }
        m
    }

    pub fn max_abs_interior(&self) -> f64 {
        self.max_abs_interior_margin(1)
    }

    /// Partial derivative in `s` (central interior, one-sided boundary).
    pub fn partial_s(&self) -> ScalarField {
        let g = self.grid;
        let mut out = vec![0.0; g.len()];
        let h = g.h_s();
        for j in 0..g.nt {
            let line: Vec<f64> = (0..g.ns).map(|i| self.at(i, j)).collect();
            for (i, d) in diff_line(&line, h).into_iter().enumerate() {
                out[g.index(i, j)] = d;
            }
        }
        Self { grid: g, values: out }
    }

    /// Partial derivative in `t` (central interior, one-sided boundary).
    pub fn partial_t(&self) -> ScalarField {
        let g = self.grid;
        let mut out = vec![0.0; g.len()];
        let h = g.h_t();
        for i in 0..g.ns {
            let start = g.index(i, 0);
            let line = &self.values[start..start + g.nt];
            out[start..start + g.nt].copy_from_slice(&diff_line(line, h));
        }
        Self { grid: g, values: out }
    }

    /// Values along `t` at s-index `i`.
    pub fn t_line(&self, i: usize) -> &[f64] {
        let start = self.grid.index(i, 0);
        &self.values[start..start + self.grid.nt]
    }

    /// CSV with header `s,t,<column>`, row-major, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W, column: &str) -> std::io::Result<()> {
        writeln!(w, "s,t,{column}")?;
        let g = &self.grid;
        for i in 0..g.ns {
            for j in 0..g.nt {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", g.s(i), g.t(j), self.at(i, j))?;
            }
        }
        Ok(())
    }
}

/// First derivative of a uniformly sampled line: central differences inside,
/// second-order one-sided differences at both ends.
pub fn diff_line(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3, "need at least three samples");
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for k in 1..n - 1 {
        d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
    }
    d
}

/// Second derivative of a uniformly sampled line, second order everywhere.
pub fn diff2_line(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 4, "need at least four samples");
    let h2 = h * h;
    let mut d = vec![0.0; n];
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    for k in 1..n - 1 {
        d[k] = (f[k + 1] - 2.0 * f[k] + f[k - 1]) / h2;
    }
    d
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, c: f64) -> ScalarField {
        self.map(|v| v * c)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// `p ds + q dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    p: ScalarField,
    q: ScalarField,
}

impl OneForm {
    pub fn new(p: ScalarField, q: ScalarField) -> Result<Self> {
        check_same(&p.grid, &q.grid, "OneForm::new")?;
        Ok(Self { p, q })
    }

    /// Builds a form from a sampler returning `(p, q)`.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> Result<Self> {
        let mut p = Vec::with_capacity(grid.len());
        let mut q = Vec::with_capacity(grid.len());
        for i in 0..grid.ns {
            let s = grid.s(i);
            for j in 0..grid.nt {
                let (a, b) = f(s, grid.t(j));
                p.push(a);
                q.push(b);
            }
        }
        Self::new(ScalarField::new(grid, p)?, ScalarField::new(grid, q)?)
    }

    /// `ds` on `grid`.
    pub fn ds(grid: Grid) -> Self {
        Self::from_fn(grid, |_, _| (1.0, 0.0)).expect("constant form")
    }

    /// `dt` on `grid`.
    pub fn dt(grid: Grid) -> Self {
        Self::from_fn(grid, |_, _| (0.0, 1.0)).expect("constant form")
    }

    pub fn p(&self) -> &ScalarField {
        &self.p
    }

    pub fn q(&self) -> &ScalarField {
        &self.q
    }

    pub fn grid(&self) -> &Grid {
        &self.p.grid
    }

    /// Components `(p, q)` at node `(i, j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> (f64, f64) {
        (self.p.at(i, j), self.q.at(i, j))
    }

    /// `f · w` for a scalar field `f`.
    pub fn scaled(&self, f: &ScalarField) -> OneForm {
        OneForm {
            p: &self.p * f,
            q: &self.q * f,
        }
    }

    pub fn times(&self, c: f64) -> OneForm {
        OneForm {
            p: &self.p * c,
            q: &self.q * c,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.p.max_abs().max(self.q.max_abs())
    }

    pub fn max_abs_interior(&self) -> f64 {
        self.p.max_abs_interior().max(self.q.max_abs_interior())
    }

    pub fn max_abs_interior_margin(&self, margin: usize) -> f64 {
        self.p
            .max_abs_interior_margin(margin)
            .max(self.q.max_abs_interior_margin(margin))
    }
}

impl Add for &OneForm {
    type Output = OneForm;
    fn add(self, rhs: &OneForm) -> OneForm {
        OneForm {
            p: &self.p + &rhs.p,
            q: &self.q + &rhs.q,
        }
    }
}

impl Sub for &OneForm {
    type Output = OneForm;
    fn sub(self, rhs: &OneForm) -> OneForm {
        OneForm {
            p: &self.p - &rhs.p,
            q: &self.q - &rhs.q,
        }
    }
}

impl Neg for &OneForm {
    type Output = OneForm;
    fn neg(self) -> OneForm {
        OneForm {
            p: -&self.p,
            q: -&self.q,
        }
    }
}

/// `r ds∧dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    r: ScalarField,
}

impl TwoForm {
    pub fn new(r: ScalarField) -> Self {
        Self { r }
    }

    pub fn r(&self) -> &ScalarField {
        &self.r
    }

    pub fn max_abs_interior(&self) -> f64 {
        self.r.max_abs_interior()
    }

    pub fn max_abs_interior_margin(&self, margin: usize) -> f64 {
        self.r.max_abs_interior_margin(margin)
    }

    pub fn scaled(&self, f: &ScalarField) -> TwoForm {
        TwoForm { r: &self.r * f }
    }
}

impl Add for &TwoForm {
    type Output = TwoForm;
    fn add(self, rhs: &TwoForm) -> TwoForm {
        TwoForm { r: &self.r + &rhs.r }
    }
}

impl Sub for &TwoForm {
    type Output = TwoForm;
    fn sub(self, rhs: &TwoForm) -> TwoForm {
        TwoForm { r: &self.r - &rhs.r }
    }
}

impl Neg for &TwoForm {
    type Output = TwoForm;
    fn neg(self) -> TwoForm {
        TwoForm { r: -&self.r }
    }
}

fn ensure_finite(f: &ScalarField, what: &str) -> Result<()> {
    match f.values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(k) => Err(Error::NonFinite {
            what: what.into(),
            i: k / f.grid.nt,
            j: k % f.grid.nt,
        }),
    }
}

/// `df = f_s ds + f_t dt`.
pub fn d_scalar(f: &ScalarField) -> Result<OneForm> {
    let p = f.partial_s();
    let q = f.partial_t();
    ensure_finite(&p, "d_scalar (s-derivative)")?;
    ensure_finite(&q, "d_scalar (t-derivative)")?;
    Ok(OneForm { p, q })
}

/// `d(p ds + q dt) = (q_s − p_t) ds∧dt`.
pub fn d_oneform(w: &OneForm) -> TwoForm {
    TwoForm {
        r: &w.q.partial_s() - &w.p.partial_t(),
    }
}

/// `(p₁ ds + q₁ dt) ∧ (p₂ ds + q₂ dt) = (p₁q₂ − q₁p₂) ds∧dt`.
pub fn wedge(w1: &OneForm, w2: &OneForm) -> Result<TwoForm> {
    check_same(w1.grid(), w2.grid(), "wedge")?;
    let r = &(&w1.p * &w2.q) - &(&w1.q * &w2.p);
    Ok(TwoForm { r })
}

/// Hodge star for the conformal metric: `*ds = dt`, `*dt = −ds`.
pub fn hodge(w: &OneForm) -> OneForm {
    OneForm {
        p: -&w.q,
        q: w.p.clone(),
    }
}

/// Solves `w = f₁ c₁ + f₂ c₂` node by node.
///
/// Fails when the coframe degenerates: `|det| < 1e-12 · (max component)²`.
pub fn decompose_in_coframe(w: &OneForm, c1: &OneForm, c2: &OneForm) -> Result<(ScalarField, ScalarField)> {
    check_same(w.grid(), c1.grid(), "decompose_in_coframe")?;
    check_same(w.grid(), c2.grid(), "decompose_in_coframe")?;
    let g = *w.grid();
    let mut f1 = Vec::with_capacity(g.len());
    let mut f2 = Vec::with_capacity(g.len());
    for i in 0..g.ns {
        for j in 0..g.nt {
            let (a, c) = c1.at(i, j);
            let (b, d) = c2.at(i, j);
            let (wp, wq) = w.at(i, j);
            // [a b; c d] [f1; f2] = [wp; wq]
            let det = a * d - b * c;
            let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
            if !(det.abs() >= 1e-12 * scale * scale) || scale == 0.0 {
                return Err(Error::SingularCoframe { i, j, det });
            }
            f1.push((wp * d - b * wq) / det);
            f2.push((a * wq - c * wp) / det);
        }
    }
    Ok((ScalarField::new(g, f1)?, ScalarField::new(g, f2)?))
}

/// 5-point Laplacian; boundary rows use one-sided second differences.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid;
    let mut fss = vec![0.0; g.len()];
    for j in 0..g.nt {
        let line: Vec<f64> = (0..g.ns).map(|i| f.at(i, j)).collect();
        for (i, d) in diff2_line(&line, g.h_s()).into_iter().enumerate() {
            fss[g.index(i, j)] = d;
        }
    }
    let mut out = fss;
    for i in 0..g.ns {
        for (j, d) in diff2_line(f.t_line(i), g.h_t()).into_iter().enumerate() {
            out[g.index(i, j)] += d;
        }
    }
    ScalarField { grid: g, values: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(n: usize) -> Grid {
        Grid::new(0.0, 1.0, 0.0, 1.0, n, n).unwrap()
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid::new(0.0, 1.0, 0.0, 1.0, 4, 9).is_err());
        assert!(Grid::new(1.0, 1.0, 0.0, 1.0, 9, 9).is_err());
        assert!(Grid::new(0.0, f64::NAN, 0.0, 1.0, 9, 9).is_err());
        let g = unit(9);
        assert_abs_diff_eq!(g.h_s(), 0.125);
        assert_eq!(g.refined(1).ns(), 17);
    }

    #[test]
    fn d_of_linear_and_constant() {
        let g = unit(9);
        let w = d_scalar(&ScalarField::from_fn(g, |s, _| s).unwrap()).unwrap();
        assert!(w.p().values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(w.q().max_abs() < 1e-12);
        let w = d_scalar(&ScalarField::constant(g, 3.5).unwrap()).unwrap();
        assert!(w.max_abs() < 1e-12);
    }

    #[test]
    fn d_of_bilinear_at_center() {
        let g = unit(9);
        let w = d_scalar(&ScalarField::from_fn(g, |s, t| s * t).unwrap()).unwrap();
        // node (4, 4) is (0.5, 0.5)
        assert_abs_diff_eq!(w.p().at(4, 4), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(w.q().at(4, 4), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn d_oneform_hand_values() {
        let g = unit(9);
        let t_ds = OneForm::from_fn(g, |_, t| (t, 0.0)).unwrap();
        assert!(d_oneform(&t_ds).r().values().iter().all(|&v| (v + 1.0).abs() < 1e-12));
        let s_dt = OneForm::from_fn(g, |s, _| (0.0, s)).unwrap();
        assert!(d_oneform(&s_dt).r().values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn wedge_basics() {
        let g = unit(7);
        let ds = OneForm::ds(g);
        let dt = OneForm::dt(g);
        assert!(wedge(&ds, &dt).unwrap().r().values().iter().all(|&v| v == 1.0));
        assert_eq!(wedge(&ds, &ds).unwrap().r().max_abs(), 0.0);
        let r = wedge(&ds.times(2.0), &dt.times(3.0)).unwrap();
        assert!(r.r().values().iter().all(|&v| v == 6.0));
        let other = OneForm::ds(unit(8));
        assert!(matches!(wedge(&ds, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn hodge_on_basis() {
        let g = unit(5);
        assert_eq!(hodge(&OneForm::ds(g)), OneForm::dt(g));
        assert_eq!(hodge(&OneForm::dt(g)), -&OneForm::ds(g));
    }

    #[test]
    fn decompose_identity_and_rotated() {
        let g = unit(7);
        let w = OneForm::from_fn(g, |s, t| (s + 2.0 * t, s * t - 1.0)).unwrap();
        let (f1, f2) = decompose_in_coframe(&w, &OneForm::ds(g), &OneForm::dt(g)).unwrap();
        assert_eq!(&f1, w.p());
        assert_eq!(&f2, w.q());

        // coframe (ds, dt) rotated by φ: c1 = cos φ ds + sin φ dt, c2 = −sin φ ds + cos φ dt
        let phi: f64 = 0.3;
        let c1 = OneForm::from_fn(g, |_, _| (phi.cos(), phi.sin())).unwrap();
        let c2 = OneForm::from_fn(g, |_, _| (-phi.sin(), phi.cos())).unwrap();
        let (f1, f2) = decompose_in_coframe(&OneForm::ds(g), &c1, &c2).unwrap();
        assert_abs_diff_eq!(f1.at(3, 3), phi.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(f2.at(3, 3), -phi.sin(), epsilon = 1e-15);
    }

    #[test]
    fn decompose_self() {
        let g = unit(6);
        let c1 = OneForm::from_fn(g, |s, t| (1.0 + s, t)).unwrap();
        let c2 = OneForm::from_fn(g, |s, _| (-0.5, 2.0 + s)).unwrap();
        let (f1, f2) = decompose_in_coframe(&c1, &c1, &c2).unwrap();
        assert!(f1.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(f2.max_abs() < 1e-15);
    }

    #[test]
    fn decompose_reports_singular_node() {
        let g = unit(5);
        let c1 = OneForm::ds(g);
        let c2 = OneForm::from_fn(g, |s, t| (1.0, if s == 0.5 && t == 0.25 { 0.0 } else { 1.0 })).unwrap();
        match decompose_in_coframe(&OneForm::dt(g), &c1, &c2) {
            Err(Error::SingularCoframe { i, j, det }) => {
                assert_eq!((i, j), (2, 1));
                assert_eq!(det, 0.0);
            }
            other => panic!("expected singular coframe, got {other:?}"),
        }
    }

    #[test]
    fn laplacian_of_quadratics() {
        let g = unit(9);
        let saddle = ScalarField::from_fn(g, |s, t| s * s - t * t).unwrap();
        assert!(laplacian(&saddle).max_abs() < 1e-10);
        let lin = ScalarField::from_fn(g, |s, _| s).unwrap();
        assert!(laplacian(&lin).max_abs() < 1e-10);
        let sq = ScalarField::from_fn(g, |s, _| s * s).unwrap();
        assert!(laplacian(&sq).values().iter().all(|&v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(0.0, 1.0, 0.0, 2.0, 5, 5).unwrap();
        let f = ScalarField::from_fn(g, |s, t| s + t).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf, "value").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "s,t,value");
        assert_eq!(lines.len(), 26);
        assert_eq!(
            lines[2],
            "0.0000000000000000e0,5.0000000000000000e-1,5.0000000000000000e-1"
        );
    }
}
