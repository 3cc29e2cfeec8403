//! Rendering and sampling the gasket in the simplex and `(α, β)` charts.
//!
//! Every cylinder and hole is a projective triangle `MΔ` with `M` unimodular,
//! so membership of a point `p` is the sign pattern of the integer forms in
//! the rows of `M⁻¹`. Collinear edges share the same primitive form, and a
//! point with `L·p = 0` is resolved by the symbolic perturbation
//! `p + εe1 + ε²e2 + ε³e3`. Children and holes therefore partition every
//! pixel exactly, which makes both render modes agree bit for bit.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::cocycle::{hole_matrix, trial_rng};
use crate::dimension::{box_counting_grid, BoxCount};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::itm::LengthVector;
use crate::mat3::{iadjugate, imul, IMat};
use crate::rational::{q, Q};
use crate::renorm::{inverse_i64, letter_i64, Letter, Perm};

/// Deepest render or sample (2^depth cylinders).
pub const RENDER_DEPTH_BUDGET: usize = 24;

/// Box sides in pixels for raster box counting. Single pixels are left out:
/// at that scale the count measures the rasterizer, not the set.
pub const DEFAULT_BOX_SIZES: [usize; 7] = [2, 4, 8, 16, 32, 64, 128];

const ID: IMat = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
const SQRT3_2: f64 = 0.866_025_403_784_438_6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Chart {
    /// `(a, b, c) ↦ (b + c/2, (√3/2) c)`.
    Simplex,
    /// `(a, b, c) ↦ (α, β) = (1 − a, c)`.
    AlphaBeta,
}

impl FromStr for Chart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex" => Ok(Chart::Simplex),
            "alpha-beta" | "alphabeta" | "ab" => Ok(Chart::AlphaBeta),
            _ => Err(Error::Parse(format!("unknown chart '{s}'"))),
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chart::Simplex => "simplex",
            Chart::AlphaBeta => "alpha-beta",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RenderMode {
    /// Paint the surviving depth-`d` cylinders.
    Fill,
    /// Paint the simplex minus every hole of depth below `d`.
    Carve,
}

impl FromStr for RenderMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fill" => Ok(RenderMode::Fill),
            "carve" => Ok(RenderMode::Carve),
            _ => Err(Error::Parse(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RenderConfig {
    pub depth: usize,
    pub resolution: usize,
    pub chart: Chart,
    pub mode: RenderMode,
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 16 {
            return Err(Error::InvalidParams(format!(
                "resolution must be at least 16, got {}",
                self.resolution
            )));
        }
        if self.resolution > 1 << 15 {
            return Err(Error::Budget(format!(
                "resolution {} is too large",
                self.resolution
            )));
        }
        if self.depth > RENDER_DEPTH_BUDGET {
            return Err(Error::Budget(format!(
                "depth {} exceeds the budget {RENDER_DEPTH_BUDGET}",
                self.depth
            )));
        }
        Ok(())
    }
}

/// `(α, β)` of a point of the simplex.
pub fn chart_alpha_beta(p: &LengthVector) -> (Q, Q) {
    (Q::one() - p.a(), p.c().clone())
}

/// Inverse of [`chart_alpha_beta`]; requires `0 ≤ β ≤ α ≤ 1`.
pub fn lengths_from_alpha_beta(alpha: &Q, beta: &Q) -> Result<LengthVector> {
    LengthVector::new(Q::one() - alpha, alpha - beta, beta.clone())
}

/// Planar coordinates of a point in a chart.
pub fn chart_point(chart: Chart, p: [f64; 3]) -> [f64; 2] {
    let s = p[0] + p[1] + p[2];
    let [a, b, c] = p.map(|x| x / s);
    match chart {
        Chart::Simplex => [b + 0.5 * c, SQRT3_2 * c],
        Chart::AlphaBeta => [1.0 - a, c],
    }
}

/// Unnormalised `(a, b, c)` of a planar point.
fn chart_inverse(chart: Chart, x: f64, y: f64) -> [f64; 3] {
    match chart {
        Chart::Simplex => {
            let c = y / SQRT3_2;
            let b = x - 0.5 * c;
            [1.0 - b - c, b, c]
        }
        Chart::AlphaBeta => [1.0 - x, x - y, y],
    }
}

/// Square bit mask, row 0 at the top.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    size: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for Raster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Raster({}x{}, {} set)",
            self.size,
            self.size,
            self.count()
        )
    }
}

impl Raster {
    pub fn new(size: usize) -> Self {
        Raster {
            size,
            bits: vec![0; (size * size).div_ceil(64)],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        let k = y * self.size + x;
        self.bits[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn set(&mut self, x: usize, y: usize) {
        let k = y * self.size + x;
        self.bits[k / 64] |= 1 << (k % 64);
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn or_assign(&mut self, other: &Raster) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    fn and_not_assign(&mut self, other: &Raster) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    /// Binary PPM, set pixels black on white.
    pub fn write_ppm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.size, self.size)?;
        let mut row = Vec::with_capacity(self.size * 3);
        for y in 0..self.size {
            row.clear();
            for x in 0..self.size {
                let v = if self.get(x, y) { 0 } else { 255 };
                row.extend_from_slice(&[v, v, v]);
            }
            w.write_all(&row)?;
        }
        Ok(())
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_ppm(&mut out)
            .expect("writing to a vector cannot fail");
        out
    }

    pub fn box_count(&self, sizes: &[usize]) -> Result<BoxCount> {
        box_counting_grid(self.size, self.size, |x, y| self.get(x, y), sizes)
    }
}

/// Sign of `L·p` under the symbolic perturbation; never zero for `L ≠ 0`.
fn positive(l: &[i64; 3], p: &[f64; 3]) -> bool {
    let v = l[0] as f64 * p[0] + l[1] as f64 * p[1] + l[2] as f64 * p[2];
    if v != 0.0 {
        return v > 0.0;
    }
    l.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn inside(forms: &IMat, p: &[f64; 3]) -> bool {
    forms.iter().all(|l| positive(l, p))
}

/// Pixel grid over `[0, 1]²`; pixel `(x, y)` has centre
/// `((x + ½)/n, 1 − (y + ½)/n)`.
struct Grid {
    chart: Chart,
    size: usize,
}

impl Grid {
    fn point(&self, x: usize, y: usize) -> [f64; 3] {
        let n = self.size as f64;
        chart_inverse(self.chart, (x as f64 + 0.5) / n, 1.0 - (y as f64 + 0.5) / n)
    }

    /// Paints the pixels of the triangle with vertex columns `m` and
    /// inverse `forms`.
    fn paint(&self, raster: &mut Raster, m: &IMat, forms: &IMat) {
        let n = self.size as f64;
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for j in 0..3 {
            let [u, v] = chart_point(self.chart, [m[0][j] as f64, m[1][j] as f64, m[2][j] as f64]);
            let (px, py) = (u * n, (1.0 - v) * n);
            x0 = x0.min(px);
            x1 = x1.max(px);
            y0 = y0.min(py);
            y1 = y1.max(py);
        }
        let clip = |lo: f64, hi: f64| -> Option<(usize, usize)> {
            let a = (lo - 0.5).floor().max(0.0);
            let b = (hi - 0.5).ceil().min(n - 1.0);
            (a <= b).then_some((a as usize, b as usize))
        };
        let (Some((xa, xb)), Some((ya, yb))) = (clip(x0, x1), clip(y0, y1)) else {
            return;
        };
        for y in ya..=yb {
            for x in xa..=xb {
                if inside(forms, &self.point(x, y)) {
                    raster.set(x, y);
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Cyl {
    perm: Perm,
    m: IMat,
    inv: IMat,
}

impl Cyl {
    fn root() -> Self {
        Cyl {
            perm: Perm::P123,
            m: ID,
            inv: ID,
        }
    }

    fn child(&self, cross: bool) -> Cyl {
        let l = Letter::out_of(self.perm)[cross as usize];
        Cyl {
            perm: l.target(),
            m: imul(&self.m, &letter_i64(l)),
            inv: imul(&inverse_i64(l), &self.inv),
        }
    }

    fn hole(&self) -> (IMat, IMat) {
        let h = hole_i64(self.perm);
        let hinv = hole_inverse_i64(self.perm);
        (imul(&self.m, &h), imul(&hinv, &self.inv))
    }
}

fn hole_i64(p: Perm) -> IMat {
    hole_matrix(p).to_i64().expect("small matrix")
}

fn hole_inverse_i64(p: Perm) -> IMat {
    let h = hole_i64(p);
    let det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
        - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
        + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
    iadjugate(&h).map(|r| r.map(|x| x * det))
}

fn prefix_cyl(index: usize, len: usize) -> Cyl {
    (0..len)
        .rev()
        .fold(Cyl::root(), |c, j| c.child((index >> j) & 1 == 1))
}

fn walk<F: FnMut(&Cyl, usize)>(c: &Cyl, level: usize, depth: usize, visit: &mut F) {
    visit(c, level);
    if level < depth {
        walk(&c.child(false), level + 1, depth, visit);
        walk(&c.child(true), level + 1, depth, visit);
    }
}

const SHARD_DEPTH: usize = 8;

/// Visits every cylinder of level `0..=depth` once, sharded by prefix.
fn for_each_cylinder<A, I, F>(
    depth: usize,
    exec: Execution,
    init: I,
    visit: F,
    merge: fn(A, A) -> A,
) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &Cyl, usize) + Sync + Send,
{
    let k = depth.min(SHARD_DEPTH);
    let top = {
        let mut acc = init();
        for level in 0..k {
            for i in 0..1usize << level {
                visit(&mut acc, &prefix_cyl(i, level), level);
            }
        }
        acc
    };
    let below = exec.fold_indices(
        1usize << k,
        &init,
        |mut acc, i| {
            walk(&prefix_cyl(i, k), k, depth, &mut |c, level| {
                visit(&mut acc, c, level)
            });
            acc
        },
        merge,
    );
    merge(top, below)
}

fn or_merge(mut a: Raster, b: Raster) -> Raster {
    a.or_assign(&b);
    a
}

/// Rasterises the depth-`d` approximation of the gasket.
pub fn render(cfg: &RenderConfig, exec: Execution) -> Result<Raster> {
    cfg.validate()?;
    let grid = Grid {
        chart: cfg.chart,
        size: cfg.resolution,
    };
    let depth = cfg.depth;
    match cfg.mode {
        RenderMode::Fill => Ok(for_each_cylinder(
            depth,
            exec,
            || Raster::new(grid.size),
            |r, c, level| {
                if level == depth {
                    grid.paint(r, &c.m, &c.inv);
                }
            },
            or_merge,
        )),
        RenderMode::Carve => {
            let holes = if depth == 0 {
                Raster::new(grid.size)
            } else {
                for_each_cylinder(
                    depth - 1,
                    exec,
                    || Raster::new(grid.size),
                    |r, c, _| {
                        let (m, inv) = c.hole();
                        grid.paint(r, &m, &inv);
                    },
                    or_merge,
                )
            };
            let mut out = Raster::new(grid.size);
            grid.paint(&mut out, &ID, &ID);
            out.and_not_assign(&holes);
            Ok(out)
        }
    }
}

/// Point of a sample, exact on the simplex plus its simplex-chart position.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub cylinder: usize,
    pub point: LengthVector,
}

impl SamplePoint {
    pub fn planar(&self, chart: Chart) -> [f64; 2] {
        chart_point(chart, self.point.to_f64())
    }
}

const WEIGHT_RANGE: i64 = 1 << 20;

/// Exact convex combination of the normalised vertices of `MΔ`.
fn combine(m: &IMat, w: [i64; 3]) -> LengthVector {
    let total: i64 = w.iter().sum();
    let cols: Vec<[Q; 3]> = (0..3)
        .map(|j| {
            let s: i64 = (0..3).map(|i| m[i][j]).sum();
            std::array::from_fn(|i| q(m[i][j], s))
        })
        .collect();
    let p: [Q; 3] = std::array::from_fn(|i| {
        (0..3).fold(Q::zero(), |acc, j| acc + &cols[j][i] * q(w[j], total))
    });
    LengthVector::from_array(p).expect("convex combination of simplex points")
}

/// Barycentre of every depth-`d` cylinder plus `per_cylinder − 1` interior
/// points with random positive rational weights.
pub fn sample_points(
    depth: usize,
    per_cylinder: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SamplePoint>> {
    if per_cylinder == 0 {
        return Err(Error::InvalidParams(
            "per_cylinder must be at least 1".into(),
        ));
    }
    if depth > RENDER_DEPTH_BUDGET {
        return Err(Error::Budget(format!(
            "depth {depth} exceeds the budget {RENDER_DEPTH_BUDGET}"
        )));
    }
    let chunks = exec.map_indices(1usize << depth, |i| {
        let c = prefix_cyl(i, depth);
        let mut rng = trial_rng(seed, i as u64);
        let mut pts = vec![SamplePoint {
            cylinder: i,
            point: combine(&c.m, [1, 1, 1]),
        }];
        for _ in 1..per_cylinder {
            let w = std::array::from_fn(|_| rng.random_range(1..=WEIGHT_RANGE));
            pts.push(SamplePoint {
                cylinder: i,
                point: combine(&c.m, w),
            });
        }
        pts
    });
    Ok(chunks.into_iter().flatten().collect())
}

pub fn points_csv(points: &[SamplePoint]) -> String {
    let mut out = String::from("cylinder,a,b,c,x,y\n");
    for p in points {
        let [a, b, c] = p.point.to_f64();
        let [x, y] = p.planar(Chart::Simplex);
        out.push_str(&format!(
            "{},{a:.17},{b:.17},{c:.17},{x:.17},{y:.17}\n",
            p.cylinder
        ));
    }
    out
}

/// Exact membership of a point in the open hole `M_w H Δ` for some prefix
/// `w` of length below `depth`.
pub fn in_some_hole(p: &LengthVector, depth: usize) -> bool {
    let v = p.to_array();
    let positive = |forms: &IMat| {
        forms
            .iter()
            .all(|l| (0..3).fold(Q::zero(), |acc, k| acc + &v[k] * q(l[k], 1)) > Q::zero())
    };
    let mut hit = false;
    walk(&Cyl::root(), 0, depth.saturating_sub(1), &mut |c, _| {
        if depth > 0 && !hit {
            hit = positive(&c.hole().1);
        }
    });
    hit
}

/// Exact total area of the depth-`d` cylinders in the `(b, c)` chart. Each
/// product has determinant one, so a cylinder has area `1 / (2 s1 s2 s3)`
/// with `s_j` its column sums.
pub fn surviving_area(depth: usize) -> Result<Q> {
    if depth > 16 {
        return Err(Error::Budget(format!(
            "exact area limited to depth 16, got {depth}"
        )));
    }
    let mut total = Q::zero();
    walk(&Cyl::root(), 0, depth, &mut |c, level| {
        if level == depth {
            let s = (0..3).fold(BigInt::from(2), |acc, j| {
                acc * (0..3).map(|i| c.m[i][j]).sum::<i64>()
            });
            total += Q::new(BigInt::one(), s);
        }
    });
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itm::{classify, BtParams, Classification};

    fn cfg(depth: usize, resolution: usize, chart: Chart, mode: RenderMode) -> RenderConfig {
        RenderConfig {
            depth,
            resolution,
            chart,
            mode,
        }
    }

    #[test]
    fn depth_zero_is_the_simplex() {
        for chart in [Chart::Simplex, Chart::AlphaBeta] {
            let fill = render(&cfg(0, 64, chart, RenderMode::Fill), Execution::Sequential).unwrap();
            let carve =
                render(&cfg(0, 64, chart, RenderMode::Carve), Execution::Sequential).unwrap();
            assert_eq!(fill, carve);
            // Half the square in the (α, β) chart, √3/4 of it in the simplex chart.
            let frac = fill.count() as f64 / (64.0 * 64.0);
            let want = if chart == Chart::AlphaBeta {
                0.5
            } else {
                3f64.sqrt() / 4.0
            };
            assert!((frac - want).abs() < 0.02, "{chart}: {frac}");
        }
    }

    #[test]
    fn fill_and_carve_agree() {
        for chart in [Chart::Simplex, Chart::AlphaBeta] {
            for depth in 1..=9 {
                let f = render(
                    &cfg(depth, 128, chart, RenderMode::Fill),
                    Execution::Sequential,
                )
                .unwrap();
                let c = render(
                    &cfg(depth, 128, chart, RenderMode::Carve),
                    Execution::Parallel,
                )
                .unwrap();
                assert_eq!(f, c, "{chart} depth {depth}");
            }
        }
    }

    #[test]
    fn execution_modes_agree() {
        let c = cfg(12, 96, Chart::Simplex, RenderMode::Fill);
        assert_eq!(
            render(&c, Execution::Sequential).unwrap(),
            render(&c, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn config_validation() {
        assert!(render(
            &cfg(1, 15, Chart::Simplex, RenderMode::Fill),
            Execution::Sequential
        )
        .is_err());
        assert!(render(
            &cfg(
                RENDER_DEPTH_BUDGET + 1,
                64,
                Chart::Simplex,
                RenderMode::Fill
            ),
            Execution::Sequential
        )
        .is_err());
    }

    #[test]
    fn alpha_beta_chart() {
        let v = |a: Q, b: Q, c: Q| LengthVector::new(a, b, c).unwrap();
        assert_eq!(
            chart_alpha_beta(&v(q(1, 1), q(0, 1), q(0, 1))),
            (q(0, 1), q(0, 1))
        );
        assert_eq!(
            chart_alpha_beta(&v(q(0, 1), q(0, 1), q(1, 1))),
            (q(1, 1), q(1, 1))
        );
        let p = v(q(3, 10), q(5, 10), q(2, 10));
        let (al, be) = chart_alpha_beta(&p);
        assert_eq!((al.clone(), be.clone()), (q(7, 10), q(2, 10)));
        assert_eq!(lengths_from_alpha_beta(&al, &be).unwrap(), p);
        assert!(lengths_from_alpha_beta(&q(1, 4), &q(1, 2)).is_err());
    }

    #[test]
    fn samples() {
        let s = sample_points(0, 1, 7, Execution::Sequential).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(
            s[0].point,
            LengthVector::new(q(1, 3), q(1, 3), q(1, 3)).unwrap()
        );
        let s = sample_points(6, 3, 7, Execution::Parallel).unwrap();
        assert_eq!(s.len(), 64 * 3);
        assert!(s.iter().all(|p| !in_some_hole(&p.point, 6)));
        assert_eq!(s, sample_points(6, 3, 7, Execution::Sequential).unwrap());
        assert!(sample_points(3, 0, 7, Execution::Sequential).is_err());
        let csv = points_csv(&s);
        assert_eq!(csv.lines().count(), 64 * 3 + 1);
    }

    #[test]
    fn barycentres_survive_induction() {
        for d in 0..=10 {
            for p in sample_points(d, 1, 0, Execution::Sequential).unwrap() {
                let params = BtParams::from_lengths(&p.point).unwrap();
                assert_eq!(classify(&params, d), Classification::InfiniteUpTo(d));
            }
        }
    }

    #[test]
    fn hole_points_are_detected() {
        // Centroid of the first hole.
        let p = LengthVector::new(q(1, 3), q(1, 2), q(1, 6)).unwrap();
        assert!(in_some_hole(&p, 1));
        assert!(!in_some_hole(&p, 0));
    }

    #[test]
    fn area_decreases() {
        assert_eq!(surviving_area(0).unwrap(), q(1, 2));
        // The first hole has vertices (0,1,0), (1/2,1/2,0), (1/2,0,1/2): area 1/8.
        assert_eq!(surviving_area(1).unwrap(), q(3, 8));
        let areas: Vec<Q> = (0..=10).map(|d| surviving_area(d).unwrap()).collect();
        assert!(areas.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn ppm_header() {
        let r = render(
            &cfg(2, 16, Chart::AlphaBeta, RenderMode::Fill),
            Execution::Sequential,
        )
        .unwrap();
        let bytes = r.to_ppm();
        assert!(bytes.starts_with(b"P6\n16 16\n255\n"));
        assert_eq!(bytes.len(), 13 + 16 * 16 * 3);
    }
}
