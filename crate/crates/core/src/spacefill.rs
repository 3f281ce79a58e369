//! Measure-preserving Hilbert space-filling curves, cube pavings of the
//! parameter manifold, and pushforward of integration weights from the
//! interval to the manifold.
//!
//! # Orientation convention
//!
//! The d-dimensional curve is built from the reflected Gray code with entry
//! vertex `(0,...,0)`. For `d = 2` the four level-1 quadrants are visited in
//! the order
//!
//! | leg | quadrant (x, y) | entry corner | exit corner  |
//! |-----|-----------------|--------------|--------------|
//! | 1   | (0, 0)          | (0, 0)       | (0, 1/2)     |
//! | 2   | (0, 1)          | (0, 1/2)     | (1/2, 1/2)   |
//! | 3   | (1, 1)          | (1/2, 1/2)   | (1, 1/2)     |
//! | 4   | (1, 0)          | (1, 1/2)     | (1, 0)       |
//!
//! so the curve starts at the origin and leaves through the boundary point
//! `(1, 0)`. The order-m approximant is the polyline through the centers of
//! the `2^(dm)` level-m cells in visit order, pinned to the entry corner at
//! `t = 0` and to the exit corner at `t = 1`. Approximants of consecutive
//! orders stay inside the same closed level-m cell, hence differ by at most
//! `sqrt(d) * 2^-m` in sup distance. Reference values under this convention:
//! `c_1(1/8) = (1/4, 1/4)` (the center of the first quadrant) and
//! `c_2(1/8) = (3/8, 1/4)`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

/// Rotate the low `d` bits of `b` left by `k`.
#[inline]
fn rol(b: u32, k: u32, d: u32) -> u32 {
    let k = k % d;
    let mask = (1u32 << d) - 1;
    if k == 0 {
        b & mask
    } else {
        ((b << k) | ((b & mask) >> (d - k))) & mask
    }
}

/// Entry vertex of sub-orthant `i` in the Gray-code construction.
#[inline]
fn entry_vertex(i: u32) -> u32 {
    if i == 0 {
        0
    } else {
        gray(2 * ((i - 1) / 2))
    }
}

/// Intra-orthant direction of sub-orthant `i`.
#[inline]
fn intra_direction(i: u32, d: u32) -> u32 {
    if i == 0 {
        0
    } else if i.is_multiple_of(2) {
        (i - 1).trailing_ones() % d
    } else {
        i.trailing_ones() % d
    }
}

/// A dyadic cell of the unit cube: level `k` and per-axis coordinates in
/// `[0, 2^k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicCell {
    pub level: u32,
    pub coords: Vec<u64>,
}

impl DyadicCell {
    pub fn new(level: u32, coords: Vec<u64>) -> Self {
        DyadicCell { level, coords }
    }

    /// Lexicographic index with axis 0 fastest.
    pub fn lex_index(&self) -> u64 {
        let mut idx = 0u64;
        for j in (0..self.coords.len()).rev() {
            idx = (idx << self.level) | self.coords[j];
        }
        idx
    }
}

/// Exact-rational measure report for one dyadic cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellMeasure {
    pub level: u32,
    pub cell_index: u64,
    pub measure_num: u64,
    pub measure_den: u64,
}

/// The d-dimensional Hilbert curve approximant of a fixed recursion depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertCurve {
    pub dimension: u32,
    pub order: u32,
}

/// Cell data produced by one descent: lattice coordinates plus the local
/// entry vertex and travel axis, all in the global frame.
#[derive(Debug, Clone)]
pub struct CellFrame {
    pub coords: Vec<u64>,
    entry_bits: u32,
    travel_axis: u32,
}

impl CellFrame {
    /// Entry corner in lattice units of `2^-order` (components in `[0, 2^order]`).
    pub fn entry_corner(&self) -> Vec<u64> {
        self.coords
            .iter()
            .enumerate()
            .map(|(j, &c)| c + ((self.entry_bits >> j) & 1) as u64)
            .collect()
    }

    /// Exit corner in the same lattice units.
    pub fn exit_corner(&self) -> Vec<u64> {
        let exit_bits = self.entry_bits ^ (1 << self.travel_axis);
        self.coords
            .iter()
            .enumerate()
            .map(|(j, &c)| c + ((exit_bits >> j) & 1) as u64)
            .collect()
    }
}

impl HilbertCurve {
    pub fn new(dimension: u32, order: u32) -> Result<Self> {
        if dimension < 1 {
            return Err(Error::Config("curve dimension must be >= 1".into()));
        }
        if order < 1 {
            return Err(Error::Config("curve order must be >= 1".into()));
        }
        if dimension as u64 * order as u64 > 60 {
            return Err(Error::Config(format!(
                "d*m = {} exceeds the 60-bit index budget",
                dimension * order
            )));
        }
        Ok(HilbertCurve { dimension, order })
    }

    /// Number of level-`order` cells, `2^(d*m)`.
    pub fn n_cells(&self) -> u64 {
        1u64 << (self.dimension * self.order)
    }

    /// Descend the digits of `h`, producing the visited cell and its frame.
    pub fn cell_frame(&self, h: u64) -> CellFrame {
        let d = self.dimension;
        let mask = (1u64 << d) - 1;
        let mut e: u32 = 0;
        let mut dir: u32 = 0;
        let mut coords = vec![0u64; d as usize];
        for lev in (0..self.order).rev() {
            let w = ((h >> (lev * d)) & mask) as u32;
            let l = rol(gray(w), dir + 1, d) ^ e;
            for (j, c) in coords.iter_mut().enumerate() {
                *c |= (((l >> j) & 1) as u64) << lev;
            }
            e ^= rol(entry_vertex(w), dir + 1, d);
            dir = (dir + intra_direction(w, d) + 1) % d;
        }
        CellFrame {
            coords,
            entry_bits: e,
            travel_axis: dir,
        }
    }

    /// Lattice coordinates of the h-th visited level-`order` cell.
    pub fn cell_coords(&self, h: u64) -> Vec<u64> {
        self.cell_frame(h).coords
    }

    /// Global exit corner of the whole curve (entry is always the origin).
    pub fn exit_corner(&self) -> Vec<f64> {
        let scale = (1u64 << self.order) as f64;
        self.cell_frame(self.n_cells() - 1)
            .exit_corner()
            .iter()
            .map(|&c| c as f64 / scale)
            .collect()
    }

    /// Order-m approximant value at `t`: the center polyline through the
    /// level-m cells in visit order, pinned to the curve's entry corner at
    /// `t = 0` and exit corner at `t = 1`.
    pub fn point(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TOutOfRange(t));
        }
        let n = self.n_cells();
        let scaled = t * n as f64;
        let h = (scaled.floor() as u64).min(n - 1);
        let frac = scaled - h as f64;
        let side = (1u64 << self.order) as f64;
        let center = |h: u64| -> Vec<f64> {
            self.cell_coords(h)
                .iter()
                .map(|&c| (c as f64 + 0.5) / side)
                .collect()
        };
        let c = center(h);
        let lerp = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
        };
        if frac <= 0.5 {
            let prev: Vec<f64> = if h == 0 {
                vec![0.0; self.dimension as usize]
            } else {
                let pc = center(h - 1);
                pc.iter().zip(&c).map(|(a, b)| 0.5 * (a + b)).collect()
            };
            Ok(lerp(&prev, &c, 2.0 * frac))
        } else {
            let next: Vec<f64> = if h == n - 1 {
                self.cell_frame(h)
                    .exit_corner()
                    .iter()
                    .map(|&v| v as f64 / side)
                    .collect()
            } else {
                let nc = center(h + 1);
                nc.iter().zip(&c).map(|(a, b)| 0.5 * (a + b)).collect()
            };
            Ok(lerp(&c, &next, 2.0 * frac - 1.0))
        }
    }

    /// Exact preimage measure of a dyadic cell of level `k <= order`, by
    /// enumerating the level-m intervals whose cells land inside it.
    pub fn preimage_measure(&self, cell: &DyadicCell) -> Result<Ratio<u64>> {
        if cell.level > self.order {
            return Err(Error::LevelExceedsOrder {
                level: cell.level,
                order: self.order,
            });
        }
        if cell.coords.len() != self.dimension as usize {
            return Err(Error::Config("cell dimension mismatch".into()));
        }
        let shift = self.order - cell.level;
        let mut count = 0u64;
        for h in 0..self.n_cells() {
            let coords = self.cell_coords(h);
            if coords
                .iter()
                .zip(&cell.coords)
                .all(|(&c, &q)| (c >> shift) == q)
            {
                count += 1;
            }
        }
        Ok(Ratio::new(count, self.n_cells()))
    }

    /// One-pass histogram: preimage interval counts for every level-k cell,
    /// indexed lexicographically (axis 0 fastest).
    pub fn preimage_histogram(&self, level: u32) -> Result<Vec<u64>> {
        if level > self.order {
            return Err(Error::LevelExceedsOrder {
                level,
                order: self.order,
            });
        }
        let d = self.dimension;
        let shift = self.order - level;
        let mut counts = vec![0u64; 1usize << (d * level)];
        for h in 0..self.n_cells() {
            let coords = self.cell_coords(h);
            let mut idx = 0u64;
            for j in (0..d as usize).rev() {
                idx = (idx << level) | (coords[j] >> shift);
            }
            counts[idx as usize] += 1;
        }
        Ok(counts)
    }

    /// Cell-measure reports for every cell of the given level, as exact
    /// rationals in reduced form.
    pub fn measure_report(&self, level: u32) -> Result<Vec<CellMeasure>> {
        let counts = self.preimage_histogram(level)?;
        Ok(counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let r = Ratio::new(c, self.n_cells());
                CellMeasure {
                    level,
                    cell_index: i as u64,
                    measure_num: *r.numer(),
                    measure_den: *r.denom(),
                }
            })
            .collect())
    }
}

/// A piecewise-constant weight on the interval `[0,1]` with values in `[-1,1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseConstantWeight {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantWeight {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::BadWeight(
                "need n+1 breakpoints for n values".into(),
            ));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::BadWeight("breakpoints must span [0,1]".into()));
        }
        if !breakpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::BadWeight(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::BadWeight("values must lie in [-1,1]".into()));
        }
        Ok(PiecewiseConstantWeight {
            breakpoints,
            values,
        })
    }

    /// Uniform pieces `[i/n, (i+1)/n)`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let breakpoints = (0..=n).map(|i| i as f64 / n as f64).collect();
        Self::new(breakpoints, values)
    }

    pub fn constant(v: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![v])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&t).unwrap())
        {
            Ok(i) => self.values[i.min(self.values.len() - 1)],
            Err(i) => self.values[i - 1],
        }
    }

    /// Exact integral of the weight over `[a, b]`.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let lo = self.breakpoints[i].max(a);
            let hi = self.breakpoints[i + 1].min(b);
            if hi > lo {
                total += v * (hi - lo);
            }
        }
        total
    }
}

/// A weight that is constant on the dyadic level-k cells of the unit cube,
/// indexed lexicographically (axis 0 fastest).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellWeight {
    pub dimension: u32,
    pub level: u32,
    pub values: Vec<f64>,
    /// Set when the source weight was not aligned with the dyadic structure
    /// and a conditional average was taken instead of an exact pushforward.
    pub averaged: bool,
}

impl CellWeight {
    pub fn value_at(&self, point: &[f64]) -> f64 {
        let side = 1u64 << self.level;
        let mut idx = 0u64;
        for j in (0..self.dimension as usize).rev() {
            let c = ((point[j].clamp(0.0, 1.0) * side as f64).floor() as u64).min(side - 1);
            idx = (idx << self.level) | c;
        }
        self.values[idx as usize]
    }
}

/// Pushforward of an interval weight along the curve: the weight `a_T` with
/// `int_I a (g o c) du = int_T a_T g dt` for integrable `g`.
///
/// When every breakpoint of `a` is a dyadic rational of level `<= d*m` the
/// result is exact: each level-`dm` interval maps onto one level-m cell and
/// carries its value across. Otherwise each cell receives the conditional
/// average of `a` over its preimage interval and the result is flagged.
pub fn pushforward_weight(
    alpha: &PiecewiseConstantWeight,
    curve: &HilbertCurve,
) -> CellWeight {
    let n = curve.n_cells();
    let aligned = alpha.breakpoints().iter().all(|&b| {
        let scaled = b * n as f64;
        scaled == scaled.round()
    });
    let mut values = vec![0.0; n as usize];
    for h in 0..n {
        let lo = h as f64 / n as f64;
        let hi = (h + 1) as f64 / n as f64;
        let v = if aligned {
            alpha.value_at((h as f64 + 0.5) / n as f64)
        } else {
            alpha.integral_over(lo, hi) * n as f64
        };
        let cell = DyadicCell::new(curve.order, curve.cell_coords(h));
        values[cell.lex_index() as usize] = v;
    }
    CellWeight {
        dimension: curve.dimension,
        level: curve.order,
        values,
        averaged: !aligned,
    }
}

/// `|quadrature(f on T) - quadrature(f o c on I)|` with midpoint rules on
/// both sides. `n_samples` must be a power of two; the T-side uses the
/// aligned product grid with `2^ceil(p/d)` cells per axis.
pub fn change_of_variables_residual<F: Fn(&[f64]) -> f64>(
    f: F,
    curve: &HilbertCurve,
    n_samples: u64,
) -> Result<f64> {
    if !n_samples.is_power_of_two() {
        return Err(Error::Config("n_samples must be a power of two".into()));
    }
    let d = curve.dimension as usize;
    let mut i_side = 0.0;
    for i in 0..n_samples {
        let u = (i as f64 + 0.5) / n_samples as f64;
        i_side += f(&curve.point(u)?);
    }
    i_side /= n_samples as f64;

    let p = n_samples.trailing_zeros();
    let side_level = p.div_ceil(curve.dimension);
    let side = 1u64 << side_level;
    let mut t_side = 0.0;
    let mut idx = vec![0u64; d];
    let mut point = vec![0.0; d];
    loop {
        for j in 0..d {
            point[j] = (idx[j] as f64 + 0.5) / side as f64;
        }
        t_side += f(&point);
        let mut j = 0;
        loop {
            if j == d {
                break;
            }
            idx[j] += 1;
            if idx[j] < side {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == d {
            break;
        }
    }
    t_side /= (side as f64).powi(d as i32);
    Ok((t_side - i_side).abs())
}

/// Signed-permutation transform of the unit cube: output axis `j` reads
/// input axis `perm[j]`, reflected when `flip[j]` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedPerm {
    pub perm: Vec<usize>,
    pub flip: Vec<bool>,
}

impl SignedPerm {
    pub fn identity(d: usize) -> Self {
        SignedPerm {
            perm: (0..d).collect(),
            flip: vec![false; d],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.perm
            .iter()
            .zip(&self.flip)
            .map(|(&p, &f)| if f { 1.0 - x[p] } else { x[p] })
            .collect()
    }

    fn all(d: usize) -> Vec<SignedPerm> {
        fn perms(items: &[usize]) -> Vec<Vec<usize>> {
            if items.len() <= 1 {
                return vec![items.to_vec()];
            }
            let mut out = Vec::new();
            for (i, &head) in items.iter().enumerate() {
                let rest: Vec<usize> = items
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &v)| v)
                    .collect();
                for mut tail in perms(&rest) {
                    tail.insert(0, head);
                    out.push(tail);
                }
            }
            out
        }
        let mut out = Vec::new();
        for perm in perms(&(0..d).collect::<Vec<_>>()) {
            for mask in 0..(1u32 << d) {
                let flip = (0..d).map(|j| (mask >> j) & 1 == 1).collect();
                out.push(SignedPerm {
                    perm: perm.clone(),
                    flip,
                });
            }
        }
        out
    }
}

/// One axis-aligned box of a paving, with corners inside the unit cube.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PavingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl PavingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        PavingBox { lo, hi }
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| b - a)
            .product()
    }

    fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(p)
            .all(|((a, b), x)| *x >= a - tol && *x <= b + tol)
    }
}

/// A paving of the parameter manifold `T = [0,1]^d` (optionally a torus) by
/// axis-aligned boxes in adjacency order, with the measure-preserving
/// normalization maps realized as signed permutations plus diagonal scalings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubePaving {
    pub dimension: usize,
    pub boxes: Vec<PavingBox>,
    pub torus: bool,
}

impl CubePaving {
    pub fn new(dimension: usize, boxes: Vec<PavingBox>, torus: bool) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::BadPaving("no boxes".into()));
        }
        for b in &boxes {
            if b.lo.len() != dimension || b.hi.len() != dimension {
                return Err(Error::BadPaving("box dimension mismatch".into()));
            }
            if b.lo.iter().zip(&b.hi).any(|(a, c)| a >= c) {
                return Err(Error::BadPaving("degenerate box".into()));
            }
        }
        let total: f64 = boxes.iter().map(|b| b.volume()).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadPaving(format!(
                "volumes sum to {total}, expected 1"
            )));
        }
        Ok(CubePaving {
            dimension,
            boxes,
            torus,
        })
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.boxes.iter().map(|b| b.volume()).collect()
    }
}

/// The concatenated measure-preserving space-filling curve of a paving.
#[derive(Debug, Clone)]
pub struct PavingCurve {
    pub paving: CubePaving,
    pub curve: HilbertCurve,
    pub transforms: Vec<SignedPerm>,
    cumulative: Vec<f64>,
}

/// Concatenate per-box Hilbert curves into one measure-preserving curve on
/// `T`, choosing box orientations so consecutive endpoints match.
pub fn concat_paving_curve(paving: &CubePaving, order: u32) -> Result<PavingCurve> {
    let d = paving.dimension;
    let curve = HilbertCurve::new(d as u32, order)?;
    let exit_unit = curve.exit_corner();
    let entry_unit = vec![0.0f64; d];
    let candidates = SignedPerm::all(d);

    let map_point = |b: &PavingBox, f: &SignedPerm, p: &[f64]| -> Vec<f64> {
        let q = f.apply(p);
        b.lo.iter()
            .zip(&b.hi)
            .zip(&q)
            .map(|((lo, hi), x)| lo + (hi - lo) * x)
            .collect()
    };
    let same_point = |p: &[f64], q: &[f64]| -> bool {
        p.iter().zip(q).all(|(a, b)| {
            let mut diff = (a - b).abs();
            if paving.torus {
                diff = diff.min((diff - 1.0).abs());
            }
            diff < 1e-12
        })
    };

    // depth-first search over orientations with endpoint matching
    type MapPoint<'a> = &'a dyn Fn(&PavingBox, &SignedPerm, &[f64]) -> Vec<f64>;
    type SamePoint<'a> = &'a dyn Fn(&[f64], &[f64]) -> bool;
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        k: usize,
        prev_exit: Option<Vec<f64>>,
        paving: &CubePaving,
        candidates: &[SignedPerm],
        entry_unit: &[f64],
        exit_unit: &[f64],
        map_point: MapPoint,
        same_point: SamePoint,
        chosen: &mut Vec<SignedPerm>,
    ) -> bool {
        if k == paving.boxes.len() {
            return true;
        }
        let b = &paving.boxes[k];
        for f in candidates {
            let entry = map_point(b, f, entry_unit);
            if let Some(prev) = &prev_exit {
                if !same_point(prev, &entry) {
                    continue;
                }
                // matched endpoints must actually touch the shared boundary
                if !paving.torus && !paving.boxes[k - 1].contains(&entry, 1e-12) {
                    continue;
                }
            }
            let exit = map_point(b, f, exit_unit);
            chosen.push(f.clone());
            if dfs(
                k + 1,
                Some(exit),
                paving,
                candidates,
                entry_unit,
                exit_unit,
                map_point,
                same_point,
                chosen,
            ) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    let mut chosen = Vec::new();
    if !dfs(
        0,
        None,
        paving,
        &candidates,
        &entry_unit,
        &exit_unit,
        &map_point,
        &same_point,
        &mut chosen,
    ) {
        return Err(Error::EndpointMismatch(0, paving.boxes.len().min(1)));
    }

    let mut cumulative = Vec::with_capacity(paving.boxes.len() + 1);
    cumulative.push(0.0);
    for b in &paving.boxes {
        cumulative.push(cumulative.last().unwrap() + b.volume());
    }
    *cumulative.last_mut().unwrap() = 1.0;

    Ok(PavingCurve {
        paving: paving.clone(),
        curve,
        transforms: chosen,
        cumulative,
    })
}

impl PavingCurve {
    /// Index of the box whose parameter range contains `t`.
    pub fn box_of(&self, t: f64) -> usize {
        let n = self.paving.boxes.len();
        for k in 0..n {
            if t < self.cumulative[k + 1] {
                return k;
            }
        }
        n - 1
    }

    pub fn point(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TOutOfRange(t));
        }
        let k = self.box_of(t);
        let v = self.cumulative[k + 1] - self.cumulative[k];
        let u = ((t - self.cumulative[k]) / v).clamp(0.0, 1.0);
        let p = self.curve.point(u)?;
        let b = &self.paving.boxes[k];
        let q = self.transforms[k].apply(&p);
        Ok(b
            .lo
            .iter()
            .zip(&b.hi)
            .zip(&q)
            .map(|((lo, hi), x)| lo + (hi - lo) * x)
            .collect())
    }

    /// Exact preimage measure of box `k` from the level-`l` interval grid:
    /// counts the dyadic intervals fully inside the box's parameter range.
    /// Requires the cumulative volumes to be dyadic of level `<= l`.
    pub fn box_preimage_measure(&self, k: usize, level: u32) -> Result<Ratio<u64>> {
        let n = 1u64 << level;
        let lo = self.cumulative[k];
        let hi = self.cumulative[k + 1];
        for c in [lo, hi] {
            let scaled = c * n as f64;
            if scaled != scaled.round() {
                return Err(Error::Misaligned(format!(
                    "cumulative volume {c} not dyadic at level {level}"
                )));
            }
        }
        let count = (hi * n as f64).round() as u64 - (lo * n as f64).round() as u64;
        Ok(Ratio::new(count, n))
    }

    /// `|quadrature(f on T) - quadrature(f o c on I)|` with `n_samples`
    /// midpoint samples on the interval side and an equally fine product
    /// midpoint grid on the T side.
    pub fn change_of_variables_residual<F: Fn(&[f64]) -> f64>(
        &self,
        f: F,
        n_samples: u64,
    ) -> Result<f64> {
        let d = self.paving.dimension;
        let mut i_side = 0.0;
        for i in 0..n_samples {
            let u = (i as f64 + 0.5) / n_samples as f64;
            i_side += f(&self.point(u)?);
        }
        i_side /= n_samples as f64;

        let side = (n_samples as f64).powf(1.0 / d as f64).round() as u64;
        let side = side.max(2);
        let mut t_side = 0.0;
        let mut idx = vec![0u64; d];
        let mut point = vec![0.0; d];
        loop {
            for j in 0..d {
                point[j] = (idx[j] as f64 + 0.5) / side as f64;
            }
            t_side += f(&point);
            let mut j = 0;
            loop {
                if j == d {
                    break;
                }
                idx[j] += 1;
                if idx[j] < side {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == d {
                break;
            }
        }
        t_side /= (side as f64).powi(d as i32);
        Ok((t_side - i_side).abs())
    }
}
