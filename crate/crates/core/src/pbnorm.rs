//! Evaluation of the Poisson bracket invariant of a partition: the
//! antisymmetric bracket matrix field `P_ij(x) = w_i w_j {F_i, F_j}(x)` and
//! the maximization of `|a' P(x) b|` over the box `[-1,1]^N`.
//!
//! For a fixed sign vector `a` the optimal `b` is `sign(a'P)`, so the box
//! supremum is `max_a ||a' P||_1` over `a in {-1,1}^N` -- computed exactly
//! by Gray-code enumeration up to a size cap, or bounded from below by
//! seeded alternating ascent past it. Grid points are processed in
//! descending order of the cheap bound `sum |P_ij|` with incumbent pruning.
//!
//! Partitions satisfy `sum_j w_j F_j = 1`, hence every row of the true
//! bracket matrix sums to zero. The builder enforces this constraint by
//! deriving the last row from the others, which removes the O(eps/h)
//! finite-difference noise that would otherwise contaminate structurally
//! zero entries (the two-set case most prominently).

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::CoarseGrained;
use crate::error::{Error, Result};
use crate::partition::{BicoverPartition, ContinuousPartition, DiscretePartition, SquarePartition};
use crate::surface::{ChartedSurface, FdOrder, ScalarField};

/// The antisymmetric bracket matrix field of a weighted set family, stored
/// as per-set gradient tables and assembled pointwise on demand.
pub struct BracketMatrixField {
    surface: Arc<ChartedSurface>,
    n: usize,
    weights: Vec<f64>,
    gx: Vec<ScalarField>,
    gy: Vec<ScalarField>,
    /// Derive the last row/column from the partition row-sum-zero identity.
    partition_constraint: bool,
    pub band_contaminated: bool,
}

impl BracketMatrixField {
    /// Build from fields and their quadrature weights.
    pub fn build(
        fields: &[ScalarField],
        weights: &[f64],
        order: FdOrder,
        partition_constraint: bool,
    ) -> Result<Self> {
        if fields.is_empty() || fields.len() != weights.len() {
            return Err(Error::GridMismatch);
        }
        let surface = fields[0].surface().clone();
        if !fields.iter().all(|f| f.surface().same_grid(&surface)) {
            return Err(Error::GridMismatch);
        }
        let band_contaminated = fields.iter().any(|f| f.has_band_support());
        let gx: Vec<ScalarField> = fields.par_iter().map(|f| f.dx(order)).collect();
        let gy: Vec<ScalarField> = fields.par_iter().map(|f| f.dy(order)).collect();
        Ok(BracketMatrixField {
            surface,
            n: fields.len(),
            weights: weights.to_vec(),
            gx,
            gy,
            partition_constraint,
            band_contaminated,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn surface(&self) -> &Arc<ChartedSurface> {
        &self.surface
    }

    /// Assemble the N x N matrix at a flat grid index (row-major N*i + j).
    pub fn matrix_at(&self, idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.n * self.n];
        self.matrix_into(idx, &mut p);
        p
    }

    /// Assemble into a caller-provided buffer of length N*N.
    pub fn matrix_into(&self, idx: usize, p: &mut [f64]) {
        let n = self.n;
        assert_eq!(p.len(), n * n);
        p.fill(0.0);
        let (_, iy) = self.surface.coords_of(idx);
        if self.surface.is_masked_row(iy) {
            return;
        }
        let direct = if self.partition_constraint && n > 1 {
            n - 1
        } else {
            n
        };
        for i in 0..direct {
            for j in (i + 1)..direct {
                let v = self.weights[i]
                    * self.weights[j]
                    * (self.gx[i].data()[idx] * self.gy[j].data()[idx]
                        - self.gy[i].data()[idx] * self.gx[j].data()[idx]);
                p[i * n + j] = v;
                p[j * n + i] = -v;
            }
        }
        if self.partition_constraint && n > 1 {
            let last = n - 1;
            for i in 0..last {
                let mut s = 0.0;
                for j in 0..last {
                    s += p[i * n + j];
                }
                p[i * n + last] = -s;
                p[last * n + i] = s;
            }
        }
    }

    /// Cheap upper bound on the box supremum at a grid point.
    pub fn abs_sum_at(&self, idx: usize) -> f64 {
        self.matrix_at(idx).iter().map(|v| v.abs()).sum()
    }
}

/// Exact box supremum of the bilinear form of an antisymmetric matrix:
/// `max over a, b in [-1,1]^N of a' P b`, with maximizing sign vectors.
/// Enumerates `a in {-1,1}^N` with `a_0` pinned (sign-flip symmetry) in
/// Gray-code order, maintaining `v = a' P` incrementally.
pub fn inf1_norm_exact(p: &[f64], n: usize) -> (f64, Vec<i8>, Vec<i8>) {
    assert_eq!(p.len(), n * n);
    if n == 0 {
        return (0.0, vec![], vec![]);
    }
    let mut a = vec![1i8; n];
    let mut v: Vec<f64> = (0..n).map(|j| (0..n).map(|i| p[i * n + j]).sum()).collect();
    let norm1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    let mut best = norm1(&v);
    let mut best_a = a.clone();
    let steps = 1u64 << (n - 1);
    let mut gray_prev = 0u64;
    for s in 1..steps {
        let gray = s ^ (s >> 1);
        let flipped = (gray ^ gray_prev).trailing_zeros() as usize + 1; // skip pinned a_0
        gray_prev = gray;
        let coeff = -2.0 * a[flipped] as f64;
        a[flipped] = -a[flipped];
        for j in 0..n {
            v[j] += coeff * p[flipped * n + j];
        }
        let val = norm1(&v);
        if val > best {
            best = val;
            best_a = a.clone();
        }
    }
    // recompute the witness pair from scratch
    let vb: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| best_a[i] as f64 * p[i * n + j]).sum())
        .collect();
    let best_b: Vec<i8> = vb.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect();
    let value: f64 = vb.iter().map(|x| x.abs()).sum();
    (value, best_a, best_b)
}

/// Exact maximization guarded by the size cap.
pub fn inf1_norm_exact_capped(p: &[f64], n: usize, cap: usize) -> Result<(f64, Vec<i8>, Vec<i8>)> {
    if n > cap {
        return Err(Error::ExactSizeExceeded { n, cap });
    }
    Ok(inf1_norm_exact(p, n))
}

/// Value of a sign vector `a`: `||a' P||_1`.
fn a_value(p: &[f64], n: usize, a: &[i8]) -> f64 {
    (0..n)
        .map(|j| {
            (0..n)
                .map(|i| a[i] as f64 * p[i * n + j])
                .sum::<f64>()
                .abs()
        })
        .sum()
}

/// Alternating sign ascent to a fixpoint, then single-flip polish: any
/// one-coordinate flip that improves restarts the alternation. Terminates
/// at a point where neither the alternation step nor any single flip gains.
fn ascend(p: &[f64], n: usize, a: &mut [i8], polish: bool) -> (f64, Vec<i8>) {
    let mut value = f64::NEG_INFINITY;
    let mut b = vec![1i8; n];
    'outer: loop {
        for _ in 0..200 {
            // optimal b for fixed a
            let va: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|i| a[i] as f64 * p[i * n + j]).sum())
                .collect();
            for (bj, x) in b.iter_mut().zip(&va) {
                *bj = if *x < 0.0 { -1 } else { 1 };
            }
            // optimal a for fixed b
            let vb: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| p[i * n + j] * b[j] as f64).sum())
                .collect();
            for (ai, x) in a.iter_mut().zip(&vb) {
                *ai = if *x < 0.0 { -1 } else { 1 };
            }
            let new_value: f64 = vb.iter().map(|x| x.abs()).sum();
            if new_value <= value {
                break;
            }
            value = new_value;
        }
        if polish {
            for i in 0..n {
                a[i] = -a[i];
                let flipped = a_value(p, n, a);
                if flipped > value + 1e-15 * (1.0 + value) {
                    value = flipped;
                    continue 'outer;
                }
                a[i] = -a[i];
            }
        }
        break;
    }
    // recompute the b witness for the final a
    let va: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a[i] as f64 * p[i * n + j]).sum())
        .collect();
    for (bj, x) in b.iter_mut().zip(&va) {
        *bj = if *x < 0.0 { -1 } else { 1 };
    }
    (va.iter().map(|x| x.abs()).sum(), b)
}

/// Seeded multi-restart alternating sign ascent. Returns a certified lower
/// bound on the exact box supremum together with the achieving signs.
/// `warm_starts` are tried before the random restarts.
pub fn inf1_norm_heuristic(
    p: &[f64],
    n: usize,
    restarts: usize,
    seed: u64,
    warm_starts: &[Vec<i8>],
) -> (f64, Vec<i8>, Vec<i8>) {
    inf1_norm_heuristic_opts(p, n, restarts, seed, warm_starts, true)
}

/// Heuristic with the single-flip polish optional: without it each start
/// costs only a few alternations, which the optimizer's inner loop uses.
pub fn inf1_norm_heuristic_opts(
    p: &[f64],
    n: usize,
    restarts: usize,
    seed: u64,
    warm_starts: &[Vec<i8>],
    polish: bool,
) -> (f64, Vec<i8>, Vec<i8>) {
    assert_eq!(p.len(), n * n);
    if n == 0 {
        return (0.0, vec![], vec![]);
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_a = vec![1i8; n];
    let mut best_b = vec![1i8; n];
    let try_start = |mut a: Vec<i8>, best: &mut f64, ba: &mut Vec<i8>, bb: &mut Vec<i8>| {
        let (value, b) = ascend(p, n, &mut a, polish);
        if value > *best {
            *best = value;
            *ba = a;
            *bb = b;
        }
    };
    try_start(vec![1i8; n], &mut best, &mut best_a, &mut best_b);
    for w in warm_starts {
        if w.len() == n {
            try_start(w.clone(), &mut best, &mut best_a, &mut best_b);
        }
    }
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let a: Vec<i8> = (0..n)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        try_start(a, &mut best, &mut best_a, &mut best_b);
    }
    (best.max(0.0), best_a, best_b)
}

/// Method selection for the per-point maximization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PbMethod {
    /// Exact when `n <= n_exact_cap`, heuristic otherwise.
    #[default]
    Auto,
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PbConfig {
    pub method: PbMethod,
    /// Largest N handled by exact enumeration (2^(N-1) sign vectors).
    pub n_exact_cap: usize,
    pub restarts: usize,
    pub seed: u64,
    pub fd_order: FdOrder,
    /// Run the single-flip polish inside the heuristic ascent.
    #[serde(default = "default_polish")]
    pub polish: bool,
}

fn default_polish() -> bool {
    true
}

impl Default for PbConfig {
    fn default() -> Self {
        PbConfig {
            method: PbMethod::Auto,
            n_exact_cap: 16,
            restarts: 32,
            seed: 0,
            fd_order: FdOrder::Two,
            polish: true,
        }
    }
}

/// The computed invariant value with its certificates and witnesses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PbReport {
    pub value: f64,
    pub a: Vec<i8>,
    pub b: Vec<i8>,
    /// Grid indices of the maximizing point.
    pub argmax: (usize, usize),
    /// Chart coordinates of the maximizing point.
    pub argmax_point: [f64; 2],
    /// "exact" or "heuristic(restarts=k)".
    pub method: String,
    pub n_sets: usize,
    /// Set when the bracket matrix vanished at every grid point.
    pub zero_certificate: bool,
    /// Set when some field has support inside a polar band.
    pub band_contaminated: bool,
    pub elapsed_ms: f64,
}

impl PbReport {
    /// Recompute `|a' P(x*) b|` from the stored witnesses.
    pub fn recompute_value(&self, field: &BracketMatrixField) -> f64 {
        let idx = field
            .surface()
            .idx(self.argmax.0, self.argmax.1);
        let p = field.matrix_at(idx);
        let n = self.n_sets;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += self.a[i] as f64 * p[i * n + j] * self.b[j] as f64;
            }
        }
        total.abs()
    }
}

/// Maximize the box-sup of the bracket matrix field over all grid points.
/// `warm_starts` seed the heuristic (and are ignored by the exact path).
pub fn pb_of_sets(
    fields: &[ScalarField],
    weights: &[f64],
    partition_constraint: bool,
    cfg: &PbConfig,
    warm_starts: &[Vec<i8>],
) -> Result<PbReport> {
    let start = Instant::now();
    let matrix = BracketMatrixField::build(fields, weights, cfg.fd_order, partition_constraint)?;
    let report = pb_of_matrix_field(&matrix, cfg, warm_starts, start)?;
    Ok(report)
}

fn pb_of_matrix_field(
    matrix: &BracketMatrixField,
    cfg: &PbConfig,
    warm_starts: &[Vec<i8>],
    start: Instant,
) -> Result<PbReport> {
    let n = matrix.n();
    let surface = matrix.surface().clone();
    let use_exact = match cfg.method {
        PbMethod::Exact => {
            if n > cfg.n_exact_cap {
                return Err(Error::ExactSizeExceeded {
                    n,
                    cap: cfg.n_exact_cap,
                });
            }
            true
        }
        PbMethod::Heuristic => false,
        PbMethod::Auto => n <= cfg.n_exact_cap,
    };

    // cheap bound pass, parallel over grid points with per-thread buffers
    let mut bounds: Vec<(f64, usize)> = (0..surface.len())
        .into_par_iter()
        .map_init(
            || vec![0.0f64; n * n],
            |buf, idx| {
                matrix.matrix_into(idx, buf);
                (buf.iter().map(|v| v.abs()).sum::<f64>(), idx)
            },
        )
        .collect();

    let all_zero = bounds.iter().all(|&(b, _)| b == 0.0);
    if all_zero {
        return Ok(PbReport {
            value: 0.0,
            a: vec![1; n],
            b: vec![1; n],
            argmax: (0, 0),
            argmax_point: [surface.xs(0), surface.ys(0)],
            method: "exact".into(),
            n_sets: n,
            zero_certificate: true,
            band_contaminated: matrix.band_contaminated,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }

    // process points best-bound-first with incumbent pruning
    bounds.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut incumbent = f64::NEG_INFINITY;
    let mut best: Option<(f64, Vec<i8>, Vec<i8>, usize)> = None;
    let mut warm: Vec<Vec<i8>> = warm_starts.to_vec();
    for &(bound, idx) in &bounds {
        if bound <= incumbent {
            break;
        }
        let p = matrix.matrix_at(idx);
        let (value, a, b) = if use_exact {
            inf1_norm_exact(&p, n)
        } else {
            inf1_norm_heuristic_opts(&p, n, cfg.restarts, cfg.seed, &warm, cfg.polish)
        };
        if value > incumbent {
            incumbent = value;
            if !use_exact {
                warm.push(a.clone());
            }
            best = Some((value, a, b, idx));
        }
    }
    let (value, a, b, idx) = best.expect("nonzero bound list");
    let (ix, iy) = surface.coords_of(idx);
    Ok(PbReport {
        value,
        a,
        b,
        argmax: (ix, iy),
        argmax_point: [surface.xs(ix), surface.ys(iy)],
        method: if use_exact {
            "exact".into()
        } else {
            format!("heuristic(restarts={})", cfg.restarts)
        },
        n_sets: n,
        zero_certificate: false,
        band_contaminated: matrix.band_contaminated,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Bracket matrix of a discrete partition.
pub fn bracket_matrix_discrete(
    p: &DiscretePartition,
    order: FdOrder,
) -> Result<BracketMatrixField> {
    BracketMatrixField::build(p.fields(), &p.weights(), order, true)
}

/// Bracket matrix of a continuous partition (quadrature weights absorbed).
pub fn bracket_matrix_continuous(
    p: &ContinuousPartition,
    order: FdOrder,
) -> Result<BracketMatrixField> {
    BracketMatrixField::build(p.fields(), &p.weights(), order, true)
}

pub fn pb_of_discrete(p: &DiscretePartition, cfg: &PbConfig) -> Result<PbReport> {
    pb_of_sets(p.fields(), &p.weights(), true, cfg, &[])
}

pub fn pb_of_continuous(p: &ContinuousPartition, cfg: &PbConfig) -> Result<PbReport> {
    pb_of_sets(p.fields(), &p.weights(), true, cfg, &[])
}

pub fn pb_of_square(p: &SquarePartition, cfg: &PbConfig) -> Result<PbReport> {
    pb_of_sets(p.fields(), &p.weights(), true, cfg, &[])
}

/// Pb of the bicover extension through its expanded (u, x) set list.
pub fn pb_of_bicover(p: &BicoverPartition, cfg: &PbConfig) -> Result<PbReport> {
    let fields = p.expanded_fields();
    let weights = p.expanded_weights();
    pb_of_sets(&fields, &weights, true, cfg, &[])
}

/// Sup-norm of the difference between the discrete combination
/// `sum_j a'_j F'_j` and the continuous combination `int alpha F dt` under
/// the interval weight induced by the coarse-graining windows.
pub fn weight_correspondence_residual(
    cont: &ContinuousPartition,
    coarse: &CoarseGrained,
    a_disc: &[f64],
) -> Result<f64> {
    if a_disc.len() != coarse.cover.n() || cont.m_t() != coarse.m_t {
        return Err(Error::Misaligned(
            "weight / coarse-graining provenance mismatch".into(),
        ));
    }
    let surface = cont.surface().clone();
    let cells_per = coarse.m_t / coarse.n_windows;
    // discrete side
    let mut s1 = vec![0.0f64; surface.len()];
    for (j, f) in coarse.partition.fields().iter().enumerate() {
        let w = a_disc[j];
        for (o, v) in s1.iter_mut().zip(f.data()) {
            *o += w * v;
        }
    }
    // continuous side with the induced piecewise-constant weight
    let w_t = 1.0 / coarse.m_t as f64;
    let mut s2 = vec![0.0f64; surface.len()];
    for (k, &j) in coarse.assignment.iter().enumerate() {
        let alpha = a_disc[j];
        for s in k * cells_per..(k + 1) * cells_per {
            for (o, v) in s2.iter_mut().zip(cont.fields()[s].data()) {
                *o += alpha * w_t * v;
            }
        }
    }
    Ok(s1
        .iter()
        .zip(&s2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{translated_disk, DiscreteCover};
    use crate::partition::{canonical_partition_discrete, BumpProfile};
    use crate::surface::{GridSpec, SurfaceKind};

    fn antisym(n: usize, upper: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                p[i * n + j] = upper[k];
                p[j * n + i] = -upper[k];
                k += 1;
            }
        }
        p
    }

    #[test]
    fn exact_norm_examples() {
        // [[0,1],[-1,0]] -> 2
        let p = antisym(2, &[1.0]);
        let (v, a, b) = inf1_norm_exact(&p, 2);
        assert_eq!(v, 2.0);
        // witness check
        let mut val = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                val += a[i] as f64 * p[i * 2 + j] * b[j] as f64;
            }
        }
        assert_eq!(val.abs(), 2.0);

        // zero matrix
        let (v, _, _) = inf1_norm_exact(&vec![0.0; 9], 3);
        assert_eq!(v, 0.0);

        // P_12 = 1, P_13 = 2, P_23 = 0 -> 6 at a = (1,1,1)
        let p = antisym(3, &[1.0, 2.0, 0.0]);
        let (v, a, _) = inf1_norm_exact(&p, 3);
        assert_eq!(v, 6.0);
        assert!(a.iter().all(|&x| x == a[0]));
    }

    #[test]
    fn rank_two_padded_matrix() {
        let sigma = 0.7;
        let n = 8;
        let mut upper = vec![0.0; n * (n - 1) / 2];
        upper[0] = sigma; // the (0,1) slot
        let p = antisym(n, &upper);
        let (v, _, _) = inf1_norm_exact(&p, n);
        assert!((v - 2.0 * sigma).abs() < 1e-12);
    }

    #[test]
    fn heuristic_matches_exact_on_small_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=12usize {
            for _ in 0..3 {
                let upper: Vec<f64> = (0..n * (n - 1) / 2)
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect();
                let p = antisym(n, &upper);
                let (exact, _, _) = inf1_norm_exact(&p, n);
                let (heur, _, _) = inf1_norm_heuristic(&p, n, 32, 99, &[]);
                assert!(heur <= exact + 1e-12);
                assert!(
                    (heur - exact).abs() < 1e-12,
                    "n={n}: heuristic {heur} vs exact {exact}"
                );
            }
        }
    }

    #[test]
    fn scaling_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        let upper: Vec<f64> = (0..n * (n - 1) / 2)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let p = antisym(n, &upper);
        let (v, _, _) = inf1_norm_exact(&p, n);
        for lambda in [-2.5f64, 0.5, 3.0] {
            let scaled: Vec<f64> = p.iter().map(|x| lambda * x).collect();
            let (vs, _, _) = inf1_norm_exact(&scaled, n);
            assert!((vs - lambda.abs() * v).abs() < 1e-12);
        }
    }

    #[test]
    fn zeroing_rows_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 7;
        let upper: Vec<f64> = (0..n * (n - 1) / 2)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let p = antisym(n, &upper);
        let (v, _, _) = inf1_norm_exact(&p, n);
        for k in 0..n {
            let mut q = p.clone();
            for j in 0..n {
                q[k * n + j] = 0.0;
                q[j * n + k] = 0.0;
            }
            let (vq, _, _) = inf1_norm_exact(&q, n);
            assert!(vq <= v + 1e-12);
        }
    }

    #[test]
    fn interior_weights_never_beat_the_box_sup() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 5;
        let upper: Vec<f64> = (0..n * (n - 1) / 2)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let p = antisym(n, &upper);
        let (v, _, _) = inf1_norm_exact(&p, n);
        for _ in 0..200 {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut val = 0.0;
            for i in 0..n {
                for j in 0..n {
                    val += a[i] * p[i * n + j] * b[j];
                }
            }
            assert!(val.abs() <= v + 1e-12);
        }
    }

    fn three_disk_partition() -> (DiscreteCover, DiscretePartition) {
        let t = crate::surface::ChartedSurface::make(
            SurfaceKind::Torus,
            1.0,
            GridSpec::new(64, 64),
            None,
        )
        .unwrap();
        let cover = DiscreteCover::new(vec![
            translated_disk(&t, [0.0, 0.0], 0.6, 0.1).unwrap(),
            translated_disk(&t, [1.0 / 3.0, 1.0 / 3.0], 0.6, 0.1).unwrap(),
            translated_disk(&t, [2.0 / 3.0, 2.0 / 3.0], 0.6, 0.1).unwrap(),
        ])
        .unwrap();
        let p = canonical_partition_discrete(&cover, &BumpProfile::default()).unwrap();
        (cover, p)
    }

    #[test]
    fn matrix_entry_matches_direct_bracket() {
        let (_, part) = three_disk_partition();
        let m = bracket_matrix_discrete(&part, FdOrder::Two).unwrap();
        let direct = crate::surface::poisson_bracket(
            &part.fields()[0],
            &part.fields()[1],
            FdOrder::Two,
        )
        .unwrap();
        let surface = part.surface().clone();
        for idx in 0..surface.len() {
            let p = m.matrix_at(idx);
            assert!((p[0 * 3 + 1] - direct.data()[idx]).abs() <= 1e-12);
            // antisymmetry and zero diagonal
            assert_eq!(p[1 * 3 + 0], -p[0 * 3 + 1]);
            assert_eq!(p[0], 0.0);
        }
    }

    #[test]
    fn matrix_rows_sum_to_zero_under_constraint() {
        let (_, part) = three_disk_partition();
        let m = bracket_matrix_discrete(&part, FdOrder::Two).unwrap();
        let surface = part.surface().clone();
        for idx in (0..surface.len()).step_by(17) {
            let p = m.matrix_at(idx);
            for i in 0..3 {
                let s: f64 = (0..3).map(|j| p[i * 3 + j]).sum();
                assert!(s.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_set_matrix_is_zero() {
        let s = crate::surface::ChartedSurface::make(
            SurfaceKind::Sphere,
            4.0 * std::f64::consts::PI,
            GridSpec::new(64, 128),
            Some(6.0),
        )
        .unwrap();
        let cap = crate::cover::cap_embedding(
            &s,
            [0.0, 1.0],
            3.98 * std::f64::consts::PI,
            0.01,
            crate::cover::EmbeddingOptions {
                allow_band_overlap: true,
            },
        )
        .unwrap();
        let cover = DiscreteCover::new(vec![cap]).unwrap();
        let part = canonical_partition_discrete(&cover, &BumpProfile::default()).unwrap();
        let report = pb_of_discrete(&part, &PbConfig::default()).unwrap();
        assert_eq!(report.value, 0.0);
        assert!(report.zero_certificate);
    }

    #[test]
    fn pb_report_witnesses_recompute() {
        let (_, part) = three_disk_partition();
        let cfg = PbConfig::default();
        let report = pb_of_discrete(&part, &cfg).unwrap();
        assert!(report.value > 0.0);
        assert_eq!(report.method, "exact");
        let m = bracket_matrix_discrete(&part, FdOrder::Two).unwrap();
        let re = report.recompute_value(&m);
        assert!((re - report.value).abs() < 1e-12 * (1.0 + report.value));
    }

    #[test]
    fn heuristic_path_matches_exact_on_partition() {
        let (_, part) = three_disk_partition();
        let exact = pb_of_discrete(&part, &PbConfig::default()).unwrap();
        let heur = pb_of_discrete(
            &part,
            &PbConfig {
                method: PbMethod::Heuristic,
                restarts: 32,
                seed: 5,
                ..PbConfig::default()
            },
        )
        .unwrap();
        assert!(heur.value <= exact.value + 1e-12);
        assert!((heur.value - exact.value).abs() < 1e-9);
    }

    #[test]
    fn exact_cap_is_enforced() {
        let (_, part) = three_disk_partition();
        let r = pb_of_discrete(
            &part,
            &PbConfig {
                method: PbMethod::Exact,
                n_exact_cap: 2,
                ..PbConfig::default()
            },
        );
        assert!(matches!(r, Err(Error::ExactSizeExceeded { .. })));
    }
}
