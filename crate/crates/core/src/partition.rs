//! Partitions of unity subordinated to covers: the canonical
//! normalized-bump construction, verification reports, parametric families
//! for the optimizer, and the bicover extension.
//!
//! All t-integrals are midpoint sums over the t-grid; the canonical
//! construction divides each bump by the same weighted sum that the
//! normalization check recomputes, so the partition identity holds to a few
//! ulps at every grid point.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cover::{Bicover, ContinuousCover, DiscreteCover, DiskEmbedding, SquareCover};
use crate::error::{Error, Result};
use crate::surface::{ChartedSurface, ScalarField};

/// Radial bump profile families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `(1 - tau^2)^p` falloff past the plateau; C^1 for p >= 2.
    #[default]
    SmoothstepPower,
    /// `exp(1 - 1/(1 - tau^2))` falloff; C-infinity but steeper gradients.
    FlatExponential,
}

pub const POWER_MIN: f64 = 2.0;
pub const POWER_MAX: f64 = 8.0;
pub const PLATEAU_MAX: f64 = 0.9;
pub const AMPLITUDE_MAX: f64 = 4.0;

/// Shape of the bumps from which canonical partitions are normalized.
///
/// Amplitudes and in-disk center offsets are optional per-set parameters;
/// offsets are bounded by the support margin and shrink the bump so its
/// support stays inside the inner disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpProfile {
    pub kind: ProfileKind,
    pub power: f64,
    pub plateau: f64,
    #[serde(default)]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default)]
    pub offsets: Option<Vec<[f64; 2]>>,
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile {
            kind: ProfileKind::SmoothstepPower,
            power: 2.0,
            plateau: 0.4,
            amplitudes: None,
            offsets: None,
        }
    }
}

impl BumpProfile {
    pub fn validate(&self, n_sets: usize, max_offset: f64) -> Result<()> {
        if !(POWER_MIN..=POWER_MAX).contains(&self.power) {
            return Err(Error::ThetaOutOfBounds(format!(
                "power {} outside [{POWER_MIN}, {POWER_MAX}]",
                self.power
            )));
        }
        if !(0.0..PLATEAU_MAX).contains(&self.plateau) {
            return Err(Error::ThetaOutOfBounds(format!(
                "plateau {} outside [0, {PLATEAU_MAX})",
                self.plateau
            )));
        }
        if let Some(a) = &self.amplitudes {
            if a.len() != n_sets {
                return Err(Error::ThetaOutOfBounds("amplitude count mismatch".into()));
            }
            if a.iter().any(|v| !(0.0..=AMPLITUDE_MAX).contains(v)) {
                return Err(Error::ThetaOutOfBounds(format!(
                    "amplitudes must lie in [0, {AMPLITUDE_MAX}]"
                )));
            }
        }
        if let Some(o) = &self.offsets {
            if o.len() != n_sets {
                return Err(Error::ThetaOutOfBounds("offset count mismatch".into()));
            }
            for v in o {
                if (v[0] * v[0] + v[1] * v[1]).sqrt() > max_offset + 1e-15 {
                    return Err(Error::ThetaOutOfBounds(format!(
                        "offset ({}, {}) exceeds the margin bound {max_offset}",
                        v[0], v[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Bump value at normalized radial coordinate `s` (support `s < 1`).
    pub fn value(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        if s <= self.plateau {
            return 1.0;
        }
        let tau = (s - self.plateau) / (1.0 - self.plateau);
        match self.kind {
            ProfileKind::SmoothstepPower => (1.0 - tau * tau).powf(self.power),
            ProfileKind::FlatExponential => (1.0 - 1.0 / (1.0 - tau * tau)).exp(),
        }
    }
}

/// Sample the bumps of every set and normalize by their weighted sum.
/// Errors out listing grid points with zero total bump mass.
pub fn canonical_fields(
    sets: &[DiskEmbedding],
    weights: &[f64],
    profile: &BumpProfile,
) -> Result<Vec<ScalarField>> {
    assert_eq!(sets.len(), weights.len());
    let surface = sets[0].surface().clone();
    let max_offset = sets
        .iter()
        .map(|e| e.eta * e.inner_radius())
        .fold(f64::INFINITY, f64::min);
    profile.validate(sets.len(), max_offset)?;

    let mut bumps: Vec<ScalarField> = Vec::with_capacity(sets.len());
    for (j, set) in sets.iter().enumerate() {
        let amp = profile.amplitudes.as_ref().map_or(1.0, |a| a[j]);
        let offset = profile.offsets.as_ref().map_or([0.0, 0.0], |o| o[j]);
        let off_norm = (offset[0] * offset[0] + offset[1] * offset[1]).sqrt();
        let support_radius = set.inner_radius() - off_norm;
        if support_radius <= 0.0 {
            return Err(Error::ThetaOutOfBounds(
                "offset leaves no room for the bump support".into(),
            ));
        }
        let f = ScalarField::from_fn(surface.clone(), |x, y| match set.invert([x, y]) {
            None => 0.0,
            Some(u) => {
                let du = [u[0] - offset[0], u[1] - offset[1]];
                let s = (du[0] * du[0] + du[1] * du[1]).sqrt() / support_radius;
                amp * profile.value(s)
            }
        });
        bumps.push(f);
    }

    // weighted total bump mass at every grid point
    let n_pts = surface.len();
    let mut total = vec![0.0f64; n_pts];
    for (j, b) in bumps.iter().enumerate() {
        let w = weights[j];
        for (t, v) in total.iter_mut().zip(b.data()) {
            *t += w * v;
        }
    }
    let mut zero_count = 0usize;
    let mut first = None;
    for iy in 0..surface.ny() {
        if surface.is_masked_row(iy) {
            continue;
        }
        for ix in 0..surface.nx() {
            if total[surface.idx(ix, iy)] <= 0.0 {
                zero_count += 1;
                if first.is_none() {
                    first = Some((ix, iy));
                }
            }
        }
    }
    if zero_count > 0 {
        return Err(Error::ZeroBumpMass {
            count: zero_count,
            first,
        });
    }

    for b in &mut bumps {
        for (v, t) in b.data_mut().iter_mut().zip(&total) {
            if *t > 0.0 {
                *v /= t;
            } else {
                *v = 0.0; // masked region with no mass
            }
        }
    }
    Ok(bumps)
}

/// A finite partition of unity subordinated to a discrete cover.
#[derive(Debug, Clone)]
pub struct DiscretePartition {
    cover: DiscreteCover,
    fields: Vec<ScalarField>,
}

impl DiscretePartition {
    /// Wrap fields without numerical validation (use [`verify_discrete`]).
    pub fn from_fields(cover: DiscreteCover, fields: Vec<ScalarField>) -> Result<Self> {
        if fields.len() != cover.n() {
            return Err(Error::GridMismatch);
        }
        if !fields
            .iter()
            .all(|f| f.surface().same_grid(cover.surface()))
        {
            return Err(Error::GridMismatch);
        }
        Ok(DiscretePartition { cover, fields })
    }

    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn fields_mut(&mut self) -> &mut [ScalarField] {
        &mut self.fields
    }

    pub fn cover(&self) -> &DiscreteCover {
        &self.cover
    }

    pub fn surface(&self) -> &Arc<ChartedSurface> {
        self.cover.surface()
    }

    pub fn weights(&self) -> Vec<f64> {
        vec![1.0; self.fields.len()]
    }
}

/// A continuous partition of unity: one field per t-sample, with the
/// midpoint-rule t-integral equal to one at every grid point.
#[derive(Debug, Clone)]
pub struct ContinuousPartition {
    cover: ContinuousCover,
    fields: Vec<ScalarField>,
}

impl ContinuousPartition {
    pub fn from_fields(cover: ContinuousCover, fields: Vec<ScalarField>) -> Result<Self> {
        if fields.len() != cover.m_t() {
            return Err(Error::GridMismatch);
        }
        if !fields
            .iter()
            .all(|f| f.surface().same_grid(cover.surface()))
        {
            return Err(Error::GridMismatch);
        }
        Ok(ContinuousPartition { cover, fields })
    }

    pub fn m_t(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn cover(&self) -> &ContinuousCover {
        &self.cover
    }

    pub fn surface(&self) -> &Arc<ChartedSurface> {
        self.cover.surface()
    }

    pub fn weights(&self) -> Vec<f64> {
        vec![1.0 / self.fields.len() as f64; self.fields.len()]
    }
}

/// A partition subordinated to a square-parametrized cover (uniform weights
/// `1/4^level` on the T-cells).
#[derive(Debug, Clone)]
pub struct SquarePartition {
    cover: SquareCover,
    fields: Vec<ScalarField>,
}

impl SquarePartition {
    pub fn from_fields(cover: SquareCover, fields: Vec<ScalarField>) -> Result<Self> {
        if fields.len() != cover.n() {
            return Err(Error::GridMismatch);
        }
        Ok(SquarePartition { cover, fields })
    }

    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn cover(&self) -> &SquareCover {
        &self.cover
    }

    pub fn surface(&self) -> &Arc<ChartedSurface> {
        self.cover.surface()
    }

    pub fn weights(&self) -> Vec<f64> {
        vec![1.0 / self.fields.len() as f64; self.fields.len()]
    }
}

/// Canonical partition subordinated to a discrete cover.
pub fn canonical_partition_discrete(
    cover: &DiscreteCover,
    profile: &BumpProfile,
) -> Result<DiscretePartition> {
    let weights = vec![1.0; cover.n()];
    let fields = canonical_fields(cover.sets(), &weights, profile)?;
    DiscretePartition::from_fields(cover.clone(), fields)
}

/// Canonical partition subordinated to a continuous cover.
pub fn canonical_partition_continuous(
    cover: &ContinuousCover,
    profile: &BumpProfile,
) -> Result<ContinuousPartition> {
    let weights = vec![1.0 / cover.m_t() as f64; cover.m_t()];
    let fields = canonical_fields(cover.samples(), &weights, profile)?;
    ContinuousPartition::from_fields(cover.clone(), fields)
}

/// Canonical partition subordinated to a square-parametrized cover.
pub fn canonical_partition_square(
    cover: &SquareCover,
    profile: &BumpProfile,
) -> Result<SquarePartition> {
    let weights = vec![1.0 / cover.n() as f64; cover.n()];
    let fields = canonical_fields(cover.sets(), &weights, profile)?;
    SquarePartition::from_fields(cover.clone(), fields)
}

/// Verification report: normalization deviation, positivity, and per-set
/// support containment flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionReport {
    pub max_normalization_deviation: f64,
    pub min_value: f64,
    /// Per set: all positive samples lie inside the inner disk.
    pub support_inner_ok: Vec<bool>,
    /// Per set: all positive samples lie inside the image.
    pub support_image_ok: Vec<bool>,
    pub band_contaminated: bool,
}

impl PartitionReport {
    pub fn all_supports_inner(&self) -> bool {
        self.support_inner_ok.iter().all(|&b| b)
    }
}

fn verify_fields(
    sets: &[DiskEmbedding],
    weights: &[f64],
    fields: &[ScalarField],
) -> PartitionReport {
    let surface = sets[0].surface().clone();
    let mut max_dev = 0.0f64;
    let mut min_value = f64::INFINITY;
    for iy in 0..surface.ny() {
        if surface.is_masked_row(iy) {
            continue;
        }
        for ix in 0..surface.nx() {
            let mut sum = 0.0;
            for (w, f) in weights.iter().zip(fields) {
                let v = f.get(ix, iy);
                sum += w * v;
                min_value = min_value.min(v);
            }
            max_dev = max_dev.max((sum - 1.0).abs());
        }
    }
    let mut support_inner_ok = Vec::with_capacity(sets.len());
    let mut support_image_ok = Vec::with_capacity(sets.len());
    let mut band_contaminated = false;
    for (set, f) in sets.iter().zip(fields) {
        let mut inner_ok = true;
        let mut image_ok = true;
        for iy in 0..surface.ny() {
            for ix in 0..surface.nx() {
                if f.get(ix, iy) > 0.0 {
                    let r = set.radial([surface.xs(ix), surface.ys(iy)]);
                    if r >= set.inner_radius() {
                        inner_ok = false;
                    }
                    if r >= set.radius() {
                        image_ok = false;
                    }
                }
            }
        }
        if f.has_band_support() {
            band_contaminated = true;
        }
        support_inner_ok.push(inner_ok);
        support_image_ok.push(image_ok);
    }
    PartitionReport {
        max_normalization_deviation: max_dev,
        min_value,
        support_inner_ok,
        support_image_ok,
        band_contaminated,
    }
}

pub fn verify_discrete(p: &DiscretePartition) -> PartitionReport {
    verify_fields(p.cover().sets(), &p.weights(), p.fields())
}

pub fn verify_continuous(p: &ContinuousPartition) -> PartitionReport {
    verify_fields(p.cover().samples(), &p.weights(), p.fields())
}

pub fn verify_square(p: &SquarePartition) -> PartitionReport {
    verify_fields(p.cover().sets(), &p.weights(), p.fields())
}

/// Write a partition's field stack to a directory: one dump per field
/// (`field_NNN.csv` or `.bin`) plus `partition_manifest.json` recording the
/// grid shape, the quadrature weights, and the file list.
pub fn dump_field_stack(
    dir: &std::path::Path,
    fields: &[ScalarField],
    weights: &[f64],
    binary: bool,
) -> std::io::Result<()> {
    use std::io::Write;
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(fields.len());
    for (j, f) in fields.iter().enumerate() {
        let name = if binary {
            format!("field_{j:03}.bin")
        } else {
            format!("field_{j:03}.csv")
        };
        let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join(&name))?);
        if binary {
            f.write_binary(&mut w)?;
        } else {
            f.write_csv(&mut w)?;
        }
        w.flush()?;
        files.push(name);
    }
    let surface = fields[0].surface();
    let manifest = serde_json::json!({
        "version": 1,
        "nx": surface.nx(),
        "ny": surface.ny(),
        "chart": [surface.x0, surface.x1, surface.y0, surface.y1],
        "weights": weights,
        "files": files,
    });
    std::fs::write(
        dir.join("partition_manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )
}

/// Box-bounded parameter space for partition families. Layout:
/// `[power, plateau, amplitudes x n, (offsets x 2n when enabled)]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParametricFamily {
    pub n_sets: usize,
    pub use_offsets: bool,
    /// Euclidean bound on each offset vector (from the support margin).
    pub max_offset: f64,
    pub kind: ProfileKind,
}

impl ParametricFamily {
    pub fn for_discrete(cover: &DiscreteCover, use_offsets: bool) -> Self {
        let max_offset = cover
            .sets()
            .iter()
            .map(|e| e.eta * e.inner_radius())
            .fold(f64::INFINITY, f64::min);
        ParametricFamily {
            n_sets: cover.n(),
            use_offsets,
            max_offset,
            kind: ProfileKind::SmoothstepPower,
        }
    }

    pub fn dim(&self) -> usize {
        2 + self.n_sets + if self.use_offsets { 2 * self.n_sets } else { 0 }
    }

    /// Parameter vector reproducing the canonical default profile.
    pub fn canonical_theta(&self) -> Vec<f64> {
        let d = BumpProfile::default();
        let mut theta = vec![d.power, d.plateau];
        theta.extend(std::iter::repeat_n(1.0, self.n_sets));
        if self.use_offsets {
            theta.extend(std::iter::repeat_n(0.0, 2 * self.n_sets));
        }
        theta
    }

    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![POWER_MIN, 0.0];
        let mut hi = vec![POWER_MAX, PLATEAU_MAX - 1e-9];
        lo.extend(std::iter::repeat_n(0.0, self.n_sets));
        hi.extend(std::iter::repeat_n(AMPLITUDE_MAX, self.n_sets));
        if self.use_offsets {
            let b = self.max_offset / std::f64::consts::SQRT_2;
            lo.extend(std::iter::repeat_n(-b, 2 * self.n_sets));
            hi.extend(std::iter::repeat_n(b, 2 * self.n_sets));
        }
        (lo, hi)
    }

    pub fn profile_of(&self, theta: &[f64]) -> Result<BumpProfile> {
        if theta.len() != self.dim() {
            return Err(Error::ThetaOutOfBounds(format!(
                "theta has {} entries, family needs {}",
                theta.len(),
                self.dim()
            )));
        }
        let amplitudes = theta[2..2 + self.n_sets].to_vec();
        let offsets = if self.use_offsets {
            Some(
                (0..self.n_sets)
                    .map(|j| {
                        [
                            theta[2 + self.n_sets + 2 * j],
                            theta[2 + self.n_sets + 2 * j + 1],
                        ]
                    })
                    .collect(),
            )
        } else {
            None
        };
        Ok(BumpProfile {
            kind: self.kind,
            power: theta[0],
            plateau: theta[1],
            amplitudes: Some(amplitudes),
            offsets,
        })
    }

    /// Build the member partition at `theta` over a discrete cover.
    pub fn partition(&self, cover: &DiscreteCover, theta: &[f64]) -> Result<DiscretePartition> {
        let profile = self.profile_of(theta)?;
        canonical_partition_discrete(cover, &profile)
    }

    /// Crude Lipschitz estimate of the partition's sup-norm sensitivity to
    /// theta, probed by one-sided differences at the canonical point.
    pub fn lipschitz_estimate(&self, cover: &DiscreteCover) -> f64 {
        let theta0 = self.canonical_theta();
        let base = match self.partition(cover, &theta0) {
            Ok(p) => p,
            Err(_) => return f64::NAN,
        };
        let (lo, hi) = self.bounds();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            let step = 1e-3 * (hi[i] - lo[i]).max(1e-9);
            let mut theta = theta0.clone();
            theta[i] = (theta[i] + step).min(hi[i]);
            if let Ok(p) = self.partition(cover, &theta) {
                let mut diff = 0.0f64;
                for (a, b) in base.fields().iter().zip(p.fields()) {
                    for (x, y) in a.data().iter().zip(b.data()) {
                        diff = diff.max((x - y).abs());
                    }
                }
                worst = worst.max(diff / step);
            }
        }
        worst
    }
}

/// A partition of unity over the bicover parameter square: supported on the
/// slab, where it factors as `rho(x)/V_I * F_I(u)`. Slab cells are indexed
/// `u * m_x + x`.
#[derive(Debug, Clone)]
pub struct BicoverPartition {
    pub inner: ContinuousPartition,
    /// Discrete fiber weights `c_x` (sum exactly 1 by construction).
    pub fiber_weights: Vec<f64>,
}

/// Extend an interval partition to the bicover: mass spreads across the
/// slab fiber with profile `rho`, preserving the T-integral and every
/// weighted combination.
pub fn extend_partition_to_bicover(
    f_i: &ContinuousPartition,
    bicover: &Bicover,
) -> Result<BicoverPartition> {
    if f_i.m_t() != bicover.inner.m_t() {
        return Err(Error::GridMismatch);
    }
    if !f_i.surface().same_grid(bicover.inner.surface()) {
        return Err(Error::GridMismatch);
    }
    let fiber_weights = bicover.rho.weights();
    let mass: f64 = fiber_weights.iter().sum();
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::BadBicover(format!(
            "fiber mass {mass} differs from 1"
        )));
    }
    Ok(BicoverPartition {
        inner: f_i.clone(),
        fiber_weights,
    })
}

impl BicoverPartition {
    pub fn m_u(&self) -> usize {
        self.inner.m_t()
    }

    pub fn m_x(&self) -> usize {
        self.fiber_weights.len()
    }

    /// Effective box weights of the expanded (u, x) set list: `c_x / M_u`.
    pub fn expanded_weights(&self) -> Vec<f64> {
        let m_u = self.m_u() as f64;
        let mut w = Vec::with_capacity(self.m_u() * self.m_x());
        for _u in 0..self.m_u() {
            for cx in &self.fiber_weights {
                w.push(cx / m_u);
            }
        }
        w
    }

    /// Expanded field list matching [`BicoverPartition::expanded_weights`].
    pub fn expanded_fields(&self) -> Vec<ScalarField> {
        let mut fields = Vec::with_capacity(self.m_u() * self.m_x());
        for f in self.inner.fields() {
            for _x in 0..self.m_x() {
                fields.push(f.clone());
            }
        }
        fields
    }

    /// Max deviation of the T-integral from 1 over the unmasked grid.
    pub fn t_integral_deviation(&self) -> f64 {
        let surface = self.inner.surface().clone();
        let weights = self.expanded_weights();
        let fields = self.inner.fields();
        let m_x = self.m_x();
        let mut dev = 0.0f64;
        for iy in 0..surface.ny() {
            if surface.is_masked_row(iy) {
                continue;
            }
            for ix in 0..surface.nx() {
                let mut sum = 0.0;
                for (u, f) in fields.iter().enumerate() {
                    let v = f.get(ix, iy);
                    for x in 0..m_x {
                        sum += weights[u * m_x + x] * v;
                    }
                }
                dev = dev.max((sum - 1.0).abs());
            }
        }
        dev
    }

    /// The fiber-integrated interval weight of a T-weight given on slab
    /// cells: `alpha_I(u) = sum_x alpha(u, x) c_x`.
    pub fn fiber_integrated_weight(&self, alpha_t: &[f64]) -> Vec<f64> {
        assert_eq!(alpha_t.len(), self.m_u() * self.m_x());
        (0..self.m_u())
            .map(|u| {
                self.fiber_weights
                    .iter()
                    .enumerate()
                    .map(|(x, cx)| alpha_t[u * self.m_x() + x] * cx)
                    .sum()
            })
            .collect()
    }

    /// Combined function of a T-weight over the extended partition.
    pub fn combined_field_extended(&self, alpha_t: &[f64]) -> ScalarField {
        let surface = self.inner.surface().clone();
        let mut out = ScalarField::zeros(surface);
        let m_u = self.m_u() as f64;
        for (u, f) in self.inner.fields().iter().enumerate() {
            for (x, cx) in self.fiber_weights.iter().enumerate() {
                let coeff = alpha_t[u * self.m_x() + x] * cx / m_u;
                for (o, v) in out.data_mut().iter_mut().zip(f.data()) {
                    *o += coeff * v;
                }
            }
        }
        out
    }

    /// Combined function of an interval weight over the inner partition.
    pub fn combined_field_inner(&self, alpha_i: &[f64]) -> ScalarField {
        let surface = self.inner.surface().clone();
        let mut out = ScalarField::zeros(surface);
        let m_u = self.m_u() as f64;
        for (u, f) in self.inner.fields().iter().enumerate() {
            let coeff = alpha_i[u] / m_u;
            for (o, v) in out.data_mut().iter_mut().zip(f.data()) {
                *o += coeff * v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{
        cap_embedding, make_bicover, make_continuous_cover, translated_disk, CenterPath,
        EmbeddingOptions, FiberProfile, SlabEmbedding, SquareCover,
    };
    use crate::surface::{GridSpec, SurfaceKind};
    use std::f64::consts::PI;

    fn torus(n: usize) -> Arc<ChartedSurface> {
        ChartedSurface::make(SurfaceKind::Torus, 1.0, GridSpec::new(n, n), None).unwrap()
    }

    fn three_disk_cover(t: &Arc<ChartedSurface>) -> DiscreteCover {
        DiscreteCover::new(vec![
            translated_disk(t, [0.0, 0.0], 0.6, 0.1).unwrap(),
            translated_disk(t, [1.0 / 3.0, 1.0 / 3.0], 0.6, 0.1).unwrap(),
            translated_disk(t, [2.0 / 3.0, 2.0 / 3.0], 0.6, 0.1).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn single_set_partition_is_unity() {
        let s = ChartedSurface::make(
            SurfaceKind::Sphere,
            4.0 * PI,
            GridSpec::new(128, 256),
            Some(6.0),
        )
        .unwrap();
        // one big cap covering the whole unmasked sphere
        let cap = cap_embedding(
            &s,
            [0.0, 1.0],
            3.98 * PI,
            0.01,
            EmbeddingOptions {
                allow_band_overlap: true,
            },
        )
        .unwrap();
        let cover = DiscreteCover::new(vec![cap]).unwrap();
        let p = canonical_partition_discrete(&cover, &BumpProfile::default()).unwrap();
        let report = verify_discrete(&p);
        assert!(report.max_normalization_deviation < 1e-12);
        // x/x = 1 wherever mass exists
        let f = &p.fields()[0];
        for iy in 0..s.ny() {
            if s.is_masked_row(iy) {
                continue;
            }
            for ix in 0..s.nx() {
                assert_eq!(f.get(ix, iy), 1.0);
            }
        }
    }

    #[test]
    fn three_disk_canonical_partition_is_normalized() {
        let t = torus(128);
        let cover = three_disk_cover(&t);
        let p = canonical_partition_discrete(&cover, &BumpProfile::default()).unwrap();
        let report = verify_discrete(&p);
        assert!(report.max_normalization_deviation < 1e-10);
        assert!(report.min_value >= 0.0);
        assert!(report.all_supports_inner());
        assert!(!report.band_contaminated);
    }

    #[test]
    fn continuous_partition_t_integral_is_one() {
        let t = torus(128);
        let path = CenterPath {
            nodes: vec![
                [0.0, 0.25],
                [0.5, 0.25],
                [1.0, 0.25],
                [1.0, 0.75],
                [1.5, 0.75],
                [2.0, 0.75],
                [2.0, 1.25],
            ],
            closed: false,
        };
        let cover =
            make_continuous_cover(&t, &path, 0.3, 0.1, 128, EmbeddingOptions::default()).unwrap();
        let p = canonical_partition_continuous(&cover, &BumpProfile::default()).unwrap();
        let report = verify_continuous(&p);
        assert!(
            report.max_normalization_deviation < 1e-10,
            "deviation {}",
            report.max_normalization_deviation
        );
    }

    #[test]
    fn corrupted_field_is_flagged() {
        let t = torus(64);
        let cover = three_disk_cover(&t);
        let mut p = canonical_partition_discrete(&cover, &BumpProfile::default()).unwrap();
        let v = p.fields()[0].get(10, 10);
        p.fields_mut()[0].set(10, 10, v + 0.1);
        let report = verify_discrete(&p);
        assert!((report.max_normalization_deviation - 0.1).abs() < 1e-9);
    }

    #[test]
    fn support_touching_boundary_raises_flag() {
        let t = torus(64);
        let cover = three_disk_cover(&t);
        let mut p = canonical_partition_discrete(&cover, &BumpProfile::default()).unwrap();
        // plant a positive sample outside the inner disk of set 0
        let e = &cover.sets()[0].clone();
        let target = e.inner_radius() + 2.0 * t.hx();
        let mut planted = false;
        for iy in 0..64 {
            for ix in 0..64 {
                let r = e.radial([t.xs(ix), t.ys(iy)]);
                if r > target && r < target + 2.0 * t.hx() && !planted {
                    p.fields_mut()[0].set(ix, iy, 1e-6);
                    planted = true;
                }
            }
        }
        assert!(planted);
        let report = verify_discrete(&p);
        assert!(!report.support_inner_ok[0]);
    }

    #[test]
    fn zero_amplitude_drops_a_set_when_others_cover() {
        let t = torus(128);
        // four disks, any three of which still cover
        let cover = DiscreteCover::new(vec![
            translated_disk(&t, [0.0, 0.0], 0.6, 0.1).unwrap(),
            translated_disk(&t, [1.0 / 3.0, 1.0 / 3.0], 0.6, 0.1).unwrap(),
            translated_disk(&t, [2.0 / 3.0, 2.0 / 3.0], 0.6, 0.1).unwrap(),
            translated_disk(&t, [0.5, 0.5], 0.6, 0.1).unwrap(),
        ])
        .unwrap();
        let profile = BumpProfile {
            amplitudes: Some(vec![1.0, 1.0, 1.0, 0.0]),
            ..BumpProfile::default()
        };
        let p = canonical_partition_discrete(&cover, &profile).unwrap();
        assert_eq!(p.fields()[3].sup_norm(), 0.0);
        let report = verify_discrete(&p);
        assert!(report.max_normalization_deviation < 1e-10);
    }

    #[test]
    fn plateau_limit_is_rejected() {
        let profile = BumpProfile {
            plateau: 0.97,
            ..BumpProfile::default()
        };
        assert!(profile.validate(3, 0.1).is_err());
    }

    #[test]
    fn family_canonical_theta_reproduces_default() {
        let t = torus(64);
        let cover = three_disk_cover(&t);
        let family = ParametricFamily::for_discrete(&cover, false);
        let p0 = canonical_partition_discrete(&cover, &BumpProfile::default()).unwrap();
        let p1 = family.partition(&cover, &family.canonical_theta()).unwrap();
        for (a, b) in p0.fields().iter().zip(p1.fields()) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert_eq!(x, y);
            }
        }
        assert!(family.lipschitz_estimate(&cover).is_finite());
    }

    #[test]
    fn field_stack_dump_writes_manifest() {
        let t = torus(16);
        let cover = DiscreteCover::new(vec![
            crate::cover::translated_disk(&t, [0.0, 0.0], 0.6, 0.1).unwrap(),
            crate::cover::translated_disk(&t, [1.0 / 3.0, 1.0 / 3.0], 0.6, 0.1).unwrap(),
            crate::cover::translated_disk(&t, [2.0 / 3.0, 2.0 / 3.0], 0.6, 0.1).unwrap(),
        ])
        .unwrap();
        let p = canonical_partition_discrete(&cover, &BumpProfile::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        dump_field_stack(dir.path(), p.fields(), &p.weights(), false).unwrap();
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("partition_manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["nx"], 16);
        assert_eq!(manifest["files"].as_array().unwrap().len(), 3);
        assert!(dir.path().join("field_000.csv").exists());
    }

    #[test]
    fn bicover_extension_preserves_integrals() {
        let t = torus(128);
        let outer = SquareCover::from_center_map(
            &t,
            1,
            0.6,
            0.1,
            |t1, t2| [t1, t2],
            EmbeddingOptions::default(),
        )
        .unwrap();
        let path = CenterPath {
            nodes: vec![[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]],
            closed: true,
        };
        let inner =
            make_continuous_cover(&t, &path, 0.6, 0.1, 12, EmbeddingOptions::default()).unwrap();
        let slab = SlabEmbedding {
            anchor: [0.3, 0.5],
            u_len: 0.4,
            x_halfwidth: 0.1,
        };
        let bic = make_bicover(
            outer,
            inner.clone(),
            [0.2, 0.2],
            [0.8, 0.8],
            slab,
            FiberProfile::quartic(8),
        )
        .unwrap();
        let f_i = canonical_partition_continuous(&inner, &BumpProfile::default()).unwrap();
        let ext = extend_partition_to_bicover(&f_i, &bic).unwrap();
        assert!(ext.t_integral_deviation() < 1e-10);

        // alpha == 1 maps to alpha_I == 1
        let ones = vec![1.0; ext.m_u() * ext.m_x()];
        let a_i = ext.fiber_integrated_weight(&ones);
        assert!(a_i.iter().all(|v| (v - 1.0).abs() < 1e-12));

        // fiber-constant weights drop to the inner weight exactly
        let mut alpha_t = vec![0.0; ext.m_u() * ext.m_x()];
        let alpha_u: Vec<f64> = (0..ext.m_u())
            .map(|u| ((u % 3) as f64 - 1.0) * 0.7)
            .collect();
        for u in 0..ext.m_u() {
            for x in 0..ext.m_x() {
                alpha_t[u * ext.m_x() + x] = alpha_u[u];
            }
        }
        let a_i = ext.fiber_integrated_weight(&alpha_t);
        for (a, b) in a_i.iter().zip(&alpha_u) {
            assert!((a - b).abs() < 1e-12);
        }
        let lhs = ext.combined_field_extended(&alpha_t);
        let rhs = ext.combined_field_inner(&a_i);
        for (a, b) in lhs.data().iter().zip(rhs.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
