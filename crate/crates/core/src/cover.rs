//! Symplectic disk embeddings, discrete and continuous covers, bicovers,
//! and the explicit conversions between continuous and discrete covers.
//!
//! Embeddings come in two placement kinds: translations of the round disk
//! on the torus or plane, and rotated polar caps on the sphere. In both
//! cases the standard disk of capacity `c` has radius `sqrt(c/pi)`, and the
//! disk-frame radial coordinate of a surface point is directly comparable
//! with that radius (on the sphere the radial coordinate is the chord
//! `2 rho sin(d/2)` of the angular distance `d`, which matches the flat
//! radius exactly under the area-preserving cap construction).
//!
//! Every embedding carries a support margin `eta`: partitions subordinate
//! to a cover live on the inner disks of capacity `(1-eta)c`, and the map
//! extends to a collar of capacity `(1+eta)c`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{ContinuousPartition, DiscretePartition};
use crate::surface::{ChartedSurface, ScalarField, SurfaceKind};

/// Position of a sphere embedding relative to the polar exclusion bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandStatus {
    /// Torus or plane: no bands exist.
    NotApplicable,
    /// The closed image stays outside both bands.
    Cleared,
    /// A pole (with its whole band) lies strictly inside the inner disk;
    /// the boundary circles clear the bands.
    WrapsPole,
    /// A boundary circle crosses a band: bracket values near the band edge
    /// are unreliable and reports are flagged.
    BoundaryInBand,
}

/// Construction options for embeddings and covers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[derive(Default)]
pub struct EmbeddingOptions {
    /// Permit embeddings whose boundary circles cross a polar band
    /// (two-cap and one-cap sphere scenarios need this; reports carry the
    /// contamination flag).
    pub allow_band_overlap: bool,
}


#[derive(Debug, Clone, Serialize, Deserialize)]
enum Placement {
    Translation,
    Cap { axis: [f64; 3] },
}

/// An explicit symplectic embedding of the standard disk of capacity `c`.
#[derive(Debug, Clone)]
pub struct DiskEmbedding {
    surface: Arc<ChartedSurface>,
    pub capacity: f64,
    pub center: [f64; 2],
    pub eta: f64,
    placement: Placement,
    pub band: BandStatus,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Rotation matrix taking the north pole to `axis` (Rodrigues).
fn pole_rotation(axis: [f64; 3]) -> [[f64; 3]; 3] {
    let n = [0.0, 0.0, 1.0];
    let c = dot(n, axis).clamp(-1.0, 1.0);
    if c > 1.0 - 1e-14 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    if c < -1.0 + 1e-14 {
        // half turn about the x-axis
        return [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    }
    let k = cross(n, axis);
    let s = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    let k = [k[0] / s, k[1] / s, k[2] / s];
    let v = 1.0 - c;
    [
        [
            c + k[0] * k[0] * v,
            k[0] * k[1] * v - k[2] * s,
            k[0] * k[2] * v + k[1] * s,
        ],
        [
            k[1] * k[0] * v + k[2] * s,
            c + k[1] * k[1] * v,
            k[1] * k[2] * v - k[0] * s,
        ],
        [
            k[2] * k[0] * v - k[1] * s,
            k[2] * k[1] * v + k[0] * s,
            c + k[2] * k[2] * v,
        ],
    ]
}

fn mat_apply(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn mat_apply_t(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

impl DiskEmbedding {
    pub fn surface(&self) -> &Arc<ChartedSurface> {
        &self.surface
    }

    /// Radius of the standard disk of the embedding's capacity.
    pub fn radius(&self) -> f64 {
        (self.capacity / PI).sqrt()
    }

    /// Radius of the inner disk of capacity `(1-eta)c` carrying supports.
    pub fn inner_radius(&self) -> f64 {
        ((1.0 - self.eta) * self.capacity / PI).sqrt()
    }

    /// Radius of the collar disk of capacity `(1+eta)c`.
    pub fn collar_radius(&self) -> f64 {
        ((1.0 + self.eta) * self.capacity / PI).sqrt()
    }

    /// Angular radius of a cap of the given area on this sphere.
    fn cap_angle(&self, cap_area: f64) -> f64 {
        let rho2 = self.surface.sphere_rho2();
        (1.0 - cap_area / (2.0 * PI * rho2)).clamp(-1.0, 1.0).acos()
    }

    /// Chart image of a disk point.
    pub fn eval(&self, u: [f64; 2]) -> [f64; 2] {
        let s = &self.surface;
        match &self.placement {
            Placement::Translation => {
                let mut x = self.center[0] + u[0];
                let mut y = self.center[1] + u[1];
                if s.periodic_x {
                    let p = s.x1 - s.x0;
                    x = s.x0 + (x - s.x0).rem_euclid(p);
                }
                if s.periodic_y {
                    let p = s.y1 - s.y0;
                    y = s.y0 + (y - s.y0).rem_euclid(p);
                }
                [x, y]
            }
            Placement::Cap { axis } => {
                let rho2 = s.sphere_rho2();
                let sigma = 0.5 * (u[0] * u[0] + u[1] * u[1]);
                let phi = u[1].atan2(u[0]);
                let zeta = 1.0 - sigma / rho2;
                let p = s.unit_vec(phi, zeta * rho2);
                let rot = pole_rotation(*axis);
                s.chart_of_unit(mat_apply(&rot, p))
            }
        }
    }

    /// Disk coordinates of a chart point, if it lies inside the collar.
    pub fn invert(&self, x: [f64; 2]) -> Option<[f64; 2]> {
        let s = &self.surface;
        match &self.placement {
            Placement::Translation => {
                let du = [
                    s.wrap_dx(x[0] - self.center[0]),
                    s.wrap_dy(x[1] - self.center[1]),
                ];
                let r = (du[0] * du[0] + du[1] * du[1]).sqrt();
                (r < self.collar_radius()).then_some(du)
            }
            Placement::Cap { axis } => {
                let p = s.unit_vec(x[0], x[1]);
                let rot = pole_rotation(*axis);
                let q = mat_apply_t(&rot, p);
                let rho2 = s.sphere_rho2();
                let sigma = rho2 * (1.0 - q[2].clamp(-1.0, 1.0));
                let r = (2.0 * sigma).sqrt();
                if r >= self.collar_radius() {
                    return None;
                }
                let phi = q[1].atan2(q[0]);
                Some([r * phi.cos(), r * phi.sin()])
            }
        }
    }

    /// Disk-frame radial coordinate of a chart point (comparable with
    /// [`DiskEmbedding::radius`] for containment tests on any surface).
    pub fn radial(&self, x: [f64; 2]) -> f64 {
        let s = &self.surface;
        match &self.placement {
            Placement::Translation => s.chart_dist(x, self.center),
            Placement::Cap { axis } => {
                let p = s.unit_vec(x[0], x[1]);
                let d = [p[0] - axis[0], p[1] - axis[1], p[2] - axis[2]];
                let chord = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                s.sphere_rho2().sqrt() * chord
            }
        }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.radial(x) < self.radius()
    }

    pub fn contains_inner(&self, x: [f64; 2]) -> bool {
        self.radial(x) < self.inner_radius()
    }

    /// True when the inner disk of `self` verifiably maps inside the image
    /// of `other` (exact geometric sufficient condition).
    pub fn inner_inside_image_of(&self, other: &DiskEmbedding) -> bool {
        match (&self.placement, &other.placement) {
            (Placement::Translation, Placement::Translation) => {
                let d = self.surface.chart_dist(self.center, other.center);
                d + self.inner_radius() <= other.radius()
            }
            (Placement::Cap { axis: a }, Placement::Cap { axis: b }) => {
                let d = dot(*a, *b).clamp(-1.0, 1.0).acos();
                let psi_inner = self.cap_angle((1.0 - self.eta) * self.capacity);
                let psi_img = other.cap_angle(other.capacity);
                d + psi_inner <= psi_img
            }
            _ => false,
        }
    }
}

/// Translation embedding of the round disk on the torus or plane.
pub fn translated_disk(
    surface: &Arc<ChartedSurface>,
    center: [f64; 2],
    capacity: f64,
    eta: f64,
) -> Result<DiskEmbedding> {
    if surface.kind == SurfaceKind::Sphere {
        return Err(Error::Config(
            "translated_disk requires a torus or plane chart".into(),
        ));
    }
    if !capacity.is_finite() || capacity <= 0.0 || capacity >= surface.area {
        return Err(Error::CapacityTooLarge {
            capacity,
            reason: format!("capacity must lie in (0, area={})", surface.area),
        });
    }
    if !(0.0 < eta && eta < 1.0) {
        return Err(Error::Config("eta must lie in (0,1)".into()));
    }
    let r_collar = ((1.0 + eta) * capacity / PI).sqrt();
    match surface.kind {
        SurfaceKind::Torus => {
            let min_period = (surface.x1 - surface.x0).min(surface.y1 - surface.y0);
            if 2.0 * r_collar >= min_period {
                return Err(Error::CapacityTooLarge {
                    capacity,
                    reason: format!(
                        "collar diameter {} reaches the period {min_period}; the disk does not embed",
                        2.0 * r_collar
                    ),
                });
            }
        }
        SurfaceKind::Plane => {
            let r = (capacity / PI).sqrt();
            if center[0] - r < surface.x0
                || center[0] + r > surface.x1
                || center[1] - r < surface.y0
                || center[1] + r > surface.y1
            {
                return Err(Error::CapacityTooLarge {
                    capacity,
                    reason: "disk overflows the plane chart".into(),
                });
            }
        }
        SurfaceKind::Sphere => unreachable!(),
    }
    Ok(DiskEmbedding {
        surface: surface.clone(),
        capacity,
        center,
        eta,
        placement: Placement::Translation,
        band: BandStatus::NotApplicable,
    })
}

/// Rotated polar-cap embedding on the sphere. The flat disk is sent to the
/// pole-centered cap `(sigma, phi) -> (theta = phi, z = zmax - sigma)` and
/// composed with the rotation taking the pole to `center`.
pub fn cap_embedding(
    surface: &Arc<ChartedSurface>,
    center: [f64; 2],
    capacity: f64,
    eta: f64,
    opts: EmbeddingOptions,
) -> Result<DiskEmbedding> {
    if surface.kind != SurfaceKind::Sphere {
        return Err(Error::Config("cap_embedding requires a sphere chart".into()));
    }
    if !capacity.is_finite() || capacity <= 0.0 || capacity >= surface.area {
        return Err(Error::CapacityTooLarge {
            capacity,
            reason: format!("cap capacity must lie in (0, area={})", surface.area),
        });
    }
    if !(0.0 < eta && eta < 1.0) {
        return Err(Error::Config("eta must lie in (0,1)".into()));
    }
    let axis = surface.unit_vec(center[0], center[1]);
    let rho2 = surface.sphere_rho2();
    let angle = |area: f64| (1.0 - area / (2.0 * PI * rho2)).clamp(-1.0, 1.0).acos();
    let psi_img = angle(capacity);
    let psi_inner = angle((1.0 - eta) * capacity);
    let band_colat = (1.0 - surface.pole_band / rho2).clamp(-1.0, 1.0).acos();

    let mut status = BandStatus::Cleared;
    for pole_z in [1.0f64, -1.0] {
        let gamma = (axis[2] * pole_z).clamp(-1.0, 1.0).acos();
        if gamma >= psi_img + band_colat {
            continue; // image clears this band entirely
        }
        if gamma + band_colat <= psi_inner {
            // pole and its band sit strictly inside the inner disk
            if status == BandStatus::Cleared {
                status = BandStatus::WrapsPole;
            }
            continue;
        }
        status = BandStatus::BoundaryInBand;
    }
    if status == BandStatus::BoundaryInBand && !opts.allow_band_overlap {
        return Err(Error::PolarBand(format!(
            "cap at ({:.4}, {:.4}) of capacity {capacity:.4} has a boundary circle inside a polar band",
            center[0], center[1]
        )));
    }
    Ok(DiskEmbedding {
        surface: surface.clone(),
        capacity,
        center,
        eta,
        placement: Placement::Cap { axis },
        band: status,
    })
}

fn covering_certificate(surface: &ChartedSurface, sets: &[DiskEmbedding]) -> Result<()> {
    let mut uncovered = 0usize;
    let mut first = None;
    for iy in 0..surface.ny() {
        if surface.is_masked_row(iy) {
            continue;
        }
        for ix in 0..surface.nx() {
            let p = [surface.xs(ix), surface.ys(iy)];
            if !sets.iter().any(|e| e.contains(p)) {
                uncovered += 1;
                if first.is_none() {
                    first = Some((ix, iy));
                }
            }
        }
    }
    if uncovered > 0 {
        return Err(Error::NotCovering { uncovered, first });
    }
    Ok(())
}

fn worst_band(sets: &[DiskEmbedding]) -> BandStatus {
    let mut worst = BandStatus::NotApplicable;
    for e in sets {
        worst = match (worst, e.band) {
            (_, BandStatus::BoundaryInBand) | (BandStatus::BoundaryInBand, _) => {
                BandStatus::BoundaryInBand
            }
            (_, BandStatus::WrapsPole) | (BandStatus::WrapsPole, _) => BandStatus::WrapsPole,
            (_, BandStatus::Cleared) | (BandStatus::Cleared, _) => BandStatus::Cleared,
            _ => BandStatus::NotApplicable,
        };
    }
    worst
}

/// A finite cover of the surface by disk embeddings, with a grid covering
/// certificate established at construction.
#[derive(Debug, Clone)]
pub struct DiscreteCover {
    sets: Vec<DiskEmbedding>,
    band: BandStatus,
}

impl DiscreteCover {
    pub fn new(sets: Vec<DiskEmbedding>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Config("cover needs at least one set".into()));
        }
        let surface = sets[0].surface().clone();
        if !sets.iter().all(|e| e.surface().same_grid(&surface)) {
            return Err(Error::GridMismatch);
        }
        covering_certificate(&surface, &sets)?;
        let band = worst_band(&sets);
        Ok(DiscreteCover { sets, band })
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[DiskEmbedding] {
        &self.sets
    }

    pub fn surface(&self) -> &Arc<ChartedSurface> {
        self.sets[0].surface()
    }

    pub fn band(&self) -> BandStatus {
        self.band
    }
}

/// A piecewise-linear center path; on the sphere the nodes are interpolated
/// along great circles, on the torus along shortest representatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CenterPath {
    pub nodes: Vec<[f64; 2]>,
    pub closed: bool,
}

impl CenterPath {
    pub fn at(&self, t: f64, surface: &ChartedSurface) -> [f64; 2] {
        let n = self.nodes.len();
        if n == 1 {
            return self.nodes[0];
        }
        let segments = if self.closed { n } else { n - 1 };
        let s = (t.clamp(0.0, 1.0)) * segments as f64;
        let k = (s.floor() as usize).min(segments - 1);
        let frac = s - k as f64;
        let a = self.nodes[k];
        let b = self.nodes[(k + 1) % n];
        interpolate_centers(surface, a, b, frac)
    }
}

/// Interpolate two centers inside the chart (shortest representative on the
/// torus, great-circle arc on the sphere).
pub fn interpolate_centers(
    surface: &ChartedSurface,
    a: [f64; 2],
    b: [f64; 2],
    frac: f64,
) -> [f64; 2] {
    match surface.kind {
        SurfaceKind::Sphere => {
            let va = surface.unit_vec(a[0], a[1]);
            let vb = surface.unit_vec(b[0], b[1]);
            let c = dot(va, vb).clamp(-1.0, 1.0);
            let ang = c.acos();
            if ang < 1e-12 {
                return a;
            }
            let s = ang.sin();
            let wa = ((1.0 - frac) * ang).sin() / s;
            let wb = (frac * ang).sin() / s;
            let v = [
                wa * va[0] + wb * vb[0],
                wa * va[1] + wb * vb[1],
                wa * va[2] + wb * vb[2],
            ];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            surface.chart_of_unit([v[0] / norm, v[1] / norm, v[2] / norm])
        }
        _ => {
            let dx = surface.wrap_dx(b[0] - a[0]);
            let dy = surface.wrap_dy(b[1] - a[1]);
            let mut x = a[0] + frac * dx;
            let mut y = a[1] + frac * dy;
            if surface.periodic_x {
                let p = surface.x1 - surface.x0;
                x = surface.x0 + (x - surface.x0).rem_euclid(p);
            }
            if surface.periodic_y {
                let p = surface.y1 - surface.y0;
                y = surface.y0 + (y - surface.y0).rem_euclid(p);
            }
            [x, y]
        }
    }
}

/// A continuous cover sampled on the midpoint t-grid: `M_t` embeddings of
/// one disk whose centers follow an interpolated path.
#[derive(Debug, Clone)]
pub struct ContinuousCover {
    samples: Vec<DiskEmbedding>,
    pub capacity: f64,
    pub eta: f64,
    /// Largest distance between consecutive sampled centers.
    pub max_step: f64,
    band: BandStatus,
}

impl ContinuousCover {
    pub fn m_t(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[DiskEmbedding] {
        &self.samples
    }

    pub fn surface(&self) -> &Arc<ChartedSurface> {
        self.samples[0].surface()
    }

    pub fn band(&self) -> BandStatus {
        self.band
    }

    /// Build a cover directly from sampled embeddings (used by the
    /// discrete-to-continuous construction).
    pub fn from_samples(samples: Vec<DiskEmbedding>, capacity: f64, eta: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("empty sample list".into()));
        }
        let surface = samples[0].surface().clone();
        covering_certificate(&surface, &samples)?;
        let max_step = max_consecutive_step(&surface, &samples);
        let band = worst_band(&samples);
        Ok(ContinuousCover {
            samples,
            capacity,
            eta,
            max_step,
            band,
        })
    }
}

fn center_distance(surface: &ChartedSurface, a: &DiskEmbedding, b: &DiskEmbedding) -> f64 {
    match surface.kind {
        SurfaceKind::Sphere => {
            // geodesic distance on the sphere of radius rho
            let va = surface.unit_vec(a.center[0], a.center[1]);
            let vb = surface.unit_vec(b.center[0], b.center[1]);
            surface.sphere_rho2().sqrt() * dot(va, vb).clamp(-1.0, 1.0).acos()
        }
        _ => surface.chart_dist(a.center, b.center),
    }
}

fn max_consecutive_step(surface: &ChartedSurface, samples: &[DiskEmbedding]) -> f64 {
    samples
        .windows(2)
        .map(|w| center_distance(surface, &w[0], &w[1]))
        .fold(0.0, f64::max)
}

/// Sample a continuous cover of the surface: disk of capacity `c` whose
/// center follows `path`, sampled at the `m_t` midpoint parameters.
/// Fails loudly when the sampled images do not cover the grid.
pub fn make_continuous_cover(
    surface: &Arc<ChartedSurface>,
    path: &CenterPath,
    capacity: f64,
    eta: f64,
    m_t: usize,
    opts: EmbeddingOptions,
) -> Result<ContinuousCover> {
    if m_t < 1 {
        return Err(Error::Config("m_t must be positive".into()));
    }
    let mut samples = Vec::with_capacity(m_t);
    for k in 0..m_t {
        let t = (k as f64 + 0.5) / m_t as f64;
        let c = path.at(t, surface);
        let e = match surface.kind {
            SurfaceKind::Sphere => cap_embedding(surface, c, capacity, eta, opts)?,
            _ => translated_disk(surface, c, capacity, eta)?,
        };
        samples.push(e);
    }
    let cover = ContinuousCover::from_samples(samples, capacity, eta)?;
    // continuity surrogate: consecutive centers must stay within one radius
    let bound = (capacity / PI).sqrt();
    if cover.max_step > bound {
        return Err(Error::BadPath(format!(
            "consecutive sampled centers jump by {} (> radius {bound}); refine m_t or the path",
            cover.max_step
        )));
    }
    Ok(cover)
}

/// Output of the continuous-to-discrete coarse-graining: the selected
/// embeddings, the induced discrete partition, and the window assignment.
#[derive(Debug, Clone)]
pub struct CoarseGrained {
    pub cover: DiscreteCover,
    pub partition: DiscretePartition,
    /// Window index `k` -> discrete set index `r(k)`.
    pub assignment: Vec<usize>,
    /// Discrete set index -> t-sample index it came from.
    pub selected: Vec<usize>,
    pub n_windows: usize,
    pub m_t: usize,
}

/// Constructive surrogate of the Lebesgue number of the inclusion cover:
/// greedily covers the t-interval with runs of samples whose inner disks
/// map inside one image, and returns the smallest run length used.
pub fn lebesgue_number_estimate(cover: &ContinuousCover) -> f64 {
    let m = cover.m_t();
    let samples = cover.samples();
    let mut best_over_cover = f64::INFINITY;
    let mut covered_until = 0usize;
    while covered_until < m {
        let mut best_end = covered_until;
        let mut best_len = 0usize;
        for j in 0..m {
            let mut lo = j;
            while lo > 0 && samples[lo - 1].inner_inside_image_of(&samples[j]) {
                lo -= 1;
            }
            let mut hi = j;
            while hi + 1 < m && samples[hi + 1].inner_inside_image_of(&samples[j]) {
                hi += 1;
            }
            if lo <= covered_until && hi + 1 > best_end {
                best_end = hi + 1;
                best_len = hi + 1 - lo;
            }
        }
        if best_end == covered_until {
            return 0.0; // inclusion cover does not cover I
        }
        best_over_cover = best_over_cover.min(best_len as f64 / m as f64);
        covered_until = best_end;
    }
    best_over_cover
}

/// Coarse-grain a continuous cover and partition into `n_windows` windows
/// `V_k = [(k-1)/N, k/N]`: each window is assigned a target embedding that
/// verifiably contains every nonzero field of the window, and the discrete
/// partition accumulates the window t-integrals.
pub fn coarse_grain(
    cover: &ContinuousCover,
    partition: &ContinuousPartition,
    n_windows: usize,
) -> Result<CoarseGrained> {
    let m_t = cover.m_t();
    if n_windows == 0 || !m_t.is_multiple_of(n_windows) {
        return Err(Error::Misaligned(format!(
            "n_windows {n_windows} must divide m_t {m_t}"
        )));
    }
    if partition.m_t() != m_t {
        return Err(Error::GridMismatch);
    }
    let cells_per = m_t / n_windows;
    let surface = cover.surface().clone();
    let fields = partition.fields();
    let field_nonzero: Vec<bool> = fields.iter().map(|f| f.sup_norm() > 0.0).collect();

    // authoritative support check: supp F_s inside the image of candidate j
    let support_inside = |s: usize, j: usize| -> bool {
        if !field_nonzero[s] {
            return true;
        }
        if cover.samples()[s].inner_inside_image_of(&cover.samples()[j]) {
            return true;
        }
        let f = &fields[s];
        let e = &cover.samples()[j];
        for iy in 0..surface.ny() {
            for ix in 0..surface.nx() {
                if f.get(ix, iy) > 0.0 && !e.contains([surface.xs(ix), surface.ys(iy)]) {
                    return false;
                }
            }
        }
        true
    };

    let mut assignment_samples = Vec::with_capacity(n_windows);
    for k in 0..n_windows {
        let lo = k * cells_per;
        let hi = lo + cells_per;
        // search candidates from the window middle outward
        let mid = lo + cells_per / 2;
        let mut order: Vec<usize> = (lo..hi).collect();
        order.sort_by_key(|&j| (j as i64 - mid as i64).unsigned_abs());
        let mut found = None;
        for j in order {
            if (lo..hi).all(|s| support_inside(s, j)) {
                found = Some(j);
                break;
            }
        }
        match found {
            Some(j) => assignment_samples.push(j),
            None => {
                return Err(Error::NTooSmall {
                    window: k,
                    n: n_windows,
                })
            }
        }
    }

    // deduplicate selected samples into the discrete set list
    let mut selected: Vec<usize> = Vec::new();
    let mut assignment = Vec::with_capacity(n_windows);
    for &j in &assignment_samples {
        let idx = match selected.iter().position(|&x| x == j) {
            Some(i) => i,
            None => {
                selected.push(j);
                selected.len() - 1
            }
        };
        assignment.push(idx);
    }

    let sets: Vec<DiskEmbedding> = selected
        .iter()
        .map(|&j| cover.samples()[j].clone())
        .collect();
    let discrete_cover = DiscreteCover::new(sets)?;

    // F'_j(x) = sum over windows assigned to j of the window t-integral
    let w = 1.0 / m_t as f64;
    let mut out_fields: Vec<ScalarField> = (0..selected.len())
        .map(|_| ScalarField::zeros(surface.clone()))
        .collect();
    for (k, &j) in assignment.iter().enumerate() {
        for f in &fields[k * cells_per..(k + 1) * cells_per] {
            let dst = out_fields[j].data_mut();
            for (d, v) in dst.iter_mut().zip(f.data()) {
                *d += w * v;
            }
        }
    }
    let discrete_partition = DiscretePartition::from_fields(discrete_cover.clone(), out_fields)?;

    Ok(CoarseGrained {
        cover: discrete_cover,
        partition: discrete_partition,
        assignment,
        selected,
        n_windows,
        m_t,
    })
}

/// Output of the discrete-to-continuous interpolation.
#[derive(Debug, Clone)]
pub struct Interpolated {
    pub cover: ContinuousCover,
    pub partition: ContinuousPartition,
    /// Window cell ranges per discrete set: `windows[k] = (first, one past last)`.
    pub windows: Vec<(usize, usize)>,
    pub prefactor: f64,
}

/// Interpolate a discrete cover and partition into a continuous pair: the
/// k-th field is spread with the constant prefactor `3(n+1)/2` over the
/// window `((k-1/3)/(n+1), (k+1/3)/(n+1))` of a path that dwells on each
/// embedding and moves between them in the gaps. `m_t` must be a multiple
/// of `3(n+1)` so windows align with t-cells.
pub fn continuous_from_discrete(
    cover: &DiscreteCover,
    partition: &DiscretePartition,
    m_t: usize,
) -> Result<Interpolated> {
    let n = cover.n();
    if partition.n() != n {
        return Err(Error::GridMismatch);
    }
    let block = 3 * (n + 1);
    if !m_t.is_multiple_of(block) {
        return Err(Error::Misaligned(format!(
            "m_t {m_t} must be a multiple of 3(n+1) = {block}"
        )));
    }
    let surface = cover.surface().clone();
    let q = m_t / block;

    // window k (1-based in the construction) spans cells [(3k-1)q, (3k+1)q)
    let windows: Vec<(usize, usize)> = (1..=n)
        .map(|k| ((3 * k - 1) * q, (3 * k + 1) * q))
        .collect();
    let window_of_cell =
        |s: usize| -> Option<usize> { windows.iter().position(|&(lo, hi)| s >= lo && s < hi) };

    // path: dwell on center k inside (and slightly around) its window,
    // interpolate in the gaps
    let anchors: Vec<f64> = (1..=n).map(|k| k as f64 / (n + 1) as f64).collect();
    let third = 1.0 / (3.0 * (n + 1) as f64);
    let center_at = |t: f64| -> [f64; 2] {
        if t <= anchors[0] + third {
            return cover.sets()[0].center;
        }
        if t >= anchors[n - 1] - third {
            return cover.sets()[n - 1].center;
        }
        for k in 0..n - 1 {
            let gap_lo = anchors[k] + third;
            let gap_hi = anchors[k + 1] - third;
            if t <= gap_lo {
                return cover.sets()[k].center;
            }
            if t < gap_hi {
                let frac = (t - gap_lo) / (gap_hi - gap_lo);
                return interpolate_centers(
                    &surface,
                    cover.sets()[k].center,
                    cover.sets()[k + 1].center,
                    frac,
                );
            }
        }
        cover.sets()[n - 1].center
    };

    let capacity = cover.sets()[0].capacity;
    let eta = cover.sets()[0].eta;
    let opts = EmbeddingOptions {
        allow_band_overlap: true,
    };
    let mut samples = Vec::with_capacity(m_t);
    for s in 0..m_t {
        let t = (s as f64 + 0.5) / m_t as f64;
        let c = center_at(t);
        let e = match surface.kind {
            SurfaceKind::Sphere => cap_embedding(&surface, c, capacity, eta, opts)?,
            _ => translated_disk(&surface, c, capacity, eta)?,
        };
        samples.push(e);
    }
    // verify the path interpolates the discrete embeddings on their windows
    for (k, &(lo, hi)) in windows.iter().enumerate() {
        for (s, sample) in samples.iter().enumerate().take(hi).skip(lo) {
            let d = center_distance(&surface, sample, &cover.sets()[k]);
            if d > 1e-12 {
                return Err(Error::BadPath(format!(
                    "sample {s} drifts {d} from embedding {k} inside its window"
                )));
            }
        }
    }
    let cont_cover = ContinuousCover::from_samples(samples, capacity, eta)?;

    let prefactor = 1.5 * (n + 1) as f64;
    let zeros = ScalarField::zeros(surface.clone());
    let mut fields = Vec::with_capacity(m_t);
    for s in 0..m_t {
        match window_of_cell(s) {
            Some(k) => {
                let mut f = partition.fields()[k].clone();
                f.scale(prefactor);
                fields.push(f);
            }
            None => fields.push(zeros.clone()),
        }
    }
    let cont_partition = ContinuousPartition::from_fields(cont_cover.clone(), fields)?;

    Ok(Interpolated {
        cover: cont_cover,
        partition: cont_partition,
        windows,
        prefactor,
    })
}

impl Interpolated {
    /// The discrete weight induced by an interval weight (values per t-cell):
    /// `a'(k) = (3(n+1)/2) * integral of alpha over window k`.
    pub fn induced_discrete_weight(&self, alpha_cells: &[f64]) -> Vec<f64> {
        let m_t = self.partition.m_t();
        assert_eq!(alpha_cells.len(), m_t);
        let n = self.windows.len();
        self.windows
            .iter()
            .map(|&(lo, hi)| {
                let sum: f64 = alpha_cells[lo..hi].iter().sum();
                1.5 * (n + 1) as f64 * sum / m_t as f64
            })
            .collect()
    }
}

/// A cover parametrized by the square `T = [0,1]^2`, sampled on the dyadic
/// midpoint grid of the given level (one embedding per T-cell, ordered
/// lexicographically with the first axis fastest).
#[derive(Debug, Clone)]
pub struct SquareCover {
    pub level: u32,
    sets: Vec<DiskEmbedding>,
}

impl SquareCover {
    /// Build from a center map `T -> surface`.
    pub fn from_center_map<F: Fn(f64, f64) -> [f64; 2]>(
        surface: &Arc<ChartedSurface>,
        level: u32,
        capacity: f64,
        eta: f64,
        center: F,
        opts: EmbeddingOptions,
    ) -> Result<Self> {
        let side = 1usize << level;
        let mut sets = Vec::with_capacity(side * side);
        for iy in 0..side {
            for ix in 0..side {
                let t1 = (ix as f64 + 0.5) / side as f64;
                let t2 = (iy as f64 + 0.5) / side as f64;
                let c = center(t1, t2);
                let e = match surface.kind {
                    SurfaceKind::Sphere => cap_embedding(surface, c, capacity, eta, opts)?,
                    _ => translated_disk(surface, c, capacity, eta)?,
                };
                sets.push(e);
            }
        }
        covering_certificate(surface, &sets)?;
        Ok(SquareCover { level, sets })
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[DiskEmbedding] {
        &self.sets
    }

    pub fn surface(&self) -> &Arc<ChartedSurface> {
        self.sets[0].surface()
    }
}

/// Affine slab embedding `iota : K = [0,1] x [-1,1] -> int D`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlabEmbedding {
    pub anchor: [f64; 2],
    pub u_len: f64,
    pub x_halfwidth: f64,
}

impl SlabEmbedding {
    pub fn eval(&self, u: f64, x: f64) -> [f64; 2] {
        [
            self.anchor[0] + u * self.u_len,
            self.anchor[1] + x * self.x_halfwidth,
        ]
    }

    /// Volume of the image, `u_len * 2 * x_halfwidth`.
    pub fn image_volume(&self) -> f64 {
        self.u_len * 2.0 * self.x_halfwidth
    }
}

/// Transverse profile: samples of a nonnegative bump on the `M_x` midpoint
/// cells of `[-1,1]`, normalized so the discrete fiber weights
/// `c_x = rho_x / M_x` sum to exactly 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberProfile {
    pub values: Vec<f64>,
}

impl FiberProfile {
    /// The shipped quartic bump `(1 - x^2)^2`, discretely normalized.
    pub fn quartic(m_x: usize) -> Self {
        let raw: Vec<f64> = (0..m_x)
            .map(|i| {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / m_x as f64;
                let b = 1.0 - x * x;
                b * b
            })
            .collect();
        let mean = raw.iter().sum::<f64>() / m_x as f64;
        FiberProfile {
            values: raw.iter().map(|v| v / mean).collect(),
        }
    }

    pub fn m_x(&self) -> usize {
        self.values.len()
    }

    /// Discrete fiber weights `c_x`, summing to 1.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.values.len() as f64;
        self.values.iter().map(|v| v / m).collect()
    }

    pub fn fiber_mass(&self) -> f64 {
        self.weights().iter().sum()
    }
}

/// A bicover: a T-parametrized cover agreeing with the pullback of an outer
/// cover outside a closed ball `D` in `T` and with an interval cover along
/// an embedded slab inside `D`.
#[derive(Debug, Clone)]
pub struct Bicover {
    pub outer: SquareCover,
    pub inner: ContinuousCover,
    /// The closed ball `D` inside `int T`, realized as an axis-aligned box.
    pub disk_lo: [f64; 2],
    pub disk_hi: [f64; 2],
    pub slab: SlabEmbedding,
    pub rho: FiberProfile,
}

/// Assemble and verify a bicover: `D` strictly inside `T`, the slab image
/// strictly inside `D`, and unit discrete fiber mass.
pub fn make_bicover(
    outer: SquareCover,
    inner: ContinuousCover,
    disk_lo: [f64; 2],
    disk_hi: [f64; 2],
    slab: SlabEmbedding,
    rho: FiberProfile,
) -> Result<Bicover> {
    for j in 0..2 {
        if !(0.0 < disk_lo[j] && disk_lo[j] < disk_hi[j] && disk_hi[j] < 1.0) {
            return Err(Error::BadBicover(
                "ball D must sit strictly inside int T".into(),
            ));
        }
    }
    for (u, x) in [(0.0, -1.0), (0.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
        let p = slab.eval(u, x);
        if !(disk_lo[0] < p[0] && p[0] < disk_hi[0] && disk_lo[1] < p[1] && p[1] < disk_hi[1]) {
            return Err(Error::BadBicover(format!(
                "slab corner ({}, {}) leaves int D",
                p[0], p[1]
            )));
        }
    }
    let mass = rho.fiber_mass();
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::BadBicover(format!(
            "fiber mass {mass} differs from 1"
        )));
    }
    if !outer.surface().same_grid(inner.surface()) {
        return Err(Error::GridMismatch);
    }
    Ok(Bicover {
        outer,
        inner,
        disk_lo,
        disk_hi,
        slab,
        rho,
    })
}

impl Bicover {
    /// Pointwise residuals of the defining conditions on a T-grid of the
    /// given side: outside `int D` the bicover is the pullback of the outer
    /// cover under the quotient map, on the slab it equals the inner cover.
    /// The construction realizes both branches definitionally, so the
    /// residuals vanish; this walks the grid and confirms the branches are
    /// actually reachable.
    pub fn condition_residuals(&self, t_side: usize) -> (f64, f64) {
        let mut seen_outside = false;
        let mut seen_slab = false;
        for iy in 0..t_side {
            for ix in 0..t_side {
                let t = [
                    (ix as f64 + 0.5) / t_side as f64,
                    (iy as f64 + 0.5) / t_side as f64,
                ];
                let in_d = self.disk_lo[0] < t[0]
                    && t[0] < self.disk_hi[0]
                    && self.disk_lo[1] < t[1]
                    && t[1] < self.disk_hi[1];
                if !in_d {
                    seen_outside = true;
                } else {
                    let u = (t[0] - self.slab.anchor[0]) / self.slab.u_len;
                    let x = (t[1] - self.slab.anchor[1]) / self.slab.x_halfwidth;
                    if (0.0..=1.0).contains(&u) && (-1.0..=1.0).contains(&x) {
                        seen_slab = true;
                    }
                }
            }
        }
        let r2 = if seen_outside { 0.0 } else { f64::NAN };
        let r3 = if seen_slab { 0.0 } else { f64::NAN };
        (r2, r3)
    }
}

/// Versioned JSON descriptor for covers (external interface).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverDescriptor {
    pub version: u32,
    pub surface: SurfaceDescriptor,
    pub capacity: f64,
    pub eta: f64,
    #[serde(flatten)]
    pub kind: CoverKindDescriptor,
    #[serde(default)]
    pub allow_band_overlap: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceDescriptor {
    pub kind: SurfaceKind,
    pub area: f64,
    pub nx: usize,
    pub ny: usize,
    #[serde(default)]
    pub pole_band_cells: Option<f64>,
}

impl SurfaceDescriptor {
    pub fn build(&self) -> Result<Arc<ChartedSurface>> {
        ChartedSurface::make(
            self.kind,
            self.area,
            crate::surface::GridSpec::new(self.nx, self.ny),
            self.pole_band_cells,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "cover_kind", rename_all = "snake_case")]
pub enum CoverKindDescriptor {
    Discrete { centers: Vec<[f64; 2]> },
    Continuous { path: CenterPath, m_t: usize },
}

/// Built cover of either kind.
#[derive(Debug, Clone)]
pub enum BuiltCover {
    Discrete(DiscreteCover),
    Continuous(ContinuousCover),
}

impl CoverDescriptor {
    pub fn build(&self) -> Result<BuiltCover> {
        let surface = self.surface.build()?;
        let opts = EmbeddingOptions {
            allow_band_overlap: self.allow_band_overlap,
        };
        match &self.kind {
            CoverKindDescriptor::Discrete { centers } => {
                let sets: Result<Vec<DiskEmbedding>> = centers
                    .iter()
                    .map(|&c| match surface.kind {
                        SurfaceKind::Sphere => {
                            cap_embedding(&surface, c, self.capacity, self.eta, opts)
                        }
                        _ => translated_disk(&surface, c, self.capacity, self.eta),
                    })
                    .collect();
                Ok(BuiltCover::Discrete(DiscreteCover::new(sets?)?))
            }
            CoverKindDescriptor::Continuous { path, m_t } => Ok(BuiltCover::Continuous(
                make_continuous_cover(&surface, path, self.capacity, self.eta, *m_t, opts)?,
            )),
        }
    }
}
