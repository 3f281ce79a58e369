//! Two-dimensional symplectic surfaces presented in Darboux charts.
//!
//! Every surface is a rectangle `[x0,x1] x [y0,y1]` carrying the flat area
//! form `dx ^ dy`, sampled on a cell-centered grid. Three chart kinds are
//! supported:
//!
//! * `Plane`  - a square patch of the plane, no periodicity;
//! * `Torus`  - both axes periodic, chart `[0, sqrt(A)]^2`;
//! * `Sphere` - cylindrical area coordinates `(theta, z)` with
//!   `theta in [0, 2pi)` periodic and `z in [-A/4pi, A/4pi]`. The chart is
//!   singular at the poles; a configurable band of `z`-cells next to each
//!   pole is masked out of all bracket evaluations.
//!
//! In these charts the Poisson bracket is the flat one,
//! `{f,g} = df/dx dg/dy - df/dy dg/dx`, evaluated by central finite
//! differences with periodic wrap where applicable.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Plane,
    Torus,
    Sphere,
}

/// Grid resolution. Spacings are derived from the chart rectangle; periodic
/// axes omit the duplicate endpoint, so every axis has exactly `n` cells of
/// width `(hi - lo) / n` with samples at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Self {
        GridSpec { nx, ny }
    }
}

/// A 2D symplectic surface in a Darboux chart, together with its sample grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartedSurface {
    pub kind: SurfaceKind,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub periodic_x: bool,
    pub periodic_y: bool,
    /// Total area of the surface (chart area equals it in all three kinds).
    pub area: f64,
    pub grid: GridSpec,
    /// Half-width of the polar exclusion band in `z` units (sphere only, 0 otherwise).
    pub pole_band: f64,
}

/// Default polar band half-width, in grid cells.
pub const DEFAULT_POLE_BAND_CELLS: f64 = 4.0;

impl ChartedSurface {
    /// Build a surface of the given kind and total area on the given grid.
    /// `pole_band_cells` selects the sphere's polar exclusion half-width in
    /// multiples of the z-spacing; `None` uses [`DEFAULT_POLE_BAND_CELLS`].
    pub fn make(
        kind: SurfaceKind,
        area: f64,
        grid: GridSpec,
        pole_band_cells: Option<f64>,
    ) -> Result<Arc<Self>> {
        if !area.is_finite() || area <= 0.0 {
            return Err(Error::NonpositiveArea(area));
        }
        if grid.nx < 8 || grid.ny < 8 {
            return Err(Error::GridTooCoarse {
                nx: grid.nx,
                ny: grid.ny,
            });
        }
        let surf = match kind {
            SurfaceKind::Plane | SurfaceKind::Torus => {
                let side = area.sqrt();
                let periodic = kind == SurfaceKind::Torus;
                ChartedSurface {
                    kind,
                    x0: 0.0,
                    x1: side,
                    y0: 0.0,
                    y1: side,
                    periodic_x: periodic,
                    periodic_y: periodic,
                    area,
                    grid,
                    pole_band: 0.0,
                }
            }
            SurfaceKind::Sphere => {
                let zmax = area / (4.0 * PI);
                let hz = 2.0 * zmax / grid.ny as f64;
                let cells = pole_band_cells.unwrap_or(DEFAULT_POLE_BAND_CELLS);
                let band = cells * hz;
                if !band.is_finite() || band <= 0.0 {
                    return Err(Error::BadPoleBand(format!(
                        "band of {cells} cells is not positive"
                    )));
                }
                if band >= 0.5 * zmax {
                    return Err(Error::BadPoleBand(format!(
                        "band {band} too wide for z-extent {zmax}"
                    )));
                }
                ChartedSurface {
                    kind,
                    x0: 0.0,
                    x1: 2.0 * PI,
                    y0: -zmax,
                    y1: zmax,
                    periodic_x: true,
                    periodic_y: false,
                    area,
                    grid,
                    pole_band: band,
                }
            }
        };
        Ok(Arc::new(surf))
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn ny(&self) -> usize {
        self.grid.ny
    }

    pub fn len(&self) -> usize {
        self.grid.nx * self.grid.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / self.grid.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / self.grid.ny as f64
    }

    /// Cell-center abscissa of column `ix`.
    pub fn xs(&self, ix: usize) -> f64 {
        self.x0 + (ix as f64 + 0.5) * self.hx()
    }

    /// Cell-center ordinate of row `iy`.
    pub fn ys(&self, iy: usize) -> f64 {
        self.y0 + (iy as f64 + 0.5) * self.hy()
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.grid.nx + ix
    }

    pub fn coords_of(&self, idx: usize) -> (usize, usize) {
        (idx % self.grid.nx, idx / self.grid.nx)
    }

    /// Grid rows masked by the polar exclusion band (sphere only).
    pub fn is_masked_row(&self, iy: usize) -> bool {
        if self.kind != SurfaceKind::Sphere {
            return false;
        }
        let z = self.ys(iy);
        z > self.y1 - self.pole_band || z < self.y0 + self.pole_band
    }

    pub fn is_masked(&self, ix: usize, iy: usize) -> bool {
        let _ = ix;
        self.is_masked_row(iy)
    }

    /// Shortest representative of `dx` along the x-axis.
    pub fn wrap_dx(&self, dx: f64) -> f64 {
        if self.periodic_x {
            let period = self.x1 - self.x0;
            let mut d = dx % period;
            if d > 0.5 * period {
                d -= period;
            } else if d < -0.5 * period {
                d += period;
            }
            d
        } else {
            dx
        }
    }

    pub fn wrap_dy(&self, dy: f64) -> f64 {
        if self.periodic_y {
            let period = self.y1 - self.y0;
            let mut d = dy % period;
            if d > 0.5 * period {
                d -= period;
            } else if d < -0.5 * period {
                d += period;
            }
            d
        } else {
            dy
        }
    }

    /// Chart distance between two points (torus uses shortest representatives).
    /// Not meaningful on the sphere; use angular distances there.
    pub fn chart_dist(&self, p: [f64; 2], q: [f64; 2]) -> f64 {
        let dx = self.wrap_dx(p[0] - q[0]);
        let dy = self.wrap_dy(p[1] - q[1]);
        (dx * dx + dy * dy).sqrt()
    }

    /// Sphere radius squared, `A / 4pi`.
    pub fn sphere_rho2(&self) -> f64 {
        self.area / (4.0 * PI)
    }

    /// Unit vector of the chart point `(theta, z)` on the round sphere.
    pub fn unit_vec(&self, theta: f64, z: f64) -> [f64; 3] {
        let zeta = (z / self.sphere_rho2()).clamp(-1.0, 1.0);
        let r = (1.0 - zeta * zeta).max(0.0).sqrt();
        [r * theta.cos(), r * theta.sin(), zeta]
    }

    /// Chart coordinates of a unit vector; `theta` is reduced to `[0, 2pi)`.
    pub fn chart_of_unit(&self, v: [f64; 3]) -> [f64; 2] {
        let mut theta = v[1].atan2(v[0]);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        [theta, v[2].clamp(-1.0, 1.0) * self.sphere_rho2()]
    }

    pub fn same_grid(&self, other: &ChartedSurface) -> bool {
        self.kind == other.kind
            && self.grid == other.grid
            && self.x0 == other.x0
            && self.x1 == other.x1
            && self.y0 == other.y0
            && self.y1 == other.y1
    }
}

/// Finite-difference stencil order for the bracket and gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FdOrder {
    #[default]
    Two,
    Four,
}

/// A real-valued sample table over a surface grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    surface: Arc<ChartedSurface>,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(surface: Arc<ChartedSurface>) -> Self {
        let n = surface.len();
        ScalarField {
            surface,
            data: vec![0.0; n],
        }
    }

    pub fn constant(surface: Arc<ChartedSurface>, value: f64) -> Self {
        let n = surface.len();
        ScalarField {
            surface,
            data: vec![value; n],
        }
    }

    /// Sample `f(x, y)` at every cell center.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(surface: Arc<ChartedSurface>, f: F) -> Self {
        let (nx, ny) = (surface.nx(), surface.ny());
        let mut data = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            let y = surface.ys(iy);
            for ix in 0..nx {
                data.push(f(surface.xs(ix), y));
            }
        }
        ScalarField { surface, data }
    }

    pub fn from_data(surface: Arc<ChartedSurface>, data: Vec<f64>) -> Result<Self> {
        if data.len() != surface.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField { surface, data })
    }

    pub fn surface(&self) -> &Arc<ChartedSurface> {
        &self.surface
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.data[self.surface.idx(ix, iy)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, v: f64) {
        let i = self.surface.idx(ix, iy);
        self.data[i] = v;
    }

    /// C0 supremum norm over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Rectangle-rule quadrature against the flat area form.
    pub fn integrate(&self) -> f64 {
        let w = self.surface.hx() * self.surface.hy();
        self.data.iter().sum::<f64>() * w
    }

    /// True if any sample in the polar exclusion band is nonzero.
    pub fn has_band_support(&self) -> bool {
        let s = &self.surface;
        if s.kind != SurfaceKind::Sphere {
            return false;
        }
        for iy in 0..s.ny() {
            if s.is_masked_row(iy) {
                let row = &self.data[iy * s.nx()..(iy + 1) * s.nx()];
                if row.iter().any(|&v| v != 0.0) {
                    return true;
                }
            }
        }
        false
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    /// Partial derivative along x by central differences (wraps on periodic
    /// axes, one-sided second-order stencils at non-periodic edges).
    pub fn dx(&self, order: FdOrder) -> ScalarField {
        self.derive(order, true)
    }

    /// Partial derivative along y.
    pub fn dy(&self, order: FdOrder) -> ScalarField {
        self.derive(order, false)
    }

    fn derive(&self, order: FdOrder, along_x: bool) -> ScalarField {
        let s = self.surface.clone();
        let (nx, ny) = (s.nx(), s.ny());
        let (n, periodic, h) = if along_x {
            (nx, s.periodic_x, s.hx())
        } else {
            (ny, s.periodic_y, s.hy())
        };
        let mut out = vec![0.0; nx * ny];
        let val = |ix: usize, iy: usize| self.data[iy * nx + ix];
        let stencil = |i: usize, other: usize| -> f64 {
            let at = |k: i64| -> f64 {
                let j = if periodic {
                    (i as i64 + k).rem_euclid(n as i64) as usize
                } else {
                    (i as i64 + k) as usize
                };
                if along_x {
                    val(j, other)
                } else {
                    val(other, j)
                }
            };
            let interior4 = i >= 2 && i + 2 < n;
            let interior2 = i >= 1 && i + 1 < n;
            match order {
                FdOrder::Four if periodic || interior4 => {
                    (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h)
                }
                _ if periodic || interior2 => (at(1) - at(-1)) / (2.0 * h),
                _ if i == 0 => (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h),
                _ => (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h),
            }
        };
        for iy in 0..ny {
            for ix in 0..nx {
                out[iy * nx + ix] = if along_x {
                    stencil(ix, iy)
                } else {
                    stencil(iy, ix)
                };
            }
        }
        ScalarField {
            surface: s,
            data: out,
        }
    }

    /// CSV dump: one header line `nx,ny,x0,x1,y0,y1`, then row-major samples,
    /// one grid row per line.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let s = &self.surface;
        writeln!(
            w,
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e}",
            s.nx(),
            s.ny(),
            s.x0,
            s.x1,
            s.y0,
            s.y1
        )?;
        for iy in 0..s.ny() {
            let row = &self.data[iy * s.nx()..(iy + 1) * s.nx()];
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Flat binary dump: `nx`, `ny` as little-endian u64, the chart rectangle
    /// as four little-endian f64, then the row-major samples.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let s = &self.surface;
        w.write_all(&(s.nx() as u64).to_le_bytes())?;
        w.write_all(&(s.ny() as u64).to_le_bytes())?;
        for v in [s.x0, s.x1, s.y0, s.y1] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Poisson bracket `{f,g} = fx gy - fy gx` in Darboux coordinates.
///
/// On the sphere the rows inside the polar exclusion band are masked to zero;
/// the result is only meaningful for fields supported away from the poles,
/// which this entry point enforces. [`poisson_bracket_masked`] skips that
/// check for callers that handle band bookkeeping themselves.
pub fn poisson_bracket(f: &ScalarField, g: &ScalarField, order: FdOrder) -> Result<ScalarField> {
    if f.has_band_support() || g.has_band_support() {
        return Err(Error::PolarSupport);
    }
    poisson_bracket_masked(f, g, order)
}

/// Bracket without the band-support precondition; band rows are zeroed.
pub fn poisson_bracket_masked(
    f: &ScalarField,
    g: &ScalarField,
    order: FdOrder,
) -> Result<ScalarField> {
    if !f.surface.same_grid(&g.surface) {
        return Err(Error::GridMismatch);
    }
    let fx = f.dx(order);
    let fy = f.dy(order);
    let gx = g.dx(order);
    let gy = g.dy(order);
    Ok(bracket_of_grads(&fx, &fy, &gx, &gy))
}

/// Bracket from precomputed gradients (used by the matrix-field builder).
pub(crate) fn bracket_of_grads(
    fx: &ScalarField,
    fy: &ScalarField,
    gx: &ScalarField,
    gy: &ScalarField,
) -> ScalarField {
    let s = fx.surface.clone();
    let mut out = vec![0.0; s.len()];
    for iy in 0..s.ny() {
        let masked = s.is_masked_row(iy);
        for ix in 0..s.nx() {
            let i = iy * s.nx() + ix;
            out[i] = if masked {
                0.0
            } else {
                fx.data[i] * gy.data[i] - fy.data[i] * gx.data[i]
            };
        }
    }
    ScalarField {
        surface: s,
        data: out,
    }
}

/// Hofer displacement energy of an open cap of the given area inside a
/// surface of total area `area`: equals the cap area for displaceable caps
/// (area below half the total) and is infinite otherwise.
pub fn displacement_energy_cap(cap_area: f64, area: f64) -> Result<f64> {
    if !cap_area.is_finite() || cap_area <= 0.0 || cap_area >= area {
        return Err(Error::BadCapArea { cap_area, area });
    }
    if cap_area < 0.5 * area {
        Ok(cap_area)
    } else {
        Ok(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(n: usize) -> Arc<ChartedSurface> {
        ChartedSurface::make(SurfaceKind::Torus, 1.0, GridSpec::new(n, n), None).unwrap()
    }

    #[test]
    fn make_surface_charts() {
        let t = torus(128);
        assert_eq!((t.x0, t.x1, t.y0, t.y1), (0.0, 1.0, 0.0, 1.0));
        assert!(t.periodic_x && t.periodic_y);

        let s =
            ChartedSurface::make(SurfaceKind::Sphere, 4.0 * PI, GridSpec::new(256, 128), None)
                .unwrap();
        assert!((s.y0 + 1.0).abs() < 1e-15 && (s.y1 - 1.0).abs() < 1e-15);
        assert!((s.x1 - 2.0 * PI).abs() < 1e-15);
        assert!(s.periodic_x && !s.periodic_y);

        let p = ChartedSurface::make(SurfaceKind::Plane, 1.0, GridSpec::new(64, 64), None).unwrap();
        assert!(!p.periodic_x && !p.periodic_y);
        assert_eq!((p.x0, p.x1), (0.0, 1.0));
    }

    #[test]
    fn make_surface_rejects_bad_input() {
        assert!(matches!(
            ChartedSurface::make(SurfaceKind::Torus, -1.0, GridSpec::new(16, 16), None),
            Err(Error::NonpositiveArea(_))
        ));
        assert!(matches!(
            ChartedSurface::make(SurfaceKind::Torus, 1.0, GridSpec::new(4, 16), None),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn bracket_of_coordinates_is_one() {
        let p = ChartedSurface::make(SurfaceKind::Plane, 1.0, GridSpec::new(64, 64), None).unwrap();
        let f = ScalarField::from_fn(p.clone(), |x, _| x);
        let g = ScalarField::from_fn(p, |_, y| y);
        let b = poisson_bracket(&f, &g, FdOrder::Two).unwrap();
        let err = b.data().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "max abs error {err}");
    }

    #[test]
    fn bracket_is_antisymmetric_and_vanishes_on_diagonal() {
        let t = torus(64);
        let f = ScalarField::from_fn(t.clone(), |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).cos());
        let same = poisson_bracket(&f, &f, FdOrder::Two).unwrap();
        assert_eq!(same.sup_norm(), 0.0);

        let g = ScalarField::from_fn(t, |x, y| (4.0 * PI * x).cos() + y);
        let fg = poisson_bracket(&f, &g, FdOrder::Two).unwrap();
        let gf = poisson_bracket(&g, &f, FdOrder::Two).unwrap();
        for (a, b) in fg.data().iter().zip(gf.data()) {
            assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn bracket_matches_analytic_oracle_on_torus() {
        // {sin 2pix, sin 2piy} = 4pi^2 cos(2pix) cos(2piy)
        let t = torus(128);
        let f = ScalarField::from_fn(t.clone(), |x, _| (2.0 * PI * x).sin());
        let g = ScalarField::from_fn(t.clone(), |_, y| (2.0 * PI * y).sin());
        let b = poisson_bracket(&f, &g, FdOrder::Two).unwrap();
        let oracle = ScalarField::from_fn(t.clone(), |x, y| {
            4.0 * PI * PI * (2.0 * PI * x).cos() * (2.0 * PI * y).cos()
        });
        let h = t.hx();
        let mut err = 0.0f64;
        for (a, b) in b.data().iter().zip(oracle.data()) {
            err = err.max((a - b).abs());
        }
        // constant C covers 16 pi^4 / 3 ~ 520 (sinc^2 factor on the product)
        assert!(err < 600.0 * h * h, "err {err} vs bound {}", 600.0 * h * h);
    }

    #[test]
    fn fourth_order_is_more_accurate() {
        let t = torus(64);
        let f = ScalarField::from_fn(t.clone(), |x, _| (2.0 * PI * x).sin());
        let g = ScalarField::from_fn(t.clone(), |_, y| (2.0 * PI * y).sin());
        let oracle = ScalarField::from_fn(t, |x, y| {
            4.0 * PI * PI * (2.0 * PI * x).cos() * (2.0 * PI * y).cos()
        });
        let err = |order| {
            let b = poisson_bracket(&f, &g, order).unwrap();
            b.data()
                .iter()
                .zip(oracle.data())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        };
        assert!(err(FdOrder::Four) < 0.05 * err(FdOrder::Two));
    }

    #[test]
    fn sup_norm_examples() {
        let t = torus(128);
        assert_eq!(ScalarField::constant(t.clone(), 1.0).sup_norm(), 1.0);
        assert_eq!(ScalarField::zeros(t.clone()).sup_norm(), 0.0);
        let f = ScalarField::from_fn(t, |x, _| (2.0 * PI * x).sin());
        assert!((f.sup_norm() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn integrate_examples() {
        let t = torus(128);
        assert_eq!(ScalarField::constant(t.clone(), 1.0).integrate(), 1.0);
        assert_eq!(ScalarField::zeros(t.clone()).integrate(), 0.0);

        // radial bump (1 - (r/R)^2)^2 of analytic mass pi R^2 / 3
        let rr = 0.3;
        let f = ScalarField::from_fn(t.clone(), |x, y| {
            let dx = x - 0.5;
            let dy = y - 0.5;
            let s2 = (dx * dx + dy * dy) / (rr * rr);
            if s2 < 1.0 {
                (1.0 - s2) * (1.0 - s2)
            } else {
                0.0
            }
        });
        let mass = PI * rr * rr / 3.0;
        let h = t.hx();
        assert!((f.integrate() - mass).abs() < 5.0 * h * h);
    }

    #[test]
    fn bracket_integral_vanishes_for_compact_support() {
        let t = torus(128);
        let bump = |cx: f64, cy: f64, rr: f64| {
            ScalarField::from_fn(t.clone(), move |x, y| {
                let dx = x - cx;
                let dy = y - cy;
                let s2 = (dx * dx + dy * dy) / (rr * rr);
                if s2 < 1.0 {
                    (1.0 - s2).powi(3)
                } else {
                    0.0
                }
            })
        };
        let f = bump(0.4, 0.5, 0.3);
        let g = bump(0.55, 0.5, 0.3);
        let b = poisson_bracket(&f, &g, FdOrder::Two).unwrap();
        assert!(b.integrate().abs() < 1e-10);
    }

    #[test]
    fn leibniz_residual_is_second_order() {
        let residual = |n: usize| {
            let t = torus(n);
            let f = ScalarField::from_fn(t.clone(), |x, y| {
                (2.0 * PI * x).sin() * (2.0 * PI * y).cos()
            });
            let g = ScalarField::from_fn(t.clone(), |x, y| (2.0 * PI * (x + y)).cos());
            let h = ScalarField::from_fn(t.clone(), |x, y| (2.0 * PI * (x - 2.0 * y)).sin());
            let gh = ScalarField::from_data(
                t.clone(),
                g.data().iter().zip(h.data()).map(|(a, b)| a * b).collect(),
            )
            .unwrap();
            let lhs = poisson_bracket(&f, &gh, FdOrder::Two).unwrap();
            let fh = poisson_bracket(&f, &h, FdOrder::Two).unwrap();
            let fg = poisson_bracket(&f, &g, FdOrder::Two).unwrap();
            let mut worst = 0.0f64;
            for i in 0..lhs.data().len() {
                let r = lhs.data()[i] - g.data()[i] * fh.data()[i] - h.data()[i] * fg.data()[i];
                worst = worst.max(r.abs());
            }
            worst
        };
        let (e1, e2) = (residual(64), residual(128));
        assert!(e2 < e1 / 3.0, "no h^2 decay: {e1} -> {e2}");
    }

    #[test]
    fn displacement_energy_examples() {
        assert_eq!(displacement_energy_cap(PI, 4.0 * PI).unwrap(), PI);
        assert_eq!(
            displacement_energy_cap(3.0 * PI, 4.0 * PI).unwrap(),
            f64::INFINITY
        );
        let a = 2.0;
        let e = displacement_energy_cap(a / 2.0 - 1e-9, a).unwrap();
        assert_eq!(e, a / 2.0 - 1e-9);
        assert!(displacement_energy_cap(-1.0, a).is_err());
        assert!(displacement_energy_cap(a, a).is_err());
    }

    #[test]
    fn sphere_band_masking() {
        let s =
            ChartedSurface::make(SurfaceKind::Sphere, 4.0 * PI, GridSpec::new(64, 64), None)
                .unwrap();
        assert!(s.is_masked_row(0));
        assert!(s.is_masked_row(63));
        assert!(!s.is_masked_row(32));
        let f = ScalarField::constant(s.clone(), 1.0);
        assert!(f.has_band_support());
        assert!(matches!(
            poisson_bracket(&f, &f, FdOrder::Two),
            Err(Error::PolarSupport)
        ));
        // masked variant zeroes the band rows
        let b = poisson_bracket_masked(&f, &f, FdOrder::Two).unwrap();
        assert_eq!(b.sup_norm(), 0.0);
    }
}
