//! Shipped reference scenarios: verified cover-and-partition instances used
//! by the consistency suites, the CLI examples, and the regression tests.
//!
//! Every builder verifies its covering certificate at construction, so a
//! successful return is itself evidence the configuration is admissible.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::cover::{
    cap_embedding, continuous_from_discrete, make_continuous_cover, translated_disk, CenterPath,
    ContinuousCover, DiscreteCover, EmbeddingOptions, SquareCover,
};
use crate::error::Result;
use crate::partition::{
    canonical_partition_continuous, canonical_partition_discrete, canonical_partition_square,
    BumpProfile, ContinuousPartition, DiscretePartition, SquarePartition,
};
use crate::surface::{ChartedSurface, GridSpec, SurfaceKind};

/// A named scenario: a cover with its canonical partition.
pub enum Scenario {
    Discrete {
        name: &'static str,
        cover: DiscreteCover,
        partition: DiscretePartition,
    },
    Continuous {
        name: &'static str,
        cover: ContinuousCover,
        partition: ContinuousPartition,
    },
    Square {
        name: &'static str,
        cover: SquareCover,
        partition: SquarePartition,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Discrete { name, .. }
            | Scenario::Continuous { name, .. }
            | Scenario::Square { name, .. } => name,
        }
    }
}

pub fn torus_surface(n: usize) -> Result<Arc<ChartedSurface>> {
    ChartedSurface::make(SurfaceKind::Torus, 1.0, GridSpec::new(n, n), None)
}

pub fn sphere_surface(nx: usize, ny: usize, band_cells: f64) -> Result<Arc<ChartedSurface>> {
    ChartedSurface::make(
        SurfaceKind::Sphere,
        4.0 * PI,
        GridSpec::new(nx, ny),
        Some(band_cells),
    )
}

/// Three translated disks of capacity 0.6 along the torus diagonal.
pub fn torus_three_disk(n: usize) -> Result<(DiscreteCover, DiscretePartition)> {
    let t = torus_surface(n)?;
    let cover = DiscreteCover::new(vec![
        translated_disk(&t, [0.0, 0.0], 0.6, 0.1)?,
        translated_disk(&t, [1.0 / 3.0, 1.0 / 3.0], 0.6, 0.1)?,
        translated_disk(&t, [2.0 / 3.0, 2.0 / 3.0], 0.6, 0.1)?,
    ])?;
    let partition = canonical_partition_discrete(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

/// Two-row boustrophedon continuous cover of the torus.
pub fn torus_two_row(n: usize, m_t: usize) -> Result<(ContinuousCover, ContinuousPartition)> {
    let t = torus_surface(n)?;
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
    let cover = make_continuous_cover(&t, &path, 0.3, 0.1, m_t, EmbeddingOptions::default())?;
    let partition = canonical_partition_continuous(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

/// Minimal k x k lattice cover of the torus at the given capacity.
pub fn torus_lattice(n: usize, capacity: f64) -> Result<(DiscreteCover, DiscretePartition)> {
    let t = torus_surface(n)?;
    let (cover, _) = crate::experiments::template_cover(
        &t,
        crate::experiments::CoverTemplate::TorusLattice,
        capacity,
        0.1,
    )?;
    let partition = canonical_partition_discrete(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

fn sphere_center(colat_deg: f64, azim_deg: f64) -> [f64; 2] {
    let colat = colat_deg.to_radians();
    let mut azim = azim_deg.to_radians() % (2.0 * PI);
    if azim < 0.0 {
        azim += 2.0 * PI;
    }
    [azim, colat.cos()]
}

/// Edge-up tetrahedral cover by four displaceable caps: two centers at
/// colatitude 54.7356 deg and two at 125.2644 deg, pairwise 109.47 deg
/// apart. Caps of area 1.5pi have inner angular radius 71.03 deg, just past
/// the tetrahedral covering radius 70.53 deg; the polar caps wrap the poles
/// with their boundary circles outside the exclusion bands.
pub fn sphere_tetra(
    nx: usize,
    ny: usize,
    capacity: f64,
    azim_offset_deg: f64,
) -> Result<(DiscreteCover, DiscretePartition)> {
    let s = sphere_surface(nx, ny, 4.0)?;
    let colat_up = (1.0f64 / 3.0f64.sqrt()).atan().to_degrees(); // 30.0 -> no; see below
    let _ = colat_up;
    // edge-up orientation: colatitudes acos(1/sqrt 3) and pi - acos(1/sqrt 3)
    let c_up = (1.0f64 / 3.0f64.sqrt()).acos().to_degrees(); // 54.7356
    let opts = EmbeddingOptions::default();
    let cover = DiscreteCover::new(vec![
        cap_embedding(&s, sphere_center(c_up, azim_offset_deg), capacity, 0.1, opts)?,
        cap_embedding(
            &s,
            sphere_center(c_up, 180.0 + azim_offset_deg),
            capacity,
            0.1,
            opts,
        )?,
        cap_embedding(
            &s,
            sphere_center(180.0 - c_up, 90.0 + azim_offset_deg),
            capacity,
            0.1,
            opts,
        )?,
        cap_embedding(
            &s,
            sphere_center(180.0 - c_up, 270.0 + azim_offset_deg),
            capacity,
            0.1,
            opts,
        )?,
    ])?;
    let partition = canonical_partition_discrete(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

/// Octahedral cover by six displaceable caps (two polar, four equatorial).
pub fn sphere_octa(
    nx: usize,
    ny: usize,
    capacity: f64,
    azim_offset_deg: f64,
) -> Result<(DiscreteCover, DiscretePartition)> {
    let s = sphere_surface(nx, ny, 4.0)?;
    let opts = EmbeddingOptions::default();
    let off = azim_offset_deg;
    let cover = DiscreteCover::new(vec![
        cap_embedding(&s, [0.0, s.sphere_rho2()], capacity, 0.1, opts)?,
        cap_embedding(&s, [0.0, -s.sphere_rho2()], capacity, 0.1, opts)?,
        cap_embedding(&s, sphere_center(90.0, off), capacity, 0.1, opts)?,
        cap_embedding(&s, sphere_center(90.0, 90.0 + off), capacity, 0.1, opts)?,
        cap_embedding(&s, sphere_center(90.0, 180.0 + off), capacity, 0.1, opts)?,
        cap_embedding(&s, sphere_center(90.0, 270.0 + off), capacity, 0.1, opts)?,
    ])?;
    let partition = canonical_partition_discrete(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

/// Five-cap cover: one polar cap plus four larger caps on a southern ring.
pub fn sphere_pyramid(
    nx: usize,
    ny: usize,
    azim_offset_deg: f64,
) -> Result<(DiscreteCover, DiscretePartition)> {
    let s = sphere_surface(nx, ny, 4.0)?;
    let opts = EmbeddingOptions::default();
    let off = azim_offset_deg;
    let c_pole = 1.2 * PI;
    let c_ring = 1.9 * PI;
    let cover = DiscreteCover::new(vec![
        cap_embedding(&s, [0.0, s.sphere_rho2()], c_pole, 0.1, opts)?,
        cap_embedding(&s, sphere_center(113.0, off), c_ring, 0.1, opts)?,
        cap_embedding(&s, sphere_center(113.0, 90.0 + off), c_ring, 0.1, opts)?,
        cap_embedding(&s, sphere_center(113.0, 180.0 + off), c_ring, 0.1, opts)?,
        cap_embedding(&s, sphere_center(113.0, 270.0 + off), c_ring, 0.1, opts)?,
    ])?;
    let partition = canonical_partition_discrete(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

/// Two antipodal equatorial caps past half area; requires the band-overlap
/// flag because the boundary circles pass near the poles.
pub fn sphere_two_cap(
    nx: usize,
    ny: usize,
    capacity: f64,
    axis_azim_deg: f64,
) -> Result<(DiscreteCover, DiscretePartition)> {
    let s = sphere_surface(nx, ny, 4.0)?;
    let opts = EmbeddingOptions {
        allow_band_overlap: true,
    };
    let a = sphere_center(90.0, axis_azim_deg);
    let b = sphere_center(90.0, axis_azim_deg + 180.0);
    let cover = DiscreteCover::new(vec![
        cap_embedding(&s, a, capacity, 0.05, opts)?,
        cap_embedding(&s, b, capacity, 0.05, opts)?,
    ])?;
    let partition = canonical_partition_discrete(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

/// A single near-full cap covering the whole unmasked sphere.
pub fn sphere_one_cap(nx: usize, ny: usize) -> Result<(DiscreteCover, DiscretePartition)> {
    let s = sphere_surface(nx, ny, 6.0)?;
    let opts = EmbeddingOptions {
        allow_band_overlap: true,
    };
    let cover = DiscreteCover::new(vec![cap_embedding(
        &s,
        [0.0, s.sphere_rho2()],
        3.98 * PI,
        0.01,
        opts,
    )?])?;
    let partition = canonical_partition_discrete(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

/// Square-parametrized torus cover: one disk per T-cell with center map
/// `(t1, t2) -> (t1, t2)`, dyadic level 1 (four sets).
pub fn torus_square_t(n: usize) -> Result<(SquareCover, SquarePartition)> {
    let t = torus_surface(n)?;
    let cover = SquareCover::from_center_map(
        &t,
        1,
        0.45,
        0.1,
        |t1, t2| [t1, t2],
        EmbeddingOptions::default(),
    )?;
    let partition = canonical_partition_square(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

/// Continuous spiral cover of the sphere by displaceable caps (colatitude
/// sweeps 30 to 150 degrees over four turns); large support margin so the
/// coarse-graining windows have room.
pub fn sphere_spiral(
    nx: usize,
    ny: usize,
    m_t: usize,
) -> Result<(ContinuousCover, ContinuousPartition)> {
    let s = sphere_surface(nx, ny, 4.0)?;
    let turns = 4.0;
    let nodes: Vec<[f64; 2]> = (0..=256)
        .map(|i| {
            let t = i as f64 / 256.0;
            let colat = (30.0 + 120.0 * t).to_radians();
            let azim = (turns * 360.0 * t).to_radians() % (2.0 * PI);
            [azim, colat.cos() * s.sphere_rho2()]
        })
        .collect();
    let path = CenterPath {
        nodes,
        closed: false,
    };
    let cover = make_continuous_cover(
        &s,
        &path,
        1.5 * PI,
        0.5,
        m_t,
        EmbeddingOptions {
            allow_band_overlap: true,
        },
    )?;
    let partition = canonical_partition_continuous(&cover, &BumpProfile::default())?;
    Ok((cover, partition))
}

/// The interpolated continuous reading of the three-disk torus scenario.
pub fn torus_three_disk_interpolated(
    n: usize,
    m_t: usize,
) -> Result<(ContinuousCover, ContinuousPartition)> {
    let (cover, partition) = torus_three_disk(n)?;
    let interp = continuous_from_discrete(&cover, &partition, m_t)?;
    Ok((interp.cover, interp.partition))
}

/// All shipped scenarios with their canonical partitions.
pub fn shipped() -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    {
        let (cover, partition) = torus_three_disk(128)?;
        out.push(Scenario::Discrete {
            name: "torus-three-disk",
            cover,
            partition,
        });
    }
    {
        let (cover, partition) = torus_two_row(128, 16)?;
        out.push(Scenario::Continuous {
            name: "torus-two-row-16",
            cover,
            partition,
        });
    }
    {
        let (cover, partition) = torus_lattice(128, 0.45)?;
        out.push(Scenario::Discrete {
            name: "torus-lattice-c045",
            cover,
            partition,
        });
    }
    {
        let (cover, partition) = sphere_tetra(256, 256, 1.5 * PI, 0.0)?;
        out.push(Scenario::Discrete {
            name: "sphere-tetra",
            cover,
            partition,
        });
    }
    {
        let (cover, partition) = sphere_octa(128, 128, PI, 0.0)?;
        out.push(Scenario::Discrete {
            name: "sphere-octa",
            cover,
            partition,
        });
    }
    {
        let (cover, partition) = sphere_pyramid(256, 256, 0.0)?;
        out.push(Scenario::Discrete {
            name: "sphere-pyramid",
            cover,
            partition,
        });
    }
    {
        let (cover, partition) = sphere_two_cap(128, 128, 2.2 * PI, 0.0)?;
        out.push(Scenario::Discrete {
            name: "sphere-two-cap",
            cover,
            partition,
        });
    }
    {
        let (cover, partition) = sphere_one_cap(128, 256)?;
        out.push(Scenario::Discrete {
            name: "sphere-one-cap",
            cover,
            partition,
        });
    }
    {
        let (cover, partition) = torus_square_t(128)?;
        out.push(Scenario::Square {
            name: "torus-square-t",
            cover,
            partition,
        });
    }
    {
        let (cover, partition) = torus_three_disk_interpolated(128, 12)?;
        out.push(Scenario::Continuous {
            name: "torus-three-disk-interpolated",
            cover,
            partition,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{verify_continuous, verify_discrete, verify_square};

    #[test]
    fn all_shipped_scenarios_build_and_normalize() {
        for sc in shipped().unwrap() {
            let dev = match &sc {
                Scenario::Discrete { partition, .. } => {
                    verify_discrete(partition).max_normalization_deviation
                }
                Scenario::Continuous { partition, .. } => {
                    verify_continuous(partition).max_normalization_deviation
                }
                Scenario::Square { partition, .. } => {
                    verify_square(partition).max_normalization_deviation
                }
            };
            assert!(dev < 1e-10, "{}: deviation {dev}", sc.name());
        }
    }

    #[test]
    fn spiral_cover_builds() {
        let (cover, partition) = sphere_spiral(128, 256, 128).unwrap();
        assert_eq!(cover.m_t(), 128);
        let rep = verify_continuous(&partition);
        assert!(rep.max_normalization_deviation < 1e-10);
    }
}
