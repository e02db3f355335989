//! Dyadic cube and dyadic rectangle systems on the half-open unit grid.
//!
//! Atoms are the finest grid cells, stored with their lower-left corner as
//! coordinates. Sets list the cells they contain.

use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure, Mode};
use crate::set_system::SetSystem;

/// Largest atom grid either generator will build.
pub const MAX_GRID_ATOMS: usize = 1 << 16;

/// `k / 2^level` in lowest terms.
fn dyadic_fraction(k: u64, level: u32) -> String {
    if k == 0 {
        return "0".into();
    }
    let (mut num, mut exp) = (k, level);
    while exp > 0 && num % 2 == 0 {
        num /= 2;
        exp -= 1;
    }
    if exp == 0 {
        num.to_string()
    } else {
        format!("{num}/{}", 1u64 << exp)
    }
}

fn interval_label(level: u32, pos: u64) -> String {
    format!(
        "[{},{})",
        dyadic_fraction(pos, level),
        dyadic_fraction(pos + 1, level)
    )
}

fn check_grid(bits: u128) -> Result<usize> {
    let count = if bits >= 127 {
        u128::MAX
    } else {
        1u128 << bits
    };
    if count > MAX_GRID_ATOMS as u128 {
        return Err(Error::GridTooLarge {
            count,
            limit: MAX_GRID_ATOMS,
        });
    }
    Ok(count as usize)
}

/// Row-major multi-indices over `side^dim` cells, last coordinate fastest.
fn cell_index(coords: &[u64], side: u64) -> usize {
    coords.iter().fold(0u64, |acc, &c| acc * side + c) as usize
}

fn for_each_multi_index(dim: usize, side: u64, mut f: impl FnMut(&[u64])) {
    let mut idx = vec![0u64; dim];
    let total = side.pow(dim as u32);
    for _ in 0..total {
        f(&idx);
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < side {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn grid_measure(dim: usize, depth: u32, masses: Option<&[f64]>) -> Result<DiscreteMeasure> {
    let side = 1u64 << depth;
    let count = side.pow(dim as u32) as usize;
    if let Some(m) = masses {
        if m.len() != count {
            return Err(Error::InvalidParameter(format!(
                "expected {count} cell masses, got {}",
                m.len()
            )));
        }
    }
    let uniform = 1.0 / count as f64;
    let mut atoms = Vec::with_capacity(count);
    for_each_multi_index(dim, side, |c| {
        let i = atoms.len();
        let id = format!(
            "c{}",
            c.iter().map(u64::to_string).collect::<Vec<_>>().join("_")
        );
        let coords = c.iter().map(|&x| x as f64 / side as f64).collect();
        let mass = masses.map_or(uniform, |m| m[i]);
        atoms.push(Atom::new(id, mass).with_coords(coords));
    });
    DiscreteMeasure::new(Mode::Divisible, atoms)
}

/// All dyadic cubes of levels `0..=depth` in `[0,1)^dimension`.
///
/// `masses`, when given, overrides the uniform cell masses in atom order.
/// Cubes are ordered by level, then by position.
pub fn gen_dyadic_cubes(dimension: usize, depth: u32, masses: Option<&[f64]>) -> Result<SetSystem> {
    if dimension == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    check_grid(dimension as u128 * depth as u128)?;
    let measure = grid_measure(dimension, depth, masses)?;
    let side = 1u64 << depth;

    let mut sets = Vec::new();
    for level in 0..=depth {
        let shift = depth - level;
        let cubes = 1u64 << level;
        let first = sets.len();
        for_each_multi_index(dimension, cubes, |pos| {
            let id = format!(
                "Q{level}_{}",
                pos.iter().map(u64::to_string).collect::<Vec<_>>().join("-")
            );
            let label = format!(
                "Q{}",
                pos.iter()
                    .map(|&p| interval_label(level, p))
                    .collect::<Vec<_>>()
                    .join("x")
            );
            sets.push((id, Some(label), Vec::new()));
        });
        for_each_multi_index(dimension, side, |cell| {
            let parent: Vec<u64> = cell.iter().map(|&c| c >> shift).collect();
            let q = first + cell_index(&parent, cubes);
            sets[q].2.push(cell_index(cell, side));
        });
    }
    SetSystem::from_positions(measure, sets)
}

/// All products `I x J` of dyadic intervals with `level(I) <= depth_x` and
/// `level(J) <= depth_y`.
pub fn gen_dyadic_rectangles(depth_x: u32, depth_y: u32) -> Result<SetSystem> {
    gen_dyadic_rectangles_with_masses(depth_x, depth_y, None)
}

pub fn gen_dyadic_rectangles_with_masses(
    depth_x: u32,
    depth_y: u32,
    masses: Option<&[f64]>,
) -> Result<SetSystem> {
    check_grid(depth_x as u128 + depth_y as u128)?;
    let (nx, ny) = (1u64 << depth_x, 1u64 << depth_y);
    let count = (nx * ny) as usize;
    if let Some(m) = masses {
        if m.len() != count {
            return Err(Error::InvalidParameter(format!(
                "expected {count} cell masses, got {}",
                m.len()
            )));
        }
    }
    let uniform = 1.0 / count as f64;
    let mut atoms = Vec::with_capacity(count);
    for ix in 0..nx {
        for iy in 0..ny {
            let mass = masses.map_or(uniform, |m| m[atoms.len()]);
            atoms.push(
                Atom::new(format!("c{ix}_{iy}"), mass)
                    .with_coords(vec![ix as f64 / nx as f64, iy as f64 / ny as f64]),
            );
        }
    }
    let measure = DiscreteMeasure::new(Mode::Divisible, atoms)?;

    let mut sets = Vec::new();
    for lx in 0..=depth_x {
        for ly in 0..=depth_y {
            let (sx, sy) = (depth_x - lx, depth_y - ly);
            for jx in 0..(1u64 << lx) {
                for jy in 0..(1u64 << ly) {
                    let mut members = Vec::with_capacity(1 << (sx + sy));
                    for ix in (jx << sx)..((jx + 1) << sx) {
                        for iy in (jy << sy)..((jy + 1) << sy) {
                            members.push((ix * ny + iy) as usize);
                        }
                    }
                    let id = format!("R{lx}_{jx}-{ly}_{jy}");
                    let label = format!("R{}x{}", interval_label(lx, jx), interval_label(ly, jy));
                    sets.push((id, Some(label), members));
                }
            }
        }
    }
    SetSystem::from_positions(measure, sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_reduce() {
        assert_eq!(dyadic_fraction(0, 3), "0");
        assert_eq!(dyadic_fraction(4, 3), "1/2");
        assert_eq!(dyadic_fraction(8, 3), "1");
        assert_eq!(dyadic_fraction(3, 2), "3/4");
        assert_eq!(interval_label(1, 0), "[0,1/2)");
    }

    #[test]
    fn cube_counts() {
        let s = gen_dyadic_cubes(1, 0, None).unwrap();
        assert_eq!((s.measure().len(), s.len()), (1, 1));
        assert_eq!(s.set(0).label.as_deref(), Some("Q[0,1)"));

        // 2^0 + 2^1 + 2^2 intervals over 4 cells
        let s = gen_dyadic_cubes(1, 2, None).unwrap();
        assert_eq!((s.measure().len(), s.len()), (4, 7));

        // unit square plus four quadrants
        let s = gen_dyadic_cubes(2, 1, None).unwrap();
        assert_eq!((s.measure().len(), s.len()), (4, 5));
        assert_eq!(s.set(1).label.as_deref(), Some("Q[0,1/2)x[0,1/2)"));
    }

    #[test]
    fn rectangle_counts() {
        let s = gen_dyadic_rectangles(0, 0).unwrap();
        assert_eq!((s.measure().len(), s.len()), (1, 1));
        // (1+2)·(1+2)
        let s = gen_dyadic_rectangles(1, 1).unwrap();
        assert_eq!((s.measure().len(), s.len()), (4, 9));
        // (1+2+4)·(1+2)
        let s = gen_dyadic_rectangles(2, 1).unwrap();
        assert_eq!((s.measure().len(), s.len()), (8, 21));
    }

    #[test]
    fn members_tile_each_level() {
        let s = gen_dyadic_cubes(2, 2, None).unwrap();
        for set in s.sets() {
            let level: u32 = set.id[1..2].parse().unwrap();
            assert_eq!(set.members().len(), 1 << (2 * (2 - level)));
        }
        let total: f64 = (0..s.len()).map(|i| s.set_mass(i)).sum();
        assert!((total - 3.0).abs() < 1e-12);
    }

    #[test]
    fn cubes_nest_but_rectangles_cross() {
        for (d, k) in [(1, 3), (2, 2), (3, 1)] {
            assert!(gen_dyadic_cubes(d, k, None)
                .unwrap()
                .find_crossing_pair()
                .is_none());
        }
        let r = gen_dyadic_rectangles(1, 1).unwrap();
        let tall = r.position("R1_0-0_0").unwrap();
        let wide = r.position("R0_0-1_0").unwrap();
        assert_eq!(r.set(tall).label.as_deref(), Some("R[0,1/2)x[0,1)"));
        assert_eq!(r.set(wide).label.as_deref(), Some("R[0,1)x[0,1/2)"));
        assert!(r.intersects(tall, wide));
        assert!(!r.is_subset(tall, wide) && !r.is_subset(wide, tall));
        assert!(r.find_crossing_pair().is_some());
    }

    #[test]
    fn deterministic_and_overridable() {
        let a = gen_dyadic_cubes(2, 2, None).unwrap();
        let b = gen_dyadic_cubes(2, 2, None).unwrap();
        assert_eq!(a.sets(), b.sets());
        assert_eq!(a.measure(), b.measure());

        let masses = [0.1, 0.2, 0.3, 0.4];
        let c = gen_dyadic_cubes(1, 2, Some(&masses)).unwrap();
        assert!((c.set_mass(0) - 1.0).abs() < 1e-12);
        assert!((c.set_mass(c.position("Q1_1").unwrap()) - 0.7).abs() < 1e-12);
        assert!(gen_dyadic_cubes(1, 2, Some(&masses[..3])).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            gen_dyadic_cubes(3, 6, None),
            Err(Error::GridTooLarge { count, .. }) if count == 1 << 18
        ));
        assert!(gen_dyadic_rectangles(9, 9).is_err());
        assert!(gen_dyadic_cubes(0, 1, None).is_err());
    }
}
