//! Nested partitions of a correctable interval.
//!
//! An interval `AB` of length `L` is split into `B^L A_1 B^R` with the
//! middle `A_1` of `floor(L / z)` sites correctable from the two sides. Side
//! pieces take `floor((z - 1) / (2z) L)` sites, with the rounding leftover
//! going to the left piece. Iterating `g` times on every side piece leaves
//! `2^g` pieces of ideal size `((z - 1) / (2z))^g L`, so
//! `2^g = (L / size)^alpha` with `alpha = log 2 / log(2z / (z - 1))`.

use serde::{Deserialize, Serialize};

use super::{QecError, QecResult};
use crate::mera::Region;

/// `log 2 / log(2z / (z - 1))`.
pub fn distance_exponent(z: f64) -> QecResult<f64> {
    if !(z > 1.0) || !z.is_finite() {
        return Err(QecError::Domain(format!("distance exponent needs z > 1, got {z}")));
    }
    Ok(std::f64::consts::LN_2 / (2.0 * z / (z - 1.0)).ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub z: f64,
    pub levels: usize,
    /// `nested[k]` holds the `2^k` pieces after `k` splittings.
    pub nested: Vec<Vec<Region>>,
    /// Middles removed at each level.
    pub removed: Vec<Vec<Region>>,
    pub sizes: Vec<usize>,
    pub surviving: usize,
    /// `((z - 1) / (2z))^g |AB|`.
    pub ideal_size: f64,
    pub alpha: f64,
    /// Every piece within `2 g` sites of the ideal size.
    pub within_envelope: bool,
}

impl Partition {
    pub fn pieces(&self) -> &[Region] {
        self.nested.last().expect("level zero is always present")
    }
}

/// Sites of a simply connected region in order along the ring.
fn ordered_sites(r: &Region) -> QecResult<Vec<usize>> {
    if !r.is_simply_connected() || r.is_empty() {
        return Err(QecError::NotSimplyConnected(r.sites().to_vec()));
    }
    let n = r.modulus();
    if r.len() == n {
        return Ok((0..n).collect());
    }
    let start = r.sites().iter().copied().find(|&x| !r.contains((x + n - 1) % n)).expect("interval has a start");
    Ok((0..r.len()).map(|k| (start + k) % n).collect())
}

/// `(left, middle, right)` lengths, or `None` when a piece would vanish.
fn split(len: usize, z: f64) -> Option<(usize, usize, usize)> {
    let frac = (z - 1.0) / (2.0 * z);
    let side = (frac * len as f64 + 1e-9).floor() as usize;
    let middle = (len as f64 / z + 1e-9).floor() as usize;
    if side == 0 || middle == 0 || side + middle > len {
        return None;
    }
    Some((len - middle - side, middle, side))
}

/// Largest depth for which every piece can still be split.
fn max_depth(len: usize, z: f64) -> usize {
    match split(len, z) {
        None => 0,
        Some((l, _, r)) => 1 + max_depth(l, z).min(max_depth(r, z)),
    }
}

pub fn uberholography_partition(ab: &Region, z: f64, levels: usize) -> QecResult<Partition> {
    let alpha = distance_exponent(z)?;
    let sites = ordered_sites(ab)?;
    let feasible = max_depth(sites.len(), z);
    if levels > feasible {
        return Err(QecError::Depth { requested: levels, max_feasible: feasible });
    }
    let region = |s: &[usize]| Region::new(ab.scale(), ab.modulus(), s.to_vec()).expect("sites are in range");
    let mut current = vec![sites.clone()];
    let mut nested = vec![vec![region(&sites)]];
    let mut removed = Vec::new();
    for _ in 0..levels {
        let mut next = Vec::new();
        let mut gone = Vec::new();
        for piece in &current {
            let (l, m, _) = split(piece.len(), z).expect("depth checked");
            next.push(piece[..l].to_vec());
            gone.push(region(&piece[l..l + m]));
            next.push(piece[l + m..].to_vec());
        }
        nested.push(next.iter().map(|p| region(p)).collect());
        removed.push(gone);
        current = next;
    }
    let sizes: Vec<usize> = current.iter().map(Vec::len).collect();
    let ideal_size = ((z - 1.0) / (2.0 * z)).powi(levels as i32) * sites.len() as f64;
    let within_envelope = sizes.iter().all(|&p| (p as f64 - ideal_size).abs() <= 2.0 * levels as f64 + 1e-9);
    Ok(Partition {
        z,
        levels,
        nested,
        removed,
        surviving: sizes.iter().sum(),
        sizes,
        ideal_size,
        alpha,
        within_envelope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exponent_values() {
        assert!((distance_exponent(3.0).unwrap() - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((distance_exponent(3.0).unwrap() - 0.630929).abs() < 1e-6);
        assert!((distance_exponent(2.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((distance_exponent(1e6).unwrap() - 1.0).abs() < 1e-5);
        assert!(matches!(distance_exponent(1.0), Err(QecError::Domain(_))));
        assert!(matches!(distance_exponent(0.5), Err(QecError::Domain(_))));
    }

    #[test]
    fn exponent_increasing() {
        let grid = [1.5, 2.0, 3.0, 5.0, 10.0];
        let vals: Vec<f64> = grid.iter().map(|&z| distance_exponent(z).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn depth_zero_is_the_region() {
        let ab = Region::interval(0, 64, 10, 20).unwrap();
        let p = uberholography_partition(&ab, 3.0, 0).unwrap();
        assert_eq!(p.pieces(), &[ab]);
        assert_eq!(p.surviving, 20);
    }

    #[test]
    fn twenty_seven_sites_one_level() {
        let ab = Region::interval(0, 27, 0, 27).unwrap();
        let p = uberholography_partition(&ab, 3.0, 1).unwrap();
        assert_eq!(p.sizes, vec![9, 9]);
        assert_eq!(p.removed[0][0].sites(), (9..18).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn three_levels_of_216() {
        let ab = Region::interval(0, 256, 20, 216).unwrap();
        let p = uberholography_partition(&ab, 3.0, 3).unwrap();
        assert_eq!(p.pieces().len(), 8);
        assert!((p.ideal_size - 8.0).abs() < 1e-12);
        assert!(p.sizes.iter().all(|&s| s == 8));
        // 2^g = (|AB| / size)^alpha
        assert!(((216.0f64 / 8.0).powf(p.alpha) - 8.0).abs() < 1e-9);
    }

    #[test]
    fn wrapped_interval_keeps_ring_order() {
        let ab = Region::interval(0, 16, -4, 9).unwrap();
        let p = uberholography_partition(&ab, 3.0, 1).unwrap();
        assert_eq!(p.nested[1][0].sites(), &[12, 13, 14]);
        assert_eq!(p.removed[0][0].sites(), &[0, 1, 15]);
        assert_eq!(p.nested[1][1].sites(), &[2, 3, 4]);
    }

    #[test]
    fn infeasible_depth_names_limit() {
        let ab = Region::interval(0, 32, 0, 27).unwrap();
        match uberholography_partition(&ab, 3.0, 5) {
            Err(QecError::Depth { requested: 5, max_feasible }) => assert_eq!(max_feasible, 3),
            other => panic!("{other:?}"),
        }
        let gap = Region::new(0, 32, vec![0, 1, 5]).unwrap();
        assert!(matches!(uberholography_partition(&gap, 3.0, 1), Err(QecError::NotSimplyConnected(_))));
    }

    proptest! {
        #[test]
        fn partition_is_disjoint_cover(len in 3usize..200, z in 1.5f64..8.0, g in 0usize..4) {
            let ab = Region::interval(0, 256, 0, len).unwrap();
            if let Ok(p) = uberholography_partition(&ab, z, g) {
                prop_assert_eq!(p.pieces().len(), 1 << g);
                prop_assert!(p.within_envelope);
                let mut all: Vec<usize> = p.pieces().iter().flat_map(|r| r.sites().to_vec()).collect();
                for level in &p.removed {
                    all.extend(level.iter().flat_map(|r| r.sites().to_vec()));
                }
                all.sort_unstable();
                prop_assert_eq!(all, (0..len).collect::<Vec<_>>());
            }
        }
    }
}
