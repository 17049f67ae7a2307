//! Site sets on a periodic chain at a fixed scale.

use serde::{Deserialize, Serialize};

use super::MeraError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    scale: usize,
    modulus: usize,
    sites: Vec<usize>,
}

impl Region {
    /// Sites are sorted and deduplicated.
    pub fn new(scale: usize, modulus: usize, mut sites: Vec<usize>) -> Result<Self, MeraError> {
        if let Some(&bad) = sites.iter().find(|&&x| x >= modulus) {
            return Err(MeraError::SiteRange { site: bad, modulus, scale });
        }
        sites.sort_unstable();
        sites.dedup();
        Ok(Self { scale, modulus, sites })
    }

    /// `len` consecutive sites starting at `start`, wrapping around.
    pub fn interval(scale: usize, modulus: usize, start: isize, len: usize) -> Result<Self, MeraError> {
        if len > modulus {
            return Err(MeraError::SiteRange { site: len, modulus, scale });
        }
        let m = modulus as isize;
        let sites = (0..len as isize).map(|k| (start + k).rem_euclid(m) as usize).collect();
        Self::new(scale, modulus, sites)
    }

    pub fn full(scale: usize, modulus: usize) -> Self {
        Self { scale, modulus, sites: (0..modulus).collect() }
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    /// A single periodic interval (or the whole chain).
    pub fn is_simply_connected(&self) -> bool {
        if self.sites.is_empty() {
            return false;
        }
        if self.sites.len() == self.modulus {
            return true;
        }
        let starts = self
            .sites
            .iter()
            .filter(|&&x| !self.contains((x + self.modulus - 1) % self.modulus))
            .count();
        starts == 1
    }

    pub fn union(&self, other: &Region) -> Region {
        assert_eq!((self.scale, self.modulus), (other.scale, other.modulus), "regions live on different chains");
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        Region::new(self.scale, self.modulus, sites).expect("sites in range")
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.sites.iter().any(|&x| other.contains(x))
    }

    pub fn difference(&self, other: &Region) -> Region {
        let sites = self.sites.iter().copied().filter(|&x| !other.contains(x)).collect();
        Region { scale: self.scale, modulus: self.modulus, sites }
    }

    pub fn complement(&self) -> Region {
        Region::full(self.scale, self.modulus).difference(self)
    }

    /// Periodic distance from `site` to the nearest site of the region.
    pub fn distance_to(&self, site: usize) -> usize {
        self.sites
            .iter()
            .map(|&x| {
                let d = x.abs_diff(site);
                d.min(self.modulus - d)
            })
            .min()
            .unwrap_or(usize::MAX)
    }

    /// All sites within distance `x` of the region (the region included).
    pub fn neighborhood(&self, x: usize) -> Region {
        let sites = (0..self.modulus).filter(|&k| self.distance_to(k) <= x).collect();
        Region { scale: self.scale, modulus: self.modulus, sites }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapped_interval_is_simply_connected() {
        let r = Region::interval(0, 8, -1, 3).unwrap();
        assert_eq!(r.sites(), &[0, 1, 7]);
        assert!(r.is_simply_connected());
        let two = Region::new(0, 8, vec![0, 4]).unwrap();
        assert!(!two.is_simply_connected());
        assert!(Region::full(0, 8).is_simply_connected());
    }

    #[test]
    fn neighborhood_and_distance() {
        let r = Region::new(0, 16, vec![0]).unwrap();
        assert_eq!(r.neighborhood(2).sites(), &[0, 1, 2, 14, 15]);
        assert_eq!(r.distance_to(9), 7);
        assert_eq!(r.neighborhood(8).len(), 16);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(Region::new(0, 4, vec![4]).is_err());
    }
}
