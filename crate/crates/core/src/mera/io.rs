//! Versioned JSON form of a network.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{MeraError, MeraNetwork, Provenance};
use crate::linalg::CMat;

pub const FORMAT_VERSION: u32 = 1;

/// `u` and `v` are the row-major entries of the `d^2 x d^2` and `d^2 x d`
/// matrices as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub format_version: u32,
    pub site_dim: usize,
    pub base_sites: usize,
    pub num_layers: usize,
    pub u: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
    pub provenance: Option<Provenance>,
}

fn pairs(m: &CMat) -> Vec<[f64; 2]> {
    m.transpose().iter().map(|z| [z.re, z.im]).collect()
}

fn unpairs(p: &[[f64; 2]], rows: usize, cols: usize) -> Result<CMat, MeraError> {
    if p.len() != rows * cols {
        return Err(MeraError::Format(format!("expected {} entries, found {}", rows * cols, p.len())));
    }
    let data: Vec<C64> = p.iter().map(|&[re, im]| C64::new(re, im)).collect();
    Ok(CMat::from_row_slice(rows, cols, &data))
}

impl NetworkDocument {
    pub fn from_network(net: &MeraNetwork) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            site_dim: net.site_dim(),
            base_sites: net.base_sites(),
            num_layers: net.num_layers(),
            u: pairs(net.u_matrix()),
            v: pairs(net.v_matrix()),
            provenance: net.provenance().cloned(),
        }
    }

    pub fn into_network(self) -> Result<MeraNetwork, MeraError> {
        if self.format_version != FORMAT_VERSION {
            return Err(MeraError::Format(format!("unsupported format version {}", self.format_version)));
        }
        let d = self.site_dim;
        let u = unpairs(&self.u, d * d, d * d)?;
        let v = unpairs(&self.v, d * d, d)?;
        MeraNetwork::from_matrices(d, u, v, self.num_layers, self.base_sites, self.provenance)
    }
}

pub fn to_json(net: &MeraNetwork) -> String {
    serde_json::to_string_pretty(&NetworkDocument::from_network(net)).expect("serialisable document")
}

pub fn from_json(text: &str) -> Result<MeraNetwork, MeraError> {
    let doc: NetworkDocument = serde_json::from_str(text).map_err(|e| MeraError::Format(e.to_string()))?;
    doc.into_network()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        for seed in [0, 1, 42, u64::MAX] {
            let net = MeraNetwork::haar(2, 4, 1, seed).unwrap();
            let text = to_json(&net);
            let back = from_json(&text).unwrap();
            assert_eq!(back, net);
            assert_eq!(to_json(&back), text);
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let net = MeraNetwork::trivial(2, 2, 1).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&to_json(&net)).unwrap();
        value["extra"] = serde_json::json!(1);
        assert!(from_json(&value.to_string()).is_err());
    }
}
