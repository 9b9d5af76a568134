//! Discrete SBV fields on uniform grids: quantisation to piecewise
//! constants, radial truncations, surface and bulk energies, and a
//! single-instance BV-ellipticity test.

mod energies;
mod field;
mod quantize;
mod truncation;

use std::path::Path;

pub use energies::{
    bulk_energy, bv_ellipticity_test, reference_step, split_competitor, surface_energy, surface_energy_where,
    verify_quantization_estimate, BvEllipticityReport, G0Density, QuantizationReport, TV_SLACK,
};
pub use field::{DiscreteSBV, Facet, FacetTag, DEFAULT_JUMP_THRESHOLD};
pub use quantize::{mean_variation_over_rho, quantization_step, quantize, quantize_selected, select_rho};
pub use truncation::{cells_above, cells_differing, truncate, TruncationLadder};

use crate::error::{Error, Result};
use crate::io::FieldDump;

impl DiscreteSBV {
    pub fn to_dump(&self) -> FieldDump {
        FieldDump {
            shape: self.shape[..self.dim].to_vec(),
            h: self.h,
            meta: vec![
                ("m".into(), self.m.to_string()),
                ("tags".into(), self.tags.iter().map(|t| t.as_char()).collect()),
            ],
            fields: vec![("u".into(), self.values.clone())],
        }
    }

    pub fn from_dump(d: &FieldDump) -> Result<Self> {
        let bad = |msg: &str| Error::Input(format!("SBV dump: {msg}"));
        let m: usize = d.meta("m").ok_or_else(|| bad("missing m"))?.parse().map_err(|_| bad("bad m"))?;
        let tags = d
            .meta("tags")
            .unwrap_or("")
            .chars()
            .map(|c| FacetTag::from_char(c).ok_or_else(|| bad("bad facet tag")))
            .collect::<Result<Vec<_>>>()?;
        let values = d.field("u").ok_or_else(|| bad("missing field u"))?.to_vec();
        let shape = match d.shape.as_slice() {
            [n] => [*n, 1],
            [nx, ny] => [*nx, *ny],
            _ => return Err(bad("shape must have one or two entries")),
        };
        DiscreteSBV::with_tags(d.shape.len(), shape, d.h, m, values, tags)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_dump().write(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_dump(&FieldDump::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.bin");
        let u = DiscreteSBV::classify(2, [3, 2], 0.5, 2, (0..12).map(|i| (i * i) as f64).collect(), 10.0).unwrap();
        u.save(&p).unwrap();
        assert_eq!(DiscreteSBV::load(&p).unwrap(), u);
    }
}
