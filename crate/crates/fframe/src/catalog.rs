//! Built-in systems addressable by name wherever an IFS is expected.

use fframe_core::ifs::AffineIfs;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    #[serde(rename = "R")]
    pub scale: i64,
    #[serde(rename = "B")]
    pub digits: &'static [i64],
    pub note: &'static str,
}

pub const CATALOG: [CatalogEntry; 4] = [
    CatalogEntry {
        name: "mu3",
        scale: 3,
        digits: &[0, 2],
        note: "middle-third Cantor measure",
    },
    CatalogEntry {
        name: "mu4",
        scale: 4,
        digits: &[0, 2],
        note: "quarter Cantor measure, spectral with a Plancherel dual",
    },
    CatalogEntry {
        name: "mu4p",
        scale: 4,
        digits: &[0, 1],
        note: "complement of mu4; dual weights are |ft|^2 of this system",
    },
    CatalogEntry {
        name: "lebesgue",
        scale: 2,
        digits: &[0, 1],
        note: "Lebesgue measure on [0, 1]",
    },
];

pub fn lookup(name: &str) -> Option<&'static CatalogEntry> {
    let name = match name {
        "mu4'" => "mu4p",
        other => other,
    };
    CATALOG.iter().find(|e| e.name == name)
}

impl CatalogEntry {
    pub fn ifs(&self) -> AffineIfs {
        AffineIfs::new(self.scale, self.digits).expect("catalog systems are valid")
    }
}
