//! Binary field snapshots.
//!
//! Layout:
//!
//! | bytes | content |
//! |---|---|
//! | 0..8 | magic `NSABSNAP` |
//! | 8..12 | format version, u32 LE |
//! | 12..16 | reserved, zero |
//! | 16..24 | metadata length in bytes, u64 LE |
//! | 24..32 | payload length in bytes, u64 LE |
//! | 32..64 | zero |
//! | 64.. | UTF-8 JSON metadata, then the payload |
//!
//! The payload holds `(re, im)` pairs of little-endian f64 per coefficient,
//! mode by mode in storage order ([`MODE_ORDER`]).

use std::io;
use std::path::Path;

use nsab_core::evolution::NORM_DEFINITIONS;
use nsab_core::field::SolenoidalField;
use nsab_core::linalg::CVec;
use nsab_core::space::ChannelSpace;
use nsab_core::{ChannelGeometry, ModelParams, Resolution, C64};
use serde::{Deserialize, Serialize};

pub const MAGIC: &[u8; 8] = b"NSABSNAP";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

pub const MODE_ORDER: &str = "eta-major: mean mode, then k2 = 0 with k1 = 1..h1, then rows k2 = 1..h2 with k1 = -h1..h1; \
a wave mode lists toroidal then poloidal coefficients, the mean mode its U then V profiles; values are (re, im) pairs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub k1: i64,
    pub k2: i64,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub time: f64,
    pub resolution: Resolution,
    pub geometry: ChannelGeometry,
    pub params: ModelParams,
    pub modes: Vec<ModeEntry>,
    pub payload_values: usize,
    pub mode_order: String,
    pub norm_definitions: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub meta: SnapshotMeta,
    pub field: SolenoidalField,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("not a snapshot (bad magic)")]
    Magic,
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("truncated snapshot: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("bad metadata: {0}")]
    Meta(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Snapshot {
    pub fn new(field: SolenoidalField, time: f64, space: &ChannelSpace, params: &ModelParams) -> Self {
        let modes: Vec<ModeEntry> =
            space.modes.iter().zip(&field.coeffs).map(|(m, c)| ModeEntry { k1: m.k1, k2: m.k2, len: c.len() }).collect();
        let meta = SnapshotMeta {
            time,
            resolution: space.resolution,
            geometry: space.geometry,
            params: *params,
            payload_values: 2 * modes.iter().map(|m| m.len).sum::<usize>(),
            modes,
            mode_order: MODE_ORDER.into(),
            norm_definitions: NORM_DEFINITIONS.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        };
        Self { meta, field }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let meta = serde_json::to_vec(&self.meta).expect("metadata serializes");
        let payload_len = 8 * self.meta.payload_values;
        let mut out = Vec::with_capacity(HEADER_LEN + meta.len() + payload_len);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        out.extend_from_slice(&(payload_len as u64).to_le_bytes());
        out.resize(HEADER_LEN, 0);
        out.extend_from_slice(&meta);
        for c in &self.field.coeffs {
            for z in c.iter() {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        let need = |n: usize| {
            if bytes.len() < n {
                Err(SnapshotError::Truncated { need: n, have: bytes.len() })
            } else {
                Ok(())
            }
        };
        need(HEADER_LEN)?;
        if &bytes[..8] != MAGIC {
            return Err(SnapshotError::Magic);
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap()) as usize;
        let version = u32_at(8);
        if version != VERSION {
            return Err(SnapshotError::Version(version));
        }
        let (meta_len, payload_len) = (u64_at(16), u64_at(24));
        need(HEADER_LEN + meta_len + payload_len)?;
        let meta: SnapshotMeta = serde_json::from_slice(&bytes[HEADER_LEN..HEADER_LEN + meta_len]).map_err(|e| SnapshotError::Meta(e.to_string()))?;
        let total: usize = meta.modes.iter().map(|m| m.len).sum();
        if 2 * total != meta.payload_values || 8 * meta.payload_values != payload_len {
            return Err(SnapshotError::Meta("payload length disagrees with the mode table".into()));
        }
        let mut vals = bytes[HEADER_LEN + meta_len..HEADER_LEN + meta_len + payload_len]
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()));
        let coeffs = meta
            .modes
            .iter()
            .map(|m| CVec::from_iterator(m.len, (0..m.len).map(|_| C64::new(vals.next().unwrap(), vals.next().unwrap()))))
            .collect();
        let r = meta.resolution;
        let field = SolenoidalField { n1: r.n1, n2: r.n2, p: r.p, coeffs };
        Ok(Self { meta, field })
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, SnapshotError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
