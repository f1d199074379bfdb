use std::f64::consts::PI;

use nsab_cli::snapshot::{Snapshot, SnapshotError, HEADER_LEN, MAGIC};
use nsab_core::field::{RandomSpec, SolenoidalField};
use nsab_core::space::ChannelSpace;
use nsab_core::{derive_params, ChannelGeometry, Resolution};

fn sample(seed: u64) -> Snapshot {
    let s = ChannelSpace::new(ChannelGeometry::new(2.0 * PI, PI, 1.0).unwrap(), Resolution::new(4, 6, 8).unwrap()).unwrap();
    let params = derive_params(0.3, 0.1, 0.5, 0.01).unwrap();
    Snapshot::new(SolenoidalField::random(&s, seed, RandomSpec::default()), 0.25, &s, &params)
}

#[test]
fn write_read_write_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.snap");
    let snap = sample(3);
    snap.write(&path).unwrap();
    let back = Snapshot::read(&path).unwrap();
    assert_eq!(back, snap);
    assert_eq!(back.to_bytes(), std::fs::read(&path).unwrap());
}

#[test]
fn header_layout() {
    let snap = sample(1);
    let b = snap.to_bytes();
    assert_eq!(&b[..8], MAGIC);
    assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
    let meta_len = u64::from_le_bytes(b[16..24].try_into().unwrap()) as usize;
    let payload_len = u64::from_le_bytes(b[24..32].try_into().unwrap()) as usize;
    assert!(b[32..HEADER_LEN].iter().all(|&x| x == 0));
    assert_eq!(b.len(), HEADER_LEN + meta_len + payload_len);
    assert_eq!(payload_len, 8 * snap.meta.payload_values);
    let meta: serde_json::Value = serde_json::from_slice(&b[HEADER_LEN..HEADER_LEN + meta_len]).unwrap();
    assert_eq!(meta["time"], 0.25);
    assert_eq!(meta["modes"][0]["k1"], 0);
    let first = f64::from_le_bytes(b[HEADER_LEN + meta_len..HEADER_LEN + meta_len + 8].try_into().unwrap());
    assert_eq!(first, snap.field.coeffs[0][0].re);
}

#[test]
fn corrupt_input_is_rejected() {
    let b = sample(2).to_bytes();
    let mut bad = b.clone();
    bad[0] = b'X';
    assert!(matches!(Snapshot::from_bytes(&bad), Err(SnapshotError::Magic)));
    assert!(matches!(Snapshot::from_bytes(&b[..b.len() - 1]), Err(SnapshotError::Truncated { .. })));
    assert!(matches!(Snapshot::from_bytes(&b[..10]), Err(SnapshotError::Truncated { .. })));
    let mut v2 = b.clone();
    v2[8] = 2;
    assert!(matches!(Snapshot::from_bytes(&v2), Err(SnapshotError::Version(2))));
}
