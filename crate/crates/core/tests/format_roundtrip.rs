use std::fs;

use proptest::prelude::*;
use qis_core::format::{encode_burst, read_burst, sidecar_path, write_burst, HEADER_LEN};
use qis_core::{Burst, MotionTrajectory, QisError, SensorConfig};

fn burst_strategy() -> impl Strategy<Value = Burst> {
    (
        1usize..6,
        1usize..6,
        1usize..5,
        1u8..=8,
        any::<u64>(),
        0.01f64..50.0,
        proptest::bool::ANY,
    )
        .prop_flat_map(|(w, h, t, bits, seed, gain, with_traj)| {
            let max = ((1u16 << bits) - 1) as u8;
            (
                proptest::collection::vec(0..=max, w * h * t),
                Just((w, h, t, bits, seed, gain, with_traj)),
            )
        })
        .prop_map(|(data, (w, h, t, bits, seed, gain, with_traj))| {
            let c = SensorConfig::default()
                .with_bits(bits)
                .with_frames(t)
                .with_gain(gain);
            let traj =
                with_traj.then(|| MotionTrajectory::linear((gain.sqrt(), -0.1), t.max(1)).unwrap());
            Burst::new(w, h, t, data, c, seed)
                .unwrap()
                .with_trajectory(traj)
        })
}

proptest! {
    #[test]
    fn write_then_read_is_identity(b in burst_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.qisb");
        write_burst(&b, &p).unwrap();
        prop_assert_eq!(read_burst(&p).unwrap(), b);
    }

    #[test]
    fn encoding_is_deterministic(b in burst_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("1.qisb"), dir.path().join("2.qisb"));
        write_burst(&b, &p1).unwrap();
        write_burst(&b, &p2).unwrap();
        prop_assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        prop_assert_eq!(fs::read(sidecar_path(&p1)).unwrap(), fs::read(sidecar_path(&p2)).unwrap());
    }
}

fn sample() -> Burst {
    let c = SensorConfig::default().with_gain(2.0);
    let data = (0..2 * 3 * 8).map(|i| (i % 8) as u8).collect();
    Burst::new(3, 2, 8, data, c, 42).unwrap()
}

fn written() -> (tempfile::TempDir, std::path::PathBuf, Vec<u8>) {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("b.qisb");
    write_burst(&sample(), &p).unwrap();
    let bytes = fs::read(&p).unwrap();
    (dir, p, bytes)
}

#[test]
fn zero_burst_file_layout() {
    let c = SensorConfig::default().with_frames(1);
    let b = Burst::new(2, 2, 1, vec![0; 4], c, 0).unwrap();
    let bytes = encode_burst(&b).unwrap();
    assert_eq!(bytes.len(), HEADER_LEN + 4);
    assert_eq!(&bytes[HEADER_LEN..], &[0, 0, 0, 0]);
}

#[test]
fn nine_bit_config_never_reaches_the_writer() {
    let c = SensorConfig::default().with_bits(9);
    assert!(matches!(
        Burst::new(1, 1, 8, vec![0; 8], c, 0),
        Err(QisError::InvalidConfig(_))
    ));
}

#[test]
fn bad_magic_is_reported() {
    let (_d, p, mut bytes) = written();
    bytes[0..4].copy_from_slice(b"XXXX");
    fs::write(&p, &bytes).unwrap();
    assert!(matches!(read_burst(&p), Err(QisError::BadMagic { found, .. }) if &found == b"XXXX"));
}

#[test]
fn version_mismatch_is_reported() {
    let (_d, p, mut bytes) = written();
    bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
    fs::write(&p, &bytes).unwrap();
    assert!(matches!(
        read_burst(&p),
        Err(QisError::VersionMismatch { found: 2, .. })
    ));
}

#[test]
fn missing_frame_is_truncation() {
    let (_d, p, bytes) = written();
    // header says T=8, keep only 7 frames
    fs::write(&p, &bytes[..bytes.len() - 6]).unwrap();
    assert!(matches!(
        read_burst(&p),
        Err(QisError::Truncated {
            what: "payload",
            expected: 48,
            found: 42,
            ..
        })
    ));
}

#[test]
fn short_header_is_truncation() {
    let (_d, p, bytes) = written();
    fs::write(&p, &bytes[..10]).unwrap();
    assert!(matches!(
        read_burst(&p),
        Err(QisError::Truncated { what: "header", .. })
    ));
}

#[test]
fn out_of_range_payload_is_reported() {
    let (_d, p, mut bytes) = written();
    bytes[HEADER_LEN + 5] = 8;
    fs::write(&p, &bytes).unwrap();
    assert!(matches!(
        read_burst(&p),
        Err(QisError::PayloadOutOfRange {
            offset: 5,
            value: 8,
            max: 7,
            bits: 3
        })
    ));
}

#[test]
fn missing_sidecar_is_an_io_error() {
    let (_d, p, _) = written();
    fs::remove_file(sidecar_path(&p)).unwrap();
    assert!(matches!(read_burst(&p), Err(QisError::Io(_))));
}
