use std::ffi::{CStr, CString};
use std::ptr;

use cpm_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cpm_last_error()) }.to_string_lossy().into_owned()
}

const SMALL: &str = "width = 24\nheight = 24\ncell_count = 10\n";

fn new_sim(seed: u64) -> *mut CpmSim {
    let toml = CString::new(SMALL).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { cpm_sim_new(toml.as_ptr(), seed, &mut sim) }, CpmStatus::Ok);
    sim
}

fn ids(sim: *const CpmSim) -> Vec<u32> {
    let mut buf = vec![0u32; 24 * 24];
    assert_eq!(unsafe { cpm_sim_copy_cell_ids(sim, buf.as_mut_ptr(), buf.len()) }, CpmStatus::Ok);
    buf
}

#[test]
fn sim_lifecycle_and_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("s.cpms").to_str().unwrap()).unwrap();
    let toml = CString::new(SMALL).unwrap();
    unsafe {
        let a = new_sim(4);
        assert_eq!(cpm_sim_run(a, 10), CpmStatus::Ok);
        let mut info = CpmSnapshotInfo::default();
        assert_eq!(cpm_sim_info(a, &mut info), CpmStatus::Ok);
        assert_eq!((info.width, info.height, info.mcs, info.seed), (24, 24, 10, 4));
        assert_eq!(cpm_sim_export(a, path.as_ptr()), CpmStatus::Ok);

        let mut b = ptr::null_mut();
        assert_eq!(cpm_sim_import(path.as_ptr(), toml.as_ptr(), &mut b), CpmStatus::Ok);
        assert_eq!(cpm_sim_run(a, 15), CpmStatus::Ok);
        assert_eq!(cpm_sim_run(b, 15), CpmStatus::Ok);
        assert_eq!(ids(a), ids(b));

        let mut fa = vec![0.0; 24 * 24];
        let mut fb = vec![0.0; 24 * 24];
        assert_eq!(cpm_sim_copy_field(a, fa.as_mut_ptr(), fa.len()), CpmStatus::Ok);
        assert_eq!(cpm_sim_copy_field(b, fb.as_mut_ptr(), fb.len()), CpmStatus::Ok);
        assert_eq!(fa, fb);

        let mut v = CpmSnapshotInfo::default();
        assert_eq!(cpm_snapshot_validate(path.as_ptr(), &mut v), CpmStatus::Ok);
        assert_eq!(v.mcs, 10);
        cpm_sim_free(a);
        cpm_sim_free(b);
        cpm_sim_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(cpm_sim_new(ptr::null(), 1, ptr::null_mut()), CpmStatus::NullPointer);
        assert!(last_error().contains("out"));

        let bad = CString::new("width = 0\n").unwrap();
        assert_eq!(cpm_sim_new(bad.as_ptr(), 1, &mut sim), CpmStatus::InvalidDimensions);
        assert!(sim.is_null());
        assert!(!last_error().is_empty());
        let unstable = CString::new("dt = 10.0\n").unwrap();
        assert_eq!(cpm_sim_new(unstable.as_ptr(), 1, &mut sim), CpmStatus::InvalidArgument);

        let missing = CString::new(dir.path().join("none.cpms").to_str().unwrap()).unwrap();
        assert_eq!(cpm_sim_import(missing.as_ptr(), ptr::null(), &mut sim), CpmStatus::Io);

        let junk = dir.path().join("junk.cpms");
        std::fs::write(&junk, b"NOPE0123456789012345678901234567").unwrap();
        let junk = CString::new(junk.to_str().unwrap()).unwrap();
        assert_eq!(cpm_snapshot_validate(junk.as_ptr(), ptr::null_mut()), CpmStatus::BadMagic);

        let short = dir.path().join("short.cpms");
        std::fs::write(&short, b"CPMS").unwrap();
        let short = CString::new(short.to_str().unwrap()).unwrap();
        assert_eq!(cpm_snapshot_validate(short.as_ptr(), ptr::null_mut()), CpmStatus::Truncated);

        let s = new_sim(1);
        let mut small = [0u32; 4];
        assert_eq!(cpm_sim_copy_cell_ids(s, small.as_mut_ptr(), 4), CpmStatus::BufferTooSmall);
        assert_eq!(cpm_sim_run(ptr::null_mut(), 1), CpmStatus::NullPointer);
        cpm_sim_free(s);
    }
}

#[test]
fn metrics_through_the_abi() {
    unsafe {
        let a = [1u8, 1, 0, 0];
        let b = [1u8, 0, 0, 0];
        let mut d = 0.0;
        assert_eq!(cpm_dice(a.as_ptr(), b.as_ptr(), 2, 2, &mut d), CpmStatus::Ok);
        assert!((d - 2.0 / 3.0).abs() < 1e-12);

        let x = [0.0, 1.0];
        let y = [2.0, 3.0];
        assert_eq!(cpm_emd_1d(x.as_ptr(), 2, y.as_ptr(), 2, &mut d), CpmStatus::Ok);
        assert!((d - 2.0).abs() < 1e-12);
        assert_eq!(cpm_emd_1d(x.as_ptr(), 0, y.as_ptr(), 2, &mut d), CpmStatus::EmptyDistribution);

        // 8x8 torus with a vessel ring enclosing a 2x2 hole
        let mut mask = [0u8; 64];
        for y in 2..6 {
            for x in 2..6 {
                mask[y * 8 + x] = 1;
            }
        }
        for (x, y) in [(3, 3), (4, 3), (3, 4), (4, 4)] {
            mask[y * 8 + x] = 0;
        }
        let mut count = 0usize;
        assert_eq!(
            cpm_lacunae_areas(mask.as_ptr(), 8, 8, 4, 1, ptr::null_mut(), 0, &mut count),
            CpmStatus::BufferTooSmall
        );
        assert_eq!(count, 2);
        let mut areas = [0u64; 2];
        assert_eq!(
            cpm_lacunae_areas(mask.as_ptr(), 8, 8, 4, 1, areas.as_mut_ptr(), 2, &mut count),
            CpmStatus::Ok
        );
        assert_eq!(areas, [4, 64 - 16]);
        assert_eq!(
            cpm_lacunae_areas(mask.as_ptr(), 8, 8, 6, 1, areas.as_mut_ptr(), 2, &mut count),
            CpmStatus::InvalidArgument
        );
    }
}
