use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use conceptrel_ffi::*;

fn last_error() -> String {
    let p = cr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn dataset_basis_metrics_round_trip() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(cr_dataset_gen_pairs(5, 300, 1.0, 0.2, 4, &mut d), CrStatus::Ok);
        assert_eq!(cr_dataset_num_concepts(d), 10);
        assert_eq!(cr_dataset_num_samples(d), 300);

        let mut label = ptr::null_mut();
        assert_eq!(cr_basis_label(d, &mut label), CrStatus::Ok);
        assert_eq!(cr_basis_dim(label), 300);

        let pairs: Vec<usize> = (0..5).flat_map(|j| [j, j + 5]).collect();
        let mut agreement = 0.0;
        assert_eq!(
            cr_concept_agreement(label, pairs.as_ptr(), 5, CrMetric::Euclidean as u32, &mut agreement),
            CrStatus::Ok
        );
        assert_eq!(agreement, 1.0);

        let mut c2v = ptr::null_mut();
        assert_eq!(cr_basis_concept2vec(d, 8, 10, 0.05, 1, 2, &mut c2v), CrStatus::Ok);
        let mut dist = -1.0;
        assert_eq!(cr_basis_distance(label, c2v, CrMetric::Cosine as u32, 1, &mut dist), CrStatus::Ok);
        assert!((0.0..=1.0).contains(&dist));
        let mut self_dist = -1.0;
        assert_eq!(cr_basis_distance(c2v, c2v, 1, 3, &mut self_dist), CrStatus::Ok);
        assert_eq!(self_dist, 0.0);

        let mut m = vec![0.0; 100];
        assert_eq!(cr_estimate_cooccurrence(label, m.as_mut_ptr(), m.len()), CrStatus::Ok);
        assert!((0..10).all(|i| m[i * 10 + i] == 1.0));
        assert_eq!(m[5], 1.0);

        let dir = tempfile::tempdir().unwrap();
        let path = cstr(dir.path().join("b.json").to_str().unwrap());
        assert_eq!(cr_basis_export(c2v, path.as_ptr()), CrStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(cr_basis_import(path.as_ptr(), &mut back), CrStatus::Ok);
        let mut a = vec![0.0; 80];
        let mut b = vec![0.0; 80];
        assert_eq!(cr_basis_vectors(c2v, a.as_mut_ptr(), 80), CrStatus::Ok);
        assert_eq!(cr_basis_vectors(back, b.as_mut_ptr(), 80), CrStatus::Ok);
        assert_eq!(a, b);

        let ds_dir = cstr(dir.path().join("d").to_str().unwrap());
        assert_eq!(cr_dataset_save(d, ds_dir.as_ptr()), CrStatus::Ok);
        let mut d2 = ptr::null_mut();
        assert_eq!(cr_dataset_load(ds_dir.as_ptr(), &mut d2), CrStatus::Ok);
        assert_eq!(cr_dataset_num_samples(d2), 300);

        for h in [label, c2v, back] {
            cr_basis_free(h);
        }
        cr_dataset_free(d);
        cr_dataset_free(d2);
    }
}

#[test]
fn ward_through_handles() {
    unsafe {
        let names: Vec<CString> = ["a", "b", "c", "d"].iter().map(|s| cstr(s)).collect();
        let name_ptrs: Vec<*const std::ffi::c_char> = names.iter().map(|n| n.as_ptr()).collect();
        let v = [0.0, 1.0, 5.0, 7.0];
        let mut b = ptr::null_mut();
        assert_eq!(cr_basis_from_rows(name_ptrs.as_ptr(), v.as_ptr(), 4, 1, &mut b), CrStatus::Ok);
        let mut dg = ptr::null_mut();
        assert_eq!(cr_ward_cluster(b, &mut dg), CrStatus::Ok);
        assert_eq!(cr_dendrogram_num_merges(dg), 3);
        let want = [(1, 2, 0.5, 2), (3, 4, 2.0, 2), (5, 6, 30.25, 4)];
        for (i, w) in want.iter().enumerate() {
            let (mut l, mut r, mut h, mut s) = (0, 0, 0.0, 0);
            assert_eq!(cr_dendrogram_merge(dg, i, &mut l, &mut r, &mut h, &mut s), CrStatus::Ok);
            assert_eq!((l, r, h, s), *w);
        }
        let (mut l, mut r, mut h, mut s) = (0, 0, 0.0, 0);
        assert_eq!(cr_dendrogram_merge(dg, 3, &mut l, &mut r, &mut h, &mut s), CrStatus::InvalidArgument);
        cr_dendrogram_free(dg);
        cr_basis_free(b);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(cr_basis_import(ptr::null(), &mut b), CrStatus::InvalidArgument);
        assert!(last_error().contains("NULL"));

        let dir = tempfile::tempdir().unwrap();
        let ragged = dir.path().join("r.json");
        std::fs::write(&ragged, r#"{"dim": 2, "concepts": [{"name": "a", "vector": [1, 2]}, {"name": "b", "vector": [1]}]}"#)
            .unwrap();
        let p = cstr(ragged.to_str().unwrap());
        assert_eq!(cr_basis_import(p.as_ptr(), &mut b), CrStatus::Validation);
        assert!(last_error().contains("ragged"));
        assert!(b.is_null());

        let missing = cstr(dir.path().join("none.json").to_str().unwrap());
        assert_eq!(cr_basis_import(missing.as_ptr(), &mut b), CrStatus::Runtime);

        let mut d = ptr::null_mut();
        assert_eq!(cr_dataset_gen_pairs(1, 10, 0.5, 0.1, 0, &mut d), CrStatus::Validation);
        let mut out = 0.0;
        assert_eq!(cr_basis_distance(ptr::null(), ptr::null(), 9, 1, &mut out), CrStatus::InvalidArgument);

        // NULL handles are accepted by the free functions and accessors
        cr_basis_free(ptr::null_mut());
        cr_dataset_free(ptr::null_mut());
        cr_dendrogram_free(ptr::null_mut());
        assert_eq!(cr_basis_num_concepts(ptr::null()), 0);
    }
}

#[test]
fn cdf_and_version() {
    assert_eq!(cr_std_normal_cdf(0.0), 0.5);
    let v = unsafe { CStr::from_ptr(cr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = include.join("conceptrel.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["cr_basis_label", "cr_ward_cluster", "cr_last_error", "CR_STATUS_VALIDATION", "CR_METRIC_COSINE"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"conceptrel.h\"\nint main(void) { CrBasis *b = 0; double d; \
         return cr_basis_distance(b, b, CR_METRIC_EUCLIDEAN, 1, &d) == CR_STATUS_OK; }\n",
    )
    .unwrap();
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler available; skipped");
        return;
    };
    assert!(status.success());
}
