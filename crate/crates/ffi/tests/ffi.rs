use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use vardef_ffi::*;

fn fixture(name: &str) -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name);
    CString::new(path.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = vardef_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(name: &str) -> *mut VardefCorpus {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { vardef_corpus_load(fixture(name).as_ptr(), &mut out) }, VardefStatus::Ok);
    out
}

#[test]
fn corpus_stats_through_handles() {
    let corpus = load("process_corpus.jsonl");
    let mut stats = VardefStats::default();
    unsafe {
        assert_eq!(vardef_corpus_stats(corpus, &mut stats), VardefStatus::Ok);
        assert_eq!((stats.num_docs, stats.num_variables, stats.num_with_definition), (47, 1214, 820));
        let tag = CString::new("CSTR").unwrap();
        assert_eq!(vardef_corpus_process_stats(corpus, tag.as_ptr(), &mut stats), VardefStatus::Ok);
        assert_eq!((stats.num_docs, stats.num_variables, stats.num_with_definition), (10, 169, 123));
        vardef_corpus_free(corpus);
    }
}

#[test]
fn save_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().join("copy.jsonl").to_str().unwrap()).unwrap();
    let corpus = load("mini_process.jsonl");
    unsafe {
        assert_eq!(vardef_corpus_save(corpus, out.as_ptr()), VardefStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(vardef_corpus_load(out.as_ptr(), &mut back), VardefStatus::Ok);
        let (mut a, mut b) = (VardefStats::default(), VardefStats::default());
        vardef_corpus_stats(corpus, &mut a);
        vardef_corpus_stats(back, &mut b);
        assert_eq!(a, b);
        vardef_corpus_free(back);
        vardef_corpus_free(corpus);
    }
}

#[test]
fn templates_and_augment() {
    let mut set = ptr::null_mut();
    unsafe {
        assert_eq!(vardef_templates_load(fixture("templates_t100.txt").as_ptr(), &mut set), VardefStatus::Ok);
        assert_eq!(vardef_templates_len(set), 100);
        let mut hist = [0u64; 7];
        assert_eq!(vardef_templates_histogram(set, hist.as_mut_ptr()), VardefStatus::Ok);
        assert_eq!(hist, [40, 14, 14, 8, 8, 8, 8]);

        let source = load("mini_process.jsonl");
        let mut generated = ptr::null_mut();
        assert_eq!(vardef_augment(source, set, 11, &mut generated), VardefStatus::Ok);
        let mut stats = VardefStats::default();
        vardef_corpus_stats(generated, &mut stats);
        assert_eq!(stats.num_variables, 87);
        vardef_corpus_free(generated);
        vardef_corpus_free(source);
        vardef_templates_free(set);
        assert_eq!(vardef_templates_len(ptr::null()), 0);
    }
}

#[test]
fn decode_classify_metrics() {
    let s = [0.1, 0.0, 2.0, 0.5];
    let e = [0.1, 0.0, 0.5, 1.5];
    let mut d = VardefDecoded::default();
    unsafe {
        assert_eq!(vardef_decode(s.as_ptr(), e.as_ptr(), 4, &mut d), VardefStatus::Ok);
        assert_eq!((d.no_definition, d.start, d.end, d.score), (false, 3, 4, 3.5));
        let flat = [5.0, 0.0, 0.0];
        assert_eq!(vardef_decode(flat.as_ptr(), flat.as_ptr(), 3, &mut d), VardefStatus::Ok);
        assert!(d.no_definition);
        let bad = [f64::NAN];
        assert_eq!(vardef_decode(bad.as_ptr(), bad.as_ptr(), 1, &mut d), VardefStatus::Validation);

        let gold = VardefSpan { start: 10, end: 25 };
        let mut class = VardefClass::TrueNegative;
        let cases = [
            (VardefSpan { start: 5, end: 30 }, VardefClass::Fp1Wide),
            (VardefSpan { start: 12, end: 20 }, VardefClass::Fp1Narrow),
            (VardefSpan { start: 20, end: 40 }, VardefClass::Fp1Other),
            (gold, VardefClass::TruePositive),
        ];
        for (pred, want) in cases {
            assert_eq!(vardef_classify(&gold, &pred, &mut class), VardefStatus::Ok);
            assert_eq!(class, want);
        }
        assert_eq!(vardef_classify(ptr::null(), &gold, &mut class), VardefStatus::Ok);
        assert_eq!(class, VardefClass::Fp2);
        assert_eq!(vardef_classify(&gold, ptr::null(), &mut class), VardefStatus::Ok);
        assert_eq!(class, VardefClass::FalseNegative);
        let empty = VardefSpan { start: 3, end: 3 };
        assert_eq!(vardef_classify(&empty, ptr::null(), &mut class), VardefStatus::Validation);

        let counts = VardefCounts { tp: 5, fp1_wide: 1, fp2: 1, fn_: 1, tn: 2, ..Default::default() };
        let mut m = VardefMetrics::default();
        assert_eq!(vardef_metrics(&counts, &mut m), VardefStatus::Ok);
        assert!((m.accuracy - 0.7).abs() < 1e-12);
        assert!((m.f1 - 5.0 / 7.0).abs() < 1e-12);
        assert!(m.accuracy_defined && m.precision_defined && m.recall_defined && m.f1_defined);
        let none = VardefCounts { tn: 4, ..Default::default() };
        assert_eq!(vardef_metrics(&none, &mut m), VardefStatus::Ok);
        assert!(m.accuracy_defined && !m.precision_defined && !m.recall_defined && !m.f1_defined);
    }
}

#[test]
fn simpson_between_corpora() {
    let a = load("process_corpus.jsonl");
    let b = load("mini_process.jsonl");
    let (mut s, mut defined) = (0.0, false);
    unsafe {
        assert_eq!(vardef_simpson(a, a, &mut s, &mut defined), VardefStatus::Ok);
        assert!(defined && s == 1.0);
        assert_eq!(vardef_simpson(a, b, &mut s, &mut defined), VardefStatus::Ok);
        let mut back = 0.0;
        vardef_simpson(b, a, &mut back, &mut defined);
        assert!(defined && s == back && (0.0..=1.0).contains(&s));
        vardef_corpus_free(a);
        vardef_corpus_free(b);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut out = ptr::null_mut();
    unsafe {
        let missing = CString::new("/no/such/corpus.jsonl").unwrap();
        assert_eq!(vardef_corpus_load(missing.as_ptr(), &mut out), VardefStatus::Io);
        assert!(last_error().contains("/no/such/corpus.jsonl"));
        assert!(out.is_null());
        assert_eq!(vardef_corpus_load(ptr::null(), &mut out), VardefStatus::NullPointer);
        let bad_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(vardef_corpus_load(bad_utf8.as_ptr().cast(), &mut out), VardefStatus::InvalidUtf8);
        let corpus = fixture("mini_process.jsonl");
        assert_eq!(vardef_templates_load(corpus.as_ptr(), &mut ptr::null_mut()), VardefStatus::Parse);
        assert_eq!(vardef_corpus_stats(ptr::null(), &mut VardefStats::default()), VardefStatus::NullPointer);

        let good = load("hand_gold.jsonl");
        assert_eq!(vardef_corpus_stats(good, &mut VardefStats::default()), VardefStatus::Ok);
        assert!(vardef_last_error_message().is_null());
        vardef_corpus_free(good);
        vardef_corpus_free(ptr::null_mut());
    }
    let version = unsafe { CStr::from_ptr(vardef_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

fn exported_functions() -> Vec<String> {
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    src.lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap().to_string())
        .collect()
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/vardef.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    let names = exported_functions();
    assert!(names.len() >= 15, "{names:?}");
    for name in names {
        assert!(text.contains(&format!(" {name}(")) || text.contains(&format!("*{name}(")), "{name} missing");
    }
    for ty in ["VardefStatus", "VardefClass", "VardefCorpus", "VardefTemplateSet", "VardefMetrics"] {
        assert!(text.contains(&format!("}} {ty};")) || text.contains(&format!("struct {ty} {ty};")), "{ty}");
    }
}

/// Compiles a C program against the header and static library, then runs it.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libvardef_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("cc")
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&bin)
        .arg(fixture("mini_process.jsonl").to_str().unwrap())
        .arg(fixture("templates_t20.txt").to_str().unwrap())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "stdout: {stdout} stderr: {}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.starts_with("25 134 87\n"), "{stdout}");
}
