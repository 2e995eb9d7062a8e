use std::ffi::{CStr, CString};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use trivia_miner_ffi::*;

struct Inputs {
    _dir: tempfile::TempDir,
    corpus: CString,
    embeddings: CString,
    cache: CString,
}

fn path_c(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn inputs() -> Inputs {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    fs::write(
        &corpus,
        concat!(
            r#"{"id":"a","title":"A","text":"red green","categories":["Colors","Odd"]}"#,
            "\n",
            r#"{"id":"b","title":"B","text":"red blue","categories":["Colors"]}"#,
            "\n",
            r#"{"id":"c","title":"C","text":"green blue","categories":["Colors","Odd"]}"#,
            "\n",
            r#"{"id":"d","title":"D","text":"square\n\nred circle","categories":["Shapes red"]}"#,
            "\n",
        ),
    )
    .unwrap();
    let embeddings = dir.path().join("v.txt");
    fs::write(
        &embeddings,
        "5 3\nred 1 0 0\ngreen 0 1 0\nblue 0 0 1\nsquare 1 1 1\ncircle 1 1 0\n",
    )
    .unwrap();
    let cache = dir.path().join("sim.cache");
    Inputs {
        corpus: path_c(&corpus),
        embeddings: path_c(&embeddings),
        cache: path_c(&cache),
        _dir: dir,
    }
}

fn open(inp: &Inputs) -> *mut TmSession {
    let mut cfg = tm_config_default();
    cfg.min_df = 1;
    cfg.workers = 2;
    cfg.embeddings_format = TmEmbeddingFormat::Text;
    let mut session = ptr::null_mut();
    let status = unsafe {
        tm_session_open(
            inp.corpus.as_ptr(),
            ptr::null(),
            ptr::null(),
            ptr::null(),
            inp.cache.as_ptr(),
            inp.embeddings.as_ptr(),
            &cfg,
            &mut session,
        )
    };
    assert_eq!(status, TmStatus::Ok, "{:?}", last_error());
    assert!(!session.is_null());
    session
}

fn last_error() -> Option<String> {
    let p = tm_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { tm_string_free(p) };
    s
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn defaults_match_the_library() {
    let cfg = tm_config_default();
    assert_eq!(
        (cfg.k, cfg.min_df, cfg.sample_cap, cfg.seed, cfg.workers),
        (10, 10, 50, 0, 1)
    );
    assert_eq!(cfg.use_threshold, 0);
}

#[test]
fn queries_round_trip_through_the_c_abi() {
    let inp = inputs();
    let s = open(&inp);
    unsafe {
        let mut sim = f64::NAN;
        assert_eq!(
            tm_similarity(s, c("a").as_ptr(), c("a").as_ptr(), &mut sim),
            TmStatus::Ok
        );
        assert_eq!(sim, 1.0);
        assert_eq!(
            tm_similarity(s, c("a").as_ptr(), c("b").as_ptr(), &mut sim),
            TmStatus::Ok
        );
        // [green, red] vs [blue, red] (rarer term first). Position weights
        // are 10 and 9; only "red" matches, at position 2 on both sides:
        // (9 * 1 + 9 * 1) / (2 * (10 + 9)).
        assert!((sim - 18.0 / 38.0).abs() < 1e-12, "{sim}");

        let mut out = ptr::null_mut();
        assert_eq!(tm_top_trivia(s, c("a").as_ptr(), &mut out), TmStatus::Ok);
        let report = take_string(out);
        let lines: Vec<&str> = report.lines().collect();
        assert_eq!(lines.len(), 2, "{report}");
        assert!(lines.iter().all(|l| l.starts_with(r#"{"category":"#)));

        assert_eq!(tm_outliers(s, c("Colors").as_ptr(), &mut out), TmStatus::Ok);
        assert_eq!(take_string(out).lines().count(), 3);

        assert_eq!(
            tm_explain(s, c("d").as_ptr(), c("Shapes red").as_ptr(), &mut out),
            TmStatus::Ok
        );
        let ex = take_string(out);
        assert!(ex.contains(r#""paragraph":1"#), "{ex}");

        assert_eq!(tm_session_save_cache(s), TmStatus::Ok);
        assert!(Path::new(inp.cache.to_str().unwrap()).exists());
        tm_session_free(s);
    }
    assert_eq!(last_error(), None);
}

#[test]
fn errors_map_to_status_codes() {
    let inp = inputs();
    let s = open(&inp);
    unsafe {
        let mut sim = 0.0;
        let mut out = ptr::null_mut();
        assert_eq!(
            tm_similarity(s, c("a").as_ptr(), c("zz").as_ptr(), &mut sim),
            TmStatus::Lookup
        );
        assert!(last_error().unwrap().contains("zz"));
        assert_eq!(
            tm_top_trivia(s, c("nope").as_ptr(), &mut out),
            TmStatus::Lookup
        );
        assert!(out.is_null());
        assert_eq!(
            tm_outliers(s, c("Shapes red").as_ptr(), &mut out),
            TmStatus::Lookup
        );
        assert_eq!(
            tm_similarity(s, ptr::null(), c("a").as_ptr(), &mut sim),
            TmStatus::NullArgument
        );
        assert_eq!(
            tm_similarity(s, c("a").as_ptr(), c("a").as_ptr(), ptr::null_mut()),
            TmStatus::NullArgument
        );
        assert_eq!(
            tm_top_trivia(ptr::null(), c("a").as_ptr(), &mut out),
            TmStatus::NullArgument
        );
        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(
            tm_outliers(s, bad.as_ptr().cast(), &mut out),
            TmStatus::InvalidUtf8
        );
        // A successful call clears the previous error.
        assert_eq!(
            tm_similarity(s, c("a").as_ptr(), c("b").as_ptr(), &mut sim),
            TmStatus::Ok
        );
        assert_eq!(last_error(), None);
        tm_session_free(s);
        tm_session_free(ptr::null_mut());
        tm_string_free(ptr::null_mut());
    }

    let mut session = ptr::null_mut();
    let missing = c("/nonexistent/corpus.jsonl");
    let status = unsafe {
        tm_session_open(
            missing.as_ptr(),
            ptr::null(),
            ptr::null(),
            ptr::null(),
            ptr::null(),
            inp.embeddings.as_ptr(),
            ptr::null(),
            &mut session,
        )
    };
    assert_eq!(status, TmStatus::Io);
    assert!(session.is_null());
    assert!(last_error().unwrap().contains("/nonexistent/corpus.jsonl"));

    let mut cfg = tm_config_default();
    cfg.k = 0;
    let status = unsafe {
        tm_session_open(
            inp.corpus.as_ptr(),
            ptr::null(),
            ptr::null(),
            ptr::null(),
            ptr::null(),
            inp.embeddings.as_ptr(),
            &cfg,
            &mut session,
        )
    };
    assert_eq!(status, TmStatus::Config);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("trivia_miner.h")
}

#[test]
fn header_declares_the_whole_api() {
    let text = fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct TmSession TmSession;",
        "TM_STATUS_OK = 0",
        "TM_STATUS_IO = 2",
        "TM_STATUS_LOOKUP = 3",
        "TM_STATUS_CONFIG = 4",
        "tm_config_default(void)",
        "tm_session_open(",
        "tm_session_free(",
        "tm_similarity(",
        "tm_top_trivia(",
        "tm_outliers(",
        "tm_explain(",
        "tm_session_save_cache(",
        "tm_string_free(",
        "tm_last_error_message(void)",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    fs::write(
        &src,
        "#include \"trivia_miner.h\"\nint main(void) { TmConfig c = tm_config_default(); TmSession *s = 0;\n\
         (void)c; (void)s; return TM_STATUS_OK; }\n",
    )
    .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    for (compiler, extra) in [("cc", &["-std=c99"][..]), ("c++", &["-x", "c++"][..])] {
        let status = Command::new(compiler)
            .args(extra)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(&include)
            .arg(&src)
            .status()
            .unwrap_or_else(|e| panic!("cannot run {compiler}: {e}"));
        assert!(status.success(), "{compiler} rejected the header");
    }
}

#[test]
fn c_program_links_and_runs() {
    // target/<profile>/deps/ffi-<hash> -> target/<profile>/libtrivia_miner_ffi.a
    let exe = std::env::current_exe().unwrap();
    let lib = exe
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("libtrivia_miner_ffi.a");
    assert!(
        lib.exists(),
        "static library not built at {}",
        lib.display()
    );
    let inp = inputs();
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    fs::write(
        &src,
        r#"#include <stdio.h>
#include "trivia_miner.h"
int main(int argc, char **argv) {
    TmConfig cfg = tm_config_default();
    cfg.min_df = 1;
    cfg.embeddings_format = TM_EMBEDDING_FORMAT_TEXT;
    TmSession *s = NULL;
    if (tm_session_open(argv[1], NULL, NULL, NULL, NULL, argv[2], &cfg, &s) != TM_STATUS_OK) {
        fprintf(stderr, "%s\n", tm_last_error_message());
        return 1;
    }
    double sim = 0;
    if (tm_similarity(s, "a", "c", &sim) != TM_STATUS_OK) return 2;
    char *report = NULL;
    if (tm_top_trivia(s, "a", &report) != TM_STATUS_OK) return 3;
    printf("%.6f\n%s", sim, report);
    tm_string_free(report);
    if (tm_similarity(s, "a", "missing", &sim) != TM_STATUS_LOOKUP) return 4;
    tm_session_free(s);
    return argc == 3 ? 0 : 5;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("use_ffi");
    let status = Command::new("cc")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "link failed");
    let out = Command::new(&bin)
        .arg(inp.corpus.to_str().unwrap())
        .arg(inp.embeddings.to_str().unwrap())
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    let mut lines = stdout.lines();
    // [green, red] vs [blue, green]: green matches at positions 1 and 2.
    assert_eq!(lines.next(), Some("0.500000"));
    assert_eq!(lines.count(), 2);
}
