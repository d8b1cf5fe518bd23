use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn header() -> String {
    std::fs::read_to_string(manifest_dir().join("include/gda.h")).unwrap()
}

#[test]
fn header_declares_every_export() {
    let h = header();
    let src = std::fs::read_to_string(manifest_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.strip_prefix("pub unsafe extern \"C\" fn "))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20, "{exports:?}");
    for name in exports {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(h.contains("typedef struct GdaGraph GdaGraph;"));
    assert!(h.contains("GDA_STATUS_BUFFER_TOO_SMALL = 7"));
}

const SO_NAME: &str = if cfg!(target_os = "macos") { "libgda_ffi.dylib" } else { "libgda_ffi.so" };

// `cargo test` leaves the cdylib next to the test binary in target/<profile>/deps;
// `cargo build` puts it one level up.
fn lib_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let deps = exe.parent().unwrap();
    let found = [deps, deps.parent().unwrap()]
        .into_iter()
        .find(|d| d.join(SO_NAME).exists())
        .unwrap_or(deps)
        .to_path_buf();
    found
}

#[test]
fn c_program_links_against_the_shared_library() {
    let lib_dir = lib_dir();
    let so = lib_dir.join(SO_NAME);
    assert!(so.exists(), "{} not built", so.display());
    let out_dir = tempfile_dir();
    let exe = out_dir.join("smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lgda_ffi")
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-Wall")
        .arg("-Werror")
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("C compiler not found; set CC");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let first: Vec<&str> = lines.next().unwrap().split(' ').collect();
    let t: f64 = first[0].parse().unwrap();
    assert!((t - 0.107).abs() < 0.01, "{text}");
    assert_eq!(first[1], "7");
    assert_eq!(first.len(), 2 + 7);
    assert!(lines.next().unwrap().contains("at least 2 nodes"));
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gda-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
