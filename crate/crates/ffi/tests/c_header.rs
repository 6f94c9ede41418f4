//! Compiles and runs a C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("liborlicz_polytope_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let exe = out_dir.join("ffi_smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-o"])
        .arg(&exe)
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C compile failed");
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "smoke exited {:?}: {stdout}{}", run.status, String::from_utf8_lossy(&run.stderr));
    assert!(stdout.starts_with("ok "));
}

#[test]
fn header_parses_as_cpp() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("c++")
        .args(["-fsyntax-only", "-x", "c++", "-Wall", "-Werror"])
        .arg(crate_dir.join("include/orlicz_polytope.h"))
        .status()
        .expect("C++ compiler available");
    assert!(status.success());
}
