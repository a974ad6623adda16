//! Compiles a small C program against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "pilotwave.h"

int main(void) {
    PwEntangledState *s = NULL;
    if (pw_state_singlet(&s) != PW_STATUS_OK) return 10;
    double z[4] = {1, 0, 0, -1}, zt[4];
    if (pw_correspond(s, z, NULL, 2, zt, NULL) != PW_STATUS_OK) return 11;
    if (zt[0] != -1.0 || zt[3] != 1.0) return 12;
    pw_state_free(s);

    PwHypergraph *h = NULL;
    bool sat = true;
    PwSearchStats st;
    if (pw_hypergraph_peres33(&h) != PW_STATUS_OK) return 13;
    if (pw_ks_search(h, &sat, NULL, &st) != PW_STATUS_OK || sat || !st.complete) return 14;
    pw_hypergraph_free(h);

    if (pw_state_standard(0, &s) == PW_STATUS_OK) return 15;
    char msg[256];
    if (pw_last_error_message(msg, sizeof msg) == 0) return 16;
    printf("ok %s\n", pw_version());
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler found; skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libpilotwave_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());

    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
    std::fs::remove_dir_all(dir).ok();
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pilotwave-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
