//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "radar_sg.h"

int main(void) {
    RsgScenario *s = NULL;
    if (rsg_scenario_reference(&s) != RSG_STATUS_OK) return 10;
    double mean = 0.0;
    if (rsg_mean_interference(s, &mean) != RSG_STATUS_OK) return 11;
    double ranges[3] = {50.0, 100.0, 150.0};
    double ps[3];
    double tol = 0.0;
    if (rsg_p_success(s, ranges, 3, ps, &tol) != RSG_STATUS_OK) return 12;
    RsgScenario *bad = NULL;
    RsgStatus st = rsg_scenario_from_json("{}", &bad);
    const char *msg = rsg_last_error_message();
    printf("%.17g %.17g %.17g %.17g %d %d %.17g\n", mean, ps[0], ps[1], ps[2], (int)st, msg != NULL, tol);
    rsg_scenario_free(s);
    return 0;
}
"#;

fn static_lib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    [deps.join("libradar_sg_ffi.a"), deps.parent()?.join("libradar_sg_ffi.a")].into_iter().find(|p| p.exists())
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("no C compiler; skipped");
        return;
    }
    let lib = static_lib().expect("static library next to the test binary");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .unwrap();
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));

    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    let f: Vec<f64> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
    let mean = radar_sg::interference::mean_interference(&radar_sg::Scenario::reference()).unwrap();
    assert_eq!(f[0], mean);
    assert!(f[1] >= f[2] && f[2] >= f[3]);
    assert_eq!(f[4], 2.0); // RSG_STATUS_SCHEMA
    assert_eq!(f[5], 1.0);
    assert!(f[6] > 0.0);
}
