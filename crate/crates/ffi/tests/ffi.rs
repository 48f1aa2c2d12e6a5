use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use knowpc_ffi::*;

const LISTING1: &str = include_str!("../../../fixtures/listing1.ktp");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = kp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn bundled(name: &str) -> *mut KpLayout {
    let mut l = ptr::null_mut();
    assert_eq!(unsafe { kp_layout_bundled(c(name).as_ptr(), &mut l) }, KpStatus::Ok);
    l
}

fn program(src: &str) -> *mut KpProgram {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { kp_program_parse(c(src).as_ptr(), &mut p) }, KpStatus::Ok);
    p
}

#[test]
fn layout_handles() {
    let l = bundled("cramped_room");
    let (mut w, mut h) = (0, 0);
    unsafe {
        assert_eq!(kp_layout_size(l, &mut w, &mut h), KpStatus::Ok);
        kp_layout_free(l);
    }
    assert_eq!((w, h), (5, 4));

    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { kp_layout_bundled(c("nowhere").as_ptr(), &mut bad) }, KpStatus::Layout);
    assert!(bad.is_null());
    assert!(last_error().contains("nowhere"));
    assert_eq!(unsafe { kp_layout_load(c("/no/such/file.layout").as_ptr(), &mut bad) }, KpStatus::Io);

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../layouts/counter_circuit.layout");
    let mut l = ptr::null_mut();
    assert_eq!(unsafe { kp_layout_load(c(path.to_str().unwrap()).as_ptr(), &mut l) }, KpStatus::Ok);
    unsafe { kp_layout_free(l) };
}

#[test]
fn null_and_bad_arguments() {
    unsafe {
        assert_eq!(kp_layout_bundled(ptr::null(), ptr::null_mut()), KpStatus::NullPointer);
        assert_eq!(kp_program_complexity(ptr::null(), ptr::null_mut()), KpStatus::NullPointer);
        let bytes = [0xffu8, 0];
        let mut l = ptr::null_mut();
        assert_eq!(kp_layout_bundled(bytes.as_ptr().cast(), &mut l), KpStatus::InvalidUtf8);
        kp_layout_free(ptr::null_mut());
        kp_program_free(ptr::null_mut());
        kp_episode_free(ptr::null_mut());
        kp_string_free(ptr::null_mut());
    }
}

#[test]
fn program_round_trip() {
    let p = program(LISTING1);
    let mut n = 0;
    let mut text = ptr::null_mut();
    unsafe {
        assert_eq!(kp_program_complexity(p, &mut n), KpStatus::Ok);
        assert_eq!(kp_program_render(p, &mut text), KpStatus::Ok);
    }
    assert_eq!(n, 22);
    let rendered = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_string();
    unsafe {
        kp_string_free(text);
        kp_program_free(p);
    }
    let again = program(&rendered);
    unsafe { kp_program_free(again) };

    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { kp_program_parse(c("if HoldOnion:\n\tGoIntMoon\n").as_ptr(), &mut bad) }, KpStatus::Parse);
    assert!(last_error().contains("GoIntMoon"));
}

#[test]
fn stepping_an_episode() {
    let l = bundled("cramped_room");
    let p = program(LISTING1);
    let mut ep = ptr::null_mut();
    unsafe {
        assert_eq!(kp_episode_new(l, 400, 3, &mut ep), KpStatus::Ok);
        assert_eq!(kp_episode_new(l, 0, 3, &mut ptr::null_mut()), KpStatus::InvalidArgument);
    }
    let mut total = 0;
    loop {
        let (mut t, mut score, mut done) = (0, 0, false);
        unsafe { assert_eq!(kp_episode_status(ep, &mut t, &mut score, &mut done), KpStatus::Ok) };
        assert_eq!(score, total);
        if done {
            assert_eq!(t, 400);
            break;
        }
        let (mut a, mut b) = (0u8, 0u8);
        let mut r = 0;
        unsafe {
            assert_eq!(kp_episode_policy_action(ep, p, 0, &mut a), KpStatus::Ok);
            assert_eq!(kp_episode_policy_action(ep, p, 1, &mut b), KpStatus::Ok);
            assert!(a <= 5 && b <= 5);
            assert_eq!(kp_episode_step(ep, a, b, &mut r), KpStatus::Ok);
        }
        total += r;
    }
    assert!(total > 0);
    let mut json = ptr::null_mut();
    unsafe {
        assert_eq!(kp_episode_step(ep, 4, 4, ptr::null_mut()), KpStatus::EpisodeOver);
        assert_eq!(kp_episode_step(ep, 9, 4, ptr::null_mut()), KpStatus::InvalidArgument);
        assert_eq!(kp_episode_policy_action(ep, p, 2, &mut 0), KpStatus::InvalidArgument);
        assert_eq!(kp_episode_snapshot_json(ep, &mut json), KpStatus::Ok);
    }
    let snap: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert_eq!(snap["t"], 400);
    assert_eq!(snap["chefs"].as_array().unwrap().len(), 2);
    unsafe {
        kp_string_free(json);
        kp_episode_free(ep);
        kp_program_free(p);
        kp_layout_free(l);
    }
}

#[test]
fn selfplay_matches_core() {
    let l = bundled("counter_circuit");
    let p = program(LISTING1);
    let mut r = -1.0;
    unsafe {
        assert_eq!(kp_evaluate_selfplay(l, p, 3, 400, 0, &mut r), KpStatus::Ok);
        assert_eq!(kp_evaluate_selfplay(l, p, 0, 400, 0, &mut r), KpStatus::InvalidArgument);
        kp_program_free(p);
        kp_layout_free(l);
    }
    let layout = std::sync::Arc::new(knowpc::GridLayout::bundled("counter_circuit").unwrap());
    let prog = knowpc::dsl::parse_program(LISTING1).unwrap();
    let expected = knowpc::rollout::self_play(&layout, &knowpc::rollout::ProgramPolicy::greedy(&prog), 3, 0, 400, None);
    assert_eq!(r, expected);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/knowpc.h")).unwrap();
    for f in [
        "kp_layout_load",
        "kp_layout_bundled",
        "kp_layout_free",
        "kp_program_parse",
        "kp_program_render",
        "kp_program_complexity",
        "kp_program_free",
        "kp_episode_new",
        "kp_episode_step",
        "kp_episode_policy_action",
        "kp_episode_free",
        "kp_evaluate_selfplay",
        "kp_last_error_message",
        "kp_string_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct KpLayout KpLayout;"));
    assert!(header.contains("KP_STATUS_OK = 0"));
}

fn target_dir() -> PathBuf {
    // CARGO_TARGET_TMPDIR is <target>/tmp
    Path::new(env!("CARGO_TARGET_TMPDIR")).parent().unwrap().to_path_buf()
}

/// Compiles a C program against the header and the static library when a C
/// compiler is on the path.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler, skipped");
        return;
    }
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libknowpc_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipped", lib.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = target_dir().join("tmp").join("knowpc_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    let reward: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!(reward > 0.0);
}
