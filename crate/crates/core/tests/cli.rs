use std::path::Path;
use std::process::{Command, Output};

use meshlet_codec::obj::write_obj;
use meshlet_codec::synth;

fn mlc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlc"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compress_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("torus.obj");
    write_obj(&synth::torus(24, 12, 2.0, 0.5), &obj).unwrap();
    for codec in ["gts", "gts-reuse", "basic"] {
        let out = dir.path().join(format!("{codec}.mlt1"));
        let o = mlc(&["compress", s(&obj), "--codec", codec, "-o", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(report["codec"], codec);
        assert_eq!(report["max_vertices"], 128);
        assert_eq!(report["max_triangles"], 256);
        assert_eq!(report["bits"], 16);
        assert_eq!(
            report["degenerate_count"].as_u64().unwrap(),
            4 * report["restart_count"].as_u64().unwrap()
        );
        if codec == "basic" {
            assert_eq!(report["sizes"]["index_bpt"].as_f64().unwrap(), 24.0);
        }
        let v = mlc(&["verify", s(&out), s(&obj)]);
        assert_eq!(
            v.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&v.stderr)
        );
        let vr: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
        assert_eq!(vr["passed"], true);
        assert!(vr["max_lookback"].is_number());
    }
}

#[test]
fn corrupted_container_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("sphere.obj");
    write_obj(&synth::uv_sphere(20, 10, 1.0), &obj).unwrap();
    let out = dir.path().join("s.mlt1");
    assert!(mlc(&[
        "compress",
        s(&obj),
        "-o",
        s(&out),
        "--report",
        s(&dir.path().join("r.json"))
    ])
    .status
    .success());
    let mut c = meshlet_codec::MeshletContainer::read(&out).unwrap();
    if let meshlet_codec::container::MeshletStream::Gts(st) = &mut c.meshlets[0].stream {
        st.flags.toggle(2);
    }
    c.write(&out).unwrap();
    let v = mlc(&["verify", s(&out), s(&obj)]);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stderr).contains("meshlet 0:"));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(mlc(&["compress"]).status.code(), Some(2));
    assert_eq!(
        mlc(&["compress", "x.obj", "--codec", "zip"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("bad.obj");
    std::fs::write(&obj, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").unwrap();
    let o = mlc(&["compress", s(&obj)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":4:"));
    assert_eq!(
        mlc(&["compress", s(&obj), "--vmax", "2"]).status.code(),
        Some(2)
    );
}

#[test]
fn table_mode_and_exact_solver() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("fan.obj");
    write_obj(&synth::fan(12, true), &obj).unwrap();
    let report = dir.path().join("r.json");
    let o = mlc(&[
        "compress",
        s(&obj),
        "--solver",
        "exact",
        "--time-budget",
        "2",
        "--table",
        "--report",
        s(&report),
        "-o",
        s(&dir.path().join("f.mlt1")),
    ]);
    assert!(o.status.success());
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("restarts"));
    assert!(table.contains("additional meshlets"));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["solver"], "exact");
    assert_eq!(r["optimality"]["proven_optimal"], 1);
    assert_eq!(r["restart_count"], 0);
}

#[test]
fn lp_export_and_import() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("patch.obj");
    let mesh = synth::grid_random(10, 10, 5);
    write_obj(&mesh, &obj).unwrap();
    let lp = dir.path().join("lp");
    let o = mlc(&[
        "compress",
        s(&obj),
        "--solver",
        "lp-export",
        "--lp-dir",
        s(&lp),
        "--vmax",
        "16",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: meshlet_codec::pipeline::LpManifest =
        serde_json::from_str(&std::fs::read_to_string(lp.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.meshlets.len() > 2);
    let first = std::fs::read_to_string(lp.join(&manifest.meshlets[0].lp)).unwrap();
    assert!(first.contains("Maximize") && first.contains("Subject To") && first.contains("Binary"));
    assert!(first.trim_end().ends_with("End"));

    // Answer only the first meshlet, with every triangle its own strip.
    let sol: String = (0..manifest.meshlets[0].dual_edges)
        .map(|e| format!("x{e} 0\n"))
        .collect();
    std::fs::write(lp.join(&manifest.meshlets[0].solution), sol).unwrap();
    let out = dir.path().join("p.mlt1");
    let o = mlc(&[
        "import-solutions",
        s(&lp.join("manifest.json")),
        s(&lp),
        "-o",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("meshlet 1:"), "{stderr}");
    assert!(!stderr.contains("meshlet 0:"), "{stderr}");
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["solver"], "imported");
    assert_eq!(
        r["meshlets"][0]["restarts"],
        manifest.meshlets[0].triangles - 1
    );
    assert!(mlc(&["verify", s(&out), s(&obj)]).status.success());
}
