//! Acceptance: mutation rejection. One hundred deterministic mutations of
//! valid witnesses (delete a tet, duplicate a tet, or swap a (2,2) tet's
//! bottom edge to a crossing one) must each make `verify` exit nonzero with
//! the correct failure code.

use std::process::Command;

use prismtri::enumerate::{enumerate_visit, EnumerateOptions};
use prismtri::kernel::classify_tet;
use prismtri::shape::{Layer, ShapeSpec};
use prismtri::Triangulation3D;
use serde_json::{json, Value};

fn doc_of(tri: &Triangulation3D) -> Value {
    let tets: Vec<Vec<String>> = tri
        .tets
        .iter()
        .map(|t| t.points().iter().map(|p| p.to_string()).collect())
        .collect();
    json!({
        "schemaVersion": 1,
        "shape": { "kind": tri.shape.kind().to_string(), "n": tri.shape.n() },
        "tets": tets,
        "meta": { "size": tets.len(), "generator": "mutation-test", "timestamp": "2020-01-01T00:00:00Z" }
    })
}

fn collect_witnesses(shape: ShapeSpec, cap: usize) -> Vec<Triangulation3D> {
    let store = std::sync::Mutex::new(Vec::new());
    enumerate_visit(
        shape,
        EnumerateOptions {
            jobs: Some(1),
            ..Default::default()
        },
        |tri| {
            let mut s = store.lock().unwrap();
            if s.len() < cap {
                s.push(tri.clone());
            }
        },
    )
    .unwrap();
    store.into_inner().unwrap()
}

/// Bottom-edge swap target: a crossing, non-parallel bottom edge for a
/// (2,2) tet whose bottom edge is a diagonal of the bottom polygon.
fn swap_target(tri: &Triangulation3D, tet_idx: usize) -> Option<(usize, u32, u32)> {
    let t = &tri.tets[tet_idx];
    if classify_tet(t) != (2, 2) {
        return None;
    }
    let n = tri.shape.n();
    let tops: Vec<u32> = t
        .points()
        .iter()
        .filter(|p| p.layer == Layer::Top)
        .map(|p| p.index)
        .collect();
    let bots: Vec<u32> = t
        .points()
        .iter()
        .filter(|p| p.layer == Layer::Bottom)
        .map(|p| p.index)
        .collect();
    let (k, l) = (bots[0].min(bots[1]), bots[0].max(bots[1]));
    let adjacent = l - k == 1 || (k == 0 && l == n - 1);
    if adjacent {
        return None; // boundary edges admit no crossing chord
    }
    for kp in k + 1..l {
        for lp in (l + 1..k + n).map(|v| v % n) {
            // Skip parallel (degenerate) replacements.
            if (kp + lp + tri.shape.offset()) % n == (tops[0] + tops[1]) % n {
                continue;
            }
            return Some((tet_idx, kp, lp));
        }
    }
    None
}

struct Mutation {
    doc: Value,
    expect_code: &'static str,
    label: String,
}

fn mutations_for(tri: &Triangulation3D, budget: &mut [usize; 3]) -> Vec<Mutation> {
    let mut out = Vec::new();
    let base = doc_of(tri);
    let size = tri.tets.len();
    if budget[0] > 0 {
        let idx = budget[0] % size;
        let mut doc = base.clone();
        doc["tets"].as_array_mut().unwrap().remove(idx);
        doc["meta"]["size"] = json!(size - 1);
        out.push(Mutation {
            doc,
            expect_code: "unmatched-facet",
            label: format!("delete tet {idx}"),
        });
        budget[0] -= 1;
    }
    if budget[1] > 0 {
        let idx = budget[1] % size;
        let mut doc = base.clone();
        let copy = doc["tets"][idx].clone();
        doc["tets"].as_array_mut().unwrap().push(copy);
        doc["meta"]["size"] = json!(size + 1);
        out.push(Mutation {
            doc,
            expect_code: "improper-pair",
            label: format!("duplicate tet {idx}"),
        });
        budget[1] -= 1;
    }
    if budget[2] > 0 {
        if let Some((idx, kp, lp)) = (0..size).find_map(|i| swap_target(tri, i)) {
            let mut doc = base.clone();
            let tet = doc["tets"][idx].as_array().unwrap().clone();
            let new_tet: Vec<Value> = tet
                .iter()
                .enumerate()
                .map(|(j, code)| {
                    let s = code.as_str().unwrap();
                    if s.starts_with('B') {
                        // Replace the two bottom codes in order.
                        let first_bottom =
                            tet.iter().position(|c| c.as_str().unwrap().starts_with('B'));
                        if Some(j) == first_bottom {
                            json!(format!("B{}", kp.min(lp)))
                        } else {
                            json!(format!("B{}", kp.max(lp)))
                        }
                    } else {
                        code.clone()
                    }
                })
                .collect();
            doc["tets"][idx] = Value::Array(new_tet);
            out.push(Mutation {
                doc,
                expect_code: "improper-pair",
                label: format!("swap bottom edge of tet {idx} to ({kp},{lp})"),
            });
            budget[2] -= 1;
        }
    }
    out
}

#[test]
fn acceptance_10_mutation_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let mut witnesses = Vec::new();
    witnesses.extend(collect_witnesses(ShapeSpec::prism(4).unwrap(), 40));
    witnesses.extend(collect_witnesses(ShapeSpec::antiprism(4).unwrap(), 40));
    witnesses.extend(collect_witnesses(ShapeSpec::prism(5).unwrap(), 40));

    // 34 deletions, 33 duplications, 33 bottom-edge swaps.
    let mut budget = [34usize, 33, 33];
    let mut pending = Vec::new();
    'outer: loop {
        let before = budget;
        for tri in &witnesses {
            pending.extend(mutations_for(tri, &mut budget));
            if budget.iter().all(|b| *b == 0) {
                break 'outer;
            }
        }
        assert_ne!(before, budget, "mutation pool exhausted: {budget:?}");
    }
    assert_eq!(pending.len(), 100);

    let mut correct = 0;
    for (i, m) in pending.iter().enumerate() {
        let path = dir.path().join(format!("mutated-{i}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&m.doc).unwrap()).unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_prismtri"))
            .args(["verify", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(4),
            "mutation {i} ({}) must exit 4",
            m.label
        );
        let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
        let validity = rep["results"]["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == "validity")
            .unwrap();
        let codes: Vec<&str> = validity["failures"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f["code"].as_str().unwrap())
            .collect();
        assert!(
            codes.contains(&m.expect_code),
            "mutation {i} ({}): expected {} among {codes:?}",
            m.label,
            m.expect_code
        );
        correct += 1;
    }
    assert_eq!(correct, 100);
    println!("ACCEPTANCE 10 mutation-rejection: PASS ({correct}/100 rejected with correct codes)");
}
