use lumiref_wasm::Engine;
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

/// Raw-weight cosine straight from the record JSON.
fn cosine(a: &Value, b: &Value) -> f64 {
    let w = |v: &Value| -> std::collections::BTreeMap<String, f64> {
        v["index"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| (e["term"].as_str().unwrap().to_owned(), e["weight"].as_f64().unwrap()))
            .collect()
    };
    let (a, b) = (w(a), w(b));
    let dot: f64 = a.iter().map(|(t, x)| x * b.get(t).unwrap_or(&0.0)).sum();
    let na: f64 = a.values().map(|x| x * x).sum();
    let nb: f64 = b.values().map(|x| x * x).sum();
    dot / (na * nb).sqrt()
}

#[test]
fn catalog_lists_bundled_data() {
    let e = Engine::bundled();
    let c = parse(&e.catalog_json());
    assert_eq!(c["categories"].as_array().unwrap().len(), 7);
    assert_eq!(c["images"].as_array().unwrap().len(), 41);
    assert_eq!(c["images"][0]["title"], "Atelier 1");
}

#[test]
fn rank_matches_direct_cosine() {
    let e = Engine::bundled();
    let c = parse(&e.catalog_json());
    let images = c["images"].as_array().unwrap();
    let q = &images[0];
    let ranked = parse(&e.rank_json("img-001", &[], 100).unwrap());
    let entries = ranked["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 40);
    assert_eq!(entries[0]["image"], "img-041");
    for entry in entries {
        let other = images.iter().find(|i| i["id"] == entry["image"]).unwrap();
        let want = cosine(q, other);
        assert!((entry["score"].as_f64().unwrap() - want).abs() < 1e-12);
    }
    let scores: Vec<f64> = entries.iter().map(|e| e["score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    let short = parse(&e.rank_json("img-001", &[], 3).unwrap());
    assert_eq!(short["entries"].as_array().unwrap().len(), 3);
}

#[test]
fn rank_errors_are_messages() {
    let e = Engine::bundled();
    assert!(e.rank_json("nope", &[], 5).unwrap_err().contains("nope"));
    assert!(e.rank_json("img-001", &["c.none".into()], 5).is_err());
}

#[test]
fn graph_respects_threshold_and_k() {
    let e = Engine::bundled();
    let g = parse(&e.graph_json(1.0, 8).unwrap());
    assert_eq!(g["nodes"].as_array().unwrap().len(), 41);
    assert_eq!(g["edges"].as_array().unwrap().len(), 1);

    let g = parse(&e.graph_json(0.2, 2).unwrap());
    for edge in g["edges"].as_array().unwrap() {
        assert!(edge["score"].as_f64().unwrap() >= 0.2);
    }
    assert!(e.graph_json(-0.1, 2).is_err());
}

#[test]
fn reformulate_moves_toward_positives() {
    let e = Engine::bundled();
    let before = parse(&e.rank_json("img-001", &[], 100).unwrap());
    let target = before["entries"][10]["image"].as_str().unwrap().to_owned();
    let out = parse(&e.reformulate_json("img-001", std::slice::from_ref(&target), &[], 100).unwrap());
    let ranked = out["ranked"]["entries"].as_array().unwrap();
    assert!(ranked.iter().all(|x| x["image"] != target && x["image"] != "img-001"));
    assert!(!out["query"].as_object().unwrap().is_empty());

    // query weights are alpha*q + beta*positive
    let c = parse(&e.catalog_json());
    let rec = |id: &str| c["images"].as_array().unwrap().iter().find(|i| i["id"] == id).unwrap().clone();
    let (q, p) = (rec("img-001"), rec(&target));
    let weight = |r: &Value, t: &str| {
        r["index"].as_array().unwrap().iter()
            .find(|e| e["term"] == t)
            .map_or(0.0, |e| e["weight"].as_f64().unwrap())
    };
    for (t, w) in out["query"].as_object().unwrap() {
        let want = weight(&q, t) + 0.75 * weight(&p, t);
        assert!((w.as_f64().unwrap() - want).abs() < 1e-12, "{t}");
    }

    assert!(e.reformulate_json("img-001", &["ghost".into()], &[], 5).is_err());
}

#[test]
fn invalid_data_is_rejected() {
    let th = include_str!("../../../data/thesaurus.json");
    let bad = r#"{"id":"x","uri":"x.jpg","index":[{"term":"t.sun","weight":5}]}"#;
    assert!(Engine::load(th, bad).is_err());
}
