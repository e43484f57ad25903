use lexpara_web::{bleu, system_names, Demo};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn words(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|t| t.as_str().unwrap().to_owned()).collect()
}

#[test]
fn realizes_and_decodes_a_reference() {
    let demo = Demo::build(17).unwrap();
    assert_eq!(demo.reference_count(), 40);
    let r = parse(&demo.reference(0).unwrap());
    assert!(!words(&r["reference"]).is_empty());
    assert!(demo.reference(40).is_none());

    let out = parse(&demo.realize_system(0, 28).unwrap());
    assert_eq!(out["name"], "no constraints");
    let p = &out["paraphrases"][0];
    assert!(!words(&p["output"]).is_empty());

    let pools = (0..40).filter(|&i| {
        let out = parse(&demo.realize_system(i, 21).unwrap());
        !out["pool"].as_array().unwrap().is_empty()
    });
    assert!(pools.count() >= 30);

    let out = parse(&demo.realize_system(0, 21).unwrap());
    assert!(!out["paraphrases"].as_array().unwrap().is_empty());
    for p in out["paraphrases"].as_array().unwrap() {
        let output = words(&p["output"]);
        for neg in p["constraints"]["negative"].as_array().unwrap() {
            let neg = words(neg);
            assert!(!output.windows(neg.len()).any(|w| w == neg.as_slice()), "{output:?} contains {neg:?}");
        }
    }
    assert!(demo.realize_system(0, 38).is_err());
    assert!(demo.realize_system(99, 1).is_err());
}

#[test]
fn free_text_decode_honours_constraints() {
    let demo = Demo::build(17).unwrap();
    let r = parse(&demo.reference(1).unwrap());
    let source = words(&r["source"]).join(" ");
    let reference = words(&r["reference"]);
    let keep = reference.iter().find(|w| w.chars().all(|c| c.is_ascii_lowercase())).unwrap().clone();
    let out = parse(&demo.decode_text(&source, &keep, "", ""));
    assert!(words(&out["output"]).contains(&keep), "{out}");

    let out = parse(&demo.decode_text(&source, "xyzzy", "", ""));
    assert!(out["output"].is_null());
    assert!(out["error"].as_str().unwrap().contains("xyzzy"));
}

#[test]
fn bleu_and_names() {
    let same = parse(&bleu("the cat sat on the mat", "The cat sat on the mat."));
    assert_eq!(same["bleu"], 100.0);
    let none = parse(&bleu("the cat", "dogs run"));
    assert_eq!(none["bleu"], 0.0);
    let names: Vec<String> = serde_json::from_str(&system_names()).unwrap();
    assert_eq!(names.len(), 37);
}
