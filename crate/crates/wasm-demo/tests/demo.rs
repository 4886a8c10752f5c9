use agefair_wasm::{balance_json, metrics_json, noise_json, parse_scored};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn metrics_of_a_perfect_ranking() {
    let v = parse(&metrics_json("score,label\n0.9,fake\n0.8,1\n0.3,real\n0.1,0\n", 0.1, "width").unwrap());
    assert_eq!(v["auc"], 1.0);
    assert_eq!(v["pauc"], 1.0);
    assert_eq!(v["eer"], 0.0);
    assert_eq!(v["n_fake"], 2);
    assert_eq!(v["roc"].as_array().unwrap().first().unwrap(), &serde_json::json!([0.0, 0.0]));
}

#[test]
fn metrics_reject_bad_input() {
    assert!(metrics_json("0.5,fake\n", 0.1, "width").unwrap_err().contains("one fake and one real"));
    assert!(metrics_json("0.5,maybe\n", 0.1, "width").unwrap_err().contains("line 1"));
    assert!(metrics_json("0.5,fake\n0.2,real\n", 0.0, "width").is_err());
    assert!(metrics_json("0.5,fake\n0.2,real\n", 0.1, "bogus").is_err());
    assert!(parse_scored("nan,fake").is_err());
}

#[test]
fn balance_defaults_to_source_table() {
    let v = parse(&balance_json("").unwrap());
    assert_eq!(v["fake_target"], 764);
    assert_eq!(v["real_target"], 525);
    let synth: Vec<u64> = v["synthesize"].as_array().unwrap().iter().map(|r| r["amount"].as_u64().unwrap()).collect();
    assert_eq!(synth, [764, 764, 0, 465, 764]);
    for row in v["after"].as_array().unwrap() {
        assert_eq!(row[2], 525);
    }
    assert!(balance_json("not,a,table\n").is_err());
    assert!(balance_json("label,age_group,source,count\nfake,19-35,celeb-df\n").is_err());
}

#[test]
fn noise_degrades_monotonically_and_is_seeded() {
    let at = |a| parse(&noise_json(48, a, 7).unwrap());
    let clean = at(0);
    assert_eq!(clean["ssim"], 1.0);
    assert_eq!(clean["psnr_db"], 99.0);
    let (mild, harsh) = (at(10), at(80));
    assert!(mild["ssim"].as_f64() > harsh["ssim"].as_f64());
    assert!(mild["psnr_db"].as_f64() > harsh["psnr_db"].as_f64());
    assert_eq!(noise_json(48, 10, 7).unwrap(), noise_json(48, 10, 7).unwrap());
    assert_ne!(noise_json(48, 10, 7).unwrap(), noise_json(48, 10, 8).unwrap());
    assert!(noise_json(4, 10, 7).is_err());
}
