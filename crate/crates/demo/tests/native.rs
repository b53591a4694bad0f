use randlift_demo::{deviation_json, matching_json, spectrum_json, MAX_ORDER};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn spectrum_lists_all_new_eigenvalues() {
    let v = parse(&spectrum_json("complete", 4, 20, 1).unwrap());
    let eig: Vec<f64> = serde_json::from_value(v["eigenvalues"].clone()).unwrap();
    assert_eq!(eig.len(), 19 * 4);
    let max = eig.iter().fold(0f64, |m, x| m.max(x.abs()));
    assert!((max - v["lambda_star"].as_f64().unwrap()).abs() < 1e-9);
    assert!((v["ramanujan"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn spectrum_rejects_bad_requests() {
    assert!(spectrum_json("wheel", 4, 10, 0).is_err());
    assert!(spectrum_json("complete", 4, MAX_ORDER, 0).is_err());
    assert!(spectrum_json("complete", 4, 0, 0).is_err());
}

#[test]
fn deviation_curve_stays_above_its_bound() {
    let v = parse(&deviation_json(-1.0, 20.0, 500).unwrap());
    let b: Vec<f64> = serde_json::from_value(v["b"].clone()).unwrap();
    let lb: Vec<f64> = serde_json::from_value(v["lower_bound"].clone()).unwrap();
    assert_eq!(b.len(), 500);
    assert!((b[0] - 1.0).abs() < 1e-15);
    assert!(b.iter().zip(&lb).all(|(x, y)| x >= y));
    assert!(deviation_json(-2.0, 1.0, 10).is_err());
    assert!(deviation_json(0.0, 1.0, 1).is_err());
}

#[test]
fn matching_probability_example() {
    let v = parse(&matching_json(4, "2,2", "2,2", "2,0;0,2").unwrap());
    assert_eq!(v["rational"], "1/6");
    assert!((v["exact"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    let ratio = v["exact"].as_f64().unwrap() / v["asymptotic"].as_f64().unwrap();
    let lo = v["ratio_interval"][0].as_f64().unwrap();
    let hi = v["ratio_interval"][1].as_f64().unwrap();
    assert!(lo <= ratio && ratio <= hi);
    assert!(v["exact"].as_f64().unwrap() <= v["corollary_bound"].as_f64().unwrap());
    assert!(matching_json(4, "2,2", "2,2", "2,1;0,2").is_err());
    assert!(matching_json(4, "2,x", "2,2", "2,0;0,2").is_err());
}
