use bccode::das::{self, DasError, DasParams, PrecisionConfig};

fn cfg() -> PrecisionConfig {
    PrecisionConfig::default()
}

#[test]
fn thresholds_bracket_s_min() {
    for (n, d, s) in [(1444, 49, 72), (1416, 65, 53)] {
        let p = DasParams::standard(n, 1024, d);
        let at = p.with_s(s);
        let before = p.with_s(s - 1);
        assert!(das::c_hat(&at, &cfg()).unwrap().unwrap() >= 900);
        assert!(das::c_tilde(&at, &cfg()).unwrap().unwrap() <= 100);
        let chat_ok = das::c_hat(&before, &cfg()).unwrap().is_some_and(|v| v >= 900);
        let ctilde_ok = das::c_tilde(&before, &cfg()).unwrap().is_some_and(|v| v <= 100);
        assert!(!(chat_ok && ctilde_ok));
        let q100 = das::to_f64(&das::q_c_adaptive(&at.with_c(100), &cfg()).unwrap());
        assert!(q100 > 0.999_999);
    }
}

#[test]
fn result_is_stable_under_more_precision() {
    let p = DasParams::standard(1416, 1024, 65).with_s(53).with_c(100);
    let low = das::q_c_adaptive(&p, &cfg()).unwrap();
    let high = das::q_c_adaptive(&p, &PrecisionConfig::with_digits(300).unwrap()).unwrap();
    assert!(das::to_f64(&(low - high)).abs() < 1e-40);
    assert!(matches!(PrecisionConfig::with_digits(20), Err(DasError::PrecisionTooLow(20))));
}

#[test]
fn unreachable_targets() {
    let p = DasParams { n: 20, k: 10, d: 2, c: 5, s: 1, gamma: 0.99, eta: 0.99, chat_target: 5, ctilde_target: 5 };
    assert_eq!(das::s_min(&p, &cfg()).unwrap(), None);
    let r = das::report(&p, &cfg()).unwrap();
    assert_eq!(r.s_min, None);
    assert!(serde_json::to_string(&r).unwrap().contains("\"s_min\":null"));
}

#[test]
fn s_out_of_range_for_q() {
    let p = DasParams::standard(100, 50, 10).with_s(95);
    assert!(matches!(das::q_c(&p, &cfg()), Err(DasError::SampleOutOfRange { .. })));
}

#[test]
fn curve_csv_shapes() {
    let p = DasParams::standard(1444, 1024, 49).with_s(72).with_c(50);
    let p1 = das::p1_csv(&das::p1_curve(&p, &cfg(), 10).unwrap());
    assert_eq!(p1.lines().count(), 12);
    let chat = das::chat_csv(&das::chat_curve(&p, &cfg()).unwrap());
    assert_eq!(chat.lines().count(), 51);
    let qc = das::qc_csv(&das::q_curve(&p, &cfg()).unwrap());
    assert_eq!(qc.lines().count(), 51);
}
