use std::process::Command;

fn expand(expr: &str, order: i64) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_overrank"))
        .args(["expand", expr, "--order", &order.to_string()])
        .output()
        .expect("run overrank");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn golden(name: &str) -> Vec<u8> {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn pentagonal() {
    assert_eq!(expand("J(1)", 8), golden("j1_order8.txt"));
    assert_eq!(golden("j1_order8.txt"), b"1 - q - q^2 + q^5 + q^7 + O(q^8)\n");
}

#[test]
fn theta_at_minus_one() {
    assert_eq!(expand("j(-1; q)", 12), golden("theta_minus_one_order12.txt"));
}

#[test]
fn rank_deviation() {
    assert_eq!(expand("Dev(2, 3)", 10), golden("dev_2_3_order10.txt"));
    let dev = Command::new(env!("CARGO_BIN_EXE_overrank"))
        .args(["dev", "--a", "2", "--M", "3", "--order", "10"])
        .output()
        .unwrap();
    assert_eq!(dev.stdout, golden("dev_2_3_order10.txt"));
}

#[test]
fn repeated_runs_are_identical() {
    for _ in 0..3 {
        assert_eq!(expand("Dev(2, 3)", 10), golden("dev_2_3_order10.txt"));
        assert_eq!(expand("J(1)", 8), golden("j1_order8.txt"));
    }
}
