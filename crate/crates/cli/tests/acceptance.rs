//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use overrank::oracle::Which;
use overrank::theorems::{
    is_counted, lemma_suite, m2_cases, oracle_suite, proof_instantiations, rank_cases, section4_suite, thm1_suite,
    thm2_suite, verify_generic_independence, LemmaOrders, Section4Orders,
};
use overrank::VerificationReport;
use serde_json::Value;

type Outcome = Result<String, String>;

fn counted_pass(reports: &[VerificationReport]) -> Outcome {
    let counted: Vec<&VerificationReport> = reports.iter().filter(|r| is_counted(r)).collect();
    if counted.is_empty() {
        return Err("no reports".into());
    }
    match counted.iter().find(|r| !r.passed()) {
        Some(r) => Err(r.summary_line()),
        None => Ok(format!("{} reports", counted.len())),
    }
}

fn with_ids(reports: &[VerificationReport], id: &str) -> Vec<VerificationReport> {
    reports.iter().filter(|r| r.identity_id == id).cloned().collect()
}

fn within(elapsed: Duration, budget_s: u64, outcome: Outcome) -> Outcome {
    let detail = outcome?;
    if elapsed > Duration::from_secs(budget_s) {
        return Err(format!("{detail} but took {:.1} s, budget {budget_s} s", elapsed.as_secs_f64()));
    }
    Ok(detail)
}

fn require(cond: bool, what: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn oracle_foundation() -> Outcome {
    let t = Instant::now();
    let v = oracle_suite(24);
    let mut base = with_ids(&v, "oracle.enumeration_count");
    base.extend(with_ids(&v, "oracle.table_invariants"));
    require(base.len() == 3, "expected enumeration check and two table checks")?;
    within(t.elapsed(), 30, counted_pass(&base))
}

fn closed_forms() -> Outcome {
    let v = with_ids(&oracle_suite(24), "oracle.closed_form");
    // j = 1..M-1 for M = 3..6, both statistics
    require(v.len() == 2 * (2 + 3 + 4 + 5), "closed-form case count")?;
    counted_pass(&v)
}

fn key_formulas() -> Outcome {
    let v = with_ids(&oracle_suite(24), "oracle.key_formula_enumerated");
    require(v.len() == 2 * (3 + 4 + 5 + 6), "key formula case count")?;
    counted_pass(&v)
}

fn rank_formula() -> Outcome {
    let t = Instant::now();
    let v = thm1_suite(&rank_cases(), 60);
    require(v.len() == 14 && v.iter().all(|r| r.order == 60), "14 cases at order 60")?;
    within(t.elapsed(), 300, counted_pass(&v))
}

fn m2_formula() -> Outcome {
    let v = thm2_suite(&m2_cases(), 60);
    require(v.len() == 15 && v.iter().all(|r| r.order == 60), "15 cases at order 60")?;
    counted_pass(&v)
}

fn generic_independence() -> Outcome {
    let cases = [(Which::Rank, 4, 2), (Which::Rank, 5, 3), (Which::Rank, 7, 7), (Which::M2, 3, 1), (Which::M2, 6, 4)];
    let v: Vec<VerificationReport> = cases.iter().map(|&(w, m, a)| verify_generic_independence(a, m, w, 40)).collect();
    for r in &v {
        let (f, s) = (&r.parameters["first"], &r.parameters["second"]);
        require(f != s, "the two parameter choices coincide")?;
    }
    counted_pass(&v)
}

fn lemmas() -> Outcome {
    let v = lemma_suite(LemmaOrders::acceptance());
    for (id, order) in [
        ("lemma.switch", 50),
        ("lemma.flip", 50),
        ("lemma.orthogonality", 50),
        ("appell_lerch.half", 200),
        ("theta.product_equals_sum", 200),
    ] {
        let found = with_ids(&v, id);
        require(!found.is_empty() && found.iter().all(|r| r.order >= order), &format!("{id} at order {order}"))?;
    }
    let orth = with_ids(&v, "lemma.orthogonality");
    for n in 1..=5 {
        let ks: std::collections::BTreeSet<i64> = orth
            .iter()
            .filter(|r| r.parameters["n"] == n.to_string())
            .map(|r| r.parameters["k"].parse().unwrap_or(-1))
            .collect();
        require(ks == (0..n).collect(), &format!("orthogonality covers every k for n = {n}"))?;
    }
    let mut all = v;
    all.extend(proof_instantiations(50));
    counted_pass(&all)
}

fn section4() -> Outcome {
    let v = section4_suite(Section4Orders::acceptance());
    for id in ["mod3.theta_identity", "mod3.eta_identity"] {
        require(with_ids(&v, id).iter().all(|r| r.order >= 100), &format!("{id} to order 100"))?;
    }
    let prog = with_ids(&v, "mod3.difference_progression");
    require(prog.len() == 3 && prog.iter().all(|r| r.order == 40), "three dissected identities at order 40")?;
    counted_pass(&v)
}

fn eta_label() -> Outcome {
    let v = section4_suite(Section4Orders::acceptance());
    let eta = with_ids(&v, "mod3.eta_identity");
    let r = eta.first().ok_or("no eta identity report")?;
    let claim = r.parameters.get("claim").ok_or("unlabelled")?;
    require(claim == &format!("verified to order {}", r.order), "label matches order")?;
    require(r.passed(), "eta identity passes")?;
    Ok(claim.clone())
}

fn cli() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_overrank");
    let t = Instant::now();
    let out = Command::new(bin).args(["verify", "all", "--order", "24", "--json"]).output().map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    require(out.status.success(), &String::from_utf8_lossy(&out.stderr))?;
    require(elapsed < Duration::from_secs(120), "verify all --order 24 under 2 minutes")?;
    let schema_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let reports: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let validator = jsonschema::validator_for(&schema).map_err(|e| e.to_string())?;
    if let Some(e) = validator.iter_errors(&reports).next() {
        return Err(format!("schema: {e} at {}", e.instance_path()));
    }
    let n = reports.as_array().map_or(0, Vec::len);
    for (expr, order, file) in [
        ("J(1)", "8", "j1_order8.txt"),
        ("j(-1; q)", "12", "theta_minus_one_order12.txt"),
        ("Dev(2, 3)", "10", "dev_2_3_order10.txt"),
    ] {
        let golden = std::fs::read(format!("{}/tests/golden/{file}", env!("CARGO_MANIFEST_DIR"))).map_err(|e| e.to_string())?;
        for _ in 0..2 {
            let o = Command::new(bin).args(["expand", expr, "--order", order]).output().map_err(|e| e.to_string())?;
            require(o.stdout == golden, &format!("golden expansion of {expr}"))?;
        }
    }
    Ok(format!("{n} reports in {:.1} s, schema valid, goldens stable", elapsed.as_secs_f64()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle foundation", oracle_foundation),
        ("closed forms at roots of unity", closed_forms),
        ("key formulas", key_formulas),
        ("rank pair formula", rank_formula),
        ("M2-rank pair formula", m2_formula),
        ("generic-choice independence", generic_independence),
        ("lemma suite", lemmas),
        ("mod 3 and mod 6 identities", section4),
        ("eta identity labelled as series check", eta_label),
        ("command line", cli),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} pass  {name}: {detail} ({secs:.1} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
