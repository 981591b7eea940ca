//! Which reports each `verify` group runs.

use std::collections::BTreeSet;

use overrank::oracle::{Which, DEFAULT_ORACLE_RANGE};
use overrank::theorems::{
    lemma_suite, m2_cases, oracle_suite, proof_instantiations, rank_cases, section4_suite, sort_reports,
    verify_generic_independence, verify_pair, verify_single, LemmaOrders, Section4Orders,
};
use overrank::{par, VerificationReport};

pub const DEFAULT_ORDER: i64 = 60;
/// Order for the proof instantiations when none is given.
pub const DERIVATION_ORDER: i64 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Group {
    Thm1,
    Thm2,
    Section4,
    Lemmas,
    All,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Selection {
    pub modulus: Option<i64>,
    pub a: Option<i64>,
}

/// `(M, a)` cases for one of the two general formulas.
pub fn cases(which: Which, sel: Selection) -> Vec<(i64, i64)> {
    let lo = match which {
        Which::Rank => 2,
        Which::M2 => 1,
    };
    let mut v = match (sel.modulus, sel.a) {
        (Some(m), Some(a)) => vec![(m, a)],
        (Some(m), None) => {
            let hi = if which == Which::Rank { m } else { m - 1 };
            (lo..=hi).map(|a| (m, a)).collect()
        }
        (None, _) => match which {
            Which::Rank => rank_cases(),
            Which::M2 => m2_cases(),
        },
    };
    if let (None, Some(a)) = (sel.modulus, sel.a) {
        v.retain(|&(_, b)| b == a);
    }
    v
}

/// Pairs, generic-parameter independence and, for odd moduli, single
/// deviations solved from the pairs.
fn formula_group(which: Which, sel: Selection, order: i64) -> Vec<VerificationReport> {
    let cs = cases(which, sel);
    let odd: BTreeSet<i64> = cs.iter().map(|&(m, _)| m).filter(|m| m % 2 == 1).collect();
    let mut jobs: Vec<(u8, i64, i64)> = Vec::new();
    for &(m, a) in &cs {
        jobs.push((0, m, a));
        jobs.push((1, m, a));
    }
    for m in odd {
        match sel.a {
            Some(a) => jobs.push((2, m, a)),
            None => jobs.extend((0..=(m - 1) / 2).map(|a| (2, m, a))),
        }
    }
    par::map(&jobs, |&(kind, m, a)| match kind {
        0 => verify_pair(a, m, which, order),
        1 => verify_generic_independence(a, m, which, order),
        _ => verify_single(a, m, which, order),
    })
}

fn lemmas_group(order: Option<i64>) -> Vec<VerificationReport> {
    let orders = order.map_or_else(LemmaOrders::acceptance, LemmaOrders::uniform);
    let mut out = lemma_suite(orders);
    out.extend(proof_instantiations(order.unwrap_or(DERIVATION_ORDER)));
    out.extend(oracle_suite(DEFAULT_ORACLE_RANGE));
    out
}

/// Run a group. Without an explicit order the formulas use
/// [`DEFAULT_ORDER`] and the other groups their own acceptance orders.
pub fn run(group: Group, sel: Selection, order: Option<i64>) -> Vec<VerificationReport> {
    let n = order.unwrap_or(DEFAULT_ORDER);
    let s4 = || section4_suite(order.map_or_else(Section4Orders::acceptance, Section4Orders::uniform));
    let mut out = match group {
        Group::Thm1 => formula_group(Which::Rank, sel, n),
        Group::Thm2 => formula_group(Which::M2, sel, n),
        Group::Section4 => s4(),
        Group::Lemmas => lemmas_group(order),
        Group::All => {
            let mut v = formula_group(Which::Rank, sel, n);
            v.extend(formula_group(Which::M2, sel, n));
            v.extend(lemmas_group(order));
            v.extend(s4());
            v
        }
    };
    sort_reports(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_selection() {
        let s = |m, a| Selection { modulus: m, a };
        assert_eq!(cases(Which::Rank, s(Some(3), None)), vec![(3, 2), (3, 3)]);
        assert_eq!(cases(Which::M2, s(Some(3), None)), vec![(3, 1), (3, 2)]);
        assert_eq!(cases(Which::Rank, s(None, Some(7))), vec![(7, 7)]);
        assert_eq!(cases(Which::Rank, s(Some(8), Some(3))), vec![(8, 3)]);
        assert_eq!(cases(Which::Rank, s(None, None)).len(), 14);
    }

    #[test]
    fn small_group() {
        let r = run(Group::Thm1, Selection { modulus: Some(3), a: None }, Some(20));
        // two pairs, two independence checks, singles a = 0, 1
        assert_eq!(r.len(), 6);
        assert!(r.iter().all(VerificationReport::passed), "{r:#?}");
    }
}
