//! `Pr[C = c | M = m1] = Pr[C = c | M = m2]` for the additive pad over `Z_n`.

use super::oracle::pad;
use super::{assign, Clause, Counterexample, Definition, DistributionTable, Probability, VerificationReport, Variant};
use crate::exec::{map_reduce, Execution};

fn keys(n: u64, variant: Variant) -> Vec<u64> {
    match variant {
        Variant::EvenOuterKeys => (0..n).step_by(2).collect(),
        _ => (0..n).collect(),
    }
}

fn row(n: u64, m: u64, keys: &[u64]) -> Vec<u64> {
    let mut counts = vec![0u64; n as usize];
    for k in keys {
        counts[pad(*k, m, n) as usize] += 1;
    }
    counts
}

pub(super) fn run(n: u64, variant: Variant, execution: Execution) -> VerificationReport {
    let keys = keys(n, variant);
    let total = keys.len() as u64;
    let reference = row(n, 0, &keys);
    let counterexample = map_reduce(
        execution,
        n as usize,
        |m| {
            let m = m as u64;
            let counts = row(n, m, &keys);
            let c = (0..n as usize).find(|c| counts[*c] != reference[*c])?;
            Some(Counterexample::new(
                Clause::CiphertextGivenMessage,
                assign(&[("n", n), ("m1", 0), ("m2", m), ("c", c as u64)]),
                Probability::new(reference[c], total),
                Probability::new(counts[c], total),
            ))
        },
        || None,
        |a, b| a.or(b),
    );
    let mut tables = Vec::new();
    for m in [0, n - 1] {
        let counts = row(n, m, &keys);
        tables.extend(DistributionTable::from_counts(
            format!("M = {m}"),
            vec!["c"],
            counts.into_iter().enumerate().map(|(c, k)| (vec![c as u64], k)),
        ));
    }
    VerificationReport {
        definition: Definition::OrdinarySecrecy,
        modulus: n,
        batch_len: None,
        variant,
        cells_checked: n * n,
        tables,
        counterexample,
    }
}

pub(super) fn recheck(n: u64, variant: Variant, cx: &Counterexample) -> Option<(Probability, Probability)> {
    let (m1, m2, c) = (cx.get("m1")?, cx.get("m2")?, cx.get("c")?);
    let keys = keys(n, variant);
    let total = keys.len() as u64;
    let count = |m: u64| keys.iter().filter(|k| (m + **k) % n == c).count() as u64;
    Some((Probability::new(count(m1), total), Probability::new(count(m2), total)))
}
