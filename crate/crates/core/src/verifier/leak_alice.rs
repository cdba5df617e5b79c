//! Alice holds one pair `(m1, c1)` and a second ciphertext `c2` in another
//! residue class. Given the nonces (which are visible as residues), the pair
//! `(c1, c2)` must be equally likely under every `m2`, each with probability
//! exactly `1/p^2`: one key per pair.

use super::oracle::{closed_encrypt, Shipped};
use super::{assign, Clause, Counterexample, Definition, DistributionTable, Probability, VerificationReport, Variant};
use crate::exec::{map_reduce, Execution};

/// `counts[m2][c1][c2]` for one `m1`, flattened.
struct Counts {
    p2: usize,
    cells: Vec<u64>,
}

impl Counts {
    fn get(&self, m2: u64, c1: u64, c2: u64) -> u64 {
        self.cells[(m2 as usize * self.p2 + c1 as usize) * self.p2 + c2 as usize]
    }
}

fn count_for(p: u64, m1: u64, keys: &[(u64, u64)]) -> Counts {
    let s = Shipped::new(p);
    let p2 = (p * p) as usize;
    let mut cells = vec![0u64; p as usize * p2 * p2];
    for key in keys {
        for z1 in 1..p {
            let c1 = s.encrypt(*key, m1, z1) as usize;
            for z2 in (1..p).filter(|z| *z != z1) {
                for m2 in 0..p {
                    let c2 = s.encrypt(*key, m2, z2) as usize;
                    cells[(m2 as usize * p2 + c1) * p2 + c2] += 1;
                }
            }
        }
    }
    Counts { p2, cells }
}

pub(super) fn run(p: u64, variant: Variant, execution: Execution) -> VerificationReport {
    let keys = variant.inner_keys(p);
    let total = keys.len() as u64;
    let s = Shipped::new(p);
    let (cx, cells_checked) = map_reduce(
        execution,
        p as usize,
        |m1| {
            let m1 = m1 as u64;
            let counts = count_for(p, m1, &keys);
            let mut checked = 0u64;
            for c1 in 0..p * p {
                for c2 in 0..p * p {
                    let (z1, z2) = (s.residue(c1), s.residue(c2));
                    if z1 == 0 || z2 == 0 || z1 == z2 {
                        continue;
                    }
                    let base = Probability::new(counts.get(0, c1, c2), total);
                    for m2 in 1..p {
                        checked += 1;
                        let here = Probability::new(counts.get(m2, c1, c2), total);
                        if here != base {
                            let a = assign(&[("m1", m1), ("c1", c1), ("c2", c2), ("m2a", 0), ("m2b", m2)]);
                            return (Some(Counterexample::new(Clause::PairGivenMessages, a, base, here)), checked);
                        }
                    }
                    checked += 1;
                    let target = Probability::new(1, p * p);
                    if base != target {
                        let a = assign(&[("m1", m1), ("c1", c1), ("c2", c2), ("m2", 0)]);
                        return (Some(Counterexample::new(Clause::PairAbsolute, a, base, target)), checked);
                    }
                }
            }
            (None, checked)
        },
        || (None, 0),
        |(a, n), (b, k)| (a.or(b), n + k),
    );
    let counts = count_for(p, 0, &keys);
    let tables = (0..p)
        .filter_map(|m2| {
            DistributionTable::from_counts(
                format!("M1 = 0, M2 = {m2}, z1 = 1, z2 = 2"),
                vec!["c1", "c2"],
                (0..p).flat_map(|a| (0..p).map(move |b| (a * p + 1, b * p + 2)))
                    .map(|(c1, c2)| (vec![c1, c2], counts.get(m2, c1, c2)))
                    .collect::<Vec<_>>(),
            )
        })
        .take(2)
        .collect();
    VerificationReport {
        definition: Definition::LeakFreeAlice,
        modulus: p,
        batch_len: None,
        variant,
        cells_checked,
        tables,
        counterexample: cx,
    }
}

pub(super) fn recheck(p: u64, variant: Variant, cx: &Counterexample) -> Option<(Probability, Probability)> {
    let (m1, c1, c2) = (cx.get("m1")?, cx.get("c1")?, cx.get("c2")?);
    let keys = variant.inner_keys(p);
    let total = keys.len() as u64;
    let (z1, z2) = (c1 % p, c2 % p);
    let pr = |m2: u64| {
        let n = keys
            .iter()
            .filter(|k| closed_encrypt(p, **k, m1, z1) == c1 && closed_encrypt(p, **k, m2, z2) == c2)
            .count();
        Probability::new(n as u64, total)
    };
    match cx.clause {
        Clause::PairGivenMessages => Some((pr(cx.get("m2a")?), pr(cx.get("m2b")?))),
        Clause::PairAbsolute => Some((pr(cx.get("m2")?), Probability::new(1, p * p))),
        _ => None,
    }
}
