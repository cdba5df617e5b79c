//! The Decryptor holds the key and sees `c'` and its own answer `m'`. Its
//! posterior on `M` must equal the prior, and `c'` must be uniform on
//! `Z_p \ {0}` whatever the key and message.

use super::oracle::{closed_decrypt_residue, closed_encrypt, Shipped};
use super::{assign, Clause, Counterexample, Definition, DistributionTable, Probability, VerificationReport, Variant};
use crate::exec::{map_reduce, Execution};

/// Joint weights `Pr[M = m, C' = c']` for one key under a uniform prior on
/// `M`, indexed `[c'][m]`, plus the observed `m'` for each `c'`.
struct KeyTable {
    joint: Vec<Vec<Probability>>,
    m_prime: Vec<Option<u64>>,
}

fn key_table(p: u64, key: (u64, u64), variant: Variant) -> KeyTable {
    let s = Shipped::new(p);
    let zero = Probability::from_integer(0);
    let mut joint = vec![vec![zero; p as usize]; p as usize];
    let mut m_prime = vec![None; p as usize];
    for m in 0..p {
        let nonces = variant.nonces(p, m);
        let weight = Probability::new(1, p * nonces.len() as u64);
        for z in nonces {
            let c_prime = s.residue(s.encrypt(key, m, z));
            let answer = s.decrypt_residue(key, c_prime);
            debug_assert!(m_prime[c_prime as usize].is_none_or(|a| a == answer));
            m_prime[c_prime as usize] = Some(answer);
            joint[c_prime as usize][m as usize] += weight;
        }
    }
    KeyTable { joint, m_prime }
}

fn check_key(p: u64, key: (u64, u64), variant: Variant) -> (Option<Counterexample>, u64) {
    let t = key_table(p, key, variant);
    let prior = Probability::new(1, p);
    let mut checked = 0;
    for c_prime in 0..p {
        let Some(answer) = t.m_prime[c_prime as usize] else { continue };
        let row = &t.joint[c_prime as usize];
        let evidence: Probability = row.iter().sum();
        for m in 0..p {
            checked += 1;
            let posterior = row[m as usize] / evidence;
            if posterior != prior {
                let a = assign(&[("x", key.0), ("y", key.1), ("c'", c_prime), ("m'", answer), ("m", m)]);
                return (Some(Counterexample::new(Clause::DecryptorPosterior, a, posterior, prior)), checked);
            }
        }
    }
    let uniform = Probability::new(1, p - 1);
    for m in 0..p {
        let given_m = Probability::new(1, p);
        for c_prime in 1..p {
            checked += 1;
            let pr = t.joint[c_prime as usize][m as usize] / given_m;
            if pr != uniform {
                let a = assign(&[("x", key.0), ("y", key.1), ("m", m), ("c'", c_prime)]);
                return (Some(Counterexample::new(Clause::ResidueUniform, a, pr, uniform)), checked);
            }
        }
    }
    (None, checked)
}

pub(super) fn run(p: u64, variant: Variant, execution: Execution) -> VerificationReport {
    let keys = variant.inner_keys(p);
    let (cx, cells_checked) = map_reduce(
        execution,
        keys.len(),
        |i| check_key(p, keys[i], variant),
        || (None, 0),
        |(a, n), (b, k)| (a.or(b), n + k),
    );
    let key = keys[keys.len() - 1];
    let s = Shipped::new(p);
    let nonces = variant.nonces(p, 0);
    let mut tables: Vec<_> = DistributionTable::from_counts(
        format!("x = {}, y = {}, M = 0", key.0, key.1),
        vec!["c'"],
        nonces.iter().map(|z| (vec![s.residue(s.encrypt(key, 0, *z))], 1)).collect::<Vec<_>>(),
    )
    .into_iter()
    .collect();
    let t = key_table(p, key, variant);
    if let Some(c_prime) = (1..p).find(|c| t.m_prime[*c as usize].is_some()) {
        // Scale the exact joint weights to integers over a common denominator.
        let row = &t.joint[c_prime as usize];
        let denom = row.iter().fold(1u64, |acc, r| lcm(acc, *r.denom()));
        tables.extend(DistributionTable::from_counts(
            format!("x = {}, y = {}, c' = {c_prime}, m' = {}", key.0, key.1, t.m_prime[c_prime as usize].unwrap()),
            vec!["m"],
            row.iter().enumerate().map(|(m, r)| (vec![m as u64], (r * denom).to_integer())).collect::<Vec<_>>(),
        ));
    }
    VerificationReport {
        definition: Definition::BlindnessDecryptor,
        modulus: p,
        batch_len: None,
        variant,
        cells_checked,
        tables,
        counterexample: cx,
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

pub(super) fn recheck(p: u64, variant: Variant, cx: &Counterexample) -> Option<(Probability, Probability)> {
    let key = (cx.get("x")?, cx.get("y")?);
    let target_m = cx.get("m")?;
    let c_prime = cx.get("c'")?;
    // Pr[M = m, C' = c'] by direct count of nonces, uniform prior on M.
    let joint = |m: u64| {
        let nonces = variant.nonces(p, m);
        let hits = nonces.iter().filter(|z| closed_encrypt(p, key, m, **z) % p == c_prime).count() as u64;
        Probability::new(hits, p * nonces.len() as u64)
    };
    match cx.clause {
        Clause::DecryptorPosterior => {
            if closed_decrypt_residue(p, key, c_prime) != cx.get("m'")? {
                return None;
            }
            let evidence: Probability = (0..p).map(joint).sum();
            Some((joint(target_m) / evidence, Probability::new(1, p)))
        }
        Clause::ResidueUniform => Some((joint(target_m) * p, Probability::new(1, p - 1))),
        _ => None,
    }
}
