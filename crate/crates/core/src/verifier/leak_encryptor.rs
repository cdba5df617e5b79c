//! The Encryptor knows every batch message, every inner ciphertext and the
//! inner key, and overhears `w` and `w'`. Alice's index `i` is uniform, so
//! given the batch alone `Pr[M = m] = #{j : m_j = m} / L`; overhearing the
//! exchange must not move that.
//!
//! Only the normal case `M = M_i` is enumerated.

use super::oracle::{closed_decrypt_residue, closed_encrypt, pad, Shipped};
use super::{assign, Clause, Counterexample, Definition, DistributionTable, Probability, VerificationReport, Variant};
use crate::exec::{map_reduce, Execution};

/// Ordered selections of `len` distinct values from `1..p`.
fn nonce_tuples(p: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for prefix in &out {
            for z in (1..p).filter(|z| !prefix.contains(z)) {
                let mut t = prefix.clone();
                t.push(z);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

struct Cell {
    msgs: Vec<u64>,
    key: (u64, u64),
}

fn cell(p: u64, len: usize, index: usize) -> Cell {
    let mut rest = index as u64;
    let msgs = (0..len)
        .map(|_| {
            let m = rest % p;
            rest /= p;
            m
        })
        .collect();
    Cell { msgs, key: (rest / p, rest % p) }
}

/// `counts[w][w'][m]` over Alice's index and both pads, for one transcript
/// of batch messages, key and nonces.
fn observation_counts(s: &Shipped, p: u64, c: &Cell, nonces: &[u64], pads: &[Vec<u64>], variant: Variant) -> Vec<u64> {
    let n = p as usize;
    let mut counts = vec![0u64; n * n * n];
    for (m, z) in c.msgs.iter().zip(nonces) {
        let c_prime = s.residue(s.encrypt(c.key, *m, *z));
        let answer = s.decrypt_residue(c.key, c_prime);
        for k_c in 0..n {
            for k_p in 0..n {
                let (w, w_prime) = match variant {
                    Variant::NoOuterLayer => (c_prime as usize, answer as usize),
                    _ => (pads[k_c][c_prime as usize] as usize, pads[k_p][answer as usize] as usize),
                };
                counts[(w * n + w_prime) * n + *m as usize] += 1;
            }
        }
    }
    counts
}

fn prior(msgs: &[u64], m: u64) -> u64 {
    msgs.iter().filter(|x| **x == m).count() as u64
}

fn describe(c: &Cell, nonces: &[u64], w: u64, w_prime: u64, m: u64) -> Vec<(String, u64)> {
    let mut a = Vec::new();
    for (j, (mj, zj)) in c.msgs.iter().zip(nonces).enumerate() {
        a.push((format!("m_{}", j + 1), *mj));
        a.push((format!("z_{}", j + 1), *zj));
    }
    a.extend(assign(&[("x", c.key.0), ("y", c.key.1), ("w", w), ("w'", w_prime), ("m", m)]));
    a
}

pub(super) fn run(p: u64, len: usize, variant: Variant, execution: Execution) -> VerificationReport {
    let tuples = nonce_tuples(p, len);
    let pads: Vec<Vec<u64>> = (0..p).map(|k| (0..p).map(|v| pad(k, v, p)).collect()).collect();
    let cells = p.pow(len as u32) as usize * (p * p) as usize;
    let l = len as u64;
    let s = Shipped::new(p);
    let (cx, cells_checked) = map_reduce(
        execution,
        cells,
        |index| {
            let c = cell(p, len, index);
            let mut checked = 0;
            for nonces in &tuples {
                let counts = observation_counts(&s, p, &c, nonces, &pads, variant);
                for w in 0..p {
                    for w_prime in 0..p {
                        let base = ((w * p + w_prime) * p) as usize;
                        let row = &counts[base..base + p as usize];
                        let total: u64 = row.iter().sum();
                        if total == 0 {
                            continue;
                        }
                        for m in 0..p {
                            checked += 1;
                            if row[m as usize] * l != total * prior(&c.msgs, m) {
                                let cx = Counterexample::new(
                                    Clause::EncryptorPosterior,
                                    describe(&c, nonces, w, w_prime, m),
                                    Probability::new(row[m as usize], total),
                                    Probability::new(prior(&c.msgs, m), l),
                                );
                                return (Some(cx), checked);
                            }
                        }
                    }
                }
            }
            (None, checked)
        },
        || (None, 0),
        |(a, n), (b, k)| (a.or(b), n + k),
    );

    let sample = Cell { msgs: (0..l).map(|j| j % p).collect(), key: (1, 1) };
    let mut tables: Vec<_> = DistributionTable::from_counts(
        format!("batch messages {:?}", sample.msgs),
        vec!["m"],
        (0..p).map(|m| (vec![m], prior(&sample.msgs, m))).collect::<Vec<_>>(),
    )
    .into_iter()
    .collect();
    let counts = observation_counts(&s, p, &sample, &tuples[0], &pads, variant);
    let n = p as usize;
    if let Some(obs) = (0..n * n).find(|o| counts[o * n..(o + 1) * n].iter().any(|c| *c > 0)) {
        tables.extend(DistributionTable::from_counts(
            format!(
                "batch messages {:?}, nonces {:?}, x = 1, y = 1, w = {}, w' = {}",
                sample.msgs,
                tuples[0],
                obs / n,
                obs % n
            ),
            vec!["m"],
            (0..n).map(|m| (vec![m as u64], counts[obs * n + m])).collect::<Vec<_>>(),
        ));
    }

    VerificationReport {
        definition: Definition::LeakFreeEncryptor,
        modulus: p,
        batch_len: Some(len),
        variant,
        cells_checked,
        tables,
        counterexample: cx,
    }
}

pub(super) fn recheck(p: u64, variant: Variant, cx: &Counterexample) -> Option<(Probability, Probability)> {
    let mut msgs = Vec::new();
    let mut nonces = Vec::new();
    while let (Some(m), Some(z)) =
        (cx.get(&format!("m_{}", msgs.len() + 1)), cx.get(&format!("z_{}", nonces.len() + 1)))
    {
        msgs.push(m);
        nonces.push(z);
    }
    let key = (cx.get("x")?, cx.get("y")?);
    let (w, w_prime, target) = (cx.get("w")?, cx.get("w'")?, cx.get("m")?);
    let mut hits = 0u64;
    let mut total = 0u64;
    for (m, z) in msgs.iter().zip(&nonces) {
        let c_prime = closed_encrypt(p, key, *m, *z) % p;
        let answer = closed_decrypt_residue(p, key, c_prime);
        for k_c in 0..p {
            for k_p in 0..p {
                let seen = match variant {
                    Variant::NoOuterLayer => (c_prime, answer),
                    _ => ((c_prime + k_c) % p, (answer + k_p) % p),
                };
                if seen == (w, w_prime) {
                    total += 1;
                    hits += u64::from(*m == target);
                }
            }
        }
    }
    if total == 0 || msgs.is_empty() {
        return None;
    }
    let l = msgs.len() as u64;
    Some((Probability::new(hits, total), Probability::new(prior(&msgs, target), l)))
}
