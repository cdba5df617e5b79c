//! One line per acceptance criterion; exits non-zero if any fails.

use std::path::Path;
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use blindpad::{client, commands, server::Server, CliError};
use blindpad_core::keystore::{KeystoreRecord, RecordBody};
use blindpad_core::num::{PrimeModulus, RandomSource, U256};
use blindpad_core::outer_pad::OuterKey;
use blindpad_core::params::PRESETS;
use blindpad_core::protocol::{BlindRequest, Decryptor, SessionId, SessionKeyMaterial, SessionState};
use blindpad_core::twopad::{
    decrypt, encrypt, encrypt_with_nonce, gen, map_ciphertext, recover_key, InnerCiphertext, InnerPlaintext, TwoPadKey,
};
use blindpad_core::verifier::{
    verify_blindness_decryptor, verify_leakfree_alice, verify_leakfree_encryptor, verify_ordinary_secrecy, Probability,
    VerificationReport, Verifier, Variant,
};
use blindpad_core::Execution;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn u(v: u64) -> U256 {
    U256::from_u64(v)
}

fn prime(v: u64) -> PrimeModulus {
    PrimeModulus::from_u64(v).unwrap()
}

fn pt(v: u64, p: &PrimeModulus) -> InnerPlaintext {
    InnerPlaintext::new(u(v), p).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let spent = start.elapsed();
    ensure(spent < limit, || format!("took {spent:.2?}, limit {limit:?}"))?;
    Ok(spent)
}

fn ac1_exhaustive_correctness() -> Outcome {
    let start = Instant::now();
    let mut cases = 0u64;
    for q in [5u64, 7, 11] {
        let p = prime(q);
        for key in TwoPadKey::enumerate(&p) {
            for z in 1..q {
                for m in 0..q {
                    let c = encrypt_with_nonce(&key, &p, pt(m, &p), u(z)).map_err(|e| e.to_string())?;
                    ensure(decrypt(&key, &p, c) == pt(m, &p), || format!("p={q} {key:?} z={z} m={m}"))?;
                    cases += 1;
                }
            }
        }
    }
    ensure(cases == 500 + 2058 + 13310, || format!("enumerated {cases} cases"))?;
    let spent = within(start, Duration::from_secs(10))?;
    Ok(format!("{cases} (key, nonce, message) cases at p = 5, 7, 11, all decrypt correctly, {spent:.2?} (< 10 s)"))
}

fn ac2_worked_trace() -> Outcome {
    let p = prime(5);
    let key = TwoPadKey::new(u(2), u(3), &p).unwrap();
    let c = encrypt_with_nonce(&key, &p, pt(4, &p), u(1)).unwrap();
    ensure(c.value() == u(21), || format!("Enc = {}, expected 21", c.value()))?;
    let m = decrypt(&key, &p, c);
    ensure(m.value() == u(4), || format!("Dec = {}, expected 4", m.value()))?;

    let zero = OuterKey::from_value(u(0), u(5)).unwrap();
    let material = SessionKeyMaterial::from_parts(
        SessionId::default(),
        p,
        key,
        vec![OuterKey::from_value(u(0), u(25)).unwrap()],
        zero,
        zero,
        SessionState::Fresh,
    )
    .unwrap();
    let resp = Decryptor::new(material.decryptor_view()).respond(&BlindRequest(u(1))).map_err(|e| e.to_string())?;
    ensure(resp.0 == u(0), || format!("Decryptor m' = {}, expected 0", resp.0))?;
    let c_prime = InnerCiphertext::new(u(1), &p).unwrap();
    let mapped = map_ciphertext(c_prime, pt(0, &p), c, &p).map_err(|e| e.to_string())?;
    ensure(mapped.value() == u(4), || format!("Map(1, 0, 21) = {}, expected 4", mapped.value()))?;
    Ok("Enc(p=5, key (2,3), m=4, z=1) = 21, Dec(21) = 4, Decryptor m' = 0, Map(1, 0, 21) = 4".into())
}

fn ac3_unique_key() -> Outcome {
    let mut cases = 0u64;
    for q in [5u64, 7] {
        let p = prime(q);
        let keys: Vec<_> = TwoPadKey::enumerate(&p).collect();
        for key in &keys {
            for z1 in 1..q {
                for z2 in (1..q).filter(|z| *z != z1) {
                    for m1 in 0..q {
                        for m2 in 0..q {
                            let c1 = encrypt_with_nonce(key, &p, pt(m1, &p), u(z1)).unwrap();
                            let c2 = encrypt_with_nonce(key, &p, pt(m2, &p), u(z2)).unwrap();
                            let count = keys
                                .iter()
                                .filter(|k| decrypt(k, &p, c1) == pt(m1, &p) && decrypt(k, &p, c2) == pt(m2, &p))
                                .count();
                            ensure(count == 1, || format!("p={q} pairs ({m1},{c1}) ({m2},{c2}): {count} keys"))?;
                            let found = recover_key((pt(m1, &p), c1), (pt(m2, &p), c2), &p).map_err(|e| e.to_string())?;
                            ensure(&found == key, || format!("recover_key returned {found:?}, expected {key:?}"))?;
                            cases += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{cases} pair-of-pairs at p = 5, 7: exactly one consistent key each, recover_key finds it"))
}

fn expect_pass(r: &VerificationReport) -> Result<(), String> {
    ensure(r.passed(), || format!("unexpected failure:\n{r}"))?;
    for t in r.tables() {
        ensure(t.total() == Probability::from_integer(1), || format!("table does not sum to 1:\n{t}"))?;
    }
    Ok(())
}

fn expect_fail(r: &VerificationReport) -> Result<String, String> {
    let cx = r.counterexample().ok_or_else(|| format!("broken variant passed:\n{r}"))?;
    ensure(r.recheck() == Some(true), || format!("counterexample does not recheck: {cx}"))?;
    Ok(format!("{} != {}", cx.left, cx.right))
}

fn ac4_leakfree_alice() -> Outcome {
    let mut notes = Vec::new();
    for q in [5u64, 7] {
        let r = verify_leakfree_alice(&prime(q)).map_err(|e| e.to_string())?;
        expect_pass(&r)?;
        let pr = r.tables()[0].probability(&[1, 2]);
        ensure(pr == Probability::new(1, q * q), || format!("p={q}: Pr = {pr}, expected 1/{}", q * q))?;
        let broken = Verifier::new(Execution::default(), Variant::ZeroSecondKeyComponent)
            .leakfree_alice(&prime(q))
            .map_err(|e| e.to_string())?;
        notes.push(format!("p={q}: {} cells at 1/{} each; zero-y fails ({})", r.cells_checked(), q * q, expect_fail(&broken)?));
    }
    Ok(notes.join("; "))
}

fn ac5_blindness() -> Outcome {
    let mut notes = Vec::new();
    for q in [5u64, 7] {
        let r = verify_blindness_decryptor(&prime(q)).map_err(|e| e.to_string())?;
        expect_pass(&r)?;
        let broken = Verifier::new(Execution::default(), Variant::RestrictedNonces)
            .blindness_decryptor(&prime(q))
            .map_err(|e| e.to_string())?;
        notes.push(format!("p={q}: C' uniform on 1..{}; restricted-nonce fails ({})", q - 1, expect_fail(&broken)?));
    }
    Ok(notes.join("; "))
}

fn ac6_leakfree_encryptor() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for l in [2usize, 4] {
        let r = verify_leakfree_encryptor(&prime(5), l).map_err(|e| e.to_string())?;
        expect_pass(&r)?;
        let broken = Verifier::new(Execution::default(), Variant::NoOuterLayer)
            .leakfree_encryptor(&prime(5), l)
            .map_err(|e| e.to_string())?;
        notes.push(format!("L={l}: {} cells pass; no-outer fails ({})", r.cells_checked(), expect_fail(&broken)?));
    }
    let spent = within(start, Duration::from_secs(60))?;
    Ok(format!("p=5 {}; {spent:.2?} (< 60 s)", notes.join("; ")))
}

fn ac7_shannon() -> Outcome {
    for n in [5u64, 25] {
        let r = verify_ordinary_secrecy(n).map_err(|e| e.to_string())?;
        expect_pass(&r)?;
        let pr = r.tables()[0].probability(&[0]);
        ensure(pr == Probability::new(1, n), || format!("n={n}: Pr[C=0|M=0] = {pr}"))?;
    }
    Ok("outer pad perfectly secret at n = 5 and n = 25, every Pr[C = c | M = m] = 1/n".into())
}

fn ac8_key_sizes() -> Outcome {
    // name, decryptor key bits, plaintext bits, ciphertext bits
    let table: [(&str, u32, u32, u32); 11] = [
        ("5", 12, 3, 5),
        ("7", 12, 3, 6),
        ("11", 16, 4, 7),
        ("23", 20, 5, 10),
        ("101", 28, 7, 14),
        ("1009", 40, 10, 20),
        ("5003", 52, 13, 25),
        ("20011", 60, 15, 29),
        ("2^31-1", 124, 31, 62),
        ("2^61-1", 244, 61, 122),
        ("2^127-1", 508, 127, 254),
    ];
    ensure(PRESETS.len() == table.len(), || "preset count differs from the table".into())?;
    for (preset, (name, key, plain, cipher)) in PRESETS.iter().zip(table) {
        ensure(preset.name == name, || format!("preset {} where {name} expected", preset.name))?;
        let s = preset.sizes();
        let got = (s.decryptor_key_bits, s.plaintext_bits, s.ciphertext_bits);
        ensure(got == (key, plain, cipher), || format!("{name}: got {got:?}, expected {:?}", (key, plain, cipher)))?;
        let ceil_log2 = preset.value().wrapping_sub(U256::ONE).bits();
        ensure(key == 4 * ceil_log2, || format!("{name}: {key} != 4 * ceil(log2 p) = {}", 4 * ceil_log2))?;
    }
    Ok("all 11 rows match exactly (e.g. 1009 -> 40/10/20, 2^127-1 -> 508/127/254)".into())
}

struct Running {
    addr: String,
    handle: thread::JoinHandle<Result<(), CliError>>,
}

fn serve(keys: &Path, connections: usize) -> Result<Running, String> {
    let server = Server::bind(keys, "127.0.0.1:0").map_err(|e| e.to_string())?;
    let addr = server.local_addr().map_err(|e| e.to_string())?.to_string();
    Ok(Running { addr, handle: thread::spawn(move || server.run(Some(connections))) })
}

fn one_session(p: &PrimeModulus, dir: &Path, choice: usize, rng: &mut RandomSource) -> Result<(), String> {
    let err = |e: CliError| e.to_string();
    commands::deal(p, 4, dir, None).map_err(err)?;
    let msgs: Vec<U256> = (0..4).map(|_| rng.next_u256().div_rem(p.p()).unwrap().1).collect();
    let batch = commands::encrypt(&dir.join("encryptor.keys"), &msgs, &dir.join("batch.bin"), None).map_err(err)?;
    let alice = match KeystoreRecord::load(&dir.join("alice.keys")).map_err(|e| e.to_string())?.body().clone() {
        RecordBody::Alice(v) => v,
        _ => return Err("alice.keys holds another role".into()),
    };
    let running = serve(&dir.join("decryptor.keys"), 1)?;
    let m = client::fetch(&alice, &batch, choice, running.addr.as_str()).map_err(err)?;
    running.handle.join().map_err(|_| "server thread panicked".to_string())?.map_err(err)?;
    ensure(m == msgs[choice - 1], || format!("p={p} i={choice}: fetched {m}, expected {}", msgs[choice - 1]))
}

fn ac9_end_to_end() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = RandomSource::seeded(9);
    let start = Instant::now();
    let mut runs = 0;
    for p in [prime(5), PrimeModulus::new(U256::mersenne(61)).unwrap()] {
        for trial in 0..100 {
            for choice in 1..=4 {
                one_session(&p, &root.path().join(format!("{}-{trial}-{choice}", p.bit_len())), choice, &mut rng)?;
                runs += 1;
            }
        }
    }
    let elapsed = start.elapsed();

    // Single use, live and across a restart.
    let dir = root.path().join("reuse");
    let p = PrimeModulus::new(U256::mersenne(61)).unwrap();
    commands::deal(&p, 4, &dir, None).map_err(|e| e.to_string())?;
    let msgs = [u(11), u(22), u(33), u(44)];
    let batch = commands::encrypt(&dir.join("encryptor.keys"), &msgs, &dir.join("batch.bin"), None).map_err(|e| e.to_string())?;
    let RecordBody::Alice(alice) = KeystoreRecord::load(&dir.join("alice.keys")).unwrap().body().clone() else {
        return Err("alice.keys holds another role".into());
    };
    let running = serve(&dir.join("decryptor.keys"), 2)?;
    let first = client::fetch(&alice, &batch, 3, running.addr.as_str()).map_err(|e| e.to_string())?;
    ensure(first == u(33), || format!("first fetch returned {first}"))?;
    let second = client::fetch(&alice, &batch, 1, running.addr.as_str());
    ensure(matches!(second, Err(CliError::SingleUse)), || format!("second fetch: {second:?}"))?;
    running.handle.join().unwrap().map_err(|e| e.to_string())?;
    let restarted = serve(&dir.join("decryptor.keys"), 1)?;
    let third = client::fetch(&alice, &batch, 2, restarted.addr.as_str());
    ensure(matches!(third, Err(CliError::SingleUse)), || format!("fetch after restart: {third:?}"))?;
    restarted.handle.join().unwrap().map_err(|e| e.to_string())?;
    ensure(third.unwrap_err().exit_code() == blindpad::EXIT_SINGLE_USE, || "wrong exit code".into())?;

    Ok(format!(
        "{runs} sessions over TCP (p = 5 and 2^61-1, 100 trials x i = 1..4) in {elapsed:.2?}; second fetch and fetch after restart refused"
    ))
}

fn ac10_large_smoke() -> Outcome {
    let start = Instant::now();
    let p = PrimeModulus::new(U256::mersenne(127)).unwrap();
    let mut rng = RandomSource::seeded(10);
    let random_pt = |rng: &mut RandomSource| InnerPlaintext::new(rng.next_u256().div_rem(p.p()).unwrap().1, &p).unwrap();
    let mut failures = 0;
    for _ in 0..10_000 {
        let key = gen(&p, &mut rng);
        let m = random_pt(&mut rng);
        failures += usize::from(decrypt(&key, &p, encrypt(&key, &p, m, &mut rng)) != m);
    }
    for _ in 0..1_000 {
        let key = gen(&p, &mut rng);
        let (m1, m2) = (random_pt(&mut rng), random_pt(&mut rng));
        let c1 = encrypt(&key, &p, m1, &mut rng);
        let z = c1.residue(&p);
        let c2 = encrypt_with_nonce(&key, &p, m2, z).map_err(|e| e.to_string())?;
        failures += usize::from(map_ciphertext(c1, m1, c2, &p).map_err(|e| e.to_string())? != m2);
    }
    ensure(failures == 0, || format!("{failures} failures"))?;
    let spent = within(start, Duration::from_secs(30))?;
    Ok(format!("10^4 round-trips and 10^3 Map transformations at p = 2^127-1, 0 failures, {spent:.2?} (< 30 s)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC-1 exhaustive 2PAD correctness", ac1_exhaustive_correctness),
        ("AC-2 worked trace", ac2_worked_trace),
        ("AC-3 unique key from two pairs", ac3_unique_key),
        ("AC-4 leak-freeness against Alice", ac4_leakfree_alice),
        ("AC-5 blindness against the Decryptor", ac5_blindness),
        ("AC-6 leak-freeness against the Encryptor", ac6_leakfree_encryptor),
        ("AC-7 outer pad perfect secrecy", ac7_shannon),
        ("AC-8 key size accounting", ac8_key_sizes),
        ("AC-9 end-to-end pipeline and single use", ac9_end_to_end),
        ("AC-10 large-parameter smoke", ac10_large_smoke),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
