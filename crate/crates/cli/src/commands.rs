use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use blindpad_core::keystore::{KeystoreRecord, RecordBody, Role};
use blindpad_core::num::{PrimeModulus, RandomSource, U256};
use blindpad_core::params::{parse_modulus, KeySizes};
use blindpad_core::protocol::{dealer_issue, Encryptor, ProtocolMessage, SessionKeyMaterial};
use blindpad_core::twopad::InnerPlaintext;
use blindpad_core::verifier::{Definition, VerificationReport, Verifier, Variant};
use blindpad_core::wire::{encode_frame, Frame, MAX_BATCH_LEN};
use blindpad_core::Execution;
use clap::{Parser, Subcommand};

use crate::{client, keystore_path, report, server, CliError, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "blindpad", version, about = "Information-theoretic blind decryption")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mint one session and write dealer, encryptor, alice and decryptor key files.
    Deal {
        /// A decimal prime or preset:NAME (e.g. preset:2^61-1).
        #[arg(long)]
        p: String,
        /// Batch length L, at most p - 1.
        #[arg(long)]
        l: usize,
        #[arg(long)]
        out: PathBuf,
        /// Deterministic keys for reproducible demos. Never use for real secrets.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Encrypt and pad L messages into a batch frame.
    Encrypt {
        #[arg(long)]
        keys: PathBuf,
        /// Comma-separated decimal messages m1,...,mL, each below p.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        messages: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the Decryptor.
    Serve {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        listen: String,
        /// Exit after handling one connection.
        #[arg(long)]
        once: bool,
    },
    /// Run Alice: blind-decrypt ciphertext number `choose` (1-based) and print it.
    Fetch {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        batch: PathBuf,
        #[arg(long)]
        choose: usize,
        #[arg(long)]
        server: String,
    },
    /// Exhaustively check a secrecy property at a small modulus.
    Verify {
        #[arg(long, value_parser = ["shannon", "alice", "blind", "encryptor"])]
        definition: String,
        /// Modulus n for shannon, prime p otherwise.
        #[arg(long)]
        p: String,
        /// Batch length for the encryptor check.
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long, default_value = "shipped")]
        variant: String,
        /// Also write the report as JSON to this path ("-" for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Enumerate on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Summarize a key file.
    Inspect {
        #[arg(long)]
        keys: PathBuf,
    },
}

fn rng_for(seed: Option<u64>) -> RandomSource {
    seed.map_or_else(RandomSource::os, RandomSource::seeded)
}

fn load(path: &Path) -> Result<KeystoreRecord, CliError> {
    KeystoreRecord::load(path).map_err(|e| CliError::keystore(path, e))
}

fn wrong_role(path: &Path, record: &KeystoreRecord, wanted: Role) -> CliError {
    CliError::Validation(format!("{} holds {} keys, expected {} keys", path.display(), record.role(), wanted))
}

pub fn modulus_arg(text: &str) -> Result<PrimeModulus, CliError> {
    parse_modulus(text).map_err(|e| CliError::Validation(format!("--p {text}: {e}")))
}

/// Issues a session and writes the four key files into `out`.
pub fn deal(p: &PrimeModulus, batch_len: usize, out: &Path, seed: Option<u64>) -> Result<SessionKeyMaterial, CliError> {
    if batch_len > MAX_BATCH_LEN {
        return Err(CliError::Validation(format!("L = {batch_len} exceeds the wire limit of {MAX_BATCH_LEN}")));
    }
    let issued = dealer_issue(p, batch_len, &mut rng_for(seed))?;
    fs::create_dir_all(out).map_err(|e| CliError::io(format!("creating {}", out.display()), e))?;
    for record in KeystoreRecord::all_for(&issued.material) {
        let path = keystore_path(out, record.role());
        record.save(&path).map_err(|e| CliError::keystore(&path, e))?;
    }
    Ok(issued.material)
}

/// Publishes a batch frame for `messages` under the encryptor keys.
pub fn encrypt(keys: &Path, messages: &[U256], out: &Path, seed: Option<u64>) -> Result<Vec<u8>, CliError> {
    let record = load(keys)?;
    let RecordBody::Encryptor(view) = record.body().clone() else {
        return Err(wrong_role(keys, &record, Role::Encryptor));
    };
    let p = *view.modulus();
    let msgs = messages
        .iter()
        .map(|m| InnerPlaintext::new(*m, &p).map_err(|e| CliError::Validation(format!("message {m}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let session_id = view.session_id();
    let batch = Encryptor::new(view).publish(&msgs, &mut rng_for(seed))?;
    let bytes = encode_frame(&Frame { session_id, message: ProtocolMessage::CiphertextBatch(batch) }, &p)?;
    fs::write(out, &bytes).map_err(|e| CliError::io(format!("writing {}", out.display()), e))?;
    Ok(bytes)
}

pub fn fetch(keys: &Path, batch: &Path, choice: usize, server: &str) -> Result<U256, CliError> {
    let record = load(keys)?;
    let RecordBody::Alice(view) = record.body() else {
        return Err(wrong_role(keys, &record, Role::Alice));
    };
    let bytes = fs::read(batch).map_err(|e| CliError::io(format!("reading {}", batch.display()), e))?;
    client::fetch(view, &bytes, choice, server)
}

pub fn inspect(keys: &Path) -> Result<String, CliError> {
    let record = load(keys)?;
    let p = record.modulus();
    let sizes = KeySizes::for_modulus(&p);
    let mut out = format!(
        "role: {}\nsession: {}\np: {}\nL: {}\n{}\n",
        record.role(),
        record.session_id(),
        p,
        record.batch_len(),
        sizes
    );
    if let RecordBody::Decryptor { view, .. } = record.body() {
        out.push_str(&format!("decryptor key bits: {}\n", view.key_bits()));
    }
    if let Some(state) = record.state() {
        out.push_str(&format!("state: {state:?}\n"));
    }
    Ok(out)
}

pub fn verify(
    definition: Definition,
    p: &str,
    batch_len: usize,
    variant: Variant,
    execution: Execution,
) -> Result<VerificationReport, CliError> {
    let verifier = Verifier::new(execution, variant);
    let result = match definition {
        Definition::OrdinarySecrecy => {
            let n: u64 = p.parse().map_err(|_| CliError::Validation(format!("--p {p}: expected a decimal modulus")))?;
            verifier.ordinary_secrecy(n)
        }
        Definition::LeakFreeAlice => verifier.leakfree_alice(&modulus_arg(p)?),
        Definition::BlindnessDecryptor => verifier.blindness_decryptor(&modulus_arg(p)?),
        Definition::LeakFreeEncryptor => verifier.leakfree_encryptor(&modulus_arg(p)?, batch_len),
    };
    result.map_err(|e| CliError::Validation(e.to_string()))
}

fn parse_messages(texts: &[String]) -> Result<Vec<U256>, CliError> {
    texts
        .iter()
        .map(|t| t.trim().parse().map_err(|e| CliError::Validation(format!("message {t:?}: {e}"))))
        .collect()
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Deal { p, l, out, seed } => {
            let material = deal(&modulus_arg(&p)?, l, &out, seed)?;
            println!("session {}", material.session_id());
            println!("wrote {}", out.display());
            println!("{}", material.key_sizes());
        }
        Command::Encrypt { keys, messages, out, seed } => {
            encrypt(&keys, &parse_messages(&messages)?, &out, seed)?;
            println!("wrote {}", out.display());
        }
        Command::Serve { keys, listen, once } => {
            let server = server::Server::bind(&keys, listen.as_str())?;
            println!("listening on {}", server.local_addr()?);
            server.run(once.then_some(1))?;
        }
        Command::Fetch { keys, batch, choose, server } => {
            println!("{}", fetch(&keys, &batch, choose, &server)?);
        }
        Command::Verify { definition, p, l, variant, json, sequential } => {
            let definition = Definition::from_cli_name(&definition).expect("restricted by clap");
            let variant = Variant::from_cli_name(&variant)
                .ok_or_else(|| CliError::Validation(format!("unknown variant {variant:?}")))?;
            let execution = if sequential { Execution::Sequential } else { Execution::default() };
            let r = verify(definition, &p, l, variant, execution)?;
            print!("{r}");
            if let Some(path) = json {
                let doc = serde_json::to_string_pretty(&report::to_json(&r)).expect("JSON values serialize");
                if path.as_os_str() == "-" {
                    println!("{doc}");
                } else {
                    fs::write(&path, doc).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
                }
            }
            if !r.passed() {
                return Err(CliError::VerificationFailed);
            }
        }
        Command::Inspect { keys } => print!("{}", inspect(&keys)?),
    }
    Ok(())
}

/// Parses arguments, runs, reports errors on stderr and returns the exit code.
pub fn main_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { crate::EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("blindpad: {e}");
            e.exit_code()
        }
    }
}
