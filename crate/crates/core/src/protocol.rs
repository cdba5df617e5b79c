//! The three-party blind decryption protocol.
//!
//! ```text
//! dealer     ──► Encryptor {x_k, y_k, k_1..k_L}
//!            ──► Alice     {k_1..k_L, k_C, k_P}
//!            ──► Decryptor {x_k, y_k, k_C, k_P}
//!
//! Encryptor: c_j = Enc2PAD(m_j) with distinct residues, u_j = c_j + k_j (mod p^2)
//! Alice:     c_j = u_j - k_j, pick i, c' = c_i mod p, w = c' + k_C (mod p)
//! Decryptor: c' = w - k_C, m' = Dec2PAD(c'), w' = m' + k_P (mod p)   [session consumed]
//! Alice:     m' = w' - k_P, m_i = Map(c', m', c_i)
//! ```
//!
//! Every key bundle serves one decryption. The Decryptor enforces this with
//! an atomic consumed flag; Alice's phase tracking only guards against local
//! misuse.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use thiserror::Error;

use crate::num::{PrimeModulus, RandomSource, Residue, U256};
use crate::outer_pad::{otp_decrypt, otp_encrypt, otp_gen, OuterKey, OuterPadError};
use crate::params::KeySizes;
use crate::twopad::{self, InnerCiphertext, InnerPlaintext, TwoPadError, TwoPadKey};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("batch length {len} outside 1..=p-1 for p = {p}")]
    BatchLength { len: usize, p: U256 },
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("this session's batch has already been published")]
    AlreadyPublished,
    #[error("malformed ciphertext batch: {0}")]
    MalformedBatch(&'static str),
    #[error("choice {choice} outside 1..={len}")]
    Selection { choice: usize, len: usize },
    #[error("operation not allowed in phase {actual:?}, expected {expected:?}")]
    Phase { expected: AlicePhase, actual: AlicePhase },
    #[error("invalid blind request: {0}")]
    InvalidRequest(&'static str),
    #[error("session has already served its single decryption")]
    SingleUseViolation,
    #[error("response does not map back onto the chosen ciphertext")]
    CorruptedResponse,
    #[error("inconsistent key material: {0}")]
    KeyMaterial(&'static str),
    #[error("could not persist the consumed flag")]
    Persistence(#[source] std::io::Error),
    #[error(transparent)]
    TwoPad(#[from] TwoPadError),
    #[error(transparent)]
    OuterPad(#[from] OuterPadError),
}

/// 128-bit session identifier, rendered as 32 lowercase hex digits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SessionId([u8; 16]);

impl SessionId {
    pub const fn from_bytes(bytes: [u8; 16]) -> Self {
        Self(bytes)
    }

    pub fn random(rng: &mut RandomSource) -> Self {
        use rand::RngCore;
        let mut bytes = [0u8; 16];
        rng.fill_bytes(&mut bytes);
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SessionId({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("session id must be 32 hex digits")]
pub struct ParseSessionIdError;

impl FromStr for SessionId {
    type Err = ParseSessionIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 32 || !s.is_ascii() {
            return Err(ParseSessionIdError);
        }
        let mut bytes = [0u8; 16];
        for (i, b) in bytes.iter_mut().enumerate() {
            *b = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).map_err(|_| ParseSessionIdError)?;
        }
        Ok(Self(bytes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Fresh,
    Consumed,
}

/// Everything the dealer mints for one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionKeyMaterial {
    session_id: SessionId,
    modulus: PrimeModulus,
    inner_key: TwoPadKey,
    outer_batch_keys: Vec<OuterKey>,
    blind_request_key: OuterKey,
    blind_response_key: OuterKey,
    state: SessionState,
}

fn check_outer(key: &OuterKey, modulus: U256, what: &'static str) -> Result<(), ProtocolError> {
    if key.modulus() != modulus {
        return Err(ProtocolError::KeyMaterial(what));
    }
    Ok(())
}

fn check_batch_keys(keys: &[OuterKey], modulus: &PrimeModulus) -> Result<(), ProtocolError> {
    twopad::check_batch_len(keys.len(), modulus)
        .map_err(|_| ProtocolError::BatchLength { len: keys.len(), p: modulus.p() })?;
    for k in keys {
        check_outer(k, modulus.p_squared(), "batch keys must live mod p^2")?;
    }
    Ok(())
}

impl SessionKeyMaterial {
    pub fn from_parts(
        session_id: SessionId,
        modulus: PrimeModulus,
        inner_key: TwoPadKey,
        outer_batch_keys: Vec<OuterKey>,
        blind_request_key: OuterKey,
        blind_response_key: OuterKey,
        state: SessionState,
    ) -> Result<Self, ProtocolError> {
        TwoPadKey::new(inner_key.x(), inner_key.y(), &modulus)?;
        check_batch_keys(&outer_batch_keys, &modulus)?;
        check_outer(&blind_request_key, modulus.p(), "k_C must live mod p")?;
        check_outer(&blind_response_key, modulus.p(), "k_P must live mod p")?;
        Ok(Self { session_id, modulus, inner_key, outer_batch_keys, blind_request_key, blind_response_key, state })
    }

    pub fn session_id(&self) -> SessionId {
        self.session_id
    }

    pub fn modulus(&self) -> &PrimeModulus {
        &self.modulus
    }

    pub fn batch_len(&self) -> usize {
        self.outer_batch_keys.len()
    }

    pub fn inner_key(&self) -> &TwoPadKey {
        &self.inner_key
    }

    pub fn outer_batch_keys(&self) -> &[OuterKey] {
        &self.outer_batch_keys
    }

    pub fn blind_request_key(&self) -> &OuterKey {
        &self.blind_request_key
    }

    pub fn blind_response_key(&self) -> &OuterKey {
        &self.blind_response_key
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn set_state(&mut self, state: SessionState) {
        self.state = state;
    }

    pub fn key_sizes(&self) -> KeySizes {
        KeySizes::for_modulus(&self.modulus)
    }

    pub fn encryptor_view(&self) -> EncryptorView {
        EncryptorView {
            session_id: self.session_id,
            modulus: self.modulus,
            inner_key: self.inner_key,
            outer_batch_keys: self.outer_batch_keys.clone(),
        }
    }

    pub fn alice_view(&self) -> AliceView {
        AliceView {
            session_id: self.session_id,
            modulus: self.modulus,
            outer_batch_keys: self.outer_batch_keys.clone(),
            blind_request_key: self.blind_request_key,
            blind_response_key: self.blind_response_key,
        }
    }

    pub fn decryptor_view(&self) -> DecryptorView {
        DecryptorView {
            session_id: self.session_id,
            modulus: self.modulus,
            inner_key: self.inner_key,
            blind_request_key: self.blind_request_key,
            blind_response_key: self.blind_response_key,
        }
    }
}

/// Keys shared by the Encryptor: the inner key and the batch pads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptorView {
    session_id: SessionId,
    modulus: PrimeModulus,
    inner_key: TwoPadKey,
    outer_batch_keys: Vec<OuterKey>,
}

/// Alice never sees the inner key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceView {
    session_id: SessionId,
    modulus: PrimeModulus,
    outer_batch_keys: Vec<OuterKey>,
    blind_request_key: OuterKey,
    blind_response_key: OuterKey,
}

/// The Decryptor never sees the batch pads, hence never the batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecryptorView {
    session_id: SessionId,
    modulus: PrimeModulus,
    inner_key: TwoPadKey,
    blind_request_key: OuterKey,
    blind_response_key: OuterKey,
}

impl EncryptorView {
    pub fn new(
        session_id: SessionId,
        modulus: PrimeModulus,
        inner_key: TwoPadKey,
        outer_batch_keys: Vec<OuterKey>,
    ) -> Result<Self, ProtocolError> {
        TwoPadKey::new(inner_key.x(), inner_key.y(), &modulus)?;
        check_batch_keys(&outer_batch_keys, &modulus)?;
        Ok(Self { session_id, modulus, inner_key, outer_batch_keys })
    }

    pub fn session_id(&self) -> SessionId {
        self.session_id
    }

    pub fn modulus(&self) -> &PrimeModulus {
        &self.modulus
    }

    pub fn batch_len(&self) -> usize {
        self.outer_batch_keys.len()
    }

    pub fn inner_key(&self) -> &TwoPadKey {
        &self.inner_key
    }

    pub fn outer_batch_keys(&self) -> &[OuterKey] {
        &self.outer_batch_keys
    }
}

impl AliceView {
    pub fn new(
        session_id: SessionId,
        modulus: PrimeModulus,
        outer_batch_keys: Vec<OuterKey>,
        blind_request_key: OuterKey,
        blind_response_key: OuterKey,
    ) -> Result<Self, ProtocolError> {
        check_batch_keys(&outer_batch_keys, &modulus)?;
        check_outer(&blind_request_key, modulus.p(), "k_C must live mod p")?;
        check_outer(&blind_response_key, modulus.p(), "k_P must live mod p")?;
        Ok(Self { session_id, modulus, outer_batch_keys, blind_request_key, blind_response_key })
    }

    pub fn session_id(&self) -> SessionId {
        self.session_id
    }

    pub fn modulus(&self) -> &PrimeModulus {
        &self.modulus
    }

    pub fn batch_len(&self) -> usize {
        self.outer_batch_keys.len()
    }

    pub fn outer_batch_keys(&self) -> &[OuterKey] {
        &self.outer_batch_keys
    }

    pub fn blind_request_key(&self) -> &OuterKey {
        &self.blind_request_key
    }

    pub fn blind_response_key(&self) -> &OuterKey {
        &self.blind_response_key
    }
}

impl DecryptorView {
    pub fn new(
        session_id: SessionId,
        modulus: PrimeModulus,
        inner_key: TwoPadKey,
        blind_request_key: OuterKey,
        blind_response_key: OuterKey,
    ) -> Result<Self, ProtocolError> {
        TwoPadKey::new(inner_key.x(), inner_key.y(), &modulus)?;
        check_outer(&blind_request_key, modulus.p(), "k_C must live mod p")?;
        check_outer(&blind_response_key, modulus.p(), "k_P must live mod p")?;
        Ok(Self { session_id, modulus, inner_key, blind_request_key, blind_response_key })
    }

    pub fn session_id(&self) -> SessionId {
        self.session_id
    }

    pub fn modulus(&self) -> &PrimeModulus {
        &self.modulus
    }

    pub fn inner_key(&self) -> &TwoPadKey {
        &self.inner_key
    }

    pub fn blind_request_key(&self) -> &OuterKey {
        &self.blind_request_key
    }

    pub fn blind_response_key(&self) -> &OuterKey {
        &self.blind_response_key
    }

    /// Bits of key material the Decryptor stores: `4 * ceil(log2 p)`.
    pub fn key_bits(&self) -> u32 {
        KeySizes::for_modulus(&self.modulus).decryptor_key_bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoleView {
    Encryptor(EncryptorView),
    Alice(AliceView),
    Decryptor(DecryptorView),
}

/// Dealer output: the full bundle and the three disjoint views.
#[derive(Debug, Clone)]
pub struct IssuedSession {
    pub material: SessionKeyMaterial,
    pub encryptor: EncryptorView,
    pub alice: AliceView,
    pub decryptor: DecryptorView,
}

/// Mints fresh key material for one session of `batch_len` messages.
pub fn dealer_issue(p: &PrimeModulus, batch_len: usize, rng: &mut RandomSource) -> Result<IssuedSession, ProtocolError> {
    twopad::check_batch_len(batch_len, p).map_err(|_| ProtocolError::BatchLength { len: batch_len, p: p.p() })?;
    let session_id = SessionId::random(rng);
    let inner_key = twopad::gen(p, rng);
    let outer_batch_keys = (0..batch_len).map(|_| otp_gen(p.p_squared(), rng)).collect::<Result<Vec<_>, _>>()?;
    let blind_request_key = otp_gen(p.p(), rng)?;
    let blind_response_key = otp_gen(p.p(), rng)?;
    let material = SessionKeyMaterial {
        session_id,
        modulus: *p,
        inner_key,
        outer_batch_keys,
        blind_request_key,
        blind_response_key,
        state: SessionState::Fresh,
    };
    Ok(IssuedSession {
        encryptor: material.encryptor_view(),
        alice: material.alice_view(),
        decryptor: material.decryptor_view(),
        material,
    })
}

/// `u_1..u_L`, each mod `p^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiphertextBatch(pub Vec<U256>);

/// `w = c' + k_C (mod p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlindRequest(pub U256);

/// `w' = m' + k_P (mod p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlindResponse(pub U256);

/// Why a peer answered with ⊥.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ErrorReason {
    SingleUseViolation = 0x01,
    InvalidRequest = 0x02,
    MalformedFrame = 0x03,
}

impl ErrorReason {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0x01 => Some(Self::SingleUseViolation),
            0x02 => Some(Self::InvalidRequest),
            0x03 => Some(Self::MalformedFrame),
            _ => None,
        }
    }
}

impl fmt::Display for ErrorReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SingleUseViolation => "single-use violation",
            Self::InvalidRequest => "invalid request",
            Self::MalformedFrame => "malformed frame",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolMessage {
    CiphertextBatch(CiphertextBatch),
    BlindRequest(BlindRequest),
    BlindResponse(BlindResponse),
    Error(ErrorReason),
}

/// The Encryptor role: publishes one padded batch per session.
#[derive(Debug)]
pub struct Encryptor {
    view: EncryptorView,
    published: bool,
}

impl Encryptor {
    pub fn new(view: EncryptorView) -> Self {
        Self { view, published: false }
    }

    pub fn view(&self) -> &EncryptorView {
        &self.view
    }

    pub fn publish(&mut self, msgs: &[InnerPlaintext], rng: &mut RandomSource) -> Result<CiphertextBatch, ProtocolError> {
        self.check_publishable(msgs.len())?;
        let ciphertexts = twopad::encrypt_batch(&self.view.inner_key, &self.view.modulus, msgs, rng)?;
        self.pad(&ciphertexts)
    }

    /// Publishes with caller-chosen nonces, which must be distinct and
    /// non-zero mod p.
    #[cfg(feature = "test-support")]
    pub fn publish_with_nonces(&mut self, msgs: &[InnerPlaintext], nonces: &[U256]) -> Result<CiphertextBatch, ProtocolError> {
        self.check_publishable(msgs.len())?;
        if nonces.len() != msgs.len() {
            return Err(ProtocolError::Arity { expected: msgs.len(), got: nonces.len() });
        }
        let mut seen = std::collections::HashSet::new();
        if !nonces.iter().all(|z| seen.insert(*z)) {
            return Err(ProtocolError::MalformedBatch("nonces must be distinct"));
        }
        let ciphertexts = msgs
            .iter()
            .zip(nonces)
            .map(|(m, z)| twopad::encrypt_with_nonce(&self.view.inner_key, &self.view.modulus, *m, *z))
            .collect::<Result<Vec<_>, _>>()?;
        self.pad(&ciphertexts)
    }

    fn check_publishable(&self, len: usize) -> Result<(), ProtocolError> {
        if self.published {
            return Err(ProtocolError::AlreadyPublished);
        }
        if len != self.view.batch_len() {
            return Err(ProtocolError::Arity { expected: self.view.batch_len(), got: len });
        }
        Ok(())
    }

    fn pad(&mut self, ciphertexts: &[InnerCiphertext]) -> Result<CiphertextBatch, ProtocolError> {
        let n = self.view.modulus.p_squared();
        let padded = ciphertexts
            .iter()
            .zip(&self.view.outer_batch_keys)
            .map(|(c, k)| Ok(otp_encrypt(k, &Residue::new(c.value(), n).expect("c < p^2"))?.value()))
            .collect::<Result<Vec<_>, ProtocolError>>()?;
        self.published = true;
        Ok(CiphertextBatch(padded))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AlicePhase {
    Received,
    Requested,
    Finished,
}

/// Alice's side of one session, from batch receipt to the recovered message.
#[derive(Debug, Clone)]
pub struct AliceSession {
    session_id: SessionId,
    ciphertexts: Vec<InnerCiphertext>,
    phase: AlicePhase,
    choice: Option<usize>,
}

/// Strips the batch pads and checks residue distinctness.
pub fn alice_receive(view: &AliceView, batch: &CiphertextBatch) -> Result<AliceSession, ProtocolError> {
    if batch.0.len() != view.batch_len() {
        return Err(ProtocolError::Arity { expected: view.batch_len(), got: batch.0.len() });
    }
    let p = &view.modulus;
    let mut residues = std::collections::HashSet::new();
    let mut ciphertexts = Vec::with_capacity(batch.0.len());
    for (u, k) in batch.0.iter().zip(&view.outer_batch_keys) {
        let u = Residue::new(*u, p.p_squared()).map_err(|_| ProtocolError::MalformedBatch("value not below p^2"))?;
        let c = InnerCiphertext::new(otp_decrypt(k, &u)?.value(), p)?;
        let z = c.residue(p);
        if z.is_zero() {
            return Err(ProtocolError::MalformedBatch("ciphertext with residue 0 mod p"));
        }
        if !residues.insert(z) {
            return Err(ProtocolError::MalformedBatch("two ciphertexts share a residue mod p"));
        }
        ciphertexts.push(c);
    }
    Ok(AliceSession { session_id: view.session_id, ciphertexts, phase: AlicePhase::Received, choice: None })
}

impl AliceSession {
    pub fn session_id(&self) -> SessionId {
        self.session_id
    }

    pub fn phase(&self) -> AlicePhase {
        self.phase
    }

    pub fn ciphertexts(&self) -> &[InnerCiphertext] {
        &self.ciphertexts
    }

    /// 1-based index of the chosen ciphertext once a request was made.
    pub fn choice(&self) -> Option<usize> {
        self.choice
    }

    fn expect_phase(&self, expected: AlicePhase) -> Result<(), ProtocolError> {
        if self.phase != expected {
            return Err(ProtocolError::Phase { expected, actual: self.phase });
        }
        Ok(())
    }

    /// Blinds the residue of ciphertext `choice` (1-based).
    pub fn request(&mut self, choice: usize, view: &AliceView) -> Result<BlindRequest, ProtocolError> {
        self.expect_phase(AlicePhase::Received)?;
        if choice == 0 || choice > self.ciphertexts.len() {
            return Err(ProtocolError::Selection { choice, len: self.ciphertexts.len() });
        }
        let p = &view.modulus;
        let c_prime = Residue::new(self.ciphertexts[choice - 1].residue(p), p.p()).expect("residue < p");
        let w = otp_encrypt(&view.blind_request_key, &c_prime)?;
        self.choice = Some(choice);
        self.phase = AlicePhase::Requested;
        Ok(BlindRequest(w.value()))
    }

    pub fn finish(&mut self, resp: &BlindResponse, view: &AliceView) -> Result<InnerPlaintext, ProtocolError> {
        self.expect_phase(AlicePhase::Requested)?;
        let p = &view.modulus;
        let w_prime = Residue::new(resp.0, p.p()).map_err(|_| ProtocolError::CorruptedResponse)?;
        let m_prime = InnerPlaintext::new(otp_decrypt(&view.blind_response_key, &w_prime)?.value(), p)?;
        let chosen = self.ciphertexts[self.choice.expect("set by request") - 1];
        let c_prime = InnerCiphertext::new(chosen.residue(p), p)?;
        let m = twopad::map_ciphertext(c_prime, m_prime, chosen, p).map_err(|_| ProtocolError::CorruptedResponse)?;
        self.phase = AlicePhase::Finished;
        Ok(m)
    }
}

/// The Decryptor role for one session.
#[derive(Debug)]
pub struct Decryptor {
    view: DecryptorView,
    consumed: AtomicBool,
}

impl Decryptor {
    pub fn new(view: DecryptorView) -> Self {
        Self::restore(view, SessionState::Fresh)
    }

    /// Rebuilds the role from persisted state.
    pub fn restore(view: DecryptorView, state: SessionState) -> Self {
        Self { view, consumed: AtomicBool::new(state == SessionState::Consumed) }
    }

    pub fn view(&self) -> &DecryptorView {
        &self.view
    }

    pub fn state(&self) -> SessionState {
        if self.consumed.load(Ordering::Acquire) {
            SessionState::Consumed
        } else {
            SessionState::Fresh
        }
    }

    pub fn respond(&self, req: &BlindRequest) -> Result<BlindResponse, ProtocolError> {
        self.respond_durably(req, || Ok(()))
    }

    /// Answers one request. `persist` runs after the session is claimed and
    /// before the response is released; if it fails no response is produced
    /// and the session stays consumed.
    ///
    /// Requests decoding to `c' = 0` are refused without consuming the
    /// session: honest ciphertexts never have residue 0.
    pub fn respond_durably(
        &self,
        req: &BlindRequest,
        persist: impl FnOnce() -> std::io::Result<()>,
    ) -> Result<BlindResponse, ProtocolError> {
        let p = &self.view.modulus;
        let w = Residue::new(req.0, p.p()).map_err(|_| ProtocolError::InvalidRequest("w not below p"))?;
        let c_prime = otp_decrypt(&self.view.blind_request_key, &w)?;
        if c_prime.is_zero() {
            return Err(ProtocolError::InvalidRequest("blinded residue decodes to 0"));
        }
        if self.consumed.compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire).is_err() {
            return Err(ProtocolError::SingleUseViolation);
        }
        let c_prime = InnerCiphertext::new(c_prime.value(), p)?;
        let m_prime = twopad::decrypt(&self.view.inner_key, p, c_prime);
        assert!(m_prime.value() < p.p(), "m' = -x*c'^2 - y*c' always lies in Z_p");
        persist().map_err(ProtocolError::Persistence)?;
        let w_prime = otp_encrypt(&self.view.blind_response_key, &Residue::new(m_prime.value(), p.p()).expect("m' < p"))?;
        Ok(BlindResponse(w_prime.value()))
    }
}
