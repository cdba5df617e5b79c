use blindpad_core::num::{PrimeModulus, RandomSource, U256};
use blindpad_core::params::PRESETS;
use blindpad_core::protocol::{BlindRequest, BlindResponse, CiphertextBatch, ErrorReason, ProtocolMessage, SessionId};
use blindpad_core::wire::{decode_frame, encode_frame, Frame, FrameHeader, WireError, HEADER_LEN};
use proptest::prelude::*;

fn below(rng: &mut RandomSource, n: U256) -> U256 {
    rng.next_u256().div_rem(n).unwrap().1
}

fn random_message(rng: &mut RandomSource, p: &PrimeModulus) -> ProtocolMessage {
    match rng.next_u256().low_u64() % 4 {
        0 => {
            let len = 1 + (rng.next_u256().low_u64() % 8) as usize;
            ProtocolMessage::CiphertextBatch(CiphertextBatch((0..len).map(|_| below(rng, p.p_squared())).collect()))
        }
        1 => ProtocolMessage::BlindRequest(BlindRequest(below(rng, p.p()))),
        2 => ProtocolMessage::BlindResponse(BlindResponse(below(rng, p.p()))),
        _ => ProtocolMessage::Error(
            [ErrorReason::SingleUseViolation, ErrorReason::InvalidRequest, ErrorReason::MalformedFrame]
                [(rng.next_u256().low_u64() % 3) as usize],
        ),
    }
}

#[test]
fn round_trip_every_preset() {
    let mut rng = RandomSource::seeded(10_000);
    let moduli: Vec<PrimeModulus> = PRESETS.iter().map(|p| p.modulus()).collect();
    for _ in 0..10_000 {
        let p = moduli[(rng.next_u256().low_u64() % moduli.len() as u64) as usize];
        let frame = Frame { session_id: SessionId::random(&mut rng), message: random_message(&mut rng, &p) };
        let bytes = encode_frame(&frame, &p).unwrap();
        assert_eq!(decode_frame(&bytes, &p).unwrap(), frame);
        assert_eq!(encode_frame(&frame, &p).unwrap(), bytes);
    }
}

#[test]
fn payload_widths_per_preset() {
    let expected_batch = [1, 1, 1, 2, 2, 3, 4, 4, 8, 16, 32];
    let expected_single = [1, 1, 1, 1, 1, 2, 2, 2, 4, 8, 16];
    for ((preset, wb), ws) in PRESETS.iter().zip(expected_batch).zip(expected_single) {
        let p = preset.modulus();
        let batch = Frame {
            session_id: SessionId::default(),
            message: ProtocolMessage::CiphertextBatch(CiphertextBatch(vec![U256::ONE; 3])),
        };
        assert_eq!(encode_frame(&batch, &p).unwrap().len(), HEADER_LEN + 3 * wb, "{}", preset.name);
        let req = Frame { session_id: SessionId::default(), message: ProtocolMessage::BlindRequest(BlindRequest(U256::ONE)) };
        let bytes = encode_frame(&req, &p).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + ws, "{}", preset.name);
        assert_eq!(FrameHeader::parse(&bytes).unwrap().frame_len(), bytes.len());
    }
}

#[test]
fn frames_for_another_prime_are_rejected() {
    let p5 = PrimeModulus::from_u64(5).unwrap();
    let p7 = PrimeModulus::from_u64(7).unwrap();
    let p11 = PrimeModulus::from_u64(11).unwrap();
    let f = Frame { session_id: SessionId::default(), message: ProtocolMessage::BlindRequest(BlindRequest(U256::from_u64(6))) };
    let bytes = encode_frame(&f, &p7).unwrap();
    // Same bit length: the header agrees but the value is out of range for 5.
    assert!(matches!(decode_frame(&bytes, &p5), Err(WireError::OutOfRange { .. })));
    assert!(matches!(decode_frame(&bytes, &p11), Err(WireError::BitLength { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        let p = PrimeModulus::from_u64(101).unwrap();
        let _ = decode_frame(&bytes, &p);
    }

    #[test]
    fn truncation_is_always_rejected(seed in any::<u64>(), cut in 1usize..40) {
        let p = PrimeModulus::from_u64(1009).unwrap();
        let mut rng = RandomSource::seeded(seed);
        let frame = Frame { session_id: SessionId::random(&mut rng), message: random_message(&mut rng, &p) };
        let bytes = encode_frame(&frame, &p).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_frame(&bytes[..keep], &p).is_err());
    }
}
