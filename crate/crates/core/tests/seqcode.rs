use bartool::seqcode::{decode, decode_small, encode, encode_small, extensions_up_to, FinSeq};
use num::BigUint;
use proptest::prelude::*;

#[test]
fn first_codes() {
    // Inverted by brute force from the pairing formula.
    let expect: [&[u64]; 20] = [
        &[],
        &[0],
        &[0, 0],
        &[1],
        &[0, 0, 0],
        &[0, 1],
        &[2],
        &[1, 0],
        &[0, 0, 1],
        &[0, 2],
        &[3],
        &[0, 0, 0, 0],
        &[1, 1],
        &[0, 0, 2],
        &[0, 3],
        &[4],
        &[0, 1, 0],
        &[0, 0, 0, 1],
        &[1, 2],
        &[0, 0, 3],
    ];
    for (n, a) in expect.iter().enumerate() {
        assert_eq!(decode_small(n as u64).entries(), *a, "code {n}");
        assert_eq!(encode_small(a), Some(n as u64));
    }
}

#[test]
fn small_codes_are_a_bijection() {
    for n in 0..20_000u64 {
        assert_eq!(encode_small(&decode_small(n)), Some(n));
    }
    let listed: Vec<FinSeq> = extensions_up_to(30).collect();
    assert_eq!(listed.len(), 31);
    assert_eq!(listed[3], FinSeq::from([1]));
}

proptest! {
    #[test]
    fn roundtrip(a in prop::collection::vec(0u64..1_000_000, 0..9)) {
        let code = encode(&a);
        prop_assert_eq!(decode(&code).unwrap().into_vec(), a.clone());
        if let Some(small) = encode_small(&a) {
            prop_assert_eq!(BigUint::from(small), code);
        }
    }

    #[test]
    fn codes_grow_along_extensions(a in prop::collection::vec(0u64..50, 0..6), m in 0u64..50) {
        let mut b = a.clone();
        b.push(m);
        prop_assert!(encode(&b) > encode(&a));
    }
}
