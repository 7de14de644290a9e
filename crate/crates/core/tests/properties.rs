use proptest::prelude::*;

use towerkey::algebra::factor_modulus;
use towerkey::keyio::{self, Container, KeyIoError};
use towerkey::oracle::DomainGrid;
use towerkey::permgen::{perm_poly_zp_method2, power_permutation};
use towerkey::poly::Poly;
use towerkey::schemes::{pkc_keygen, sig_keygen, SchemeError, SchemeParams};
use towerkey::{Ring, TriangularMap};

fn demo_pkc() -> SchemeParams {
    SchemeParams::pkc(2, 3, 2, 3, 1).unwrap()
}

fn demo_sig() -> SchemeParams {
    SchemeParams::signature(2, 3, 1, 3, 2, 2, 1, 1, 1).unwrap()
}

#[test]
fn pkc_golden_vector() {
    let keys = pkc_keygen(demo_pkc(), 2024).unwrap();
    let eps = keys.public.encrypt(&[2, 3], &[5]).unwrap();
    assert_eq!(eps, vec![2, 4, 1]);
    assert_eq!(keys.private.decrypt(&eps, &[5]).unwrap(), vec![2, 3]);
}

#[test]
fn wrong_pad_fails_integrity_exactly_when_hidden_keys_differ() {
    let keys = pkc_keygen(demo_pkc(), 9).unwrap();
    let f = keys.private.hidden();
    for x in DomainGrid::units(&demo_pkc().ring().unwrap(), 2).unwrap().iter() {
        for w in 1..8 {
            let eps = keys.public.encrypt(&x, &[w]).unwrap();
            for w2 in (1..8).filter(|&v| v != w) {
                let same = f.eval(&[x[0], x[1], w]).unwrap() == f.eval(&[x[0], x[1], w2]).unwrap();
                let got = keys.private.decrypt(&eps, &[w2]);
                if same {
                    assert_eq!(got.unwrap(), x);
                } else {
                    assert_eq!(got, Err(SchemeError::IntegrityFailure));
                }
            }
        }
    }
}

#[test]
fn public_files_carry_no_private_sections() {
    let keys = pkc_keygen(demo_pkc(), 1).unwrap();
    let public = keyio::write_pkc_public(&keys.public);
    assert!(!Container::from_bytes(&public).unwrap().has_private_sections());
    assert!(matches!(keyio::read_pkc_private(&public), Err(KeyIoError::NoPrivateSection)));
    let sig = sig_keygen(demo_sig(), 1).unwrap();
    for bytes in [keyio::write_sig_verify(&sig.verify_table()), keyio::write_sig_auth(&sig.auth_table())] {
        assert!(!Container::from_bytes(&bytes).unwrap().has_private_sections());
        assert!(matches!(keyio::read_sig_private(&bytes), Err(KeyIoError::NoPrivateSection)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn crt_split_join_round_trips(n in 2u64..5000, x in any::<u64>()) {
        let spec = factor_modulus(n).unwrap();
        let x = x % n;
        let parts = spec.crt_split(x);
        prop_assert_eq!(spec.crt_join(&parts).unwrap(), x);
        let sum = spec.idempotents().iter().fold(0, |s, &e| (s + e) % n);
        prop_assert_eq!(sum, 1 % n);
    }

    #[test]
    fn ring_inverse_is_two_sided(p in prop::sample::select(vec![2u64, 3, 5, 7]), n in 1u32..5, a in 1u64..u64::MAX) {
        let r = Ring::gf(p, n).unwrap();
        let a = 1 + a % (r.size() - 1);
        let inv = r.inv(a).unwrap();
        prop_assert_eq!(r.mul(a, inv), 1);
        prop_assert_eq!(r.mul(inv, a), 1);
    }

    #[test]
    fn power_permutations_invert(p in prop::sample::select(vec![2u64, 3, 5, 7]), n in 1u32..4, r in 1u64..200) {
        let ring = Ring::gf(p, n).unwrap();
        if let Ok(b) = power_permutation(&ring, r) {
            for x in ring.elements() {
                prop_assert_eq!(b.inverse(b.forward(x).unwrap()), Some(x));
            }
        }
    }

    #[test]
    fn method2_interpolates(perm in Just((0..7u64).collect::<Vec<_>>()).prop_shuffle()) {
        let f = perm_poly_zp_method2(7, &perm, None).unwrap();
        for i in 0..7 {
            prop_assert_eq!(f.eval(i), perm[i as usize]);
        }
    }

    #[test]
    fn poly_mul_is_pointwise(a in prop::collection::vec(0u64..9, 0..6), b in prop::collection::vec(0u64..9, 0..6)) {
        let r = Ring::gf(3, 2).unwrap();
        let (pa, pb) = (Poly::new(r.clone(), a), Poly::new(r.clone(), b));
        let prod = pa.mul(&pb).unwrap();
        for x in r.elements() {
            prop_assert_eq!(prod.eval(x), r.mul(pa.eval(x), pb.eval(x)));
        }
    }

    #[test]
    fn triangular_maps_round_trip(seed in any::<u64>()) {
        use rand::SeedableRng;
        let ring = Ring::gf(2, 3).unwrap();
        let tower = towerkey::Tower::new(ring.clone(), 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let map = TriangularMap::random(&mut rng, tower, 2, |_, _| true).unwrap();
        for x in DomainGrid::units(&ring, 2).unwrap().iter() {
            prop_assert_eq!(map.inverse(&map.forward(&x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn keyfiles_round_trip_bit_exact(seed in 0u64..1000) {
        let keys = pkc_keygen(demo_pkc(), seed).unwrap();
        let bytes = keyio::write_pkc_private(&keys);
        let back = keyio::read_pkc_private(&bytes).unwrap();
        prop_assert_eq!(keyio::write_pkc_private(&back), bytes);
    }

    #[test]
    fn flipped_body_byte_is_detected(seed in 0u64..100, pos in any::<prop::sample::Index>()) {
        let keys = pkc_keygen(demo_pkc(), seed).unwrap();
        let mut bytes = keyio::write_pkc_public(&keys.public);
        let i = pos.index(bytes.len());
        bytes[i] ^= 0x01;
        prop_assert!(keyio::read_pkc_public(&bytes).is_err());
    }
}
