use hermkr::exact::rat;
use hermkr::hironaka::{alpha_general, Partition};
use hermkr::oracle::{count_solutions, density_estimate, LocalTarget, OracleJob};
use hermkr::{InertLocalRing, LocalHermitianSpec, ResidueRingElem};
use proptest::prelude::*;

fn job(p: u64, k: u32, s: &[u32], t: LocalTarget) -> OracleJob {
    OracleJob::new(InertLocalRing::new(p, k).unwrap(), LocalHermitianSpec::new(s.to_vec()).unwrap(), t).unwrap()
}

fn partition(v: &[u32]) -> Partition {
    Partition::new(v.to_vec()).unwrap()
}

#[test]
fn brute_force_matches_hironaka() {
    // (S exponents, T exponents, precision at which the count has settled)
    let cases: &[(&[u32], &[u32], u32)] = &[
        (&[0, 0], &[0, 0], 1),
        (&[1, 0], &[1, 0], 2),
        (&[0, 0], &[0], 1),
        (&[0, 0], &[1], 2),
        (&[1, 0], &[0], 1),
        (&[0, 0, 0], &[0], 1),
        (&[0, 0], &[2], 3),
        (&[0, 0], &[1, 1], 2),
    ];
    for &(s, t, k) in cases {
        let target = LocalTarget::diag(&t.iter().map(|&e| 3i64.pow(e)).collect::<Vec<_>>()).unwrap();
        let brute = density_estimate(&job(3, k, s, target)).unwrap();
        let formula = alpha_general(&partition(s), &partition(t), 3).unwrap();
        assert_eq!(brute, formula, "S = {s:?}, T = {t:?}, k = {k}");
    }
}

#[test]
fn lemma_value_for_nonsplit_self_pairing() {
    let d = density_estimate(&job(3, 2, &[1, 0], LocalTarget::diag(&[3, 1]).unwrap())).unwrap();
    assert_eq!(d, rat(16, 3));
}

fn hermitian_conjugate(ring: &InertLocalRing, t: [[ResidueRingElem; 2]; 2], u: [[ResidueRingElem; 2]; 2]) -> LocalTarget {
    let zero = ring.elem(0, 0);
    let entry = |i: usize, j: usize| {
        let mut acc = zero;
        for r in 0..2 {
            for s in 0..2 {
                acc = ring.add(&acc, &ring.mul(&ring.conj(&u[r][i]), &ring.mul(&t[r][s], &u[s][j])));
            }
        }
        acc
    };
    let (a, b, c) = (entry(0, 0), entry(1, 1), entry(0, 1));
    assert_eq!((a.b, b.b), (0, 0));
    LocalTarget::Rank2 { t1: a.a as i64, t2: b.a as i64, off: (c.a as i64, c.b as i64) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn counts_invariant_under_unimodular_change(entries in prop::array::uniform8(0i64..9)) {
        let ring = InertLocalRing::new(3, 2).unwrap();
        let e = |i: usize| ring.elem(entries[2 * i], entries[2 * i + 1]);
        let u = [[e(0), e(1)], [e(2), e(3)]];
        let det = ring.add(&ring.mul(&u[0][0], &u[1][1]), &ring.mul(&ring.elem(-1, 0), &ring.mul(&u[0][1], &u[1][0])));
        prop_assume!(ring.is_unit(&det));

        let t = [[ring.elem(3, 0), ring.elem(0, 0)], [ring.elem(0, 0), ring.elem(1, 0)]];
        let moved = hermitian_conjugate(&ring, t, u);
        let base = job(3, 2, &[1, 0], LocalTarget::diag(&[3, 1]).unwrap());
        let other = OracleJob::new(ring, LocalHermitianSpec::new(vec![1, 0]).unwrap(), moved).unwrap();
        prop_assert_eq!(count_solutions(&base).unwrap(), count_solutions(&other).unwrap());
    }
}
