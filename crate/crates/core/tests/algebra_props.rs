//! Algebraic invariants of the Grassmann and supermatrix layers on random
//! inputs with exact rational coefficients.

use proptest::prelude::*;
use superloc::grassmann::{Const, Parity, ScalarExpr, SuperFunction};
use superloc::linalg::{
    berezinian_even, berezinian_odd, det, orientation_ij, pfaffian, SuperMatrix,
};

fn rational() -> impl Strategy<Value = Const> {
    (-5i64..=5, 1i64..=4).prop_map(|(p, q)| Const::ratio(p, q))
}

/// Random element of the given parity over R^{0|n}; `None` gives mixed parity.
fn superfn(n: usize, parity: Option<Parity>) -> impl Strategy<Value = SuperFunction> {
    let masks: Vec<u64> = (0..(1u64 << n))
        .filter(|k| parity.is_none_or(|p| (k.count_ones() as usize % 2) == p.bit()))
        .collect();
    let len = masks.len();
    proptest::collection::vec((any::<bool>(), rational()), len).prop_map(move |cs| {
        let mut f = SuperFunction::zero(0, n);
        for (mask, (keep, c)) in masks.iter().zip(cs) {
            if keep {
                f = f.add(&SuperFunction::monomial(0, n, *mask, ScalarExpr::constant(c)));
            }
        }
        f
    })
}

fn homogeneous(n: usize) -> impl Strategy<Value = SuperFunction> {
    prop_oneof![superfn(n, Some(Parity::Even)), superfn(n, Some(Parity::Odd))]
}

fn parity_sign(f: &SuperFunction, g: &SuperFunction) -> i64 {
    if f.parity() == Some(Parity::Odd) && g.parity() == Some(Parity::Odd) {
        -1
    } else {
        1
    }
}

/// Random homogeneous supermatrix with rows/cols `dims` over R^{0|n}.
fn supermatrix(n: usize, rows: (usize, usize), cols: (usize, usize), parity: Parity) -> impl Strategy<Value = SuperMatrix> {
    let r = rows.0 + rows.1;
    let c = cols.0 + cols.1;
    let evens = proptest::collection::vec(superfn(n, Some(Parity::Even)), r * c);
    let odds = proptest::collection::vec(superfn(n, Some(Parity::Odd)), r * c);
    (evens, odds).prop_map(move |(e, o)| {
        let mut m = SuperMatrix::zero(0, n, rows, cols, parity);
        for i in 0..r {
            for j in 0..c {
                let k = i * c + j;
                let mut v = if m.entry_parity(i, j) == Parity::Even { e[k].clone() } else { o[k].clone() };
                // diagonally dominant bodies keep the random matrices invertible
                let partner = match parity {
                    Parity::Even => i,
                    Parity::Odd if i < rows.0 => i + rows.0,
                    Parity::Odd => i - rows.0,
                };
                if rows == cols && j == partner {
                    v = v.add(&SuperFunction::int(0, n, 12));
                }
                m.set(i, j, v);
            }
        }
        m
    })
}

fn body_invertible(m: &SuperMatrix) -> bool {
    let (_, n) = m.ambient();
    let a = m.block_a();
    let d = m.block_d();
    !det(&a, 0, n).body().is_zero() && !det(&d, 0, n).body().is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn product_is_associative_and_supercommutative(
        f in homogeneous(5), g in homogeneous(5), h in superfn(5, None)
    ) {
        prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
        let s = parity_sign(&f, &g);
        prop_assert_eq!(f.mul(&g), g.mul(&f).scale(&Const::int(s)));
    }

    #[test]
    fn six_generators_associate(f in superfn(6, None), g in superfn(6, None), h in superfn(6, None)) {
        prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
    }

    #[test]
    fn odd_leibniz_rule(f in homogeneous(5), g in superfn(5, None), a in 0usize..5) {
        let lhs = f.mul(&g).partial_odd(a).unwrap();
        let sign = if f.parity() == Some(Parity::Odd) { -1 } else { 1 };
        let rhs = f.partial_odd(a).unwrap().mul(&g)
            .add(&f.mul(&g.partial_odd(a).unwrap()).scale(&Const::int(sign)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn odd_derivatives_anticommute(f in superfn(5, None), a in 0usize..5, b in 0usize..5) {
        let ab = f.partial_odd(b).unwrap().partial_odd(a).unwrap();
        let ba = f.partial_odd(a).unwrap().partial_odd(b).unwrap();
        prop_assert_eq!(ab, ba.neg());
        prop_assert!(f.partial_odd(a).unwrap().partial_odd(a).unwrap().is_zero());
    }

    #[test]
    fn even_leibniz_rule(
        p in proptest::collection::vec(-3i64..=3, 4), q in proptest::collection::vec(-3i64..=3, 4),
        f in homogeneous(3), g in homogeneous(3)
    ) {
        let x = ScalarExpr::var(0);
        let poly = |c: &[i64]| c.iter().enumerate().fold(ScalarExpr::zero(), |acc, (k, v)| {
            acc.add(&x.pow(k as u32).scale(&Const::int(*v)))
        });
        let lift = |h: &SuperFunction, e: ScalarExpr| {
            let mut out = SuperFunction::zero(1, 3);
            for (mask, c) in h.coeffs() {
                out = out.add(&SuperFunction::monomial(1, 3, mask, c.mul(&e)));
            }
            out
        };
        let fx = lift(&f, poly(&p).mul(&x.pow(2).neg().exp()));
        let gx = lift(&g, poly(&q));
        let lhs = fx.mul(&gx).partial_even(0).unwrap();
        let rhs = fx.partial_even(0).unwrap().mul(&gx).add(&fx.mul(&gx.partial_even(0).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn diff_matches_finite_differences(
        p in proptest::collection::vec(-3i64..=3, 5), a in 1i64..=4, t in -1.5f64..1.5
    ) {
        let x = ScalarExpr::var(0);
        let poly = p.iter().enumerate().fold(ScalarExpr::zero(), |acc, (k, v)| {
            acc.add(&x.pow(k as u32).scale(&Const::int(*v)))
        });
        let e = poly.mul(&x.pow(2).scale(&Const::ratio(-a, 2)).exp());
        let d = e.diff(0).eval(&[t]).unwrap().re;
        let h = 1e-5;
        let fd = (e.eval(&[t + h]).unwrap().re - e.eval(&[t - h]).unwrap().re) / (2.0 * h);
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{} vs {}", d, fd);
    }

    #[test]
    fn sqrt_and_exp_identities(s in superfn(6, Some(Parity::Even)), b in 1i64..=9) {
        let f = s.soul().add(&SuperFunction::int(0, 6, b * b));
        let r = f.sqrt_positive().unwrap();
        prop_assert_eq!(r.mul(&r), f.clone());
        prop_assert_eq!(SuperFunction::int(0, 6, b * b).sqrt_positive().unwrap(), SuperFunction::int(0, 6, b));
        let nil = s.soul().add(&SuperFunction::int(0, 6, b));
        let e = nil.exp_even().unwrap().mul(&nil.neg().exp_even().unwrap());
        prop_assert_eq!(e, SuperFunction::one(0, 6));
    }

    #[test]
    fn berezinian_is_multiplicative(
        f in supermatrix(4, (2, 2), (2, 2), Parity::Even),
        g in supermatrix(4, (2, 2), (2, 2), Parity::Even)
    ) {
        prop_assume!(body_invertible(&f) && body_invertible(&g));
        let bf = berezinian_even(&f).unwrap();
        let bg = berezinian_even(&g).unwrap();
        prop_assert_eq!(berezinian_even(&f.mul(&g).unwrap()).unwrap(), bf.mul(&bg));
        prop_assert_eq!(berezinian_even(&f.supertranspose().unwrap()).unwrap(), bf.clone());
        let conj = g.inverse().unwrap().mul(&f).unwrap().mul(&g).unwrap();
        prop_assert_eq!(berezinian_even(&conj).unwrap(), bf.clone());
        prop_assert_eq!(berezinian_even(&f.parity_swap()).unwrap(), bf.inverse().unwrap());
    }

    #[test]
    fn orientation_is_multiplicative(
        f in supermatrix(2, (2, 1), (2, 1), Parity::Even),
        g in supermatrix(2, (2, 1), (2, 1), Parity::Even),
        i in any::<bool>(), j in any::<bool>()
    ) {
        prop_assume!(body_invertible(&f) && body_invertible(&g));
        let fg = f.mul(&g).unwrap();
        let s = orientation_ij(&f, i, j).unwrap().sign * orientation_ij(&g, i, j).unwrap().sign;
        prop_assert_eq!(orientation_ij(&fg, i, j).unwrap().sign, s);
    }

    #[test]
    fn odd_berezinian_is_covariant(
        e in supermatrix(2, (1, 1), (1, 1), Parity::Odd),
        g in supermatrix(2, (1, 1), (1, 1), Parity::Even)
    ) {
        prop_assume!(body_invertible(&g));
        let ei = e.mul(&SuperMatrix::odd_identity(0, 2, 1)).unwrap();
        prop_assume!(body_invertible(&ei));
        let before = berezinian_odd(&e, vec!["x".into(), "th".into()]).unwrap();
        let moved = g.inverse().unwrap().mul(&e).unwrap().mul(&g).unwrap();
        let after = berezinian_odd(&moved, vec!["y".into(), "eta".into()]).unwrap();
        let rebased = before.rebase(&g, vec!["y".into(), "eta".into()]).unwrap();
        prop_assert_eq!(rebased, after);
    }

    #[test]
    fn supertranspose_reverses_products(
        pf in prop_oneof![Just(Parity::Even), Just(Parity::Odd)],
        pg in prop_oneof![Just(Parity::Even), Just(Parity::Odd)],
        seed in any::<u64>()
    ) {
        let mut runner = proptest::test_runner::TestRunner::new_with_rng(
            ProptestConfig::default(),
            proptest::test_runner::TestRng::from_seed(
                proptest::test_runner::RngAlgorithm::ChaCha,
                &{ let mut s = [0u8; 32]; s[..8].copy_from_slice(&seed.to_le_bytes()); s },
            ),
        );
        use proptest::strategy::ValueTree;
        let f = supermatrix(3, (1, 2), (2, 1), pf).new_tree(&mut runner).unwrap().current();
        let g = supermatrix(3, (2, 1), (1, 1), pg).new_tree(&mut runner).unwrap().current();
        let lhs = f.mul(&g).unwrap().supertranspose().unwrap();
        let rhs = g.supertranspose().unwrap().mul(&f.supertranspose().unwrap()).unwrap();
        let rhs = if pf == Parity::Odd && pg == Parity::Odd { rhs.neg() } else { rhs };
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pfaffian_transforms_with_determinant(
        s in proptest::collection::vec(-4i64..=4, 6),
        t in proptest::collection::vec(-3i64..=3, 16)
    ) {
        let c = |v: i64| SuperFunction::int(0, 0, v);
        let mut sk = vec![vec![c(0); 4]; 4];
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                sk[i][j] = c(s[k]);
                sk[j][i] = c(-s[k]);
                k += 1;
            }
        }
        let tm: Vec<Vec<SuperFunction>> = (0..4).map(|i| (0..4).map(|j| c(t[4 * i + j])).collect()).collect();
        let mut tst = vec![vec![c(0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = c(0);
                for a in 0..4 {
                    for b in 0..4 {
                        acc = acc.add(&tm[a][i].mul(&sk[a][b]).mul(&tm[b][j]));
                    }
                }
                tst[i][j] = acc;
            }
        }
        let lhs = pfaffian(&tst, 0, 0).unwrap();
        let rhs = det(&tm, 0, 0).mul(&pfaffian(&sk, 0, 0).unwrap());
        prop_assert_eq!(lhs, rhs);
        let p = pfaffian(&sk, 0, 0).unwrap();
        prop_assert_eq!(p.mul(&p), det(&sk, 0, 0));
    }
}
