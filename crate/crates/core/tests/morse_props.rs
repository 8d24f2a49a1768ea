use proptest::prelude::*;
use superloc::calculus::CoordinateSubmanifold;
use superloc::grassmann::{Const, ScalarExpr, SuperFunction};
use superloc::morse::{normalize_jet, MorseOptions};

const M: usize = 2;
const N: usize = 4;

type Term = (u64, u32, u32, i64);

fn term() -> impl Strategy<Value = Term> {
    (
        prop::sample::select(vec![0b0011u64, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100, 0b1111, 0]),
        0u32..3,
        0u32..3,
        -3i64..=3,
    )
}

fn build(terms: &[Term], keep: impl Fn(&Term) -> bool) -> SuperFunction {
    let mut f = SuperFunction::zero(M, N);
    for t in terms.iter().filter(|t| keep(t)) {
        let (mask, a, b, c) = *t;
        let e = ScalarExpr::var(0).pow(a).mul(&ScalarExpr::var(1).pow(b)).scale(&Const::int(c));
        f = f.add(&SuperFunction::monomial(M, N, mask, e));
    }
    f
}

fn check(s: &SuperFunction, nsub: &CoordinateSubmanifold) -> Result<(), TestCaseError> {
    let opts = MorseOptions { jet_order: 4, a_max: None };
    let r = normalize_jet(s, nsub, opts).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(r.residual().is_zero(), "residual {}", r.residual());
    prop_assert_eq!(&r.change.apply(s).unwrap(), r.normal_form.function());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn perturbed_standard_form_at_a_point(terms in prop::collection::vec(term(), 1..6)) {
        let std = build(&[(0, 2, 0, 1), (0, 0, 2, -1), (0b0011, 0, 0, 1), (0b1100, 0, 0, 1)], |_| true);
        // J² perturbations that vanish to first order, plus cubic and quartic even terms
        let p = build(&terms, |&(mask, a, b, _)| {
            (mask != 0 && (a + b >= 1 || mask == 0b1111)) || (mask == 0 && a + b >= 3)
        });
        check(&std.add(&p), &CoordinateSubmanifold::origin(M, N))?;
    }

    #[test]
    fn perturbed_standard_form_along_submanifold(terms in prop::collection::vec(term(), 1..6)) {
        // N = {x1 = 0, θ1 = θ2 = 0}
        let nsub = CoordinateSubmanifold::new(M, N, vec![0], vec![0, 1]).unwrap();
        let std = build(&[(0, 2, 0, 1), (0b0011, 0, 0, 1)], |_| true);
        let normal_degree = |&(mask, a, _, _): &Term| a + (mask & 0b0011).count_ones();
        let p = build(&terms, |t| {
            let (mask, a, b, _) = *t;
            normal_degree(t) >= 2 && (a + b >= 1 || mask.count_ones() == 4) && (mask != 0 || a + b >= 3)
        });
        check(&std.add(&p), &nsub)?;
    }
}
