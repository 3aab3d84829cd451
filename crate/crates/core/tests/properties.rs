//! Algebraic properties of facts, frames and branch evaluations.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use nestjust::facts::{truth_min, FactSpace};
use nestjust::{
    complementation, evaluate_branch, validate_frame, Branch, EvalKind, Evaluation, Fact, Frame, Interpretation,
    LocalityContext, Name, Rule, Truth,
};

const ATOMS: [&str; 4] = ["a", "b", "c", "d"];

fn truth() -> impl Strategy<Value = Truth> {
    prop_oneof![Just(Truth::False), Just(Truth::Unknown), Just(Truth::True)]
}

fn atom_fact() -> impl Strategy<Value = Fact> {
    (0..ATOMS.len(), any::<bool>()).prop_map(|(i, neg)| {
        let x = Fact::atom(ATOMS[i]).unwrap();
        if neg {
            x.complement()
        } else {
            x
        }
    })
}

fn body_fact() -> impl Strategy<Value = Fact> {
    prop_oneof![
        8 => atom_fact(),
        1 => Just(Fact::TRUE),
        1 => Just(Fact::FALSE),
    ]
}

fn lasso() -> impl Strategy<Value = Branch> {
    (prop::collection::vec(atom_fact(), 0..4), prop::collection::vec(atom_fact(), 1..5))
        .prop_map(|(prefix, cycle)| Branch::lasso(prefix, cycle))
}

fn finite() -> impl Strategy<Value = Branch> {
    (prop::collection::vec(atom_fact(), 1..5), body_fact()).prop_map(|(mut path, last)| {
        path.push(last);
        Branch::Finite(path)
    })
}

/// Positive rules over `a`, `b` with `c`, `d` open.
fn positive_rules() -> impl Strategy<Value = BTreeSet<Rule>> {
    let rule = (0..2usize, prop::collection::btree_set(body_fact(), 1..3))
        .prop_map(|(h, body)| Rule::new(Fact::atom(ATOMS[h]).unwrap(), body).unwrap());
    prop::collection::btree_set(rule, 1..5)
}

proptest! {
    #[test]
    fn interpretations_respect_complement(values in prop::collection::vec(truth(), ATOMS.len())) {
        let i = Interpretation::from_pairs(ATOMS.iter().map(|a| Name::intern(a)).zip(values));
        for a in ATOMS {
            let x = Fact::atom(a).unwrap();
            prop_assert_eq!(i.value(x.complement()).unwrap(), i.value(x).unwrap().complement());
        }
    }

    #[test]
    fn complement_is_an_involutive_bijection(n in 1..ATOMS.len()) {
        let space = FactSpace::new(ATOMS[..n].iter().map(|a| Name::intern(a)));
        let facts: BTreeSet<Fact> = space.facts().into_iter().collect();
        let images: BTreeSet<Fact> = facts.iter().map(|x| x.complement()).collect();
        prop_assert_eq!(&images, &facts);
        for x in facts {
            prop_assert_eq!(x.complement().complement(), x);
        }
    }

    #[test]
    fn truth_min_is_a_semilattice(a in truth(), b in truth(), c in truth()) {
        let m = |xs: &[Truth]| truth_min(xs.iter().copied()).unwrap();
        prop_assert_eq!(m(&[a, a]), a);
        prop_assert_eq!(m(&[a, b]), m(&[b, a]));
        prop_assert_eq!(m(&[m(&[a, b]), c]), m(&[a, m(&[b, c])]));
    }

    #[test]
    fn complementation_completes_a_frame(rules in positive_rules()) {
        let neg = complementation(&rules, 1_000_000).unwrap();
        let frame = Frame::from_rules(rules.iter().chain(&neg).cloned());
        prop_assert!(validate_frame(&frame).is_empty(), "{:?}", validate_frame(&frame));
        prop_assert!(frame.is_complementary());
        for &x in &frame.defined {
            prop_assert!(!frame.cases(x).unwrap().is_empty());
        }
    }

    #[test]
    fn complementation_of_singleton_bodies_is_an_involution(
        heads in prop::collection::vec((0..2usize, atom_fact()), 1..5)
    ) {
        let rules: BTreeSet<Rule> = heads
            .iter()
            .map(|&(h, y)| Rule::new(Fact::atom(ATOMS[h]).unwrap(), [y]).unwrap())
            .collect();
        let negative: BTreeSet<Rule> = complementation(&rules, 1_000_000).unwrap().difference(&rules).cloned().collect();
        let full = complementation(&negative, 1_000_000).unwrap();
        let twice: BTreeSet<Rule> = full.difference(&negative).cloned().collect();
        prop_assert_eq!(twice, rules);
    }

    #[test]
    fn tail_evaluations_ignore_rotation(b in lasso(), k in 0usize..4) {
        let Branch::Lasso { prefix, cycle } = &b else { unreachable!() };
        let k = k % cycle.len();
        let mut longer = prefix.clone();
        longer.extend_from_slice(&cycle[..k]);
        let mut rotated = cycle.clone();
        rotated.rotate_left(k);
        let r = Branch::lasso(longer, rotated);
        for kind in [EvalKind::Kk, EvalKind::Wf, EvalKind::Cwf] {
            let be = Evaluation::from(kind);
            prop_assert_eq!(evaluate_branch(&be, &b, None).unwrap(), evaluate_branch(&be, &r, None).unwrap());
        }
    }

    #[test]
    fn well_founded_evaluations_are_sign_dual(b in prop_oneof![lasso(), finite()]) {
        for kind in [EvalKind::Wf, EvalKind::Cwf] {
            let be = Evaluation::from(kind);
            prop_assert_eq!(
                evaluate_branch(&be, &b.complement(), None).unwrap(),
                evaluate_branch(&be, &b, None).unwrap().complement()
            );
        }
    }

    #[test]
    fn values_stay_on_the_branch_or_are_logical(b in prop_oneof![lasso(), finite()]) {
        let on_branch: BTreeSet<Fact> = b.take(16).into_iter().collect();
        for kind in [EvalKind::Sp, EvalKind::Kk, EvalKind::Wf, EvalKind::Cwf, EvalKind::St] {
            let v = evaluate_branch(&Evaluation::from(kind), &b, None).unwrap();
            prop_assert!(v.is_logical() || on_branch.contains(&v), "{kind}: {v}");
            if kind.is_parametric() && matches!(b, Branch::Lasso { .. }) {
                prop_assert!(v.is_logical());
            }
        }
    }

    #[test]
    fn single_node_merge_is_the_node_evaluation(b in prop_oneof![lasso(), finite()]) {
        let space = FactSpace::new(ATOMS.iter().map(|a| Name::intern(a)));
        let defined: BTreeSet<Fact> = space.facts().into_iter().collect();
        for kind in [EvalKind::Sp, EvalKind::Kk, EvalKind::Wf, EvalKind::Cwf, EvalKind::St] {
            // SP and ST disagree with the merge on finite branches, which it
            // always sends to their last element.
            if !kind.is_parametric() && matches!(b, Branch::Finite(_)) {
                continue;
            }
            let merged = Evaluation::Merge(Arc::new(LocalityContext::single(&defined, kind)));
            prop_assert_eq!(
                evaluate_branch(&merged, &b, None).unwrap(),
                evaluate_branch(&Evaluation::from(kind), &b, None).unwrap()
            );
        }
    }
}
