//! Seeded generators for property runs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::branches::EvalKind;
use crate::facts::{Fact, Name};
use crate::fixpoint::{FixpointDefinition, Formula, Polarity};
use crate::frames::{complementation, Rule, DEFAULT_BODY_CAP};
use crate::nested::NestedSystem;

/// Shape limits for random nested systems.
#[derive(Debug, Clone, Copy)]
pub struct NestedParams {
    pub max_atoms: usize,
    pub max_depth: usize,
    pub evaluations: &'static [EvalKind],
    pub max_rules_per_head: usize,
    pub max_body: usize,
}

impl Default for NestedParams {
    fn default() -> NestedParams {
        NestedParams {
            max_atoms: 5,
            max_depth: 3,
            evaluations: &[EvalKind::Kk, EvalKind::Wf, EvalKind::Cwf],
            max_rules_per_head: 2,
            max_body: 2,
        }
    }
}

struct Shape {
    parent: Vec<Option<usize>>,
}

impl Shape {
    fn ancestors_or_self(&self, n: usize) -> Vec<usize> {
        let mut out = vec![n];
        let mut cur = n;
        while let Some(p) = self.parent[cur] {
            out.push(p);
            cur = p;
        }
        out
    }
}

/// A random valid, complementary nested system. Child evaluations are drawn
/// from `params.evaluations`, so the result is compressible whenever those
/// are parametric.
pub fn nested_system<R: Rng>(rng: &mut R, params: &NestedParams) -> NestedSystem {
    let n_atoms = rng.gen_range(2..=params.max_atoms.max(2));
    let names: Vec<Name> = (0..n_atoms).map(|i| Name::intern(&format!("a{i}"))).collect();
    let n_open = rng.gen_range(0..n_atoms.min(2) + 1).min(n_atoms - 1);
    let (opens, defined) = names.split_at(n_open);

    // Tree shape: one node per defined atom at most, depth bounded.
    let max_nodes = defined.len().min(4);
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut depth = vec![1usize];
    let n_nodes = rng.gen_range(1..=max_nodes);
    while parent.len() < n_nodes {
        let candidates: Vec<usize> = (0..parent.len()).filter(|&i| depth[i] < params.max_depth).collect();
        let Some(&p) = candidates.choose(rng) else { break };
        depth.push(depth[p] + 1);
        parent.push(Some(p));
    }
    let shape = Shape { parent };
    let n_nodes = shape.parent.len();

    // Every node gets at least one atom.
    let mut home: Vec<usize> = (0..defined.len()).map(|i| if i < n_nodes { i } else { rng.gen_range(0..n_nodes) }).collect();
    home.shuffle(rng);
    if (0..n_nodes).any(|n| !home.contains(&n)) {
        home = (0..defined.len()).map(|i| i % n_nodes).collect();
    }

    let evals: Vec<EvalKind> = (0..n_nodes).map(|_| *params.evaluations.choose(rng).unwrap()).collect();
    let mut rules_at: Vec<BTreeSet<Rule>> = vec![BTreeSet::new(); n_nodes];
    for (i, &x) in defined.iter().enumerate() {
        let node = home[i];
        let chain = shape.ancestors_or_self(node);
        // Usable atoms: opens, atoms of ancestors, atoms in this subtree.
        let usable: Vec<Name> = opens
            .iter()
            .copied()
            .chain(defined.iter().enumerate().filter_map(|(j, &y)| {
                let h = home[j];
                let in_subtree = shape.ancestors_or_self(h).contains(&node);
                (chain.contains(&h) || in_subtree).then_some(y)
            }))
            .collect();
        let mut positive = BTreeSet::new();
        for _ in 0..rng.gen_range(1..=params.max_rules_per_head) {
            let len = rng.gen_range(1..=params.max_body);
            let mut body = BTreeSet::new();
            for _ in 0..len {
                let fact = if rng.gen_bool(0.1) {
                    if rng.gen_bool(0.5) {
                        Fact::TRUE
                    } else {
                        Fact::FALSE
                    }
                } else {
                    Fact::Atom {
                        name: *usable.choose(rng).unwrap(),
                        negated: rng.gen_bool(0.4),
                    }
                };
                body.insert(fact);
            }
            positive.insert(Rule::new(Fact::positive(x), body).unwrap());
        }
        rules_at[node].extend(complementation(&positive, DEFAULT_BODY_CAP).unwrap());
    }

    fn build(n: usize, shape: &Shape, evals: &[EvalKind], rules_at: &[BTreeSet<Rule>]) -> NestedSystem {
        let children = (0..shape.parent.len())
            .filter(|&c| shape.parent[c] == Some(n))
            .map(|c| build(c, shape, evals, rules_at))
            .collect();
        NestedSystem::new(evals[n], rules_at[n].iter().cloned(), children).expect("generated system is valid")
    }
    build(0, &shape, &evals, &rules_at)
}

/// Shape limits for random fixpoint definitions.
#[derive(Debug, Clone, Copy)]
pub struct DefinitionParams {
    pub max_atoms: usize,
    pub max_depth: usize,
}

impl Default for DefinitionParams {
    fn default() -> DefinitionParams {
        DefinitionParams {
            max_atoms: 6,
            max_depth: 3,
        }
    }
}

/// A random positive definition; negation occurs only on top-level opens.
pub fn definition<R: Rng>(rng: &mut R, params: &DefinitionParams) -> FixpointDefinition {
    let n_atoms = rng.gen_range(2..=params.max_atoms.max(2));
    let names: Vec<Name> = (0..n_atoms).map(|i| Name::intern(&format!("x{i}"))).collect();
    let n_open = rng.gen_range(0..=n_atoms.min(3) - 1);
    let (opens, defined) = names.split_at(n_open);
    build_definition(rng, opens, defined, &[], 1, params)
}

fn build_definition<R: Rng>(
    rng: &mut R,
    opens: &[Name],
    defined: &[Name],
    outer: &[Name],
    depth: usize,
    params: &DefinitionParams,
) -> FixpointDefinition {
    let polarity = if rng.gen_bool(0.5) { Polarity::Least } else { Polarity::Greatest };
    // Keep at least one atom here; the rest may go to one nested definition.
    let split = if depth < params.max_depth && defined.len() > 1 && rng.gen_bool(0.6) {
        rng.gen_range(1..defined.len())
    } else {
        defined.len()
    };
    let (here, below) = defined.split_at(split);
    let visible: Vec<Name> = outer.iter().chain(here).chain(below).copied().collect();
    let rules: Vec<(Name, Formula)> = here.iter().map(|&h| (h, formula(rng, opens, &visible))).collect();
    let children = if below.is_empty() {
        Vec::new()
    } else {
        let outer: Vec<Name> = outer.iter().chain(here).copied().collect();
        vec![build_definition(rng, opens, below, &outer, depth + 1, params)]
    };
    FixpointDefinition::new(polarity, rules, children).expect("distinct heads")
}

fn formula<R: Rng>(rng: &mut R, opens: &[Name], defined: &[Name]) -> Formula {
    let lit = |rng: &mut R| -> Formula {
        if !opens.is_empty() && rng.gen_bool(0.35) {
            let a = *opens.choose(rng).unwrap();
            if rng.gen_bool(0.5) {
                Formula::Not(a)
            } else {
                Formula::Atom(a)
            }
        } else if rng.gen_bool(0.05) {
            Formula::Const(rng.gen_bool(0.5))
        } else {
            Formula::Atom(*defined.choose(rng).unwrap())
        }
    };
    let disjuncts = rng.gen_range(1..=2);
    let mut ors = Vec::new();
    for _ in 0..disjuncts {
        let n = rng.gen_range(1..=2);
        let mut ands: Vec<Formula> = (0..n).map(|_| lit(rng)).collect();
        ors.push(if ands.len() == 1 { ands.pop().unwrap() } else { Formula::And(ands) });
    }
    if ors.len() == 1 {
        ors.pop().unwrap()
    } else {
        Formula::Or(ors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nested::validate_nested;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_systems_are_valid_and_compressible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let ns = nested_system(&mut rng, &NestedParams::default());
            let report = validate_nested(&ns);
            assert!(report.is_valid(), "{:?}", report.violations);
            assert!(report.compressibility.compressible);
            assert!(ns.depth() <= 3 && ns.atoms().len() <= 5);
        }
    }

    #[test]
    fn generated_definitions_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let d = definition(&mut rng, &DefinitionParams::default());
            assert!(d.validate().is_empty(), "{d}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = nested_system(&mut ChaCha8Rng::seed_from_u64(3), &NestedParams::default());
        let b = nested_system(&mut ChaCha8Rng::seed_from_u64(3), &NestedParams::default());
        assert_eq!(a, b);
    }
}
