//! Facts, the complement involution, signs and three-valued interpretations.
//!
//! A fact is either a signed propositional atom (`p`, `~p`) or one of the
//! logical constants `t`, `f`, `u`. Atom names are interned for the lifetime
//! of the process so that [`Fact`] is `Copy` and cheap to hash and compare.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Truth values ordered by the truth order `f < u < t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Truth {
    False,
    Unknown,
    True,
}

impl Truth {
    pub const ALL: [Truth; 3] = [Truth::False, Truth::Unknown, Truth::True];

    pub fn complement(self) -> Truth {
        match self {
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
            Truth::True => Truth::False,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Truth::False => "f",
            Truth::Unknown => "u",
            Truth::True => "t",
        }
    }

    pub fn parse(s: &str) -> Option<Truth> {
        match s {
            "t" => Some(Truth::True),
            "f" => Some(Truth::False),
            "u" => Some(Truth::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Least element under the truth order.
///
/// An empty collection has no minimum; that is a caller bug and is reported
/// as [`Error::Contract`].
pub fn truth_min<I: IntoIterator<Item = Truth>>(values: I) -> Result<Truth> {
    values
        .into_iter()
        .min()
        .ok_or_else(|| Error::Contract("truth_min of an empty collection".into()))
}

/// Greatest element under the truth order; see [`truth_min`].
pub fn truth_max<I: IntoIterator<Item = Truth>>(values: I) -> Result<Truth> {
    values
        .into_iter()
        .max()
        .ok_or_else(|| Error::Contract("truth_max of an empty collection".into()))
}

/// Interned atom name.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(&'static str);

fn interner() -> &'static Mutex<HashSet<&'static str>> {
    static POOL: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
    POOL.get_or_init(|| Mutex::new(HashSet::new()))
}

impl Name {
    /// Interns `s`. Does not check reservation or identifier syntax; see
    /// [`Fact::atom`] for the checked constructor.
    pub fn intern(s: &str) -> Name {
        let mut pool = interner().lock().expect("name pool poisoned");
        if let Some(existing) = pool.get(s) {
            return Name(existing);
        }
        let leaked: &'static str = Box::leak(s.to_owned().into_boxed_str());
        pool.insert(leaked);
        Name(leaked)
    }

    pub fn as_str(self) -> &'static str {
        self.0
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

/// Names that denote the logical constants and therefore cannot name atoms.
pub const RESERVED: [&str; 3] = ["t", "f", "u"];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// A fact of a propositional fact space.
///
/// Logical constants sort before atoms; atoms sort by name, with `p` before `~p`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fact {
    Logical(Truth),
    Atom { name: Name, negated: bool },
}

/// Sign of a defined fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        })
    }
}

impl Fact {
    pub const TRUE: Fact = Fact::Logical(Truth::True);
    pub const FALSE: Fact = Fact::Logical(Truth::False);
    pub const UNKNOWN: Fact = Fact::Logical(Truth::Unknown);

    /// Unnegated atom. Rejects reserved names and malformed identifiers.
    pub fn atom(name: &str) -> Result<Fact> {
        if RESERVED.contains(&name) {
            return Err(Error::Contract(format!(
                "`{name}` is a logical constant and cannot name an atom"
            )));
        }
        if !is_identifier(name) {
            return Err(Error::Contract(format!("`{name}` is not an identifier")));
        }
        Ok(Fact::Atom {
            name: Name::intern(name),
            negated: false,
        })
    }

    pub fn positive(name: Name) -> Fact {
        Fact::Atom {
            name,
            negated: false,
        }
    }

    /// Parses `p`, `~p`, `t`, `f` or `u`.
    pub fn parse(text: &str) -> Result<Fact> {
        let text = text.trim();
        if let Some(t) = Truth::parse(text) {
            return Ok(Fact::Logical(t));
        }
        match text.strip_prefix('~') {
            Some(rest) => {
                let inner = Fact::parse(rest)?;
                Ok(inner.complement())
            }
            None => Fact::atom(text),
        }
    }

    pub fn complement(self) -> Fact {
        match self {
            Fact::Logical(t) => Fact::Logical(t.complement()),
            Fact::Atom { name, negated } => Fact::Atom {
                name,
                negated: !negated,
            },
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, Fact::Logical(_))
    }

    pub fn logical(self) -> Option<Truth> {
        match self {
            Fact::Logical(t) => Some(t),
            Fact::Atom { .. } => None,
        }
    }

    pub fn name(self) -> Option<Name> {
        match self {
            Fact::Atom { name, .. } => Some(name),
            Fact::Logical(_) => None,
        }
    }

    pub fn is_negated(self) -> bool {
        matches!(self, Fact::Atom { negated: true, .. })
    }

    /// The atom with the negation stripped; logical facts map to themselves.
    pub fn unsigned(self) -> Fact {
        match self {
            Fact::Atom { name, .. } => Fact::positive(name),
            l => l,
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Logical(t) => write!(f, "{t}"),
            Fact::Atom {
                name,
                negated: false,
            } => write!(f, "{name}"),
            Fact::Atom {
                name,
                negated: true,
            } => write!(f, "~{name}"),
        }
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `+` for unnegated atoms, `-` for negated ones.
pub fn default_sign(x: Fact) -> Result<Sign> {
    match x {
        Fact::Logical(t) => Err(Error::Contract(format!(
            "logical fact `{t}` has no sign"
        ))),
        Fact::Atom { negated: false, .. } => Ok(Sign::Positive),
        Fact::Atom { negated: true, .. } => Ok(Sign::Negative),
    }
}

/// Sign used internally where the fact is known to be an atom. Logical facts
/// are reported positive; callers only consult this on defined facts.
pub(crate) fn sign_of(x: Fact) -> Sign {
    if x.is_negated() {
        Sign::Negative
    } else {
        Sign::Positive
    }
}

/// All signed atoms over a finite set of names, plus `t`, `f`, `u`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactSpace {
    atoms: BTreeSet<Name>,
}

impl FactSpace {
    pub fn new<I: IntoIterator<Item = Name>>(atoms: I) -> FactSpace {
        FactSpace {
            atoms: atoms.into_iter().collect(),
        }
    }

    /// Space spanned by the atoms occurring in `facts`.
    pub fn spanned_by<'a, I: IntoIterator<Item = &'a Fact>>(facts: I) -> FactSpace {
        FactSpace::new(facts.into_iter().filter_map(|f| f.name()))
    }

    pub fn atoms(&self) -> &BTreeSet<Name> {
        &self.atoms
    }

    pub fn contains(&self, x: Fact) -> bool {
        match x {
            Fact::Logical(_) => true,
            Fact::Atom { name, .. } => self.atoms.contains(&name),
        }
    }

    pub fn union(&self, other: &FactSpace) -> FactSpace {
        FactSpace {
            atoms: self.atoms.union(&other.atoms).copied().collect(),
        }
    }

    /// Every fact of the space, logical constants first.
    pub fn facts(&self) -> Vec<Fact> {
        let mut out: Vec<Fact> = Truth::ALL.iter().map(|&t| Fact::Logical(t)).collect();
        for &name in &self.atoms {
            out.push(Fact::Atom {
                name,
                negated: false,
            });
            out.push(Fact::Atom {
                name,
                negated: true,
            });
        }
        out
    }

    pub fn len(&self) -> usize {
        3 + 2 * self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A three-valued interpretation.
///
/// Only unnegated atoms are stored; negated atoms and logical constants are
/// derived, so `I(~x) = ~I(x)` and `I(l) = l` hold by construction.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation {
    values: BTreeMap<Name, Truth>,
}

impl Interpretation {
    pub fn new() -> Interpretation {
        Interpretation::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Name, Truth)>>(pairs: I) -> Interpretation {
        Interpretation {
            values: pairs.into_iter().collect(),
        }
    }

    /// Constant interpretation over the atoms of `space`.
    pub fn constant(space: &FactSpace, value: Truth) -> Interpretation {
        Interpretation::from_pairs(space.atoms().iter().map(|&n| (n, value)))
    }

    /// Assigns a value to a fact. Assigning `~p = v` stores `p = ~v`.
    pub fn set(&mut self, fact: Fact, value: Truth) -> Result<()> {
        match fact {
            Fact::Logical(l) if l == value => Ok(()),
            Fact::Logical(l) => Err(Error::Contract(format!(
                "cannot assign {value} to logical fact {l}"
            ))),
            Fact::Atom { name, negated } => {
                let v = if negated { value.complement() } else { value };
                self.values.insert(name, v);
                Ok(())
            }
        }
    }

    pub fn with(mut self, fact: Fact, value: Truth) -> Result<Interpretation> {
        self.set(fact, value)?;
        Ok(self)
    }

    pub fn get(&self, fact: Fact) -> Option<Truth> {
        match fact {
            Fact::Logical(l) => Some(l),
            Fact::Atom { name, negated } => {
                let v = *self.values.get(&name)?;
                Some(if negated { v.complement() } else { v })
            }
        }
    }

    /// Like [`get`](Self::get) but reports an unassigned atom as an error.
    pub fn value(&self, fact: Fact) -> Result<Truth> {
        self.get(fact)
            .ok_or_else(|| Error::Contract(format!("interpretation does not assign `{fact}`")))
    }

    pub fn assigned(&self) -> impl Iterator<Item = (Name, Truth)> + '_ {
        self.values.iter().map(|(&n, &v)| (n, v))
    }

    pub fn covers(&self, space: &FactSpace) -> bool {
        space.atoms().iter().all(|n| self.values.contains_key(n))
    }

    pub fn is_two_valued(&self) -> bool {
        self.values.values().all(|&v| v != Truth::Unknown)
    }

    /// Parses `p=t,q=f,...` (commas or spaces) over unnegated atoms.
    pub fn parse(text: &str) -> Result<Interpretation> {
        let mut out = Interpretation::new();
        for item in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            let (lhs, rhs) = item.split_once('=').ok_or_else(|| {
                Error::Contract(format!("interpretation item `{item}` is not `name=value`"))
            })?;
            let fact = Fact::atom(lhs.trim())?;
            let value = Truth::parse(rhs.trim()).ok_or_else(|| {
                Error::Contract(format!("`{}` is not one of t, f, u", rhs.trim()))
            })?;
            out.set(fact, value)?;
        }
        Ok(out)
    }

    /// Number of interpretations over `n` atoms, saturating.
    pub fn count(n: usize, two_valued_only: bool) -> u64 {
        let base: u64 = if two_valued_only { 2 } else { 3 };
        base.checked_pow(n as u32).unwrap_or(u64::MAX)
    }

    /// The `code`-th interpretation over `atoms` in the order used by
    /// [`enumerate`](Self::enumerate): the last atom varies fastest, values
    /// ordered `f < u < t`.
    pub fn decode(atoms: &[Name], two_valued_only: bool, mut code: u64) -> Interpretation {
        let domain: &[Truth] = if two_valued_only {
            &[Truth::False, Truth::True]
        } else {
            &Truth::ALL
        };
        let base = domain.len() as u64;
        let mut interp = Interpretation::new();
        for &name in atoms.iter().rev() {
            interp.values.insert(name, domain[(code % base) as usize]);
            code /= base;
        }
        interp
    }

    /// Every interpretation over `atoms`, in lexicographic order of values.
    pub fn enumerate(atoms: &[Name], two_valued_only: bool) -> impl Iterator<Item = Interpretation> + '_ {
        (0..Interpretation::count(atoms.len(), two_valued_only))
            .map(move |code| Interpretation::decode(atoms, two_valued_only, code))
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, v) in &self.values {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{name}={v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atom(s: &str) -> Fact {
        Fact::atom(s).unwrap()
    }

    #[test]
    fn complement_examples() {
        assert_eq!(atom("p").complement(), Fact::parse("~p").unwrap());
        assert_eq!(Fact::TRUE.complement(), Fact::FALSE);
        assert_eq!(Fact::UNKNOWN.complement(), Fact::UNKNOWN);
        assert_ne!(atom("p").complement(), atom("p"));
    }

    #[test]
    fn truth_min_examples() {
        use Truth::*;
        assert_eq!(truth_min([True, Unknown, True]).unwrap(), Unknown);
        assert_eq!(truth_min([True]).unwrap(), True);
        assert_eq!(truth_min([Unknown, False, True]).unwrap(), False);
        assert!(matches!(truth_min([]), Err(Error::Contract(_))));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(default_sign(atom("q")).unwrap(), Sign::Positive);
        assert_eq!(default_sign(atom("q").complement()).unwrap(), Sign::Negative);
        assert!(default_sign(Fact::TRUE).is_err());
    }

    #[test]
    fn reserved_names_rejected() {
        assert!(Fact::atom("t").is_err());
        assert!(Fact::atom("1x").is_err());
        assert_eq!(Fact::parse("~~p").unwrap(), atom("p"));
        assert_eq!(Fact::parse("~t").unwrap(), Fact::FALSE);
    }

    #[test]
    fn interpretation_literal() {
        let i = Interpretation::parse("p=t, q=f,r=u").unwrap();
        assert_eq!(i.get(atom("p")), Some(Truth::True));
        assert_eq!(i.get(atom("q").complement()), Some(Truth::True));
        assert_eq!(i.get(atom("r").complement()), Some(Truth::Unknown));
        assert_eq!(i.to_string(), "p=t,q=f,r=u");
        assert!(Interpretation::parse("p=x").is_err());
        assert!(Interpretation::parse("t=t").is_err());
    }

    #[test]
    fn enumeration_counts() {
        let names: Vec<Name> = ["a", "b", "c"].iter().map(|s| Name::intern(s)).collect();
        assert_eq!(Interpretation::enumerate(&names, false).count(), 27);
        assert_eq!(Interpretation::enumerate(&names, true).count(), 8);
        let all: BTreeSet<_> = Interpretation::enumerate(&names, false).collect();
        assert_eq!(all.len(), 27);
    }

    fn arb_truth() -> impl Strategy<Value = Truth> {
        prop_oneof![Just(Truth::False), Just(Truth::Unknown), Just(Truth::True)]
    }

    proptest! {
        #[test]
        fn interpretation_respects_involution(values in proptest::collection::vec(arb_truth(), 1..6)) {
            let names: Vec<Name> = (0..values.len()).map(|i| Name::intern(&format!("a{i}"))).collect();
            let interp = Interpretation::from_pairs(names.iter().copied().zip(values));
            let space = FactSpace::new(names);
            for x in space.facts() {
                prop_assert_eq!(interp.get(x.complement()), interp.get(x).map(Truth::complement));
            }
            for t in Truth::ALL {
                prop_assert_eq!(interp.get(Fact::Logical(t)), Some(t));
            }
        }

        #[test]
        fn complement_is_a_bijective_involution(n in 1usize..6) {
            let space = FactSpace::new((0..n).map(|i| Name::intern(&format!("b{i}"))));
            let facts = space.facts();
            let image: BTreeSet<Fact> = facts.iter().map(|f| f.complement()).collect();
            prop_assert_eq!(image.len(), facts.len());
            for x in facts {
                prop_assert_eq!(x.complement().complement(), x);
                prop_assert!(space.contains(x.complement()));
                if x != Fact::UNKNOWN {
                    prop_assert_ne!(x.complement(), x);
                }
            }
        }

        #[test]
        fn truth_min_is_a_semilattice(a in arb_truth(), b in arb_truth(), c in arb_truth()) {
            let m = |x: Truth, y: Truth| truth_min([x, y]).unwrap();
            prop_assert_eq!(m(a, a), a);
            prop_assert_eq!(m(a, b), m(b, a));
            prop_assert_eq!(m(m(a, b), c), m(a, m(b, c)));
        }
    }
}
