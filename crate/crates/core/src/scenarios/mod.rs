//! Bipartite events, inequalities and their exclusivity graphs.
//!
//! An event `ab|xy` says Alice measured setting `x` and got `a` while Bob
//! measured `y` and got `b`. Either party may be a wildcard, written `_`,
//! in which case only the other party's result is recorded (`_1|_0` is
//! "Bob obtains 1 with setting 0, whatever Alice does").
//!
//! Two events are exclusive when some party used the same setting in both
//! and got different outcomes. A wildcard never creates exclusivity.

mod behavior;
mod correlators;
mod enumeration;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::Graph;

pub use behavior::{random_no_signaling, Behavior, NO_SIGNALING_TOL};
pub use correlators::{chsh_decomposition, eprinciple_check, ChshDecomposition, EPrincipleReport};
pub use enumeration::{
    canonicalize, edge_pattern_classes, edge_patterns_c5, enumerate_pentagonal, feasible_patterns,
    normalize_pattern, pentagon_order, PatternClass,
};

/// Settings are indexed `0..MAX_SETTINGS` on each side.
pub const MAX_SETTINGS: usize = 4;
/// Strategy enumeration visits `2^(a+b)` strategies; settings beyond this
/// per party are refused.
pub const LHV_MAX_SETTINGS: usize = 4;

/// One party's part of an event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Local {
    pub setting: u8,
    pub outcome: u8,
}

impl Local {
    pub fn new(setting: u8, outcome: u8) -> Self {
        Local { setting, outcome }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub alice: Option<Local>,
    pub bob: Option<Local>,
}

impl Event {
    pub fn new(alice: Option<Local>, bob: Option<Local>) -> Result<Self> {
        let e = Event { alice, bob };
        e.validate()?;
        Ok(e)
    }

    /// `ab|xy`
    pub fn joint(a: u8, b: u8, x: u8, y: u8) -> Self {
        Event { alice: Some(Local::new(x, a)), bob: Some(Local::new(y, b)) }
    }

    /// `a_|x_`
    pub fn alice_only(a: u8, x: u8) -> Self {
        Event { alice: Some(Local::new(x, a)), bob: None }
    }

    /// `_b|_y`
    pub fn bob_only(b: u8, y: u8) -> Self {
        Event { alice: None, bob: Some(Local::new(y, b)) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alice.is_none() && self.bob.is_none() {
            return Err(Error::invalid("event must fix at least one party"));
        }
        for l in self.alice.iter().chain(self.bob.iter()) {
            if l.outcome > 1 {
                return Err(Error::invalid(format!("outcome {} is not binary", l.outcome)));
            }
            if l.setting as usize >= MAX_SETTINGS {
                return Err(Error::invalid(format!("setting {} exceeds {}", l.setting, MAX_SETTINGS - 1)));
            }
        }
        Ok(())
    }

    pub fn swap_parties(&self) -> Event {
        Event { alice: self.bob, bob: self.alice }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let out = |l: Option<Local>| l.map_or("_".to_string(), |l| l.outcome.to_string());
        let set = |l: Option<Local>| l.map_or("_".to_string(), |l| l.setting.to_string());
        write!(f, "{}{}|{}{}", out(self.alice), out(self.bob), set(self.alice), set(self.bob))
    }
}

impl FromStr for Event {
    type Err = Error;

    /// Parses `ab|xy`, where a wildcard party uses `_` in both positions.
    fn from_str(s: &str) -> Result<Event> {
        let bad = || Error::invalid(format!("cannot parse event {s:?}; expected e.g. 00|01 or _1|_0"));
        let (outs, sets) = s.trim().split_once('|').ok_or_else(bad)?;
        let (outs, sets): (Vec<char>, Vec<char>) = (outs.chars().collect(), sets.chars().collect());
        if outs.len() != 2 || sets.len() != 2 {
            return Err(bad());
        }
        let party = |o: char, x: char| -> Result<Option<Local>> {
            match (o, x) {
                ('_', '_') => Ok(None),
                (o, x) => {
                    let o = o.to_digit(10).ok_or_else(bad)? as u8;
                    let x = x.to_digit(10).ok_or_else(bad)? as u8;
                    Ok(Some(Local::new(x, o)))
                }
            }
        };
        Event::new(party(outs[0], sets[0])?, party(outs[1], sets[1])?)
    }
}

/// Which party's results make two events exclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeKind {
    A,
    B,
    AB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TypedEdge {
    /// Term indices, `u < v`.
    pub u: usize,
    pub v: usize,
    pub kind: EdgeKind,
}

fn locally_exclusive(p: Option<Local>, q: Option<Local>) -> bool {
    matches!((p, q), (Some(p), Some(q)) if p.setting == q.setting && p.outcome != q.outcome)
}

/// Exclusivity type of two events, or `None` when both can happen together.
pub fn exclusive(e: &Event, f: &Event) -> Option<EdgeKind> {
    match (locally_exclusive(e.alice, f.alice), locally_exclusive(e.bob, f.bob)) {
        (true, true) => Some(EdgeKind::AB),
        (true, false) => Some(EdgeKind::A),
        (false, true) => Some(EdgeKind::B),
        (false, false) => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lhv: f64,
    pub quantum: Option<f64>,
}

/// A unit-weight sum of event probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequality {
    pub name: String,
    pub alice_settings: usize,
    pub bob_settings: usize,
    pub terms: Vec<Event>,
    pub bounds: Option<Bounds>,
}

impl Inequality {
    pub fn new(name: impl Into<String>, alice_settings: usize, bob_settings: usize, terms: Vec<Event>) -> Result<Self> {
        let iq = Inequality { name: name.into(), alice_settings, bob_settings, terms, bounds: None };
        iq.validate()?;
        Ok(iq)
    }

    /// Setting counts are taken as one more than the largest index used.
    pub fn from_terms(name: impl Into<String>, terms: Vec<Event>) -> Result<Self> {
        let count = |f: fn(&Event) -> Option<Local>| {
            terms.iter().filter_map(f).map(|l| l.setting as usize + 1).max().unwrap_or(1)
        };
        let (a, b) = (count(|e| e.alice), count(|e| e.bob));
        Inequality::new(name, a, b, terms)
    }

    pub fn parse(name: &str, alice_settings: usize, bob_settings: usize, terms: &[&str]) -> Result<Self> {
        let terms = terms.iter().map(|t| t.parse()).collect::<Result<Vec<Event>>>()?;
        Inequality::new(name, alice_settings, bob_settings, terms)
    }

    pub fn with_bounds(mut self, lhv: f64, quantum: Option<f64>) -> Self {
        self.bounds = Some(Bounds { lhv, quantum });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::invalid("inequality has no terms"));
        }
        for (count, who) in [(self.alice_settings, "alice"), (self.bob_settings, "bob")] {
            if count == 0 || count > MAX_SETTINGS {
                return Err(Error::invalid(format!("{who} setting count {count} outside [1, {MAX_SETTINGS}]")));
            }
        }
        let mut seen = BTreeSet::new();
        for e in &self.terms {
            e.validate()?;
            if !seen.insert(*e) {
                return Err(Error::invalid(format!("duplicate term {e}")));
            }
            if e.alice.is_some_and(|l| l.setting as usize >= self.alice_settings)
                || e.bob.is_some_and(|l| l.setting as usize >= self.bob_settings)
            {
                return Err(Error::invalid(format!("term {e} uses an undeclared setting")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ScenarioFile::from(self)).expect("scenario serializes")
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.terms.iter().map(|e| format!("P({e})")).collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Scenario file format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub alice_settings: usize,
    pub bob_settings: usize,
    pub terms: Vec<TermFile>,
    #[serde(default)]
    pub name: String,
}

/// `[setting, outcome]` per party, `null` for a wildcard.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub alice: Option<[u8; 2]>,
    pub bob: Option<[u8; 2]>,
}

impl TryFrom<ScenarioFile> for Inequality {
    type Error = Error;

    fn try_from(file: ScenarioFile) -> Result<Inequality> {
        let local = |p: Option<[u8; 2]>| p.map(|[x, a]| Local::new(x, a));
        let terms = file
            .terms
            .iter()
            .map(|t| Event::new(local(t.alice), local(t.bob)))
            .collect::<Result<Vec<_>>>()?;
        Inequality::new(file.name, file.alice_settings, file.bob_settings, terms)
    }
}

impl From<&Inequality> for ScenarioFile {
    fn from(iq: &Inequality) -> ScenarioFile {
        let pair = |l: Option<Local>| l.map(|l| [l.setting, l.outcome]);
        ScenarioFile {
            alice_settings: iq.alice_settings,
            bob_settings: iq.bob_settings,
            terms: iq.terms.iter().map(|e| TermFile { alice: pair(e.alice), bob: pair(e.bob) }).collect(),
            name: iq.name.clone(),
        }
    }
}

/// One vertex per term, in term order, with typed edges.
pub fn exclusivity_graph(iq: &Inequality) -> (Graph, Vec<TypedEdge>) {
    let n = iq.terms.len();
    let mut g = Graph::empty(n);
    let mut typed = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if let Some(kind) = exclusive(&iq.terms[u], &iq.terms[v]) {
                g.add_edge(u, v);
                typed.push(TypedEdge { u, v, kind });
            }
        }
    }
    (g, typed)
}

/// A local deterministic strategy: one fixed outcome per setting per party.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeterministicStrategy {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
}

impl DeterministicStrategy {
    /// Decodes strategy number `code`: bit `x` is Alice's outcome for
    /// setting `x`, bit `alice_settings + y` Bob's for setting `y`.
    pub fn from_code(code: u32, alice_settings: usize, bob_settings: usize) -> Self {
        let bit = |k: usize| (code >> k & 1) as u8;
        DeterministicStrategy {
            alice: (0..alice_settings).map(bit).collect(),
            bob: (0..bob_settings).map(|y| bit(alice_settings + y)).collect(),
        }
    }

    /// Whether the event happens under this strategy. Wildcards always match.
    pub fn satisfies(&self, e: &Event) -> bool {
        let ok = |l: Option<Local>, table: &[u8]| l.is_none_or(|l| table[l.setting as usize] == l.outcome);
        ok(e.alice, &self.alice) && ok(e.bob, &self.bob)
    }

    pub fn count(&self, iq: &Inequality) -> usize {
        iq.terms.iter().filter(|e| self.satisfies(e)).count()
    }
}

/// Classical bound: the best number of simultaneously true terms over all
/// deterministic strategies, with one optimal strategy as witness.
pub fn lhv_bound(iq: &Inequality, alice_settings: usize, bob_settings: usize) -> Result<(usize, DeterministicStrategy)> {
    if alice_settings > LHV_MAX_SETTINGS || bob_settings > LHV_MAX_SETTINGS {
        return Err(Error::capacity(format!(
            "strategy enumeration limited to {LHV_MAX_SETTINGS} settings per party"
        )));
    }
    if alice_settings < iq.alice_settings || bob_settings < iq.bob_settings {
        return Err(Error::invalid(format!(
            "inequality {} uses {}x{} settings, enumeration asked for {alice_settings}x{bob_settings}",
            iq.name, iq.alice_settings, iq.bob_settings
        )));
    }
    let total = 1u32 << (alice_settings + bob_settings);
    let mut best = (0, DeterministicStrategy::from_code(0, alice_settings, bob_settings));
    for code in 0..total {
        let s = DeterministicStrategy::from_code(code, alice_settings, bob_settings);
        let c = s.count(iq);
        if c > best.0 || code == 0 {
            best = (c, s);
        }
    }
    Ok(best)
}

/// Sum of term probabilities; marginal terms use marginal probabilities.
pub fn evaluate(iq: &Inequality, b: &Behavior) -> Result<f64> {
    if iq.alice_settings > b.alice_settings() || iq.bob_settings > b.bob_settings() {
        return Err(Error::invalid(format!(
            "behavior covers {}x{} settings, inequality {} needs {}x{}",
            b.alice_settings(),
            b.bob_settings(),
            iq.name,
            iq.alice_settings,
            iq.bob_settings
        )));
    }
    iq.terms.iter().map(|e| b.event_probability(e)).sum()
}

pub const BUILTIN_NAMES: [&str; 5] = ["pentagon-1", "pentagon-2", "pentagon-3", "chsh-prob", "i3322"];

const PENTAGON_CORE: [&str; 4] = ["00|00", "11|01", "10|11", "00|10"];

/// Built-in named scenarios.
pub fn builtin(name: &str) -> Option<Inequality> {
    let sqrt2 = std::f64::consts::SQRT_2;
    let with_fifth = |fifth: &str, a: usize| {
        let mut terms: Vec<&str> = PENTAGON_CORE.to_vec();
        terms.push(fifth);
        Inequality::parse(name, a, 2, &terms).expect("built-in scenario is valid")
    };
    let iq = match name {
        "pentagon-1" => with_fifth("11|00", 2).with_bounds(2.0, Some(2.178)),
        "pentagon-2" => with_fifth("_1|_0", 2).with_bounds(2.0, Some((3.0 + sqrt2) / 2.0)),
        "pentagon-3" => with_fifth("11|20", 3).with_bounds(2.0, Some((3.0 + sqrt2) / 2.0)),
        "chsh-prob" => {
            let mut terms = Vec::new();
            for x in 0..2u8 {
                for y in 0..2u8 {
                    for a in 0..2u8 {
                        for b in 0..2u8 {
                            if a ^ b == x & y {
                                terms.push(Event::joint(a, b, x, y));
                            }
                        }
                    }
                }
            }
            Inequality::new(name, 2, 2, terms).expect("valid").with_bounds(3.0, Some(2.0 + sqrt2))
        }
        "i3322" => Inequality::parse(
            name,
            3,
            3,
            &["11|00", "11|01", "00|10", "10|11", "00|02", "00|20", "00|21", "10|22", "_1|_2", "1_|2_"],
        )
        .expect("valid")
        .with_bounds(4.0, None),
        _ => return None,
    };
    Some(iq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{circulant, cycle, find_induced, independence_number, is_isomorphic};

    fn ev(s: &str) -> Event {
        s.parse().unwrap()
    }

    #[test]
    fn event_parsing_and_display() {
        assert_eq!(ev("10|01"), Event::joint(1, 0, 0, 1));
        assert_eq!(ev("_1|_0"), Event::bob_only(1, 0));
        assert_eq!(ev("1_|2_"), Event::alice_only(1, 2));
        for s in ["00|00", "_1|_0", "1_|2_", "11|23"] {
            assert_eq!(ev(s).to_string(), s);
        }
        assert!("__|__".parse::<Event>().is_err());
        assert!("20|00".parse::<Event>().is_err());
        assert!("00|40".parse::<Event>().is_err());
        assert!("0|00".parse::<Event>().is_err());
        assert!("0_|_0".parse::<Event>().is_err());
    }

    #[test]
    fn exclusivity_examples() {
        assert_eq!(exclusive(&ev("00|00"), &ev("11|01")), Some(EdgeKind::A));
        assert_eq!(exclusive(&ev("00|00"), &ev("11|10")), Some(EdgeKind::B));
        assert_eq!(exclusive(&ev("00|00"), &ev("11|00")), Some(EdgeKind::AB));
        assert_eq!(exclusive(&ev("_1|_0"), &ev("10|11")), None);
        assert_eq!(exclusive(&ev("_1|_0"), &ev("00|00")), Some(EdgeKind::B));
        assert_eq!(exclusive(&ev("_1|_0"), &ev("1_|0_")), None);
    }

    #[test]
    fn exclusivity_is_symmetric_and_wildcards_are_inert() {
        let mut all = Vec::new();
        for x in 0..3u8 {
            for a in 0..2u8 {
                all.push(Event::alice_only(a, x));
                all.push(Event::bob_only(a, x));
                for y in 0..3u8 {
                    for b in 0..2u8 {
                        all.push(Event::joint(a, b, x, y));
                    }
                }
            }
        }
        for e in &all {
            for f in &all {
                assert_eq!(exclusive(e, f), exclusive(f, e));
                if e.alice.is_none() && e.bob.unwrap().setting != f.bob.map_or(99, |l| l.setting) {
                    assert_eq!(exclusive(e, f), None);
                }
            }
        }
    }

    #[test]
    fn inequality_validation() {
        assert!(Inequality::parse("dup", 2, 2, &["00|00", "00|00"]).is_err());
        assert!(Inequality::parse("range", 2, 2, &["00|20"]).is_err());
        assert!(Inequality::parse("empty", 2, 2, &[]).is_err());
        assert!(Inequality::parse("zero", 0, 2, &["_0|_0"]).is_err());
        let iq = Inequality::from_terms("auto", vec![ev("11|20"), ev("_1|_1")]).unwrap();
        assert_eq!((iq.alice_settings, iq.bob_settings), (3, 2));
    }

    #[test]
    fn scenario_file_round_trip() {
        for name in BUILTIN_NAMES {
            let iq = builtin(name).unwrap();
            let back = Inequality::from_json(&iq.to_json()).unwrap();
            assert_eq!(back.terms, iq.terms);
            assert_eq!(back.name, name);
        }
        let text = r#"{"alice_settings": 2, "bob_settings": 2, "name": "x",
            "terms": [{"alice": [0, 0], "bob": [0, 0]}, {"alice": null, "bob": [0, 1]}]}"#;
        let iq = Inequality::from_json(text).unwrap();
        assert_eq!(iq.terms, vec![ev("00|00"), ev("_1|_0")]);
        let bad = r#"{"alice_settings": 2, "bob_settings": 2, "terms": [{"alice": null, "bob": null}]}"#;
        assert!(Inequality::from_json(bad).is_err());
        assert!(Inequality::from_json("{").is_err());
    }

    #[test]
    fn pentagon_graphs() {
        let c5 = cycle(5).unwrap();
        for name in ["pentagon-1", "pentagon-2", "pentagon-3"] {
            let (g, typed) = exclusivity_graph(&builtin(name).unwrap());
            assert_eq!(g, c5, "{name}");
            assert_eq!(typed.len(), 5);
        }
        let (_, typed) = exclusivity_graph(&builtin("pentagon-1").unwrap());
        let kinds: Vec<EdgeKind> = typed.iter().map(|t| t.kind).collect();
        // (0,1) A, (0,4) AB, (1,2) B, (2,3) A, (3,4) B
        assert_eq!(kinds, vec![EdgeKind::A, EdgeKind::AB, EdgeKind::B, EdgeKind::A, EdgeKind::B]);
    }

    #[test]
    fn chsh_graph_is_circulant() {
        let (g, _) = exclusivity_graph(&builtin("chsh-prob").unwrap());
        assert_eq!(g.order(), 8);
        let perm = is_isomorphic(&g, &circulant(8, &[1, 4]).unwrap()).unwrap();
        assert!(perm.is_some());
    }

    #[test]
    fn i3322_contains_an_induced_pentagon() {
        let iq = builtin("i3322").unwrap();
        let (g, _) = exclusivity_graph(&iq);
        let m = find_induced(&cycle(5).unwrap(), &g).unwrap().expect("induced C5");
        let mut found: Vec<usize> = m.clone();
        found.sort_unstable();
        // The witness quoted for I3322.
        let witness: Vec<usize> =
            ["11|00", "00|10", "10|11", "11|01", "00|02"].iter().map(|s| iq.terms.iter().position(|e| *e == ev(s)).unwrap()).collect();
        let sub = |idx: &[usize]| {
            let mut h = Graph::empty(5);
            for a in 0..5 {
                for b in (a + 1)..5 {
                    if g.has_edge(idx[a], idx[b]) {
                        h.add_edge(a, b);
                    }
                }
            }
            h
        };
        assert_eq!(sub(&witness), cycle(5).unwrap());
        assert_eq!(sub(&m), cycle(5).unwrap());
    }

    #[test]
    fn lhv_examples() {
        for (name, a, b, expected) in [
            ("pentagon-1", 2, 2, 2),
            ("pentagon-2", 2, 2, 2),
            ("pentagon-3", 3, 2, 2),
            ("chsh-prob", 2, 2, 3),
            ("i3322", 3, 3, 4),
        ] {
            let iq = builtin(name).unwrap();
            let (value, witness) = lhv_bound(&iq, a, b).unwrap();
            assert_eq!(value, expected, "{name}");
            assert_eq!(witness.count(&iq), value);
        }
    }

    #[test]
    fn lhv_matches_alpha_on_pentagons_and_chsh() {
        for name in ["pentagon-1", "pentagon-2", "pentagon-3", "chsh-prob"] {
            let iq = builtin(name).unwrap();
            let (g, _) = exclusivity_graph(&iq);
            let (value, _) = lhv_bound(&iq, iq.alice_settings, iq.bob_settings).unwrap();
            assert_eq!(value, independence_number(&g).unwrap().size, "{name}");
        }
    }

    #[test]
    fn lhv_envelope() {
        let iq = builtin("pentagon-3").unwrap();
        assert!(matches!(lhv_bound(&iq, 5, 2), Err(Error::Capacity(_))));
        assert!(matches!(lhv_bound(&iq, 2, 2), Err(Error::InvalidInput(_))));
        let (v, _) = lhv_bound(&iq, 4, 4).unwrap();
        assert_eq!(v, 2);
    }

    #[test]
    fn evaluate_uniform() {
        let u = Behavior::uniform(2, 2);
        assert!((evaluate(&builtin("pentagon-1").unwrap(), &u).unwrap() - 1.25).abs() < 1e-15);
        assert!((evaluate(&builtin("pentagon-2").unwrap(), &u).unwrap() - 1.5).abs() < 1e-15);
        assert!(evaluate(&builtin("pentagon-3").unwrap(), &u).is_err());
    }
}
