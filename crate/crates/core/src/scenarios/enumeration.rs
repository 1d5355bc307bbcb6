//! Edge patterns of the pentagon and the search for every bipartite
//! inequality whose exclusivity graph is a pentagon.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use super::{exclusive, exclusivity_graph, lhv_bound, EdgeKind, Event, Inequality, Local, MAX_SETTINGS};
use crate::error::{Error, Result};
use crate::graphs::Graph;

/// An orbit of A/B edge labelings of the pentagon under rotation,
/// reflection and swapping the letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternClass {
    /// Lexicographically largest member (so it starts with B).
    pub representative: String,
    pub members: Vec<String>,
}

impl PatternClass {
    pub fn contains(&self, pattern: &str) -> bool {
        self.members.iter().any(|m| m == pattern)
    }

    /// A run of three equal labels around the cycle.
    pub fn has_triple_run(&self) -> bool {
        let doubled = format!("{0}{0}", self.representative);
        doubled.contains("BBB") || doubled.contains("AAA")
    }
}

fn pattern_orbit(pattern: &str) -> BTreeSet<String> {
    let chars: Vec<char> = pattern.chars().collect();
    let n = chars.len();
    let mut orbit = BTreeSet::new();
    for swap in [false, true] {
        for reflect in [false, true] {
            for shift in 0..n {
                let s: String = (0..n)
                    .map(|i| {
                        let k = if reflect { (n + shift - i) % n } else { (shift + i) % n };
                        let c = chars[k];
                        match (swap, c) {
                            (true, 'A') => 'B',
                            (true, _) => 'A',
                            (false, c) => c,
                        }
                    })
                    .collect();
                orbit.insert(s);
            }
        }
    }
    orbit
}

/// Representative of the class containing `pattern` (five letters, A or B).
pub fn normalize_pattern(pattern: &str) -> Result<String> {
    if pattern.len() != 5 || !pattern.chars().all(|c| c == 'A' || c == 'B') {
        return Err(Error::invalid(format!("{pattern:?} is not a five-letter A/B edge pattern")));
    }
    Ok(pattern_orbit(pattern).into_iter().next_back().expect("non-empty orbit"))
}

/// All essentially different A/B edge labelings of the pentagon.
pub fn edge_patterns_c5() -> Vec<PatternClass> {
    let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for code in 0u32..32 {
        let s: String = (0..5).map(|i| if code >> i & 1 == 1 { 'A' } else { 'B' }).collect();
        let rep = normalize_pattern(&s).expect("well-formed");
        classes.entry(rep).or_default().insert(s);
    }
    classes
        .into_iter()
        .map(|(representative, members)| PatternClass { representative, members: members.into_iter().collect() })
        .collect()
}

/// Pattern classes that can come from two separated parties. Three
/// consecutive edges of one party's type force a chord, so any class with
/// a triple run is dropped.
pub fn feasible_patterns() -> Vec<PatternClass> {
    edge_patterns_c5().into_iter().filter(|c| !c.has_triple_run()).collect()
}

/// Vertex order around a 5-cycle, starting at 0 and stepping to its lower
/// neighbor; `None` when `g` is not a pentagon.
pub fn pentagon_order(g: &Graph) -> Option<Vec<usize>> {
    if g.order() != 5 || (0..5).any(|v| g.degree(v) != 2) {
        return None;
    }
    let mut order = vec![0usize];
    let mut prev = usize::MAX;
    let mut cur = 0;
    for _ in 0..4 {
        let next = (0..5).find(|&w| g.has_edge(cur, w) && w != prev && !order.contains(&w))?;
        order.push(next);
        prev = cur;
        cur = next;
    }
    g.has_edge(cur, 0).then_some(order)
}

/// Pattern classes consistent with a pentagonal inequality's typed edges,
/// reading each AB edge either as A or as B.
pub fn edge_pattern_classes(iq: &Inequality) -> Result<BTreeSet<String>> {
    let (g, typed) = exclusivity_graph(iq);
    let order = pentagon_order(&g).ok_or_else(|| Error::invalid(format!("{} is not pentagonal", iq.name)))?;
    let kind = |u: usize, v: usize| {
        typed.iter().find(|t| (t.u, t.v) == (u.min(v), u.max(v))).map(|t| t.kind).expect("cycle edge")
    };
    let kinds: Vec<EdgeKind> = (0..5).map(|i| kind(order[i], order[(i + 1) % 5])).collect();
    let mut out = BTreeSet::new();
    for choice in 0u32..32 {
        let s: String = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| match k {
                EdgeKind::A => 'A',
                EdgeKind::B => 'B',
                EdgeKind::AB => if choice >> i & 1 == 1 { 'A' } else { 'B' },
            })
            .collect();
        out.insert(normalize_pattern(&s)?);
    }
    Ok(out)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn used_settings(terms: &[Event], side: fn(&Event) -> Option<Local>) -> Vec<u8> {
    let set: BTreeSet<u8> = terms.iter().filter_map(side).map(|l| l.setting).collect();
    set.into_iter().collect()
}

/// Canonical form of a term set under swapping the parties, permuting each
/// party's settings, and flipping outcomes per party and setting. Settings
/// are relabeled onto `0..k`, so unused indices never matter.
pub fn canonicalize(terms: &[Event]) -> Vec<Event> {
    let mut best: Option<Vec<Event>> = None;
    for swap in [false, true] {
        let base: Vec<Event> = terms.iter().map(|e| if swap { e.swap_parties() } else { *e }).collect();
        let used_a = used_settings(&base, |e| e.alice);
        let used_b = used_settings(&base, |e| e.bob);
        let perms_a = permutations(used_a.len());
        let perms_b = permutations(used_b.len());
        let relabel = |l: Option<Local>, used: &[u8], perm: &[usize], flips: u32| {
            l.map(|l| {
                let k = used.iter().position(|&s| s == l.setting).expect("used setting");
                Local::new(perm[k] as u8, l.outcome ^ (flips >> k & 1) as u8)
            })
        };
        for pa in &perms_a {
            for pb in &perms_b {
                for fa in 0u32..1 << used_a.len() {
                    for fb in 0u32..1 << used_b.len() {
                        let mut image: Vec<Event> = base
                            .iter()
                            .map(|e| Event {
                                alice: relabel(e.alice, &used_a, pa, fa),
                                bob: relabel(e.bob, &used_b, pb, fb),
                            })
                            .collect();
                        image.sort_unstable();
                        if best.as_ref().is_none_or(|b| image < *b) {
                            best = Some(image);
                        }
                    }
                }
            }
        }
    }
    best.unwrap_or_default()
}

fn event_universe(max_alice: usize, max_bob: usize) -> Vec<Event> {
    let mut out = Vec::new();
    for x in 0..max_alice as u8 {
        for a in 0..2 {
            out.push(Event::alice_only(a, x));
            for y in 0..max_bob as u8 {
                for b in 0..2 {
                    out.push(Event::joint(a, b, x, y));
                }
            }
        }
    }
    for y in 0..max_bob as u8 {
        for b in 0..2 {
            out.push(Event::bob_only(b, y));
        }
    }
    out
}

/// Every inequality, up to equivalence, whose five terms have a pentagon
/// as exclusivity graph. Single-party (wildcard) events are allowed.
pub fn enumerate_pentagonal(max_alice: usize, max_bob: usize) -> Result<Vec<Inequality>> {
    if max_alice == 0 || max_bob == 0 || max_alice > MAX_SETTINGS || max_bob > MAX_SETTINGS {
        return Err(Error::invalid(format!("setting limits must lie in [1, {MAX_SETTINGS}]")));
    }
    let events = event_universe(max_alice, max_bob);
    let n = events.len();
    let adj: Vec<Vec<bool>> =
        events.iter().map(|e| events.iter().map(|f| exclusive(e, f).is_some()).collect()).collect();

    // Cycles v0-v1-v2-v3-v4-v0 with v0 the smallest index and v1 < v4, so
    // each vertex set is met once per its unique pentagon structure.
    let classes: BTreeSet<Vec<Event>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|v0| {
            let mut found = Vec::new();
            for v1 in (v0 + 1)..n {
                if !adj[v0][v1] {
                    continue;
                }
                for v2 in (v0 + 1)..n {
                    if v2 == v1 || !adj[v1][v2] || adj[v0][v2] {
                        continue;
                    }
                    for v3 in (v0 + 1)..n {
                        if v3 == v1 || v3 == v2 || !adj[v2][v3] || adj[v0][v3] || adj[v1][v3] {
                            continue;
                        }
                        for v4 in (v1 + 1)..n {
                            if v4 == v2 || v4 == v3 || !adj[v3][v4] || !adj[v4][v0] || adj[v4][v1] || adj[v4][v2] {
                                continue;
                            }
                            found.push(canonicalize(&[events[v0], events[v1], events[v2], events[v3], events[v4]]));
                        }
                    }
                }
            }
            found
        })
        .collect();

    classes
        .into_iter()
        .enumerate()
        .map(|(k, terms)| {
            let iq = Inequality::from_terms(format!("pentagonal-{}", k + 1), terms)?;
            let (lhv, _) = lhv_bound(&iq, iq.alice_settings, iq.bob_settings)?;
            Ok(iq.with_bounds(lhv as f64, None))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::builtin;
    use super::*;
    use crate::graphs::{cycle, independence_number};

    #[test]
    fn four_pattern_classes() {
        let classes = edge_patterns_c5();
        let reps: Vec<&str> = classes.iter().map(|c| c.representative.as_str()).collect();
        assert_eq!(reps, vec!["BBABA", "BBBAA", "BBBBA", "BBBBB"]);
        assert_eq!(classes.iter().map(|c| c.members.len()).sum::<usize>(), 32);
        let all_b = classes.iter().find(|c| c.contains("BBBBB")).unwrap();
        assert_eq!(all_b.members, vec!["AAAAA", "BBBBB"]);
        assert!(classes.iter().find(|c| c.contains("BABAB")).unwrap().contains("AABAB"));
        assert_eq!(normalize_pattern("AABAB").unwrap(), normalize_pattern("BABAB").unwrap());
        assert!(normalize_pattern("ABAB").is_err());
        assert!(normalize_pattern("ABABC").is_err());
    }

    #[test]
    fn only_alternating_class_is_feasible() {
        let feasible = feasible_patterns();
        assert_eq!(feasible.len(), 1);
        assert_eq!(feasible[0].representative, "BBABA");
        let all = edge_patterns_c5();
        assert!(all.iter().find(|c| c.contains("BBBAA")).unwrap().has_triple_run());
        assert!(all.iter().find(|c| c.contains("BBBBB")).unwrap().has_triple_run());
    }

    #[test]
    fn paper_pentagons_realize_the_feasible_pattern() {
        for name in ["pentagon-1", "pentagon-2", "pentagon-3"] {
            let classes = edge_pattern_classes(&builtin(name).unwrap()).unwrap();
            assert!(classes.contains("BBABA"), "{name}: {classes:?}");
        }
    }

    #[test]
    fn pentagon_order_walks_the_cycle() {
        let g = cycle(5).unwrap().permute(&[2, 4, 1, 3, 0]);
        let order = pentagon_order(&g).unwrap();
        for i in 0..5 {
            assert!(g.has_edge(order[i], order[(i + 1) % 5]));
        }
        assert_eq!(pentagon_order(&Graph::path(5)), None);
    }

    #[test]
    fn canonical_forms() {
        let eq2 = canonicalize(&builtin("pentagon-1").unwrap().terms);
        let eq3 = canonicalize(&builtin("pentagon-2").unwrap().terms);
        let eq4 = canonicalize(&builtin("pentagon-3").unwrap().terms);
        assert_ne!(eq2, eq3);
        assert_ne!(eq2, eq4);
        assert_ne!(eq3, eq4);
        // Settings 2 and 3 are interchangeable labels.
        let moved = Inequality::parse("x", 4, 2, &["00|00", "11|01", "10|11", "00|10", "11|30"]).unwrap();
        assert_eq!(canonicalize(&moved.terms), eq4);
        assert_eq!(canonicalize(&eq4), eq4);
    }

    #[test]
    fn exactly_three_pentagonal_inequalities() {
        let found = enumerate_pentagonal(3, 3).unwrap();
        assert_eq!(found.len(), 3);
        let c5 = cycle(5).unwrap();
        let mut canon: Vec<Vec<Event>> = Vec::new();
        for iq in &found {
            let (g, _) = exclusivity_graph(iq);
            assert!(pentagon_order(&g).is_some());
            assert_eq!(independence_number(&g).unwrap().size, 2);
            assert_eq!(iq.bounds.unwrap().lhv, 2.0);
            assert_eq!(canonicalize(&iq.terms), iq.terms);
            assert!(crate::graphs::is_isomorphic(&g, &c5).unwrap().is_some());
            canon.push(iq.terms.clone());
        }
        for name in ["pentagon-1", "pentagon-2", "pentagon-3"] {
            let c = canonicalize(&builtin(name).unwrap().terms);
            assert!(canon.contains(&c), "{name}");
        }
        let variant = Inequality::parse("v", 2, 2, &["00|00", "11|01", "10|11", "00|10", "11|10"]).unwrap();
        assert!(canon.contains(&canonicalize(&variant.terms)));
    }

    #[test]
    fn permutation_helper() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(3).len(), 6);
        let set: BTreeSet<Vec<usize>> = permutations(4).into_iter().collect();
        assert_eq!(set.len(), 24);
    }
}
