//! Isomorphism of band complexes up to a transverse rescaling.
//!
//! Two complexes are matched combinatorially: a bijection of components
//! preserving (scaled) lengths and a bijection of bands preserving widths,
//! band lengths and base positions. A band may be matched upside down, since
//! flipping a band vertically preserves `dx`. Candidate component maps are
//! narrowed by colour refinement and then searched by backtracking; complexes
//! here are small.

use crate::complex::{BandComplex, BandId, ComponentId, Side};
use crate::rational::{self, Rational};
use num_traits::One;
use std::collections::BTreeMap;

/// Witness of `isomorphic(a, b, scale)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoWitness {
    pub components: BTreeMap<ComponentId, ComponentId>,
    /// `a`-band to `b`-band, with `true` when base0 of the `a` band lands on
    /// base1 of the `b` band.
    pub bands: BTreeMap<BandId, (BandId, bool)>,
}

/// Scale-1 isomorphism.
pub fn isomorphic(a: &BandComplex, b: &BandComplex) -> Option<IsoWitness> {
    isomorphic_scaled(a, b, &Rational::one())
}

/// Is `b` isomorphic to `a` after multiplying all of `a`'s transverse data by
/// `scale`? Enhanced complexes must additionally agree on band lengths.
pub fn isomorphic_scaled(a: &BandComplex, b: &BandComplex, scale: &Rational) -> Option<IsoWitness> {
    if a.components().len() != b.components().len()
        || a.bands().len() != b.bands().len()
        || a.is_enhanced() != b.is_enhanced()
    {
        return None;
    }
    let a = a.scaled(scale);
    let mut refined = refine(&[&a, b]).into_iter();
    let (colours_a, _) = refined.next().unwrap();
    let (colours_b, _) = refined.next().unwrap();
    let mut hist_a: Vec<u32> = colours_a.values().copied().collect();
    let mut hist_b: Vec<u32> = colours_b.values().copied().collect();
    hist_a.sort_unstable();
    hist_b.sort_unstable();
    if hist_a != hist_b {
        return None;
    }

    let ea = Edges::of(&a);
    let eb = Edges::of(b);
    if ea.band_multiset() != eb.band_multiset() {
        return None;
    }

    // Assign the rarest colours first.
    let mut order: Vec<ComponentId> = a.components().iter().map(|c| c.id).collect();
    let class_size = |c: &ComponentId| hist_a.iter().filter(|&&x| x == colours_a[c]).count();
    order.sort_by_key(|c| (class_size(c), *c));

    let mut state = Search {
        a: &ea,
        b: &eb,
        colours_a: &colours_a,
        colours_b: &colours_b,
        order: &order,
        forward: BTreeMap::new(),
        used: BTreeMap::new(),
    };
    if !state.assign(0) {
        return None;
    }
    let bands = match_bands(&ea, &eb, &state.forward)?;
    Some(IsoWitness {
        components: state.forward,
        bands,
    })
}

fn fmt_opt(r: &Option<Rational>) -> String {
    r.as_ref().map_or_else(|| "-".to_string(), rational::format)
}

type Colouring = BTreeMap<ComponentId, u32>;

/// Colour refinement on components, run jointly on several complexes. After
/// every round colours are renamed by the rank of their signature among all
/// signatures seen, so colours are comparable across the complexes and do not
/// depend on ids.
fn refine(complexes: &[&BandComplex]) -> Vec<(Colouring, Vec<String>)> {
    let mut names: Vec<Vec<String>> = complexes
        .iter()
        .map(|c| {
            c.components()
                .iter()
                .map(|k| format!("L{}", rational::format(&k.length)))
                .collect()
        })
        .collect();
    let mut colours = rank(complexes, &names);
    let max_rounds = complexes.iter().map(|c| c.components().len()).max().unwrap_or(0).max(1);
    let mut classes = count_classes(&colours);
    for _ in 0..max_rounds {
        names = complexes
            .iter()
            .zip(&colours)
            .map(|(c, colour)| {
                let mut sig: BTreeMap<ComponentId, Vec<String>> =
                    c.components().iter().map(|k| (k.id, Vec::new())).collect();
                for band in c.bands() {
                    for side in Side::BOTH {
                        let here = band.base(side);
                        let there = band.base(side.other());
                        sig.get_mut(&here.component).unwrap().push(format!(
                            "{}|{}|{}|{}|{}",
                            rational::format(&here.offset),
                            rational::format(&band.width),
                            fmt_opt(&band.length),
                            colour[&there.component],
                            rational::format(&there.offset)
                        ));
                    }
                }
                sig.into_iter()
                    .map(|(id, mut entries)| {
                        entries.sort();
                        format!("{}[{}]", colour[&id], entries.join(";"))
                    })
                    .collect()
            })
            .collect();
        let next = rank(complexes, &names);
        let n = count_classes(&next);
        colours = next;
        if n == classes {
            break;
        }
        classes = n;
    }
    colours.into_iter().zip(names).collect()
}

fn rank(complexes: &[&BandComplex], names: &[Vec<String>]) -> Vec<Colouring> {
    let mut all: Vec<&String> = names.iter().flatten().collect();
    all.sort();
    all.dedup();
    complexes
        .iter()
        .zip(names)
        .map(|(c, ns)| {
            c.components()
                .iter()
                .zip(ns)
                .map(|(k, n)| (k.id, all.binary_search(&n).unwrap() as u32))
                .collect()
        })
        .collect()
}

fn count_classes(colours: &[Colouring]) -> usize {
    colours.iter().map(count_classes_one).sum()
}

fn count_classes_one(colour: &Colouring) -> usize {
    let mut v: Vec<u32> = colour.values().copied().collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

type Key = (Rational, Option<Rational>);

struct Edge {
    band: BandId,
    width: Rational,
    length: Option<Rational>,
    ends: [(ComponentId, Rational); 2],
}

struct Edges {
    edges: Vec<Edge>,
    by_component: BTreeMap<ComponentId, Vec<usize>>,
}

impl Edges {
    fn of(c: &BandComplex) -> Self {
        let mut by_component: BTreeMap<ComponentId, Vec<usize>> =
            c.components().iter().map(|k| (k.id, Vec::new())).collect();
        let edges: Vec<Edge> = c
            .bands()
            .iter()
            .map(|b| Edge {
                band: b.id,
                width: b.width.clone(),
                length: b.length.clone(),
                ends: [
                    (b.base0.component, b.base0.offset.clone()),
                    (b.base1.component, b.base1.offset.clone()),
                ],
            })
            .collect();
        for (i, e) in edges.iter().enumerate() {
            by_component.get_mut(&e.ends[0].0).unwrap().push(i);
            if e.ends[1].0 != e.ends[0].0 {
                by_component.get_mut(&e.ends[1].0).unwrap().push(i);
            }
        }
        Edges {
            edges,
            by_component,
        }
    }

    fn band_multiset(&self) -> Vec<Key> {
        let mut v: Vec<Key> = self
            .edges
            .iter()
            .map(|e| (e.width.clone(), e.length.clone()))
            .collect();
        v.sort();
        v
    }
}

/// Canonical (unordered) image of an edge under a partial component map, or
/// `None` if an endpoint is unmapped.
fn image(e: &Edge, map: &BTreeMap<ComponentId, ComponentId>) -> Option<EdgeKey> {
    let p = (*map.get(&e.ends[0].0)?, e.ends[0].1.clone());
    let q = (*map.get(&e.ends[1].0)?, e.ends[1].1.clone());
    Some(edge_key(e, p, q))
}

type EdgeKey = (Rational, Option<Rational>, (ComponentId, Rational), (ComponentId, Rational));

fn edge_key(e: &Edge, p: (ComponentId, Rational), q: (ComponentId, Rational)) -> EdgeKey {
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    (e.width.clone(), e.length.clone(), p, q)
}

fn own_key(e: &Edge) -> EdgeKey {
    edge_key(e, e.ends[0].clone(), e.ends[1].clone())
}

struct Search<'a> {
    a: &'a Edges,
    b: &'a Edges,
    colours_a: &'a BTreeMap<ComponentId, u32>,
    colours_b: &'a BTreeMap<ComponentId, u32>,
    order: &'a [ComponentId],
    forward: BTreeMap<ComponentId, ComponentId>,
    used: BTreeMap<ComponentId, ComponentId>,
}

impl Search<'_> {
    fn assign(&mut self, depth: usize) -> bool {
        let Some(&ka) = self.order.get(depth) else {
            return true;
        };
        let want = self.colours_a[&ka];
        let candidates: Vec<ComponentId> = self
            .colours_b
            .iter()
            .filter(|(kb, &c)| c == want && !self.used.contains_key(kb))
            .map(|(kb, _)| *kb)
            .collect();
        for kb in candidates {
            self.forward.insert(ka, kb);
            self.used.insert(kb, ka);
            if self.consistent(ka, kb) && self.assign(depth + 1) {
                return true;
            }
            self.forward.remove(&ka);
            self.used.remove(&kb);
        }
        false
    }

    /// Bands incident to `ka` whose other end is already mapped must match
    /// bands incident to `kb` whose other end is already used.
    fn consistent(&self, ka: ComponentId, kb: ComponentId) -> bool {
        let mut from_a: Vec<EdgeKey> = self.a.by_component[&ka]
            .iter()
            .filter_map(|&i| image(&self.a.edges[i], &self.forward))
            .collect();
        let mut from_b: Vec<EdgeKey> = self.b.by_component[&kb]
            .iter()
            .map(|&i| &self.b.edges[i])
            .filter(|e| self.used.contains_key(&e.ends[0].0) && self.used.contains_key(&e.ends[1].0))
            .map(own_key)
            .collect();
        from_a.sort();
        from_b.sort();
        from_a == from_b
    }
}

fn match_bands(
    a: &Edges,
    b: &Edges,
    map: &BTreeMap<ComponentId, ComponentId>,
) -> Option<BTreeMap<BandId, (BandId, bool)>> {
    let mut pool: BTreeMap<EdgeKey, Vec<&Edge>> = BTreeMap::new();
    for e in &b.edges {
        pool.entry(own_key(e)).or_default().push(e);
    }
    let mut out = BTreeMap::new();
    for e in &a.edges {
        let key = image(e, map)?;
        let target = pool.get_mut(&key)?.pop()?;
        let p0 = (map[&e.ends[0].0], e.ends[0].1.clone());
        let flipped = p0 != target.ends[0];
        out.insert(e.band, (target.band, flipped));
    }
    Some(out)
}

/// A cheap isomorphism invariant, equal for isomorphic complexes, used to
/// bucket states before calling [`isomorphic`].
pub fn invariant_key(c: &BandComplex) -> String {
    let (_, names) = refine(&[c]).pop().unwrap();
    let mut parts = names;
    parts.sort_unstable();
    let mut widths: Vec<String> = c
        .bands()
        .iter()
        .map(|b| format!("{}x{}", rational::format(&b.width), fmt_opt(&b.length)))
        .collect();
    widths.sort();
    format!("{}#{}", widths.join(","), parts.join("/"))
}
