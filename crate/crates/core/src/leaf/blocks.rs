//! Block decomposition along a horizontal arc.
//!
//! The complex is cut along every singularity extension toward the arc and
//! then along the arc itself. Nothing is rebuilt: an extension is a finite
//! union of vertical segments, so the cut is recorded as the set of band
//! coordinates it passes through, and blocks are read off from the strips
//! between consecutive cuts. Strips belong to the same block when two of
//! their bases overlap in positive length on the same side of the arc.

use super::transversal::{realize, sides, Sign, Transversal};
use crate::complex::{BandComplex, BandId, ComponentId, DPoint, Side};
use crate::error::Result;
use crate::rational::{self, Rational};
use crate::rips::Interval;
use crate::sweep::SupportIndex;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

pub const DEFAULT_EXTENSION_BUDGET: usize = 100_000;

/// A vertical slice `[t_lo, t_hi]` of a band of the original complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strip {
    pub band: BandId,
    #[serde(with = "rational::serde_str")]
    pub t_lo: Rational,
    #[serde(with = "rational::serde_str")]
    pub t_hi: Rational,
}

impl Strip {
    pub fn width(&self) -> Rational {
        &self.t_hi - &self.t_lo
    }
}

/// A base with nothing else attached to it. `sign` is set when it lies on
/// the arc (the arm is bound) and names the side it is on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arm {
    pub strip: usize,
    pub side: Side,
    pub base: Interval,
    pub sign: Option<Sign>,
}

impl Arm {
    pub fn is_bound(&self) -> bool {
        self.sign.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingArc {
    pub arc: Interval,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub strips: Vec<Strip>,
    pub arms: Vec<Arm>,
    pub binding_arcs: Vec<BindingArc>,
    pub is_product: bool,
    #[serde(with = "rational::serde_str")]
    pub excess: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub transversal: Transversal,
    /// The arc as a support interval of the cut-and-subdivided complex.
    pub sigma: Interval,
    pub blocks: Vec<Block>,
    pub extensions: usize,
    /// Singular points whose extension exceeded the budget; they are not cut.
    pub unresolved: Vec<DPoint>,
}

impl BlockDecomposition {
    pub fn all_product(&self) -> bool {
        self.blocks.iter().all(|b| b.is_product)
    }
}

fn in_open_arc(sigma: &Interval, p: &DPoint) -> bool {
    p.component == sigma.component && p.x > sigma.lo && p.x < sigma.hi
}

/// Follows the component of `L \ (sigma° ∪ sing L)` that starts with the
/// vertical segment `first`; `Err` holds what was seen when the budget ran out.
fn extension(
    index: &SupportIndex,
    sigma: &Interval,
    first: (BandId, Rational),
    budget: usize,
) -> std::result::Result<Vec<(BandId, Rational)>, Vec<(BandId, Rational)>> {
    let mut edges = vec![first.clone()];
    let mut seen: HashSet<(BandId, Rational)> = HashSet::from([first.clone()]);
    let mut queue = VecDeque::from([first]);
    while let Some((band, t)) = queue.pop_front() {
        for side in Side::BOTH {
            let (comp, off) = index.attachment(band, side);
            let p = DPoint::new(*comp, off + &t);
            if in_open_arc(sigma, &p) || index.is_breakpoint(&p) {
                continue;
            }
            for r in index.at_point(&p) {
                let e = (r.band, &p.x - &r.lo);
                if seen.insert(e.clone()) {
                    if edges.len() >= budget {
                        edges.push(e);
                        return Err(edges);
                    }
                    edges.push(e.clone());
                    queue.push_back(e);
                }
            }
        }
    }
    Ok(edges)
}

/// Blocks of the complex cut along `sigma` and along every singularity
/// extension toward it. Extensions are searched up to `budget` vertical
/// segments each; longer ones are reported in `unresolved` and left uncut.
pub fn block_decomposition(c: &BandComplex, sigma: &Transversal, budget: usize) -> Result<BlockDecomposition> {
    let real = realize(c, sigma)?;
    let y = &real.complex;
    let index = SupportIndex::new(y);
    let labels = sides(&index, &real.sigma)?;
    let s = &real.sigma;

    let widths: BTreeMap<BandId, Rational> = y.bands().iter().map(|b| (b.id, b.width.clone())).collect();
    let mut cuts: BTreeMap<BandId, BTreeSet<Rational>> = BTreeMap::new();
    let mut done: HashSet<(BandId, Rational)> = HashSet::new();
    let mut extensions = 0;
    let mut unresolved = Vec::new();
    for k in y.components() {
        for x in index.breakpoints(k.id) {
            let p = DPoint::new(k.id, x.clone());
            let starts: Vec<(BandId, Rational)> = index
                .at_point(&p)
                .map(|r| (r.band, x - &r.lo))
                .filter(|(b, t)| t.is_positive() && *t < widths[b])
                .collect();
            for e in starts {
                if done.contains(&e) {
                    continue;
                }
                match extension(&index, s, e, budget) {
                    Ok(edges) => {
                        extensions += 1;
                        for (b, t) in edges {
                            cuts.entry(b).or_default().insert(t.clone());
                            done.insert((b, t));
                        }
                    }
                    Err(edges) => {
                        unresolved.push(p.clone());
                        done.extend(edges);
                    }
                }
            }
        }
    }

    // strips of positive width, with their bases
    struct Piece {
        band: BandId,
        t_lo: Rational,
        t_hi: Rational,
    }
    let mut pieces = Vec::new();
    for b in y.bands().iter().filter(|b| b.width.is_positive()) {
        let mut start = Rational::zero();
        let inner = cuts.get(&b.id).into_iter().flatten().cloned();
        for stop in inner.chain(std::iter::once(b.width.clone())) {
            pieces.push(Piece {
                band: b.id,
                t_lo: start.clone(),
                t_hi: stop.clone(),
            });
            start = stop;
        }
    }
    // base node i = 2 * piece + side
    let mut groups: BTreeMap<(ComponentId, Option<Sign>), Vec<(usize, Rational, Rational)>> = BTreeMap::new();
    for (i, p) in pieces.iter().enumerate() {
        for side in Side::BOTH {
            let (comp, off) = index.attachment(p.band, side);
            let lo = off + &p.t_lo;
            let hi = off + &p.t_hi;
            let on_arc = *comp == s.component && lo < s.hi && hi > s.lo;
            let sign = if on_arc { labels.get(&(p.band, side)).copied() } else { None };
            groups.entry((*comp, sign)).or_default().push((2 * i + side.index(), lo, hi));
        }
    }
    let n = 2 * pieces.len();
    let mut clusters = UnionFind::new(n);
    for members in groups.values_mut() {
        members.sort_by(|a, b| a.1.cmp(&b.1));
        // sweep: overlap in positive length with the running cluster
        let mut reach: Option<(usize, Rational)> = None;
        for (node, lo, hi) in members.iter() {
            match &mut reach {
                Some((first, end)) if lo < end => {
                    clusters.union(*first, *node);
                    if hi > end {
                        *end = hi.clone();
                    }
                }
                _ => reach = Some((*node, hi.clone())),
            }
        }
    }
    let mut blocks_uf = clusters.clone();
    for i in 0..pieces.len() {
        blocks_uf.union(2 * i, 2 * i + 1);
    }

    // node -> (group, interval)
    let mut node_info: Vec<Option<(Option<Sign>, ComponentId, Rational, Rational)>> = vec![None; n];
    for ((comp, sign), members) in &groups {
        for (node, lo, hi) in members {
            node_info[*node] = Some((*sign, *comp, lo.clone(), hi.clone()));
        }
    }
    let mut by_block: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..pieces.len() {
        by_block.entry(blocks_uf.find(2 * i)).or_default().push(i);
    }
    let mut blocks = Vec::new();
    for strips in by_block.values() {
        let local: BTreeMap<usize, usize> = strips.iter().enumerate().map(|(j, &i)| (i, j)).collect();
        let mut cluster_nodes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in strips {
            for node in [2 * i, 2 * i + 1] {
                cluster_nodes.entry(clusters.find(node)).or_default().push(node);
            }
        }
        let mut support = Rational::zero();
        let mut product = strips.iter().all(|&i| pieces[i].t_hi.clone() - &pieces[i].t_lo == pieces[strips[0]].t_hi.clone() - &pieces[strips[0]].t_lo);
        let mut arms = Vec::new();
        for nodes in cluster_nodes.values() {
            let infos: Vec<_> = nodes.iter().map(|&v| node_info[v].clone().expect("every node is grouped")).collect();
            let lo = infos.iter().map(|x| x.2.clone()).min().unwrap();
            let hi = infos.iter().map(|x| x.3.clone()).max().unwrap();
            support += &hi - &lo;
            if infos.iter().any(|x| x.2 != lo || x.3 != hi) {
                product = false;
            }
            if let [only] = nodes.as_slice() {
                let (sign, comp, lo, hi) = infos[0].clone();
                arms.push(Arm {
                    strip: local[&(only / 2)],
                    side: if only % 2 == 0 { Side::Base0 } else { Side::Base1 },
                    base: Interval { component: comp, lo, hi },
                    sign,
                });
            }
        }
        let width: Rational = strips.iter().map(|&i| &pieces[i].t_hi - &pieces[i].t_lo).sum();
        let binding_arcs = arms
            .iter()
            .filter_map(|a| a.sign.map(|sign| BindingArc { arc: a.base.clone(), sign }))
            .collect();
        blocks.push(Block {
            strips: strips
                .iter()
                .map(|&i| {
                    let (band, shift) = &real.origin[&pieces[i].band];
                    Strip {
                        band: *band,
                        t_lo: shift + &pieces[i].t_lo,
                        t_hi: shift + &pieces[i].t_hi,
                    }
                })
                .collect(),
            arms,
            binding_arcs,
            is_product: product,
            excess: width - support,
        });
    }
    blocks.sort_by(|a, b| (a.strips[0].band, &a.strips[0].t_lo).cmp(&(b.strips[0].band, &b.strips[0].t_lo)));
    Ok(BlockDecomposition {
        transversal: sigma.clone(),
        sigma: real.sigma.clone(),
        blocks,
        extensions,
        unresolved,
    })
}

#[derive(Clone)]
struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::ComplexBuilder;
    use crate::fixtures;
    use crate::rational::{int, rat};

    fn whole(len: Rational) -> Transversal {
        Transversal::Support {
            component: ComponentId(0),
            lo: int(0),
            hi: len,
        }
    }

    fn weight(a: &BindingArc) -> Rational {
        a.arc.length()
    }

    #[test]
    fn rotation_blocks_are_products() {
        let d = block_decomposition(&fixtures::rotation(rat(1, 3)), &whole(int(1)), 1000).unwrap();
        assert!(d.unresolved.is_empty());
        assert_eq!(d.blocks.len(), 3);
        for b in &d.blocks {
            assert!(b.is_product);
            assert_eq!(b.excess, rat(-1, 3));
            assert_eq!(b.binding_arcs.len(), 2);
            for a in &b.binding_arcs {
                assert_eq!(weight(a), -b.excess.clone());
            }
        }
    }

    #[test]
    fn annulus_band_arc_gives_one_product_block() {
        let t = Transversal::Band {
            band: BandId(0),
            lo: int(0),
            hi: int(1),
        };
        let d = block_decomposition(&fixtures::annulus(), &t, 1000).unwrap();
        assert_eq!(d.blocks.len(), 1);
        let b = &d.blocks[0];
        assert!(b.is_product);
        assert_eq!(b.excess, int(-1));
        assert_eq!(b.binding_arcs.len(), 2);
        assert!(b.binding_arcs.iter().all(|a| weight(a) == int(1)));
    }

    #[test]
    fn strips_map_back_to_original_bands() {
        let t = Transversal::Band {
            band: BandId(0),
            lo: rat(1, 4),
            hi: rat(1, 2),
        };
        let c = fixtures::rotation(rat(1, 3));
        let d = block_decomposition(&c, &t, 1000).unwrap();
        let mut total = BTreeMap::<BandId, Rational>::new();
        for b in &d.blocks {
            for s in &b.strips {
                *total.entry(s.band).or_insert_with(Rational::zero) += s.width();
            }
        }
        // the arc's band is subdivided, so its strips appear on both halves
        assert_eq!(total[&BandId(0)], rat(2, 3) + rat(1, 4));
        assert_eq!(total[&BandId(1)], rat(1, 3));
        // the rotation is not annulus-free: the leaves missing the arc form a
        // product block whose fibre is a circle, with excess 0 and no arms
        assert!(d.all_product());
        for b in &d.blocks {
            assert!(!b.excess.is_positive());
            if b.binding_arcs.is_empty() {
                assert!(b.excess.is_zero());
            }
            for a in &b.binding_arcs {
                assert_eq!(weight(a), -b.excess.clone());
            }
        }
    }

    #[test]
    fn long_extensions_are_reported_not_cut() {
        let c = ComplexBuilder::new()
            .component(int(100))
            .band(int(98), 0, int(1), 0, int(2))
            .band(int(1), 0, int(0), 0, int(1))
            .build()
            .unwrap();
        let t = Transversal::Support {
            component: ComponentId(0),
            lo: int(1),
            hi: int(2),
        };
        let small = block_decomposition(&c, &t, 5).unwrap();
        assert!(!small.unresolved.is_empty());
        let big = block_decomposition(&c, &t, 1000).unwrap();
        assert!(big.unresolved.is_empty());
    }
}
