use crate::complex::{Band, BandComplex, BandId, BaseAttachment, Component, ComponentId, Side};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::rips::Interval;
use crate::sweep::SupportIndex;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet, VecDeque};

/// A horizontal arc: either a piece of the support or a piece of a band's
/// width range (taken at mid-height).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transversal {
    Support {
        component: ComponentId,
        #[serde(with = "rational::serde_str")]
        lo: Rational,
        #[serde(with = "rational::serde_str")]
        hi: Rational,
    },
    Band {
        band: BandId,
        #[serde(with = "rational::serde_str")]
        lo: Rational,
        #[serde(with = "rational::serde_str")]
        hi: Rational,
    },
}

/// The complex with the transversal made into a support interval whose ends
/// are base endpoints.
#[derive(Debug, Clone)]
pub struct Realized {
    pub complex: BandComplex,
    pub sigma: Interval,
    /// Band of the realized complex -> (band it came from, offset of its
    /// coordinate inside that band).
    pub origin: BTreeMap<BandId, (BandId, Rational)>,
}

/// Support arcs: every band is cut vertically where its bases meet the ends
/// of the arc. Band arcs: the band is cut at both ends of the arc and its
/// middle piece subdivided; the new component is the arc.
pub fn realize(c: &BandComplex, t: &Transversal) -> Result<Realized> {
    match t {
        Transversal::Support { component, lo, hi } => {
            let len = c.require_component(*component)?.length.clone();
            if lo.is_negative() || lo >= hi || hi > &len {
                return Err(Error::InvalidArc(format!(
                    "[{}, {}] is not a nondegenerate subinterval of [0, {}]",
                    rational::format(lo),
                    rational::format(hi),
                    rational::format(&len)
                )));
            }
            let mut next = c.next_band_id().0;
            let mut bands = Vec::new();
            let mut origin = BTreeMap::new();
            for b in c.bands() {
                let mut cuts: Vec<Rational> = Vec::new();
                for s in Side::BOTH {
                    let base = b.base(s);
                    if base.component != *component {
                        continue;
                    }
                    for end in [lo, hi] {
                        let at = end - &base.offset;
                        if at.is_positive() && at < b.width {
                            cuts.push(at);
                        }
                    }
                }
                cuts.sort();
                cuts.dedup();
                let mut start = Rational::zero();
                for (i, stop) in cuts.iter().chain(std::iter::once(&b.width)).enumerate() {
                    let id = if i == 0 {
                        b.id
                    } else {
                        next += 1;
                        BandId(next - 1)
                    };
                    bands.push(Band {
                        id,
                        width: stop - &start,
                        base0: BaseAttachment::new(b.base0.component, &b.base0.offset + &start),
                        base1: BaseAttachment::new(b.base1.component, &b.base1.offset + &start),
                        length: b.length.clone(),
                        glue: if i == 0 { b.glue.clone() } else { None },
                    });
                    origin.insert(id, (b.id, start.clone()));
                    start = stop.clone();
                }
            }
            Ok(Realized {
                complex: BandComplex::from_parts_unchecked(c.components().to_vec(), bands, c.is_enhanced()),
                sigma: Interval {
                    component: *component,
                    lo: lo.clone(),
                    hi: hi.clone(),
                },
                origin,
            })
        }
        Transversal::Band { band, lo, hi } => {
            let b = c.require_band(*band)?.clone();
            if lo.is_negative() || lo >= hi || hi > &b.width {
                return Err(Error::InvalidArc(format!(
                    "[{}, {}] is not a nondegenerate subinterval of the width [0, {}]",
                    rational::format(lo),
                    rational::format(hi),
                    rational::format(&b.width)
                )));
            }
            let arc = c.next_component_id();
            let mut next = c.next_band_id().0;
            let mut fresh = || {
                next += 1;
                BandId(next - 1)
            };
            let mut bands: Vec<Band> = c.bands().iter().filter(|x| x.id != *band).cloned().collect();
            let mut origin: BTreeMap<BandId, (BandId, Rational)> =
                bands.iter().map(|x| (x.id, (x.id, Rational::zero()))).collect();
            let piece = |id: BandId, from: &Rational, to: &Rational| Band {
                id,
                width: to - from,
                base0: BaseAttachment::new(b.base0.component, &b.base0.offset + from),
                base1: BaseAttachment::new(b.base1.component, &b.base1.offset + from),
                length: b.length.clone(),
                glue: None,
            };
            let mut middle_id = b.id;
            if lo.is_positive() {
                bands.push(piece(b.id, &Rational::zero(), lo));
                origin.insert(b.id, (b.id, Rational::zero()));
                middle_id = fresh();
            }
            if hi < &b.width {
                let id = fresh();
                bands.push(piece(id, hi, &b.width));
                origin.insert(id, (b.id, hi.clone()));
            }
            let half = b.length.as_ref().map(|l| l / rational::int(2));
            let upper_id = fresh();
            bands.push(Band {
                id: middle_id,
                width: hi - lo,
                base0: BaseAttachment::new(b.base0.component, &b.base0.offset + lo),
                base1: BaseAttachment::new(arc, Rational::zero()),
                length: half.clone(),
                glue: None,
            });
            bands.push(Band {
                id: upper_id,
                width: hi - lo,
                base0: BaseAttachment::new(arc, Rational::zero()),
                base1: BaseAttachment::new(b.base1.component, &b.base1.offset + lo),
                length: half,
                glue: None,
            });
            origin.insert(middle_id, (b.id, lo.clone()));
            origin.insert(upper_id, (b.id, lo.clone()));
            let mut components = c.components().to_vec();
            components.push(Component {
                id: arc,
                length: hi - lo,
            });
            Ok(Realized {
                complex: BandComplex::from_parts_unchecked(components, bands, c.is_enhanced()),
                sigma: Interval {
                    component: arc,
                    lo: Rational::zero(),
                    hi: hi - lo,
                },
                origin,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Labels the two bases over each piece of `sigma` with a side. The first
/// piece takes `+` for its base-0 base when the two bases are of different
/// sides (for a band arc: leaving upward), otherwise for the smaller (band,
/// side); across each breakpoint a base that continues keeps its sign, and
/// where none continues the pieces start afresh.
pub(crate) fn sides(index: &SupportIndex, sigma: &Interval) -> Result<BTreeMap<(BandId, Side), Sign>> {
    let k = sigma.component;
    let mut cuts = vec![sigma.lo.clone()];
    cuts.extend(index.breakpoints(k).iter().filter(|p| **p > sigma.lo && **p < sigma.hi).cloned());
    cuts.push(sigma.hi.clone());
    let mut labels: BTreeMap<(BandId, Side), Sign> = BTreeMap::new();
    for w in cuts.windows(2) {
        let mut cover: Vec<(BandId, Side)> = index.covering(k, &w[0], &w[1]).map(|r| (r.band, r.side)).collect();
        if cover.len() != 2 {
            return Err(Error::InvalidArc(format!(
                "({}, {}) is covered by {} bases, not 2",
                rational::format(&w[0]),
                rational::format(&w[1]),
                cover.len()
            )));
        }
        cover.sort();
        let [a, b] = [cover[0], cover[1]];
        let carried = match (labels.get(&a), labels.get(&b)) {
            (Some(Sign::Plus), _) | (_, Some(Sign::Minus)) => Some((a, b)),
            (Some(Sign::Minus), _) | (_, Some(Sign::Plus)) => Some((b, a)),
            (None, None) => None,
        };
        // a fresh start, or a singular point where both sheets change
        let (plus, minus) = carried.unwrap_or(if a.1 != b.1 && b.1 == Side::Base0 { (b, a) } else { (a, b) });
        for (key, s) in [(plus, Sign::Plus), (minus, Sign::Minus)] {
            if labels.insert(key, s).is_some_and(|old| old != s) {
                return Err(Error::InvalidArc(format!("band {} changes side along the arc", key.0)));
            }
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Member {
    #[serde(with = "rational::serde_str")]
    pub offset: Rational,
    pub sign: Sign,
}

/// `{(lo + offset + t, sign) : member}` for `t` in `[0, hi - lo]` is one
/// class of the correspondence. The lowest member has offset 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Family {
    #[serde(with = "rational::serde_str")]
    pub lo: Rational,
    #[serde(with = "rational::serde_str")]
    pub hi: Rational,
    pub members: Vec<Member>,
    /// The leaves were not followed to the end within the budget; `members`
    /// is what was found.
    pub open: bool,
}

impl Family {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// The relation as pairs `(a1 + t, e1) ~ (a2 + t, e2)` with absolute
    /// offsets `a = lo + offset`.
    pub fn pairs(&self) -> Vec<((Rational, Sign), (Rational, Sign))> {
        let mut out = Vec::new();
        for (i, a) in self.members.iter().enumerate() {
            for b in &self.members[i + 1..] {
                out.push(((&self.lo + &a.offset, a.sign), (&self.lo + &b.offset, b.sign)));
            }
        }
        out
    }

    fn flipped(&self) -> Family {
        let mut members: Vec<Member> = self
            .members
            .iter()
            .map(|m| Member {
                offset: m.offset.clone(),
                sign: m.sign.flip(),
            })
            .collect();
        members.sort();
        Family {
            members,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    /// The arc in the realized complex.
    pub carrier: Interval,
    pub families: Vec<Family>,
    /// Whether the canonical form swapped the side labels.
    pub flipped: bool,
}

impl Correspondence {
    pub fn length(&self) -> Rational {
        self.carrier.length()
    }

    pub fn has_open_families(&self) -> bool {
        self.families.iter().any(|f| f.open)
    }

    /// True if `(x, e)` and `(y, f)` are related.
    pub fn related(&self, x: &Rational, e: Sign, y: &Rational, f: Sign) -> bool {
        self.families.iter().any(|fam| {
            let t = fam.members.iter().find(|m| m.sign == e && &fam.lo + &m.offset <= *x && *x <= &fam.hi + &m.offset);
            t.is_some_and(|m| {
                let param = x - &fam.lo - &m.offset;
                fam.members.iter().any(|n| n.sign == f && &fam.lo + &n.offset + &param == *y)
            })
        })
    }
}

enum Return {
    Split(Rational),
    Closed(Vec<Member>),
    Open(Vec<Member>),
}

fn follow_return(
    index: &SupportIndex,
    labels: &BTreeMap<(BandId, Side), Sign>,
    sigma: &Interval,
    a: &Rational,
    b: &Rational,
    sign: Sign,
    budget: usize,
) -> Return {
    let mut members = vec![Member {
        offset: Rational::zero(),
        sign,
    }];
    let start = index
        .covering(sigma.component, a, b)
        .find(|r| labels.get(&(r.band, r.side)) == Some(&sign))
        .expect("every piece of the arc has a base of each sign");
    let (comp, off) = index.partner(start);
    let mut queue = VecDeque::from([(*comp, off - &start.lo, (start.band, start.side.other()))]);
    let mut seen: HashSet<(ComponentId, Rational)> = HashSet::new();
    let mut steps = 0usize;
    while let Some((k, shift, via)) = queue.pop_front() {
        steps += 1;
        if steps > budget {
            return Return::Open(members);
        }
        let ja = a + &shift;
        let jb = b + &shift;
        if k == sigma.component && ja < sigma.hi && jb > sigma.lo {
            if ja < sigma.lo {
                return Return::Split(&sigma.lo - &shift);
            }
            if jb > sigma.hi {
                return Return::Split(&sigma.hi - &shift);
            }
            let m = Member {
                offset: shift,
                sign: labels[&via],
            };
            if !members.contains(&m) {
                members.push(m);
            }
            continue;
        }
        if !seen.insert((k, shift.clone())) {
            continue;
        }
        if let Some(bp) = index.interior_breakpoint(k, &ja, &jb) {
            return Return::Split(bp - &shift);
        }
        for r in index.covering(k, &ja, &jb) {
            if (r.band, r.side) == via {
                continue;
            }
            let (comp, off) = index.partner(r);
            queue.push_back((*comp, &shift + off - &r.lo, (r.band, r.side.other())));
        }
    }
    Return::Closed(members)
}

/// The first return correspondence on `sigma`: `(x, e) ~ (y, f)` when an
/// arc of a leaf leaves `x` on side `e` and reaches `y` from side `f`
/// without meeting the arc in between. `sigma` is cut into maximal pieces on
/// which the classes move rigidly; classes whose leaves are not exhausted
/// within `budget` crossings are reported as open.
pub fn first_return(c: &BandComplex, sigma: &Transversal, budget: usize) -> Result<Correspondence> {
    let real = realize(c, sigma)?;
    let index = SupportIndex::new(&real.complex);
    let labels = sides(&index, &real.sigma)?;
    let s = &real.sigma;
    let mut cuts = vec![s.lo.clone()];
    cuts.extend(index.breakpoints(s.component).iter().filter(|p| **p > s.lo && **p < s.hi).cloned());
    cuts.push(s.hi.clone());
    let mut undone: VecDeque<(Rational, Rational, Sign)> = VecDeque::new();
    for sign in [Sign::Plus, Sign::Minus] {
        for w in cuts.windows(2) {
            undone.push_back((w[0].clone(), w[1].clone(), sign));
        }
    }
    let mut families = Vec::new();
    let max_pieces = budget.saturating_mul(64).max(1024);
    let mut processed = 0usize;
    while let Some((a, b, sign)) = undone.pop_front() {
        processed += 1;
        let outcome = if processed > max_pieces {
            Return::Open(vec![Member {
                offset: Rational::zero(),
                sign,
            }])
        } else {
            follow_return(&index, &labels, s, &a, &b, sign, budget)
        };
        match outcome {
            Return::Split(t) => {
                undone.push_front((t.clone(), b, sign));
                undone.push_front((a, t, sign));
            }
            Return::Closed(members) => {
                for m in members.iter().skip(1) {
                    subtract(&mut undone, &(&a + &m.offset), &(&b + &m.offset), m.sign);
                }
                families.push(rebase(a, b, members, false));
            }
            Return::Open(members) => families.push(rebase(a, b, members, true)),
        }
    }
    let (families, flipped) = canonical(merge(families));
    Ok(Correspondence {
        carrier: real.sigma,
        families,
        flipped,
    })
}

fn subtract(undone: &mut VecDeque<(Rational, Rational, Sign)>, lo: &Rational, hi: &Rational, sign: Sign) {
    let mut out = VecDeque::with_capacity(undone.len() + 1);
    for (a, b, s) in undone.drain(..) {
        if s != sign || &b <= lo || &a >= hi {
            out.push_back((a, b, s));
            continue;
        }
        if &a < lo {
            out.push_back((a.clone(), lo.clone(), s));
        }
        if &b > hi {
            out.push_back((hi.clone(), b.clone(), s));
        }
    }
    *undone = out;
}

fn rebase(a: Rational, b: Rational, mut members: Vec<Member>, open: bool) -> Family {
    members.sort();
    let base = members[0].offset.clone();
    for m in members.iter_mut() {
        m.offset -= &base;
    }
    Family {
        lo: a + &base,
        hi: b + &base,
        members,
        open,
    }
}

fn merge(mut families: Vec<Family>) -> Vec<Family> {
    families.sort_by(|x, y| (&x.members, x.open, &x.lo).cmp(&(&y.members, y.open, &y.lo)));
    let mut out: Vec<Family> = Vec::new();
    for f in families {
        if let Some(last) = out.last_mut() {
            if last.members == f.members && last.open == f.open && last.hi == f.lo {
                last.hi = f.hi;
                continue;
            }
        }
        out.push(f);
    }
    out
}

/// Sorted families, or their flip if that is lexicographically smaller.
fn canonical(mut families: Vec<Family>) -> (Vec<Family>, bool) {
    families.sort();
    let mut flipped: Vec<Family> = families.iter().map(Family::flipped).collect();
    flipped.sort();
    if flipped < families {
        (flipped, true)
    } else {
        (families, false)
    }
}

/// Equal after the orientation-preserving affine map taking one carrier onto
/// the other, up to a flip.
pub fn similar(a: &Correspondence, b: &Correspondence) -> bool {
    normalized(a) == normalized(b)
}

fn normalized(c: &Correspondence) -> Vec<Family> {
    let len = c.carrier.length();
    let scale = |x: &Rational| x / &len;
    let fams = c
        .families
        .iter()
        .map(|f| Family {
            lo: scale(&(&f.lo - &c.carrier.lo)),
            hi: scale(&(&f.hi - &c.carrier.lo)),
            members: f
                .members
                .iter()
                .map(|m| Member {
                    offset: scale(&m.offset),
                    sign: m.sign,
                })
                .collect(),
            open: f.open,
        })
        .collect();
    canonical(fams).0
}
