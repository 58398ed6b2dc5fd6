//! Per-component index of bases and breakpoints, used by every orbit-following
//! routine.

use crate::complex::{BandComplex, BandId, BaseRef, ComponentId, DPoint, Side};
use crate::rational::Rational;
use std::collections::BTreeMap;

pub struct SupportIndex {
    per_component: BTreeMap<ComponentId, Slot>,
    attachments: BTreeMap<BandId, [(ComponentId, Rational); 2]>,
}

struct Slot {
    length: Rational,
    breakpoints: Vec<Rational>,
    bases: Vec<BaseRef>,
}

impl SupportIndex {
    pub fn new(c: &BandComplex) -> Self {
        let per_component = c
            .components()
            .iter()
            .map(|k| {
                (
                    k.id,
                    Slot {
                        length: k.length.clone(),
                        breakpoints: c.breakpoints(k.id),
                        bases: c.bases_on(k.id),
                    },
                )
            })
            .collect();
        let attachments = c
            .bands()
            .iter()
            .map(|b| {
                (
                    b.id,
                    [
                        (b.base0.component, b.base0.offset.clone()),
                        (b.base1.component, b.base1.offset.clone()),
                    ],
                )
            })
            .collect();
        SupportIndex {
            per_component,
            attachments,
        }
    }

    /// Component and offset of the base opposite to `r`.
    pub fn partner(&self, r: &BaseRef) -> &(ComponentId, Rational) {
        &self.attachments[&r.band][r.side.other().index()]
    }

    pub fn attachment(&self, band: BandId, side: Side) -> &(ComponentId, Rational) {
        &self.attachments[&band][side.index()]
    }

    pub fn length(&self, comp: ComponentId) -> Option<&Rational> {
        self.per_component.get(&comp).map(|s| &s.length)
    }

    pub fn breakpoints(&self, comp: ComponentId) -> &[Rational] {
        self.per_component.get(&comp).map_or(&[], |s| &s.breakpoints)
    }

    /// Smallest breakpoint strictly inside `(a, b)`.
    pub fn interior_breakpoint(&self, comp: ComponentId, a: &Rational, b: &Rational) -> Option<&Rational> {
        let pts = self.breakpoints(comp);
        let i = pts.partition_point(|p| p <= a);
        pts.get(i).filter(|p| *p < b)
    }

    /// Non-degenerate bases containing `[a, b]`.
    pub fn covering<'a>(&'a self, comp: ComponentId, a: &'a Rational, b: &'a Rational) -> impl Iterator<Item = &'a BaseRef> + 'a {
        self.per_component
            .get(&comp)
            .into_iter()
            .flat_map(|s| s.bases.iter())
            .filter(move |r| r.lo < r.hi && &r.lo <= a && b <= &r.hi)
    }

    /// All bases (degenerate ones included) whose closed interval contains
    /// the point.
    pub fn at_point<'a>(&'a self, p: &'a DPoint) -> impl Iterator<Item = &'a BaseRef> + 'a {
        self.per_component
            .get(&p.component)
            .into_iter()
            .flat_map(|s| s.bases.iter())
            .filter(move |r| r.contains(&p.x))
    }

    pub fn is_breakpoint(&self, p: &DPoint) -> bool {
        self.breakpoints(p.component).binary_search(&p.x).is_ok()
    }

    pub fn bases(&self, comp: ComponentId) -> &[BaseRef] {
        self.per_component.get(&comp).map_or(&[], |s| &s.bases)
    }
}
