//! Unions of bands over an abstract support multi-interval.
//!
//! A [`BandComplex`] is a finite set of closed intervals (components of the
//! support `D`) together with bands `[0, w] x [0, 1]` whose two bases are
//! glued by translations onto subintervals of `D`. Components are abstract:
//! a component is an id and a length, and coordinates inside it live in
//! `[0, length]`.

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

pub const FORMAT_TAG: &str = "bandcomplex/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BandId(pub u32);

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// Which of the two horizontal sides of a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "0")]
    Base0,
    #[serde(rename = "1")]
    Base1,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Base0 => Side::Base1,
            Side::Base1 => Side::Base0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Base0 => 0,
            Side::Base1 => 1,
        }
    }

    pub const BOTH: [Side; 2] = [Side::Base0, Side::Base1];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: ComponentId,
    pub length: Rational,
}

/// A base glued by translation: band coordinate `t` lands at `offset + t`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaseAttachment {
    pub component: ComponentId,
    pub offset: Rational,
}

impl BaseAttachment {
    pub fn new(component: ComponentId, offset: Rational) -> Self {
        BaseAttachment { component, offset }
    }
}

/// Provenance of the degenerate band created by splitting a component, kept
/// so the split can be glued back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitGlue {
    pub original: ComponentId,
    pub at: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    pub id: BandId,
    pub width: Rational,
    pub base0: BaseAttachment,
    pub base1: BaseAttachment,
    pub length: Option<Rational>,
    pub glue: Option<SplitGlue>,
}

impl Band {
    pub fn new(id: BandId, width: Rational, base0: BaseAttachment, base1: BaseAttachment) -> Self {
        Band {
            id,
            width,
            base0,
            base1,
            length: None,
            glue: None,
        }
    }

    pub fn with_length(mut self, length: Rational) -> Self {
        self.length = Some(length);
        self
    }

    pub fn base(&self, side: Side) -> &BaseAttachment {
        match side {
            Side::Base0 => &self.base0,
            Side::Base1 => &self.base1,
        }
    }

    pub fn base_mut(&mut self, side: Side) -> &mut BaseAttachment {
        match side {
            Side::Base0 => &mut self.base0,
            Side::Base1 => &mut self.base1,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.width.is_zero()
    }

    /// Translation carrying base `from` to the other base.
    pub fn shift(&self, from: Side) -> Rational {
        &self.base(from.other()).offset - &self.base(from).offset
    }
}

/// One base as seen from the support: `[lo, hi]` on `component`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseRef {
    pub band: BandId,
    pub side: Side,
    pub component: ComponentId,
    pub lo: Rational,
    pub hi: Rational,
}

impl BaseRef {
    pub fn covers_interior(&self, x: &Rational) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// A point of the support.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DPoint {
    pub component: ComponentId,
    #[serde(with = "rational::serde_str")]
    pub x: Rational,
}

impl DPoint {
    pub fn new(component: ComponentId, x: Rational) -> Self {
        DPoint { component, x }
    }
}

impl fmt::Display for DPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.component, rational::format(&self.x))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BandComplex {
    components: Vec<Component>,
    bands: Vec<Band>,
    enhanced: bool,
}

impl BandComplex {
    /// Builds and validates a complex. Components and bands are stored sorted
    /// by id.
    pub fn new(mut components: Vec<Component>, mut bands: Vec<Band>, enhanced: bool) -> Result<Self> {
        components.sort_by_key(|c| c.id);
        bands.sort_by_key(|b| b.id);
        let c = BandComplex {
            components,
            bands,
            enhanced,
        };
        c.validate()?;
        Ok(c)
    }

    pub(crate) fn from_parts_unchecked(
        mut components: Vec<Component>,
        mut bands: Vec<Band>,
        enhanced: bool,
    ) -> Self {
        components.sort_by_key(|c| c.id);
        bands.sort_by_key(|b| b.id);
        let c = BandComplex {
            components,
            bands,
            enhanced,
        };
        debug_assert!(c.validate().is_ok(), "{:?}", c.validate());
        c
    }

    pub fn empty() -> Self {
        BandComplex::default()
    }

    fn validate(&self) -> Result<()> {
        for pair in self.components.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::InvalidComponent {
                    component: pair[0].id,
                    message: "duplicate component id".into(),
                });
            }
        }
        for c in &self.components {
            if c.length.is_negative() {
                return Err(Error::InvalidComponent {
                    component: c.id,
                    message: "negative length".into(),
                });
            }
        }
        for pair in self.bands.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::InvalidBand {
                    band: pair[0].id,
                    message: "duplicate band id".into(),
                });
            }
        }
        for b in &self.bands {
            let bad = |message: String| Error::InvalidBand { band: b.id, message };
            if b.width.is_negative() {
                return Err(bad("negative width".into()));
            }
            for side in Side::BOTH {
                let base = b.base(side);
                let comp = self
                    .component(base.component)
                    .ok_or_else(|| bad(format!("base{} on unknown component {}", side.index(), base.component)))?;
                if base.offset.is_negative() || &base.offset + &b.width > comp.length {
                    return Err(bad(format!(
                        "base{} offset {} + width {} exceeds component {} of length {}",
                        side.index(),
                        rational::format(&base.offset),
                        rational::format(&b.width),
                        comp.id,
                        rational::format(&comp.length)
                    )));
                }
            }
            match (&b.length, self.enhanced) {
                (Some(l), true) if l.is_negative() => return Err(bad("negative length".into())),
                (None, true) => return Err(bad("enhanced complex needs a band length".into())),
                (Some(_), false) => return Err(bad("band length on a non-enhanced complex".into())),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn is_enhanced(&self) -> bool {
        self.enhanced
    }

    pub fn component(&self, id: ComponentId) -> Option<&Component> {
        self.components
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.components[i])
    }

    pub fn band(&self, id: BandId) -> Option<&Band> {
        self.bands
            .binary_search_by_key(&id, |b| b.id)
            .ok()
            .map(|i| &self.bands[i])
    }

    pub fn require_band(&self, id: BandId) -> Result<&Band> {
        self.band(id).ok_or(Error::UnknownBand(id))
    }

    pub fn require_component(&self, id: ComponentId) -> Result<&Component> {
        self.component(id).ok_or(Error::UnknownComponent(id))
    }

    pub fn next_component_id(&self) -> ComponentId {
        ComponentId(self.components.last().map_or(0, |c| c.id.0 + 1))
    }

    pub fn next_band_id(&self) -> BandId {
        BandId(self.bands.last().map_or(0, |b| b.id.0 + 1))
    }

    /// `|X|`: the sum of all band widths.
    pub fn total_width(&self) -> Rational {
        self.bands.iter().map(|b| b.width.clone()).sum()
    }

    /// `|D|`: the total length of the support.
    pub fn support_length(&self) -> Rational {
        self.components.iter().map(|c| c.length.clone()).sum()
    }

    /// `|X| - |D|`.
    pub fn excess(&self) -> Rational {
        self.total_width() - self.support_length()
    }

    pub fn is_balanced(&self) -> bool {
        self.excess().is_zero()
    }

    /// Sum of width x length over bands; zero for non-enhanced complexes.
    pub fn area(&self) -> Rational {
        self.bands
            .iter()
            .filter_map(|b| b.length.as_ref().map(|l| l * &b.width))
            .sum()
    }

    /// Every base, as an interval of the support.
    pub fn base_refs(&self) -> Vec<BaseRef> {
        let mut out = Vec::with_capacity(self.bands.len() * 2);
        for b in &self.bands {
            for side in Side::BOTH {
                let base = b.base(side);
                out.push(BaseRef {
                    band: b.id,
                    side,
                    component: base.component,
                    lo: base.offset.clone(),
                    hi: &base.offset + &b.width,
                });
            }
        }
        out
    }

    pub fn bases_on(&self, component: ComponentId) -> Vec<BaseRef> {
        self.base_refs()
            .into_iter()
            .filter(|r| r.component == component)
            .collect()
    }

    /// Sorted breakpoints of a component: its ends and every base endpoint.
    pub fn breakpoints(&self, component: ComponentId) -> Vec<Rational> {
        let mut pts = BTreeSet::new();
        if let Some(c) = self.component(component) {
            pts.insert(Rational::zero());
            pts.insert(c.length.clone());
        }
        for r in self.bases_on(component) {
            pts.insert(r.lo);
            pts.insert(r.hi);
        }
        pts.into_iter().collect()
    }

    pub fn contains_point(&self, p: &DPoint) -> bool {
        self.component(p.component)
            .is_some_and(|c| !p.x.is_negative() && p.x <= c.length)
    }

    /// Disjoint union, renumbering `other`'s ids after this complex's.
    pub fn disjoint_union(&self, other: &BandComplex) -> BandComplex {
        let coff = self.next_component_id().0;
        let boff = self.next_band_id().0;
        let mut components = self.components.clone();
        components.extend(other.components.iter().map(|c| Component {
            id: ComponentId(c.id.0 + coff),
            length: c.length.clone(),
        }));
        let mut bands = self.bands.clone();
        bands.extend(other.bands.iter().map(|b| {
            let mut nb = b.clone();
            nb.id = BandId(b.id.0 + boff);
            nb.base0.component = ComponentId(b.base0.component.0 + coff);
            nb.base1.component = ComponentId(b.base1.component.0 + coff);
            if let Some(g) = nb.glue.as_mut() {
                g.original = ComponentId(g.original.0 + coff);
            }
            nb
        }));
        BandComplex::from_parts_unchecked(components, bands, self.enhanced && other.enhanced)
    }

    /// Multiplies all transverse data by `factor`; band lengths are kept.
    pub fn scaled(&self, factor: &Rational) -> BandComplex {
        let components = self
            .components
            .iter()
            .map(|c| Component {
                id: c.id,
                length: &c.length * factor,
            })
            .collect();
        let bands = self
            .bands
            .iter()
            .map(|b| {
                let mut nb = b.clone();
                nb.width = &b.width * factor;
                nb.base0.offset = &b.base0.offset * factor;
                nb.base1.offset = &b.base1.offset * factor;
                if let Some(g) = nb.glue.as_mut() {
                    g.at = &g.at * factor;
                }
                nb
            })
            .collect();
        BandComplex::from_parts_unchecked(components, bands, self.enhanced)
    }

    /// Returns a copy with every band length replaced via `f`, turning the
    /// complex enhanced.
    pub fn with_lengths(&self, mut f: impl FnMut(&Band) -> Rational) -> BandComplex {
        let bands = self
            .bands
            .iter()
            .map(|b| {
                let mut nb = b.clone();
                nb.length = Some(f(b));
                nb
            })
            .collect();
        BandComplex::from_parts_unchecked(self.components.clone(), bands, true)
    }

    /// Drops band lengths.
    pub fn forget_lengths(&self) -> BandComplex {
        let bands = self
            .bands
            .iter()
            .map(|b| {
                let mut nb = b.clone();
                nb.length = None;
                nb
            })
            .collect();
        BandComplex::from_parts_unchecked(self.components.clone(), bands, false)
    }

    pub fn to_json(&self) -> String {
        crate::format::serialize(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::format::deserialize(text)
    }
}

/// Convenience builder used by fixtures and tests.
#[derive(Debug, Default)]
pub struct ComplexBuilder {
    components: Vec<Component>,
    bands: Vec<Band>,
    enhanced: bool,
}

impl ComplexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn component(mut self, length: Rational) -> Self {
        let id = ComponentId(self.components.len() as u32);
        self.components.push(Component { id, length });
        self
    }

    /// Band of `width` with bases at `(c0, o0)` and `(c1, o1)`.
    pub fn band(mut self, width: Rational, c0: u32, o0: Rational, c1: u32, o1: Rational) -> Self {
        let id = BandId(self.bands.len() as u32);
        self.bands.push(Band::new(
            id,
            width,
            BaseAttachment::new(ComponentId(c0), o0),
            BaseAttachment::new(ComponentId(c1), o1),
        ));
        self
    }

    /// Sets the length of the most recently added band, marking the complex
    /// enhanced.
    pub fn length(mut self, length: Rational) -> Self {
        self.enhanced = true;
        if let Some(b) = self.bands.last_mut() {
            b.length = Some(length);
        }
        self
    }

    pub fn build(self) -> Result<BandComplex> {
        BandComplex::new(self.components, self.bands, self.enhanced)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, rat};

    #[test]
    fn total_width_examples() {
        assert_eq!(BandComplex::empty().total_width(), int(0));
        assert_eq!(fixtures::annulus().total_width(), int(1));
        assert_eq!(fixtures::remark_three_band_unit().total_width(), int(8));
    }

    #[test]
    fn excess_examples() {
        let c = ComplexBuilder::new()
            .component(int(2))
            .band(int(1), 0, int(0), 0, int(1))
            .build()
            .unwrap();
        assert_eq!(c.excess(), int(-1));
        assert_eq!(fixtures::annulus().excess(), int(0));
        let r = fixtures::remark_three_band_unit();
        assert_eq!(r.support_length(), int(8));
        assert_eq!(r.excess(), int(0));
    }

    #[test]
    fn rejects_base_out_of_range() {
        let err = ComplexBuilder::new()
            .component(int(1))
            .band(rat(1, 2), 0, rat(3, 4), 0, int(0))
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidBand { band: BandId(0), .. }));
    }

    #[test]
    fn excess_is_additive_over_disjoint_union() {
        let a = fixtures::shift_band();
        let b = fixtures::remark_three_band_unit();
        let u = a.disjoint_union(&b);
        assert_eq!(u.excess(), a.excess() + b.excess());
        assert_eq!(u.bands().len(), a.bands().len() + b.bands().len());
    }
}
