//! Elementary moves: collapse from a free arc, vertical cuts, splitting,
//! subdivision and cutting along a component.

use crate::complex::{
    Band, BandComplex, BandId, BaseAttachment, Component, ComponentId, Side, SplitGlue,
};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// A maximal open interval of the support covered by exactly one base.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FreeArc {
    pub component: ComponentId,
    #[serde(with = "rational::serde_str")]
    pub lo: Rational,
    #[serde(with = "rational::serde_str")]
    pub hi: Rational,
    pub covering_band: BandId,
    pub covering_base: Side,
}

impl FreeArc {
    pub fn measure(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// All free arcs, sorted by component then position.
///
/// Sweeps the sorted base endpoints of each component; an elementary interval
/// between consecutive endpoints is free when exactly one non-degenerate base
/// covers it. Two such neighbours are never merged: the point between them is
/// the endpoint of another base, necessarily a degenerate one, which meets
/// the would-be arc.
pub fn free_arcs(c: &BandComplex) -> Vec<FreeArc> {
    let mut out = Vec::new();
    for comp in c.components() {
        let bases = c.bases_on(comp.id);
        let points = c.breakpoints(comp.id);
        for w in points.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            let mut covering = bases.iter().filter(|r| r.lo < r.hi && &r.lo <= p && &r.hi >= q);
            if let (Some(only), None) = (covering.next(), covering.next()) {
                out.push(FreeArc {
                    component: comp.id,
                    lo: p.clone(),
                    hi: q.clone(),
                    covering_band: only.band,
                    covering_base: only.side,
                });
            }
        }
    }
    out
}

/// Where the two pieces of a collapsed component ended up; `None` when a piece
/// was an isolated point removed together with its degenerate band.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseReport {
    pub component: ComponentId,
    pub left: Option<ComponentId>,
    pub right: Option<ComponentId>,
    pub removed_bands: Vec<BandId>,
}

pub fn collapse(c: &BandComplex, arc: &FreeArc) -> Result<BandComplex> {
    collapse_with_report(c, arc).map(|(c, _)| c)
}

/// Collapse from a free arc: the arc leaves the support, the strip above it
/// leaves its band, which falls apart into two (possibly degenerate) bands.
pub fn collapse_with_report(c: &BandComplex, arc: &FreeArc) -> Result<(BandComplex, CollapseReport)> {
    if !free_arcs(c).contains(arc) {
        return Err(Error::NotAFreeArc);
    }
    let comp = c.require_component(arc.component)?.clone();
    let band = c.require_band(arc.covering_band)?.clone();
    let side = arc.covering_base;
    let origin = band.base(side).offset.clone();
    let cut_lo = &arc.lo - &origin;
    let cut_hi = &arc.hi - &origin;

    let right_comp = c.next_component_id();
    let right_band = c.next_band_id();

    let left_fragment = Band {
        id: band.id,
        width: cut_lo.clone(),
        base0: band.base0.clone(),
        base1: band.base1.clone(),
        length: band.length.clone(),
        glue: None,
    };
    let right_fragment = Band {
        id: right_band,
        width: &band.width - &cut_hi,
        base0: BaseAttachment::new(band.base0.component, &band.base0.offset + &cut_hi),
        base1: BaseAttachment::new(band.base1.component, &band.base1.offset + &cut_hi),
        length: band.length.clone(),
        glue: None,
    };

    let mut bands: Vec<Band> = c.bands().iter().filter(|b| b.id != band.id).cloned().collect();
    bands.push(left_fragment);
    bands.push(right_fragment);
    for b in bands.iter_mut() {
        for s in Side::BOTH {
            let base = b.base_mut(s);
            if base.component == comp.id && base.offset >= arc.hi {
                *base = BaseAttachment::new(right_comp, &base.offset - &arc.hi);
            }
        }
    }

    let mut components: Vec<Component> =
        c.components().iter().filter(|k| k.id != comp.id).cloned().collect();
    components.push(Component {
        id: comp.id,
        length: arc.lo.clone(),
    });
    components.push(Component {
        id: right_comp,
        length: &comp.length - &arc.hi,
    });

    let mut report = CollapseReport {
        component: comp.id,
        left: Some(comp.id),
        right: Some(right_comp),
        removed_bands: Vec::new(),
    };
    for (piece, slot) in [(comp.id, 0), (right_comp, 1)] {
        if let Some(removed) = isolated_point_cleanup(&components, &bands, piece) {
            components.retain(|k| k.id != piece);
            bands.retain(|b| b.id != removed);
            report.removed_bands.push(removed);
            if slot == 0 {
                report.left = None;
            } else {
                report.right = None;
            }
        }
    }
    Ok((
        BandComplex::from_parts_unchecked(components, bands, c.is_enhanced()),
        report,
    ))
}

/// If `piece` is a point with exactly one attachment and that attachment is a
/// degenerate band, returns the band to delete.
fn isolated_point_cleanup(components: &[Component], bands: &[Band], piece: ComponentId) -> Option<BandId> {
    let comp = components.iter().find(|k| k.id == piece)?;
    if !comp.length.is_zero() {
        return None;
    }
    let attached: Vec<&Band> = bands
        .iter()
        .flat_map(|b| Side::BOTH.into_iter().filter(move |&s| b.base(s).component == piece).map(move |_| b))
        .collect();
    match attached.as_slice() {
        [only] if only.is_degenerate() => Some(only.id),
        _ => None,
    }
}

/// Cuts `band` along the vertical arc at band coordinate `at`. Cutting at
/// either edge is the identity.
pub fn cut_vertical(c: &BandComplex, band: BandId, at: &Rational) -> Result<BandComplex> {
    let b = c.require_band(band)?.clone();
    if at.is_negative() || at > &b.width {
        return Err(Error::OutOfRange {
            value: rational::format(at),
            bound: rational::format(&b.width),
        });
    }
    if at.is_zero() || at == &b.width {
        return Ok(c.clone());
    }
    let mut bands: Vec<Band> = c.bands().iter().filter(|x| x.id != band).cloned().collect();
    let mut left = b.clone();
    left.width = at.clone();
    let right = Band {
        id: c.next_band_id(),
        width: &b.width - at,
        base0: BaseAttachment::new(b.base0.component, &b.base0.offset + at),
        base1: BaseAttachment::new(b.base1.component, &b.base1.offset + at),
        length: b.length.clone(),
        glue: None,
    };
    bands.push(left);
    bands.push(right);
    Ok(BandComplex::from_parts_unchecked(c.components().to_vec(), bands, c.is_enhanced()))
}

/// True when `at` is a splitting point of `component`: interior, not inside
/// any base, and an endpoint of some base.
pub fn is_splitting_point(c: &BandComplex, component: ComponentId, at: &Rational) -> bool {
    let Some(comp) = c.component(component) else {
        return false;
    };
    if !(at.is_positive() && at < &comp.length) {
        return false;
    }
    let bases = c.bases_on(component);
    bases.iter().all(|r| !r.covers_interior(at)) && bases.iter().any(|r| &r.lo == at || &r.hi == at)
}

/// Splits a component at a splitting point and joins the two new boundary
/// points by a degenerate band that remembers the split.
pub fn split(c: &BandComplex, component: ComponentId, at: &Rational) -> Result<BandComplex> {
    if !is_splitting_point(c, component, at) {
        return Err(Error::NotASplittingPoint {
            component,
            at: rational::format(at),
        });
    }
    let comp = c.require_component(component)?.clone();
    let right = c.next_component_id();
    let mut bands: Vec<Band> = c.bands().to_vec();
    for b in bands.iter_mut() {
        let width = b.width.clone();
        for s in Side::BOTH {
            let base = b.base_mut(s);
            let starts_right = base.offset > *at || (base.offset == *at && !width.is_zero());
            if base.component == component && starts_right {
                *base = BaseAttachment::new(right, &base.offset - at);
            }
        }
    }
    let mut glue_band = Band::new(
        c.next_band_id(),
        Rational::zero(),
        BaseAttachment::new(component, at.clone()),
        BaseAttachment::new(right, Rational::zero()),
    );
    glue_band.glue = Some(SplitGlue {
        original: component,
        at: at.clone(),
    });
    if c.is_enhanced() {
        glue_band.length = Some(Rational::zero());
    }
    bands.push(glue_band);
    let mut components: Vec<Component> =
        c.components().iter().filter(|k| k.id != component).cloned().collect();
    components.push(Component {
        id: component,
        length: at.clone(),
    });
    components.push(Component {
        id: right,
        length: &comp.length - at,
    });
    Ok(BandComplex::from_parts_unchecked(components, bands, c.is_enhanced()))
}

/// Replaces a band by two bands of the same width chained through a new
/// component, the subdivision arc. On enhanced complexes each half gets half
/// the length.
pub fn subdivide_band(c: &BandComplex, band: BandId) -> Result<BandComplex> {
    let b = c.require_band(band)?.clone();
    let arc = c.next_component_id();
    let half = b.length.as_ref().map(|l| l / rational::int(2));
    let lower = Band {
        id: b.id,
        width: b.width.clone(),
        base0: b.base0.clone(),
        base1: BaseAttachment::new(arc, Rational::zero()),
        length: half.clone(),
        glue: None,
    };
    let upper = Band {
        id: c.next_band_id(),
        width: b.width.clone(),
        base0: BaseAttachment::new(arc, Rational::zero()),
        base1: b.base1.clone(),
        length: half,
        glue: None,
    };
    let mut bands: Vec<Band> = c.bands().iter().filter(|x| x.id != band).cloned().collect();
    bands.push(lower);
    bands.push(upper);
    let mut components = c.components().to_vec();
    components.push(Component {
        id: arc,
        length: b.width,
    });
    Ok(BandComplex::from_parts_unchecked(components, bands, c.is_enhanced()))
}

/// Detaches every base glued to `component` onto its own fresh component.
/// A component with nothing attached is left alone.
pub fn cut_component(c: &BandComplex, component: ComponentId) -> Result<BandComplex> {
    c.require_component(component)?;
    let on_it: Vec<(BandId, Side)> = c
        .base_refs()
        .into_iter()
        .filter(|r| r.component == component)
        .map(|r| (r.band, r.side))
        .collect();
    if on_it.is_empty() {
        return Ok(c.clone());
    }
    let mut next = c.next_component_id().0;
    let mut components: Vec<Component> =
        c.components().iter().filter(|k| k.id != component).cloned().collect();
    let mut bands = c.bands().to_vec();
    for (band, side) in on_it {
        let b = bands.iter_mut().find(|b| b.id == band).unwrap();
        let id = ComponentId(next);
        next += 1;
        components.push(Component {
            id,
            length: b.width.clone(),
        });
        *b.base_mut(side) = BaseAttachment::new(id, Rational::zero());
    }
    Ok(BandComplex::from_parts_unchecked(components, bands, c.is_enhanced()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::ComplexBuilder;
    use crate::fixtures;
    use crate::iso::isomorphic;
    use crate::normalize::normalize_long_bands;
    use crate::rational::{int, rat};

    fn arc(c: u32, lo: Rational, hi: Rational, band: u32, side: Side) -> FreeArc {
        FreeArc {
            component: ComponentId(c),
            lo,
            hi,
            covering_band: BandId(band),
            covering_base: side,
        }
    }

    #[test]
    fn free_arcs_of_fixtures() {
        assert!(free_arcs(&fixtures::annulus()).is_empty());
        assert_eq!(
            free_arcs(&fixtures::shift_band()),
            vec![
                arc(0, int(0), int(1), 0, Side::Base0),
                arc(0, int(2), int(3), 0, Side::Base1)
            ]
        );
        let r = free_arcs(&fixtures::remark_three_band_unit());
        let spans: Vec<_> = r.iter().map(|a| (a.lo.clone(), a.hi.clone())).collect();
        assert_eq!(spans, vec![(int(1), int(2)), (int(6), int(7))]);
    }

    #[test]
    fn degenerate_base_breaks_a_free_arc() {
        let c = ComplexBuilder::new()
            .component(int(4))
            .component(int(1))
            .band(int(2), 0, int(0), 0, int(2))
            .band(int(0), 0, int(1), 1, int(0))
            .build()
            .unwrap();
        // (0,1), (1,2) and (2,4); the bare component carries none
        let arcs = free_arcs(&c);
        assert_eq!(arcs.len(), 3);
        assert_eq!(arcs[0].hi, int(1));
        assert_eq!(arcs[1].lo, int(1));
    }

    #[test]
    fn collapse_shift_band() {
        let c = fixtures::shift_band();
        let a = free_arcs(&c)[0].clone();
        let d = collapse(&c, &a).unwrap();
        assert_eq!(d.excess(), int(-1));
        assert_eq!(d.excess(), c.excess());
        assert_eq!(d.bands().len(), 1);
        let expected = ComplexBuilder::new()
            .component(int(2))
            .band(int(1), 0, int(0), 0, int(1))
            .build()
            .unwrap();
        assert!(isomorphic(&d, &expected).is_some(), "{d:?}");
    }

    #[test]
    fn collapse_rejects_non_free_arcs() {
        let c = fixtures::annulus();
        let bogus = arc(0, int(0), int(1), 0, Side::Base0);
        assert_eq!(collapse(&c, &bogus), Err(Error::NotAFreeArc));
        let s = fixtures::shift_band();
        let partial = arc(0, int(0), rat(1, 2), 0, Side::Base0);
        assert_eq!(collapse(&s, &partial), Err(Error::NotAFreeArc));
    }

    #[test]
    fn collapse_remark_complex_at_six_seven() {
        let c = fixtures::remark_three_band_unit();
        let a = free_arcs(&c).into_iter().find(|a| a.lo == int(6)).unwrap();
        let d = collapse(&c, &a).unwrap();
        assert_eq!(d.support_length(), int(7));
        assert_eq!(d.total_width(), int(7));
        assert_eq!(d.excess(), int(0));
    }

    #[test]
    fn collapse_keeps_lengths_of_fragments() {
        let c = fixtures::shift_band().with_lengths(|_| int(3));
        let a = free_arcs(&c)[1].clone();
        let d = collapse(&c, &a).unwrap();
        assert!(d.bands().iter().all(|b| b.length == Some(int(3))));
    }

    #[test]
    fn isolated_point_with_single_degenerate_band_is_removed() {
        // collapsing (0,1) of the shift band leaves the point 0 with the empty
        // left fragment only
        let c = fixtures::shift_band();
        let (d, report) = collapse_with_report(&c, &free_arcs(&c)[0]).unwrap();
        assert_eq!(report.left, None);
        assert!(d.bands().iter().all(|b| !b.is_degenerate()));
        assert!(d.components().iter().all(|k| !k.length.is_zero()));
    }

    #[test]
    fn cut_vertical_cases() {
        let c = fixtures::shift_band();
        assert_eq!(cut_vertical(&c, BandId(0), &int(0)).unwrap(), c);
        assert_eq!(cut_vertical(&c, BandId(0), &int(2)).unwrap(), c);
        let d = cut_vertical(&c, BandId(0), &int(1)).unwrap();
        assert_eq!(d.bands().len(), 2);
        assert!(d.bands().iter().all(|b| b.width == int(1)));
        assert_eq!(d.total_width(), c.total_width());
        assert_eq!(d.excess(), c.excess());
        assert!(matches!(
            cut_vertical(&c, BandId(0), &int(3)),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn split_requires_a_splitting_point() {
        let c = fixtures::shift_band();
        assert!(matches!(
            split(&c, ComponentId(0), &int(1)),
            Err(Error::NotASplittingPoint { .. })
        ));
        // collapse both free arcs of the shift band: what remains is a single
        // band, and no base endpoint is interior to the support
        let mut d = c.clone();
        while let Some(a) = free_arcs(&d).first().cloned() {
            d = collapse(&d, &a).unwrap();
        }
        for comp in d.components() {
            for x in d.breakpoints(comp.id) {
                assert!(!is_splitting_point(&d, comp.id, &x));
            }
        }
    }

    #[test]
    fn split_between_two_bases() {
        let c = ComplexBuilder::new()
            .component(int(4))
            .component(int(4))
            .band(int(2), 0, int(0), 1, int(0))
            .band(int(2), 0, int(2), 1, int(2))
            .build()
            .unwrap();
        let d = split(&c, ComponentId(0), &int(2)).unwrap();
        assert_eq!(d.components().len(), 3);
        assert_eq!(d.excess(), c.excess());
        let glue = d.bands().iter().find(|b| b.glue.is_some()).unwrap();
        assert!(glue.is_degenerate());
        assert_eq!(glue.glue.as_ref().unwrap().at, int(2));
    }

    #[test]
    fn subdivide_round_trip() {
        let c = fixtures::remark_three_band_unit();
        for b in c.bands() {
            let d = subdivide_band(&c, b.id).unwrap();
            assert_eq!(d.excess(), c.excess());
            let arc = d.components().last().unwrap();
            assert_eq!(arc.length, b.width);
            let on_arc = d.bases_on(arc.id);
            assert_eq!(on_arc.len(), 2);
            assert!(on_arc.iter().all(|r| r.lo == int(0) && r.hi == arc.length));
            assert!(isomorphic(&normalize_long_bands(&d), &c).is_some());
        }
    }

    #[test]
    fn cut_component_excess_change() {
        let single = fixtures::shift_band();
        // one base only on a fresh component
        let c = ComplexBuilder::new()
            .component(int(1))
            .component(int(1))
            .band(int(1), 0, int(0), 1, int(0))
            .build()
            .unwrap();
        assert_eq!(cut_component(&c, ComponentId(0)).unwrap().excess(), c.excess());
        let annulus = fixtures::annulus();
        let cut = cut_component(&annulus, ComponentId(0)).unwrap();
        assert_eq!(annulus.excess() - cut.excess(), int(1));
        let lonely = ComplexBuilder::new().component(int(5)).build().unwrap();
        assert_eq!(cut_component(&lonely, ComponentId(0)).unwrap(), lonely);
        let s = cut_component(&single, ComponentId(0)).unwrap();
        assert_eq!(single.excess() - s.excess(), int(4) - int(3));
    }
}
