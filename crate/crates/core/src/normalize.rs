//! Long bands: merging bands that run in series through a piece of the
//! support that nothing else touches.

use crate::complex::{Band, BandComplex, BaseAttachment, BaseRef, Component};
use crate::rational::Rational;
use num_traits::Zero;

/// Repeatedly merges a pair of bands in series until no merge applies.
///
/// A pair qualifies when one base of each covers exactly the same interval
/// `[lo, hi]` of a component, with `lo < hi`, and no other base meets the open
/// interval `(lo, hi)`. The interval is removed from the support (the
/// component is cut in two around it) and the bands become one, whose length
/// is the sum of the two lengths on enhanced complexes.
pub fn normalize_long_bands(c: &BandComplex) -> BandComplex {
    let mut current = c.clone();
    while let Some(next) = merge_once(&current) {
        current = next;
    }
    current
}

pub fn is_normalized(c: &BandComplex) -> bool {
    find_series_pair(c).is_none()
}

fn find_series_pair(c: &BandComplex) -> Option<(BaseRef, BaseRef)> {
    for comp in c.components() {
        let bases = c.bases_on(comp.id);
        for (i, r1) in bases.iter().enumerate() {
            if r1.lo >= r1.hi {
                continue;
            }
            for r2 in &bases[i + 1..] {
                if r2.band == r1.band || r2.lo != r1.lo || r2.hi != r1.hi {
                    continue;
                }
                let clean = bases.iter().all(|r| {
                    (r.band == r1.band && r.side == r1.side)
                        || (r.band == r2.band && r.side == r2.side)
                        || !(r.lo < r1.hi && r.hi > r1.lo)
                });
                if clean {
                    return Some((r1.clone(), r2.clone()));
                }
            }
        }
    }
    None
}

fn merge_once(c: &BandComplex) -> Option<BandComplex> {
    let (r1, r2) = find_series_pair(c)?;
    let b1 = c.band(r1.band)?.clone();
    let b2 = c.band(r2.band)?.clone();
    let comp = c.component(r1.component)?.clone();

    let mut bands: Vec<Band> = c
        .bands()
        .iter()
        .filter(|b| b.id != b1.id && b.id != b2.id)
        .cloned()
        .collect();
    let merged = Band {
        id: b1.id.min(b2.id),
        width: b1.width.clone(),
        base0: b1.base(r1.side.other()).clone(),
        base1: b2.base(r2.side.other()).clone(),
        length: match (&b1.length, &b2.length) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        },
        glue: None,
    };
    bands.push(merged);

    let (components, remap) = excise(c, &comp, &r1.lo, &r1.hi, &bands);
    for b in bands.iter_mut() {
        for side in crate::complex::Side::BOTH {
            let base = b.base_mut(side);
            if base.component == comp.id {
                *base = remap(base);
            }
        }
    }
    Some(BandComplex::from_parts_unchecked(components, bands, c.is_enhanced()))
}

/// Removes the open interval `(lo, hi)` from `comp`, keeping the left part
/// under the old id and the right part under a fresh id. A part that is a bare
/// point with nothing attached is dropped.
fn excise(
    c: &BandComplex,
    comp: &Component,
    lo: &Rational,
    hi: &Rational,
    remaining: &[Band],
) -> (Vec<Component>, impl Fn(&BaseAttachment) -> BaseAttachment) {
    let right_id = c.next_component_id();
    let attached_at = |x: &Rational| {
        remaining.iter().any(|b| {
            [&b.base0, &b.base1].iter().any(|base| {
                base.component == comp.id && (&base.offset == x || &base.offset + &b.width == *x)
            })
        })
    };
    let keep_left = !lo.is_zero() || attached_at(lo);
    let right_len = &comp.length - hi;
    let keep_right = !right_len.is_zero() || attached_at(hi);

    let mut components: Vec<Component> =
        c.components().iter().filter(|k| k.id != comp.id).cloned().collect();
    if keep_left {
        components.push(Component {
            id: comp.id,
            length: lo.clone(),
        });
    }
    if keep_right {
        components.push(Component {
            id: right_id,
            length: right_len,
        });
    }
    let (hi, id) = (hi.clone(), comp.id);
    let remap = move |base: &BaseAttachment| {
        if base.offset >= hi {
            BaseAttachment::new(right_id, &base.offset - &hi)
        } else {
            BaseAttachment::new(id, base.offset.clone())
        }
    };
    (components, remap)
}
