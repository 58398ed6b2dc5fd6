//! Small complexes with known answers, shared by tests, the CLI and docs.

use crate::complex::{BandComplex, ComplexBuilder};
use crate::gallery::{self, Presentation};
use crate::rational::{int, Rational};
use num_traits::One;

/// One band glued to itself without shift: every leaf is a circle.
pub fn annulus() -> BandComplex {
    ComplexBuilder::new()
        .component(int(1))
        .band(int(1), 0, int(0), 0, int(0))
        .build()
        .expect("valid fixture")
}

/// A width-2 band on `[0, 3]` translating by 1; all leaves are finite paths.
pub fn shift_band() -> BandComplex {
    ComplexBuilder::new()
        .component(int(3))
        .band(int(2), 0, int(0), 0, int(1))
        .build()
        .expect("valid fixture")
}

/// Two bands on `[0, 1]` realising the rotation `x -> x + a mod 1`.
pub fn rotation(a: Rational) -> BandComplex {
    assert!(a > int(0) && a < int(1), "rotation amount must lie in (0, 1)");
    let rest = Rational::one() - &a;
    ComplexBuilder::new()
        .component(int(1))
        .band(rest.clone(), 0, int(0), 0, a.clone())
        .band(a, 0, rest, 0, int(0))
        .build()
        .expect("valid fixture")
}

/// The three-band gallery presentation at `w = (1, 1, 1, 1, 1)`.
pub fn remark_three_band_unit() -> BandComplex {
    gallery::build_z(&[int(1), int(1), int(1), int(1), int(1)], None, Presentation::ThreeBand)
        .expect("valid fixture")
}
