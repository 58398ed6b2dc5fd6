//! The `bandcomplex/1` JSON document format.
//!
//! ```json
//! {
//!   "format": "bandcomplex/1",
//!   "enhanced": false,
//!   "components": [{"id": 0, "length": "8"}],
//!   "bands": [{"id": 0, "width": "1",
//!              "base0": {"component": 0, "offset": "0"},
//!              "base1": {"component": 0, "offset": "7"}}]
//! }
//! ```
//!
//! Rationals are strings `"p/q"` or `"p"`; plain JSON integers are accepted on
//! input. A base may carry `"orientation": "reversed"`, which is rejected.

use crate::complex::{
    Band, BandComplex, BandId, BaseAttachment, Component, ComponentId, SplitGlue, FORMAT_TAG,
};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    enhanced: bool,
    components: Vec<ComponentDoc>,
    bands: Vec<BandDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    id: ComponentId,
    #[serde(with = "rational::serde_str")]
    length: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseDoc {
    component: ComponentId,
    #[serde(with = "rational::serde_str")]
    offset: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orientation: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlueDoc {
    original: ComponentId,
    #[serde(with = "rational::serde_str")]
    at: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BandDoc {
    id: BandId,
    #[serde(with = "rational::serde_str")]
    width: Rational,
    base0: BaseDoc,
    base1: BaseDoc,
    #[serde(
        default,
        with = "rational::serde_opt_str",
        skip_serializing_if = "Option::is_none"
    )]
    length: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    glue: Option<GlueDoc>,
}

pub fn serialize(c: &BandComplex) -> String {
    let doc = Document {
        format: FORMAT_TAG.to_string(),
        enhanced: c.is_enhanced(),
        components: c
            .components()
            .iter()
            .map(|k| ComponentDoc {
                id: k.id,
                length: k.length.clone(),
            })
            .collect(),
        bands: c
            .bands()
            .iter()
            .map(|b| BandDoc {
                id: b.id,
                width: b.width.clone(),
                base0: BaseDoc {
                    component: b.base0.component,
                    offset: b.base0.offset.clone(),
                    orientation: None,
                },
                base1: BaseDoc {
                    component: b.base1.component,
                    offset: b.base1.offset.clone(),
                    orientation: None,
                },
                length: b.length.clone(),
                glue: b.glue.as_ref().map(|g| GlueDoc {
                    original: g.original,
                    at: g.at.clone(),
                }),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
    s.push('\n');
    s
}

pub fn deserialize(text: &str) -> Result<BandComplex> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format != FORMAT_TAG {
        return Err(Error::Parse {
            line: 0,
            column: 0,
            message: format!("field `format`: expected {FORMAT_TAG:?}, found {:?}", doc.format),
        });
    }
    let components = doc
        .components
        .into_iter()
        .map(|c| Component {
            id: c.id,
            length: c.length,
        })
        .collect();
    let mut bands = Vec::with_capacity(doc.bands.len());
    for b in doc.bands {
        for (i, base) in [&b.base0, &b.base1].into_iter().enumerate() {
            match base.orientation.as_deref() {
                None | Some("preserving") => {}
                Some(other) => {
                    return Err(Error::InvalidBand {
                        band: b.id,
                        message: format!(
                            "base{i} orientation {other:?}: only orientation-preserving gluings are supported"
                        ),
                    })
                }
            }
        }
        bands.push(Band {
            id: b.id,
            width: b.width,
            base0: BaseAttachment::new(b.base0.component, b.base0.offset),
            base1: BaseAttachment::new(b.base1.component, b.base1.offset),
            length: b.length,
            glue: b.glue.map(|g| SplitGlue {
                original: g.original,
                at: g.at,
            }),
        });
    }
    let c = BandComplex::new(components, bands, doc.enhanced)?;
    if c.is_enhanced()
        && !c.bands().is_empty()
        && c.bands().iter().all(|b| b.length.as_ref().is_some_and(|l| num_traits::Zero::is_zero(l)))
    {
        return Err(Error::Parse {
            line: 0,
            column: 0,
            message: "enhanced complex needs at least one positive band length".into(),
        });
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn remark_fixture_matches_constructor() {
        let text = include_str!("../fixtures/remark3band.json");
        let c = deserialize(text).unwrap();
        assert_eq!(c, fixtures::remark_three_band_unit());
        assert_eq!(serialize(&c), text);
    }

    #[test]
    fn offset_out_of_range_names_band() {
        let text = r#"{"format":"bandcomplex/1","enhanced":false,
            "components":[{"id":0,"length":"2"}],
            "bands":[{"id":7,"width":"3/2","base0":{"component":0,"offset":"1"},
                      "base1":{"component":0,"offset":"0"}}]}"#;
        match deserialize(text) {
            Err(Error::InvalidBand { band, message }) => {
                assert_eq!(band, BandId(7));
                assert!(message.contains("exceeds"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = deserialize("{\n \"format\": \"bandcomplex/1\",\n \"enhanced\": tru }").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn bad_rational_is_a_parse_error() {
        let text = r#"{"format":"bandcomplex/1","enhanced":false,
            "components":[{"id":0,"length":"1/0"}],"bands":[]}"#;
        assert!(matches!(deserialize(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn reversed_orientation_rejected() {
        let text = r#"{"format":"bandcomplex/1","enhanced":false,
            "components":[{"id":0,"length":"2"}],
            "bands":[{"id":3,"width":"1","base0":{"component":0,"offset":"0"},
                      "base1":{"component":0,"offset":"1","orientation":"reversed"}}]}"#;
        assert!(matches!(deserialize(text), Err(Error::InvalidBand { band: BandId(3), .. })));
    }

    #[test]
    fn wrong_format_tag() {
        let text = r#"{"format":"bandcomplex/2","enhanced":false,"components":[],"bands":[]}"#;
        assert!(matches!(deserialize(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn integer_rationals_accepted() {
        let text = r#"{"format":"bandcomplex/1","enhanced":true,
            "components":[{"id":0,"length":1}],
            "bands":[{"id":0,"width":1,"base0":{"component":0,"offset":0},
                      "base1":{"component":0,"offset":0},"length":"1/2"}]}"#;
        let c = deserialize(text).unwrap();
        assert_eq!(c.area(), crate::rational::rat(1, 2));
    }
}
