use crate::complex::{BandComplex, BandId, DPoint, Side};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sweep::SupportIndex;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafVertex {
    pub point: DPoint,
    /// Band crossings from the base point.
    pub distance: usize,
    /// Number of bases (degenerate ones included) containing the point.
    pub coverage: usize,
    /// Some crossing at this vertex leads outside the ball.
    pub open: bool,
}

/// One crossing of `band` at band coordinate `t`, from its base-0 end to
/// its base-1 end (indices into the vertex list).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub band: BandId,
    #[serde(with = "rational::serde_str")]
    pub t: Rational,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafBall {
    pub base_point: DPoint,
    pub radius: usize,
    /// Breadth-first order; vertex 0 is the base point.
    pub vertices: Vec<LeafVertex>,
    pub edges: Vec<Crossing>,
}

impl LeafBall {
    /// Vertices at distance exactly `radius`.
    pub fn boundary(&self) -> impl Iterator<Item = &LeafVertex> {
        self.vertices.iter().filter(move |v| v.distance == self.radius)
    }

    /// Vertices with an unexplored crossing; empty iff the whole leaf is
    /// inside the ball.
    pub fn frontier(&self) -> impl Iterator<Item = &LeafVertex> {
        self.vertices.iter().filter(|v| v.open)
    }

    pub fn is_complete(&self) -> bool {
        self.frontier().next().is_none()
    }

    /// Edge ends at each vertex; loops count twice.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for e in &self.edges {
            d[e.from] += 1;
            d[e.to] += 1;
        }
        d
    }

    /// The ball is connected, so it has a cycle iff it is not a tree.
    pub fn has_cycle(&self) -> bool {
        self.edges.len() >= self.vertices.len()
    }
}

/// Ball of graph radius `radius` around `p` in its leaf.
pub fn trace_leaf(c: &BandComplex, p: &DPoint, radius: usize) -> Result<LeafBall> {
    trace_leaf_capped(c, p, radius, usize::MAX)
}

/// As [`trace_leaf`], failing with `BudgetExceeded` once the ball holds more
/// than `max_vertices` points.
pub fn trace_leaf_capped(c: &BandComplex, p: &DPoint, radius: usize, max_vertices: usize) -> Result<LeafBall> {
    if !c.contains_point(p) {
        return Err(Error::PointOutsideSupport { at: p.to_string() });
    }
    let index = SupportIndex::new(c);
    trace_with(&index, p, radius, max_vertices)
}

fn trace_with(index: &SupportIndex, p: &DPoint, radius: usize, max_vertices: usize) -> Result<LeafBall> {
    let mut vertices = vec![LeafVertex {
        point: p.clone(),
        distance: 0,
        coverage: 0,
        open: false,
    }];
    let mut ids: HashMap<DPoint, usize> = HashMap::from([(p.clone(), 0)]);
    let mut seen_edges: HashSet<(BandId, Rational)> = HashSet::new();
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let here = vertices[i].point.clone();
        let d = vertices[i].distance;
        let mut coverage = 0;
        for r in index.at_point(&here) {
            coverage += 1;
            let t = &here.x - &r.lo;
            let key = (r.band, t.clone());
            if seen_edges.contains(&key) {
                continue;
            }
            let (comp, offset) = index.partner(r);
            let there = DPoint::new(*comp, offset + &t);
            let j = match ids.get(&there) {
                Some(&j) => j,
                None if d == radius => {
                    vertices[i].open = true;
                    continue;
                }
                None => {
                    if vertices.len() >= max_vertices {
                        return Err(Error::BudgetExceeded { budget: max_vertices });
                    }
                    let j = vertices.len();
                    vertices.push(LeafVertex {
                        point: there.clone(),
                        distance: d + 1,
                        coverage: 0,
                        open: false,
                    });
                    ids.insert(there, j);
                    queue.push_back(j);
                    j
                }
            };
            seen_edges.insert(key);
            let (from, to) = match r.side {
                Side::Base0 => (i, j),
                Side::Base1 => (j, i),
            };
            edges.push(Crossing {
                band: r.band,
                t,
                from,
                to,
            });
        }
        vertices[i].coverage = coverage;
    }
    Ok(LeafBall {
        base_point: p.clone(),
        radius,
        vertices,
        edges,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndEstimate {
    /// The largest ladder radius; `count` is measured there.
    pub inner_radius: usize,
    pub outer_radius: usize,
    pub count: usize,
    pub stable: bool,
    /// Count at every ladder radius, in ladder order.
    pub counts: Vec<usize>,
}

/// Counts the components of `ball \ ball(r)` that reach the frontier, for
/// each `r` of the ladder.
pub fn estimate_ends(ball: &LeafBall, ladder: &[usize]) -> Result<EndEstimate> {
    let top = ladder.iter().copied().max().unwrap_or(0);
    if ladder.is_empty() || top >= ball.radius {
        return Err(Error::RadiusTooSmall {
            ladder: top,
            radius: ball.radius,
        });
    }
    let counts: Vec<usize> = ladder.iter().map(|&r| far_components(ball, r)).collect();
    let last = *ladder.iter().zip(&counts).max_by_key(|(r, _)| **r).unwrap().1;
    Ok(EndEstimate {
        inner_radius: top,
        outer_radius: ball.radius,
        count: last,
        stable: counts.windows(2).all(|w| w[0] == w[1]),
        counts,
    })
}

fn far_components(ball: &LeafBall, r: usize) -> usize {
    let n = ball.vertices.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let outside = |i: usize| ball.vertices[i].distance > r;
    for e in &ball.edges {
        if outside(e.from) && outside(e.to) {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            parent[a] = b;
        }
    }
    let mut roots = HashSet::new();
    for (i, v) in ball.vertices.iter().enumerate() {
        if v.open && outside(i) {
            roots.insert(find(&mut parent, i));
        }
    }
    roots.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndClass {
    Zero,
    One,
    Two,
    ThreePlus,
    Unstable,
}

impl EndClass {
    pub const ALL: [EndClass; 5] = [EndClass::Zero, EndClass::One, EndClass::Two, EndClass::ThreePlus, EndClass::Unstable];

    pub fn of(e: &EndEstimate) -> Self {
        match (e.stable, e.count) {
            (false, _) => EndClass::Unstable,
            (true, 0) => EndClass::Zero,
            (true, 1) => EndClass::One,
            (true, 2) => EndClass::Two,
            (true, _) => EndClass::ThreePlus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EndClass::Zero => "0",
            EndClass::One => "1",
            EndClass::Two => "2",
            EndClass::ThreePlus => ">=3",
            EndClass::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndSample {
    pub point: DPoint,
    pub counts: Vec<usize>,
    pub class: EndClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub seed: u64,
    pub radius: usize,
    pub ladder: Vec<usize>,
    pub n_samples: usize,
    pub zero: usize,
    pub one: usize,
    pub two: usize,
    pub three_plus: usize,
    pub unstable: usize,
    pub samples: Vec<EndSample>,
}

impl Histogram {
    pub fn count(&self, class: EndClass) -> usize {
        match class {
            EndClass::Zero => self.zero,
            EndClass::One => self.one,
            EndClass::Two => self.two,
            EndClass::ThreePlus => self.three_plus,
            EndClass::Unstable => self.unstable,
        }
    }

    pub fn fraction(&self, class: EndClass) -> f64 {
        if self.n_samples == 0 {
            0.0
        } else {
            self.count(class) as f64 / self.n_samples as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# seed={} radius={} ladder={:?}\nclass,count,fraction\n", self.seed, self.radius, self.ladder);
        for class in EndClass::ALL {
            let _ = writeln!(out, "{},{},{}", class.label(), self.count(class), self.fraction(class));
        }
        out
    }
}

/// Sample points are `len * u / SAMPLE_DENOMINATOR` along the concatenated
/// support.
pub const SAMPLE_DENOMINATOR: u64 = 1 << 30;

/// Radius at which the end histograms of the doubling and constant
/// galleries separate for every seed tried; smaller radii misclassify too
/// many long finite leaves.
pub const CALIBRATED_RADIUS: usize = 160;

/// Ladder used by [`end_statistics`]: a quarter, half and three quarters of
/// the radius.
pub fn default_ladder(radius: usize) -> Vec<usize> {
    let mut l: Vec<usize> = [radius / 4, radius / 2, 3 * radius / 4].into_iter().filter(|&r| r < radius).collect();
    l.dedup();
    l
}

/// End counts of leaves through `n_samples` points drawn uniformly from the
/// support, with the default ladder.
pub fn end_statistics(c: &BandComplex, n_samples: usize, radius: usize, seed: u64) -> Result<Histogram> {
    end_statistics_with(c, n_samples, radius, &default_ladder(radius), seed)
}

pub fn end_statistics_with(
    c: &BandComplex,
    n_samples: usize,
    radius: usize,
    ladder: &[usize],
    seed: u64,
) -> Result<Histogram> {
    if n_samples == 0 {
        return Err(Error::NonPositiveParameter("n_samples = 0".into()));
    }
    if ladder.is_empty() || ladder.iter().any(|&r| r >= radius) {
        return Err(Error::RadiusTooSmall {
            ladder: ladder.iter().copied().max().unwrap_or(0),
            radius,
        });
    }
    let points = sample_points(c, n_samples, seed);
    let index = SupportIndex::new(c);
    let samples: Vec<EndSample> = points
        .into_par_iter()
        .map(|p| {
            let ball = trace_with(&index, &p, radius, usize::MAX).expect("sampled points lie in the support");
            let e = estimate_ends(&ball, ladder).expect("ladder checked above");
            EndSample {
                point: p,
                class: EndClass::of(&e),
                counts: e.counts,
            }
        })
        .collect();
    let mut h = Histogram {
        seed,
        radius,
        ladder: ladder.to_vec(),
        n_samples,
        zero: 0,
        one: 0,
        two: 0,
        three_plus: 0,
        unstable: 0,
        samples,
    };
    for s in &h.samples {
        match s.class {
            EndClass::Zero => h.zero += 1,
            EndClass::One => h.one += 1,
            EndClass::Two => h.two += 1,
            EndClass::ThreePlus => h.three_plus += 1,
            EndClass::Unstable => h.unstable += 1,
        }
    }
    Ok(h)
}

fn sample_points(c: &BandComplex, n: usize, seed: u64) -> Vec<DPoint> {
    let total = c.support_length();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = Rational::from_integer(BigInt::from(SAMPLE_DENOMINATOR));
    (0..n)
        .map(|_| {
            let u: u64 = rng.gen_range(0..SAMPLE_DENOMINATOR);
            let mut s = &total * Rational::from_integer(BigInt::from(u)) / &q;
            for k in c.components() {
                if s < k.length {
                    return DPoint::new(k.id, s);
                }
                s -= &k.length;
            }
            let last = c.components().last().expect("support is non-empty");
            DPoint::new(last.id, last.length.clone())
        })
        .collect()
}

/// Vertices on one horizontal line (components laid end to end, in measure),
/// crossings as arcs above it, shaded by distance from the base point.
pub fn ball_svg(c: &BandComplex, ball: &LeafBall) -> String {
    const WIDTH: f64 = 1000.0;
    const HEIGHT: f64 = 400.0;
    const BASELINE: f64 = 360.0;
    let total = rational::to_f64(&c.support_length()).max(f64::MIN_POSITIVE);
    let mut start = HashMap::new();
    let mut acc = 0.0;
    for k in c.components() {
        start.insert(k.id, acc);
        acc += rational::to_f64(&k.length);
    }
    let xpos = |p: &DPoint| 20.0 + (WIDTH - 40.0) * (start.get(&p.component).copied().unwrap_or(0.0) + rational::to_f64(&p.x)) / total;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<title>leaf ball around {} of radius {}</title>"#, ball.base_point, ball.radius);
    acc = 0.0;
    for k in c.components() {
        let a = 20.0 + (WIDTH - 40.0) * acc / total;
        acc += rational::to_f64(&k.length);
        let b = 20.0 + (WIDTH - 40.0) * acc / total;
        let _ = writeln!(out, r#"<line x1="{a:.2}" y1="{BASELINE}" x2="{b:.2}" y2="{BASELINE}" stroke="black" stroke-width="2"/>"#);
    }
    for e in &ball.edges {
        let (x1, x2) = (xpos(&ball.vertices[e.from].point), xpos(&ball.vertices[e.to].point));
        let lift = ((x2 - x1).abs() / 2.0).clamp(8.0, BASELINE - 10.0);
        let mid = (x1 + x2) / 2.0;
        let _ = writeln!(
            out,
            r#"<path d="M {x1:.2} {BASELINE} Q {mid:.2} {:.2} {x2:.2} {BASELINE}" fill="none" stroke="steelblue" stroke-width="1"><title>band {} t={}</title></path>"#,
            BASELINE - 2.0 * lift,
            e.band,
            rational::format(&e.t)
        );
    }
    for v in &ball.vertices {
        let shade = 200 * v.distance / ball.radius.max(1);
        let fill = if v.open { "crimson".to_string() } else { format!("rgb({shade},{shade},{shade})") };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{BASELINE}" r="3" fill="{fill}"><title>{} d={}</title></circle>"#,
            xpos(&v.point),
            v.point,
            v.distance
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{ComplexBuilder, ComponentId};
    use crate::fixtures;
    use crate::rational::{int, rat};

    fn pt(x: Rational) -> DPoint {
        DPoint::new(ComponentId(0), x)
    }

    #[test]
    fn annulus_leaf_is_one_loop() {
        let ball = trace_leaf(&fixtures::annulus(), &pt(rat(1, 2)), 5).unwrap();
        assert_eq!(ball.vertices.len(), 1);
        assert_eq!(ball.edges.len(), 1);
        assert!(ball.has_cycle() && ball.is_complete());
        assert_eq!(ball.degrees()[0], ball.vertices[0].coverage);
    }

    #[test]
    fn rotation_orbit_has_three_points() {
        let ball = trace_leaf(&fixtures::rotation(rat(1, 3)), &pt(rat(1, 10)), 10).unwrap();
        let mut xs: Vec<Rational> = ball.vertices.iter().map(|v| v.point.x.clone()).collect();
        xs.sort();
        assert_eq!(xs, vec![rat(1, 10), rat(13, 30), rat(23, 30)]);
        assert_eq!(ball.edges.len(), 3);
        assert!(ball.has_cycle() && ball.is_complete());
    }

    #[test]
    fn degrees_match_coverage_inside_the_ball() {
        let c = fixtures::remark_three_band_unit();
        let ball = trace_leaf(&c, &pt(rat(7, 3)), 6).unwrap();
        let d = ball.degrees();
        for (i, v) in ball.vertices.iter().enumerate() {
            if v.distance < ball.radius {
                assert_eq!(d[i], v.coverage, "{}", v.point);
            }
        }
    }

    #[test]
    fn outside_point_is_rejected() {
        let r = trace_leaf(&fixtures::annulus(), &pt(int(2)), 3);
        assert!(matches!(r, Err(Error::PointOutsideSupport { .. })));
    }

    fn long_path() -> BandComplex {
        ComplexBuilder::new().component(int(100)).band(int(99), 0, int(0), 0, int(1)).build().unwrap()
    }

    #[test]
    fn path_through_base_point_has_two_ends() {
        let ball = trace_leaf(&long_path(), &pt(rat(101, 2)), 10).unwrap();
        assert_eq!(ball.vertices.len(), 21);
        assert!(!ball.has_cycle());
        let e = estimate_ends(&ball, &[2, 5, 9]).unwrap();
        assert_eq!((e.count, e.stable), (2, true));
    }

    #[test]
    fn compact_leaf_has_no_ends() {
        let ball = trace_leaf(&fixtures::shift_band(), &pt(rat(1, 2)), 8).unwrap();
        assert!(ball.is_complete());
        let e = estimate_ends(&ball, &[1, 3]).unwrap();
        assert_eq!((e.count, e.stable), (0, true));
    }

    #[test]
    fn ladder_must_fit_inside_the_ball() {
        let ball = trace_leaf(&long_path(), &pt(rat(1, 2)), 4).unwrap();
        assert!(matches!(estimate_ends(&ball, &[4]), Err(Error::RadiusTooSmall { .. })));
        // one-sided path from its end: one end
        assert_eq!(estimate_ends(&ball, &[1, 2]).unwrap().count, 1);
    }

    #[test]
    fn statistics_are_seed_deterministic() {
        let c = fixtures::rotation(rat(1, 3));
        let a = end_statistics(&c, 40, 8, 7).unwrap();
        assert_eq!(a.zero, 40);
        assert_eq!(a, end_statistics(&c, 40, 8, 7).unwrap());
        let s = end_statistics(&fixtures::shift_band(), 30, 8, 1).unwrap();
        assert_eq!(s.zero, 30);
        assert!(s.to_csv().contains("unstable,0,0"));
    }

    #[test]
    fn svg_has_one_circle_per_vertex() {
        let c = fixtures::rotation(rat(1, 3));
        let ball = trace_leaf(&c, &pt(rat(1, 10)), 3).unwrap();
        let svg = ball_svg(&c, &ball);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<path").count(), 3);
    }
}
