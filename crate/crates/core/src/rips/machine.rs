//! Running the Rips machine: repeated collapses under a choice policy, with
//! a ledger of every step and the position of the surviving support inside
//! the original one.

use super::moves::{collapse_with_report, free_arcs, FreeArc};
use crate::complex::{BandComplex, ComponentId};
use crate::rational::{self, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Policy {
    Leftmost,
    Widest,
    Random { seed: u64 },
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Leftmost => write!(f, "leftmost"),
            Policy::Widest => write!(f, "widest"),
            Policy::Random { seed } => write!(f, "random({seed})"),
        }
    }
}

impl FromStr for Policy {
    type Err = String;

    /// `leftmost`, `widest`, `random` (seed 0) or `random:<seed>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leftmost" => Ok(Policy::Leftmost),
            "widest" => Ok(Policy::Widest),
            "random" => Ok(Policy::Random { seed: 0 }),
            _ => s
                .strip_prefix("random:")
                .and_then(|n| n.parse().ok())
                .map(|seed| Policy::Random { seed })
                .ok_or_else(|| format!("unknown policy {s:?}")),
        }
    }
}

/// Picks the next arc according to a policy; owns the generator for
/// `Policy::Random`.
struct Chooser {
    policy: Policy,
    rng: Option<ChaCha8Rng>,
}

impl Chooser {
    fn new(policy: Policy) -> Self {
        let rng = match policy {
            Policy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Chooser { policy, rng }
    }

    fn choose<'a>(&mut self, arcs: &'a [FreeArc]) -> Option<&'a FreeArc> {
        if arcs.is_empty() {
            return None;
        }
        match self.policy {
            Policy::Leftmost => arcs.first(),
            // ties go to the leftmost arc
            Policy::Widest => arcs.iter().rev().max_by(|a, b| a.measure().cmp(&b.measure())),
            Policy::Random { .. } => {
                let i = self.rng.as_mut().unwrap().gen_range(0..arcs.len());
                arcs.get(i)
            }
        }
    }
}

/// Position of a current component inside a component of the starting
/// complex: the current interval is `[offset, offset + length]` there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub ambient: ComponentId,
    #[serde(with = "rational::serde_str")]
    pub offset: Rational,
}

pub type AmbientMap = BTreeMap<ComponentId, Placement>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    Start,
    Collapse { arc: FreeArc },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub index: usize,
    pub mv: Move,
    pub complex: BandComplex,
    pub excess: Rational,
    pub total_width: Rational,
    pub support_length: Rational,
    pub placement: AmbientMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Halt {
    NoFreeArc,
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RipsTrace {
    pub policy: Policy,
    pub steps: Vec<TraceStep>,
    pub halt: Halt,
}

impl RipsTrace {
    pub fn last(&self) -> &TraceStep {
        self.steps.last().expect("a trace always holds the start state")
    }

    pub fn collapses(&self) -> usize {
        self.steps.len() - 1
    }

    /// Support intervals of step `i` in starting-complex coordinates.
    pub fn ambient_support(&self, i: usize) -> Vec<(ComponentId, Rational, Rational)> {
        let step = &self.steps[i.min(self.steps.len() - 1)];
        ambient_intervals(&step.complex, &step.placement)
    }

    /// One JSON object per line: step index, move, excess and widths.
    pub fn to_json_lines(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            step: usize,
            policy: String,
            #[serde(flatten)]
            mv: &'a Move,
            excess: String,
            total_width: String,
            support_length: String,
            widths: Vec<String>,
        }
        let mut out = String::new();
        for s in &self.steps {
            let line = Line {
                step: s.index,
                policy: self.policy.to_string(),
                mv: &s.mv,
                excess: rational::format(&s.excess),
                total_width: rational::format(&s.total_width),
                support_length: rational::format(&s.support_length),
                widths: s.complex.bands().iter().map(|b| rational::format(&b.width)).collect(),
            };
            out.push_str(&serde_json::to_string(&line).expect("trace line serializes"));
            out.push('\n');
        }
        out
    }
}

fn ambient_intervals(c: &BandComplex, placement: &AmbientMap) -> Vec<(ComponentId, Rational, Rational)> {
    let mut v: Vec<_> = c
        .components()
        .iter()
        .map(|k| {
            let p = &placement[&k.id];
            (p.ambient, p.offset.clone(), &p.offset + &k.length)
        })
        .collect();
    v.sort();
    v
}

fn step(index: usize, mv: Move, complex: BandComplex, placement: AmbientMap) -> TraceStep {
    TraceStep {
        index,
        mv,
        excess: complex.excess(),
        total_width: complex.total_width(),
        support_length: complex.support_length(),
        complex,
        placement,
    }
}

/// Collapses free arcs chosen by `policy` until none is left or `max_steps`
/// collapses have been made.
pub fn run_machine(c: &BandComplex, policy: Policy, max_steps: usize) -> RipsTrace {
    let placement: AmbientMap = c
        .components()
        .iter()
        .map(|k| {
            (
                k.id,
                Placement {
                    ambient: k.id,
                    offset: Rational::from_integer(0.into()),
                },
            )
        })
        .collect();
    let mut steps = vec![step(0, Move::Start, c.clone(), placement)];
    let mut chooser = Chooser::new(policy);
    let halt = loop {
        let current = steps.last().unwrap();
        let arcs = free_arcs(&current.complex);
        let Some(arc) = chooser.choose(&arcs).cloned() else {
            break Halt::NoFreeArc;
        };
        if steps.len() > max_steps {
            break Halt::Budget;
        }
        let (next, report) = collapse_with_report(&current.complex, &arc)
            .expect("arcs from free_arcs are free");
        let mut placement = current.placement.clone();
        let base = placement.remove(&report.component).expect("placement covers every component");
        if let Some(left) = report.left {
            placement.insert(left, base.clone());
        }
        if let Some(right) = report.right {
            placement.insert(
                right,
                Placement {
                    ambient: base.ambient,
                    offset: &base.offset + &arc.hi,
                },
            );
        }
        let index = steps.len();
        steps.push(step(index, Move::Collapse { arc }, next, placement));
    };
    RipsTrace { policy, steps, halt }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Interleaving {
    /// The first run's step `l` lies inside the second run's step `k`.
    Confirmed { k: usize, l: usize },
    Exhausted { k: usize, steps: usize },
}

/// Runs `policy_b` for `k` collapses, then `policy_a` until its support fits
/// inside that of the `b` run (or `budget` collapses pass).
pub fn interleaving_check(
    c: &BandComplex,
    policy_a: Policy,
    policy_b: Policy,
    k: usize,
    budget: usize,
) -> Interleaving {
    let run_b = run_machine(c, policy_b, k);
    let target = run_b.ambient_support(k);
    let run_a = run_machine(c, policy_a, budget);
    for (l, s) in run_a.steps.iter().enumerate() {
        let support = ambient_intervals(&s.complex, &s.placement);
        if contained(&support, &target) {
            return Interleaving::Confirmed { k, l };
        }
    }
    Interleaving::Exhausted {
        k,
        steps: run_a.collapses(),
    }
}

/// Each interval of `inner` lies in a single interval of `outer`; the pieces
/// of a support are disjoint, so this is containment of unions.
fn contained(
    inner: &[(ComponentId, Rational, Rational)],
    outer: &[(ComponentId, Rational, Rational)],
) -> bool {
    inner.iter().all(|(c, lo, hi)| {
        outer
            .iter()
            .any(|(d, olo, ohi)| c == d && olo <= lo && hi <= ohi)
    })
}
