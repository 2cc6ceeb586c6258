//! Synchronous nonlinear voter update.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum Opinion {
    Plus = 1,
    Minus = -1,
}

impl Opinion {
    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn flipped(self) -> Opinion {
        match self {
            Opinion::Plus => Opinion::Minus,
            Opinion::Minus => Opinion::Plus,
        }
    }

    pub fn from_value(v: i8) -> Option<Opinion> {
        match v {
            1 => Some(Opinion::Plus),
            -1 => Some(Opinion::Minus),
            _ => None,
        }
    }
}

/// Herding exponent. `Infinity` is the deterministic local-majority limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinity,
}

impl Alpha {
    pub const MAX_FINITE: f64 = 8.0;

    /// `+∞` maps to [`Alpha::Infinity`]; finite values must lie in `[-8, 8]`.
    pub fn new(value: f64) -> Result<Alpha> {
        if value == f64::INFINITY {
            Ok(Alpha::Infinity)
        } else if value.is_finite() && value.abs() <= Self::MAX_FINITE {
            Ok(Alpha::Finite(value))
        } else {
            Err(Error::AlphaRange(value))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Alpha::Finite(a) => a,
            Alpha::Infinity => f64::INFINITY,
        }
    }

    pub fn is_positive(self) -> bool {
        self.as_f64() > 0.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Alpha> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "INF" | "∞" => Ok(Alpha::Infinity),
            t => {
                let v: f64 = t.parse().map_err(|_| Error::Config(format!("`{t}` is not a valid alpha")))?;
                Alpha::new(v)
            }
        }
    }
}

impl serde::Serialize for Alpha {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Alpha::Finite(a) => s.serialize_f64(*a),
            Alpha::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Alpha {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Alpha::new(v),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Opinion counts over an agent and its nearest neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodCount {
    pub n_plus: u32,
    pub n_minus: u32,
}

impl NeighborhoodCount {
    pub fn new(n_plus: u32, n_minus: u32) -> Result<Self> {
        if n_plus == 0 && n_minus == 0 {
            return Err(Error::State("neighbourhood must contain at least the agent itself".into()));
        }
        Ok(NeighborhoodCount { n_plus, n_minus })
    }

    pub fn total(self) -> u32 {
        self.n_plus + self.n_minus
    }
}

/// Probability that the agent adopts `+1`.
///
/// Zero counts: for `α > 0` a missing opinion is never chosen, for `α < 0`
/// it is chosen with certainty (the one-sided limit), and `α = 0` is a fair
/// coin regardless of counts. `Infinity` follows the strict majority with
/// ties at one half.
pub fn select_prob(counts: NeighborhoodCount, alpha: Alpha) -> f64 {
    let NeighborhoodCount { n_plus, n_minus } = counts;
    match alpha {
        Alpha::Infinity => match n_plus.cmp(&n_minus) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 0.5,
        },
        Alpha::Finite(0.0) => 0.5,
        Alpha::Finite(a) => {
            if n_plus == 0 {
                if a > 0.0 {
                    0.0
                } else {
                    1.0
                }
            } else if n_minus == 0 {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else if a == 1.0 {
                n_plus as f64 / (n_plus + n_minus) as f64
            } else {
                let log_ratio = (n_minus as f64).ln() - (n_plus as f64).ln();
                1.0 / (1.0 + (a * log_ratio).exp())
            }
        }
    }
}

/// One opinion per node plus the number of synchronous steps taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpinionState {
    pub opinions: Vec<Opinion>,
    pub time_step: u64,
}

impl OpinionState {
    pub fn new(opinions: Vec<Opinion>) -> Self {
        OpinionState { opinions, time_step: 0 }
    }

    pub fn uniform(n: usize, opinion: Opinion) -> Self {
        Self::new(vec![opinion; n])
    }

    /// From raw `±1` values; anything else is rejected.
    pub fn from_values(values: &[i8]) -> Result<Self> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Opinion::from_value(v).ok_or_else(|| Error::State(format!("node {i} has opinion {v}"))))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    pub fn plus_count(&self) -> usize {
        self.opinions.iter().filter(|&&o| o == Opinion::Plus).count()
    }

    pub fn values(&self) -> Vec<i8> {
        self.opinions.iter().map(|o| o.value()).collect()
    }
}

/// I.i.d. fair coin per node, one draw each in node order.
pub fn init_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OpinionState {
    let opinions = (0..n).map(|_| if rng.random::<bool>() { Opinion::Plus } else { Opinion::Minus }).collect();
    OpinionState::new(opinions)
}

/// `+1` on the centred `block × block` square of an `side × side` lattice,
/// `-1` elsewhere. The block starts at row/column `(side - block) / 2`.
pub fn init_block(side: usize, block: usize) -> Result<OpinionState> {
    if block > side {
        return Err(Error::State(format!("block {block} larger than lattice side {side}")));
    }
    let lo = (side - block) / 2;
    let inside = |x: usize| x >= lo && x < lo + block;
    let opinions = (0..side * side)
        .map(|i| if inside(i / side) && inside(i % side) { Opinion::Plus } else { Opinion::Minus })
        .collect();
    Ok(OpinionState::new(opinions))
}

/// Two vertical bands on an `side × side` lattice: columns `< side / 2` hold
/// `+1`, the rest `-1`. Every node keeps a strict local majority of its own
/// opinion, so the pattern is frozen in the majority limit.
pub fn init_stripes(side: usize) -> Result<OpinionState> {
    if side < 4 {
        return Err(Error::State(format!("stripes need side >= 4, got {side}")));
    }
    let opinions = (0..side * side).map(|i| if i % side < side / 2 { Opinion::Plus } else { Opinion::Minus }).collect();
    Ok(OpinionState::new(opinions))
}

/// 2³²: each node consumes one `u32` draw, read as a uniform `k · 2⁻³²` in `[0, 1)`.
const UNIT_SCALE: f64 = (1u64 << 32) as f64;

/// Reusable synchronous updater bound to one graph and one α.
///
/// Adoption probabilities are tabulated by `(neighbourhood size, n₊)`, so a
/// step costs one table lookup and one uniform draw per node. Nodes are
/// processed in ascending index order, the `i`-th draw of a step belongs to
/// node `i`, and all reads come from the pre-step buffer.
#[derive(Debug, Clone)]
pub struct SyncStepper<'g> {
    graph: &'g Graph,
    alpha: Alpha,
    width: usize,
    /// `ceil(p₊ · 2³²)`: a draw `u = k · 2⁻³²` satisfies `u < p₊` iff `k < threshold`.
    thresholds: Vec<u64>,
    scratch: Vec<Opinion>,
}

impl<'g> SyncStepper<'g> {
    pub fn new(graph: &'g Graph, alpha: Alpha) -> Self {
        let max_total = graph.max_degree() + 1;
        let width = max_total + 1;
        let mut thresholds = vec![0u64; width * width];
        for total in 1..=max_total {
            for plus in 0..=total {
                let counts = NeighborhoodCount { n_plus: plus as u32, n_minus: (total - plus) as u32 };
                thresholds[total * width + plus] = (select_prob(counts, alpha) * UNIT_SCALE).ceil() as u64;
            }
        }
        SyncStepper { graph, alpha, width, thresholds, scratch: Vec::with_capacity(graph.node_count()) }
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Advances `state` by one synchronous step in place and returns the
    /// number of `+1` agents afterwards.
    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut OpinionState, rng: &mut R) -> Result<usize> {
        let n = self.graph.node_count();
        if state.len() != n {
            return Err(Error::LengthMismatch { state: state.len(), graph: n });
        }
        let offsets = self.graph.neighbor_offsets();
        let list = self.graph.neighbor_list();
        let old = &state.opinions;
        let thresholds = &self.thresholds;
        let width = self.width;
        self.scratch.resize(n, Opinion::Minus);
        let mut plus_after = 0;
        for ((slot, span), &own) in self.scratch.iter_mut().zip(offsets.windows(2)).zip(old) {
            let neighbors = &list[span[0]..span[1]];
            // Σσ over the neighbourhood = n₊ − n₋
            let mut sum = own as i32;
            for &j in neighbors {
                sum += old[j as usize] as i32;
            }
            let total = neighbors.len() + 1;
            let plus = (sum + total as i32) as usize / 2;
            let hit = (rng.next_u32() as u64) < thresholds[total * width + plus];
            plus_after += hit as usize;
            *slot = if hit { Opinion::Plus } else { Opinion::Minus };
        }
        std::mem::swap(&mut state.opinions, &mut self.scratch);
        state.time_step += 1;
        Ok(plus_after)
    }
}

/// Functional form of one synchronous step.
pub fn step_sync<R: Rng + ?Sized>(state: &OpinionState, g: &Graph, alpha: Alpha, rng: &mut R) -> Result<OpinionState> {
    let mut next = state.clone();
    SyncStepper::new(g, alpha).step(&mut next, rng)?;
    Ok(next)
}
