//! Integer-weight rounded copies of the input graph.
//!
//! Copy `x` keeps every edge of length at most `B_x` and stores it with the
//! integer length `⌈A·len/B_x⌉`. In approximate mode `B_x = 2^x` for
//! `x = 0..=⌈log₂(nW)⌉` and `A = ⌈2·n^a/ε⌉`; in exact mode there is a single
//! copy equal to the input with `A = B = W·⌈n^a⌉`.

use thiserror::Error;

use crate::graph::{DynamicGraph, GraphError, WeightDomain};

#[derive(Debug, Error, PartialEq)]
pub enum RoundingError {
    #[error("exact rounding (epsilon = 0) needs integer weights")]
    ExactNeedsIntegers,
    #[error("epsilon must be finite and non-negative, got {0}")]
    BadEpsilon(f64),
    #[error("hop exponent must lie in (0, 1), got {0}")]
    BadHopExponent(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `⌈x⌉` that forgives float noise just above an integer (e.g. `100^0.5`).
pub(crate) fn ceil_tolerant(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// The hop bound `⌈n^a⌉`.
pub fn hop_bound(n: usize, hop_exponent: f64) -> usize {
    (ceil_tolerant((n as f64).powf(hop_exponent)) as usize).max(1)
}

/// Rounded length of one edge, or `None` when it is dropped (`len > B`).
pub fn round_edge(length: f64, scale_a: u64, scale_b: f64) -> Option<u64> {
    if length > scale_b {
        return None;
    }
    Some((scale_a as f64 * length / scale_b).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoundingMode {
    Approx { epsilon: f64, hop_exponent: f64 },
    Exact { hop_exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundedCopy {
    pub index: usize,
    pub scale_b: f64,
    pub graph: DynamicGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundedFamily {
    scale_a: u64,
    mode: RoundingMode,
    hop_bound: usize,
    copies: Vec<RoundedCopy>,
}

impl RoundedFamily {
    pub fn build(g: &DynamicGraph, epsilon: f64, hop_exponent: f64) -> Result<Self, RoundingError> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(RoundingError::BadEpsilon(epsilon));
        }
        if !(hop_exponent > 0.0 && hop_exponent < 1.0) {
            return Err(RoundingError::BadHopExponent(hop_exponent));
        }
        let n = g.vertex_count();
        let h = hop_bound(n, hop_exponent);
        let (scale_a, mode, scales) = if epsilon == 0.0 {
            if g.domain() != WeightDomain::Integer {
                return Err(RoundingError::ExactNeedsIntegers);
            }
            let a = g.max_weight() as u64 * h as u64;
            (a, RoundingMode::Exact { hop_exponent }, vec![a as f64])
        } else {
            let a = ceil_tolerant(2.0 * (n as f64).powf(hop_exponent) / epsilon) as u64;
            let k = copy_exponent(n, g.max_weight());
            let scales = (0..=k).map(|x| (x as f64).exp2()).collect();
            (a.max(1), RoundingMode::Approx { epsilon, hop_exponent }, scales)
        };
        let mut copies = Vec::with_capacity(scales.len());
        for (index, scale_b) in scales.into_iter().enumerate() {
            let mut copy = DynamicGraph::new(n, g.directedness(), WeightDomain::Integer, scale_a as f64)?;
            for (u, v, w) in g.edges() {
                if let Some(c) = round_edge(w, scale_a, scale_b) {
                    copy.set_edge(u, v, c as f64)?;
                }
            }
            copies.push(RoundedCopy {
                index,
                scale_b,
                graph: copy,
            });
        }
        Ok(Self {
            scale_a,
            mode,
            hop_bound: h,
            copies,
        })
    }

    /// The integer scale `A`.
    pub fn scale_a(&self) -> u64 {
        self.scale_a
    }

    pub fn mode(&self) -> RoundingMode {
        self.mode
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.mode, RoundingMode::Exact { .. })
    }

    pub fn epsilon(&self) -> f64 {
        match self.mode {
            RoundingMode::Approx { epsilon, .. } => epsilon,
            RoundingMode::Exact { .. } => 0.0,
        }
    }

    /// `⌈n^a⌉`.
    pub fn hop_bound(&self) -> usize {
        self.hop_bound
    }

    /// Number of copies minus one.
    pub fn k(&self) -> usize {
        self.copies.len() - 1
    }

    pub fn copies(&self) -> &[RoundedCopy] {
        &self.copies
    }

    pub fn copy(&self, x: usize) -> &RoundedCopy {
        &self.copies[x]
    }

    /// Applies the new length `c` of `(u, v)` to every copy and returns the
    /// per-copy rounded lengths (`None` means the edge is absent there).
    pub fn propagate_update(
        &mut self,
        u: usize,
        v: usize,
        c: f64,
    ) -> Result<Vec<(usize, Option<u64>)>, RoundingError> {
        let a = self.scale_a;
        let mut out = Vec::with_capacity(self.copies.len());
        for copy in &mut self.copies {
            let cx = round_edge(c, a, copy.scale_b);
            let stored = cx.map_or(f64::INFINITY, |c| c as f64);
            copy.graph.set_edge(u, v, stored)?;
            out.push((copy.index, cx));
        }
        Ok(out)
    }

    /// `(B_x / A) · d`.
    pub fn lift_distance(&self, x: usize, d: u64) -> f64 {
        self.copies[x].scale_b / self.scale_a as f64 * d as f64
    }
}

/// `⌈log₂(n·W)⌉`, computed as the least `k` with `2^k ≥ n·W`.
pub fn copy_exponent(n: usize, max_weight: f64) -> usize {
    let target = n as f64 * max_weight;
    let mut k = 0usize;
    while (k as f64).exp2() < target {
        k += 1;
    }
    k
}
