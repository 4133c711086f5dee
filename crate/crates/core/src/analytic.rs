// SPDX-License-Identifier: Apache-2.0

//! Closed-form leakage quantities computed directly from a Hamiltonian.
//!
//! Writing `|0> = sum_a c_a |a>` in the eigenbasis, the ground-state return
//! probability is `f(t) = |sum_a |c_a|^2 exp(-i lambda_a t)|^2`, whose Fourier
//! spectrum has a DC line `h0 = sum_a |c_a|^4` and a line of height
//! `h_ab = |c_a|^2 |c_b|^2` at each transition frequency `|lambda_a - lambda_b|`.
//! The qubit pair is the eigenstate pair with the largest line, and the
//! subspace leakage is the weight of `|0>` on every other eigenstate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, EigenSystem, HermitianOperator};

/// One transition line of the ground-state Fourier spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    /// Angular frequency `|lambda_a - lambda_b|`.
    pub frequency: f64,
}

/// Analytic peak heights of the ground-state population spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub h0: f64,
    /// All pairs `a < b`, in lexicographic order.
    pub pairs: Vec<Transition>,
    /// `|c_a|^2` for each eigenstate.
    pub weights: Vec<f64>,
}

impl PeakSet {
    /// The dominant (qubit) transition. Ties resolve to the first pair in
    /// lexicographic order.
    pub fn primary(&self) -> Transition {
        let mut best = self.pairs[0];
        for p in &self.pairs[1..] {
            if p.height > best.height {
                best = *p;
            }
        }
        best
    }

    /// `h0 + 2 h01` using the dominant transition.
    pub fn primary_sum(&self) -> f64 {
        self.h0 + 2.0 * self.primary().height
    }

    /// `h0 + sum_{a != b} h_ab`; equals one for every Hamiltonian.
    pub fn total(&self) -> f64 {
        self.h0 + 2.0 * self.pairs.iter().map(|p| p.height).sum::<f64>()
    }

    /// Non-primary transitions ordered by decreasing height.
    pub fn secondary_by_height(&self) -> Vec<Transition> {
        let primary = self.primary();
        let mut rest: Vec<Transition> =
            self.pairs.iter().copied().filter(|p| (p.a, p.b) != (primary.a, primary.b)).collect();
        rest.sort_by(|x, y| y.height.total_cmp(&x.height).then((x.a, x.b).cmp(&(y.a, y.b))));
        rest
    }
}

pub fn peaks_from_eigensystem(es: &EigenSystem) -> PeakSet {
    let weights = es.ground_weights();
    let n = weights.len();
    let h0 = weights.iter().map(|w| w * w).sum();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push(Transition {
                a,
                b,
                height: weights[a] * weights[b],
                frequency: (es.eigenvalues[b] - es.eigenvalues[a]).abs(),
            });
        }
    }
    PeakSet { h0, pairs, weights }
}

pub fn analytic_peaks(h: &HermitianOperator) -> PeakSet {
    peaks_from_eigensystem(&eigendecompose(h))
}

/// Subspace leakage: the weight of `|0>` outside the dominant eigenstate pair.
pub fn exact_leakage(h: &HermitianOperator) -> f64 {
    leakage_from_weights(&analytic_peaks(h))
}

fn leakage_from_weights(peaks: &PeakSet) -> f64 {
    let p = peaks.primary();
    peaks
        .weights
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != p.a && a != p.b)
        .map(|(_, w)| w)
        .sum()
}

/// Leakage from the full set of lines, given which eigenstates form the
/// qubit pair: `eps = sum_{a not in pair} sqrt(h_{a,b} h_{a,c} / h_{b,c})`.
///
/// Only meaningful when every line has been assigned to its transition,
/// which is the case for analytic spectra and never for measured ones.
pub fn leakage_from_assigned_peaks(peaks: &PeakSet, qubit_pair: (usize, usize)) -> f64 {
    let (b, c) = if qubit_pair.0 < qubit_pair.1 { qubit_pair } else { (qubit_pair.1, qubit_pair.0) };
    let height = |x: usize, y: usize| -> f64 {
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        peaks.pairs.iter().find(|p| p.a == lo && p.b == hi).map_or(0.0, |p| p.height)
    };
    let h_bc = height(b, c);
    if h_bc == 0.0 {
        return f64::NAN;
    }
    (0..peaks.weights.len())
        .filter(|&a| a != b && a != c)
        .map(|a| (height(a, b) * height(a, c) / h_bc).sqrt())
        .sum()
}

/// Lower and upper leakage bounds from `h0` and `h01` alone:
/// `1 - sqrt(h0 + 2 h01) <= eps <= (1 - sqrt(2 h0 + 4 h01 - 1)) / 2`.
pub fn bounds_from_heights(h0: f64, h01: f64) -> Result<(f64, f64)> {
    let s = (h0 + 2.0 * h01).min(1.0);
    let radicand = 2.0 * s - 1.0;
    if radicand < 0.0 {
        return Err(Error::RadicandNegative(radicand));
    }
    Ok((1.0 - s.sqrt(), 0.5 * (1.0 - radicand.sqrt())))
}

pub fn analytic_bounds(peaks: &PeakSet) -> Result<(f64, f64)> {
    bounds_from_heights(peaks.h0, peaks.primary().height)
}
