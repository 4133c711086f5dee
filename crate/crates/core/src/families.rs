// SPDX-License-Identifier: Apache-2.0

//! Trial Hamiltonians and random leaky ensembles.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianOperator};
use num_complex::Complex64;

/// Level energies of the ten-level family; `HN(gamma)` keeps the first N.
pub const FAMILY_LEVELS: [f64; 10] = [0.0, 1.0, 1.5, 1.7, 1.9, 2.2, 2.5, 2.7, 3.0, 3.2];

/// Level energies used for the random leaky ensemble.
pub const RANDOM_LEVELS: [f64; 10] = [0.0, 1.0, 1.5, 2.0, 2.4, 2.5, 2.9, 3.0, 3.3, 4.0];

/// Range of the random out-of-subspace couplings (qubit coupling is 1).
pub const RANDOM_COUPLING_RANGE: (f64, f64) = (0.005, 0.02);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Hm,
    Hn,
    Ha,
    Hb,
    /// `H_N(gamma)` for N in 3..=10.
    Leaky(usize),
}

impl Family {
    /// Whether the family depends on the coupling parameter.
    pub fn is_parametric(self) -> bool {
        matches!(self, Family::Leaky(_))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Hm => write!(f, "Hm"),
            Family::Hn => write!(f, "Hn"),
            Family::Ha => write!(f, "Ha"),
            Family::Hb => write!(f, "Hb"),
            Family::Leaky(n) => write!(f, "H{n}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        match key.to_ascii_lowercase().as_str() {
            "hm" => return Ok(Family::Hm),
            "hn" => return Ok(Family::Hn),
            "ha" => return Ok(Family::Ha),
            "hb" => return Ok(Family::Hb),
            _ => {}
        }
        key.strip_prefix(['H', 'h'])
            .and_then(|rest| rest.parse::<usize>().ok())
            .filter(|n| (3..=10).contains(n))
            .map(Family::Leaky)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Builds a named trial Hamiltonian. `gamma` is ignored by the fixed
/// families.
pub fn family(name: Family, gamma: f64) -> Result<HermitianOperator> {
    let rows = match name {
        Family::Hm => vec![vec![0.0, 1.0, 0.5], vec![1.0, 1.0, 0.0], vec![0.5, 0.0, 1.5]],
        Family::Hn => vec![vec![0.0, 1.0, 0.01], vec![1.0, 1.0, 0.0], vec![0.01, 0.0, 1.5]],
        Family::Ha => star(&[0.0, 1.0, 1.5, 1.7, 2.0], &[1.0, 0.0, 0.0, 0.0]),
        Family::Hb => star(&[0.0, 1.0, 1.5, 1.7, 2.0], &[1.0, 0.01, 0.005, 0.0]),
        Family::Leaky(n) => {
            if !(3..=10).contains(&n) {
                return Err(Error::UnknownFamily(format!("H{n}")));
            }
            if !gamma.is_finite() {
                return Err(Error::Malformed { field: "gamma".into(), reason: "must be finite".into() });
            }
            let couplings: Vec<f64> = (1..n).map(|k| if k == 1 { 1.0 } else { gamma }).collect();
            star(&FAMILY_LEVELS[..n], &couplings)
        }
    };
    HermitianOperator::from_real_rows(&rows)
}

/// Diagonal `energies` with real couplings between |0> and each |k>, k >= 1.
fn star(energies: &[f64], couplings: &[f64]) -> Vec<Vec<f64>> {
    let n = energies.len();
    let mut rows = vec![vec![0.0; n]; n];
    for (k, e) in energies.iter().enumerate() {
        rows[k][k] = *e;
    }
    for (k, g) in couplings.iter().enumerate() {
        rows[0][k + 1] = *g;
        rows[k + 1][0] = *g;
    }
    rows
}

/// Draws a weakly leaky N-level Hamiltonian, N uniform in 2..=10.
///
/// The qubit coupling `<0|H|1>` is 1; every other `<0|H|k>` is drawn uniformly
/// from [`RANDOM_COUPLING_RANGE`]. The same seed always yields the same
/// matrix.
pub fn random_leaky_hamiltonian(seed: u64) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=10usize);
    let (lo, hi) = RANDOM_COUPLING_RANGE;
    let couplings: Vec<f64> =
        (1..n).map(|k| if k == 1 { 1.0 } else { rng.random_range(lo..=hi) }).collect();
    HermitianOperator::from_real_rows(&star(&RANDOM_LEVELS[..n], &couplings))
        .expect("star Hamiltonians are Hermitian by construction")
}

/// Dense random Hermitian matrix: real diagonal and complex off-diagonal
/// entries uniform in [-1, 1].
pub fn random_hermitian(dim: usize, seed: u64) -> Result<HermitianOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(rng.random_range(-1.0..=1.0), 0.0);
        for j in i + 1..dim {
            let z = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::exact_leakage;

    #[test]
    fn parses_names() {
        assert_eq!("Hm".parse::<Family>().unwrap(), Family::Hm);
        assert_eq!("hb".parse::<Family>().unwrap(), Family::Hb);
        assert_eq!("H7".parse::<Family>().unwrap(), Family::Leaky(7));
        assert!(matches!("H11".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert!(matches!("H2".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert!(matches!("Hq".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert_eq!(Family::Leaky(4).to_string(), "H4");
    }

    #[test]
    fn printed_entries() {
        let h3 = family(Family::Leaky(3), 0.5).unwrap();
        let row0: Vec<f64> = (0..3).map(|j| h3.entry(0, j).re).collect();
        assert_eq!(row0, vec![0.0, 1.0, 0.5]);

        let h4 = family(Family::Leaky(4), 0.2).unwrap();
        let expect = [
            [0.0, 1.0, 0.2, 0.2],
            [1.0, 1.0, 0.0, 0.0],
            [0.2, 0.0, 1.5, 0.0],
            [0.2, 0.0, 0.0, 1.7],
        ];
        for (i, row) in expect.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(h4.entry(i, j), Complex64::new(*v, 0.0));
            }
        }

        let hb = family(Family::Hb, 0.0).unwrap();
        assert_eq!(hb.entry(0, 2).re, 0.01);
        assert_eq!(hb.entry(3, 0).re, 0.005);
        assert_eq!(hb.entry(4, 4).re, 2.0);
        assert_eq!(hb.entry(0, 4).re, 0.0);
    }

    #[test]
    fn six_level_is_truncated_ten_level() {
        let g = 0.037;
        let h6 = family(Family::Leaky(6), g).unwrap();
        let h10 = family(Family::Leaky(10), g).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(h6.entry(i, j), h10.entry(i, j));
            }
        }
        assert_eq!(h6.entry(5, 5).re, 2.2);
    }

    #[test]
    fn decoupled_limit_has_no_leakage() {
        assert_eq!(exact_leakage(&family(Family::Leaky(4), 0.0).unwrap()), 0.0);
    }

    #[test]
    fn random_draws_are_reproducible_and_bounded() {
        let mut saw_two = false;
        for seed in 0..200 {
            let h = random_leaky_hamiltonian(seed);
            assert_eq!(h, random_leaky_hamiltonian(seed));
            let n = h.dim();
            assert!((2..=10).contains(&n));
            assert_eq!(h.entry(0, 1).re, 1.0);
            for k in 2..n {
                let a = h.entry(0, k).re;
                assert!((0.005..=0.02).contains(&a));
                assert_eq!(h.entry(k, k).re, RANDOM_LEVELS[k]);
            }
            if n == 2 {
                saw_two = true;
                assert_eq!(exact_leakage(&h), 0.0);
            }
        }
        assert!(saw_two);
    }
}
