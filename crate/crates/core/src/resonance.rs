//! Resonance bookkeeping for the quadratic interactions.
//!
//! The Schrodinger interaction `n^sigma_{k1} u_{k2} -> u_k` (`k2 = k - k1`)
//! oscillates with phase `alpha k^2 - alpha k2^2 - sigma |k1|`, where
//! `sigma = +1` for `n_+` and `-1` for `n_-`. The wave interaction
//! `u_{j1} conj(u_{-j2}) -> n_+,j` oscillates with
//! `|j| - alpha j1^2 + alpha j2^2`. Zeros of these phases are resonances;
//! they exist only when `1/alpha` is a positive integer.
//!
//! With `alpha = p/q` known exactly, every test is done on the integer
//! numerators `q * phase`.

use alloc::string::String;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::dynamics::ModelParams;

/// Tolerance for zero tests when `alpha` is only known in floating point.
pub const FLOAT_RESONANCE_TOL: f64 = 1e-12;

/// Which half-wave component feeds the Schrodinger equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveBranch {
    Plus,
    Minus,
}

impl WaveBranch {
    pub const BOTH: [WaveBranch; 2] = [WaveBranch::Plus, WaveBranch::Minus];

    #[inline]
    pub fn sign(self) -> i64 {
        match self {
            WaveBranch::Plus => 1,
            WaveBranch::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceMode {
    NonResonant,
    /// `1/alpha = inverse_alpha`.
    Resonant { inverse_alpha: u64 },
}

/// Value of a phase denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Denominator {
    Exact(Ratio<i128>),
    Float(f64),
}

impl Denominator {
    pub fn value(&self) -> f64 {
        match self {
            Denominator::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Denominator::Float(x) => *x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceClassifier {
    alpha: f64,
    pq: Option<(i128, i128)>,
    mode: ResonanceMode,
    warning: Option<String>,
}

impl ResonanceClassifier {
    pub fn new(params: &ModelParams) -> Self {
        let alpha = params.alpha;
        match params.pq() {
            Some((p, q)) => {
                let mode = if q % p == 0 {
                    ResonanceMode::Resonant {
                        inverse_alpha: (q / p) as u64,
                    }
                } else {
                    ResonanceMode::NonResonant
                };
                ResonanceClassifier {
                    alpha,
                    pq: Some((p as i128, q as i128)),
                    mode,
                    warning: None,
                }
            }
            None => {
                let inv = 1.0 / alpha;
                let r = libm::round(inv);
                let resonant = r >= 1.0 && libm::fabs(inv - r) < FLOAT_RESONANCE_TOL;
                ResonanceClassifier {
                    alpha,
                    pq: None,
                    mode: if resonant {
                        ResonanceMode::Resonant {
                            inverse_alpha: r as u64,
                        }
                    } else {
                        ResonanceMode::NonResonant
                    },
                    warning: Some(alloc::format!(
                        "alpha = {alpha} has no exact rational form; resonances tested in floating point with tolerance {FLOAT_RESONANCE_TOL:e}"
                    )),
                }
            }
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self) -> ResonanceMode {
        self.mode
    }

    pub fn is_resonant(&self) -> bool {
        matches!(self.mode, ResonanceMode::Resonant { .. })
    }

    pub fn is_exact(&self) -> bool {
        self.pq.is_some()
    }

    /// Set when resonance decisions rely on floating-point tolerance.
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// `alpha k^2 - alpha (k - k1)^2 - sigma |k1|`.
    pub fn schro_denominator(&self, k: i64, k1: i64, branch: WaveBranch) -> Denominator {
        let (k, k1, s) = (k as i128, k1 as i128, branch.sign() as i128);
        match self.pq {
            Some((p, q)) => Denominator::Exact(Ratio::new(p * k1 * (2 * k - k1) - s * q * k1.abs(), q)),
            None => Denominator::Float(
                self.alpha * (k1 * (2 * k - k1)) as f64 - (s * k1.abs()) as f64,
            ),
        }
    }

    /// `|j| - alpha j1^2 + alpha (j - j1)^2`.
    pub fn wave_denominator(&self, j: i64, j1: i64) -> Denominator {
        let (j, j1) = (j as i128, j1 as i128);
        match self.pq {
            Some((p, q)) => Denominator::Exact(Ratio::new(q * j.abs() - p * j * (2 * j1 - j), q)),
            None => Denominator::Float(j.abs() as f64 - self.alpha * (j * (2 * j1 - j)) as f64),
        }
    }

    #[inline]
    fn schro_parts(&self, k: i64, k1: i64, branch: WaveBranch) -> (f64, bool) {
        let (k, k1, s) = (k as i128, k1 as i128, branch.sign() as i128);
        match self.pq {
            Some((p, q)) => {
                let num = p * k1 * (2 * k - k1) - s * q * k1.abs();
                (num as f64 / q as f64, num == 0)
            }
            None => {
                let a = self.alpha * (k1 * (2 * k - k1)) as f64;
                let b = (s * k1.abs()) as f64;
                let d = a - b;
                (d, libm::fabs(d) <= FLOAT_RESONANCE_TOL * (libm::fabs(a) + libm::fabs(b)))
            }
        }
    }

    #[inline]
    fn wave_parts(&self, j: i64, j1: i64) -> (f64, bool) {
        let (j, j1) = (j as i128, j1 as i128);
        match self.pq {
            Some((p, q)) => {
                let num = q * j.abs() - p * j * (2 * j1 - j);
                (num as f64 / q as f64, num == 0)
            }
            None => {
                let a = j.abs() as f64;
                let b = self.alpha * (j * (2 * j1 - j)) as f64;
                let d = a - b;
                (d, libm::fabs(d) <= FLOAT_RESONANCE_TOL * (a + libm::fabs(b)))
            }
        }
    }

    pub fn schro_is_resonant(&self, k: i64, k1: i64, branch: WaveBranch) -> bool {
        self.schro_parts(k, k1, branch).1
    }

    pub fn wave_is_resonant(&self, j: i64, j1: i64) -> bool {
        self.wave_parts(j, j1).1
    }

    /// `1 / D` for nonresonant tuples, `0` on resonances (the starred sum).
    #[inline]
    pub fn schro_inverse(&self, k: i64, k1: i64, branch: WaveBranch) -> f64 {
        let (d, zero) = self.schro_parts(k, k1, branch);
        if zero {
            0.0
        } else {
            1.0 / d
        }
    }

    #[inline]
    pub fn wave_inverse(&self, j: i64, j1: i64) -> f64 {
        let (d, zero) = self.wave_parts(j, j1);
        if zero {
            0.0
        } else {
            1.0 / d
        }
    }
}

/// Resonant tuples found by brute force.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResonanceScan {
    /// `(k, k1)` with `k1 != 0` for the `n_+` interaction.
    pub schro_plus: Vec<(i64, i64)>,
    /// `(k, k1)` for the `n_-` interaction.
    pub schro_minus: Vec<(i64, i64)>,
    /// `(j, j1)` with `j != 0` for the wave interaction.
    pub wave: Vec<(i64, i64)>,
}

/// Scans `|k|, |j| <= k_max` against every `k1`, `j1` that could make the
/// phase vanish, i.e. `|k1|, |j1| <= 2 k_max + 1/alpha + 1`.
pub fn scan_resonances(cls: &ResonanceClassifier, k_max: i64) -> ResonanceScan {
    let reach = 2 * k_max + libm::ceil(1.0 / cls.alpha()) as i64 + 1;
    let mut scan = ResonanceScan::default();
    for k in -k_max..=k_max {
        for k1 in -reach..=reach {
            if k1 == 0 {
                continue;
            }
            if cls.schro_is_resonant(k, k1, WaveBranch::Plus) {
                scan.schro_plus.push((k, k1));
            }
            if cls.schro_is_resonant(k, k1, WaveBranch::Minus) {
                scan.schro_minus.push((k, k1));
            }
        }
        if k != 0 {
            for j1 in -reach..=reach {
                if cls.wave_is_resonant(k, j1) {
                    scan.wave.push((k, j1));
                }
            }
        }
    }
    scan
}

/// Summary of `|D| / (<k1> <2k - k1>)` over nonresonant `n_+` tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparabilityReport {
    pub k_max: i64,
    pub pairs: usize,
    pub resonant_pairs: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Largest violation of
    /// `|alpha k^2 - alpha k2^2 - |k1|| = alpha |k1| |2k - k1 - sgn(k1)/alpha|`;
    /// identically zero when checked in integers.
    pub identity_max_error: f64,
    pub identity_exact: bool,
}

impl ComparabilityReport {
    pub fn is_comparable(&self) -> bool {
        self.min_ratio > 0.0 && (self.max_ratio / self.min_ratio).is_finite()
    }
}

pub fn denominator_comparability_check(cls: &ResonanceClassifier, k_max: i64) -> ComparabilityReport {
    let mut rep = ComparabilityReport {
        k_max,
        pairs: 0,
        resonant_pairs: 0,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        identity_max_error: 0.0,
        identity_exact: cls.is_exact(),
    };
    for k in -k_max..=k_max {
        for k1 in -k_max..=k_max {
            if k1 == 0 {
                continue;
            }
            let (d, zero) = cls.schro_parts(k, k1, WaveBranch::Plus);
            let sg = k1.signum();
            match cls.pq {
                Some((p, q)) => {
                    let (k, k1) = (k as i128, k1 as i128);
                    let lhs = (p * k1 * (2 * k - k1) - q * k1.abs()).abs();
                    let rhs = k1.abs() * (p * (2 * k - k1) - q * sg as i128).abs();
                    if lhs != rhs {
                        rep.identity_exact = false;
                        rep.identity_max_error = rep.identity_max_error.max(((lhs - rhs).abs() as f64) / q as f64);
                    }
                }
                None => {
                    let a = cls.alpha;
                    let lhs = libm::fabs(a * (k * k) as f64 - a * ((k - k1) * (k - k1)) as f64 - k1.abs() as f64);
                    let rhs = a * k1.abs() as f64 * libm::fabs((2 * k - k1) as f64 - sg as f64 / a);
                    let err = libm::fabs(lhs - rhs) / (1.0 + rhs);
                    rep.identity_max_error = rep.identity_max_error.max(err);
                }
            }
            if zero {
                rep.resonant_pairs += 1;
                continue;
            }
            rep.pairs += 1;
            let r = libm::fabs(d) / ((1 + k1.abs()) as f64 * (1 + (2 * k - k1).abs()) as f64);
            rep.min_ratio = rep.min_ratio.min(r);
            rep.max_ratio = rep.max_ratio.max(r);
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cls(p: i64, q: i64) -> ResonanceClassifier {
        ResonanceClassifier::new(&ModelParams::rational(p, q).unwrap())
    }

    #[test]
    fn modes() {
        assert!(cls(1, 1).is_resonant());
        assert_eq!(cls(1, 3).mode(), ResonanceMode::Resonant { inverse_alpha: 3 });
        assert!(!cls(3, 4).is_resonant());
        assert!(!cls(2, 1).is_resonant());
        let f = ResonanceClassifier::new(&ModelParams::new(0.5).unwrap());
        assert!(f.is_resonant() && f.warning().is_some());
        assert!(!ResonanceClassifier::new(&ModelParams::new(0.7).unwrap()).is_resonant());
    }

    #[test]
    fn paper_examples() {
        let c = cls(1, 1);
        assert_eq!(c.schro_denominator(3, 5, WaveBranch::Plus).value(), 0.0);
        assert!(c.schro_is_resonant(3, 5, WaveBranch::Plus));
        assert_eq!(c.wave_denominator(5, 3).value(), 0.0);
        assert!(c.wave_is_resonant(5, 3));
        assert_eq!(c.schro_inverse(3, 5, WaveBranch::Plus), 0.0);
        let d = cls(3, 4).schro_denominator(2, 1, WaveBranch::Minus);
        assert_eq!(d, Denominator::Exact(Ratio::new(13, 4)));
    }

    #[test]
    fn float_and_exact_agree() {
        let e = cls(5, 7);
        let f = ResonanceClassifier::new(&ModelParams::new(5.0 / 7.0).unwrap());
        for k in -20..=20 {
            for k1 in -20..=20 {
                for b in WaveBranch::BOTH {
                    if k1 != 0 {
                        let x = e.schro_denominator(k, k1, b).value();
                        let y = f.schro_denominator(k, k1, b).value();
                        assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
                    }
                }
                let x = e.wave_denominator(k, k1).value();
                let y = f.wave_denominator(k, k1).value();
                assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn comparability() {
        let r = denominator_comparability_check(&cls(1, 1), 100);
        assert!(r.identity_exact && r.is_comparable());
        assert!(r.resonant_pairs > 0);
        let r = denominator_comparability_check(&cls(3, 4), 100);
        assert!(r.identity_exact && r.is_comparable() && r.resonant_pairs == 0);
        let f = ResonanceClassifier::new(&ModelParams::new(0.75).unwrap());
        let r = denominator_comparability_check(&f, 50);
        assert!(r.identity_max_error < 1e-12);
    }
}
