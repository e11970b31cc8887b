//! Reciprocal Gamma function.
//!
//! `1/Γ` is entire, so it is evaluated directly instead of inverting `Γ`:
//! the non-positive integers return an exact zero, and negative arguments
//! go through the reflection formula `1/Γ(s) = sin(πs) Γ(1−s) / π`.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `1/Γ(s)` for real `s`; exactly `0.0` at `s = 0, −1, −2, …`.
pub fn reciprocal_gamma(s: f64) -> f64 {
    if s.is_nan() {
        return f64::NAN;
    }
    if s <= 0.0 && s == s.floor() {
        return 0.0;
    }
    if s == s.floor() && s <= 171.0 {
        // 1/(s-1)! exactly for small positive integers
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < s {
            acc *= k;
            k += 1.0;
        }
        return 1.0 / acc;
    }
    if s < 0.5 {
        return sin_pi(s) * gamma_lanczos(1.0 - s) / PI;
    }
    1.0 / gamma_lanczos(s)
}

/// `Γ(s)` for `s ≥ 0.5`.
fn gamma_lanczos(s: f64) -> f64 {
    let x = s - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `sin(πs)` with the argument reduced mod 2 first.
fn sin_pi(s: f64) -> f64 {
    let r = s.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_values() {
        assert_eq!(reciprocal_gamma(1.0), 1.0);
        assert_eq!(reciprocal_gamma(0.0), 0.0);
        assert_eq!(reciprocal_gamma(-3.0), 0.0);
        let half = reciprocal_gamma(0.5);
        assert!((half - 1.0 / PI.sqrt()).abs() < 1e-14);
        assert!((half - 0.564_189_583_5).abs() < 1e-10);
        // Γ(-1/2) = -2√π
        assert!((reciprocal_gamma(-0.5) + 1.0 / (2.0 * PI.sqrt())).abs() < 1e-14);
        assert!((reciprocal_gamma(5.0) - 1.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn reflection_branch_matches_recurrence() {
        for &s in &[-0.3, -1.7, -4.25, -9.9, 0.2] {
            let lhs = reciprocal_gamma(s + 1.0);
            let rhs = reciprocal_gamma(s) / s;
            assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1e-300), "s = {s}");
        }
    }
}
