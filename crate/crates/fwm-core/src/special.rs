//! Small internal special-function kit: log-gamma, factorials in log
//! space, and gamma at half-integer arguments. Everything here is exact
//! enough for mode orders up to a few hundred, which is far beyond the
//! subspaces the library supports.

/// Lanczos approximation (g = 7, 9 coefficients), |error| < 2e-10 on the
/// positive real axis. Only ever called with x > 0 here.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_81,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_72,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_312e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection, keeps the approximation accurate near zero
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// ln(n!) via ln_gamma.
pub(crate) fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Binomial coefficient as f64, stable for the small orders used in the
/// nested-sum amplitude formula.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    (ln_factorial(n as u64) - ln_factorial(k as u64) - ln_factorial((n - k) as u64)).exp()
}
