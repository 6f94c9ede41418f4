use crate::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Natural log of the gamma function for positive arguments.
///
/// Arguments below 10 are shifted up with the recurrence `Γ(x+1) = xΓ(x)`;
/// the Stirling series with eight Bernoulli corrections takes over from
/// there, which keeps the absolute error near 1e-16 at the zeros `x = 1, 2`
/// and the relative error near machine precision elsewhere.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires a finite positive argument, got {x}")));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let mut z = x;
    let mut shift = 1.0;
    while z < 10.0 {
        shift *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut power = inv;
    for c in STIRLING {
        series += c * power;
        power *= inv2;
    }
    let stirling = (z - 0.5) * z.ln() - z + HALF_LN_2PI + series;
    Ok(stirling - shift.ln())
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("p must lie in [1, inf], got {p}")));
    }
    Ok(())
}

/// `ln |B_p^n|` with `|B_p^n| = (2Γ(1 + 1/p))^n / Γ(1 + n/p)`; `n = 0` gives 0.
pub fn log_ball_volume(p: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    let n = n as f64;
    if p.is_infinite() {
        return Ok(n * std::f64::consts::LN_2);
    }
    Ok(n * (std::f64::consts::LN_2 + log_gamma(1.0 + 1.0 / p)?) - log_gamma(1.0 + n / p)?)
}

/// Volume of the unit `ℓ_p^n` ball.
pub fn ball_volume(p: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if p.is_infinite() {
        return Ok(2f64.powi(n as i32));
    }
    Ok(log_ball_volume(p, n)?.exp())
}

/// `|B_p^{n-1}| / |B_p^n|`, of order `n^{1/p}`.
pub fn ball_volume_ratio(p: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("volume ratio needs n >= 2, got {n}")));
    }
    check_p(p)?;
    if p.is_infinite() {
        return Ok(0.5);
    }
    Ok((log_ball_volume(p, n - 1)? - log_ball_volume(p, n)?).exp())
}

/// `exponent * ln(1 - base_complement)` through `ln_1p`, so that
/// `(1 - u)^e` can be carried in log space when `e` is large and `u` small.
pub fn log1p_pow(base_complement: f64, exponent: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&base_complement) {
        return Err(Error::domain(format!("base complement must lie in [0, 1], got {base_complement}")));
    }
    if !(exponent > 0.0) || !exponent.is_finite() {
        return Err(Error::domain(format!("exponent must be finite and positive, got {exponent}")));
    }
    if base_complement == 0.0 {
        return Ok(0.0);
    }
    if base_complement == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(exponent * (-base_complement).ln_1p())
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
