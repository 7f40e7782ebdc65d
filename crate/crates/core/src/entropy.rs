use crate::error::{Error, Result};

/// Binary Shannon entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "binary entropy argument must lie in [0, 1], got {x}"
        )));
    }
    let plogp = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(plogp(x) + plogp(1.0 - x))
}
