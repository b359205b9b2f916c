//! Logarithmic power-unit conversions.

use crate::error::{Error, Result};

/// `10^(x/10)`.
pub fn db_to_linear(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("db_to_linear"));
    }
    Ok(db_lin(x))
}

pub fn linear_to_db(ratio: f64) -> Result<f64> {
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::NonFinite("linear_to_db"));
    }
    Ok(10.0 * ratio.log10())
}

pub fn dbm_to_mw(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("dbm_to_mw"));
    }
    Ok(db_lin(x))
}

pub fn mw_to_dbm(mw: f64) -> Result<f64> {
    if !mw.is_finite() || mw <= 0.0 {
        return Err(Error::NonFinite("mw_to_dbm"));
    }
    Ok(10.0 * mw.log10())
}

// Unchecked form for internal use on already-validated values.
#[inline]
pub(crate) fn db_lin(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}
