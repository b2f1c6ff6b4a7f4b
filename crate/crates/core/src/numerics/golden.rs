use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `width`.
///
/// Ties between the two interior probes keep the left sub-bracket, so flat
/// stretches resolve towards smaller arguments.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, width: f64) -> Result<Minimum> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "invalid bracket [{lo}, {hi}]"
        )));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_nan() || v == f64::NEG_INFINITY {
            Err(Error::UnboundedObjective)
        } else {
            Ok(v)
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    let mut iterations = 0;
    while b - a > width && iterations < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
        iterations += 1;
    }
    let x = 0.5 * (a + b);
    Ok(Minimum {
        x,
        value: eval(x)?,
        iterations,
    })
}
