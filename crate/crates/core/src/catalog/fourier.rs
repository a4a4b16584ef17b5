//! Orthogonal projector onto band-limited signals.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::operator::{Operator, Regularity};
use crate::signal::Signal;
use crate::{Error, Result};

/// DFT bins kept by a band limit of `retained` (odd) bins in dimension `dim`:
/// the DC bin plus `(retained − 1)/2` conjugate-symmetric pairs.
pub fn bandlimit_mask(dim: usize, retained: usize) -> Result<Vec<bool>> {
    if retained == 0 || retained % 2 == 0 || retained > dim {
        return Err(Error::InvalidBand { dim, retained });
    }
    let half = (retained - 1) / 2;
    Ok((0..dim).map(|k| k <= half || k >= dim - half).collect())
}

type Buffers = (Vec<Complex<f64>>, Vec<Complex<f64>>);

thread_local! {
    static SCRATCH: RefCell<Buffers> = const { RefCell::new((Vec::new(), Vec::new())) };
}

/// Projector zeroing every DFT bin outside [`bandlimit_mask`]. Real signals
/// map to real signals; the operator is linear, idempotent and self-adjoint.
pub fn bandlimit_projector(dim: usize, retained: usize) -> Result<Operator> {
    let mask = bandlimit_mask(dim, retained)?;
    let label = format!("bandlimit_projector(N={dim}, B={retained})");
    if retained == dim {
        return Ok(Operator::identity(dim).with_label(label));
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(dim);
    let inverse = planner.plan_fft_inverse(dim);
    let mask = Arc::new(mask);
    let scale = 1.0 / dim as f64;
    Ok(Operator::new(
        dim,
        Regularity::FirmlyNonexpansive,
        label,
        move |x: &Signal| {
            SCRATCH.with(|cell| {
                let (buf, scratch) = &mut *cell.borrow_mut();
                buf.clear();
                buf.extend(x.iter().map(|&v| Complex::new(v, 0.0)));
                let need = forward
                    .get_inplace_scratch_len()
                    .max(inverse.get_inplace_scratch_len());
                if scratch.len() < need {
                    scratch.resize(need, Complex::new(0.0, 0.0));
                }
                forward.process_with_scratch(buf, &mut scratch[..need]);
                for (b, &keep) in buf.iter_mut().zip(mask.iter()) {
                    if !keep {
                        *b = Complex::new(0.0, 0.0);
                    }
                }
                inverse.process_with_scratch(buf, &mut scratch[..need]);
                buf.iter()
                    .map(|c| c.re * scale)
                    .collect::<Vec<f64>>()
                    .into()
            })
        },
    ))
}
