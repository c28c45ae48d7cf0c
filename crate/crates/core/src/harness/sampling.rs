use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{StateVector, UnitaryMatrix, MAX_UNITARY_QUBITS};
use crate::error::{Error, Result};
use crate::optimize::seeded_rng;

fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random `d × d` unitary from a caller-owned generator.
pub fn haar_unitary_with<R: Rng>(d: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if d == 0 || !d.is_power_of_two() || d > 1 << MAX_UNITARY_QUBITS {
        return Err(Error::InvalidConfig(format!(
            "Haar dimension must be 2^n with n <= {MAX_UNITARY_QUBITS}, got {d}"
        )));
    }
    let g = DMatrix::from_fn(d, d, |_, _| complex_normal(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    Ok(q)
}

/// Haar-random `d × d` unitary: Ginibre matrix, QR, then the phases of `R`'s
/// diagonal pushed into `Q`.
pub fn haar_unitary(d: usize, seed: u64) -> Result<UnitaryMatrix> {
    haar_unitary_with(d, &mut seeded_rng(seed))
}

/// Uniformly random pure state in `C^d`.
pub fn haar_state_with<R: Rng>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| complex_normal(rng)).collect();
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// `count` random states inside a random `2^(n − n_trash)`-dimensional subspace,
/// so that some unitary maps all of them to `|0…0>` on the first `n_trash` qubits.
pub fn compressible_dataset(n: usize, n_trash: usize, count: usize, seed: u64) -> Result<Vec<StateVector>> {
    if n_trash == 0 || n_trash >= n {
        return Err(Error::InvalidConfig(format!("trash register size {n_trash} must be in 1..{n}")));
    }
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = seeded_rng(seed);
    let d = 1usize << n;
    let k = 1usize << (n - n_trash);
    let v = haar_unitary_with(d, &mut rng)?;
    let iso = v.columns(0, k);
    (0..count)
        .map(|_| {
            let c = DVector::from_vec(haar_state_with(k, &mut rng));
            let psi = &iso * c;
            StateVector::from_amplitudes(psi.iter().copied().collect())
        })
        .collect()
}

/// Monte-Carlo estimates of `E|U_00|²` and `E|Tr U|²` with their standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HaarMoments {
    pub samples: usize,
    pub d: usize,
    pub entry_mean: f64,
    pub entry_se: f64,
    pub trace_mean: f64,
    pub trace_se: f64,
}

impl HaarMoments {
    /// Both means within `k` standard errors of `1/d` and `1`.
    pub fn within(&self, k: f64) -> bool {
        (self.entry_mean - 1.0 / self.d as f64).abs() <= k * self.entry_se
            && (self.trace_mean - 1.0).abs() <= k * self.trace_se
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn haar_moments(d: usize, samples: usize, seed: u64) -> Result<HaarMoments> {
    if samples < 2 {
        return Err(Error::InvalidConfig("need at least two samples".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut entry = Vec::with_capacity(samples);
    let mut trace = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u = haar_unitary_with(d, &mut rng)?;
        entry.push(u[(0, 0)].norm_sqr());
        trace.push(u.trace().norm_sqr());
    }
    let (entry_mean, entry_se) = mean_se(&entry);
    let (trace_mean, trace_se) = mean_se(&trace);
    Ok(HaarMoments {
        samples,
        d,
        entry_mean,
        entry_se,
        trace_mean,
        trace_se,
    })
}
