//! Overlap matrices of stationary modes with the x-integrals done in closed form.
//!
//! On `x ≥ 0` each mode is a short sum of `(A + xB) e^{iκx}` with `Im κ > 0`,
//! so `∫₀^∞ xⁿ e^{iux} dx = n! (i/u)^{n+1}` gives every entry exactly.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::scattering::{ExpTerm, StationaryMode};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Time samples handled together so each matrix row is streamed once per block.
const BLOCK: usize = 16;

/// `∫₀^∞ conj(a_c(x)) b_c(x) dx` for one channel `c`.
fn half_line(a: &ExpTerm, b: &ExpTerm, c: usize) -> C64 {
    let iu = I / (b.wavenumber - a.wavenumber.conj());
    let (a0, a1) = (a.constant[c].conj(), a.linear[c].conj());
    let (b0, b1) = (b.constant[c], b.linear[c]);
    let mut s = a0 * b0 * iu;
    if a1 != C64::new(0.0, 0.0) || b1 != C64::new(0.0, 0.0) {
        s += (a0 * b1 + a1 * b0) * iu * iu + 2.0 * a1 * b1 * iu * iu * iu;
    }
    s
}

fn right_overlap(m: &StationaryMode, n: &StationaryMode, c: usize) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for a in &m.right {
        for b in &n.right {
            s += half_line(a, b, c);
        }
    }
    s
}

/// Excited channel on `x < 0`: `R₂ e^{−iqx}/√(2π)`.
fn left_excited(m: &StationaryMode, n: &StationaryMode) -> C64 {
    let u = m.q.conj() - n.q;
    m.r2.conj() * n.r2 * (-I / u) / TWO_PI
}

/// Interference of incident and reflected ground waves on `x < 0`, symmetrized.
fn left_ground_cross(m: &StationaryMode, n: &StationaryMode) -> C64 {
    (I * n.r1 - I * m.r1.conj()) / (TWO_PI * (m.k + n.k))
}

/// `∫_{−L}^0 e^{iqx} dx`.
fn finite_left(q: f64, l: f64) -> C64 {
    let h = 0.5 * q * l;
    let sinc = if h.abs() < 1e-4 { 1.0 - h * h / 6.0 } else { h.sin() / h };
    C64::from_polar(l * sinc, -h)
}

/// Incident and reflected ground envelopes on `[−L, 0]`.
fn left_envelopes(m: &StationaryMode, n: &StationaryMode, l: f64) -> C64 {
    let q = n.k - m.k;
    (finite_left(q, l) + m.r1.conj() * n.r1 * finite_left(-q, l)) / TWO_PI
}

/// Which pieces of `∫|Ψ|²` a kernel collects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// Excited channel over the whole line; `γ` times its form is `Π`.
    Excited,
    /// Both channels on `x ≥ 0`.
    Penetration,
    /// Everything except the incident and reflected envelopes on `x < 0`.
    Survival,
}

/// Dense Hermitian matrix stored as split real and imaginary rows.
#[derive(Debug, Clone)]
pub struct HermitianKernel {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl HermitianKernel {
    pub fn build(modes: &[StationaryMode], kind: KernelKind) -> Self {
        Self::from_entries(modes, |m, o| match kind {
            KernelKind::Excited => right_overlap(m, o, 1) + left_excited(m, o),
            KernelKind::Penetration => right_overlap(m, o, 0) + right_overlap(m, o, 1),
            KernelKind::Survival => right_overlap(m, o, 0) + right_overlap(m, o, 1) + left_excited(m, o) + left_ground_cross(m, o),
        })
    }

    /// Whole norm with the incident and reflected envelopes cut at `x_min < 0`.
    pub fn survival_from(modes: &[StationaryMode], x_min: f64) -> Self {
        let l = -x_min;
        Self::from_entries(modes, |m, o| {
            right_overlap(m, o, 0) + right_overlap(m, o, 1) + left_excited(m, o) + left_ground_cross(m, o) + left_envelopes(m, o, l)
        })
    }

    fn from_entries(modes: &[StationaryMode], entry: impl Fn(&StationaryMode, &StationaryMode) -> C64 + Sync) -> Self {
        let n = modes.len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let m = &modes[i];
                let mut re = vec![0.0; n];
                let mut im = vec![0.0; n];
                for j in i..n {
                    let v = entry(m, &modes[j]);
                    re[j] = v.re;
                    im[j] = v.im;
                }
                (re, im)
            })
            .collect();
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for (i, (r, m)) in rows.into_iter().enumerate() {
            re[i * n..(i + 1) * n].copy_from_slice(&r);
            im[i * n..(i + 1) * n].copy_from_slice(&m);
        }
        // enforce exact Hermitian symmetry from the upper triangle
        for i in 0..n {
            im[i * n + i] = 0.0;
            for j in 0..i {
                re[i * n + j] = re[j * n + i];
                im[i * n + j] = -im[j * n + i];
            }
        }
        Self { n, re, im }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        C64::new(self.re[i * self.n + j], self.im[i * self.n + j])
    }

    /// `v^H G v` for each vector.
    pub fn forms(&self, vectors: &[Vec<C64>]) -> Vec<f64> {
        vectors.par_chunks(BLOCK).flat_map_iter(|chunk| self.forms_block(chunk)).collect()
    }

    fn forms_block(&self, chunk: &[Vec<C64>]) -> Vec<f64> {
        let n = self.n;
        // vectors interleaved so the innermost loop runs over the block
        let mut vr = vec![0.0; n * BLOCK];
        let mut vi = vec![0.0; n * BLOCK];
        for (b, v) in chunk.iter().enumerate() {
            for (j, z) in v.iter().enumerate() {
                vr[j * BLOCK + b] = z.re;
                vi[j * BLOCK + b] = z.im;
            }
        }
        let mut out = [0.0; BLOCK];
        for i in 0..n {
            let mut ar = [0.0; BLOCK];
            let mut ai = [0.0; BLOCK];
            let row = i * n;
            let vr_tail = vr[(i + 1) * BLOCK..].chunks_exact(BLOCK);
            let vi_tail = vi[(i + 1) * BLOCK..].chunks_exact(BLOCK);
            for (((&gr, &gi), xr), xi) in self.re[row + i + 1..row + n].iter().zip(&self.im[row + i + 1..row + n]).zip(vr_tail).zip(vi_tail) {
                for b in 0..BLOCK {
                    ar[b] += gr * xr[b] - gi * xi[b];
                    ai[b] += gr * xi[b] + gi * xr[b];
                }
            }
            let d = self.re[row + i];
            let (xr, xi) = (&vr[i * BLOCK..(i + 1) * BLOCK], &vi[i * BLOCK..(i + 1) * BLOCK]);
            for b in 0..BLOCK {
                // 2 Re(conj(v_i) s) + G_ii |v_i|²
                out[b] += 2.0 * (xr[b] * ar[b] + xi[b] * ai[b]) + d * (xr[b] * xr[b] + xi[b] * xi[b]);
            }
        }
        out[..chunk.len()].to_vec()
    }
}
