//! Reference implementations used by the integration tests.
#![allow(dead_code)]

use cvqkd_core::keyrate::{Detection, EtaConvention, KeyRateParams};
use nalgebra::{DMatrix, SymmetricEigen};

/// Composite Simpson rule on `[a, b]` with `n` (made even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Oracle output: mutual information, Holevo bound and their difference.
#[derive(Debug, Clone, Copy)]
pub struct OracleRate {
    pub mutual_info: f64,
    pub holevo: f64,
    pub raw_rate: f64,
}

fn g(nu: f64) -> f64 {
    let x = (nu - 1.0) / 2.0;
    if x <= 1e-15 {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).log2() - x * x.log2()
    }
}

fn omega(modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

/// Symplectic eigenvalues from the symmetric matrix `γ^{1/2} Ωᵀ γ Ω γ^{1/2}`,
/// whose eigenvalues are the squared symplectic eigenvalues, each twice.
pub fn symplectic_eigenvalues(gamma: &DMatrix<f64>) -> Vec<f64> {
    let n = gamma.nrows() / 2;
    let eig = SymmetricEigen::new(gamma.clone());
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let w = omega(n);
    let m = &root * w.transpose() * gamma * &w * &root;
    let m = (&m + m.transpose()) * 0.5;
    let mut sq: Vec<f64> = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    sq.sort_by(|a, b| a.total_cmp(b));
    sq.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

fn entropy(gamma: &DMatrix<f64>) -> f64 {
    symplectic_eigenvalues(gamma).into_iter().map(g).sum()
}

fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Covariance after conditioning on a measurement of the mode at `meas`.
fn condition(gamma: &DMatrix<f64>, meas: &[usize], het: bool) -> DMatrix<f64> {
    let rest: Vec<usize> = (0..gamma.nrows()).filter(|i| !meas.contains(i)).collect();
    let a = select(gamma, &rest, &rest);
    let c = select(gamma, &rest, meas);
    let b = select(gamma, meas, meas);
    let inv = if het {
        (b + DMatrix::identity(2, 2)).try_inverse().unwrap()
    } else {
        let mut p = DMatrix::zeros(2, 2);
        p[(0, 0)] = 1.0 / b[(0, 0)];
        p
    };
    &a - &c * inv * c.transpose()
}

/// Brute-force covariance-matrix evaluation of the RR Devetak-Winter rate.
///
/// Modes: Alice's EPR half `A`, Bob's mode `B`, and the detector noise EPR
/// pair `F0`, `G` mixed with `B` on a beamsplitter of transmittance `η`.
pub fn covariance_oracle(p: &KeyRateParams) -> OracleRate {
    let (t, eta) = match p.convention {
        EtaConvention::Trusted => (p.t_ch, p.eta_det * p.eta_tm),
        EtaConvention::Untrusted => (p.t_ch * p.eta_tm, p.eta_det),
    };
    let het = p.detection == Detection::Heterodyne;
    let v = p.v_a + 1.0;
    // Noise added by the channel, referred to Bob's input.
    let bob_var = t * (v - 1.0) + 1.0 + t * p.epsilon / p.t_ch;
    let corr = (t * (v * v - 1.0)).sqrt();

    // Noise EPR variance reproducing v_el at the detector output.
    let nu = if eta < 1.0 {
        1.0 + if het { 2.0 } else { 1.0 } * p.v_el / (1.0 - eta)
    } else {
        1.0
    };
    let nu_corr = (nu * nu - 1.0).sqrt();

    let mut gamma = DMatrix::<f64>::zeros(8, 8);
    let z = [1.0, -1.0];
    for q in 0..2 {
        gamma[(q, q)] = v;
        gamma[(2 + q, 2 + q)] = bob_var;
        gamma[(q, 2 + q)] = corr * z[q];
        gamma[(2 + q, q)] = corr * z[q];
        gamma[(4 + q, 4 + q)] = nu;
        gamma[(6 + q, 6 + q)] = nu;
        gamma[(4 + q, 6 + q)] = nu_corr * z[q];
        gamma[(6 + q, 4 + q)] = nu_corr * z[q];
    }
    let s_ab = entropy(&select(&gamma, &[0, 1, 2, 3], &[0, 1, 2, 3]));

    // Beamsplitter on (B, F0).
    let (ct, st) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut s = DMatrix::<f64>::identity(8, 8);
    for q in 0..2 {
        s[(2 + q, 2 + q)] = ct;
        s[(2 + q, 4 + q)] = st;
        s[(4 + q, 2 + q)] = -st;
        s[(4 + q, 4 + q)] = ct;
    }
    let out = &s * &gamma * s.transpose();

    let cond = condition(&out, &[2, 3], het);
    let s_cond = entropy(&cond);
    let holevo = s_ab - s_cond;

    // Alice's coherent-state preparation is a heterodyne on A.
    let bob = select(&out, &[2, 3], &[2, 3]);
    let bob_given_a = condition(&select(&out, &[0, 1, 2, 3], &[0, 1, 2, 3]), &[0, 1], true);
    let mutual_info = if het {
        ((bob[(0, 0)] + 1.0) / (bob_given_a[(0, 0)] + 1.0)).log2()
    } else {
        0.5 * (bob[(0, 0)] / bob_given_a[(0, 0)]).log2()
    };
    OracleRate {
        mutual_info,
        holevo,
        raw_rate: p.beta * mutual_info - holevo,
    }
}

/// Parameter grid used for oracle comparisons: 5 transmittances × 5 noise
/// levels × 3 mode-matching efficiencies.
pub fn oracle_grid() -> Vec<KeyRateParams> {
    let mut out = Vec::new();
    for t_ch in [1.0, 0.8, 0.5, 0.2, 0.05] {
        for epsilon in [0.0, 0.005, 0.01, 0.03, 0.08] {
            for eta_tm in [1.0, 0.8, 0.25] {
                out.push(KeyRateParams {
                    t_ch,
                    epsilon,
                    eta_tm,
                    ..KeyRateParams::default()
                });
            }
        }
    }
    out
}
