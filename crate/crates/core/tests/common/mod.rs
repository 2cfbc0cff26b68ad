//! Plant instances shared by the integration tests.
#![allow(dead_code)]

use delaylqr::delay::DelayModel;
use delaylqr::linalg::{Mat, Vector};
use delaylqr::plant::PlantSpec;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn scalar(v: f64) -> Mat {
    Mat::from_element(1, 1, v)
}

/// The two coupled scalar subsystems used throughout the acceptance runs.
pub fn scalar_spec(delay: usize) -> PlantSpec {
    PlantSpec {
        delay,
        a11: scalar(1.1),
        a12: scalar(0.4),
        a21: scalar(0.3),
        a22: scalar(0.8),
        b1: scalar(1.0),
        b2: scalar(1.0),
        q: PlantSpec::local_state_cost(delay, &scalar(1.0), &scalar(1.0)),
        r: Mat::identity(2, 2),
        w1: scalar(1.0),
        w2: scalar(1.0),
        mu0_1: Vector::from_element(1, 1.0),
        mu0_2: Vector::zeros(1),
        sigma0_1: scalar(1.0),
        sigma0_2: scalar(1.0),
        q_terminal: None,
    }
}

pub fn half_and_half() -> DelayModel {
    DelayModel::symmetric(2, &[(0, 0.5), (2, 0.5)]).unwrap()
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Mat {
    Mat::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, floor: f64) -> Mat {
    let g = gaussian(rng, n, n, 1.0 / (n as f64).sqrt());
    &g * g.transpose() + floor * Mat::identity(n, n)
}

/// A random, stabilizable two-subsystem plant with `n1, n2 ∈ 1..=max_n`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, delay: usize, max_n: usize) -> PlantSpec {
    let n1 = rng.random_range(1..=max_n);
    let n2 = rng.random_range(1..=max_n);
    let a = |rng: &mut R, r, c, diag: bool| {
        let mut m = gaussian(rng, r, c, 0.35);
        if diag {
            m += 0.9 * Mat::identity(r, c);
        }
        m
    };
    let b = |rng: &mut R, n| Mat::identity(n, n) + gaussian(rng, n, n, 0.2);
    let q1 = random_psd(rng, n1, 0.2);
    let q2 = random_psd(rng, n2, 0.2);
    PlantSpec {
        delay,
        a11: a(rng, n1, n1, true),
        a12: a(rng, n1, n2, false),
        a21: a(rng, n2, n1, false),
        a22: a(rng, n2, n2, true),
        b1: b(rng, n1),
        b2: b(rng, n2),
        q: PlantSpec::local_state_cost(delay, &q1, &q2),
        r: random_psd(rng, n1 + n2, 0.5),
        w1: random_psd(rng, n1, 0.1),
        w2: random_psd(rng, n2, 0.1),
        mu0_1: gaussian(rng, n1, 1, 1.0).column(0).into_owned(),
        mu0_2: Vector::zeros(n2),
        sigma0_1: random_psd(rng, n1, 0.1),
        sigma0_2: random_psd(rng, n2, 0.1),
        q_terminal: None,
    }
}

/// A random pmf over `0..=delay` with every delay possible.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, delay: usize) -> DelayModel {
    let draw = |rng: &mut R| {
        let w: Vec<f64> = (0..=delay).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter().enumerate().map(|(d, x)| (d, x / s)).collect::<Vec<_>>()
    };
    let p1 = draw(rng);
    let p2 = draw(rng);
    DelayModel::new(delay, &p1, &p2).unwrap()
}
