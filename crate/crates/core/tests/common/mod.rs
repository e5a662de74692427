//! Shared helpers for the integration suites: an independent slow-but-sure
//! transform oracle and seeded random-measure generators.
//!
//! Each integration test compiles this module separately, so not every
//! helper is referenced from every suite.
#![allow(dead_code)]

use minv_core::group::GroupSpec;
use minv_core::measure::DiscreteMeasure;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use std::f64::consts::TAU;

/// Naive character-sum transform over the full dual of a finite group,
/// written from the definition with library trig only — deliberately
/// sharing no code with the crate's fast paths.
pub fn naive_dual_values(mu: &DiscreteMeasure) -> Vec<Complex64> {
    let group = mu.group();
    let moduli: Vec<i64> = match group {
        GroupSpec::Finite { moduli } => moduli.iter().map(|&n| n as i64).collect(),
        GroupSpec::Lattice { .. } => panic!("oracle needs a finite group"),
    };
    let order: i64 = moduli.iter().product();
    let mut out = Vec::with_capacity(order as usize);
    for idx in 0..order {
        // Dual index in the same little-endian enumeration the crate uses.
        let mut rem = idx;
        let gamma: Vec<i64> = moduli
            .iter()
            .map(|&n| {
                let g = rem % n;
                rem /= n;
                g
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, a) in mu.atoms() {
            let mut phase = 0.0f64;
            for ((&g, &c), &n) in gamma.iter().zip(x.coords()).zip(&moduli) {
                phase += TAU * ((g * c).rem_euclid(n)) as f64 / n as f64;
            }
            acc += a * Complex64::new(phase.cos(), phase.sin());
        }
        out.push(acc);
    }
    out
}

/// Smallest dual-value modulus according to the naive oracle.
pub fn naive_floor(mu: &DiscreteMeasure) -> f64 {
    naive_dual_values(mu)
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.norm()))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random measure with a dominant atom: head mass `m ∈ (½ + margin, 1]`,
/// tail mass at most `min(1 − m, m − ½ − margin)`, so the spectral floor
/// provably exceeds `½ + margin` while `‖μ‖ ≤ 1`. `real` keeps every
/// amplitude real (for exponent-two claims); otherwise phases are random.
pub fn random_dominant_measure(
    group: &GroupSpec,
    rng: &mut ChaCha8Rng,
    margin: f64,
    real: bool,
) -> DiscreteMeasure {
    let order = group.order().expect("generator needs a finite group") as usize;
    let m = 0.5 + margin + (0.5 - margin) * rng.random::<f64>();
    let budget = (1.0 - m).min(m - 0.5 - margin).max(0.0);

    let head_index = rng.random_range(0..order);
    let head_phase = if real {
        Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
    } else {
        let t = TAU * rng.random::<f64>();
        Complex64::new(t.cos(), t.sin())
    };

    let tail_count = rng.random_range(0..=(order - 1).min(6));
    let mut atoms = vec![(head_index, head_phase * m)];
    let mut remaining = budget;
    for _ in 0..tail_count {
        let mut idx = rng.random_range(0..order);
        while idx == head_index {
            idx = rng.random_range(0..order);
        }
        let w = remaining * rng.random::<f64>();
        remaining -= w;
        let phase = if real {
            Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
        } else {
            let t = TAU * rng.random::<f64>();
            Complex64::new(t.cos(), t.sin())
        };
        atoms.push((idx, phase * w));
    }

    DiscreteMeasure::from_atoms(
        group,
        atoms.into_iter().map(|(idx, amp)| {
            let coords = group
                .element_at(idx)
                .expect("index within order")
                .coords()
                .to_vec();
            (coords, amp)
        }),
    )
    .expect("construction stays within the group")
}

/// Nonincreasing nonnegative sequence with `Σx ≤ 1` and a floor
/// `δ ∈ (½, √(Σx²)]`, i.e. exactly the hypotheses of the head-of-sequence
/// lemma.
pub fn random_head_sequence(rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    loop {
        let head = 0.51 + 0.49 * rng.random::<f64>();
        let k = rng.random_range(0..5);
        let budget = 1.0 - head;
        let mut xs = vec![head];
        let mut remaining = budget;
        for _ in 0..k {
            let w = (remaining * rng.random::<f64>()).min(head);
            remaining -= w;
            xs.push(w);
        }
        xs.sort_by(|a, b| b.total_cmp(a));
        let sq: f64 = xs.iter().map(|v| v * v).sum();
        let hi = sq.sqrt().min(1.0);
        if hi <= 0.5 {
            continue;
        }
        let delta = 0.5 + (hi - 0.5) * rng.random::<f64>().max(1e-9);
        if delta > 0.5 && delta * delta <= sq {
            return (xs, delta);
        }
    }
}
