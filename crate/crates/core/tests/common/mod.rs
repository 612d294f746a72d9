#![allow(dead_code)]

use std::collections::BTreeMap;

use mint_core::{DiscreteColumn, TransductiveView};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plug-in MI in bits by explicit enumeration of the joint alphabet.
pub fn naive_mi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut mi = 0.0;
    let alpha_a: Vec<usize> = sorted_unique(a);
    let alpha_b: Vec<usize> = sorted_unique(b);
    for &x in &alpha_a {
        for &y in &alpha_b {
            let mut nxy = 0.0;
            let mut nx = 0.0;
            let mut ny = 0.0;
            for i in 0..a.len() {
                if a[i] == x {
                    nx += 1.0;
                }
                if b[i] == y {
                    ny += 1.0;
                }
                if a[i] == x && b[i] == y {
                    nxy += 1.0;
                }
            }
            if nxy > 0.0 {
                mi += nxy / n * ((nxy * n) / (nx * ny)).log2();
            }
        }
    }
    mi.max(0.0)
}

pub fn naive_entropy(a: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut counts = BTreeMap::new();
    for &x in a {
        *counts.entry(x).or_insert(0usize) += 1;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn sorted_unique(a: &[usize]) -> Vec<usize> {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn col(codes: &[usize]) -> DiscreteColumn {
    DiscreteColumn::from_codes(codes).unwrap()
}

/// A random selection problem: train-only view, view with a test block and
/// the requested subset size.
pub struct Instance {
    pub m: usize,
    pub n: usize,
    pub n_train: usize,
    pub inductive: TransductiveView,
    pub transductive: TransductiveView,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(2..=200);
    let n = rng.random_range(1..=m.min(50));
    let n_train = rng.random_range(5..=100);
    let n_test = rng.random_range(1..=20);
    let alphabet = rng.random_range(2..=4);
    let target: Vec<usize> = (0..n_train)
        .map(|_| rng.random_range(0..alphabet))
        .collect();
    let mut train = Vec::with_capacity(m);
    let mut all = Vec::with_capacity(m);
    for j in 0..m {
        let mut codes: Vec<usize> = (0..n_train + n_test)
            .map(|_| rng.random_range(0..3))
            .collect();
        // some columns partially copy the target or an earlier column
        if j % 5 == 1 {
            for (c, &t) in codes.iter_mut().zip(&target) {
                if rng.random_bool(0.6) {
                    *c = t % 3;
                }
            }
        }
        train.push(col(&codes[..n_train]));
        all.push(col(&codes));
    }
    let target = col(&target);
    Instance {
        m,
        n,
        n_train,
        inductive: TransductiveView::inductive(train.clone(), target.clone()).unwrap(),
        transductive: TransductiveView::new(train, all, target).unwrap(),
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
