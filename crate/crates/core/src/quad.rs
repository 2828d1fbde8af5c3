//! Deterministic summation and one-dimensional quadrature rules.

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Weights of the composite rule over `k` uniform intervals of width `h`
/// (`k + 1` samples): Simpson when `k` is even; otherwise Simpson followed by
/// a closing 3/8 panel. `k = 1` falls back to the trapezoid.
pub fn simpson_weights(k: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; k + 1];
    match k {
        0 => {}
        1 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
        }
        _ => {
            let simpson_end = if k % 2 == 0 { k } else { k - 3 };
            let mut j = 0;
            while j < simpson_end {
                w[j] += h / 3.0;
                w[j + 1] += 4.0 * h / 3.0;
                w[j + 2] += h / 3.0;
                j += 2;
            }
            if simpson_end < k {
                let s = 3.0 * h / 8.0;
                w[simpson_end] += s;
                w[simpson_end + 1] += 3.0 * s;
                w[simpson_end + 2] += 3.0 * s;
                w[simpson_end + 3] += s;
            }
        }
    }
    w
}

/// Composite Simpson integral of uniformly spaced samples.
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let w = simpson_weights(samples.len() - 1, h);
    let terms: Vec<f64> = samples.iter().zip(&w).map(|(f, w)| f * w).collect();
    pairwise_sum(&terms)
}

/// Weights `c` such that `∫_{t_j}^{t_{j+1}} f ≈ h Σ_m c_m f(t_{s+m})` with the
/// four-point stencil starting at `s`; returns `(s, c)`. Fourth order on every
/// interval, including the two at the ends.
pub fn interval_weights(j: usize, k: usize) -> (usize, [f64; 4]) {
    assert!(k >= 3 && j < k);
    let s = j.saturating_sub(1).min(k - 3);
    // integrate the cubic through nodes s..s+3 over [j, j+1]
    let a = (j - s) as f64;
    let mut c = [0.0; 4];
    let nodes = [0.0, 1.0, 2.0, 3.0];
    for (m, cm) in c.iter_mut().enumerate() {
        // Lagrange basis polynomial coefficients, integrated exactly with
        // 3-point Gauss-Legendre (exact for cubics).
        let g = [
            (0.5 - 0.5 * (3.0f64 / 5.0).sqrt(), 5.0 / 18.0),
            (0.5, 8.0 / 18.0),
            (0.5 + 0.5 * (3.0f64 / 5.0).sqrt(), 5.0 / 18.0),
        ];
        let mut acc = 0.0;
        for (x, wx) in g {
            let t = a + x;
            let mut l = 1.0;
            for (q, &nq) in nodes.iter().enumerate() {
                if q != m {
                    l *= (t - nq) / (nodes[m] - nq);
                }
            }
            acc += wx * l;
        }
        *cm = acc;
    }
    (s, c)
}

/// Running integral `I_j = ∫_0^{t_j} f` for uniform samples, fourth order.
pub fn cumulative(samples: &[f64], h: f64) -> Vec<f64> {
    let k = samples.len().saturating_sub(1);
    let mut out = vec![0.0; k + 1];
    if k == 0 {
        return out;
    }
    if k < 3 {
        for j in 0..k {
            out[j + 1] = out[j] + 0.5 * h * (samples[j] + samples[j + 1]);
        }
        return out;
    }
    for j in 0..k {
        let (s, c) = interval_weights(j, k);
        let inc: f64 = (0..4).map(|m| c[m] * samples[s + m]).sum::<f64>() * h;
        out[j + 1] = out[j] + inc;
    }
    out
}

/// Eight-point Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_8() -> [(f64, f64); 8] {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let mut out = [(0.0, 0.0); 8];
    for q in 0..4 {
        out[2 * q] = (0.5 - 0.5 * X[q], 0.5 * W[q]);
        out[2 * q + 1] = (0.5 + 0.5 * X[q], 0.5 * W[q]);
    }
    out
}

/// Fourth-order finite-difference weights for the first derivative at sample
/// `j` of `k + 1` uniform samples: returns `(start, weights)` with the
/// five-point stencil `start..start+5`; divide by `12 h`.
pub fn derivative_stencil(j: usize, k: usize) -> (usize, [f64; 5]) {
    assert!(k >= 4 && j <= k);
    const C0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    const C1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
    const CC: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    let neg = |c: [f64; 5]| {
        let mut r = [0.0; 5];
        for m in 0..5 {
            r[m] = -c[4 - m];
        }
        r
    };
    if j == 0 {
        (0, C0)
    } else if j == 1 {
        (0, C1)
    } else if j == k {
        (k - 4, neg(C0))
    } else if j == k - 1 {
        (k - 4, neg(C1))
    } else {
        (j - 2, CC)
    }
}
