//! Reference values written out from the defining formulas, using raw index
//! arithmetic instead of the library's routines.
#![allow(dead_code)]

use pdit_core::qcore::{CMatrix, CVector, DensityOperator, Layout, StateVector, C64};

pub fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

pub fn lambda_plus(q: f64, p1u: f64) -> f64 {
    0.5 * (1.0
        + (1.0 - 16.0 * q * (1.0 - q) * p1u * (1.0 - p1u))
            .max(0.0)
            .sqrt())
}

/// `R = 1 - H2(p̃) - Σ_u p_u (H2(p_{1|u}) - H2(λ⁺_u))` for `p = [p00, p01, p10, p11]`,
/// `p_uv` the probability of `X^u Z^v`.
pub fn rate(p: [f64; 4], q: f64) -> f64 {
    let p_x = p[2] + p[3];
    let p_tilde = p_x * (1.0 - q) + q * (1.0 - p_x);
    let mut r = 1.0 - h2(p_tilde);
    for (pu, pu1) in [(p[0] + p[1], p[1]), (p[2] + p[3], p[3])] {
        if pu > 0.0 {
            let c = pu1 / pu;
            r -= pu * (h2(c) - h2(lambda_plus(q, c)));
        }
    }
    r
}

pub fn bb84(qber: f64) -> [f64; 4] {
    [
        (1.0 - qber) * (1.0 - qber),
        (1.0 - qber) * qber,
        qber * (1.0 - qber),
        qber * qber,
    ]
}

pub fn six_state(qber: f64) -> [f64; 4] {
    let w = qber / 2.0;
    [1.0 - 3.0 * w, w, w, w]
}

/// Root of `f` on `[lo, hi]` by bisection, assuming `f(lo) > 0 >= f(hi)`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    assert!(f(lo) > 0.0 && f(hi) <= 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two equiprobable pure states with overlap `c`.
pub fn helstrom(c: f64) -> f64 {
    0.5 * (1.0 - (1.0 - c * c).max(0.0).sqrt())
}

/// Smallest error over projective two-outcome measurements `{[m], I - [m]}` with
/// `|m> = cos t |e0> + e^{i s} sin t |e1>` in the span of the two states,
/// by a grid search refined around the best cell.
pub fn brute_force_two_state_error(a: &CVector, b: &CVector) -> f64 {
    let e0 = a.normalize();
    let rest = b - &e0 * e0.dotc(b);
    if rest.norm() < 1e-14 {
        return 0.5;
    }
    let e1 = rest.normalize();
    let (a0, a1) = (e0.dotc(a), e1.dotc(a));
    let (b0, b1) = (e0.dotc(b), e1.dotc(b));
    let err = |t: f64, s: f64| {
        let m = (C64::new(t.cos(), 0.0), C64::from_polar(t.sin(), s));
        let pa = (m.0.conj() * a0 + m.1.conj() * a1).norm_sqr();
        let pb = (m.0.conj() * b0 + m.1.conj() * b1).norm_sqr();
        0.5 * (1.0 - pa + pb)
    };
    let (mut t0, mut t1) = (0.0, std::f64::consts::PI);
    let (mut s0, mut s1) = (0.0, 2.0 * std::f64::consts::PI);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let steps = 64;
    for _ in 0..40 {
        let (dt, ds) = ((t1 - t0) / steps as f64, (s1 - s0) / steps as f64);
        for i in 0..=steps {
            for j in 0..=steps {
                let (t, s) = (t0 + i as f64 * dt, s0 + j as f64 * ds);
                let e = err(t, s);
                if e < best.0 {
                    best = (e, t, s);
                }
            }
        }
        (t0, t1) = (best.1 - 2.0 * dt, best.1 + 2.0 * dt);
        (s0, s1) = (best.2 - 2.0 * ds, best.2 + 2.0 * ds);
    }
    best.0
}

fn sign(parity_of: usize) -> f64 {
    if parity_of.count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn q_f(q: f64, f: usize, n: usize) -> f64 {
    let w = f.count_ones() as i32;
    q.powi(w) * (1.0 - q).powi(n as i32 - w)
}

fn pattern_probability(p: [f64; 4], u: usize, v: usize, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let (ui, vi) = ((u >> (n - 1 - i)) & 1, (v >> (n - 1 - i)) & 1);
            p[2 * ui + vi]
        })
        .product()
}

/// `Σ_{u,v} sqrt(p_uv) (I ⊗ X^u Z^v)|Φ>^{⊗n} |u>_{E1} |v>_{E2}` on `A B E1 E2`.
pub fn keystate1(n: usize, p: [f64; 4]) -> StateVector {
    let d = 1usize << n;
    let layout = Layout::new([("A", n), ("B", n), ("E1", n), ("E2", n)]).unwrap();
    let mut psi = CVector::zeros(layout.dim());
    for u in 0..d {
        for v in 0..d {
            let puv = pattern_probability(p, u, v, n);
            for a in 0..d {
                // Z^v then X^u on Bob's |a>.
                let idx = ((((a * d) + (a ^ u)) * d + u) * d) + v;
                psi[idx] += C64::new((puv / d as f64).sqrt() * sign(v & a), 0.0);
            }
        }
    }
    StateVector::new(psi, layout).unwrap()
}

/// `Σ sqrt(p_uv q_f) |f>_{A'} (X^f_A ⊗ X^u_B Z^v_B)|Φ>^{⊗n} |u>|v>` on `A B E1 E2 A'`.
pub fn keystate2(n: usize, p: [f64; 4], q: f64) -> StateVector {
    let d = 1usize << n;
    let layout = Layout::new([("A", n), ("B", n), ("E1", n), ("E2", n), ("A'", n)]).unwrap();
    let mut psi = CVector::zeros(layout.dim());
    for u in 0..d {
        for v in 0..d {
            let puv = pattern_probability(p, u, v, n);
            for f in 0..d {
                let amp = (puv * q_f(q, f, n) / d as f64).sqrt();
                for a in 0..d {
                    let idx = (((((a ^ f) * d + (a ^ u)) * d + u) * d + v) * d) + f;
                    psi[idx] += C64::new(amp * sign(v & a), 0.0);
                }
            }
        }
    }
    StateVector::new(psi, layout).unwrap()
}

/// `Σ sqrt(p_uv q_f) Z^v_{A'}|f>_{A'} |u+f>_{B'} Z^v_B |Φ>^{⊗n} |u>|v>` on
/// `A B E1 E2 A' B'`.
pub fn keystate3(n: usize, p: [f64; 4], q: f64) -> StateVector {
    let d = 1usize << n;
    let layout = Layout::new([
        ("A", n),
        ("B", n),
        ("E1", n),
        ("E2", n),
        ("A'", n),
        ("B'", n),
    ])
    .unwrap();
    let mut psi = CVector::zeros(layout.dim());
    for u in 0..d {
        for v in 0..d {
            let puv = pattern_probability(p, u, v, n);
            for f in 0..d {
                let amp = (puv * q_f(q, f, n) / d as f64).sqrt();
                for a in 0..d {
                    let idx = ((((((a * d + a) * d + u) * d + v) * d) + f) * d) + (u ^ f);
                    psi[idx] += C64::new(amp * sign(v & f) * sign(v & a), 0.0);
                }
            }
        }
    }
    StateVector::new(psi, layout).unwrap()
}

/// `|φ^v> = Z^v (sqrt(1-q)|0> + sqrt(q)|1>)^{⊗n}`.
pub fn phi_v(n: usize, q: f64, v: usize) -> CVector {
    CVector::from_fn(1 << n, |f, _| {
        C64::new(q_f(q, f, n).sqrt() * sign(v & f), 0.0)
    })
}

/// `ρ = C_{A'B'} (Σ_{u,v} p_uv [u]_{B'} [φ^v]_{A'} Z^v_B [Φ]^{⊗n} Z^v_B) C†` on `A B A' B'`.
pub fn state3(n: usize, p: [f64; 4], q: f64) -> DensityOperator {
    let d = 1usize << n;
    let layout = Layout::new([("A", n), ("B", n), ("A'", n), ("B'", n)]).unwrap();
    let mut rho = CMatrix::zeros(layout.dim(), layout.dim());
    for u in 0..d {
        for v in 0..d {
            let puv = pattern_probability(p, u, v, n);
            if puv == 0.0 {
                continue;
            }
            let phi = phi_v(n, q, v);
            let mut psi = CVector::zeros(layout.dim());
            for a in 0..d {
                for f in 0..d {
                    // The CNOT sends |f>_{A'}|u>_{B'} to |f>|u+f>.
                    let idx = (((a * d + a) * d + f) * d) + (u ^ f);
                    psi[idx] += phi[f] * (sign(v & a) / (d as f64).sqrt());
                }
            }
            rho += &psi * psi.adjoint() * C64::new(puv, 0.0);
        }
    }
    DensityOperator::new(rho, layout).unwrap()
}

/// The Bell-diagonal state `Σ p_uv (I ⊗ X^u Z^v)[Φ](I ⊗ X^u Z^v)†` on one pair.
pub fn bell_diagonal(p: [f64; 4]) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut rho = CMatrix::zeros(4, 4);
    for u in 0..2 {
        for v in 0..2 {
            let mut psi = CVector::zeros(4);
            for a in 0..2 {
                psi[a * 2 + (a ^ u)] = C64::new(h * sign(v & a), 0.0);
            }
            rho += &psi * psi.adjoint() * C64::new(p[2 * u + v], 0.0);
        }
    }
    rho
}

/// `|<a|b>|` after aligning the two states to the same register order.
pub fn overlap(a: &StateVector, b: &StateVector) -> f64 {
    let b = b.reorder(a.layout()).unwrap();
    a.amplitudes().dotc(b.amplitudes()).norm()
}
