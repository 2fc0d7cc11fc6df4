//! Exact-arithmetic oracles: the printed two-rate expressions evaluated in
//! rationals, and the SHS equations of small models solved by rational
//! Gaussian elimination straight from the transition list.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use aoi_core::closed_form::{aaoi, ClosedFormId, RateParams};
use aoi_core::model::Discipline;
use aoi_core::shs::{
    build_finite_model, build_truncated_mm1, build_two_source_mm11_star, solve_age_system, Reset, ShsModel,
    TruncationSpec,
};

type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn exact(x: f64) -> Q {
    Q::from_float(x).unwrap()
}

/// `sum_k c[k] l^(deg-k) m^k`, coefficients from the highest power of `l`.
fn homog(c: &[i64], l: &Q, m: &Q) -> Q {
    let deg = c.len() - 1;
    c.iter().enumerate().fold(Q::zero(), |acc, (k, &ck)| {
        acc + Q::from_integer(ck.into()) * pow(l, deg - k) * pow(m, k)
    })
}

fn pow(x: &Q, k: usize) -> Q {
    (0..k).fold(Q::one(), |acc, _| acc * x)
}

/// Printed expressions: numerator over `s l m (l+m)^p (l^2+lm+m^2)^t`.
fn printed(id: ClosedFormId, l: &Q, m: &Q) -> Q {
    let tri = l * l + l * m + m * m;
    let lm = l * m;
    let sum = l + m;
    let frac = |num: &[i64], s: i64, p: usize, t: usize| {
        homog(num, l, m) / (Q::from_integer(s.into()) * &lm * pow(&sum, p) * pow(&tri, t))
    };
    match id {
        ClosedFormId::Mm12Ps => frac(&[5, 9, 8, 6, 2], 2, 1, 1),
        ClosedFormId::Mm12Fgfs => frac(&[3, 5, 4, 3, 1], 1, 1, 1),
        ClosedFormId::Mm12StarPs => frac(&[3, 11, 15, 14, 8, 2], 2, 2, 1),
        ClosedFormId::Mm12StarFgfs => frac(&[2, 7, 8, 7, 4, 1], 1, 2, 1),
        ClosedFormId::Mm12Star2Ps => frac(&[2, 11, 25, 29, 22, 10, 2], 2, 3, 1),
        ClosedFormId::Mm12Star2Fgfs => frac(&[1, 6, 14, 15, 11, 5, 1], 1, 3, 1),
        ClosedFormId::Mm11 => frac(&[2, 2, 1], 1, 1, 0),
        ClosedFormId::Mm11Star => sum / lm,
        ClosedFormId::Mm1Fgfs => {
            let rho = l / m;
            (Q::one() + Q::one() / &rho + &rho * &rho / (Q::one() - &rho)) / m
        }
        ClosedFormId::Mm1PsLowerBound => (m - l) / lm,
    }
}

fn points() -> Vec<(Q, Q)> {
    vec![
        (q(1, 10), q(1, 1)),
        (q(1, 2), q(1, 1)),
        (q(1, 1), q(1, 1)),
        (q(3, 1), q(7, 4)),
        (q(10, 1), q(1, 10)),
        (q(37, 100), q(41, 5)),
        (q(1, 3), q(2, 1)),
        (q(9, 10), q(1, 1)),
    ]
}

fn close(a: f64, b: &Q, tol: f64) -> bool {
    let b = b.to_f64().unwrap();
    (a - b).abs() <= tol * b.abs()
}

#[test]
fn closed_forms_match_rational_evaluation() {
    for id in ClosedFormId::ALL {
        for (l, m) in points() {
            if id.requires_stability() && l >= m {
                continue;
            }
            let p = RateParams::new(l.to_f64().unwrap(), m.to_f64().unwrap()).unwrap();
            let want = printed(id, &exact(p.lambda()), &exact(p.mu()));
            let got = aaoi(id, &p).unwrap();
            assert!(
                close(got, &want, 1e-12),
                "{id} at ({l}, {m}): {got} vs {}",
                want.to_f64().unwrap()
            );
        }
    }
}

/// Dense rational Gaussian elimination with nonzero pivot search.
fn solve_dense(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Vec<Q> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("singular system");
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = Q::one() / &a[col][col];
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            let pivot_row = a[col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= &f * p;
            }
            let t = &f * &b[col];
            b[r] -= t;
        }
    }
    (0..n).map(|i| &b[i] / &a[i][i]).collect()
}

/// Stationary distribution and every `v_qk`, solved without pruning.
fn exact_shs(m: &ShsModel) -> (Vec<Q>, Vec<Vec<Q>>) {
    let n = m.states().len();
    let d = m.age_dim();
    let rates: Vec<Q> = m.transitions().iter().map(|t| exact(t.rate)).collect();

    let mut a = vec![vec![Q::zero(); n]; n];
    for (t, r) in m.transitions().iter().zip(&rates) {
        if t.from != t.to {
            a[t.from][t.from] -= r;
            a[t.to][t.from] += r;
        }
    }
    a[0] = vec![Q::one(); n];
    let mut rhs = vec![Q::zero(); n];
    rhs[0] = Q::one();
    let pi = solve_dense(a, rhs);

    let idx = |s: usize, k: usize| s * d + k;
    let mut a = vec![vec![Q::zero(); n * d]; n * d];
    let mut rhs = vec![Q::zero(); n * d];
    for (t, r) in m.transitions().iter().zip(&rates) {
        for k in 0..d {
            a[idx(t.from, k)][idx(t.from, k)] += r;
        }
        for (k, reset) in t.reset.0.iter().enumerate() {
            if let Reset::Copy(j) = reset {
                a[idx(t.to, k)][idx(t.from, *j)] -= r;
            }
        }
    }
    for (s, st) in m.states().iter().enumerate() {
        for k in 0..d {
            if st.growth[k] {
                rhs[idx(s, k)] = pi[s].clone();
            }
        }
    }
    let v = solve_dense(a, rhs);
    let v = (0..n).map(|s| v[s * d..(s + 1) * d].to_vec()).collect();
    (pi, v)
}

fn assert_matches_exact(m: &ShsModel, tol: f64) {
    let (pi, v) = exact_shs(m);
    let sol = solve_age_system(m).unwrap();
    for (s, p) in pi.iter().enumerate() {
        assert!(
            close(sol.pi[s], p, tol) || p.to_f64().unwrap().abs() < 1e-300,
            "{}: pi[{s}]",
            m.name()
        );
        for (k, x) in v[s].iter().enumerate() {
            let got = sol.v[s][k];
            if x.is_zero() {
                assert!(got.abs() < 1e-14, "{}: v[{s}][{k}] = {got}, exact 0", m.name());
            } else {
                assert!(
                    close(got, x, tol),
                    "{}: v[{s}][{k}] = {got} vs {}",
                    m.name(),
                    x.to_f64().unwrap()
                );
            }
        }
    }
    let total: Q = v.iter().map(|row| row[0].clone()).sum();
    assert!(!total.is_negative());
    assert!(close(sol.aaoi, &total, tol));
}

#[test]
fn finite_models_match_exact_shs() {
    for id in ClosedFormId::FINITE {
        for (l, mu) in points() {
            let p = RateParams::new(l.to_f64().unwrap(), mu.to_f64().unwrap()).unwrap();
            let m = build_finite_model(id, &p).unwrap();
            assert_matches_exact(&m, 1e-11);
            let want = printed(id, &exact(p.lambda()), &exact(p.mu()));
            let (_, v) = exact_shs(&m);
            let total: Q = v.iter().map(|row| row[0].clone()).sum();
            assert!(
                close(total.to_f64().unwrap(), &want, 1e-15),
                "{id}: exact SHS vs printed expression"
            );
        }
    }
}

#[test]
fn truncated_models_match_exact_shs() {
    for disc in [Discipline::Ps, Discipline::Fgfs] {
        for n in 1..=4 {
            let m = build_truncated_mm1(disc, &[0.7], 1.3, 1, &TruncationSpec::new(n)).unwrap();
            assert_matches_exact(&m, 1e-11);
        }
        for soi in [1, 2] {
            let m = build_truncated_mm1(disc, &[0.4, 1.1], 1.0, soi, &TruncationSpec::new(3)).unwrap();
            assert_matches_exact(&m, 1e-11);
        }
    }
    for soi in [1, 2] {
        assert_matches_exact(&build_two_source_mm11_star(&[0.3, 2.0], 1.0, soi).unwrap(), 1e-11);
    }
}

#[test]
fn two_source_mm11_star_exact_value() {
    // Source i sees (1 + rho) / (mu rho_i) with rho the total load.
    let (l1, l2, mu) = (exact(0.3), exact(2.0), Q::one());
    let m = build_two_source_mm11_star(&[0.3, 2.0], 1.0, 1).unwrap();
    let (_, v) = exact_shs(&m);
    let total: Q = v.iter().map(|row| row[0].clone()).sum();
    let rho = (&l1 + &l2) / &mu;
    assert_eq!(total, (Q::one() + rho) / &l1);
}

#[test]
fn mm12_star_ps_printed_v20_is_the_total_age() {
    for (l, m) in points() {
        let tri = &l * &l + &l * &m + &m * &m;
        let sum = &l + &m;
        let printed_v20 = homog(&[3, 11, 15, 14, 8, 2], &l, &m) / (q(2, 1) * &l * &m * pow(&sum, 2) * &tri);
        assert_eq!(printed_v20, printed(ClosedFormId::Mm12StarPs, &l, &m));

        let p = RateParams::new(l.to_f64().unwrap(), m.to_f64().unwrap()).unwrap();
        let (l, m) = (exact(p.lambda()), exact(p.mu()));
        let tri = &l * &l + &l * &m + &m * &m;
        let sum = &l + &m;
        let v00 = homog(&[0, 0, 3, 3, 1], &l, &m) / (&l * pow(&sum, 2) * &tri);
        let v10 = homog(&[1, 7, 13, 8, 2], &l, &m) / (q(2, 1) * pow(&sum, 3) * &tri);
        let (_, v) = exact_shs(&build_finite_model(ClosedFormId::Mm12StarPs, &p).unwrap());
        assert_eq!(v[0][0], v00);
        assert_eq!(v[1][0], v10);
        assert_eq!(v[2][0], printed(ClosedFormId::Mm12StarPs, &l, &m) - v00 - v10);
    }
}
