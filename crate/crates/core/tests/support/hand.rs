//! Type-by-type systems written out by hand for weighted degrees 4, 5 and 6.
//!
//! Every equation is a type `(a, b)` component of `L(f1, f2, g)` written in
//! terms of `w`-derivatives at `w = s`, powers of `Z = z1 zb1` and
//! conjugates.

use crnorm_core::algebra::{
    conjugate_series, partial_derivative, Monomial, Scalar, TVar, TruncatedSeries, Var, WeightProfile,
};
use crnorm_core::linsolve::solve_unique;
use crnorm_core::normalform::{solve_degree, DegreeSystem, ModelType, NormalSpaceSpec, TransformT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Headroom so that `w`-derivatives do not truncate anything at degree `nu`.
const HEADROOM: u32 = 12;

struct Ctx {
    p: WeightProfile,
    p11: TruncatedSeries,
    p02: TruncatedSeries,
}

impl Ctx {
    fn new(model: ModelType, nu: u32) -> Ctx {
        let p = WeightProfile::new(2, nu + HEADROOM);
        let m = |a: u8, b: u8, c: u8, d: u8, k: i64| TruncatedSeries::monomial(p, TVar::S, Monomial::new(a, b, c, d, 0), Scalar::from_int(k));
        let (p11, p02) = match model {
            ModelType::Ai1 { gamma } => (m(0, 1, 0, 1, 2), m(0, 0, 0, 2, 1).add(&m(0, 0, 2, 0, i64::from(gamma)))),
            ModelType::Ai2 => (TruncatedSeries::zero(p, TVar::S), m(0, 0, 2, 0, 1)),
            ModelType::Ai3 => (m(1, 0, 0, 1, 1), m(0, 0, 1, 1, 1)),
        };
        Ctx { p, p11, p02 }
    }

    /// `c z1^a zb1^b`.
    fn zz(&self, a: u8, b: u8, c: Scalar) -> TruncatedSeries {
        TruncatedSeries::monomial(self.p, TVar::S, Monomial::new(a, 0, b, 0, 0), c)
    }

    fn q(&self, a: u8, b: u8, num: i64, den: i64) -> TruncatedSeries {
        self.zz(a, b, Scalar::frac(num, den, 0, 1))
    }

    fn qi(&self, a: u8, b: u8, num: i64, den: i64) -> TruncatedSeries {
        self.zz(a, b, Scalar::frac(0, 1, num, den))
    }
}

/// `h^{(m)}(z, s)` for the part of `h` of degree `k` in `z`.
fn d(h: &TruncatedSeries, k: u32, m: u32) -> TruncatedSeries {
    let part = h.filter(|mo| mo.z_degree() == k);
    let out = if m == 0 { part } else { partial_derivative(&part, Var::W, m).unwrap() };
    out.with_tvar(TVar::S)
}

/// `conj(h)^{(m)}(zb, s)`.
fn dc(h: &TruncatedSeries, k: u32, m: u32) -> TruncatedSeries {
    conjugate_series(&d(h, k, m)).with_tvar(TVar::S)
}

fn re(x: &TruncatedSeries) -> TruncatedSeries {
    x.add(&conjugate_series(x).with_tvar(TVar::S)).scale(&Scalar::frac(1, 2, 0, 1))
}

fn im(x: &TruncatedSeries) -> TruncatedSeries {
    x.sub(&conjugate_series(x).with_tvar(TVar::S)).scale(&Scalar::frac(0, 1, -1, 2))
}

fn sum(parts: &[TruncatedSeries]) -> TruncatedSeries {
    parts.iter().skip(1).fold(parts[0].clone(), |a, b| a.add(b))
}

/// The equations of types `(a, b)` with `a > b` (complex) and `a = b`
/// (real), for a transform of degree at most `nu`.
fn equations(c: &Ctx, model: ModelType, t: &TransformT, nu: u32) -> Vec<(bool, TruncatedSeries)> {
    let (f1, f2, g) = (&t.f1.with_order(c.p.truncation_order), &t.f2.with_order(c.p.truncation_order), &t.g.with_order(c.p.truncation_order));
    let (p11, p02) = (&c.p11, &c.p02);
    let p02b = &conjugate_series(p02).with_tvar(TVar::S);
    let z = c.q(1, 1, 1, 1);
    let z2 = c.q(2, 2, 1, 1);
    let z3 = c.q(3, 3, 1, 1);
    let zb1 = c.q(0, 1, 1, 1);
    let half_i = Scalar::frac(0, 1, 1, 2);
    let mut out = Vec::new();
    let mut push = |real: bool, e: TruncatedSeries| out.push((real, e));

    for k in 3..=nu {
        push(false, d(g, k, 0).scale(&half_i));
        push(false, sum(&[zb1.mul(&d(f1, k + 1, 0)), p11.mul(&d(f2, k, 0)), c.q(1, 1, -1, 2).mul(&d(g, k, 1))]));
    }
    // Degree 2 in z.
    push(false, sum(&[p02b.mul(&dc(f2, 0, 0)), d(g, 2, 0).scale(&half_i)]));
    push(
        false,
        sum(&[
            zb1.mul(&d(f1, 3, 0)),
            p11.mul(&d(f2, 2, 0)),
            c.qi(1, 1, -1, 1).mul(p02b).mul(&dc(f2, 0, 1)),
            c.q(1, 1, -1, 2).mul(&d(g, 2, 1)),
        ]),
    );
    push(
        false,
        sum(&[
            c.qi(1, 2, 1, 1).mul(&d(f1, 3, 1)),
            c.qi(1, 1, 1, 1).mul(p11).mul(&d(f2, 2, 1)),
            c.q(2, 2, -1, 2).mul(p02b).mul(&dc(f2, 0, 2)),
            p02.mul(&d(f2, 4, 0)),
            c.qi(2, 2, -1, 4).mul(&d(g, 2, 2)),
        ]),
    );
    // Degree 1 in z.
    push(false, sum(&[c.q(1, 0, 1, 1).mul(&dc(f1, 0, 0)), d(g, 1, 0).scale(&half_i)]));
    push(
        false,
        sum(&[
            c.qi(2, 1, -1, 1).mul(&dc(f1, 0, 1)),
            zb1.mul(&d(f1, 2, 0)),
            p11.mul(&d(f2, 1, 0)),
            p02b.mul(&dc(f2, 1, 0)),
            c.q(1, 1, -1, 2).mul(&d(g, 1, 1)),
        ]),
    );
    push(
        false,
        sum(&[
            c.qi(1, 2, 1, 1).mul(&d(f1, 2, 1)),
            c.q(3, 2, -1, 2).mul(&dc(f1, 0, 2)),
            c.qi(1, 1, 1, 1).mul(p11).mul(&d(f2, 1, 1)),
            p02.mul(&d(f2, 3, 0)),
            c.qi(1, 1, -1, 1).mul(p02b).mul(&dc(f2, 1, 1)),
            c.qi(2, 2, -1, 4).mul(&d(g, 1, 2)),
        ]),
    );
    // Degree 0 in z; real equations.
    push(true, im(&d(g, 0, 0)).neg());
    push(
        true,
        sum(&[
            re(&zb1.mul(&d(f1, 1, 0))).scale(&Scalar::from_int(2)),
            re(&p11.mul(&d(f2, 0, 0))).scale(&Scalar::from_int(2)),
            z.mul(&re(&d(g, 0, 1))).neg(),
        ]),
    );
    // Signs of both p-terms in the (2,2) equation are taken from expanding L.
    push(
        true,
        sum(&[
            z.mul(&im(&p11.mul(&d(f2, 0, 1)))).scale(&Scalar::from_int(-2)),
            re(&p02.mul(&d(f2, 2, 0))).scale(&Scalar::from_int(2)),
            z.mul(&im(&zb1.mul(&d(f1, 1, 1)))).scale(&Scalar::from_int(-2)),
            z2.mul(&im(&d(g, 0, 2))).scale(&Scalar::frac(1, 2, 0, 1)),
        ]),
    );
    push(
        true,
        sum(&[
            z2.mul(&re(&zb1.mul(&d(f1, 1, 2)))).neg(),
            z2.mul(&re(&p11.mul(&d(f2, 0, 2)))).neg(),
            z.mul(&im(&p02.mul(&d(f2, 2, 1)))).scale(&Scalar::from_int(-2)),
            z3.mul(&re(&d(g, 0, 3))).scale(&Scalar::frac(1, 6, 0, 1)),
        ]),
    );

    if model == ModelType::Ai2 {
        let zb1s = c.q(0, 2, 1, 1);
        for k in 3..=nu {
            push(false, sum(&[c.qi(1, 2, 1, 1).mul(&d(f1, k + 1, 1)), zb1s.mul(&d(f2, k + 2, 0)), c.qi(2, 2, -1, 4).mul(&d(g, k, 2))]));
        }
        push(
            false,
            sum(&[
                c.q(2, 3, -1, 2).mul(&d(f1, 3, 2)),
                c.qi(1, 3, 1, 1).mul(&d(f2, 4, 1)),
                c.qi(5, 3, 1, 6).mul(&dc(f2, 0, 3)),
                c.q(3, 3, 1, 12).mul(&d(g, 2, 3)),
            ]),
        );
        push(
            false,
            sum(&[
                c.q(2, 3, -1, 2).mul(&d(f1, 2, 2)),
                c.qi(4, 3, 1, 6).mul(&dc(f1, 0, 3)),
                c.qi(1, 3, 1, 1).mul(&d(f2, 3, 1)),
                c.q(4, 2, -1, 2).mul(&dc(f2, 1, 2)),
                c.q(3, 3, 1, 12).mul(&d(g, 1, 3)),
            ]),
        );
        push(
            false,
            sum(&[
                c.qi(3, 4, -1, 6).mul(&d(f1, 2, 3)),
                c.q(5, 4, 1, 24).mul(&dc(f1, 0, 4)),
                c.q(2, 4, -1, 2).mul(&d(f2, 3, 2)),
                c.qi(5, 3, 1, 6).mul(&dc(f2, 1, 3)),
                c.qi(4, 4, 1, 48).mul(&d(g, 1, 4)),
            ]),
        );
        push(
            true,
            sum(&[
                z3.mul(&im(&zb1.mul(&d(f1, 1, 3)))).scale(&Scalar::frac(1, 3, 0, 1)),
                z2.mul(&re(&zb1s.mul(&d(f2, 2, 2)))).neg(),
                c.q(4, 4, -1, 24).mul(&im(&d(g, 0, 4))),
            ]),
        );
        push(
            true,
            sum(&[
                c.q(4, 4, 1, 12).mul(&re(&zb1.mul(&d(f1, 1, 4)))),
                z3.mul(&im(&zb1s.mul(&d(f2, 2, 3)))).scale(&Scalar::frac(1, 3, 0, 1)),
                c.q(5, 5, -1, 120).mul(&re(&d(g, 0, 5))),
            ]),
        );
    }
    out
}

/// `L` assembled from the equations; types the equations do not cover are
/// entirely normal and do not enter the solve.
fn hand_l(model: ModelType, t: &TransformT, nu: u32) -> TruncatedSeries {
    let c = Ctx::new(model, nu);
    let mut acc = TruncatedSeries::zero(c.p, TVar::S);
    for (real, e) in equations(&c, model, t, nu) {
        let e = e.filter(|m| m.weighted_degree(2) == nu);
        acc = if real { acc.add(&e) } else { acc.add(&e).add(&conjugate_series(&e).with_tvar(TVar::S)) };
    }
    acc
}

fn random_f(nu: u32, rng: &mut ChaCha8Rng) -> TruncatedSeries {
    let p = WeightProfile::new(2, nu);
    let mut terms = Vec::new();
    for cpow in 0..=nu / 2 {
        let rest = nu - 2 * cpow;
        for k in 0..=rest {
            for a1 in 0..=k {
                for b1 in 0..=rest - k {
                    let m = Monomial::new(a1 as u8, (k - a1) as u8, b1 as u8, (rest - k - b1) as u8, cpow as u8);
                    if m > m.mirror() || !rng.gen_bool(0.5) {
                        continue;
                    }
                    let v = Scalar::gauss(rng.gen_range(-4..=4), if m == m.mirror() { 0 } else { rng.gen_range(-4..=4) });
                    if m != m.mirror() {
                        terms.push((m.mirror(), v.conj()));
                    }
                    terms.push((m, v));
                }
            }
        }
    }
    TruncatedSeries::from_terms(p, TVar::S, terms)
}

/// Compares the generic solve with the hand systems at `nu = 4, 5, 6` on
/// `trials` random right-hand sides per model and degree. Returns the number
/// of right-hand sides checked.
pub fn compare_with_generic(seed: u64, trials: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for model in ModelType::ALL {
        for nu in 4..=6 {
            let sys = DegreeSystem::cached(model, nu).map_err(|e| format!("{model} nu={nu}: {e}"))?;
            let p = WeightProfile::new(2, nu);
            let n = sys.cols();
            let columns: Vec<Vec<Scalar>> = (0..n)
                .map(|j| {
                    let e: Vec<Scalar> = (0..n).map(|i| if i == j { Scalar::one() } else { Scalar::zero() }).collect();
                    let t = sys.transform_from_coordinates(&e, p);
                    sys.complement_coordinates(&hand_l(model, &t, nu))
                })
                .collect();
            let matrix: Vec<Vec<Scalar>> = (0..n).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
            for _ in 0..trials {
                let f = random_f(nu, &mut rng);
                let x = solve_unique(&matrix, &sys.complement_coordinates(&f)).map_err(|e| format!("{model} nu={nu}: {e}"))?;
                let generic = solve_degree(&f, nu, model).map_err(|e| format!("{model} nu={nu}: {e}"))?;
                if sys.transform_coordinates(&generic.t) != x {
                    return Err(format!("{model} nu={nu}: transforms differ"));
                }
                let hand = sys.transform_from_coordinates(&x, p);
                let rest = f.sub(&hand_l(model, &hand, nu)).with_order(nu);
                if !NormalSpaceSpec::for_model(model).contains(&rest) {
                    return Err(format!("{model} nu={nu}: hand remainder not normal"));
                }
                if rest != generic.normal {
                    return Err(format!("{model} nu={nu}: normal parts differ"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
