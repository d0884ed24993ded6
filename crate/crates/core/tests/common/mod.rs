//! Identity checks shared by the property suite and the acceptance suite.
//! Each returns a relative error: the discrepancy divided by a natural scale
//! of the operands.

#![allow(dead_code)]

use rand::Rng;
use rankflow::flow::{gradient, lyapunov_rate, objective, vector_field};
use rankflow::frobenius::{frob_norm, inner, pair_inner};
use rankflow::random::{random_orthogonal, seeded_rng, standard_normal};
use rankflow::rank_manifold::{quasi_project, tangent_adjoint, tangent_map};
use rankflow::{DenseMatrix, TangentPair};

pub const IDENTITY_TOL: f64 = 1e-12;
pub const FD_TOL: f64 = 1e-6;

fn rel(lhs: f64, rhs: f64, scale: f64) -> f64 {
    (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE)
}

/// Random conforming operands drawn from one seed.
pub struct Operands {
    pub x: DenseMatrix,
    pub y: DenseMatrix,
    pub z: DenseMatrix,
    pub b: DenseMatrix,
    pub left: DenseMatrix,
    pub right: DenseMatrix,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
}

pub fn operands(seed: u64) -> Operands {
    let mut rng = seeded_rng(seed);
    let m = rng.random_range(1..=6);
    let n = rng.random_range(1..=6);
    let scale = rng.random_range(0.1..4.0);
    let mut draw = |r, c| standard_normal(r, c, &mut rng).scaled(scale);
    let x = draw(m, n);
    let y = draw(m, n);
    let z = draw(m, n);
    let b = draw(m, n);
    let left = draw(m, m);
    let right = draw(n, n);
    Operands {
        x,
        y,
        z,
        b,
        left,
        right,
        u: random_orthogonal(m, &mut rng),
        v: random_orthogonal(n, &mut rng),
    }
}

/// `<X B, Z> = <X, Z B^T>` and `<B Y, Z> = <Y, B^T Z>` with square
/// multipliers.
pub fn multiplication_adjoint(o: &Operands) -> f64 {
    let l = &o.left;
    let r = &o.right;
    let e1 = rel(
        inner(&(&o.x * r), &o.z).unwrap(),
        inner(&o.x, &(&o.z * &r.transpose())).unwrap(),
        o.x.norm() * r.norm() * o.z.norm(),
    );
    let e2 = rel(
        inner(&(l * &o.y), &o.z).unwrap(),
        inner(&o.y, &(&l.transpose() * &o.z)).unwrap(),
        o.y.norm() * l.norm() * o.z.norm(),
    );
    e1.max(e2)
}

pub fn orthogonal_invariance(o: &Operands) -> f64 {
    let base = inner(&o.x, &o.y).unwrap();
    let scale = o.x.norm() * o.y.norm();
    let left = inner(&(&o.u * &o.x), &(&o.u * &o.y)).unwrap();
    let right = inner(&(&o.x * &o.v), &(&o.y * &o.v)).unwrap();
    rel(left, base, scale).max(rel(right, base, scale))
}

pub fn symmetry_and_bilinearity(o: &Operands) -> f64 {
    let scale = o.x.norm() * (o.y.norm() + o.z.norm());
    let sym = rel(
        inner(&o.x, &o.y).unwrap(),
        inner(&o.y, &o.x).unwrap(),
        scale,
    );
    let alpha = 1.75;
    let combo = &o.y.scaled(alpha) + &o.z;
    let lin = rel(
        inner(&o.x, &combo).unwrap(),
        alpha * inner(&o.x, &o.y).unwrap() + inner(&o.x, &o.z).unwrap(),
        alpha * scale,
    );
    let norm = rel(
        frob_norm(&o.x).powi(2),
        inner(&o.x, &o.x).unwrap(),
        o.x.norm().powi(2),
    );
    sym.max(lin).max(norm)
}

/// `<L_B(P), Z> = <P, L_B^*(Z)>`.
pub fn tangent_adjointness(o: &Operands) -> f64 {
    let pair = TangentPair::new(o.left.clone(), o.right.clone());
    let lhs = inner(&tangent_map(&o.b, &pair).unwrap(), &o.z).unwrap();
    let rhs = pair_inner(&pair, &tangent_adjoint(&o.b, &o.z).unwrap()).unwrap();
    let scale = o.b.norm() * (o.left.norm() + o.right.norm()) * o.z.norm();
    rel(lhs, rhs, scale)
}

/// Self-adjointness of `Z -> L_B L_B^*(Z)`, plus `<P_B(Z), Z> >= 0`.
pub fn quasi_projection_self_adjoint_psd(o: &Operands) -> f64 {
    let p1 = quasi_project(&o.b, &o.y).unwrap();
    let p2 = quasi_project(&o.b, &o.z).unwrap();
    let scale = o.b.norm().powi(2) * o.y.norm() * o.z.norm();
    let sym = rel(inner(&p1, &o.z).unwrap(), inner(&o.y, &p2).unwrap(), scale);
    let quad = inner(&p2, &o.z).unwrap();
    let floor = -IDENTITY_TOL * o.b.norm().powi(2) * o.z.norm().powi(2);
    if quad < floor {
        return f64::INFINITY;
    }
    sym
}

/// Central differences of the objective along a random direction against
/// `<grad f, D>`.
pub fn gradient_finite_difference(o: &Operands) -> f64 {
    let a = &o.y;
    let x = &o.x;
    let d = &o.z;
    let h = 1e-4;
    let fd = (objective(a, &(x + &d.scaled(h))).unwrap()
        - objective(a, &(x - &d.scaled(h))).unwrap())
        / (2.0 * h);
    let exact = inner(&gradient(a, x).unwrap(), d).unwrap();
    // The objective is quadratic, so central differences are exact up to
    // rounding in f, of order eps * |X - A|^2 / h.
    rel(
        fd,
        exact,
        (x - a).norm() * d.norm() + (x - a).norm().powi(2),
    )
}

/// `lyapunov_rate = <grad f, F> = -|L_X^*(X - A)|^2`.
pub fn lyapunov_rate_identity(o: &Operands) -> f64 {
    let a = &o.y;
    let x = &o.x;
    let rate = lyapunov_rate(a, x).unwrap();
    let adj = tangent_adjoint(x, &(x - a)).unwrap();
    let norm_sq = pair_inner(&adj, &adj).unwrap();
    let directional = inner(&gradient(a, x).unwrap(), &vector_field(a, x).unwrap()).unwrap();
    let scale = (x.norm() * (x - a).norm()).powi(2);
    rel(rate, -norm_sq, scale).max(rel(rate, directional, scale))
}

/// `F(X) = L_X(L_X^*(A - X))`.
pub fn tangency(o: &Operands) -> f64 {
    let a = &o.y;
    let x = &o.x;
    let direct = vector_field(a, x).unwrap();
    let composed = tangent_map(x, &tangent_adjoint(x, &(a - x)).unwrap()).unwrap();
    (&direct - &composed).norm() / (x.norm().powi(2) * (a - x).norm()).max(f64::MIN_POSITIVE)
}
