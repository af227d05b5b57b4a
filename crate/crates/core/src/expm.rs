//! Dense complex matrix exponential by scaling and squaring with diagonal
//! Padé approximants (degrees 3, 5, 7, 9, 13), selected from the 1-norm.

use nalgebra::DMatrix;
use num_complex::Complex64;

type M = DMatrix<Complex64>;

// Largest 1-norm for which the degree-m approximant is accurate to unit
// roundoff in double precision.
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &M) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(U, V)` for the low-degree approximants: odd part `U`, even part `V`.
fn pade_low(a: &M, b: &[f64]) -> (M, M) {
    let n = a.nrows();
    let id = M::identity(n, n);
    let a2 = a * a;
    let mut u_inner = &id * re(b[1]);
    let mut v = &id * re(b[0]);
    let mut power = id.clone();
    let m = b.len() - 1;
    let mut k = 2;
    while k <= m {
        power = &power * &a2;
        v += &power * re(b[k]);
        if k < m {
            u_inner += &power * re(b[k + 1]);
        }
        k += 2;
    }
    (a * u_inner, v)
}

fn pade_13(a: &M) -> (M, M) {
    let n = a.nrows();
    let id = M::identity(n, n);
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9]);
    let u_inner = &a6 * u_hi + &a6 * re(b[7]) + &a4 * re(b[5]) + &a2 * re(b[3]) + &id * re(b[1]);
    let u = a * u_inner;
    let v_hi = &a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8]);
    let v = &a6 * v_hi + &a6 * re(b[6]) + &a4 * re(b[4]) + &a2 * re(b[2]) + &id * re(b[0]);
    (u, v)
}

/// `exp(A)` for a square complex matrix.
///
/// # Panics
/// If `a` is not square.
pub fn expm(a: &M) -> M {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);

    let low: [(f64, &[f64]); 4] = [(THETA_3, &B3), (THETA_5, &B5), (THETA_7, &B7), (THETA_9, &B9)];
    for (theta, b) in low {
        if norm <= theta {
            let (u, v) = pade_low(a, b);
            return solve_pade(&u, &v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * re(2f64.powi(-s));
    let (u, v) = pade_13(&scaled);
    let mut x = solve_pade(&u, &v);
    for _ in 0..s {
        x = &x * &x;
    }
    x
}

/// `r = (V - U)^{-1} (V + U)`.
fn solve_pade(u: &M, v: &M) -> M {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular within its accuracy regime")
}
