//! 256-bit reference implementations of Gamma, zeta, the polylogarithm and
//! the lower incomplete gamma function at complex arguments. Only used to
//! check the double-precision library.

use astro_float::{BigFloat, Consts, RoundingMode};
use num_complex::Complex64;

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// `B_{2k}` for `k = 1..=15` as exact fractions.
const BERNOULLI: [(f64, f64); 15] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
    (-23749461029.0, 870.0),
    (8615841276005.0, 14322.0),
];

#[derive(Clone, Debug)]
struct C {
    re: BigFloat,
    im: BigFloat,
}

pub struct Hp {
    cc: Consts,
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, P)
}

fn to_f64(x: &BigFloat) -> f64 {
    format!("{x}").parse().expect("decimal rendering")
}

impl Hp {
    pub fn new() -> Self {
        Hp { cc: Consts::new().expect("constant cache") }
    }

    fn c(&self, z: Complex64) -> C {
        C { re: big(z.re), im: big(z.im) }
    }

    fn out(&self, z: &C) -> Complex64 {
        Complex64::new(to_f64(&z.re), to_f64(&z.im))
    }

    fn add(&self, a: &C, b: &C) -> C {
        C { re: a.re.add(&b.re, P, RM), im: a.im.add(&b.im, P, RM) }
    }

    fn sub(&self, a: &C, b: &C) -> C {
        C { re: a.re.sub(&b.re, P, RM), im: a.im.sub(&b.im, P, RM) }
    }

    fn mul(&self, a: &C, b: &C) -> C {
        let re = a.re.mul(&b.re, P, RM).sub(&a.im.mul(&b.im, P, RM), P, RM);
        let im = a.re.mul(&b.im, P, RM).add(&a.im.mul(&b.re, P, RM), P, RM);
        C { re, im }
    }

    fn scale(&self, a: &C, s: &BigFloat) -> C {
        C { re: a.re.mul(s, P, RM), im: a.im.mul(s, P, RM) }
    }

    fn div(&self, a: &C, b: &C) -> C {
        let d = b.re.mul(&b.re, P, RM).add(&b.im.mul(&b.im, P, RM), P, RM);
        let re = a.re.mul(&b.re, P, RM).add(&a.im.mul(&b.im, P, RM), P, RM).div(&d, P, RM);
        let im = a.im.mul(&b.re, P, RM).sub(&a.re.mul(&b.im, P, RM), P, RM).div(&d, P, RM);
        C { re, im }
    }

    fn exp(&mut self, a: &C) -> C {
        let m = a.re.exp(P, RM, &mut self.cc);
        C { re: m.mul(&a.im.cos(P, RM, &mut self.cc), P, RM), im: m.mul(&a.im.sin(P, RM, &mut self.cc), P, RM) }
    }

    fn atan2(&mut self, y: &BigFloat, x: &BigFloat) -> BigFloat {
        let pi = self.cc.pi(P, RM);
        if x.is_zero() {
            let half = pi.div(&big(2.0), P, RM);
            return if y.is_negative() { half.neg() } else { half };
        }
        let a = y.div(x, P, RM).atan(P, RM, &mut self.cc);
        if x.is_positive() {
            a
        } else if y.is_negative() {
            a.sub(&pi, P, RM)
        } else {
            a.add(&pi, P, RM)
        }
    }

    fn ln(&mut self, a: &C) -> C {
        let r2 = a.re.mul(&a.re, P, RM).add(&a.im.mul(&a.im, P, RM), P, RM);
        let re = r2.ln(P, RM, &mut self.cc).div(&big(2.0), P, RM);
        let im = self.atan2(&a.im, &a.re);
        C { re, im }
    }

    fn real(&self, x: f64) -> C {
        C { re: big(x), im: big(0.0) }
    }

    /// `ln Gamma(w)` by the Stirling series; needs `|w|` large.
    fn ln_gamma_stirling(&mut self, w: &C) -> C {
        let half = self.real(0.5);
        let lw = self.ln(w);
        let mut s = self.sub(&self.mul(&self.sub(w, &half), &lw), w);
        let two_pi = self.cc.pi(P, RM).mul(&big(2.0), P, RM);
        let l2p = two_pi.ln(P, RM, &mut self.cc).div(&big(2.0), P, RM);
        s.re = s.re.add(&l2p, P, RM);
        let w2 = self.mul(w, w);
        let mut wp = w.clone();
        for (k, &(num, den)) in BERNOULLI.iter().enumerate() {
            let k2 = 2.0 * (k + 1) as f64;
            let coef = big(num).div(&big(den), P, RM).div(&big(k2 * (k2 - 1.0)), P, RM);
            let term = self.div(&C { re: coef, im: big(0.0) }, &wp);
            s = self.add(&s, &term);
            wp = self.mul(&wp, &w2);
        }
        s
    }

    pub fn gamma(&mut self, z: Complex64) -> Complex64 {
        let shift = (40.0 - z.re).max(0.0).ceil() as usize;
        let zc = self.c(z);
        let w = self.add(&zc, &self.real(shift as f64));
        let lg = self.ln_gamma_stirling(&w);
        let mut g = self.exp(&lg);
        for k in 0..shift {
            let f = self.add(&zc, &self.real(k as f64));
            g = self.div(&g, &f);
        }
        self.out(&g)
    }

    /// `n^{-s}`.
    fn npow(&mut self, n: f64, s: &C) -> C {
        let ln = big(n).ln(P, RM, &mut self.cc);
        let e = self.scale(s, &ln.neg());
        self.exp(&e)
    }

    /// Euler-Maclaurin with `N = 60` and 15 correction terms.
    pub fn zeta(&mut self, s: Complex64) -> Complex64 {
        let n = 60usize;
        let sc = self.c(s);
        let mut sum = self.real(0.0);
        for k in 1..n {
            let t = self.npow(k as f64, &sc);
            sum = self.add(&sum, &t);
        }
        let nf = n as f64;
        let n_pow = self.npow(nf, &sc);
        let sm1 = self.sub(&sc, &self.real(1.0));
        sum = self.add(&sum, &self.div(&self.scale(&n_pow, &big(nf)), &sm1));
        sum = self.add(&sum, &self.scale(&n_pow, &big(0.5)));
        // term_k = s (s+1) ... (s+2k-2) N^{-s-2k+1} / (2k)!
        let inv_n = big(1.0).div(&big(nf), P, RM);
        let mut term = self.scale(&self.mul(&sc, &n_pow), &inv_n);
        let mut fact = big(2.0);
        for (k, &(num, den)) in BERNOULLI.iter().enumerate() {
            let b = big(num).div(&big(den), P, RM).div(&fact, P, RM);
            sum = self.add(&sum, &self.scale(&term, &b));
            let a = 2.0 * (k + 1) as f64;
            let f1 = self.add(&sc, &self.real(a - 1.0));
            let f2 = self.add(&sc, &self.real(a));
            term = self.mul(&term, &self.mul(&f1, &f2));
            term = self.scale(&term, &inv_n.mul(&inv_n, P, RM));
            fact = fact.mul(&big((a + 1.0) * (a + 2.0)), P, RM);
        }
        self.out(&sum)
    }

    /// Direct series for `0 < z < 1`.
    pub fn polylog(&mut self, s: Complex64, z: f64) -> Complex64 {
        let sc = self.c(s);
        let zb = big(z);
        let mut zn = big(1.0);
        let mut sum = self.real(0.0);
        let stop = (1e-40f64).ln() / z.ln();
        for k in 1..=(stop.ceil() as usize + 10) {
            zn = zn.mul(&zb, P, RM);
            let t = self.npow(k as f64, &sc);
            sum = self.add(&sum, &self.scale(&t, &zn));
        }
        self.out(&sum)
    }

    /// Lower incomplete gamma `x^s e^{-x} sum_n x^n / (s (s+1) ... (s+n))`.
    pub fn lower_gamma(&mut self, s: Complex64, x: f64) -> Complex64 {
        let sc = self.c(s);
        let xb = big(x);
        let mut term = self.div(&self.real(1.0), &sc);
        let mut sum = term.clone();
        for n in 1..4000 {
            let d = self.add(&sc, &self.real(n as f64));
            term = self.div(&self.scale(&term, &xb), &d);
            sum = self.add(&sum, &term);
            let mag = to_f64(&term.re).abs() + to_f64(&term.im).abs();
            let tot = to_f64(&sum.re).abs() + to_f64(&sum.im).abs();
            if mag < 1e-40 * tot {
                break;
            }
        }
        let lx = xb.ln(P, RM, &mut self.cc);
        let e = self.sub(&self.scale(&sc, &lx), &self.real(x));
        let f = self.exp(&e);
        self.out(&self.mul(&sum, &f))
    }
}
