use std::cmp::Ordering;

/// Maximum number of indeterminates in one function field.
pub const MAX_VARS: usize = 24;

/// A monomial as a fixed-width exponent vector, ordered graded-lexicographically
/// with `x_0 > x_1 > …`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Mono {
    deg: u16,
    e: [u8; MAX_VARS],
}

impl Default for Mono {
    fn default() -> Self {
        Mono::one()
    }
}

impl Mono {
    pub fn one() -> Mono {
        Mono { deg: 0, e: [0; MAX_VARS] }
    }

    pub fn var(i: usize) -> Mono {
        Mono::var_pow(i, 1)
    }

    pub fn var_pow(i: usize, k: u8) -> Mono {
        assert!(i < MAX_VARS, "variable index out of range");
        let mut m = Mono::one();
        m.e[i] = k;
        m.deg = k as u16;
        m
    }

    pub fn from_exponents(exps: &[u32]) -> Mono {
        assert!(exps.len() <= MAX_VARS, "too many variables");
        let mut m = Mono::one();
        for (i, &k) in exps.iter().enumerate() {
            assert!(k <= u8::MAX as u32, "exponent overflow");
            m.e[i] = k as u8;
            m.deg += k as u16;
        }
        m
    }

    pub fn degree(&self) -> usize {
        self.deg as usize
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.e[i] as u32
    }

    pub fn exponents(&self) -> &[u8; MAX_VARS] {
        &self.e
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    /// Highest variable index with a nonzero exponent, plus one.
    pub fn support_len(&self) -> usize {
        self.e.iter().rposition(|&k| k != 0).map_or(0, |i| i + 1)
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut m = *self;
        for i in 0..MAX_VARS {
            let s = m.e[i] as u16 + o.e[i] as u16;
            assert!(s <= u8::MAX as u16, "exponent overflow");
            m.e[i] = s as u8;
        }
        m.deg += o.deg;
        m
    }

    pub fn divides(&self, o: &Mono) -> bool {
        self.deg <= o.deg && (0..MAX_VARS).all(|i| self.e[i] <= o.e[i])
    }

    /// `o / self`, assuming `self` divides `o`.
    pub fn div_of(&self, o: &Mono) -> Mono {
        let mut m = *o;
        for i in 0..MAX_VARS {
            m.e[i] -= self.e[i];
        }
        m.deg -= self.deg;
        m
    }

    pub fn gcd(&self, o: &Mono) -> Mono {
        let mut m = Mono::one();
        for i in 0..MAX_VARS {
            m.e[i] = self.e[i].min(o.e[i]);
            m.deg += m.e[i] as u16;
        }
        m
    }

    /// Drops the exponents of variables `k..` (used by partial evaluation).
    pub fn truncate(&self, k: usize) -> Mono {
        let mut m = *self;
        for i in k..MAX_VARS {
            m.deg -= m.e[i] as u16;
            m.e[i] = 0;
        }
        m
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        self.deg.cmp(&o.deg).then_with(|| self.e.cmp(&o.e))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order() {
        let x = Mono::var(0);
        let y = Mono::var(1);
        let x2 = Mono::var_pow(0, 2);
        let xy = x.mul(&y);
        let y3 = Mono::var_pow(1, 3);
        assert!(x > y);
        assert!(x2 > xy);
        assert!(y3 > x2);
        assert!(Mono::one() < y);
    }

    #[test]
    fn divide_and_gcd() {
        let a = Mono::from_exponents(&[2, 1, 0]);
        let b = Mono::from_exponents(&[1, 3, 1]);
        let g = a.gcd(&b);
        assert_eq!(g, Mono::from_exponents(&[1, 1, 0]));
        assert!(g.divides(&a) && g.divides(&b));
        assert_eq!(g.div_of(&a), Mono::var(0));
    }
}
