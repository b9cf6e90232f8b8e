use serde::Serialize;

/// The pole `+1` or `-1` a rapidity is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pole {
    Plus,
    Minus,
}

impl Pole {
    pub fn value(self) -> f64 {
        match self {
            Pole::Plus => 1.0,
            Pole::Minus => -1.0,
        }
    }
}

/// A real rapidity stored as `pole + offset`, anchored to the nearer pole.
///
/// Near the poles the offset carries all significant digits, so `1 - e`,
/// `1 + e` and differences inside one cluster are exact to working precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rapidity {
    pub pole: Pole,
    pub offset: f64,
}

impl Rapidity {
    pub fn new(pole: Pole, offset: f64) -> Self {
        Self { pole, offset }
    }

    /// Attaches `e` to the nearer pole.
    pub fn from_value(e: f64) -> Self {
        let pole = if e >= 0.0 { Pole::Plus } else { Pole::Minus };
        Self {
            pole,
            offset: e - pole.value(),
        }
    }

    pub fn value(&self) -> f64 {
        self.pole.value() + self.offset
    }

    /// `1 - e`.
    pub fn one_minus(&self) -> f64 {
        match self.pole {
            Pole::Plus => -self.offset,
            Pole::Minus => 2.0 - self.offset,
        }
    }

    /// `1 + e`.
    pub fn one_plus(&self) -> f64 {
        match self.pole {
            Pole::Plus => 2.0 + self.offset,
            Pole::Minus => self.offset,
        }
    }

    /// `self - other`.
    pub fn minus(&self, other: &Rapidity) -> f64 {
        if self.pole == other.pole {
            self.offset - other.offset
        } else {
            (self.pole.value() - other.pole.value()) + (self.offset - other.offset)
        }
    }

    /// `e + delta`, re-anchored if it moved closer to the other pole.
    pub(crate) fn shifted(&self, delta: f64) -> Self {
        let offset = self.offset + delta;
        match self.pole {
            Pole::Minus if offset > 1.0 => Self::new(Pole::Plus, offset - 2.0),
            Pole::Plus if offset < -1.0 => Self::new(Pole::Minus, offset + 2.0),
            pole => Self::new(pole, offset),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn offsets_keep_precision() {
        let a = Rapidity::new(Pole::Plus, 1e-20);
        let b = Rapidity::new(Pole::Plus, 3e-20);
        assert_eq!(a.one_minus(), -1e-20);
        assert_relative_eq!(b.minus(&a), 2e-20, max_relative = 1e-15);
        let c = Rapidity::new(Pole::Minus, 5e-19);
        assert_eq!(c.one_plus(), 5e-19);
        assert_eq!(a.minus(&c), 2.0);
        // the plain-value route loses these digits entirely
        assert_eq!(a.value() - 1.0, 0.0);
    }

    #[test]
    fn shift_reanchors_exactly() {
        let r = Rapidity::new(Pole::Minus, 1.75).shifted(0.125);
        assert_eq!(r.pole, Pole::Plus);
        assert_eq!(r.one_minus(), 0.125);
        let r = Rapidity::new(Pole::Minus, 1.9).shifted(0.09);
        assert_eq!(r.pole, Pole::Plus);
        assert_relative_eq!(r.value(), 0.99, max_relative = 1e-15);
        let r = Rapidity::new(Pole::Plus, -0.5).shifted(-0.7);
        assert_eq!(r.pole, Pole::Minus);
        assert_relative_eq!(r.value(), -0.2, max_relative = 1e-14);
        assert_eq!(Rapidity::new(Pole::Plus, 2.0).shifted(3.0).pole, Pole::Plus);
    }

    #[test]
    fn from_value_round_trip() {
        for e in [-3.5, -1.0, -0.2, 0.0, 0.7, 1.0, 42.0] {
            assert_relative_eq!(Rapidity::from_value(e).value(), e, max_relative = 1e-15);
        }
    }
}
