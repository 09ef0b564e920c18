use std::fmt;

/// A probe polarization sign or a meter sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// `(-1)^(i+1)` for a 1-based pulse index.
    pub fn alternating(index_from_one: usize) -> Sign {
        if index_from_one % 2 == 1 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PulseEntry {
    /// Sign of the classical `Sx = ±nL/2`.
    pub sx_sign: Sign,
    /// Weight of this pulse's `Sy` in the accumulated meter.
    pub meter_sign: Sign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScheduleMode {
    /// All pulses share one polarization.
    Naive,
    /// `p` pairs of opposite polarization.
    Decoupled(usize),
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleMode::Naive => write!(f, "naive"),
            ScheduleMode::Decoupled(_) => write!(f, "decoupled"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PulseSchedule {
    pub entries: Vec<PulseEntry>,
    pub mode: ScheduleMode,
}

impl PulseSchedule {
    /// `pulses` identical pulses, all counted with `+1` in the meter.
    pub fn naive(pulses: usize) -> Self {
        let entry = PulseEntry {
            sx_sign: Sign::Plus,
            meter_sign: Sign::Plus,
        };
        PulseSchedule {
            entries: vec![entry; pulses],
            mode: ScheduleMode::Naive,
        }
    }

    /// `2p` pulses with `Sx` alternating `+, -, +, …` and meter sign
    /// `(-1)^(i+1)`, so every pulse adds its `Jz` signal with the same sign.
    pub fn decoupled(p: usize) -> Self {
        let entries = (1..=2 * p)
            .map(|i| PulseEntry {
                sx_sign: Sign::alternating(i),
                meter_sign: Sign::alternating(i),
            })
            .collect();
        PulseSchedule {
            entries,
            mode: ScheduleMode::Decoupled(p),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Decoupling order, `None` for naive schedules.
    pub fn order(&self) -> Option<usize> {
        match self.mode {
            ScheduleMode::Naive => None,
            ScheduleMode::Decoupled(p) => Some(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_is_all_plus() {
        let s = PulseSchedule::naive(7);
        assert_eq!(s.len(), 7);
        assert!(s
            .entries
            .iter()
            .all(|e| e.sx_sign == Sign::Plus && e.meter_sign == Sign::Plus));
        assert_eq!(s.order(), None);
    }

    #[test]
    fn decoupled_alternates() {
        let s = PulseSchedule::decoupled(3);
        assert_eq!(s.len(), 6);
        let signs: Vec<f64> = s.entries.iter().map(|e| e.sx_sign.value()).collect();
        assert_eq!(signs, vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        for (i, e) in s.entries.iter().enumerate() {
            let expected = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(e.meter_sign.value(), expected);
        }
        assert_eq!(s.order(), Some(3));
        assert_eq!(-Sign::Plus, Sign::Minus);
    }
}
