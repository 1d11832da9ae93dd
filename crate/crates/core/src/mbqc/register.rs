//! Small dense qubit register supporting the operations of the streaming
//! cluster simulation: attach `|+>`, CZ, and measure-and-discard.

use num_complex::Complex64;

use super::MeasBasis;

/// How a measurement outcome is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Choice {
    /// Post-select the given outcome.
    Forced(u8),
    /// Born rule: outcome 0 iff `u < P(0)`.
    Born(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Register {
    pub(crate) amps: Vec<Complex64>,
    pub(crate) n: usize,
}

impl Register {
    pub(crate) fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        Register { amps, n }
    }

    /// Appends a qubit in `|+>` as the new most significant bit.
    pub(crate) fn add_plus(&mut self) -> usize {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let half = self.amps.len();
        self.amps.iter_mut().for_each(|a| *a *= s);
        self.amps.extend_from_within(..half);
        self.n += 1;
        self.n - 1
    }

    pub(crate) fn cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Measures qubit `q` in `basis`, removes it and renormalizes.
    ///
    /// Returns the outcome and its Born probability.
    pub(crate) fn measure(&mut self, q: usize, basis: MeasBasis, choice: Choice) -> (u8, f64) {
        let [b0, b1] = basis.vectors();
        let low = (1usize << q) - 1;
        let half = self.amps.len() / 2;
        let project = |b: [Complex64; 2]| -> Vec<Complex64> {
            (0..half)
                .map(|k| {
                    let i0 = (k & low) | ((k & !low) << 1);
                    let i1 = i0 | (1 << q);
                    b[0].conj() * self.amps[i0] + b[1].conj() * self.amps[i1]
                })
                .collect()
        };
        let total: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        let v0 = project(b0);
        let p0 = v0.iter().map(|a| a.norm_sqr()).sum::<f64>() / total;
        let m = match choice {
            Choice::Forced(m) => m,
            Choice::Born(u) => u8::from(u >= p0),
        };
        let (mut v, p) = if m == 0 { (v0, p0) } else { (project(b1), 1.0 - p0) };
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|a| *a /= norm);
        }
        self.amps = v;
        self.n -= 1;
        (m, p)
    }

    /// Reorders qubits so that old qubit `order[k]` becomes qubit `k`.
    pub(crate) fn permute(&mut self, order: &[usize]) {
        if order.iter().enumerate().all(|(k, q)| k == *q) {
            return;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let j = order
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, q)| acc | (((i >> q) & 1) << k));
            out[j] = *a;
        }
        self.amps = out;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plus_then_x_measurement_is_deterministic() {
        let mut r = Register::from_amplitudes(0, vec![Complex64::new(1.0, 0.0)]);
        r.add_plus();
        let (m, p) = r.measure(0, MeasBasis::new(std::f64::consts::FRAC_PI_2, 0.0), Choice::Born(0.99));
        assert_eq!(m, 0);
        assert!((p - 1.0).abs() < 1e-14);
        assert_eq!(r.n, 0);
    }

    #[test]
    fn permute_swaps_bits() {
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[1] = Complex64::new(1.0, 0.0);
        let mut r = Register::from_amplitudes(2, amps);
        r.permute(&[1, 0]);
        assert_eq!(r.amps[2], Complex64::new(1.0, 0.0));
    }
}
