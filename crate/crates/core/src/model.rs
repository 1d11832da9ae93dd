//! Model parameters, bitstring conventions and run manifests.
//!
//! Conventions used throughout the crate:
//!
//! * Site `j` of a chain is bit `j` of an integer encoding (site 0 is the least
//!   significant bit).
//! * In the Z basis bit `j = 1` means spin down along Z at site `j`.
//! * In the X basis bit `j = 1` means `|->` at site `j`, bit `j = 0` means `|+>`.
//! * Text renderings list site 0 first, using `+` and `-`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the chain length for full outcome enumeration.
pub const ENUMERATION_CAP: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Periodic: includes the bond `(L-1, 0)`.
    Pbc,
    /// Open: `L - 1` bonds.
    Obc,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Pbc => "pbc",
            Boundary::Obc => "obc",
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pbc" | "periodic" => Ok(Boundary::Pbc),
            "obc" | "open" => Ok(Boundary::Obc),
            other => Err(Error::Input(format!("unknown boundary condition {other:?}"))),
        }
    }
}

/// Parameters of the quench `|+...+> -> e^{-iHt}|+...+>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
    pub boundary: Boundary,
    /// Trotter step in units of `1/J`.
    pub dt: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            l: 12,
            j: 1.0,
            h: 0.2,
            boundary: Boundary::Pbc,
            dt: PI / 160.0,
        }
    }
}

impl ModelParams {
    pub fn new(l: usize, j: f64, h: f64, boundary: Boundary, dt: f64) -> Result<Self> {
        let p = ModelParams {
            l,
            j,
            h,
            boundary,
            dt,
        };
        p.validate()?;
        Ok(p)
    }

    /// Default couplings with a different chain length, field and boundary.
    pub fn with(l: usize, h: f64, boundary: Boundary) -> Self {
        ModelParams {
            l,
            h,
            boundary,
            ..ModelParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::Input(format!("chain length must be at least 2, got {}", self.l)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Input(format!("Trotter step must be positive, got {}", self.dt)));
        }
        if self.j == 0.0 || !self.j.is_finite() {
            return Err(Error::Input("coupling J must be finite and nonzero".into()));
        }
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(Error::Input(format!("transverse field must be >= 0, got {}", self.h)));
        }
        Ok(())
    }

    /// Bonds `(j, j+1)` of the chain. Under PBC the wrap-around bond
    /// `(L-1, 0)` is included, so `L = 2` counts the single pair twice.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.l;
        let mut b: Vec<(usize, usize)> = (0..l - 1).map(|j| (j, j + 1)).collect();
        if self.boundary == Boundary::Pbc {
            b.push((l - 1, 0));
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

/// An X-basis measurement outcome on `len` sites.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    bits: u64,
    len: u8,
}

impl Bitstring {
    pub fn new(bits: u64, len: usize) -> Self {
        assert!(len <= 64, "bitstring length {len} exceeds 64");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        debug_assert_eq!(bits & !mask, 0, "bits set beyond length");
        Bitstring {
            bits: bits & mask,
            len: len as u8,
        }
    }

    /// `+...+`.
    pub fn all_plus(len: usize) -> Self {
        Bitstring::new(0, len)
    }

    /// `-+...+-`: spin flips on the two end sites.
    pub fn edge_flipped(len: usize) -> Self {
        Bitstring::new(1 | (1u64 << (len - 1)), len)
    }

    pub fn index(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    /// True when site `j` is `|->`.
    pub fn is_minus(self, j: usize) -> bool {
        (self.bits >> j) & 1 == 1
    }

    pub fn flips(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn parity(self) -> Parity {
        parity(self)
    }
}

/// Even iff the number of `|->` sites is even.
pub fn parity(sigma: Bitstring) -> Parity {
    if sigma.bits.count_ones() % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len() {
            f.write_str(if self.is_minus(j) { "-" } else { "+" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    /// Parses `+`/`-` strings, site 0 first. The Unicode minus is accepted.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        let mut len = 0usize;
        for c in s.chars() {
            match c {
                '+' => {}
                '-' | '\u{2212}' => bits |= 1 << len,
                _ => return Err(Error::Input(format!("invalid bitstring character {c:?} in {s:?}"))),
            }
            len += 1;
            if len > 64 {
                return Err(Error::Input("bitstring longer than 64 sites".into()));
            }
        }
        Ok(Bitstring::new(bits, len))
    }
}

/// All even-parity bitstrings of length `l` in ascending integer order.
pub fn enumerate_even(l: usize) -> Result<Vec<Bitstring>> {
    enumerate_even_with_cap(l, ENUMERATION_CAP)
}

pub fn enumerate_even_with_cap(l: usize, cap: usize) -> Result<Vec<Bitstring>> {
    if l > cap {
        return Err(Error::capacity("chain length for enumeration", l, cap));
    }
    if l < 2 {
        return Err(Error::Input(format!("enumeration needs L >= 2, got {l}")));
    }
    Ok((0..1u64 << l)
        .filter(|b| b.count_ones() % 2 == 0)
        .map(|b| Bitstring::new(b, l))
        .collect())
}

/// A uniform grid of real times with an optional imaginary part per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    /// Number of intervals; the grid has `steps + 1` points.
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
}

impl Default for TimeGrid {
    /// `[0, 3 pi]` at spacing `pi/160`.
    fn default() -> Self {
        TimeGrid::new(0.0, 3.0 * PI, 480).unwrap()
    }
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        let g = TimeGrid {
            t_start,
            t_end,
            steps,
            tau: None,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Input("time grid needs at least one step".into()));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(Error::Input("time grid bounds must be finite".into()));
        }
        if let Some(tau) = &self.tau {
            if tau.len() != self.steps + 1 {
                return Err(Error::Input(format!(
                    "time grid has {} points but {} imaginary parts",
                    self.steps + 1,
                    tau.len()
                )));
            }
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.point(k)).collect()
    }

    pub fn tau_at(&self, k: usize) -> f64 {
        self.tau.as_ref().map_or(0.0, |t| t[k])
    }
}

/// Provenance record written next to every output file.
///
/// Serialized as a single flat JSON object. Everything except `timestamp`
/// and `truncated` determines the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub params: ModelParams,
    #[serde(flatten)]
    pub grid: TimeGrid,
    pub mode: String,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp: String,
    #[serde(default)]
    pub truncated: bool,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(params: ModelParams, grid: TimeGrid, mode: impl Into<String>, seed: u64) -> Self {
        RunManifest {
            params,
            grid,
            mode: mode.into(),
            seed,
            tool_version: crate::TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            truncated: false,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.extra.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity(bs("++++")), Parity::Even);
        assert_eq!(parity(bs("-+++")), Parity::Odd);
        assert_eq!(parity(bs("+--+")), Parity::Even);
    }

    #[test]
    fn enumerate_small_chains() {
        let two: Vec<String> = enumerate_even(2).unwrap().iter().map(|b| b.to_string()).collect();
        assert_eq!(two, ["++", "--"]);
        let three: Vec<String> = enumerate_even(3).unwrap().iter().map(|b| b.to_string()).collect();
        assert_eq!(three, ["+++", "--+", "-+-", "+--"]);
        assert_eq!(enumerate_even(12).unwrap().len(), 2048);
    }

    #[test]
    fn enumeration_cap_is_reported() {
        let err = enumerate_even(27).unwrap_err();
        assert!(matches!(err, Error::Capacity { cap: 26, value: 27, .. }));
        assert!(err.to_string().contains("26"));
        assert!(enumerate_even_with_cap(5, 4).is_err());
        assert_eq!(enumerate_even_with_cap(5, 5).unwrap().len(), 16);
    }

    #[test]
    fn enumeration_is_sorted_even_and_unique() {
        for l in 2..=10 {
            let all = enumerate_even(l).unwrap();
            assert_eq!(all.len(), 1 << (l - 1));
            assert!(all.windows(2).all(|w| w[0].index() < w[1].index()));
            assert!(all.iter().all(|b| b.parity() == Parity::Even));
        }
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1, 1.0, 0.2, Boundary::Pbc, 0.1).is_err());
        assert!(ModelParams::new(4, 0.0, 0.2, Boundary::Pbc, 0.1).is_err());
        assert!(ModelParams::new(4, 1.0, 0.2, Boundary::Pbc, 0.0).is_err());
        assert!(ModelParams::new(4, 1.0, -0.1, Boundary::Pbc, 0.1).is_err());
        let d = ModelParams::default();
        assert_eq!((d.l, d.j, d.h, d.boundary), (12, 1.0, 0.2, Boundary::Pbc));
        assert!((d.dt - PI / 160.0).abs() < 1e-15);
        let g = TimeGrid::default();
        assert!((g.t_end - 3.0 * PI).abs() < 1e-15);
        assert!((g.spacing() - d.dt).abs() < 1e-15);
    }

    #[test]
    fn bond_lists() {
        assert_eq!(ModelParams::with(2, 0.0, Boundary::Pbc).bonds(), vec![(0, 1), (1, 0)]);
        assert_eq!(ModelParams::with(3, 0.0, Boundary::Obc).bonds(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn manifest_is_flat_json() {
        let m = RunManifest::new(ModelParams::default(), TimeGrid::default(), "exact_spectral", 7)
            .with_extra("n", "0,1,inf");
        let v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        let obj = v.as_object().unwrap();
        assert!(obj.values().all(|x| !x.is_object()));
        assert_eq!(obj["L"], 12);
        assert_eq!(obj["boundary"], "pbc");
        assert_eq!(obj["seed"], 7);
        let back: RunManifest = serde_json::from_value(v).unwrap();
        assert_eq!(back.params, m.params);
        assert_eq!(back.extra["n"], "0,1,inf");
    }

    proptest::proptest! {
        #[test]
        fn bitstring_round_trips(l in 1usize..=26, raw in proptest::num::u64::ANY) {
            let bits = raw & ((1u64 << l) - 1);
            let b = Bitstring::new(bits, l);
            proptest::prop_assert_eq!(Bitstring::new(b.index(), b.len()), b);
            let parsed: Bitstring = b.to_string().parse().unwrap();
            proptest::prop_assert_eq!(parsed, b);
        }
    }
}
