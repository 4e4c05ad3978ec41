//! The six inner codes placed on every vertex of the bcc lattice.
//!
//! Every code is CSS and every qubit is measured destructively in the X
//! basis, so only Z-type flips matter at readout. A block's flip pattern is a
//! bit mask over its `s` qubits (bit `i` is qubit `i + 1` in the usual
//! one-based notation). The readout of each block is reduced to a pair
//! `(detected, logical_flip)` through a lookup table built once per code.
//!
//! The [[4,1,1,2]] subsystem code is read out through its stabilizer `XXXX`
//! only, with logical `X1X3`. Its gauge operators `X1X2` and `Z1Z3` are not
//! preserved by the logical CZ, so the gauge outcome carries no information.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// String-addressable identifier of an inner code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CodeId {
    /// Unconcatenated qubit.
    #[serde(rename = "cubic")]
    Cubic,
    /// [[2,1,1]] repetition code.
    #[serde(rename = "211")]
    Rep2,
    /// [[3,1,1]]_1, the three-qubit repetition code.
    #[serde(rename = "311_1")]
    Rep3,
    /// [[3,1,1]]_2, stabilizers XXX and IZZ.
    #[serde(rename = "311_2")]
    Mixed3,
    /// [[4,1,1,2]] subsystem code.
    #[serde(rename = "4112")]
    Subsystem4,
    /// [[7,1,3]] Steane code.
    #[serde(rename = "713")]
    Steane7,
}

impl CodeId {
    pub const ALL: [CodeId; 6] =
        [CodeId::Cubic, CodeId::Rep2, CodeId::Rep3, CodeId::Mixed3, CodeId::Subsystem4, CodeId::Steane7];

    pub fn as_str(self) -> &'static str {
        match self {
            CodeId::Cubic => "cubic",
            CodeId::Rep2 => "211",
            CodeId::Rep3 => "311_1",
            CodeId::Mixed3 => "311_2",
            CodeId::Subsystem4 => "4112",
            CodeId::Steane7 => "713",
        }
    }

    /// Whether the code has a transversal logical CZ (Type I) or needs a
    /// non-transversal gate pattern (Type II). The trivial code counts as
    /// Type I.
    pub fn is_transversal(self) -> bool {
        matches!(self, CodeId::Cubic | CodeId::Subsystem4 | CodeId::Steane7)
    }
}

impl fmt::Display for CodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CodeId::ALL.iter().copied().find(|c| c.as_str() == s).ok_or_else(|| {
            Error::config(format!("unknown inner code '{s}' (expected one of cubic, 211, 311_1, 311_2, 4112, 713)"))
        })
    }
}

/// Readout of one block after destructive X measurement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockOutcome {
    pub detected: bool,
    pub logical_flip: bool,
}

/// An inner stabilizer code, described by the supports of its operators.
#[derive(Clone, Debug, Serialize)]
pub struct InnerCode {
    pub id: CodeId,
    /// Block size `s`.
    pub size: usize,
    /// X-type checks readable from X-basis outcomes.
    pub x_checks: Vec<u8>,
    /// Z-type stabilizers (plus the Z gauge operator of the subsystem code).
    /// Not measurable from X outcomes; used only to reduce Z patterns to a
    /// canonical form.
    pub z_stabilizers: Vec<u8>,
    pub logical_x: u8,
    pub logical_z: u8,
    pub detects_all_single_z: bool,
    #[serde(skip)]
    table: Vec<BlockOutcome>,
}

fn parity(x: u8) -> bool {
    x.count_ones() & 1 == 1
}

/// Bit mask from one-based qubit labels.
const fn support(qubits: &[u8]) -> u8 {
    let mut mask = 0u8;
    let mut i = 0;
    while i < qubits.len() {
        mask |= 1 << (qubits[i] - 1);
        i += 1;
    }
    mask
}

impl InnerCode {
    fn new(id: CodeId, size: usize, x_checks: Vec<u8>, z_stabilizers: Vec<u8>, logical_x: u8, logical_z: u8) -> Self {
        let mut code = InnerCode {
            id,
            size,
            x_checks,
            z_stabilizers,
            logical_x,
            logical_z,
            detects_all_single_z: false,
            table: Vec::new(),
        };
        code.table = (0..1u16 << size)
            .map(|mask| {
                let mask = mask as u8;
                BlockOutcome { detected: code.syndrome_mask(mask) != 0, logical_flip: parity(mask & code.logical_x) }
            })
            .collect();
        code.detects_all_single_z = size > 1 && (0..size).all(|q| code.table[1 << q].detected);
        code
    }

    /// Mask with one bit per qubit of the block.
    pub fn full_mask(&self) -> u8 {
        ((1u16 << self.size) - 1) as u8
    }

    /// Syndrome of a flip mask, bit `i` for `x_checks[i]`.
    #[inline]
    pub fn syndrome_mask(&self, z_flips: u8) -> u8 {
        self.x_checks.iter().enumerate().fold(0u8, |acc, (i, &check)| acc | ((parity(check & z_flips) as u8) << i))
    }

    /// Detect-and-erase readout of a flip mask. Never corrects.
    #[inline]
    pub fn decode_mask(&self, z_flips: u8) -> BlockOutcome {
        self.table[z_flips as usize]
    }

    pub fn outcome_table(&self) -> &[BlockOutcome] {
        &self.table
    }

    /// Syndrome of an explicit flip vector of length `s`.
    pub fn syndrome(&self, z_flips: &[bool]) -> Result<Vec<bool>> {
        let mask = self.mask_from_bits(z_flips)?;
        let syn = self.syndrome_mask(mask);
        Ok((0..self.x_checks.len()).map(|i| syn >> i & 1 == 1).collect())
    }

    pub fn decode(&self, z_flips: &[bool]) -> Result<BlockOutcome> {
        Ok(self.decode_mask(self.mask_from_bits(z_flips)?))
    }

    pub fn mask_from_bits(&self, bits: &[bool]) -> Result<u8> {
        if bits.len() != self.size {
            return Err(Error::input(format!(
                "code {} has {} qubits, got {} flip bits",
                self.id,
                self.size,
                bits.len()
            )));
        }
        Ok(bits.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i)))
    }

    /// Minimum-weight representative of `z_pattern` modulo the Z stabilizers.
    /// Ties go to the numerically smallest mask.
    pub fn reduce_z(&self, z_pattern: u8) -> u8 {
        let n = self.z_stabilizers.len();
        let mut best = z_pattern;
        for subset in 1u32..(1 << n) {
            let mut cand = z_pattern;
            for (i, &g) in self.z_stabilizers.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    cand ^= g;
                }
            }
            if (cand.count_ones(), cand) < (best.count_ones(), best) {
                best = cand;
            }
        }
        best
    }
}

/// The immutable registry of built-in codes.
pub fn builtin_codes() -> &'static [InnerCode] {
    static CODES: OnceLock<Vec<InnerCode>> = OnceLock::new();
    CODES.get_or_init(|| {
        vec![
            InnerCode::new(CodeId::Cubic, 1, vec![], vec![], support(&[1]), support(&[1])),
            InnerCode::new(CodeId::Rep2, 2, vec![support(&[1, 2])], vec![], support(&[1]), support(&[1, 2])),
            InnerCode::new(
                CodeId::Rep3,
                3,
                vec![support(&[1, 2]), support(&[2, 3])],
                vec![],
                support(&[1]),
                support(&[1, 2, 3]),
            ),
            InnerCode::new(
                CodeId::Mixed3,
                3,
                vec![support(&[1, 2, 3])],
                vec![support(&[2, 3])],
                support(&[1]),
                support(&[1, 3]),
            ),
            // Z1Z3 is a gauge operator: invisible to the readout, so it is
            // listed with the Z stabilizers for reduction purposes.
            InnerCode::new(
                CodeId::Subsystem4,
                4,
                vec![support(&[1, 2, 3, 4])],
                vec![support(&[1, 2, 3, 4]), support(&[1, 3])],
                support(&[1, 3]),
                support(&[1, 2]),
            ),
            InnerCode::new(
                CodeId::Steane7,
                7,
                vec![support(&[1, 2, 3, 4]), support(&[1, 3, 5, 7]), support(&[3, 4, 6, 7])],
                vec![support(&[1, 2, 3, 4]), support(&[1, 3, 5, 7]), support(&[3, 4, 6, 7])],
                support(&[1, 2, 3, 4, 5, 6, 7]),
                support(&[1, 2, 3, 4, 5, 6, 7]),
            ),
        ]
    })
}

/// Look up a built-in code.
pub fn code(id: CodeId) -> &'static InnerCode {
    builtin_codes().iter().find(|c| c.id == id).expect("registry holds every CodeId")
}

/// Look up a built-in code by its string id.
pub fn lookup(name: &str) -> Result<&'static InnerCode> {
    Ok(code(name.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn in_span(target: u8, gens: &[u8]) -> bool {
        (0u32..1 << gens.len()).any(|subset| {
            gens.iter().enumerate().filter(|(i, _)| subset >> i & 1 == 1).fold(0u8, |acc, (_, &g)| acc ^ g) == target
        })
    }

    #[test]
    fn registry_has_six_codes() {
        assert_eq!(builtin_codes().len(), 6);
        let r211 = lookup("211").unwrap();
        assert_eq!(r211.size, 2);
        assert_eq!(r211.x_checks, vec![0b11]);
        assert_eq!(r211.logical_x, 0b01);

        let m3 = lookup("311_2").unwrap();
        assert_eq!(m3.size, 3);
        assert_eq!(m3.x_checks, vec![0b111]);
        assert_eq!(m3.logical_x, 0b001);

        let cubic = lookup("cubic").unwrap();
        assert_eq!(cubic.size, 1);
        assert!(cubic.x_checks.is_empty());
        assert_eq!(cubic.logical_x, 1);
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(matches!(lookup("513"), Err(Error::Config(_))));
    }

    #[test]
    fn structural_invariants() {
        for code in builtin_codes() {
            assert!(!in_span(code.logical_x, &code.x_checks), "{}", code.id);
            assert!(parity(code.logical_x & code.logical_z), "{}", code.id);
            for &z in &code.z_stabilizers {
                assert!(!parity(z & code.logical_x), "{}", code.id);
                for &x in &code.x_checks {
                    assert!(!parity(z & x), "{}", code.id);
                }
            }
            for &x in &code.x_checks {
                assert!(!parity(x & code.logical_z), "{}", code.id);
            }
            if code.id != CodeId::Cubic {
                assert!(code.detects_all_single_z, "{}", code.id);
                for q in 0..code.size {
                    assert!(code.decode_mask(1 << q).detected);
                }
            }
        }
    }

    #[test]
    fn syndrome_examples() {
        let r211 = lookup("211").unwrap();
        assert_eq!(r211.syndrome(&[true, false]).unwrap(), vec![true]);
        assert_eq!(r211.syndrome(&[true, true]).unwrap(), vec![false]);
        assert!(matches!(r211.syndrome(&[true]), Err(Error::Input(_))));

        let steane = lookup("713").unwrap();
        let mut e5 = [false; 7];
        e5[4] = true;
        let syn = steane.syndrome(&e5).unwrap();
        assert_eq!(syn, vec![false, true, false]);
    }

    #[test]
    fn decode_examples() {
        let r211 = lookup("211").unwrap();
        assert_eq!(r211.decode(&[true, true]).unwrap(), BlockOutcome { detected: false, logical_flip: true });
        let s4 = lookup("4112").unwrap();
        assert_eq!(
            s4.decode(&[true, false, false, false]).unwrap(),
            BlockOutcome { detected: true, logical_flip: true }
        );
        for code in builtin_codes() {
            assert_eq!(code.decode_mask(0), BlockOutcome::default());
        }
    }

    #[test]
    fn rep2_enumeration() {
        let r211 = lookup("211").unwrap();
        let detected: Vec<u8> = (0..4u8).filter(|&m| r211.decode_mask(m).detected).collect();
        assert_eq!(detected, vec![0b01, 0b10]);
        assert!(r211.decode_mask(0b11).logical_flip);
    }

    #[test]
    fn z_reduction() {
        let m3 = lookup("311_2").unwrap();
        assert_eq!(m3.reduce_z(0b110), 0);
        assert_eq!(m3.reduce_z(0b111), 0b001);
        let steane = lookup("713").unwrap();
        assert_eq!(steane.reduce_z(0b0001111), 0);
        assert_eq!(steane.reduce_z(0b1111111).count_ones(), 3);
    }
}
