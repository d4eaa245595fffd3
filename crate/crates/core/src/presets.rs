//! The three stock dataset families. Each uses one stack per gate type and
//! as many baseline inputs as a single gate is wide, so the input layout is
//! [and, or, xor, baseline] with equal-width sections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{BlockSpec, Domain, FormulaSpec, GateKind};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "2inBinary")]
    TwoInBinary,
    #[serde(rename = "2inQuaternary")]
    TwoInQuaternary,
    #[serde(rename = "3inBinary")]
    ThreeInBinary,
}

pub const ALL_PRESETS: [Preset; 3] = [Preset::TwoInBinary, Preset::TwoInQuaternary, Preset::ThreeInBinary];

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::TwoInBinary => "2inBinary",
            Preset::TwoInQuaternary => "2inQuaternary",
            Preset::ThreeInBinary => "3inBinary",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let folded = name.to_ascii_lowercase();
        ALL_PRESETS
            .into_iter()
            .find(|p| p.name().to_ascii_lowercase() == folded)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown preset {name:?}; expected one of 2inBinary, 2inQuaternary, 3inBinary"
                ))
            })
    }

    fn gate_len(self) -> usize {
        match self {
            Preset::TwoInBinary | Preset::TwoInQuaternary => 2,
            Preset::ThreeInBinary => 3,
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            Preset::TwoInBinary | Preset::ThreeInBinary => Domain::new(
                vec![Value::integer(-1), Value::integer(1)],
                vec![Value::integer(1)],
            )
            .unwrap(),
            Preset::TwoInQuaternary => Domain::new(
                vec![
                    Value::integer(-1),
                    Value::new(-1, 3),
                    Value::new(1, 3),
                    Value::integer(1),
                ],
                vec![Value::new(-1, 3), Value::integer(1)],
            )
            .unwrap(),
        }
    }

    pub fn spec(self, top_level: GateKind) -> FormulaSpec {
        let block = BlockSpec::new(1, self.gate_len());
        FormulaSpec::new(block, block, block, self.gate_len(), top_level).unwrap()
    }

    pub fn input_len(self) -> usize {
        self.gate_len() * 4
    }

    pub fn enumeration_size(self) -> u64 {
        (self.domain().size() as u64).pow(self.input_len() as u32)
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::enumeration_size;

    #[test]
    fn preset_shapes_and_sizes() {
        let cases = [
            (Preset::TwoInBinary, 8, 256),
            (Preset::TwoInQuaternary, 8, 65536),
            (Preset::ThreeInBinary, 12, 4096),
        ];
        for (preset, len, total) in cases {
            let spec = preset.spec(GateKind::And);
            assert_eq!(spec.len(), len);
            assert_eq!(preset.input_len(), len);
            assert_eq!(preset.enumeration_size(), total);
            assert_eq!(enumeration_size(&spec, &preset.domain()), Some(total));
            assert_eq!(spec.num_gates(), 3);
        }
    }

    #[test]
    fn quaternary_positives_are_the_paper_pair() {
        let domain = Preset::TwoInQuaternary.domain();
        assert!(domain.is_positive(Value::new(-1, 3)));
        assert!(domain.is_positive(Value::integer(1)));
        assert!(!domain.is_positive(Value::integer(-1)));
        assert!(!domain.is_positive(Value::new(1, 3)));
    }

    #[test]
    fn names_round_trip() {
        for preset in ALL_PRESETS {
            assert_eq!(Preset::from_name(preset.name()).unwrap(), preset);
            assert_eq!(Preset::from_name(&preset.name().to_uppercase()).unwrap(), preset);
        }
        assert!(Preset::from_name("4inBinary").is_err());
        let json = serde_json::to_string(&Preset::TwoInQuaternary).unwrap();
        assert_eq!(json, "\"2inQuaternary\"");
    }
}
