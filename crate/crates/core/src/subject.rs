use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gkls::GklsGenerator;
use crate::linalg::ComplexMatrix;
use crate::spectra::SpectrumKind;
use crate::superop::QuantumChannel;

/// Either kind of evolution the analysis pipeline accepts.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Subject {
    Generator(GklsGenerator),
    Channel(QuantumChannel),
}

impl Subject {
    pub fn kind(&self) -> SpectrumKind {
        match self {
            Subject::Channel(_) => SpectrumKind::Channel,
            Subject::Generator(_) => SpectrumKind::Generator,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Subject::Channel(c) => c.dim(),
            Subject::Generator(g) => g.dim(),
        }
    }

    pub fn superop(&self) -> &ComplexMatrix {
        match self {
            Subject::Channel(c) => c.superop(),
            Subject::Generator(g) => g.superop(),
        }
    }

    /// Parses the channel or generator JSON schema. Without an explicit
    /// kind, a `"hamiltonian"` key selects the generator schema.
    pub fn from_json_str(text: &str, kind: Option<SpectrumKind>) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let kind = kind.unwrap_or_else(|| {
            if value.get("hamiltonian").is_some() {
                SpectrumKind::Generator
            } else {
                SpectrumKind::Channel
            }
        });
        if !value.is_object() {
            return Err(Error::InvalidParameter("expected a JSON object".into()));
        }
        Ok(match kind {
            SpectrumKind::Channel => Subject::Channel(serde_json::from_value(value)?),
            SpectrumKind::Generator => Subject::Generator(serde_json::from_value(value)?),
        })
    }
}

impl From<QuantumChannel> for Subject {
    fn from(c: QuantumChannel) -> Self {
        Subject::Channel(c)
    }
}

impl From<GklsGenerator> for Subject {
    fn from(g: GklsGenerator) -> Self {
        Subject::Generator(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions;

    #[test]
    fn kind_detection() {
        let gen = constructions::saturating_hamiltonian_generator(2, 0.0, 1.0).unwrap();
        let text = serde_json::to_string(&gen).unwrap();
        let s = Subject::from_json_str(&text, None).unwrap();
        assert_eq!(s.kind(), SpectrumKind::Generator);

        let ch = constructions::phase_damping_channel(2).unwrap();
        let text = serde_json::to_string(&ch).unwrap();
        let s = Subject::from_json_str(&text, None).unwrap();
        assert_eq!(s.kind(), SpectrumKind::Channel);
        assert!(Subject::from_json_str(&text, Some(SpectrumKind::Generator)).is_err());
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = Subject::from_json_str("{\n\"dim\": 2,\n oops }", None).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
