//! Queue variants shared by the SHS builders and the simulator.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::closed_form::ClosedFormId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Discipline {
    /// Processor sharing: each of `n` packets is served at rate `mu / n`.
    Ps,
    /// First generated first served; only the oldest packet is in service.
    Fgfs,
}

impl Discipline {
    pub fn name(self) -> &'static str {
        match self {
            Discipline::Ps => "ps",
            Discipline::Fgfs => "fgfs",
        }
    }
}

/// What an arrival does to a full buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Overflow {
    DropNew,
    ReplaceNewest,
    /// Under FGFS the oldest packet is the one in service.
    ReplaceOldest,
}

impl Overflow {
    pub fn name(self) -> &'static str {
        match self {
            Overflow::DropNew => "drop-new",
            Overflow::ReplaceNewest => "replace-newest",
            Overflow::ReplaceOldest => "replace-oldest",
        }
    }
}

/// Single-server queue: discipline, buffer size (packets in system
/// including the one in service), full-buffer policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QueueModel {
    pub discipline: Discipline,
    pub capacity: Option<usize>,
    pub overflow: Overflow,
}

impl QueueModel {
    /// The named model this matches, if any.
    pub fn model_id(&self) -> Option<ModelId> {
        ModelId::ALL.iter().copied().find(|m| m.queue() == *self)
    }

    pub fn label(&self) -> String {
        match (self.model_id(), self.capacity) {
            (Some(m), _) => m.name().to_string(),
            (None, Some(c)) => format!("{}-cap{}-{}", self.discipline.name(), c, self.overflow.name()),
            (None, None) => format!("mm1-{}", self.discipline.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown model '{name}'; valid: {valid}")]
pub struct UnknownModel {
    pub name: String,
    pub valid: String,
}

/// Every named queue variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Mm12Ps,
    Mm12Fgfs,
    Mm12StarPs,
    Mm12StarFgfs,
    Mm12Star2Ps,
    Mm12Star2Fgfs,
    Mm11,
    Mm11Star,
    Mm1Ps,
    Mm1Fgfs,
}

impl ModelId {
    pub const ALL: [ModelId; 10] = [
        ModelId::Mm12Ps,
        ModelId::Mm12Fgfs,
        ModelId::Mm12StarPs,
        ModelId::Mm12StarFgfs,
        ModelId::Mm12Star2Ps,
        ModelId::Mm12Star2Fgfs,
        ModelId::Mm11,
        ModelId::Mm11Star,
        ModelId::Mm1Ps,
        ModelId::Mm1Fgfs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Mm1Ps => "mm1-ps",
            other => other.closed_form().map(|c| c.name()).unwrap_or("mm1-fgfs"),
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ModelId::Mm1Ps => "M/M/1 processor sharing, unbounded buffer (rho < 1)",
            other => other.closed_form().map(|c| c.describe()).unwrap_or(""),
        }
    }

    /// The printed single-source expression for this model, if there is one.
    pub fn closed_form(self) -> Option<ClosedFormId> {
        Some(match self {
            ModelId::Mm12Ps => ClosedFormId::Mm12Ps,
            ModelId::Mm12Fgfs => ClosedFormId::Mm12Fgfs,
            ModelId::Mm12StarPs => ClosedFormId::Mm12StarPs,
            ModelId::Mm12StarFgfs => ClosedFormId::Mm12StarFgfs,
            ModelId::Mm12Star2Ps => ClosedFormId::Mm12Star2Ps,
            ModelId::Mm12Star2Fgfs => ClosedFormId::Mm12Star2Fgfs,
            ModelId::Mm11 => ClosedFormId::Mm11,
            ModelId::Mm11Star => ClosedFormId::Mm11Star,
            ModelId::Mm1Fgfs => ClosedFormId::Mm1Fgfs,
            ModelId::Mm1Ps => return None,
        })
    }

    pub fn queue(self) -> QueueModel {
        use Discipline::*;
        use Overflow::*;
        let (discipline, capacity, overflow) = match self {
            ModelId::Mm12Ps => (Ps, Some(2), DropNew),
            ModelId::Mm12Fgfs => (Fgfs, Some(2), DropNew),
            ModelId::Mm12StarPs => (Ps, Some(2), ReplaceNewest),
            ModelId::Mm12StarFgfs => (Fgfs, Some(2), ReplaceNewest),
            ModelId::Mm12Star2Ps => (Ps, Some(2), ReplaceOldest),
            ModelId::Mm12Star2Fgfs => (Fgfs, Some(2), ReplaceOldest),
            ModelId::Mm11 => (Fgfs, Some(1), DropNew),
            ModelId::Mm11Star => (Fgfs, Some(1), ReplaceNewest),
            ModelId::Mm1Ps => (Ps, None, DropNew),
            ModelId::Mm1Fgfs => (Fgfs, None, DropNew),
        };
        QueueModel {
            discipline,
            capacity,
            overflow,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        ModelId::ALL
            .iter()
            .copied()
            .find(|m| m.name() == key)
            .ok_or_else(|| UnknownModel {
                name: s.to_string(),
                valid: ModelId::ALL.map(|m| m.name()).join(", "),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.name().parse::<ModelId>().unwrap(), m);
            assert_eq!(m.queue().model_id(), Some(m));
            assert_eq!(m.queue().label(), m.name());
        }
        let err = "mm13".parse::<ModelId>().unwrap_err();
        assert!(err.to_string().contains("mm12-ps"));
    }

    #[test]
    fn custom_label() {
        let q = QueueModel {
            discipline: Discipline::Ps,
            capacity: Some(8),
            overflow: Overflow::DropNew,
        };
        assert_eq!(q.label(), "ps-cap8-drop-new");
    }
}
