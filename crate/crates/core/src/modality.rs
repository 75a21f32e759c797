use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sensor channel of an observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "v")]
    Vision,
    #[serde(rename = "s")]
    Sound,
    #[serde(rename = "h")]
    Haptic,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Vision, Modality::Sound, Modality::Haptic];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Modality::Vision => 'v',
            Modality::Sound => 's',
            Modality::Haptic => 'h',
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// The set of modalities an agent perceives. Never empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Modality>", into = "Vec<Modality>")]
pub struct ModalityMask {
    bits: u8,
}

impl ModalityMask {
    pub const FULL: ModalityMask = ModalityMask { bits: 0b111 };

    pub fn new(modalities: &[Modality]) -> Result<Self> {
        let bits = modalities.iter().fold(0u8, |b, m| b | (1 << m.index()));
        if bits == 0 {
            return Err(Error::param("modality mask must contain at least one modality"));
        }
        Ok(ModalityMask { bits })
    }

    pub fn contains(self, m: Modality) -> bool {
        self.bits & (1 << m.index()) != 0
    }

    /// Present modalities in canonical `v, s, h` order.
    pub fn iter(self) -> impl Iterator<Item = Modality> {
        Modality::ALL.into_iter().filter(move |&m| self.contains(m))
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }
}

impl TryFrom<Vec<Modality>> for ModalityMask {
    type Error = Error;

    fn try_from(v: Vec<Modality>) -> Result<Self> {
        ModalityMask::new(&v)
    }
}

impl From<ModalityMask> for Vec<Modality> {
    fn from(m: ModalityMask) -> Self {
        m.iter().collect()
    }
}

impl FromStr for ModalityMask {
    type Err = Error;

    /// Parses letter strings such as `"vsh"` or `"v"`.
    fn from_str(s: &str) -> Result<Self> {
        let mods = s
            .chars()
            .map(|c| match c {
                'v' => Ok(Modality::Vision),
                's' => Ok(Modality::Sound),
                'h' => Ok(Modality::Haptic),
                other => Err(Error::param(format!("unknown modality letter `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        ModalityMask::new(&mods)
    }
}

impl fmt::Display for ModalityMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.iter().try_for_each(|m| write!(f, "{m}"))
    }
}

/// One of the two agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgentId {
    A,
    B,
}

impl AgentId {
    pub fn other(self) -> AgentId {
        match self {
            AgentId::A => AgentId::B,
            AgentId::B => AgentId::A,
        }
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            AgentId::A => 0xA,
            AgentId::B => 0xB,
        }
    }
}

/// A value held once per agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerAgent<T> {
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
}

impl<T> PerAgent<T> {
    pub fn new(a: T, b: T) -> Self {
        PerAgent { a, b }
    }

    pub fn get(&self, id: AgentId) -> &T {
        match id {
            AgentId::A => &self.a,
            AgentId::B => &self.b,
        }
    }

    pub fn get_mut(&mut self, id: AgentId) -> &mut T {
        match id {
            AgentId::A => &mut self.a,
            AgentId::B => &mut self.b,
        }
    }
}
