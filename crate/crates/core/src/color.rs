//! Linear RGB colors with components in [0, 1].

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Serialized as a `[r, g, b]` array of reals; see [`hex`] for the
/// `"#RRGGBB"` text form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid color {0:?}, expected \"#RRGGBB\"")]
pub struct HexColorError(pub String);

impl Rgb {
    pub const RED: Rgb = Rgb::new(1.0, 0.0, 0.0);
    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Self { r, g, b }
    }

    pub fn from_rgb8(r: u8, g: u8, b: u8) -> Self {
        Self::new(r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0)
    }

    pub fn components(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn is_valid(self) -> bool {
        self.components().iter().all(|c| (0.0..=1.0).contains(c))
    }

    pub fn lerp(self, other: Rgb, t: f64) -> Rgb {
        let mix = |a: f64, b: f64| (a * (1.0 - t) + b * t).clamp(a.min(b), a.max(b));
        Rgb::new(
            mix(self.r, other.r),
            mix(self.g, other.g),
            mix(self.b, other.b),
        )
    }

    pub fn scale(self, k: f64) -> Rgb {
        Rgb::new(self.r * k, self.g * k, self.b * k)
    }

    /// Quantize to 8-bit channels, rounding to nearest.
    pub fn to_rgb8(self) -> [u8; 3] {
        self.components()
            .map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8)
    }

    pub fn to_hex(self) -> String {
        let [r, g, b] = self.to_rgb8();
        format!("#{r:02X}{g:02X}{b:02X}")
    }

    pub fn from_hex(text: &str) -> Result<Self, HexColorError> {
        let err = || HexColorError(text.to_owned());
        let digits = text.strip_prefix('#').ok_or_else(err)?;
        if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err());
        }
        let channel = |i: usize| u8::from_str_radix(&digits[i..i + 2], 16).map_err(|_| err());
        Ok(Self::from_rgb8(channel(0)?, channel(2)?, channel(4)?))
    }
}

impl From<[f64; 3]> for Rgb {
    fn from([r, g, b]: [f64; 3]) -> Self {
        Rgb::new(r, g, b)
    }
}

impl From<Rgb> for [f64; 3] {
    fn from(c: Rgb) -> Self {
        c.components()
    }
}

/// Serde adapters for the `"#RRGGBB"` form used by channel mappings.
pub mod hex {
    use super::*;

    pub fn serialize<S: Serializer>(color: &Rgb, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&color.to_hex())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rgb, D::Error> {
        let text = String::deserialize(d)?;
        Rgb::from_hex(&text).map_err(serde::de::Error::custom)
    }

    pub mod list {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(colors: &[Rgb], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(colors.len()))?;
            for c in colors {
                seq.serialize_element(&c.to_hex())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rgb>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| Rgb::from_hex(t).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod pair {
        use super::*;

        pub fn serialize<S: Serializer>(colors: &(Rgb, Rgb), s: S) -> Result<S::Ok, S::Error> {
            (colors.0.to_hex(), colors.1.to_hex()).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(Rgb, Rgb), D::Error> {
            let (a, b) = <(String, String)>::deserialize(d)?;
            let parse = |t: &str| Rgb::from_hex(t).map_err(serde::de::Error::custom);
            Ok((parse(&a)?, parse(&b)?))
        }
    }
}
