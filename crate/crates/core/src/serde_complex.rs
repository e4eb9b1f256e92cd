//! Serialize `Complex` as `{"re": .., "im": ..}`; accept that form or a bare
//! real number when deserializing.

use serde::de::{Deserializer, Error as _};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::Complex;

#[derive(Serialize)]
struct Pair {
    re: f64,
    im: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Real(f64),
    Pair {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Tuple(f64, f64),
}

pub fn serialize<S: Serializer>(z: &Complex, s: S) -> Result<S::Ok, S::Error> {
    Pair { re: z.re, im: z.im }.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex, D::Error> {
    let z = match Repr::deserialize(d)? {
        Repr::Real(re) => Complex::new(re, 0.0),
        Repr::Pair { re, im } | Repr::Tuple(re, im) => Complex::new(re, im),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(D::Error::custom("complex value must be finite"));
    }
    Ok(z)
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Complex], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for z in v {
            seq.serialize_element(&Pair { re: z.re, im: z.im })?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "super")] Complex);
        Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}
