use serde::{Deserialize, Serialize};

use crate::Scalar;

pub const STATE_DIM: usize = 12;

/// Twelve-component state vector.
///
/// Masses: `Gp`, `Gt` mg/kg; `Il`, `Ip`, `Ipo` pmol/kg; `Qsto1`, `Qsto2`,
/// `Qgut` mg. Concentrations: `I1`, `Id`, `X` pmol/L. `Y` pmol/kg/min.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelState<S> {
    #[serde(rename = "Gp")]
    pub gp: S,
    #[serde(rename = "Gt")]
    pub gt: S,
    #[serde(rename = "Il")]
    pub il: S,
    #[serde(rename = "Ip")]
    pub ip: S,
    #[serde(rename = "I1")]
    pub i1: S,
    #[serde(rename = "Id")]
    pub id: S,
    #[serde(rename = "Qsto1")]
    pub qsto1: S,
    #[serde(rename = "Qsto2")]
    pub qsto2: S,
    #[serde(rename = "Qgut")]
    pub qgut: S,
    #[serde(rename = "X")]
    pub x: S,
    #[serde(rename = "Ipo")]
    pub ipo: S,
    #[serde(rename = "Y")]
    pub y: S,
}

impl<S: Scalar> ModelState<S> {
    #[inline]
    pub fn to_array(&self) -> [S; STATE_DIM] {
        [
            self.gp, self.gt, self.il, self.ip, self.i1, self.id, self.qsto1, self.qsto2,
            self.qgut, self.x, self.ipo, self.y,
        ]
    }

    #[inline]
    pub fn from_array(v: [S; STATE_DIM]) -> Self {
        Self {
            gp: v[0],
            gt: v[1],
            il: v[2],
            ip: v[3],
            i1: v[4],
            id: v[5],
            qsto1: v[6],
            qsto2: v[7],
            qgut: v[8],
            x: v[9],
            ipo: v[10],
            y: v[11],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    #[inline]
    pub fn qsto(&self) -> S {
        self.qsto1 + self.qsto2
    }
}

/// Algebraic outputs at one instant.
///
/// `G` mg/dL; `I` pmol/L; `EGP`, `Ra`, `U`, `Uid`, `E` mg/kg/min; `S`, `Spo`
/// pmol/kg/min; `HE` dimensionless; `m3` 1/min; `Kempt` 1/min; `Qsto` mg;
/// `dGdt` mg/dL/min.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Observables<S> {
    #[serde(rename = "G")]
    pub g: S,
    #[serde(rename = "I")]
    pub i: S,
    #[serde(rename = "EGP")]
    pub egp: S,
    #[serde(rename = "Ra")]
    pub ra: S,
    #[serde(rename = "U")]
    pub u: S,
    #[serde(rename = "Uid")]
    pub uid: S,
    #[serde(rename = "E")]
    pub e: S,
    #[serde(rename = "S")]
    pub s: S,
    #[serde(rename = "Spo")]
    pub spo: S,
    #[serde(rename = "HE")]
    pub he: S,
    pub m3: S,
    #[serde(rename = "Kempt")]
    pub kempt: S,
    #[serde(rename = "Qsto")]
    pub qsto: S,
    #[serde(rename = "dGdt")]
    pub dgdt: S,
}
