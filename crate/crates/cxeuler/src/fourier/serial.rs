//! Field serialization: the JSON object `{dim, K, modes:[{k, re, im}]}` and
//! CSV export of `(k, |f̂(k)|)` pairs for decay plots.

use super::{FourierError, FourierField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Serialize, Deserialize)]
struct FieldJson {
    dim: u8,
    #[serde(rename = "K")]
    cutoff: u32,
    modes: Vec<ModeJson>,
}

#[derive(Serialize, Deserialize)]
struct ModeJson {
    k: Vec<i32>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl FourierField {
    pub fn to_json(&self) -> serde_json::Value {
        let modes = self
            .iter()
            .map(|(k, c)| ModeJson {
                k: k[..self.dim() as usize].to_vec(),
                re: c.iter().map(|z| z.re).collect(),
                im: c.iter().map(|z| z.im).collect(),
            })
            .collect();
        serde_json::to_value(FieldJson { dim: self.dim(), cutoff: self.cutoff(), modes })
            .expect("field serialization cannot fail")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, FourierError> {
        let parsed: FieldJson =
            serde_json::from_value(value.clone()).map_err(|e| FourierError::Json(e.to_string()))?;
        let components = match parsed.modes.first() {
            Some(m) => m.re.len(),
            None => 1,
        };
        let mut field = FourierField::new(parsed.dim, parsed.cutoff, components)?;
        for m in &parsed.modes {
            if m.k.len() != parsed.dim as usize {
                return Err(FourierError::Json(format!(
                    "wavevector {:?} has {} entries for dim {}",
                    m.k,
                    m.k.len(),
                    parsed.dim
                )));
            }
            if m.re.len() != components || m.im.len() != components {
                return Err(FourierError::Json("inconsistent component counts".into()));
            }
            let k = [m.k[0], if parsed.dim == 2 { m.k[1] } else { 0 }];
            let coeff = m.re.iter().zip(&m.im).map(|(&re, &im)| Complex64::new(re, im)).collect();
            field.set(k, coeff)?;
        }
        Ok(field)
    }

    /// Write `(k, |f̂(k)|)` rows in mode order. One `k` column per spatial
    /// dimension.
    pub fn write_decay_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.dim() == 1 {
            w.write_record(["k", "abs"])?;
        } else {
            w.write_record(["k1", "k2", "abs"])?;
        }
        for (k, c) in self.iter() {
            let a = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if self.dim() == 1 {
                w.write_record([k[0].to_string(), format!("{a:.17e}")])?;
            } else {
                w.write_record([k[0].to_string(), k[1].to_string(), format!("{a:.17e}")])?;
            }
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_preserves_modes() {
        let mut f = FourierField::new(2, 4, 2).unwrap();
        f.set([1, -2], vec![Complex64::new(0.5, 1.5), Complex64::new(-0.25, 0.0)]).unwrap();
        f.set([0, 3], vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, -1.0)]).unwrap();
        let back = FourierField::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        let json = f.to_json();
        assert_eq!(json["dim"], 2);
        assert_eq!(json["K"], 4);
    }

    #[test]
    fn json_rejects_bad_wavevector_arity() {
        let broken = serde_json::json!({
            "dim": 2, "K": 4,
            "modes": [{"k": [1], "re": [1.0], "im": [0.0]}]
        });
        assert!(FourierField::from_json(&broken).is_err());
    }

    #[test]
    fn decay_csv_has_one_row_per_mode() {
        let mut f = FourierField::scalar_1d(4);
        f.set1(1, Complex64::new(3.0, 4.0)).unwrap();
        f.set1(-2, Complex64::new(1.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        f.write_decay_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.trim().lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("k,abs"));
        assert!(text.contains("5.") && text.contains("1,"));
    }
}
