//! Named state families for `csent gen`.

use std::collections::BTreeMap;

use csent::qmat::{seeded_rng, MAX_DIM};
use csent::states::{bell_diagonal, random_cc, random_mixed_state, random_pure_state, random_separable, werner};
use csent::MultipartiteState;

use crate::statefile::{Metadata, StateFile};

pub const FAMILIES: [&str; 6] = ["random-pure", "random-mixed", "werner", "bell-diagonal", "separable", "cc"];

/// Parses `key=value` pairs; values must be finite numbers.
pub fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for p in raw {
        let (k, v) = p.split_once('=').ok_or_else(|| format!("parameter `{p}` is not key=value"))?;
        let x: f64 = v.trim().parse().map_err(|_| format!("parameter `{k}` has non-numeric value `{v}`"))?;
        if !x.is_finite() {
            return Err(format!("parameter `{k}` is not finite"));
        }
        if out.insert(k.trim().to_string(), x).is_some() {
            return Err(format!("parameter `{k}` given twice"));
        }
    }
    Ok(out)
}

struct Params {
    given: BTreeMap<String, f64>,
    used: BTreeMap<String, f64>,
}

impl Params {
    fn real(&mut self, key: &str, default: Option<f64>) -> Result<f64, String> {
        let v = match (self.given.get(key), default) {
            (Some(&v), _) => v,
            (None, Some(d)) => d,
            (None, None) => return Err(format!("missing parameter `{key}`")),
        };
        self.used.insert(key.to_string(), v);
        Ok(v)
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize, String> {
        let v = self.real(key, Some(default as f64))?;
        if v < 1.0 || v.fract() != 0.0 || v > MAX_DIM as f64 {
            return Err(format!("parameter `{key}` must be a positive integer, got {v}"));
        }
        Ok(v as usize)
    }

    fn dims(&mut self) -> Result<(usize, usize), String> {
        let (da, db) = (self.count("da", 2)?, self.count("db", 2)?);
        if da * db > MAX_DIM {
            return Err(format!("dimension {da}x{db} exceeds {MAX_DIM}"));
        }
        Ok((da, db))
    }

    fn finish(self) -> Result<BTreeMap<String, f64>, String> {
        if let Some(k) = self.given.keys().find(|k| !self.used.contains_key(*k)) {
            return Err(format!("unknown parameter `{k}`"));
        }
        Ok(self.used)
    }
}

/// Builds a member of `family`; random families draw from `seed`.
pub fn generate(family: &str, params: BTreeMap<String, f64>, seed: u64) -> Result<StateFile, String> {
    let mut p = Params {
        given: params,
        used: BTreeMap::new(),
    };
    let mut rng = seeded_rng(seed);
    let (state, random): (MultipartiteState, bool) = match family {
        "random-pure" => {
            let (da, db) = p.dims()?;
            (random_pure_state(da, db, &mut rng), true)
        }
        "random-mixed" => {
            let (da, db) = p.dims()?;
            let rank = p.count("rank", da * db)?;
            if rank > da * db {
                return Err(format!("rank {rank} exceeds dimension {}", da * db));
            }
            (random_mixed_state(da, db, rank, &mut rng).map_err(|e| e.to_string())?, true)
        }
        "werner" => {
            let x = p.real("p", None)?;
            if !(-1.0 / 3.0..=1.0).contains(&x) {
                return Err(format!("werner weight p={x} must lie in [-1/3, 1]"));
            }
            (werner(x), false)
        }
        "bell-diagonal" => {
            let w = [p.real("w0", None)?, p.real("w1", None)?, p.real("w2", None)?, p.real("w3", None)?];
            (bell_diagonal(w).map_err(|e| e.to_string())?, false)
        }
        "separable" => {
            let (da, db) = p.dims()?;
            let terms = p.count("terms", 4)?;
            (random_separable(da, db, terms, &mut rng), true)
        }
        "cc" => {
            let (da, db) = p.dims()?;
            (random_cc(da, db, &mut rng), true)
        }
        other => return Err(format!("unknown family `{other}` (expected one of {})", FAMILIES.join(", "))),
    };
    let meta = Metadata {
        family: family.to_string(),
        params: p.finish()?,
        seed: random.then_some(seed),
    };
    Ok(StateFile::from_state(&state, Some(meta)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[&str]) -> BTreeMap<String, f64> {
        parse_params(&kv.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn werner_matches_analytic_matrix() {
        let f = generate("werner", params(&["p=0.5"]), 0).unwrap();
        let s = StateFile::parse(&f.to_text()).unwrap().state().unwrap();
        // 0.5|Ψ⁻⟩⟨Ψ⁻| + I/8
        let mut want = csent::ComplexMatrix::identity(4, 4).scale(0.125);
        want[(1, 1)].re += 0.25;
        want[(2, 2)].re += 0.25;
        want[(1, 2)].re -= 0.25;
        want[(2, 1)].re -= 0.25;
        assert!(csent::qmat::max_abs(&(s.matrix() - want)) <= 1e-15);
        assert_eq!(f.metadata.unwrap().params["p"], 0.5);
    }

    #[test]
    fn random_families_are_seeded() {
        for fam in ["random-pure", "random-mixed", "separable", "cc"] {
            let a = generate(fam, BTreeMap::new(), 5).unwrap().to_text();
            assert_eq!(a, generate(fam, BTreeMap::new(), 5).unwrap().to_text());
            assert_ne!(a, generate(fam, BTreeMap::new(), 6).unwrap().to_text());
            assert!(StateFile::parse(&a).unwrap().state().is_ok());
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(generate("werner", BTreeMap::new(), 0).is_err());
        assert!(generate("werner", params(&["p=2"]), 0).is_err());
        assert!(generate("random-mixed", params(&["rank=5"]), 0).is_err());
        assert!(generate("cc", params(&["da=1.5"]), 0).is_err());
        assert!(generate("cc", params(&["colour=1"]), 0).is_err());
        assert!(generate("bell-diagonal", params(&["w0=0.5", "w1=0.5", "w2=0.5", "w3=0"]), 0).is_err());
        assert!(generate("ghz", BTreeMap::new(), 0).is_err());
        assert!(parse_params(&["p".to_string()]).is_err());
    }
}
