//! Check-matrix text format: one check per line, qubit indices listed.
//!
//! ```text
//! CODE color-3 7 1 3
//! X 0 1 2 3
//! Z 0 1 2 3
//! LX 0 1 5
//! LZ 0 1 5
//! ```

use std::fmt::Write as _;

use crate::css::{support, CssCode};
use crate::CodeError;

impl CssCode {
    pub fn to_text(&self) -> String {
        let mut s = format!("CODE {} {} {} {}\n", self.label, self.n, self.k, self.d);
        let rows = [("X", &self.x_checks), ("Z", &self.z_checks), ("LX", &self.logical_x), ("LZ", &self.logical_z)];
        for (tag, list) in rows {
            for &m in list.iter() {
                let _ = write!(s, "{tag}");
                for q in support(m) {
                    let _ = write!(s, " {q}");
                }
                s.push('\n');
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<CssCode, CodeError> {
        let mut code: Option<CssCode> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| CodeError::Parse { line: i + 1, msg: msg.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks[0] == "CODE" {
                if toks.len() != 5 {
                    return Err(err("CODE needs label n k d"));
                }
                let num = |t: &str| t.parse::<usize>().map_err(|_| err("bad integer"));
                let n = num(toks[2])?;
                if n > 64 {
                    return Err(CodeError::TooLarge(n));
                }
                code = Some(CssCode {
                    label: toks[1].to_string(),
                    n,
                    k: num(toks[3])?,
                    d: num(toks[4])?,
                    x_checks: vec![],
                    z_checks: vec![],
                    logical_x: vec![],
                    logical_z: vec![],
                });
                continue;
            }
            let c = code.as_mut().ok_or_else(|| err("row before CODE header"))?;
            let mut m = 0u64;
            for t in &toks[1..] {
                let q: usize = t.parse().map_err(|_| err("bad qubit index"))?;
                if q >= c.n {
                    return Err(CodeError::QubitOutOfRange { qubit: q, n: c.n });
                }
                m |= 1 << q;
            }
            match toks[0] {
                "X" => c.x_checks.push(m),
                "Z" => c.z_checks.push(m),
                "LX" => c.logical_x.push(m),
                "LZ" => c.logical_z.push(m),
                _ => return Err(err("unknown row tag")),
            }
        }
        code.ok_or(CodeError::Parse { line: 0, msg: "missing CODE header".into() })
    }
}
