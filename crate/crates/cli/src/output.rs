//! Rendering of results as JSON, CSV or plain text.
//!
//! Floating values are written with 17 significant digits in every format,
//! so re-running a command reproduces its output byte for byte.

use osp_thermo::hte::Pade;
use osp_thermo::rational::{to_f64, Rational};
use serde_json::{Map, Number, Value};

use crate::config::Format;

/// `x` with 17 significant digits; `NaN`/`inf` spelled out.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn json_float(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(serde_json::from_str::<Number>(&sig17(x)).expect("finite float literal"))
    } else {
        Value::Null
    }
}

fn rational_json(q: &Rational) -> Value {
    let mut m = Map::new();
    m.insert("numerator".into(), Value::String(q.numer().to_string()));
    m.insert("denominator".into(), Value::String(q.denom().to_string()));
    m.insert("value".into(), json_float(to_f64(q)));
    Value::Object(m)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Field {
    fn json(&self) -> Value {
        match self {
            Self::Int(i) => Value::from(*i),
            Self::Float(x) => json_float(*x),
            Self::Text(s) => Value::String(s.clone()),
            Self::Bool(b) => Value::Bool(*b),
        }
    }

    fn text(&self) -> String {
        match self {
            Self::Int(i) => i.to_string(),
            Self::Float(x) => sig17(*x),
            Self::Text(s) => s.clone(),
            Self::Bool(b) => b.to_string(),
        }
    }
}

/// Ordered key/value record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Field)>);

impl Record {
    pub fn push(&mut self, key: &str, value: Field) -> &mut Self {
        self.0.push((key.to_string(), value));
        self
    }

    pub fn int(&mut self, key: &str, v: i64) -> &mut Self {
        self.push(key, Field::Int(v))
    }

    pub fn float(&mut self, key: &str, v: f64) -> &mut Self {
        self.push(key, Field::Float(v))
    }

    pub fn text(&mut self, key: &str, v: &str) -> &mut Self {
        self.push(key, Field::Text(v.to_string()))
    }

    pub fn boolean(&mut self, key: &str, v: bool) -> &mut Self {
        self.push(key, Field::Bool(v))
    }

    fn json_map(&self) -> Map<String, Value> {
        self.0.iter().map(|(k, v)| (k.clone(), v.json())).collect()
    }
}

/// Numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Record,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HteDocument {
    pub order: usize,
    pub free_energy: Vec<Rational>,
    pub specific_heat: Vec<Rational>,
    pub ansatz: Vec<(Vec<Rational>, Vec<Rational>)>,
    pub pade: Option<Pade>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Record(Record),
    Table(Table),
    Hte(HteDocument),
    Verify(Vec<Check>),
}

impl Document {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json()).expect("JSON values serialise");
                s.push('\n');
                s
            }
            Format::Csv => self.csv(),
            Format::Text => self.text(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Self::Record(r) => Value::Object(r.json_map()),
            Self::Table(t) => {
                let mut m = t.meta.json_map();
                m.insert(
                    "columns".into(),
                    Value::Array(t.columns.iter().map(|c| Value::String(c.clone())).collect()),
                );
                let rows = t
                    .rows
                    .iter()
                    .map(|row| {
                        Value::Object(
                            t.columns
                                .iter()
                                .zip(row)
                                .map(|(c, x)| (c.clone(), json_float(*x)))
                                .collect(),
                        )
                    })
                    .collect();
                m.insert("rows".into(), Value::Array(rows));
                Value::Object(m)
            }
            Self::Hte(h) => {
                let mut m = Map::new();
                m.insert("command".into(), "hte".into());
                m.insert("order".into(), Value::from(h.order));
                m.insert("constant_term".into(), "-log 3".into());
                let series = |c: &[Rational]| {
                    Value::Array(
                        c.iter()
                            .enumerate()
                            .map(|(k, q)| {
                                let mut e = Map::new();
                                e.insert("n".into(), Value::from(k + 1));
                                if let Value::Object(r) = rational_json(q) {
                                    e.extend(r);
                                }
                                Value::Object(e)
                            })
                            .collect(),
                    )
                };
                m.insert("free_energy_over_t".into(), series(&h.free_energy));
                m.insert("specific_heat".into(), series(&h.specific_heat));
                let ansatz = h
                    .ansatz
                    .iter()
                    .enumerate()
                    .map(|(k, (b, c))| {
                        let mut e = Map::new();
                        e.insert("n".into(), Value::from(k + 1));
                        e.insert("b".into(), Value::Array(b.iter().map(rational_json).collect()));
                        e.insert("c".into(), Value::Array(c.iter().map(rational_json).collect()));
                        Value::Object(e)
                    })
                    .collect();
                m.insert("ansatz".into(), Value::Array(ansatz));
                if let Some(p) = &h.pade {
                    let mut e = Map::new();
                    e.insert("m".into(), Value::from(p.m()));
                    e.insert("n".into(), Value::from(p.n()));
                    e.insert(
                        "numerator".into(),
                        Value::Array(p.numerator.iter().map(rational_json).collect()),
                    );
                    e.insert(
                        "denominator".into(),
                        Value::Array(p.denominator.iter().map(rational_json).collect()),
                    );
                    e.insert("degenerate".into(), Value::Bool(p.degenerate));
                    m.insert("specific_heat_pade".into(), Value::Object(e));
                }
                Value::Object(m)
            }
            Self::Verify(checks) => {
                let mut m = Map::new();
                m.insert("command".into(), "verify".into());
                m.insert("passed".into(), Value::Bool(checks.iter().all(|c| c.pass)));
                let list = checks
                    .iter()
                    .map(|c| {
                        let mut e = Map::new();
                        e.insert("suite".into(), Value::String(c.suite.clone()));
                        e.insert("check".into(), Value::String(c.name.clone()));
                        e.insert("value".into(), json_float(c.value));
                        e.insert("threshold".into(), json_float(c.threshold));
                        e.insert("pass".into(), Value::Bool(c.pass));
                        Value::Object(e)
                    })
                    .collect();
                m.insert("checks".into(), Value::Array(list));
                Value::Object(m)
            }
        }
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        match self {
            Self::Record(r) => {
                out += &r.0.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(",");
                out.push('\n');
                out += &r.0.iter().map(|(_, v)| v.text()).collect::<Vec<_>>().join(",");
                out.push('\n');
            }
            Self::Table(t) => {
                out += &t.columns.join(",");
                out.push('\n');
                for row in &t.rows {
                    out += &row.iter().map(|x| sig17(*x)).collect::<Vec<_>>().join(",");
                    out.push('\n');
                }
            }
            Self::Hte(h) => {
                out += "n,f_over_t_numerator,f_over_t_denominator,f_over_t,C_numerator,C_denominator,C\n";
                for (k, (f, c)) in h.free_energy.iter().zip(&h.specific_heat).enumerate() {
                    out += &format!(
                        "{},{},{},{},{},{},{}\n",
                        k + 1,
                        f.numer(),
                        f.denom(),
                        sig17(to_f64(f)),
                        c.numer(),
                        c.denom(),
                        sig17(to_f64(c))
                    );
                }
            }
            Self::Verify(checks) => {
                out += "suite,check,value,threshold,pass\n";
                for c in checks {
                    out += &format!(
                        "{},{},{},{},{}\n",
                        c.suite,
                        c.name,
                        sig17(c.value),
                        sig17(c.threshold),
                        c.pass
                    );
                }
            }
        }
        out
    }

    fn text(&self) -> String {
        let mut out = String::new();
        match self {
            Self::Record(r) => {
                for (k, v) in &r.0 {
                    out += &format!("{k} = {}\n", v.text());
                }
            }
            Self::Table(t) => {
                for (k, v) in &t.meta.0 {
                    out += &format!("# {k} = {}\n", v.text());
                }
                out += &format!("# {}\n", t.columns.join(" "));
                for row in &t.rows {
                    out += &row.iter().map(|x| sig17(*x)).collect::<Vec<_>>().join(" ");
                    out.push('\n');
                }
            }
            Self::Hte(h) => {
                out += &format!(
                    "# order {}; f/T = -log 3 + sum_n c_n (J/T)^n, C = sum_n C_n (J/T)^n\n",
                    h.order
                );
                out += "# n c_n C_n\n";
                for (k, (f, c)) in h.free_energy.iter().zip(&h.specific_heat).enumerate() {
                    out += &format!(
                        "{} {} {}\n",
                        k + 1,
                        osp_thermo::rational::to_string(f),
                        osp_thermo::rational::to_string(c)
                    );
                }
            }
            Self::Verify(checks) => {
                for c in checks {
                    out += &format!(
                        "{} {}/{} value={} threshold={}\n",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.suite,
                        c.name,
                        sig17(c.value),
                        sig17(c.threshold)
                    );
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use osp_thermo::rational::frac;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.1), "1.0000000000000001e-1");
        assert_eq!(sig17(-2.0), "-2.0000000000000000e0");
        assert_eq!(sig17(f64::NAN), "NaN");
        for x in [0.1, -1.0 / 3.0, 6.02e23, 1e-300] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_keeps_order_and_digits() {
        let mut r = Record::default();
        r.text("command", "solve").float("T", 2.0).int("iterations", 7);
        let s = Document::Record(r).render(Format::Json);
        let t = s.find("\"T\"").unwrap();
        let i = s.find("\"iterations\"").unwrap();
        assert!(t < i);
        assert!(s.contains("2.0000000000000000e+0"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["T"].as_f64(), Some(2.0));
    }

    #[test]
    fn table_csv() {
        let t = Table {
            meta: Record::default(),
            columns: vec!["T".into(), "f".into()],
            rows: vec![vec![1.0, -2.5], vec![2.0, f64::NAN]],
        };
        let csv = Document::Table(t).render(Format::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "T,f");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], "2.0000000000000000e0,NaN");
    }

    #[test]
    fn hte_exact_strings() {
        let d = Document::Hte(HteDocument {
            order: 1,
            free_energy: vec![frac(-5, 27)],
            specific_heat: vec![frac(0, 1)],
            ansatz: vec![(vec![frac(-2, 3)], vec![frac(-1, 3)])],
            pade: None,
        });
        let v: serde_json::Value = serde_json::from_str(&d.render(Format::Json)).unwrap();
        assert_eq!(v["free_energy_over_t"][0]["numerator"], "-5");
        assert_eq!(v["free_energy_over_t"][0]["denominator"], "27");
        assert!(d.render(Format::Csv).contains("1,-5,27,"));
    }
}
