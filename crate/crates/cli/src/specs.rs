//! Command-line spellings of weights, vectors, subsets and the other inputs.

use std::sync::Arc;

use hcw::encoder::{Branch, SubsetCode};
use hcw::enumerate::{Challenges, Triples, Universe};
use hcw::forcing::{AvoidPoint, Condition, Fixed, OrbitEntry, Refiner, Request, WholeSpace};
use hcw::rational::{int, parse_rat, Rat};
use hcw::weight::{parse_bits, WeightTail};
use hcw::{BasicNbhd, Error, L2Vector, Result, WeightSeq};
use serde_json::Value;

fn bad(what: &str, s: &str) -> Error {
    Error::Parse(format!("cannot read {what} from {s:?}"))
}

/// Inline JSON, or `@path` for a JSON file.
pub fn json_arg(s: &str) -> Result<Value> {
    let text = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?,
        None => s.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("malformed JSON: {e}")))
}

fn is_json(s: &str) -> bool {
    s.starts_with('{') || s.starts_with('[') || s.starts_with('@')
}

pub fn rat_list(s: &str) -> Result<Vec<Rat>> {
    let s = s.trim();
    if s.is_empty() || s == "()" {
        return Ok(vec![]);
    }
    s.trim_matches(|c| c == '(' || c == ')').split(',').map(|t| parse_rat(t.trim())).collect()
}

pub fn rat_strings(v: &Value) -> Result<Vec<Rat>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of rationals".into()))?
        .iter()
        .map(|e| e.as_str().ok_or_else(|| Error::Parse("rationals are written as strings".into())).and_then(parse_rat))
        .collect()
}

fn tail_spec(s: &str) -> Result<WeightTail> {
    match s {
        "ones" => Ok(WeightTail::Ones),
        "twos" => Ok(WeightTail::Twos),
        _ => match s.strip_prefix("periodic:") {
            Some(p) => Ok(WeightTail::Periodic(parse_bits(p)?)),
            None => Err(bad("weight tail", s)),
        },
    }
}

/// `twos`, `ones`, `squares`, `periodic:12`, `<bits>+<tail>` or JSON.
pub fn weight(s: &str) -> Result<WeightSeq> {
    if is_json(s) {
        return WeightSeq::from_json(&json_arg(s)?);
    }
    if s == "squares" {
        return Ok(WeightSeq::twos_at_squares());
    }
    match s.split_once('+') {
        Some((bits, tail)) => WeightSeq::new(parse_bits(bits)?, tail_spec(tail)?),
        None => WeightSeq::new(vec![], tail_spec(s)?),
    }
}

/// `zero`, `e5`, `e5:3/2`, `geo:COEFF:RATIO`, a comma list, or JSON.
pub fn vector(s: &str) -> Result<L2Vector> {
    if is_json(s) {
        return L2Vector::from_json(&json_arg(s)?);
    }
    if s == "zero" {
        return Ok(L2Vector::zero());
    }
    if let Some(rest) = s.strip_prefix("geo:") {
        let (c, r) = rest.split_once(':').ok_or_else(|| bad("geometric vector", s))?;
        return L2Vector::geometric(vec![], parse_rat(c)?, parse_rat(r)?);
    }
    if let Some(rest) = s.strip_prefix('e') {
        let (i, c) = match rest.split_once(':') {
            Some((i, c)) => (i, parse_rat(c)?),
            None => (rest, int(1)),
        };
        let i: usize = i.parse().map_err(|_| bad("unit vector", s))?;
        return Ok(L2Vector::unit(i, c));
    }
    Ok(L2Vector::finite(rat_list(s)?))
}

/// `empty`, `full`, a bit mask (`0b1011`, decimal), a member list `{0,3}`,
/// or JSON.
pub fn subset(s: &str) -> Result<SubsetCode> {
    if s.starts_with("{\"") || s.starts_with('@') {
        return SubsetCode::from_json(&json_arg(s)?);
    }
    match s {
        "empty" => return Ok(SubsetCode::empty()),
        "full" => return Ok(SubsetCode::full()),
        _ => {}
    }
    if let Some(inner) = s.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        let members = inner
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad("member list", s)))
            .collect::<Result<_>>()?;
        return Ok(SubsetCode::Finite(members));
    }
    let mask = match s.strip_prefix("0b") {
        Some(b) => u64::from_str_radix(b, 2),
        None => s.parse::<u64>(),
    }
    .map_err(|_| bad("subset", s))?;
    Ok(SubsetCode::from_mask(mask))
}

/// `PREFIX;PERIOD` with comma-separated naturals, e.g. `1,0;2`, or JSON.
pub fn branch(s: &str) -> Result<Branch> {
    if is_json(s) {
        return Branch::from_json(&json_arg(s)?);
    }
    let nums = |t: &str| -> Result<Vec<usize>> {
        t.split(',').filter(|x| !x.trim().is_empty()).map(|x| x.trim().parse().map_err(|_| bad("branch", s))).collect()
    };
    let (p, q) = s.split_once(';').ok_or_else(|| bad("branch", s))?;
    Branch::new(nums(p)?, nums(q)?)
}

pub fn universe(s: &str) -> Result<Universe> {
    if s == "countable" {
        return Ok(Universe::Countable);
    }
    s.parse().map(Universe::Finite).map_err(|_| bad("universe", s))
}

pub fn condition(s: &str) -> Result<Condition> {
    Condition::from_json(&json_arg(s)?)
}

pub fn nbhd(v: &Value) -> Result<BasicNbhd> {
    BasicNbhd::from_json(v)
}

/// A weight or vector inside a JSON document: either an object or one of
/// the command-line spellings as a string.
fn weight_value(v: &Value) -> Result<WeightSeq> {
    match v.as_str() {
        Some(s) => weight(s),
        None => WeightSeq::from_json(v),
    }
}

fn vector_value(v: &Value) -> Result<L2Vector> {
    match v.as_str() {
        Some(s) => vector(s),
        None => L2Vector::from_json(v),
    }
}

pub fn refiner(v: &Value) -> Result<Arc<dyn Refiner>> {
    let field = |k: &str| v.get(k).ok_or_else(|| Error::Parse(format!("refiner needs {k}")));
    match v.get("kind").and_then(Value::as_str) {
        Some("whole") => Ok(Arc::new(WholeSpace)),
        Some("fixed") => {
            let eta = parse_rat(field("eta")?.as_str().unwrap_or_default())?;
            Ok(Arc::new(Fixed { s: rat_strings(field("s")?)?, eta }))
        }
        Some("avoid-point") => Ok(Arc::new(AvoidPoint { x0: rat_strings(field("x0")?)? })),
        Some("orbit-entry") => {
            let w = weight_value(field("weight")?)?;
            match v.get("challenge").and_then(Value::as_u64) {
                Some(n) => Ok(Arc::new(OrbitEntry::nth(w, n as usize))),
                None => Ok(Arc::new(OrbitEntry::new(w, nbhd(field("target")?)?))),
            }
        }
        _ => Err(Error::Parse("refiner kind must be whole, fixed, avoid-point or orbit-entry".into())),
    }
}

/// `[{"avoid": {"refiner": ..., "n": 5}}, {"nice": {"y": ..., "v": ..., "q": [...], "eps": "1/2"}}]`.
pub fn requests(v: &Value) -> Result<Vec<Request>> {
    let arr = v.as_array().ok_or_else(|| Error::Parse("requests must be an array".into()))?;
    arr.iter()
        .map(|r| {
            if let Some(a) = r.get("avoid") {
                let n = a.get("n").and_then(Value::as_u64).unwrap_or(0) as usize;
                let refiner = refiner(a.get("refiner").ok_or_else(|| Error::Parse("avoid request needs a refiner".into()))?)?;
                Ok(Request::Avoid { refiner, n })
            } else if let Some(n) = r.get("nice") {
                let get = |k: &str| n.get(k).ok_or_else(|| Error::Parse(format!("nice request needs {k}")));
                Ok(Request::Nice {
                    y: vector_value(get("y")?)?,
                    v: weight_value(get("v")?)?,
                    q: rat_strings(get("q")?)?,
                    eps: parse_rat(get("eps")?.as_str().unwrap_or_default())?,
                })
            } else {
                Err(Error::Parse("each request is {\"avoid\": ...} or {\"nice\": ...}".into()))
            }
        })
        .collect()
}

/// Enumeration tables read from `--config`.
#[derive(Clone, Debug, Default)]
pub struct Config {
    pub challenges: Challenges,
    pub triples: Option<Value>,
    pub label: String,
}

impl Config {
    pub fn load(path: Option<&str>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config { label: "canonical".into(), ..Default::default() });
        };
        let v = json_arg(&format!("@{path}"))?;
        let challenges = match v.get("challenges") {
            None => Challenges::canonical(),
            Some(list) => Challenges {
                table: list
                    .as_array()
                    .ok_or_else(|| Error::Parse("challenges must be an array".into()))?
                    .iter()
                    .map(|c| nbhd(c).map(|u| (u.q, u.eps)))
                    .collect::<Result<_>>()?,
            },
        };
        let label = v.get("enumeration").and_then(Value::as_str).unwrap_or("table").to_string();
        Ok(Config { challenges, triples: v.get("triples").cloned(), label })
    }

    pub fn triples(&self, u: Universe) -> Result<Triples> {
        match &self.triples {
            None => Ok(Triples::canonical(u)),
            Some(t) => {
                let mut tr = Triples::from_json(t)?;
                tr.universe = u;
                Ok(tr)
            }
        }
    }
}
