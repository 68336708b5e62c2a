use std::sync::Arc;

use hcw::constructors::{build_hc_vector, defeat_certificate, defeating_weight, f_bound_certificate, f_map, verify_hc, GROWTH_CONDITION};
use hcw::encoder::{l1_vector, l1_weight, t2_check, verify_pair, Partition};
use hcw::enumerate::{
    challenge_at, challenge_index, rational_at, rational_index, string_at, string_index, triple_at, triple_index, Universe,
};
use hcw::forcing::{avoid_extension, extends_transcript, generic_engine, nice_extension};
use hcw::niceness::{
    build_nice_witness, check_refinement_point, common_nice_builder, dense_refinement, nicely_transcript, refinement_samples,
};
use hcw::rational::{fmt_rat, parse_rat, Rat};
use hcw::shift::{first_hit, orbit_trace};
use hcw::{BasicNbhd, Result};
use serde_json::{json, Value};

use crate::specs::{self, Config};
use crate::{Cmd, EnumArgs, ForceCmd, NiceCmd, Output, Target};

fn rats(v: &[Rat]) -> Vec<String> {
    v.iter().map(fmt_rat).collect()
}

fn digits(w: &[u8]) -> String {
    w.iter().map(|b| char::from(b'0' + b)).collect()
}

fn report(horizons: Value, result: Value, certified: bool) -> Result<Output> {
    Ok(Output::Report { horizons, result, certified })
}

fn target(t: &Target, cfg: &Config) -> Result<BasicNbhd> {
    match (t.challenge, &t.q, &t.eps) {
        (Some(n), _, _) => {
            let (q, eps) = cfg.challenges.get(n);
            BasicNbhd::new(q, eps)
        }
        (None, Some(q), Some(eps)) => BasicNbhd::new(specs::rat_list(q)?, parse_rat(eps)?),
        _ => Err(hcw::Error::Parse("give --challenge or both --q and --eps".into())),
    }
}

fn first_challenges(cfg: &Config, count: usize) -> Result<Vec<BasicNbhd>> {
    (0..count)
        .map(|n| {
            let (q, eps) = cfg.challenges.get(n);
            BasicNbhd::new(q, eps)
        })
        .collect()
}

pub(crate) fn dispatch(cmd: &Cmd, cfg: &Config) -> Result<Output> {
    match cmd {
        Cmd::Orbit { w, y, big_k, window, csv } => {
            let (w, y) = (specs::weight(w)?, specs::vector(y)?);
            let rows = orbit_trace(&w, &y, *big_k, *window);
            if *csv {
                let mut text = String::from("k,norm_sq,tail_bound_sq\n");
                for r in &rows {
                    text.push_str(&format!("{},{},{}\n", r.k, fmt_rat(&r.prefix_norm_sq), fmt_rat(&r.tail_bound_sq)));
                }
                return Ok(Output::Csv { text, certified: true });
            }
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| json!({ "k": r.k, "norm_sq": fmt_rat(&r.prefix_norm_sq), "tail_bound_sq": fmt_rat(&r.tail_bound_sq) }))
                .collect();
            report(json!({ "K": big_k, "window": window }), json!({ "rows": rows }), true)
        }
        Cmd::Hit { w, y, target: t, big_k } => {
            let (w, y, u) = (specs::weight(w)?, specs::vector(y)?, target(t, cfg)?);
            let hit = first_hit(&w, &y, &u, *big_k);
            let result = json!({ "target": u.to_json(), "k": hit.k, "undecided_before": hit.undecided });
            report(json!({ "K": big_k }), result, hit.k.is_some())
        }
        Cmd::BuildHc { w, challenges } => {
            let w = specs::weight(w)?;
            let (y, sched) = build_hc_vector(&w, &cfg.challenges, *challenges)?;
            let hits = verify_hc(&w, &y, &sched);
            let ok = hits.iter().all(|h| h.passed());
            let result = json!({
                "condition_variant": GROWTH_CONDITION,
                "schedule": sched.to_json(),
                "y": y.to_json(),
                "hits": hits.iter().map(|h| h.to_json()).collect::<Vec<_>>(),
            });
            report(json!({ "challenges": challenges }), result, ok)
        }
        Cmd::Defeat { y, big_k } => {
            let y = specs::vector(y)?;
            let (w, sched) = defeating_weight(&y)?;
            let rows = defeat_certificate(&y, &w, &sched, *big_k);
            let ok = rows.iter().all(|r| r.passed());
            let result = json!({
                "weight": w.to_json(),
                "schedule": sched.to_json(),
                "rows": rows.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            });
            report(json!({ "K": big_k }), result, ok)
        }
        Cmd::Fmap { y, count, big_k } => {
            let y = specs::vector(y)?;
            let (idx, w) = f_map(&y, *count)?;
            let cert = f_bound_certificate(&y, &idx, *big_k)?;
            let ok = cert.orbit_ok() && cert.windows_ok();
            let result = json!({ "indices": idx.indices, "weight": w.to_json(), "certificate": cert.to_json() });
            report(json!({ "K": big_k, "count": count }), result, ok)
        }
        Cmd::Encode { universe, a, blocks, prefix } => {
            let u = specs::universe(universe)?;
            let a = specs::subset(a)?;
            let part = Arc::new(Partition::new(cfg.triples(u)?));
            let y = l1_vector(&part, &a);
            let w = l1_weight(&part, &a);
            let result = json!({
                "a": a.to_json(),
                "partition": part.to_json(*blocks)?,
                "y_prefix": rats(&y.take(*prefix)),
                "w_prefix": digits(&w.take(*prefix)),
            });
            report(json!({ "blocks": blocks, "prefix": prefix }), result, true)
        }
        Cmd::VerifyPair { universe, a, b, blocks, per_elem } => {
            let (a, b) = (specs::subset(a)?, specs::subset(b)?);
            let part = Arc::new(Partition::new(cfg.triples(Universe::Finite(*universe))?));
            let v = verify_pair(&part, *universe, &a, &b, *blocks, *per_elem)?;
            let result = json!({ "a": a.to_json(), "b": b.to_json(), "verdict": v.to_json() });
            report(json!({ "blocks": blocks, "per_elem": per_elem }), result, v.passed())
        }
        Cmd::Tree { t, p, blocks } => {
            let (t, p) = (specs::subset(t)?, specs::branch(p)?);
            let part = Arc::new(Partition::new(cfg.triples(Universe::Countable)?));
            let v = t2_check(&part, &t, &p, *blocks)?;
            let result = json!({ "tree": t.to_json(), "branch": p.to_json(), "verdict": v.to_json() });
            report(json!({ "blocks": blocks }), result, v.passed() && v.agrees())
        }
        Cmd::Nice(n) => nice(n, cfg),
        Cmd::Force(f) => force(f),
        Cmd::Enum(e) => enumerate(e),
    }
}

fn nice(cmd: &NiceCmd, cfg: &Config) -> Result<Output> {
    match cmd {
        NiceCmd::Refine { r, delta, q, eps, m, samples } => {
            let (r, delta) = (specs::rat_list(r)?, parse_rat(delta)?);
            let (q, eps) = (specs::rat_list(q)?, parse_rat(eps)?);
            let f = dense_refinement(&r, &delta, &q, &eps, *m)?;
            let mut points = vec![f.s.clone()];
            points.extend(refinement_samples(&f, *samples));
            let checks: Vec<_> = points.iter().map(|z| check_refinement_point(&f, &r, &delta, &q, &eps, z)).collect();
            let failures: Vec<usize> = (0..checks.len()).filter(|&i| !checks[i].passed()).collect();
            let result = json!({
                "refinement": f.to_json(),
                "center": { "in_source": checks[0].in_source, "hits_target": checks[0].hits_target, "strong_tail": checks[0].strong_tail },
                "samples_checked": checks.len() - 1,
                "failures": failures,
            });
            report(json!({ "samples": samples }), result, failures.is_empty())
        }
        NiceCmd::Witness { y, challenges, big_k } => {
            let y = specs::vector(y)?;
            let wit = build_nice_witness(&y, &first_challenges(cfg, *challenges)?, *big_k)?;
            report(json!({ "K": big_k, "challenges": challenges }), wit.to_json(), wit.passed())
        }
        NiceCmd::Common { w, challenges, horizon } => {
            let ws = w.iter().map(|s| specs::weight(s)).collect::<Result<Vec<_>>>()?;
            let per = first_challenges(cfg, *challenges)?;
            let all = vec![per; ws.len()];
            let c = common_nice_builder(&ws, &all, *horizon)?;
            report(json!({ "horizon": horizon, "challenges": challenges }), c.to_json(), c.passed())
        }
        NiceCmd::Check { w, y, k, q, eps } => {
            let (w, y) = (specs::weight(w)?, specs::vector(y)?);
            let cert = nicely_transcript(&w, &y, *k, &specs::rat_list(q)?, &parse_rat(eps)?);
            report(json!({}), cert.to_json(), cert.passed())
        }
    }
}

fn force(cmd: &ForceCmd) -> Result<Output> {
    match cmd {
        ForceCmd::Extend { p2, p1 } => {
            let (p2, p1) = (specs::condition(p2)?, specs::condition(p1)?);
            let cert = extends_transcript(&p2, &p1);
            report(json!({}), json!({ "p2": p2.to_json(), "p1": p1.to_json(), "cert": cert.to_json() }), cert.passed())
        }
        ForceCmd::Avoid { p, refiner, n } => {
            let p = specs::condition(p)?;
            let d = specs::refiner(&specs::json_arg(refiner)?)?;
            let step = avoid_extension(&p, d.as_ref(), *n)?;
            let ok = step.cert.passed();
            report(json!({ "n": n }), step.to_json(), ok)
        }
        ForceCmd::Nice { p, y, v, q, eps, horizon } => {
            let p = specs::condition(p)?;
            let (y, v) = (specs::vector(y)?, specs::weight(v)?);
            let step = nice_extension(&p, &y, &v, &specs::rat_list(q)?, &parse_rat(eps)?, *horizon)?;
            let ok = step.cert.passed() && step.nice.passed();
            report(json!({ "horizon": horizon }), step.to_json(), ok)
        }
        ForceCmd::Run { p0, requests, horizon, csv } => {
            let p0 = specs::condition(p0)?;
            let reqs = specs::requests(&specs::json_arg(requests)?)?;
            let run = generic_engine(&p0, &reqs, *horizon)?;
            let ok = run.replay().passed();
            if *csv {
                return Ok(Output::Csv { text: run.to_csv(), certified: ok });
            }
            report(json!({ "horizon": horizon, "requests": reqs.len() }), run.to_json(), ok)
        }
    }
}

fn enumerate(e: &EnumArgs) -> Result<Output> {
    let (result, ok) = if let Some(n) = e.challenge {
        let (q, eps) = challenge_at(n);
        let back = challenge_index(&q, &eps)?;
        (json!({ "index": n, "q": rats(&q), "eps": fmt_rat(&eps), "round_trip": back }), back == n)
    } else if let Some(n) = e.rational {
        let x = rational_at(n);
        let back = rational_index(&x)?;
        (json!({ "index": n, "value": fmt_rat(&x), "round_trip": back }), back == n)
    } else if let Some(n) = e.string {
        let q = string_at(n);
        let back = string_index(&q)?;
        (json!({ "index": n, "string": rats(&q), "round_trip": back }), back == n)
    } else {
        let n = e.triple.expect("clap requires one enumeration flag");
        let u = specs::universe(&e.universe)?;
        let t = triple_at(u, n);
        let p = t.p.expect("canonical triples carry their string index");
        let back = triple_index(u, p, &t.eps, t.i)?;
        (json!({ "index": n, "triple": t.to_json(), "round_trip": back }), back == n)
    };
    report(json!({}), result, ok)
}
