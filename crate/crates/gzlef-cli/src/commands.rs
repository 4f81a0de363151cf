use std::fs::File;
use std::io::BufWriter;
use std::sync::Arc;

use gzlef::axioms::{check_axioms, closure_thresholds, Theory, WeightFn};
use gzlef::commutators::{self, extend_witness, verify_witness, PmSolver};
use gzlef::gz_norm::{verify_geodesic, GzNorm};
use gzlef::norm::{
    conjugacy_closure, validate_invariance, validate_invariance_by_conjugators, validate_norm,
    validate_norm_certified, validate_pseudo_norm, word_norm_bfs,
};
use gzlef::oracle::{bfs_norms, enumerate_sbar, write_binary, BfsConfig, DenseCode, DenseGroup, UNREACHED};
use gzlef::props::{self, EvalMode, Statement};
use gzlef::{FiniteGroup, GroupSpec, Lamp, LampElem, Mode, RatNormTable, Rational};
use serde_json::json;

use crate::acceptance::{self, Scale};
use crate::config::{read_json, Failure, Output, RunConfig};

fn context(base: Arc<FiniteGroup>) -> GzNorm {
    GzNorm::new(base.clone()).unwrap_or_else(|_| GzNorm::advisory(base))
}

pub fn parse_thresholds(list: &str) -> Result<Vec<Rational>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Rational>().map_err(|_| Failure::input(format!("bad threshold {:?}", s))))
        .collect()
}

pub fn props_check(cfg: &RunConfig, raw: bool) -> Result<Output, Failure> {
    let (spec, g) = cfg.load_group()?;
    let mode = if raw { EvalMode::Raw } else { EvalMode::Reduced };
    let reports: Vec<_> = Statement::ALL.iter().map(|&s| props::check_with(&g, s, mode)).collect();
    let verified: Vec<bool> = reports.iter().map(|r| props::verify_report(&g, r)).collect();
    let passed = reports.iter().all(|r| r.holds) && verified.iter().all(|&v| v);
    let csv = std::iter::once("statement,holds,verified".to_string())
        .chain(reports.iter().zip(&verified).map(|(r, v)| format!("{},{},{}", r.property.id(), r.holds, v)))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    Ok(Output::new(cfg, Some(&spec), json!({"order": g.order(), "reports": reports, "verified": verified}), passed)
        .with_csv(csv))
}

// The element's own mode wins unless `--truncated` is given.
fn parse_element(base: &Arc<FiniteGroup>, arg: &str, truncated: Option<i64>) -> Result<(Lamp, LampElem), Failure> {
    let v = read_json("element", arg)?;
    let mode = match truncated {
        Some(n) => Mode::Truncated(n),
        None => match v.get("mode") {
            Some(m) => serde_json::from_value(m.clone()).map_err(|e| Failure::input(format!("element mode: {}", e)))?,
            None => Mode::Infinite,
        },
    };
    let lamp = match mode {
        Mode::Infinite => Lamp::infinite(base.clone()),
        Mode::Truncated(n) => Lamp::truncated(base.clone(), n).map_err(Failure::from_lib)?,
    };
    let x = lamp.from_json(&v).map_err(Failure::from_lib)?;
    Ok((lamp, x))
}

pub fn norm_eval(cfg: &RunConfig, element: &str, truncated: Option<i64>) -> Result<Output, Failure> {
    let (spec, g) = cfg.load_group()?;
    let ctx = context(g.clone());
    let (lamp, x) = parse_element(&g, element, truncated)?;
    let (value, mode) = match x.mode {
        Mode::Infinite => (ctx.norm(&x).map_err(Failure::from_lib)?, None),
        Mode::Truncated(_) => {
            let t = ctx.norm_truncated(&x).map_err(Failure::from_lib)?;
            (t.value, Some(t.mode))
        }
    };
    let geodesic = ctx.geodesic(&x).ok().filter(|geo| verify_geodesic(&lamp, &x, geo, value));
    let body = json!({
        "element": lamp.to_json(&x),
        "base_ok": ctx.base_ok(),
        "norm": value,
        "formula_mode": mode,
        "geodesic": geodesic.map(|geo| geo.factors.iter().map(|s| lamp.to_json(s)).collect::<Vec<_>>()),
    });
    Ok(Output::new(cfg, Some(&spec), body, true))
}

pub fn norm_table(cfg: &RunConfig, generators: Option<&str>, closure: bool) -> Result<Output, Failure> {
    let (spec, g) = cfg.load_group()?;
    let gens: Vec<usize> = match generators {
        Some(text) => serde_json::from_value(read_json("generators", text)?)
            .map_err(|e| Failure::input(format!("generators must be a list of element indices: {}", e)))?,
        None => g.generators().to_vec(),
    };
    let gens: Vec<usize> = if closure { conjugacy_closure(&g, &gens).into_iter().collect() } else { gens };
    let t: RatNormTable = word_norm_bfs(&g, &gens).map_err(Failure::from_lib)?;
    let (pn, n, inv) = (validate_pseudo_norm(&t), validate_norm(&t), validate_invariance(&t));
    let passed = pn.ok && n.ok;
    let csv = std::iter::once("element,value".to_string())
        .chain(t.values().iter().enumerate().map(|(i, v)| format!("{},{}", i, v)))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    let body = json!({
        "generators": gens,
        "table": t.to_json(),
        "validation": {"pseudo_norm": pn, "norm": n, "invariance": inv},
    });
    Ok(Output::new(cfg, Some(&spec), body, passed).with_csv(csv))
}

pub fn oracle_bfs(cfg: &RunConfig, validate: bool, top_down_only: bool) -> Result<Output, Failure> {
    let (spec, g) = cfg.load_group()?;
    let n = cfg.window.ok_or_else(|| Failure::input("oracle bfs needs --window"))?;
    let code = DenseCode::new(g.order(), n).map_err(Failure::from_lib)?;
    if let Some(cap) = cfg.memory_cap {
        if code.states() > cap {
            return Err(Failure::Cap {
                cap: "memory_cap".into(),
                message: format!("{} distance bytes exceed the memory cap of {} bytes", code.states(), cap),
            });
        }
    }
    let lamp = Lamp::truncated(g.clone(), n).map_err(Failure::from_lib)?;
    let bfs = BfsConfig { state_cap: cfg.state_cap, direction_optimizing: !top_down_only, ..Default::default() };
    let t = bfs_norms(&lamp, &bfs).map_err(Failure::from_lib)?;
    if let Some(path) = &cfg.out {
        write_binary(&t, BufWriter::new(File::create(path)?))?;
    }
    let reached = !t.dist.contains(&UNREACHED);
    let mut body = json!({"summary": t.summary, "all_reached": reached, "binary": cfg.out});
    let mut passed = reached;
    if validate {
        let dg = DenseGroup::new(&g, n).map_err(Failure::from_lib)?;
        let values: Vec<u32> = t.dist.iter().map(|&d| d as u32).collect();
        let sbar = enumerate_sbar(&lamp).map_err(Failure::from_lib)?;
        let gens: Vec<usize> = sbar.iter().map(|s| t.code.encode(s) as usize).collect();
        let conj: Vec<usize> = std::iter::once(lamp.t())
            .chain(g.generators().iter().map(|&s| lamp.single(0, s)))
            .map(|x| t.code.encode(&x) as usize)
            .collect();
        let norm = validate_norm_certified(&dg, &values, &gens);
        let inv = validate_invariance_by_conjugators(&dg, &values, &conj);
        passed &= norm.ok && inv.ok;
        body["validate_norm"] = json!(norm);
        body["validate_invariance"] = json!(inv);
    }
    Ok(Output::new(cfg, Some(&spec), body, passed))
}

pub fn decompose(cfg: &RunConfig, element: &str, kind: &str) -> Result<Output, Failure> {
    let (spec, g) = cfg.load_group()?;
    let (lamp, h) = parse_element(&g, element, None)?;
    let mut body = json!({"element": lamp.to_json(&h), "kind": kind});
    let passed = if kind == "pm" {
        let solver = PmSolver::new(g.clone());
        let is = solver.is_pm_commutator(&lamp, &h);
        body["is_commutator"] = json!(is);
        if is {
            let w = solver.build_pm_commutator(&lamp, &h).map_err(Failure::from_lib)?;
            body["witness"] = w.to_json(&lamp);
            verify_witness(&lamp, &h, &w)
        } else {
            false
        }
    } else {
        let k: i64 = kind.parse().map_err(|_| Failure::input(format!("--kind must be an integer or pm, got {:?}", kind)))?;
        match k.abs() {
            0 => return Err(Failure::input("--kind 0 is not a commutator type")),
            1 => {
                let (w, rest) = commutators::build_pm1_decomposition(&lamp, &h, k).map_err(Failure::from_lib)?;
                let part = lamp.mul(&h, &lamp.inverse(&rest));
                body["is_commutator"] = json!(rest == lamp.identity());
                body["witness"] = w.to_json(&lamp);
                body["residual"] = lamp.to_json(&rest);
                verify_witness(&lamp, &part, &w) && rest == lamp.identity()
            }
            _ => {
                let mut w = commutators::build_2_commutator(&lamp, &h, k.signum()).map_err(Failure::from_lib)?;
                for _ in 2..k.abs() {
                    w = extend_witness(&lamp, &w).map_err(Failure::from_lib)?;
                }
                body["is_commutator"] = json!(true);
                body["witness"] = w.to_json(&lamp);
                verify_witness(&lamp, &h, &w)
            }
        }
    };
    body["verified"] = json!(passed);
    Ok(Output::new(cfg, Some(&spec), body, passed))
}

pub fn almost_hom_verify(cfg: &RunConfig, k: &str) -> Result<Output, Failure> {
    let (spec, g) = cfg.load_group()?;
    let ctx = context(g.clone());
    let v = read_json("K", k)?;
    let items = v.as_array().ok_or_else(|| Failure::input("K must be a JSON list of elements"))?;
    let elems = items.iter().map(|x| ctx.lamp().from_json(x)).collect::<gzlef::Result<Vec<_>>>().map_err(Failure::from_lib)?;
    let q: Vec<Rational> = cfg.thresholds.iter().map(|s| s.parse().expect("validated thresholds")).collect();
    let rep = ctx.verify_phi(&elems, &q).map_err(Failure::from_lib)?;
    let body = json!({"base_ok": ctx.base_ok(), "window": gzlef::gz_norm::window_for(&elems), "report": rep});
    Ok(Output::new(cfg, Some(&spec), body, rep.ok))
}

pub fn axioms_validate(cfg: &RunConfig, input: &str, theory: &str) -> Result<Output, Failure> {
    let (spec, g) = cfg.load_group()?;
    let theory = Theory::parse(theory).ok_or_else(|| Failure::input(format!("unknown theory {:?}", theory)))?;
    let v = read_json("input", input)?;
    let f = if v.is_array() {
        let t = RatNormTable::from_json(g.clone(), &v).map_err(Failure::from_lib)?;
        let q = if cfg.thresholds.is_empty() {
            closure_thresholds(&t)
        } else {
            cfg.thresholds.iter().map(|s| s.parse().expect("validated thresholds")).collect()
        };
        WeightFn::from_norm(&t, &q).map_err(Failure::from_lib)?
    } else {
        WeightFn::from_json(g.clone(), &v).map_err(Failure::from_lib)?
    };
    let rep = check_axioms(&f, theory);
    let body = json!({"weights": f.to_json(), "report": rep});
    Ok(Output::new(cfg, Some(&spec), body, rep.ok))
}

pub fn selftest(cfg: &RunConfig, scale: Scale, lines: &mut dyn FnMut(&str)) -> Result<Output, Failure> {
    let mut results = Vec::new();
    for id in 1..=8 {
        let c = acceptance::run_one(id, scale, cfg.seed);
        lines(&c.line());
        results.push(c);
    }
    let passed = results.iter().all(|c| c.passed);
    let spec = GroupSpec::builtin("A5").map_err(Failure::from_lib)?;
    Ok(Output::new(cfg, Some(&spec), json!({"scale": scale, "criteria": results}), passed))
}
