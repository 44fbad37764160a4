use std::fmt;
use std::fs;
use std::io::Read;
use std::path::Path;

use pickgeom::classify::{classify_gram, classify_triple, is_r_pick, lies_in_geodesic, lies_in_real_disk, lies_in_totally_real, projected_area, ConfigClass};
use pickgeom::embedding::{embed_with_report, gram_from_invariants};
use pickgeom::gram::{basepoint_rescale, rescale, GramSpace, RescalingMap};
use pickgeom::hyperbolic::{congruent, gram_from_points, normal_form, PointSet};
use pickgeom::invariants::{
    angular_invariant, capital_delta, delta_matrix, frak_d, has_cpp, invariant_data, lf, mq_matrix, sti_all, triples,
};
use pickgeom::io::{parse, unpair, ComplexPair, GramDoc, HartzDoc, InvariantDoc, PointSetDoc, TreeDoc};
use pickgeom::linalg::hermitian_eigenvalues;
use pickgeom::multalg::{extremal_multiplier, hartz_data, multiplier_norm_report, reconstruct_from_hartz, MultiplierSymbol};
use pickgeom::trees::{spine_embedding, summation_by_parts_check, tree_kernel, tree_norm, values_from_coefficients, NormMode, TreeWeight};
use pickgeom::{Complex64, Error, Tolerances};
use serde_json::{json, Map, Value};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            CliError::Input(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(msg) => f.write_str(msg),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Reads a file, or standard input for `-`.
pub fn read_input(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))
    }
}

fn tolerances_json(tol: &Tolerances) -> Value {
    serde_json::to_value(tol).expect("tolerances serialize")
}

fn is_gram_doc(v: &Value) -> bool {
    v.get("K").is_some()
}

fn to_value<T: serde::Serialize>(doc: &T) -> Value {
    serde_json::to_value(doc).expect("documents serialize")
}

fn from_value<T: for<'de> serde::Deserialize<'de>>(v: Value) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::Core(Error::Parse(e.to_string())))
}

fn load_gram(text: &str, tol: &Tolerances) -> CliResult<GramSpace> {
    Ok(parse::<GramDoc>(text)?.into_space(tol)?)
}

fn load_points(text: &str) -> CliResult<PointSet> {
    Ok(parse::<PointSetDoc>(text)?.into_points()?)
}

/// Moves `basepoint` to the front; `order[i]` is the original index of new index `i`.
fn anchored(g: &GramSpace, basepoint: usize) -> CliResult<(GramSpace, Vec<usize>)> {
    if basepoint >= g.n() {
        return Err(Error::IndexOutOfRange { index: basepoint, n: g.n() }.into());
    }
    let mut order: Vec<usize> = vec![basepoint];
    order.extend((0..g.n()).filter(|&i| i != basepoint));
    let moved = rescale(g, &RescalingMap::with_perm(vec![Complex64::new(1.0, 0.0); g.n()], order.clone()))?;
    Ok((moved, order))
}

fn key(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

pub fn analyze(text: &str, tol: &Tolerances, basepoint: usize, emit_points: bool) -> CliResult<Value> {
    let g = load_gram(text, tol)?;
    let n = g.n();
    let cert = has_cpp(&g, tol);
    let mut angular = Map::new();
    let mut lf_table = Map::new();
    for (i, j, k) in triples(n) {
        angular.insert(key(&[i, j, k]), json!(angular_invariant(&g, i, j, k)?));
        for (a, b, c) in [(i, j, k), (j, i, k), (i, k, j)] {
            lf_table.insert(key(&[a, b, c]), json!(lf(&g, a, b, c)?));
        }
    }
    let mut mq = Vec::new();
    for r in 0..n {
        let eig = hermitian_eigenvalues(&mq_matrix(&g, r)?.m);
        mq.push(json!({
            "r": r + 1,
            "lambda_min": eig.first().copied().unwrap_or(0.0),
            "lambda_max": eig.last().copied().unwrap_or(0.0),
            "psd": eig.first().is_none_or(|&l| l >= -tol.tol_psd * eig.last().unwrap().abs().max(1.0)),
        }));
    }
    let mut capital = Map::new();
    for x in 0..n {
        for y in 0..n {
            for z in (y + 1)..n {
                if x != y && x != z {
                    capital.insert(key(&[x, y, z]), json!(capital_delta(&g, x, y, z, tol)?));
                }
            }
        }
    }
    let (moved, order) = anchored(&g, basepoint)?;
    let j = invariant_data(&moved);
    let invariants = json!({
        "deltas": j.deltas.iter().map(|(&(a, b), v)| (key(&[order[a], order[b]]), json!(v))).collect::<Map<_, _>>(),
        "angulars": j.angulars.iter().map(|(&(r, s), v)| (key(&[order[0], order[r], order[s]]), json!(v))).collect::<Map<_, _>>(),
    });
    let mut report = Map::new();
    report.insert("n".into(), json!(n));
    report.insert("tolerances".into(), tolerances_json(tol));
    report.insert("basepoint".into(), json!(basepoint + 1));
    report.insert("delta".into(), json!(delta_matrix(&g)));
    report.insert("angular".into(), Value::Object(angular));
    report.insert("lf".into(), Value::Object(lf_table));
    report.insert("mq".into(), Value::Array(mq));
    report.insert("cpp".into(), json!(cert.cpp));
    report.insert("cpp_violation".into(), json!(cert.violation.map(|v| v.to_string())));
    report.insert("sti".into(), json!(sti_all(&g, tol)?));
    report.insert("capital_delta".into(), Value::Object(capital));
    report.insert("invariant_data".into(), invariants);
    report.insert("basepoint_gram".into(), to_value(&GramDoc::from_space(&basepoint_rescale(&g, basepoint)?)));
    if let Some(pair) = g.reducible_pair() {
        report.insert("reducible".into(), json!([pair.0 + 1, pair.1 + 1]));
    }
    if cert.cpp {
        let d = frak_d(&moved, tol)?;
        report.insert(
            "frak_d".into(),
            json!({
                "deltas": d.deltas.iter().map(|(&(a, b), v)| (key(&[order[a], order[b]]), json!(v))).collect::<Map<_, _>>(),
                "capital_deltas": d.capital_deltas.iter().map(|(&(r, s), v)| (key(&[order[0], order[r], order[s]]), json!(v))).collect::<Map<_, _>>(),
            }),
        );
        if emit_points {
            let rep = embed_with_report(&g, tol)?;
            report.insert("points".into(), to_value(&PointSetDoc::from_points(&rep.points)));
        }
    }
    Ok(Value::Object(report))
}

/// Embeds a Gram document, or the space described by an invariant document.
pub fn embed(text: &str, tol: &Tolerances) -> CliResult<Value> {
    let v: Value = parse(text)?;
    let g = if v.get("deltas").is_some() {
        let j = from_value::<InvariantDoc>(v)?.into_data()?;
        let g = gram_from_invariants(&j)?;
        if !has_cpp(&g, tol).cpp {
            return Err(Error::Infeasible { reason: "invariants do not describe a complete Pick space".into() }.into());
        }
        g
    } else {
        from_value::<GramDoc>(v)?.into_space(tol)?
    };
    let rep = embed_with_report(&g, tol)?;
    let mut out = to_value(&PointSetDoc::from_points(&rep.points));
    out["certificate"] = json!({ "cpp": true, "residual": rep.residual, "condition": rep.condition });
    out["tolerances"] = tolerances_json(tol);
    Ok(out)
}

fn class_json(class: &ConfigClass) -> Value {
    json!({ "tag": class.tag.to_string(), "witnesses": class.witnesses })
}

pub fn classify(text: &str, tol: &Tolerances) -> CliResult<Value> {
    let v: Value = parse(text)?;
    let mut out = if is_gram_doc(&v) {
        let g = from_value::<GramDoc>(v)?.into_space(tol)?;
        if g.n() == 3 {
            class_json(&classify_gram(&g, tol)?)
        } else {
            json!({ "r_pick": is_r_pick(&g, tol)? })
        }
    } else {
        let x = from_value::<PointSetDoc>(v)?.into_points()?;
        if x.len() == 3 {
            let mut out = class_json(&classify_triple(&x, tol)?);
            out["projected_area"] = json!(projected_area(&x, tol)?);
            out
        } else {
            json!({
                "geodesic": lies_in_geodesic(&x, tol)?,
                "totally_real": lies_in_totally_real(&x, tol)?,
                "real_disk": lies_in_real_disk(&x, tol)?,
            })
        }
    };
    out["tolerances"] = tolerances_json(tol);
    Ok(out)
}

pub fn congruence(first: &str, second: &str, tol: &Tolerances) -> CliResult<Value> {
    let x = load_points(first)?;
    let y = load_points(second)?;
    let verdict = congruent(&x, &y, tol)?;
    Ok(json!({
        "congruent": verdict,
        "normal_forms": [
            to_value(&PointSetDoc::from_points(&normal_form(&x, tol)?.points)),
            to_value(&PointSetDoc::from_points(&normal_form(&y, tol)?.points)),
        ],
        "tolerances": tolerances_json(tol),
    }))
}

/// A fixed test function for the norm and summation checks.
fn probe(v: usize) -> Vec<Complex64> {
    (0..v).map(|x| Complex64::new(1.0 / (x as f64 + 1.0), (x as f64).sin())).collect()
}

pub fn tree(text: &str, tol: &Tolerances) -> CliResult<Value> {
    let (t, w) = parse::<TreeDoc>(text)?.into_tree()?;
    let w = match w {
        Some(w) => w,
        None => {
            let increments: Vec<f64> = (0..t.len()).map(|x| if x == t.root() { 1.0 } else { t.edge_len(x) }).collect();
            TreeWeight::from_increments(&t, &increments)?
        }
    };
    let g = tree_kernel(&t, &w)?;
    let x = spine_embedding(&t, &w)?;
    let realized = gram_from_points(&x)?;
    let v = t.len();
    let mut spine_error: f64 = 0.0;
    for a in 0..v {
        for b in 0..v {
            spine_error = spine_error.max((realized.entry(a, b) - w.omega(t.meet(a, b))).norm());
        }
    }
    let f = probe(v);
    let (lhs, rhs) = summation_by_parts_check(&t, w.values(), &f)?;
    let by_coeffs = tree_norm(&t, &w, &f, NormMode::Coefficients)?;
    let by_values = tree_norm(&t, &w, &values_from_coefficients(&t, &w, &f), NormMode::Values)?;
    Ok(json!({
        "gram": to_value(&GramDoc::from_space(&g)),
        "embedding": to_value(&PointSetDoc::from_points(&x)),
        "omega": w.values(),
        "checks": {
            "cpp": has_cpp(&g, tol).cpp,
            "spine_max_error": spine_error,
            "summation_by_parts": [lhs, rhs],
            "norm_coefficients": by_coeffs,
            "norm_values": by_values,
        },
        "tolerances": tolerances_json(tol),
    }))
}

pub fn hartz(text: &str, tol: &Tolerances, reconstruct: bool) -> CliResult<Value> {
    if reconstruct {
        let data = parse::<HartzDoc>(text)?.into_data()?;
        let g = reconstruct_from_hartz(&data, tol)?;
        let mut out = to_value(&GramDoc::from_space(&g));
        out["tolerances"] = tolerances_json(tol);
        Ok(out)
    } else {
        let g = load_gram(text, tol)?;
        let mut out = to_value(&HartzDoc::from_data(&hartz_data(&g, tol)?));
        out["tolerances"] = tolerances_json(tol);
        Ok(out)
    }
}

pub enum SymbolSource {
    Values(String),
    Extremal(usize, usize),
}

pub fn multnorm(text: &str, symbol: SymbolSource, tol: &Tolerances) -> CliResult<Value> {
    let g = load_gram(text, tol)?;
    let m = match symbol {
        SymbolSource::Values(values) => {
            let pairs: Vec<ComplexPair> = parse(&values)?;
            MultiplierSymbol::new(pairs.into_iter().map(unpair).collect())
        }
        SymbolSource::Extremal(x, y) => extremal_multiplier(&g, x, y)?,
    };
    let rep = multiplier_norm_report(&g, &m, tol)?;
    Ok(json!({
        "norm": rep.norm,
        "jitter": rep.jitter,
        "symbol": m.values.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "tolerances": tolerances_json(tol),
    }))
}

/// Sorted `.json` files of a directory.
pub fn batch_inputs(dir: &Path) -> CliResult<Vec<std::path::PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    files.sort();
    Ok(files)
}
