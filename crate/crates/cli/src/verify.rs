//! Re-checking a JSON report: the result must reproduce from the embedded
//! inputs, and witnesses are checked directly against the presentations.

use abtheme::ab_algebra::ore_apply;
use abtheme::classify::check_basis;
use abtheme::parse::{eval_theme_element, Env};
use abtheme::theme::{ThemeElement, ThemePresentation};
use abtheme::{Error, Result};

use crate::doc::{Document, MIN_PREC};
use crate::report::{DistinguisherJson, ElementJson, InvarianceJson, IsomorphismJson, ObstructionJson, Report};
use crate::{compute, Command};

fn parse_element(w: &ElementJson, rank: usize) -> Result<ThemeElement> {
    eval_theme_element(&w.element, &Env::new(w.prec), rank)
}

fn theme(d: &Document, prec: usize) -> Result<ThemePresentation> {
    d.theme(&d.env(prec, &[])?)
}

fn check_obstruction(o: &ObstructionJson) -> Result<String> {
    let ob = o.to_obstruction()?;
    if !ob.verify() {
        return Err(Error::InvalidInput("the obstruction certificate does not combine to 0 = 1".into()));
    }
    let last = ob.relation().map(|r| ob.render_relation(r)).unwrap_or_else(|| ob.reason.clone());
    Ok(format!("obstruction certificate verified; failing relation {last}"))
}

fn first_difference(a: &serde_json::Value, b: &serde_json::Value) -> String {
    match (a, b) {
        (serde_json::Value::Object(x), serde_json::Value::Object(y)) => {
            for (k, v) in x {
                if y.get(k) != Some(v) {
                    return k.clone();
                }
            }
            y.keys().find(|k| !x.contains_key(*k)).cloned().unwrap_or_default()
        }
        _ => "result".into(),
    }
}

/// Returns one line per successful check.
pub(crate) fn verify_report(src: &str) -> Result<String> {
    let rep: Report = serde_json::from_str(src).map_err(|e| Error::Parse(format!("not a report: {e}")))?;
    let command = Command::from_name(&rep.command)
        .filter(|c| *c != Command::Verify)
        .ok_or_else(|| Error::Parse(format!("unknown command {:?} in report", rep.command)))?;
    if rep.prec < MIN_PREC {
        return Err(Error::InvalidInput(format!("report precision {} is below {MIN_PREC}", rep.prec)));
    }
    let want = if command == Command::Isom { 2 } else { 1 };
    if rep.inputs.len() != want {
        return Err(Error::InvalidInput(format!("{} report needs {want} input(s)", rep.command)));
    }
    let mut lines = Vec::new();
    let again = compute(command, &rep.inputs, rep.prec)?;
    if again.result != rep.result {
        return Err(Error::InvalidInput(format!(
            "recomputation differs from the report (field {:?})",
            first_difference(&rep.result, &again.result)
        )));
    }
    lines.push(format!("{} result reproduces at precision {}", rep.command, rep.prec));
    let bad = |e: serde_json::Error| Error::Parse(format!("malformed result: {e}"));
    match command {
        Command::Invariance => {
            let res: InvarianceJson = serde_json::from_value(rep.result.clone()).map_err(bad)?;
            let th = theme(&rep.inputs[0], rep.prec)?;
            let k = th.rank();
            match (&res.witness, &res.obstruction) {
                (Some(w), _) => {
                    let x = parse_element(w, k)?;
                    if !x.comps[k - 1].is_zero() || x.comps[k - 2].is_zero() {
                        return Err(Error::InvalidInput(format!("witness {} is not in F_{} minus F_{}", w.element, k - 1, k - 2)));
                    }
                    let res = ore_apply(&th.defining_operator()?, &x, &th)?;
                    if !res.is_zero() {
                        return Err(Error::InvalidInput(format!("witness residual is {res}")));
                    }
                    lines.push(format!("witness x = {} is annihilated by the defining operator", w.element));
                }
                (None, Some(o)) => lines.push(check_obstruction(o)?),
                (None, None) => return Err(Error::Parse("invariance result has neither witness nor obstruction".into())),
            }
        }
        Command::Isom => {
            let res: IsomorphismJson = serde_json::from_value(rep.result.clone()).map_err(bad)?;
            let (e1, e2) = (theme(&rep.inputs[0], rep.prec)?, theme(&rep.inputs[1], rep.prec)?);
            match (&res.basis, &res.distinguisher) {
                (Some(basis), _) => {
                    let basis = basis.iter().map(|w| parse_element(w, e1.rank())).collect::<Result<Vec<_>>>()?;
                    check_basis(&e1, &e2, &basis)?;
                    lines.push(format!("witness basis satisfies the relations of the second presentation ({} vectors)", basis.len()));
                }
                (None, Some(DistinguisherJson::Relations { obstruction })) => lines.push(check_obstruction(obstruction)?),
                (None, Some(DistinguisherJson::Invariants { .. })) => {
                    if e1.invariants() == e2.invariants() {
                        return Err(Error::InvalidInput("the invariants claimed to differ are equal".into()));
                    }
                    lines.push(format!("fundamental invariants differ: {} vs {}", e1.invariants(), e2.invariants()));
                }
                (None, None) => return Err(Error::Parse("isomorphism result has neither witness nor distinguisher".into())),
            }
        }
        _ => {}
    }
    Ok(lines.join("\n") + "\n")
}
