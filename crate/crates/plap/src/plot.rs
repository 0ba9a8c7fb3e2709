//! Long-format CSV (series, x, y) extracted from a bundle.

use crate::bundle::{Report, ReportBundle};
use plap_core::entropy::EntropySeries;
use plap_core::parabolic::HarnackId;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("unknown selector `{0}`")]
    UnknownSelector(String),
}

type Field = fn(&EntropySeries) -> &[f64];

enum Selector {
    Harnack(HarnackId),
    Entropy(Field, &'static str),
    Imcf(&'static str),
}

const ENTROPY_FIELDS: [(&str, Field); 8] = [
    ("W", |s| &s.w),
    ("N", |s| &s.n_entropy),
    ("F", |s| &s.f_entropy),
    ("Fbar", |s| &s.fbar),
    ("RHS", |s| &s.rhs),
    ("dWdt", |s| &s.dwdt),
    ("mass", |s| &s.mass),
    ("tail", |s| &s.tail_bound),
];

fn parse(sel: &str) -> Result<Selector, PlotError> {
    let unknown = || PlotError::UnknownSelector(sel.to_string());
    let (family, what) = sel.split_once(':').ok_or_else(unknown)?;
    match family {
        "harnack" => HarnackId::parse(what).map(Selector::Harnack).map_err(|_| unknown()),
        "entropy" => ENTROPY_FIELDS
            .iter()
            .find(|(name, _)| *name == what)
            .map(|(name, f)| Selector::Entropy(*f, name))
            .ok_or_else(unknown),
        "imcf" => match what {
            "sup_grad" => Ok(Selector::Imcf("sup_grad")),
            "sup_u" => Ok(Selector::Imcf("sup_u")),
            _ => Err(unknown()),
        },
        _ => Err(unknown()),
    }
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with header `series,x,y`. Repeated series get an index suffix `#k`.
pub fn emit_plotdata(bundle: &ReportBundle, selector: &str) -> Result<String, PlotError> {
    let sel = parse(selector)?;
    let mut rows: Vec<(String, f64, f64)> = Vec::new();
    let label = |base: &str, k: usize, count: usize| if count > 1 { format!("{base}#{k}") } else { base.to_string() };
    match sel {
        Selector::Harnack(id) => {
            let reps: Vec<_> = bundle
                .reports
                .iter()
                .filter_map(|r| match r {
                    Report::Harnack(h) if h.id == id => Some(h),
                    _ => None,
                })
                .collect();
            for (k, h) in reps.iter().enumerate() {
                let main = label("worst_lhs_times_pt_over_n", k, reps.len());
                let reference = label("reference", k, reps.len());
                for s in &h.samples {
                    rows.push((main.clone(), s.t, s.lhs / s.bound));
                }
                for s in &h.samples {
                    rows.push((reference.clone(), s.t, 1.0));
                }
            }
        }
        Selector::Entropy(field, name) => {
            let reps: Vec<_> = bundle
                .reports
                .iter()
                .filter_map(|r| match r {
                    Report::Entropy(e) => Some(e),
                    _ => None,
                })
                .collect();
            for (k, e) in reps.iter().enumerate() {
                let series = label(name, k, reps.len());
                for (t, y) in e.t.iter().zip(field(e)) {
                    rows.push((series.clone(), *t, *y));
                }
            }
        }
        Selector::Imcf(what) => {
            let reps: Vec<_> = bundle
                .reports
                .iter()
                .filter_map(|r| match r {
                    Report::Continuation(c) => Some(c),
                    _ => None,
                })
                .collect();
            for (k, c) in reps.iter().enumerate() {
                let series = label(what, k, reps.len());
                for row in &c.rows {
                    let y = if what == "sup_grad" { row.sup_grad } else { row.sup_u };
                    rows.push((series.clone(), row.p, y));
                }
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["series", "x", "y"]).expect("in-memory write");
    for (s, x, y) in rows {
        w.write_record([s, fmt_num(x), fmt_num(y)]).expect("in-memory write");
    }
    Ok(String::from_utf8(w.into_inner().expect("flush")).expect("CSV is UTF-8"))
}

/// File name used for a selector's table.
pub fn csv_name(selector: &str) -> String {
    format!("{}.csv", selector.replace(':', "_"))
}
