use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::series::QSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    PoleSkipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub exponent: i64,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of checking one identity to a fixed order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity_id: String,
    pub parameters: BTreeMap<String, String>,
    pub status: Status,
    pub first_discrepancy: Option<Discrepancy>,
    pub elapsed_ms: u64,
    pub order: i64,
}

pub type Params = BTreeMap<String, String>;

/// Build a parameter map from `(key, value)` pairs.
pub fn params<I, K, V>(items: I) -> Params
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: ToString,
{
    items.into_iter().map(|(k, v)| (k.into(), v.to_string())).collect()
}

impl VerificationReport {
    /// Compare `lhs` and `rhs` strictly below `min(order, prec_lhs, prec_rhs)`.
    pub fn compare(id: &str, mut parameters: Params, lhs: &QSeries, rhs: &QSeries, order: i64, start: Instant) -> Self {
        let window = order.min(lhs.prec()).min(rhs.prec());
        if window < order {
            parameters.insert("compared_to".into(), window.to_string());
        }
        let d = lhs.truncate(window).first_difference(&rhs.truncate(window));
        VerificationReport {
            identity_id: id.to_string(),
            parameters,
            status: if d.is_none() { Status::Pass } else { Status::Fail },
            first_discrepancy: d.map(|(e, a, b)| Discrepancy {
                exponent: e,
                lhs: a.to_string(),
                rhs: b.to_string(),
            }),
            elapsed_ms: start.elapsed().as_millis() as u64,
            order,
        }
    }

    /// A report for a check that could not be evaluated. Poles become
    /// `pole_skipped`, everything else `fail`.
    pub fn from_error(id: &str, mut parameters: Params, err: &Error, order: i64, start: Instant) -> Self {
        parameters.insert("error".into(), err.to_string());
        VerificationReport {
            identity_id: id.to_string(),
            parameters,
            status: if matches!(err, Error::Pole(_)) {
                Status::PoleSkipped
            } else {
                Status::Fail
            },
            first_discrepancy: None,
            elapsed_ms: start.elapsed().as_millis() as u64,
            order,
        }
    }

    /// Run `f` and compare its two sides, downgrading errors.
    pub fn run<F>(id: &str, parameters: Params, order: i64, f: F) -> Self
    where
        F: FnOnce() -> crate::Result<(QSeries, QSeries)>,
    {
        let start = Instant::now();
        match f() {
            Ok((lhs, rhs)) => Self::compare(id, parameters, &lhs, &rhs, order, start),
            Err(e) => Self::from_error(id, parameters, &e, order, start),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn summary_line(&self) -> String {
        let status = match self.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::PoleSkipped => "pole_skipped",
        };
        let params: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let mut line = format!("{status:<12} {} [{}] order {}", self.identity_id, params.join(", "), self.order);
        if let Some(d) = &self.first_discrepancy {
            line.push_str(&format!(" first difference at q^{}: {} vs {}", d.exponent, d.lhs, d.rhs));
        }
        line
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_field_names() {
        let r = VerificationReport::compare(
            "x",
            params([("a", 1)]),
            &QSeries::from_ints(0, &[1, 2], 2),
            &QSeries::from_ints(0, &[1, 3], 2),
            2,
            Instant::now(),
        );
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["elapsed_ms", "first_discrepancy", "identity_id", "order", "parameters", "status"]);
        assert_eq!(v["status"], "fail");
        assert_eq!(v["first_discrepancy"]["exponent"], 1);
    }

    #[test]
    fn pole_is_skipped() {
        let r = VerificationReport::from_error("x", Params::new(), &Error::Pole("j(1; q)".into()), 5, Instant::now());
        assert_eq!(serde_json::to_value(&r).unwrap()["status"], "pole_skipped");
    }
}
