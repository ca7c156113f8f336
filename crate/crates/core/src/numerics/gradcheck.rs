//! Central finite-difference verification of autodiff gradients.

use super::graph::{Graph, Var};
use super::params::{ParamId, ParamStore};
use crate::error::{Error, Result};

/// Relative errors are measured against `max(|numeric|, DENOM_FLOOR)` so
/// entries with vanishing true gradient are judged by absolute error.
pub const DENOM_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub entries_checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

#[derive(Clone, Debug)]
pub struct GradCheck {
    pub epsilon: f64,
    /// Doubles the analytic gradient of one entry, to prove the check bites.
    pub corrupt: Option<(ParamId, usize)>,
    /// Restricts the check to these parameters; `None` checks all.
    pub only: Option<Vec<ParamId>>,
    pub floor: f64,
}

impl GradCheck {
    pub fn new(epsilon: f64) -> Self {
        GradCheck {
            epsilon,
            corrupt: None,
            only: None,
            floor: DENOM_FLOOR,
        }
    }

    pub fn corrupt(mut self, id: ParamId, index: usize) -> Self {
        self.corrupt = Some((id, index));
        self
    }

    /// Smallest denominator of the relative error.
    pub fn floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn only(mut self, ids: Vec<ParamId>) -> Self {
        self.only = Some(ids);
        self
    }

    pub fn run<F>(&self, params: &mut ParamStore<f64>, loss_fn: F) -> Result<GradCheckReport>
    where
        F: Fn(&mut Graph<'_, f64>) -> Result<Var>,
    {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::GradCheck(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        let eval = |p: &ParamStore<f64>| -> Result<f64> {
            let mut g = Graph::inference(p);
            let l = loss_fn(&mut g)?;
            Ok(g.value(l).item())
        };
        let base = eval(params)?;
        if eval(params)?.to_bits() != base.to_bits() {
            return Err(Error::GradCheck("loss function is not deterministic".into()));
        }

        let grads = {
            let mut g = Graph::new(params);
            let l = loss_fn(&mut g)?;
            g.backward(l)?
        };

        let ids: Vec<ParamId> = match &self.only {
            Some(ids) => ids.clone(),
            None => params.iter().map(|(id, _)| id).collect(),
        };
        let mut report = GradCheckReport {
            max_rel_error: 0.0,
            param: String::new(),
            index: 0,
            analytic: 0.0,
            numeric: 0.0,
            entries_checked: 0,
        };
        for id in ids {
            let n = params.value(id).len();
            for i in 0..n {
                let mut analytic = grads.param(id).map_or(0.0, |g| g.data()[i]);
                if self.corrupt == Some((id, i)) {
                    analytic *= 2.0;
                }
                let orig = params.value(id).data()[i];
                params.get_mut(id).value.data_mut()[i] = orig + self.epsilon;
                let plus = eval(params);
                params.get_mut(id).value.data_mut()[i] = orig - self.epsilon;
                let minus = eval(params);
                params.get_mut(id).value.data_mut()[i] = orig;
                let numeric = (plus? - minus?) / (2.0 * self.epsilon);
                let rel = (analytic - numeric).abs() / numeric.abs().max(self.floor);
                report.entries_checked += 1;
                if rel > report.max_rel_error || report.param.is_empty() {
                    report.max_rel_error = rel;
                    report.param = params.get(id).name.clone();
                    report.index = i;
                    report.analytic = analytic;
                    report.numeric = numeric;
                }
            }
        }
        Ok(report)
    }
}

/// Worst relative error between autodiff and central differences over every
/// entry of `params`.
pub fn finite_diff_check<F>(
    params: &mut ParamStore<f64>,
    epsilon: f64,
    loss_fn: F,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph<'_, f64>) -> Result<Var>,
{
    GradCheck::new(epsilon).run(params, loss_fn)
}
