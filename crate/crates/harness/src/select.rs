use crate::curve::{auc, mean_curve};
use crate::error::{HarnessError, Result};

/// Resampled curves of every seed run under one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigCurves {
    pub fingerprint: String,
    pub curves: Vec<Vec<f64>>,
}

/// Index of the configuration whose seed-mean curve has the largest AUC, and
/// every configuration's AUC. Ties go to the smallest fingerprint.
pub fn auc_select(xs: &[f64], groups: &[ConfigCurves]) -> Result<(usize, Vec<f64>)> {
    if groups.is_empty() {
        return Err(HarnessError::Contract("auc_select needs at least one configuration".into()));
    }
    let mut aucs = Vec::with_capacity(groups.len());
    for g in groups {
        if g.curves.is_empty() {
            return Err(HarnessError::Contract(format!("configuration {} has no runs", g.fingerprint)));
        }
        aucs.push(auc(xs, &mean_curve(&g.curves)?));
    }
    let mut best = 0;
    for i in 1..groups.len() {
        let better = aucs[i] > aucs[best] || (aucs[i] == aucs[best] && groups[i].fingerprint < groups[best].fingerprint);
        if better {
            best = i;
        }
    }
    Ok((best, aucs))
}
