use serde::{Deserialize, Serialize};

use super::curve::{ghat_all, total_variation_along, CurveComponent};
use super::LevelSlice;
use crate::error::{Error, Result};
use crate::quadrature::vertical_oscillation;

/// The three parts of the general-case budget.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhiBreakdown {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetKind {
    /// Closed loop, budget `Vosc S_z`.
    Loop,
    /// Arc on which `f_{x₁}` does not vanish, budget the best `Ĝ`-partition sum.
    ArcNonvanishing,
    /// Arc carrying a zero of `f_{x₁}`, budget `sup S_z(x) − S_z(q(x))` over arc points `x`,
    /// where `q(x)` is an endpoint with a zero of `f_{x₁}` between it and `x`.
    ArcVanishing,
}

/// Budget of one component together with the one-dimensional bound that controls it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentBudget {
    pub id: usize,
    pub kind: BudgetKind,
    pub value: f64,
    /// `H¹(p₁(C))·TV_C(f_{x₁})`.
    pub bound: f64,
    pub projection: f64,
    pub tv: f64,
    /// For vanishing arcs: the endpoint and the vertex attaining the budget.
    pub q_index: Option<usize>,
    pub sup_index: Option<usize>,
    /// For vanishing arcs: fractional vertex positions of the first and last zeros of
    /// `f_{x₁}`.
    pub first_zero: Option<f64>,
    pub last_zero: Option<f64>,
}

/// `φ(z) = Σ Vosc S_z` over the loops of a slice without arcs.
pub fn phi_compact(s: &LevelSlice, tol_x: f64) -> Result<f64> {
    if !s.arcs.is_empty() {
        return Err(Error::WrongCase(format!(
            "slice at z = {} has {} arcs meeting the boundary",
            s.z,
            s.arcs.len()
        )));
    }
    Ok(s.loops
        .iter()
        .map(|c| vertical_oscillation(&c.samples_sz, c, tol_x))
        .sum())
}

/// Fractional vertex position of the first zero of `f_{x₁}` along `c`, if any.
pub fn first_fx1_zero(c: &CurveComponent, eps_zero: f64) -> Option<f64> {
    let f = &c.samples_fx1;
    for k in 0..f.len() {
        if f[k].abs() < eps_zero {
            return Some(k as f64);
        }
        if k + 1 < f.len() && f[k] * f[k + 1] < 0.0 {
            return Some(k as f64 + f[k] / (f[k] - f[k + 1]));
        }
    }
    None
}

/// Fractional vertex position of the last zero of `f_{x₁}` along `c`, if any.
pub fn last_fx1_zero(c: &CurveComponent, eps_zero: f64) -> Option<f64> {
    let f = &c.samples_fx1;
    for k in (0..f.len()).rev() {
        if f[k].abs() < eps_zero {
            return Some(k as f64);
        }
        if k > 0 && f[k - 1] * f[k] < 0.0 {
            return Some(k as f64 - 1.0 + f[k - 1] / (f[k - 1] - f[k]));
        }
    }
    None
}

fn max_over(s: &[f64], range: std::ops::RangeInclusive<usize>) -> (usize, f64) {
    range.fold((0, f64::NEG_INFINITY), |acc, i| {
        if s[i] > acc.1 {
            (i, s[i])
        } else {
            acc
        }
    })
}

/// Best `Σ [S(s_j) − S(t_j)]` over partitions `s₁ ≥ t₁ ≥ s₂ ≥ …` with `t_j = Ĝ(s_j)`, for
/// the vertex order of `c`.
pub fn ghat_partition_value(c: &CurveComponent) -> f64 {
    let n = c.len();
    if n < 2 {
        return 0.0;
    }
    let g = ghat_all(c);
    let s = &c.samples_sz;
    let mut best = vec![0.0f64; n];
    for i in 1..n {
        let take = s[i] - s[g[i]] + best[g[i]];
        best[i] = best[i - 1].max(take);
    }
    best[n - 1]
}

/// Per-component budgets of a slice, in component-id order.
pub fn component_budgets(s: &LevelSlice, tol_x: f64) -> Vec<ComponentBudget> {
    let mut out = Vec::with_capacity(s.loops.len() + s.arcs.len());
    for c in s.components() {
        let projection = c.projection_measure();
        let tv = total_variation_along(c);
        let mut b = ComponentBudget {
            id: c.id,
            kind: BudgetKind::Loop,
            value: 0.0,
            bound: projection * tv,
            projection,
            tv,
            q_index: None,
            sup_index: None,
            first_zero: None,
            last_zero: None,
        };
        if c.closed {
            b.value = vertical_oscillation(&c.samples_sz, c, tol_x);
        } else if let Some(first) = first_fx1_zero(c, s.eps_zero) {
            // x is covered by q = γ(0) once a zero precedes it, and by q = γ(L) while one
            // follows it
            let last = last_fx1_zero(c, s.eps_zero).unwrap_or(first);
            let n = c.len();
            let sz = &c.samples_sz;
            let (i0, v0) = max_over(sz, (first.ceil() as usize).min(n - 1)..=n - 1);
            let (i1, v1) = max_over(sz, 0..=(last.floor() as usize).min(n - 1));
            let (q, sup_i, v) = if v0 - sz[0] >= v1 - sz[n - 1] {
                (0, i0, v0 - sz[0])
            } else {
                (n - 1, i1, v1 - sz[n - 1])
            };
            b.kind = BudgetKind::ArcVanishing;
            b.value = v;
            b.q_index = Some(q);
            b.sup_index = Some(sup_i);
            b.first_zero = Some(first);
            b.last_zero = Some(last);
        } else {
            b.kind = BudgetKind::ArcNonvanishing;
            b.value = ghat_partition_value(c).max(ghat_partition_value(&c.reversed()));
        }
        out.push(b);
    }
    out
}

/// `Φ₁ + Φ₂ + Φ₃` for a regular slice.
pub fn phi_general(s: &LevelSlice, tol_x: f64) -> Result<PhiBreakdown> {
    if !s.regular {
        return Err(Error::InvalidInput(format!(
            "slice at z = {} is not regular",
            s.z
        )));
    }
    Ok(phi_from_budgets(&component_budgets(s, tol_x)))
}

pub fn phi_from_budgets(budgets: &[ComponentBudget]) -> PhiBreakdown {
    let mut p = PhiBreakdown::default();
    for b in budgets {
        match b.kind {
            BudgetKind::Loop => p.phi1 += b.value,
            BudgetKind::ArcNonvanishing => p.phi2 += b.value,
            BudgetKind::ArcVanishing => p.phi3 = p.phi3.max(b.value),
        }
    }
    p.total = p.phi1 + p.phi2 + p.phi3;
    p
}
