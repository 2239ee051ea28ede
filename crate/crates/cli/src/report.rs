//! Structured report document and its renderings.
//!
//! Every command produces one [`ReportDocument`]: the input echoed back,
//! component/class tables, check outcomes, and whatever profile or trace the
//! command computed. The JSON form is the machine interface — re-reading the
//! echoed input and re-running the command reproduces the same check
//! outcomes. Tables are for people; CSV is plot-ready.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    pub numeric_mode: String,
    /// The validated input document, echoed verbatim.
    pub input: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profile: Vec<ProfileRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropyBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_epsilon: Option<NEpsilon>,
    pub all_checks_passed: bool,
}

/// One ergodic component (finite system) or recurrent class (source).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentRow {
    pub id: usize,
    /// Atom or class member labels.
    pub members: Vec<String>,
    pub weight: String,
    /// Conditional measure (finite) or class stationary law (source),
    /// aligned with the echoed point/state order.
    pub conditional: Vec<String>,
    /// Stationary mean of the conditional (finite systems).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stationary_mean: Vec<String>,
    pub ergodic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub max_deviation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: u64,
    pub sup_deviation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_density_distance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceedance_mass: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: u64,
    pub point: String,
    pub value: String,
    /// Hopf part of the point: "C" or "D"; "null" for Q-null points.
    pub part: String,
    pub l1_dist_c: String,
    pub exceedance_mass_d: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyBlock {
    pub per_class: Vec<ClassRateRow>,
    pub average: RateRow,
    /// `H_L / L` per depth.
    pub block_table: Vec<BlockRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassRateRow {
    pub members: Vec<String>,
    pub weight: f64,
    pub rate: RateRow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRow {
    pub exact: bool,
    pub lower_bits: f64,
    pub upper_bits: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_depth: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockRow {
    pub depth: usize,
    pub block_entropy_bits: f64,
    pub per_symbol_bits: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NEpsilon {
    pub epsilon: String,
    /// Smallest scheduled n with sup-deviation ≤ ε, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

/// Fixed-width table: pads each column to its widest cell.
pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String], out: &mut String| {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(cell);
            for _ in cell.chars().count()..widths[i] {
                out.push(' ');
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    let header_cells: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    render_row(&header_cells, &mut out);
    let rule_len = widths.iter().sum::<usize>() + 2 * (widths.len().saturating_sub(1));
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');
    for row in rows {
        render_row(row, &mut out);
    }
    out
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable rendering: one table per populated section.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "command: {}   numeric mode: {}\n",
            self.command, self.numeric_mode
        ));
        if !self.components.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = self
                .components
                .iter()
                .map(|c| {
                    vec![
                        c.id.to_string(),
                        c.members.join(" "),
                        c.weight.clone(),
                        c.conditional.join(" "),
                        c.stationary_mean.join(" "),
                        if c.ergodic { "yes" } else { "no" }.to_string(),
                    ]
                })
                .collect();
            out.push_str(&render_table(
                &["id", "members", "weight", "conditional", "stationary mean", "ergodic"],
                &rows,
            ));
        }
        if !self.profile.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = self
                .profile
                .iter()
                .map(|p| {
                    vec![
                        p.n.to_string(),
                        p.sup_deviation.clone(),
                        p.l1_density_distance.clone().unwrap_or_default(),
                        p.exceedance_mass.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            out.push_str(&render_table(
                &["n", "sup_deviation", "l1_density_distance", "exceedance_mass"],
                &rows,
            ));
        }
        if let Some(n_eps) = &self.n_epsilon {
            out.push_str(&format!(
                "N(epsilon = {}): {}\n",
                n_eps.epsilon,
                n_eps
                    .n
                    .map(|n| n.to_string())
                    .unwrap_or_else(|| "not reached within the schedule".into())
            ));
        }
        if !self.trace.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = self
                .trace
                .iter()
                .map(|t| {
                    vec![
                        t.n.to_string(),
                        t.point.clone(),
                        t.value.clone(),
                        t.part.clone(),
                        t.l1_dist_c.clone(),
                        t.exceedance_mass_d.clone(),
                    ]
                })
                .collect();
            out.push_str(&render_table(
                &["n", "point", "value", "part", "l1_dist_C", "exceedance_mass_D"],
                &rows,
            ));
        }
        if let Some(entropy) = &self.entropy {
            out.push('\n');
            let rows: Vec<Vec<String>> = entropy
                .per_class
                .iter()
                .map(|c| {
                    vec![
                        c.members.join(" "),
                        format!("{:.6}", c.weight),
                        render_rate(&c.rate),
                    ]
                })
                .collect();
            out.push_str(&render_table(&["class", "weight", "rate (bits/symbol)"], &rows));
            out.push_str(&format!("weighted average: {}\n", render_rate(&entropy.average)));
            if !entropy.block_table.is_empty() {
                out.push('\n');
                let rows: Vec<Vec<String>> = entropy
                    .block_table
                    .iter()
                    .map(|b| {
                        vec![
                            b.depth.to_string(),
                            format!("{:.12}", b.block_entropy_bits),
                            format!("{:.12}", b.per_symbol_bits),
                        ]
                    })
                    .collect();
                out.push_str(&render_table(&["L", "H_L", "H_L / L"], &rows));
            }
        }
        if !self.checks.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = self
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        if c.passed { "pass" } else { "FAIL" }.to_string(),
                        c.max_deviation.clone(),
                    ]
                })
                .collect();
            out.push_str(&render_table(&["check", "result", "max deviation"], &rows));
        }
        out.push_str(&format!(
            "\noverall: {}\n",
            if self.all_checks_passed {
                "all checks passed"
            } else {
                "CHECKS FAILED"
            }
        ));
        out
    }

    /// CSV rendering of the command's tabular payload.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.trace.is_empty() {
            out.push_str("n,point,value,part,l1_dist_C,exceedance_mass_D\n");
            for t in &self.trace {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    t.n, t.point, t.value, t.part, t.l1_dist_c, t.exceedance_mass_d
                ));
            }
            return out;
        }
        if !self.profile.is_empty() {
            out.push_str("n,sup_deviation,l1_density_distance,exceedance_mass\n");
            for p in &self.profile {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    p.n,
                    p.sup_deviation,
                    p.l1_density_distance.clone().unwrap_or_default(),
                    p.exceedance_mass.clone().unwrap_or_default()
                ));
            }
            return out;
        }
        if let Some(entropy) = &self.entropy {
            out.push_str("L,block_entropy_bits,per_symbol_bits\n");
            for b in &entropy.block_table {
                out.push_str(&format!(
                    "{},{:.12},{:.12}\n",
                    b.depth, b.block_entropy_bits, b.per_symbol_bits
                ));
            }
            return out;
        }
        // Fall back to the check table.
        out.push_str("check,passed,max_deviation\n");
        for c in &self.checks {
            out.push_str(&format!("{},{},{}\n", c.name, c.passed, c.max_deviation));
        }
        out
    }
}

fn render_rate(rate: &RateRow) -> String {
    if rate.exact {
        format!("{:.12}", rate.lower_bits)
    } else {
        format!(
            "[{:.12}, {:.12}] (bounds at depth {})",
            rate.lower_bits,
            rate.upper_bits,
            rate.bound_depth.unwrap_or_default()
        )
    }
}
