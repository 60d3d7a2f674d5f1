//! Canonical CSV emitters. Hand-rolled on purpose: the determinism contract
//! is byte-level, so formatting goes through one place (`f64` Display is the
//! shortest round-trip form, LF endings, fixed column orders).

use boolmodel::analysis::{EstimateRow, ReplicaRow};
use boolmodel::criteria::RegimeRow;

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn estimates_csv(rows: &[EstimateRow]) -> String {
    let mut out = String::from("u,L,stat,estimate,lo,hi,n,taint\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            num(r.u),
            num(r.l),
            r.stat,
            num(r.estimate),
            num(r.lo),
            num(r.hi),
            r.n,
            r.taint.join(";")
        ));
    }
    out
}

pub fn clusters_csv(rows: &[ReplicaRow]) -> String {
    let mut out = String::from("replica,u,L,n_vertices,n_edges,largest_cluster,crossing,M0,N0\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.replica,
            num(r.u),
            num(r.l),
            r.n_vertices,
            r.n_edges,
            r.largest_cluster,
            u8::from(r.crossing),
            r.m0,
            r.n0
        ));
    }
    out
}

pub fn regime_csv(rows: &[RegimeRow]) -> String {
    let mut out = String::from("label,density,robustness,reasons\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.label,
            r.verdict.density,
            r.verdict.robustness,
            r.verdict.reasons.join(";")
        ));
    }
    out
}

/// One row per grid point: the chosen margin and the relative truncation
/// bias it leaves (inf for heavy tails under a quantile margin).
pub struct MarginRow {
    pub u: f64,
    pub l: f64,
    pub margin: f64,
    pub residual_relative: f64,
    pub heavy_tail: bool,
}

pub fn margin_csv(rows: &[MarginRow]) -> String {
    let mut out = String::from("u,L,margin,residual_relative,heavy_tail\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            num(r.u),
            num(r.l),
            num(r.margin),
            num(r.residual_relative),
            u8::from(r.heavy_tail)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use boolmodel::criteria::{Density, Robustness, Verdict};

    #[test]
    fn estimate_rows_round_cleanly() {
        let rows = vec![EstimateRow {
            u: 0.1,
            l: 50.0,
            stat: "crossing".into(),
            estimate: 0.5,
            lo: 0.25,
            hi: 0.75,
            n: 200,
            taint: vec!["gjk".into(), "heavy-margin".into()],
        }];
        assert_eq!(
            estimates_csv(&rows),
            "u,L,stat,estimate,lo,hi,n,taint\n0.1,50,crossing,0.5,0.25,0.75,200,gjk;heavy-margin\n"
        );
    }

    #[test]
    fn cluster_rows_use_01_for_crossing() {
        let rows = vec![ReplicaRow {
            replica: 3,
            u: 2.0,
            l: 20.0,
            n_vertices: 800,
            n_edges: 2400,
            largest_cluster: 795,
            crossing: true,
            m0: 2,
            n0: 7,
        }];
        assert_eq!(
            clusters_csv(&rows),
            "replica,u,L,n_vertices,n_edges,largest_cluster,crossing,M0,N0\n3,2,20,800,2400,795,1,2,7\n"
        );
    }

    #[test]
    fn regime_rows_join_reasons() {
        let rows = vec![RegimeRow {
            label: "long-short d=2 m=1 alpha=1.5".into(),
            verdict: Verdict {
                density: Density::Sparse,
                robustness: Robustness::Robust,
                reasons: vec!["witness k=1".into(), "vol-l1=true".into()],
            },
        }];
        assert_eq!(
            regime_csv(&rows),
            "label,density,robustness,reasons\nlong-short d=2 m=1 alpha=1.5,Sparse,Robust,witness k=1;vol-l1=true\n"
        );
    }
}
