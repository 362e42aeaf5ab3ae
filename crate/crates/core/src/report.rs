//! Markdown consolidation report: one table per group, members ordered by
//! importance, followed by the unassigned issues.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::grouping::{Grouping, Method};

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace(['\n', '\r'], " ")
}

pub fn markdown_report(grouping: &Grouping, corpus: &Corpus) -> Result<String> {
    let corpus_ids: BTreeSet<&str> = corpus.ids().collect();
    let universe = grouping.universe();
    if universe != corpus_ids {
        let diff: Vec<&str> = universe
            .symmetric_difference(&corpus_ids)
            .copied()
            .collect();
        return Err(Error::Validation(format!(
            "grouping and corpus cover different ids; symmetric difference: {diff:?}"
        )));
    }

    let mut out = String::new();
    let _ = writeln!(out, "# Issue groups ({} method)\n", grouping.method);
    let _ = writeln!(
        out,
        "Corpus `{}`: {} issues, {} groups, {} unassigned.\n",
        corpus.source,
        corpus.len(),
        grouping.groups.len(),
        grouping.noise.len()
    );
    match grouping.method {
        Method::Graph => {
            let _ = writeln!(
                out,
                "Importance is the PageRank score in the 1-NN similarity graph.\n"
            );
        }
        Method::Cluster => {
            let _ = writeln!(
                out,
                "Importance is an extension for this method: the mean cosine similarity of an \
                 issue to the other members of its cluster, normalized per group.\n"
            );
        }
    }
    let mixed = grouping
        .groups
        .iter()
        .filter(|g| {
            g.ids
                .iter()
                .filter_map(|id| corpus.get(id))
                .map(|i| i.working_group.as_str())
                .collect::<BTreeSet<_>>()
                .len()
                >= 2
        })
        .count();
    let _ = writeln!(
        out,
        "{mixed} of {} groups contain issues from at least 2 working groups.\n",
        grouping.groups.len()
    );

    for (k, group) in grouping.groups.iter().enumerate() {
        let wgs: BTreeSet<&str> = group
            .ids
            .iter()
            .filter_map(|id| corpus.get(id))
            .map(|i| i.working_group.as_str())
            .collect();
        let _ = writeln!(
            out,
            "## Group {} ({} issues, {} working groups)\n",
            k + 1,
            group.len(),
            wgs.len()
        );
        let _ = writeln!(out, "| rank | id | working group | importance | title |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for (rank, id) in group.ids.iter().enumerate() {
            let issue = corpus.get(id).expect("ids checked");
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.4} | {} |",
                rank + 1,
                cell(id),
                cell(&issue.working_group),
                group.importance[id],
                cell(&issue.title)
            );
        }
        out.push('\n');
    }

    let _ = writeln!(out, "## Unassigned issues\n");
    if grouping.noise.is_empty() {
        let _ = writeln!(out, "None.");
    } else {
        let _ = writeln!(out, "| id | working group | title |");
        let _ = writeln!(out, "|---|---|---|");
        for id in &grouping.noise {
            let issue = corpus.get(id).expect("ids checked");
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                cell(id),
                cell(&issue.working_group),
                cell(&issue.title)
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Issue;
    use crate::grouping::Group;

    fn corpus() -> Corpus {
        Corpus::new(
            vec![
                Issue::new("T1", "technical", "Training data not representative", ""),
                Issue::new("E1", "ethics", "Disparate treatment | unknown", ""),
                Issue::new("T2", "technical", "Device-specific training", ""),
                Issue::new("S1", "social", "Unrelated", ""),
            ],
            "fixture.csv",
        )
        .unwrap()
    }

    #[test]
    fn groups_listed_by_importance_with_noise_section() {
        let g = Grouping {
            method: Method::Cluster,
            groups: vec![Group::from_scores(vec![
                ("T2".into(), 0.2),
                ("T1".into(), 0.5),
                ("E1".into(), 0.3),
            ])],
            noise: vec!["S1".into()],
        };
        let md = markdown_report(&g, &corpus()).unwrap();
        let t1 = md.find("| 1 | T1 |").unwrap();
        let e1 = md.find("| 2 | E1 |").unwrap();
        let t2 = md.find("| 3 | T2 |").unwrap();
        assert!(t1 < e1 && e1 < t2);
        assert!(md.contains("(3 issues, 2 working groups)"));
        assert!(md.contains("1 of 1 groups contain issues from at least 2 working groups"));
        assert!(md.contains("Disparate treatment \\| unknown"));
        assert!(md.contains("| S1 | social | Unrelated |"));
        assert!(md.contains("extension"));
    }

    #[test]
    fn id_mismatch_is_rejected() {
        let g = Grouping {
            method: Method::Graph,
            groups: vec![Group::from_scores(vec![
                ("T1".into(), 0.5),
                ("X".into(), 0.5),
            ])],
            noise: vec![],
        };
        assert!(matches!(
            markdown_report(&g, &corpus()),
            Err(Error::Validation(_))
        ));
    }
}
