use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::stats::BoxplotSummary;

use super::{real, svg, AnalysisReport};

fn nodes_csv(r: &AnalysisReport) -> String {
    let mut s = String::from("resident_id,ec,position_score\n");
    for n in &r.shape.nodes {
        let _ = writeln!(s, "{},{},{}", n.resident_id, real(n.ec), real(n.position_score));
    }
    s
}

fn edges_csv(r: &AnalysisReport) -> String {
    let mut s = String::from("corrector_id,corrected_id,weight\n");
    for e in &r.shape.edges {
        let _ = writeln!(s, "{},{},{}", e.corrector_id, e.corrected_id, e.weight);
    }
    s
}

fn histogram_csv(r: &AnalysisReport) -> String {
    let mut s = String::from("bin_low,bin_high,count\n");
    for b in &r.shape.histogram {
        let _ = writeln!(s, "{},{},{}", real(b.bin_low), real(b.bin_high), b.count);
    }
    s
}

fn kde_csv(r: &AnalysisReport) -> String {
    let mut s = String::from("x,density\n");
    for (x, d) in r.shape.kde.iter().flat_map(|k| &k.points) {
        let _ = writeln!(s, "{},{}", real(*x), real(*d));
    }
    s
}

fn curve_csv(r: &AnalysisReport) -> String {
    let mut s = String::from("program_week,mean,n\n");
    for p in &r.seniority.curve {
        let _ = writeln!(s, "{},{},{}", p.program_week, real(p.mean), p.n);
    }
    s
}

fn boxplot_csv(r: &AnalysisReport) -> String {
    let mut s = String::from("group,n,whisker_low,q1,median,q3,whisker_high,outliers\n");
    let groups: [(&str, &Option<BoxplotSummary>); 2] = [
        ("first4", &r.seniority.boxplot_first4),
        ("last4", &r.seniority.boxplot_last4),
    ];
    for (name, b) in groups {
        let Some(b) = b else { continue };
        let outliers: Vec<String> = b.outliers.iter().map(|v| real(*v)).collect();
        let _ = writeln!(
            s,
            "{name},{},{},{},{},{},{},{}",
            b.n,
            real(b.whisker_low),
            real(b.q1),
            real(b.median),
            real(b.q3),
            real(b.whisker_high),
            outliers.join(";")
        );
    }
    s
}

fn probcurve_csv(r: &AnalysisReport) -> String {
    let mut s = String::from("x,probability\n");
    for p in &r.graduation.prob_curve {
        let _ = writeln!(s, "{},{}", real(p.x), real(p.probability));
    }
    s
}

/// Writes the plot-ready CSV for each figure (and, with `svg`, a static
/// rendering of each) into `dir`. Everything is derived from `report`.
pub fn emit_figures(report: &AnalysisReport, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = vec![
        ("fig1_network_nodes.csv", nodes_csv(report)),
        ("fig1_network_edges.csv", edges_csv(report)),
        ("fig2_histogram.csv", histogram_csv(report)),
        ("fig2_kde.csv", kde_csv(report)),
        ("fig3_curve.csv", curve_csv(report)),
        ("fig4_boxplot.csv", boxplot_csv(report)),
        ("fig5_probcurve.csv", probcurve_csv(report)),
    ];
    if svg {
        files.extend([
            ("fig1_network.svg", svg::network(report)),
            ("fig2_histogram.svg", svg::histogram(report)),
            ("fig3_curve.svg", svg::curve(report)),
            ("fig4_boxplot.svg", svg::boxplots(report)),
            ("fig5_probcurve.svg", svg::probcurve(report)),
        ]);
    }
    files
        .into_iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{run_pipeline, AnalysisParams};
    use crate::simulation::{simulate, SimulationConfig};
    use crate::stats::predicted_probability;

    fn report() -> AnalysisReport {
        let s = simulate(&SimulationConfig {
            n_residents: 14,
            weeks: 50,
            seed: 5,
            ..Default::default()
        })
        .unwrap();
        run_pipeline(&s.events, &s.roster, &AnalysisParams::default()).unwrap()
    }

    fn rows(path: &Path) -> Vec<Vec<String>> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn writes_every_figure() {
        let r = report();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_figures(&r, dir.path(), true).unwrap();
        assert_eq!(paths.len(), 12);
        for p in &paths {
            assert!(fs::metadata(p).unwrap().len() > 0, "{}", p.display());
        }
        let svg = fs::read_to_string(dir.path().join("fig2_histogram.svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn figure_consistency() {
        let r = report();
        let dir = tempfile::tempdir().unwrap();
        emit_figures(&r, dir.path(), false).unwrap();

        let nodes = rows(&dir.path().join("fig1_network_nodes.csv"));
        assert_eq!(nodes.len(), r.shape.n_nodes);
        for n in &nodes {
            let ec: f64 = n[1].parse().unwrap();
            let pos: f64 = n[2].parse().unwrap();
            assert_eq!(pos, 1.0 - ec);
        }

        let hist = rows(&dir.path().join("fig2_histogram.csv"));
        let total: usize = hist.iter().map(|r| r[2].parse::<usize>().unwrap()).sum();
        assert_eq!(total, r.shape.n_nodes);

        let prob = rows(&dir.path().join("fig5_probcurve.csv"));
        assert_eq!(prob.len(), 101);
        let p0: f64 = prob[0][1].parse().unwrap();
        assert_eq!(prob[0][0].parse::<f64>().unwrap(), 0.0);
        assert_eq!(prob[100][0].parse::<f64>().unwrap(), 1.0);
        assert_eq!(p0, predicted_probability(&r.graduation.fit.unwrap(), 0.0));

        let bx = fs::read_to_string(dir.path().join("fig4_boxplot.csv")).unwrap();
        assert!(bx.lines().nth(1).unwrap().starts_with("first4,"));
        assert!(bx.lines().nth(2).unwrap().starts_with("last4,"));
    }

    #[test]
    fn unwritable_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        assert!(matches!(emit_figures(&report(), &file, false), Err(Error::Io { .. })));
    }
}
