//! SVG heatmaps of clustered sequences: one document per cluster, one row
//! per sequence, one column per position.

use std::collections::BTreeMap;
use std::fmt::Write;

use amdc::seqcore::SequenceSet;
use anyhow::{bail, Result};

/// Colors for the Home / Work / Transport / Out states. Other states take
/// colors from [`FALLBACK_COLORS`] by alphabet index.
pub const HWTO_COLORS: [(&str, &str); 4] = [
    ("H", "#4e79a7"),
    ("W", "#f28e2b"),
    ("T", "#e15759"),
    ("O", "#59a14f"),
];

pub const FALLBACK_COLORS: [&str; 8] = [
    "#76b7b2", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d4a6c8",
];

/// Length of one day in 5-minute positions.
pub const DAY_POSITIONS: usize = 288;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    colors: BTreeMap<String, String>,
}

impl Palette {
    /// The default palette for an alphabet.
    pub fn for_symbols(symbols: &[String]) -> Self {
        let fixed: BTreeMap<&str, &str> = HWTO_COLORS.into_iter().collect();
        let colors = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let c = fixed
                    .get(s.as_str())
                    .copied()
                    .unwrap_or(FALLBACK_COLORS[i % FALLBACK_COLORS.len()]);
                (s.clone(), c.to_string())
            })
            .collect();
        Self { colors }
    }

    pub fn color(&self, symbol: &str) -> &str {
        self.colors.get(symbol).map_or("#000000", String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub plot_width: f64,
    /// Every panel has this plot height regardless of cluster size.
    pub panel_height: f64,
    /// Draw a vertical line every this many positions.
    pub separator_every: Option<usize>,
}

impl RenderOptions {
    /// Defaults for sequences of length `l`; sequences spanning several
    /// whole days get a separator between days.
    pub fn for_length(l: usize) -> Self {
        Self {
            plot_width: 864.0,
            panel_height: 360.0,
            separator_every: (l > DAY_POSITIONS && l.is_multiple_of(DAY_POSITIONS))
                .then_some(DAY_POSITIONS),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub cluster: usize,
    pub size: usize,
    pub percent: f64,
    pub svg: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub panels: Vec<Panel>,
    pub warnings: Vec<String>,
}

/// Fixed-precision number without trailing zeros, so output bytes do not
/// depend on float printing details.
fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const MARGIN: f64 = 10.0;
const HEADER: f64 = 34.0;
const LEGEND: f64 = 28.0;

pub fn render_clusters(
    set: &SequenceSet,
    assignments: &[usize],
    palette: &Palette,
    opts: &RenderOptions,
) -> Result<Rendered> {
    if assignments.len() != set.len() {
        bail!(
            "{} cluster assignments for {} sequences",
            assignments.len(),
            set.len()
        );
    }
    if !(opts.plot_width > 0.0 && opts.panel_height > 0.0) {
        bail!("plot dimensions must be positive");
    }
    let n = set.len();
    let l = set.seq_len();
    let p = assignments.iter().max().map_or(0, |&k| k + 1);
    let mut panels = Vec::new();
    let mut warnings = Vec::new();
    for k in 0..p {
        let members: Vec<usize> = (0..n).filter(|&i| assignments[i] == k).collect();
        if members.is_empty() {
            warnings.push(format!("cluster {k} has no sequences; skipped"));
            continue;
        }
        let percent = 100.0 * members.len() as f64 / n as f64;
        let svg = panel(set, k, &members, percent, palette, opts, l);
        panels.push(Panel {
            cluster: k,
            size: members.len(),
            percent,
            svg,
        });
    }
    Ok(Rendered { panels, warnings })
}

fn panel(
    set: &SequenceSet,
    k: usize,
    members: &[usize],
    percent: f64,
    palette: &Palette,
    opts: &RenderOptions,
    l: usize,
) -> String {
    let width = opts.plot_width + 2.0 * MARGIN;
    let height = HEADER + opts.panel_height + LEGEND + MARGIN;
    let cell_w = opts.plot_width / l as f64;
    let row_h = opts.panel_height / members.len() as f64;
    let alphabet = set.alphabet();

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(width),
        h = num(height)
    );
    let label = format!(
        "Cluster {k} ({:.1}% of sequences, n={})",
        percent,
        members.len()
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&label));
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##,
        num(width),
        num(height)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" font-family="sans-serif" font-size="14">{}</text>"#,
        num(MARGIN),
        escape(&label)
    );

    let _ = writeln!(out, r#"<g shape-rendering="crispEdges">"#);
    for (r, &i) in members.iter().enumerate() {
        let y = HEADER + r as f64 * row_h;
        let states = set.sequences()[i].states();
        let mut start = 0;
        while start < l {
            let s = states[start];
            let mut end = start + 1;
            while end < l && states[end] == s {
                end += 1;
            }
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                num(MARGIN + start as f64 * cell_w),
                num(y),
                num((end - start) as f64 * cell_w),
                num(row_h),
                palette.color(alphabet.symbol(s))
            );
            start = end;
        }
    }
    let _ = writeln!(out, "</g>");

    if let Some(every) = opts.separator_every.filter(|&e| e > 0 && e < l) {
        let _ = writeln!(out, r##"<g stroke="#000000" stroke-width="1.5">"##);
        for j in (every..l).step_by(every) {
            let x = num(MARGIN + j as f64 * cell_w);
            let _ = writeln!(
                out,
                r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#,
                num(HEADER),
                num(HEADER + opts.panel_height)
            );
        }
        let _ = writeln!(out, "</g>");
    }

    let y = HEADER + opts.panel_height + 8.0;
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="12">"#);
    for (idx, symbol) in alphabet.symbols().iter().enumerate() {
        let x = MARGIN + idx as f64 * 90.0;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            num(x),
            num(y),
            palette.color(symbol),
            num(x + 16.0),
            num(y + 11.0),
            escape(symbol)
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use amdc::seqcore::{Alphabet, Sequence};

    fn set(rows: &[&str]) -> SequenceSet {
        let a = Alphabet::parse("H,W,T,O").unwrap();
        let seqs = rows
            .iter()
            .enumerate()
            .map(|(i, r)| Sequence::new(format!("s{i}"), "g", a.encode(r).unwrap()).unwrap())
            .collect();
        SequenceSet::new(a, seqs).unwrap()
    }

    fn cells(svg: &str) -> usize {
        svg.lines()
            .filter(|l| l.starts_with("<rect x=") && l.contains("height=\"360\""))
            .count()
    }

    #[test]
    fn one_row_of_distinct_states() {
        let s = set(&["HWTO"]);
        let r = render_clusters(
            &s,
            &[0],
            &Palette::for_symbols(s.alphabet().symbols()),
            &RenderOptions::for_length(4),
        )
        .unwrap();
        assert_eq!(r.panels.len(), 1);
        assert_eq!(cells(&r.panels[0].svg), 4);
        for (_, color) in HWTO_COLORS {
            assert!(r.panels[0].svg.contains(color));
        }
    }

    #[test]
    fn runs_are_merged() {
        let s = set(&["HHHHWWHH"]);
        let r = render_clusters(
            &s,
            &[0],
            &Palette::for_symbols(s.alphabet().symbols()),
            &RenderOptions::for_length(8),
        )
        .unwrap();
        assert_eq!(cells(&r.panels[0].svg), 3);
    }

    #[test]
    fn percents_sum_to_hundred_and_empty_clusters_warn() {
        let s = set(&["HHHH", "WWWW", "TTTT"]);
        let r = render_clusters(
            &s,
            &[0, 2, 2],
            &Palette::for_symbols(s.alphabet().symbols()),
            &RenderOptions::for_length(4),
        )
        .unwrap();
        assert_eq!(r.panels.len(), 2);
        assert_eq!(r.warnings.len(), 1);
        let total: f64 = r.panels.iter().map(|p| p.percent).sum();
        assert!((total - 100.0).abs() < 1e-9);
        assert!(r.panels[0].svg.contains("33.3%"));
    }

    #[test]
    fn week_sequences_get_day_separators() {
        let row = "H".repeat(1440);
        let s = set(&[row.as_str()]);
        let opts = RenderOptions::for_length(1440);
        assert_eq!(opts.separator_every, Some(288));
        let r = render_clusters(
            &s,
            &[0],
            &Palette::for_symbols(s.alphabet().symbols()),
            &opts,
        )
        .unwrap();
        assert_eq!(r.panels[0].svg.matches("<line ").count(), 4);
        assert_eq!(RenderOptions::for_length(288).separator_every, None);
    }

    #[test]
    fn output_is_stable() {
        let s = set(&["HWWO", "TTOO"]);
        let pal = Palette::for_symbols(s.alphabet().symbols());
        let a = render_clusters(&s, &[0, 0], &pal, &RenderOptions::for_length(4)).unwrap();
        let b = render_clusters(&s, &[0, 0], &pal, &RenderOptions::for_length(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(num(1.0 / 3.0), "0.333");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(-0.0001), "0");
    }
}
