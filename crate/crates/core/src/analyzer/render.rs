use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::VisemeDistribution;
use crate::error::{Error, Result};
use crate::learner::TrainingTrace;
use crate::viseme::{VisemeClass, VisemeLabel};

use super::critical::{detect_critical_period, DetectionParams};
use super::cross::CrossInferenceReport;

const CELL_W: usize = 16;
const CELL_H: usize = 14;
const LEFT: usize = 64;
const TOP: usize = 36;
pub const BAR_PLOT_HEIGHT: f64 = 200.0;
const BAR_W: usize = 8;

/// Colours of the four bar families, in drawing order.
pub const BAR_FAMILIES: [(&str, &str); 4] = [
    ("mono-mandarin", "#1b9e77"),
    ("mono-english", "#d95f02"),
    ("switch-at-cp", "#7570b3"),
    ("switch-at-convergence", "#e7298a"),
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open_svg(width: usize, height: usize) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n\
         <!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"10\">\n\
         <rect class=\"background\" x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    )
}

/// White to dark blue.
fn shade(accuracy: f64) -> String {
    let a = accuracy.clamp(0.0, 1.0);
    let lerp = |lo: f64, hi: f64| (lo + (hi - lo) * a).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(247.0, 8.0), lerp(251.0, 48.0), lerp(255.0, 107.0))
}

/// Epochs along x, visemes along y; the `cp_epoch` column is outlined red.
pub fn heatmap_svg(trace: &TrainingTrace, cp_epoch: Option<u32>) -> Result<String> {
    if trace.records.is_empty() || trace.inventory.is_empty() {
        return Err(Error::EmptyInput("trace has no cells to draw".into()));
    }
    let epochs = trace.records.len();
    let visemes = trace.inventory.len();
    let width = LEFT + epochs * CELL_W + 20;
    let height = TOP + visemes * CELL_H + 40;
    let mut svg = open_svg(width, height);
    writeln!(
        svg,
        "<text x=\"{LEFT}\" y=\"20\" font-size=\"12\">{} (inventory {})</text>",
        escape(&trace.protocol.family()),
        trace.inventory_hash_hex()
    )
    .unwrap();
    for (v, label) in trace.inventory.iter().enumerate() {
        let y = TOP + v * CELL_H + CELL_H - 3;
        writeln!(svg, "<text class=\"viseme\" x=\"{}\" y=\"{y}\" text-anchor=\"end\">{}</text>", LEFT - 4, escape(label)).unwrap();
    }
    for (e, record) in trace.records.iter().enumerate() {
        let x = LEFT + e * CELL_W;
        if epochs <= 20 || record.epoch % 5 == 0 || e == 0 {
            writeln!(
                svg,
                "<text class=\"epoch\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                x + CELL_W / 2,
                TOP + visemes * CELL_H + 14,
                record.epoch
            )
            .unwrap();
        }
        for (v, acc) in record.per_viseme.iter().enumerate() {
            let y = TOP + v * CELL_H;
            let (class, fill) = match acc {
                Some(a) => ("cell", shade(*a)),
                None => ("cell absent", "#dddddd".to_string()),
            };
            writeln!(
                svg,
                "<rect class=\"{class}\" x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{CELL_H}\" fill=\"{fill}\"/>"
            )
            .unwrap();
        }
    }
    if let Some(cp) = cp_epoch {
        if let Some(e) = trace.records.iter().position(|r| r.epoch == cp) {
            writeln!(
                svg,
                "<rect class=\"cp\" x=\"{}\" y=\"{TOP}\" width=\"{CELL_W}\" height=\"{}\" fill=\"none\" stroke=\"#ff0000\" stroke-width=\"2\"/>",
                LEFT + e * CELL_W,
                visemes * CELL_H
            )
            .unwrap();
        }
    }
    writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">epoch</text>",
        LEFT + epochs * CELL_W / 2,
        height - 6
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Detects the critical period with `params`, draws the heatmap and returns
/// the detected epoch. Traces under 3 epochs are drawn without an outline.
pub fn render_heatmap(trace: &TrainingTrace, params: &DetectionParams, out: impl AsRef<Path>) -> Result<Option<u32>> {
    let cp = if trace.records.len() >= 3 {
        detect_critical_period(trace, params)?.cp_epoch
    } else {
        None
    };
    write_file(out.as_ref(), &heatmap_svg(trace, cp)?)?;
    Ok(cp)
}

fn legend(svg: &mut String, x0: usize, y: usize) {
    for (i, (name, colour)) in BAR_FAMILIES.iter().enumerate() {
        let x = x0 + i * 140;
        writeln!(
            svg,
            "<rect class=\"legend\" x=\"{x}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{colour}\"/>\n\
             <text x=\"{}\" y=\"{y}\">{name}</text>",
            y - 9,
            x + 14
        )
        .unwrap();
    }
}

/// Grouped bars: per viseme, the four families in [`BAR_FAMILIES`] order.
/// Bar height is `accuracy * BAR_PLOT_HEIGHT` pixels.
pub fn bars_svg(report: &CrossInferenceReport) -> String {
    let group_w = BAR_W * 4 + 10;
    let mut rows: Vec<_> = report.visemes.iter().collect();
    rows.sort_by(|a, b| a.class.cmp(&b.class).then_with(|| a.label.cmp(&b.label)));
    let plot_w = (rows.len() * group_w).max(560);
    let width = LEFT + plot_w + 20;
    let base = TOP + 20 + BAR_PLOT_HEIGHT as usize;
    let height = base + 40;
    let mut svg = open_svg(width, height);
    legend(&mut svg, LEFT, TOP);
    if !rows.is_empty() {
        writeln!(
            svg,
            "<line x1=\"{LEFT}\" y1=\"{base}\" x2=\"{}\" y2=\"{base}\" stroke=\"#000000\"/>",
            LEFT + rows.len() * group_w
        )
        .unwrap();
    }
    for (g, row) in rows.iter().enumerate() {
        let x0 = LEFT + g * group_w;
        let values = [row.mono_mandarin, row.mono_english, row.at_cp, row.at_convergence];
        for (k, value) in values.iter().enumerate() {
            let Some(acc) = value else { continue };
            let h = acc.clamp(0.0, 1.0) * BAR_PLOT_HEIGHT;
            let (family, colour) = BAR_FAMILIES[k];
            writeln!(
                svg,
                "<rect class=\"bar {family}\" x=\"{}\" y=\"{:.2}\" width=\"{BAR_W}\" height=\"{h:.2}\" fill=\"{colour}\"><title>{} {family} {acc:.4}</title></rect>",
                x0 + k * BAR_W,
                base as f64 - h,
                escape(&row.label)
            )
            .unwrap();
        }
        writeln!(
            svg,
            "<text class=\"viseme\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            x0 + 2 * BAR_W,
            base + 14,
            escape(&row.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn render_bars(report: &CrossInferenceReport, out: impl AsRef<Path>) -> Result<()> {
    write_file(out.as_ref(), &bars_svg(report))
}

fn class_colour(class: VisemeClass) -> &'static str {
    match class {
        VisemeClass::Common => "#4c72b0",
        VisemeClass::EnglishOnly => "#dd8452",
        VisemeClass::MandarinOnly => "#55a868",
    }
}

/// Occurrence counts per viseme, descending, coloured by class.
pub fn distribution_svg(dist: &VisemeDistribution) -> String {
    let rows = dist.sorted_desc();
    let max = rows.first().map_or(1, |r| r.1.max(1)) as f64;
    let group_w = 24;
    let width = LEFT + (rows.len() * group_w).max(420) + 20;
    let base = TOP + 20 + BAR_PLOT_HEIGHT as usize;
    let mut svg = open_svg(width, base + 40);
    for (i, class) in VisemeClass::ALL.iter().enumerate() {
        let x = LEFT + i * 140;
        writeln!(
            svg,
            "<rect class=\"legend\" x=\"{x}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n<text x=\"{}\" y=\"{TOP}\">{} ({})</text>",
            TOP - 9,
            class_colour(*class),
            x + 14,
            class.name(),
            dist.class_total(*class)
        )
        .unwrap();
    }
    for (i, (label, count)) in rows.iter().enumerate() {
        let class = VisemeLabel::parse_rendered(label).map_or(VisemeClass::Common, |l| l.class);
        let h = *count as f64 / max * BAR_PLOT_HEIGHT;
        let x = LEFT + i * group_w + 4;
        writeln!(
            svg,
            "<rect class=\"bar\" x=\"{x}\" y=\"{:.2}\" width=\"16\" height=\"{h:.2}\" fill=\"{}\"><title>{} {count}</title></rect>\n\
             <text class=\"viseme\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            base as f64 - h,
            class_colour(class),
            escape(label),
            x + 8,
            base + 14,
            escape(label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::fixtures::mono;
    use crate::analyzer::VisemeBars;

    fn parse(svg: &str) -> roxmltree::Document<'_> {
        roxmltree::Document::parse_with_options(
            svg,
            roxmltree::ParsingOptions {
                allow_dtd: true,
                ..Default::default()
            },
        )
        .expect("well-formed SVG")
    }

    fn with_class<'a>(doc: &'a roxmltree::Document, class: &str) -> Vec<roxmltree::Node<'a, 'a>> {
        doc.descendants().filter(|n| n.attribute("class") == Some(class)).collect()
    }

    #[test]
    fn one_cell_heatmap_parses() {
        let svg = heatmap_svg(&mono(&["a"], &[vec![0.5]]), None).unwrap();
        let doc = parse(&svg);
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert_eq!(with_class(&doc, "cell").len(), 1);
        assert!(with_class(&doc, "cp").is_empty());
    }

    #[test]
    fn heatmap_has_a_cell_per_epoch_and_viseme() {
        let rows: Vec<Vec<f64>> = (0..7).map(|e| vec![0.1 * e as f64, 0.05 * e as f64, 0.3]).collect();
        let trace = mono(&["a", "b<", "c"], &rows);
        let svg = heatmap_svg(&trace, Some(4)).unwrap();
        let doc = parse(&svg);
        assert_eq!(with_class(&doc, "cell").len(), 21);
        let cp = with_class(&doc, "cp");
        assert_eq!(cp.len(), 1);
        assert_eq!(cp[0].attribute("stroke"), Some("#ff0000"));
        assert_eq!(svg, heatmap_svg(&trace, Some(4)).unwrap());
    }

    #[test]
    fn empty_trace_is_an_error() {
        assert!(heatmap_svg(&mono(&["a"], &[]), None).is_err());
    }

    #[test]
    fn empty_report_draws_only_the_legend() {
        let svg = bars_svg(&CrossInferenceReport::from_visemes(Vec::new()));
        let doc = parse(&svg);
        assert_eq!(with_class(&doc, "legend").len(), 4);
        assert!(doc.descendants().all(|n| !n.attribute("class").unwrap_or("").starts_with("bar")));
    }

    #[test]
    fn bar_heights_encode_accuracy() {
        let bars = vec![
            VisemeBars {
                label: "p".into(),
                class: VisemeClass::Common,
                mono_mandarin: Some(0.91),
                mono_english: Some(0.873),
                at_cp: Some(0.5),
                at_convergence: None,
            },
            VisemeBars {
                label: "th_E".into(),
                class: VisemeClass::EnglishOnly,
                mono_mandarin: None,
                mono_english: Some(0.333),
                at_cp: Some(0.02),
                at_convergence: Some(1.0),
            },
        ];
        let report = CrossInferenceReport::from_visemes(bars.clone());
        let svg = bars_svg(&report);
        assert_eq!(svg, bars_svg(&report));
        let doc = parse(&svg);
        let drawn: Vec<_> = doc
            .descendants()
            .filter(|n| n.attribute("class").is_some_and(|c| c.starts_with("bar ")))
            .collect();
        assert_eq!(drawn.len(), 6);
        for node in drawn {
            let family = node.attribute("class").unwrap().strip_prefix("bar ").unwrap();
            let title = node.first_element_child().unwrap().text().unwrap();
            let row = bars.iter().find(|b| title.starts_with(&format!("{} ", b.label))).unwrap();
            let k = BAR_FAMILIES.iter().position(|f| f.0 == family).unwrap();
            let expected = [row.mono_mandarin, row.mono_english, row.at_cp, row.at_convergence][k].unwrap();
            let height: f64 = node.attribute("height").unwrap().parse().unwrap();
            let decoded = height / BAR_PLOT_HEIGHT;
            assert!((decoded - expected).abs() <= 0.005 * expected.max(0.01), "{family} {decoded} vs {expected}");
        }
    }
}
