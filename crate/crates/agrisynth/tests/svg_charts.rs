use agrisynth::demo::bundled_trials;
use agrisynth::visualize::{render_compare, render_heatmap, render_histogram, render_timeseries, ChartSpec, VizError};
use agrisynth_core::{Column, Date, Table};
use proptest::prelude::*;
use roxmltree::{Document, Node};

const PLOT_TOP: f64 = 36.0;
const PLOT_BOTTOM_MARGIN: f64 = 48.0;

fn attr(n: &Node, name: &str) -> f64 {
    n.attribute(name).unwrap().parse().unwrap()
}

/// Parse, then check every coordinate lies inside the viewBox.
fn check_svg(svg: &str) -> Document<'_> {
    let doc = Document::parse(svg).expect("well-formed XML");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    let vb: Vec<f64> = root.attribute("viewBox").unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
    let (w, h) = (vb[2], vb[3]);
    let inside = |x: f64, y: f64| (0.0..=w).contains(&x) && (0.0..=h).contains(&y);
    for n in doc.descendants().filter(Node::is_element) {
        for (xa, ya) in [("x", "y"), ("x1", "y1"), ("x2", "y2"), ("cx", "cy")] {
            if let (Some(x), Some(y)) = (n.attribute(xa), n.attribute(ya)) {
                let (x, y) = (x.parse().unwrap(), y.parse().unwrap());
                assert!(inside(x, y), "{} at ({x}, {y})", n.tag_name().name());
            }
        }
        if n.tag_name().name() == "rect" {
            let (x, y, rw, rh) = (attr(&n, "x"), attr(&n, "y"), attr(&n, "width"), attr(&n, "height"));
            assert!(rw >= 0.0 && rh >= 0.0);
            assert!(x + rw <= w + 1e-6 && y + rh <= h + 1e-6);
        }
        if let Some(points) = n.attribute("points") {
            for p in points.split_whitespace() {
                let (x, y) = p.split_once(',').unwrap();
                assert!(inside(x.parse().unwrap(), y.parse().unwrap()), "point {p}");
            }
        }
    }
    doc
}

fn group<'a>(doc: &'a Document, class: &str, series: Option<&str>) -> Node<'a, 'a> {
    doc.descendants()
        .find(|n| n.attribute("class") == Some(class) && (series.is_none() || n.attribute("data-series") == series))
        .unwrap()
}

fn bar_heights(doc: &Document, series: &str) -> Vec<f64> {
    group(doc, "bars", Some(series)).children().filter(Node::is_element).map(|r| attr(&r, "height")).collect()
}

/// Counts per equal-width bin over `[lo, hi]`, last bin closed.
fn counts(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut c = vec![0.0; bins];
    for &x in xs {
        let i = (((x - lo) / (hi - lo)) * bins as f64).floor() as usize;
        c[i.min(bins - 1)] += 1.0;
    }
    c
}

#[test]
fn histogram_bars_are_proportional_to_counts() {
    let y = bundled_trials().float("yield_kgha").unwrap().to_vec();
    let spec = ChartSpec { bins: 12, ..ChartSpec::titled("yield <kg/ha> & more") };
    let svg = render_histogram(&y, &spec).unwrap();
    let doc = check_svg(&svg);
    assert!(doc.descendants().any(|n| n.text() == Some("yield <kg/ha> & more")));
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let expected = counts(&y, lo, hi, 12);
    let max = expected.iter().copied().fold(0.0, f64::max);
    let plot_h = spec.height as f64 - PLOT_TOP - PLOT_BOTTOM_MARGIN;
    let heights = bar_heights(&doc, "sample");
    assert_eq!(heights.len(), 12);
    for (h, c) in heights.iter().zip(&expected) {
        assert!((h - c / max * plot_h).abs() <= 0.011, "{h} vs {}", c / max * plot_h);
    }
}

#[test]
fn comparison_has_both_series_and_a_legend() {
    let t = bundled_trials();
    let y = t.float("yield_kgha").unwrap();
    let (real, synth) = y.split_at(600);
    let doc_text = render_compare(real, synth, &ChartSpec::titled("compare")).unwrap();
    let doc = check_svg(&doc_text);
    assert_eq!(bar_heights(&doc, "real").len(), 20);
    assert_eq!(bar_heights(&doc, "synthetic").len(), 20);
    let labels: Vec<_> = doc.descendants().filter(|n| n.attribute("class") == Some("legend")).map(|g| {
        g.children().find(|c| c.tag_name().name() == "text").unwrap().text().unwrap().to_string()
    }).collect();
    assert_eq!(labels, ["real", "synthetic"]);
}

#[test]
fn timeseries_has_one_line_per_column() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/weather.csv")).unwrap();
    let t = agrisynth::csv_io::read_csv_from(text.as_bytes(), None).unwrap();
    let svg = render_timeseries(&t, "date", &["tmin", "tmax"], &ChartSpec::titled("temps")).unwrap();
    let doc = check_svg(&svg);
    let lines: Vec<_> = doc.descendants().filter(|n| n.tag_name().name() == "polyline").collect();
    assert_eq!(lines.len(), 2);
    for l in &lines {
        assert_eq!(l.attribute("points").unwrap().split_whitespace().count(), t.n_rows());
    }
}

#[test]
fn unsorted_dates_are_rejected() {
    let d = |s: &str| s.parse::<Date>().unwrap();
    let t = Table::from_columns([
        ("date", Column::Date(vec![d("2024-01-02"), d("2024-01-01")])),
        ("v", Column::Float(vec![1.0, 2.0])),
    ])
    .unwrap();
    assert!(matches!(render_timeseries(&t, "date", &["v"], &ChartSpec::default()), Err(VizError::UnsortedX(_))));
}

#[test]
fn heatmap_has_one_cell_per_grid_point() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/soil_grid.csv")).unwrap();
    let t = agrisynth::csv_io::read_csv_from(text.as_bytes(), None).unwrap();
    let svg = render_heatmap(&t, "x", "y", "value", &ChartSpec::titled("organic matter")).unwrap();
    let doc = check_svg(&svg);
    let cells = group(&doc, "cells", None).children().filter(Node::is_element).count();
    assert_eq!(cells, 24 * 16);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_finite_sample_renders_inside_the_view_box(
        xs in prop::collection::vec(-1e6f64..1e6, 1..200),
        bins in 1usize..40,
        width in 90u32..1200,
        height in 94u32..900,
        title in "[ -~]{0,20}",
    ) {
        let spec = ChartSpec { bins, width, height, ..ChartSpec::titled(&title) };
        let svg = render_histogram(&xs, &spec).unwrap();
        check_svg(&svg);
        let t = Table::from_columns([
            ("i", Column::Float((0..xs.len()).map(|i| i as f64).collect())),
            ("v", Column::Float(xs.clone())),
        ]).unwrap();
        check_svg(&render_timeseries(&t, "i", &["v"], &spec).unwrap());
    }
}
