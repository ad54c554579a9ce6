//! Static SVG rendering of planar fixtures: shaded sets, indexed sequence
//! markers and shift arrows. Output depends only on the scene.

use crate::error::{Error, Result};
use crate::extremality::SequenceSpec;
use crate::geometry::{Point, SetExpr};
use crate::optimization::{embed_with_level, lift_sequence, OptBudget, Problem};
use crate::registry::{ExampleEntry, Fact, Fixture};
use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 640.0;
const MARGIN: f64 = 40.0;
const CELLS: usize = 160;
const POINTS: u64 = 8;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Scene {
    pub title: String,
    pub sets: Vec<SetExpr>,
    pub sequences: Vec<(String, SequenceSpec)>,
    /// `(from, to)` in data coordinates.
    pub arrows: Vec<(Point, Point)>,
}

fn embedded(problem: &Problem, seqs: Vec<(String, SequenceSpec)>) -> Result<(Vec<SetExpr>, Vec<(String, SequenceSpec)>)> {
    let mu0 = problem.level_or_estimate(&OptBudget::default())?;
    let (a, b) = embed_with_level(problem, mu0);
    let lifted = seqs.into_iter().map(|(l, s)| Ok((l, lift_sequence(&s, mu0)?))).collect::<Result<Vec<_>>>()?;
    Ok((vec![a, b], lifted))
}

impl Scene {
    /// Problem entries are drawn through their planar pair `(epi f, Ω × (-∞, μ0])`.
    pub fn from_entry(e: &ExampleEntry) -> Result<Self> {
        let seqs: Vec<(String, SequenceSpec)> = e.sequences.iter().map(|s| (s.label.clone(), s.seq.clone())).collect();
        let (sets, sequences) = match &e.fixture {
            Fixture::Sets { sets } => (sets.clone(), seqs),
            Fixture::Problem { problem } => embedded(problem, seqs)?,
        };
        let mut arrows = Vec::new();
        for f in &e.facts {
            if let Fact::ShiftEmpty { bases, shifts, .. } = &f.fact {
                for (x, a) in bases.iter().zip(shifts) {
                    if !a.is_zero() {
                        arrows.push((x.clone(), x + a));
                    }
                }
            }
        }
        let s = Scene { title: format!("{}: {}", e.id, e.description), sets, sequences, arrows };
        s.check_planar()?;
        Ok(s)
    }

    pub fn from_parts(title: &str, sets: Option<&[SetExpr]>, problem: Option<&Problem>, seq: Option<&SequenceSpec>) -> Result<Self> {
        let seqs: Vec<(String, SequenceSpec)> = seq.into_iter().map(|s| ("sequence".to_string(), s.clone())).collect();
        let (sets, sequences) = match (sets, problem) {
            (Some(s), _) => (s.to_vec(), seqs),
            (None, Some(p)) => embedded(p, seqs)?,
            (None, None) => return Err(Error::Config("nothing to plot: no `sets` or `problem`".into())),
        };
        let s = Scene { title: title.into(), sets, sequences, arrows: vec![] };
        s.check_planar()?;
        Ok(s)
    }

    fn check_planar(&self) -> Result<()> {
        for s in &self.sets {
            if s.dim() != 2 {
                return Err(Error::DimensionUnsupported(s.dim()));
            }
        }
        for (_, q) in &self.sequences {
            if q.dim() != 2 {
                return Err(Error::DimensionUnsupported(q.dim()));
            }
        }
        Ok(())
    }

    fn points(&self) -> Result<Vec<(usize, u64, Point)>> {
        let mut out = Vec::new();
        for (i, (_, q)) in self.sequences.iter().enumerate() {
            let kmax = q.k_max().map_or(POINTS, |m| m.min(POINTS));
            for k in 1..=kmax {
                for p in q.eval(k)? {
                    if p.coords().iter().all(|c| c.is_finite()) {
                        out.push((i, k, p));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Data window: the bounding box of the drawn points, padded.
    fn window(&self, pts: &[(usize, u64, Point)]) -> [f64; 4] {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in pts.iter().map(|t| &t.2).chain(self.arrows.iter().flat_map(|(a, b)| [a, b])) {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (-2.0, 2.0, -2.0, 2.0);
        }
        let pad = |lo: f64, hi: f64| {
            let span = (hi - lo).max(2.0);
            let mid = 0.5 * (lo + hi);
            (mid - 0.6 * span, mid + 0.6 * span)
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        [x0, x1, y0, y1]
    }

    pub fn render(&self) -> Result<String> {
        let pts = self.points()?;
        let [x0, x1, y0, y1] = self.window(&pts);
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<title>{}</title>"#, escape(&self.title));
        let _ = writeln!(s, r##"<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>"##);
        let _ = writeln!(
            s,
            r#"<clipPath id="frame"><rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}"/></clipPath>"#,
            W - 2.0 * MARGIN,
            H - 2.0 * MARGIN
        );
        let cw = (x1 - x0) / CELLS as f64;
        let ch = (y1 - y0) / CELLS as f64;
        for (i, set) in self.sets.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let _ = writeln!(s, r#"<g id="set{i}" fill="{color}" stroke="{color}" clip-path="url(#frame)">"#);
            if let SetExpr::Graph { f, domain } = set {
                // polyline per domain piece, broken at jumps and off-window values
                let n = 4 * CELLS;
                let mut seg: Vec<(f64, f64)> = Vec::new();
                let flush = |seg: &mut Vec<(f64, f64)>, s: &mut String| {
                    if seg.len() > 1 {
                        let d: Vec<String> = seg.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
                        let _ = writeln!(s, r#"<polyline fill="none" stroke-width="1.5" points="{}"/>"#, d.join(" "));
                    }
                    seg.clear();
                };
                for j in 0..=n {
                    let x = x0 + (x1 - x0) * j as f64 / n as f64;
                    let y = f.eval(x);
                    let ok = domain.iter().any(|d| d.contains(x)) && y.is_finite() && y >= y0 - (y1 - y0) && y <= y1 + (y1 - y0);
                    let jump = seg.last().is_some_and(|(_, py)| (py - y).abs() > 0.25 * (y1 - y0));
                    if !ok || jump {
                        flush(&mut seg, &mut s);
                    }
                    if ok {
                        seg.push((x, y));
                    }
                }
                flush(&mut seg, &mut s);
            } else {
                let thin = set.is_thin();
                for r in 0..CELLS {
                    let y = y0 + (r as f64 + 0.5) * ch;
                    let mut run: Option<usize> = None;
                    for c in 0..=CELLS {
                        let inside = c < CELLS && {
                            let x = x0 + (c as f64 + 0.5) * cw;
                            if thin {
                                set.violation(&[x, y]) <= 0.5 * cw.max(ch)
                            } else {
                                set.holds(&[x, y], 0.0)
                            }
                        };
                        match (inside, run) {
                            (true, None) => run = Some(c),
                            (false, Some(c0)) => {
                                let (px, py) = (sx(x0 + c0 as f64 * cw), sy(y0 + (r + 1) as f64 * ch));
                                let w = sx(x0 + c as f64 * cw) - px;
                                let h = sy(y0 + r as f64 * ch) - py;
                                let _ = writeln!(s, r#"<rect x="{px:.2}" y="{py:.2}" width="{w:.2}" height="{h:.2}" fill-opacity="0.25" stroke="none"/>"#);
                                run = None;
                            }
                            _ => {}
                        }
                    }
                }
            }
            let _ = writeln!(s, "</g>");
        }
        // axes
        let _ = writeln!(s, r##"<g stroke="#444444" stroke-width="0.8">"##);
        if x0 < 0.0 && x1 > 0.0 {
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{MARGIN}" x2="{:.2}" y2="{}"/>"#, sx(0.0), sx(0.0), H - MARGIN);
        }
        if y0 < 0.0 && y1 > 0.0 {
            let _ = writeln!(s, r#"<line x1="{MARGIN}" y1="{:.2}" x2="{}" y2="{:.2}"/>"#, sy(0.0), W - MARGIN, sy(0.0));
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, r#"<g id="sequences" font-family="sans-serif" font-size="10">"#);
        for (i, k, p) in &pts {
            let (x, y) = (sx(p[0]), sy(p[1]));
            if !(MARGIN..=W - MARGIN).contains(&x) || !(MARGIN..=H - MARGIN).contains(&y) {
                continue;
            }
            let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#000000" data-seq="{i}"/>"##);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{k}</text>"#, x + 4.0, y - 4.0);
        }
        let _ = writeln!(s, "</g>");
        if !self.arrows.is_empty() {
            let _ = writeln!(s, r##"<defs><marker id="head" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#ff7f0e"/></marker></defs>"##);
            for (a, b) in &self.arrows {
                let _ = writeln!(
                    s,
                    r##"<line class="shift" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#ff7f0e" stroke-width="1.5" marker-end="url(#head)"/>"##,
                    sx(a[0]),
                    sy(a[1]),
                    sx(b[0]),
                    sy(b[1])
                );
            }
        }
        let legend: Vec<String> = self.sequences.iter().map(|(l, q)| format!("{l}: {}", describe(q))).collect();
        for (j, l) in legend.iter().enumerate() {
            let _ = writeln!(s, r#"<text x="{MARGIN}" y="{:.0}" font-family="sans-serif" font-size="11">{}</text>"#, 14.0 + 13.0 * j as f64, escape(l));
        }
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="10">x in [{x0:.3}, {x1:.3}], y in [{y0:.3}, {y1:.3}]</text>"#, H - 12.0);
        s.push_str("</svg>\n");
        Ok(s)
    }
}

fn describe(q: &SequenceSpec) -> String {
    match q {
        SequenceSpec::ClosedForm { maps, .. } => {
            maps.iter().map(|m| format!("({})", m.iter().map(|e| e.source().to_string()).collect::<Vec<_>>().join(", "))).collect::<Vec<_>>().join(" / ")
        }
        SequenceSpec::Tabulated { points, .. } => format!("{} tabulated points", points.first().map_or(0, |p| p.len())),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::get_example;

    #[test]
    fn e15_scene_has_regions_points_and_shift() {
        let svg = Scene::from_entry(&get_example("E1.5").unwrap()).unwrap().render().unwrap();
        assert!(svg.contains(r#"id="set0""#) && svg.contains(r#"id="set1""#));
        assert!(svg.matches("<circle").count() >= 8);
        assert!(svg.contains(r#"class="shift""#));
        assert_eq!(svg, Scene::from_entry(&get_example("E1.5").unwrap()).unwrap().render().unwrap());
    }

    #[test]
    fn graphs_become_polylines() {
        let svg = Scene::from_entry(&get_example("E3.4.5").unwrap()).unwrap().render().unwrap();
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn three_dimensional_sets_are_rejected() {
        let h = SetExpr::halfspace(vec![0.0, 0.0, 1.0], 0.0);
        assert!(matches!(Scene::from_parts("t", Some(&[h]), None, None), Err(Error::DimensionUnsupported(3))));
    }
}
