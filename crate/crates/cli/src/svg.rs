//! Bare-bones SVG line charts.

use std::fmt::Write;

use ecodrive::evaluate::SweepPoint;
use ecodrive::Trajectory;

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
            if lo.is_finite() && hi > lo {
                (lo, hi)
            } else if lo.is_finite() {
                (lo - 1.0, lo + 1.0)
            } else {
                (0.0, 1.0)
            }
        };
        Self {
            x: span(&mut xs.clone()),
            y: span(&mut ys.clone()),
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let u = PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD);
        let v = H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD);
        (u, v)
    }
}

fn document(
    frame: &Frame,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(&str, Vec<(f64, f64)>)],
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel} [{:.1}, {:.1}]</text>"#,
        W / 2.0,
        H - 12.0,
        frame.x.0,
        frame.x.1
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{ylabel} [{:.2}, {:.2}]</text>"#,
        H / 2.0,
        H / 2.0,
        frame.y.0,
        frame.y.1
    );
    for (colour, pts) in series {
        let d: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (u, v) = frame.px(x, y);
                format!("{u:.1},{v:.1}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            d.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn velocity_profile(traj: &Trajectory) -> String {
    let pts: Vec<(f64, f64)> = traj.rows.iter().map(|r| (r.distance, r.velocity)).collect();
    let frame = Frame::fit(pts.iter().map(|p| p.0), pts.iter().map(|p| p.1));
    let title = format!("{} velocity profile", traj.header.controller);
    document(
        &frame,
        &title,
        "distance (m)",
        "velocity (m/s)",
        &[("steelblue", pts)],
    )
}

/// Arrival time and fuel, each normalized to the first solved point.
pub fn sweep_plot(points: &[SweepPoint]) -> String {
    let solved: Vec<(f64, f64, f64)> = points
        .iter()
        .filter_map(|p| {
            p.metrics
                .as_ref()
                .map(|m| (p.eta, m.arrival_time, m.total_fuel))
        })
        .collect();
    let (t0, f0) = solved.first().map_or((1.0, 1.0), |s| (s.1, s.2));
    let arrival: Vec<(f64, f64)> = solved.iter().map(|s| (s.0, s.1 / t0)).collect();
    let fuel: Vec<(f64, f64)> = solved.iter().map(|s| (s.0, s.2 / f0)).collect();
    let frame = Frame::fit(
        arrival.iter().map(|p| p.0),
        arrival.iter().chain(&fuel).map(|p| p.1),
    );
    document(
        &frame,
        "normalized arrival (blue) and fuel (orange)",
        "eta",
        "ratio",
        &[("steelblue", arrival), ("darkorange", fuel)],
    )
}
