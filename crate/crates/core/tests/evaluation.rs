use proptest::prelude::*;
use stvtext::eval::{
    aggregate, eligible_pairs, match_tracks, score_video, stdm, temporal_iou, track_spatial_iou, VideoScore,
};
use stvtext::synth::optimal_match;
use stvtext::{MatchConfig, Quad, SpatialIouMode, TemporalRange, Track, VideoTracks};

/// Small random track: a box near one of a few anchor positions over a
/// random frame interval, so eligibility graphs are neither empty nor full.
fn arb_track() -> impl Strategy<Value = (u32, u32, f64, f64)> {
    (0u32..30, 1u32..30, 0usize..3, -4.0f64..4.0)
        .prop_map(|(start, len, anchor, dx)| (start, start + len, anchor as f64 * 30.0 + dx, dx.abs()))
}

fn build(id: u64, (start, end, x, wobble): (u32, u32, f64, f64)) -> Track {
    Track::ground_truth(
        id,
        (start..=end).map(|f| {
            let shift = if f % 2 == 0 { wobble } else { 0.0 };
            (f, Quad::rect(x + shift, 0.0, x + shift + 20.0, 10.0).unwrap())
        }),
    )
    .unwrap()
}

fn tracks(max: usize) -> impl Strategy<Value = Vec<Track>> {
    prop::collection::vec(arb_track(), 0..=max)
        .prop_map(|v| v.into_iter().enumerate().map(|(i, t)| build(i as u64, t)).collect())
}

fn range(a: u32, len: u32) -> TemporalRange {
    TemporalRange::new(a, a + len).unwrap()
}

proptest! {
    #[test]
    fn temporal_iou_symmetric(a in 0u32..50, la in 0u32..50, b in 0u32..50, lb in 0u32..50) {
        let (x, y) = (range(a, la), range(b, lb));
        let v = temporal_iou(&x, &y);
        prop_assert_eq!(v, temporal_iou(&y, &x));
        prop_assert!((0.0..=1.0).contains(&v));
        // Brute-force frame counting.
        let inter = (0..120u32).filter(|f| x.contains(*f) && y.contains(*f)).count() as f64;
        let union = (0..120u32).filter(|f| x.contains(*f) || y.contains(*f)).count() as f64;
        prop_assert!((v - inter / union).abs() < 1e-15);
    }

    #[test]
    fn track_spatial_iou_symmetric(gt in tracks(2), pred in tracks(2)) {
        for g in &gt {
            for p in &pred {
                for mode in [SpatialIouMode::PerFrameMean, SpatialIouMode::EnclosingBox] {
                    let a = track_spatial_iou(g, p, mode);
                    let b = track_spatial_iou(p, g, mode);
                    match (a, b) {
                        (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                        (None, None) => {}
                        _ => prop_assert!(false, "asymmetric definedness"),
                    }
                }
            }
        }
    }

    #[test]
    fn greedy_bounded_by_optimum(gt in tracks(5), pred in tracks(5)) {
        let cfg = MatchConfig::default();
        let greedy = match_tracks(&gt, &pred, &cfg);
        let h = greedy.matches.len();
        prop_assert!(h <= gt.len().min(pred.len()));
        let best = optimal_match(&gt, &pred, &cfg).unwrap();
        prop_assert!(h <= best);

        let pairs = eligible_pairs(&gt, &pred, &cfg);
        let degree_ok = gt.iter().all(|g| pairs.iter().filter(|m| m.gt_track_id == g.id).count() <= 1)
            && pred.iter().all(|p| pairs.iter().filter(|m| m.pred_track_id == p.id).count() <= 1);
        if degree_ok {
            prop_assert_eq!(h, best);
        }
        for m in &greedy.matches {
            prop_assert!(m.spatial_iou >= cfg.theta_l && m.temporal_iou >= cfg.theta_r);
        }
    }

    #[test]
    fn extra_ineligible_prediction_never_helps(gt in tracks(4), pred in tracks(4)) {
        let cfg = MatchConfig::default();
        let g = VideoTracks::new("v", gt);
        let before = score_video(&g, &VideoTracks::new("v", pred.clone()), &cfg);
        // Far away in space: cannot be eligible for any ground truth.
        let stray = Track::ground_truth(999, (0..5).map(|f| (f, Quad::rect(1e4, 1e4, 1e4 + 5.0, 1e4 + 5.0).unwrap()))).unwrap();
        let mut more = pred.clone();
        more.push(stray);
        let after = score_video(&g, &VideoTracks::new("v", more), &cfg);
        prop_assert_eq!(after.hits, before.hits);
        prop_assert!(after.precision <= before.precision);
        if before.hits > 0 {
            prop_assert!(after.precision < before.precision);
        }

        for i in 0..pred.len() {
            let mut fewer = pred.clone();
            fewer.remove(i);
            let less = score_video(&g, &VideoTracks::new("v", fewer), &cfg);
            prop_assert!(less.hits <= before.hits);
        }
    }

    #[test]
    fn scorecard_terms_bounded(counts in prop::collection::vec((0usize..20, 0usize..20, 0usize..20), 1..6), alpha in 0.05f64..0.95) {
        let videos = counts
            .iter()
            .enumerate()
            .map(|(i, &(h, e, t))| {
                let h = h.min(e).min(t);
                VideoScore::from_counts(format!("v{i}"), h, e, t)
            })
            .collect();
        let cfg = MatchConfig { alpha, ..Default::default() };
        let card = aggregate(videos, cfg).unwrap();
        for v in &card.videos {
            prop_assert!((0.0..=1.0).contains(&v.precision) && (0.0..=1.0).contains(&v.recall));
        }
        for x in [card.precision, card.recall, card.f_score] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        if card.precision > 0.0 && card.recall > 0.0 {
            let lo = card.precision.min(card.recall);
            let hi = card.precision.max(card.recall);
            prop_assert!(card.f_score >= lo - 1e-12 && card.f_score <= hi + 1e-12);
        }
    }
}

#[test]
fn perfect_predictions_score_one() {
    let gt: Vec<Track> = (0..3).map(|i| build(i, (i as u32 * 3, 20 + i as u32, i as f64 * 30.0, 1.0))).collect();
    let v = VideoTracks::new("v", gt);
    let card = stdm(std::slice::from_ref(&v), std::slice::from_ref(&v), &MatchConfig::default()).unwrap();
    assert_eq!((card.precision, card.recall, card.f_score), (1.0, 1.0, 1.0));
    assert_eq!(card.videos[0].hits, 3);
}
