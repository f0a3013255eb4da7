use proptest::prelude::*;

use fingergeo::classify::{
    forest_predict, forest_train, ForestConfig, ForestModel, KnnModel, Metric,
};
use fingergeo::dataset::{random_subject, split_subjects, synth_corpus, synth_hand};
use fingergeo::eval::{build_score_sets, roc_and_eer, MeanDivision, ScoreSets};
use fingergeo::features::{apply_minmax, fit_minmax, round_sig9, FeatureMatrix, FingerFeatures};
use fingergeo::imaging::{
    hand_moments, orientation_angle, otsu_threshold_from_histogram, rotate_upright, segment_hand,
    settle_rotation, split_profiles_raw, upright_rotation, BinaryImage, FingerLabel, FingerShape,
    GrayImage, SegmentationConfig,
};
use fingergeo::selection::{
    compute_weights, foba, group_features, rank_features, ColumnLayout, Granularity, Ordering,
    SelectionConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mask_strategy(max: usize) -> impl Strategy<Value = BinaryImage> {
    (2..max, 2..max).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<bool>(), w * h)
            .prop_map(move |m| BinaryImage::from_raw(w, h, m).unwrap())
    })
}

fn ellipse(w: usize, h: usize, c: (f64, f64), ra: f64, rb: f64, phi: f64) -> BinaryImage {
    let mut pts = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 - c.0, y as f64 - c.1);
            let u = dx * phi.cos() + dy * phi.sin();
            let v = -dx * phi.sin() + dy * phi.cos();
            if (u / ra).powi(2) + (v / rb).powi(2) <= 1.0 {
                pts.push((x, y));
            }
        }
    }
    BinaryImage::from_points(w, h, &pts)
}

/// Capsule finger pointing up: a rectangle of `len × wid` under a
/// semicircular tip, drawn at `scale`, with its tip at `(ox, oy)`.
fn capsule(len: f64, wid: f64, scale: f64, ox: usize, oy: usize) -> BinaryImage {
    let (len, r) = (len * scale, wid * scale / 2.0);
    let w = ox + (2.0 * r).ceil() as usize + 2;
    let h = oy + (len + r).ceil() as usize + 2;
    let mut pts = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let (fx, fy) = (x as f64 - ox as f64 - r + 0.5, y as f64 - oy as f64 + 0.5);
            let in_tip = fy < r && fx * fx + (fy - r).powi(2) <= r * r;
            let in_body = (r..=r + len).contains(&fy) && fx.abs() <= r;
            if in_tip || in_body {
                pts.push((x, y));
            }
        }
    }
    BinaryImage::from_points(w, h, &pts)
}

fn axis_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn otsu_maximizes_between_class_variance(counts in prop::collection::vec(0u64..10_000, 256)) {
        let mut h = [0u64; 256];
        h.copy_from_slice(&counts);
        let t = otsu_threshold_from_histogram(&h) as usize;
        let n: f64 = counts.iter().map(|&c| c as f64).sum();
        let var = |t: usize| {
            let w0: f64 = counts[..=t].iter().map(|&c| c as f64).sum();
            let w1 = n - w0;
            if w0 == 0.0 || w1 == 0.0 {
                return 0.0;
            }
            let s0: f64 = counts[..=t].iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
            let s: f64 = counts.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
            (w0 / n) * (w1 / n) * (s0 / w0 - (s - s0) / w1).powi(2)
        };
        let best = (0..255).map(var).fold(0.0, f64::max);
        prop_assert!(var(t) >= best * (1.0 - 1e-12));
        prop_assert!((0..t).all(|u| var(u) < var(t) * (1.0 + 1e-12)));
    }

    #[test]
    fn centroid_is_mean_of_foreground(mask in mask_strategy(40)) {
        prop_assume!(mask.count() > 0);
        let m = hand_moments(&mask).unwrap();
        let pts = mask.points();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0 as f64).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1 as f64).sum::<f64>() / n;
        prop_assert!((m.centroid.0 - mx).abs() <= 1e-9 && (m.centroid.1 - my).abs() <= 1e-9);
    }

    #[test]
    fn upright_rotation_leaves_axis_vertical(
        ra in 40.0f64..70.0,
        ratio in 0.2f64..0.5,
        phi in 0.0f64..std::f64::consts::PI,
    ) {
        let mask = ellipse(200, 200, (100.0, 100.0), ra, ra * ratio, phi);
        let m = hand_moments(&mask).unwrap();
        let rot = settle_rotation(&mask, m.centroid, upright_rotation(orientation_angle(&m).unwrap()));
        let gray = GrayImage::filled(200, 200, 0);
        let (_, up) = rotate_upright(&gray, &mask, m.centroid, rot);
        let theta = orientation_angle(&hand_moments(&up).unwrap()).unwrap();
        prop_assert!(axis_diff(theta, 90.0) <= 0.5, "axis at {theta} after turning {rot}");
    }

    #[test]
    fn raw_profiles_xor_to_contour(c in mask_strategy(30), g in mask_strategy(30)) {
        let g = BinaryImage::from_raw(
            c.width(),
            c.height(),
            (0..c.width() * c.height()).map(|i| g.data().get(i).copied().unwrap_or(false)).collect(),
        )
        .unwrap();
        let p = split_profiles_raw(&c, &g);
        prop_assert_eq!(p.left.xor(&p.right), c);
    }

    #[test]
    fn features_are_translation_invariant(
        len in 40.0f64..90.0,
        wid in 14.0f64..30.0,
        dx in 0usize..30,
        dy in 0usize..30,
    ) {
        let at = |ox, oy| {
            let m = capsule(len, wid, 1.0, ox, oy);
            FingerFeatures::compute(&FingerShape::from_mask(FingerLabel::Index, m, (0, 0))).unwrap().to_array()
        };
        prop_assert_eq!(at(0, 0), at(dx, dy));
    }

    #[test]
    fn doubling_a_finger_scales_features(len in 50.0f64..90.0, wid in 16.0f64..30.0) {
        let small = capsule(len, wid, 1.0, 0, 0);
        let mut big = BinaryImage::new(small.width() * 2, small.height() * 2);
        for (x, y) in small.points() {
            for (u, v) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                big.set(2 * x + u, 2 * y + v, true);
            }
        }
        let f = |m| FingerFeatures::compute(&FingerShape::from_mask(FingerLabel::Index, m, (0, 0))).unwrap();
        let (a, b) = (f(small), f(big));
        prop_assert!((b.area / a.area / 4.0 - 1.0).abs() <= 0.02);
        let lengths = |f: &FingerFeatures| {
            let mut v = vec![f.equivalent_diameter, f.major_axis, f.minor_axis];
            v.extend(f.widths);
            v.extend(f.centroid_distances);
            v
        };
        for (x, y) in lengths(&a).into_iter().zip(lengths(&b)) {
            prop_assert!((y / x / 2.0 - 1.0).abs() <= 0.02, "{x} -> {y}");
        }
    }

    #[test]
    fn minmax_spans_unit_interval(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 5), 2..30)) {
        let mut m = FeatureMatrix::new((0..5).map(|j| format!("c{j}")).collect());
        for (i, r) in rows.iter().enumerate() {
            m.push(format!("s{i}"), 1, r.clone()).unwrap();
        }
        let n = apply_minmax(&m, &fit_minmax(&m).unwrap()).unwrap();
        for j in 0..5 {
            let col = n.column_values(j);
            prop_assert!(col.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
            let raw = m.column_values(j);
            if raw.iter().any(|&v| v != raw[0]) {
                prop_assert_eq!(col.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
                prop_assert_eq!(col.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
            }
        }
    }

    #[test]
    fn csv_round_trip_at_nine_digits(rows in prop::collection::vec(prop::collection::vec(-1e9f64..1e9, 3), 1..10)) {
        let mut m = FeatureMatrix::new(vec!["a".into(), "b".into(), "c".into()]);
        for (i, r) in rows.iter().enumerate() {
            m.push(format!("s{i}"), i as u32 + 1, r.iter().map(|&v| round_sig9(v)).collect()).unwrap();
        }
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = FeatureMatrix::read_csv(buf.as_slice()).unwrap();
        for (x, y) in m.values.iter().flatten().zip(back.values.iter().flatten()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn weights_follow_accuracies(acc in prop::collection::vec(0.0f64..1.0, 1..20)) {
        prop_assume!(acc.iter().sum::<f64>() > 0.0);
        let w = compute_weights(&acc).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..acc.len() {
            for j in 0..acc.len() {
                if acc[i] > acc[j] {
                    prop_assert!(w[i] > w[j]);
                }
            }
        }
    }

    #[test]
    fn ranks_are_a_permutation(acc in prop::collection::vec(0u8..5, 1..30)) {
        let acc: Vec<f64> = acc.into_iter().map(f64::from).collect();
        let r = rank_features(&acc).ranks;
        let mut sorted = r.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (1..=acc.len()).collect::<Vec<_>>());
        for i in 0..acc.len() {
            for j in 0..acc.len() {
                if acc[i] > acc[j] {
                    prop_assert!(r[i] < r[j]);
                }
            }
        }
    }

    #[test]
    fn groups_partition_columns(groups in 1usize..15, finger_major in any::<bool>()) {
        let layout = if finger_major { ColumnLayout::FingerMajor } else { ColumnLayout::FeatureMajor };
        let g = group_features(groups * 4, 4, layout).unwrap();
        let mut all: Vec<usize> = g.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..groups * 4).collect::<Vec<_>>());
        prop_assert!(g.iter().all(|s| s.len() == 4));
    }

    #[test]
    fn wknn_uniform_matches_plain_knn(
        seed in any::<u64>(),
        rows in 3usize..30,
        dim in 1usize..5,
        exp in -4i32..5,
    ) {
        // powers of two scale every squared distance exactly, ties included
        let scale = 2f64.powi(exp);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..rows).map(|_| (0..dim).map(|_| rng.gen_range(0..5) as f64).collect()).collect();
        let y: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..3)).collect();
        let k = rng.gen_range(1..=rows.min(5));
        let plain = KnnModel::new(x.clone(), y.clone(), Metric::WeightedEuclidean(vec![1.0; dim]), k).unwrap();
        let scaled = KnnModel::new(x, y, Metric::WeightedEuclidean(vec![scale; dim]), k).unwrap();
        for _ in 0..10 {
            let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(0..5) as f64).collect();
            let a: Vec<usize> = plain.neighbors(&p).unwrap().into_iter().map(|n| n.1).collect();
            let b: Vec<usize> = scaled.neighbors(&p).unwrap().into_iter().map(|n| n.1).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn uniform_metric_ranks_like_euclidean(seed in any::<u64>(), rows in 3usize..30, dim in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..rows).map(|_| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let y = vec![0; rows];
        let knn = KnnModel::new(x.clone(), y, Metric::uniform(dim), rows).unwrap();
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        let d = |r: &Vec<f64>| r.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut want: Vec<usize> = (0..rows).collect();
        want.sort_by(|&i, &j| d(&x[i]).total_cmp(&d(&x[j])));
        let got: Vec<usize> = knn.neighbors(&p).unwrap().into_iter().map(|n| n.1).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn far_and_frr_are_monotone(
        g in prop::collection::vec(-5.0f64..5.0, 1..60),
        i in prop::collection::vec(-5.0f64..5.0, 1..60),
        n in 2usize..200,
    ) {
        let roc = roc_and_eer(&ScoreSets { genuine: g, imposter: i, ..ScoreSets::default() }, n).unwrap();
        for w in roc.points.windows(2) {
            prop_assert!(w[0].threshold < w[1].threshold);
            prop_assert!(w[0].far <= w[1].far && w[0].frr >= w[1].frr);
        }
        for p in &roc.points {
            prop_assert_eq!(p.gar + p.frr, 1.0);
        }
        prop_assert!((0.0..=1.0).contains(&roc.eer));
    }

    #[test]
    fn comparison_counts_follow_closed_form(subjects in 2usize..12, enrolled in 1usize..4, probes in 1usize..3) {
        let names = vec!["a".to_string(), "b".to_string()];
        let (mut e, mut p) = (FeatureMatrix::new(names.clone()), FeatureMatrix::new(names));
        for s in 0..subjects {
            for k in 0..enrolled {
                e.push(format!("s{s}"), k as u32, vec![1.0 + s as f64, 2.0]).unwrap();
            }
            for k in 0..probes {
                p.push(format!("s{s}"), 10 + k as u32, vec![1.5 + s as f64, 2.5]).unwrap();
            }
        }
        let sc = build_score_sets(&e, &p, &[0.5, 0.5], &[3.0, 2.0], MeanDivision::PerTerm).unwrap();
        prop_assert_eq!(sc.genuine.len(), probes * enrolled * subjects);
        prop_assert_eq!(sc.imposter.len(), probes * enrolled * subjects * (subjects - 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn selection_is_deterministic_and_grouped(seed in any::<u64>(), random_order in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (classes, per) = (6, 3);
        let centers: Vec<Vec<f64>> = (0..classes).map(|_| (0..8).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..per {
                x.push(center.iter().map(|m| m + rng.gen_range(-0.2..0.2)).collect::<Vec<f64>>());
                y.push(c);
            }
        }
        let names: Vec<String> = (0..8).map(|j| format!("c{j}")).collect();
        let cfg = SelectionConfig {
            granularity: Granularity::Global,
            ordering: if random_order { Ordering::Random } else { Ordering::Rank },
            seed,
            ..SelectionConfig::default()
        };
        let a = foba(&x, &y, &names, &cfg).unwrap();
        let b = foba(&x, &y, &names, &cfg).unwrap();
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let groups = group_features(8, 4, ColumnLayout::FingerMajor).unwrap();
        for g in &groups {
            let hit = g.iter().filter(|c| a.selected_indices.contains(c)).count();
            prop_assert!(hit == 0 || hit == g.len());
        }
        let gains = a.forward_gains();
        prop_assert!(gains.iter().all(|(before, after)| after - before >= cfg.delta));
    }

    #[test]
    fn forest_is_deterministic_and_reloads(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let y: Vec<usize> = x.iter().map(|r| usize::from(r[0] + r[1] > 1.0) + usize::from(r[2] > 0.7)).collect();
        let cfg = ForestConfig { n_trees: 20, seed, ..ForestConfig::default() };
        let a = forest_train(&x, &y, &cfg).unwrap();
        let b = forest_train(&x, &y, &cfg).unwrap();
        let c = ForestModel::from_json(&a.to_json().unwrap()).unwrap();
        for _ in 0..20 {
            let p: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
            let (la, da) = forest_predict(&a, &p).unwrap();
            prop_assert_eq!((la, da.clone()), forest_predict(&b, &p).unwrap());
            prop_assert_eq!((la, da.clone()), forest_predict(&c, &p).unwrap());
            prop_assert!(da.iter().all(|&v| v >= 0.0));
            prop_assert!((da.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn splits_are_disjoint_and_exhaustive(n in 2usize..40, a in 1u32..5, b in 1u32..5, seed in any::<u64>()) {
        let corpus = synth_corpus(n, 1, 0).unwrap();
        let (tr, te) = split_subjects(&corpus, (a, b), seed).unwrap();
        let (tr, te) = (tr.subjects(), te.subjects());
        prop_assert!(tr.iter().all(|s| !te.contains(s)));
        let mut all: Vec<String> = tr.iter().chain(&te).cloned().collect();
        all.sort();
        prop_assert_eq!(all, corpus.subjects());
        let again = split_subjects(&corpus, (a, b), seed).unwrap();
        prop_assert_eq!(again.0.subjects(), tr);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn synthetic_hands_give_five_disjoint_fingers(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = random_subject(&mut rng, 0.02);
        p.rotation = rng.gen_range(-20.0..20.0);
        let img = synth_hand(&p, seed).unwrap();
        prop_assert_eq!(&img, &synth_hand(&p, seed).unwrap());
        let fingers = segment_hand(&img, &SegmentationConfig::default()).unwrap();
        let mut labels: Vec<FingerLabel> = fingers.iter().map(|f| f.label).collect();
        labels.sort_by_key(|l| l.name());
        let mut want = vec![
            FingerLabel::Thumb,
            FingerLabel::Index,
            FingerLabel::Middle,
            FingerLabel::Ring,
            FingerLabel::Little,
        ];
        want.sort_by_key(|l| l.name());
        prop_assert_eq!(labels, want);
        let mut seen = std::collections::HashSet::new();
        for f in &fingers {
            for (x, y) in f.mask.points() {
                prop_assert!(seen.insert((x + f.origin.0, y + f.origin.1)), "fingers overlap");
            }
        }
    }
}
