use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use rug::Float;

use simtrans_core::archive::CertificateRecord;
use simtrans_core::builder::{canonical_schedule, magnitude_at, scan_witness, MagnitudeSequence, Window};
use simtrans_core::extraction::density_probe;
use simtrans_core::geometry::{discs_pairwise_disjoint, frame_discs, min_pair_gap, separation_threshold, Direction, DirectionSet, Disc, TranslationFrame};
use simtrans_core::mp::{float_from_decimal, float_to_decimal, Cx};
use simtrans_core::poly::Poly;
use simtrans_core::runge::{hermite_crt, Patchwork, Piece};

fn distinct_thetas(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 2..=max).prop_filter("distinct directions", |t| {
        t.iter().enumerate().all(|(i, a)| t[..i].iter().all(|b| (a - b).abs() > 1e-6))
    })
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #[test]
    fn frames_beyond_the_threshold_are_disjoint(
        v1 in 0.5..10.0f64,
        thetas in distinct_thetas(6),
        u in 1e-6..2.0f64,
        phase in 0.0..TAU,
    ) {
        let dirs = DirectionSet::new(&thetas).unwrap();
        let threshold = separation_threshold(v1, min_pair_gap(&dirs).unwrap()).unwrap();
        let frame = TranslationFrame::new(v1, Complex64::from_polar(threshold * (1.0 + u), phase), dirs).unwrap();
        prop_assert!(discs_pairwise_disjoint(&frame_discs(&frame)));
    }

    #[test]
    fn decimals_round_trip_at_any_precision(
        x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
        tail in -1.0..1.0f64,
        prec in 64u32..2048,
    ) {
        // a value with bits well below binary64 resolution
        let mut f = Float::with_val(prec, x);
        f += (Float::with_val(prec, tail) * Float::with_val(prec, x.abs().max(1e-300))) >> 80u32;
        let text = float_to_decimal(&f);
        let back = float_from_decimal(&text, prec).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn ledger_numbers_round_trip_through_json(
        created in 0.0..0.5f64,
        slack in 0.0..0.5f64,
        deductions in prop::collection::vec(0.0..1e-3f64, 0..6),
        re in -1e9..1e9f64,
        im in -1e9..1e9f64,
    ) {
        let record = CertificateRecord {
            window: Window::new(1, 2, 1, 2).unwrap(),
            step: 1,
            witness_s: 3,
            m_value: [re, im],
            threshold: 2.0,
            v1: 1.0,
            escalations: 0,
            cutoff_orders: vec![],
            target_orders: vec![1, 1, 1],
            created_bound: created,
            initial_slack: 0.25,
            slack,
            deductions,
        };
        let back: CertificateRecord = serde_json::from_str(&serde_json::to_string(&record).unwrap()).unwrap();
        prop_assert_eq!(back, record);
    }

    #[test]
    fn closed_form_scan_matches_a_linear_scan(
        p in 0.5..3.0f64,
        threshold in 0.0..500.0f64,
        start in 1usize..50,
    ) {
        let seq = MagnitudeSequence::Power { p };
        let fast = scan_witness(&seq, threshold, start, 1 << 40).unwrap();
        let slow = (start..).find(|&s| magnitude_at(&seq, s).unwrap().norm() > threshold).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn canonical_schedules_are_ordered_prefixes(
        count in 0usize..120,
        extra in 0usize..40,
        library in 1usize..5,
        directions in 2usize..6,
    ) {
        let short = canonical_schedule(count, library, directions).unwrap();
        let long = canonical_schedule(count + extra, library, directions).unwrap();
        prop_assert_eq!(&long[..count], &short[..]);
        let key = |w: &Window| (w.v + w.denom + w.k + w.n, w.v, w.denom, w.k);
        for pair in long.windows(2) {
            prop_assert!(key(&pair[0]) < key(&pair[1]));
        }
        for w in &long {
            prop_assert!(w.n >= 2 && w.n <= directions && w.k >= 1 && w.k <= library);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interpolants_reproduce_every_jet(
        targets in prop::collection::vec(prop::collection::vec(complex(), 1..6), 2..=4),
        orders in prop::collection::vec(1usize..12, 4),
        spread in 3.0..6.0f64,
        phase in 0.0..TAU,
    ) {
        let prec = 384;
        let n = targets.len();
        let pieces: Vec<Piece> = targets
            .iter()
            .enumerate()
            .map(|(j, t)| Piece {
                disc: Disc::new(Complex64::from_polar(spread * j as f64, phase + j as f64), 0.5).unwrap(),
                target: Poly::from_c64(t, prec),
            })
            .collect();
        let Ok(patch) = Patchwork::new(pieces) else { return Ok(()); };
        let q = hermite_crt(&patch, &orders[..n]).unwrap();
        prop_assert!(q.len() <= orders[..n].iter().sum::<usize>());
        for (j, piece) in patch.pieces().iter().enumerate() {
            let jet = q.taylor_jet(&Cx::from_c64(piece.disc.center, prec), orders[j]);
            for (i, a) in jet.iter().enumerate() {
                let want = targets[j].get(i).copied().unwrap_or_default();
                prop_assert!((a.to_c64() - want).norm() <= 1e-60, "piece {} coefficient {}", j, i);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn density_probe_improves_with_a_longer_scan(
        coeffs in prop::collection::vec(complex(), 1..5),
        theta in 0.0..1.0f64,
        s_max in 1usize..5,
        more in 0usize..4,
    ) {
        let f = Poly::from_c64(&coeffs, 128);
        let g = Poly::from_c64(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], 128);
        let a = Direction::new(theta).unwrap();
        let seq = MagnitudeSequence::Naturals;
        let (s1, v1) = density_probe(&f, a, &seq, &g, 1, s_max).unwrap();
        let (s2, v2) = density_probe(&f, a, &seq, &g, 1, s_max + more).unwrap();
        prop_assert!(v2 <= v1);
        prop_assert!(s1 <= s_max && s2 <= s_max + more);
        if v2 == v1 {
            prop_assert_eq!(s1, s2);
        }
    }
}
