use cohesive_phase::experiments::Config;
use cohesive_phase::io::FieldDump;
use cohesive_phase::mesh::Mesh;
use cohesive_phase::phase_field::{assemble_energy, slicing_lower_bound, BoundaryCondition, PhaseFieldState};
use cohesive_phase::sbv::{quantize, quantize_selected, DiscreteSBV, G0Density, TruncationLadder, TV_SLACK};
use cohesive_phase::surface_density::{cell_energy, crack_lower_bound, Profile};
use cohesive_phase::{BulkDensity, SurfaceParams};
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = DiscreteSBV> {
    (1usize..=3, 1usize..=2, 2usize..9, 2usize..9).prop_flat_map(|(m, dim, nx, ny)| {
        let ny = if dim == 1 { 1 } else { ny };
        prop::collection::vec(-4.0f64..4.0, nx * ny * m)
            .prop_map(move |vals| DiscreteSBV::classify(dim, [nx, ny], 1.0 / nx as f64, m, vals, 10.0).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn young_bound_holds_for_any_profile(
        p in 1.2f64..3.0,
        z in 0.01f64..20.0,
        betas in prop::collection::vec(0.0f64..1.0, 41),
        alphas in prop::collection::vec(-0.5f64..1.5, 41),
    ) {
        let params = SurfaceParams::new(p, 2.0, 1.0).unwrap();
        let psi = BulkDensity::power(2.0).unwrap().recession();
        let mut prof = Profile::from_fn(&[z], &[1.0], 8.0, 41, |_| 0.0, |_| 1.0).unwrap();
        prof.beta.copy_from_slice(&betas);
        for (a, s) in prof.alpha.iter_mut().zip(&alphas) {
            *a = z * s;
        }
        prof.impose_boundary();
        let e = cell_energy(&prof, &psi, &params, f64::INFINITY).unwrap();
        prop_assert!(crack_lower_bound(&prof) <= e + 1e-8);
    }

    #[test]
    fn quantizer_bounds(u in field_strategy(), eps in 0.01f64..2.0) {
        let (q, _) = quantize_selected(&u, eps).unwrap();
        prop_assert!(u.sup_distance(&q).unwrap() <= eps);
        for i in 0..u.m {
            prop_assert!(q.component_variation(i) <= u.component_variation(i) * (1.0 + TV_SLACK));
        }
        let root_m = (u.m as f64).sqrt();
        prop_assert!(q.total_variation() <= root_m * u.total_variation() * (1.0 + TV_SLACK));
    }

    #[test]
    fn selected_offsets_beat_arbitrary_ones(u in field_strategy(), eps in 0.05f64..1.0, rho in 0.0f64..1.0) {
        let (best, _) = quantize_selected(&u, eps).unwrap();
        let other = quantize(&u, eps, &vec![rho; u.m]).unwrap();
        for i in 0..u.m {
            prop_assert!(best.component_variation(i) <= other.component_variation(i) * (1.0 + TV_SLACK));
        }
    }

    #[test]
    fn truncation_is_one_lipschitz(
        k in 1u32..4,
        a in prop::collection::vec(-100.0f64..100.0, 2),
        b in prop::collection::vec(-100.0f64..100.0, 2),
    ) {
        let t = TruncationLadder;
        let (mut ta, mut tb) = (vec![0.0; 2], vec![0.0; 2]);
        t.apply(k, &a, &mut ta);
        t.apply(k, &b, &mut tb);
        let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        prop_assert!(d(&ta, &tb) <= d(&a, &b) * (1.0 + 1e-12) + 1e-12);
        // Values beyond 3 a_k are sent to zero.
        if d(&a, &[0.0, 0.0]) > 3.0 * t.radius(k) {
            prop_assert!(ta.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn concave_power_is_subadditive(gamma in 0.05f64..0.95, s in 0.0f64..10.0, t in 0.0f64..10.0) {
        let g = G0Density::new(gamma, 1.0).unwrap();
        prop_assert!(g.eval(s + t) <= g.eval(s) + g.eval(t) + 1e-12);
    }

    #[test]
    fn slicing_bound_holds_for_any_state(
        us in prop::collection::vec(-3.0f64..3.0, 25),
        vs in prop::collection::vec(0.0f64..1.0, 25),
        delta in 0.05f64..0.95,
        eps in 0.02f64..0.5,
        p in 1.2f64..3.0,
    ) {
        let params = SurfaceParams::new(p, 2.0, 1.0).unwrap();
        let psi = BulkDensity::power(2.0).unwrap();
        let mut s = PhaseFieldState::new(Mesh::line(24, 1.0 / 24.0), 1, eps).unwrap();
        s.u.copy_from_slice(&us);
        s.v.copy_from_slice(&vs);
        let r = slicing_lower_bound(&s, &psi, &params, delta).unwrap();
        let e = assemble_energy(&s, &psi, &params, &BoundaryCondition::none()).unwrap();
        prop_assert!(r.lower_bound <= e + 1e-9 * e.max(1.0));
        prop_assert!(r.tbar > 0.0);
    }

    #[test]
    fn config_text_round_trips(entries in prop::collection::btree_map("[a-z][a-z_]{0,8}", "[a-zA-Z0-9.,_-]{1,12}", 0..8)) {
        let text: String = entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let c = Config::parse(&text).unwrap();
        for (k, v) in &entries {
            prop_assert_eq!(c.get(k), Some(v.as_str()));
        }
    }

    #[test]
    fn field_dumps_round_trip(vals in prop::collection::vec(-1e6f64..1e6, 1..40), h in 1e-3f64..1.0) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.cpf");
        let d = FieldDump {
            shape: vec![vals.len()],
            h,
            meta: vec![("kind".into(), "test".into())],
            fields: vec![("u".into(), vals.clone())],
        };
        d.write(&path).unwrap();
        let back = FieldDump::read(&path).unwrap();
        prop_assert_eq!(back, d);
    }
}
