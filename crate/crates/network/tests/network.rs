use gridopt_network::{
    build_ac_admittance, build_dc_admittance, fixtures, parse_case, serialize_case, Branch, Bus, BusKind, Converter,
    Generator, Network, NetworkError,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 8.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn two_bus_case_parses() {
    let net = fixtures::two_bus();
    assert_eq!(net.buses.len(), 2);
    assert_eq!(net.branches.len(), 1);
    assert_eq!(net.generators.len(), 1);
    assert_eq!(net.buses[1].p_load, 1.0);
}

#[test]
fn converter_between_two_ac_buses_is_rejected() {
    let text = "acdc-case 1\n[BUS]\n1 ac 0.9 1.1 1 1 0 0\n2 ac 0.9 1.1 0 1 10 0\n\
                [BRANCH]\n1 2 0.01 0.1 0\n[GEN]\n1 0 100 -50 50 50\n[CONV]\n1 2 100\n";
    assert_eq!(
        parse_case(text).unwrap_err(),
        NetworkError::ConverterKinds { ac_bus: 1, dc_bus: 2 }
    );
}

#[test]
fn five_bus_case_has_exactly_one_tie() {
    let net = fixtures::five_bus_two_region();
    let ties: Vec<(u32, u32)> = net
        .branches
        .iter()
        .filter(|b| net.is_tie(b))
        .map(|b| (b.from, b.to))
        .collect();
    // Region tags: buses 1-3 in region 1, buses 4-5 in region 2.
    assert_eq!(ties, vec![(3, 4)]);
}

#[test]
fn syntax_errors_report_line_and_field() {
    let text = "acdc-case 1\nbase_mva 100\n[BUS]\n1 ac 0.9 oops 1 1 0 0\n";
    match parse_case(text).unwrap_err() {
        NetworkError::Syntax { line, message } => {
            assert_eq!(line, 4);
            assert!(message.contains("vmax"), "{message}");
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn unknown_version_is_rejected() {
    assert_eq!(
        parse_case("acdc-case 7\n").unwrap_err(),
        NetworkError::UnsupportedVersion(7)
    );
}

#[test]
fn semantic_errors() {
    let dangling = "acdc-case 1\n[BUS]\n1 ac 0.9 1.1 1 1 0 0\n[BRANCH]\n1 9 0 0.1 0\n";
    assert!(matches!(
        parse_case(dangling).unwrap_err(),
        NetworkError::DanglingBus { id: 9, .. }
    ));
    let two_refs = "acdc-case 1\n[BUS]\n1 ac 0.9 1.1 1 1 0 0\n2 ac 0.9 1.1 1 1 0 0\n[BRANCH]\n1 2 0 0.1 0\n";
    assert_eq!(parse_case(two_refs).unwrap_err(), NetworkError::DuplicateReference(1, 2));
    let no_dc_ref = "acdc-case 1\n[BUS]\n1 ac 0.9 1.1 1 1 0 0\n2 dc 0.9 1.1 0 1 0 0\n[CONV]\n1 2 100\n";
    assert_eq!(parse_case(no_dc_ref).unwrap_err(), NetworkError::MissingReference(2));
    let reactive_dc = "acdc-case 1\n[BUS]\n1 dc 0.9 1.1 1 1 0 5\n";
    assert_eq!(parse_case(reactive_dc).unwrap_err(), NetworkError::ReactiveOnDc(1));
    let mixed = "acdc-case 1\n[BUS]\n1 ac 0.9 1.1 1 1 0 0\n2 dc 0.9 1.1 1 1 0 0\n[BRANCH]\n1 2 0.1 0 0\n";
    assert_eq!(
        parse_case(mixed).unwrap_err(),
        NetworkError::BranchKindMismatch { from: 1, to: 2 }
    );
    let zero_z = "acdc-case 1\n[BUS]\n1 ac 0.9 1.1 1 1 0 0\n2 ac 0.9 1.1 0 1 0 0\n[BRANCH]\n1 2 0 0 0\n";
    assert!(matches!(parse_case(zero_z).unwrap_err(), NetworkError::InvalidValue(_)));
}

#[test]
fn default_converter_losses() {
    let net = fixtures::ac_dc_two_region();
    let c = &net.converters[0];
    assert_eq!(c.s_rated, 1.5);
    assert!(close(c.loss(0.0, 0.0) / c.s_rated, 0.011));
    assert!(close(c.loss(c.s_rated, 0.0) / c.s_rated, 0.0185));
}

fn line_net(branches: Vec<Branch>, n: u32) -> Network {
    let mut net = Network::default();
    for id in 1..=n {
        let mut b = Bus::new(id, BusKind::Ac, 1);
        b.is_ref = id == 1;
        net.buses.push(b);
    }
    net.branches = branches;
    net
}

#[test]
fn single_reactance_admittance() {
    let net = line_net(vec![Branch::new(1, 2, 0.0, 0.1, 0.0)], 2);
    let y = build_ac_admittance(&net);
    // 1 / (j 0.1) = -10 j
    let ys = 1.0 / Complex64::new(0.0, 0.1);
    assert!((ys - Complex64::new(0.0, -10.0)).norm() < 1e-12);
    assert!((y.get(0, 0) - Complex64::new(0.0, -10.0)).norm() < 1e-12);
    assert!((y.get(0, 1) - Complex64::new(0.0, 10.0)).norm() < 1e-12);
    assert!((y.get(1, 0) - Complex64::new(0.0, 10.0)).norm() < 1e-12);
    assert!((y.get(1, 1) - Complex64::new(0.0, -10.0)).norm() < 1e-12);
}

#[test]
fn parallel_branches_double_entries() {
    let one = build_ac_admittance(&line_net(vec![Branch::new(1, 2, 0.01, 0.1, 0.0)], 2));
    let two = build_ac_admittance(&line_net(
        vec![Branch::new(1, 2, 0.01, 0.1, 0.0), Branch::new(1, 2, 0.01, 0.1, 0.0)],
        2,
    ));
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(two.get(i, j), one.get(i, j) * 2.0);
        }
    }
}

#[test]
fn line_charging_adds_half_at_each_end() {
    let plain = build_ac_admittance(&line_net(vec![Branch::new(1, 2, 0.01, 0.1, 0.0)], 2));
    let charged = build_ac_admittance(&line_net(vec![Branch::new(1, 2, 0.01, 0.1, 0.3)], 2));
    for k in 0..2 {
        let d = charged.get(k, k) - plain.get(k, k);
        assert!((d - Complex64::new(0.0, 0.15)).norm() < 1e-12);
    }
    assert_eq!(charged.get(0, 1), plain.get(0, 1));
}

fn dc_net(rs: &[f64]) -> Network {
    let mut net = Network::default();
    for id in 1..=(rs.len() as u32 + 1) {
        let mut b = Bus::new(id, BusKind::Dc, 1);
        b.is_ref = id == 1;
        net.buses.push(b);
    }
    for (k, &r) in rs.iter().enumerate() {
        net.branches.push(Branch::new(k as u32 + 1, k as u32 + 2, r, 0.0, 0.0));
    }
    net
}

#[test]
fn dc_admittance_examples() {
    let y = build_dc_admittance(&dc_net(&[0.01]));
    assert_eq!(y.to_dense(), vec![vec![100.0, -100.0], vec![-100.0, 100.0]]);

    let y = build_dc_admittance(&fixtures::two_bus());
    assert_eq!(y.dim(), 0);

    let y = build_dc_admittance(&dc_net(&[0.02, 0.02]));
    assert!(close(y.get(1, 1), 1.0 / 0.02 + 1.0 / 0.02));
}

/// Independent assembly: loops over all bus pairs and sums every branch
/// joining them, straight from the π-model definition.
fn brute_force_ybus(net: &Network) -> Vec<Vec<Complex64>> {
    let n = net.buses.len();
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let (bi, bj) = (&net.buses[i], &net.buses[j]);
            let mut acc = Complex64::new(0.0, 0.0);
            if i == j {
                acc += Complex64::new(bi.gs, bi.bs);
                for br in &net.branches {
                    let z = Complex64::new(br.r, br.x);
                    if br.from == bi.id {
                        acc += Complex64::new(1.0, 0.0) / z + Complex64::new(0.0, br.b_from);
                    }
                    if br.to == bi.id {
                        acc += Complex64::new(1.0, 0.0) / z + Complex64::new(0.0, br.b_to);
                    }
                }
            } else {
                for br in &net.branches {
                    if (br.from == bi.id && br.to == bj.id) || (br.from == bj.id && br.to == bi.id) {
                        acc -= Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
                    }
                }
            }
            y[i][j] = acc;
        }
    }
    y
}

fn arb_ac_network() -> impl Strategy<Value = Network> {
    (2usize..=10)
        .prop_flat_map(|n| {
            let branches = prop::collection::vec(
                (0..n, 0..n, 0.0f64..0.1, 0.01f64..0.5, 0.0f64..0.4),
                1..(2 * n),
            );
            let shunts = prop::collection::vec((-0.1f64..0.1, -0.3f64..0.3), n);
            (Just(n), branches, shunts)
        })
        .prop_map(|(n, branches, shunts)| {
            let mut net = Network::default();
            for (k, (gs, bs)) in shunts.into_iter().enumerate() {
                let mut b = Bus::new(k as u32 + 1, BusKind::Ac, 1);
                b.gs = gs;
                b.bs = bs;
                net.buses.push(b);
            }
            for (a, b, r, x, ch) in branches {
                let (a, b) = if a == b { (a, (a + 1) % n) } else { (a, b) };
                net.branches.push(Branch::new(a as u32 + 1, b as u32 + 1, r, x, ch));
            }
            net
        })
}

proptest! {
    #[test]
    fn ac_admittance_matches_brute_force(net in arb_ac_network()) {
        let y = build_ac_admittance(&net);
        let dense = brute_force_ybus(&net);
        for i in 0..net.buses.len() {
            for j in 0..net.buses.len() {
                let d = (y.get(i, j) - dense[i][j]).norm();
                prop_assert!(d <= 1e-9 * dense[i][j].norm().max(1.0), "({i},{j}) differs by {d}");
                prop_assert_eq!(y.get(i, j), y.get(j, i));
            }
        }
    }

    #[test]
    fn dc_rows_sum_to_zero(rs in prop::collection::vec(0.005f64..0.5, 1..8)) {
        let y = build_dc_admittance(&dc_net(&rs));
        for row in y.rows() {
            let s: f64 = row.iter().map(|(_, v)| v).sum();
            let scale: f64 = row.iter().map(|(_, v)| v.abs()).sum();
            prop_assert!(s.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn case_round_trip(net in arb_case_network()) {
        let text = serialize_case(&net);
        let back = parse_case(&text).unwrap();
        assert_networks_match(&net, &back);
    }
}

fn arb_case_network() -> impl Strategy<Value = Network> {
    (
        2usize..8,
        prop::collection::vec((0.0f64..200.0, -50.0f64..50.0, 0.0f64..20.0), 8),
        prop::collection::vec((0.001f64..0.1, 0.01f64..0.4, 0.0f64..0.3), 8),
        prop::collection::vec((0.0f64..50.0, 50.0f64..400.0, 1.0f64..80.0), 1..4),
        1.0f64..500.0,
        0.0f64..0.01,
        prop::bool::ANY,
    )
        .prop_map(|(n, loads, lines, gens, base, a_q, with_dc)| {
            let mut net = Network {
                base_mva: base,
                a_q,
                ..Default::default()
            };
            for k in 0..n {
                let mut b = Bus::new(k as u32 + 1, BusKind::Ac, (k % 2) as u32 + 1);
                b.is_ref = k == 0;
                b.v_min = 0.94;
                b.v_max = 1.06;
                b.p_load = loads[k].0 / base;
                b.q_load = loads[k].1 / base;
                b.bs = loads[k].2 / base;
                net.buses.push(b);
            }
            for k in 1..n {
                let (r, x, ch) = lines[k];
                net.branches.push(Branch::new(k as u32, k as u32 + 1, r, x, ch));
            }
            for (k, (pmin, pmax, q)) in gens.into_iter().enumerate() {
                net.generators.push(Generator {
                    bus: (k % n) as u32 + 1,
                    p_min: pmin / base,
                    p_max: pmax / base,
                    q_min: -q / base,
                    q_max: q / base,
                    cost: 50.0,
                    is_auxiliary: false,
                });
            }
            if with_dc {
                for id in [100u32, 101] {
                    let mut b = Bus::new(id, BusKind::Dc, 1);
                    b.is_ref = id == 100;
                    net.buses.push(b);
                }
                net.branches.push(Branch::new(100, 101, 0.02, 0.0, 0.0));
                net.converters.push(Converter::with_default_losses(1, 100, 200.0 / base));
                net.converters.push(Converter::with_default_losses(n as u32, 101, 150.0 / base));
            }
            net
        })
}

fn assert_networks_match(a: &Network, b: &Network) {
    assert!(close(a.base_mva, b.base_mva) && close(a.a_q, b.a_q));
    assert_eq!(a.buses.len(), b.buses.len());
    for (x, y) in a.buses.iter().zip(&b.buses) {
        assert_eq!((x.id, x.kind, x.is_ref, x.region), (y.id, y.kind, y.is_ref, y.region));
        for (u, v) in [
            (x.v_min, y.v_min),
            (x.v_max, y.v_max),
            (x.p_load, y.p_load),
            (x.q_load, y.q_load),
            (x.gs, y.gs),
            (x.bs, y.bs),
        ] {
            assert!(close(u, v), "{u} vs {v}");
        }
    }
    assert_eq!(a.branches.len(), b.branches.len());
    for (x, y) in a.branches.iter().zip(&b.branches) {
        assert_eq!((x.from, x.to), (y.from, y.to));
        for (u, v) in [(x.r, y.r), (x.x, y.x), (x.b_from, y.b_from), (x.b_to, y.b_to)] {
            assert!(close(u, v), "{u} vs {v}");
        }
    }
    assert_eq!(a.generators.len(), b.generators.len());
    for (x, y) in a.generators.iter().zip(&b.generators) {
        assert_eq!(x.bus, y.bus);
        for (u, v) in [
            (x.p_min, y.p_min),
            (x.p_max, y.p_max),
            (x.q_min, y.q_min),
            (x.q_max, y.q_max),
            (x.cost, y.cost),
        ] {
            assert!(close(u, v), "{u} vs {v}");
        }
    }
    assert_eq!(a.converters.len(), b.converters.len());
    for (x, y) in a.converters.iter().zip(&b.converters) {
        assert_eq!((x.ac_bus, x.dc_bus), (y.ac_bus, y.dc_bus));
        for (u, v) in [(x.s_rated, y.s_rated), (x.loss_c0, y.loss_c0), (x.loss_c2, y.loss_c2)] {
            assert!(close(u, v), "{u} vs {v}");
        }
    }
}

#[test]
fn bundled_fixtures_round_trip() {
    for net in [
        fixtures::two_bus(),
        fixtures::five_bus_two_region(),
        fixtures::fifteen_bus_three_region(),
        fixtures::ac_dc_two_region(),
        fixtures::nine_bus(),
    ] {
        let back = parse_case(&serialize_case(&net)).unwrap();
        assert_networks_match(&net, &back);
    }
}
