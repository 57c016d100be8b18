use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use minimodels::ca1d::{self, Boundary, Configuration};
use minimodels::mapgraph::{self, MapDataset};
use minimodels::minesweeper::{self as mines, BoardDims, GenSpec, MineLayout};
use minimodels::truck::{self, Guard, Heading, Move, Program, Rule, Transfer};

fn ring(bits: Vec<bool>) -> Configuration {
    Configuration::cyclic(bits).unwrap()
}

fn brute_step(bits: &[bool]) -> Vec<bool> {
    let n = bits.len();
    (0..n).map(|i| bits[(i + n - 1) % n] ^ bits[(i + 1) % n]).collect()
}

fn all_rings(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

proptest! {
    #[test]
    fn step_is_linear(pair in (1usize..=32).prop_flat_map(|n| {
        (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n))
    })) {
        let (x, y) = (ring(pair.0), ring(pair.1));
        let lhs = ca1d::step(&x.xor(&y).unwrap());
        let rhs = ca1d::step(&x).xor(&ca1d::step(&y)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn step_commutes_with_rotation(bits in prop::collection::vec(any::<bool>(), 1..=32), k in -40i64..40) {
        let x = ring(bits);
        prop_assert_eq!(ca1d::step(&x.rotate(k)), ca1d::step(&x).rotate(k));
    }

    #[test]
    fn step_matches_the_xor_rule(bits in prop::collection::vec(any::<bool>(), 1..=32)) {
        let want = brute_step(&bits);
        prop_assert_eq!(ca1d::step(&ring(bits)).cells().to_vec(), want);
    }

    #[test]
    fn finite_step_agrees_with_a_wide_ring(alive in prop::collection::btree_set(-10i64..10, 0..8)) {
        let alive: Vec<i64> = alive.into_iter().collect();
        let next = ca1d::step(&Configuration::from_support(&alive));
        // on a ring of 64 cells nothing wraps around within one step
        let mut bits = vec![false; 64];
        for &i in &alive {
            bits[(i + 32) as usize] = true;
        }
        let want: Vec<i64> = brute_step(&bits)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as i64 - 32)
            .collect();
        prop_assert_eq!(next.support(), want);
    }

    #[test]
    fn predecessors_step_to_the_target(bits in prop::collection::vec(any::<bool>(), 1..=24)) {
        let target = ring(bits);
        for p in ca1d::predecessors(&target).unwrap() {
            prop_assert_eq!(ca1d::step(&p), target.clone());
        }
    }

    #[test]
    fn config_text_round_trips(bits in prop::collection::vec(any::<bool>(), 1..=20), origin in -5i64..5, kind in 0u8..3) {
        let c = match kind {
            0 => Configuration::cyclic(bits).unwrap(),
            1 => Configuration::periodic(bits).unwrap(),
            _ => Configuration::finite(origin, bits),
        };
        let back: Configuration = c.to_string().parse().unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn predecessor_counts_match_enumeration() {
    for n in 1..=10 {
        let mut by_target: BTreeMap<Vec<bool>, BTreeSet<Vec<bool>>> = BTreeMap::new();
        for x in all_rings(n) {
            by_target.entry(brute_step(&x)).or_default().insert(x);
        }
        for t in all_rings(n) {
            let got: BTreeSet<Vec<bool>> = ca1d::predecessors(&ring(t.clone()))
                .unwrap()
                .iter()
                .map(|c| c.cells().to_vec())
                .collect();
            assert_eq!(got, by_target.remove(&t).unwrap_or_default(), "n={n}");
        }
    }
}

#[test]
fn periodic_fixed_points_of_period_three() {
    let fixed: Vec<String> = ca1d::fixed_points(Boundary::Periodic(3))
        .unwrap()
        .iter()
        .map(ToString::to_string)
        .collect();
    assert_eq!(fixed, ["per:000", "per:011", "per:101", "per:110"]);
}

/// Random simple graph on `n` labelled vertices.
fn random_graph(n: usize, p: f64, seed: u64) -> MapDataset {
    use rand::Rng;
    let mut rng = minimodels::seeded_rng(seed);
    let ids: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((ids[i].as_str(), ids[j].as_str()));
            }
        }
    }
    let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    MapDataset::from_edges(&refs, &edges).unwrap()
}

fn brute_colorable(ds: &MapDataset, k: u8) -> bool {
    let ids: Vec<&str> = ds.countries().iter().map(|c| c.id.as_str()).collect();
    let n = ids.len();
    let total = (k as u64).pow(n as u32);
    (0..total).any(|mut code| {
        let mut col = BTreeMap::new();
        for id in &ids {
            col.insert(*id, (code % k as u64) as u8);
            code /= k as u64;
        }
        ids.iter().all(|a| ds.neighbours(a).unwrap().iter().all(|b| col[a] != col[b.as_str()]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn handshake_parity(n in 1usize..30, p in 0.0f64..1.0, seed in any::<u64>()) {
        let ds = random_graph(n, p, seed);
        let (tailed, rest) = mapgraph::tailed_partition(&ds);
        prop_assert_eq!(tailed.len() % 2, 0);
        prop_assert_eq!(tailed.len() + rest.len(), n);
        let degree_sum: usize = ds.countries().iter().map(|c| mapgraph::degree(&ds, &c.id).unwrap()).sum();
        prop_assert_eq!(degree_sum, 2 * ds.border_count());
    }

    #[test]
    fn friendly_is_sound_and_complete(n in 1usize..12, p in 0.0f64..1.0, seed in any::<u64>()) {
        let ds = random_graph(n, p, seed);
        let got = mapgraph::friendly(&ds);
        for c in ds.countries() {
            let nb: Vec<&String> = ds.neighbours(&c.id).unwrap().iter().collect();
            let clique = nb.iter().all(|a| nb.iter().all(|b| a == b || ds.borders_each_other(a, b)));
            let want = (nb.len() >= 2 && clique).then_some(nb.len());
            prop_assert_eq!(got.get(&c.id).copied(), want, "{}", c.id);
        }
        prop_assert_eq!(mapgraph::max_friendly_rank(&ds), got.values().copied().max().unwrap_or(0));
    }

    #[test]
    fn monogamous_means_one_neighbour(n in 1usize..20, p in 0.0f64..0.5, seed in any::<u64>()) {
        let ds = random_graph(n, p, seed);
        let mono = mapgraph::monogamous(&ds);
        for c in ds.countries() {
            prop_assert_eq!(mono.contains(&c.id), ds.neighbours(&c.id).unwrap().len() == 1);
        }
        for (a, b) in mapgraph::happy_monogamous(&ds) {
            prop_assert!(a < b);
            prop_assert!(mono.contains(&a) && mono.contains(&b));
            prop_assert!(ds.borders_each_other(&a, &b));
        }
    }

    #[test]
    fn four_colouring_is_valid_or_impossible(n in 1usize..8, p in 0.0f64..1.0, seed in any::<u64>()) {
        let ds = random_graph(n, p, seed);
        match mapgraph::four_color(&ds) {
            Ok(colors) => {
                prop_assert_eq!(colors.len(), n);
                for c in ds.countries() {
                    prop_assert!((1..=4).contains(&colors[&c.id]));
                    for nb in ds.neighbours(&c.id).unwrap() {
                        prop_assert_ne!(colors[&c.id], colors[nb]);
                    }
                }
            }
            Err(_) => prop_assert!(!brute_colorable(&ds, 4)),
        }
    }
}

#[test]
fn haversine_known_values() {
    assert_eq!(mapgraph::haversine_km(10.0, 20.0, 10.0, 20.0), 0.0);
    let quarter = mapgraph::haversine_km(0.0, 0.0, 0.0, 90.0);
    assert!((quarter - std::f64::consts::FRAC_PI_2 * 6371.0088).abs() < 1e-6);
    let a = mapgraph::haversine_km(38.7, -9.1, 48.9, 2.35);
    let b = mapgraph::haversine_km(48.9, 2.35, 38.7, -9.1);
    assert!((a - b).abs() < 1e-9);
    // Lisbon to Paris is a bit under 1,460 km
    assert!((1440.0..1470.0).contains(&a), "{a}");
}

fn brute_solutions(clues: &mines::ClueBoard) -> Vec<MineLayout> {
    let d = clues.dims();
    let black = d.black_cells();
    let mut out = Vec::new();
    for mask in 0u64..1 << black.len() {
        let mut mines_v = vec![false; black.len()];
        for (i, m) in mines_v.iter_mut().enumerate() {
            *m = mask >> i & 1 == 1;
        }
        let layout = MineLayout::new(d, mines_v).unwrap();
        if &mines::clues_of(&layout) == clues {
            out.push(layout);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_agrees_with_enumeration(m in 1usize..5, n in 1usize..5, p in 0.0f64..1.0, seed in any::<u64>()) {
        let spec = GenSpec { dims: BoardDims::new(m, n).unwrap(), p, seed };
        let (layout, clues) = mines::generate(&spec).unwrap();
        let brute = brute_solutions(&clues);
        prop_assert!(brute.contains(&layout));
        let mut got = mines::solve(&clues, usize::MAX);
        let mut want = brute.clone();
        got.sort_by_key(|l| l.to_board_string());
        want.sort_by_key(|l| l.to_board_string());
        prop_assert_eq!(got, want);
        let (unique, second) = mines::is_unique(&clues).unwrap();
        prop_assert_eq!(unique, brute.len() == 1);
        match second {
            Some(other) => prop_assert!(brute.contains(&other)),
            None => prop_assert!(unique),
        }
    }

    #[test]
    fn boards_round_trip_as_text(m in 1usize..7, n in 1usize..7, seed in any::<u64>()) {
        let spec = GenSpec { dims: BoardDims::new(m, n).unwrap(), p: 0.5, seed };
        let (layout, clues) = mines::generate(&spec).unwrap();
        prop_assert_eq!(MineLayout::parse_board(&layout.to_board_string()).unwrap(), layout);
        prop_assert_eq!(mines::ClueBoard::parse_board(&clues.to_board_string()).unwrap(), clues);
    }

    #[test]
    fn generation_is_deterministic(m in 1usize..8, n in 1usize..8, seed in any::<u64>()) {
        let spec = GenSpec { dims: BoardDims::new(m, n).unwrap(), p: 0.3, seed };
        prop_assert_eq!(mines::generate(&spec).unwrap(), mines::generate(&spec).unwrap());
    }

    #[test]
    fn transposed_boards_have_the_same_rank(m in 1usize..9, n in 1usize..9) {
        let d = BoardDims::new(m, n).unwrap();
        prop_assert_eq!(mines::clue_map_rank(d), mines::clue_map_rank(d.transpose()));
    }
}

fn arb_rule() -> impl Strategy<Value = Rule> {
    let heading = prop_oneof![Just(Heading::Left), Just(Heading::Right)];
    (
        prop::option::of(0usize..9),
        prop::option::of(heading),
        prop::option::of(any::<bool>()),
        prop::option::of(any::<bool>()),
        prop_oneof![Just(Transfer::PickUp), Just(Transfer::Drop), Just(Transfer::Keep)],
        prop_oneof![Just(Move::Left), Just(Move::Right), Just(Move::Halt)],
    )
        .prop_map(|(station, heading_in, cargo, nonempty, transfer, movement)| Rule {
            guard: Guard { station, heading_in, cargo, nonempty },
            transfer,
            movement,
        })
}

proptest! {
    #[test]
    fn programs_round_trip_as_text(rules in prop::collection::vec(arb_rule(), 0..12), start in prop::option::of(0usize..9)) {
        let mut p = Program::empty("Random");
        p.rules = rules;
        p.start = start.map(|s| (s, Heading::Left));
        let text = truck::format_program(&p);
        prop_assert_eq!(truck::parse_program(&text).unwrap(), p);
    }

    #[test]
    fn runs_never_create_boxes(rules in prop::collection::vec(arb_rule(), 1..10), a in 0usize..5, b in 0usize..5) {
        let mut p = Program::empty("Random");
        p.rules = rules;
        let tape = truck::Tape::new(9).unwrap().with_boxes(0, a).with_boxes(4, b);
        let report = truck::run(&tape, &p.initial_truck(), &p, 200);
        for e in &report.trace {
            prop_assert_eq!(e.tape.total() + usize::from(e.truck.cargo.is_some()), a + b);
            prop_assert!(e.truck.position < 9);
        }
    }
}
