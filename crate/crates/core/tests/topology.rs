use attocell::topology::{build_super_cell, tier_of, N_BRANCHES};

const R: f64 = 2.5;

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[test]
fn tree_invariants_up_to_six_tiers() {
    let spacing = 3f64.sqrt() * R;
    for nt in 1..=6 {
        let t = build_super_cell(nt, R).unwrap();
        assert_eq!(t.total_stations(), 1 + 3 * nt * (nt + 1));
        assert_eq!(t.n_bs_per_branch(), nt * (nt + 1) / 2);
        for s in t.stations().iter().skip(1) {
            assert_eq!(tier_of(s.index).unwrap(), s.tier);
            let parent = s.parent.unwrap();
            let p = t.station(parent).unwrap();
            assert_eq!(p.tier + 1, s.tier, "BS {}", s.index);
            assert!((dist(s.position, p.position) - spacing).abs() < 1e-9);
            if s.tier > 1 {
                assert_eq!(p.branch, s.branch);
            }
            let path = t.path_to(s.index).unwrap();
            assert_eq!(path.len(), s.tier);
            assert_eq!(*path.last().unwrap(), s.index);
            assert_eq!(t.tier(path[0]).unwrap(), 1);
            for w in path.windows(2) {
                assert_eq!(t.parent(w[1]).unwrap(), w[0]);
            }
        }
        // i descends from j exactly when j lies on the path of i.
        for j in 1..t.total_stations() {
            for i in 1..t.total_stations() {
                let on_path = t.path_to(i).unwrap().contains(&j);
                let desc = t.descendants(j).unwrap().contains(&i);
                assert_eq!(on_path, desc, "N_T={nt} i={i} j={j}");
            }
        }
    }
}

#[test]
fn branches_are_rotations_of_each_other() {
    let t = build_super_cell(5, R).unwrap();
    let first = t.branch_members(1).unwrap();
    for b in 2..=N_BRANCHES {
        let members = t.branch_members(b).unwrap();
        assert_eq!(members.len(), first.len());
        let angle = (b - 1) as f64 * std::f64::consts::FRAC_PI_3;
        let (s, c) = angle.sin_cos();
        let mut rotated: Vec<[f64; 2]> = first
            .iter()
            .map(|&i| {
                let p = t.station(i).unwrap().position;
                [c * p[0] - s * p[1], s * p[0] + c * p[1]]
            })
            .collect();
        let mut actual: Vec<[f64; 2]> = members.iter().map(|&i| t.station(i).unwrap().position).collect();
        let key = |p: &[f64; 2]| ((p[0] * 1e6).round() as i64, (p[1] * 1e6).round() as i64);
        rotated.sort_by_key(key);
        actual.sort_by_key(key);
        for (a, b) in rotated.iter().zip(&actual) {
            assert!(dist(*a, *b) < 1e-9);
        }
    }
}

#[test]
fn csv_lists_every_station() {
    let t = build_super_cell(3, R).unwrap();
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + t.total_stations());
}

#[test]
fn rejects_bad_input() {
    assert!(build_super_cell(0, R).is_err());
    assert!(build_super_cell(2, -1.0).is_err());
    let t = build_super_cell(2, R).unwrap();
    assert!(t.path_to(t.total_stations()).is_err());
    assert!(t.branch_members(7).is_err());
}
