mod support;

use std::time::Duration;

use binpack::checker;
use binpack::io::generate::Features;
use binpack::io::{
    generate_instance, parse_instance, read_solution, render_svg, write_instance, write_solution,
    Format, GeneratorSpec, IoError, SolutionDocument,
};
use binpack::solver::{solve_anneal, SolverBudget};
use support::*;

fn quick(seed: u64) -> SolverBudget {
    SolverBudget {
        time_limit: Duration::from_secs(60),
        max_iterations: 600,
        restarts: 1,
        seed,
        deterministic: true,
    }
}

#[test]
fn item_bins_fixture_associations() {
    let inst = load_fixture("3dBPP_item_bins");
    let expected: [&[usize]; 10] = [
        &[2],
        &[0, 1, 2],
        &[0, 1, 2],
        &[0, 1, 2],
        &[1],
        &[0, 2],
        &[0, 1],
        &[0],
        &[1, 2],
        &[0, 2],
    ];
    for (c, bins) in expected.iter().enumerate() {
        assert_eq!(inst.eligible_bins(c as u32), bins.to_vec(), "category {c}");
    }
    assert_eq!(inst.item_count(), 57);
}

#[test]
fn fixtures_convert_losslessly() {
    for name in FIXTURES {
        let inst = load_fixture(name);
        for format in [Format::Json, Format::Txt] {
            let bytes = write_instance(&inst, format);
            assert_eq!(
                parse_instance(&bytes, format).unwrap(),
                inst,
                "{name} via {format:?}"
            );
        }
    }
}

#[test]
fn syntax_errors_carry_positions() {
    let e = parse_instance(b"# d : 2\n# bins : 1\nbin 0 : 10 x -\n", Format::Txt).unwrap_err();
    assert!(matches!(e, IoError::Syntax { line: 3, .. }), "{e:?}");
    let e = parse_instance(b"{\"dimensionality\": 2,\n  \"bins\": [}", Format::Json).unwrap_err();
    assert!(matches!(e, IoError::Syntax { line: 2, .. }), "{e:?}");
}

struct Rect {
    class: String,
    bin: usize,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

fn attr<'a>(tag: &'a str, name: &str) -> &'a str {
    let key = format!(" {name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    &tag[start..start + tag[start..].find('"').unwrap()]
}

fn rects(svg: &str) -> Vec<Rect> {
    svg.lines()
        .filter(|l| l.starts_with("<rect"))
        .map(|l| Rect {
            class: attr(l, "class").to_string(),
            bin: attr(l, "data-bin").parse().unwrap(),
            x: attr(l, "x").parse().unwrap(),
            y: attr(l, "y").parse().unwrap(),
            w: attr(l, "width").parse().unwrap(),
            h: attr(l, "height").parse().unwrap(),
        })
        .collect()
}

#[test]
fn feasible_drawings_keep_items_inside_outlines() {
    for name in ["1dBPP_1", "2dBPP_het_bins", "3dBPP_real_world_2"] {
        let inst = load_fixture(name);
        let r = solve_anneal(&inst, &quick(3)).unwrap();
        assert!(r.feasible, "{name}");
        let svg = String::from_utf8(render_svg(&inst, r.best.as_ref().unwrap())).unwrap();
        let all = rects(&svg);
        let panels = if inst.dimensionality().count() == 3 {
            3
        } else {
            1
        };
        assert_eq!(
            all.iter().filter(|r| r.class == "bin").count(),
            inst.bin_count() * panels
        );
        assert_eq!(
            all.iter().filter(|r| r.class == "item").count(),
            inst.item_count() * panels
        );
        // items of a panel precede its outline
        let mut pending = Vec::new();
        for r in all {
            if r.class == "item" {
                pending.push(r);
                continue;
            }
            for it in pending.drain(..) {
                assert_eq!(it.bin, r.bin);
                let eps = 0.011;
                assert!(
                    it.x >= r.x - eps && it.x + it.w <= r.x + r.w + eps,
                    "{name}"
                );
                assert!(
                    it.y >= r.y - eps && it.y + it.h <= r.y + r.h + eps,
                    "{name}"
                );
            }
        }
        assert!(pending.is_empty());
    }
}

#[test]
fn generated_instances_parse_and_pack() {
    let spec = GeneratorSpec {
        features: Features {
            capacities: true,
            associations: true,
            priority: true,
            incompatibility: true,
            load_bearing: true,
            center_of_mass: true,
        },
        ..GeneratorSpec::default()
    };
    for seed in 0..3 {
        let inst = generate_instance(&spec, seed).unwrap();
        assert_eq!(inst.item_count(), 51);
        let txt = write_instance(&inst, Format::Txt);
        assert_eq!(parse_instance(&txt, Format::Txt).unwrap(), inst);
        let r = solve_anneal(&inst, &quick(seed)).unwrap();
        let best = r.best.unwrap();
        assert_eq!(checker::check(&inst, &best).unwrap().feasible, r.feasible);
    }
}

#[test]
fn solution_files_round_trip() {
    for name in ["1dBPP_2", "2dBPP_item_bins", "3dBPP_del_prior"] {
        let inst = load_fixture(name);
        let r = solve_anneal(&inst, &quick(1)).unwrap();
        let bytes = write_solution(&inst, &r);
        let back = read_solution(&bytes, &inst).unwrap();
        assert_eq!(&back, r.best.as_ref().unwrap());
        let doc: SolutionDocument = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(doc.feasible, r.feasible);
        assert_eq!(doc.placements.len(), inst.item_count());
        let eval = checker::evaluate(&inst, &back);
        assert!(
            (doc.objective.unwrap() - eval.objective).abs() <= 1e-9 * eval.objective.abs().max(1.0)
        );
    }
}

#[test]
fn solution_for_wrong_instance_is_rejected() {
    let a = load_fixture("1dBPP_1");
    let b = load_fixture("2dBPP_het_bins");
    let bytes = write_solution(&a, &solve_anneal(&a, &quick(0)).unwrap());
    assert!(read_solution(&bytes, &b).is_err());
}
