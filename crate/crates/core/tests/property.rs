//! Property tests: the layered optimizer against brute force, membership
//! consistency under grid coarsening, and seminorm homogeneity.

use proptest::prelude::*;

use cdde_core::model::{Expr, Modulus, ModulusSet, PathClass, RationalInterval, SampledPath, VectorField};
use cdde_core::topologies::{
    enumerate_paths, seminorm, solve_dp, DpObjective, DpPosition, DpProblem, SeminormContext,
    SeminormIndex, SeminormKind, SeminormResolution, StepBound,
};

fn dp_problem_strategy() -> impl Strategy<Value = DpProblem> {
    (2usize..=5, 2usize..=7, any::<bool>()).prop_flat_map(|(layers, nodes, maximize)| {
        let positions = prop::collection::vec(-1.0..1.0f64, nodes);
        let scores = prop::collection::vec(
            prop::collection::vec(-2.0..2.0f64, nodes),
            layers,
        );
        let steps = prop::collection::vec(
            prop_oneof![Just(f64::INFINITY), 0.1..2.5f64],
            layers - 1,
        );
        (positions, scores, steps).prop_map(move |(pos, scores, steps)| DpProblem {
            positions: pos
                .into_iter()
                .map(|x| DpPosition::x_only(vec![x]))
                .collect(),
            scores,
            steps: steps
                .into_iter()
                .map(|x_max| StepBound {
                    x_max,
                    u_max: f64::INFINITY,
                    joint_max: f64::INFINITY,
                })
                .collect(),
            objective: if maximize {
                DpObjective::MaximizeSum
            } else {
                DpObjective::MinimizeSum
            },
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dp_equals_enumeration_exactly(problem in dp_problem_strategy()) {
        let dp = solve_dp(&problem).unwrap();
        let brute = enumerate_paths(&problem).unwrap();
        prop_assert_eq!(dp.value, brute.value);
        prop_assert_eq!(dp.path, brute.path);
    }

    #[test]
    fn membership_survives_node_dropping(
        values in prop::collection::vec(-0.9..0.9f64, 9..33),
        stride in 2usize..4,
    ) {
        // all-pairs membership: any accepted path stays accepted after
        // dropping interior grid nodes, for a concave modulus
        let n = values.len();
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let path = SampledPath::new(times.clone(), values.iter().map(|&v| vec![v]).collect())
            .unwrap();
        let class = PathClass::new(
            RationalInterval::integers(0, 1),
            1,
            Some(Modulus::power(2.0, 0.5, 2.0).unwrap()),
        );
        if class.contains(&path) {
            let mut keep_times = Vec::new();
            let mut keep_values = Vec::new();
            for i in (0..n).step_by(stride) {
                keep_times.push(times[i]);
                keep_values.push(vec![values[i]]);
            }
            if keep_times.len() >= 2 {
                let coarse = SampledPath::new(keep_times, keep_values).unwrap();
                prop_assert!(class.contains(&coarse));
            }
        }
    }

    #[test]
    fn seminorm_is_absolutely_homogeneous(c in -3.0..3.0f64, w in 0.5..4.0f64) {
        let base = Expr::add(
            Expr::mul(Expr::sin(Expr::mul(Expr::constant(w), Expr::time())), Expr::state(0)),
            Expr::delayed(0),
        );
        let f = VectorField::scalar(base.clone()).unwrap();
        let cf = VectorField::scalar(Expr::mul(Expr::constant(c), base)).unwrap();
        let theta = ModulusSet::uniform(Modulus::linear(1.0).unwrap());
        let ctx = SeminormContext::new(SeminormResolution {
            time_step: 1.0 / 16.0,
            lattice_step: 0.5,
            direction_count: 2,
        })
        .with_theta(&theta);
        for kind in [SeminormKind::TTheta, SeminormKind::SigmaTheta] {
            let idx = SeminormIndex::new(kind, RationalInterval::integers(0, 1), 1, 1);
            let v = seminorm(&f, &idx, &ctx).unwrap().value;
            let vc = seminorm(&cf, &idx, &ctx).unwrap().value;
            prop_assert!((vc - c.abs() * v).abs() < 1e-9, "{}: {} vs {}", kind.name(), vc, c.abs() * v);
        }
    }
}
