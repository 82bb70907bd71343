//! Property tests for the algebraic invariants that hold for arbitrary
//! inputs, not just the hand-picked cases in the unit tests.

use proptest::prelude::*;

use lamecouple_core::bem::kelvin_tensor;
use lamecouple_core::material::{MaterialLaw, SymTensor2};
use lamecouple_core::mesh::ScaleRecord;

fn lame_range() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..10.0, 0.1f64..10.0)
}

proptest! {
    #[test]
    fn kelvin_is_even_and_symmetric(
        zx in -5.0f64..5.0, zy in -5.0f64..5.0, (lambda, mu) in lame_range()
    ) {
        prop_assume!(zx * zx + zy * zy > 1e-6);
        let g = kelvin_tensor([zx, zy], lambda, mu).unwrap();
        let gm = kelvin_tensor([-zx, -zy], lambda, mu).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                prop_assert!((g[a][b] - gm[a][b]).abs() <= 1e-14 * g[a][b].abs().max(1.0));
            }
        }
        prop_assert!((g[0][1] - g[1][0]).abs() <= 1e-14 * g[0][1].abs().max(1.0));
    }

    #[test]
    fn linear_law_is_pointwise_strongly_monotone(
        e1 in prop::array::uniform3(-10.0f64..10.0),
        e2 in prop::array::uniform3(-10.0f64..10.0),
        (lambda, mu) in lame_range()
    ) {
        // <sigma(d), d> = lambda tr(d)^2 + 2 mu |d|^2 >= 2 mu |d|^2
        let law = MaterialLaw::linear(lambda, mu).unwrap();
        let (c_a, l_a) = law.monotonicity_constants();
        let a = SymTensor2::new(e1[0], e1[1], e1[2]);
        let b = SymTensor2::new(e2[0], e2[1], e2[2]);
        let d = a.sub(&b);
        let ds = law.eval_stress(&a).sub(&law.eval_stress(&b));
        let dn2 = d.frob(&d);
        prop_assert!(ds.frob(&d) >= c_a * dn2 - 1e-9 * dn2.max(1.0));
        prop_assert!(ds.norm() <= l_a * d.norm() + 1e-9);
    }

    #[test]
    fn scale_record_round_trips(
        px in -100.0f64..100.0, py in -100.0f64..100.0,
        factor in 0.01f64..10.0, cx in -10.0f64..10.0, cy in -10.0f64..10.0
    ) {
        let record = ScaleRecord { factor, center: [cx, cy] };
        let fwd = record.apply([px, py]);
        let back = record.invert(fwd);
        prop_assert!((back[0] - px).abs() <= 1e-9 * px.abs().max(1.0));
        prop_assert!((back[1] - py).abs() <= 1e-9 * py.abs().max(1.0));
    }
}
