use proptest::prelude::*;
use riesz_swarm_core::{KernelParams, KernelVariant};

fn variant() -> impl Strategy<Value = KernelVariant> {
    prop_oneof![
        Just(KernelVariant::Power),
        Just(KernelVariant::Normalized),
        Just(KernelVariant::LogRepulsion),
    ]
}

// displacement with 0.1 <= |v| <= 3 in dimension 2..=4
fn displacement() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=4)
        .prop_flat_map(|d| (prop::collection::vec(-1.0f64..1.0, d), 0.1f64..3.0))
        .prop_filter("nonzero direction", |(u, _)| {
            u.iter().map(|x| x * x).sum::<f64>() > 1e-6
        })
        .prop_map(|(u, r)| {
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            u.iter().map(|x| x * r / n).collect()
        })
}

fn kernel_for(variant: KernelVariant, alpha: f64, lambda_frac: f64, dim: usize) -> KernelParams {
    KernelParams::new(variant, alpha, lambda_frac * dim as f64, dim).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn gradient_matches_central_differences(
        variant in variant(),
        alpha in 0.5f64..8.0,
        lambda_frac in 0.05f64..0.95,
        v in displacement(),
    ) {
        let k = kernel_for(variant, alpha, lambda_frac, v.len());
        let g = k.grad(&v).unwrap();
        let r = norm(&v);
        let h = 1e-5 * r;
        let mut fd = vec![0.0; v.len()];
        for i in 0..v.len() {
            let mut p = v.clone();
            let mut m = v.clone();
            p[i] += h;
            m[i] -= h;
            fd[i] = (k.eval(norm(&p)).unwrap() - k.eval(norm(&m)).unwrap()) / (2.0 * h);
        }
        let err = norm(&fd.iter().zip(&g).map(|(a, b)| a - b).collect::<Vec<_>>());
        // near the zero-force radius the gradient cancels; measure against
        // the kernel's own scale there
        let scale = norm(&g).max(1e-2 * k.eval(r).unwrap().abs() / r);
        prop_assert!(err <= 1e-6 * scale, "err {err} scale {scale}");
    }

    #[test]
    fn gradient_is_odd(
        variant in variant(),
        alpha in 0.5f64..8.0,
        lambda_frac in 0.05f64..0.95,
        v in displacement(),
    ) {
        let k = kernel_for(variant, alpha, lambda_frac, v.len());
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let g = k.grad(&v).unwrap();
        let h = k.grad(&neg).unwrap();
        for (a, b) in g.iter().zip(&h) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn power_kernel_is_two_at_unit_distance(alpha in 0.01f64..500.0, lambda_frac in 0.01f64..0.99) {
        let k = kernel_for(KernelVariant::Power, alpha, lambda_frac, 3);
        prop_assert_eq!(k.eval(1.0).unwrap(), 2.0);
    }

    #[test]
    fn power_force_vanishes_at_zero_force_radius(alpha in 0.5f64..300.0, lambda_frac in 0.05f64..0.95) {
        let k = kernel_for(KernelVariant::Power, alpha, lambda_frac, 3);
        let r = k.zero_force_radius();
        // independent form: a r^(a-1) = l r^(-l-1)
        let repel = k.lambda * r.powf(-k.lambda - 1.0);
        prop_assert!(k.radial_derivative(r).unwrap().abs() <= 1e-10 * repel);
    }
}

#[test]
fn kernels_grow_at_both_ends() {
    for variant in [
        KernelVariant::Power,
        KernelVariant::Normalized,
        KernelVariant::LogRepulsion,
    ] {
        let k = KernelParams::new(variant, 3.0, 1.0, 2).unwrap();
        let mut previous = f64::NEG_INFINITY;
        for e in 1..=9 {
            let v = k.eval(10f64.powi(-e)).unwrap();
            assert!(v > previous);
            previous = v;
        }
        assert!(k.eval(1e-9).unwrap() > 20.0);
        assert!(k.eval(1e3).unwrap() > 1e8);
    }
}

#[test]
fn normalized_minimum_is_at_unit_distance() {
    let k = KernelParams::normalized(3.0, 2.0, 3).unwrap();
    let at_one = k.eval(1.0).unwrap();
    assert!((at_one - (1.0 / 3.0 + 1.0 / 2.0)).abs() < 1e-15);
    for i in 1..2000 {
        let r = i as f64 * 2e-3;
        assert!(k.eval(r).unwrap() >= at_one);
    }
}
