use nodoid_core::barrier::{
    admissible_c, apex, profile_zeros, select_c, slope, smallness_bound, sup_usable_radius, usable_radius, NodoidProfile,
};
use nodoid_core::geometry::DomainSpec;
use proptest::prelude::*;

/// `(dim, h, r, c)` with `c` strictly inside the admissible interval.
fn admissible() -> impl Strategy<Value = (usize, f64, f64, f64)> {
    (2usize..5, 0.05f64..3.0, 0.2f64..3.0, 0.02f64..0.98).prop_map(|(dim, h, r, s)| {
        let (lo, hi) = admissible_c(dim, h, r);
        (dim, h, r, lo + s * (hi - lo))
    })
}

proptest! {
    #[test]
    fn zeros_solve_their_equations((dim, h, _r, c) in admissible()) {
        let (a, b) = profile_zeros(dim, h, c).unwrap();
        let t0 = apex(dim, h, c).unwrap();
        let n = dim as i32;
        prop_assert!(a < t0 && t0 < b);
        prop_assert!((h * a.powi(n) + a.powi(n - 1) - c).abs() <= 1e-12 * c);
        prop_assert!((h * b.powi(n) - b.powi(n - 1) - c).abs() <= 1e-12 * h * b.powi(n));
        if dim == 2 {
            prop_assert!(((b - a) * h - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn slope_falls_faster_left_of_the_apex((dim, h, _r, c) in admissible(), frac in 0.01f64..0.99) {
        let (a, b) = profile_zeros(dim, h, c).unwrap();
        let t0 = apex(dim, h, c).unwrap();
        let s = frac * (t0 - a).min(b - t0);
        let left = slope(t0 - s, dim, h, c).unwrap();
        let right = slope(t0 + s, dim, h, c).unwrap();
        prop_assert!(left > 0.0 && right < 0.0);
        prop_assert!(left > right.abs());
    }

    #[test]
    fn profile_is_positive_up_to_the_usable_radius((dim, h, r, c) in admissible(), frac in 0.0f64..1.0) {
        let p = NodoidProfile::new(dim, h, r, c).unwrap();
        let usable = usable_radius(dim, h, r, c).unwrap();
        prop_assert!((p.r_usable() - usable).abs() <= 1e-12 * usable);
        let t = r + frac * (usable - r);
        prop_assert!(p.height(r).unwrap().abs() < 1e-12);
        if t > r {
            prop_assert!(p.height(t).unwrap() > 0.0);
        }
        // the apex height is the largest value
        prop_assert!(p.height(t).unwrap() <= p.height(p.t0()).unwrap() + 1e-12);
    }

    #[test]
    fn bound_is_where_the_usable_radius_runs_out(dim in 2usize..5, r in 0.1f64..10.0, d in 0.05f64..10.0) {
        let outer = r + d;
        let bound = smallness_bound(dim, r, outer);
        prop_assert!((sup_usable_radius(dim, bound, r) - outer).abs() <= 1e-10 * outer);
        prop_assert!(sup_usable_radius(dim, 0.9 * bound, r) > outer);
        prop_assert!(sup_usable_radius(dim, 1.1 * bound, r) < outer);
    }

    #[test]
    fn selected_c_covers_the_annulus(dim in 2usize..5, r in 0.1f64..5.0, d in 0.05f64..5.0, frac in 0.0f64..0.99) {
        let outer = r + d;
        let h = frac * smallness_bound(dim, r, outer);
        let c = select_c(dim, h, r, outer).unwrap();
        let (lo, hi) = admissible_c(dim, h, r);
        prop_assert!(c > lo && c < hi);
        prop_assert!(usable_radius(dim, h, r, c).unwrap() > outer);
    }

    #[test]
    fn disc_fit_is_tight(radius in 0.05f64..5.0, cx in -3.0f64..3.0, cy in -3.0f64..3.0, r in 0.1f64..5.0) {
        let disc = DomainSpec::Disc { radius, center: [cx, cy] };
        let fit = disc.annulus_fit(r).unwrap();
        prop_assert!(fit.d >= 2.0 * radius && fit.d <= 2.0 * radius + 1e-6 * (1.0 + r));
        for k in 0..64 {
            let phi = k as f64 * std::f64::consts::TAU / 64.0;
            let x = [cx + radius * phi.cos() + fit.translation[0], cy + radius * phi.sin() + fit.translation[1]];
            let rho = x[0].hypot(x[1]);
            prop_assert!(rho > r && rho < r + fit.d, "rho = {rho}");
        }
    }

    #[test]
    fn rectangle_fit_contains_the_rectangle(w in 0.1f64..4.0, h in 0.1f64..4.0, r in 0.2f64..4.0) {
        let rect = DomainSpec::rectangle(w, h);
        let fit = rect.annulus_fit(r).unwrap();
        for k in 0..=40 {
            let s = k as f64 / 40.0;
            for x in [[s * w, 0.0], [w, s * h], [s * w, h], [0.0, s * h]] {
                let rho = (x[0] + fit.translation[0]).hypot(x[1] + fit.translation[1]);
                prop_assert!(rho > r && rho < r + fit.d, "rho = {rho}");
            }
        }
    }
}
