//! End-to-end behaviour of the constrained boundary value problem.

use quasilocal_core::bvp::kernel::{kernel_basis, project_boundary_data, solve_bvp, unit_data};
use quasilocal_core::bvp::system::{Condition, ConstrainedSystem};
use quasilocal_core::dirac::{default_mode, inner};
use quasilocal_core::geometry::build_domain;
use quasilocal_core::{ConformalFactor, Cx, Fiber, FiberPath, MetricField, MetricSpec, Topology};

fn solve_with_seed(spec: &MetricSpec, seed: u64) -> (quasilocal_core::DiscreteDomain, Vec<Cx<f64>>, Vec<Vec<Cx<f64>>>) {
    let d = build_domain::<f64>(spec, (16, 32)).unwrap();
    let fiber = Fiber::new(FiberPath::Twisted).unwrap();
    let s = ConstrainedSystem::new(&d, fiber.clone(), default_mode(&d), Condition::PiPlus).unwrap();
    let k = kernel_basis(&d, &s, 6, seed);
    let data = project_boundary_data(&d, &fiber, &unit_data(&d, &fiber, &[0]).unwrap(), &k);
    let sol = solve_bvp(&d, &s, &data, &k).unwrap();
    let basis = k.basis.iter().map(|b| b.values.clone()).collect();
    (d, sol.field.values, basis)
}

#[test]
fn solutions_with_different_seeds_differ_by_a_kernel_element() {
    let specs = [
        MetricSpec::ConformalFlat { topology: Topology::Disk { radius: 1.0 }, phi: ConformalFactor::PolyR2 { coeffs: vec![0.3, -0.3] } },
        MetricSpec::General2D { topology: Topology::Annulus { inner: 0.5, outer: 1.0 }, metric: MetricField::Identity },
        MetricSpec::General2D { topology: Topology::Disk { radius: 1.0 }, metric: MetricField::AxisStretch { epsilon: 0.2 } },
    ];
    for spec in specs {
        let (d, a, kernel) = solve_with_seed(&spec, 1);
        let (_, b, _) = solve_with_seed(&spec, 99);
        let mut diff: Vec<Cx<f64>> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        for eta in &kernel {
            let c = inner(&d, 4, eta, &diff);
            for (x, e) in diff.iter_mut().zip(eta) {
                *x -= c * e;
            }
        }
        let rest = inner(&d, 4, &diff, &diff).re.sqrt();
        assert!(rest < 1e-8, "{spec:?}: {rest}");
    }
}

#[test]
fn coarse_resolution_is_rejected() {
    let spec = MetricSpec::FlatDisk { radius: 1.0 };
    assert!(matches!(build_domain::<f64>(&spec, (4, 8)), Err(quasilocal_core::Error::Resolution { .. })));
}
