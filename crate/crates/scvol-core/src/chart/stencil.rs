//! Second-order finite-difference stencils on chart grids: central in the
//! interior and across periodic seams, one-sided at open boundaries.

use crate::chart::ChartMetric;

/// First derivative of a node-sampled field along `axis`.
pub fn d1(chart: &ChartMetric, values: &dyn Fn(usize) -> f64, node: usize, axis: usize) -> f64 {
    let h = chart.spacing()[axis];
    match (chart.offset(node, axis, -1), chart.offset(node, axis, 1)) {
        (Some(prev), Some(next)) => (values(next) - values(prev)) / (2.0 * h),
        (None, Some(_)) => {
            let f0 = values(node);
            let f1 = values(chart.offset(node, axis, 1).unwrap());
            let f2 = values(chart.offset(node, axis, 2).unwrap());
            (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
        }
        (Some(_), None) => {
            let f0 = values(node);
            let f1 = values(chart.offset(node, axis, -1).unwrap());
            let f2 = values(chart.offset(node, axis, -2).unwrap());
            (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h)
        }
        (None, None) => 0.0,
    }
}

/// Pure second derivative along `axis`.
pub fn d2(chart: &ChartMetric, values: &dyn Fn(usize) -> f64, node: usize, axis: usize) -> f64 {
    let h = chart.spacing()[axis];
    let h2 = h * h;
    match (chart.offset(node, axis, -1), chart.offset(node, axis, 1)) {
        (Some(prev), Some(next)) => (values(next) - 2.0 * values(node) + values(prev)) / h2,
        (None, Some(_)) => {
            let f0 = values(node);
            let f1 = values(chart.offset(node, axis, 1).unwrap());
            let f2 = values(chart.offset(node, axis, 2).unwrap());
            let f3 = values(chart.offset(node, axis, 3).unwrap());
            (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / h2
        }
        (Some(_), None) => {
            let f0 = values(node);
            let f1 = values(chart.offset(node, axis, -1).unwrap());
            let f2 = values(chart.offset(node, axis, -2).unwrap());
            let f3 = values(chart.offset(node, axis, -3).unwrap());
            (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / h2
        }
        (None, None) => 0.0,
    }
}

/// Mixed second derivative: the composition `d_i (d_j field)`, staying
/// second order through boundary layers.
pub fn d1d1(
    chart: &ChartMetric,
    values: &dyn Fn(usize) -> f64,
    node: usize,
    axis_i: usize,
    axis_j: usize,
) -> f64 {
    let inner = |n: usize| d1(chart, values, n, axis_j);
    d1(chart, &inner, node, axis_i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::generators::flat_torus_chart;
    use crate::chart::{ChartMetric, Provenance, SYM_IDENTITY};

    fn open_patch(m: usize, h: f64) -> ChartMetric {
        ChartMetric::new(
            2,
            &[m, m],
            &[h, h],
            &[false, false],
            &[0.0, 0.0],
            alloc::vec![SYM_IDENTITY; m * m],
            alloc::vec![0.0; m * m],
            Provenance::Raw,
        )
        .unwrap()
    }

    #[test]
    fn periodic_derivatives_of_sin() {
        let chart = flat_torus_chart(
            &[2.0 * core::f64::consts::PI, 2.0 * core::f64::consts::PI],
            &[64, 64],
            |_| 0.0,
        )
        .unwrap();
        let field: alloc::vec::Vec<f64> =
            (0..chart.node_count()).map(|n| chart.coords(n)[0].sin()).collect();
        let get = |n: usize| field[n];
        let mut worst_d1 = 0.0f64;
        let mut worst_d2 = 0.0f64;
        for node in 0..chart.node_count() {
            let x = chart.coords(node)[0];
            worst_d1 = worst_d1.max((d1(&chart, &get, node, 0) - x.cos()).abs());
            worst_d2 = worst_d2.max((d2(&chart, &get, node, 0) + x.sin()).abs());
            assert!(d1(&chart, &get, node, 1).abs() < 1e-12);
        }
        let h = chart.spacing()[0];
        assert!(worst_d1 < h * h / 4.0, "{worst_d1}");
        assert!(worst_d2 < h * h / 4.0, "{worst_d2}");
    }

    #[test]
    fn one_sided_stencils_are_second_order() {
        // polynomial x^2 y + y^2: exact under second-order stencils even at
        // boundaries... up to the cubic term, so compare convergence rates
        let errs: alloc::vec::Vec<f64> = [10usize, 20]
            .iter()
            .map(|&m| {
                let h = 1.0 / (m as f64 - 1.0);
                let chart = open_patch(m, h);
                let field: alloc::vec::Vec<f64> = (0..chart.node_count())
                    .map(|n| {
                        let c = chart.coords(n);
                        (c[0] * c[0] * c[0]) * c[1] + c[1] * c[1]
                    })
                    .collect();
                let get = |n: usize| field[n];
                let mut worst = 0.0f64;
                for node in 0..chart.node_count() {
                    let c = chart.coords(node);
                    let exact_dx = 3.0 * c[0] * c[0] * c[1];
                    let exact_dxy = 3.0 * c[0] * c[0];
                    worst = worst.max((d1(&chart, &get, node, 0) - exact_dx).abs());
                    worst = worst.max((d1d1(&chart, &get, node, 0, 1) - exact_dxy).abs());
                }
                worst
            })
            .collect();
        // halving h cuts the error ~4x
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    }

    #[test]
    fn mixed_derivative_matches_cross_term() {
        let chart = flat_torus_chart(
            &[2.0 * core::f64::consts::PI, 2.0 * core::f64::consts::PI],
            &[48, 48],
            |_| 0.0,
        )
        .unwrap();
        let field: alloc::vec::Vec<f64> = (0..chart.node_count())
            .map(|n| {
                let c = chart.coords(n);
                c[0].sin() * c[1].cos()
            })
            .collect();
        let get = |n: usize| field[n];
        let mut worst = 0.0f64;
        for node in (0..chart.node_count()).step_by(7) {
            let c = chart.coords(node);
            let exact = -c[0].cos() * c[1].sin();
            worst = worst.max((d1d1(&chart, &get, node, 0, 1) - exact).abs());
        }
        let h = chart.spacing()[0];
        assert!(worst < h * h, "{worst}");
    }
}
