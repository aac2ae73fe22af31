//! Curvature tensors by finite differences: Christoffel symbols, Riemann
//! and Ricci tensors, scalar curvature, and the density derivatives
//! feeding the weighted scalar curvature
//! `Sc_{alpha,beta} = Sc_g + alpha lap(f) - beta |grad f|^2`.
//!
//! Derivatives of the Christoffels are expanded analytically in first and
//! second metric derivatives (no double differencing of computed fields),
//! so every curvature output is second-order accurate in the grid spacing.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::chart::stencil::{d1, d1d1, d2};
use crate::chart::{mat_to_sym, sym_to_mat, ChartMetric, SymStorage};
use crate::error::Result;
use crate::numeric::linalg::invert3;

/// Per-node curvature and density fields.
#[derive(Debug, Clone)]
pub struct CurvatureFields {
    pub scalar: Vec<f64>,
    pub ricci: Vec<SymStorage>,
    pub hess_f: Vec<SymStorage>,
    /// Bakry-Emery tensor `Ric + Hess f`.
    pub ric_f: Vec<SymStorage>,
    pub grad_f_lower: Vec<[f64; 3]>,
    pub grad_f_upper: Vec<[f64; 3]>,
    pub grad_f_norm2: Vec<f64>,
    /// Trace of the Hessian (so `lap(x^2) > 0` on flat space).
    pub lap_f: Vec<f64>,
    pub rie_norm2: Vec<f64>,
    pub ricci_norm2: Vec<f64>,
    pub sqrt_det: Vec<f64>,
}

impl CurvatureFields {
    /// `Sc_{alpha,beta}` at one node.
    pub fn weighted_scalar_at(&self, node: usize, alpha: f64, beta: f64) -> f64 {
        self.scalar[node] + alpha * self.lap_f[node] - beta * self.grad_f_norm2[node]
    }
}

/// Pointwise `Sc_{alpha,beta}` field.
pub fn weighted_scalar_curvature(fields: &CurvatureFields, alpha: f64, beta: f64) -> Vec<f64> {
    fields
        .scalar
        .iter()
        .zip(&fields.lap_f)
        .zip(&fields.grad_f_norm2)
        .map(|((s, l), g)| s + alpha * l - beta * g)
        .collect()
}

/// The `(alpha, beta)` of the conformally invariant weighted scalar
/// curvature in dimension `n`.
pub fn cgy_coefficients(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (2.0 * (nf - 1.0) / nf, (nf - 1.0) * (nf - 2.0) / (nf * nf))
}

/// `(3, 3)`: the pair matching the volumic definition.
pub const VOLUMIC_COEFFICIENTS: (f64, f64) = (3.0, 3.0);
/// `(2, 1)`: the P-scalar curvature.
pub const P_SCALAR_COEFFICIENTS: (f64, f64) = (2.0, 1.0);

/// Christoffel symbols and the mixed Riemann tensor per node, the data the
/// geodesic shooter interpolates along rays.
#[derive(Debug, Clone)]
pub struct GeodesicData {
    /// `gamma[node * 27 + (k * 3 + i) * 3 + j]` = Gamma^k_ij.
    pub christoffel: Vec<f64>,
    /// `riemann[node * 81 + ((a * 3 + b) * 3 + c) * 3 + d]` = R^a_bcd.
    pub riemann: Vec<f64>,
}

/// Compute curvature fields for the whole chart.
pub fn curvature_fields(chart: &ChartMetric) -> Result<CurvatureFields> {
    Ok(compute(chart, false)?.0)
}

/// Curvature fields plus the per-node Christoffel/Riemann tables.
pub fn curvature_with_geodesic_data(
    chart: &ChartMetric,
) -> Result<(CurvatureFields, GeodesicData)> {
    let (fields, geo) = compute(chart, true)?;
    Ok((fields, geo.expect("geodesic data requested")))
}

fn compute(chart: &ChartMetric, want_geodesic: bool) -> Result<(CurvatureFields, Option<GeodesicData>)> {
    let dim = chart.dim();
    let count = chart.node_count();
    let g_nodes = chart.metric_values();
    let f_nodes = chart.f_values();

    // first derivatives of the metric components and of f, precomputed so
    // mixed second derivatives difference a stored field instead of
    // composing stencil closures
    let mut dg = alloc::vec![[0.0f64; 18]; count]; // [axis * 6 + comp]
    let mut df = alloc::vec![[0.0f64; 3]; count];
    for comp in 0..6 {
        let getter = |n: usize| g_nodes[n][comp];
        for axis in 0..dim {
            for node in 0..count {
                dg[node][axis * 6 + comp] = d1(chart, &getter, node, axis);
            }
        }
    }
    {
        let getter = |n: usize| f_nodes[n];
        for axis in 0..dim {
            for node in 0..count {
                df[node][axis] = d1(chart, &getter, node, axis);
            }
        }
    }

    let mut fields = CurvatureFields {
        scalar: alloc::vec![0.0; count],
        ricci: alloc::vec![[0.0; 6]; count],
        hess_f: alloc::vec![[0.0; 6]; count],
        ric_f: alloc::vec![[0.0; 6]; count],
        grad_f_lower: alloc::vec![[0.0; 3]; count],
        grad_f_upper: alloc::vec![[0.0; 3]; count],
        grad_f_norm2: alloc::vec![0.0; count],
        lap_f: alloc::vec![0.0; count],
        rie_norm2: alloc::vec![0.0; count],
        ricci_norm2: alloc::vec![0.0; count],
        sqrt_det: alloc::vec![0.0; count],
    };
    let mut geo = if want_geodesic {
        Some(GeodesicData {
            christoffel: alloc::vec![0.0; count * 27],
            riemann: alloc::vec![0.0; count * 81],
        })
    } else {
        None
    };

    let sym_index = |i: usize, j: usize| -> usize {
        match (i.min(j), i.max(j)) {
            (0, 0) => 0,
            (0, 1) => 1,
            (0, 2) => 2,
            (1, 1) => 3,
            (1, 2) => 4,
            _ => 5,
        }
    };

    for node in 0..count {
        let g = sym_to_mat(&g_nodes[node]);
        let (g_inv, det) = invert3(&g, dim)?;
        fields.sqrt_det[node] = det.sqrt();

        // metric derivatives at this node
        let mut dg_n = [[[0.0f64; 3]; 3]; 3]; // [axis][i][j]
        for axis in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    dg_n[axis][i][j] = dg[node][axis * 6 + sym_index(i, j)];
                }
            }
        }
        // second derivatives: pure via d2 on g, mixed via d1 on stored dg
        let mut ddg = [[[[0.0f64; 3]; 3]; 3]; 3]; // [k][l][i][j]
        for k in 0..dim {
            for l in k..dim {
                for comp in 0..6 {
                    let v = if k == l {
                        let getter = |n: usize| g_nodes[n][comp];
                        d2(chart, &getter, node, k)
                    } else {
                        let getter = |n: usize| dg[n][l * 6 + comp];
                        d1(chart, &getter, node, k)
                    };
                    // scatter into tensor slots
                    for i in 0..dim {
                        for j in 0..dim {
                            if sym_index(i, j) == comp {
                                ddg[k][l][i][j] = v;
                                ddg[l][k][i][j] = v;
                            }
                        }
                    }
                }
            }
        }

        // Christoffels and their analytic derivatives
        let mut gamma = [[[0.0f64; 3]; 3]; 3]; // [k][i][j]
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = 0.0;
                    for l in 0..dim {
                        s += g_inv[k][l] * (dg_n[i][j][l] + dg_n[j][i][l] - dg_n[l][i][j]);
                    }
                    gamma[k][i][j] = 0.5 * s;
                }
            }
        }
        // d(g^{kl})/dx_m = -g^{ka} dg_ab g^{bl}
        let mut dg_inv = [[[0.0f64; 3]; 3]; 3]; // [m][k][l]
        for m in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let mut s = 0.0;
                    for a in 0..dim {
                        for b in 0..dim {
                            s += g_inv[k][a] * dg_n[m][a][b] * g_inv[b][l];
                        }
                    }
                    dg_inv[m][k][l] = -s;
                }
            }
        }
        let mut dgamma = [[[[0.0f64; 3]; 3]; 3]; 3]; // [m][k][i][j]
        for m in 0..dim {
            for k in 0..dim {
                for i in 0..dim {
                    for j in 0..dim {
                        let mut s = 0.0;
                        for l in 0..dim {
                            s += dg_inv[m][k][l] * (dg_n[i][j][l] + dg_n[j][i][l] - dg_n[l][i][j]);
                            s += g_inv[k][l]
                                * (ddg[m][i][j][l] + ddg[m][j][i][l] - ddg[m][l][i][j]);
                        }
                        dgamma[m][k][i][j] = 0.5 * s;
                    }
                }
            }
        }

        // R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
        //            + Gamma^a_{cl} Gamma^l_{db} - Gamma^a_{dl} Gamma^l_{cb}
        let mut riem = [[[[0.0f64; 3]; 3]; 3]; 3];
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        let mut s = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                        for l in 0..dim {
                            s += gamma[a][c][l] * gamma[l][d][b]
                                - gamma[a][d][l] * gamma[l][c][b];
                        }
                        riem[a][b][c][d] = s;
                    }
                }
            }
        }

        // Ricci, scalar
        let mut ricci = [[0.0f64; 3]; 3];
        for b in 0..dim {
            for d in 0..dim {
                let mut s = 0.0;
                for a in 0..dim {
                    s += riem[a][b][a][d];
                }
                ricci[b][d] = s;
            }
        }
        let mut scalar = 0.0;
        for b in 0..dim {
            for d in 0..dim {
                scalar += g_inv[b][d] * ricci[b][d];
            }
        }

        // norms: lower all indices, raise all indices, contract
        let mut riem_lower = [[[[0.0f64; 3]; 3]; 3]; 3];
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        let mut s = 0.0;
                        for e in 0..dim {
                            s += g[a][e] * riem[e][b][c][d];
                        }
                        riem_lower[a][b][c][d] = s;
                    }
                }
            }
        }
        let raise = |t: &[[[[f64; 3]; 3]; 3]; 3], g_inv: &[[f64; 3]; 3], slot: usize| {
            let mut out = [[[[0.0f64; 3]; 3]; 3]; 3];
            for a in 0..dim {
                for b in 0..dim {
                    for c in 0..dim {
                        for d in 0..dim {
                            let mut s = 0.0;
                            for e in 0..dim {
                                let idx = match slot {
                                    0 => t[e][b][c][d],
                                    1 => t[a][e][c][d],
                                    2 => t[a][b][e][d],
                                    _ => t[a][b][c][e],
                                };
                                s += g_inv[match slot {
                                    0 => a,
                                    1 => b,
                                    2 => c,
                                    _ => d,
                                }][e]
                                    * idx;
                            }
                            out[a][b][c][d] = s;
                        }
                    }
                }
            }
            out
        };
        let r1 = raise(&riem_lower, &g_inv, 0);
        let r2 = raise(&r1, &g_inv, 1);
        let r3 = raise(&r2, &g_inv, 2);
        let riem_upper = raise(&r3, &g_inv, 3);
        let mut rie_norm2 = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        rie_norm2 += riem_lower[a][b][c][d] * riem_upper[a][b][c][d];
                    }
                }
            }
        }
        let mut ricci_norm2 = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        ricci_norm2 += ricci[a][b] * ricci[c][d] * g_inv[a][c] * g_inv[b][d];
                    }
                }
            }
        }

        // density derivatives
        let df_n = df[node];
        let mut ddf = [[0.0f64; 3]; 3];
        for k in 0..dim {
            for l in k..dim {
                let v = if k == l {
                    let getter = |n: usize| f_nodes[n];
                    d2(chart, &getter, node, k)
                } else {
                    d1d1(chart, &|n: usize| f_nodes[n], node, k, l)
                };
                ddf[k][l] = v;
                ddf[l][k] = v;
            }
        }
        let mut hess = [[0.0f64; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                let mut s = ddf[i][j];
                for k in 0..dim {
                    s -= gamma[k][i][j] * df_n[k];
                }
                hess[i][j] = s;
            }
        }
        let mut lap = 0.0;
        let mut grad_norm2 = 0.0;
        let mut grad_upper = [0.0f64; 3];
        for i in 0..dim {
            for j in 0..dim {
                lap += g_inv[i][j] * hess[i][j];
                grad_norm2 += g_inv[i][j] * df_n[i] * df_n[j];
                grad_upper[i] += g_inv[i][j] * df_n[j];
            }
        }

        fields.scalar[node] = scalar;
        fields.ricci[node] = mat_to_sym(&ricci);
        fields.hess_f[node] = mat_to_sym(&hess);
        let mut ric_f = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                ric_f[i][j] = ricci[i][j] + hess[i][j];
            }
        }
        fields.ric_f[node] = mat_to_sym(&ric_f);
        fields.grad_f_lower[node] = df_n;
        fields.grad_f_upper[node] = grad_upper;
        fields.grad_f_norm2[node] = grad_norm2;
        fields.lap_f[node] = lap;
        fields.rie_norm2[node] = rie_norm2;
        fields.ricci_norm2[node] = ricci_norm2;

        if let Some(geo) = geo.as_mut() {
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        geo.christoffel[node * 27 + (k * 3 + i) * 3 + j] = gamma[k][i][j];
                    }
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        for d in 0..3 {
                            geo.riemann[node * 81 + ((a * 3 + b) * 3 + c) * 3 + d] =
                                riem[a][b][c][d];
                        }
                    }
                }
            }
        }
    }
    Ok((fields, geo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::generators::{flat_plane_chart, flat_torus_chart, sphere_patch_chart};
    use core::f64::consts::PI;

    #[test]
    fn flat_chart_is_curvature_free() {
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[24, 24], |_| 0.0).unwrap();
        let fields = curvature_fields(&chart).unwrap();
        for node in 0..chart.node_count() {
            assert!(fields.scalar[node].abs() < 1e-10);
            assert!(fields.rie_norm2[node].abs() < 1e-10);
            assert!(fields.lap_f[node].abs() < 1e-10);
            assert!(fields.grad_f_norm2[node].abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_patch_scalar_curvature_converges_at_second_order() {
        let run = |m: usize| -> f64 {
            let chart = sphere_patch_chart(1.0, (0.7, PI - 0.7), &[m, 2 * m], |_| 0.0).unwrap();
            let fields = curvature_fields(&chart).unwrap();
            let mut worst = 0.0f64;
            for &node in &chart.trusted_nodes() {
                worst = worst.max((fields.scalar[node] - 2.0).abs());
            }
            worst
        };
        let coarse = run(24);
        let fine = run(48);
        assert!(coarse < 0.05, "{coarse}");
        assert!(fine < coarse / 3.0, "{coarse} -> {fine}");
    }

    #[test]
    fn sphere_riemann_norm_matches_constant_curvature() {
        // |Rie|^2 = 2 n (n-1) K^2 = 4 for the unit 2-sphere
        let chart = sphere_patch_chart(1.0, (0.8, PI - 0.8), &[32, 64], |_| 0.0).unwrap();
        let fields = curvature_fields(&chart).unwrap();
        let mid = chart.trusted_nodes()[chart.trusted_nodes().len() / 2];
        assert!((fields.rie_norm2[mid] - 4.0).abs() < 0.01, "{}", fields.rie_norm2[mid]);
        assert!((fields.ricci_norm2[mid] - 2.0).abs() < 0.01);
    }

    #[test]
    fn quadratic_density_on_flat_plane() {
        // f = x0^2/4: Hess = diag(1/2, 0), lap f = 1/2, Ric_f = Hess f
        let chart = flat_plane_chart(2, 1.0, 33, |c| c[0] * c[0] / 4.0).unwrap();
        let fields = curvature_fields(&chart).unwrap();
        for &node in &chart.trusted_nodes() {
            let h = fields.hess_f[node];
            assert!((h[0] - 0.5).abs() < 1e-9, "{:?}", h);
            assert!(h[1].abs() < 1e-9 && h[3].abs() < 1e-9);
            assert!((fields.lap_f[node] - 0.5).abs() < 1e-9);
            let rf = fields.ric_f[node];
            assert!((rf[0] - h[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn weighted_scalar_on_torus_matches_hand_value() {
        // flat 2-torus, f = sin x0: Sc_{3,3} = -3 sin x0 - 3 cos^2 x0
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[96, 32], |c| c[0].sin()).unwrap();
        let fields = curvature_fields(&chart).unwrap();
        let sc33 = weighted_scalar_curvature(&fields, 3.0, 3.0);
        let h = chart.spacing()[0];
        for node in (0..chart.node_count()).step_by(11) {
            let x = chart.coords(node)[0];
            let exact = -3.0 * x.sin() - 3.0 * x.cos() * x.cos();
            assert!((sc33[node] - exact).abs() < 1e-6 + 1.5 * h * h, "at x = {x}");
        }
    }

    #[test]
    fn weighted_scalar_linear_in_coefficients() {
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[16, 16], |c| c[1].cos()).unwrap();
        let fields = curvature_fields(&chart).unwrap();
        let a = weighted_scalar_curvature(&fields, 1.0, 0.5);
        let b = weighted_scalar_curvature(&fields, 2.0, 1.5);
        let half_sum = weighted_scalar_curvature(&fields, 1.5, 1.0);
        for node in 0..chart.node_count() {
            assert!((0.5 * (a[node] + b[node]) - half_sum[node]).abs() < 1e-14);
        }
        // constant f collapses to Sc_g exactly, for any coefficients
        let const_chart =
            flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[16, 16], |_| 0.37).unwrap();
        let cf = curvature_fields(&const_chart).unwrap();
        let w = weighted_scalar_curvature(&cf, 7.0, 11.0);
        for node in 0..const_chart.node_count() {
            assert_eq!(w[node], cf.scalar[node]);
        }
    }

    #[test]
    fn scalar_is_trace_of_ricci() {
        let chart = sphere_patch_chart(2.0, (0.9, PI - 0.9), &[20, 40], |_| 0.0).unwrap();
        let fields = curvature_fields(&chart).unwrap();
        for &node in &chart.trusted_nodes() {
            let g = chart.g_at(node);
            let (g_inv, _) = crate::numeric::linalg::invert3(&g, 2).unwrap();
            let r = crate::chart::sym_to_mat(&fields.ricci[node]);
            let mut tr = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    tr += g_inv[i][j] * r[i][j];
                }
            }
            assert!((tr - fields.scalar[node]).abs() < 1e-10);
        }
    }

    #[test]
    fn negative_potential_flat_metric() {
        // alpha = 0, beta = 1, flat metric: -|grad f|^2 <= 0 everywhere
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[24, 24], |c| c[0].sin()).unwrap();
        let fields = curvature_fields(&chart).unwrap();
        let w = weighted_scalar_curvature(&fields, 0.0, 1.0);
        assert!(w.iter().all(|&v| v <= 1e-12));
    }
}
