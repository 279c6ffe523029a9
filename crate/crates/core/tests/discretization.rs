use fem_errbal::assembly::{
    assemble_mixed, assemble_standard, recombine, split_complex, BandedMatrix, ComplexSystem,
    DirichletMode, Field, LinearSystem,
};
use fem_errbal::error_analysis::reconstruct;
use fem_errbal::mesh_basis::{build_mesh, gauss_lobatto_nodes};
use fem_errbal::problem::{catalog, eval_exact, ProblemSpec, Variable};
use fem_errbal::solvers::{
    cg_solve, conjugate_gradient, lu_banded_solve, schur_solve, BandedLu, InnerSolver, RowScaling,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn standard(spec: &ProblemSpec, level: u32, p: usize) -> LinearSystem {
    let mesh = build_mesh(level).unwrap();
    assemble_standard(spec, &mesh, p, DirichletMode::Strong).unwrap()
}

fn mixed(spec: &ProblemSpec, level: u32, p: usize) -> LinearSystem {
    let mesh = build_mesh(level).unwrap();
    assemble_mixed(spec, &mesh, p).unwrap()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Plain dense Gaussian elimination with partial pivoting.
fn dense_complex_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap())
            .unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= l * t;
            }
            let t = b[k];
            b[i] -= l * t;
        }
    }
    let mut x = vec![Complex64::default(); n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    x
}

#[test]
fn weak_and_strong_dirichlet_agree() {
    let spec = catalog("bench-poisson", None).unwrap();
    let mesh = build_mesh(5).unwrap();
    let strong = assemble_standard(&spec, &mesh, 2, DirichletMode::Strong).unwrap();
    let weak = assemble_standard(&spec, &mesh, 2, DirichletMode::Weak(1e6)).unwrap();
    let xs = lu_banded_solve(&strong).unwrap().solution;
    let xw = lu_banded_solve(&weak).unwrap().solution;
    assert!(rel_diff(&xw, &xs) < 1e-6, "{}", rel_diff(&xw, &xs));
}

#[test]
fn strong_rows_are_identity_with_exact_data() {
    for (name, c) in [
        ("bench-poisson", None),
        ("bench-diffusion", None),
        ("case3", Some(2.0)),
        ("bench-helmholtz", None),
    ] {
        let spec = catalog(name, c).unwrap();
        let sys = standard(&spec, 3, 3);
        assert!(!sys.constrained.is_empty());
        for &i in &sys.constrained {
            let nz: Vec<(usize, f64)> = sys.matrix.row_entries(i).filter(|e| e.1 != 0.0).collect();
            assert_eq!(nz, vec![(i, 1.0)], "{name} row {i}");
        }
        let g_left = spec.bc_left.value;
        let g_right = spec.bc_right.value;
        let n = sys.dof_map.scalar_len();
        let values = |s: usize| {
            (0..if sys.dof_map.complex { 2 } else { 1 })
                .map(|part| sys.rhs[sys.dof_map.real_index(s, part)])
                .collect::<Vec<f64>>()
        };
        for (s, g) in [(0, g_left), (n - 1, g_right)] {
            if sys.constrained.contains(&sys.dof_map.real_index(s, 0)) {
                let v = values(s);
                assert_eq!(v[0], g.re, "{name}");
                if v.len() == 2 {
                    assert_eq!(v[1], g.im, "{name}");
                }
            }
        }
    }
}

#[test]
fn patch_test_linear_solution_nodal_exact() {
    let spec = catalog("case5", Some(1.0)).unwrap();
    for p in 1..=5 {
        let nodes = gauss_lobatto_nodes(p).unwrap();
        for level in 1..=10 {
            let sys = standard(&spec, level, p);
            let x = lu_banded_solve(&sys).unwrap().solution;
            let mesh = &sys.mesh;
            let mut worst: f64 = 0.0;
            for c in 0..mesh.cell_count() {
                for (a, xi) in nodes.iter().enumerate() {
                    let s = sys.dof_map.scalar_index(Field::U, c, a);
                    let exact = eval_exact(&spec, Variable::U, mesh.map(c, *xi)).unwrap().re;
                    worst = worst.max((x[s] - exact).abs());
                }
            }
            // Exact up to the standard round-off floor alpha_R N^2.
            let floor = 10.0 * 2e-17 * (sys.dim() as f64).powi(2);
            assert!(worst <= 1e-12 + floor, "p={p} REF={level}: {worst:e}");
            if p == 1 || level <= 4 {
                assert!(worst <= 1e-12, "p={p} REF={level}: {worst:e}");
            }
        }
    }
}

#[test]
fn mixed_flux_of_linear_solution_is_constant() {
    let spec = catalog("case5", Some(1.0)).unwrap();
    for p in 1..=5 {
        let sys = mixed(&spec, 1, p);
        let x = lu_banded_solve(&sys).unwrap().solution;
        let nv = sys.dof_map.degree * sys.dof_map.cells + 1;
        for k in 0..nv {
            assert!(
                (x[2 * k] + 1.0).abs() < 1e-13,
                "p={p} v[{k}] = {}",
                x[2 * k]
            );
        }
    }
}

#[test]
fn b_blocks_are_adjoint() {
    let spec = catalog("bench-poisson", None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [1, 3, 4] {
        let sys = mixed(&spec, 4, p);
        let blocks = sys.blocks.as_ref().expect("poisson has segregated blocks");
        for _ in 0..20 {
            let q: Vec<f64> = (0..blocks.nu()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..blocks.nv()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let bq = blocks.apply_b(&q);
            let btw = blocks.apply_bt(&w);
            let lhs: f64 = bq.iter().zip(&w).map(|(a, b)| a * b).sum();
            let rhs: f64 = q.iter().zip(&btw).map(|(a, b)| a * b).sum();
            let scale: f64 = bq.iter().zip(&w).map(|(a, b)| (a * b).abs()).sum();
            assert!((lhs - rhs).abs() <= 1e-13 * scale, "p={p}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn one_by_one_complex_split() {
    let mut sys = ComplexSystem::zeros(1, 0, 0);
    sys.matrix.set(0, 0, Complex64::new(1.0, 1.0));
    sys.rhs[0] = Complex64::new(2.0, 0.0);
    let (a, b) = split_complex(&sys);
    let lu = BandedLu::factor(&a, RowScaling::None).unwrap();
    let u = recombine(&lu.solve(&b));
    assert!((u[0] - Complex64::new(1.0, -1.0)).norm() < 1e-15);
}

#[test]
fn helmholtz_split_solve_matches_dense_complex_elimination() {
    let spec = catalog("bench-helmholtz", None).unwrap();
    let sys = standard(&spec, 3, 2);
    assert!(sys.dof_map.complex);
    let x = recombine(&lu_banded_solve(&sys).unwrap().solution);

    // Undo the split: entry (2i, 2j) is Re and (2i + 1, 2j) is Im of a_ij.
    let n = sys.dof_map.scalar_len();
    let a: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let m = &sys.matrix;
                    let get = |r: usize, c: usize| if m.in_band(r, c) { m.get(r, c) } else { 0.0 };
                    Complex64::new(get(2 * i, 2 * j), get(2 * i + 1, 2 * j))
                })
                .collect()
        })
        .collect();
    let b: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(sys.rhs[2 * i], sys.rhs[2 * i + 1]))
        .collect();
    let oracle = dense_complex_solve(a, b);
    let num: f64 = x.iter().zip(&oracle).map(|(p, q)| (p - q).norm_sqr()).sum();
    let den: f64 = oracle.iter().map(|q| q.norm_sqr()).sum();
    assert!((num / den).sqrt() < 1e-12, "{:e}", (num / den).sqrt());
}

#[test]
fn lu_residual_at_round_off_level() {
    let spec = catalog("bench-poisson", None).unwrap();
    let sys = standard(&spec, 6, 2);
    let rep = lu_banded_solve(&sys).unwrap();
    let r = sys.residual(&rep.solution);
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let fnorm = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(rn <= 1e-14 * fnorm, "{:e}", rn / fnorm);
    assert!(rep.relative_residual <= 1e-14);
}

/// `max |(L^-1 P A - U)_ij| / ||A||_inf` over the given columns, which is
/// zero exactly when `P A = L U`.
fn lu_reconstruction_error(a: &BandedMatrix<f64>, columns: impl Iterator<Item = usize>) -> f64 {
    let n = a.dim();
    let lu = BandedLu::factor(a, RowScaling::None).unwrap();
    let mut worst: f64 = 0.0;
    for j in columns {
        let mut col: Vec<f64> = (0..n)
            .map(|i| if a.in_band(i, j) { a.get(i, j) } else { 0.0 })
            .collect();
        lu.forward_in_place(&mut col);
        for (i, v) in col.iter().enumerate() {
            worst = worst.max((v - lu.u_entry(i, j)).abs());
        }
    }
    worst / a.norm_inf()
}

#[test]
fn lu_factors_reproduce_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 60;
    let mut a = BandedMatrix::zeros(n, 3, 2);
    for i in 0..n {
        let (lo, hi) = a.row_range(i);
        for j in lo..hi {
            a.set(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    let e = lu_reconstruction_error(&a, 0..n);
    assert!(e <= 1e-13, "{e:e}");

    let spec = catalog("bench-diffusion", None).unwrap();
    let sys = standard(&spec, 11, 4);
    assert!(sys.dim() <= 10_000 && sys.dim() > 8000);
    let cols: Vec<usize> = (0..64).map(|_| rng.gen_range(0..sys.dim())).collect();
    let e = lu_reconstruction_error(&sys.matrix, cols.into_iter());
    assert!(e <= 1e-13, "{e:e}");
}

#[test]
fn cg_error_energy_norm_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [4, 8, 12] {
        // A = Q diag(lambda) Q^T from random Householder reflections, so the
        // exact solution and the energy norm come from the eigendecomposition.
        let lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let vh: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vn: f64 = vh.iter().map(|v| v * v).sum();
        let q: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 1.0 } else { 0.0 } - 2.0 * vh[i] * vh[j] / vn)
                    .collect()
            })
            .collect();
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| q[i][k] * lambda[k] * q[j][k]).sum())
                    .collect()
            })
            .collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // x* = Q diag(1/lambda) Q^T b
        let qtb: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|i| q[i][k] * b[i]).sum())
            .collect();
        let energy = |x: &[f64]| -> f64 {
            // ||x - x*||_A^2 = sum_k lambda_k (q_k . x - q_k . b / lambda_k)^2
            (0..n)
                .map(|k| {
                    let qx: f64 = (0..n).map(|i| q[i][k] * x[i]).sum();
                    lambda[k] * (qx - qtb[k] / lambda[k]).powi(2)
                })
                .sum::<f64>()
        };
        let mut prev = energy(&vec![0.0; n]);
        for iters in 1..=n {
            let out = conjugate_gradient(
                |p, y| {
                    for i in 0..n {
                        y[i] = (0..n).map(|j| a[i][j] * p[j]).sum();
                    }
                },
                &b,
                1e-300,
                1.0,
                iters,
            );
            let e = energy(&out.x);
            assert!(
                e <= prev * (1.0 + 1e-12) + 1e-28,
                "n={n} it={iters}: {e} > {prev}"
            );
            prev = e;
        }
    }
}

#[test]
fn cg_matches_lu_on_bench_poisson() {
    let spec = catalog("bench-poisson", None).unwrap();
    let sys = standard(&spec, 8, 2);
    let lu = lu_banded_solve(&sys).unwrap();
    let cg = cg_solve(&sys, 1e-10, None).unwrap();
    for var in [Variable::U, Variable::Ux] {
        let a = reconstruct(&lu.solution, &sys, var).unwrap();
        let b = reconstruct(&cg.solution, &sys, var).unwrap();
        let diff: Vec<f64> = lu
            .solution
            .iter()
            .zip(&cg.solution)
            .map(|(p, q)| p - q)
            .collect();
        let d = reconstruct(&diff, &sys, var).unwrap();
        let rel = d.l2_norm() / a.l2_norm();
        // The residual test bounds the u_x (energy) error by about
        // tol * sqrt(cond), so u_x gets a looser bound than u.
        let bound = if var == Variable::U { 1e-9 } else { 1e-8 };
        assert!(rel < bound, "{var}: {rel:e}");
        assert!(b.l2_norm() > 0.0);
    }
}

#[test]
fn schur_matches_monolithic_for_linear_solution() {
    let spec = catalog("case5", Some(1.0)).unwrap();
    for p in 1..=4 {
        let sys = mixed(&spec, 4, p);
        let mono = lu_banded_solve(&sys).unwrap().solution;
        let seg = schur_solve(&sys, 1e-14, InnerSolver::Direct)
            .unwrap()
            .solution;
        let nu = sys.dof_map.degree * sys.dof_map.cells;
        let worst = (0..nu)
            .map(|e| (mono[2 * e + 1] - seg[2 * e + 1]).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "p={p}: {worst:e}");
    }
}

#[test]
fn reconstructed_gradient_of_linear_solution() {
    let spec = catalog("case5", Some(1.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let points: Vec<f64> = (0..50).map(|_| rng.gen_range(0.0..1.0)).collect();
    for p in 1..=4 {
        let sys = standard(&spec, 3, p);
        let x = lu_banded_solve(&sys).unwrap().solution;
        let ux = reconstruct(&x, &sys, Variable::Ux).unwrap();
        for &t in &points {
            assert!((ux.eval(t).re - 1.0).abs() < 1e-13, "p={p} x={t}");
        }
    }
}

#[test]
fn standard_gradient_jumps_across_interfaces() {
    let spec = catalog("bench-poisson", None).unwrap();
    let sys = standard(&spec, 3, 2);
    let x = lu_banded_solve(&sys).unwrap().solution;
    let ux = reconstruct(&x, &sys, Variable::Ux).unwrap();
    let cells = sys.mesh.cell_count();
    let max_jump = (0..cells - 1)
        .map(|c| (ux.eval_in_cell(c, 1.0) - ux.eval_in_cell(c + 1, 0.0)).norm())
        .fold(0.0, f64::max);
    assert!(max_jump > 1e-6, "{max_jump:e}");
}

#[test]
fn mixed_gradient_is_negated_flux() {
    let spec = catalog("bench-diffusion", None).unwrap();
    let p = 3;
    let sys = mixed(&spec, 3, p);
    let x = lu_banded_solve(&sys).unwrap().solution;
    let ux = reconstruct(&x, &sys, Variable::Ux).unwrap();
    let nodes = gauss_lobatto_nodes(p).unwrap();
    for c in 0..sys.mesh.cell_count() {
        for (a, xi) in nodes.iter().enumerate() {
            let v = x[sys.dof_map.scalar_index(Field::V, c, a)];
            assert_eq!(ux.eval_in_cell(c, *xi).re, -v, "cell {c} node {a}");
        }
    }
}
