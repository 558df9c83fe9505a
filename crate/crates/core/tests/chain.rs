use core::f64::consts::PI;

use xxchain_core::chain::*;
use xxchain_core::linalg::*;

fn lim() -> Limits {
    Limits::default()
}

fn spin_form(m: usize, a: C64, b: C64) -> CMat {
    let l = lim();
    let dim = 1 << m;
    let mut h = CMat::zeros(dim, dim);
    for x in 1..m {
        let xx = pauli(m, x, PauliAxis::X, &l).unwrap() * pauli(m, x + 1, PauliAxis::X, &l).unwrap();
        let yy = pauli(m, x, PauliAxis::Y, &l).unwrap() * pauli(m, x + 1, PauliAxis::Y, &l).unwrap();
        h += (xx + yy).scale(0.5);
    }
    h += pauli(m, 1, PauliAxis::Z, &l).unwrap() * (a / 2.0);
    h += pauli(m, m, PauliAxis::Z, &l).unwrap() * (b / 2.0);
    h
}

#[test]
fn trace_vanishes_on_imaginary_axis() {
    let h = build_hamiltonian(&HamiltonianSpec::polar(3, 1.0, PI / 2.0), &lim()).unwrap();
    assert!(h.matrix.trace().norm() < 1e-14);
}

#[test]
fn symmetric_but_not_hermitian() {
    let h = build_hamiltonian(&HamiltonianSpec::polar(3, 1.0, PI / 2.0), &lim()).unwrap().matrix;
    assert!(max_abs_diff(&h, &h.transpose()) == 0.0);
    assert!(hermiticity_defect(&h) > 0.5);
    for (a, b) in [(C64::new(0.3, 0.7), C64::new(-1.1, 0.2))] {
        for v in [Variant::H, Variant::Hprime] {
            let h = build_hamiltonian(&HamiltonianSpec::general(4, a, b).with_variant(v), &lim()).unwrap().matrix;
            assert!(max_abs_diff(&h, &h.transpose()) < 1e-15);
        }
    }
}

#[test]
fn free_chain_is_hermitian() {
    let h0 = build_hamiltonian(&HamiltonianSpec::general(4, ZERO, ZERO), &lim()).unwrap().matrix;
    assert!(hermiticity_defect(&h0) < 1e-14);
    let hg = build_hamiltonian(&HamiltonianSpec::polar(4, 0.0, 0.3), &lim()).unwrap().matrix;
    assert!(max_abs_diff(&h0, &hg) < 1e-15);
}

#[test]
fn car_relations() {
    for m in [2usize, 3, 5] {
        let ops = jordan_wigner_ops(m, &lim()).unwrap();
        let id = identity(1 << m);
        for x in 0..m {
            for y in 0..m {
                let (cx, cdx) = &ops[x];
                let (cy, _) = &ops[y];
                let target = if x == y { id.clone() } else { id.scale(0.0) };
                assert!(max_abs_diff(&anticomm(cdx, cy), &target) < 1e-13);
                assert!(max_abs(&anticomm(cx, cy)) < 1e-13);
            }
            // n_x = (1 + sigma^z_x)/2
            let n = &ops[x].1 * &ops[x].0;
            let sz = pauli(m, x + 1, PauliAxis::Z, &lim()).unwrap();
            assert!(max_abs_diff(&n, &((id.clone() + sz).scale(0.5))) < 1e-15);
        }
    }
}

#[test]
fn fermionic_form_matches_builder_and_spin_form() {
    let m = 3;
    let a = C64::new(0.2, 0.5);
    let b = C64::new(-0.3, 0.1);
    let ops = jordan_wigner_ops(m, &lim()).unwrap();
    let dim = 1 << m;
    let mut h = CMat::zeros(dim, dim);
    for x in 0..m - 1 {
        h -= &ops[x].1 * &ops[x + 1].0 - &ops[x].0 * &ops[x + 1].1;
    }
    h += (&ops[0].1 * &ops[0].0) * a + (&ops[m - 1].1 * &ops[m - 1].0) * b;
    h -= identity(dim) * ((a + b) / 2.0);
    let built = build_hamiltonian(&HamiltonianSpec::general(m, a, b), &lim()).unwrap().matrix;
    assert!(max_abs_diff(&h, &built) < 1e-12);
    assert!(max_abs_diff(&spin_form(m, a, b), &built) < 1e-12);
}

#[test]
fn hprime_subtracts_total_sz() {
    let m = 4;
    let (a, b) = (C64::new(0.3, 0.4), C64::new(0.3, -0.4));
    let h = build_hamiltonian(&HamiltonianSpec::general(m, a, b), &lim()).unwrap().matrix;
    let hp = build_hamiltonian(&HamiltonianSpec::general(m, a, b).with_variant(Variant::Hprime), &lim()).unwrap().matrix;
    let mut tot = CMat::zeros(1 << m, 1 << m);
    for x in 1..=m {
        tot += pauli(m, x, PauliAxis::Z, &lim()).unwrap();
    }
    assert!(max_abs_diff(&hp, &(h - tot * ((a + b) / 2.0))) < 1e-13);
}

#[test]
fn parity_and_time_reversal() {
    let l = lim();
    let (a, b) = (C64::new(0.4, 0.9), C64::new(-0.2, 0.3));
    let sym = symmetry_ops(4, &l).unwrap();
    let p = &sym.p.matrix;
    let h = build_hamiltonian(&HamiltonianSpec::general(4, a, b), &l).unwrap().matrix;
    let hswap = build_hamiltonian(&HamiltonianSpec::general(4, b, a), &l).unwrap().matrix;
    assert!(max_abs_diff(&(p * &h * p), &hswap) < 1e-13);
    assert!(max_abs_diff(&(p * p), &identity(16)) == 0.0);
    assert!(max_abs_diff(&(&sym.r.matrix * &sym.r.matrix), &identity(16)) == 0.0);

    // THT = H(conj alpha, conj beta), and at theta = pi/2 conj(H_g) = H_{-g}
    let hg = build_hamiltonian(&HamiltonianSpec::polar(4, 0.6, PI / 2.0), &l).unwrap();
    let hmg = build_hamiltonian(&HamiltonianSpec::general(4, C64::new(0.0, -0.6), C64::new(0.0, 0.6)), &l).unwrap();
    assert!(max_abs_diff(&time_reverse_op(&hg).matrix, &hmg.matrix) < 1e-15);

    // PT symmetry for alpha = conj(beta)
    for th in [0.0, 0.7, PI / 2.0, 2.5] {
        let h = build_hamiltonian(&HamiltonianSpec::polar(5, 0.8, th), &l).unwrap().matrix;
        let s = symmetry_ops(5, &l).unwrap();
        assert!(max_abs_diff(&(&s.p.matrix * &h * &s.p.matrix), &conj(&h)) < 1e-13);
    }

    let v = StateVector { basis: Basis::Full { sites: 1 }, amps: CVec::from_vec(vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)]) };
    let tv = time_reverse(&v);
    assert_eq!(tv.amps[0], C64::new(1.0, -2.0));
    assert_eq!(tv.amps[1], C64::new(0.0, 1.0));
}

#[test]
fn spin_reversal_flips_fields() {
    let l = lim();
    let (a, b) = (C64::new(0.0, 0.5), C64::new(0.0, -0.5));
    let r = symmetry_ops(3, &l).unwrap().r.matrix;
    let h = build_hamiltonian(&HamiltonianSpec::general(3, a, b), &l).unwrap().matrix;
    let hm = build_hamiltonian(&HamiltonianSpec::general(3, -a, -b), &l).unwrap().matrix;
    assert!(max_abs_diff(&(&r * &h * &r), &hm) < 1e-13);
}

#[test]
fn sectors() {
    let l = lim();
    let h = build_hamiltonian(&HamiltonianSpec::polar(4, 0.7, PI / 2.0), &l).unwrap();
    let blocks = sector_decompose(&h).unwrap();
    assert_eq!(blocks[2].dim(), 6);
    let h5 = build_hamiltonian(&HamiltonianSpec::polar(5, 0.7, PI / 2.0), &l).unwrap();
    let b5 = sector_decompose(&h5).unwrap();
    let dims: Vec<usize> = b5.iter().map(|b| b.dim()).collect();
    assert_eq!(dims, vec![1, 5, 10, 10, 5, 1]);
    let back = sector_assemble(5, &b5.iter().map(|b| b.matrix.clone()).collect::<Vec<_>>()).unwrap();
    assert!(max_abs_diff(&back, &h5.matrix) < 1e-14);
    // direct sector builder agrees with slicing
    for n in 0..=5 {
        let s = build_hamiltonian_sector(&HamiltonianSpec::polar(5, 0.7, PI / 2.0), n, &l).unwrap();
        assert!(max_abs_diff(&s.matrix, &b5[n].matrix) < 1e-15);
    }
    // non-conserving operator rejected
    let x = DenseOperator::new(Basis::Full { sites: 3 }, pauli(3, 2, PauliAxis::X, &l).unwrap()).unwrap();
    assert!(matches!(sector_decompose(&x), Err(xxchain_core::Error::Precondition { .. })));
}

#[test]
fn truncated_and_periodic_variants() {
    let l = lim();
    let m = 4;
    let g = 0.8;
    let ops = jordan_wigner_ops(m, &l).unwrap();
    let n: Vec<CMat> = ops.iter().map(|(c, cd)| cd * c).collect();
    let e = |x: usize, y: usize| -> CMat {
        &ops[x].0 * &ops[y].1 - &ops[x].1 * &ops[y].0 + (&n[x] - &n[y]) * C64::new(0.0, g)
    };
    let spec = HamiltonianSpec::polar(m, g, PI / 2.0);
    let hg = build_hamiltonian(&spec, &l).unwrap().matrix;
    let full: CMat = (0..m - 1).map(|x| e(x, x + 1)).fold(CMat::zeros(16, 16), |a, b| a + b);
    assert!(max_abs_diff(&hg, &full) < 1e-13);
    let tr = build_hamiltonian(&spec.with_variant(Variant::HgTruncated), &l).unwrap().matrix;
    let want: CMat = (0..m - 2).map(|x| e(x, x + 1)).fold(CMat::zeros(16, 16), |a, b| a + b);
    assert!(max_abs_diff(&tr, &want) < 1e-13);
    let per = build_hamiltonian(&spec.with_variant(Variant::Periodic), &l).unwrap().matrix;
    let want: CMat = (0..m).map(|x| e(x, (x + 1) % m)).fold(CMat::zeros(16, 16), |a, b| a + b);
    assert!(max_abs_diff(&per, &want) < 1e-13);
    assert!(hermiticity_defect(&per) < 1e-14);
    // truncated needs alpha = -beta purely imaginary
    let bad = HamiltonianSpec::polar(4, 0.5, 0.3).with_variant(Variant::HgTruncated);
    assert!(build_hamiltonian(&bad, &l).is_err());
}

#[test]
fn resource_cap() {
    let l = Limits { max_dim: 64 };
    let r = build_hamiltonian(&HamiltonianSpec::polar(7, 0.5, PI / 2.0), &l);
    assert!(matches!(r, Err(xxchain_core::Error::Resource { requested: 128, cap: 64 })));
    assert!(build_hamiltonian_sector(&HamiltonianSpec::polar(7, 0.5, PI / 2.0), 3, &l).is_ok());
}

#[test]
fn basis_order_is_lexicographic_up_first() {
    // index 0 = all up, last = all down (fermion vacuum)
    assert!(is_up(3, 0, 1) && is_up(3, 0, 3));
    assert!(!is_up(3, 4, 1) && is_up(3, 4, 2));
    assert_eq!(sector_states(3, 2), vec![1, 2, 4]);
    assert_eq!(mirror_index(3, 4), 1);
    let v = DenseOperator::new(Basis::Sector { sites: 4, n_up: 2 }, CMat::zeros(6, 6));
    assert!(v.is_ok());
    assert!(DenseOperator::new(Basis::Sector { sites: 4, n_up: 2 }, CMat::zeros(5, 5)).is_err());
}
