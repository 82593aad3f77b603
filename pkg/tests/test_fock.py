import numpy as np
import pytest
from math import comb

from rotogp.fields import ComplexField, Grid, gaussian_field
from rotogp.fock import (
    CoherentVector,
    ErrorConstants,
    FockBasis,
    ModeBasis,
    SymbolPolynomial,
    build_hamiltonian,
    coherent_state,
    error_constants,
    ground_state,
    hartree_minimum,
    is_hermitian,
    ladder_operators,
    lower_symbol,
    lowering_operator,
    number_operator,
    pair_interaction_tensor,
    smoothing_estimate_check,
    upper_symbol,
    verify_resolution,
    _two_body_sparse,
)


def test_basis_dimension_and_index_roundtrip():
    for J, nmax in ((1, 12), (2, 8), (3, 5)):
        b = FockBasis(J, nmax)
        assert len(b) == comb(nmax + J, J)
        for i in (0, len(b) // 2, len(b) - 1):
            assert b.index(b.states[i]) == i
    with pytest.raises(KeyError):
        FockBasis(2, 3).index([4, 0])


def test_ccr_below_truncation():
    b = FockBasis(2, 6)
    a0, ad0 = ladder_operators(b, 0)
    a1, ad1 = ladder_operators(b, 1)
    comm = (a0 @ ad0 - ad0 @ a0).toarray()
    safe = b.totals < b.n_max  # top sector is where truncation leaks
    assert np.allclose(comm[np.ix_(safe, safe)], np.eye(safe.sum()), atol=1e-13)
    cross = (a0 @ ad1 - ad1 @ a0).toarray()
    assert np.abs(cross[np.ix_(safe, safe)]).max() < 1e-13
    # a |vac> = 0
    vac = np.zeros(len(b))
    vac[b.index([0, 0])] = 1.0
    assert np.linalg.norm(a0 @ vac) == 0.0
    # a+a eigenvalues are occupations
    nn = (ad0 @ a0).diagonal()
    assert np.allclose(nn, b.states[:, 0], rtol=1e-14)
    with pytest.raises(IndexError):
        lowering_operator(b, 5)


def test_single_mode_spectrum_closed_form():
    b = FockBasis(1, 10)
    g = 0.7
    mb = ModeBasis(e=[1e-12], W=np.full((1, 1, 1, 1), g), M=5)
    H = build_hamiltonian(mb, b)
    for N in (0, 2, 5, 10):
        e0, vec = ground_state(H, b, N)
        assert e0 == pytest.approx(g * N * (N - 1), abs=1e-9)
        assert np.linalg.norm(vec) == pytest.approx(1.0)


def test_no_interaction_ground_energy():
    b = FockBasis(2, 8)
    mb = ModeBasis(e=[0.5, 1.5], W=np.zeros((2, 2, 2, 2)), M=4)
    H = build_hamiltonian(mb, b)
    e0, _ = ground_state(H, b, 4)
    assert e0 == pytest.approx(4 * 0.5, abs=1e-12)


def test_hamiltonian_hermitian_commutes_with_number():
    b = FockBasis(2, 8)
    mb = ModeBasis(
        e=[0.5, 1.5],
        W=pair_interaction_tensor([[1.0, 0.3], [0.3, 0.8]], 0.2),
        M=4,
        C=1.0,
    )
    H = build_hamiltonian(mb, b, include_penalty=True)
    assert is_hermitian(H)
    n_op = number_operator(b)
    assert abs(H @ n_op - n_op @ H).max() <= 1e-12
    # penalty vanishes exactly on the target sector
    H0 = build_hamiltonian(mb, b, include_penalty=False)
    idx = b.sector(4)
    d = (H - H0).toarray()
    assert np.abs(d[np.ix_(idx, idx)]).max() == 0.0


def test_backends_build_identical_hamiltonian():
    from scipy import sparse

    b = FockBasis(3, 5)
    rng = np.random.default_rng(2)
    u = rng.standard_normal((3, 3))
    u = u @ u.T  # PSD symmetric
    mb = ModeBasis(e=[0.5, 1.0, 2.0], W=pair_interaction_tensor(u, 0.1), M=3)
    H = build_hamiltonian(mb, b)
    ref = sparse.diags(b.states.astype(float) @ mb.e) + _two_body_sparse(mb, b)
    assert abs(H - ref.tocsr()).max() < 1e-12


def test_mode_relabel_symmetry():
    # symmetric e and W: ground energy invariant under swapping the modes
    b = FockBasis(2, 8)
    u = np.array([[1.0, 0.4], [0.4, 1.0]])
    mb = ModeBasis(e=[1.0, 1.0], W=pair_interaction_tensor(u, 0.3), M=4)
    H = build_hamiltonian(mb, b)
    e0, vec = ground_state(H, b, 4)
    swapped = np.array([b.index(s[::-1]) for s in b.states])
    vs = vec[swapped]
    assert abs(vs @ H @ vs - e0) < 1e-10


def test_mode_basis_validation():
    with pytest.raises(ValueError):
        ModeBasis(e=[1.0, 0.5], W=np.zeros((2, 2, 2, 2)))  # decreasing
    with pytest.raises(ValueError):
        ModeBasis(e=[0.0], W=np.zeros((1, 1, 1, 1)))  # not positive
    W = np.zeros((2, 2, 2, 2))
    W[0, 0, 1, 1] = 1.0  # not hermitian: W_0011 != conj(W_1100)
    with pytest.raises(ValueError):
        ModeBasis(e=[1.0, 2.0], W=W)


def test_hartree_convergence_from_above_sector_sweep():
    u = np.array([[1.0, 0.3], [0.3, 0.8]])
    g, e = 0.4, np.array([0.5, 1.5])
    e_h, c = hartree_minimum(e, pair_interaction_tensor(u, g))
    assert np.linalg.norm(c) == pytest.approx(1.0)
    b = FockBasis(2, 12)
    gaps = []
    for N in range(2, 9):
        mb = ModeBasis(e=e, W=pair_interaction_tensor(u, g / N), M=N)
        e0, _ = ground_state(build_hamiltonian(mb, b), b, N)
        gaps.append(abs(e0 / N - e_h))
    assert all(g2 <= g1 + 1e-12 for g1, g2 in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.1 * e_h


def test_coherent_state_properties():
    b = FockBasis(1, 12)
    z = 0.8
    cs = coherent_state([z], b)
    assert cs.truncation_error < 1e-8
    assert np.linalg.norm(cs.vector) == pytest.approx(1.0, abs=1e-8)
    a, ad = ladder_operators(b, 0)
    assert np.linalg.norm(a @ cs.vector - z * cs.vector) < 1e-5
    nbar = np.vdot(cs.vector, (ad @ a) @ cs.vector).real
    assert nbar == pytest.approx(abs(z) ** 2, abs=1e-8)
    # vacuum
    vac = coherent_state([0.0], b)
    assert vac.vector[b.index([0])] == pytest.approx(1.0)
    assert np.linalg.norm(vac.vector) == pytest.approx(1.0)


def test_coherent_overlap_closed_form():
    b = FockBasis(1, 14)
    z1, z2 = 0.5 + 0.3j, -0.4 + 0.6j
    c1 = coherent_state([z1], b)
    c2 = coherent_state([z2], b)
    ov = np.vdot(c1.vector, c2.vector)
    expect = np.exp(-0.5 * abs(z1) ** 2 - 0.5 * abs(z2) ** 2 + np.conj(z1) * z2)
    assert abs(ov - expect) < 1e-8


def test_coherent_tail_rejected():
    with pytest.raises(ValueError):
        coherent_state([3.0], FockBasis(1, 4))


def test_symbols_reference_values():
    z = 0.7 + 0.2j
    num = SymbolPolynomial.term(1, (1,), (1,))
    assert lower_symbol(num, z) == pytest.approx(abs(z) ** 2)
    assert upper_symbol(num, z) == pytest.approx(abs(z) ** 2 - 1.0)
    quart = SymbolPolynomial.term(1, (2,), (2,))
    assert lower_symbol(quart, z) == pytest.approx(abs(z) ** 4)
    raise_op = SymbolPolynomial.term(1, (1,), (0,))
    assert lower_symbol(raise_op, z) == pytest.approx(np.conj(z))
    assert upper_symbol(raise_op, z) == pytest.approx(np.conj(z))
    with pytest.raises(ValueError):
        SymbolPolynomial.term(1, (3,), (2,))  # degree 5


def test_lower_symbol_equals_coherent_expectation():
    b = FockBasis(1, 14)
    z = 0.6 - 0.4j
    cs = coherent_state([z], b)
    for p, q in (((1,), (1,)), ((2,), (2,)), ((1,), (0,)), ((2,), (1,))):
        poly = SymbolPolynomial.term(1, p, q, coeff=0.7)
        mat = poly.to_matrix(b)
        expect = np.vdot(cs.vector, mat @ cs.vector)
        assert abs(expect - lower_symbol(poly, z)) < 1e-6


def test_upper_lower_roundtrip():
    # applying e^{+D} (finite series) to the upper symbol returns u exactly
    poly = (
        SymbolPolynomial.term(2, (1, 0), (1, 0), 0.5)
        + SymbolPolynomial.term(2, (1, 1), (1, 1), 0.25)
        + SymbolPolynomial.term(2, (0, 2), (0, 2), -0.1)
    )
    up = poly.upper()
    d1 = up.contract()
    d2 = d1.contract()
    back = up + d1 + d2.scale(0.5)
    z = np.array([0.3 + 0.1j, -0.2 + 0.5j])
    assert back.evaluate(z) == pytest.approx(poly.evaluate(z), abs=1e-12)


def test_resolution_of_identity():
    b = FockBasis(1, 12)
    assert verify_resolution(b, Z=6.0) < 1e-6
    num = SymbolPolynomial.term(1, (1,), (1,))
    assert verify_resolution(b, Z=6.0, poly=num) < 1e-6
    quart = SymbolPolynomial.term(1, (2,), (2,))
    assert verify_resolution(b, Z=6.0, poly=quart) < 1e-6
    with pytest.raises(ValueError):
        verify_resolution(FockBasis(2, 4))
    with pytest.raises(ValueError):
        verify_resolution(b, n_cut=12)


def test_error_constants_limits():
    a, E, eta, delta, J, C = 0.01, 0.01, 1.0, 0.1, 10, 1.0
    e = 1000.0 * np.arange(1, J + 1)
    vals = {}
    for N in (1e6, 1e8):
        R = N**-0.5
        ec = error_constants(
            4 * np.pi * a / N, 6 * a / (R**3 * N), delta, eta, e, J, int(N), E, C
        )
        assert ec.D1 <= 1.0 and ec.D2 >= 0.0 and ec.D3 >= 0.0
        vals[N] = ec
    ec = vals[1e8]
    assert abs(ec.D1 - (1.0 - delta)) < 0.01
    assert ec.D2 < 0.01
    assert ec.D3 / 1e8 < 0.01
    # limits are approached monotonically over the N sweep
    assert abs(ec.D1 - 0.9) < abs(vals[1e6].D1 - 0.9)
    assert ec.D2 < vals[1e6].D2
    with pytest.raises(ValueError):
        error_constants(1.0, 1.0, 0.1, 1.0, e, 20, 10, 1.0)


def test_smoothing_estimate_gaussian_sweep():
    g = Grid(3, 48, 14.0)
    phi = gaussian_field(g)
    prev = 0.0
    for R in (0.7, 1.0, 1.4, 2.0):
        lhs, rhs = smoothing_estimate_check(phi, R)
        assert lhs <= rhs
        assert lhs > prev  # grows with R toward the linear bound
        prev = lhs
    with pytest.raises(ValueError):
        smoothing_estimate_check(phi, 0.1)  # unresolved shell


def test_smoothing_estimate_vortex_state():
    g = Grid(3, 48, 14.0)
    x, y, _ = g.coords()
    phi = ComplexField(g, (x + 1j * y) * np.exp(-g.radius_sq() / 2)).normalized()
    lhs, rhs = smoothing_estimate_check(phi, 1.0)
    assert lhs <= rhs
