import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate as sint
from scipy.special import gammaln, poch

from pdmosc import quantum
from pdmosc.errors import AdmissibilityError, DomainError, SingularEndpointWarning
from pdmosc.model import AmbiguityTriple, ModelParams
from pdmosc.quantum import QuantumConfig

REF = QuantumConfig(ModelParams(1.0, 1.0), AmbiguityTriple(-0.25, -0.5), 1.0)


def closed_form_c(n, cfg):
    # c_n^2 (n!/(b)_n)^2 (1/2) (m0 omega)^(-b) Gamma(n + b) / n! = 1, b = nu + 1/2
    b = cfg.nu + 0.5
    log = (2 * (math.lgamma(n + 1) - math.log(poch(b, n))) - math.log(2.0)
           - b * math.log(cfg.m0 * cfg.omega) + gammaln(n + b) - math.lgamma(n + 1))
    return math.exp(-0.5 * log)


def test_reference_spectrum():
    assert REF.epsilon == 0.25
    assert quantum.analytic_energy(0, REF) == pytest.approx(2.1180339887498949, rel=1e-15)
    table = quantum.analytic_spectrum(REF, 6)
    assert np.all(table.gaps == 2.0)
    assert table.E[5] == pytest.approx(12.118033988749895, rel=1e-15)


def test_ground_state_ratio():
    cfg = QuantumConfig(ModelParams(2.0, 3.0), AmbiguityTriple(-0.5, 0.0))
    assert quantum.ground_state_ratio(cfg) == pytest.approx(
        quantum.analytic_energy(0, cfg) / (3.0 * 2.0), rel=1e-14)


def test_inadmissible_ordering_rejected():
    with pytest.raises(AdmissibilityError):
        QuantumConfig(ModelParams(1.0, 0.1), AmbiguityTriple(0.0, -1.0))


def test_boundary_case_warns_and_flags():
    with pytest.warns(SingularEndpointWarning):
        cfg = QuantumConfig(ModelParams(1.0, 0.5), AmbiguityTriple(0.0, -1.0))
    assert cfg.boundary_case
    assert cfg.nu == 1.0
    assert quantum.effective_potential(2.0, cfg) == pytest.approx(2.0, rel=1e-15)


def test_no_warning_away_from_boundary():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        QuantumConfig(ModelParams(1.0, 1.0), AmbiguityTriple(0.0, -1.0))


@settings(max_examples=50)
@given(omega=st.floats(0.1, 10), a=st.floats(-5, 5), alpha=st.floats(-2, 2), beta=st.floats(-2, 2))
def test_equispaced_levels_for_any_admissible_ordering(omega, a, alpha, beta):
    assume(abs(a) > 1e-3)
    t = AmbiguityTriple(alpha, beta)
    assume(a * a + t.epsilon > 0.25 + 1e-9)
    cfg = QuantumConfig(ModelParams(omega, a), t)
    E = quantum.analytic_spectrum(cfg, 8).E
    np.testing.assert_allclose(np.diff(E), 2 * omega, rtol=1e-12)
    assert np.all(quantum.analytic_gaps(cfg, 8) == 2 * omega)
    assert E[0] == pytest.approx(omega * (1 + math.sqrt(a * a + 4 * alpha * t.gamma)), rel=1e-12)


def test_effective_potential_minimum():
    xi = np.linspace(0.5, 2.0, 1501)
    v = quantum.effective_potential(xi, REF)
    assert xi[np.argmin(v)] == pytest.approx(1.0, abs=1e-12)
    assert v.min() == pytest.approx(1.0, abs=1e-15)


def test_effective_potential_domain():
    with pytest.raises(DomainError):
        quantum.effective_potential(0.0, REF)


@pytest.mark.parametrize("a", [1.0, -2.0])
def test_coordinate_map_round_trip(a):
    cfg = QuantumConfig(ModelParams(1.3, a), AmbiguityTriple(-0.25, -0.5), 0.7)
    xi = np.array([0.1, 1.0, 3.0])
    x = quantum.inverse_map(xi, cfg)
    assert np.all(np.sign(x) == np.sign(a))
    np.testing.assert_allclose(quantum.coordinate_map(x, cfg), xi, rtol=1e-15)
    with pytest.raises(DomainError):
        quantum.coordinate_map(-x, cfg)


CONFIGS = [
    REF,
    QuantumConfig(ModelParams(2.0, 1.5), AmbiguityTriple(-0.5, 0.0), 0.5),
    QuantumConfig(ModelParams(0.7, -1.0), AmbiguityTriple(0.0, -1.0), 2.0),
]


@pytest.mark.parametrize("cfg", CONFIGS)
def test_normalization_matches_closed_form(cfg):
    for n in range(6):
        assert quantum.normalize(n, cfg) == pytest.approx(closed_form_c(n, cfg), rel=1e-12)


def _inner(m, n, cfg):
    f = lambda s: quantum.wavefunction_phi(m, s, cfg) * quantum.wavefunction_phi(n, s, cfg)
    hi = quantum.xi_cutoff(max(m, n), cfg)
    return sint.quad(f, 0, hi, limit=400, epsabs=1e-13, epsrel=1e-13)[0]


@pytest.mark.parametrize("cfg", CONFIGS[:2])
def test_gram_matrix_identity(cfg):
    gram = np.array([[_inner(m, n, cfg) for n in range(6)] for m in range(6)])
    assert np.max(np.abs(gram - np.eye(6))) < 1e-8


def test_node_counts_ref():
    xi = np.linspace(1e-3, 8.0, 4001)
    counts = [quantum.count_nodes(quantum.wavefunction_phi(n, xi, REF)) for n in range(4)]
    assert counts == [0, 1, 2, 3]


def test_count_nodes_deadband():
    assert quantum.count_nodes(np.array([1.0, 1e-20, -1e-20, 1.0])) == 0
    assert quantum.count_nodes(np.array([1.0, -1.0, 1.0])) == 2


@pytest.mark.parametrize("cfg", CONFIGS)
def test_tise_residuals(cfg):
    rng = np.random.default_rng(7)
    for n in range(4):
        xi = np.sort(rng.uniform(0.05, 3.0, 50)) / math.sqrt(cfg.m0 * cfg.omega)
        assert np.max(quantum.tise_xi_residual(n, cfg, xi)) < 1e-6
        x = quantum.inverse_map(xi, cfg)
        assert np.max(quantum.tise_xspace_residual(n, cfg, x)) < 1e-6


def test_xspace_residual_detects_wrong_energy(monkeypatch):
    x = np.linspace(0.1, 2.0, 20)
    monkeypatch.setattr(quantum, "analytic_energy", lambda n, cfg: cfg.omega * (2 * n + 1.5))
    assert np.max(quantum.tise_xspace_residual(0, REF, x)) > 1e-2


@pytest.mark.parametrize("cfg", CONFIGS)
def test_x_norm_factor(cfg):
    hi = quantum.inverse_map(quantum.xi_cutoff(1, cfg), cfg)
    lo, hi = sorted((0.0, hi))
    f = lambda x: quantum.wavefunction_psi(1, x, cfg) ** 2
    got = sint.quad(f, lo, hi, limit=400, epsrel=1e-12, points=None)[0]
    assert got == pytest.approx(quantum.x_norm_factor(cfg), rel=1e-9)


def test_m0_is_a_gauge():
    x = np.linspace(0.01, 3.0, 200)
    base = None
    for m0 in (0.5, 1.0, 2.0):
        cfg = QuantumConfig(ModelParams(1.0, 1.0), AmbiguityTriple(-0.25, -0.5), m0)
        assert quantum.analytic_spectrum(cfg, 6).E.tolist() == quantum.analytic_spectrum(REF, 6).E.tolist()
        shapes = []
        for n in range(3):
            psi = quantum.wavefunction_psi(n, x, cfg)
            shapes.append(psi / np.max(np.abs(psi)))
        if base is None:
            base = shapes
        for s, b in zip(shapes, base):
            assert np.max(np.abs(s - b)) < 1e-10


def test_mirror_branch_wavefunctions():
    neg = QuantumConfig(ModelParams(1.0, -1.0), REF.ambiguity)
    x = np.linspace(0.05, 2.0, 40)
    for n in range(3):
        np.testing.assert_allclose(quantum.wavefunction_psi(n, -x, neg),
                                   quantum.wavefunction_psi(n, x, REF), rtol=1e-13)


def test_wavefunction_object():
    wf = quantum.wavefunction(2, REF, "x")
    assert wf.energy == quantum.analytic_energy(2, REF)
    assert wf(0.5) == quantum.wavefunction_psi(2, 0.5, REF)
    with pytest.raises(ValueError):
        quantum.wavefunction(0, REF, "p")


def test_spectrum_table_validation():
    with pytest.raises(ValueError):
        quantum.SpectrumTable(np.arange(3), np.array([1.0, 3.0, 2.0]), "x")


def test_effective_potential_value_and_harmonic_limit():
    assert quantum.effective_potential(1.0, REF) == 1.0
    with pytest.warns(SingularEndpointWarning):
        cfg = QuantumConfig(ModelParams(1.3, 0.5), AmbiguityTriple(0.0, -1.0), 0.8)
    xi = np.linspace(0.1, 3, 7)
    np.testing.assert_allclose(quantum.effective_potential(xi, cfg), 0.5 * 0.8 * 1.3**2 * xi**2,
                               rtol=1e-15)


def test_coordinate_map_values():
    assert REF.eta == 0.25
    assert quantum.coordinate_map(1.0, REF) == 2.0
    assert quantum.coordinate_map(REF.eta, REF) == 1.0
    x = np.geomspace(1e-3, 1e2, 40)
    np.testing.assert_allclose(quantum.inverse_map(quantum.coordinate_map(x, REF), REF), x,
                               rtol=1e-15)


def test_phi_from_psi_round_trip():
    x = np.geomspace(1e-3, 10, 30)
    xi = quantum.coordinate_map(x, REF)
    for n in range(3):
        np.testing.assert_allclose(np.sqrt(xi) * quantum.wavefunction_psi(n, x, REF),
                                   quantum.wavefunction_phi(n, xi, REF), rtol=1e-12)


def test_psi0_small_x_power_law():
    x = np.array([1e-8, 1e-7, 1e-6])
    ratio = quantum.wavefunction_psi(0, x, REF) / x ** ((REF.nu - 0.5) / 2)
    assert np.ptp(ratio) / ratio[0] < 1e-5


def test_doubling_m0_omega_rescales_c0():
    double = QuantumConfig(REF.params, REF.ambiguity, 2.0)
    ratio = quantum.normalize(0, double) / quantum.normalize(0, REF)
    assert ratio == pytest.approx(2 ** ((REF.nu + 0.5) / 2), rel=1e-13)


@given(alpha=st.floats(-3, 3), beta=st.floats(-3, 3))
def test_xspace_coefficient_identity(alpha, beta):
    t = AmbiguityTriple(alpha, beta)
    assert alpha * (alpha + beta + 1) == pytest.approx(-t.epsilon / 4, rel=1e-12, abs=1e-12)


def test_xspace_residual_is_m0_independent():
    x = np.linspace(0.1, 3.0, 25)
    ref = quantum.tise_xspace_residual(1, REF, x)
    for m0 in (0.5, 2.0):
        cfg = QuantumConfig(REF.params, REF.ambiguity, m0)
        assert np.max(np.abs(quantum.tise_xspace_residual(1, cfg, x) - ref)) < 1e-8


def test_ground_energy_increases_with_epsilon():
    alphas = np.linspace(-1.0, -0.01, 20)
    cfgs = [QuantumConfig(REF.params, AmbiguityTriple(al, 0.0)) for al in alphas]
    eps = np.array([c.epsilon for c in cfgs])
    e0 = np.array([quantum.analytic_energy(0, c) for c in cfgs])
    order = np.argsort(eps)
    assert np.all(np.diff(e0[order]) > 0)
    np.testing.assert_allclose(e0, 1 + np.sqrt(1 + eps), rtol=1e-15)


def test_exact_spacing_up_to_fifty():
    for triple in [(-0.25, -0.5), (0.0, -1.0), (-0.5, 0.0), (0.1, -0.5)]:
        cfg = QuantumConfig(ModelParams(1.7, 1.0), AmbiguityTriple(*triple))
        assert np.all(quantum.analytic_gaps(cfg, 51) == 2 * 1.7)


def test_node_counts_up_to_ten():
    xi = np.linspace(1e-3, 12.0, 20001)
    for n in range(11):
        assert quantum.count_nodes(quantum.wavefunction_phi(n, xi, REF)) == n


def test_unit_norm_in_xi():
    for n in range(4):
        got = sint.quad(lambda s: quantum.wavefunction_phi(n, s, REF) ** 2, 0,
                        quantum.xi_cutoff(n, REF), limit=400, epsrel=1e-13)[0]
        assert got == pytest.approx(1.0, abs=1e-8)
