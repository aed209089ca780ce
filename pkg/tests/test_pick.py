import numpy as np
import pytest

from conftest import cgauss
from muquotient.errors import (
    InputError,
    InterpolationMismatch,
    MembershipFailure,
    NotGeneric,
    NotHermitian,
    QuotientRangeFailure,
)
from muquotient.matrices import matrix_exp
from muquotient.mu import mu_eval, mu_eval_batch
from muquotient.pick import (
    MatrixPolynomial,
    PickDataset,
    QuotientMap,
    disc_grid,
    lift,
    necessary_report,
    pick_matrix,
    project_dataset,
    psd_check,
    sample_points,
    synthesize_instance,
)
from muquotient.quotient import QuotientPoint, genericity, pi_n, pi_n_batch, psi_at, realize


def constant_map(W):
    q = pi_n(W)
    return QuotientMap(q.x[:, None], q.y[:, None])


def shift(n, corner):
    """corner in the (0, 0) slot over a lower shift: generic, projects to x = (corner, 0, ...), y = 0."""
    W = np.diag(np.ones(n - 1), -1).astype(complex)
    W[0, 0] = corner
    return W


@pytest.fixture(scope="module")
def instances():
    return {(n, M): synthesize_instance(n, M, seed=100 * n + M) for n in (2, 3) for M in (1, 3)}


# -- datasets and projection ---------------------------------------------------------


def test_dataset_validation():
    with pytest.raises(InputError):
        PickDataset.build([0.2, 0.2], [np.eye(2), np.eye(2)])
    with pytest.raises(InputError):
        PickDataset.build([1.0], [np.eye(2)])
    with pytest.raises(InputError):
        PickDataset.build([0.1, 0.2], [np.eye(2), np.eye(3)])


def test_project_dataset_zero_targets():
    ds = PickDataset.build([0.1, -0.3j], [np.zeros((3, 3))] * 2)
    out = project_dataset(ds)
    assert all(np.all(q.x == 0) and np.all(q.y == 0) for q, _ in out)
    assert not any(rep.generic for _, rep in out)


def test_project_dataset_realized_targets_are_generic(rng):
    targets = [realize(QuotientPoint.of(cgauss(rng, 3), cgauss(rng, 2))) for _ in range(4)]
    ds = PickDataset.build([0.1, 0.2j, -0.3, 0.4 - 0.1j], targets)
    assert all(rep.generic for _, rep in project_dataset(ds))


def test_project_dataset_mixed_flags(rng):
    targets = [np.zeros((3, 3)), cgauss(rng, 3, 3), np.eye(3)]
    ds = PickDataset.build([0.1, 0.2, 0.3], targets)
    flags = [rep.generic for _, rep in project_dataset(ds, rng=1)]
    assert flags == [genericity(W, 1).generic for W in targets] == [False, True, False]


# -- Pick matrices -------------------------------------------------------------------


def test_pick_matrix_single_datum(rng):
    q = pi_n(0.2 * cgauss(rng, 3, 3))
    H = pick_matrix([q], [0.4j], 0.3)
    expected = (1 - abs(psi_at(q, 0.3)) ** 2) / (1 - 0.16)
    assert H.shape == (1, 1) and H[0, 0] == pytest.approx(expected) and H[0, 0].real > 0


def test_pick_matrix_with_vanishing_psi_is_szego_kernel(rng):
    nodes = 0.9 * np.sqrt(rng.random(5)) * np.exp(2j * np.pi * rng.random(5))
    H = pick_matrix([QuotientPoint.zero(3)] * 5, nodes, 0.5)
    assert np.allclose(H, 1 / (1 - np.conj(nodes)[:, None] * nodes[None, :]))
    assert psd_check(H)[0]


def test_pick_matrix_is_hermitian(instances):
    ds, _ = instances[(3, 3)]
    points = [q for q, _ in project_dataset(ds)]
    for z in (0, 0.5j, np.exp(0.3j)):
        H = pick_matrix(points, ds.nodes, z)
        assert np.allclose(H, H.conj().T, atol=1e-14)


def test_psd_check_examples(rng):
    assert psd_check(np.eye(3)) == (True, pytest.approx(1))
    ok, lam = psd_check([[1, 2], [2, 1]])
    assert not ok and lam == pytest.approx(-1)
    G = cgauss(rng, 4, 4)
    assert psd_check(G.conj().T @ G)[0]
    with pytest.raises(NotHermitian):
        psd_check([[1, 2], [0, 1]])


def test_sample_points_layout():
    z = sample_points(64)
    assert len(z) == 89
    assert np.allclose(np.abs(z[:64]), 1) and np.all(np.abs(z[64:]) < 1)


# -- necessary condition ----------------------------------------------------------


def test_necessary_single_datum_is_consistent(rng):
    W = cgauss(rng, 3, 3)
    W = 0.5 * W / mu_eval(W).value
    rep = necessary_report(PickDataset.build([0.2], [W]))
    assert rep.verdict == "ConsistentAtSamples" and rep.min_eig > 0


def test_necessary_on_synthesized_instances(instances):
    for ds, _ in instances.values():
        rep = necessary_report(ds)
        assert rep.verdict == "ConsistentAtSamples" and rep.min_eig >= -1e-9
        assert len(rep.samples) == 89


def test_necessary_detects_scalar_pick_violation():
    # Psi(0) = W[0, 0] = +-0.9 at nodes +-0.05: the two-point Pick condition fails at z = 0
    for n in (2, 3, 4):
        ds = PickDataset.build([0.05, -0.05], [shift(n, 0.9), shift(n, -0.9)])
        rep = necessary_report(ds)
        assert rep.verdict == "Violated" and rep.min_eig < -1e-9
        ok, lam = psd_check(pick_matrix([pi_n(W) for W in ds.targets], ds.nodes, rep.worst_z))
        assert not ok and lam == pytest.approx(rep.min_eig)


def test_necessary_refuses_outside_targets():
    ds = PickDataset.build([0.1, 0.2], [shift(3, 0.5), shift(3, 2.0)])
    with pytest.raises(MembershipFailure) as err:
        necessary_report(ds)
    assert err.value.index == 1


# -- lifting ---------------------------------------------------------------------


def test_matrix_polynomial_interpolates(rng):
    nodes = cgauss(rng, 4) * 0.3
    values = cgauss(rng, 4, 3, 3)
    P = MatrixPolynomial.interpolate(nodes, values)
    assert P.degree == 3
    assert np.allclose(P(nodes), values, atol=1e-9)


def test_lift_single_node_is_exact(rng):
    for n in (2, 3, 4):
        W = cgauss(rng, n, n)
        W = 0.7 * W / mu_eval(W).value
        art = lift(PickDataset.build([0.3j], [W]), constant_map(W))
        assert art.node_residuals[0] <= 1e-12 * max(1, np.linalg.norm(W))
        assert np.allclose(art.F(0.3j), W, atol=1e-12)


def test_lift_synthesized_instances(instances):
    for ds, f in instances.values():
        art = lift(ds, f)
        scale = max(1.0, max(np.linalg.norm(W) for W in ds.targets))
        assert max(art.node_residuals) <= 1e-7 * scale
        assert mu_eval_batch(art.F(disc_grid(16, 16)), decide=(1.0, 1.0))["upper"].max() < 1


def test_lift_artifact_invariants(instances):
    ds, f = instances[(3, 3)]
    art = lift(ds, f)
    assert art.branch == "principal"
    for j, zeta in enumerate(ds.nodes):
        G, L, W = art.gammas[j], art.logs[j], ds.targets[j]
        assert np.allclose(matrix_exp(L), G, atol=1e-9)
        assert np.allclose(art.psi_poly(np.array([zeta]))[0], L, atol=1e-9)
        # conjugating the realization by 1 (+) Gamma reproduces the target, first row included
        n = W.shape[0]
        T = np.eye(n, dtype=complex)
        T[1:, 1:] = G
        C = T @ art.phi(zeta) @ np.linalg.inv(T)
        assert np.allclose(C[0], W[0], atol=1e-8) and np.allclose(C, W, atol=1e-8)


def test_conjugation_keeps_mu_along_the_disc(instances):
    ds, f = instances[(3, 3)]
    art = lift(ds, f)
    zeta = disc_grid(4, 8)
    mu_F = mu_eval_batch(art.F(zeta), tol=1e-9)["value"]
    mu_phi = mu_eval_batch(art.phi(zeta), tol=1e-9)["value"]
    assert np.allclose(mu_F, mu_phi, rtol=1e-6)


def test_lift_refuses_non_generic_target(rng):
    ds = PickDataset.build([0.1, 0.2], [0.2 * cgauss(rng, 3, 3), np.zeros((3, 3))])
    with pytest.raises(NotGeneric) as err:
        lift(ds, constant_map(ds.targets[0]))
    assert err.value.index == 1


def test_lift_refuses_mismatched_map(rng):
    W = 0.2 * cgauss(rng, 3, 3)
    with pytest.raises(InterpolationMismatch):
        lift(PickDataset.build([0.1], [W]), constant_map(1.1 * W))


def test_lift_refuses_map_leaving_the_domain():
    # f(zeta) = pi(shift(2, 2 zeta)) has |Psi| = 2|zeta|, leaving the domain for |zeta| >= 1/2
    ds = PickDataset.build([0.1], [shift(2, 0.2)])
    f = QuotientMap([[0, 2], [0, 0]], [[0, 0]])
    with pytest.raises(QuotientRangeFailure) as err:
        lift(ds, f)
    assert err.value.zetas and min(abs(z) for z in err.value.zetas) >= 0.49


# -- synthesis ---------------------------------------------------------------------


def test_synthesized_instance_properties(instances):
    for (n, M), (ds, f) in instances.items():
        assert ds.n == n and len(ds) == M
        assert all(mu_eval(W).value < 1 for W in ds.targets)
        X, Y = f.eval_batch(ds.nodes)
        Xw, Yw = pi_n_batch(ds.targets)
        assert np.abs(X - Xw).max() <= 1e-10 and np.abs(Y - Yw).max() <= 1e-10
        assert all(rep.generic for _, rep in project_dataset(ds))
        assert f.x_coeffs.shape[1] == n + 1


def test_synthesized_boundary_peak():
    ds, f = synthesize_instance(3, 2, seed=5)
    # recover F0 from the dataset, which is affine in zeta, and scan the circle densely
    (z0, z1), (W0, W1) = ds.nodes, ds.targets
    A1 = (W1 - W0) / (z1 - z0)
    A0 = W0 - z0 * A1
    t = 2 * np.pi * np.arange(4096) / 4096
    peak = mu_eval_batch(A0[None] + np.exp(1j * t)[:, None, None] * A1[None], tol=1e-9)["value"].max()
    assert abs(peak - 0.9) <= 0.01


def test_synthesis_is_deterministic():
    (ds1, f1), (ds2, f2) = synthesize_instance(3, 2, seed=9), synthesize_instance(3, 2, seed=9)
    assert np.array_equal(ds1.nodes, ds2.nodes) and np.array_equal(ds1.targets, ds2.targets)
    assert np.array_equal(f1.x_coeffs, f2.x_coeffs)


def test_synthesis_validates_sizes():
    with pytest.raises(InputError):
        synthesize_instance(1, 2)
    with pytest.raises(InputError):
        synthesize_instance(3, 0)
