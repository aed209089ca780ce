"""Interpolation data, Pick-matrix obstructions, and lifting quotient interpolants.

A dataset is a list of distinct nodes zeta_j in the unit disc with n x n
matrix targets W_j.  Projecting the targets gives quotient points; a
quotient-valued map f with f(zeta_j) = pi(W_j) is lifted to a matrix-valued
F with F(zeta_j) = W_j and mu(F) = mu(realize(f)) by conjugating the
realization with 1 (+) exp(Psi(zeta)), where Psi interpolates logarithms of
the Krylov matrices of the targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    InputError,
    InterpolationMismatch,
    MembershipFailure,
    NotGeneric,
    NotHermitian,
    QuotientRangeFailure,
    RetryExhausted,
    SizeMismatch,
)
from .matrices import as_cmatrix, krylov_gamma, matrix_exp, matrix_log
from .mu import mu_eval_batch
from .numerics import as_cx, default_rng
from .quotient import (
    GenericityReport,
    QuotientPoint,
    char1_slack_batch,
    genericity,
    membership_char1,
    pi_n,
    pi_n_batch,
    ReducedRational,
    psi_at,
    psi_reduced,
    reduced_at,
    realize_batch,
)
from .verdict import DEFAULT_MARGIN

NODE_MARGIN = 1e-12
NODE_SEPARATION = 1e-10
LIFT_RTOL = 1e-7
MATCH_TOL = 1e-8
PSD_TOL = 1e-9


@dataclass(frozen=True)
class PickDatum:
    node: complex
    target: np.ndarray

    def __post_init__(self):
        node = as_cx(self.node)
        if abs(node) >= 1 - NODE_MARGIN:
            raise InputError(f"node {node} is not inside the unit disc")
        object.__setattr__(self, "node", node)
        object.__setattr__(self, "target", as_cmatrix(self.target))


@dataclass(frozen=True)
class PickDataset:
    n: int
    data: tuple[PickDatum, ...]

    def __post_init__(self):
        data = tuple(self.data)
        if not data:
            raise InputError("dataset is empty")
        for d in data:
            if d.target.shape != (self.n, self.n):
                raise SizeMismatch(f"target of shape {d.target.shape} in a dataset with n={self.n}")
        nodes = np.array([d.node for d in data])
        gaps = np.abs(nodes[:, None] - nodes[None, :]) + np.eye(len(nodes))
        if np.min(gaps) <= NODE_SEPARATION:
            raise InputError("nodes are not pairwise distinct")
        object.__setattr__(self, "data", data)

    @classmethod
    def build(cls, nodes, targets) -> "PickDataset":
        targets = [as_cmatrix(t) for t in targets]
        if len(nodes) != len(targets):
            raise SizeMismatch(f"{len(nodes)} nodes but {len(targets)} targets")
        return cls(targets[0].shape[0], tuple(PickDatum(z, W) for z, W in zip(nodes, targets)))

    @property
    def nodes(self) -> np.ndarray:
        return np.array([d.node for d in self.data])

    @property
    def targets(self) -> np.ndarray:
        return np.stack([d.target for d in self.data])

    def __len__(self):
        return len(self.data)


@dataclass(frozen=True)
class MatrixPolynomial:
    """sum_k C_k z^k with square coefficient matrices, ascending."""

    coeffs: np.ndarray  # (d+1, m, m)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.broadcast_to(self.coeffs[-1], z.shape + self.coeffs.shape[1:]).copy()
        for C in self.coeffs[-2::-1]:
            out = out * z[..., None, None] + C
        return out

    @classmethod
    def interpolate(cls, nodes, values) -> "MatrixPolynomial":
        """Minimal-degree Lagrange interpolant through (nodes[j], values[j])."""
        nodes = np.asarray(nodes, dtype=complex)
        values = np.asarray(values, dtype=complex)
        M, m = len(nodes), values.shape[-1]
        V = np.vander(nodes, M, increasing=True)
        C = np.linalg.solve(V, values.reshape(M, m * m))
        return cls(C.reshape(M, m, m))


@dataclass(frozen=True)
class QuotientMap:
    """A quotient-valued polynomial map: x_i(zeta) and y_i(zeta) with ascending coefficients."""

    x_coeffs: np.ndarray  # (n, d+1)
    y_coeffs: np.ndarray  # (n-1, d+1)

    def __post_init__(self):
        xc = np.atleast_2d(np.asarray(self.x_coeffs, dtype=complex))
        yc = np.atleast_2d(np.asarray(self.y_coeffs, dtype=complex))
        if yc.shape[0] != xc.shape[0] - 1:
            raise SizeMismatch(f"{xc.shape[0]} x-components need {xc.shape[0] - 1} y-components")
        object.__setattr__(self, "x_coeffs", xc)
        object.__setattr__(self, "y_coeffs", yc)

    @property
    def n(self) -> int:
        return self.x_coeffs.shape[0]

    def eval_batch(self, zeta) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) with rows f(zeta_k) for a 1-d array of zeta."""
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))

        def ev(C):
            out = np.zeros((len(zeta), C.shape[0]), dtype=complex)
            for k in range(C.shape[1] - 1, -1, -1):
                out = out * zeta[:, None] + C[:, k]
            return out

        return ev(self.x_coeffs), ev(self.y_coeffs)

    def __call__(self, zeta) -> QuotientPoint:
        X, Y = self.eval_batch(zeta)
        return QuotientPoint(self.n, X[0], Y[0])


@dataclass
class LiftArtifacts:
    phi: Callable[[complex], np.ndarray]
    gammas: list[np.ndarray]
    logs: list[np.ndarray]
    psi_poly: MatrixPolynomial
    F: Callable[[complex], np.ndarray]
    node_residuals: list[float] = field(default_factory=list)
    branch: str = "principal"


@dataclass(frozen=True)
class NecessaryReport:
    verdict: str  # "Violated" or "ConsistentAtSamples"
    min_eig: float
    worst_z: complex
    samples: list[tuple[complex, float]]
    tol: float


# -- projection and Pick matrices -----------------------------------------------


def project_dataset(ds: PickDataset, rng=None) -> list[tuple[QuotientPoint, GenericityReport]]:
    rng = default_rng(rng)
    return [(pi_n(d.target), genericity(d.target, rng)) for d in ds.data]


def pick_matrix(points: list[QuotientPoint], nodes, z, reduced: list[ReducedRational] | None = None) -> np.ndarray:
    """[(1 - conj(Psi_j) Psi_k) / (1 - conj(zeta_j) zeta_k)] with Psi_j = Psi(z; q_j).

    ``reduced`` optionally supplies precomputed reduced rational functions of the points.
    """
    nodes = np.asarray(nodes, dtype=complex)
    if len(points) != len(nodes):
        raise SizeMismatch(f"{len(points)} points but {len(nodes)} nodes")
    if abs(complex(z)) > 1 + 1e-12:
        raise InputError("z must lie in the closed unit disc")
    if reduced is None:
        psi = np.array([psi_at(q, z) for q in points])
    else:
        psi = np.array([reduced_at(r, z) for r in reduced])
    return (1 - np.conj(psi)[:, None] * psi[None, :]) / (1 - np.conj(nodes)[:, None] * nodes[None, :])


def psd_check(H, tol: float = PSD_TOL) -> tuple[bool, float]:
    """Smallest eigenvalue of a Hermitian matrix (symmetrized first) and whether it is >= -tol."""
    H = as_cmatrix(H)
    if np.linalg.norm(H - H.conj().T) > 1e-10 * max(1.0, np.linalg.norm(H)):
        raise NotHermitian("matrix is not Hermitian within 1e-10")
    H = 0.5 * (H + H.conj().T)
    lam = float(np.linalg.eigvalsh(H)[0])
    return lam >= -tol, lam


def sample_points(z_samples: int) -> np.ndarray:
    """``z_samples`` points on the unit circle followed by 25 interior points (0 and a 4 x 6 polar grid)."""
    boundary = np.exp(2j * np.pi * np.arange(z_samples) / z_samples)
    radii = np.array([0.25, 0.5, 0.75, 0.9])
    angles = 2 * np.pi * (np.arange(6) + 0.5) / 6
    interior = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    return np.concatenate([boundary, [0.0], interior])


def necessary_report(ds: PickDataset, z_samples: int = 64, tol: float = PSD_TOL,
                     margin: float = DEFAULT_MARGIN) -> NecessaryReport:
    """min over sampled z of the smallest Pick-matrix eigenvalue; negative beyond tol is a certified obstruction."""
    points = []
    for j, d in enumerate(ds.data):
        q = pi_n(d.target)
        v = membership_char1(q, margin)
        if not v.inside:
            raise MembershipFailure(f"target {j} projects to a point that is not Inside ({v.verdict.value})", j)
        points.append(q)
    reduced = [psi_reduced(q) for q in points]
    samples = []
    for z in sample_points(z_samples):
        _, lam = psd_check(pick_matrix(points, ds.nodes, z, reduced), tol)
        samples.append((complex(z), lam))
    k = int(np.argmin([s[1] for s in samples]))
    min_eig = samples[k][1]
    verdict = "Violated" if min_eig < -tol else "ConsistentAtSamples"
    return NecessaryReport(verdict, min_eig, samples[k][0], samples, tol)


# -- lifting ----------------------------------------------------------------------


def disc_grid(radii: int, angles: int, rmax: float = 1.0) -> np.ndarray:
    """Polar grid with radii (k+1)/(radii+1) * rmax and equally spaced angles."""
    r = rmax * (np.arange(1, radii + 1) / (radii + 1))
    a = 2 * np.pi * np.arange(angles) / angles
    return (r[:, None] * np.exp(1j * a[None, :])).ravel()


def check_range(f: QuotientMap, radii: int = 24, angles: int = 48, margin: float = 1e-4) -> list[complex]:
    """Grid points zeta where f(zeta) is not certified Inside with the given margin."""
    zeta = np.concatenate([[0.0], disc_grid(radii, angles)])
    X, Y = f.eval_batch(zeta)
    slack = char1_slack_batch(X, Y)["slack"]
    return [complex(z) for z in zeta[~(slack > margin)]]


def lift(ds: PickDataset, f: QuotientMap, *, range_grid: tuple[int, int] = (24, 48), range_margin: float = 1e-4,
         tol: float = LIFT_RTOL) -> LiftArtifacts:
    """Matrix-valued interpolant F with F(zeta_j) = W_j and mu(F) = mu(realize(f))."""
    if f.n != ds.n:
        raise SizeMismatch(f"map of size {f.n} for a dataset with n={ds.n}")
    nodes, W = ds.nodes, ds.targets
    for j, Wj in enumerate(W):
        if not genericity(Wj).generic:
            raise NotGeneric(f"target {j} is not generic", j)
    Xn, Yn = f.eval_batch(nodes)
    Xw, Yw = pi_n_batch(W)
    for j in range(len(nodes)):
        scale = max(1.0, float(np.max(np.abs(np.concatenate([Xw[j], Yw[j]])))))
        gap = float(np.max(np.abs(np.concatenate([Xn[j] - Xw[j], Yn[j] - Yw[j]]))))
        if gap > MATCH_TOL * scale:
            raise InterpolationMismatch(f"f(zeta_{j}) differs from the projection of W_{j} by {gap:.3e}", j)
    bad = check_range(f, *range_grid, margin=range_margin)
    if bad:
        raise QuotientRangeFailure(f"f leaves the domain at {len(bad)} grid point(s)", bad)

    gammas = [krylov_gamma(Wj[1:, 1:], Wj[1:, 0]) for Wj in W]
    logs = [matrix_log(G) for G in gammas]
    psi_poly = MatrixPolynomial.interpolate(nodes, np.stack(logs))

    def phi(zeta):
        X, Y = f.eval_batch(zeta)
        return realize_batch(X, Y)

    def F(zeta):
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        E = psi_poly(zeta)
        base = phi(zeta)
        left, right = np.zeros_like(base), np.zeros_like(base)
        left[:, 0, 0] = right[:, 0, 0] = 1.0
        left[:, 1:, 1:] = matrix_exp(E)
        right[:, 1:, 1:] = matrix_exp(-E)
        return left @ base @ right

    residuals = []
    at_nodes = F(nodes)
    for j, Wj in enumerate(W):
        res = float(np.linalg.norm(at_nodes[j] - Wj))
        residuals.append(res)
        if res > tol * max(1.0, float(np.linalg.norm(Wj))):
            raise InterpolationMismatch(f"lifted map misses W_{j} by {res:.3e}", j)

    return LiftArtifacts(
        phi=lambda z: phi(z)[0] if np.ndim(z) == 0 else phi(z),
        gammas=gammas,
        logs=logs,
        psi_poly=psi_poly,
        F=lambda z: F(z)[0] if np.ndim(z) == 0 else F(z),
        node_residuals=residuals,
    )


def lift_report(art: LiftArtifacts, grid: int = 16, tol: float = 1e-6) -> dict:
    """mu of F on a grid x grid polar grid of the disc."""
    zeta = disc_grid(grid, grid)
    out = mu_eval_batch(art.F(zeta), tol=tol)
    k = int(np.argmax(out["upper"]))
    return {
        "grid": grid,
        "mu_max": float(out["value"][k]),
        "mu_max_upper": float(out["upper"][k]),
        "argmax_zeta": complex(zeta[k]),
        "node_residuals": list(art.node_residuals),
    }


# -- synthesis --------------------------------------------------------------------


def _boundary_mu_max(A0, A1, samples: int = 64, rounds: int = 3, width: int = 32) -> float:
    """max over |zeta| = 1 of mu(A0 + zeta A1): sampling, then zooming around the best angle."""

    def mu_at(t, tol=1e-4):
        return mu_eval_batch(A0[None] + np.exp(1j * t)[:, None, None] * A1[None], tol=tol)["value"]

    t = 2 * np.pi * np.arange(samples) / samples
    vals = mu_at(t)
    k = int(np.argmax(vals))
    best_t, best = t[k], float(vals[k])
    half = 2 * np.pi / samples
    for _ in range(rounds):
        t = best_t + np.linspace(-half, half, width + 1)
        vals = mu_at(t)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best_t, best = t[k], float(vals[k])
        half *= 2.0 / width
    return float(mu_at(np.array([best_t]), tol=1e-10)[0])


def _draw_nodes(rng, M: int, radii: tuple[float, float] = (0.6, 0.8), jitter: float = 0.3) -> np.ndarray:
    """M nodes on a jittered ring: equally spaced angles with a random phase.

    Spreading the nodes keeps the Lagrange interpolant of the logarithms
    moderate away from the nodes, and with it the conditioning of exp(Psi).
    """
    phase = rng.uniform(0, 2 * np.pi)
    angles = phase + 2 * np.pi * np.arange(M) / M + (rng.uniform(-jitter, jitter, M) if M > 1 else 0.0)
    return rng.uniform(*radii, M) * np.exp(1j * angles)


def synthesize_instance(n: int, M: int, seed=None, *, target: float = 0.9, max_retries: int = 20):
    """A feasible dataset W_j = F0(zeta_j) with F0(zeta) = c (A0 + zeta A1) and max_{|zeta|=1} mu(F0) = target.

    Returns (dataset, f) where f = pi o F0, recovered exactly from its values
    at n+1 roots of unity (each component has degree <= n in zeta).
    """
    if n < 2 or M < 1:
        raise InputError("need n >= 2 and M >= 1")
    rng = default_rng(seed)
    for _ in range(max_retries):
        A0 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        peak = _boundary_mu_max(A0, A1)
        if not np.isfinite(peak) or peak <= 0:
            continue
        # mu is positively homogeneous, so scaling fixes the boundary peak exactly
        c = target / peak
        A0, A1 = c * A0, c * A1
        nodes = _draw_nodes(rng, M)
        W = A0[None] + nodes[:, None, None] * A1[None]
        if not all(genericity(Wj).generic for Wj in W):
            continue
        roots = np.exp(2j * np.pi * np.arange(n + 1) / (n + 1))
        X, Y = pi_n_batch(A0[None] + roots[:, None, None] * A1[None])
        f = QuotientMap(np.fft.fft(X, axis=0).T / (n + 1), np.fft.fft(Y, axis=0).T / (n + 1))
        return PickDataset.build(nodes, W), f
    raise RetryExhausted(f"no generic instance after {max_retries} draws")
