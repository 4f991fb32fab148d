"""Optical matrix family of a homogeneous non-magnetic crystal.

Plane-wave propagation along a unit direction s reduces to the eigenvalue
problem A(s) u = lambda u with A(s) = (I - s s^T) eta(s), where eta is the
inverse dielectric tensor and lambda = n^-2 fixes the refractive index n.
eta splits into a constant complex-symmetric part U (birefringence, with
dichroism in the imaginary part) and a skew part G built from the optical
activity vector g(s) = gamma . s (chirality), linear in s.

The direction is parametrized by the upper-hemisphere chart (s1, s2) with
s3 = +sqrt(1 - s1^2 - s2^2); ``family_adapter`` exposes A over this chart as
a MatrixFamily with analytic first and second derivatives.

Structural identities: s^T A(s) = 0 (s is a left eigenvector with eigenvalue
zero), so A always has a zero eigenvalue and the physics lives in the other
two.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, DimensionError, DomainError
from .family import MatrixFamily
from . import numkit

#: Chart guard margin: points with s1^2 + s2^2 >= 1 - margin are rejected so
#: finite-difference stencils of consumers stay inside the hemisphere.
CHART_MARGIN = 1e-6


def _symmetric3(name, value) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    if arr.shape != (3, 3):
        raise DimensionError(f"{name} must be 3x3, got {arr.shape}")
    if not np.allclose(arr, arr.T, rtol=0, atol=1e-12):
        raise DimensionError(f"{name} must be symmetric (componentwise)")
    return arr


@dataclass(frozen=True)
class DielectricSpec:
    """Crystal data: anisotropy tensor U and optical activity tensor gamma.

    Both are complex symmetric 3x3 (plain transpose symmetry, not Hermitian).
    """

    anisotropy: np.ndarray
    activity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "anisotropy", _symmetric3("anisotropy", self.anisotropy))
        object.__setattr__(self, "activity", _symmetric3("activity", self.activity))


def direction(s1: float, s2: float) -> np.ndarray:
    """Unit direction on the upper hemisphere from chart coordinates."""
    rho2 = s1 * s1 + s2 * s2
    if rho2 >= 1.0:
        raise DomainError(f"chart point ({s1}, {s2}) outside the unit disk")
    return np.array([s1, s2, np.sqrt(1.0 - rho2)])


def gyration_matrix(g) -> np.ndarray:
    """Skew-symmetric chirality contribution for activity vector g.

    G = i * [[0, -g3, g2], [g3, 0, -g1], [-g2, g1, 0]]; satisfies G = -G^T.
    """
    g = np.asarray(g, dtype=complex)
    if g.shape != (3,):
        raise DimensionError(f"activity vector must have 3 entries, got {g.shape}")
    return 1j * np.array([
        [0.0, -g[2], g[1]],
        [g[2], 0.0, -g[0]],
        [-g[1], g[0], 0.0],
    ])


def eta(spec: DielectricSpec, s) -> np.ndarray:
    """Inverse dielectric tensor eta(s) = U + G(gamma . s)."""
    s = np.asarray(s, dtype=float)
    return spec.anisotropy + gyration_matrix(spec.activity @ s)


def optical_matrix(spec: DielectricSpec, s) -> np.ndarray:
    """A(s) = (I - s s^T) eta(s); satisfies s^T A = 0 identically."""
    s = np.asarray(s, dtype=float)
    projector = np.eye(3) - np.outer(s, s)
    return projector @ eta(spec, s)


def refractive_indices(spec: DielectricSpec, s, tol_cluster: float = 1e-6):
    """The two refractive indices n = lambda^(-1/2) for direction s.

    The structural zero eigenvalue is excluded; the remaining pair must be
    separated from zero by 10x the cluster tolerance, otherwise the principal
    branch of the inverse square root is meaningless and BranchError is raised.
    """
    w = numkit.eig_all(optical_matrix(spec, s)).values
    zero_idx = int(np.argmin(np.abs(w)))
    pair = [w[k] for k in range(3) if k != zero_idx]
    scale = 1.0 + max(abs(z) for z in w)
    for lam in pair:
        if abs(lam) <= 10.0 * tol_cluster * scale:
            raise BranchError(
                f"eigenvalue {lam:.3e} too close to zero for n = lambda^(-1/2)"
            )
    return tuple(1.0 / np.sqrt(complex(lam)) for lam in pair)


def _chart_frames(p):
    """s, ds/dp_i and d2s/dp_i dp_j on the chart (shared by the adapter)."""
    s1, s2 = float(p[0]), float(p[1])
    s = direction(s1, s2)
    s3 = s[2]
    ds = [np.array([1.0, 0.0, -s1 / s3]), np.array([0.0, 1.0, -s2 / s3])]
    p12 = np.array([s1, s2])

    def d2s(i, j):
        comp = -(1.0 if i == j else 0.0) / s3 - p12[i] * p12[j] / s3 ** 3
        return np.array([0.0, 0.0, comp])

    return s, ds, d2s


def family_adapter(spec: DielectricSpec) -> MatrixFamily:
    """A(s1, s2) as a 3x3 MatrixFamily over the hemisphere chart.

    Derivatives are analytic (product rule on the projector, linearity of the
    gyration part, s3 chain rule included). The domain guard keeps a margin
    of ``CHART_MARGIN`` from the chart boundary.
    """

    def guard(p):
        return p[0] * p[0] + p[1] * p[1] < 1.0 - CHART_MARGIN

    def evaluator(p):
        return optical_matrix(spec, direction(p[0], p[1]))

    def deriv(p, i):
        s, ds, _ = _chart_frames(p)
        eta_s = eta(spec, s)
        dproj = -(np.outer(ds[i], s) + np.outer(s, ds[i]))
        deta = gyration_matrix(spec.activity @ ds[i])
        return dproj @ eta_s + (np.eye(3) - np.outer(s, s)) @ deta

    def second_deriv(p, i, j):
        s, ds, d2s = _chart_frames(p)
        eta_s = eta(spec, s)
        proj = np.eye(3) - np.outer(s, s)
        deta_i = gyration_matrix(spec.activity @ ds[i])
        deta_j = gyration_matrix(spec.activity @ ds[j])
        d2eta = gyration_matrix(spec.activity @ d2s(i, j))
        dproj_i = -(np.outer(ds[i], s) + np.outer(s, ds[i]))
        dproj_j = -(np.outer(ds[j], s) + np.outer(s, ds[j]))
        d2proj = -(
            np.outer(d2s(i, j), s) + np.outer(ds[i], ds[j])
            + np.outer(ds[j], ds[i]) + np.outer(s, d2s(i, j))
        )
        return (
            d2proj @ eta_s + dproj_i @ deta_j + dproj_j @ deta_i + proj @ d2eta
        )

    return MatrixFamily(
        dim=3, n_params=2,
        evaluator=evaluator, deriv=deriv, second_deriv=second_deriv,
        domain_guard=guard,
    )


def builtin_specs() -> dict:
    """The two built-in demonstration crystals.

    ``crystal-example-1``: dichroic, optically active biaxial crystal whose
    optical matrix has a defective double eigenvalue (an exceptional
    direction) at s = (0, 0, 1).
    ``crystal-example-2``: crystal with complex activity tensor whose optical
    matrix has a semisimple double eigenvalue (a diabolic direction) there.
    """
    u1 = np.diag([3.0, 1.0, 2.0]) + 1j * np.array([
        [0.0, 1.0, 2.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0],
    ])
    gamma1 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], dtype=complex)
    u2 = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 4.0]]) + 1j * np.array([
        [5.0, 0.0, 4.0], [0.0, 5.0, 2.0], [4.0, 2.0, 0.0],
    ])
    gamma2 = 4.0 * np.array([
        [0.0, 0.0, 1.0], [0.0, 0.0, 1j], [1.0, 1j, 0.0],
    ])
    return {
        "crystal-example-1": DielectricSpec(anisotropy=u1, activity=gamma1),
        "crystal-example-2": DielectricSpec(anisotropy=u2, activity=gamma2),
    }


def spec_from_json(text: str) -> DielectricSpec:
    """Dielectric spec from JSON: {"U_re", "U_im", "gamma_re", "gamma_im"}."""
    doc = json.loads(text)
    for key in ("U_re", "U_im", "gamma_re", "gamma_im"):
        if key not in doc:
            raise DimensionError(f"dielectric spec JSON missing '{key}'")
    u = np.asarray(doc["U_re"], dtype=float) + 1j * np.asarray(doc["U_im"], dtype=float)
    g = np.asarray(doc["gamma_re"], dtype=float) + 1j * np.asarray(doc["gamma_im"], dtype=float)
    return DielectricSpec(anisotropy=u, activity=g)
