"""Strong-coupling asymptotics near an exceptional point.

Everything here is driven by four real n-vectors measured at the EP from the
Jordan chain and the family derivatives:

    split_re_s + i split_im_s = (dA/dp_s u0, v0)            (squared-gap gradient)
    drift_re_s + i drift_im_s = (dA/dp_s u0, v1) + (dA/dp_s u1, v0)

With F = <split_re, dp>, G = <split_im, dp> the two eigenvalues split as

    lam_pm = lam0 + (<drift_re, dp> + i <drift_im, dp>)/2 +- sqrt(F + i G),

which yields the sheet formulas

    Re lam_pm = Re lam0 + <drift_re, dp>/2 +- sqrt((F + rho)/2),
    Im lam_pm = Im lam0 + <drift_im, dp>/2 +- sqrt((rho - F)/2),
    rho = sqrt(F^2 + G^2),

the branch-cut rays (G = 0 with a sign condition on F), the complex-plane
conics traced under one-parameter sweeps, the cross-section cusps/tangents,
and the closed trajectories traced under cyclic parameter loops.

Branch pairing: the +- signs of the Re and Im radicals are not independent;
the principal square root of F + iG ties them so that both squared-gap
relations (Re d)^2 - (Im d)^2 = F and 2 Re d Im d = G hold exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import family as family_mod
from .degeneracy import JordanChain
from .errors import (
    ChartError,
    DegenerateModelError,
    DimensionError,
    ModelError,
    ResolutionError,
)
from .numkit import as_cmatrix, hermitian_inner


@dataclass(frozen=True)
class EPLocalModel:
    """First-order local model of the eigenvalue pair at an exceptional point."""

    p0: np.ndarray
    lam0: complex
    split_re: np.ndarray     # gradient of Re of the squared half-gap
    split_im: np.ndarray     # gradient of Im of the squared half-gap
    drift_re: np.ndarray     # gradient of 2 Re of the pair-mean shift
    drift_im: np.ndarray     # gradient of 2 Im of the pair-mean shift
    degenerate: bool = False

    @property
    def n_params(self) -> int:
        return len(self.split_re)


@dataclass(frozen=True)
class EPCurveSplit:
    """One-parameter splitting lam0 +- sqrt(mu1 eps) + mu2 eps with vector maps."""

    lam0: complex
    mu1: complex
    mu2: complex
    lam_plus: object          # eps -> complex
    lam_minus: object
    u_plus: object            # eps -> vector
    u_minus: object


@dataclass(frozen=True)
class BranchCut:
    """Ray set where two sheets of one surface are glued.

    Points dp with <normal, dp> = 0 and sign * <sign_coeff, dp> >= 0; on the
    ray the glued sheet level is level_base + <level_coeff, dp>.
    """

    kind: str                 # "re" | "im"
    normal: np.ndarray        # <split_im, dp> = 0
    sign_coeff: np.ndarray    # split_re
    sign: int                 # -1: <f, dp> <= 0 (re cut), +1: >= 0 (im cut)
    level_base: float
    level_coeff: np.ndarray

    def ray_points(self, radii) -> tuple:
        """Polyline along the cut (two-parameter charts): (offsets, levels).

        The ray direction is the in-plane direction orthogonal to ``normal``
        whose sign condition admits it.
        """
        if len(self.normal) != 2:
            raise ChartError("ray sampling is defined for two-parameter charts")
        direction = np.array([-self.normal[1], self.normal[0]])
        direction = direction / np.linalg.norm(direction)
        if self.sign * (self.sign_coeff @ direction) < 0:
            direction = -direction
        offsets = np.array([r * direction for r in np.atleast_1d(radii)])
        levels = self.level_base + offsets @ self.level_coeff
        return offsets, levels


@dataclass(frozen=True)
class BranchCutSet:
    re_cut: BranchCut
    im_cut: BranchCut


@dataclass(frozen=True)
class LoopSpec:
    """Circular parameter loop dp = (a + r cos phi, b + r sin phi)."""

    a: float
    b: float
    r: float
    samples: int = 720

    def __post_init__(self):
        if self.r <= 0:
            raise DimensionError("loop radius must be positive")
        if self.samples < 16:
            raise DimensionError("need at least 16 loop samples")


@dataclass(frozen=True)
class SurfaceSheets:
    """The four sheet values at one parameter offset, plus pairing data."""

    re_plus: float
    re_minus: float
    im_plus: float
    im_minus: float
    pair_sign: int            # +1: (re_plus, im_plus) is one eigenvalue; -1: crossed
    split_quad: complex       # F + iG at this offset

    def paired(self):
        """The two eigenvalues with Re/Im radicals correctly paired."""
        if self.pair_sign >= 0:
            return (complex(self.re_plus, self.im_plus),
                    complex(self.re_minus, self.im_minus))
        return (complex(self.re_plus, self.im_minus),
                complex(self.re_minus, self.im_plus))


def curve_split(chain: JordanChain, a0, a1) -> EPCurveSplit:
    """Eigenvalue/eigenvector splitting along one curve direction.

    mu1 = (A1 u0, v0), mu2 = ((A1 u0, v1) + (A1 u1, v0))/2; the eigenvector
    maps use the bordered inverse of A0 - lam0 I + u1 v1*.
    """
    a0 = as_cmatrix(a0)
    a1 = as_cmatrix(a1)
    mu1 = hermitian_inner(a1 @ chain.u0, chain.v0)
    mu2 = (hermitian_inner(a1 @ chain.u0, chain.v1)
           + hermitian_inner(a1 @ chain.u1, chain.v0)) / 2.0
    m = a0.shape[0]
    bordered = a0 - chain.lam0 * np.eye(m) + np.outer(chain.u1, chain.v1.conj())
    if np.linalg.cond(bordered) > 1e10:
        raise ModelError("bordered matrix A0 - lam0 I + u1 v1* is numerically singular")
    correction = np.linalg.solve(bordered, a1 @ chain.u0)
    lam0, u0, u1 = chain.lam0, chain.u0, chain.u1
    linear_term = mu1 * u0 + mu2 * u1 - correction

    def lam_of(eps, sign):
        return lam0 + sign * cmath.sqrt(mu1 * eps) + mu2 * eps

    def u_of(eps, sign):
        return u0 + sign * u1 * cmath.sqrt(mu1 * eps) + linear_term * eps

    return EPCurveSplit(
        lam0=lam0, mu1=complex(mu1), mu2=complex(mu2),
        lam_plus=lambda eps: lam_of(eps, +1),
        lam_minus=lambda eps: lam_of(eps, -1),
        u_plus=lambda eps: u_of(eps, +1),
        u_minus=lambda eps: u_of(eps, -1),
    )


def sensitivities(fam: family_mod.MatrixFamily, chain: JordanChain, p0) -> EPLocalModel:
    """Measure the four sensitivity vectors of the local model at p0.

    All four are invariant under the gauge freedom of the chain. A model with
    all vectors numerically zero (constant family) is flagged degenerate.
    """
    p0 = fam._point(p0)
    n = fam.n_params
    split = np.zeros(n, dtype=complex)
    drift = np.zeros(n, dtype=complex)
    for s in range(n):
        d = family_mod.derivative(fam, p0, s)
        split[s] = hermitian_inner(d @ chain.u0, chain.v0)
        drift[s] = (hermitian_inner(d @ chain.u0, chain.v1)
                    + hermitian_inner(d @ chain.u1, chain.v0))
    scale = max(np.abs(split).max(initial=0.0), np.abs(drift).max(initial=0.0))
    return EPLocalModel(
        p0=p0, lam0=chain.lam0,
        split_re=split.real.copy(), split_im=split.imag.copy(),
        drift_re=drift.real.copy(), drift_im=drift.imag.copy(),
        degenerate=bool(scale < 1e-14),
    )


def _model_dp(model: EPLocalModel, dp) -> np.ndarray:
    dp = np.atleast_1d(np.asarray(dp, dtype=float))
    if dp.shape != (model.n_params,):
        raise DimensionError(
            f"offset must have {model.n_params} components, got {dp.shape}"
        )
    return dp


def tangency_conditions(model: EPLocalModel, dp):
    """(F, G) = (<split_re, dp>, <split_im, dp>); (0, 0) keeps the pair double."""
    dp = _model_dp(model, dp)
    return float(model.split_re @ dp), float(model.split_im @ dp)


def surface_eval(model: EPLocalModel, dp) -> SurfaceSheets:
    """The four Re/Im sheet values of the eigenvalue pair at offset dp."""
    dp = _model_dp(model, dp)
    f_dp = float(model.split_re @ dp)
    g_dp = float(model.split_im @ dp)
    w = cmath.sqrt(complex(f_dp, g_dp))     # stable: ties the +- signs together
    re_mid = model.lam0.real + 0.5 * float(model.drift_re @ dp)
    im_mid = model.lam0.imag + 0.5 * float(model.drift_im @ dp)
    return SurfaceSheets(
        re_plus=re_mid + w.real, re_minus=re_mid - w.real,
        im_plus=im_mid + abs(w.imag), im_minus=im_mid - abs(w.imag),
        pair_sign=1 if g_dp >= 0 else -1,
        split_quad=complex(f_dp, g_dp),
    )


def eigenvalue_pair(model: EPLocalModel, dp):
    """The two model eigenvalues at offset dp (correctly paired sheets)."""
    return surface_eval(model, dp).paired()


def branch_cuts(model: EPLocalModel) -> BranchCutSet:
    """The two rays where the Re (resp. Im) sheets are glued.

    Re sheets connect where <split_im, dp> = 0 and <split_re, dp> <= 0 at
    level <drift_re, dp>/2; Im sheets where <split_re, dp> >= 0 at level
    <drift_im, dp>/2. Undefined when split_im vanishes identically.
    """
    if np.linalg.norm(model.split_im) < 1e-14:
        raise DegenerateModelError("split_im = 0: branch-cut directions undefined")
    re_cut = BranchCut(
        kind="re", normal=model.split_im.copy(), sign_coeff=model.split_re.copy(),
        sign=-1, level_base=model.lam0.real, level_coeff=0.5 * model.drift_re,
    )
    im_cut = BranchCut(
        kind="im", normal=model.split_im.copy(), sign_coeff=model.split_re.copy(),
        sign=+1, level_base=model.lam0.imag, level_coeff=0.5 * model.drift_im,
    )
    return BranchCutSet(re_cut=re_cut, im_cut=im_cut)


@dataclass(frozen=True)
class ConicReport:
    """Complex-plane trajectory of the pair when only p_1 varies.

    The eigenvalue offsets d = lam - lam0 obey
    g1 (Re d)^2 - 2 f1 Re d Im d - g1 (Im d)^2 = gamma; gamma = 0 gives a
    perpendicular line pair, gamma != 0 a hyperbola with those asymptotes.
    """

    gamma: float
    quad_coeffs: tuple         # (g1, -2 f1, -g1)
    kind: str                  # "perpendicular-lines" | "hyperbola"
    asymptote_slopes: tuple    # two slopes in the (Re, Im) plane
    hyperbola_rhs: float       # gamma * g1 in the squared normal form
    samples: np.ndarray        # trajectory points (complex) for plotting


def complex_plane_conic(model: EPLocalModel, fixed_rest=None,
                        p1_span: float = 0.1, samples: int = 401) -> ConicReport:
    """Conic traced by the pair in the complex plane as p_1 sweeps.

    ``fixed_rest`` holds the frozen offsets of parameters 2..n. Requires
    g1 != 0 for the asymptote/hyperbola normal forms (reindex otherwise).
    """
    n = model.n_params
    rest = np.zeros(n - 1) if fixed_rest is None else np.atleast_1d(
        np.asarray(fixed_rest, dtype=float))
    if rest.shape != (n - 1,):
        raise DimensionError(f"fixed_rest must have {n - 1} components")
    f1, g1 = model.split_re[0], model.split_im[0]
    if f1 * f1 + g1 * g1 < 1e-28:
        raise DegenerateModelError("f1 = g1 = 0: pair insensitive to p_1")
    gamma = float(np.sum(
        (model.split_re[1:] * g1 - f1 * model.split_im[1:]) * rest))
    if abs(g1) < 1e-14:
        raise ChartError(
            "g1 = 0: asymptote/hyperbola forms need a parameter reindexing"
        )
    root = math.hypot(f1, g1)
    slopes = (g1 / (f1 + root), g1 / (f1 - root))
    kind = "perpendicular-lines" if gamma == 0.0 else "hyperbola"
    # sampled offsets satisfy the conic exactly: the linear drift terms are
    # not part of the squared-gap relation the conic is built from
    pts = []
    for t in np.linspace(-p1_span, p1_span, samples):
        dp = np.concatenate(([t], rest))
        f_dp, g_dp = tangency_conditions(model, dp)
        w = cmath.sqrt(complex(f_dp, g_dp))
        pts.extend((model.lam0 + w, model.lam0 - w))
    return ConicReport(
        gamma=gamma, quad_coeffs=(float(g1), float(-2 * f1), float(-g1)),
        kind=kind, asymptote_slopes=slopes, hyperbola_rhs=float(gamma * g1),
        samples=np.asarray(pts),
    )


@dataclass(frozen=True)
class SectionReport:
    """One-parameter cross-section of the eigenvalue surfaces.

    At the crossing abscissa the Re curves intersect when gamma/g1 < 0, the
    Im curves when gamma/g1 > 0; gamma = 0 collapses both tangent pairs to
    the vertical double-cusp configuration.
    """

    gamma: float
    p1_cross: float            # absolute p_1 of the crossing
    re_level: float
    im_level: float
    crossing: str              # "re" | "im" | "cusp"
    re_slopes: Optional[tuple]
    im_slopes: Optional[tuple]
    vertical_tangents: bool
    cusp_re_coeffs: Optional[tuple]   # ((f1+rho1)/2, (f1-rho1)/2, h1/2)
    cusp_im_coeffs: Optional[tuple]   # ((rho1-f1)/2, -(f1+rho1)/2, r1/2)
    sample_p1: np.ndarray
    sample_sheets: np.ndarray  # rows: (re_plus, re_minus, im_plus, im_minus)


def cross_section(model: EPLocalModel, fixed_rest=None,
                  p1_span: float = 0.1, samples: int = 401) -> SectionReport:
    """Cross-section lam(p_1) at fixed offsets of the other parameters.

    Tangent slopes at the crossing: Re curves drift_re[0]/2 +- (g1/2)
    sqrt(-g1/gamma), Im curves drift_im[0]/2 +- (g1/2) sqrt(g1/gamma).
    At the crossing abscissa <split_re, dp> equals gamma/g1, so the Re pair
    crosses (real slopes) exactly when gamma/g1 < 0 and the Im pair when
    gamma/g1 > 0; the radicand signs encode that dichotomy.
    """
    n = model.n_params
    rest = np.zeros(n - 1) if fixed_rest is None else np.atleast_1d(
        np.asarray(fixed_rest, dtype=float))
    if rest.shape != (n - 1,):
        raise DimensionError(f"fixed_rest must have {n - 1} components")
    f1, g1 = model.split_re[0], model.split_im[0]
    h1, r1 = model.drift_re[0], model.drift_im[0]
    if abs(g1) < 1e-14:
        raise ChartError("g1 = 0: cross-section formulas need reindexing")
    gamma = float(np.sum(
        (model.split_re[1:] * g1 - f1 * model.split_im[1:]) * rest))
    dp1_cross = -float(np.sum(model.split_im[1:] * rest)) / g1
    re_level = model.lam0.real - (
        float(np.sum((h1 * model.split_im[1:] - g1 * model.drift_re[1:]) * rest))
        / (2.0 * g1))
    im_level = model.lam0.imag - (
        float(np.sum((r1 * model.split_im[1:] - g1 * model.drift_im[1:]) * rest))
        / (2.0 * g1))
    rho1 = math.hypot(f1, g1)
    gamma_scale = abs(g1) * (np.abs(rest).max(initial=0.0) + 1e-300)
    if abs(gamma) <= 1e-12 * max(gamma_scale, 1e-12):
        crossing = "cusp"
        re_slopes = im_slopes = None
        vertical = True
    elif gamma / g1 < 0:
        crossing = "re"
        half = 0.5 * g1 * math.sqrt(-g1 / gamma)
        re_slopes = (0.5 * h1 + half, 0.5 * h1 - half)
        im_slopes = None
        vertical = False
    else:
        crossing = "im"
        half = 0.5 * g1 * math.sqrt(g1 / gamma)
        im_slopes = (0.5 * r1 + half, 0.5 * r1 - half)
        re_slopes = None
        vertical = False
    offsets_zero = bool(np.all(rest == 0.0))
    cusp_re = ((f1 + rho1) / 2.0, (f1 - rho1) / 2.0, h1 / 2.0) if offsets_zero else None
    cusp_im = ((rho1 - f1) / 2.0, -(f1 + rho1) / 2.0, r1 / 2.0) if offsets_zero else None
    grid = np.linspace(-p1_span, p1_span, samples)
    sheets = np.empty((samples, 4))
    for k, t in enumerate(grid):
        sh = surface_eval(model, np.concatenate(([t], rest)))
        sheets[k] = (sh.re_plus, sh.re_minus, sh.im_plus, sh.im_minus)
    return SectionReport(
        gamma=gamma, p1_cross=float(model.p0[0] + dp1_cross),
        re_level=re_level, im_level=im_level, crossing=crossing,
        re_slopes=re_slopes, im_slopes=im_slopes, vertical_tangents=vertical,
        cusp_re_coeffs=cusp_re, cusp_im_coeffs=cusp_im,
        sample_p1=model.p0[0] + grid, sample_sheets=sheets,
    )


@dataclass(frozen=True)
class AxisCrossing:
    axis: str                  # "re": crossing of Re lam = Re lam0; "im": the other
    ordinate: float            # the nonzero offset coordinate of the crossing point


@dataclass(frozen=True)
class LoopReport:
    """Eigenvalue trajectories under a cyclic parameter loop."""

    spec: LoopSpec
    regime: str                # "inside" | "on" | "outside"
    sigma: float
    sigma_sign: int
    phis: np.ndarray
    lam_plus: np.ndarray       # full model trajectories (with drift)
    lam_minus: np.ndarray
    core_plus: np.ndarray      # +-sqrt(F + iG) parts, branch-tracked in phi
    core_minus: np.ndarray
    n_curves: int              # 1: branches join into a single closed curve
    winding: Optional[int]     # winding number of the closed curve about lam0
    crossings: tuple           # AxisCrossing entries from the closed-form loci


def _axis_crossings(model, a, b, r):
    f1, f2 = model.split_re[:2]
    g1, g2 = model.split_im[:2]
    kappa = f2 * g1 - f1 * g2
    denom = g1 * g1 + g2 * g2
    if denom == 0.0 or kappa == 0.0:
        return ()
    s = g2 * a - g1 * b
    disc = s * s + (r * r - a * a - b * b) * denom
    if disc < 0.0:
        return ()
    root = math.sqrt(disc)
    out = []
    for sign in (+1.0, -1.0):
        val = kappa * (s + sign * root) / denom          # (Im d)^2 on Re-axis line
        if val > 0.0:
            out.extend(AxisCrossing(axis="re", ordinate=o)
                       for o in (math.sqrt(val), -math.sqrt(val)))
        val = kappa * (-s + sign * root) / denom         # (Re d)^2 on Im-axis line
        if val > 0.0:
            out.extend(AxisCrossing(axis="im", ordinate=o)
                       for o in (math.sqrt(val), -math.sqrt(val)))
    return tuple(out)


def loop_quartic_residual(model: EPLocalModel, spec: LoopSpec, core: complex) -> float:
    """Residual of the closed-form quartic locus at one core trajectory point."""
    f1, f2 = model.split_re[:2]
    g1, g2 = model.split_im[:2]
    x, y = core.real, core.imag
    kappa = f2 * g1 - f1 * g2
    lhs = (
        (g1 * x * x - 2 * f1 * x * y - g1 * y * y - spec.b * kappa) ** 2
        + (g2 * x * x - 2 * f2 * x * y - g2 * y * y - spec.a * (f1 * g2 - g1 * f2)) ** 2
    )
    return float(lhs - kappa * kappa * spec.r * spec.r)


def loop_trajectory(model: EPLocalModel, spec: LoopSpec) -> LoopReport:
    """Trace the eigenvalue pair around a circular parameter loop.

    The core parts +-sqrt(F + iG) are branch-tracked by nearest-neighbor
    matching between consecutive samples; the full trajectories add the
    drift term. Regime: the loop encloses the EP (single closed curve winding
    once about lam0), touches it, or misses it (two "kidneys"). The sign of
    sigma = (f2 g1 - f1 g2)(g1 b - g2 a) selects which axis line the
    trajectories cross in the on/outside regimes.
    """
    if model.n_params != 2:
        raise ChartError("loop trajectories need a two-parameter chart")
    nphi = spec.samples
    phis = np.linspace(0.0, 2.0 * math.pi, nphi, endpoint=False)
    dps = np.column_stack((spec.a + spec.r * np.cos(phis),
                           spec.b + spec.r * np.sin(phis)))
    w = dps @ (model.split_re + 1j * model.split_im).astype(complex)
    roots = np.sqrt(w.astype(complex))
    drift = dps @ (0.5 * (model.drift_re + 1j * model.drift_im))
    core_a = np.empty(nphi, dtype=complex)
    core_b = np.empty(nphi, dtype=complex)
    core_a[0], core_b[0] = roots[0], -roots[0]
    scale = float(np.abs(roots).max(initial=0.0))
    for k in range(1, nphi):
        r_k = roots[k]
        keep = abs(core_a[k - 1] - r_k) + abs(core_b[k - 1] + r_k)
        swap = abs(core_a[k - 1] + r_k) + abs(core_b[k - 1] - r_k)
        if keep <= swap:
            core_a[k], core_b[k] = r_k, -r_k
        else:
            core_a[k], core_b[k] = -r_k, r_k
        jump = abs(core_a[k] - core_a[k - 1])
        span = abs(core_a[k]) + abs(core_a[k - 1])
        # near the trajectory's passage through lam0 the root speed is
        # genuinely unbounded; only police jumps away from that region
        if span > 0.1 * scale and jump > 0.3 * span:
            raise ResolutionError(
                f"branch jump {jump:.3e} at phi={phis[k]:.3f} too large; "
                f"increase samples (currently {nphi})"
            )
    # closure: does branch a return to itself after one loop, or cross over?
    wrap_keep = abs(core_a[0] - roots[0]) + abs(core_b[0] + roots[0])
    end_keep = abs(core_a[-1] - core_a[0]) + abs(core_b[-1] - core_b[0])
    end_swap = abs(core_a[-1] - core_b[0]) + abs(core_b[-1] - core_a[0])
    n_curves = 2 if end_keep <= end_swap else 1
    rho2 = spec.a ** 2 + spec.b ** 2
    if abs(rho2 - spec.r ** 2) <= 1e-12 * max(rho2, spec.r ** 2):
        regime = "on"
    elif rho2 < spec.r ** 2:
        regime = "inside"
    else:
        regime = "outside"
    f1, f2 = model.split_re[:2]
    g1, g2 = model.split_im[:2]
    sigma = (f2 * g1 - f1 * g2) * (g1 * spec.b - g2 * spec.a)
    sigma_sign = 0 if sigma == 0.0 else (1 if sigma > 0 else -1)
    winding = None
    if regime != "on":
        curve = np.concatenate((core_a, core_b)) if n_curves == 1 else core_a
        if float(np.abs(curve).min()) > 0.0:
            angles = np.angle(curve / np.roll(curve, 1))
            winding = int(round(angles.sum() / (2.0 * math.pi)))
    return LoopReport(
        spec=spec, regime=regime, sigma=float(sigma), sigma_sign=sigma_sign,
        phis=phis, lam_plus=model.lam0 + drift + core_a,
        lam_minus=model.lam0 + drift + core_b,
        core_plus=core_a, core_minus=core_b,
        n_curves=n_curves, winding=winding,
        crossings=_axis_crossings(model, spec.a, spec.b, spec.r),
    )
