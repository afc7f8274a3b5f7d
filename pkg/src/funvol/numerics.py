"""Shared numerical substrate.

Quadrature on intervals, boxes and spheres, elementary symmetric functions of
small symmetric matrices, unit-ball volumes, and a counter-based deterministic
RNG.  Everything here is pure; quadrature routines report an error estimate
alongside the value and raise :class:`NonConvergedError` when the budget runs
out before the tolerance is met.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NonConvergedError

__all__ = [
    "MAX_DIM",
    "MAX_BOX_DIM",
    "kappa",
    "flag_coefficient",
    "SymMatrix",
    "eigenvalues",
    "elem_sym",
    "elem_sym_values",
    "QuadratureConfig",
    "QuadratureResult",
    "DEFAULT_CONFIG",
    "integrate_interval",
    "integrate_box",
    "integrate_polar",
    "sphere_rule",
    "Rng",
]

MAX_DIM = 6        # exact evaluators (matrices, bodies)
MAX_BOX_DIM = 4    # tensor-product box quadrature


def kappa(j: int) -> float:
    """Volume of the j-dimensional unit ball; kappa(0) = 1."""
    if j < 0:
        raise ValueError(f"kappa needs j >= 0, got {j}")
    return math.pi ** (j / 2.0) / math.gamma(j / 2.0 + 1.0)


def flag_coefficient(n: int, k: int) -> float:
    """The constant kappa_n / (kappa_k * kappa_{n-k}) * C(n, k)."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    return kappa(n) / (kappa(k) * kappa(n - k)) * math.comb(n, k)


# ---------------------------------------------------------------------------
# Symmetric matrices


class SymMatrix:
    """Symmetric n x n matrix, n <= 6, with only the upper triangle stored."""

    __slots__ = ("n", "_packed")

    def __init__(self, data):
        a = np.asarray(data, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        n = a.shape[0]
        if not 1 <= n <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {n}")
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(a).max()))):
            raise ValueError("matrix is not symmetric")
        self.n = n
        iu = np.triu_indices(n)
        self._packed = a[iu].copy()

    @classmethod
    def diagonal(cls, values) -> "SymMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls(np.eye(n))

    @property
    def array(self) -> np.ndarray:
        iu = np.triu_indices(self.n)
        a = np.zeros((self.n, self.n))
        a[iu] = self._packed
        a = a + a.T
        a[np.diag_indices(self.n)] /= 2.0
        return a

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.array)

    def is_positive_definite(self, tol: float = 1e-10) -> bool:
        return bool(self.eigenvalues().min() > tol)

    def __repr__(self):
        return f"SymMatrix({self.array.tolist()!r})"


def _as_matrix(a) -> np.ndarray:
    return a.array if isinstance(a, SymMatrix) else np.asarray(a, dtype=float)


def eigenvalues(a) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, ascending."""
    return np.linalg.eigvalsh(_as_matrix(a))


def elem_sym_values(values: np.ndarray, i: int) -> np.ndarray:
    """e_i of the entries along the last axis (e_0 = 1), batched.

    Newton-free direct recursion; exact up to rounding for the small n used here.
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[-1]
    if not 0 <= i <= n:
        raise ValueError(f"need 0 <= i <= n={n}, got {i}")
    e = np.zeros(v.shape[:-1] + (i + 1,))
    e[..., 0] = 1.0
    for k in range(n):
        top = min(k + 1, i)
        for d in range(top, 0, -1):
            e[..., d] += v[..., k] * e[..., d - 1]
    return e[..., i]


def elem_sym(a, i: int) -> float:
    """i-th elementary symmetric function of the eigenvalues of a symmetric matrix."""
    m = _as_matrix(a)
    return float(elem_sym_values(np.linalg.eigvalsh(m), i))


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class QuadratureConfig:
    """Knobs for the adaptive quadrature routines.

    ``order`` is the per-panel Gauss order on intervals; box rules derive a
    smaller per-axis order from the dimension.  ``endpoint_refine`` enables
    geometric subdivision toward a declared singular endpoint (ratio 1/2,
    until the subinterval contribution drops below tolerance/10).
    """
    order: int = 31
    max_depth: int = 40
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    endpoint_refine: bool = True
    max_panels: int = 400_000

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be strictly positive")
        if self.max_depth < 1:
            raise ValueError("depth limit must be >= 1")

    def loosened(self, abs_tol: float | None = None, rel_tol: float | None = None) -> "QuadratureConfig":
        return replace(self, abs_tol=abs_tol or self.abs_tol, rel_tol=rel_tol or self.rel_tol)


DEFAULT_CONFIG = QuadratureConfig()

_BOX_ORDERS = {1: (15, 31), 2: (7, 11), 3: (5, 8), 4: (4, 6)}


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    evaluations: int

    def __iter__(self):
        return iter((self.value, self.error))


_LEG_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _LEG_CACHE:
        _LEG_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _LEG_CACHE[order]


class _CountingFn:
    """Wraps an integrand; calls it vectorized, falling back to a python loop once."""

    def __init__(self, f):
        self.f = f
        self.count = 0
        self._scalar = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        self.count += len(x)
        if self._scalar is None:
            try:
                out = np.asarray(self.f(x), dtype=float)
                if out.shape == (len(x),):
                    self._scalar = False
                    return out
            except Exception:
                pass
            self._scalar = True
        if self._scalar:
            return np.array([float(self.f(xi)) for xi in x])
        return np.asarray(self.f(x), dtype=float)


def gauss_panel(f, a: float, b: float, order: int = 31) -> tuple[float, float]:
    """Single-panel Gauss estimate on [a, b] with a two-order error estimate."""
    fn = f if isinstance(f, _CountingFn) else _CountingFn(f)
    return _panel_pair(fn, a, b, order)


def _panel_pair(f: _CountingFn, a: float, b: float, order: int) -> tuple[float, float]:
    """(high-order estimate, |high - low|) on [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x_hi, w_hi = _leggauss(order)
    lo_order = max(3, (order + 1) // 2)
    x_lo, w_lo = _leggauss(lo_order)
    vals = f(np.concatenate([mid + half * x_hi, mid + half * x_lo]))
    hi = half * float(vals[:order] @ w_hi)
    lo = half * float(vals[order:] @ w_lo)
    return hi, abs(hi - lo)


def _adaptive_interval(f: _CountingFn, a: float, b: float, cfg: QuadratureConfig,
                       tol: float) -> tuple[float, float, bool]:
    """Heap-refined adaptive Gauss on [a, b]; returns (value, error, converged)."""
    hi, err = _panel_pair(f, a, b, cfg.order)
    heap = [(-err, 0, a, b, hi, err)]
    total, total_err = hi, err
    tick = 1
    while total_err > max(tol, cfg.rel_tol * abs(total)):
        neg, depth, pa, pb, pv, pe = heapq.heappop(heap)
        if depth >= cfg.max_depth or len(heap) > cfg.max_panels:
            heapq.heappush(heap, (neg, depth, pa, pb, pv, pe))
            return total, total_err, False
        pm = 0.5 * (pa + pb)
        lv, le = _panel_pair(f, pa, pm, cfg.order)
        rv, re = _panel_pair(f, pm, pb, cfg.order)
        total += lv + rv - pv
        total_err += le + re - pe
        heapq.heappush(heap, (-le, depth + 1, pa, pm, lv, le))
        heapq.heappush(heap, (-re, depth + 1, pm, pb, rv, re))
        tick += 1
        if tick > cfg.max_panels:
            return total, total_err, False
    return total, total_err, True


def integrate_interval(f, a: float, b: float, cfg: QuadratureConfig | None = None, *,
                       support_bound: float | None = None,
                       singular_left: bool = False) -> QuadratureResult:
    """Adaptive estimate of the integral of ``f`` over (a, b).

    ``b`` may be ``inf`` provided ``support_bound`` gives a finite point beyond
    which ``f`` vanishes.  With ``singular_left`` the interval is subdivided
    geometrically toward ``a`` so integrable endpoint singularities (log, or
    power of exponent > -1) converge.
    """
    cfg = cfg or DEFAULT_CONFIG
    if math.isinf(b):
        if support_bound is None:
            raise ValueError("b = inf requires a finite support_bound")
        b = float(support_bound)
    if b <= a:
        return QuadratureResult(0.0, 0.0, 0)
    fn = _CountingFn(f)
    tol = cfg.abs_tol
    if not (singular_left and cfg.endpoint_refine):
        value, error, ok = _adaptive_interval(fn, a, b, cfg, tol)
        if not ok:
            raise NonConvergedError(
                f"interval quadrature on [{a}, {b}] did not converge "
                f"(error {error:.3e})", value, error, fn.count)
        return QuadratureResult(value, error, fn.count)

    # Geometric subdivision toward the left endpoint, ratio 1/2.  Once panel
    # contributions decay geometrically (power/log singularities do), the
    # remaining tail is summed by geometric-series extrapolation with the
    # ratio drift folded into the error.
    total, total_err = 0.0, 0.0
    width = b - a
    hi_end = b
    converged = False
    prev_v = None
    prev_ratio = None
    for k in range(1, cfg.max_depth + 1):
        lo_end = a + width * 2.0 ** (-k)
        v, e, ok = _adaptive_interval(fn, lo_end, hi_end, cfg, tol / 2.0)
        if not ok:
            raise NonConvergedError(
                f"singular-endpoint panel [{lo_end}, {hi_end}] did not converge",
                total + v, total_err + e, fn.count)
        total += v
        total_err += e
        hi_end = lo_end
        if abs(v) < max(tol, cfg.rel_tol * abs(total)) / 10.0 and k >= 4:
            total_err += abs(v)
            converged = True
            break
        if prev_v is not None and abs(prev_v) > 0:
            ratio = v / prev_v
            if prev_ratio is not None and k >= 6 and 0.0 < ratio < 0.97:
                correction = v * ratio / (1.0 - ratio)
                drift = abs(ratio - prev_ratio)
                extra_err = abs(correction) * (drift / (1.0 - ratio) + 1e-9)
                if extra_err < max(tol, cfg.rel_tol * abs(total)) / 10.0:
                    total += correction
                    total_err += extra_err
                    converged = True
                    break
            prev_ratio = ratio
        prev_v = v
    if not converged:
        raise NonConvergedError(
            f"endpoint refinement hit depth {cfg.max_depth} with the last "
            f"contribution still significant", total, total_err, fn.count)
    return QuadratureResult(total, total_err, fn.count)


# -- box quadrature ---------------------------------------------------------


_UNIT_GRID_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _unit_grid(d: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss nodes on [-1,1]^d: points (order^d, d) and weights (order^d,)."""
    key = (d, order)
    if key not in _UNIT_GRID_CACHE:
        x, w = _leggauss(order)
        grids = np.meshgrid(*([x] * d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        wts = np.ones(order ** d)
        for axis in range(d):
            wts *= np.meshgrid(*([w] * d), indexing="ij")[axis].ravel()
        _UNIT_GRID_CACHE[key] = (pts, wts)
    return _UNIT_GRID_CACHE[key]


def _box_values(fn: _CountingFn, lo: np.ndarray, hi: np.ndarray,
                orders: tuple[int, int]) -> tuple[float, float]:
    d = len(lo)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    jac = float(np.prod(half))
    o_lo, o_hi = orders
    p_hi, w_hi = _unit_grid(d, o_hi)
    p_lo, w_lo = _unit_grid(d, o_lo)
    pts = np.concatenate([center + p_hi * half, center + p_lo * half])
    vals = fn(pts)
    v_hi = jac * float(vals[: len(w_hi)] @ w_hi)
    v_lo = jac * float(vals[len(w_hi):] @ w_lo)
    return v_hi, abs(v_hi - v_lo)


def _box_minus_box(outer_lo, outer_hi, inner_lo, inner_hi):
    """Decompose outer \\ inner into disjoint boxes (inner assumed inside outer)."""
    cells_per_axis = []
    for a, b, c, d in zip(outer_lo, outer_hi, inner_lo, inner_hi):
        cuts = []
        if c > a:
            cuts.append((a, c, False))
        cuts.append((max(a, c), min(b, d), True))
        if d < b:
            cuts.append((d, b, False))
        cells_per_axis.append(cuts)
    out = []

    def rec(axis, lo, hi, all_inner):
        if axis == len(cells_per_axis):
            if not all_inner:
                out.append((np.array(lo), np.array(hi)))
            return
        for a, b, is_inner in cells_per_axis[axis]:
            if b <= a:
                continue
            rec(axis + 1, lo + [a], hi + [b], all_inner and is_inner)

    rec(0, [], [], True)
    return out


def _adaptive_boxes(fn: _CountingFn, boxes, d: int, cfg: QuadratureConfig,
                    tol_abs: float) -> tuple[float, float, bool]:
    orders = _BOX_ORDERS[d]
    heap = []
    total, total_err = 0.0, 0.0
    for idx, (lo, hi) in enumerate(boxes):
        v, e = _box_values(fn, lo, hi, orders)
        total += v
        total_err += e
        heapq.heappush(heap, (-e, idx, 0, lo, hi, v, e))
    uid = len(boxes)
    panels = len(boxes)
    batch = 32
    while total_err > max(tol_abs, cfg.rel_tol * abs(total)):
        popped = []
        while heap and len(popped) < batch:
            popped.append(heapq.heappop(heap))
        refinable = [p for p in popped if p[2] < cfg.max_depth]
        stuck = [p for p in popped if p[2] >= cfg.max_depth]
        for p in stuck:
            heapq.heappush(heap, p)
        if not refinable or panels > cfg.max_panels:
            for p in refinable:
                heapq.heappush(heap, p)
            return total, total_err, False
        for _, _, depth, lo, hi, v, e in refinable:
            axis = int(np.argmax(hi - lo))
            mid = 0.5 * (lo[axis] + hi[axis])
            for child_lo, child_hi in (
                (lo, np.where(np.arange(d) == axis, mid, hi)),
                (np.where(np.arange(d) == axis, mid, lo), hi),
            ):
                cv, ce = _box_values(fn, np.asarray(child_lo, float), np.asarray(child_hi, float), orders)
                total += cv
                total_err += ce
                heapq.heappush(heap, (-ce, uid, depth + 1, np.asarray(child_lo, float),
                                      np.asarray(child_hi, float), cv, ce))
                uid += 1
                panels += 1
            total -= v
            total_err -= e
    return total, total_err, True


def integrate_box(f, box, cfg: QuadratureConfig | None = None, *,
                  singular_point=None) -> QuadratureResult:
    """Adaptive tensor-product quadrature over a d-dimensional box, d <= 4.

    ``box`` is a (d, 2) array of per-axis intervals.  A declared integrable
    point singularity at ``singular_point`` is excluded by a vanishing-measure
    refinement: nested shells shrink toward the point until their contribution
    is negligible; the final shell's contribution is folded into the error.
    """
    cfg = cfg or DEFAULT_CONFIG
    box = np.asarray(box, dtype=float)
    d = box.shape[0]
    if not 1 <= d <= MAX_BOX_DIM:
        raise ValueError(f"box quadrature supports 1..{MAX_BOX_DIM} dims, got {d}")
    lo, hi = box[:, 0].copy(), box[:, 1].copy()
    if np.any(hi <= lo):
        return QuadratureResult(0.0, 0.0, 0)
    fn = _CountingFn(f)

    if singular_point is None:
        value, error, ok = _adaptive_boxes(fn, [(lo, hi)], d, cfg, cfg.abs_tol)
        if not ok:
            raise NonConvergedError(
                f"box quadrature did not converge (error {error:.3e})",
                value, error, fn.count)
        return QuadratureResult(value, error, fn.count)

    p = np.asarray(singular_point, dtype=float)
    h0 = 0.25 * float(np.max(hi - lo))
    total, total_err = 0.0, 0.0
    inner_lo = np.maximum(lo, p - h0)
    inner_hi = np.minimum(hi, p + h0)
    outer_cells = _box_minus_box(lo, hi, inner_lo, inner_hi)
    if outer_cells:
        v, e, ok = _adaptive_boxes(fn, outer_cells, d, cfg, cfg.abs_tol / 2.0)
        if not ok:
            raise NonConvergedError("outer region did not converge", v, e, fn.count)
        total, total_err = v, e
    h = h0
    converged = False
    for _ in range(cfg.max_depth):
        h_next = h / 2.0
        shell_outer_lo = np.maximum(lo, p - h)
        shell_outer_hi = np.minimum(hi, p + h)
        shell_inner_lo = np.maximum(lo, p - h_next)
        shell_inner_hi = np.minimum(hi, p + h_next)
        cells = _box_minus_box(shell_outer_lo, shell_outer_hi, shell_inner_lo, shell_inner_hi)
        if not cells:
            converged = True
            break
        v, e, ok = _adaptive_boxes(fn, cells, d, cfg, cfg.abs_tol / 4.0)
        if not ok:
            raise NonConvergedError("singular shell did not converge",
                                    total + v, total_err + e, fn.count)
        total += v
        total_err += e
        h = h_next
        if abs(v) < max(cfg.abs_tol, cfg.rel_tol * abs(total)) / 10.0:
            total_err += abs(v)
            converged = True
            break
    if not converged:
        raise NonConvergedError(
            "shell refinement toward the singular point hit the depth limit",
            total, total_err, fn.count)
    return QuadratureResult(total, total_err, fn.count)


# -- sphere rules and polar quadrature --------------------------------------


def sphere_rule(n: int, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions and weights integrating over the unit sphere S^{n-1}.

    Weights sum to the sphere's surface area n * kappa_n.  ``level`` scales
    the resolution; the rules converge rapidly for smooth angular integrands.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        m = 4 * level
        theta = 2.0 * math.pi * np.arange(m) / m
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return dirs, np.full(m, 2.0 * math.pi / m)
    if n == 3:
        nz = 2 * level
        mphi = 4 * level
        z, wz = _leggauss(nz)
        phi = 2.0 * math.pi * np.arange(mphi) / mphi
        s = np.sqrt(1.0 - z ** 2)
        dirs = np.stack([
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.repeat(z, mphi),
        ], axis=-1)
        wts = np.repeat(wz, mphi) * (2.0 * math.pi / mphi)
        return dirs, wts
    if n == 4:
        npsi = 2 * level
        nz = 2 * level
        mphi = 4 * level
        # psi in [0, pi] with measure sin^2(psi); Gauss nodes on [-1, 1] mapped.
        t, wt = _leggauss(npsi)
        psi = 0.5 * math.pi * (t + 1.0)
        wpsi = 0.5 * math.pi * wt * np.sin(psi) ** 2
        z, wz = _leggauss(nz)
        phi = 2.0 * math.pi * np.arange(mphi) / mphi
        s = np.sqrt(1.0 - z ** 2)
        ring = np.stack([
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.repeat(z, mphi),
        ], axis=-1)
        wring = np.repeat(wz, mphi) * (2.0 * math.pi / mphi)
        dirs = np.concatenate([
            np.concatenate([np.full((len(ring), 1), math.cos(p)),
                            math.sin(p) * ring], axis=1)
            for p in psi
        ])
        wts = np.concatenate([wp * wring for wp in wpsi])
        return dirs, wts
    raise ValueError(f"sphere_rule supports n <= 4, got {n}")


def _radial_value(fn: _CountingFn, direction: np.ndarray, center: np.ndarray, n: int,
                  r_hi: float, breaks, cfg: QuadratureConfig,
                  singular_center: bool) -> tuple[float, float]:
    def g(r):
        r = np.asarray(r, dtype=float)
        pts = center[None, :] + r[:, None] * direction[None, :]
        return fn(pts) * r ** (n - 1)

    edges = [0.0]
    for b in sorted(set(float(x) for x in (breaks or []))):
        if 1e-14 < b < r_hi * (1.0 - 1e-12):
            edges.append(b)
    edges.append(r_hi)
    total, err = 0.0, 0.0
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        res = integrate_interval(g, a, b, cfg,
                                 singular_left=(singular_center and i == 0))
        total += res.value
        err += res.error
    return total, err


def integrate_polar(f, n: int, center, r_max, cfg: QuadratureConfig | None = None, *,
                    ray_breaks=None, singular_center: bool = False,
                    level: int = 8, max_level: int = 64) -> QuadratureResult:
    """Quadrature of ``f`` over {x : |x - center| <= r_max(direction)}.

    Radial panels are split at the per-ray ``ray_breaks`` (kink radii of the
    integrand) so each 1-d integral sees a smooth piece.  The angular level is
    doubled until consecutive sphere rules agree to tolerance; their last
    difference is the angular error estimate.
    """
    cfg = cfg or DEFAULT_CONFIG
    center = np.asarray(center, dtype=float)
    fn = _CountingFn(f)

    def run(lv: int) -> tuple[float, float]:
        dirs, wts = sphere_rule(n, lv)
        acc, err = 0.0, 0.0
        radii = r_max(dirs) if callable(r_max) else np.full(len(dirs), float(r_max))
        for i in range(len(dirs)):
            if radii[i] <= 0:
                continue
            breaks = ray_breaks(dirs[i]) if callable(ray_breaks) else ray_breaks
            v, e = _radial_value(fn, dirs[i], center, n, float(radii[i]),
                                 breaks, cfg, singular_center)
            acc += wts[i] * v
            err += wts[i] * e
        return acc, err

    if n == 1:
        value, error = run(1)
        return QuadratureResult(value, error, fn.count)
    prev, _ = run(max(2, level // 2))
    lv = level
    while True:
        fine, rad_err = run(lv)
        ang_err = abs(fine - prev)
        if ang_err <= max(cfg.abs_tol, cfg.rel_tol * abs(fine)) or lv >= max_level:
            break
        prev = fine
        lv *= 2
    return QuadratureResult(fine, rad_err + ang_err, fn.count)


def integrate_polar_separable(f, n: int, center, r_max, cfg: QuadratureConfig | None = None, *,
                              break_ratios=(), singular_center: bool = False,
                              level: int = 8, max_level: int = 64) -> QuadratureResult:
    """Polar quadrature when the integrand's radial kinks sit at shared ratios.

    With r = R(direction) * tau, panels in tau are identical across rays, so a
    whole sphere rule is evaluated in a handful of batched integrand calls.
    Panels are refined adaptively on the shared tau grid (aggregated error);
    the angular level doubles until consecutive sphere rules agree.
    """
    cfg = cfg or DEFAULT_CONFIG
    center = np.asarray(center, dtype=float)
    fn = _CountingFn(f)
    edges0 = sorted({float(t) for t in break_ratios if 1e-14 < t < 1.0 - 1e-14}
                    | {1.0})
    x_hi, w_hi = _leggauss(15)
    x_lo, w_lo = _leggauss(8)

    def run(lv: int) -> tuple[float, float]:
        dirs, wts = sphere_rule(n, lv)
        radii = r_max(dirs) if callable(r_max) else np.full(len(dirs), float(r_max))
        scale = wts * radii ** n  # substitution r = R * tau

        def panel(a: float, b: float) -> tuple[float, float]:
            half, mid = 0.5 * (b - a), 0.5 * (a + b)
            tau = np.concatenate([mid + half * x_hi, mid + half * x_lo])
            pts = (center[None, None, :]
                   + (radii[:, None] * tau[None, :])[:, :, None] * dirs[:, None, :])
            vals = fn(pts.reshape(-1, n)).reshape(len(dirs), len(tau))
            vals = vals * tau[None, :] ** (n - 1)
            hi = half * float(scale @ (vals[:, :15] @ w_hi))
            lo = half * float(scale @ (vals[:, 15:] @ w_lo))
            return hi, abs(hi - lo)

        heap = []
        total, total_err = 0.0, 0.0
        if singular_center:
            # geometric tau-panels toward 0 with tail extrapolation
            t1 = edges0[0]
            acc, prev_v, prev_ratio = 0.0, None, None
            k = 0
            while k < cfg.max_depth:
                a, b = t1 * 2.0 ** (-k - 1), t1 * 2.0 ** (-k)
                v, e = panel(a, b)
                total += v
                total_err += e
                k += 1
                if abs(v) < max(cfg.abs_tol, cfg.rel_tol * abs(total)) / 10.0 and k >= 4:
                    total_err += abs(v)
                    break
                if prev_v is not None and abs(prev_v) > 0:
                    ratio = v / prev_v
                    if prev_ratio is not None and k >= 6 and 0.0 < ratio < 0.97:
                        corr = v * ratio / (1.0 - ratio)
                        drift = abs(ratio - prev_ratio)
                        extra = abs(corr) * (drift / (1.0 - ratio) + 1e-9)
                        if extra < max(cfg.abs_tol, cfg.rel_tol * abs(total)) / 10.0:
                            total += corr
                            total_err += extra
                            break
                    prev_ratio = ratio
                prev_v = v
            prev_edge = t1
            seq = edges0[1:]
        else:
            prev_edge = 0.0
            seq = edges0
        uid = 0
        for e_hi in seq:
            v, err = panel(prev_edge, e_hi)
            total += v
            total_err += err
            heapq.heappush(heap, (-err, uid, 0, prev_edge, e_hi, v, err))
            uid += 1
            prev_edge = e_hi
        while total_err > max(cfg.abs_tol, cfg.rel_tol * abs(total)) and heap:
            neg, _, depth, a, b, v, e = heapq.heappop(heap)
            if depth >= cfg.max_depth:
                heapq.heappush(heap, (neg, uid, depth, a, b, v, e))
                break
            mid = 0.5 * (a + b)
            lv_, le_ = panel(a, mid)
            rv_, re_ = panel(mid, b)
            total += lv_ + rv_ - v
            total_err += le_ + re_ - e
            heapq.heappush(heap, (-le_, uid + 1, depth + 1, a, mid, lv_, le_))
            heapq.heappush(heap, (-re_, uid + 2, depth + 1, mid, b, rv_, re_))
            uid += 3
        return total, total_err

    if n == 1:
        value, error = run(1)
        return QuadratureResult(value, error, fn.count)
    prev, _ = run(max(2, level // 2))
    lv = level
    while True:
        fine, rad_err = run(lv)
        ang_err = abs(fine - prev)
        if ang_err <= max(cfg.abs_tol, cfg.rel_tol * abs(fine)) or lv >= max_level:
            break
        prev = fine
        lv *= 2
    return QuadratureResult(fine, rad_err + ang_err, fn.count)


# ---------------------------------------------------------------------------
# RNG


_STREAM_FANOUT = 1 << 16


@dataclass(frozen=True)
class Rng:
    """Counter-based deterministic RNG (Philox).

    Identical (seed, counter) reproduces identical draws across runs and
    thread schedules.  ``stream(i)`` derives disjoint child streams, so
    parallel Monte Carlo splits by counter ranges and never shares state.
    """
    seed: int = 0
    counter: int = 0

    def stream(self, index: int) -> "Rng":
        if index < 0 or index >= _STREAM_FANOUT - 1:
            raise ValueError(f"stream index out of range: {index}")
        return Rng(self.seed, self.counter * _STREAM_FANOUT + index + 1)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed, counter=self.counter << 64))
