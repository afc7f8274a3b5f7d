"""Functional intrinsic volumes: three independent evaluation routes.

For a degree j, dimension n and admissible weight, the valuation of a smooth
strictly convex function is the integral of weight(|grad u|) times the
(n-j)-th elementary symmetric function of the Hessian eigenvalues.  The same
number is reached through a Grassmannian average of projected-domain
integrals, and through the dual form on convex conjugates.  Each route
reports its value with an error estimate combining quadrature error and, for
sampled routes, the Monte Carlo standard error of the subspace average.

Smooth-route integrals run in polar coordinates around the gradient-zero
point with radial panels split at the weight's kink preimages per ray; a box
tensor-product scheme is kept as an alternative (``scheme="box"``) and as the
fallback for variants without ray data.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .convex import (Cone, ConvexFunction, EpiScaled, EpiTranslated, Indicator,
                     Rotated, body_intrinsic_volume, conjugate, project_body)
from .errors import NotDifferentiable, SchemaError, UnsupportedVariant
from .numerics import (DEFAULT_CONFIG, QuadratureConfig, Rng, flag_coefficient,
                       integrate_box, integrate_interval,
                       integrate_polar_separable, kappa)
from .subspaces import project_function, restrict_function, sample_grassmann
from .weights import (HadClass, WeightFunction, alpha_from_zeta, in_had_class,
                      transform_R_power, xi_from_zeta)

__all__ = [
    "ValuationSpec",
    "EvalResult",
    "CheckResult",
    "eval_smooth",
    "eval_domain_gradient",
    "eval_cauchy_kubota",
    "eval_ck_general",
    "eval_dual",
    "eval_dual_ck",
    "cone_closed_form",
    "retrieval_check",
    "classical_ck_check",
    "hessian_measure_integral",
    "conjugation_pushforward_check",
    "reilly_radial_check",
]


@dataclass(frozen=True)
class ValuationSpec:
    """Degree, ambient dimension, and an admissibility-checked weight."""
    j: int
    n: int
    zeta: WeightFunction

    def __post_init__(self):
        if not 0 <= self.j <= self.n:
            raise SchemaError(f"need 0 <= j <= n, got j={self.j}, n={self.n}")
        ok, why = in_had_class(self.zeta, HadClass(self.j, self.n))
        if not ok:
            raise SchemaError(
                f"weight not admissible for degree j={self.j} in dimension "
                f"n={self.n}: {why}")

    def with_dims(self, j: int, n: int, zeta: WeightFunction) -> "ValuationSpec":
        return ValuationSpec(j, n, zeta)


@dataclass(frozen=True)
class EvalResult:
    value: float
    error: float
    method: str
    integrand_evals: int = 0
    subspace_samples: int = 0

    def to_dict(self):
        return {
            "value": self.value,
            "error": self.error,
            "method": self.method,
            "counters": {
                "integrand_evals": self.integrand_evals,
                "subspace_samples": self.subspace_samples,
            },
        }


@dataclass(frozen=True)
class CheckResult:
    """Two sides of an identity with their combined error estimate."""
    lhs: float
    rhs: float
    error: float
    lhs_result: EvalResult | None = None
    rhs_result: EvalResult | None = None

    @property
    def difference(self) -> float:
        return abs(self.lhs - self.rhs)


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("FUNVOL_THREADS", "1")))
    except ValueError:
        return 1


def _indexed_map(fn, count: int) -> list:
    """Ordered map over range(count); thread pool when FUNVOL_THREADS > 1.

    Per-index RNG streams plus fixed-order reduction keep results identical
    regardless of the schedule.
    """
    workers = _worker_count()
    if workers == 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(count)))


def _combine_samples(values, errors) -> tuple[float, float]:
    """Mean with MC standard error and mean inner error added in quadrature.

    A single sample has no standard error; the estimate is returned with a
    NaN error so downstream verdicts become non_converged, never falsely
    certified.
    """
    values = np.asarray(values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    m = len(values)
    mean = float(np.sum(values)) / m  # pairwise summation: bit-stable order
    if m == 1:
        return mean, float("nan")
    se = float(np.std(values, ddof=1) / math.sqrt(m))
    return mean, math.hypot(se, float(np.mean(errors)))


# ---------------------------------------------------------------------------
# Smooth-route integrals


def _smooth_integral(u: ConvexFunction, weight: WeightFunction, degree: int,
                     cfg: QuadratureConfig, scheme: str = "auto",
                     level: int = 8):
    """integral of weight(|grad u|) * e_degree(Hessian) over {|grad u| <= s_max}."""
    if u.smooth_kind() is None:
        raise NotDifferentiable(
            f"{type(u).__name__} is outside the twice-differentiable catalog")
    s_max = weight.support_bound
    center = u.minimizer()
    singular = (u.smooth_kind() == "except_center"
                or weight.singularity.kind != "none")

    def integrand(pts):
        g = u.gradient(pts)
        s = np.linalg.norm(np.atleast_2d(g), axis=1)
        w = np.asarray(weight(np.minimum(s, s_max + 1.0)))
        w = np.where(s >= s_max, 0.0, w)
        if degree == 0:
            return w
        active = w != 0.0
        out = np.zeros_like(w)
        if active.any():
            out[active] = w[active] * np.asarray(
                u.hessian_elem_sym(np.atleast_2d(pts)[active], degree))
        return out

    if scheme == "box":
        radius = u.region_radius(s_max) * (1.0 + 1e-12)
        box = np.stack([center - radius, center + radius], axis=1)
        return integrate_box(integrand, box, cfg,
                             singular_point=center if singular else None)

    # the catalog's |grad| along rays is separable g(dir) * h(r), so kink
    # radii sit at shared ratios of the per-ray region radius
    knots = sorted(k for k in weight.knots() if 0.0 < k < s_max)
    probe = np.zeros((1, u.n))
    probe[0, 0] = 1.0
    r_probe = float(u.grad_radius(probe, s_max)[0])
    ratios = [float(u.grad_radius(probe, k)[0]) / r_probe for k in knots]

    def r_max(dirs):
        return u.grad_radius(dirs, s_max)

    return integrate_polar_separable(integrand, u.n, center, r_max, cfg,
                                     break_ratios=ratios,
                                     singular_center=singular, level=level)


def eval_smooth(spec: ValuationSpec, u: ConvexFunction,
                cfg: QuadratureConfig | None = None,
                scheme: str = "auto") -> EvalResult:
    """Direct Hessian-integrand route; needs j >= 1 and a twice-differentiable u."""
    if spec.j < 1:
        raise SchemaError("the smooth route needs j >= 1 (degree 0 is a constant)")
    cfg = cfg or DEFAULT_CONFIG
    res = _smooth_integral(u, spec.zeta, spec.n - spec.j, cfg, scheme)
    return EvalResult(res.value, res.error, "smooth", res.evaluations)


def eval_domain_gradient(spec: ValuationSpec, u: ConvexFunction,
                         cfg: QuadratureConfig | None = None) -> EvalResult:
    """Top-degree route: integral of weight(|grad u|) over the domain (j = n)."""
    if spec.j != spec.n:
        raise SchemaError("the domain-gradient route is the j = n representation")
    cfg = cfg or DEFAULT_CONFIG
    value, error, evals = _domain_weight_integral(u, spec.zeta, cfg)
    return EvalResult(value, error, "domain_gradient", evals)


def _domain_weight_integral(w: ConvexFunction, weight: WeightFunction,
                            cfg: QuadratureConfig):
    """integral over dom(w) of weight(|grad w|), with exact special cases."""
    if isinstance(w, Indicator):
        v0 = weight.value_at_zero()
        if v0 is None:
            raise SchemaError("weight has no finite value at 0")
        return v0 * w.body.volume(), 0.0, 0
    if isinstance(w, Cone):
        wt = weight.value_at_zero() if w.t == 0 else float(weight(w.t))
        if wt is None:
            raise SchemaError("weight has no finite value at 0")
        return wt * kappa(w.n) * w.r ** w.n, 0.0, 0
    if isinstance(w, EpiTranslated):
        return _domain_weight_integral(w.inner, weight, cfg)
    if isinstance(w, Rotated):
        return _domain_weight_integral(w.inner, weight, cfg)
    if isinstance(w, EpiScaled):
        value, error, evals = _domain_weight_integral(w.inner, weight, cfg)
        scale = w.lam ** w.n
        return value * scale, error * scale, evals
    if w.smooth_kind() is not None:
        res = _smooth_integral(w, weight, 0, cfg)
        return res.value, res.error, res.evaluations
    raise UnsupportedVariant(
        f"domain-gradient integral unsupported for {type(w).__name__}")


# ---------------------------------------------------------------------------
# Grassmannian routes


def eval_cauchy_kubota(spec: ValuationSpec, u: ConvexFunction,
                       samples: int = 256, rng: Rng = Rng(0),
                       cfg: QuadratureConfig | None = None) -> EvalResult:
    """Projection-average route at the natural projection dimension k = j."""
    cfg = cfg or DEFAULT_CONFIG
    j, n = spec.j, spec.n
    alpha = alpha_from_zeta(spec.zeta, j, n)
    if j == 0:
        return EvalResult(float(alpha.value_at_zero()), 0.0, "cauchy_kubota")
    if samples < 1:
        raise SchemaError("need at least one subspace sample")

    def one(i):
        e = sample_grassmann(n, j, rng.stream(i))
        w = project_function(u, e).realized
        return _domain_weight_integral(w, alpha, cfg)

    results = _indexed_map(one, samples)
    values = [r[0] for r in results]
    errors = [r[1] for r in results]
    evals = sum(r[2] for r in results)
    mean, err = _combine_samples(values, errors)
    value = flag_coefficient(n, j) * mean
    return EvalResult(value, flag_coefficient(n, j) * err, "cauchy_kubota",
                      evals, samples)


def _z_lower_dim(j: int, k: int, xi: WeightFunction, w: ConvexFunction,
                 rng: Rng, cfg: QuadratureConfig, samples: int):
    """Degree-j functional intrinsic volume of a k-dimensional projection."""
    if k == 0:
        v0 = xi.value_at_zero()
        return float(v0), 0.0, 0
    if j == 0:
        const = kappa(k) * transform_R_power(xi, k).value_at_zero()
        return float(const), 0.0, 0
    if j == k:
        return _domain_weight_integral(w, xi, cfg)
    if w.smooth_kind() is not None:
        res = _smooth_integral(w, xi, k - j, cfg)
        return res.value, res.error, res.evaluations
    inner = eval_cauchy_kubota(ValuationSpec(j, k, xi), w, samples, rng, cfg)
    return inner.value, inner.error, inner.integrand_evals


def eval_ck_general(spec: ValuationSpec, u: ConvexFunction, k: int,
                    samples: int = 256, rng: Rng = Rng(0),
                    cfg: QuadratureConfig | None = None) -> EvalResult:
    """Projection-average route at an intermediate dimension j <= k < n."""
    cfg = cfg or DEFAULT_CONFIG
    j, n = spec.j, spec.n
    if not j <= k < n:
        raise SchemaError(f"need j <= k < n, got j={j}, k={k}, n={n}")
    xi = xi_from_zeta(spec.zeta, j, k, n)
    if k == 0:
        return EvalResult(float(xi.value_at_zero()), 0.0, "ck_general")

    def one(i):
        stream = rng.stream(i)
        e = sample_grassmann(n, k, stream)
        w = project_function(u, e).realized
        return _z_lower_dim(j, k, xi, w, stream.stream(0), cfg, samples)

    results = _indexed_map(one, samples)
    mean, err = _combine_samples([r[0] for r in results], [r[1] for r in results])
    coeff = flag_coefficient(n, k)
    return EvalResult(coeff * mean, coeff * err, "ck_general",
                      sum(r[2] for r in results), samples)


# ---------------------------------------------------------------------------
# Dual routes


def _dual_integral(j: int, weight: WeightFunction, v: ConvexFunction,
                   cfg: QuadratureConfig, level: int = 8):
    """integral over {|x| <= s_max} of weight(|x|) * e_j(Hessian of v)."""
    s_max = weight.support_bound
    n = v.n

    def integrand(pts):
        s = np.linalg.norm(np.atleast_2d(pts), axis=1)
        w = np.asarray(weight(np.minimum(s, s_max + 1.0)))
        w = np.where(s >= s_max, 0.0, w)
        if j == 0:
            return w
        return w * np.asarray(v.hessian_elem_sym(pts, j))

    knots = sorted(k for k in weight.knots() if 0.0 < k < s_max)
    singular = (weight.singularity.kind != "none"
                or v.smooth_kind() == "except_center")
    return integrate_polar_separable(integrand, n, np.zeros(n), s_max, cfg,
                                     break_ratios=[k / s_max for k in knots],
                                     singular_center=singular, level=level)


def eval_dual(spec: ValuationSpec, v: ConvexFunction, path: str = "integral",
              samples: int = 256, rng: Rng = Rng(0),
              cfg: QuadratureConfig | None = None) -> EvalResult:
    """Dual valuation of a finite-valued v.

    ``integral`` evaluates weight(|x|) against the Hessian symmetric function
    of v directly; ``conjugate`` routes through the primal valuation of the
    convex conjugate.
    """
    cfg = cfg or DEFAULT_CONFIG
    if not v.is_finite:
        raise UnsupportedVariant("dual valuations act on finite-valued functions")
    if path == "integral":
        res = _dual_integral(spec.j, spec.zeta, v, cfg)
        return EvalResult(res.value, res.error, "dual_integral", res.evaluations)
    if path != "conjugate":
        raise SchemaError(f"unknown dual path {path!r}")
    u = conjugate(v)
    if spec.j == 0:
        const = kappa(spec.n) * transform_R_power(spec.zeta, spec.n).value_at_zero()
        return EvalResult(float(const), 0.0, "dual_conjugate")
    if spec.j == spec.n:
        inner = eval_domain_gradient(spec, u, cfg)
    elif u.smooth_kind() is not None:
        inner = eval_smooth(spec, u, cfg)
    else:
        inner = eval_cauchy_kubota(spec, u, samples, rng, cfg)
    return EvalResult(inner.value, inner.error, "dual_conjugate",
                      inner.integrand_evals, inner.subspace_samples)


def eval_dual_ck(spec: ValuationSpec, v: ConvexFunction, k: int,
                 samples: int = 256, rng: Rng = Rng(0),
                 cfg: QuadratureConfig | None = None) -> EvalResult:
    """Dual projection-average route: restrictions in place of projections."""
    cfg = cfg or DEFAULT_CONFIG
    j, n = spec.j, spec.n
    if not j <= k < n:
        raise SchemaError(f"need j <= k < n, got j={j}, k={k}, n={n}")
    if not v.is_finite:
        raise UnsupportedVariant("dual valuations act on finite-valued functions")
    xi = xi_from_zeta(spec.zeta, j, k, n)
    if k == 0:
        return EvalResult(float(xi.value_at_zero()), 0.0, "dual_ck")

    def one(i):
        e = sample_grassmann(n, k, rng.stream(i))
        w = restrict_function(v, e)
        if j == 0:
            const = kappa(k) * transform_R_power(xi, k).value_at_zero()
            return float(const), 0.0, 0
        res = _dual_integral(j, xi, w, cfg)
        return res.value, res.error, res.evaluations

    results = _indexed_map(one, samples)
    mean, err = _combine_samples([r[0] for r in results], [r[1] for r in results])
    coeff = flag_coefficient(n, k)
    return EvalResult(coeff * mean, coeff * err, "dual_ck",
                      sum(r[2] for r in results), samples)


# ---------------------------------------------------------------------------
# Closed forms and identity checks


def cone_closed_form(spec: ValuationSpec, t: float, r: float = 1.0) -> float:
    """Valuation of t|x| + (indicator of the r-ball): kappa_n C(n,j) T^{n-j}(zeta)(t) r^j."""
    j, n = spec.j, spec.n
    if not 1 <= j <= n:
        raise SchemaError("the cone closed form needs 1 <= j <= n")
    if t < 0 or r <= 0:
        raise SchemaError("need t >= 0 and r > 0")
    transformed = transform_R_power(spec.zeta, n - j)
    val = transformed.value_at_zero() if t == 0 else float(transformed(t))
    return kappa(n) * math.comb(n, j) * float(val) * r ** j


def retrieval_check(spec: ValuationSpec, body, samples: int = 256,
                    rng: Rng = Rng(0),
                    cfg: QuadratureConfig | None = None) -> CheckResult:
    """Indicator functions retrieve the classical intrinsic volumes."""
    j, n = spec.j, spec.n
    if body.n != n:
        raise SchemaError("body dimension must match the spec")
    if j == n:
        v0 = spec.zeta.value_at_zero()
        rhs = float(v0) * body_intrinsic_volume(body, n)
        lhs = eval_domain_gradient(spec, Indicator(body), cfg)
    else:
        const = kappa(n - j) * transform_R_power(spec.zeta, n - j).value_at_zero()
        rhs = float(const) * body_intrinsic_volume(body, j)
        lhs = eval_cauchy_kubota(spec, Indicator(body), samples, rng, cfg)
    return CheckResult(lhs.value, rhs, lhs.error, lhs_result=lhs)


def classical_ck_check(body, j: int, k: int, samples: int = 10_000,
                       rng: Rng = Rng(0)) -> CheckResult:
    """Classical projection formula for intrinsic volumes, Monte Carlo vs closed form.

    For j == k both sides are normalized to V_j itself; for j < k the two
    sides of the general flag identity are reported.
    """
    n = body.n
    if not 0 <= j <= k < n:
        raise SchemaError(f"need 0 <= j <= k < n, got j={j}, k={k}, n={n}")

    if k == 0:
        return CheckResult(1.0, 1.0, 0.0)

    def one(i):
        e = sample_grassmann(n, k, rng.stream(i))
        shadow = project_body(body, e.frame)
        return body_intrinsic_volume(shadow, j), 0.0, 0

    results = _indexed_map(one, samples)
    mean, err = _combine_samples([r[0] for r in results], [r[1] for r in results])
    if j == k:
        lhs = body_intrinsic_volume(body, j)
        coeff = flag_coefficient(n, j)
    else:
        lhs = (kappa(n - j) / kappa(k - j)) * math.comb(n - j, k - j) \
            * body_intrinsic_volume(body, j)
        coeff = kappa(n) / kappa(k) * math.comb(n, k)
    rhs = coeff * mean
    return CheckResult(lhs, rhs, coeff * err,
                       rhs_result=EvalResult(rhs, coeff * err, "classical_ck",
                                             0, samples))


def hessian_measure_integral(u: ConvexFunction, j: int, beta: WeightFunction,
                             cfg: QuadratureConfig | None = None) -> EvalResult:
    """integral of beta(|grad u|) e_{n-j}(Hessian): the gradient-pushforward measure
    of the degree-j Hessian density, integrated against a radial test function."""
    cfg = cfg or DEFAULT_CONFIG
    res = _smooth_integral(u, beta, u.n - j, cfg)
    return EvalResult(res.value, res.error, "hessian_measure", res.evaluations)


def conjugation_pushforward_check(u: ConvexFunction, j: int, beta: WeightFunction,
                                  cfg: QuadratureConfig | None = None) -> CheckResult:
    """Gradient-pushforward measure of u versus the Hessian measure of its conjugate."""
    cfg = cfg or DEFAULT_CONFIG
    lhs = hessian_measure_integral(u, j, beta, cfg)
    rhs = _dual_integral(j, beta, conjugate(u), cfg)
    return CheckResult(lhs.value, rhs.value, lhs.error + rhs.error,
                       lhs_result=lhs,
                       rhs_result=EvalResult(rhs.value, rhs.error, "dual_integral",
                                             rhs.evaluations))


def reilly_radial_check(n: int, j: int, zeta: WeightFunction, p: float = 2.0,
                        scale: float = 1.0,
                        cfg: QuadratureConfig | None = None) -> CheckResult:
    """Radial two-route identity: Hessian integrand versus the transformed weight
    against the level-set curvature function, both reduced to 1-d integrals.

    The source is u(x) = scale * |x|^p / p (convex, increasing profile,
    gradient 0 at the origin); level sets are spheres, whose curvature
    symmetric functions are binomial powers of 1/r.
    """
    cfg = cfg or DEFAULT_CONFIG
    if not 1 <= j <= n - 1:
        raise SchemaError("the radial identity needs 1 <= j <= n-1")
    if p <= 1 or scale <= 0:
        raise SchemaError("need p > 1 and scale > 0")
    s_max = zeta.support_bound
    r_bound = (s_max / scale) ** (1.0 / (p - 1.0))
    surf = n * kappa(n)
    i = n - j
    singular = zeta.singularity.kind != "none"

    def grad(r):
        return scale * r ** (p - 1.0)

    def lhs_integrand(r):
        r = np.asarray(r, dtype=float)
        tang = scale * r ** (p - 2.0)
        rad = (p - 1.0) * tang
        esym = (math.comb(n - 1, i) * tang ** i
                + math.comb(n - 1, i - 1) * tang ** (i - 1) * rad)
        return np.asarray(zeta(grad(r))) * esym * r ** (n - 1)

    transformed = transform_R_power(zeta, i)

    def rhs_integrand(r):
        r = np.asarray(r, dtype=float)
        return (math.comb(n - 1, i) * np.asarray(transformed(grad(r)))
                * r ** (j - 1))

    lhs = integrate_interval(lhs_integrand, 0.0, r_bound, cfg, singular_left=singular)
    rhs = integrate_interval(rhs_integrand, 0.0, r_bound, cfg, singular_left=False)
    lv, rv = surf * lhs.value, surf * rhs.value
    err = surf * (lhs.error + rhs.error)
    return CheckResult(lv, rv, err,
                       lhs_result=EvalResult(lv, surf * lhs.error, "radial_lhs",
                                             lhs.evaluations),
                       rhs_result=EvalResult(rv, surf * rhs.error, "radial_rhs",
                                             rhs.evaluations))
