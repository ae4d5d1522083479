import logging
import math
import typing

import numpy as np

from common.errors import ArgumentError, InsufficientDataError, SurfaceFitError
from common.storage import print_key_values, write_key_values
from models.bandwidth_model import (
    Bandwidth1D,
    BandwidthPair,
    FunctionalSet,
    OneDimFunctionals,
    Region,
    SurfaceFit,
    monomial_exponents,
)
from models.kernel_model import KernelConstants, KernelSpec, SmoothingSample
from schema.bandwidth_schema import get_bandwidth_serial
from services.kernel_service import density_1d, density_2d, kernel_constants, nw_curve_1d


logger = logging.getLogger(__name__)

DEGENERATE = 1e-12
CURVE_GRID = 200


def _monomial_name(p: int, q: int) -> str:
    parts = [name if power == 1 else f"{name}^{power}" for name, power in (("t", p), ("u", q)) if power]
    return "*".join(parts) or "1"


def _deficient_direction(design: np.ndarray, exponents) -> str:
    _, _, vh = np.linalg.svd(design, full_matrices=False)
    null = vh[-1]
    largest = float(np.max(np.abs(null)))
    terms = [
        f"{null[k]:+.3g}*{_monomial_name(*exponents[k])}"
        for k in range(len(exponents))
        if abs(null[k]) > 0.1 * largest
    ]
    return " ".join(terms)


def fit_polynomial_surface(sample: SmoothingSample, degree: int = 2) -> SurfaceFit:
    """
    Global OLS fit of a total-degree polynomial in (t, u).

    The design is built on standardized coordinates, which keeps it well
    conditioned; the coefficients are then expanded back to raw (t, u).
    """
    if sample.dimension != 2:
        raise ArgumentError("surface fitting needs a 2-D sample")
    exponents = monomial_exponents(degree)
    needed = len(exponents)
    if sample.n < needed:
        raise InsufficientDataError(f"degree-{degree} surface fit", needed, sample.n)

    t, u, y = sample.t, sample.u, sample.responses
    t_mean, u_mean = float(t.mean()), float(u.mean())
    t_scale, u_scale = float(t.std()), float(u.std())
    if not t_scale > 0.0:
        raise SurfaceFitError("t (all points share one t coordinate)", 1, needed)
    if not u_scale > 0.0:
        raise SurfaceFitError("u (all points share one u coordinate)", 1, needed)

    ts, us = (t - t_mean) / t_scale, (u - u_mean) / u_scale
    design = np.column_stack([ts**p * us**q for p, q in exponents])
    rank = int(np.linalg.matrix_rank(design))
    if rank < needed:
        raise SurfaceFitError(_deficient_direction(design, exponents), rank, needed)

    standardized, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ standardized
    dof = sample.n - needed
    residual_variance = float(residuals @ residuals / dof) if dof > 0 else 0.0

    # (t - m)^p / s^p expanded binomially, per axis
    index = {pair: k for k, pair in enumerate(exponents)}
    coefficients = np.zeros(needed)
    for (p, q), b in zip(exponents, standardized):
        for i in range(p + 1):
            ct = math.comb(p, i) * (-t_mean) ** (p - i) / t_scale**p
            for j in range(q + 1):
                cu = math.comb(q, j) * (-u_mean) ** (q - j) / u_scale**q
                coefficients[index[(i, j)]] += b * ct * cu

    return SurfaceFit(
        degree=degree,
        coefficients=coefficients,
        residual_variance=residual_variance,
        n=sample.n,
    )


def fit_quadratic_surface(sample: SmoothingSample) -> SurfaceFit:
    return fit_polynomial_surface(sample, 2)


def quantile_region(points, coverage: float = 0.9) -> Region:
    """Axis-aligned box holding the central `coverage` share of each coordinate."""
    if not 0.0 < coverage <= 1.0:
        raise ArgumentError(f"coverage must be in (0, 1], got {coverage!r}")
    points = np.asarray(points, dtype=float)
    tail = (1.0 - coverage) / 2.0
    low = np.quantile(points, tail, axis=0)
    high = np.quantile(points, 1.0 - tail, axis=0)
    return Region(t_min=float(low[0]), t_max=float(high[0]), u_min=float(low[1]), u_max=float(high[1]))


def _midpoints(low: float, high: float, count: int) -> np.ndarray:
    width = (high - low) / count
    return low + (np.arange(count) + 0.5) * width


def compute_functionals(
    fit: SurfaceFit,
    density: typing.Callable[[np.ndarray], np.ndarray],
    region: Region,
    grid_resolution: int = 50,
    density_floor_ratio: float = 1e-3,
) -> FunctionalSet:
    """
    Midpoint-rule values of I_tt, I_uu, I_tu and I_f over `region`, the weight
    being the indicator of the region. Densities below
    density_floor_ratio * max density are raised to that floor before inversion.
    """
    if not region.area > 0.0:
        raise ArgumentError("functional region must have positive area")
    if grid_resolution < 1:
        raise ArgumentError("grid_resolution must be positive")

    tt, uu = np.meshgrid(
        _midpoints(region.t_min, region.t_max, grid_resolution),
        _midpoints(region.u_min, region.u_max, grid_resolution),
        indexing="ij",
    )
    tt, uu = tt.ravel(), uu.ravel()
    cell = region.area / (grid_resolution * grid_resolution)

    r_tt = np.broadcast_to(fit.partial(2, 0, tt, uu), tt.shape)
    r_uu = np.broadcast_to(fit.partial(0, 2, tt, uu), tt.shape)

    f = np.asarray(density(np.column_stack([tt, uu])), dtype=float)
    peak = float(f.max())
    if not peak > 0.0:
        raise ArgumentError("density vanishes on the functional region")
    f = np.maximum(f, peak * density_floor_ratio)

    return FunctionalSet(
        i_tt=float(np.sum(r_tt * r_tt) * cell),
        i_uu=float(np.sum(r_uu * r_uu) * cell),
        i_tu=float(np.sum(r_tt * r_uu) * cell),
        i_f=float(np.sum(1.0 / f) * cell),
        region=region,
    )


def fallback_pair(
    n: int,
    extent: typing.Tuple[float, float],
    reason: str,
    sigma2: typing.Optional[float] = None,
    functionals: typing.Optional[FunctionalSet] = None,
) -> BandwidthPair:
    spread = math.sqrt(abs(extent[0] * extent[1]))
    if not (spread > 0.0 and math.isfinite(spread)):
        spread = 1.0
    b = max(n, 1) ** (-1.0 / 6.0) * spread
    logger.warning("Bandwidth fallback (%s): b_t = b_u = %g", reason, b)
    return BandwidthPair(
        b_t=b,
        b_u=b,
        source="fallback",
        fallback=True,
        reason=reason,
        n=n,
        sigma2=sigma2,
        functionals=functionals,
    )


def bandwidth_2d(
    functionals: FunctionalSet,
    sigma2: float,
    constants: KernelConstants,
    n: int,
    extent: typing.Optional[typing.Tuple[float, float]] = None,
) -> BandwidthPair:
    """
    b_t = (s2 R^2 I_uu^(3/4) I_f / (mu2^2 I_tt^(3/4) (I_tt^(1/2) I_uu^(1/2) + I_tu) n))^(1/6)
    b_u = (I_tt / I_uu)^(1/4) b_t

    Degenerate functionals give the flagged n^(-1/6) * geometric-mean-extent fallback.
    """
    if n < 1:
        raise ArgumentError(f"n must be positive, got {n}")
    if sigma2 < 0.0:
        raise ArgumentError(f"sigma2 must be non-negative, got {sigma2!r}")
    if extent is None:
        extent = (functionals.region.width, functionals.region.height)

    i_tt, i_uu, i_tu = functionals.i_tt, functionals.i_uu, functionals.i_tu
    if i_tt < DEGENERATE or i_uu < DEGENERATE:
        return fallback_pair(n, extent, "vanishing curvature functional", sigma2, functionals)

    denominator = (
        constants.second_moment**2
        * i_tt**0.75
        * (math.sqrt(i_tt) * math.sqrt(i_uu) + i_tu)
        * n
    )
    if not denominator > 0.0:
        return fallback_pair(n, extent, "non-positive denominator", sigma2, functionals)

    numerator = sigma2 * constants.roughness**2 * i_uu**0.75 * functionals.i_f
    b_t = (numerator / denominator) ** (1.0 / 6.0)
    b_u = (i_tt / i_uu) ** 0.25 * b_t
    if not all(b > 0.0 and math.isfinite(b) for b in (b_t, b_u)):
        return fallback_pair(n, extent, "non-positive or non-finite bandwidth", sigma2, functionals)

    return BandwidthPair(b_t=b_t, b_u=b_u, n=n, sigma2=sigma2, functionals=functionals)


def rice_variance(x, y) -> float:
    """sum (y_(i+1) - y_(i))^2 / (2 (n - 1)) over the responses sorted by x."""
    order = np.argsort(np.asarray(x, dtype=float), kind="stable")
    diffs = np.diff(np.asarray(y, dtype=float)[order])
    return float(diffs @ diffs / (2.0 * (len(diffs))))


def estimate_sigma2(sample: SmoothingSample, degree: int = 2) -> float:
    if sample.n < 2:
        raise InsufficientDataError("noise variance", 2, sample.n)
    if sample.dimension == 1:
        return rice_variance(sample.t, sample.responses)

    if sample.n <= len(monomial_exponents(degree)):
        return float(np.var(sample.responses, ddof=1))
    try:
        return fit_polynomial_surface(sample, degree).residual_variance
    except SurfaceFitError as e:
        logger.warning("Noise variance from raw responses: %s", e)
        return float(np.var(sample.responses, ddof=1))


def plug_in_bandwidth_1d(
    functionals: OneDimFunctionals, constants: KernelConstants, n: int
) -> Bandwidth1D:
    """
    h = n^(-1/5) (s2 R(K) int 1/f / ((int x^2 K^2)^2 int (r'' + 2 r' f'/f)^2))^(1/5)
    """
    if n < 1:
        raise ArgumentError(f"n must be positive, got {n}")
    reason = None
    if functionals.curvature < DEGENERATE:
        reason = "vanishing curvature functional"
    else:
        ratio = (
            functionals.sigma2
            * constants.roughness
            * functionals.inverse_density
            / (constants.squared_second_moment**2 * functionals.curvature)
        )
        h = n ** (-0.2) * ratio**0.2
        if h > 0.0 and math.isfinite(h):
            return Bandwidth1D(h=h, functionals=functionals)
        reason = "non-positive or non-finite bandwidth"

    spread = functionals.sample_range if functionals.sample_range > 0.0 else 1.0
    h = n ** (-0.2) * spread
    logger.warning("1-D bandwidth fallback (%s): h = %g", reason, h)
    return Bandwidth1D(h=h, fallback=True, reason=reason, functionals=functionals)


def one_dim_functionals(
    sample: SmoothingSample,
    pilot_h: float,
    spec="epanechnikov",
    grid_resolution: int = CURVE_GRID,
    density_floor_ratio: float = 1e-3,
) -> OneDimFunctionals:
    """
    Estimates the 1-D functionals on a midpoint grid over the sample range:
    Rice noise variance, the integral of 1/f with f a reference-factor Gaussian
    KDE, and the curvature integral from a pilot NW curve differentiated
    numerically.
    """
    x = sample.t
    low, high = float(x.min()), float(x.max())
    grid = _midpoints(low, high, grid_resolution)
    step = (high - low) / grid_resolution

    f = density_1d(x)(grid)
    f = np.maximum(f, float(f.max()) * density_floor_ratio)
    r, _ = nw_curve_1d(sample, grid, pilot_h, spec)
    r1 = np.gradient(r, grid, edge_order=2)
    r2 = np.gradient(r1, grid, edge_order=2)
    f1 = np.gradient(f, grid, edge_order=2)
    integrand = (r2 + 2.0 * r1 * f1 / f) ** 2

    return OneDimFunctionals(
        sigma2=rice_variance(x, sample.responses),
        inverse_density=float(np.sum(1.0 / f) * step),
        curvature=float(np.sum(integrand) * step),
        sample_range=high - low,
    )


def bandwidth_1d(
    sample: SmoothingSample,
    constants: KernelConstants,
    pilot_h: float,
    spec="epanechnikov",
    grid_resolution: int = CURVE_GRID,
) -> Bandwidth1D:
    if sample.dimension != 1:
        raise ArgumentError("bandwidth_1d needs a 1-D sample")
    if sample.n < 4:
        raise InsufficientDataError("1-D plug-in bandwidth", 4, sample.n)
    if not pilot_h > 0.0:
        raise ArgumentError(f"pilot_h must be positive, got {pilot_h!r}")

    sample_range = float(np.ptp(sample.t))
    if not sample_range > 0.0:
        functionals = OneDimFunctionals(
            sigma2=rice_variance(sample.t, sample.responses),
            inverse_density=1.0,
            curvature=0.0,
            sample_range=0.0,
        )
        return plug_in_bandwidth_1d(functionals, constants, sample.n)

    functionals = one_dim_functionals(sample, pilot_h, spec, grid_resolution)
    return plug_in_bandwidth_1d(functionals, constants, sample.n)


def select_bandwidth_2d(
    sample: SmoothingSample,
    spec: typing.Union[KernelSpec, str],
    settings,
    extent: typing.Optional[typing.Tuple[float, float]] = None,
) -> BandwidthPair:
    """
    Fixed bandwidths when both are configured, otherwise the plug-in pipeline:
    surface fit, residual variance, reference-rule KDE, functionals over the
    central quantile box, then the b_t / b_u formulas.
    """
    if settings.fixed_bandwidth:
        return BandwidthPair(
            b_t=settings.bandwidth_t, b_u=settings.bandwidth_u, source="fixed", n=sample.n
        )
    if sample.dimension != 2:
        raise ArgumentError("select_bandwidth_2d needs a 2-D sample")

    n = sample.n
    if extent is None:
        extent = (float(np.ptp(sample.t)), float(np.ptp(sample.u)))

    try:
        fit = fit_polynomial_surface(sample, settings.surface_degree)
    except (InsufficientDataError, SurfaceFitError) as e:
        return fallback_pair(n, extent, f"surface fit impossible: {e}")

    region = quantile_region(sample.coordinates, settings.quantile_coverage)
    if not region.area > 0.0:
        return fallback_pair(n, extent, "quantile region has zero area", fit.residual_variance)

    try:
        density = density_2d(sample.coordinates)
        functionals = compute_functionals(
            fit, density, region, settings.functional_grid, settings.density_floor_ratio
        )
    except ArgumentError as e:
        return fallback_pair(n, extent, str(e), fit.residual_variance)

    pair = bandwidth_2d(functionals, fit.residual_variance, kernel_constants(spec), n, extent)
    if not pair.fallback:
        logger.info(
            "Plug-in bandwidths b_t=%g b_u=%g (n=%d, sigma2=%g)", pair.b_t, pair.b_u, n, pair.sigma2
        )
    return pair


def write_diagnostics(
    pair: BandwidthPair, path=None, extra: typing.Optional[typing.Mapping[str, typing.Any]] = None
) -> None:
    """Bandwidth diagnostics plus any extra key=value pairs; standard output when no path is given."""
    values = get_bandwidth_serial(pair)
    values.update(extra or {})
    if path:
        write_key_values(path, values)
    else:
        print_key_values(values)
