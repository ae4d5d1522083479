import logging
import math
import typing

import numpy as np
from pydantic import ValidationError
from scipy import integrate
from scipy.stats import gaussian_kde

from common.errors import ArgumentError, InsufficientDataError
from models.kernel_model import (
    BandwidthMatrix,
    KernelConstants,
    KernelSpec,
    NWEstimate,
    SmoothingSample,
)


logger = logging.getLogger(__name__)

QUADRATURE_TOLERANCE = 1e-10
KDE_CHUNK = 2048


def _as_spec(spec) -> KernelSpec:
    if isinstance(spec, KernelSpec):
        return spec
    return KernelSpec(family=spec)


def kernel_weights(spec, x) -> np.ndarray:
    """Vectorised kernel K(x) of the given family."""
    spec = _as_spec(spec)
    x = np.asarray(x, dtype=float)
    if spec.family == "epanechnikov":
        return np.where(np.abs(x) <= 1.0, 0.75 * (1.0 - x * x), 0.0)
    if spec.family == "uniform":
        return np.where(np.abs(x) <= 1.0, 0.5, 0.0)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def kernel_eval(spec, x: float) -> float:
    return float(kernel_weights(spec, x))


def kernel_constants(spec) -> KernelConstants:
    """
    R(K), mu_2(K) and int x^2 K^2 by adaptive quadrature over the kernel's support.
    """
    spec = _as_spec(spec)
    lower, upper = spec.support

    def quad(integrand):
        value, _ = integrate.quad(
            integrand, lower, upper, epsabs=QUADRATURE_TOLERANCE, epsrel=QUADRATURE_TOLERANCE
        )
        return float(value)

    return KernelConstants(
        family=spec.family,
        roughness=quad(lambda x: kernel_eval(spec, x) ** 2),
        second_moment=quad(lambda x: x * x * kernel_eval(spec, x)),
        squared_second_moment=quad(lambda x: x * x * kernel_eval(spec, x) ** 2),
    )


def _check_bandwidth(name: str, value: float) -> None:
    if not (value > 0.0 and math.isfinite(value)):
        raise ArgumentError(f"{name} must be positive and finite, got {value!r}")


def _nearest(coordinates: np.ndarray, query) -> int:
    delta = coordinates - np.asarray(query, dtype=float)
    if delta.ndim == 1:
        return int(np.argmin(np.abs(delta)))
    return int(np.argmin(np.hypot(delta[:, 0], delta[:, 1])))


def nw_curve_1d(
    sample: SmoothingSample, grid, h: float, spec="epanechnikov"
) -> typing.Tuple[np.ndarray, np.ndarray]:
    """
    1-D Nadaraya-Watson estimates at every grid point, with a mask marking the
    points where the kernel window was empty and the nearest response was used.
    """
    _check_bandwidth("h", h)
    if sample.dimension != 1:
        raise ArgumentError("nw_curve_1d needs a 1-D sample")
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    weights = kernel_weights(spec, (grid[:, None] - sample.t[None, :]) / h) / h
    totals = weights.sum(axis=1)
    fallback = ~(totals > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = weights @ sample.responses / totals
    for k in np.nonzero(fallback)[0]:
        values[k] = sample.responses[_nearest(sample.t, grid[k])]
    return values, fallback


def nw_estimate_1d(sample: SmoothingSample, x: float, h: float, spec="epanechnikov") -> NWEstimate:
    _check_bandwidth("h", h)
    if sample.dimension != 1:
        raise ArgumentError("nw_estimate_1d needs a 1-D sample")
    weights = kernel_weights(spec, (x - sample.t) / h) / h
    total = float(weights.sum())
    if not total > 0.0:
        nearest = _nearest(sample.t, x)
        return NWEstimate(value=float(sample.responses[nearest]), fallback=True, weight_sum=0.0)
    return NWEstimate(value=float(weights @ sample.responses / total), weight_sum=total)


def _axis_centres(values: np.ndarray, count: int) -> typing.Tuple[np.ndarray, float]:
    low, high = float(values.min()), float(values.max())
    if high <= low or count <= 1:
        return np.array([low]), 1.0
    centres = np.linspace(low, high, count)
    return centres, (high - low) / (count - 1)


def bin_centres(sample: SmoothingSample, frame=None) -> typing.Tuple[np.ndarray, float]:
    """
    Assign every point of a 2-D sample to an equal-area grid cell and return
    the cell centres (one row per point) and the cell area. The grid spans the
    bounding box of `frame` (n points, default the sample itself): each axis
    gets ceil(sqrt(n)) evenly spaced centres from the minimum to the maximum; a
    flat axis gets one centre and the other axis all of them. Points outside
    the frame snap to the border cells.
    """
    if sample.dimension != 2:
        raise ArgumentError("binning needs a 2-D sample")
    grid = sample.coordinates if frame is None else np.asarray(frame, dtype=float).reshape(-1, 2)
    if grid.shape[0] == 0:
        raise ArgumentError("binning frame has no points")
    per_axis = math.ceil(math.sqrt(grid.shape[0]))
    t, u = grid[:, 0], grid[:, 1]
    t_flat = not t.max() > t.min()
    u_flat = not u.max() > u.min()
    t_count = 1 if t_flat else (per_axis * per_axis if u_flat else per_axis)
    u_count = 1 if u_flat else (per_axis * per_axis if t_flat else per_axis)

    t_centres, t_width = _axis_centres(t, t_count)
    u_centres, u_width = _axis_centres(u, u_count)
    t_index = np.clip(np.rint((sample.t - t_centres[0]) / t_width), 0, len(t_centres) - 1).astype(int)
    u_index = np.clip(np.rint((sample.u - u_centres[0]) / u_width), 0, len(u_centres) - 1).astype(int)
    centres = np.column_stack([t_centres[t_index], u_centres[u_index]])
    return centres, t_width * u_width


def _cell_weights(sample, queries, b_t, b_u, spec, frame=None) -> typing.Tuple[np.ndarray, float]:
    _check_bandwidth("b_t", b_t)
    _check_bandwidth("b_u", b_u)
    centres, area = bin_centres(sample, frame)
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    k_t = kernel_weights(spec, (queries[:, 0:1] - centres[None, :, 0]) / b_t)
    k_u = kernel_weights(spec, (queries[:, 1:2] - centres[None, :, 1]) / b_u)
    return k_t * k_u * area / (b_t * b_u), area


def gasser_muller_2d(
    sample: SmoothingSample, queries, b_t: float, b_u: float, spec="epanechnikov", frame=None
) -> np.ndarray:
    """
    Unnormalised binned estimate b_t^-1 b_u^-1 sum_i |A_i| K((t - v_i)/b_t) K((u - w_i)/b_u) Y_i.
    """
    weights, _ = _cell_weights(sample, queries, b_t, b_u, spec, frame)
    return weights @ sample.responses


def nw_surface_2d(
    sample: SmoothingSample, queries, b_t: float, b_u: float, spec="epanechnikov", frame=None
) -> typing.Tuple[np.ndarray, np.ndarray]:
    """
    Normalised binned estimates at every query row, plus the empty-window mask.
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    weights, _ = _cell_weights(sample, queries, b_t, b_u, spec, frame)
    totals = weights.sum(axis=1)
    fallback = ~(totals > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = weights @ sample.responses / totals
    for k in np.nonzero(fallback)[0]:
        values[k] = sample.responses[_nearest(sample.coordinates, queries[k])]
    return values, fallback


def nw_estimate_2d(
    sample: SmoothingSample, query, b_t: float, b_u: float, spec="epanechnikov", frame=None
) -> NWEstimate:
    weights, _ = _cell_weights(sample, [query], b_t, b_u, spec, frame)
    weights = weights[0]
    total = float(weights.sum())
    if not total > 0.0:
        nearest = _nearest(sample.coordinates, query)
        return NWEstimate(value=float(sample.responses[nearest]), fallback=True, weight_sum=0.0)
    return NWEstimate(value=float(weights @ sample.responses / total), weight_sum=total)


def _as_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ArgumentError("points must have shape (n, 2)")
    return points


def empirical_covariance(points) -> np.ndarray:
    points = _as_points(points)
    if points.shape[0] < 2:
        raise InsufficientDataError("empirical covariance", 2, points.shape[0])
    centred = points - points.mean(axis=0)
    return centred.T @ centred / (points.shape[0] - 1)


def reference_rule(points) -> BandwidthMatrix:
    """
    H = n^(-1/3) * empirical covariance. When the smallest eigenvalue is below
    1e-9 * trace(H), that amount is added on the diagonal.
    """
    points = _as_points(points)
    n = points.shape[0]
    H = n ** (-1.0 / 3.0) * empirical_covariance(points)
    floor = 1e-9 * float(np.trace(H))
    if not floor > 0.0:
        raise ArgumentError("reference rule is undefined for an all-coincident sample")
    regularized = False
    if float(np.linalg.eigvalsh(H).min()) < floor:
        H = H + floor * np.eye(2)
        regularized = True
        logger.debug("Reference-rule bandwidth regularized by %g", floor)
    return BandwidthMatrix(H=H, regularized=regularized)


def _as_bandwidth_matrix(H) -> BandwidthMatrix:
    if isinstance(H, BandwidthMatrix):
        return H
    try:
        return BandwidthMatrix(H=H)
    except ValidationError as e:
        raise ArgumentError(f"invalid bandwidth matrix: {e.errors()[0]['msg']}") from e


def kde(points, x, H) -> typing.Union[float, np.ndarray]:
    """
    Gaussian-kernel density (1/n) sum_i |H|^(-1/2) K(H^(-1/2)(x - X_i)).
    A single query point gives a float, an (m, 2) array gives m densities.
    """
    points = _as_points(points)
    H = _as_bandwidth_matrix(H).H
    inverse = np.linalg.inv(H)
    scale = 1.0 / (2.0 * math.pi * math.sqrt(float(np.linalg.det(H))) * points.shape[0])

    queries = np.asarray(x, dtype=float)
    single = queries.ndim == 1
    queries = np.atleast_2d(queries)
    out = np.empty(queries.shape[0])
    for start in range(0, queries.shape[0], KDE_CHUNK):
        delta = queries[start : start + KDE_CHUNK, None, :] - points[None, :, :]
        quad_form = np.einsum("mni,ij,mnj->mn", delta, inverse, delta)
        out[start : start + KDE_CHUNK] = scale * np.exp(-0.5 * quad_form).sum(axis=1)
    return float(out[0]) if single else out


def density_2d(points) -> typing.Callable[[np.ndarray], np.ndarray]:
    """Reference-rule KDE of a 2-D sample as a vectorised evaluator."""
    points = _as_points(points)
    H = reference_rule(points)
    return lambda queries: kde(points, np.atleast_2d(queries), H)


def density_1d(values) -> typing.Callable[[np.ndarray], np.ndarray]:
    """
    Gaussian KDE of a 1-D sample with the reference factor n^(-1/5).
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 2:
        raise InsufficientDataError("1-D density", 2, values.shape[0])
    if not np.ptp(values) > 0.0:
        raise ArgumentError("1-D density is undefined for a constant sample")
    estimator = gaussian_kde(values, bw_method=values.shape[0] ** (-1.0 / 5.0))
    return lambda grid: estimator(np.atleast_1d(np.asarray(grid, dtype=float)))
