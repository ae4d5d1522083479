import logging
import typing

import numpy as np

from common.errors import ArgumentError, IngestionError
from common.storage import read_rows, write_rows
from models.graph_model import SimilarityGraph
from models.layout_model import LayoutConfig, LayoutState
from schema.layout_schema import LAYOUT_HEADER, TRACE_HEADER, layout_rows, trace_rows
from services.similarity_service import SIM_FLOOR, attraction_weight


logger = logging.getLogger(__name__)

DISTANCE_FLOOR = 1e-9
COOLING = 0.9
# moves accepted at the full step before the step grows again
PROGRESS_STEPS = 5
BACKTRACK_LIMIT = 60


def _random_direction(rng: np.random.Generator) -> np.ndarray:
    angle = rng.uniform(0.0, 2.0 * np.pi)
    return np.array([np.cos(angle), np.sin(angle)])


def attraction_force(n1: int, n2: int, positions: np.ndarray) -> np.ndarray:
    """
    Force on n1 from its edge to n2: magnitude |p1 - p2|, pointing at n2.
    Coincident points give the zero vector.
    """
    if n1 == n2:
        raise ArgumentError("attraction needs two distinct nodes")
    positions = np.asarray(positions, dtype=float)
    return positions[n2] - positions[n1]


def repulsion_force(
    n1: int,
    n2: int,
    positions: np.ndarray,
    degrees: np.ndarray,
    k_r: float,
    rng: typing.Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Force on n1 pushing it away from n2 with magnitude
    k_r (deg(n1) + 1)(deg(n2) + 1) / |p1 - p2|.
    """
    if n1 == n2:
        raise ArgumentError("repulsion needs two distinct nodes")
    positions = np.asarray(positions, dtype=float)
    delta = positions[n1] - positions[n2]
    distance = float(np.hypot(delta[0], delta[1]))
    if distance < DISTANCE_FLOOR:
        direction = _random_direction(rng if rng is not None else np.random.default_rng(0))
        distance = DISTANCE_FLOOR
    else:
        direction = delta / distance
    magnitude = k_r * (degrees[n1] + 1.0) * (degrees[n2] + 1.0) / distance
    return magnitude * direction


def initial_positions(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(n, 2))


def _edge_arrays(graph: SimilarityGraph, sim_floor: float = SIM_FLOOR) -> typing.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    upper = list(graph.edges())
    if not upper:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    src = np.array([e[0] for e in upper], dtype=np.int64)
    dst = np.array([e[1] for e in upper], dtype=np.int64)
    scale = np.array([attraction_weight(e[2], sim_floor) for e in upper])
    return src, dst, scale


def net_forces(
    positions: np.ndarray,
    degrees: np.ndarray,
    src: np.ndarray,
    dst: np.ndarray,
    scale: np.ndarray,
    k_r: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sum of pairwise repulsion and per-edge attraction on every node."""
    n = positions.shape[0]
    delta = positions[:, None, :] - positions[None, :, :]
    distance = np.hypot(delta[..., 0], delta[..., 1])
    np.fill_diagonal(distance, np.inf)

    coincident = distance < DISTANCE_FLOOR
    if coincident.any():
        for i, j in zip(*np.nonzero(np.triu(coincident, k=1))):
            direction = _random_direction(rng)
            delta[i, j] = direction * DISTANCE_FLOOR
            delta[j, i] = -direction * DISTANCE_FLOOR
        distance = np.where(coincident, DISTANCE_FLOOR, distance)

    charge = degrees.astype(float) + 1.0
    magnitude = k_r * np.outer(charge, charge) / distance
    np.fill_diagonal(magnitude, 0.0)
    forces = np.einsum("ij,ijk->ik", magnitude / distance, delta)

    if src.size:
        pull = (positions[dst] - positions[src]) * scale[:, None]
        np.add.at(forces, src, pull)
        np.add.at(forces, dst, -pull)
    return forces.reshape(n, 2)


def layout_energy(
    positions: np.ndarray,
    degrees: np.ndarray,
    src: np.ndarray,
    dst: np.ndarray,
    scale: np.ndarray,
    k_r: float,
) -> float:
    """
    Potential whose negative gradient is net_forces: scale/2 * d^2 per edge
    minus k_r (deg_i + 1)(deg_j + 1) ln d per node pair.
    """
    n = positions.shape[0]
    upper = np.triu_indices(n, k=1)
    delta = positions[upper[0]] - positions[upper[1]]
    distance = np.maximum(np.hypot(delta[:, 0], delta[:, 1]), DISTANCE_FLOOR)
    charge = degrees.astype(float) + 1.0
    repulsion = k_r * float(np.sum(charge[upper[0]] * charge[upper[1]] * np.log(distance)))
    if not src.size:
        return -repulsion
    stretch = positions[dst] - positions[src]
    attraction = 0.5 * float(np.sum(scale * np.einsum("ij,ij->i", stretch, stretch)))
    return attraction - repulsion


def _displacement(forces: np.ndarray, lengths: np.ndarray, step: float, max_step: float) -> np.ndarray:
    # step * F, no node moving further than max_step
    factor = np.minimum(step, max_step / np.maximum(lengths, DISTANCE_FLOOR))
    return forces * factor[:, None]


def run_layout(graph: SimilarityGraph, config: LayoutConfig) -> LayoutState:
    """
    Net-force descent with adaptive cooling. Each node moves step * F, capped
    at config.max_step. A move that raises layout_energy is retried with the
    step shrunk by COOLING; after PROGRESS_STEPS moves accepted at the full
    step, the step grows back, never above config.max_step. Stops when the
    mean displacement of an accepted move falls below the tolerance.
    """
    n = graph.n_nodes
    positions = initial_positions(n, config.seed)
    if n <= 1 or config.max_iterations == 0:
        return LayoutState(
            node_ids=graph.node_ids,
            positions=positions,
            iteration=0,
            converged=n <= 1,
        )

    rng = np.random.default_rng([config.seed, 1])
    degrees = np.asarray(graph.degrees, dtype=float)
    src, dst, scale = _edge_arrays(graph, config.sim_floor)

    def energy_at(points: np.ndarray) -> float:
        return layout_energy(points, degrees, src, dst, scale, config.k_r)

    step = config.initial_step
    energy = energy_at(positions)
    energy_trace = []
    progress = 0
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        forces = net_forces(positions, degrees, src, dst, scale, config.k_r, rng)
        lengths = np.hypot(forces[:, 0], forces[:, 1])
        energy_trace.append(float(lengths.sum()))

        for attempt in range(BACKTRACK_LIMIT):
            displacement = _displacement(forces, lengths, step, config.max_step)
            candidate = positions + displacement
            candidate_energy = energy_at(candidate)
            if candidate_energy <= energy:
                break
            step *= COOLING
        else:
            # no descent left at float resolution
            converged = bool(np.mean(lengths) < config.convergence_tolerance)
            logger.debug("No descent step at iteration %d (mean force %g)", iteration, np.mean(lengths))
            break

        positions, energy = candidate, candidate_energy
        if attempt == 0:
            progress += 1
            if progress >= PROGRESS_STEPS:
                progress = 0
                step = min(step / COOLING, config.max_step)
        else:
            progress = 0

        mean_displacement = float(np.mean(np.hypot(displacement[:, 0], displacement[:, 1])))
        if mean_displacement < config.convergence_tolerance:
            converged = True
            break

    if not converged:
        logger.warning("Layout did not converge in %d iterations", iteration)
    logger.info("Layout finished after %d iterations (converged=%s)", iteration, converged)
    return LayoutState(
        node_ids=graph.node_ids,
        positions=positions,
        iteration=iteration,
        converged=converged,
        energy_trace=tuple(energy_trace),
    )


def cluster_separation(positions: np.ndarray, labels: typing.Sequence) -> typing.Tuple[float, float]:
    """
    Mean distance between cluster centroids and mean pairwise distance within
    clusters.
    """
    positions = np.asarray(positions, dtype=float)
    labels = np.asarray(labels)
    groups = [positions[labels == label] for label in np.unique(labels)]
    centroids = np.array([group.mean(axis=0) for group in groups])

    inter = [
        float(np.linalg.norm(centroids[a] - centroids[b]))
        for a in range(len(centroids))
        for b in range(a + 1, len(centroids))
    ]
    intra = []
    for group in groups:
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                intra.append(float(np.linalg.norm(group[a] - group[b])))
    return (float(np.mean(inter)) if inter else 0.0, float(np.mean(intra)) if intra else 0.0)


def export_layout(state: LayoutState, path) -> None:
    write_rows(path, LAYOUT_HEADER, layout_rows(state))


def import_layout(path) -> LayoutState:
    rows = read_rows(path, "comma")
    node_ids, positions = [], []
    for number, fields in rows[1:]:
        if len(fields) != 3:
            raise IngestionError(path, f"line {number}: expected node_id,t,u")
        node_ids.append(fields[0])
        positions.append((float(fields[1]), float(fields[2])))
    return LayoutState(node_ids=tuple(node_ids), positions=np.array(positions, dtype=float).reshape(-1, 2))


def export_energy_trace(state: LayoutState, path) -> None:
    write_rows(path, TRACE_HEADER, trace_rows(state))
