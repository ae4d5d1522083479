from models.graph_model import SimilarityGraph
from models.layout_model import LayoutState


LAYOUT_HEADER = ("node_id", "t", "u")
EDGE_HEADER = ("node_i", "node_j", "similarity")
TRACE_HEADER = ("iteration", "energy")


def get_position_serial(node_id: str, position) -> dict:
    return {
        "node_id": str(node_id),
        "t": float(position[0]),
        "u": float(position[1]),
    }


def list_positions(state: LayoutState) -> list:
    return [get_position_serial(node_id, state.positions[k]) for k, node_id in enumerate(state.node_ids)]


def layout_rows(state: LayoutState) -> list:
    return [[row[key] for key in LAYOUT_HEADER] for row in list_positions(state)]


def edge_rows(graph: SimilarityGraph) -> list:
    return [[graph.node_ids[i], graph.node_ids[j], sim] for i, j, sim in graph.edges()]


def trace_rows(state: LayoutState) -> list:
    return [[k, float(energy)] for k, energy in enumerate(state.energy_trace, start=1)]
