import logging

from api.router import Router, option, settings_from_args
from common.storage import print_rows
from models.layout_model import LayoutConfig, LayoutState
from schema.layout_schema import LAYOUT_HEADER, layout_rows
from services.layout_service import export_energy_trace, export_layout, run_layout
from services.ratings_service import load_ratings
from services.similarity_service import build_similarity_graph, export_edges


logger = logging.getLogger(__name__)

layout_router = Router(tags=["layout"])


@layout_router.command(
    "layout",
    summary="Build the similarity graph and compute its force-directed layout",
    arguments=[
        option("--ratings", required=True, help="user,item,rating file"),
        option("--mode", choices=["user", "item"], default=None),
        option("--metric", choices=["cosine", "jaccard"], default=None),
        option("--iterations", type=int, default=None, help="maximum layout iterations"),
        option("--k-r", dest="k_r", type=float, default=None, help="repulsion scaling"),
        option("--edges", default=None, help="also write the edge list here"),
        option("--trace", default=None, help="also write the per-iteration energy here"),
    ],
)
def layout(args) -> int:
    settings = settings_from_args(
        args, mode=args.mode, metric=args.metric, max_iterations=args.iterations, k_r=args.k_r
    )
    matrix = load_ratings(args.ratings, settings.delimiter)
    if matrix.is_empty:
        logger.warning("No ratings in %s, writing an empty layout", args.ratings)
        state = LayoutState(node_ids=(), positions=[])
    else:
        graph = build_similarity_graph(
            matrix,
            mode=settings.mode,
            metric=settings.metric,
            edge_threshold=settings.edge_threshold,
            mean_center=settings.mean_center,
            min_co_rated=settings.min_co_rated,
        )
        state = run_layout(graph, LayoutConfig.from_settings(settings))
        if args.edges:
            export_edges(graph, args.edges)

    if args.trace:
        export_energy_trace(state, args.trace)
    if args.output:
        export_layout(state, args.output)
    else:
        print_rows(LAYOUT_HEADER, layout_rows(state))
    return 0
