from api.router import Router, option, settings_from_args
from services.bandwidth_service import write_diagnostics
from services.pipeline_service import fit_kernel_cf
from services.ratings_service import load_ratings


diagnose_router = Router(tags=["diagnostics"])


@diagnose_router.command(
    "diagnose",
    summary="Fit Kernel-CF and dump the bandwidth functionals, noise variance and fallback flags",
    arguments=[
        option("--ratings", required=True, help="user,item,rating file"),
        option("--mode", choices=["user", "item"], default=None),
        option("--kernel", choices=["epanechnikov", "gaussian", "uniform"], default=None),
        option("--surface-degree", dest="surface_degree", type=int, default=None),
    ],
)
def diagnose(args) -> int:
    settings = settings_from_args(
        args, mode=args.mode, kernel=args.kernel, surface_degree=args.surface_degree
    )
    model = fit_kernel_cf(load_ratings(args.ratings, settings.delimiter), settings)

    write_diagnostics(
        model.bandwidth,
        args.output,
        extra={
            "mode": model.graph.mode,
            "nodes": model.graph.n_nodes,
            "edges": model.graph.n_edges,
            "isolated": model.graph.isolated,
            "layout_iterations": model.layout.iteration,
            "layout_converged": model.layout.converged,
        },
    )
    return 0
