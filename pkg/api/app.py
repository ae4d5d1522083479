import argparse
import logging
import sys
import typing

from api.diagnose_route import diagnose_router
from api.evaluate_route import evaluate_router
from api.ingest_route import ingest_router
from api.layout_route import layout_router
from api.predict_route import predict_router
from api.router import Router, common_options, settings_from_args
from common.errors import KernelCFError
from common.log import configure_logging


logger = logging.getLogger(__name__)


class App:
    def __init__(self, prog: str, description: str):
        self.parser = argparse.ArgumentParser(prog=prog, description=description)
        self.commands = self.parser.add_subparsers(dest="command", metavar="command", required=True)
        self.common = common_options()

    def include_router(self, router: Router) -> None:
        for route in router.routes:
            command = self.commands.add_parser(
                route.name, help=route.summary, description=route.summary, parents=[self.common]
            )
            for flags, kwargs in route.arguments:
                command.add_argument(*flags, **kwargs)
            command.set_defaults(handler=route.handler)

    def parse_args(self, argv=None) -> argparse.Namespace:
        return self.parser.parse_args(argv)


def create_app() -> App:
    app = App(
        prog="kernel-cf",
        description="Collaborative filtering as kernel regression over a force-directed layout",
    )

    app.include_router(ingest_router)
    app.include_router(layout_router)
    app.include_router(predict_router)
    app.include_router(evaluate_router)
    app.include_router(diagnose_router)

    return app


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    app = create_app()
    try:
        args = app.parse_args(argv)
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 2

    configure_logging(bool(args.debug))
    try:
        # the config file and KCF_DEBUG may switch debug on as well
        configure_logging(settings_from_args(args).debug)
        return int(args.handler(args) or 0)
    except KernelCFError as e:
        print(f"kernel-cf: error: {e.message.splitlines()[0]}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
