import argparse
import typing

from pydantic import BaseModel, ConfigDict, Field

from common.settings import Settings, load_settings


class Route(BaseModel):
    name: str = Field(...)
    summary: str = Field(...)
    arguments: typing.Tuple[typing.Tuple[tuple, dict], ...] = Field(default=())
    handler: typing.Callable[[argparse.Namespace], int] = Field(...)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class Router:
    """Groups subcommands by concern; the app includes each router once."""

    def __init__(self, tags: typing.Sequence[str] = ()):
        self.tags = tuple(tags)
        self.routes: typing.List[Route] = []

    def command(self, name: str, summary: str, arguments: typing.Sequence = ()):
        def decorator(handler):
            self.routes.append(
                Route(name=name, summary=summary, arguments=tuple(arguments), handler=handler)
            )
            return handler

        return decorator


def option(*flags, **kwargs) -> typing.Tuple[tuple, dict]:
    return flags, kwargs


def common_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=None, help="random seed (default from config, else 0)")
    parser.add_argument("--config", default=None, help="key=value configuration file")
    parser.add_argument("--output", default=None, help="output path (default: standard output)")
    parser.add_argument("--debug", action="store_true", default=None, help="debug logging")
    return parser


def settings_from_args(args: argparse.Namespace, **overrides) -> Settings:
    """Flags beat the config file, which beats KCF_ environment variables."""
    return load_settings(args.config, seed=args.seed, debug=args.debug, **overrides)
