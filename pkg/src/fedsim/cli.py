"""Command-line interface.

`fedsim run` executes an experiment from a JSON config and writes the
report artifacts.  By default the experiment runs in-process; with
`--server` the CLI becomes a thin client that posts the config to a
running fedsim service and writes the same artifact files from the
response.  `fedsim serve` starts that service.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

import httpx

from .config import ExperimentConfig, load_config
from .errors import ConfigError, FedsimError
from .reporting import summary_table, write_outputs
from .runner import run_experiment

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    defaults = json.dumps(ExperimentConfig().model_dump(mode="json"), indent=2)
    parser = argparse.ArgumentParser(
        prog="fedsim",
        description="Deterministic federated-learning simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser(
        "run",
        help="run an experiment from a JSON config",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="config defaults (missing keys take these values):\n" + defaults,
    )
    run_parser.add_argument("--config", required=True, help="path to the JSON config file")
    run_parser.add_argument(
        "--out", default="fedsim_out", help="output directory (default: %(default)s)"
    )
    run_parser.add_argument(
        "--plot", action="store_true", help="also write roc.svg with the ROC curve family"
    )
    run_parser.add_argument(
        "--seed", type=int, default=None, help="override the config's seed (unsigned 64-bit)"
    )
    run_parser.add_argument(
        "--server",
        default=None,
        help="base URL of a fedsim service; the run executes there instead of in-process",
    )

    serve_parser = sub.add_parser("serve", help="start the HTTP service")
    serve_parser.add_argument("--host", default="127.0.0.1")
    serve_parser.add_argument("--port", type=int, default=8000)
    return parser


def _run_remote(config: ExperimentConfig, base_url: str) -> dict[str, Any]:
    url = base_url.rstrip("/") + "/experiments"
    response = httpx.post(url, json=config.model_dump(mode="json"), timeout=600.0)
    if response.status_code in (400, 422):
        raise ConfigError(f"server rejected config: {response.text}")
    if response.status_code != 200:
        raise FedsimError(f"server error {response.status_code}: {response.text}")
    return response.json()


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
        config = ExperimentConfig.model_validate(config.model_dump())
    if args.server:
        bundle = _run_remote(config, args.server)
    else:
        bundle = run_experiment(config)
    written = write_outputs(bundle, args.out, plot=args.plot)
    for path in written:
        print(f"wrote {path}")
    if len(bundle["results"]) > 1:
        print()
        print(summary_table(bundle))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("fedsim.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_serve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except FedsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    except httpx.HTTPError as exc:
        print(f"error: cannot reach server: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
