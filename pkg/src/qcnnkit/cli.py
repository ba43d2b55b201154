"""Command-line client for the experiment service.

The CLI never runs experiments itself: it builds a config mapping from the
config file and flag overrides, posts it to the HTTP API, and renders the
response.  By default the service runs in-process; --server targets a
remote instance instead (artifacts are then written on the server side).

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 gradcheck
bound failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import httpx

from .config import read_config_file
from .errors import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_GRADCHECK = 3

_ENDPOINTS = {
    "prepare": "/experiments/prepare",
    "train": "/experiments/train",
    "compare": "/experiments/compare",
    "gradcheck": "/diagnostics/gradcheck",
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract reserves 2
    # for data problems, so usage errors must exit 1 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcnnkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("prepare", "materialize feature caches for a task"),
        ("train", "train one model and write results.csv"),
        ("compare", "train standard vs uploading models on shared splits"),
        ("gradcheck", "validate the SPSB estimator against finite differences"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="key=value config file or a manifest.json")
        cmd.add_argument("--seed", type=int, help="override the run seed")
        cmd.add_argument("--out", help="override the output directory")
        cmd.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override any config key (repeatable)",
        )
        cmd.add_argument("--server", help="use a remote service instead of in-process")
    return parser


def _build_payload(args) -> dict:
    mapping: dict[str, object] = {}
    if args.config:
        mapping.update(read_config_file(args.config))
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        mapping[key.strip()] = value.strip()
    payload: dict[str, object] = {"config": mapping}
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.out is not None:
        payload["out_dir"] = args.out
    return payload


def _open_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # the in-process transport import may warn about the installed
    # starlette/httpx pairing; that is noise for CLI users
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _print_rows(rows) -> None:
    for row in rows:
        uploading = "true" if row["uploading"] else "false"
        values = " ".join(f"{v:.4f}" for v in row["values"])
        line = f"layers={row['layers']} uploading={uploading} {row['metric']}: {values}"
        if row.get("delta") is not None:
            line += f" (delta {row['delta']:+.4f})"
        print(line)


def _render(command: str, body: dict) -> int:
    if command == "prepare":
        print(
            f"prepared {body['train_rows']} train / {body['test_rows']} test rows "
            f"({body['num_components']} components, source {body['data_source']})"
        )
        print(f"train cache: {body['train_cache']}")
        print(f"test cache:  {body['test_cache']}")
        print(f"summary:     {body['summary']}")
        return EXIT_OK
    if command in ("train", "compare"):
        _print_rows(body["rows"])
        print(f"results: {body['results_csv']}")
        print(f"manifest: {body['manifest']}")
        return EXIT_OK
    # gradcheck
    verdict = "PASS" if body["passed"] else "FAIL"
    print(
        f"spsb vs finite-difference: relative error {body['relative_error']:.4f} "
        f"(bound {body['bound']:.2f}, {body['draws']} draws) {verdict}"
    )
    variances = body["gradient_variances"]
    print(
        f"gradient variance probe over {len(variances)} parameters: "
        f"min {min(variances):.3e} max {max(variances):.3e}"
    )
    return EXIT_OK if body["passed"] else EXIT_GRADCHECK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        payload = _build_payload(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        with _open_client(args.server) as client:
            response = client.post(_ENDPOINTS[args.command], json=payload)
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if response.status_code == 200:
        return _render(args.command, response.json())
    if response.status_code == 400:
        body = response.json()
        kind = body.get("kind", "config")
        print(f"{kind} error: {body.get('message', '')}", file=sys.stderr)
        return EXIT_DATA if kind == "data" else EXIT_CONFIG
    if response.status_code == 422:
        print(f"config error: invalid request: {response.text}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"error: service returned {response.status_code}: {response.text}", file=sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
