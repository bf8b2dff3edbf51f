"""Command line driver.

parse   turn a stored raw model output into diagram/JSON artifacts
corpus  regression-run the parser over a directory of stored outputs
serve   load a provider registry and run the HTTP service

Exit codes: 0 success, 1 parse failure (no elements or error diagnostics,
bind failure for serve), 2 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import socket
import sys
from pathlib import Path

from .analysis import analyze_and_highlight
from .errors import (
    DuplicateProviderIdError,
    InvalidConfigError,
    MalformedConfigError,
    NoElementsError,
)
from .mermaid import VisualizationConfig, emit
from .model import ReasoningMethod, Severity, trace_to_json
from .parsing import RawModelOutput, parse
from .providers import CONFIG_ENV_VAR, default_registry, load_registry
from .service import DEFAULT_PORT

METHOD_NAMES = [m.value for m in ReasoningMethod]
STATIC_ENV_VAR = "REASONGRAPH_STATIC"


def _print_diagnostics(diags) -> None:
    for d in diags:
        print(f"{d.severity.value}[{d.code}]: {d.message}", file=sys.stderr)


def _viz_from_args(args) -> VisualizationConfig:
    return VisualizationConfig(
        direction=args.direction,
        wrap_width=args.wrap_width,
        show_scores=not args.no_scores,
        max_label_chars=args.max_label_chars,
    )


def _cmd_parse(args) -> int:
    path = Path(args.infile)
    if not path.is_file():
        print(f"error: cannot read {path}", file=sys.stderr)
        return 2
    config = _viz_from_args(args)
    try:
        config.validate()
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    text = path.read_text("utf-8", errors="replace")
    method = ReasoningMethod(args.method)
    try:
        trace, diagnostics = parse(RawModelOutput(text, method))
    except NoElementsError as exc:
        _print_diagnostics(exc.diagnostics)
        print(f"error[no_elements]: {exc}", file=sys.stderr)
        return 1

    trace, _ = analyze_and_highlight(trace, diagnostics)
    _print_diagnostics(diagnostics)

    base = Path(args.out) if args.out else path.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    if args.emit in ("mermaid", "both"):
        target = base.with_suffix(".mmd")
        target.write_text(emit(trace, config).text, "utf-8")
        print(f"wrote {target}", file=sys.stderr)
    if args.emit in ("json", "both"):
        target = base.with_suffix(".json")
        target.write_text(trace_to_json(trace) + "\n", "utf-8")
        print(f"wrote {target}", file=sys.stderr)
    if any(d.severity is Severity.ERROR for d in diagnostics):
        return 1
    return 0


def _cmd_corpus(args) -> int:
    root = Path(args.dir)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return 2

    total = failed_total = 0
    for method in ReasoningMethod:
        subdir = root / method.value
        files = sorted(subdir.glob("*.txt")) if subdir.is_dir() else []
        clean = warned = failed = 0
        for file in files:
            text = file.read_text("utf-8", errors="replace")
            try:
                _, diagnostics = parse(RawModelOutput(text, method))
            except NoElementsError:
                failed += 1
                continue
            if any(d.severity is Severity.ERROR for d in diagnostics):
                failed += 1
            elif diagnostics:
                warned += 1
            else:
                clean += 1
        total += len(files)
        failed_total += failed
        print(
            f"{method.value}: total={len(files)} clean={clean} "
            f"warnings={warned} failed={failed}"
        )
    rate = 100.0 * (total - failed_total) / total if total else 100.0
    print(f"overall: total={total} failed={failed_total} parse_rate={rate:.1f}%")
    return 0 if failed_total == 0 else 1


def _resolve_static(args) -> str | None:
    if args.static:
        return args.static
    from_env = os.environ.get(STATIC_ENV_VAR)
    if from_env:
        return from_env
    bundled = Path("frontend/dist")
    return str(bundled) if bundled.is_dir() else None


def _cmd_serve(args) -> int:
    config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
    try:
        registry = load_registry(config_path) if config_path else default_registry()
    except (MalformedConfigError, DuplicateProviderIdError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1

    import uvicorn

    from .service import create_app

    logging.basicConfig(level=logging.INFO, stream=sys.stdout, format="%(message)s")
    for diag in registry.warnings:
        print(f"{diag.severity.value}[{diag.code}]: {diag.message}", file=sys.stderr)
    app = create_app(registry, _resolve_static(args))
    print(f"serving on http://{args.host}:{args.port}", flush=True)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except SystemExit as exc:
        return int(exc.code or 1)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reasongraph",
        description="Parse tagged reasoning output, render diagrams, run the service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a stored raw model output file")
    p.add_argument("--method", required=True, choices=METHOD_NAMES)
    p.add_argument("--in", dest="infile", required=True, metavar="FILE")
    p.add_argument("--emit", choices=["mermaid", "json", "both"], default="mermaid")
    p.add_argument("--out", metavar="PATH", help="artifact base path (default: input path)")
    p.add_argument("--direction", choices=["top_down", "left_right"], default="top_down")
    p.add_argument("--wrap-width", type=int, default=30)
    p.add_argument("--no-scores", action="store_true")
    p.add_argument("--max-label-chars", type=int, default=240)
    p.set_defaults(func=_cmd_parse)

    c = sub.add_parser("corpus", help="parse every <method>/<name>.txt under a directory")
    c.add_argument("--dir", required=True, metavar="DIR")
    c.set_defaults(func=_cmd_corpus)

    s = sub.add_parser("serve", help="run the HTTP service")
    s.add_argument("--port", type=int, default=DEFAULT_PORT)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--config", metavar="PATH", help=f"provider config (default: ${CONFIG_ENV_VAR})")
    s.add_argument("--static", metavar="DIR", help="static UI assets to serve at /")
    s.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
