"""Batch command-line entry point.

Commands: make-weights, gen-maze, render, forward, feature-maps,
saliency, cluster, serve. Every command is reproducible from its flags
alone. Exit codes: 0 success, 1 usage error, 2 data/format error.
A --config file of key=value lines mirrors any flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import images, maze
from .analysis import (
    action_distribution_map,
    agglomerative,
    canonical_json_bytes,
    flatten_activations,
    kmeans,
    parse_target,
    saliency_for,
)
from .errors import ParameterError, WorkbenchError
from .nn import NetworkSpec, forward_with_capture, init_random_weights, load_weights, save_weights
from .service import DEFAULT_HOST, DEFAULT_PORT, run_server


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _read_config(path: str) -> list[str]:
    """key=value lines become leading flags (later explicit flags win)."""
    args: list[str] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParameterError(f"bad config line {raw!r}, expected key=value")
        args += [f"--{key.strip()}", value.strip().strip('"')]
    return args


def _build_parser() -> _Parser:
    parser = _Parser(prog="mazelens")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--config", help="key=value file mirroring the flags")
        return p

    p = add("make-weights", help="write a random IMPW weight file for testing")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("gen-maze", help="generate a maze text file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=15)
    p.add_argument("--out", required=True)

    p = add("render", help="render a maze to PNG")
    p.add_argument("--maze", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=int, default=1, help="nearest-neighbor upscale")

    p = add("forward", help="run the policy on a maze, write a trace summary")
    p.add_argument("--weights", required=True)
    p.add_argument("--maze", required=True)
    p.add_argument("--capture", default="", help="comma-separated layer names")
    p.add_argument("--out", help="JSON output path (stdout when omitted)")

    p = add("feature-maps", help="write one PNG per channel of a layer")
    p.add_argument("--weights", required=True)
    p.add_argument("--maze", required=True)
    p.add_argument("--layer", default="block1.conv")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--cmap-low", default="#7B3294", help="low end color")
    p.add_argument("--cmap-high", default="#008837", help="high end color")

    p = add("saliency", help="write a saliency heatmap over the observation")
    p.add_argument("--weights", required=True)
    p.add_argument("--maze", required=True)
    p.add_argument("--target", required=True, help="logit:K or group:NAME")
    p.add_argument("--reduction", default="l2", choices=("l2", "sum"))
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=int, default=1)

    p = add("cluster", help="cluster a layer's pixel distribution")
    p.add_argument("--weights", required=True)
    p.add_argument("--maze", required=True)
    p.add_argument("--layer", default="block1.conv")
    p.add_argument("--method", default="kmeans", choices=("kmeans", "agglomerative"))
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--standardize", action="store_true",
                   help="z-score channels before distances (raw by default)")
    p.add_argument("--out", required=True)

    p = add("serve", help="start the HTTP workbench service")
    p.add_argument("--host", default=DEFAULT_HOST)
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--weights", help="IMPW file; random seed-0 weights when omitted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--store", help="session storage directory")
    p.add_argument("--ui", help="frontend directory to serve at / (index.html + dist)")
    return parser


def _parse_color(text: str) -> tuple[int, int, int]:
    t = text.lstrip("#")
    if len(t) != 6:
        raise ParameterError(f"bad color {text!r}, expected #RRGGBB")
    return tuple(int(t[i : i + 2], 16) for i in (0, 2, 4))


def _load_inputs(args):
    spec = NetworkSpec()
    weights = load_weights(args.weights, spec)
    grid = maze.from_text(Path(args.maze).read_text())
    return spec, weights, grid


def _cmd_make_weights(args) -> int:
    spec = NetworkSpec()
    save_weights(init_random_weights(spec, args.seed), args.out)
    return 0


def _cmd_gen_maze(args) -> int:
    grid = maze.generate_kruskal(args.seed, args.size)
    Path(args.out).write_text(maze.to_text(grid))
    return 0


def _cmd_render(args) -> int:
    grid = maze.from_text(Path(args.maze).read_text())
    rgb = maze.upscale_display(maze.render_rgb(grid), args.scale)
    images.save_png(rgb, args.out)
    return 0


def _cmd_forward(args) -> int:
    spec, weights, grid = _load_inputs(args)
    capture = {c for c in args.capture.split(",") if c}
    trace = forward_with_capture(spec, weights, maze.render_observation(grid), capture)
    summary = {
        "logits": [float(v) for v in trace.logits],
        "value": trace.value,
        "actions": action_distribution_map(trace.logits),
        "captured": {name: list(t.shape) for name, t in sorted(trace.layers.items())},
    }
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_feature_maps(args) -> int:
    spec, weights, grid = _load_inputs(args)
    trace = forward_with_capture(
        spec, weights, maze.render_observation(grid), {args.layer}
    )
    tensor = trace.layer(args.layer)
    if tensor.ndim != 3:
        raise ParameterError(f"layer {args.layer!r} is not spatial")
    low, high = _parse_color(args.cmap_low), _parse_color(args.cmap_high)
    out_dir = Path(args.out_dir)
    safe = args.layer.replace(".", "_")
    for ch in range(tensor.shape[0]):
        rgb = images.diverging_colormap(tensor[ch], low=low, high=high)
        rgb = maze.upscale_display(rgb, args.scale)
        images.save_png(rgb, out_dir / f"{safe}.ch{ch:03d}.png")
    return 0


def _cmd_saliency(args) -> int:
    spec, weights, grid = _load_inputs(args)
    trace = forward_with_capture(spec, weights, maze.render_observation(grid))
    sal = saliency_for(trace, parse_target(args.target), reduction=args.reduction)
    overlay = images.heat_overlay(maze.render_rgb(grid), sal.values)
    images.save_png(maze.upscale_display(overlay, args.scale), args.out)
    return 0


def _cmd_cluster(args) -> int:
    spec, weights, grid = _load_inputs(args)
    trace = forward_with_capture(
        spec, weights, maze.render_observation(grid), {args.layer}
    )
    dataset = flatten_activations(trace, args.layer)
    if args.method == "kmeans":
        result = kmeans(dataset, args.k, seed=args.seed, standardize=args.standardize)
    else:
        result = agglomerative(
            dataset, threshold=args.threshold, count=args.count,
            standardize=args.standardize,
        )
    Path(args.out).write_bytes(canonical_json_bytes(result))
    return 0


def _cmd_serve(args) -> int:
    run_server(
        host=args.host,
        port=args.port,
        weights_path=args.weights,
        seed=args.seed,
        store_root=args.store,
        ui_dir=args.ui,
    )
    return 0


_COMMANDS = {
    "make-weights": _cmd_make_weights,
    "gen-maze": _cmd_gen_maze,
    "render": _cmd_render,
    "forward": _cmd_forward,
    "feature-maps": _cmd_feature_maps,
    "saliency": _cmd_saliency,
    "cluster": _cmd_cluster,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        # a --config file contributes defaults; re-parse with it in front
        probe, _ = parser.parse_known_args(argv)
        if getattr(probe, "config", None):
            prefix = _read_config(probe.config)
            argv = [argv[0]] + prefix + argv[1:]
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except (WorkbenchError, OSError) as exc:
        sys.stderr.write(f"mazelens: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
