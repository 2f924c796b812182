"""Command-line driver: ``python -m petalflow <command> --gen <spec> ...``.

Exit codes: 0 on success, 2 on invalid input, 3 on numerical failure
(including ``alpha`` below the admissible bound).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

from .errors import AlphaTooSmall, PetalflowError, UnsupportedRegime
from .flow import trajectory
from .generators import boundary_null_points, classify, example_generator, generator_from_json
from .petals import build_flower, solve_petal, Flower
from .render import RenderSpec, render_phase_portrait

COMMANDS = ("classify", "flow", "petal", "flower", "render", "verify")
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    """Invalid command-line configuration."""


@dataclass
class CliConfig:
    """Validated command-line configuration."""

    command: str
    gen: str | None = None
    eta: float | None = None
    alpha: float | None = None
    svg: str | None = None
    json: str | None = None
    csv: str | None = None
    grid: int = 24
    size: int = 800
    tmin: float = 0.0
    tmax: float = 5.0
    z0: complex | None = None
    samples: int = 201
    no_flower: bool = False
    criteria: list = field(default_factory=list)

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command != "verify" and not self.gen:
            raise ConfigError(f"{self.command} requires --gen")
        if self.command == "petal" and (self.eta is None or self.alpha is None):
            raise ConfigError("petal requires --eta and --alpha")
        if self.command == "flow":
            if self.z0 is None:
                raise ConfigError("flow requires --z0")
            if not abs(self.z0) < 1:
                raise ConfigError("--z0 must lie in the open unit disk")
            if not self.tmin <= 0 <= self.tmax:
                raise ConfigError("need --tmin <= 0 <= --tmax")
            if self.samples < 2:
                raise ConfigError("--samples must be at least 2")
        for name in ("eta", "alpha", "tmin", "tmax"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ConfigError(f"--{name} must be finite")
        RenderSpec(grid=self.grid, image_size=self.size)
        return self


def parse_generator(spec: str):
    """Built-in name (``example1:n=3``, ``example2``, ``example3``, ``identity``),
    inline JSON or a path to a JSON file."""
    s = spec.strip()
    if s.startswith("{"):
        try:
            obj = json.loads(s)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid generator JSON: {exc}") from None
        return generator_from_json(obj)
    if os.path.isfile(s):
        with open(s, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid generator JSON in {s}: {exc}") from None
        return generator_from_json(obj)
    name, _, rest = s.partition(":")
    n = None
    if rest:
        key, _, val = rest.partition("=")
        if key != "n" or not val:
            raise ConfigError(f"cannot parse generator options {rest!r}")
        try:
            n = int(val)
        except ValueError:
            raise ConfigError(f"n must be an integer, got {val!r}") from None
        if n < 1:
            raise ConfigError("n must be at least 1")
    try:
        return example_generator(name, n)
    except ValueError:
        raise ConfigError(f"unknown generator {spec!r}") from None


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="petalflow",
                                 description="Semigroups of holomorphic self-maps of the disk.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--gen", help="example1:n=3, example2, example3, identity, JSON or path")
    ap.add_argument("--eta", type=float, help="angle of the repelling point (radians)")
    ap.add_argument("--alpha", type=float, help="petal parameter alpha")
    ap.add_argument("--svg", help="write an SVG portrait here")
    ap.add_argument("--json", help="write JSON output here")
    ap.add_argument("--csv", help="write CSV output here")
    ap.add_argument("--grid", type=int, default=24, help="arrows per axis")
    ap.add_argument("--size", type=int, default=800, help="image size in pixels")
    ap.add_argument("--tmin", type=float, default=0.0)
    ap.add_argument("--tmax", type=float, default=5.0)
    ap.add_argument("--z0", type=_complex, help="initial point, e.g. 0.3+0.2j")
    ap.add_argument("--samples", type=int, default=201, help="trajectory samples")
    ap.add_argument("--no-flower", action="store_true", help="render the field only")
    ap.add_argument("--criteria", type=int, nargs="*", default=[],
                    help="subset of acceptance criteria for verify")
    return ap


def _write(path, data, mode="w"):
    with open(path, mode, **({} if "b" in mode else {"encoding": "utf-8"})) as fh:
        fh.write(data)


def _pick_eta(gen, angle):
    found = boundary_null_points(gen)
    if not found:
        raise ConfigError("the generator has no repelling boundary fixed points")
    best = min(found, key=lambda q: abs(math.remainder(q.angle - angle, 2 * math.pi)))
    if abs(math.remainder(best.angle - angle, 2 * math.pi)) > 1e-3:
        angles = ", ".join(f"{q.angle:.6f}" for q in found)
        raise ConfigError(f"no repelling point near angle {angle}; available: {angles}")
    return best


def _render(cfg, gen, flower):
    spec = RenderSpec(grid=cfg.grid, image_size=cfg.size)
    _write(cfg.svg, render_phase_portrait(gen, flower, spec), "wb")


def _execute(cfg: CliConfig, out) -> int:
    if cfg.command == "verify":
        from .verify import format_report, verify_suite
        report = verify_suite(criteria=cfg.criteria or None)
        print(format_report(report), file=out)
        if cfg.json:
            _write(cfg.json, json.dumps(report, indent=2, default=str) + "\n")
        failed = [e for e in report if not e["passed"] and not e["skipped"]]
        return EXIT_NUMERIC if failed else EXIT_OK
    gen = parse_generator(cfg.gen)
    if cfg.command == "classify":
        info = classify(gen)
        text = json.dumps(info.to_json())
        print(text, file=out)
        if cfg.json:
            _write(cfg.json, text + "\n")
        return EXIT_OK
    if cfg.command == "flow":
        tr = trajectory(gen, cfg.z0, cfg.tmin, cfg.tmax, cfg.samples)
        if cfg.csv:
            _write(cfg.csv, tr.to_csv())
        if cfg.json:
            _write(cfg.json, tr.to_jsonl())
        if not (cfg.csv or cfg.json):
            out.write(tr.to_jsonl())
        if tr.exit_time is not None:
            print(f"orbit leaves the disk at t={tr.exit_time!r}", file=sys.stderr)
        return EXIT_OK
    if cfg.command == "petal":
        q = _pick_eta(gen, cfg.eta)
        petal = solve_petal(gen, q, cfg.alpha)
        text = json.dumps(petal.to_json())
        if cfg.json:
            _write(cfg.json, text + "\n")
        else:
            print(text, file=out)
        if cfg.svg:
            _render(cfg, gen, Flower(gen, (petal,)))
        return EXIT_OK
    # flower and render
    flower = None
    if cfg.command == "flower" or not cfg.no_flower:
        if gen.beta.real > 0:
            flower = build_flower(gen)
        elif cfg.command == "flower":
            raise UnsupportedRegime("flowers need Re f'(tau) > 0")
    if cfg.command == "flower":
        text = json.dumps(flower.to_json())
        if cfg.json:
            _write(cfg.json, text + "\n")
        elif not cfg.svg:
            print(text, file=out)
        if cfg.svg:
            _render(cfg, gen, flower)
        return EXIT_OK
    if not cfg.svg:
        out.write(render_phase_portrait(gen, flower, RenderSpec(cfg.grid, cfg.size)).decode())
    else:
        _render(cfg, gen, flower)
    return EXIT_OK


def run_cli(argv=None, out=None) -> int:
    """Run one command and return its exit code."""
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    cfg = CliConfig(args.command, args.gen, args.eta, args.alpha, args.svg, args.json, args.csv,
                    args.grid, args.size, args.tmin, args.tmax, args.z0, args.samples,
                    args.no_flower, args.criteria)
    try:
        cfg.validate()
        return _execute(cfg, out)
    except AlphaTooSmall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, UnsupportedRegime, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PetalflowError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run_cli())
