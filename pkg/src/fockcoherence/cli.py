"""Command-line front end: figure data as CSV, measures and optimizer runs as JSON."""

from __future__ import annotations

import io
import json
import math
import re
import sys
from dataclasses import dataclass

import click
import numpy as np

from . import __version__
from .errors import CoherenceError, UsageError
from .fock import (
    DensityMatrix,
    NumberDistribution,
    PureFockState,
    TwoModePureState,
    mean_n,
    number_distribution,
    second_moment,
)
from .gaussian import covariance_matrix, det_gamma
from .measures import (
    entropy_error_bar,
    g2_zero,
    l1_coherence,
    max_rel_ent_coherence_multimode,
    rel_ent_coherence,
)
from .optimize import (
    maximize_entropy_mean_constraint,
    maximize_l1_mean_constraint,
    maximize_l1_two_moment_constraint,
)
from .states import (
    TruncationPolicy,
    coherent,
    multimode_max_coherent,
    pstd,
    squeezed,
    squeezed_vacuum_state,
    thermal,
    tmsv,
    tmsv_through_bs,
    two_mode_coherent,
)

DEFAULT_GRID = (0.05, 5.0, 0.05)


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-12
    log_base: str = "natural"
    nbar_grid: tuple = DEFAULT_GRID
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if not self.tol > 0:
            raise UsageError(f"--tol must be positive, got {self.tol}")
        start, stop, step = self.nbar_grid
        if start < 0 or step <= 0 or stop < start:
            raise UsageError(f"invalid grid {start}:{stop}:{step}")

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(self.tol)

    def grid(self) -> list:
        start, stop, step = self.nbar_grid
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]

    def comment(self) -> str:
        start, stop, step = self.nbar_grid
        return (f"# config: tol={self.tol:g}, log_base={self.log_base}, "
                f"grid={start:g}:{stop:g}:{step:g}, version={__version__}")


# -- state / problem specs ---------------------------------------------------

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")

STATE_KEYS = {
    "pstd": {"nbar", "phase"},
    "coherent": {"alpha"},
    "squeezed": {"alpha", "r", "phi", "nbar"},
    "thermal": {"nbar"},
    "tmsv": {"nbar", "nbar_t"},
    "tmsv_bs": {"nbar", "nbar_t"},
    "two_mode_coherent": {"alpha"},
    "multimode_max": {"d", "nbar", "nbar_t"},
}
PROBLEM_KEYS = {
    "entropy": {"nbar", "cutoff"},
    "l1": {"nbar", "cutoff"},
    "l1_two_moment": {"nbar", "m2", "cutoff"},
}


def parse_complex(text: str, position: int = 0) -> complex:
    """Parse ``re+imi`` style numbers: ``2``, ``-0.5``, ``1+1i``, ``2.5i``, ``1e-3-2i``."""
    s = text.strip()
    if not s:
        raise UsageError("empty number", position)
    if s.endswith("i"):
        body = s[:-1]
        split = max((m.start() for m in re.finditer(r"(?<![eE])[+-]", body) if m.start() > 0),
                    default=None)
        re_part, im_part = (body[:split], body[split:]) if split is not None else ("0", body)
        if im_part in ("", "+", "-"):
            im_part += "1"
        if not (_NUMBER.match(re_part) and _NUMBER.match(im_part)):
            raise UsageError(f"malformed complex number {text!r}", position)
        return complex(float(re_part), float(im_part))
    if not _NUMBER.match(s):
        raise UsageError(f"malformed number {text!r}", position)
    return complex(float(s), 0.0)


def parse_spec(spec: str, table: dict) -> tuple[str, dict]:
    """Split ``name:key=value[,key=value...]`` into a name and a raw value map."""
    name, sep, rest = spec.partition(":")
    name = name.strip()
    if name not in table:
        raise UsageError(f"unknown name {name!r}; expected one of {sorted(table)}", 0)
    params = {}
    offset = len(name) + len(sep)
    if rest.strip():
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            key = key.strip()
            if not eq:
                raise UsageError(f"expected key=value, got {item!r}", offset)
            if key not in table[name]:
                raise UsageError(f"unknown key {key!r} for {name}", offset)
            if key in params:
                raise UsageError(f"duplicate key {key!r}", offset)
            params[key] = (value, offset + len(item) - len(value))
            offset += len(item) + 1
    return name, params


def _real(params, key, default=None):
    if key not in params:
        if default is None:
            raise UsageError(f"missing required key {key!r}")
        return default
    text, pos = params[key]
    value = parse_complex(text, pos)
    if value.imag:
        raise UsageError(f"{key} must be real, got {text!r}", pos)
    return value.real


def _complex(params, key, default=None):
    if key not in params:
        if default is None:
            raise UsageError(f"missing required key {key!r}")
        return default
    text, pos = params[key]
    return parse_complex(text, pos)


def _int(params, key):
    value = _real(params, key)
    if value != int(value):
        raise UsageError(f"{key} must be an integer, got {params[key][0]!r}", params[key][1])
    return int(value)


def _nbar_t(params):
    return _real(params, "nbar_t") if "nbar_t" in params else _real(params, "nbar")


def build_state(spec: str, policy: TruncationPolicy):
    name, p = parse_spec(spec, STATE_KEYS)
    if name == "pstd":
        return pstd(_real(p, "nbar"), _real(p, "phase", 0.0), policy)
    if name == "coherent":
        return coherent(_complex(p, "alpha"), policy)
    if name == "squeezed":
        if "r" in p and "nbar" in p:
            raise UsageError("give either r or nbar for squeezed, not both")
        r = _real(p, "r") if "r" in p else math.asinh(math.sqrt(_real(p, "nbar")))
        alpha = _complex(p, "alpha", 0j)
        phi = _real(p, "phi", 0.0)
        if alpha == 0:
            return squeezed_vacuum_state(r, phi, policy)
        return squeezed(alpha, r, phi, policy)
    if name == "thermal":
        return thermal(_real(p, "nbar"), policy)
    if name == "tmsv":
        return tmsv(_nbar_t(p), policy)
    if name == "tmsv_bs":
        return tmsv_through_bs(_nbar_t(p), policy)
    if name == "two_mode_coherent":
        return two_mode_coherent(_complex(p, "alpha"), policy)
    return multimode_max_coherent(_int(p, "d"), _nbar_t(p), policy)


def measure_report(spec: str, config: RunConfig, g2: bool = False) -> dict:
    state = build_state(spec, config.policy)
    dist = number_distribution(state)
    report = {
        "state": spec,
        "log_base": config.log_base,
        "tol": config.tol,
        "cutoff": int(dist.cutoff) if dist.support is None else int(state.total_cutoff),
        "tail_bound": float(dist.tail_bound),
        "rel_ent_coherence": rel_ent_coherence(state, config.log_base),
        "entropy_error_bar": entropy_error_bar(dist.tail_bound, config.log_base),
        "l1_coherence": l1_coherence(state),
        "mean_n": mean_n(dist),
        "second_moment": second_moment(dist),
    }
    if isinstance(state, PureFockState):
        report["det_gamma"] = det_gamma(covariance_matrix(state))
    if g2:
        if isinstance(state, TwoModePureState) or dist.degeneracy is not None:
            raise UsageError("--g2 applies to single-mode states only")
        report["g2"] = g2_zero(state if isinstance(state, PureFockState) else dist)
    return report


def optimize_report(spec: str, config: RunConfig) -> dict:
    name, p = parse_spec(spec, PROBLEM_KEYS)
    nbar, cutoff = _real(p, "nbar"), _int(p, "cutoff")
    if name == "entropy":
        result = maximize_entropy_mean_constraint(nbar, cutoff)
    elif name == "l1":
        result = maximize_l1_mean_constraint(nbar, cutoff)
    else:
        result = maximize_l1_two_moment_constraint(nbar, _real(p, "m2"), cutoff)
    out = {"problem": spec, "log_base": "natural" if name == "entropy" else None}
    out.update(result.to_dict())
    return out


# -- figure tables -------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.11e}"


def fig1a_table(nbar: float, config: RunConfig):
    policy = config.policy
    cols = [
        number_distribution(pstd(nbar, policy=policy)).probs,
        number_distribution(coherent(math.sqrt(nbar), policy)).probs,
        squeezed(0, math.asinh(math.sqrt(nbar)), 0.0, policy).probs,
    ]
    size = max(c.size for c in cols)
    padded = [np.pad(c, (0, size - c.size)) for c in cols]
    rows = [[n] + [c[n] for c in padded] for n in range(size)]
    return ["n", "p_pstd", "p_coherent", "p_squeezed_vacuum"], rows


def fig1b_table(config: RunConfig):
    policy, base = config.policy, config.log_base
    rows = []
    for nbar in config.grid():
        rows.append([
            nbar,
            rel_ent_coherence(pstd(nbar, policy=policy), base),
            rel_ent_coherence(coherent(math.sqrt(nbar), policy), base),
            rel_ent_coherence(squeezed(0, math.asinh(math.sqrt(nbar)), 0.0, policy), base),
            base,
        ])
    return ["nbar", "c_pstd", "c_coherent", "c_squeezed_vacuum", "log_base"], rows


def fig1c_table(config: RunConfig):
    policy = config.policy
    rows = []
    for nbar in config.grid():
        rows.append([
            nbar,
            det_gamma(covariance_matrix(pstd(nbar, policy=policy))),
            det_gamma(covariance_matrix(coherent(math.sqrt(nbar), policy))),
            det_gamma(covariance_matrix(squeezed_vacuum_state(math.asinh(math.sqrt(nbar)), 0.0, policy))),
        ])
    return ["nbar", "det_pstd", "det_coherent", "det_squeezed_vacuum"], rows


def fig2a_table(config: RunConfig, d_max: int = 5):
    if d_max < 1:
        raise UsageError(f"--d-max must be >= 1, got {d_max}")
    rows = [[nbar] + [max_rel_ent_coherence_multimode(d, nbar, config.log_base)
                      for d in range(1, d_max + 1)]
            for nbar in config.grid()]
    return ["nbar_t"] + [f"c_d{d}" for d in range(1, d_max + 1)], rows


def fig2b_table(config: RunConfig):
    policy, base = config.policy, config.log_base
    rows = []
    for nbar in config.grid():
        rows.append([
            nbar,
            max_rel_ent_coherence_multimode(2, nbar, base),
            rel_ent_coherence(two_mode_coherent(math.sqrt(nbar / 2.0), policy), base),
            rel_ent_coherence(tmsv(nbar, policy), base),
            rel_ent_coherence(tmsv_through_bs(nbar, policy), base),
        ])
    return ["nbar_t", "c_max2", "c_two_mode_coherent", "c_tmsv", "c_tmsv_bs"], rows


def render_table(header, rows, config: RunConfig) -> str:
    if config.format == "json":
        payload = {
            "tol": config.tol,
            "log_base": config.log_base,
            "version": __version__,
            "columns": header,
            "rows": [[x if isinstance(x, str) else (int(x) if isinstance(x, (int, np.integer)) else float(x))
                      for x in row] for row in rows],
        }
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    buf.write(config.comment() + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _emit(text: str, config: RunConfig):
    if config.output_path in (None, "-"):
        click.echo(text, nl=False)
        return
    try:
        with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise click.ClickException(f"io-error: cannot write {config.output_path}: {exc}") from exc


# -- click wiring --------------------------------------------------------------


def _parse_grid(ctx, param, value):
    if value is None:
        return DEFAULT_GRID
    parts = value.split(":")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise click.BadParameter("expected start:stop:step") from None
    return start, stop, step


def common_options(fn):
    fn = click.option("--tol", type=float, default=1e-12, show_default=True,
                      help="Maximum truncated tail probability.")(fn)
    fn = click.option("--log-base", type=click.Choice(["natural", "two"]), default="natural",
                      show_default=True)(fn)
    fn = click.option("--out", "output_path", type=str, default=None,
                      help="Output file (stdout if omitted).")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
                      help="Output format (csv for figures, json for reports).")(fn)
    fn = click.option("--grid", callback=_parse_grid, default=None,
                      help="Mean photon number grid start:stop:step [0.05:5:0.05].")(fn)
    return fn


def _config(tol, log_base, output_path, fmt, grid, default_fmt="csv"):
    try:
        return RunConfig(tol, log_base, grid, output_path, fmt or default_fmt)
    except UsageError as exc:
        raise click.UsageError(str(exc)) from exc


def _run(fn, *args):
    try:
        return fn(*args)
    except UsageError as exc:
        raise click.UsageError(str(exc)) from exc
    except CoherenceError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc


@click.group()
@click.version_option(__version__)
def main():
    """Coherence of bosonic states in truncated Fock space."""


@main.command()
@common_options
@click.option("--nbar", type=float, default=1.0, show_default=True)
def fig1a(tol, log_base, output_path, fmt, grid, nbar):
    """Photon-number distributions of PSTD, coherent and squeezed vacuum states."""
    config = _config(tol, log_base, output_path, fmt, grid)
    _emit(render_table(*_run(fig1a_table, nbar, config), config), config)


@main.command()
@common_options
def fig1b(tol, log_base, output_path, fmt, grid):
    """Relative entropy of coherence against mean photon number."""
    config = _config(tol, log_base, output_path, fmt, grid)
    _emit(render_table(*_run(fig1b_table, config), config), config)


@main.command()
@common_options
def fig1c(tol, log_base, output_path, fmt, grid):
    """Covariance-matrix determinants against mean photon number."""
    config = _config(tol, log_base, output_path, fmt, grid)
    _emit(render_table(*_run(fig1c_table, config), config), config)


@main.command()
@common_options
@click.option("--d-max", type=int, default=5, show_default=True)
def fig2a(tol, log_base, output_path, fmt, grid, d_max):
    """Maximal relative entropy of coherence for 1..d_max modes."""
    config = _config(tol, log_base, output_path, fmt, grid)
    _emit(render_table(*_run(fig2a_table, config, d_max), config), config)


@main.command()
@common_options
def fig2b(tol, log_base, output_path, fmt, grid):
    """Two-mode states: maximal, coherent, TMSV and TMSV after a 50:50 beam splitter."""
    config = _config(tol, log_base, output_path, fmt, grid)
    _emit(render_table(*_run(fig2b_table, config), config), config)


@main.command()
@common_options
@click.argument("state_spec")
@click.option("--g2", is_flag=True, help="Also report g2(0).")
def measure(tol, log_base, output_path, fmt, grid, state_spec, g2):
    """Coherence measures of a state given as name:key=value,..."""
    config = _config(tol, log_base, output_path, fmt, grid, "json")
    report = _run(measure_report, state_spec, config, g2)
    _emit(json.dumps(report, indent=2) + "\n", config)


@main.command()
@common_options
@click.argument("problem_spec")
def optimize(tol, log_base, output_path, fmt, grid, problem_spec):
    """Run an optimizer: entropy|l1|l1_two_moment:nbar=..,cutoff=..[,m2=..]."""
    config = _config(tol, log_base, output_path, fmt, grid, "json")
    report = _run(optimize_report, problem_spec, config)
    _emit(json.dumps(report, indent=2) + "\n", config)


if __name__ == "__main__":
    sys.exit(main())
