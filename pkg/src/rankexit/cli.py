"""Command-line front end.

Subcommands::

    selftest    exact-oracle checks, one PASS/FAIL line each
    rankloss    I(X;Y), mixed-information bound on I(X;Z) and loss per channel SNR
    exit-var    variable-node EXIT curves (sum-product and rank-based)
    exit-check  check-node EXIT curves (sum-product and rank-based)
    exit-full   all four curves, check curves with swapped axes
    fit-dump    fit a post-processor at one channel SNR and write it out

Parameters come from flags, from a ``--config`` file of ``key=value`` lines,
or from the ``# key=value`` header of an earlier output (``--replay``).
Flags win over files. Exit status: 0 success, 1 configuration error,
2 runtime error (including a failed self-test).
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
import tempfile

from . import __version__
from .exitlab import (
    RANK,
    SUM_PRODUCT,
    CurveResult,
    SweepConfig,
    check_exit,
    rank_loss_sweep,
    var_exit_rank,
    var_exit_sumproduct,
)
from .galois import FieldSpec
from .rolemodel import accumulator, dumps
from .simspace import ChannelConfig, Modulation, run_chunked, snr_convert, transmit
from .messages import rank_retain

SUBCOMMANDS = ("selftest", "rankloss", "exit-var", "exit-check", "exit-full", "fit-dump")

# key: (flag, type, default). Keys double as config-file keys.
OPTIONS = {
    "field": ("--field", int, 6),
    "prim_poly": ("--prim-poly", str, None),
    "mod": ("--mod", str, "qam"),
    "snr": ("--snr", str, "0:2:20"),
    "ebn0": ("--ebn0", float, 8.5),
    "esn0": ("--esn0", float, None),
    "apriori_mod": ("--apriori-mod", str, "qam"),
    "samples": ("--samples", int, 100_000),
    "train_samples": ("--train-samples", int, None),
    "seed": ("--seed", int, 0),
    "train_seed": ("--train-seed", int, None),
    "model": ("--model", str, "rank_position"),
    "dv": ("--dv", int, 2),
    "dc": ("--dc", int, 4),
    "quant_levels": ("--quant-levels", int, None),
    "quant_range": ("--quant-range", float, None),
    "chunk_size": ("--chunk-size", int, 1 << 14),
    "eps": ("--eps", float, 1e-12),
}
# execution-only settings: never echoed, never change the numbers
RUNTIME_OPTIONS = {"workers": ("--workers", int, 1), "output": ("--output", str, "-")}

RANKLOSS_COLUMNS = ("snr_db", "i_xy", "i_xy_std", "i_xz_lower", "i_xz_std", "loss")
EXIT_COLUMNS = (
    "curve", "apriori_snr_db", "i_a", "i_a_std", "i_e", "i_e_std", "i_a_warped", "i_a_warped_std",
)


class ConfigError(Exception):
    pass


def _parse_range(item: str) -> tuple[float, ...]:
    parts = item.split(":")
    if len(parts) != 3:
        raise ValueError("range must look like start:step:stop")
    start, step, stop = (float(p) for p in parts)
    if not step > 0 or not all(map(math.isfinite, (start, stop))) or stop < start:
        raise ValueError("range needs finite start <= stop and a positive step")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + k * step, 12) for k in range(n))


def parse_grid(text: str) -> tuple[float, ...]:
    """Comma list of values and inclusive ``start:step:stop`` ranges; ``-inf``/``inf`` allowed."""
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        values.extend(_parse_range(item) if ":" in item else (float(item),))
    if not values or any(math.isnan(v) for v in values):
        raise ValueError("empty or NaN entry in SNR list")
    return tuple(values)


def read_key_values(path: str, header_only: bool = False) -> dict[str, str]:
    """``key=value`` lines; with ``header_only`` read the ``# key=value`` header of an output file."""
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if header_only:
                if not line.startswith("#"):
                    break
                line = line[1:].strip()
            elif not line or line.startswith("#"):
                continue
            if "=" not in line:
                continue
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad flags are configuration errors: status 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankexit", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--replay", help="take the configuration from the header of an earlier output")
    helps = {
        "field": "extension degree m of GF(2^m)",
        "snr": "SNR grid in dB: start:step:stop or a comma list (channel Es/N0 for rankloss, "
        "surrogate a-priori Es/N0 for exit-*, a single value for fit-dump)",
        "ebn0": "channel Eb/N0 in dB for exit-* (converted at log2(q) bits per symbol)",
        "esn0": "channel Es/N0 in dB for exit-*, overrides --ebn0",
        "samples": "evaluation samples per grid point",
        "train_samples": "training samples per grid point (default: --samples)",
        "model": "post-processor family: rank_position or full_table",
        "mod": "channel modulation: bpsk (bitwise) or qam",
    }
    for key, (flag, _, default) in {**OPTIONS, **RUNTIME_OPTIONS}.items():
        flags = (flag, "-o") if key == "output" else (flag,)
        parser.add_argument(*flags, dest=key, type=str, default=None, help=helps.get(key, f"default: {default}"))
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < replay header < config file < flags, then convert types."""
    raw: dict[str, str | None] = {}
    sources = []
    if args.replay:
        sources.append(("--replay", read_key_values(args.replay, header_only=True)))
    if args.config:
        sources.append(("--config", read_key_values(args.config)))
    for origin, values in sources:
        for key, value in values.items():
            if key in OPTIONS:
                raw[key] = value
            elif key not in ("subcommand", "version"):
                raise ConfigError(f"{origin}: unknown key {key!r}")
    for key in {**OPTIONS, **RUNTIME_OPTIONS}:
        value = getattr(args, key)
        if value is not None:
            raw[key] = value

    cfg = {}
    for key, (flag, typ, default) in {**OPTIONS, **RUNTIME_OPTIONS}.items():
        value = raw.get(key)
        if value is None or value == "None":
            cfg[key] = default
            continue
        try:
            cfg[key] = typ(value)
        except ValueError:
            raise ConfigError(f"{flag}: cannot parse {value!r} as {typ.__name__}") from None
    return cfg


def _flag(key: str) -> str:
    return {**OPTIONS, **RUNTIME_OPTIONS}[key][0]


def validate(sub: str, cfg: dict) -> dict:
    """Check every parameter and build the library objects; raises ConfigError."""

    def need(cond, key, msg):
        if not cond:
            raise ConfigError(f"{_flag(key)}: {msg}")

    need(1 <= cfg["field"] <= 16, "field", "extension degree must be in 1..16")
    prim = None
    if cfg["prim_poly"] is not None:
        try:
            prim = int(cfg["prim_poly"], 0)
        except ValueError:
            raise ConfigError(f"--prim-poly: cannot parse {cfg['prim_poly']!r}") from None
    try:
        field = FieldSpec(cfg["field"], prim)
    except ValueError as exc:
        raise ConfigError(f"--prim-poly: {exc}") from None
    for key in ("mod", "apriori_mod"):
        need(cfg[key] in ("bpsk", "qam"), key, "must be bpsk or qam")
        need(not (cfg[key] == "qam" and field.m % 2), key, f"qam needs an even field degree, got {field.m}")
    need(cfg["model"] in ("rank_position", "full_table"), "model", "must be rank_position or full_table")
    need(cfg["samples"] >= 1, "samples", "must be >= 1")
    need(cfg["train_samples"] is None or cfg["train_samples"] >= 1, "train_samples", "must be >= 1")
    need(cfg["seed"] >= 0, "seed", "must be non-negative")
    need(cfg["train_seed"] is None or cfg["train_seed"] >= 0, "train_seed", "must be non-negative")
    need(cfg["dv"] >= 2, "dv", "must be >= 2")
    need(cfg["dc"] >= 3 or sub not in ("exit-check", "exit-full"), "dc", "must be >= 3")
    need(cfg["quant_levels"] is None or cfg["quant_levels"] >= 2, "quant_levels", "must be >= 2")
    need(cfg["quant_range"] is None or cfg["quant_range"] > 0, "quant_range", "must be positive")
    need(cfg["chunk_size"] >= 1, "chunk_size", "must be >= 1")
    need(0 < cfg["eps"] < 1, "eps", "must be in (0, 1)")
    need(cfg["workers"] >= 1, "workers", "must be >= 1")
    need(math.isfinite(cfg["ebn0"]), "ebn0", "must be finite")
    if sub == "selftest":
        need(field.m <= 3, "field", "selftest supports m <= 3 (exact enumeration)")
        return {"field": field}
    try:
        grid = parse_grid(cfg["snr"])
    except ValueError as exc:
        raise ConfigError(f"--snr: {exc}") from None
    if sub == "fit-dump":
        need(len(grid) == 1 and math.isfinite(grid[0]), "snr", "fit-dump needs a single finite SNR")
    if sub == "rankloss":
        need(all(math.isfinite(s) for s in grid), "snr", "channel SNRs must be finite")
    if cfg["model"] == "full_table":
        need(field.m <= 4, "model", "full_table is only practical for m <= 4")
    esn0 = cfg["esn0"] if cfg["esn0"] is not None else snr_convert(cfg["ebn0"], field)
    need(not math.isnan(esn0), "esn0", "must be a number")
    channel = ChannelConfig(field, Modulation(cfg["mod"]), esn0, cfg["quant_levels"], cfg["quant_range"])
    sweep = SweepConfig(
        channel,
        grid,
        d_v=cfg["dv"],
        d_c=cfg["dc"],
        n_train=cfg["train_samples"] or cfg["samples"],
        n_eval=cfg["samples"],
        seed=cfg["seed"],
        train_seed=cfg["train_seed"],
        apriori_modulation=Modulation(cfg["apriori_mod"]),
        model=cfg["model"],
        chunk_size=cfg["chunk_size"],
        workers=cfg["workers"],
        eps=cfg["eps"],
    )
    return {"field": field, "sweep": sweep}


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def header(sub: str, cfg: dict) -> str:
    lines = [f"# subcommand={sub}"]
    for key in OPTIONS:
        lines.append(f"# {key}={cfg[key]}")
    return "\n".join(lines) + "\n"


def rankloss_csv(records) -> str:
    rows = [",".join(RANKLOSS_COLUMNS)]
    for r in records:
        rows.append(",".join(_fmt(getattr(r, c)) for c in RANKLOSS_COLUMNS))
    return "\n".join(rows) + "\n"


def curves_csv(curves: list[CurveResult], chart: bool = False) -> str:
    cols = EXIT_COLUMNS + (("chart_x", "chart_y") if chart else ())
    rows = [",".join(cols)]
    for curve in curves:
        plotted = curve.swap_axes() if chart and curve.name.startswith("check") else curve
        for p, pc in zip(curve.points, _align(curve, plotted)):
            vals = [curve.name, p.snr_db, p.i_a, p.i_a_std, p.i_e, p.i_e_std, p.i_a_warped, p.i_a_warped_std]
            if chart:
                vals += [pc.i_a, pc.i_e]
            rows.append(",".join(_fmt(v) for v in vals))
    return "\n".join(rows) + "\n"


def _align(curve: CurveResult, plotted: CurveResult):
    """Points of ``plotted`` in the order of ``curve`` (matched by SNR)."""
    if plotted is curve:
        return curve.points
    by = {p.snr_db: p for p in plotted.points}
    return [by[p.snr_db] for p in curve.points]


def run(sub: str, cfg: dict, out) -> int:
    objs = validate(sub, cfg)
    if sub == "selftest":
        from .selfcheck import run_all

        results = run_all(objs["field"])
        for r in results:
            out.write(r.line() + "\n")
        return 0 if all(r.passed for r in results) else 2
    sweep: SweepConfig = objs["sweep"]
    body = header(sub, cfg)
    if sub == "rankloss":
        body += rankloss_csv(rank_loss_sweep(sweep))
    elif sub == "exit-var":
        body += curves_csv([var_exit_sumproduct(sweep), var_exit_rank(sweep)])
    elif sub == "exit-check":
        body += curves_csv([check_exit(sweep, SUM_PRODUCT), check_exit(sweep, RANK)])
    elif sub == "exit-full":
        curves = [var_exit_sumproduct(sweep), var_exit_rank(sweep), check_exit(sweep, SUM_PRODUCT), check_exit(sweep, RANK)]
        body += curves_csv(curves, chart=True)
    elif sub == "fit-dump":
        body += dumps(fit_at_snr(sweep, sweep.snr_grid[0]))
    out.write(body)
    return 0


def fit_at_snr(sweep: SweepConfig, snr: float):
    """Post-processor fitted on the training stream of the channel at ``snr``."""
    channel = sweep.channel.with_snr(snr)
    q = sweep.field.q

    def train(rng, n):
        post = transmit(rng.integers(0, q, n), channel, rng)
        return accumulator(sweep.model, q).update(post, rank_retain(post))

    parts = run_chunked(train, sweep.n_train, sweep.training_seed, (0, 1), sweep.chunk_size, sweep.workers)
    acc = parts[0]
    for p in parts[1:]:
        acc = acc.merge(p)
    return acc.model()


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rankexit-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if cfg["output"] != "-":
            directory = os.path.dirname(os.path.abspath(cfg["output"]))
            if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
                raise ConfigError(f"--output: directory {directory!r} is not writable")
        validate(args.subcommand, cfg)
    except (ConfigError, OSError) as exc:
        print(f"rankexit: error: {exc}", file=sys.stderr)
        return 1
    buf = io.StringIO()
    try:
        status = run(args.subcommand, cfg, buf)
    except Exception as exc:  # anything past validation is a runtime failure
        print(f"rankexit: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if cfg["output"] == "-":
        sys.stdout.write(buf.getvalue())
    else:
        _write_atomic(cfg["output"], buf.getvalue())
    return status


if __name__ == "__main__":
    sys.exit(main())
