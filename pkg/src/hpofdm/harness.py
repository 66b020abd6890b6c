"""Experiment driver: configuration files, sweeps, stopping rule and CSV output.

A sweep evaluates one or more *series* (a mode and block size) at every
point of an axis. BER points accumulate trials in fixed-size batches until
``min_errors`` bit errors or ``max_bits`` bits are reached. The batch size
does not depend on the thread count, so results are the same for any
``--threads`` value.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analysis
from .channel import noise_variance
from .modem import MODES, LinkConfig, TrialStats, run_trial
from .numerics import is_power_of_two, moments

SWEEP_KINDS = ("ber-vs-snr", "ber-vs-clip", "opt-clip-vs-snr", "csi-penalty", "noise-moments", "mse-check")
CSV_COLUMNS = (
    "sweep_kind", "mode", "N", "snr_db", "c", "csi_err",
    "bits", "errors", "ber", "ci_halfwidth", "seed", "converged",
)
CONVERGED_MIN_ERRORS = 10


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StopRule:
    min_errors: int = 100
    max_bits: int = 10**8
    batch_trials: int = 4

    def __post_init__(self):
        if self.min_errors <= 0 or self.max_bits <= 0 or self.batch_trials <= 0:
            raise ConfigError("stopping rule bounds must be positive")


@dataclass(frozen=True)
class Series:
    mode: str = "precoded"
    N: int = 256

    @classmethod
    def parse(cls, text: str) -> "Series":
        text = text.strip()
        mode, _, n = text.partition(":")
        if mode.isdigit():
            mode, n = "precoded", mode
        if mode not in MODES:
            raise ConfigError(f"unknown series {text!r}")
        if mode == "precoded":
            if not n:
                raise ConfigError(f"series {text!r} needs a block size, e.g. precoded:16")
            N = int(n)
            if not is_power_of_two(N):
                raise ConfigError(f"series {text!r}: N must be a power of two")
            return cls("precoded", N)
        return cls(mode, 1 if mode == "uncoded" else 0)

    def apply(self, cfg: LinkConfig) -> LinkConfig:
        if self.mode == "precoded":
            return replace(cfg, mode="precoded", N=self.N)
        return replace(cfg, mode=self.mode)

    def __str__(self) -> str:
        return f"precoded:{self.N}" if self.mode == "precoded" else self.mode


_DEFAULT_AXES = {
    "ber-vs-snr": tuple(float(x) for x in range(0, 25, 2)),
    "ber-vs-clip": tuple(round(x, 2) for x in np.arange(0.05, 1.51, 0.05)),
    "opt-clip-vs-snr": (5.0, 10.0, 15.0, 20.0),
    "csi-penalty": tuple(float(x) for x in range(8, 27, 2)),
    "noise-moments": (1.0, 2.0, 16.0, 256.0),
    "mse-check": (1.0, 16.0, 256.0),
}
_DEFAULT_SERIES = {
    "ber-vs-snr": ("uncoded", "ofdm-cdm", "precoded:16", "precoded:256"),
    "ber-vs-clip": ("uncoded", "precoded:16", "precoded:256"),
    "opt-clip-vs-snr": ("precoded:256",),
    "csi-penalty": ("precoded:16", "precoded:256"),
    "noise-moments": ("precoded:256",),
    "mse-check": ("precoded:256",),
}


@dataclass(frozen=True)
class Sweep:
    kind: str
    base: LinkConfig = field(default_factory=LinkConfig)
    axis: tuple = ()
    series: tuple = ()
    stop: StopRule = field(default_factory=StopRule)
    c_grid: tuple = tuple(round(x, 2) for x in np.arange(0.05, 1.61, 0.05))
    csi_errs: tuple = (0.0, 0.005, 0.01)
    samples: int = 10**6  # noise-moments / mse-check sample target

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ConfigError(f"unknown sweep kind {self.kind!r}; choose from {', '.join(SWEEP_KINDS)}")
        if not self.axis:
            object.__setattr__(self, "axis", _DEFAULT_AXES[self.kind])
        if not self.series:
            object.__setattr__(self, "series", tuple(Series.parse(s) for s in _DEFAULT_SERIES[self.kind]))
        if not self.axis:
            raise ConfigError("sweep axis is empty")


def wilson_halfwidth(errors: int, n: int, z: float = 1.959963984540054) -> float:
    """Half-width of the 95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return float("nan")
    p = errors / n
    denom = 1 + z * z / n
    return z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))


def _mapper(executor):
    return executor.map if executor is not None else map


def run_point(cfg: LinkConfig, stop: StopRule, executor=None, trials: int | None = None) -> TrialStats:
    """Accumulate trials for one configuration.

    With ``trials`` given, exactly that many are run; otherwise the
    stopping rule is checked after every batch.
    """
    cfg = cfg.resolved()
    mapper = _mapper(executor)
    total = TrialStats()
    if trials is not None:
        for st in mapper(lambda i: run_trial(cfg, i), range(trials)):
            total = total + st
        return total
    nxt = 0
    while total.errors < stop.min_errors and total.bits < stop.max_bits:
        batch = range(nxt, nxt + stop.batch_trials)
        for st in mapper(lambda i: run_trial(cfg, i), batch):
            total = total + st
        nxt += stop.batch_trials
    return total


def _row(kind: str, cfg: LinkConfig, st: TrialStats, **extra) -> dict:
    cfg = cfg.resolved()
    row = {
        "sweep_kind": kind,
        "mode": cfg.mode,
        "N": cfg.N,
        "snr_db": cfg.snr_db,
        "c": cfg.c,
        "csi_err": cfg.csi_err,
        "bits": st.bits,
        "errors": st.errors,
        "ber": st.ber,
        "ci_halfwidth": wilson_halfwidth(st.errors, st.bits),
        "seed": cfg.master_seed,
        "converged": int(st.errors >= CONVERGED_MIN_ERRORS),
    }
    row.update(extra)
    return row


def _samples_trials(cfg: LinkConfig, samples: int) -> int:
    cfg = cfg.resolved()
    per_trial = cfg.S * cfg.T * cfg.frames
    return max(1, -(-samples // per_trial))


def run_sweep(sweep: Sweep, threads: int = 1) -> list[dict]:
    """Evaluate a sweep. Rows come out in axis order, then series order."""
    workers = threads if threads > 0 else None
    with ThreadPoolExecutor(max_workers=workers) as ex:
        executor = ex if threads != 1 else None
        return list(_ROWS[sweep.kind](sweep, executor))


def _ber_vs_snr(sw: Sweep, ex):
    for snr in sw.axis:
        for s in sw.series:
            cfg = s.apply(replace(sw.base, snr_db=float(snr)))
            yield _row(sw.kind, cfg, run_point(cfg, sw.stop, ex))


def _ber_vs_clip(sw: Sweep, ex):
    for c in sw.axis:
        for s in sw.series:
            cfg = s.apply(replace(sw.base, c=float(c)))
            yield _row(sw.kind, cfg, run_point(cfg, sw.stop, ex))


def _opt_clip_vs_snr(sw: Sweep, ex):
    # Every c on the grid reuses the same trials (common random numbers); the
    # trial count is set by the stopping rule at the analytic optimum.
    for snr in sw.axis:
        s2 = noise_variance(snr, sw.base.P_s)
        c_mse = analysis.optimum_c(sw.base.P_s, s2, "mse")
        c_sinr = analysis.optimum_c(sw.base.P_s, s2, "sinr")
        for s in sw.series:
            cfg = s.apply(replace(sw.base, snr_db=float(snr)))
            ntr = run_point(replace(cfg, c=c_sinr), sw.stop, ex).trials
            best = None
            for c in sw.c_grid:
                st = run_point(replace(cfg, c=float(c)), sw.stop, ex, trials=ntr)
                if best is None or st.errors < best[1].errors:
                    best = (float(c), st)
            yield _row(
                sw.kind, replace(cfg, c=best[0]), best[1],
                c_analytic_mse=c_mse, c_analytic_sinr=c_sinr,
            )


def _csi_penalty(sw: Sweep, ex):
    for snr in sw.axis:
        for err in sw.csi_errs:
            for s in sw.series:
                cfg = s.apply(replace(sw.base, snr_db=float(snr), csi_err=float(err)))
                if sw.base.c is None:
                    cfg = replace(cfg, c=csi_aware_c(cfg))
                yield _row(sw.kind, cfg, run_point(cfg, sw.stop, ex))


def csi_aware_c(cfg: LinkConfig) -> float:
    """Analytic optimum c with the estimation error counted as extra noise."""
    s2 = noise_variance(cfg.snr_db, cfg.P_s) + cfg.csi_err * cfg.P_s
    return analysis.optimum_c(cfg.P_s, s2) if s2 > 0 else 0.0


def _noise_moments(sw: Sweep, ex):
    s2 = noise_variance(sw.base.snr_db, sw.base.P_s)
    for n in sw.axis:
        cfg = replace(sw.base, mode="precoded", N=int(n), track_noise=True)
        if int(n) == 1:
            cfg = replace(cfg, Df=1, Dt=1)
        st = run_point(cfg, sw.stop, ex, trials=_samples_trials(cfg, sw.samples))
        _, pv, varv = moments(st.v)
        _, pw, varw = moments(st.w)
        E_v4 = varv + pv * pv
        gm = analysis.gain_moments(cfg.resolved().c)
        yield _row(
            sw.kind, cfg, st,
            sigma_v2=pv, var_v2=varv, sigma_w2=pw, var_w2=varw,
            pred_sigma_v2=analysis.noise_moments_v(s2, gm)[0],
            pred_var_w2_complex=analysis.noise_moments_w(int(n), pv, E_v4, "complex-circular")[1],
            pred_var_w2_real=analysis.noise_moments_w(int(n), pv, E_v4, "real-gaussian")[1],
        )


def _mse_check(sw: Sweep, ex):
    base = sw.base if sw.base.c is not None else replace(sw.base, c=1.0)
    base = replace(base, snr_db=math.inf, track_noise=True)
    gm = analysis.gain_moments(base.c)
    for n in sw.axis:
        cfg = replace(base, mode="precoded", N=int(n))
        if int(n) == 1:
            cfg = replace(cfg, Df=1, Dt=1)
        st = run_point(cfg, sw.stop, ex, trials=_samples_trials(cfg, sw.samples))
        _, mse, _ = moments(st.err)
        pred = analysis.mse_predict(gm, base.P_s, 0.0, int(n))
        yield _row(sw.kind, cfg, st, mse=mse, pred_mse=pred.total, pred_bias_form=pred.bias_total)


_ROWS = {
    "ber-vs-snr": _ber_vs_snr,
    "ber-vs-clip": _ber_vs_clip,
    "opt-clip-vs-snr": _opt_clip_vs_snr,
    "csi-penalty": _csi_penalty,
    "noise-moments": _noise_moments,
    "mse-check": _mse_check,
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: list[dict], out) -> None:
    """Write rows with the fixed columns first, kind-specific extras after."""
    extra = []
    for r in rows:
        for k in r:
            if k not in CSV_COLUMNS and k not in extra:
                extra.append(k)
    cols = list(CSV_COLUMNS) + extra
    w = csv.writer(out, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[k]) if k in r else "" for k in cols])


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def snr_at_ber(snrs, bers, target: float) -> float:
    """SNR where a BER curve crosses ``target``, interpolating log10(BER) linearly.

    Returns ``inf`` if the curve never gets down to ``target``.
    """
    snrs = np.asarray(snrs, dtype=float)
    lb = np.log10(np.maximum(np.asarray(bers, dtype=float), 1e-300))
    lt = math.log10(target)
    below = np.flatnonzero(lb <= lt)
    if below.size == 0:
        return math.inf
    i = int(below[0])
    if i == 0:
        return float(snrs[0])
    x0, x1, y0, y1 = snrs[i - 1], snrs[i], lb[i - 1], lb[i]
    return float(x0 + (lt - y0) / (y1 - y0) * (x1 - x0))


# -- configuration files ----------------------------------------------------

_LINK_KEYS = {
    "s": ("S", int),
    "t": ("T", int),
    "n": ("N", int),
    "df": ("Df", int),
    "dt": ("Dt", int),
    "snr_db": ("snr_db", float),
    "c": ("c", "c"),
    "csi_err": ("csi_err", float),
    "fd": ("fd", float),
    "profile": ("profile", str),
    "mode": ("mode", str),
    "seed": ("master_seed", int),
    "master_seed": ("master_seed", int),
    "delta_f": ("delta_f", float),
    "t_sym": ("T_sym", float),
    "bandwidth": ("bandwidth", float),
    "p_s": ("P_s", float),
    "frames": ("frames", int),
    "min_symbols": ("min_symbols", int),
    "n_osc": ("n_osc", int),
}
_SWEEP_KEYS = ("axis", "series", "min_errors", "max_bits", "batch_trials", "c_grid", "csi_errs", "samples")


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(",", " ").split())


def parse_config(text: str, kind: str | None = None, source: str = "<config>"):
    """Parse ``key = value`` text. Returns a LinkConfig, or a Sweep if ``kind`` is given."""
    link: dict = {}
    sweep: dict = {}
    where: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = (p.strip() for p in line.partition("="))
        key = key.lower()
        if not value:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        if key in where:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first on line {where[key]})")
        where[key] = lineno
        try:
            if key in _LINK_KEYS:
                attr, conv = _LINK_KEYS[key]
                if conv == "c":
                    v = None if value.lower() in ("opt", "auto", "optimum") else float(value)
                else:
                    v = conv(value)
                if attr in ("S", "N") and not is_power_of_two(v):
                    raise ConfigError(f"{key} must be a power of two, got {v}")
                if attr == "mode" and v not in MODES:
                    raise ConfigError(f"mode must be one of {', '.join(MODES)}")
                link[attr] = v
            elif key in _SWEEP_KEYS:
                if kind is None:
                    raise ConfigError(f"key {key!r} is only valid for sweeps")
                if key == "series":
                    sweep[key] = tuple(Series.parse(s) for s in value.split(",") if s.strip())
                elif key in ("axis", "c_grid", "csi_errs"):
                    sweep[key] = _floats(value)
                else:
                    sweep[key] = int(float(value))
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ConfigError as e:
            raise ConfigError(f"{source}:{lineno}: {e}") from None
        except ValueError as e:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {e}") from None
    try:
        cfg = LinkConfig(**link)
        cfg.resolved().grid_map()
    except ValueError as e:
        keys = ", ".join(f"{k} (line {where[k]})" for k in where if k in _LINK_KEYS) or "defaults"
        raise ConfigError(f"{source}: invalid link parameters [{keys}]: {e}") from None
    if kind is None:
        return cfg
    stop_kw = {k: sweep.pop(k) for k in ("min_errors", "max_bits", "batch_trials") if k in sweep}
    try:
        return Sweep(kind=kind, base=cfg, stop=StopRule(**stop_kw), **sweep)
    except (ConfigError, ValueError) as e:
        raise ConfigError(f"{source}: {e}") from None


def load_config(path, kind: str | None = None):
    """Read a config file; see :func:`parse_config`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    return parse_config(text, kind, str(path))


def link_config_keys() -> list[str]:
    return sorted(_LINK_KEYS) + sorted(_SWEEP_KEYS)


# -- command line -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hpofdm", description="Hadamard-precoded OFDM link sweeps (CSV output).")
    sub = p.add_subparsers(dest="kind", required=True, metavar="KIND")
    for kind in SWEEP_KINDS:
        sp = sub.add_parser(kind, help=f"{kind} sweep")
        sp.add_argument("--config", type=Path, help="key = value configuration file")
        sp.add_argument("--seed", type=int, help="master seed (overrides the config)")
        sp.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        sweep = load_config(args.config, args.kind) if args.config else Sweep(kind=args.kind)
        if args.seed is not None:
            sweep = replace(sweep, base=replace(sweep.base, master_seed=args.seed))
        rows = run_sweep(sweep, threads=args.threads)
    except (ConfigError, ValueError) as e:
        print(f"hpofdm: error: {e}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    return 0


__all__ = [
    "ConfigError", "StopRule", "Series", "Sweep", "run_sweep", "run_point",
    "load_config", "parse_config", "write_csv", "rows_to_csv", "snr_at_ber",
    "wilson_halfwidth", "csi_aware_c", "main",
]
