"""Experiment harness: test functions, error sweeps, rate fits and reports.

Reports are CSV files with a versioned comment line followed by the fixed
header ``method,d,class,r,p,m,error_linf,error_l2,units_used,seconds``.
All rates are measured on individual instances; the theoretical rates are
worst-case statements over a class ball, so a fit can contradict them
(slower decay) but never certify them.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .errors import DegenerateFitError, ParameterError, UnknownFunctionError
from .freq_index import block_of, cross_indices, cross_size
from .kernels import BernoulliSpec, bernoulli_poly
from .mterm import greedy_mterm, layered_mterm, plan_budget_H, plan_budget_W
from .polynomial import TrigPolynomial
from .smolyak import PolynomialSampler, smolyak_recover, sparse_grid_size
from .spectral import (
    DEFAULT_OVERSAMPLE,
    SmoothnessSpec,
    block_norms,
    norm_lp_poly,
    norm_smoothness,
    project_cross,
)

CSV_HEADER = ("method", "d", "class", "r", "p", "m", "error_linf", "error_l2", "units_used", "seconds")
REPORT_VERSION = "hcross-report v1"
METHODS = ("greedy", "layered_W", "layered_H", "projection", "smolyak")

FOOTER = (
    "Rates are fitted on individual test functions. The theoretical bounds are "
    "worst-case over the unit ball of the class and carry unknown constants; "
    "a fit can reveal slower decay but cannot confirm a bound. m-term errors "
    "are upper bounds for the best m-term error."
)


# -- test-function registry ------------------------------------------------


def _alpha(params: Mapping, d: int) -> tuple[float, ...]:
    alpha = params.get("alpha", 0.0)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.size == 1:
        alpha = np.repeat(alpha, d)
    if alpha.size != d:
        raise ParameterError(f"alpha has {alpha.size} entries, expected {d}")
    return tuple(alpha.tolist())


def tensor_decay(beta: float, box: int, d: int) -> TrigPolynomial:
    """Coefficients ``prod_j max(1, |k_j|)^-beta`` on the box ``|k_j| <= box``."""
    k = np.arange(-box, box + 1)
    c = np.maximum(1, np.abs(k)).astype(float) ** (-float(beta))
    kg = np.meshgrid(*([k] * d), indexing="ij")
    cg = np.meshgrid(*([c] * d), indexing="ij")
    freqs = np.stack([g.ravel() for g in kg], axis=1)
    coeffs = np.prod(np.stack([g.ravel() for g in cg]), axis=0)
    return TrigPolynomial(freqs, coeffs.astype(np.complex128), d=d)


def _random_block_normalized(r, p, level, d, seed, oversample):
    freqs = cross_indices(level, d)
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(freqs.shape[0]) + 1j * rng.standard_normal(freqs.shape[0])
    g = TrigPolynomial(freqs, coeffs, d=d)
    norms = block_norms(g, p, kind="sharp", oversample=oversample)
    blocks = block_of(g.freqs)
    scale = np.empty(len(g))
    for s, v in norms.items():
        mask = np.all(blocks == np.asarray(s), axis=1)
        scale[mask] = 2.0 ** (-r * sum(s)) / v
    return g.multiply(scale)


def random_ball(family: str, r: float, p: float, level: int, d: int, seed: int = 0,
                oversample: float = DEFAULT_OVERSAMPLE) -> TrigPolynomial:
    """Seeded random polynomial on ``Q_level`` with unit ``family`` block norm.

    Each dyadic block is first scaled to ``2^(-r|s|)`` in ``L_p``; the sum
    is then divided by its class norm, so membership radius is exactly one.
    """
    g = _random_block_normalized(r, p, level, d, seed, oversample)
    spec = SmoothnessSpec(family, r, p)
    return g * (1.0 / norm_smoothness(g, spec, oversample=oversample))


def registry_function(name: str, params: Mapping | None, d: int) -> TrigPolynomial:
    """Build a named test function.

    ``bernoulli`` (r, alpha, K), ``tensor_decay`` (beta, box),
    ``random_H_ball`` / ``random_W_ball`` (r, p, level, seed, oversample).
    """
    params = dict(params or {})
    if name == "bernoulli":
        spec = BernoulliSpec(float(params.get("r", 1.0)), _alpha(params, d), int(params.get("K", 64)))
        return bernoulli_poly(spec)
    if name == "tensor_decay":
        return tensor_decay(float(params.get("beta", 1.0)), int(params.get("box", 64)), d)
    if name in ("random_H_ball", "random_W_ball"):
        family = name.split("_")[1]
        return random_ball(
            family,
            float(params.get("r", 0.4)),
            float(params.get("p", math.inf if family == "H" else 4.0)),
            int(params.get("level", 6)),
            d,
            int(params.get("seed", 0)),
            float(params.get("oversample", DEFAULT_OVERSAMPLE)),
        )
    raise UnknownFunctionError(name)


# -- experiments -----------------------------------------------------------


def geometric_schedule(first: int, last: int, ratio: float = 2.0) -> list[int]:
    if first < 1 or last < first or ratio <= 1:
        raise ParameterError(f"bad schedule first={first}, last={last}, ratio={ratio}")
    out, x = [], float(first)
    while round(x) <= last:
        v = int(round(x))
        if not out or v > out[-1]:
            out.append(v)
        x *= ratio
    return out


@dataclass
class ExperimentConfig:
    method: str
    spec: SmoothnessSpec
    d: int
    schedule: list[int]
    function: str
    function_params: dict = field(default_factory=dict)
    oversample: float = DEFAULT_OVERSAMPLE
    output: str | None = None
    seed: int = 0
    kappa: float | None = None
    zeta: float | None = None
    timing: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}; choose from {METHODS}")
        if any(b <= a for a, b in zip(self.schedule, self.schedule[1:])):
            raise ParameterError("m schedule must be strictly increasing")


def _parse_value(text: str):
    text = text.strip()
    if "," in text:
        return [_parse_value(t) for t in text.split(",")]
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_config(text: str, base: Path | None = None) -> ExperimentConfig:
    """Read an INI-style config with ``[experiment]``, ``[class]`` and ``[function]`` sections."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # parameter names are case sensitive (e.g. K)
    cp.read_string(text)
    ex, cl, fn = cp["experiment"], cp["class"], cp["function"]
    spec = SmoothnessSpec(
        cl.get("family", "H"),
        cl.getfloat("r"),
        float(cl.get("p", "inf")),
        float(cl.get("q", "inf")),
    )
    schedule = geometric_schedule(
        ex.getint("m_first", 16), ex.getint("m_last", 2**14), ex.getfloat("m_ratio", 2.0)
    )
    fparams = {k: _parse_value(v) for k, v in fn.items() if k != "name"}
    output = ex.get("output")
    if output and base is not None and not Path(output).is_absolute():
        output = str(base / output)
    opt = lambda key: float(ex[key]) if ex.get(key, "").strip() else None
    return ExperimentConfig(
        method=ex.get("method"),
        spec=spec,
        d=ex.getint("dim", 2),
        schedule=schedule,
        function=fn.get("name"),
        function_params=fparams,
        oversample=ex.getfloat("oversample", DEFAULT_OVERSAMPLE),
        output=output,
        seed=ex.getint("seed", 0),
        kappa=opt("kappa"),
        zeta=opt("zeta"),
        timing=ex.getboolean("timing", False),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), base=path.parent)


def _target(cfg: ExperimentConfig) -> TrigPolynomial:
    params = dict(cfg.function_params)
    params.setdefault("seed", cfg.seed)
    if cfg.function.startswith("random_"):
        params.setdefault("r", cfg.spec.r)
        params.setdefault("p", cfg.spec.p)
        params.setdefault("oversample", cfg.oversample)
    return registry_function(cfg.function, params, cfg.d)


def _max_level(m: int, size) -> int | None:
    n = None
    while size(0 if n is None else n + 1) <= m:
        n = 0 if n is None else n + 1
    return n


def run_method(f: TrigPolynomial, cfg: ExperimentConfig, m: int) -> tuple[float, float, int]:
    """``(error_linf, error_l2, units_used)`` of one method at budget ``m``."""
    spec, d, ov = cfg.spec, cfg.d, cfg.oversample
    if cfg.method == "greedy":
        res = greedy_mterm(f, m, oversample=ov)
        return res.error_linf, res.error_l2, res.terms_used
    if cfg.method in ("layered_W", "layered_H"):
        planner, kind = (plan_budget_W, "sharp") if cfg.method == "layered_W" else (plan_budget_H, "vp")
        plan = planner(m, spec.r, spec.p, d, cfg.kappa, cfg.zeta)
        res = layered_mterm(f, plan, kind=kind, oversample=ov)
        return res.error_linf, res.error_l2, res.terms_used
    if cfg.method == "projection":
        n = _max_level(m, lambda v: cross_size(v, d))
        approx = project_cross(f, n) if n is not None else TrigPolynomial.zero(d)
        units = cross_size(n, d) if n is not None else 0
    else:
        n = _max_level(m, lambda v: sparse_grid_size(v, d))
        if n is None:
            approx, units = TrigPolynomial.zero(d), 0
        else:
            sampler = PolynomialSampler(f)
            approx = smolyak_recover(sampler, n, d)
            units = sampler.call_count
    diff = f - approx
    return norm_lp_poly(diff, math.inf, oversample=ov), diff.l2_norm(), units


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def report_preamble(cfg: ExperimentConfig) -> str:
    fparams = ";".join(f"{k}={v}" for k, v in sorted(cfg.function_params.items()))
    return (
        f"# {REPORT_VERSION}; hcross {__version__}; function={cfg.function}"
        f"{'(' + fparams + ')' if fparams else ''}; seed={cfg.seed}; oversample={_fmt(cfg.oversample)}"
    )


def format_row(row: Mapping) -> list[str]:
    return [row["method"] if k == "method" else row["class"] if k == "class"
            else "" if row[k] is None else _fmt(row[k]) for k in CSV_HEADER]


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Run the configured method over the m schedule.

    Rows are written (and flushed) to ``cfg.output`` as they complete, so a
    failure keeps the rows computed so far.  ``seconds`` is left empty
    unless ``cfg.timing`` is set, which keeps reports byte-reproducible.
    """
    f = _target(cfg)
    rows = []
    handle = open(cfg.output, "w", newline="") if cfg.output else None
    try:
        writer = None
        if handle:
            handle.write(report_preamble(cfg) + "\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            handle.flush()
        for m in cfg.schedule:
            start = time.perf_counter()
            linf, l2, units = run_method(f, cfg, m)
            elapsed = time.perf_counter() - start
            row = {
                "method": cfg.method, "d": cfg.d, "class": cfg.spec.family,
                "r": cfg.spec.r, "p": cfg.spec.p, "m": m,
                "error_linf": linf, "error_l2": l2, "units_used": units,
                "seconds": elapsed if cfg.timing else None,
            }
            rows.append(row)
            if writer:
                writer.writerow(format_row(row))
                handle.flush()
    finally:
        if handle:
            handle.close()
    return rows


def write_report(rows: Sequence[Mapping], path, preamble: str = f"# {REPORT_VERSION}") -> None:
    with open(path, "w", newline="") as fh:
        fh.write(preamble + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(format_row(row))


def read_report(path) -> list[dict]:
    """Parse a report CSV (comment lines skipped) into typed rows."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = []
    for raw in csv.DictReader(io.StringIO("".join(lines))):
        row = dict(raw)
        for key in ("d", "m", "units_used"):
            row[key] = int(row[key])
        for key in ("r", "p", "error_linf", "error_l2", "seconds"):
            row[key] = float(row[key]) if row[key] not in ("", None) else None
        rows.append(row)
    return rows


# -- rate fitting ------------------------------------------------------------


@dataclass
class RateFit:
    """Fit of ``log e = c - main_rate log m + log_power log log m [+ loglog_power log log log m]``."""

    main_rate: float
    log_power: float
    loglog_power: float | None
    residual: float
    window: tuple[int, int]
    constant: float = 0.0

    def predict(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        out = self.constant - self.main_rate * np.log(m) + self.log_power * np.log(np.log(m))
        if self.loglog_power is not None:
            out = out + self.loglog_power * np.log(np.log(np.log(m)))
        return np.exp(out)


def _pairs(rows, column: str) -> tuple[np.ndarray, np.ndarray]:
    ms, es = [], []
    for row in rows:
        if isinstance(row, Mapping):
            m, e = row["m"], row[column]
        else:
            m, e = row
        if e is None:
            continue
        ms.append(float(m))
        es.append(float(e))
    return np.array(ms), np.array(es)


def fit_rate(rows: Iterable, with_loglog: bool = False, column: str = "error_linf",
             with_log: bool = True) -> RateFit:
    """Ordinary least squares on ``log e`` against ``log m`` and ``log log m``.

    ``rows`` are mappings with ``m`` and ``column`` keys, or ``(m, e)``
    pairs.  Rows with ``m < 16`` or non-positive error are excluded; at
    least four must remain.  ``with_loglog`` adds a ``log log log m``
    regressor; ``with_log=False`` fits a pure power law.
    """
    m, e = _pairs(rows, column)
    keep = (m >= 16) & (e > 0) & np.isfinite(e)
    m, e = m[keep], e[keep]
    if m.size < 4:
        raise DegenerateFitError(f"need at least 4 usable rows, got {m.size}")
    cols = [np.ones_like(m), np.log(m)]
    if with_log:
        cols.append(np.log(np.log(m)))
    if with_loglog:
        cols.append(np.log(np.log(np.log(m))))
    X = np.stack(cols, axis=1)
    if np.linalg.matrix_rank(X) < X.shape[1] or m.size < X.shape[1]:
        raise DegenerateFitError("design matrix is rank deficient on this window")
    y = np.log(e)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return RateFit(
        main_rate=float(-coef[1]),
        log_power=float(coef[2]) if with_log else 0.0,
        loglog_power=float(coef[-1]) if with_loglog else None,
        residual=float(np.sqrt(np.mean(resid**2))),
        window=(int(m.min()), int(m.max())),
        constant=float(coef[0]),
    )


# -- comparison tables -------------------------------------------------------


def reference_exponents(d: int, r: float) -> dict[str, tuple[float, float]]:
    """``(main_rate, log_power)`` of the reference sampling bounds in ``L_2`` for ``H^r_p``."""
    return {
        "m-term/Kolmogorov route": (r, d - 1 + r),
        "sparse grid": (r, (d - 1) * (1 + r)),
    }


def _fit_cell(rows, column) -> str:
    try:
        fit = fit_rate(rows, column=column)
    except DegenerateFitError:
        return "n/a"
    return f"{fit.main_rate:.3f} / {fit.log_power:.3f}"


def compare_reports(reports: Sequence[tuple[str, list[dict]]]) -> str:
    """Markdown table of several error curves side by side, with fits and reference exponents."""
    if not reports:
        raise ParameterError("nothing to compare")
    lines = ["# Error comparison", ""]
    header = ["m"]
    names = [rows[0]["method"] if rows else label for label, rows in reports]
    for (label, _), method in zip(reports, names):
        if names.count(method) > 1:
            method = f"{method} [{label}]"
        header += [f"{method} units", f"{method} L_inf", f"{method} L_2"]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    all_m = sorted({row["m"] for _, rows in reports for row in rows})
    for m in all_m:
        cells = [str(m)]
        for _, rows in reports:
            hit = [row for row in rows if row["m"] == m]
            if hit:
                row = hit[0]
                cells += [str(row["units_used"]), f"{row['error_linf']:.6e}", f"{row['error_l2']:.6e}"]
            else:
                cells += ["", "", ""]
        lines.append("| " + " | ".join(cells) + " |")
    lines += ["", "## Fitted exponents (main rate / log power)", ""]
    lines.append("| source | method | L_inf fit | L_2 fit |")
    lines.append("|---|---|---|---|")
    for label, rows in reports:
        method = rows[0]["method"] if rows else ""
        lines.append(f"| {label} | {method} | {_fit_cell(rows, 'error_linf')} | {_fit_cell(rows, 'error_l2')} |")
    first = next((rows[0] for _, rows in reports if rows), None)
    if first is not None and first["r"] is not None:
        d, r = first["d"], first["r"]
        lines += ["", f"## Reference sampling-recovery exponents in L_2 (d={d}, r={r:g})", ""]
        lines.append("| bound | main rate | log power |")
        lines.append("|---|---|---|")
        for name, (a, b) in reference_exponents(d, r).items():
            lines.append(f"| {name} | {a:g} | {b:g} |")
        lines.append(
            "| non-constructive recovery from Kolmogorov numbers | reference only | not implemented |"
        )
    lines += ["", FOOTER, ""]
    return "\n".join(lines)


# -- coefficient files -------------------------------------------------------


def write_coefficients(poly: TrigPolynomial, path) -> None:
    """One line per frequency: ``k1,...,kd,re,im`` (no header)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for k, c in zip(poly.freqs, poly.coeffs):
            writer.writerow([str(int(v)) for v in k] + [repr(float(c.real)), repr(float(c.imag))])


def read_coefficients(path, d: int | None = None) -> TrigPolynomial:
    """Inverse of :func:`write_coefficients`; blank and ``#`` lines are skipped."""
    freqs, coeffs = [], []
    with open(path, newline="") as fh:
        for rec in csv.reader(ln for ln in fh if ln.strip() and not ln.startswith("#")):
            freqs.append([int(v) for v in rec[:-2]])
            coeffs.append(complex(float(rec[-2]), float(rec[-1])))
    if not freqs:
        if d is None:
            raise ParameterError(f"{path} is empty; pass the dimension explicitly")
        return TrigPolynomial.zero(d)
    return TrigPolynomial(np.array(freqs, dtype=np.int64), coeffs, d=d or len(freqs[0]))
