"""Seeded Monte Carlo campaigns: empirical type I error and power tables."""

import configparser
import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import bs_test, cq_test, sd_test
from .core import run_test
from .errors import ExperimentAborted, ValidationError
from .simgen import SCENARIOS, CovarianceModel, SignalSpec, replicate_rng, sample_population, signal_vector

log = logging.getLogger(__name__)

TESTS = ("PREPR", "BS", "SD", "CQ")
CSV_COLUMNS = (
    "scenario", "model", "p", "n", "m", "r", "delta", "test",
    "rate", "se", "replicates", "seconds", "status",
)
MAX_FAILURE_FRACTION = 0.01

_RUNNERS = {
    "PREPR": run_test,
    "BS": bs_test,
    "SD": sd_test,
    "CQ": cq_test,
}


def default_replicates(p):
    """Desk-scale replicate counts: 2000 up to p=200, 500 up to p=1000, else 200."""
    if p <= 200:
        return 2000
    if p <= 1000:
        return 500
    return 200


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "Normal"
    model: CovarianceModel = field(default_factory=CovarianceModel)
    p: int = 200
    n: int = 35
    m: int = 35
    signal: SignalSpec = None
    alpha: float = 0.05
    replicates: int = None
    seed: int = 0
    tests: tuple = TESTS
    name: str = ""

    def __post_init__(self):
        if self.signal is None:
            object.__setattr__(self, "signal", SignalSpec(self.p))
        if self.replicates is None:
            object.__setattr__(self, "replicates", default_replicates(self.p))
        object.__setattr__(self, "tests", tuple(t.upper() for t in self.tests))

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ValidationError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if not self.tests:
            raise ValidationError("at least one test must be enabled")
        unknown = set(self.tests) - set(TESTS)
        if unknown:
            raise ValidationError(f"unknown test(s) {sorted(unknown)}; choose from {TESTS}")
        if self.replicates < 1:
            raise ValidationError(f"replicates must be >= 1, got {self.replicates}")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if min(self.n, self.m) < 4 or self.p < 2:
            raise ValidationError("need n, m >= 4 and p >= 2")
        if self.signal.p != self.p:
            raise ValidationError("signal dimension does not match p")
        signal_vector(self.signal)
        return self


@dataclass
class TestRate:
    __test__ = False

    test: str
    rejections: int
    replicates: int
    failures: int
    seconds: float

    @property
    def rate(self):
        return self.rejections / self.replicates if self.replicates else float("nan")

    @property
    def se(self):
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.replicates) if self.replicates else float("nan")


@dataclass
class RejectionTable:
    config: ExperimentConfig
    rates: list
    statistics: dict = field(default_factory=dict, repr=False)
    aborted: str = ""

    def __getitem__(self, test):
        for row in self.rates:
            if row.test == test:
                return row
        raise KeyError(test)

    def rows(self, timing=True):
        cfg = self.config
        base = {
            "scenario": cfg.scenario,
            "model": cfg.model.label,
            "p": cfg.p,
            "n": cfg.n,
            "m": cfg.m,
            "r": cfg.signal.r,
            "delta": cfg.signal.delta,
        }
        if self.aborted:
            return [dict(base, test=t, rate="", se="", replicates=cfg.replicates, seconds="",
                         status=f"aborted: {self.aborted}") for t in cfg.tests]
        return [
            dict(
                base,
                test=row.test,
                rate=row.rate,
                se=row.se,
                replicates=row.replicates,
                seconds=round(row.seconds, 3) if timing else "",
                status="ok",
            )
            for row in self.rates
        ]


def _run_chunk(config, start, stop):
    mu_x = signal_vector(config.signal)
    k = stop - start
    stats = {t: np.full(k, np.nan) for t in config.tests}
    rejects = {t: np.zeros(k, dtype=bool) for t in config.tests}
    failed = {t: np.zeros(k, dtype=bool) for t in config.tests}
    seconds = dict.fromkeys(config.tests, 0.0)
    for j, rep in enumerate(range(start, stop)):
        rng = replicate_rng(config.seed, rep)
        x = sample_population(config.n, config.p, config.model, config.scenario, mu_x, rng)
        y = sample_population(config.m, config.p, config.model, config.scenario, None, rng)
        for t in config.tests:
            t0 = time.perf_counter()
            try:
                res = _RUNNERS[t](x, y, config.alpha)
            except ValidationError as exc:
                failed[t][j] = True
                log.debug("replicate %d, %s failed: %s", rep, t, exc)
            else:
                stats[t][j] = res.statistic
                rejects[t][j] = res.reject
            seconds[t] += time.perf_counter() - t0
    return start, stats, rejects, failed, seconds


def _chunks(total, workers):
    n_chunks = max(1, min(total, workers * 4))
    edges = np.linspace(0, total, n_chunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_experiment(config: ExperimentConfig, workers=1) -> RejectionTable:
    """Run one campaign; results do not depend on ``workers`` or scheduling.

    Raises :class:`ExperimentAborted` when any test fails on more than 1% of
    the replicates.
    """
    config.validate()
    chunks = _chunks(config.replicates, workers)
    if workers <= 1:
        parts = [_run_chunk(config, a, b) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, config, a, b) for a, b in chunks]
            parts = [f.result() for f in futures]
    parts.sort(key=lambda part: part[0])

    rates, stats = [], {}
    for t in config.tests:
        st = np.concatenate([part[1][t] for part in parts])
        rej = np.concatenate([part[2][t] for part in parts])
        fail = np.concatenate([part[3][t] for part in parts])
        secs = sum(part[4][t] for part in parts)
        n_fail = int(fail.sum())
        if n_fail > MAX_FAILURE_FRACTION * config.replicates:
            raise ExperimentAborted(f"{t} failed on {n_fail} of {config.replicates} replicates")
        rates.append(TestRate(t, int(rej[~fail].sum()), config.replicates - n_fail, n_fail, secs))
        stats[t] = st
    return RejectionTable(config, rates, stats)


def run_grid(configs, workers=1):
    """Run several campaigns; aborted ones are kept in the output and marked."""
    configs = list(configs)
    if not configs:
        raise ValidationError("empty experiment grid")
    for cfg in configs:
        cfg.validate()
    tables = []
    for cfg in configs:
        try:
            tables.append(run_experiment(cfg, workers))
        except ExperimentAborted as exc:
            log.warning("campaign %s aborted: %s", cfg.name or cfg.model.label, exc)
            tables.append(RejectionTable(cfg, [], aborted=str(exc)))
    return tables


def _rows(tables, timing):
    return [row for table in tables for row in table.rows(timing)]


def to_csv(tables, timing=True):
    """CSV text with one row per (campaign, test).

    ``timing=False`` leaves the ``seconds`` column empty so that reruns are
    byte-identical.
    """
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in _rows(tables, timing):
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def to_json(tables, timing=True):
    return json.dumps({"columns": list(CSV_COLUMNS), "rows": _rows(tables, timing)}, indent=2)


def write_results(tables, out_dir, timing=True):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    json_path = os.path.join(out_dir, "results.json")
    with open(csv_path, "w", newline="") as fh:
        fh.write(to_csv(tables, timing))
    with open(json_path, "w") as fh:
        fh.write(to_json(tables, timing))
    return csv_path, json_path


_MODEL_KEYS = {"rho": float, "hurst": float, "decay_exponent": float, "decay_scale": float, "scale_seed": int, "ma_seed": int}


def parse_configs(text, seed=None):
    """Parse INI-style campaign blocks, one ``[section]`` per campaign.

    Keys mirror :class:`ExperimentConfig`: ``scenario, model, p, n, m, r,
    delta, alpha, replicates, seed, tests`` plus the model parameters
    ``rho, hurst, decay_exponent, decay_scale, scale_seed, ma_seed``.  Values in
    ``[DEFAULT]`` apply to every block.  ``seed`` overrides every block's
    master seed when given.
    """
    parser = configparser.ConfigParser()
    parser.read_string(text)
    configs = []
    for name in parser.sections():
        sec = parser[name]
        try:
            model_kw = {k: cast(sec[k]) for k, cast in _MODEL_KEYS.items() if k in sec}
            model = CovarianceModel(sec.get("model", "M1"), **model_kw)
            p = sec.getint("p", 200)
            reps = sec.getint("replicates") if "replicates" in sec else None
            tests = tuple(t.strip() for t in sec.get("tests", ",".join(TESTS)).split(",") if t.strip())
            cfg = ExperimentConfig(
                scenario=sec.get("scenario", "Normal"),
                model=model,
                p=p,
                n=sec.getint("n", 35),
                m=sec.getint("m", 35),
                signal=SignalSpec(p, sec.getfloat("r", 0.0), sec.getfloat("delta", 0.0)),
                alpha=sec.getfloat("alpha", 0.05),
                replicates=reps,
                seed=seed if seed is not None else sec.getint("seed", 0),
                tests=tests,
                name=name,
            )
        except (ValueError, KeyError) as exc:
            raise ValidationError(f"campaign [{name}]: {exc}") from exc
        configs.append(cfg.validate())
    if not configs:
        raise ValidationError("config file defines no campaigns")
    return configs


def load_configs(path, seed=None):
    with open(path) as fh:
        return parse_configs(fh.read(), seed)
