"""Seeded random stable networks and entanglement statistics per lag.

Each network ``index`` draws from its own Philox stream keyed by
``(seed, index)``, so results do not depend on how networks are scheduled
across workers.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .entanglement import TOL_DET, TOL_LN, entanglement_profile
from .errors import QsnetError, RejectionLimitExceeded
from .model import NetworkSpec, build_blocks, symplectic_unit
from .spectral import _hurwitz_batch, stability_sweep, steady_spectrum, symbol

log = logging.getLogger(__name__)

SWEEP_K = 256


@dataclass(frozen=True)
class EnsembleConfig:
    count: int = 100
    N: int = 400
    n: int = 1
    m: int = 1
    d: int = 8
    seed: int = 0
    amplitude: float = 8.0
    max_rejects: int = 10000
    lag_margin: int = 4

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.N <= 2 * self.d:
            raise ValueError(f"N={self.N} must exceed 2d={2 * self.d}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def lags(self) -> np.ndarray:
        w = self.d + self.lag_margin
        return np.array([a for a in range(-w, w + 1) if a != 0])


def network_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for network ``index`` of a seeded run."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def random_network(cfg: EnsembleConfig, index: int) -> NetworkSpec:
    """Draw network ``index``: uniform entries, resampled until stable.

    ``R_0`` (symmetrised), ``R_1..R_d`` and ``M`` have i.i.d. entries on
    ``[-amplitude, amplitude]``; ``Theta`` is canonical.
    """
    if not 0 <= index < cfg.count:
        raise IndexError(f"index {index} outside 0..{cfg.count - 1}")
    rng = network_rng(cfg.seed, index)
    nn, mm, amp = 2 * cfg.n, 2 * cfg.m, cfg.amplitude
    theta = symplectic_unit(cfg.n)
    for _ in range(cfg.max_rejects):
        R = [rng.uniform(-amp, amp, (nn, nn)) for _ in range(cfg.d + 1)]
        R[0] = 0.5 * (R[0] + R[0].T)
        M = rng.uniform(-amp, amp, (mm, nn))
        spec = NetworkSpec(n=cfg.n, m=cfg.m, N=cfg.N, d=cfg.d, theta=theta, R=tuple(R), M=M)
        blocks = build_blocks(spec)
        # cheap necessary check at z = +-1 before the full sweep
        if not np.all(_hurwitz_batch(np.array([symbol(blocks, 1), symbol(blocks, -1)]))[0]):
            continue
        if stability_sweep(blocks, SWEEP_K).stable:
            return spec
    raise RejectionLimitExceeded(
        f"no stable network for index {index} after {cfg.max_rejects} draws; "
        "try a different amplitude"
    )


@dataclass
class NetworkProfile:
    index: int
    det: np.ndarray
    logneg: np.ndarray
    ambiguous: np.ndarray
    factored_agree: np.ndarray


def network_profile(cfg: EnsembleConfig, index: int) -> NetworkProfile:
    """Finite-ring entanglement profile of network ``index`` over the lag window."""
    try:
        spec = random_network(cfg, index)
        blocks = build_blocks(spec)
        spectrum = steady_spectrum(blocks, cfg.N)
        reports = entanglement_profile(blocks, cfg.N, cfg.lags, spectrum=spectrum)
    except QsnetError as exc:
        raise type(exc)(f"network {index}: {exc}") from exc
    return NetworkProfile(
        index=index,
        det=np.array([r.det_lambda for r in reports]),
        logneg=np.array([r.log_negativity for r in reports]),
        ambiguous=np.array([r.ambiguous for r in reports]),
        factored_agree=np.array([r.factored_agree for r in reports]),
    )


@dataclass
class EnsembleStats:
    """Per-lag aggregates; ``det`` and ``logneg`` hold the raw samples
    (networks x lags)."""

    config: EnsembleConfig
    lags: np.ndarray
    det: np.ndarray
    logneg: np.ndarray
    ambiguous: np.ndarray
    factored_agree: np.ndarray
    columns: dict = field(init=False)

    def __post_init__(self):
        def mean(x):
            return np.clip(x.mean(axis=0), x.min(axis=0), x.max(axis=0))

        self.columns = {
            "a": self.lags,
            "det_mean": mean(self.det),
            "det_min": self.det.min(axis=0),
            "det_max": self.det.max(axis=0),
            "logneg_mean": mean(self.logneg),
            "logneg_min": self.logneg.min(axis=0),
            "logneg_max": self.logneg.max(axis=0),
            "frac_entangled": (self.det < -TOL_DET).mean(axis=0),
        }

    @property
    def frac_entangled(self) -> np.ndarray:
        return self.columns["frac_entangled"]

    def sign_consistency(self) -> dict:
        """Agreement between the determinant and log-negativity tests."""
        det_ent = self.det < -TOL_DET
        ln_ent = self.logneg > TOL_LN
        agree = det_ent == ln_ent
        return {
            "samples": int(agree.size),
            "consistent": int(agree.sum()),
            "ambiguous_disagreements": int((~agree & self.ambiguous).sum()),
            "strict_contradictions": int((~agree & ~self.ambiguous).sum()),
        }

    def write_csv(self, target) -> None:
        """Write the per-lag table to a path or an open text stream."""
        if hasattr(target, "write"):
            self._write_rows(target)
            return
        with open(target, "w", newline="") as fh:
            self._write_rows(fh)

    def _write_rows(self, fh) -> None:
        cols = list(self.columns)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i in range(len(self.lags)):
            row = []
            for c in cols:
                x = self.columns[c][i]
                row.append(str(int(x)) if c == "a" else format(float(x), ".17g"))
            w.writerow(row)

    def write_svg(self, path) -> None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        c = self.columns
        with matplotlib.rc_context({"svg.hashsalt": "qsnet", "svg.fonttype": "none"}):
            fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
            top.fill_between(c["a"], c["det_min"], c["det_max"], color="tab:blue", alpha=0.3, lw=0)
            top.plot(c["a"], c["det_mean"], color="tab:blue")
            top.axhline(0.0, color="k", lw=0.5)
            top.set_ylabel(r"$\det\Lambda(\infty)$")
            bottom.fill_between(c["a"], c["logneg_min"], c["logneg_max"], color="tab:red", alpha=0.3, lw=0)
            bottom.plot(c["a"], c["logneg_mean"], color="tab:red")
            bottom.set_ylabel("log-negativity")
            bottom.set_xlabel("a = j - k")
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)


def run_ensemble(cfg: EnsembleConfig, jobs: int = 1) -> EnsembleStats:
    """Generate ``cfg.count`` networks and aggregate entanglement per lag.

    Networks are processed by ``jobs`` worker processes and reduced in index
    order, so the statistics do not depend on ``jobs``. Any failing network
    aborts the run.
    """
    if cfg.n != 1:
        raise ValueError("ensemble statistics require one-mode nodes (n = 1)")
    indices = range(cfg.count)
    if jobs <= 1:
        profiles = [network_profile(cfg, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            profiles = list(pool.map(network_profile, [cfg] * cfg.count, indices))
    profiles.sort(key=lambda p: p.index)
    stats = EnsembleStats(
        config=cfg,
        lags=cfg.lags,
        det=np.array([p.det for p in profiles]),
        logneg=np.array([p.logneg for p in profiles]),
        ambiguous=np.array([p.ambiguous for p in profiles]),
        factored_agree=np.array([p.factored_agree for p in profiles]),
    )
    log.info("ensemble done: %s", stats.sign_consistency())
    return stats


def config_dict(cfg: EnsembleConfig) -> dict:
    return asdict(cfg)
