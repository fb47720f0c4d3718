"""Command-line driver: configuration, orchestration and CSV export.

Usage::

    hydrolaser spectrum  --n0 10 --amplitude 5e-6 --grid 0.05:0.6:111
    hydrolaser intensity --n0 10 --photon-ev 0.296 --grid 5e-8:5e-6:41:log
    hydrolaser ionize    --n0 10 --photon-ev 2.37 --grid 1e-6:1e-5:10
    hydrolaser eigen     --n0 2 --amplitude 0

Settings come from command-line flags, an optional ``key=value`` file given
with ``--config`` and built-in defaults, in that order of precedence.  The
``HYDROLASER_CACHE`` environment variable may supply the cache directory and
nothing else.

Every CSV starts with ``# key=value`` lines that echo the full configuration,
the physical constants and the conventions in force; the lines prefixed
``# config.`` are enough to rerun the computation (``--replay FILE``).
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .basis import DIPOLE_MAX, build_basis
from .cache import CACHE_ENV, MatrixCache
from .constants import CODATA, BasisState, LaserParams, hartree_to_ev
from .eigensolver import ground_state_index
from .errors import DomainError
from .ionization import NORMALIZATION, ionization_scan
from .transitions import default_targets, intensity_scan, photon_energy_scan, solve

logger = logging.getLogger(__name__)

MODES = ("spectrum", "intensity", "ionize", "eigen")

EXIT_OK = 0
EXIT_POINT_FAILURES = 1
EXIT_CONFIG_ERROR = 2

# documented defaults; "by_mode" entries depend on the subcommand
DEFAULTS = {
    "mode": None,
    "n0": 10,
    "amplitude": 5e-6,
    "photon_ev": {"by_mode": {"spectrum": 0.296, "intensity": 0.296, "ionize": 2.37, "eigen": 0.296}},
    "grid": {"by_mode": {"spectrum": "0.05:0.6:111", "intensity": "5e-8:5e-6:41:log", "ionize": "1e-6:1e-5:10", "eigen": None}},
    "from": "1,0,0",
    "targets": None,
    "full": False,
    "mu_window": "-12:2",
    "out": None,
    "cache": None,
    "workers": 1,
}
VALID_KEYS = tuple(DEFAULTS)

CONVENTIONS = {
    "units_internal": "atomic units with reduced mass = 1",
    "energy_unit": "eV",
    "amplitude_unit": "V*s/m",
    "intensity_definition": "I = eps0*c*omega^2*A^2 (circular polarization), W/cm^2",
    "hamiltonian": "H_ps = p^2/2 - 1/r + omega*L_z + A*p_x + A^2/2",
    "photon_absorption": "mu' = mu - 1",
    "basis_phase": "psi_nlmu = i^l R_nl Y_lmu",
    "W_definition": "time average sum_i C_a(i)^2 C_b(i)^2",
    "sigma_unit": "pi*a0^2",
    "continuum_normalization": NORMALIZATION,
    "float_format": "%.16e",
}


class ConfigError(DomainError):
    """Invalid configuration; raised before any computation starts."""


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    steps: int
    scale: str = "lin"

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = str(text).split(":")
        if len(parts) not in (3, 4):
            raise ConfigError(f"grid must be lo:hi:steps[:log], got {text!r}")
        try:
            lo, hi = float(parts[0]), float(parts[1])
            steps = int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"grid must be lo:hi:steps[:log], got {text!r}") from exc
        scale = parts[3] if len(parts) == 4 else "lin"
        if scale not in ("lin", "log"):
            raise ConfigError(f"grid scale must be 'lin' or 'log', got {scale!r}")
        if steps < 1:
            raise ConfigError(f"grid needs steps >= 1, got {steps}")
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
            raise ConfigError(f"grid needs finite lo <= hi, got {lo}:{hi}")
        if steps == 1 and hi != lo:
            raise ConfigError("a one-point grid needs lo == hi")
        if scale == "log" and lo <= 0:
            raise ConfigError("a log grid needs lo > 0")
        return cls(lo, hi, steps, scale)

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.steps)
        return np.linspace(self.lo, self.hi, self.steps)

    def __str__(self):
        tail = ":log" if self.scale == "log" else ""
        return f"{self.lo!r}:{self.hi!r}:{self.steps}{tail}"


@dataclass(frozen=True)
class RunConfig:
    """Validated run description.  Constructed only by :func:`parse_config`."""

    mode: str
    n0: int
    amplitude: float
    photon_ev: float
    grid: Grid | None
    from_state: BasisState
    targets: tuple | None
    full: bool
    mu_window: tuple
    out: Path
    cache: Path | None
    workers: int
    provenance: dict = field(default_factory=dict, compare=False, repr=False)

    def echo(self) -> dict:
        """Settings that determine the output, as strings (cache/workers/out excluded)."""
        return {
            "mode": self.mode,
            "n0": str(self.n0),
            "amplitude": repr(self.amplitude),
            "photon_ev": repr(self.photon_ev),
            "grid": "" if self.grid is None else str(self.grid),
            "from": self.from_state.label(),
            "targets": "" if self.targets is None else ";".join(s.label() for s in self.targets),
            "full": str(self.full).lower(),
            "mu_window": f"{self.mu_window[0]}:{self.mu_window[1]}",
        }


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

def read_config_file(path) -> dict:
    """``key=value`` pairs, one per line; blank lines and ``#`` comments ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[_normalize_key(key, f"{path}:{lineno}")] = value
    return out


def read_replay_header(path) -> dict:
    """Configuration echoed in the ``# config.key=value`` header of a CSV written by :func:`run`."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            if not raw.startswith("#"):
                break
            body = raw[1:].strip()
            if body.startswith("config.") and "=" in body:
                key, value = body[len("config."):].split("=", 1)
                if value != "":
                    out[_normalize_key(key, str(path))] = value
    if not out:
        raise ConfigError(f"{path}: no '# config.' header lines found")
    return out


def _normalize_key(key: str, where: str) -> str:
    norm = key.strip().lower().replace("-", "_")
    if norm == "from_state":
        norm = "from"
    if norm not in DEFAULTS:
        raise ConfigError(f"{where}: unknown key {key!r}; valid keys: {', '.join(VALID_KEYS)}")
    return norm


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hydrolaser",
        description="Hydrogen in a circularly polarized laser: transition spectra, "
        "intensity scans, photoionization and pseudo-energies.",
    )
    p.add_argument("mode", nargs="?", choices=MODES, help="what to compute")
    p.add_argument("--config", help="key=value settings file")
    p.add_argument("--replay", help="take the configuration from the header of an earlier CSV")
    p.add_argument("--n0", help="basis truncation level (n <= n0), default 10")
    p.add_argument("--amplitude", help="vector-potential amplitude A in V*s/m")
    p.add_argument("--photon-ev", dest="photon_ev", help="photon energy in eV")
    p.add_argument("--grid", help="scan grid lo:hi:steps[:log]; eV for spectrum, V*s/m otherwise")
    p.add_argument("--from", dest="from", help="initial state n,l,mu (default 1,0,0)")
    p.add_argument("--targets", help="target states 'n,l,mu;n,l,mu;...' or 'all' (default n <= 4)")
    p.add_argument("--full", action="store_const", const="true", help="report every basis state")
    p.add_argument("--mu-window", dest="mu_window", help="ionization channel window lo:hi (default -12:2)")
    p.add_argument("--out", help="output CSV path (default <mode>.csv)")
    p.add_argument("--cache", help="cache directory for matrices and eigen-solutions")
    p.add_argument("--workers", help="worker processes for scans (default 1)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _as_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"full must be a boolean, got {text!r}")


def _as_int(key, text) -> int:
    try:
        value = float(text)
    except (TypeError, ValueError):
        value = math.nan
    if not math.isfinite(value) or value != int(value):
        raise ConfigError(f"{key} must be an integer, got {text!r}")
    return int(value)


def _as_float(key, text) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number, got {text!r}") from exc
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {text!r}")
    return value


def _parse_state(key, text) -> BasisState:
    try:
        return BasisState.parse(str(text))
    except DomainError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def parse_config(argv: Sequence[str] | None = None, env=None) -> RunConfig:
    """Merge flags, an optional settings file and defaults into a validated :class:`RunConfig`.

    Raises
    ------
    ConfigError
        Unknown or ill-typed key, missing mode, or a value outside its domain.
    """
    env = os.environ if env is None else env
    parser = build_parser()
    ns = parser.parse_args(list(argv) if argv is not None else None)

    layers = []  # lowest precedence first
    if ns.replay:
        layers.append(("replay", read_replay_header(ns.replay)))
    if ns.config:
        layers.append(("file", read_config_file(ns.config)))
    flags = {k: getattr(ns, k) for k in VALID_KEYS if getattr(ns, k, None) is not None}
    layers.append(("flag", flags))

    raw, provenance = {}, {}
    for source, values in layers:
        for key, value in values.items():
            if key in raw and raw[key] != value:
                logger.info("%s: %s value %r overrides %s value %r", key, source, value, provenance[key], raw[key])
            raw[key] = value
            provenance[key] = source
    if raw.get("cache") is None and env.get(CACHE_ENV):
        raw["cache"] = env[CACHE_ENV]
        provenance["cache"] = "env"

    mode = raw.get("mode")
    if mode is None:
        raise ConfigError(f"missing mode; choose one of {', '.join(MODES)}")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")

    def get(key):
        if key in raw:
            return raw[key]
        provenance.setdefault(key, "default")
        default = DEFAULTS[key]
        if isinstance(default, dict):
            return default["by_mode"][mode]
        return default

    n0 = _as_int("n0", get("n0"))
    if n0 < 1:
        raise ConfigError(f"n0 must satisfy n0 >= 1, got {n0}")
    amplitude = _as_float("amplitude", get("amplitude"))
    if amplitude < 0:
        raise ConfigError(f"amplitude must be >= 0 V*s/m, got {amplitude}")
    photon_ev = _as_float("photon_ev", get("photon_ev"))
    if photon_ev <= 0:
        raise ConfigError(f"photon_ev must be > 0, got {photon_ev}")

    grid_text = get("grid")
    grid = None if mode == "eigen" or grid_text in (None, "") else Grid.parse(grid_text)
    if mode != "eigen" and grid is None:
        raise ConfigError(f"mode {mode} needs a grid lo:hi:steps")
    if mode == "spectrum":
        if grid.lo <= 0:
            raise ConfigError("photon-energy grid must be > 0 eV")
        photon_values = [grid.hi]
    else:
        if grid is not None and grid.lo < 0:
            raise ConfigError("amplitude grid must be >= 0 V*s/m")
        photon_values = [photon_ev]
    for hw in photon_values:
        ka0 = CODATA.fine_structure_alpha * hw / CODATA.hartree_eV
        if ka0 > DIPOLE_MAX:
            raise ConfigError(f"photon energy {hw} eV violates the dipole limit (k*a0 = {ka0:.3g} > {DIPOLE_MAX})")

    basis = build_basis(n0)
    from_state = _parse_state("from", get("from"))
    if from_state not in basis:
        raise ConfigError(f"from state {from_state.label()} is not in the basis truncated at n0={n0}")
    targets_text = get("targets")
    targets = None
    if targets_text not in (None, "") and str(targets_text).strip().lower() != "all":
        targets = tuple(_parse_state("targets", t) for t in str(targets_text).split(";") if t.strip())
        for t in targets:
            if t not in basis:
                raise ConfigError(f"target {t.label()} is not in the basis truncated at n0={n0}")
    full = _as_bool(get("full")) or (targets_text is not None and str(targets_text).strip().lower() == "all")

    window = str(get("mu_window")).split(":")
    if len(window) != 2:
        raise ConfigError(f"mu_window must be lo:hi, got {get('mu_window')!r}")
    mu_window = (_as_int("mu_window", window[0]), _as_int("mu_window", window[1]))
    if mu_window[0] > mu_window[1]:
        raise ConfigError(f"mu_window needs lo <= hi, got {mu_window}")

    workers = _as_int("workers", get("workers"))
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")

    out = Path(get("out") or f"{mode}.csv")
    if not out.parent.exists():
        raise ConfigError(f"output directory {out.parent} does not exist")
    cache = get("cache")
    cache = Path(cache) if cache else None

    config = RunConfig(
        mode, n0, amplitude, photon_ev, grid, from_state, targets, full, mu_window, out, cache, workers,
        provenance=dict(provenance),
    )
    logger.debug("configuration: %s", config.echo())
    return config


# --------------------------------------------------------------------------
# CSV export
# --------------------------------------------------------------------------

def format_value(value) -> str:
    """Fixed 17-significant-digit scientific notation for floats, plain text otherwise."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.16e" % float(value)
    return str(value).replace(",", ";").replace("\n", " ")


def header_lines(config: RunConfig, extra: dict | None = None) -> list[str]:
    lines = [f"generator=hydrolaser {__version__}"]
    lines += [f"config.{k}={v}" for k, v in config.echo().items()]
    lines += CODATA.header_lines()
    lines += [f"{k}={v}" for k, v in CONVENTIONS.items()]
    for k, v in (extra or {}).items():
        lines.append(f"{k}={v}")
    return ["# " + line for line in lines]


def render_csv(headers: Sequence[str], columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    for line in headers:
        buf.write(line + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(format_value(v) for v in row) + "\n")
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write through a temporary file in the same directory and rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------

def _label(state: BasisState) -> str:
    return f"{state.n}_{state.l}_{state.mu}"


def _spectrum_rows(config: RunConfig, table):
    targets = list(build_basis(config.n0).states) if config.full else list(table.targets)
    varying = "photon_energy_eV" if table.kind == "spectrum" else "amplitude_A"
    columns = [varying, "photon_energy_eV" if varying == "amplitude_A" else "amplitude_A", "intensity_W_per_cm2"]
    columns += [f"W_{_label(t)}" for t in targets]
    columns += [f"eta_{_label(t)}" for t in targets]
    columns += ["residual", "ground_overlap", "n0", "constants_hash", "error"]
    rows = []
    for r in table.rows:
        first = (r.photon_energy, r.amplitude_A) if varying == "photon_energy_eV" else (r.amplitude_A, r.photon_energy)
        row = list(first) + [r.intensity]
        row += [r.probabilities.get(t) for t in targets]
        row += [r.eta.get(t) for t in targets]
        row += [r.residual, r.ground_overlap, config.n0, CODATA.hash(), r.error]
        rows.append(row)
    return columns, rows


def _ionize_rows(config: RunConfig, table):
    columns = [
        "amplitude_A", "photon_energy_eV", "intensity_W_per_cm2", "mu", "E_f0_eV", "eta", "open",
        "sigma_pi_a0_2", "tail", "l_cut", "ground_overlap", "ambiguous", "residual", "n0", "constants_hash", "error",
    ]
    rows = []
    for r in table.rows:
        common = [r.amplitude_A, table.photon_energy, r.intensity]
        provenance = [r.ground_overlap, r.ambiguous, r.residual, config.n0, CODATA.hash()]
        if not r.ok:
            rows.append(common + [None] * 7 + provenance + [r.error])
            continue
        for ch in r.channels:
            rows.append(
                common + [ch.mu, ch.E_f0, ch.eta, ch.is_open, ch.sigma, ch.tail, ch.l_cut] + provenance + [""]
            )
    return columns, rows


def _eigen_rows(config: RunConfig, sol):
    gs = ground_state_index(sol)
    states = sol.basis.states
    columns = [
        "index", "energy_hartree", "energy_eV", "dominant_n", "dominant_l", "dominant_mu",
        "dominant_weight", "ground_weight", "is_ground",
    ]
    V2 = sol.vectors**2
    g = sol.basis.position(config.from_state)
    rows = []
    for i, E in enumerate(sol.energies):
        a = int(np.argmax(V2[:, i]))
        s = states[a]
        rows.append([i, float(E), hartree_to_ev(float(E)), s.n, s.l, s.mu, float(V2[a, i]), float(V2[g, i]), i == gs.index])
    extra = {
        "residual": format_value(sol.residual_norm),
        "orthogonality_error": format_value(sol.orthogonality_error),
        "ground_index": str(gs.index),
        "ground_overlap": format_value(gs.overlap),
    }
    return columns, rows, extra


def run(config: RunConfig) -> int:
    """Execute ``config`` and write its CSV; returns the process exit status."""
    cache = MatrixCache(config.cache) if config.cache is not None else None
    extra = {}
    failures = 0
    if config.mode in ("spectrum", "intensity"):
        targets = list(config.targets) if config.targets is not None else default_targets(config.n0)
        if config.mode == "spectrum":
            table = photon_energy_scan(
                config.n0, config.amplitude, config.grid.values(), config.from_state, targets,
                cache=cache, workers=config.workers,
            )
        else:
            table = intensity_scan(
                config.n0, config.photon_ev, config.grid.values(), config.from_state, targets,
                cache=cache, workers=config.workers,
            )
        columns, rows = _spectrum_rows(config, table)
        failures = sum(not r.ok for r in table.rows)
    elif config.mode == "ionize":
        table = ionization_scan(
            config.n0, config.photon_ev, config.grid.values(), config.mu_window, cache=cache, workers=config.workers,
        )
        columns, rows = _ionize_rows(config, table)
        failures = sum(not r.ok for r in table.rows)
        extra["l_cut"] = f"n0 ({config.n0})"
    else:
        laser = LaserParams(config.amplitude, config.photon_ev)
        try:
            sol = solve(config.n0, laser, cache)
        except Exception as exc:
            logger.error("eigen run failed: %s", exc)
            return EXIT_POINT_FAILURES
        columns, rows, extra = _eigen_rows(config, sol)
    extra["failed_points"] = str(failures)
    atomic_write(config.out, render_csv(header_lines(config, extra), columns, rows))
    logger.info("wrote %s (%d rows, %d failed points)", config.out, len(rows), failures)
    return EXIT_OK if failures == 0 else EXIT_POINT_FAILURES


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    verbose = sum(a.count("v") for a in argv if a.startswith("-") and not a.startswith("--") and set(a[1:]) == {"v"})
    verbose += argv.count("--verbose")
    logging.basicConfig(
        level=logging.WARNING - 10 * min(verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"hydrolaser: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return run(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
