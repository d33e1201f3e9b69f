"""Synthetic population and network construction.

Agents are sampled from a region's categorical distribution, wired with a
spatial preferential-attachment process (distance measured in demographic
feature space), split into target/healthy roles, and given random
normalised in-weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .model import DomainError, NetworkState

DIST_SCHEMA_VERSION = 1

AGE_BANDS = ("12-14", "15-17", "18-19", "20-24", "25-29", "30-34", "35-39", "40-44",
             "45-49", "50-54", "55-59", "60-64", "65-69", "70-74", "75-79", "80+")
FIELD_LEVELS = {
    "gender": ("M", "F"),
    "age_band": AGE_BANDS,
    "race": ("white", "non-white"),
    "student": ("yes", "no"),
    "employment": ("yes", "no", "N/A"),
    "health_category": ("non-overweight", "overweight", "obese"),
}
# first level of each categorical is the reference (no indicator column)
FEATURE_FIELDS = ("gender", "race", "student", "employment")

DEFAULT_INTERVALS = {
    "obese": (0.0, 0.35),
    "overweight": (0.35, 0.65),
    "non-overweight": (0.65, 1.0),
}


class DistributionError(DomainError):
    pass


class ConfigError(DomainError):
    pass


@dataclass(frozen=True)
class AgentProfile:
    gender: str
    age_band: str
    race: str
    student: str
    employment: str
    health_category: str

    def __post_init__(self):
        for name, levels in FIELD_LEVELS.items():
            if getattr(self, name) not in levels:
                raise DomainError(f"{name}={getattr(self, name)!r} not in {levels}")


@dataclass(frozen=True)
class DistributionSpec:
    region: str
    mode: str  # "factored" or "joint"
    fields: dict = field(default_factory=dict)  # name -> (levels, probs)
    joint: tuple = ()  # ((AgentProfile, p), ...)

    @classmethod
    def from_dict(cls, doc: dict, region: str | None = None) -> DistributionSpec:
        if doc.get("schema_version") != DIST_SCHEMA_VERSION:
            raise DistributionError(f"schema_version: expected {DIST_SCHEMA_VERSION}, "
                                    f"got {doc.get('schema_version')!r}")
        regions = doc.get("regions")
        if not isinstance(regions, dict) or not regions:
            raise DistributionError("regions: expected a non-empty object")
        if region is None:
            region = next(iter(regions))
        if region not in regions:
            raise DistributionError(f"regions: no region {region!r} (have {sorted(regions)})")
        body = regions[region]
        where = f"regions.{region}"
        mode = body.get("mode", "factored")
        if mode == "factored":
            parsed = {}
            fields = body.get("fields", {})
            for name, levels in FIELD_LEVELS.items():
                table = fields.get(name)
                if not isinstance(table, dict):
                    raise DistributionError(f"{where}.fields.{name}: missing")
                unknown = set(table) - set(levels)
                if unknown:
                    raise DistributionError(f"{where}.fields.{name}: unknown levels {sorted(unknown)}")
                probs = np.array([float(table.get(lv, 0.0)) for lv in levels])
                _check_probs(probs, f"{where}.fields.{name}")
                parsed[name] = (levels, probs)
            extra = set(fields) - set(FIELD_LEVELS)
            if extra:
                raise DistributionError(f"{where}.fields: unknown fields {sorted(extra)}")
            return cls(region, mode, parsed)
        if mode == "joint":
            rows = body.get("joint")
            if not isinstance(rows, list) or not rows:
                raise DistributionError(f"{where}.joint: expected a non-empty list")
            entries = []
            for i, row in enumerate(rows):
                try:
                    prof = AgentProfile(**row["profile"])
                except (KeyError, TypeError, DomainError) as exc:
                    raise DistributionError(f"{where}.joint[{i}]: {exc}") from None
                entries.append((prof, float(row["p"])))
            _check_probs(np.array([p for _, p in entries]), f"{where}.joint")
            return cls(region, mode, joint=tuple(entries))
        raise DistributionError(f"{where}.mode: unknown mode {mode!r}")


def _check_probs(probs, where):
    if np.any(probs < 0):
        raise DistributionError(f"{where}: negative probability")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise DistributionError(f"{where}: probabilities sum to {probs.sum():.12g}, not 1")


def load_distribution(path=None, region: str | None = None) -> DistributionSpec:
    if path is None:
        text = resources.files("netrvene").joinpath("data/distribution_default.json").read_text()
    else:
        text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return DistributionSpec.from_dict(doc, region)


@dataclass(frozen=True)
class GenConfig:
    N: int = 200
    m: int = 4
    m0: int | None = None
    rho: float = 0.1
    a: float = 0.5
    b: float = 0.5
    lambda_range: tuple = (0.0, 1.0)
    health_intervals: dict = field(default_factory=lambda: dict(DEFAULT_INTERVALS))
    distribution: str | None = None
    region: str | None = None

    @property
    def seed_size(self) -> int:
        return self.m if self.m0 is None else self.m0

    def validate(self):
        if self.m < 2:
            raise ConfigError(f"m must be >= 2, got {self.m}")
        if not self.m <= self.seed_size < self.N:
            raise ConfigError(f"need m <= m0 < N, got m={self.m}, m0={self.seed_size}, N={self.N}")
        if self.rho < 0:
            raise ConfigError("rho must be non-negative")
        if not (0 <= self.a <= 1 and 0 <= self.b <= 1):
            raise ConfigError("a and b must lie in [0, 1]")
        lo, hi = self.lambda_range
        if not 0 <= lo <= hi <= 1:
            raise ConfigError("lambda_range must satisfy 0 <= lo <= hi <= 1")


# --------------------------------------------------------------------------


def sample_agents(dist: DistributionSpec, N: int, rng) -> list[AgentProfile]:
    if dist.mode == "joint":
        probs = np.array([p for _, p in dist.joint])
        idx = rng.choice(len(dist.joint), size=N, p=probs / probs.sum())
        return [dist.joint[i][0] for i in idx]
    cols = {}
    for name in FIELD_LEVELS:
        levels, probs = dist.fields[name]
        cols[name] = rng.choice(len(levels), size=N, p=probs / probs.sum())
    return [AgentProfile(**{name: dist.fields[name][0][cols[name][i]] for name in FIELD_LEVELS})
            for i in range(N)]


def feature_matrix(agents) -> np.ndarray:
    """Age band as ordinal/15 plus one indicator per non-reference level."""
    rows = []
    for ag in agents:
        vec = [AGE_BANDS.index(ag.age_band) / (len(AGE_BANDS) - 1)]
        for name in FEATURE_FIELDS:
            levels = FIELD_LEVELS[name]
            val = getattr(ag, name)
            vec.extend(1.0 if val == lv else 0.0 for lv in levels[1:])
        rows.append(vec)
    return np.array(rows, dtype=np.float64)


def build_topology(agents, cfg: GenConfig, rng) -> list[tuple[int, int]]:
    """Directed edge list (both directions for every link)."""
    cfg.validate()
    N, m, m0 = len(agents), cfg.m, cfg.seed_size
    if N != cfg.N:
        raise ConfigError(f"got {N} agents for N={cfg.N}")
    feats = feature_matrix(agents)
    degree = np.zeros(N)
    links = []
    for u in range(m0):
        for v in range(u + 1, m0):
            links.append((u, v))
    degree[:m0] = 2 * (m0 - 1)
    for u in range(m0, N):
        dist = np.linalg.norm(feats[:u] - feats[u], axis=1)
        mass = np.exp(-cfg.rho * dist) * degree[:u]
        chosen = []
        for _ in range(m):
            p = mass / mass.sum()
            j = int(rng.choice(u, p=p))
            chosen.append(j)
            mass[j] = 0.0
        for j in chosen:
            links.append((j, u))
            degree[j] += 2
        degree[u] = 2 * m
    edges = []
    for u, v in links:
        edges.append((u, v))
        edges.append((v, u))
    return edges


def assign_roles(agents, a: float, b: float, rng):
    """Random target subset of the obese agents and healthy subset of the rest."""
    obese = np.array([i for i, ag in enumerate(agents) if ag.health_category == "obese"], dtype=np.int64)
    other = np.array([i for i, ag in enumerate(agents) if ag.health_category != "obese"], dtype=np.int64)
    ns = int(np.floor(a * obese.size + 0.5))
    nh = int(np.floor(b * other.size + 0.5))
    S = np.sort(rng.choice(obese, size=ns, replace=False)) if ns else np.zeros(0, dtype=np.int64)
    H = np.sort(rng.choice(other, size=nh, replace=False)) if nh else np.zeros(0, dtype=np.int64)
    return S.astype(np.int64), H.astype(np.int64)


def init_weights(indptr: np.ndarray, rng) -> np.ndarray:
    """Independent U(0, 1] draws normalised per sink."""
    nnz = int(indptr[-1])
    w = rng.random(nnz)
    zero = w == 0.0
    while np.any(zero):
        w[zero] = rng.random(int(zero.sum()))
        zero = w == 0.0
    deg = np.diff(indptr)
    sums = np.add.reduceat(w, indptr[:-1][deg > 0]) if nnz else np.zeros(0)
    totals = np.zeros(deg.size)
    totals[deg > 0] = sums
    return w / np.repeat(totals, deg)


def health_to_scalar(category: str, rng, intervals=None) -> float:
    lo, hi = (intervals or DEFAULT_INTERVALS)[category]
    return float(rng.uniform(lo, hi))


def generate_network(cfg: GenConfig, rng, dist: DistributionSpec | None = None):
    """Return ``(state, agents)`` for a freshly generated population."""
    cfg.validate()
    if dist is None:
        dist = load_distribution(cfg.distribution, cfg.region)
    agents = sample_agents(dist, cfg.N, rng)
    edges = build_topology(agents, cfg, rng)
    S, H = assign_roles(agents, cfg.a, cfg.b, rng)
    arr = np.array(edges, dtype=np.int64)
    order = np.lexsort((arr[:, 0], arr[:, 1]))
    arr = arr[order]
    indptr = np.zeros(cfg.N + 1, dtype=np.int64)
    np.cumsum(np.bincount(arr[:, 1], minlength=cfg.N), out=indptr[1:])
    w = init_weights(indptr, rng)
    health = np.array([health_to_scalar(ag.health_category, rng, cfg.health_intervals)
                       for ag in agents])
    lo, hi = cfg.lambda_range
    lam = rng.uniform(lo, hi, size=cfg.N)
    state = NetworkState(indptr=indptr, src=arr[:, 0].copy(), weight=w, health=health,
                         susceptibility=lam, target=S, healthy=H, clock=0)
    return state, agents
